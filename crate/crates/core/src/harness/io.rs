//! JSON files for sampled patterns and extrapolation results.
//!
//! Complex numbers are written as `[re, im]` pairs. Magnitude kinds store
//! their reading in `re` with `im = 0`. Directions are in radians, near-field
//! positions in wavelengths:
//!
//! ```json
//! {
//!   "kind": "complex",
//!   "points": [{"azimuth": 0.0, "elevation": 0.1}, {"position": [1.0, 0.0, 0.0]}],
//!   "values": [[1.0, 0.0], [0.5, -0.5]]
//! }
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::design::{ConfigurationPoint, DesignSpaceModel, Direction, Excitation, MeasurementKind, SamplePoint, SampledPattern};
use crate::error::{Error, Result};
use crate::solver::ExtrapolationResult;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPattern {
    kind: MeasurementKind,
    points: Vec<SamplePoint>,
    values: Vec<Complex64>,
}

/// Parses JSON, reporting the path of the first offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Malformed {
            field: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

fn malformed(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Malformed {
        field: field.into(),
        message: message.into(),
    }
}

/// Parses and validates a sampled-pattern document.
pub fn pattern_from_json(text: &str) -> Result<SampledPattern> {
    let raw: RawPattern = parse_json(text)?;
    if raw.points.is_empty() {
        return Err(malformed("points", "at least one sample point is required"));
    }
    if raw.points.len() != raw.values.len() {
        return Err(malformed(
            "values",
            format!("{} values for {} points", raw.values.len(), raw.points.len()),
        ));
    }
    let mut points = Vec::with_capacity(raw.points.len());
    for (i, p) in raw.points.into_iter().enumerate() {
        points.push(match p {
            SamplePoint::Far(d) => SamplePoint::Far(
                Direction::new(d.azimuth, d.elevation).map_err(|e| malformed(format!("points[{i}]"), e.to_string()))?,
            ),
            SamplePoint::Near { position } => {
                if !position.iter().all(|v| v.is_finite()) {
                    return Err(malformed(format!("points[{i}].position"), "coordinates must be finite"));
                }
                p
            }
        });
    }
    for (i, v) in raw.values.iter().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(malformed(format!("values[{i}]"), "value must be finite"));
        }
        if raw.kind.is_magnitude() && v.im != 0.0 {
            return Err(malformed(format!("values[{i}]"), "magnitude readings must have a zero imaginary part"));
        }
        if raw.kind == MeasurementKind::MagnitudeLinear && v.re < 0.0 {
            return Err(malformed(format!("values[{i}]"), "linear magnitudes must be nonnegative"));
        }
    }
    SampledPattern::new(points, raw.values, raw.kind)
}

pub fn pattern_to_json(pattern: &SampledPattern) -> String {
    serde_json::to_string_pretty(pattern).expect("patterns always serialize")
}

pub fn read_pattern(path: &Path) -> Result<SampledPattern> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    pattern_from_json(&text)
}

pub fn write_pattern(path: &Path, pattern: &SampledPattern) -> Result<()> {
    fs::write(path, pattern_to_json(pattern)).map_err(|e| Error::io(path, e))
}

/// Reads a bare JSON list of sample points.
pub fn read_points(path: &Path) -> Result<Vec<SamplePoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&text)
}

/// On-disk form of an extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub model: DesignSpaceModel,
    pub kind: MeasurementKind,
    pub config: ConfigurationPoint,
    pub excitation: Excitation,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub undersampled: bool,
    pub queries: Vec<SamplePoint>,
    pub predicted: Vec<Complex64>,
}

impl ResultFile {
    pub fn new(model: &DesignSpaceModel, kind: MeasurementKind, queries: &[SamplePoint], result: &ExtrapolationResult) -> Self {
        ResultFile {
            model: model.clone(),
            kind,
            config: result.config.clone(),
            excitation: result.excitation.clone(),
            residual_history: result.residual_history.clone(),
            converged: result.converged,
            undersampled: result.undersampled,
            queries: queries.to_vec(),
            predicted: result.predicted.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results always serialize")
    }
}
