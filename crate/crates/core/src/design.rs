//! Design spaces, sample points and measured patterns.
//!
//! A design is a pair (configuration, excitation). The configuration is a
//! real vector fixing the antenna geometry; the excitation is the complex
//! vector driving its ports. Every pattern model is linear in the excitation
//! and usually nonlinear in the configuration.
//!
//! Lengths are in wavelengths throughout, so the free-space wavenumber is
//! `2π`. Azimuth is measured in the horizontal plane and elevation up from it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::forward::{self, DishConfig, GeneralArrayConfig, HornConfig, RectArrayConfig};

/// Lowest value reported in decibel mode; `|field| = 0` maps here.
pub const DB_FLOOR: f64 = -300.0;

/// A far-field direction on the unit sphere, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Direction {
    /// Builds a direction, wrapping the azimuth into `[-π, π)`.
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(Error::invalid("direction angles must be finite"));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&elevation) {
            return Err(Error::invalid(format!(
                "elevation {elevation} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Direction {
            azimuth: wrap_azimuth(azimuth),
            elevation,
        })
    }

    pub fn from_degrees(azimuth: f64, elevation: f64) -> Result<Self> {
        Self::new(azimuth.to_radians(), elevation.to_radians())
    }

    pub fn boresight() -> Self {
        Direction {
            azimuth: 0.0,
            elevation: 0.0,
        }
    }

    /// Returns the same direction with its azimuth re-wrapped.
    pub fn normalized(self) -> Self {
        Direction {
            azimuth: wrap_azimuth(self.azimuth),
            elevation: self.elevation,
        }
    }

    /// Unit propagation vector. Boresight is `+y`, positive azimuth turns
    /// toward `+x` and positive elevation toward `+z`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (sa, ca) = self.azimuth.sin_cos();
        let (se, ce) = self.elevation.sin_cos();
        [ce * sa, ce * ca, se]
    }
}

/// Wraps an angle into `[-π, π)`. Values already in range are returned
/// unchanged, which makes the operation idempotent bit for bit.
pub fn wrap_azimuth(azimuth: f64) -> f64 {
    if (-PI..PI).contains(&azimuth) {
        return azimuth;
    }
    let wrapped = (azimuth + PI).rem_euclid(TAU) - PI;
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Where a measurement is taken: a far-field direction or a near-field
/// position (in wavelengths).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SamplePoint {
    Far(Direction),
    Near { position: [f64; 3] },
}

impl SamplePoint {
    pub fn direction(&self) -> Option<Direction> {
        match self {
            SamplePoint::Far(d) => Some(*d),
            SamplePoint::Near { .. } => None,
        }
    }

    pub fn position(&self) -> Option<[f64; 3]> {
        match self {
            SamplePoint::Far(_) => None,
            SamplePoint::Near { position } => Some(*position),
        }
    }
}

impl From<Direction> for SamplePoint {
    fn from(d: Direction) -> Self {
        SamplePoint::Far(d)
    }
}

/// What a single measurement records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementKind {
    #[serde(rename = "complex")]
    ComplexField,
    #[serde(rename = "mag")]
    MagnitudeLinear,
    #[serde(rename = "db")]
    MagnitudeDb,
}

impl MeasurementKind {
    /// Real dimension of one measured value.
    pub fn dim_v(self) -> usize {
        match self {
            MeasurementKind::ComplexField => 2,
            MeasurementKind::MagnitudeLinear | MeasurementKind::MagnitudeDb => 1,
        }
    }

    /// Converts a complex field value into this kind's value space. Magnitude
    /// kinds return a real number in the real part.
    pub fn measure(self, field: Complex64) -> Complex64 {
        match self {
            MeasurementKind::ComplexField => field,
            MeasurementKind::MagnitudeLinear => Complex64::new(field.norm(), 0.0),
            MeasurementKind::MagnitudeDb => Complex64::new(to_db(field.norm()), 0.0),
        }
    }

    pub fn is_magnitude(self) -> bool {
        !matches!(self, MeasurementKind::ComplexField)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementKind::ComplexField => "complex",
            MeasurementKind::MagnitudeLinear => "mag",
            MeasurementKind::MagnitudeDb => "db",
        }
    }
}

impl std::str::FromStr for MeasurementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(MeasurementKind::ComplexField),
            "mag" => Ok(MeasurementKind::MagnitudeLinear),
            "db" => Ok(MeasurementKind::MagnitudeDb),
            other => Err(Error::invalid(format!(
                "unknown measurement kind `{other}` (expected complex, mag or db)"
            ))),
        }
    }
}

impl fmt::Display for MeasurementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `20·log10(magnitude)`, floored at [`DB_FLOOR`].
pub fn to_db(magnitude: f64) -> f64 {
    if magnitude <= 0.0 {
        return DB_FLOOR;
    }
    (20.0 * magnitude.log10()).max(DB_FLOOR)
}

/// Inverse of [`to_db`].
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Real configuration vector; units depend on the antenna family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfigurationPoint(pub Vec<f64>);

impl ConfigurationPoint {
    pub fn new(values: Vec<f64>) -> Self {
        ConfigurationPoint(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Complex port excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Excitation(pub Vec<Complex64>);

impl Excitation {
    pub fn new(values: Vec<Complex64>) -> Self {
        Excitation(values)
    }

    /// Scales `values` to unit Euclidean norm. Fails on a zero or non-finite
    /// vector.
    pub fn unit(values: Vec<Complex64>) -> Result<Self> {
        let norm = l2_norm(&values);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("cannot normalize a zero or non-finite excitation"));
        }
        Ok(Excitation(values.into_iter().map(|v| v / norm).collect()))
    }

    pub fn ones(n: usize) -> Self {
        Excitation(vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// True when `‖a‖₂ = 1` within `1e-9`.
    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-9
    }
}

pub(crate) fn l2_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Measurements at a set of sample points.
///
/// Values are stored as complex numbers for every kind; magnitude kinds keep
/// their real reading in the real part with a zero imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPattern {
    pub kind: MeasurementKind,
    pub points: Vec<SamplePoint>,
    pub values: Vec<Complex64>,
}

impl SampledPattern {
    pub fn new(points: Vec<SamplePoint>, values: Vec<Complex64>, kind: MeasurementKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("a sampled pattern needs at least one point"));
        }
        check_len("pattern values", points.len(), values.len())?;
        Ok(SampledPattern {
            kind,
            points,
            values,
        })
    }

    /// Measures complex field values in the requested kind.
    pub fn from_field(points: Vec<SamplePoint>, field: &[Complex64], kind: MeasurementKind) -> Result<Self> {
        let values = field.iter().map(|&f| kind.measure(f)).collect();
        Self::new(points, values, kind)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    pub fn directions(&self) -> Result<Vec<Direction>> {
        far_directions(&self.points)
    }
}

pub(crate) fn far_directions(points: &[SamplePoint]) -> Result<Vec<Direction>> {
    points
        .iter()
        .map(|p| {
            p.direction()
                .ok_or_else(|| Error::invalid("this model needs far-field direction sample points"))
        })
        .collect()
}

pub(crate) fn near_positions(points: &[SamplePoint]) -> Result<Vec<[f64; 3]>> {
    points
        .iter()
        .map(|p| {
            p.position()
                .ok_or_else(|| Error::invalid("this model needs near-field position sample points"))
        })
        .collect()
}

/// Real dimension of a design space: each complex excitation entry counts
/// twice. Global phase is not quotiented out.
pub fn design_dim(config_dim: usize, excitation_dim: usize) -> usize {
    config_dim + 2 * excitation_dim
}

/// Smallest `K` with `K·dim_v > 2·design_dim`.
pub fn min_samples_for(design_dim: usize, dim_v: usize) -> usize {
    assert!(dim_v > 0, "measurement dimension must be positive");
    2 * design_dim / dim_v + 1
}

/// The antenna families with a built-in pattern model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AntennaFamily {
    /// `rows × cols` isotropic elements on a rectilinear lattice in the
    /// aperture plane. Configuration: `rows-1` row gaps followed by `cols-1`
    /// column gaps.
    RectArray { rows: usize, cols: usize },
    /// `elements` isotropic radiators at free positions, observed in the
    /// near field. Configuration: flattened `xyz` positions.
    GeneralArray { elements: usize },
    /// E-plane sectoral horn. Configuration: width, mouth height, slant radius.
    EPlaneHorn,
    /// Isotropic-fed elliptical paraboloid reflector. Configuration: rim radii
    /// `(x, z)`, curvatures `(a, b)` and feed position `xyz`.
    Dish { n_angular: usize, n_radial: usize },
}

/// A parametric antenna family together with the box its configuration may
/// range over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpaceModel {
    pub name: String,
    pub family: AntennaFamily,
    pub config_bounds: Vec<(f64, f64)>,
}

/// Upper bound on each gap between adjacent array rows or columns.
pub const DEFAULT_MAX_SPACING: f64 = 0.5;

impl DesignSpaceModel {
    pub fn new(name: impl Into<String>, family: AntennaFamily, config_bounds: Vec<(f64, f64)>) -> Result<Self> {
        let model = DesignSpaceModel {
            name: name.into(),
            family,
            config_bounds,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn rect_array(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("a rectangular array needs at least one row and column"));
        }
        let gaps = rows - 1 + cols - 1;
        Self::new(
            format!("rect_{rows}x{cols}"),
            AntennaFamily::RectArray { rows, cols },
            vec![(0.0, DEFAULT_MAX_SPACING); gaps],
        )
    }

    /// General array with every coordinate bounded by `±extent`.
    pub fn general_array(elements: usize, extent: f64) -> Result<Self> {
        if elements == 0 {
            return Err(Error::invalid("a general array needs at least one element"));
        }
        Self::new(
            format!("array_{elements}"),
            AntennaFamily::GeneralArray { elements },
            vec![(-extent, extent); 3 * elements],
        )
    }

    /// E-plane horn with aperture dimensions up to 6 wavelengths. The slant
    /// radius range starts at 3λ so every box point satisfies
    /// `mouth_height ≤ 2·slant_radius`.
    pub fn eplane_horn() -> Self {
        DesignSpaceModel {
            name: "horn".into(),
            family: AntennaFamily::EPlaneHorn,
            config_bounds: vec![(0.5, 6.0), (0.5, 6.0), (3.0, 6.0)],
        }
    }

    pub fn dish() -> Self {
        Self::dish_with_grid(forward::DEFAULT_ANGULAR, forward::DEFAULT_RADIAL)
            .expect("default dish grid is valid")
    }

    pub fn dish_with_grid(n_angular: usize, n_radial: usize) -> Result<Self> {
        forward::check_grid_size(n_angular, n_radial)?;
        Self::new(
            "dish",
            AntennaFamily::Dish {
                n_angular,
                n_radial,
            },
            vec![
                (0.5, 6.0),
                (0.5, 6.0),
                (0.0, 6.0),
                (0.0, 6.0),
                (-6.0, 6.0),
                (0.0, 6.0),
                (-6.0, 6.0),
            ],
        )
    }

    pub fn with_bounds(mut self, config_bounds: Vec<(f64, f64)>) -> Result<Self> {
        self.config_bounds = config_bounds;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let expected = match self.family {
            AntennaFamily::RectArray { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::invalid("rows and cols must be positive"));
                }
                rows + cols - 2
            }
            AntennaFamily::GeneralArray { elements } => 3 * elements,
            AntennaFamily::EPlaneHorn => 3,
            AntennaFamily::Dish {
                n_angular,
                n_radial,
            } => {
                forward::check_grid_size(n_angular, n_radial)?;
                7
            }
        };
        check_len("configuration bounds", expected, self.config_bounds.len())?;
        for (i, &(lo, hi)) in self.config_bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "configuration bound {i} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn config_dim(&self) -> usize {
        self.config_bounds.len()
    }

    pub fn excitation_dim(&self) -> usize {
        match self.family {
            AntennaFamily::RectArray { rows, cols } => rows * cols,
            AntennaFamily::GeneralArray { elements } => elements,
            AntennaFamily::EPlaneHorn | AntennaFamily::Dish { .. } => 1,
        }
    }

    pub fn design_dim(&self) -> usize {
        design_dim(self.config_dim(), self.excitation_dim())
    }

    pub fn min_sample_count(&self, kind: MeasurementKind) -> usize {
        min_samples_for(self.design_dim(), kind.dim_v())
    }

    /// Checks length and bounds of a configuration.
    pub fn check_config(&self, config: &ConfigurationPoint) -> Result<()> {
        check_len("configuration", self.config_dim(), config.dim())?;
        for (index, (&value, &(lo, hi))) in config.0.iter().zip(&self.config_bounds).enumerate() {
            if !(lo..=hi).contains(&value) {
                return Err(Error::OutOfBounds {
                    index,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Midpoint of the configuration box.
    pub fn center(&self) -> ConfigurationPoint {
        ConfigurationPoint(self.config_bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect())
    }

    /// Evaluates the full pattern map at the given sample points.
    pub fn evaluate(
        &self,
        config: &ConfigurationPoint,
        excitation: &Excitation,
        points: &[SamplePoint],
    ) -> Result<Vec<Complex64>> {
        check_len("excitation", self.excitation_dim(), excitation.len())?;
        match self.family {
            AntennaFamily::RectArray { rows, cols } => {
                let geometry = RectArrayConfig::from_gaps(rows, cols, config.values())?;
                forward::rect_array_pattern(&geometry, excitation, &far_directions(points)?)
            }
            AntennaFamily::GeneralArray { .. } => {
                let geometry = GeneralArrayConfig::from_flat(config.values())?;
                forward::array_nearfield_pattern(&geometry, excitation, &near_positions(points)?)
            }
            AntennaFamily::EPlaneHorn => {
                let horn = HornConfig::from_slice(config.values())?;
                forward::eplane_horn_pattern(&horn, excitation, &far_directions(points)?)
            }
            AntennaFamily::Dish {
                n_angular,
                n_radial,
            } => {
                let dish = DishConfig::from_slice(config.values())?;
                let grid = forward::reflector_grid(&dish, n_angular, n_radial)?;
                forward::dish_pattern_on_grid(&dish, &grid, excitation, &far_directions(points)?)
            }
        }
    }

    /// Per-port responses at each point, row-major `K × N`: entry `(k, n)` is
    /// the pattern at point `k` with unit excitation on port `n`.
    pub fn port_responses(&self, config: &ConfigurationPoint, points: &[SamplePoint]) -> Result<Vec<Complex64>> {
        match self.family {
            AntennaFamily::RectArray { rows, cols } => {
                let geometry = RectArrayConfig::from_gaps(rows, cols, config.values())?;
                Ok(forward::rect_array_terms(&geometry, &far_directions(points)?))
            }
            AntennaFamily::GeneralArray { .. } => {
                let geometry = GeneralArrayConfig::from_flat(config.values())?;
                Ok(forward::array_nearfield_terms(&geometry, &near_positions(points)?))
            }
            AntennaFamily::EPlaneHorn | AntennaFamily::Dish { .. } => {
                self.evaluate(config, &Excitation::ones(1), points)
            }
        }
    }
}
