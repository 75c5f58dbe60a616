//! Experiment configuration files.
//!
//! Configs are TOML with dotted keys:
//!
//! ```toml
//! model.family = "rect"        # rect | horn | dish
//! model.rows = 3
//! model.cols = 3
//! sampling.kind = ["random", "principal"]   # azimuth | principal | blocks | random
//! sampling.count = 200
//! noise.sigmas = [0.0, 0.01, 0.03, 0.1]
//! trials = 100
//! seed = 1
//! solver.iterations = 10
//! solver.restarts = 4
//! solver.scheme = "auto"       # auto | factorial3 | compass
//! out.dir = "runs/rect"
//! ```
//!
//! Optional keys: `mode` (`extrapolate` or `order-scan`), `first_trial`,
//! `measurement.kind` (`complex`, `mag`, `db`), `lattice.step_deg`,
//! `sampling.az_count`, `sampling.el_count`, `sampling.block_count`,
//! `sampling.block_len`, `sampling.max_elevation_deg`, `solver.schedule`
//! (`geometric` or `adaptive`), `solver.decay`,
//! `solver.initial_spacing`, `solver.tolerance`, `solver.constraint`
//! (`unit_norm` or `unconstrained`), `order.max_rows`, `order.max_cols`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::design::{DesignSpaceModel, MeasurementKind};
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_LATTICE_STEP_DEG;
use crate::sampling::{SamplingSpec, DEFAULT_MAX_ELEVATION};
use crate::solver::{ExcitationConstraint, GridScheme, SolverParams, SpacingSchedule};

pub const DEFAULT_SIGMAS: [f64; 4] = [0.0, 0.01, 0.03, 0.1];
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_AZIMUTH_COUNT: usize = 360;
pub const DEFAULT_ELEVATION_COUNT: usize = 181;
pub const DEFAULT_BLOCK_COUNT: usize = 8;
pub const DEFAULT_BLOCK_LEN: usize = 25;
pub const DEFAULT_RANDOM_COUNT: usize = 200;

/// Antenna family under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    Rect { rows: usize, cols: usize },
    Horn,
    Dish,
}

impl FamilySpec {
    pub fn model(&self) -> Result<DesignSpaceModel> {
        match *self {
            FamilySpec::Rect { rows, cols } => DesignSpaceModel::rect_array(rows, cols),
            FamilySpec::Horn => Ok(DesignSpaceModel::eplane_horn()),
            FamilySpec::Dish => Ok(DesignSpaceModel::dish()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Fit the true model family and score the extrapolation.
    Extrapolate,
    /// Scan rectangular-array shapes and select the model order.
    OrderScan { max_rows: usize, max_cols: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub samplings: Vec<SamplingSpec>,
    pub kind: MeasurementKind,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    /// Index of the first trial; trial seeds depend only on the index.
    pub first_trial: usize,
    pub solver: SolverParams,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub lattice_step_deg: f64,
    pub mode: Mode,
}

impl ExperimentConfig {
    /// Defaults for a family: every sampling layout, the standard noise
    /// ladder, 100 trials.
    pub fn new(family: FamilySpec, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            family,
            samplings: vec![
                default_layout("random", None).expect("known layout"),
                default_layout("principal", None).expect("known layout"),
                default_layout("blocks", None).expect("known layout"),
                default_layout("azimuth", None).expect("known layout"),
            ],
            kind: MeasurementKind::ComplexField,
            sigmas: DEFAULT_SIGMAS.to_vec(),
            trials: DEFAULT_TRIALS,
            first_trial: 0,
            solver: SolverParams::default(),
            seed: 0,
            out_dir: out_dir.into(),
            lattice_step_deg: DEFAULT_LATTICE_STEP_DEG,
            mode: Mode::Extrapolate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(bad("trials", "at least one trial is required"));
        }
        if self.samplings.is_empty() {
            return Err(bad("sampling.kind", "at least one sampling layout is required"));
        }
        for s in &self.samplings {
            s.validate().map_err(|e| bad("sampling", e.to_string()))?;
        }
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(bad("noise.sigmas", "need one or more finite nonnegative noise levels"));
        }
        if !(self.lattice_step_deg > 0.0 && self.lattice_step_deg <= 90.0) {
            return Err(bad("lattice.step_deg", "must lie in (0, 90]"));
        }
        self.solver.validate().map_err(|e| bad("solver", e.to_string()))?;
        self.family.model().map_err(|e| bad("model", e.to_string()))?;
        if let Mode::OrderScan { max_rows, max_cols } = self.mode {
            if max_rows == 0 || max_cols == 0 {
                return Err(bad("order", "max_rows and max_cols must be positive"));
            }
            if !matches!(self.family, FamilySpec::Rect { .. }) {
                return Err(bad("mode", "order-scan needs model.family = \"rect\""));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| bad("<root>", e.to_string()))?;
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        let cfg = raw.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

fn bad(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Malformed {
        field: field.into(),
        message: message.into(),
    }
}

/// Builds one of the named layouts, `count` overriding the point count of
/// the azimuth and random layouts.
pub fn default_layout(name: &str, count: Option<usize>) -> Result<SamplingSpec> {
    Ok(match name {
        "azimuth" => SamplingSpec::AzimuthOnly {
            count: count.unwrap_or(DEFAULT_AZIMUTH_COUNT),
        },
        "principal" => SamplingSpec::PrincipalPlanes {
            az_count: DEFAULT_AZIMUTH_COUNT,
            el_count: DEFAULT_ELEVATION_COUNT,
        },
        "blocks" => SamplingSpec::AzimuthBlocks {
            block_count: DEFAULT_BLOCK_COUNT,
            block_len: DEFAULT_BLOCK_LEN,
            max_elevation: DEFAULT_MAX_ELEVATION,
        },
        "random" => SamplingSpec::RandomSphere {
            count: count.unwrap_or(DEFAULT_RANDOM_COUNT),
        },
        other => {
            return Err(bad(
                "sampling.kind",
                format!("unknown layout `{other}` (expected azimuth, principal, blocks or random)"),
            ))
        }
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    family: String,
    rows: Option<usize>,
    cols: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    kind: Option<OneOrMany>,
    count: Option<usize>,
    az_count: Option<usize>,
    el_count: Option<usize>,
    block_count: Option<usize>,
    block_len: Option<usize>,
    max_elevation_deg: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigmas: Option<Vec<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    iterations: Option<usize>,
    restarts: Option<usize>,
    scheme: Option<GridScheme>,
    schedule: Option<SpacingSchedule>,
    decay: Option<f64>,
    initial_spacing: Option<f64>,
    tolerance: Option<f64>,
    constraint: Option<ExcitationConstraint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOut {
    dir: PathBuf,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMeasurement {
    kind: Option<MeasurementKind>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    step_deg: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOrder {
    max_rows: Option<usize>,
    max_cols: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    model: RawModel,
    #[serde(default)]
    sampling: RawSampling,
    #[serde(default)]
    noise: RawNoise,
    trials: Option<usize>,
    first_trial: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    solver: RawSolver,
    out: RawOut,
    #[serde(default)]
    measurement: RawMeasurement,
    #[serde(default)]
    lattice: RawLattice,
    #[serde(default)]
    order: RawOrder,
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig> {
        let family = match self.model.family.as_str() {
            "rect" => FamilySpec::Rect {
                rows: self.model.rows.ok_or_else(|| bad("model.rows", "required for rect arrays"))?,
                cols: self.model.cols.ok_or_else(|| bad("model.cols", "required for rect arrays"))?,
            },
            "horn" => FamilySpec::Horn,
            "dish" => FamilySpec::Dish,
            other => return Err(bad("model.family", format!("unknown family `{other}` (expected rect, horn or dish)"))),
        };
        let mut cfg = ExperimentConfig::new(family, self.out.dir);

        let s = self.sampling;
        if let Some(kind) = s.kind {
            let names = match kind {
                OneOrMany::One(n) => vec![n],
                OneOrMany::Many(v) => v,
            };
            cfg.samplings = names
                .iter()
                .map(|n| {
                    let mut spec = default_layout(n, s.count)?;
                    match &mut spec {
                        SamplingSpec::PrincipalPlanes { az_count, el_count } => {
                            *az_count = s.az_count.unwrap_or(*az_count);
                            *el_count = s.el_count.unwrap_or(*el_count);
                        }
                        SamplingSpec::AzimuthBlocks {
                            block_count,
                            block_len,
                            max_elevation,
                        } => {
                            *block_count = s.block_count.unwrap_or(*block_count);
                            *block_len = s.block_len.unwrap_or(*block_len);
                            if let Some(deg) = s.max_elevation_deg {
                                *max_elevation = deg.to_radians();
                            }
                        }
                        _ => {}
                    }
                    Ok(spec)
                })
                .collect::<Result<_>>()?;
        }
        if let Some(sigmas) = self.noise.sigmas {
            cfg.sigmas = sigmas;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(t) = self.first_trial {
            cfg.first_trial = t;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        let sv = self.solver;
        let p = &mut cfg.solver;
        if let Some(v) = sv.iterations {
            p.max_iterations = v;
        }
        if let Some(v) = sv.restarts {
            p.restarts = v;
        }
        if let Some(v) = sv.scheme {
            p.grid_scheme = v;
        }
        if let Some(v) = sv.schedule {
            p.schedule = v;
        }
        if let Some(v) = sv.decay {
            p.decay = v;
        }
        if let Some(v) = sv.initial_spacing {
            p.initial_spacing_frac = v;
        }
        if let Some(v) = sv.tolerance {
            p.convergence_tol = v;
        }
        if let Some(v) = sv.constraint {
            p.excitation_constraint = v;
        }
        if let Some(k) = self.measurement.kind {
            cfg.kind = k;
        }
        if let Some(step) = self.lattice.step_deg {
            cfg.lattice_step_deg = step;
        }
        cfg.mode = match self.mode.as_deref() {
            None | Some("extrapolate") => Mode::Extrapolate,
            Some("order-scan") => Mode::OrderScan {
                max_rows: self.order.max_rows.unwrap_or(5),
                max_cols: self.order.max_cols.unwrap_or(5),
            },
            Some(other) => return Err(bad("mode", format!("unknown mode `{other}` (expected extrapolate or order-scan)"))),
        };
        Ok(cfg)
    }
}
