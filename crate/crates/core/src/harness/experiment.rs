//! Monte Carlo experiment runner.
//!
//! Every trial draws a random truth design, observes it through each
//! sampling layout at each noise level, extrapolates, and scores the
//! prediction against the dense truth pattern. A trial's random streams
//! depend only on the master seed and the trial index, and results are
//! written in trial order, so neither the thread count nor the trial subset
//! changes any output row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::design::{AntennaFamily, ConfigurationPoint, DesignSpaceModel, Excitation, SamplePoint, SampledPattern};
use crate::error::{Error, Result};
use crate::metrics::{model_order_scan, total_error, DensePattern, Lattice, OrderScan};
use crate::sampling::{add_noise, generate_samples};
use crate::seed::derive_seed;
use crate::solver::extrapolate;

use super::config::{ExperimentConfig, Mode};

pub const SCATTER_FILE: &str = "scatter.csv";
pub const TRACE_FILE: &str = "residual_trace.csv";
pub const ORDER_FILE: &str = "order_scan.csv";
/// Left in the output directory when writing fails part way.
pub const PARTIAL_MARKER: &str = "PARTIAL";

pub const SCATTER_HEADER: &str = "trial,sampling,sigma,residual,total_error,iterations_used,converged";
pub const TRACE_HEADER: &str = "trial,sigma,iteration,residual";
pub const ORDER_HEADER: &str = "trial,rows,cols,min_residual,selected";

/// Truth feeds are kept within this distance (λ) of the vertex.
pub const MAX_FEED_DISTANCE: f64 = 6.0;

const MAX_TRUTH_DRAWS: usize = 1000;

// Per-trial random streams.
const STREAM_TRUTH: u64 = 0;
const STREAM_SAMPLES: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_SOLVER: u64 = 3;

/// One extrapolation run inside a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub trial: usize,
    pub sampling: &'static str,
    pub sigma: f64,
    pub residual: f64,
    pub total_error: f64,
    pub converged: bool,
    pub residual_history: Vec<f64>,
}

impl RunRecord {
    pub fn iterations_used(&self) -> usize {
        self.residual_history.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub truth_config: ConfigurationPoint,
    pub truth_excitation: Excitation,
    pub runs: Vec<RunRecord>,
    pub order_scan: Option<OrderScan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialRecord>,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
}

impl ExperimentOutput {
    pub fn runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.trials.iter().flat_map(|t| t.runs.iter())
    }

    /// `(residual, total_error)` of every run with this layout and noise level.
    pub fn scatter(&self, sampling: &str, sigma: f64) -> Vec<(f64, f64)> {
        self.runs()
            .filter(|r| r.sampling == sampling && r.sigma == sigma)
            .map(|r| (r.residual, r.total_error))
            .collect()
    }
}

/// Draws a truth design uniformly from the model's box with a random
/// unit-norm excitation. Dish feeds are redrawn until they lie within
/// [`MAX_FEED_DISTANCE`] of the vertex.
pub fn draw_truth(model: &DesignSpaceModel, seed: u64) -> Result<(ConfigurationPoint, Excitation)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = [SamplePoint::Far(crate::design::Direction::boresight())];
    for _ in 0..MAX_TRUTH_DRAWS {
        let values: Vec<f64> = model
            .config_bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        if let AntennaFamily::Dish { .. } = model.family {
            let f = &values[4..7];
            if (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt() > MAX_FEED_DISTANCE {
                continue;
            }
        }
        let config = ConfigurationPoint(values);
        let amps: Vec<Complex64> = (0..model.excitation_dim())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let Ok(excitation) = Excitation::unit(amps) else { continue };
        if model.evaluate(&config, &excitation, &probe).is_ok() {
            return Ok((config, excitation));
        }
    }
    Err(Error::Numerical(format!("could not draw a valid truth design for {}", model.name)))
}

fn run_trial(cfg: &ExperimentConfig, model: &DesignSpaceModel, lattice: &Lattice, trial: usize) -> Result<TrialRecord> {
    let ts = derive_seed(cfg.seed, trial as u64);
    let (config, excitation) = draw_truth(model, derive_seed(ts, STREAM_TRUTH))?;
    let queries = lattice.points();

    if let Mode::OrderScan { max_rows, max_cols } = cfg.mode {
        let spec = &cfg.samplings[0];
        let sigma = cfg.sigmas[0];
        let observed = observe(model, &config, &excitation, cfg, spec, sigma, ts, 0, 0)?;
        let scan = model_order_scan(
            &observed,
            1..=max_rows,
            1..=max_cols,
            &cfg.solver,
            derive_seed(ts, STREAM_SOLVER),
        )?;
        return Ok(TrialRecord {
            trial,
            truth_config: config,
            truth_excitation: excitation,
            runs: Vec::new(),
            order_scan: Some(scan),
        });
    }

    let truth = DensePattern::from_model(model, &config, &excitation, lattice, cfg.kind)?;
    let mut runs = Vec::with_capacity(cfg.samplings.len() * cfg.sigmas.len());
    for (li, spec) in cfg.samplings.iter().enumerate() {
        for (si, &sigma) in cfg.sigmas.iter().enumerate() {
            let observed = observe(model, &config, &excitation, cfg, spec, sigma, ts, li, si)?;
            let run_seed = derive_seed(derive_seed(derive_seed(ts, STREAM_SOLVER), li as u64), si as u64);
            let result = extrapolate(model, &observed, &queries, &cfg.solver, run_seed)?;
            let predicted = DensePattern::new(lattice.clone(), result.predicted.clone(), cfg.kind)?;
            runs.push(RunRecord {
                trial,
                sampling: spec.label(),
                sigma,
                residual: result.residual(),
                total_error: total_error(&predicted, &truth)?,
                converged: result.converged,
                residual_history: result.residual_history,
            });
        }
    }
    Ok(TrialRecord {
        trial,
        truth_config: config,
        truth_excitation: excitation,
        runs,
        order_scan: None,
    })
}

/// Noisy observations of the truth through one layout. Noise is added to
/// the complex field before it is measured in the configured kind.
#[allow(clippy::too_many_arguments)]
fn observe(
    model: &DesignSpaceModel,
    config: &ConfigurationPoint,
    excitation: &Excitation,
    cfg: &ExperimentConfig,
    spec: &crate::sampling::SamplingSpec,
    sigma: f64,
    trial_seed: u64,
    layout: usize,
    sigma_index: usize,
) -> Result<SampledPattern> {
    let dirs = generate_samples(spec, derive_seed(derive_seed(trial_seed, STREAM_SAMPLES), layout as u64))?;
    let points: Vec<SamplePoint> = dirs.into_iter().map(SamplePoint::Far).collect();
    let field = model.evaluate(config, excitation, &points)?;
    let noise_seed = derive_seed(derive_seed(derive_seed(trial_seed, STREAM_NOISE), layout as u64), sigma_index as u64);
    let noisy = add_noise(&field, sigma, noise_seed)?;
    SampledPattern::from_field(points, &noisy, cfg.kind)
}

/// Runs every trial in memory without touching the file system.
pub fn simulate_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let model = cfg.family.model()?;
    let lattice = Lattice::regular(cfg.lattice_step_deg)?;
    (cfg.first_trial..cfg.first_trial + cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &model, &lattice, t))
        .collect()
}

/// Runs the experiment and writes its CSV files into `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let trials = simulate_trials(cfg)?;
    let files = write_outputs(cfg, &trials)?;
    Ok(ExperimentOutput { trials, files })
}

pub fn scatter_csv(trials: &[TrialRecord]) -> String {
    let mut s = String::from(SCATTER_HEADER);
    s.push('\n');
    for r in trials.iter().flat_map(|t| &t.runs) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.trial,
            r.sampling,
            r.sigma,
            r.residual,
            r.total_error,
            r.iterations_used(),
            r.converged
        );
    }
    s
}

/// Residual histories of the first sampling layout, one row per iteration.
pub fn trace_csv(trials: &[TrialRecord]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for t in trials {
        let Some(first) = t.runs.first().map(|r| r.sampling) else { continue };
        for r in t.runs.iter().filter(|r| r.sampling == first) {
            for (i, res) in r.residual_history.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", r.trial, r.sigma, i, res);
            }
        }
    }
    s
}

pub fn order_csv(trials: &[TrialRecord]) -> String {
    let mut s = String::from(ORDER_HEADER);
    s.push('\n');
    for t in trials {
        if let Some(scan) = &t.order_scan {
            s.push_str(&order_rows(t.trial, scan));
        }
    }
    s
}

/// Rows of one scan in `order_scan.csv` layout, without the header.
pub fn order_rows(trial: usize, scan: &OrderScan) -> String {
    let mut s = String::new();
    for e in &scan.entries {
        let sel = (e.rows, e.cols) == scan.selected;
        let _ = writeln!(s, "{},{},{},{},{}", trial, e.rows, e.cols, e.min_residual, sel);
    }
    s
}

fn write_outputs(cfg: &ExperimentConfig, trials: &[TrialRecord]) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out_dir;
    let jobs: Vec<(&str, String)> = match cfg.mode {
        Mode::Extrapolate => vec![(SCATTER_FILE, scatter_csv(trials)), (TRACE_FILE, trace_csv(trials))],
        Mode::OrderScan { .. } => vec![(ORDER_FILE, order_csv(trials))],
    };
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let marker = dir.join(PARTIAL_MARKER);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
        }
        let mut files = Vec::new();
        for (name, body) in jobs {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            files.push(path);
        }
        Ok(files)
    })();
    if result.is_err() {
        mark_partial(dir);
    }
    result
}

fn mark_partial(dir: &Path) {
    // Best effort: the directory itself may be what failed.
    let _ = fs::write(dir.join(PARTIAL_MARKER), "experiment output is incomplete\n");
}
