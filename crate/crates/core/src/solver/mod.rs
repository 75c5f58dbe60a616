//! Recursive configuration search with per-candidate excitation fitting.
//!
//! Each start draws a configuration uniformly from the model's box. Every
//! iteration builds a candidate grid around the current configuration, fits
//! the best excitation for each candidate by least squares, and moves to the
//! candidate with the smallest residual. The grid spacing shrinks
//! geometrically. Because the current configuration is always a candidate,
//! the residual never increases.

mod grid;
mod lsq;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{from_db, ConfigurationPoint, DesignSpaceModel, Excitation, MeasurementKind, SamplePoint, SampledPattern};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub use grid::{candidate_grid, GridScheme};
pub use lsq::{solve_excitation, ExcitationConstraint, ExcitationFit, LeastSquares};

/// Inner phase-retrieval passes used when only magnitudes are observed.
pub const PHASE_RETRIEVAL_PASSES: usize = 5;

/// Search stops once the grid spacing falls below this fraction of each
/// coordinate's range; smaller steps are lost to rounding.
pub const MIN_SPACING_FRAC: f64 = 1e-12;

/// Draws of a start configuration before giving up on a model whose box is
/// mostly outside its valid domain.
const MAX_START_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub max_iterations: usize,
    pub grid_scheme: GridScheme,
    #[serde(default)]
    pub schedule: SpacingSchedule,
    /// First grid spacing as a fraction of each coordinate's range.
    pub initial_spacing_frac: f64,
    /// Per-iteration spacing factor.
    pub decay: f64,
    pub restarts: usize,
    pub excitation_constraint: ExcitationConstraint,
    /// Stop when an accepted move improves the residual by a relative amount
    /// below this, or when the residual drops below `convergence_tol·‖p‖`.
    pub convergence_tol: f64,
}

/// How the candidate-grid spacing shrinks between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingSchedule {
    /// Multiply by `decay` every iteration.
    #[default]
    Geometric,
    /// Multiply by `decay` only after an iteration in which no candidate
    /// beat the current configuration. Slower per iteration but able to
    /// follow long, narrow valleys down to full precision.
    Adaptive,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            max_iterations: 10,
            grid_scheme: GridScheme::Auto,
            schedule: SpacingSchedule::Geometric,
            initial_spacing_frac: 0.25,
            decay: 0.7,
            restarts: 4,
            excitation_constraint: ExcitationConstraint::UnitNorm,
            convergence_tol: 1e-6,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_spacing_frac > 0.0 && self.initial_spacing_frac <= 1.0) {
            return Err(Error::invalid("initial_spacing_frac must lie in (0, 1]"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::invalid("decay must lie in (0, 1)"));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::invalid("convergence_tol must be nonnegative"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("at least one restart is required"));
        }
        Ok(())
    }
}

/// Outcome of [`extrapolate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationResult {
    pub config: ConfigurationPoint,
    pub excitation: Excitation,
    /// Residual after each iteration; entry 0 is the start.
    pub residual_history: Vec<f64>,
    /// Predicted values at the query points, in the observed kind.
    pub predicted: Vec<Complex64>,
    pub converged: bool,
    /// Fewer observations than the injectivity bound asks for.
    pub undersampled: bool,
    /// Final residual of every start, in start order.
    pub start_residuals: Vec<f64>,
    /// Candidates whose forward evaluation failed and were skipped.
    pub skipped_candidates: usize,
}

impl ExtrapolationResult {
    pub fn residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }

    pub fn iterations(&self) -> usize {
        self.residual_history.len() - 1
    }
}

/// `K × N` matrix whose column `n` is the pattern for unit excitation on
/// port `n`.
pub fn design_matrix(
    model: &DesignSpaceModel,
    config: &ConfigurationPoint,
    points: &[SamplePoint],
) -> Result<DMatrix<Complex64>> {
    model.check_config(config)?;
    let terms = model.port_responses(config, points)?;
    Ok(DMatrix::from_row_slice(points.len(), model.excitation_dim(), &terms))
}

/// `‖Φ_K(design) − p‖₂` in the observed kind's value space.
pub fn residual_error(
    model: &DesignSpaceModel,
    config: &ConfigurationPoint,
    excitation: &Excitation,
    observed: &SampledPattern,
) -> Result<f64> {
    let field = model.evaluate(config, excitation, &observed.points)?;
    Ok(misfit(observed, &field))
}

fn misfit(observed: &SampledPattern, field: &[Complex64]) -> f64 {
    field
        .iter()
        .zip(&observed.values)
        .map(|(&f, &p)| (observed.kind.measure(f) - p).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Best excitation for a fixed configuration and its residual in the
/// observed kind's metric.
///
/// Magnitude-only data are fitted by alternating projections: start from
/// zero phases, then repeatedly borrow the phases of the current prediction
/// and re-solve the complex problem. The best pass is kept.
pub fn fit_configuration(
    model: &DesignSpaceModel,
    config: &ConfigurationPoint,
    observed: &SampledPattern,
    constraint: ExcitationConstraint,
) -> Result<ExcitationFit> {
    let m = design_matrix(model, config, &observed.points)?;
    let ls = LeastSquares::new(m)?;
    match observed.kind {
        MeasurementKind::ComplexField => {
            let p = DVector::from_column_slice(&observed.values);
            ls.solve(&p, constraint)
        }
        kind => {
            let target: Vec<f64> = observed
                .values
                .iter()
                .map(|v| if kind == MeasurementKind::MagnitudeDb { from_db(v.re) } else { v.re })
                .collect();
            let mut p = DVector::from_iterator(target.len(), target.iter().map(|&t| Complex64::new(t, 0.0)));
            let mut best: Option<ExcitationFit> = None;
            for _ in 0..=PHASE_RETRIEVAL_PASSES {
                let mut fit = ls.solve(&p, constraint)?;
                let prediction = ls.matrix() * DVector::from_column_slice(fit.excitation.values());
                fit.residual = misfit(observed, prediction.as_slice());
                for ((pk, pred), &t) in p.iter_mut().zip(prediction.iter()).zip(&target) {
                    let r = pred.norm();
                    *pk = if r > 0.0 { pred * (t / r) } else { Complex64::new(t, 0.0) };
                }
                if best.as_ref().is_none_or(|b| fit.residual < b.residual) {
                    best = Some(fit);
                }
            }
            Ok(best.expect("at least one pass runs"))
        }
    }
}

struct StartOutcome {
    config: ConfigurationPoint,
    fit: ExcitationFit,
    history: Vec<f64>,
    converged: bool,
    skipped: usize,
}

fn draw_start(model: &DesignSpaceModel, rng: &mut ChaCha8Rng) -> ConfigurationPoint {
    ConfigurationPoint(
        model
            .config_bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect(),
    )
}

fn run_start(
    model: &DesignSpaceModel,
    observed: &SampledPattern,
    params: &SolverParams,
    start: ConfigurationPoint,
    fit: ExcitationFit,
) -> StartOutcome {
    let scheme = params.grid_scheme.resolve(model.config_dim());
    let ranges: Vec<f64> = model.config_bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    let data_norm = observed.norm();
    let mut current = start;
    let mut current_fit = fit;
    let mut history = vec![current_fit.residual];
    let mut converged = current_fit.residual <= params.convergence_tol * data_norm;
    let mut skipped = 0;
    let mut scale = params.initial_spacing_frac;

    for _ in 0..params.max_iterations {
        if converged || scale < MIN_SPACING_FRAC {
            break;
        }
        let spacing: Vec<f64> = ranges.iter().map(|r| r * scale).collect();
        let candidates = candidate_grid(&current, &spacing, scheme, &model.config_bounds);
        // Slot 0 is the current iterate; reuse its fit so ties keep it.
        let fits: Vec<Option<ExcitationFit>> = candidates[1..]
            .par_iter()
            .map(|c| fit_configuration(model, c, observed, params.excitation_constraint).ok())
            .collect();
        skipped += fits.iter().filter(|f| f.is_none()).count();

        let mut best_index = 0;
        let mut best_residual = current_fit.residual;
        for (i, f) in fits.iter().enumerate() {
            if let Some(f) = f {
                if f.residual < best_residual {
                    best_residual = f.residual;
                    best_index = i + 1;
                }
            }
        }
        let previous = current_fit.residual;
        if best_index > 0 {
            current = candidates[best_index].clone();
            current_fit = fits[best_index - 1].clone().expect("chosen candidate has a fit");
        }
        history.push(current_fit.residual);

        let moved = best_index > 0;
        if params.schedule == SpacingSchedule::Geometric || !moved {
            scale *= params.decay;
        }
        let rel_change = if previous > 0.0 {
            (previous - current_fit.residual) / previous
        } else {
            0.0
        };
        converged = current_fit.residual <= params.convergence_tol * data_norm
            || (moved && rel_change < params.convergence_tol);
    }

    StartOutcome {
        config: current,
        fit: current_fit,
        history,
        converged,
        skipped,
    }
}

/// Estimates the design behind `observed` and predicts the pattern at
/// `queries`.
pub fn extrapolate(
    model: &DesignSpaceModel,
    observed: &SampledPattern,
    queries: &[SamplePoint],
    params: &SolverParams,
    seed: u64,
) -> Result<ExtrapolationResult> {
    extrapolate_with_starts(model, observed, queries, params, seed, &[])
}

/// [`extrapolate`] with additional caller-supplied start configurations,
/// run after the `params.restarts` random starts.
pub fn extrapolate_with_starts(
    model: &DesignSpaceModel,
    observed: &SampledPattern,
    queries: &[SamplePoint],
    params: &SolverParams,
    seed: u64,
    extra_starts: &[ConfigurationPoint],
) -> Result<ExtrapolationResult> {
    params.validate()?;
    run_starts(model, observed, queries, params, seed, params.restarts, extra_starts)
}

/// Runs `random_starts` seeded starts followed by `extra_starts`.
pub(crate) fn run_starts(
    model: &DesignSpaceModel,
    observed: &SampledPattern,
    queries: &[SamplePoint],
    params: &SolverParams,
    seed: u64,
    random_starts: usize,
    extra_starts: &[ConfigurationPoint],
) -> Result<ExtrapolationResult> {
    if observed.is_empty() {
        return Err(Error::invalid("no observations to extrapolate from"));
    }
    if random_starts + extra_starts.len() == 0 {
        return Err(Error::invalid("at least one start is required"));
    }
    for s in extra_starts {
        model.check_config(s)?;
    }

    let mut starts: Vec<(ConfigurationPoint, ExcitationFit)> = Vec::with_capacity(random_starts + extra_starts.len());
    for r in 0..random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64));
        let mut last_err = None;
        let mut found = None;
        for _ in 0..MAX_START_DRAWS {
            let x0 = draw_start(model, &mut rng);
            match fit_configuration(model, &x0, observed, params.excitation_constraint) {
                Ok(fit) => {
                    found = Some((x0, fit));
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        match found {
            Some(s) => starts.push(s),
            None => return Err(last_err.unwrap_or_else(|| Error::Numerical("no valid start".into()))),
        }
    }
    for s in extra_starts {
        let fit = fit_configuration(model, s, observed, params.excitation_constraint)?;
        starts.push((s.clone(), fit));
    }

    let outcomes: Vec<StartOutcome> = starts
        .into_par_iter()
        .map(|(x0, fit)| run_start(model, observed, params, x0, fit))
        .collect();

    let start_residuals: Vec<f64> = outcomes.iter().map(|o| o.fit.residual).collect();
    let skipped_candidates = outcomes.iter().map(|o| o.skipped).sum();
    let best = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.fit.residual.total_cmp(&b.fit.residual).then(i.cmp(j)))
        .map(|(_, o)| o)
        .expect("at least one start");

    let field = model.evaluate(&best.config, &best.fit.excitation, queries)?;
    let predicted = field.iter().map(|&f| observed.kind.measure(f)).collect();
    Ok(ExtrapolationResult {
        config: best.config,
        excitation: best.fit.excitation,
        residual_history: best.history,
        predicted,
        converged: best.converged,
        undersampled: observed.len() < model.min_sample_count(observed.kind),
        start_residuals,
        skipped_candidates,
    })
}
