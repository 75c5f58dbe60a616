//! Error measures against simulated truth, residual/total-error statistics
//! and residual-driven model-order selection for rectangular arrays.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::{ConfigurationPoint, DesignSpaceModel, Direction, Excitation, MeasurementKind, SamplePoint, SampledPattern};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::solver::{fit_configuration, run_starts, SolverParams};

/// Default lattice step for dense truth patterns, in degrees.
pub const DEFAULT_LATTICE_STEP_DEG: f64 = 2.0;

/// Selection band factor: shapes within `τ·(min + ε)` of the best residual
/// count as fitting.
pub const ORDER_TAU: f64 = 2.0;
/// Absolute slack in the selection band, relative to `‖p‖`.
pub const ORDER_EPS_REL: f64 = 1e-9;

/// Regular azimuth × elevation lattice, both axes sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub azimuths: Vec<f64>,
    pub elevations: Vec<f64>,
}

impl Lattice {
    /// Full sphere at `step_deg`: azimuth in `[-180°, 180°)`, elevation in
    /// `[-90°, 90°]`.
    pub fn regular(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 90.0) {
            return Err(Error::invalid(format!("lattice step must lie in (0, 90] degrees, got {step_deg}")));
        }
        let n_az = (360.0 / step_deg).round() as usize;
        let n_el = (180.0 / step_deg).round() as usize + 1;
        let azimuths = (0..n_az).map(|i| (-180.0 + 360.0 * i as f64 / n_az as f64).to_radians()).collect();
        let elevations = (0..n_el)
            .map(|j| (-90.0 + 180.0 * j as f64 / (n_el - 1) as f64).to_radians())
            .map(|e: f64| e.clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2))
            .collect();
        Ok(Lattice { azimuths, elevations })
    }

    pub fn len(&self) -> usize {
        self.azimuths.len() * self.elevations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Directions in row-major order: elevation outer, azimuth inner.
    pub fn directions(&self) -> Vec<Direction> {
        self.elevations
            .iter()
            .flat_map(|&el| {
                self.azimuths.iter().map(move |&az| Direction {
                    azimuth: az,
                    elevation: el,
                })
            })
            .collect()
    }

    pub fn points(&self) -> Vec<SamplePoint> {
        self.directions().into_iter().map(SamplePoint::Far).collect()
    }
}

/// Pattern values on a [`Lattice`], row-major as [`Lattice::directions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensePattern {
    pub lattice: Lattice,
    pub values: Vec<Complex64>,
    pub kind: MeasurementKind,
}

impl DensePattern {
    pub fn new(lattice: Lattice, values: Vec<Complex64>, kind: MeasurementKind) -> Result<Self> {
        crate::error::check_len("dense pattern values", lattice.len(), values.len())?;
        Ok(DensePattern { lattice, values, kind })
    }

    /// Evaluates `model` over the lattice and measures it in `kind`.
    pub fn from_model(
        model: &DesignSpaceModel,
        config: &ConfigurationPoint,
        excitation: &Excitation,
        lattice: &Lattice,
        kind: MeasurementKind,
    ) -> Result<Self> {
        let field = model.evaluate(config, excitation, &lattice.points())?;
        Self::from_field(lattice.clone(), &field, kind)
    }

    pub fn from_field(lattice: Lattice, field: &[Complex64], kind: MeasurementKind) -> Result<Self> {
        Self::new(lattice, field.iter().map(|&f| kind.measure(f)).collect(), kind)
    }
}

/// Root-mean-square modulus of the difference over the lattice.
pub fn total_error(predicted: &DensePattern, truth: &DensePattern) -> Result<f64> {
    if predicted.lattice != truth.lattice {
        return Err(Error::invalid("dense patterns are on different lattices"));
    }
    if predicted.kind != truth.kind {
        return Err(Error::invalid("dense patterns have different measurement kinds"));
    }
    let n = predicted.values.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = predicted
        .values
        .iter()
        .zip(&truth.values)
        .map(|(p, t)| (p - t).norm_sqr())
        .sum();
    Ok((sum / n as f64).sqrt())
}

/// Deciles, quartiles and median of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q10: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Quantiles {
            q10: quantile_sorted(&sorted, 0.10),
            q25: quantile_sorted(&sorted, 0.25),
            q50: quantile_sorted(&sorted, 0.50),
            q75: quantile_sorted(&sorted, 0.75),
            q90: quantile_sorted(&sorted, 0.90),
        }
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

/// Summary of a residual vs. total-error scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    /// `None` when either axis is constant.
    pub spearman_rho: Option<f64>,
    pub residual: Quantiles,
    pub total_error: Quantiles,
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = 0.5 * ((i + 1) + (j + 1)) as f64;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Spearman rank correlation; `None` when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Rank correlation and per-axis quantiles of `(residual, total_error)`
/// pairs.
pub fn residual_total_scatter(trials: &[(f64, f64)]) -> Result<ScatterSummary> {
    if trials.len() < 3 {
        return Err(Error::invalid("a scatter summary needs at least 3 trials"));
    }
    let residuals: Vec<f64> = trials.iter().map(|t| t.0).collect();
    let totals: Vec<f64> = trials.iter().map(|t| t.1).collect();
    Ok(ScatterSummary {
        spearman_rho: spearman(&residuals, &totals),
        residual: Quantiles::of(&residuals),
        total_error: Quantiles::of(&totals),
    })
}

/// Fraction of `trials` that fit better than the median reference residual
/// yet extrapolate worse than the median reference total error: the
/// signature of an ambiguity shared by the antenna and the sampling layout.
pub fn ambiguity_fraction(trials: &[(f64, f64)], reference: &[(f64, f64)]) -> f64 {
    if trials.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let res_median = median(&reference.iter().map(|t| t.0).collect::<Vec<_>>());
    let total_median = median(&reference.iter().map(|t| t.1).collect::<Vec<_>>());
    let hits = trials
        .iter()
        .filter(|(r, t)| *r < res_median && *t > total_median)
        .count();
    hits as f64 / trials.len() as f64
}

/// One cell of a model-order scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEntry {
    pub rows: usize,
    pub cols: usize,
    pub min_residual: f64,
    pub config: ConfigurationPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScan {
    pub entries: Vec<OrderEntry>,
    /// `(rows, cols)` chosen by [`select_order`].
    pub selected: (usize, usize),
}

impl OrderScan {
    pub fn residual(&self, rows: usize, cols: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.rows == rows && e.cols == cols)
            .map(|e| e.min_residual)
    }
}

/// Picks the smallest array (by element count) whose residual lies within
/// `tau·(global minimum + eps_abs)`. Ties go to the smaller residual, then
/// to fewer rows.
pub fn select_order(entries: &[(usize, usize, f64)], tau: f64, eps_abs: f64) -> Option<(usize, usize)> {
    let global = entries.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    if !global.is_finite() {
        return None;
    }
    let band = tau * (global + eps_abs);
    entries
        .iter()
        .filter(|e| e.2 <= band)
        .min_by(|a, b| {
            (a.0 * a.1)
                .cmp(&(b.0 * b.1))
                .then(a.2.total_cmp(&b.2))
                .then(a.0.cmp(&b.0))
        })
        .map(|e| (e.0, e.1))
}

/// Extends a gap vector of a `rows × cols` array by one coincident row or
/// column, which leaves the reachable patterns unchanged.
fn embed_gaps(gaps: &[f64], rows: usize, add_row: bool) -> Vec<f64> {
    let mut out = gaps.to_vec();
    let at = if add_row { rows - 1 } else { gaps.len() };
    out.insert(at, 0.0);
    out
}

/// Fits a rectangular array of every shape in `rows × cols` to `observed`
/// and selects the model order from the residual table.
///
/// Shapes are visited by increasing `rows + cols`; each shape is also
/// started from the fitted configurations of the shapes one row and one
/// column smaller, padded with a coincident row or column. That start
/// already reproduces the smaller shape's fit, so with the monotone solver
/// the table cannot increase along either axis.
pub fn model_order_scan(
    observed: &SampledPattern,
    rows: std::ops::RangeInclusive<usize>,
    cols: std::ops::RangeInclusive<usize>,
    params: &SolverParams,
    seed: u64,
) -> Result<OrderScan> {
    params.validate()?;
    if rows.is_empty() || cols.is_empty() || *rows.start() == 0 || *cols.start() == 0 {
        return Err(Error::invalid("row and column ranges must be nonempty and start at 1 or more"));
    }
    let mut shapes: Vec<(usize, usize)> = rows.clone().flat_map(|r| cols.clone().map(move |c| (r, c))).collect();
    shapes.sort_by_key(|&(r, c)| (r + c, r));

    let mut entries: Vec<OrderEntry> = Vec::with_capacity(shapes.len());
    for (r, c) in shapes {
        let model = DesignSpaceModel::rect_array(r, c)?;
        let mut warm = Vec::new();
        for e in &entries {
            if e.rows + 1 == r && e.cols == c {
                warm.push(ConfigurationPoint(embed_gaps(e.config.values(), e.rows, true)));
            } else if e.rows == r && e.cols + 1 == c {
                warm.push(ConfigurationPoint(embed_gaps(e.config.values(), e.rows, false)));
            }
        }
        let shape_seed = derive_seed(seed, (r as u64) << 32 | c as u64);
        // A warm start that already fits to tolerance cannot be beaten by
        // more than the tolerance, so the random starts are skipped.
        let tolerance = params.convergence_tol * observed.norm();
        let mut random_starts = params.restarts;
        for w in &warm {
            if fit_configuration(&model, w, observed, params.excitation_constraint)?.residual <= tolerance {
                random_starts = 0;
                break;
            }
        }
        let result = run_starts(&model, observed, &[], params, shape_seed, random_starts, &warm)?;
        entries.push(OrderEntry {
            rows: r,
            cols: c,
            min_residual: result.residual(),
            config: result.config,
        });
    }
    entries.sort_by_key(|e| (e.rows, e.cols));

    let table: Vec<(usize, usize, f64)> = entries.iter().map(|e| (e.rows, e.cols, e.min_residual)).collect();
    let selected = select_order(&table, ORDER_TAU, ORDER_EPS_REL * observed.norm())
        .ok_or_else(|| Error::Numerical("model-order scan produced no finite residual".into()))?;
    Ok(OrderScan { entries, selected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_shape() {
        let l = Lattice::regular(2.0).unwrap();
        assert_eq!(l.azimuths.len(), 180);
        assert_eq!(l.elevations.len(), 91);
        assert_eq!(l.directions().len(), 180 * 91);
        assert!(l.azimuths.windows(2).all(|w| w[0] < w[1]));
        assert!(Lattice::regular(0.0).is_err());
    }

    #[test]
    fn total_error_basics() {
        let l = Lattice::regular(30.0).unwrap();
        let truth = DensePattern::new(l.clone(), vec![Complex64::default(); l.len()], MeasurementKind::ComplexField).unwrap();
        assert_eq!(total_error(&truth, &truth).unwrap(), 0.0);
        let c = Complex64::new(3.0, 4.0);
        let pred = DensePattern::new(l.clone(), vec![c; l.len()], MeasurementKind::ComplexField).unwrap();
        assert!((total_error(&pred, &truth).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn total_error_rejects_mismatch() {
        let a = Lattice::regular(30.0).unwrap();
        let b = Lattice::regular(45.0).unwrap();
        let pa = DensePattern::new(a.clone(), vec![Complex64::default(); a.len()], MeasurementKind::ComplexField).unwrap();
        let pb = DensePattern::new(b.clone(), vec![Complex64::default(); b.len()], MeasurementKind::ComplexField).unwrap();
        assert!(total_error(&pa, &pb).is_err());
        let pm = DensePattern::new(a.clone(), vec![Complex64::default(); a.len()], MeasurementKind::MagnitudeLinear).unwrap();
        assert!(total_error(&pa, &pm).is_err());
    }

    #[test]
    fn spearman_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&x, &[2.0, 4.0, 8.0, 16.0, 32.0]), Some(1.0));
        assert_eq!(spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&x, &[1.0; 5]), None);
    }

    #[test]
    fn ties_share_rank() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn scatter_needs_three_trials() {
        assert!(residual_total_scatter(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        let s = residual_total_scatter(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]).unwrap();
        assert_eq!(s.spearman_rho, Some(-1.0));
        assert_eq!(s.residual.q50, 2.0);
    }

    #[test]
    fn selection_rule() {
        let table = vec![(1, 1, 10.0), (2, 1, 1e-3), (2, 2, 0.9e-3), (3, 3, 1e-4)];
        assert_eq!(select_order(&table, 2.0, 0.0), Some((3, 3)));
        let table = vec![(1, 1, 10.0), (2, 1, 1.5e-4), (2, 2, 0.9e-4), (3, 3, 1e-4)];
        assert_eq!(select_order(&table, 2.0, 0.0), Some((2, 1)));
    }

    #[test]
    fn embedding_inserts_coincident_gap() {
        // 2 rows × 3 cols: one row gap, two column gaps.
        assert_eq!(embed_gaps(&[0.3, 0.1, 0.2], 2, true), vec![0.3, 0.0, 0.1, 0.2]);
        assert_eq!(embed_gaps(&[0.3, 0.1, 0.2], 2, false), vec![0.3, 0.1, 0.2, 0.0]);
        assert_eq!(embed_gaps(&[], 1, true), vec![0.0]);
    }
}
