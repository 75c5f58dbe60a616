//! Complex least squares for the excitation, free or on the unit sphere.
//!
//! The design matrix `M` (`K × N`) is reduced to an `N × N` triangle by a
//! Householder QR (or zero-padded when `K < N`), and the triangle is
//! diagonalized by an SVD, `R = U·Σ·Vᴴ`. In the `V` basis the unit-norm
//! stationarity system `(MᴴM + λI)·a = Mᴴp` decouples into
//! `âᵢ = bᵢ / (σᵢ² + λ)` with `b = Σ·Uᴴ·Qᴴ·p`, and `λ` is the root of the
//! secular equation `‖a(λ)‖ = 1` on `λ > -σ_min²`, where `‖a(λ)‖` is strictly
//! decreasing.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::Excitation;
use crate::error::{check_len, Error, Result};

/// How the fitted excitation is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationConstraint {
    /// `‖a‖₂ = 1`.
    UnitNorm,
    /// Plain (minimum-norm) least squares.
    Unconstrained,
}

/// A solved excitation with its residual `‖M·a − p‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationFit {
    pub excitation: Excitation,
    pub residual: f64,
    /// Lagrange multiplier `λ` of the unit-norm problem; `None` when
    /// unconstrained.
    pub multiplier: Option<f64>,
}

/// A factored design matrix, reusable across right-hand sides.
pub struct LeastSquares {
    matrix: DMatrix<Complex64>,
    qr: Option<nalgebra::QR<Complex64, nalgebra::Dyn, nalgebra::Dyn>>,
    u: DMatrix<Complex64>,
    v: DMatrix<Complex64>,
    sigma: DVector<f64>,
}

impl LeastSquares {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let (k, n) = matrix.shape();
        if n == 0 {
            return Err(Error::invalid("the excitation must have at least one entry"));
        }
        if k == 0 {
            return Err(Error::invalid("least squares needs at least one observation"));
        }
        if matrix.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("design matrix has non-finite entries".into()));
        }
        let (qr, square) = if k >= n {
            let qr = matrix.clone().qr();
            let r = qr.r();
            (Some(qr), r)
        } else {
            let mut padded = DMatrix::zeros(n, n);
            padded.rows_mut(0, k).copy_from(&matrix);
            (None, padded)
        };
        let svd = square.svd(true, true);
        let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not produce U".into()))?;
        let v = svd
            .v_t
            .ok_or_else(|| Error::Numerical("SVD did not produce V".into()))?
            .adjoint();
        Ok(LeastSquares {
            matrix,
            qr,
            u,
            v,
            sigma: svd.singular_values,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.sigma
    }

    /// Coordinates `Uᴴ·Qᴴ·p` of the data in the left singular basis.
    fn project(&self, p: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.cols();
        let c = match &self.qr {
            Some(qr) => {
                let mut c = p.clone();
                qr.q_tr_mul(&mut c);
                c.rows(0, n).into_owned()
            }
            None => {
                let mut c = DVector::zeros(n);
                c.rows_mut(0, p.len()).copy_from(p);
                c
            }
        };
        self.u.ad_mul(&c)
    }

    pub fn residual(&self, a: &DVector<Complex64>, p: &DVector<Complex64>) -> f64 {
        (&self.matrix * a - p).norm()
    }

    pub fn solve(&self, p: &DVector<Complex64>, constraint: ExcitationConstraint) -> Result<ExcitationFit> {
        check_len("observations", self.rows(), p.len())?;
        if p.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("observations contain non-finite values".into()));
        }
        let g = self.project(p);
        let (a, multiplier) = match constraint {
            ExcitationConstraint::Unconstrained => (self.min_norm(&g), None),
            ExcitationConstraint::UnitNorm => {
                let (a, lambda) = self.unit_norm(&g);
                (a, Some(lambda))
            }
        };
        let residual = self.residual(&a, p);
        Ok(ExcitationFit {
            excitation: Excitation::new(a.iter().copied().collect()),
            residual,
            multiplier,
        })
    }

    fn rank_tolerance(&self) -> f64 {
        let smax = self.sigma.iter().cloned().fold(0.0, f64::max);
        smax * f64::EPSILON * self.rows().max(self.cols()) as f64
    }

    fn min_norm(&self, g: &DVector<Complex64>) -> DVector<Complex64> {
        let tol = self.rank_tolerance();
        let coeffs = DVector::from_iterator(
            g.len(),
            g.iter()
                .zip(self.sigma.iter())
                .map(|(&gi, &s)| if s > tol { gi / s } else { Complex64::default() }),
        );
        &self.v * coeffs
    }

    fn unit_norm(&self, g: &DVector<Complex64>) -> (DVector<Complex64>, f64) {
        let n = self.cols();
        let smax = self.sigma.iter().cloned().fold(0.0, f64::max);
        let b: Vec<Complex64> = g.iter().zip(self.sigma.iter()).map(|(&gi, &s)| gi * s).collect();
        let eig: Vec<f64> = self.sigma.iter().map(|s| s * s).collect();
        let (i_min, e_min) = eig
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, e)| if e < acc.1 { (i, e) } else { acc });
        // Shifted eigenvalues dᵢ = σᵢ² − σ_min² ≥ 0; the root is sought in t = λ + σ_min² > 0.
        let d: Vec<f64> = eig.iter().map(|e| (e - e_min).max(0.0)).collect();
        let b_sq: Vec<f64> = b.iter().map(|v| v.norm_sqr()).collect();
        let b_norm = b_sq.iter().sum::<f64>().sqrt();

        if b_norm == 0.0 || !b_norm.is_finite() {
            // p ⟂ range(M): any minimizer of ‖M·a‖ on the sphere, i.e. the
            // least right singular vector.
            return (self.v.column(i_min).into_owned(), -e_min);
        }

        let d_tol = 64.0 * f64::EPSILON * smax * smax;
        let in_min_space: Vec<bool> = d.iter().map(|&di| di <= d_tol).collect();
        let b_min_sq: f64 = b_sq.iter().zip(&in_min_space).filter(|(_, &m)| m).map(|(b, _)| b).sum();
        let norm_sq_at = |t: f64, skip_min: bool| -> f64 {
            b_sq.iter()
                .zip(&d)
                .zip(&in_min_space)
                .filter(|(_, &m)| !(skip_min && m))
                .map(|((&bi, &di), _)| bi / ((di + t) * (di + t)))
                .sum()
        };

        let hard_threshold = 1e-24 * b_norm * b_norm;
        if b_min_sq <= hard_threshold {
            let boundary = norm_sq_at(0.0, true);
            if boundary <= 1.0 {
                // Hard case: λ = −σ_min², top up along the least singular
                // direction to reach the unit sphere.
                let mut coeffs = DVector::<Complex64>::zeros(n);
                for i in 0..n {
                    if !in_min_space[i] {
                        coeffs[i] = b[i] / d[i];
                    }
                }
                let tau = (1.0 - boundary).max(0.0).sqrt();
                let mut a = &self.v * coeffs;
                a += self.v.column(i_min) * Complex64::new(tau, 0.0);
                return (a, -e_min);
            }
        }

        let skip = b_min_sq <= hard_threshold;
        let t = bisect_secular(|t| norm_sq_at(t, skip), b_norm);
        let coeffs = DVector::from_iterator(
            n,
            b.iter()
                .zip(&d)
                .zip(&in_min_space)
                .map(|((&bi, &di), &m)| if skip && m { Complex64::default() } else { bi / (di + t) }),
        );
        let mut a = &self.v * coeffs;
        let norm = a.norm();
        if norm > 0.0 {
            a /= Complex64::new(norm, 0.0);
        }
        (a, t - e_min)
    }
}

/// Root of `norm_sq(t) = 1` for a strictly decreasing `norm_sq` on `t > 0`,
/// bracketed by `(0, b_norm]` since `norm_sq(t) ≤ ‖b‖²/t²`.
fn bisect_secular(norm_sq: impl Fn(f64) -> f64, b_norm: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = b_norm;
    // ~1100 halvings reach the smallest subnormal; typical roots need ~60.
    for _ in 0..1200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm_sq(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi always satisfies norm_sq ≤ 1; pick whichever end is closer to 1.
    if lo > 0.0 && (norm_sq(lo) - 1.0).abs() < (norm_sq(hi) - 1.0).abs() {
        lo
    } else {
        hi
    }
}

/// One-shot solve of `min ‖M·a − p‖₂` under `constraint`.
pub fn solve_excitation(
    matrix: &DMatrix<Complex64>,
    p: &DVector<Complex64>,
    constraint: ExcitationConstraint,
) -> Result<ExcitationFit> {
    LeastSquares::new(matrix.clone())?.solve(p, constraint)
}
