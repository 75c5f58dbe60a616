//! Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt` and `S(x) = ∫₀ˣ sin(πt²/2) dt`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

/// Below this magnitude the Maclaurin series is used.
const SERIES_LIMIT: f64 = 2.0;
const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 200;

/// Returns `(C(x), S(x))`. Both are odd functions of `x`.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        continued_fraction(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// `C(x) - i·S(x)`, the value of `∫₀ˣ exp(-iπt²/2) dt`.
pub(crate) fn fresnel_conj(x: f64) -> Complex64 {
    let (c, s) = fresnel(x);
    Complex64::new(c, -s)
}

// Term k of the combined series is (πx²/2)^k / k! · x / (2k+1); even k feed C,
// odd k feed S, with alternating signs within each.
fn series(x: f64) -> (f64, f64) {
    let z = FRAC_PI_2 * x * x;
    let mut power = x;
    let mut c = 0.0;
    let mut s = 0.0;
    for k in 0..MAX_TERMS {
        if k > 0 {
            power *= z / k as f64;
        }
        let term = power / (2 * k + 1) as f64;
        match k % 4 {
            0 => c += term,
            1 => s += term,
            2 => c -= term,
            _ => s -= term,
        }
        if term < EPS * (c.abs() + s.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (c, s)
}

// C + iS = (1+i)/2 · erf(z) with z = (√π/2)(1-i)x; erfc(z) comes from its
// continued fraction evaluated by the modified Lentz method.
fn continued_fraction(x: f64) -> (f64, f64) {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, -PI * x * x);
    let mut cc = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..MAX_TERMS {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex64::new(4.0, 0.0);
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let (sin, cos) = (FRAC_PI_2 * x * x).sin_cos();
    let cs = Complex64::new(0.5, 0.5) * (Complex64::new(1.0, 0.0) - Complex64::new(cos, sin) * h);
    (cs.re, cs.im)
}
