//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls the library's forward models.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use antenna_extrap::Complex64;

// 15-point Kronrod nodes/weights and the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    ((kron * h), ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod integral of a complex integrand with absolute
/// error target `tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    // Presplit so oscillatory integrands are never sampled too coarsely.
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| rec(&f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / pieces as f64, 40))
        .sum()
}

/// `(C(x), S(x))` from their defining integrals.
pub fn fresnel_by_quadrature(x: f64) -> (f64, f64) {
    let v = integrate(
        |t| {
            let (s, c) = (0.5 * PI * t * t).sin_cos();
            Complex64::new(c, s)
        },
        0.0,
        x,
        1e-13,
    );
    (v.re, v.im)
}

/// Horn aperture integrals evaluated directly: returns `E(θ)·H(φ)` for
/// width `w`, mouth height `b`, slant radius `rho`.
pub fn horn_by_quadrature(w: f64, b: f64, rho: f64, azimuth: f64, elevation: f64) -> Complex64 {
    let k = TAU;
    let (sin_el, cos_el) = elevation.sin_cos();
    let e = integrate(
        |y| {
            let phase = -k * y * y / (2.0 * rho) + k * y * sin_el;
            Complex64::from_polar(1.0, phase)
        },
        -0.5 * b,
        0.5 * b,
        1e-14 * b,
    ) * (0.5 * (1.0 + cos_el));
    let sin_az = azimuth.sin();
    let h = integrate(
        |x| Complex64::from_polar((PI * x / w).cos(), k * x * sin_az),
        -0.5 * w,
        0.5 * w,
        1e-14 * w,
    );
    e * h
}

/// Unit vector for azimuth/elevation with boresight along +y.
pub fn unit(azimuth: f64, elevation: f64) -> [f64; 3] {
    [
        elevation.cos() * azimuth.sin(),
        elevation.cos() * azimuth.cos(),
        elevation.sin(),
    ]
}

/// Reflector ray sum written out from its definition: polar midpoint grid
/// on the rim ellipse lifted onto `y = a·u² + b·v²`.
#[allow(clippy::too_many_arguments)]
pub fn dish_direct_sum(
    rx: f64,
    rz: f64,
    ca: f64,
    cb: f64,
    feed: [f64; 3],
    amp: Complex64,
    n_angular: usize,
    n_radial: usize,
    azimuth: f64,
    elevation: f64,
) -> Complex64 {
    let dir = unit(azimuth, elevation);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n_angular {
        let psi = TAU * (i as f64 + 0.5) / n_angular as f64;
        for j in 0..n_radial {
            let r = (j as f64 + 0.5) / n_radial as f64;
            let u = rx * r * psi.cos();
            let v = rz * r * psi.sin();
            let y = ca * u * u + cb * v * v;
            let area = rx * rz * r * (1.0 / n_radial as f64) * (TAU / n_angular as f64);
            let stretch = (1.0 + (2.0 * ca * u).powi(2) + (2.0 * cb * v).powi(2)).sqrt();
            let to_feed = ((feed[0] - u).powi(2) + (feed[1] - y).powi(2) + (feed[2] - v).powi(2)).sqrt();
            let advance = u * dir[0] + y * dir[1] + v * dir[2];
            total += Complex64::from_polar(area * stretch, TAU * (to_feed - advance));
        }
    }
    amp * total
}

/// Relative error with a floor so exact zeros compare cleanly.
pub fn rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}
