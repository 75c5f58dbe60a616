//! Isotropic-fed elliptical paraboloid, evaluated by summing rays from the
//! feed to each surface facet and on to the far field.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::design::{Direction, Excitation};
use crate::error::{check_len, Error, Result};

pub const DEFAULT_ANGULAR: usize = 20;
pub const DEFAULT_RADIAL: usize = 10;

/// Reflector geometry. The surface is `y = a·u² + b·v²` over the elliptical
/// rim `(u/radius_x)² + (v/radius_z)² ≤ 1`, opening toward `+y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DishConfig {
    pub radius_x: f64,
    pub radius_z: f64,
    pub curv_a: f64,
    pub curv_b: f64,
    pub feed: [f64; 3],
}

impl DishConfig {
    pub fn new(radius_x: f64, radius_z: f64, curv_a: f64, curv_b: f64, feed: [f64; 3]) -> Result<Self> {
        if !(radius_x > 0.0 && radius_z > 0.0 && radius_x.is_finite() && radius_z.is_finite()) {
            return Err(Error::invalid("dish radii must be finite and strictly positive"));
        }
        if !(curv_a >= 0.0 && curv_b >= 0.0 && curv_a.is_finite() && curv_b.is_finite()) {
            return Err(Error::invalid("dish curvatures must be finite and nonnegative"));
        }
        if !feed.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("feed position must be finite"));
        }
        Ok(DishConfig {
            radius_x,
            radius_z,
            curv_a,
            curv_b,
            feed,
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        check_len("dish configuration", 7, values.len())?;
        Self::new(values[0], values[1], values[2], values[3], [values[4], values[5], values[6]])
    }

    pub fn surface_height(&self, u: f64, v: f64) -> f64 {
        self.curv_a * u * u + self.curv_b * v * v
    }
}

/// One reflector sample: a surface point and the area it stands for (λ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub point: [f64; 3],
    pub weight: f64,
}

pub(crate) fn check_grid_size(n_angular: usize, n_radial: usize) -> Result<()> {
    if n_angular < 3 || n_radial < 1 {
        return Err(Error::invalid(format!(
            "reflector grid needs n_angular >= 3 and n_radial >= 1, got {n_angular} x {n_radial}"
        )));
    }
    if n_angular % 2 != 0 {
        return Err(Error::invalid(format!(
            "reflector grid needs an even n_angular for mirror symmetry, got {n_angular}"
        )));
    }
    Ok(())
}

/// Polar midpoint grid over the rim, lifted onto the paraboloid.
///
/// Angular samples sit at `2π(i + ½)/n_angular`, radial samples at
/// `(j + ½)/n_radial` of the rim. With an even angular count the point set is
/// closed under `u → -u` and `v → -v`. Each weight is the projected cell area
/// times the surface stretch `√(1 + (2au)² + (2bv)²)` at the cell midpoint.
pub fn reflector_grid(config: &DishConfig, n_angular: usize, n_radial: usize) -> Result<Vec<Facet>> {
    check_grid_size(n_angular, n_radial)?;
    let dr = 1.0 / n_radial as f64;
    let dpsi = TAU / n_angular as f64;
    let mut grid = Vec::with_capacity(n_angular * n_radial);
    for i in 0..n_angular {
        let (s, c) = ((i as f64 + 0.5) * dpsi).sin_cos();
        for j in 0..n_radial {
            let r = (j as f64 + 0.5) * dr;
            let u = config.radius_x * r * c;
            let v = config.radius_z * r * s;
            let y = config.surface_height(u, v);
            let slope_u = 2.0 * config.curv_a * u;
            let slope_v = 2.0 * config.curv_b * v;
            let stretch = (1.0 + slope_u * slope_u + slope_v * slope_v).sqrt();
            grid.push(Facet {
                point: [u, y, v],
                weight: config.radius_x * config.radius_z * r * dr * dpsi * stretch,
            });
        }
    }
    Ok(grid)
}

/// Ray sum `a₁·Σ wᵢ·exp(i·2π·(‖feed − rᵢ‖ − rᵢ·û))` on the default grid.
pub fn dish_pattern(config: &DishConfig, excitation: &Excitation, dirs: &[Direction]) -> Result<Vec<Complex64>> {
    let grid = reflector_grid(config, DEFAULT_ANGULAR, DEFAULT_RADIAL)?;
    dish_pattern_on_grid(config, &grid, excitation, dirs)
}

/// Ray sum over an explicit facet list. No feed taper, blockage or
/// obliquity factor; phase is referenced to the origin.
pub fn dish_pattern_on_grid(
    config: &DishConfig,
    grid: &[Facet],
    excitation: &Excitation,
    dirs: &[Direction],
) -> Result<Vec<Complex64>> {
    check_len("dish excitation", 1, excitation.len())?;
    let a = excitation.values()[0];
    let feed_path: Vec<f64> = grid
        .iter()
        .map(|f| {
            let d = [
                config.feed[0] - f.point[0],
                config.feed[1] - f.point[1],
                config.feed[2] - f.point[2],
            ];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
        .collect();
    Ok(dirs
        .iter()
        .map(|dir| {
            let u = dir.unit_vector();
            let sum: Complex64 = grid
                .iter()
                .zip(&feed_path)
                .map(|(f, &path)| {
                    let advance = f.point[0] * u[0] + f.point[1] * u[1] + f.point[2] * u[2];
                    Complex64::from_polar(f.weight, TAU * (path - advance))
                })
                .sum();
            a * sum
        })
        .collect())
}
