//! Closed-form E-plane sectoral horn pattern.
//!
//! The aperture field is separable: a cosine taper across the width `w`
//! (H-plane) and a quadratic phase error `exp(-i·k·y'²/(2ρ₁))` across the mouth
//! height `b₁` (E-plane). The horn's E-field lies in the elevation plane, so
//! the E-plane factor depends on elevation and the H-plane factor on azimuth:
//!
//! ```text
//! E(θ) = (1 + cos θ)/2 · ∫ exp(-i·k·y'²/(2ρ₁)) · exp(i·k·y'·sin θ) dy'   over |y'| ≤ b₁/2
//! H(φ) = ∫ cos(π·x'/w) · exp(i·k·x'·sin φ) dx'                           over |x'| ≤ w/2
//! ```
//!
//! Completing the square turns `E` into a difference of Fresnel integrals;
//! `H` reduces to a pair of sinc terms.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::fresnel::fresnel_conj;
use crate::design::{Direction, Excitation};
use crate::error::{check_len, Error, Result};

/// Horn geometry in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HornConfig {
    /// H-plane aperture width `w`.
    pub width: f64,
    /// E-plane aperture height `b₁`.
    pub mouth_height: f64,
    /// Slant radius `ρ₁` from the virtual apex to the mouth.
    pub slant_radius: f64,
}

impl HornConfig {
    pub fn new(width: f64, mouth_height: f64, slant_radius: f64) -> Result<Self> {
        let horn = HornConfig {
            width,
            mouth_height,
            slant_radius,
        };
        horn.validate()?;
        Ok(horn)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        check_len("horn configuration", 3, values.len())?;
        Self::new(values[0], values[1], values[2])
    }

    fn validate(&self) -> Result<()> {
        let all_positive = [self.width, self.mouth_height, self.slant_radius]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::invalid("horn dimensions must be finite and strictly positive"));
        }
        if self.mouth_height > 2.0 * self.slant_radius {
            return Err(Error::invalid(format!(
                "horn mouth height {} exceeds twice the slant radius {}",
                self.mouth_height, self.slant_radius
            )));
        }
        Ok(())
    }

    /// E-plane factor including the `(1 + cos θ)/2` obliquity term.
    pub fn eplane_factor(&self, elevation: f64) -> Complex64 {
        let rho = self.slant_radius;
        let half = 0.5 * self.mouth_height;
        let (sin_el, cos_el) = elevation.sin_cos();
        let scale = (2.0 / rho).sqrt();
        let center = rho * sin_el;
        let t_lo = scale * (-half - center);
        let t_hi = scale * (half - center);
        let integral = (fresnel_conj(t_hi) - fresnel_conj(t_lo)) * (0.5 * rho).sqrt();
        let (s, c) = (PI * rho * sin_el * sin_el).sin_cos();
        integral * Complex64::new(c, s) * (0.5 * (1.0 + cos_el))
    }

    /// H-plane factor. The integrand is even in `x'`, so the result is real.
    pub fn hplane_factor(&self, azimuth: f64) -> f64 {
        let w = self.width;
        let alpha = PI / w;
        let u = TAU * azimuth.sin();
        0.5 * w * (sinc(0.5 * w * (alpha - u)) + sinc(0.5 * w * (alpha + u)))
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `a₁·E(θ)·H(φ)` at each direction.
pub fn eplane_horn_pattern(config: &HornConfig, excitation: &Excitation, dirs: &[Direction]) -> Result<Vec<Complex64>> {
    check_len("horn excitation", 1, excitation.len())?;
    config.validate()?;
    let a = excitation.values()[0];
    Ok(dirs
        .iter()
        .map(|d| a * config.eplane_factor(d.elevation) * config.hplane_factor(d.azimuth))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(HornConfig::new(0.0, 1.0, 1.0).is_err());
        assert!(HornConfig::new(1.0, -1.0, 1.0).is_err());
        assert!(HornConfig::new(1.0, 3.0, 1.0).is_err());
        assert!(HornConfig::new(1.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn eplane_is_even_in_elevation() {
        let horn = HornConfig::new(2.0, 3.5, 4.0).unwrap();
        for el in [0.05, 0.4, 1.2] {
            let up = horn.eplane_factor(el);
            let down = horn.eplane_factor(-el);
            assert!((up - down).norm() <= 1e-13 * up.norm().max(1e-300), "{up} {down}");
        }
    }

    #[test]
    fn hplane_boresight_is_two_w_over_pi() {
        // ∫ cos(πx/w) dx over |x| ≤ w/2 equals 2w/π.
        let horn = HornConfig::new(3.0, 1.0, 4.0).unwrap();
        assert!((horn.hplane_factor(0.0) - 6.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn hplane_removable_singularity_is_finite() {
        // u = π/w happens at sin φ = 1/(2w).
        let horn = HornConfig::new(1.0, 1.0, 4.0).unwrap();
        let v = horn.hplane_factor((0.5f64).asin());
        assert!((v - 0.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn excitation_must_be_scalar() {
        let horn = HornConfig::new(1.0, 1.0, 4.0).unwrap();
        assert!(eplane_horn_pattern(&horn, &Excitation::ones(2), &[Direction::boresight()]).is_err());
    }
}
