//! Sample-point layouts and measurement noise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::design::Direction;
use crate::error::{Error, Result};

/// Default ceiling for the random elevation of azimuth blocks (10°).
pub const DEFAULT_MAX_ELEVATION: f64 = 10.0 * PI / 180.0;

/// One of the supported measurement layouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
pub enum SamplingSpec {
    /// Evenly spaced azimuths on the horizon.
    AzimuthOnly { count: usize },
    /// Full azimuth cut at zero elevation plus a full elevation cut at zero
    /// azimuth.
    PrincipalPlanes { az_count: usize, el_count: usize },
    /// The azimuth circle split into `block_count` contiguous runs of
    /// `block_len` samples, each run lifted to its own random elevation in
    /// `(0, max_elevation]`.
    AzimuthBlocks {
        block_count: usize,
        block_len: usize,
        max_elevation: f64,
    },
    /// Directions uniform with respect to solid angle.
    RandomSphere { count: usize },
}

impl SamplingSpec {
    pub fn validate(&self) -> Result<()> {
        let counts_ok = match *self {
            SamplingSpec::AzimuthOnly { count } | SamplingSpec::RandomSphere { count } => count >= 1,
            SamplingSpec::PrincipalPlanes { az_count, el_count } => az_count >= 1 && el_count >= 1,
            SamplingSpec::AzimuthBlocks {
                block_count,
                block_len,
                max_elevation,
            } => {
                if !(max_elevation > 0.0 && max_elevation < FRAC_PI_2) {
                    return Err(Error::invalid(format!(
                        "max_elevation must lie in (0, pi/2), got {max_elevation}"
                    )));
                }
                block_count >= 1 && block_len >= 1
            }
        };
        if counts_ok {
            Ok(())
        } else {
            Err(Error::invalid("sampling counts must be at least 1"))
        }
    }

    /// Number of directions the layout produces.
    pub fn len(&self) -> usize {
        match *self {
            SamplingSpec::AzimuthOnly { count } | SamplingSpec::RandomSphere { count } => count,
            SamplingSpec::PrincipalPlanes { az_count, el_count } => az_count + el_count,
            SamplingSpec::AzimuthBlocks {
                block_count,
                block_len,
                ..
            } => block_count * block_len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            SamplingSpec::AzimuthOnly { .. } => "azimuth",
            SamplingSpec::PrincipalPlanes { .. } => "principal",
            SamplingSpec::AzimuthBlocks { .. } => "blocks",
            SamplingSpec::RandomSphere { .. } => "random",
        }
    }
}

fn azimuth_cut(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| -PI + TAU * i as f64 / count as f64)
}

/// Generates the layout's directions; deterministic in `seed`.
pub fn generate_samples(spec: &SamplingSpec, seed: u64) -> Result<Vec<Direction>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = match *spec {
        SamplingSpec::AzimuthOnly { count } => azimuth_cut(count)
            .map(|az| Direction {
                azimuth: az,
                elevation: 0.0,
            })
            .collect(),
        SamplingSpec::PrincipalPlanes { az_count, el_count } => {
            let elevations = (0..el_count).map(|j| {
                if el_count == 1 {
                    0.0
                } else {
                    (-FRAC_PI_2 + PI * j as f64 / (el_count - 1) as f64).clamp(-FRAC_PI_2, FRAC_PI_2)
                }
            });
            azimuth_cut(az_count)
                .map(|az| Direction {
                    azimuth: az,
                    elevation: 0.0,
                })
                .chain(elevations.map(|el| Direction {
                    azimuth: 0.0,
                    elevation: el,
                }))
                .collect()
        }
        SamplingSpec::AzimuthBlocks {
            block_count,
            block_len,
            max_elevation,
        } => {
            let azimuths: Vec<f64> = azimuth_cut(block_count * block_len).collect();
            azimuths
                .chunks(block_len)
                .flat_map(|block| {
                    // 1 - U[0,1) lies in (0, 1].
                    let el = max_elevation * (1.0 - rng.random::<f64>());
                    block.iter().map(move |&az| Direction {
                        azimuth: az,
                        elevation: el,
                    })
                })
                .collect()
        }
        SamplingSpec::RandomSphere { count } => (0..count)
            .map(|_| {
                let az = rng.random_range(-PI..PI);
                let z: f64 = rng.random_range(-1.0..=1.0);
                Direction {
                    azimuth: az,
                    elevation: z.asin(),
                }
            })
            .collect(),
    };
    Ok(dirs)
}

/// Root-mean-square modulus.
pub fn rms(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v.norm_sqr()).sum::<f64>() / values.len() as f64).sqrt()
}

/// Adds circular complex Gaussian noise whose total RMS is `sigma_rel` times
/// the RMS of `values` (each component gets `sigma_rel·RMS/√2`).
pub fn add_noise(values: &[Complex64], sigma_rel: f64, seed: u64) -> Result<Vec<Complex64>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot add noise to an empty pattern"));
    }
    if !(sigma_rel >= 0.0 && sigma_rel.is_finite()) {
        return Err(Error::invalid(format!("noise level must be finite and nonnegative, got {sigma_rel}")));
    }
    if sigma_rel == 0.0 {
        return Ok(values.to_vec());
    }
    let sigma = sigma_rel * rms(values) / std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(values
        .iter()
        .map(|&v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * sigma
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_6;

    use super::*;

    #[test]
    fn azimuth_only_is_evenly_spaced() {
        let dirs = generate_samples(&SamplingSpec::AzimuthOnly { count: 4 }, 0).unwrap();
        let az: Vec<f64> = dirs.iter().map(|d| d.azimuth).collect();
        assert_eq!(az, vec![-PI, -FRAC_PI_2, 0.0, FRAC_PI_2]);
        assert!(dirs.iter().all(|d| d.elevation == 0.0));
    }

    #[test]
    fn principal_planes_lie_on_cuts() {
        let dirs = generate_samples(
            &SamplingSpec::PrincipalPlanes {
                az_count: 360,
                el_count: 181,
            },
            3,
        )
        .unwrap();
        assert_eq!(dirs.len(), 541);
        assert!(dirs.iter().all(|d| d.azimuth == 0.0 || d.elevation == 0.0));
        assert_eq!(dirs[360].elevation, -FRAC_PI_2);
        assert_eq!(dirs[540].elevation, FRAC_PI_2);
    }

    #[test]
    fn blocks_share_elevation_within_a_run() {
        let spec = SamplingSpec::AzimuthBlocks {
            block_count: 8,
            block_len: 25,
            max_elevation: DEFAULT_MAX_ELEVATION,
        };
        let dirs = generate_samples(&spec, 11).unwrap();
        assert_eq!(dirs.len(), 200);
        for block in dirs.chunks(25) {
            assert!(block.iter().all(|d| d.elevation == block[0].elevation));
            assert!(block[0].elevation > 0.0 && block[0].elevation <= DEFAULT_MAX_ELEVATION);
        }
        let cut = generate_samples(&SamplingSpec::AzimuthOnly { count: 200 }, 0).unwrap();
        for (b, c) in dirs.iter().zip(&cut) {
            assert_eq!(b.azimuth, c.azimuth);
        }
    }

    #[test]
    fn random_sphere_cap_fraction() {
        let dirs = generate_samples(&SamplingSpec::RandomSphere { count: 100_000 }, 42).unwrap();
        // Cap above elevation π/6 covers (1 - sin(π/6))/2 = 1/4 of the sphere.
        let frac = dirs.iter().filter(|d| d.elevation > FRAC_PI_6).count() as f64 / dirs.len() as f64;
        assert!((frac - 0.25).abs() <= 0.01, "{frac}");
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SamplingSpec::RandomSphere { count: 50 };
        assert_eq!(generate_samples(&spec, 9).unwrap(), generate_samples(&spec, 9).unwrap());
        assert_ne!(generate_samples(&spec, 9).unwrap(), generate_samples(&spec, 10).unwrap());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(generate_samples(&SamplingSpec::AzimuthOnly { count: 0 }, 0).is_err());
        let bad = SamplingSpec::AzimuthBlocks {
            block_count: 2,
            block_len: 3,
            max_elevation: FRAC_PI_2,
        };
        assert!(generate_samples(&bad, 0).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let v = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1)];
        assert_eq!(add_noise(&v, 0.0, 5).unwrap(), v);
    }

    #[test]
    fn noise_level_and_bias() {
        let n = 100_000;
        let v = vec![Complex64::new(3.0, -4.0); n];
        let out = add_noise(&v, 0.1, 77).unwrap();
        let diff: Vec<Complex64> = out.iter().zip(&v).map(|(o, i)| o - i).collect();
        let ratio = rms(&diff) / rms(&v);
        assert!((ratio - 0.1).abs() <= 0.002, "{ratio}");
        let mean: Complex64 = diff.iter().sum::<Complex64>() / n as f64;
        let sigma = 0.1 * rms(&v);
        assert!(mean.norm() <= 3.0 * sigma / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn noise_is_seeded() {
        let v = vec![Complex64::new(1.0, 0.0); 10];
        assert_eq!(add_noise(&v, 0.3, 1).unwrap(), add_noise(&v, 0.3, 1).unwrap());
    }
}
