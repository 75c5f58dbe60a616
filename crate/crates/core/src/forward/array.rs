use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::design::{Direction, Excitation};
use crate::error::{check_len, Error, Result};

/// Element geometry of a rectangular array. The first row and column sit at
/// offset zero and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct RectArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// `y₂..y_M` in wavelengths.
    pub row_offsets: Vec<f64>,
    /// `x₂..x_N` in wavelengths.
    pub col_offsets: Vec<f64>,
}

impl RectArrayConfig {
    pub fn new(row_offsets: Vec<f64>, col_offsets: Vec<f64>) -> Result<Self> {
        for offsets in [&row_offsets, &col_offsets] {
            let mut prev = 0.0;
            for &o in offsets.iter() {
                if !o.is_finite() || o < prev {
                    return Err(Error::invalid(
                        "array offsets must be finite, nonnegative and nondecreasing",
                    ));
                }
                prev = o;
            }
        }
        Ok(RectArrayConfig {
            rows: row_offsets.len() + 1,
            cols: col_offsets.len() + 1,
            row_offsets,
            col_offsets,
        })
    }

    /// Builds offsets from the gap vector used as the solver configuration:
    /// `rows-1` row gaps then `cols-1` column gaps.
    pub fn from_gaps(rows: usize, cols: usize, gaps: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("rows and cols must be positive"));
        }
        check_len("array gaps", rows + cols - 2, gaps.len())?;
        let (row_gaps, col_gaps) = gaps.split_at(rows - 1);
        let cumulative = |g: &[f64]| {
            g.iter()
                .scan(0.0, |acc, &d| {
                    *acc += d;
                    Some(*acc)
                })
                .collect::<Vec<_>>()
        };
        Self::new(cumulative(row_gaps), cumulative(col_gaps))
    }

    fn row_positions(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.row_offsets.iter().copied())
    }

    fn col_positions(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.col_offsets.iter().copied())
    }
}

/// Positions of a general array, in wavelengths. Elements may coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralArrayConfig {
    pub positions: Vec<[f64; 3]>,
}

impl GeneralArrayConfig {
    pub fn new(positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("a general array needs at least one element"));
        }
        Ok(GeneralArrayConfig { positions })
    }

    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if coords.len() % 3 != 0 {
            return Err(Error::invalid("general array coordinates must come in xyz triples"));
        }
        Self::new(coords.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }
}

fn cis(phase: f64) -> Complex64 {
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// `Σ_m a_m·exp(i·2π·‖x_m − s_k‖)` at each position `s_k`. No path-loss term.
pub fn array_nearfield_pattern(
    config: &GeneralArrayConfig,
    excitation: &Excitation,
    points: &[[f64; 3]],
) -> Result<Vec<Complex64>> {
    check_len("excitation", config.positions.len(), excitation.len())?;
    Ok(points
        .iter()
        .map(|s| {
            config
                .positions
                .iter()
                .zip(excitation.values())
                .map(|(x, &a)| a * cis(TAU * distance(x, s)))
                .sum()
        })
        .collect())
}

/// Row-major `K × N` matrix of single-element terms `exp(i·2π·‖x_m − s_k‖)`.
pub fn array_nearfield_terms(config: &GeneralArrayConfig, points: &[[f64; 3]]) -> Vec<Complex64> {
    points
        .iter()
        .flat_map(|s| config.positions.iter().map(move |x| cis(TAU * distance(x, s))))
        .collect()
}

/// `Σ_j Σ_k a_jk·exp(i·2π·(y_j sinθ + x_k sinφ))`, excitation row-major in
/// `(row, col)`.
pub fn rect_array_pattern(
    config: &RectArrayConfig,
    excitation: &Excitation,
    dirs: &[Direction],
) -> Result<Vec<Complex64>> {
    check_len("excitation", config.rows * config.cols, excitation.len())?;
    let a = excitation.values();
    let mut col_phase = vec![Complex64::default(); config.cols];
    Ok(dirs
        .iter()
        .map(|d| {
            let (sin_az, sin_el) = (d.azimuth.sin(), d.elevation.sin());
            for (c, x) in col_phase.iter_mut().zip(config.col_positions()) {
                *c = cis(TAU * x * sin_az);
            }
            config
                .row_positions()
                .enumerate()
                .map(|(j, y)| {
                    let row: Complex64 = a[j * config.cols..(j + 1) * config.cols]
                        .iter()
                        .zip(&col_phase)
                        .map(|(&ajk, &c)| ajk * c)
                        .sum();
                    cis(TAU * y * sin_el) * row
                })
                .sum()
        })
        .collect())
}

/// Row-major `K × MN` matrix of single-element terms.
pub fn rect_array_terms(config: &RectArrayConfig, dirs: &[Direction]) -> Vec<Complex64> {
    let n = config.rows * config.cols;
    let mut out = Vec::with_capacity(dirs.len() * n);
    let mut col_phase = vec![Complex64::default(); config.cols];
    for d in dirs {
        let (sin_az, sin_el) = (d.azimuth.sin(), d.elevation.sin());
        for (c, x) in col_phase.iter_mut().zip(config.col_positions()) {
            *c = cis(TAU * x * sin_az);
        }
        for y in config.row_positions() {
            let r = cis(TAU * y * sin_el);
            out.extend(col_phase.iter().map(|&c| r * c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn integer_wavelength_path_has_zero_phase() {
        let cfg = GeneralArrayConfig::new(vec![[0.0; 3]]).unwrap();
        let out = array_nearfield_pattern(&cfg, &Excitation::ones(1), &[[100.0, 0.0, 0.0]]).unwrap();
        assert!((out[0] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quarter_wavelength_offset_gives_minus_i() {
        let cfg = GeneralArrayConfig::new(vec![[0.0; 3], [0.0, 0.0, 0.25]]).unwrap();
        let out = array_nearfield_pattern(&cfg, &Excitation::ones(2), &[[0.0, 0.0, 100.0]]).unwrap();
        assert!((out[0] - c(1.0, -1.0)).norm() < 1e-12, "{}", out[0]);
    }

    #[test]
    fn coincident_sample_point_is_allowed() {
        let cfg = GeneralArrayConfig::new(vec![[0.3, 0.1, -0.2]]).unwrap();
        let out = array_nearfield_pattern(&cfg, &Excitation::ones(1), &[[0.3, 0.1, -0.2]]).unwrap();
        assert_eq!(out[0], c(1.0, 0.0));
    }

    #[test]
    fn mirrored_element_matches_in_plane() {
        let up = GeneralArrayConfig::new(vec![[0.0, 0.0, 0.3]]).unwrap();
        let down = GeneralArrayConfig::new(vec![[0.0, 0.0, -0.3]]).unwrap();
        let pts = [[1.0, 2.0, 0.0], [-3.5, 0.25, 0.0]];
        let a = Excitation::new(vec![c(0.3, -0.7)]);
        assert_eq!(
            array_nearfield_pattern(&up, &a, &pts).unwrap(),
            array_nearfield_pattern(&down, &a, &pts).unwrap()
        );
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let cfg = GeneralArrayConfig::new(vec![[0.0; 3]]).unwrap();
        assert!(array_nearfield_pattern(&cfg, &Excitation::ones(2), &[[1.0, 0.0, 0.0]]).is_err());
        let rect = RectArrayConfig::from_gaps(2, 2, &[0.5, 0.5]).unwrap();
        assert!(rect_array_pattern(&rect, &Excitation::ones(3), &[Direction::boresight()]).is_err());
    }

    #[test]
    fn single_element_is_one_everywhere() {
        let cfg = RectArrayConfig::from_gaps(1, 1, &[]).unwrap();
        let dirs = [Direction::new(0.7, -0.2).unwrap(), Direction::new(-2.0, 1.1).unwrap()];
        for v in rect_array_pattern(&cfg, &Excitation::ones(1), &dirs).unwrap() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn boresight_sums_excitation() {
        let cfg = RectArrayConfig::from_gaps(2, 3, &[0.4, 0.1, 0.35]).unwrap();
        let a = Excitation::new((0..6).map(|i| c(i as f64, 1.0 - i as f64)).collect());
        let out = rect_array_pattern(&cfg, &a, &[Direction::boresight()]).unwrap();
        let sum: Complex64 = a.values().iter().sum();
        assert!((out[0] - sum).norm() < 1e-12);
    }

    #[test]
    fn half_wave_pair_cancels_at_endfire() {
        let cfg = RectArrayConfig::from_gaps(1, 2, &[0.5]).unwrap();
        let out = rect_array_pattern(&cfg, &Excitation::ones(2), &[Direction::new(FRAC_PI_2, 0.0).unwrap()]).unwrap();
        assert!(out[0].norm() < 1e-12);
    }

    #[test]
    fn gaps_accumulate_into_offsets() {
        let cfg = RectArrayConfig::from_gaps(3, 2, &[0.1, 0.2, 0.4]).unwrap();
        assert_eq!(cfg.row_offsets, vec![0.1, 0.1 + 0.2]);
        assert_eq!(cfg.col_offsets, vec![0.4]);
        assert!(RectArrayConfig::new(vec![0.3, 0.2], vec![]).is_err());
        assert!(RectArrayConfig::new(vec![-0.1], vec![]).is_err());
    }
}
