use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::design::ConfigurationPoint;

/// Shape of the candidate set built around the current iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScheme {
    /// Full `3^d` lattice `{c - s, c, c + s}` in every coordinate.
    Factorial3,
    /// The center plus `±s` along each axis (`2d + 1` points).
    Compass,
    /// `Factorial3` up to five configuration coordinates, `Compass` above.
    Auto,
}

impl GridScheme {
    pub fn resolve(self, config_dim: usize) -> GridScheme {
        match self {
            GridScheme::Auto if config_dim <= 5 => GridScheme::Factorial3,
            GridScheme::Auto => GridScheme::Compass,
            other => other,
        }
    }
}

/// Candidate configurations around `center`, clipped to `bounds` and
/// de-duplicated. The center is always the first entry.
pub fn candidate_grid(
    center: &ConfigurationPoint,
    spacing: &[f64],
    scheme: GridScheme,
    bounds: &[(f64, f64)],
) -> Vec<ConfigurationPoint> {
    let d = center.dim();
    debug_assert_eq!(spacing.len(), d);
    debug_assert_eq!(bounds.len(), d);
    let clip = |i: usize, v: f64| v.clamp(bounds[i].0, bounds[i].1);

    let mut out = vec![ConfigurationPoint(
        center.values().iter().enumerate().map(|(i, &v)| clip(i, v)).collect(),
    )];
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    seen.insert(key(&out[0]));
    let mut push = |point: Vec<f64>, out: &mut Vec<ConfigurationPoint>| {
        let point = ConfigurationPoint(point);
        if seen.insert(key(&point)) {
            out.push(point);
        }
    };

    match scheme.resolve(d) {
        GridScheme::Compass => {
            for i in 0..d {
                for sign in [-1.0, 1.0] {
                    let mut p = out[0].0.clone();
                    p[i] = clip(i, center.0[i] + sign * spacing[i]);
                    push(p, &mut out);
                }
            }
        }
        _ => {
            let total = 3usize.pow(d as u32);
            for code in 0..total {
                let mut rest = code;
                let p: Vec<f64> = (0..d)
                    .map(|i| {
                        let step = (rest % 3) as f64 - 1.0;
                        rest /= 3;
                        clip(i, center.0[i] + step * spacing[i])
                    })
                    .collect();
                push(p, &mut out);
            }
        }
    }
    out
}

fn key(p: &ConfigurationPoint) -> Vec<u64> {
    // +0.0 and -0.0 compare equal; normalize before hashing bits.
    p.values().iter().map(|v| (v + 0.0).to_bits()).collect()
}
