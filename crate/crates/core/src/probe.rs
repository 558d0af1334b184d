//! Deterministic probe sets used for numerical domination and sup-norm checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{Direction, SupportKind, SupportSpec};
use crate::error::{Error, Result};

/// Default number of quasi-random probes.
pub const DEFAULT_PROBES: usize = 10_000;

/// Van der Corput radical inverse in base 2.
fn radical_inverse(mut i: u64) -> f64 {
    let mut inv = 0.0;
    let mut f = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            inv += f;
        }
        i >>= 1;
        f *= 0.5;
    }
    inv
}

/// `count` low-discrepancy points in `(0, 1)`, rotated by a seeded shift.
pub fn unit_probes(count: usize, seed: u64) -> Vec<f64> {
    let shift: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    (1..=count as u64)
        .map(|i| {
            let u = (radical_inverse(i) + shift).fract();
            // keep strictly inside (0, 1)
            u.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
        })
        .collect()
}

/// Maps `u in (0, 1)` onto a one-dimensional support.
pub fn map_unit(support: &SupportSpec, u: f64) -> Result<f64> {
    Ok(match support.kind() {
        SupportKind::Interval { lo, hi } => lo + u * (hi - lo),
        SupportKind::HalfLine {
            origin,
            direction: Direction::Up,
        } => origin + u / (1.0 - u),
        SupportKind::HalfLine {
            origin,
            direction: Direction::Down,
        } => origin - u / (1.0 - u),
        SupportKind::Line => {
            let t = 2.0 * u - 1.0;
            t / (1.0 - t * t)
        }
        SupportKind::Plane(_) => return Err(Error::UnsupportedDimension),
    })
}

/// Sorted probe set: the knots lying inside the support, the midpoints between
/// consecutive knots, and `count` seeded quasi-random points.
pub fn probe_points(
    support: &SupportSpec,
    knots: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let (lo, hi) = support.bounds()?;
    let mut inside: Vec<f64> = knots
        .iter()
        .copied()
        .filter(|k| k.is_finite() && *k >= lo && *k <= hi)
        .collect();
    inside.sort_by(f64::total_cmp);
    inside.dedup();
    let mids: Vec<f64> = inside.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut pts = inside;
    pts.extend(mids);
    for u in unit_probes(count, seed) {
        pts.push(map_unit(support, u)?);
    }
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_probes_are_deterministic_and_spread() {
        let a = unit_probes(1000, 7);
        let b = unit_probes(1000, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|&u| u > 0.0 && u < 1.0));
        // every tenth of the unit interval receives probes
        for k in 0..10 {
            let lo = k as f64 / 10.0;
            assert!(a.iter().any(|&u| u >= lo && u < lo + 0.1));
        }
        assert_ne!(unit_probes(10, 1), unit_probes(10, 2));
    }

    #[test]
    fn probes_stay_in_support() {
        let s = SupportSpec::half_line(2.0, Direction::Down).unwrap();
        let p = probe_points(&s, &[0.0, 5.0], 100, 0).unwrap();
        assert!(p.iter().all(|&x| x <= 2.0));
        assert!(p.contains(&0.0));
        assert!(!p.contains(&5.0));
    }
}
