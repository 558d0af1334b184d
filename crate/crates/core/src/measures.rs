//! Differential entropy, Kullback-Leibler divergence, variation distance and
//! Kolmogorov distance for continuous densities. All logarithms are base 2.
//!
//! Piecewise-constant inputs are handled by exact cell sums over the merged
//! breakpoints; everything else goes through adaptive quadrature. The
//! conventions `0 log 0 = 0` and `0 log(0/0) = 0` are applied pointwise.

use serde::Serialize;

use crate::density::{merge_breakpoints, merged_cells, Density, KahanSum, Representation};
use crate::error::{Error, Result};
use crate::probe::{self, DEFAULT_PROBES};
use crate::quadrature::{self, QuadOptions, QuadratureResult};

/// Default cap on `∫|ρ log ρ|` beyond which an entropy is reported diverged.
pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e6;

/// Numerator mass below which a vanishing reference is attributed to
/// floating-point underflow rather than a domination failure.
pub const DOMINATION_MASS_FLOOR: f64 = f64::EPSILON;

/// Number of refinement points added to the Kolmogorov grid.
pub const KOLMOGOROV_GRID: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Entropy,
    Kl,
    Variation,
    Kolmogorov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Finiteness {
    Finite,
    Diverged,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureValue {
    pub quantity: Quantity,
    pub value: f64,
    pub error_estimate: f64,
    pub verdict: Finiteness,
}

impl MeasureValue {
    pub fn finite(quantity: Quantity, value: f64, error_estimate: f64) -> Self {
        Self {
            quantity,
            value,
            error_estimate,
            verdict: Finiteness::Finite,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.verdict == Finiteness::Finite
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    pub quad: QuadOptions,
    pub divergence_cap: f64,
    /// Quasi-random probes used for the numerical domination check.
    pub probes: usize,
    pub seed: u64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions::default(),
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
            probes: DEFAULT_PROBES,
            seed: 0,
        }
    }
}

impl MeasureOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            quad: QuadOptions::with_tol(tol),
            ..Self::default()
        }
    }

    pub fn tol(&self) -> f64 {
        self.quad.tol
    }
}

/// `x log2 x` with `0 log 0 = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Turns a quadrature outcome into a measure value, mapping budget failures
/// to verdicts.
fn from_quadrature(
    quantity: Quantity,
    res: Result<QuadratureResult>,
    cap: f64,
    scale: f64,
) -> Result<MeasureValue> {
    match res {
        Ok(r) => Ok(MeasureValue::finite(quantity, scale * r.value, r.error_estimate)),
        Err(Error::BudgetExceeded { estimate, error, .. }) => Ok(MeasureValue {
            quantity,
            value: scale * estimate,
            error_estimate: error,
            verdict: if estimate.abs() > cap {
                Finiteness::Diverged
            } else {
                Finiteness::BudgetExceeded
            },
        }),
        Err(e) => Err(e),
    }
}

/// Differential entropy `-∫ ρ log2 ρ dx`.
///
/// When the verdict is not finite the value is the running partial integral
/// of `|ρ log2 ρ|`, a lower bound on what failed to converge.
pub fn differential_entropy(d: &Density, opts: &MeasureOptions) -> Result<MeasureValue> {
    match d.representation() {
        Representation::PiecewiseConstant { step, .. } => {
            let mut acc = KahanSum::default();
            for (_, _, w, v) in step.cells() {
                acc.add(-xlog2x(v) * w);
            }
            Ok(MeasureValue::finite(Quantity::Entropy, acc.total(), 0.0))
        }
        Representation::RegionUniform {
            level,
            closed_form_entropy,
        } => {
            if let Some(h) = closed_form_entropy {
                return Ok(MeasureValue::finite(Quantity::Entropy, *h, 0.0));
            }
            let area = match d.support().lebesgue_measure() {
                crate::density::LebesgueMeasure::Finite(a) => a,
                crate::density::LebesgueMeasure::Infinite => f64::INFINITY,
            };
            let h = -xlog2x(*level) * area;
            Ok(MeasureValue::finite(
                Quantity::Entropy,
                h,
                level.log2().abs() * level * opts.tol(),
            ))
        }
        Representation::Analytic(a) => {
            if let Some(h) = a.closed_form_entropy() {
                return Ok(MeasureValue::finite(Quantity::Entropy, h, 0.0));
            }
            let (lo, hi) = d.support().bounds()?;
            let knots = d.knots();
            let abs = quadrature::integrate_range(
                &|x| xlog2x(d.eval(x)).abs(),
                lo,
                hi,
                &knots,
                &opts.quad,
            );
            match abs {
                Ok(r) if r.value > opts.divergence_cap => {
                    return Ok(MeasureValue {
                        quantity: Quantity::Entropy,
                        value: r.value,
                        error_estimate: r.error_estimate,
                        verdict: Finiteness::Diverged,
                    })
                }
                Ok(_) => {}
                Err(Error::BudgetExceeded { estimate, error, .. }) => {
                    return Ok(MeasureValue {
                        quantity: Quantity::Entropy,
                        value: estimate,
                        error_estimate: error,
                        verdict: if estimate > opts.divergence_cap {
                            Finiteness::Diverged
                        } else {
                            Finiteness::BudgetExceeded
                        },
                    })
                }
                Err(e) => return Err(e),
            }
            let signed = quadrature::integrate_range(
                &|x| xlog2x(d.eval(x)),
                lo,
                hi,
                &knots,
                &opts.quad,
            );
            from_quadrature(Quantity::Entropy, signed, opts.divergence_cap, -1.0)
        }
    }
}

/// Checks numerically that `num` vanishes wherever `den` does.
fn check_domination(num: &Density, den: &Density, opts: &MeasureOptions) -> Result<()> {
    if let (Some(a), Some(b)) = (num.as_step(), den.as_step()) {
        for (l, r, _, na, db) in merged_cells(a, b) {
            if na > 0.0 && db == 0.0 {
                return Err(Error::Domination(format!(
                    "numerator has mass on [{l}, {r}] where the reference vanishes"
                )));
            }
        }
        return Ok(());
    }
    let knots = merge_breakpoints(&[&num.knots(), &den.knots()]);
    let pts = probe::probe_points(num.support(), &knots, opts.probes, opts.seed)?;
    let (lo, hi) = num.support().bounds()?;
    let mut i = 0;
    while i < pts.len() {
        if !(num.eval(pts[i]) > 0.0 && den.eval(pts[i]) == 0.0) {
            i += 1;
            continue;
        }
        // the run of probes where the reference vanishes
        let mut j = i;
        while j + 1 < pts.len() && den.eval(pts[j + 1]) == 0.0 {
            j += 1;
        }
        let a = if i == 0 { lo } else { pts[i - 1] };
        let b = if j + 1 == pts.len() { hi } else { pts[j + 1] };
        let mass = match num.mass(a, b) {
            Ok(m) => m,
            Err(Error::BudgetExceeded { estimate, .. }) => estimate,
            Err(e) => return Err(e),
        };
        if mass > DOMINATION_MASS_FLOOR {
            return Err(Error::Domination(format!(
                "numerator is positive at x = {} where the reference vanishes (mass {mass:e} on [{a}, {b}])",
                pts[i]
            )));
        }
        i = j + 1;
    }
    Ok(())
}

/// Kullback-Leibler divergence `∫ num log2(num/den) dx`.
pub fn kl_divergence(num: &Density, den: &Density, opts: &MeasureOptions) -> Result<MeasureValue> {
    if num.dim() != 1 || den.dim() != 1 {
        return Err(Error::UnsupportedDimension);
    }
    check_domination(num, den, opts)?;
    if let (Some(a), Some(b)) = (num.as_step(), den.as_step()) {
        let mut acc = KahanSum::default();
        for (_, _, w, na, db) in merged_cells(a, b) {
            if na > 0.0 {
                acc.add(na * (na / db).log2() * w);
            }
        }
        return Ok(MeasureValue::finite(Quantity::Kl, acc.total(), 0.0));
    }
    let (lo, hi) = num.support().bounds()?;
    let knots = merge_breakpoints(&[&num.knots(), &den.knots()]);
    let f = |x: f64| {
        let p = num.eval(x);
        if p == 0.0 {
            return 0.0;
        }
        let q = den.eval(x);
        if q == 0.0 {
            // underflowed reference on a set the domination check found negligible
            0.0
        } else {
            p * (p / q).log2()
        }
    };
    from_quadrature(
        Quantity::Kl,
        quadrature::integrate_range(&f, lo, hi, &knots, &opts.quad),
        opts.divergence_cap,
        1.0,
    )
}

/// Distance in variation `∫ |d1 - d2| dx`, in `[0, 2]`.
pub fn variation_distance(d1: &Density, d2: &Density, opts: &MeasureOptions) -> Result<MeasureValue> {
    if d1.dim() != 1 || d2.dim() != 1 {
        return Err(Error::UnsupportedDimension);
    }
    if let (Some(a), Some(b)) = (d1.as_step(), d2.as_step()) {
        let mut acc = KahanSum::default();
        for (_, _, w, va, vb) in merged_cells(a, b) {
            acc.add((va - vb).abs() * w);
        }
        return Ok(MeasureValue::finite(Quantity::Variation, acc.total().clamp(0.0, 2.0), 0.0));
    }
    let hull = d1.support().hull(d2.support())?;
    let (lo, hi) = hull.bounds()?;
    let knots = merge_breakpoints(&[&d1.knots(), &d2.knots()]);
    let res = quadrature::integrate_range(&|x| (d1.eval(x) - d2.eval(x)).abs(), lo, hi, &knots, &opts.quad);
    let mut v = from_quadrature(Quantity::Variation, res, f64::INFINITY, 1.0)?;
    v.value = v.value.clamp(0.0, 2.0);
    Ok(v)
}

/// Kolmogorov distance `sup_x |F1(x) - F2(x)|`.
///
/// For two piecewise-constant densities the CDF gap is piecewise linear
/// between merged breakpoints, so the supremum over breakpoints is exact.
/// Otherwise a refinement grid is added and the error estimate bounds the
/// excursion inside a grid cell by the larger cell mass.
pub fn kolmogorov_distance(d1: &Density, d2: &Density, opts: &MeasureOptions) -> Result<MeasureValue> {
    if d1.dim() != 1 || d2.dim() != 1 {
        return Err(Error::UnsupportedDimension);
    }
    let mut grid = merge_breakpoints(&[&d1.knots(), &d2.knots()]);
    let both_step = d1.as_step().is_some() && d2.as_step().is_some();
    if both_step {
        let sup = grid
            .iter()
            .map(|&x| Ok((d1.cdf(x)? - d2.cdf(x)?).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        return Ok(MeasureValue::finite(Quantity::Kolmogorov, sup.min(1.0), 0.0));
    }

    let hull = d1.support().hull(d2.support())?;
    for i in 1..KOLMOGOROV_GRID {
        let u = i as f64 / KOLMOGOROV_GRID as f64;
        grid.push(probe::map_unit(&hull, u)?);
    }
    grid.retain(|x| x.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let cell_opts = QuadOptions {
        tol: (opts.tol() / grid.len().max(1) as f64).max(1e-15),
        max_subdivisions: opts.quad.max_subdivisions,
    };
    let cdfs = |d: &Density| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        // CDF at each grid point and the mass of each grid cell
        let mut f = Vec::with_capacity(grid.len());
        let mut cell = Vec::with_capacity(grid.len());
        let mut err = 0.0;
        if d.as_step().is_some() || d.as_analytic().is_some_and(|a| a.has_cdf()) {
            for &x in &grid {
                f.push(d.cdf(x)?);
            }
        } else {
            let (lo, _) = d.support().bounds()?;
            let mut acc = KahanSum::default();
            let mut prev = lo;
            for &x in &grid {
                if x > prev {
                    let r = quadrature::integrate_range(&|t| d.eval(t), prev, x, &[], &cell_opts)?;
                    acc.add(r.value);
                    err += r.error_estimate;
                    prev = x;
                }
                f.push(acc.total().clamp(0.0, 1.0));
            }
        }
        cell.push(f[0]);
        for w in f.windows(2) {
            cell.push(w[1] - w[0]);
        }
        cell.push(1.0 - f[f.len() - 1]);
        Ok((f, cell, err))
    };
    let (f1, c1, e1) = cdfs(d1)?;
    let (f2, c2, e2) = cdfs(d2)?;
    let sup = f1
        .iter()
        .zip(&f2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let within = c1
        .iter()
        .zip(&c2)
        .map(|(a, b)| a.abs().max(b.abs()))
        .fold(0.0, f64::max);
    Ok(MeasureValue::finite(
        Quantity::Kolmogorov,
        sup.min(1.0),
        within + e1 + e2,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinskerCheck {
    pub variation: f64,
    pub kl: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares the variation distance with `sqrt(2 kl)` (kl in bits).
pub fn pinsker_check(d1: &Density, d2: &Density, opts: &MeasureOptions) -> Result<PinskerCheck> {
    let v = variation_distance(d1, d2, opts)?;
    let k = kl_divergence(d1, d2, opts)?;
    Ok(pinsker_from(v, k))
}

pub(crate) fn pinsker_from(v: MeasureValue, k: MeasureValue) -> PinskerCheck {
    let bound = (2.0 * k.value.max(0.0)).sqrt();
    let slack = v.error_estimate + (2.0 * (k.value + k.error_estimate).max(0.0)).sqrt() - bound;
    let holds = !k.is_finite() || v.value <= bound + slack;
    PinskerCheck {
        variation: v.value,
        kl: k.value,
        bound,
        holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Direction, SupportSpec};
    use crate::scenarios::{build_counterexample, build_nnfs_region};
    use std::sync::Arc;

    fn opts() -> MeasureOptions {
        MeasureOptions::default()
    }

    fn two_cell(a: f64, b: f64) -> Density {
        Density::piecewise_constant(vec![0.0, 0.5, 1.0], vec![a, b]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        assert_eq!(differential_entropy(&u, &opts()).unwrap().value, 0.0);
        let p4 = build_counterexample(4).unwrap();
        let h = differential_entropy(&p4, &opts()).unwrap().value;
        assert!((h + 4.0).abs() < 1e-12, "{h}");
        let r = build_nnfs_region(2.0).unwrap();
        assert!((differential_entropy(&r, &opts()).unwrap().value + 1.0).abs() < 1e-12);
        let u2 = Density::uniform(0.0, 2.0).unwrap();
        assert_eq!(differential_entropy(&u2, &opts()).unwrap().value, 1.0);
    }

    #[test]
    fn entropy_of_analytic_density_by_quadrature() {
        // exponential with rate 1: h = log2(e) bits
        let s = SupportSpec::half_line(0.0, Direction::Up).unwrap();
        let d = Density::analytic(s, Arc::new(|x: f64| (-x).exp())).build().unwrap();
        let h = differential_entropy(&d, &opts()).unwrap();
        assert!(h.is_finite());
        assert!((h.value - std::f64::consts::LOG2_E).abs() < 1e-8, "{h:?}");
    }

    #[test]
    fn kl_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        let p3 = build_counterexample(3).unwrap();
        let k = kl_divergence(&p3, &u, &opts()).unwrap().value;
        assert!((k - 2.0 * 3f64.log2()).abs() < 1e-12);
        assert!((k - 3.169925).abs() < 1e-6);
        assert_eq!(kl_divergence(&p3, &p3, &opts()).unwrap().value, 0.0);
        let q = two_cell(1.5, 0.5);
        let expected = 0.75 * 1.5f64.log2() + 0.25 * 0.5f64.log2();
        let k = kl_divergence(&q, &u, &opts()).unwrap().value;
        assert!((k - expected).abs() < 1e-15);
        assert!((k - 0.188722).abs() < 1e-6);
    }

    #[test]
    fn kl_rejects_undominated_numerator() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        let p2 = build_counterexample(2).unwrap();
        assert!(matches!(kl_divergence(&u, &p2, &opts()), Err(Error::Domination(_))));
        let wide = Density::uniform(0.0, 2.0).unwrap();
        assert!(matches!(kl_divergence(&wide, &u, &opts()), Err(Error::Domination(_))));
    }

    #[test]
    fn kl_between_analytic_densities() {
        // Exp(1) vs Exp(2): ln(1/2) + 2 - 1 = 1 - ln 2 nats
        let s = SupportSpec::half_line(0.0, Direction::Up).unwrap();
        let e1 = Density::analytic(s.clone(), Arc::new(|x: f64| (-x).exp())).build().unwrap();
        let e2 = Density::analytic(s, Arc::new(|x: f64| 2.0 * (-2.0 * x).exp())).build().unwrap();
        let k = kl_divergence(&e1, &e2, &opts()).unwrap();
        let expected = (1.0 - 2f64.ln()) / 2f64.ln();
        assert!((k.value - expected).abs() < 1e-8, "{k:?}");
    }

    #[test]
    fn variation_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        let p2 = build_counterexample(2).unwrap();
        let v = variation_distance(&p2, &u, &opts()).unwrap().value;
        assert!((v - 1.5).abs() < 1e-12);
        assert_eq!(variation_distance(&u, &u, &opts()).unwrap().value, 0.0);
        let u2 = Density::uniform(0.0, 2.0).unwrap();
        assert!((variation_distance(&u, &u2, &opts()).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        let p2 = build_counterexample(2).unwrap();
        let k = kolmogorov_distance(&p2, &u, &opts()).unwrap().value;
        assert!(k <= 0.375 + 1e-15, "{k}");
        assert!((k - 0.375).abs() < 1e-15);
        assert_eq!(kolmogorov_distance(&u, &u, &opts()).unwrap().value, 0.0);
        let u2 = Density::uniform(0.0, 2.0).unwrap();
        assert_eq!(kolmogorov_distance(&u, &u2, &opts()).unwrap().value, 0.5);
        let r = build_nnfs_region(1.0).unwrap();
        assert_eq!(kolmogorov_distance(&r, &u, &opts()), Err(Error::UnsupportedDimension));
    }

    #[test]
    fn kolmogorov_with_analytic_density() {
        // Exp(1) vs Exp(2): F2 - F1 = e^-x - e^-2x, maximal at x = ln 2 with value 1/4
        let s = SupportSpec::half_line(0.0, Direction::Up).unwrap();
        let e1 = Density::analytic(s.clone(), Arc::new(|x: f64| (-x).exp())).build().unwrap();
        let e2 = Density::analytic(s, Arc::new(|x: f64| 2.0 * (-2.0 * x).exp())).build().unwrap();
        let k = kolmogorov_distance(&e1, &e2, &opts()).unwrap();
        assert!((k.value - 0.25).abs() <= k.error_estimate + 1e-9, "{k:?}");
        assert!(k.value <= 0.25 + 1e-9);
    }

    #[test]
    fn pinsker_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        let p2 = build_counterexample(2).unwrap();
        let c = pinsker_check(&p2, &u, &opts()).unwrap();
        assert!((c.variation - 1.5).abs() < 1e-12);
        assert!((c.bound - 2.0).abs() < 1e-12);
        assert!(c.holds);
        let c = pinsker_check(&u, &u, &opts()).unwrap();
        assert_eq!((c.variation, c.bound), (0.0, 0.0));
        assert!(c.holds);
        let c = pinsker_check(&two_cell(1.5, 0.5), &u, &opts()).unwrap();
        assert!((c.variation - 0.5).abs() < 1e-15);
        assert!((c.bound - 0.614).abs() < 1e-3);
        assert!(c.holds);
    }
}
