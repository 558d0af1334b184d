//! Adaptive Gauss-Kronrod quadrature over bounded and unbounded intervals.
//!
//! The engine is a global adaptive scheme: the interval with the largest
//! error estimate is bisected until the summed estimate drops below the
//! requested absolute tolerance. Each interval is evaluated with the 15-point
//! Kronrod rule and its error estimated against the embedded 7-point Gauss
//! rule. Half-lines are mapped onto `[0, 1)` by `x = a + t / (1 - t)` and the
//! whole line onto `(-1, 1)` by `x = t / (1 - t^2)`.
//!
//! Initial cells are seeded at the supplied knots (density breakpoints), so
//! integrands that are smooth between knots converge quickly and
//! piecewise-constant integrands are integrated without bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::density::{merged_cells, Density, KahanSum, Representation, StepFunction, SupportSpec};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 1_000_000;

// Kronrod nodes and weights at their published precision
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
    pub exact: bool,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            subdivisions: 0,
            exact: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute tolerance on the summed error estimate.
    pub tol: f64,
    /// Cap on the number of bisections.
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Scalar integrand: an arbitrary function or a step function.
#[derive(Clone, Copy)]
pub enum Integrand<'a> {
    Function(&'a (dyn Fn(f64) -> f64 + 'a)),
    Step(&'a StepFunction),
}

impl Integrand<'_> {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Integrand::Function(f) => f(x),
            Integrand::Step(s) => s.eval(x),
        }
    }
}

#[derive(Clone, Copy)]
enum Map {
    Identity,
    /// `x = a + t / (1 - t)`
    Up(f64),
    /// `x = b - t / (1 - t)`
    Down(f64),
    /// `x = t / (1 - t^2)`
    Line,
}

impl Map {
    fn for_range(lo: f64, hi: f64) -> (Self, f64, f64) {
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (Map::Identity, lo, hi),
            (true, false) => (Map::Up(lo), 0.0, 1.0),
            (false, true) => (Map::Down(hi), 0.0, 1.0),
            (false, false) => (Map::Line, -1.0, 1.0),
        }
    }

    /// Returns `(x, dx/dt)`.
    #[inline]
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Map::Identity => (t, 1.0),
            Map::Up(a) => {
                let s = 1.0 - t;
                (a + t / s, 1.0 / (s * s))
            }
            Map::Down(b) => {
                let s = 1.0 - t;
                (b - t / s, 1.0 / (s * s))
            }
            Map::Line => {
                let s = 1.0 - t * t;
                (t / s, (1.0 + t * t) / (s * s))
            }
        }
    }

    fn invert(self, x: f64) -> f64 {
        match self {
            Map::Identity => x,
            Map::Up(a) => (x - a) / (1.0 + (x - a)),
            Map::Down(b) => (b - x) / (1.0 + (b - x)),
            Map::Line => {
                if x == 0.0 {
                    0.0
                } else {
                    (-1.0 + (1.0 + 4.0 * x * x).sqrt()) / (2.0 * x)
                }
            }
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c);
    if !fc.is_finite() {
        return Err(Error::NonFinite(c));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (x1, x2) = (c - dx, c + dx);
        let f1 = g(x1);
        let f2 = g(x2);
        if !f1.is_finite() {
            return Err(Error::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(Error::NonFinite(x2));
        }
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * h.abs();
    let error = ((kronrod - gauss) * h).abs().max(roundoff);
    Ok((value, error))
}

/// Integrates `f` over `[lo, hi]` (either end may be infinite), seeding the
/// initial subdivision at `knots`.
pub fn integrate_range(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    knots: &[f64],
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::Argument("integration bounds are NaN".into()));
    }
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if lo >= hi {
        return Ok(QuadratureResult::exact(0.0));
    }
    let (map, ta, tb) = Map::for_range(lo, hi);
    let g = |t: f64| {
        let (x, jac) = map.apply(t);
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };

    let mut cuts: Vec<f64> = knots
        .iter()
        .copied()
        .filter(|k| k.is_finite() && *k > lo && *k < hi)
        .map(|k| map.invert(k))
        .filter(|t| *t > ta && *t < tb)
        .collect();
    cuts.push(ta);
    cuts.push(tb);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::with_capacity(cuts.len() * 2);
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        let (value, error) = gauss_kronrod(&g, w[0], w[1])?;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let mut frozen: Vec<Segment> = Vec::new();
    let mut frozen_err = 0.0;
    let mut subdivisions = 0usize;
    loop {
        if total_err <= opts.tol {
            // the running sum drifts; confirm before stopping
            let (_, e) = finish_ref(&heap, &frozen);
            total_err = e;
            if e <= opts.tol {
                break;
            }
        }
        let Some(worst) = heap.pop() else {
            let (value, error) = finish_ref(&heap, &frozen);
            return Err(Error::BudgetExceeded {
                estimate: value,
                error,
                subdivisions,
            });
        };
        if subdivisions >= opts.max_subdivisions {
            heap.push(worst);
            let (value, error) = finish_ref(&heap, &frozen);
            return Err(Error::BudgetExceeded {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            frozen_err += worst.error;
            frozen.push(worst);
            if frozen_err > opts.tol {
                // no further subdivision can reduce this part of the error
                let (value, error) = finish_ref(&heap, &frozen);
                return Err(Error::BudgetExceeded {
                    estimate: value,
                    error,
                    subdivisions,
                });
            }
            continue;
        }
        let (v1, e1) = gauss_kronrod(&g, worst.a, mid)?;
        let (v2, e2) = gauss_kronrod(&g, mid, worst.b)?;
        total_err += e1 + e2 - worst.error;
        subdivisions += 1;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    let (value, error_estimate) = finish_ref(&heap, &frozen);
    Ok(QuadratureResult {
        value,
        error_estimate,
        subdivisions,
        exact: false,
    })
}

fn finish_ref(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> (f64, f64) {
    let mut v = KahanSum::default();
    let mut e = KahanSum::default();
    for s in heap.iter().chain(frozen.iter()) {
        v.add(s.value);
        e.add(s.error);
    }
    (v.total(), e.total())
}

/// Integral of `f` against Lebesgue measure over a one-dimensional support.
pub fn integrate_lebesgue(
    f: Integrand<'_>,
    support: &SupportSpec,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let (lo, hi) = support.bounds()?;
    match f {
        Integrand::Step(s) => Ok(QuadratureResult::exact(s.integral(lo, hi))),
        Integrand::Function(g) => integrate_range(g, lo, hi, &[], opts),
    }
}

/// Integral of `f` against the probability measure with density `d`.
///
/// Points where the density vanishes contribute zero, whatever `f` is there.
pub fn integrate_against(
    f: Integrand<'_>,
    d: &Density,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    match (d.representation(), f) {
        (Representation::RegionUniform { .. }, _) => Err(Error::UnsupportedDimension),
        (Representation::PiecewiseConstant { step, .. }, Integrand::Step(g)) => {
            let mut acc = KahanSum::default();
            for (_, _, w, dv, gv) in merged_cells(step, g) {
                if dv != 0.0 {
                    acc.add(gv * dv * w);
                }
            }
            Ok(QuadratureResult::exact(acc.total()))
        }
        (Representation::PiecewiseConstant { step, .. }, Integrand::Function(g)) => {
            // cell by cell so that the density is constant under each rule
            let mut value = KahanSum::default();
            let mut error = 0.0;
            let mut subdivisions = 0;
            let n_active = step.values().iter().filter(|&&v| v != 0.0).count().max(1);
            let cell_opts = QuadOptions {
                tol: opts.tol / n_active as f64,
                max_subdivisions: opts.max_subdivisions,
            };
            for (l, r, _, v) in step.cells() {
                if v == 0.0 {
                    continue;
                }
                let res = integrate_range(&|x| g(x) * v, l, r, &[], &cell_opts)?;
                value.add(res.value);
                error += res.error_estimate;
                subdivisions += res.subdivisions;
            }
            Ok(QuadratureResult {
                value: value.total(),
                error_estimate: error,
                subdivisions,
                exact: false,
            })
        }
        (Representation::Analytic(_), _) => {
            let (lo, hi) = d.support().bounds()?;
            let mut knots = d.knots();
            if let Integrand::Step(s) = f {
                knots.extend_from_slice(s.breakpoints());
            }
            let h = |x: f64| {
                let w = d.eval(x);
                if w == 0.0 {
                    0.0
                } else {
                    f.eval(x) * w
                }
            };
            integrate_range(&h, lo, hi, &knots, opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Direction;
    use crate::scenarios::build_counterexample;
    use std::f64::consts::LN_2;

    #[test]
    fn constant_on_unit_interval() {
        let s = SupportSpec::interval(0.0, 1.0).unwrap();
        let one = StepFunction::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        let r = integrate_lebesgue(Integrand::Step(&one), &s, &QuadOptions::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.exact);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn exponential_on_half_line() {
        let s = SupportSpec::half_line(0.0, Direction::Up).unwrap();
        let f = |x: f64| 2f64.powf(-x) * LN_2;
        let r = integrate_lebesgue(Integrand::Function(&f), &s, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-9, "{r:?}");
        assert!(r.error_estimate <= 1e-9);
    }

    #[test]
    fn counterexample_density_integrates_exactly() {
        let p3 = build_counterexample(3).unwrap();
        let s = SupportSpec::interval(0.0, 1.0).unwrap();
        let r = integrate_lebesgue(Integrand::Step(p3.as_step().unwrap()), &s, &QuadOptions::default())
            .unwrap();
        assert!(r.exact);
        // 3 cells of area 9 / 27
        assert!((r.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn against_examples() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        let one = |_: f64| 1.0;
        let r = integrate_against(Integrand::Function(&one), &u, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);

        let id = |x: f64| x;
        let r = integrate_against(Integrand::Function(&id), &u, &QuadOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);

        let p2 = build_counterexample(2).unwrap();
        let logp = |x: f64| p2.eval(x).log2();
        let r = integrate_against(Integrand::Function(&logp), &p2, &QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn step_against_step_is_exact() {
        let p2 = build_counterexample(2).unwrap();
        let g = StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, 3.0]).unwrap();
        let r = integrate_against(Integrand::Step(&g), &p2, &QuadOptions::default()).unwrap();
        assert!(r.exact);
        assert!((r.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn whole_line_gaussian() {
        let f = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let r = integrate_range(&f, f64::NEG_INFINITY, f64::INFINITY, &[], &QuadOptions::default())
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        let r = integrate_range(&f, f64::NEG_INFINITY, 0.0, &[], &QuadOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn divergent_integral_exceeds_budget() {
        // 1/(x ln x) on [e, inf) diverges like ln ln x
        let f = |x: f64| 1.0 / (x * x.ln());
        let r = integrate_range(
            &f,
            std::f64::consts::E,
            f64::INFINITY,
            &[],
            &QuadOptions {
                tol: 1e-9,
                max_subdivisions: 20_000,
            },
        );
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })), "{r:?}");
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let f = |x: f64| if x > 0.5 { f64::INFINITY } else { 1.0 };
        let r = integrate_range(&f, 0.0, 1.0, &[], &QuadOptions::default());
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let f = |x: f64| x;
        assert!(integrate_range(&f, 0.0, 1.0, &[], &QuadOptions::with_tol(0.0)).is_err());
    }
}
