//! Built-in density and PMF families with closed forms attached.

use std::sync::Arc;

use serde::Serialize;

use crate::certifier::{DeclaredBounds, FamilySpec};
use crate::density::{Density, Direction, PlaneRegion, SupportSpec};
use crate::discrete::{self, DiscreteFamily, DiscretePmf, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::measures::{
    differential_entropy, kl_divergence, kolmogorov_distance, variation_distance, MeasureOptions,
    Quantity,
};

/// Largest counterexample index; keeps `n^3` and `1/n^3` well inside `f64`.
pub const MAX_COUNTEREXAMPLE_N: u64 = 100_000;

/// Spikes of height `n^2` and width `1/n^3` at `k/n`, `k = 0..n`.
///
/// Cells are closed on the left; endpoints carry no mass.
pub fn build_counterexample(n: u64) -> Result<Density> {
    if n == 0 || n > MAX_COUNTEREXAMPLE_N {
        return Err(Error::Argument(format!(
            "counterexample index must lie in 1..={MAX_COUNTEREXAMPLE_N}, got {n}"
        )));
    }
    if n == 1 {
        return Density::uniform(0.0, 1.0);
    }
    let nf = n as f64;
    let spike = (nf * nf * nf).recip();
    let gap = nf.recip() - spike;
    let height = nf * nf;
    let cells = 2 * n as usize;
    let mut breakpoints = Vec::with_capacity(cells + 1);
    let mut widths = Vec::with_capacity(cells);
    let mut values = Vec::with_capacity(cells);
    for k in 0..n {
        let left = k as f64 / nf;
        breakpoints.push(left);
        breakpoints.push(left + spike);
        widths.extend([spike, gap]);
        values.extend([height, 0.0]);
    }
    breakpoints.push(1.0);
    Density::piecewise_constant_with_widths(breakpoints, widths, values)
}

/// `1 + 1/(2n)` on `[0, 1/2]` and `1 - 1/(2n)` on `[1/2, 1]`.
pub fn build_two_cell_family(n: u64) -> Result<Density> {
    if n == 0 {
        return Err(Error::Argument("two-cell index must be at least 1".into()));
    }
    let d = 0.5 / n as f64;
    Density::piecewise_constant(vec![0.0, 0.5, 1.0], vec![1.0 + d, 1.0 - d])
}

/// Uniform density of level `lambda` on `{x1 >= 0, 0 <= x2 <= exp(-lambda x1)}`.
pub fn build_nnfs_region(lambda: f64) -> Result<Density> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Argument(format!("region level must be positive, got {lambda}")));
    }
    let region = PlaneRegion::new(0.0, f64::INFINITY, Arc::new(move |x: f64| (-lambda * x).exp()))?;
    Ok(Density::region_uniform(region, lambda)?.with_region_entropy(-lambda.log2()))
}

/// `1 / (x ln^2 x)` on `[e, inf)`: a density whose entropy integral diverges.
pub fn build_heavy_tail() -> Result<Density> {
    let e = std::f64::consts::E;
    let s = SupportSpec::half_line(e, Direction::Up)?;
    Density::analytic(
        s,
        Arc::new(move |x: f64| {
            if x < e {
                0.0
            } else {
                let l = x.ln();
                1.0 / (x * l * l)
            }
        }),
    )
    .cdf(Arc::new(move |x: f64| if x <= e { 0.0 } else { 1.0 - 1.0 / x.ln() }))
    .strictly_positive(true)
    .build()
}

pub fn counterexample_family() -> FamilySpec {
    FamilySpec::new("counterexample", Density::uniform(0.0, 1.0).unwrap(), build_counterexample)
        .with_declared(DeclaredBounds {
            // p_n vanishes on most of [0, 1] for n >= 2 and peaks at n^2
            member_log_sup: Some(f64::INFINITY),
            limit_log_sup: Some(0.0),
            ratio_sup: Some(f64::INFINITY),
            log_derivative_bound: Some(0.0),
        })
}

pub fn two_cell_family() -> FamilySpec {
    FamilySpec::new("two-cell", Density::uniform(0.0, 1.0).unwrap(), build_two_cell_family)
        .with_declared(DeclaredBounds {
            // |log2 0.5| at n = 1 dominates every other cell value
            member_log_sup: Some(1.0),
            limit_log_sup: Some(0.0),
            ratio_sup: Some(1.5),
            log_derivative_bound: Some(0.0),
        })
}

pub fn constant_family() -> FamilySpec {
    FamilySpec::constant("constant", Density::uniform(0.0, 1.0).unwrap())
}

pub fn heavy_tail_family() -> Result<FamilySpec> {
    Ok(FamilySpec::constant("heavy-tail", build_heavy_tail()?))
}

/// Regions of level `n` converging to level 1; only entropy is defined in 2-D.
pub fn nnfs_family() -> Result<FamilySpec> {
    Ok(FamilySpec::new("nnfs-region", build_nnfs_region(1.0)?, |n| build_nnfs_region(n as f64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteParams {
    /// Limit parameter: success probability of the Bernoulli or geometric limit.
    pub p: f64,
    /// Alphabet size of the finite uniform family.
    pub symbols: usize,
}

impl Default for DiscreteParams {
    fn default() -> Self {
        Self { p: 0.5, symbols: 4 }
    }
}

pub const DISCRETE_FAMILIES: &[&str] = &["bernoulli-drift", "geometric-drift", "finite-uniform-drift"];

fn binary_entropy(p: f64) -> f64 {
    -(discrete_xlog(p) + discrete_xlog(1.0 - p))
}

fn discrete_xlog(x: f64) -> f64 {
    crate::measures::xlog2x(x)
}

/// Discrete drift families converging to a Bernoulli, geometric or uniform limit.
pub fn build_discrete_families(name: &str, params: DiscreteParams) -> Result<DiscreteFamily> {
    let p = params.p;
    let drift_ok = |d: f64| p - d > 0.0 && p + d < 1.0;
    match name {
        "bernoulli-drift" => {
            if !drift_ok(0.25) {
                return Err(Error::Argument(format!("bernoulli-drift needs p ± 1/4 in (0, 1), got p = {p}")));
            }
            Ok(DiscreteFamily::new(name, DiscretePmf::bernoulli(p)?, move |n| {
                DiscretePmf::bernoulli(p + 0.25 / n as f64)
            })
            .with_limit_entropy(binary_entropy(p)))
        }
        "geometric-drift" => {
            if !drift_ok(0.25) {
                return Err(Error::Argument(format!("geometric-drift needs p ± 1/4 in (0, 1), got p = {p}")));
            }
            Ok(DiscreteFamily::new(name, DiscretePmf::geometric(p)?, move |n| {
                DiscretePmf::geometric(p + 0.25 / n as f64)
            })
            .with_worst_index(1)
            .with_limit_entropy(binary_entropy(p) / p))
        }
        "finite-uniform-drift" => {
            let k = params.symbols;
            if k < 2 {
                return Err(Error::Argument("finite-uniform-drift needs at least 2 symbols".into()));
            }
            let base = 1.0 / k as f64;
            Ok(DiscreteFamily::new(name, DiscretePmf::finite(vec![base; k])?, move |n| {
                let d = 0.5 * base / n as f64;
                let mut v = vec![base; k];
                v[0] += d;
                v[1] -= d;
                DiscretePmf::finite(v)
            })
            .with_limit_entropy((k as f64).log2()))
        }
        other => Err(Error::Config(format!(
            "unknown discrete family '{other}'; available: {}",
            DISCRETE_FAMILIES.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    AtMost,
}

/// A closed form for one quantity of member `n` (against the limit).
#[derive(Debug, Clone, Copy)]
pub struct Golden {
    pub quantity: Quantity,
    pub relation: Relation,
    pub formula: fn(u64) -> f64,
    pub min_n: u64,
}

impl Golden {
    const fn equal(quantity: Quantity, formula: fn(u64) -> f64) -> Self {
        Self {
            quantity,
            relation: Relation::Equal,
            formula,
            min_n: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ScenarioFamily {
    Continuous(FamilySpec),
    Discrete(DiscreteFamily),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub family: ScenarioFamily,
    pub golden: Vec<Golden>,
    /// Absolute tolerance for the golden comparisons.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCheck {
    pub scenario: String,
    pub n: u64,
    pub quantity: Quantity,
    pub relation: Relation,
    pub expected: f64,
    pub computed: f64,
    pub passed: bool,
}

pub const SCENARIO_NAMES: &[&str] = &[
    "counterexample",
    "two-cell",
    "constant",
    "heavy-tail",
    "nnfs-region",
    "bernoulli-drift",
    "geometric-drift",
    "finite-uniform-drift",
];

/// n values checked against the golden map when a scenario is built.
pub const VALIDATION_NS: &[u64] = &[1, 2, 3];

fn lg(n: u64) -> f64 {
    (n as f64).log2()
}

fn two_cell_parts(n: u64) -> (f64, f64) {
    let d = 0.5 / n as f64;
    (1.0 + d, 1.0 - d)
}

fn counterexample_golden() -> Vec<Golden> {
    vec![
        Golden::equal(Quantity::Entropy, |n| -2.0 * lg(n)),
        Golden::equal(Quantity::Kl, |n| 2.0 * lg(n)),
        Golden::equal(Quantity::Variation, |n| {
            let n2 = (n * n) as f64;
            2.0 * (1.0 - 1.0 / n2)
        }),
        Golden {
            quantity: Quantity::Kolmogorov,
            relation: Relation::AtMost,
            formula: |n| {
                let nf = n as f64;
                (1.0 - 1.0 / (nf * nf)) / nf
            },
            min_n: 1,
        },
    ]
}

fn two_cell_golden() -> Vec<Golden> {
    vec![
        Golden::equal(Quantity::Entropy, |n| {
            let (a, b) = two_cell_parts(n);
            -0.5 * (discrete_xlog(a) + discrete_xlog(b))
        }),
        Golden::equal(Quantity::Kl, |n| {
            let (a, b) = two_cell_parts(n);
            0.5 * (discrete_xlog(a) + discrete_xlog(b))
        }),
        Golden::equal(Quantity::Variation, |n| 0.5 / n as f64),
        Golden::equal(Quantity::Kolmogorov, |n| 0.25 / n as f64),
    ]
}

fn zero_golden() -> Vec<Golden> {
    [Quantity::Entropy, Quantity::Kl, Quantity::Variation, Quantity::Kolmogorov]
        .into_iter()
        .map(|q| Golden::equal(q, |_| 0.0))
        .collect()
}

/// Builds a registered scenario and validates its closed forms.
pub fn scenario(name: &str) -> Result<Scenario> {
    let params = DiscreteParams::default();
    let s = match name {
        "counterexample" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Continuous(counterexample_family()),
            golden: counterexample_golden(),
            tolerance: 1e-12,
        },
        "two-cell" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Continuous(two_cell_family()),
            golden: two_cell_golden(),
            tolerance: 1e-12,
        },
        "constant" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Continuous(constant_family()),
            golden: zero_golden(),
            tolerance: 0.0,
        },
        "heavy-tail" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Continuous(heavy_tail_family()?),
            golden: Vec::new(),
            tolerance: 0.0,
        },
        "nnfs-region" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Continuous(nnfs_family()?),
            golden: vec![Golden::equal(Quantity::Entropy, |n| -lg(n))],
            tolerance: 1e-12,
        },
        "bernoulli-drift" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Discrete(build_discrete_families(name, params)?),
            golden: vec![
                Golden::equal(Quantity::Entropy, |n| binary_entropy(0.5 + 0.25 / n as f64)),
                Golden::equal(Quantity::Variation, |n| 0.5 / n as f64),
                Golden::equal(Quantity::Kolmogorov, |n| 0.25 / n as f64),
            ],
            tolerance: 1e-12,
        },
        "geometric-drift" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Discrete(build_discrete_families(name, params)?),
            golden: vec![Golden::equal(Quantity::Entropy, |n| {
                let q = 0.5 + 0.25 / n as f64;
                binary_entropy(q) / q
            })],
            tolerance: 1e-10,
        },
        "finite-uniform-drift" => Scenario {
            name: name.into(),
            family: ScenarioFamily::Discrete(build_discrete_families(name, params)?),
            golden: vec![Golden::equal(Quantity::Variation, |n| 0.25 / n as f64)],
            tolerance: 1e-12,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown scenario '{other}'; available: {}",
                SCENARIO_NAMES.join(", ")
            )))
        }
    };
    let failed: Vec<GoldenCheck> = s
        .check_golden(VALIDATION_NS)?
        .into_iter()
        .filter(|c| !c.passed)
        .collect();
    if let Some(c) = failed.first() {
        return Err(Error::Config(format!(
            "scenario '{}' disagrees with its closed form for {:?} at n = {}: {} vs {}",
            c.scenario, c.quantity, c.n, c.computed, c.expected
        )));
    }
    Ok(s)
}

impl Scenario {
    /// Continuous scenario with every member equal to `density`, compared
    /// against `reference`.
    pub fn inline_continuous(density: Density, reference: Density) -> Self {
        Self {
            name: "inline".into(),
            family: ScenarioFamily::Continuous(FamilySpec::new("inline", reference, move |_| Ok(density.clone()))),
            golden: Vec::new(),
            tolerance: 0.0,
        }
    }

    pub fn inline_discrete(pmf: DiscretePmf, reference: DiscretePmf) -> Self {
        Self {
            name: "inline".into(),
            family: ScenarioFamily::Discrete(DiscreteFamily::new("inline", reference, move |_| Ok(pmf.clone()))),
            golden: Vec::new(),
            tolerance: 0.0,
        }
    }

    /// Computes one quantity for member `n` against the limit.
    pub fn compute(&self, quantity: Quantity, n: u64, opts: &MeasureOptions) -> Result<crate::measures::MeasureValue> {
        match &self.family {
            ScenarioFamily::Continuous(f) => {
                let m = f.member(n)?;
                match quantity {
                    Quantity::Entropy => differential_entropy(&m, opts),
                    Quantity::Kl => kl_divergence(&m, &f.limit, opts),
                    Quantity::Variation => variation_distance(&m, &f.limit, opts),
                    Quantity::Kolmogorov => kolmogorov_distance(&m, &f.limit, opts),
                }
            }
            ScenarioFamily::Discrete(f) => {
                let m = f.member(n)?;
                let eps = DEFAULT_EPS;
                match quantity {
                    Quantity::Entropy => discrete::discrete_entropy(&m, eps),
                    Quantity::Kl => discrete::discrete_kl(&m, &f.limit, eps),
                    Quantity::Variation => discrete::discrete_variation(&m, &f.limit, eps),
                    Quantity::Kolmogorov => discrete::discrete_kolmogorov(&m, &f.limit, eps),
                }
            }
        }
    }

    /// Compares every closed form with the computed value at each n.
    pub fn check_golden(&self, ns: &[u64]) -> Result<Vec<GoldenCheck>> {
        let opts = MeasureOptions::default();
        let mut out = Vec::new();
        for g in &self.golden {
            for &n in ns.iter().filter(|&&n| n >= g.min_n) {
                let expected = (g.formula)(n);
                let computed = self.compute(g.quantity, n, &opts)?.value;
                let passed = match g.relation {
                    Relation::Equal => (computed - expected).abs() <= self.tolerance,
                    // exact attainment is allowed up to the rounding of the bound itself
                    Relation::AtMost => computed <= expected + 4.0 * f64::EPSILON * expected.abs(),
                };
                out.push(GoldenCheck {
                    scenario: self.name.clone(),
                    n,
                    quantity: g.quantity,
                    relation: g.relation,
                    expected,
                    computed,
                    passed,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn line(name: &str, passed: bool, detail: impl Into<String>) -> SelfTestLine {
    SelfTestLine {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

/// The golden suite: every registered closed form plus the discrete anchors.
pub fn selftest() -> Vec<SelfTestLine> {
    let mut out = Vec::new();
    let ns: &[(&str, &[u64])] = &[
        ("counterexample", &[1, 2, 3, 4, 8, 16, 32]),
        ("two-cell", &[1, 2, 4, 8, 16, 32, 64]),
        ("constant", &[1, 5]),
        ("nnfs-region", &[1, 2, 4]),
        ("bernoulli-drift", &[1, 10, 1000]),
        ("geometric-drift", &[1, 10, 1000]),
        ("finite-uniform-drift", &[1, 10, 1000]),
    ];
    for (name, list) in ns {
        match scenario(name).and_then(|s| s.check_golden(list)) {
            Ok(checks) => {
                let bad: Vec<&GoldenCheck> = checks.iter().filter(|c| !c.passed).collect();
                let detail = match bad.first() {
                    None => format!("{} closed-form comparisons", checks.len()),
                    Some(c) => format!("{:?} at n = {}: {} vs {}", c.quantity, c.n, c.computed, c.expected),
                };
                out.push(line(&format!("golden/{name}"), bad.is_empty(), detail));
            }
            Err(e) => out.push(line(&format!("golden/{name}"), false, e.to_string())),
        }
    }
    out.push(match scenario("heavy-tail").and_then(|s| s.compute(Quantity::Entropy, 1, &MeasureOptions::default())) {
        Ok(v) => line("heavy-tail/entropy-not-finite", !v.is_finite(), format!("{:?}", v.verdict)),
        Err(e) => line("heavy-tail/entropy-not-finite", false, e.to_string()),
    });
    for (lambda, h) in [(1.0, 0.0), (2.0, -1.0), (0.5, 1.0)] {
        let r = build_nnfs_region(lambda).and_then(|d| differential_entropy(&d, &MeasureOptions::default()));
        let name = format!("nnfs-region/lambda={lambda}");
        out.push(match r {
            Ok(v) => line(&name, (v.value - h).abs() <= 1e-12, format!("{}", v.value)),
            Err(e) => line(&name, false, e.to_string()),
        });
    }
    let geo = DiscretePmf::geometric(0.5).and_then(|g| discrete::discrete_entropy(&g, DEFAULT_EPS));
    out.push(match geo {
        Ok(v) => line("discrete/geometric-entropy", (v.value - 2.0).abs() <= 1e-10, format!("{}", v.value)),
        Err(e) => line("discrete/geometric-entropy", false, e.to_string()),
    });
    let kl = DiscretePmf::bernoulli(0.5)
        .and_then(|a| DiscretePmf::bernoulli(0.25).and_then(|b| discrete::discrete_kl(&a, &b, DEFAULT_EPS)));
    let expected = 0.5 + 0.5 * (2.0f64 / 3.0).log2();
    out.push(match kl {
        Ok(v) => line("discrete/bernoulli-kl", (v.value - expected).abs() <= 1e-12, format!("{}", v.value)),
        Err(e) => line("discrete/bernoulli-kl", false, e.to_string()),
    });
    out.extend(certificate_lines());
    out
}

/// Default n-list for continuous certificates: powers of two up to 1024.
pub fn default_continuous_ns() -> Vec<u64> {
    (0..=10).map(|k| 1u64 << k).collect()
}

/// Default n-list for discrete certificates.
pub fn default_discrete_ns() -> Vec<u64> {
    vec![1, 10, 100, 1000]
}

fn certificate_lines() -> Vec<SelfTestLine> {
    use crate::certifier::{
        certify_corollary, certify_discrete_pointwise, certify_thm1, certify_thm2, certify_thm3, CertifyOptions,
    };
    use crate::certificate::Verdict;
    let opts = CertifyOptions::default();
    let ns = default_continuous_ns();
    let mut out = Vec::new();
    let mut expect = |name: &str, r: Result<crate::certificate::Certificate>, want: Verdict| {
        out.push(match r {
            Ok(c) => line(name, c.verdict == want, format!("{:?}", c.verdict)),
            Err(e) => line(name, false, e.to_string()),
        });
    };
    expect("certify/two-cell/thm2", certify_thm2(&two_cell_family(), &ns, &opts), Verdict::Certified);
    expect("certify/two-cell/thm3", certify_thm3(&two_cell_family(), &ns, &opts), Verdict::Certified);
    expect("certify/constant/corollary", certify_corollary(&constant_family(), &ns, &opts), Verdict::Certified);
    expect("certify/counterexample/thm1", certify_thm1(&counterexample_family(), &ns, &opts), Verdict::Certified);
    expect(
        "certify/counterexample/thm2",
        certify_thm2(&counterexample_family(), &ns, &opts),
        Verdict::HypothesisFailed,
    );
    expect(
        "certify/counterexample/thm3",
        certify_thm3(&counterexample_family(), &ns, &opts),
        Verdict::HypothesisFailed,
    );
    for name in ["bernoulli-drift", "geometric-drift", "finite-uniform-drift"] {
        let r = build_discrete_families(name, DiscreteParams::default())
            .and_then(|f| certify_discrete_pointwise(&f, &default_discrete_ns(), DEFAULT_EPS, &opts));
        expect(&format!("certify/{name}/discrete"), r, Verdict::Certified);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_structure() {
        let p1 = build_counterexample(1).unwrap();
        assert_eq!(p1.eval(0.5), 1.0);
        let p2 = build_counterexample(2).unwrap();
        let step = p2.as_step().unwrap();
        assert_eq!(step.breakpoints(), &[0.0, 0.125, 0.5, 0.625, 1.0]);
        assert_eq!(p2.eval(0.1), 4.0);
        assert_eq!(p2.eval(0.3), 0.0);
        assert_eq!(p2.mass(0.0, 0.125).unwrap(), 0.5);
        let p3 = build_counterexample(3).unwrap();
        let support: f64 = p3.as_step().unwrap().cells().filter(|c| c.3 > 0.0).map(|c| c.2).sum();
        assert!((support - 1.0 / 9.0).abs() < 1e-15);
        assert!(build_counterexample(0).is_err());
        assert!(build_counterexample(MAX_COUNTEREXAMPLE_N + 1).is_err());
        assert!(build_counterexample(MAX_COUNTEREXAMPLE_N).is_ok());
    }

    #[test]
    fn two_cell_structure() {
        let q = build_two_cell_family(1).unwrap();
        assert_eq!(q.as_step().unwrap().values(), &[1.5, 0.5]);
        assert!(q.is_strictly_positive());
    }

    #[test]
    fn nnfs_region_entropies() {
        let opts = MeasureOptions::default();
        for (l, h) in [(1.0, 0.0), (2.0, -1.0), (0.5, 1.0)] {
            let d = build_nnfs_region(l).unwrap();
            assert_eq!(differential_entropy(&d, &opts).unwrap().value, h);
            assert!(d.evaluate((0.5, 0.1)) == l);
            assert_eq!(d.evaluate((0.5, 0.99)), 0.0);
        }
        assert!(build_nnfs_region(0.0).is_err());
    }

    #[test]
    fn heavy_tail_entropy_is_not_finite() {
        let d = build_heavy_tail().unwrap();
        let h = differential_entropy(&d, &MeasureOptions::default()).unwrap();
        assert!(!h.is_finite(), "{h:?}");
    }

    #[test]
    fn every_scenario_builds() {
        for name in SCENARIO_NAMES {
            scenario(name).unwrap();
        }
        assert!(matches!(scenario("nope"), Err(Error::Config(_))));
    }

    #[test]
    fn discrete_families() {
        let f = build_discrete_families("bernoulli-drift", DiscreteParams::default()).unwrap();
        assert_eq!(f.member(1).unwrap().prob(1), 0.75);
        assert_eq!(f.limit_entropy, Some(1.0));
        let g = build_discrete_families("geometric-drift", DiscreteParams::default()).unwrap();
        assert_eq!(g.limit_entropy, Some(2.0));
        let u = build_discrete_families("finite-uniform-drift", DiscreteParams::default()).unwrap();
        assert_eq!(u.member(1).unwrap().prob(1), 0.375);
        assert_eq!(u.limit_entropy, Some(2.0));
        assert!(build_discrete_families("zipf", DiscreteParams::default()).is_err());
        assert!(build_discrete_families("bernoulli-drift", DiscreteParams { p: 0.9, symbols: 4 }).is_err());
    }

    #[test]
    fn selftest_passes() {
        let lines = selftest();
        for l in &lines {
            assert!(l.passed, "{l:?}");
        }
    }
}
