use std::sync::Arc;

use entconv::certifier::{certify_thm2, kl_decomposition_check, CertifyOptions, FamilySpec};
use entconv::density::{Density, Direction, SupportSpec};
use entconv::discrete::{discrete_entropy, discrete_kl, discrete_variation, DiscretePmf};
use entconv::measures::{
    differential_entropy, kl_divergence, kolmogorov_distance, pinsker_check, variation_distance,
    MeasureOptions,
};
use entconv::quadrature::{integrate_against, integrate_lebesgue, integrate_range, Integrand, QuadOptions};
use entconv::scenarios::{build_counterexample, scenario, two_cell_family, ScenarioFamily};
use entconv::{StepFunction, Verdict};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

/// Normalized step density on `[0, 1]` with `cells` equal cells.
fn step_density(weights: &[f64]) -> Density {
    let k = weights.len();
    let total: f64 = weights.iter().sum();
    let bps: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    let vals: Vec<f64> = weights.iter().map(|w| w * k as f64 / total).collect();
    Density::piecewise_constant(bps, vals).unwrap()
}

fn weights(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..5.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn quadrature_is_linear(a in prop::collection::vec(-3.0f64..3.0, 1..6), b in prop::collection::vec(-3.0f64..3.0, 1..6)) {
        let s = SupportSpec::interval(0.0, 1.0).unwrap();
        let grid = |v: &Vec<f64>| StepFunction::new((0..=v.len()).map(|i| i as f64 / v.len() as f64).collect(), v.clone()).unwrap();
        let (fa, fb) = (grid(&a), grid(&b));
        let opts = QuadOptions::with_tol(TOL);
        let ia = integrate_lebesgue(Integrand::Step(&fa), &s, &opts).unwrap();
        let ib = integrate_lebesgue(Integrand::Step(&fb), &s, &opts).unwrap();
        prop_assert!(ia.exact && ib.exact);
        let sum = |x: f64| fa.eval(x) + fb.eval(x);
        let mut knots = fa.breakpoints().to_vec();
        knots.extend_from_slice(fb.breakpoints());
        let isum = integrate_range(&sum, 0.0, 1.0, &knots, &opts).unwrap();
        prop_assert!((isum.value - ia.value - ib.value).abs() <= 2.0 * TOL);
    }

    #[test]
    fn half_line_agrees_with_truncated_interval(rate in 0.5f64..4.0, big in 60.0f64..200.0) {
        let f = move |x: f64| if x <= big { rate * (-rate * x).exp() } else { 0.0 };
        let opts = QuadOptions::with_tol(TOL);
        let half = integrate_range(&f, 0.0, f64::INFINITY, &[big], &opts).unwrap();
        let bounded = integrate_range(&f, 0.0, big, &[], &opts).unwrap();
        prop_assert!((half.value - bounded.value).abs() <= 2.0 * TOL);
    }

    #[test]
    fn step_against_step_is_exact(w in weights(1..8), g in prop::collection::vec(-2.0f64..2.0, 1..8)) {
        let d = step_density(&w);
        let gs = StepFunction::new((0..=g.len()).map(|i| i as f64 / g.len() as f64).collect(), g).unwrap();
        let r = integrate_against(Integrand::Step(&gs), &d, &QuadOptions::default()).unwrap();
        prop_assert!(r.exact && r.error_estimate == 0.0);
    }

    #[test]
    fn measures_respect_their_ranges(a in weights(1..9), b in weights(1..9), c in weights(1..9)) {
        let (p, q, r) = (step_density(&a), step_density(&b), step_density(&c));
        let o = MeasureOptions::default();
        let kl = kl_divergence(&p, &q, &o).unwrap();
        prop_assert!(kl.value >= -1e-9);
        let vpq = variation_distance(&p, &q, &o).unwrap().value;
        let vqp = variation_distance(&q, &p, &o).unwrap().value;
        prop_assert!((0.0..=2.0).contains(&vpq));
        prop_assert!((vpq - vqp).abs() <= 1e-12);
        let vpr = variation_distance(&p, &r, &o).unwrap().value;
        let vrq = variation_distance(&r, &q, &o).unwrap().value;
        prop_assert!(vpq <= vpr + vrq + 3.0 * TOL);
        let k = kolmogorov_distance(&p, &q, &o).unwrap().value;
        prop_assert!(k <= vpq + 1e-9);
        prop_assert!(pinsker_check(&p, &q, &o).unwrap().holds);
    }

    #[test]
    fn cdf_is_monotone_and_normalized(w in weights(1..12), xs in prop::collection::vec(-0.5f64..1.5, 2..40)) {
        let d = step_density(&w);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let f: Vec<f64> = xs.iter().map(|&x| d.cdf(x).unwrap()).collect();
        prop_assert!(f.windows(2).all(|p| p[0] <= p[1]));
        prop_assert_eq!(d.mass(0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn discrete_kl_vanishes_exactly_on_equal_pmfs(w in weights(2..8), bump in 0.0f64..0.2) {
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut q = p.clone();
        let shift = bump * q[0].min(q[1]);
        q[0] -= shift;
        q[1] += shift;
        let (p, q) = (DiscretePmf::finite(p).unwrap(), DiscretePmf::finite(q).unwrap());
        let kl = discrete_kl(&p, &q, 1e-12).unwrap().value;
        let gap = (1..=w.len() as u64).map(|i| (p.prob(i) - q.prob(i)).abs()).fold(0.0, f64::max);
        prop_assert!(kl >= 0.0);
        prop_assert_eq!(kl == 0.0, gap <= 1e-12);
        let v = discrete_variation(&p, &q, 1e-12).unwrap().value;
        prop_assert!(v <= (2.0 * kl).sqrt() + 1e-9);
    }

    #[test]
    fn truncation_is_stable_under_doubling(q in 0.05f64..0.95, eps in 1e-12f64..1e-4) {
        let g = DiscretePmf::geometric(q).unwrap();
        let h1 = DiscretePmf::geometric(q * 0.9).unwrap();
        let a = discrete_entropy(&g, eps).unwrap().value;
        let b = discrete_entropy(&g, eps / 2.0).unwrap().value;
        prop_assert!((a - b).abs() < eps);
        let v1 = discrete_variation(&g, &h1, eps).unwrap().value;
        let v2 = discrete_variation(&g, &h1, eps / 2.0).unwrap().value;
        prop_assert!((v1 - v2).abs() < eps);
        let plan = g.truncation(eps).unwrap();
        let doubled = g.truncation(eps / 2.0).unwrap();
        prop_assert!(doubled.cutoff >= plan.cutoff);
        prop_assert!(plan.tail_mass <= eps);
    }
}

#[test]
fn analytic_normalization_within_tolerance() {
    let s = SupportSpec::half_line(0.0, Direction::Up).unwrap();
    let d = Density::analytic(s, Arc::new(|x: f64| 0.5 * (-0.5 * x).exp())).build().unwrap();
    let m = integrate_against(Integrand::Function(&|_| 1.0), &d, &QuadOptions::default()).unwrap();
    assert!((m.value - 1.0).abs() <= 1e-9);
    let line = SupportSpec::line();
    let g = Density::analytic(line, Arc::new(|x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()))
        .build()
        .unwrap();
    let h = differential_entropy(&g, &MeasureOptions::default()).unwrap();
    let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
    assert!((h.value - exact).abs() < 1e-8, "{h:?}");
}

#[test]
fn decomposition_identity_on_random_families() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let k = rng.random_range(1..6);
        let limit_w: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..3.0)).collect();
        let (a, b): (f64, f64) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        let limit = step_density(&limit_w);
        let fam = FamilySpec::new("random", limit, move |n| {
            let t = 1.0 / n as f64;
            Ok(step_density(&[1.0 + a * t, 1.0, 1.0 + b * t]))
        });
        for n in [1, 3, 10] {
            let d = kl_decomposition_check(&fam, n, TOL).unwrap();
            assert!(d.residual <= 4.0 * TOL, "{d:?}");
        }
    }
}

#[test]
fn bound_dominance_when_hypotheses_hold() {
    let ns: Vec<u64> = (1..=64).collect();
    let c = certify_thm2(&two_cell_family(), &ns, &CertifyOptions::default()).unwrap();
    assert!(c.hypotheses_hold());
    for r in &c.rows {
        for chk in &r.checks {
            assert!(chk.rhs - chk.lhs >= -1e-9, "{chk:?} at n = {}", r.n);
        }
    }
    assert_eq!(c.verdict, Verdict::Inconclusive, "variation at n = 64 is 1/128");
}

#[test]
fn convergent_families_shrink_their_entropy_gap() {
    let opts = MeasureOptions::default();
    for name in ["two-cell", "bernoulli-drift", "geometric-drift", "finite-uniform-drift"] {
        let s = scenario(name).unwrap();
        let gap = |n: u64| -> f64 {
            let h = s.compute(entconv::Quantity::Entropy, n, &opts).unwrap().value;
            let hl = match &s.family {
                ScenarioFamily::Continuous(f) => differential_entropy(&f.limit, &opts).unwrap().value,
                ScenarioFamily::Discrete(f) => discrete_entropy(&f.limit, 1e-12).unwrap().value,
            };
            (h - hl).abs()
        };
        assert!(gap(64) < gap(4), "{name}");
    }
}

#[test]
fn counterexample_vanishes_almost_everywhere() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let probes: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
    for n in [2u64, 4, 8, 32] {
        let p = build_counterexample(n).unwrap();
        let zero = probes.iter().filter(|&&x| p.eval(x) == 0.0).count() as f64 / probes.len() as f64;
        let nf = n as f64;
        // binomial standard error at 20k probes is below 0.004
        assert!(zero >= 1.0 - 1.0 / (nf * nf) - 0.02, "n = {n}: {zero}");
    }
}
