//! Hypothesis checks and explicit bound constants for entropy convergence of
//! a density sequence towards a limit.
//!
//! Essential sups are estimated on the merged breakpoints plus a seeded
//! quasi-random probe set; declared analytic bounds take precedence. "Tends to
//! zero" means "below `threshold` at the last n of the list".

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::certificate::{
    Certificate, CertificateRow, Check, Consistency, Hypothesis, HypothesisStatus, Theorem, Verdict,
};
use crate::density::{merge_breakpoints, merged_cells, Density, Representation};
use crate::discrete::{self, DiscreteFamily};
use crate::error::{Error, Result};
use crate::measures::{
    differential_entropy, kl_divergence, kolmogorov_distance, variation_distance, MeasureOptions,
    MeasureValue,
};
use crate::probe::{self, DEFAULT_PROBES};
use crate::quadrature::{self, Integrand, QuadOptions};

pub const DEFAULT_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_CAP: f64 = 1e6;
/// Absolute slack allowed on every checked inequality.
pub const CHECK_SLACK: f64 = 1e-9;

type DensityGenerator = Arc<dyn Fn(u64) -> Result<Density> + Send + Sync>;

/// Analytic facts about a family that override probing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DeclaredBounds {
    /// `sup_n ||log2 p_n||_inf`.
    pub member_log_sup: Option<f64>,
    /// `||log2 p||_inf` of the limit.
    pub limit_log_sup: Option<f64>,
    /// `sup_n ||p_n / p||_inf`.
    pub ratio_sup: Option<f64>,
    /// Lipschitz constant of `log2 p` for the limit.
    pub log_derivative_bound: Option<f64>,
}

#[derive(Clone)]
pub struct FamilySpec {
    pub name: String,
    pub limit: Density,
    member: DensityGenerator,
    pub declared: DeclaredBounds,
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilySpec")
            .field("name", &self.name)
            .field("limit", &self.limit)
            .field("declared", &self.declared)
            .finish_non_exhaustive()
    }
}

impl FamilySpec {
    pub fn new(
        name: impl Into<String>,
        limit: Density,
        member: impl Fn(u64) -> Result<Density> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            limit,
            member: Arc::new(member),
            declared: DeclaredBounds::default(),
        }
    }

    /// Every member equals the limit.
    pub fn constant(name: impl Into<String>, limit: Density) -> Self {
        let l = limit.clone();
        Self::new(name, limit, move |_| Ok(l.clone()))
    }

    pub fn with_declared(mut self, declared: DeclaredBounds) -> Self {
        self.declared = declared;
        self
    }

    pub fn member(&self, n: u64) -> Result<Density> {
        if n == 0 {
            return Err(Error::Argument("family index n must be at least 1".into()));
        }
        let d = (self.member)(n)?;
        if d.dim() != self.limit.dim() {
            return Err(Error::UnsupportedDimension);
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub tol: f64,
    pub threshold: f64,
    pub cap: f64,
    pub probes: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: quadrature::DEFAULT_TOL,
            threshold: DEFAULT_THRESHOLD,
            cap: DEFAULT_CAP,
            probes: DEFAULT_PROBES,
            seed: 0,
        }
    }
}

impl CertifyOptions {
    pub fn measure_options(&self) -> MeasureOptions {
        MeasureOptions {
            quad: QuadOptions::with_tol(self.tol),
            divergence_cap: self.cap,
            probes: self.probes,
            seed: self.seed,
        }
    }
}

fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::Argument("empty n-list".into()));
    }
    if n_list.contains(&0) {
        return Err(Error::Argument("n-list entries must be at least 1".into()));
    }
    Ok(())
}

fn small(x: f64, threshold: f64) -> bool {
    x.abs() < threshold
}

/// Interior probe points of `d`'s support together with `extra` knots.
fn probes_for(d: &Density, extra: &[f64], opts: &CertifyOptions) -> Result<Vec<f64>> {
    let knots = merge_breakpoints(&[&d.knots(), extra]);
    let (lo, hi) = d.support().bounds()?;
    Ok(probe::probe_points(d.support(), &knots, opts.probes, opts.seed)?
        .into_iter()
        .filter(|&x| x > lo && x < hi)
        .collect())
}

/// `||log2 d||_inf` on the support of `d`.
fn log_sup(d: &Density, opts: &CertifyOptions) -> Result<f64> {
    match d.representation() {
        Representation::PiecewiseConstant { step, .. } => Ok(step
            .values()
            .iter()
            .map(|&v| if v > 0.0 { v.log2().abs() } else { f64::INFINITY })
            .fold(0.0, f64::max)),
        Representation::RegionUniform { level, .. } => Ok(level.log2().abs()),
        Representation::Analytic(a) => {
            if let Some(b) = a.log_density_bound() {
                return Ok(b);
            }
            let mut sup: f64 = 0.0;
            for x in probes_for(d, &[], opts)? {
                let v = d.eval(x);
                sup = sup.max(if v > 0.0 { v.log2().abs() } else { f64::INFINITY });
            }
            Ok(sup)
        }
    }
}

/// `||d||_inf` on the support of `d`.
fn value_sup(d: &Density, opts: &CertifyOptions) -> Result<f64> {
    match d.representation() {
        Representation::PiecewiseConstant { step, .. } => {
            Ok(step.values().iter().copied().fold(0.0, f64::max))
        }
        Representation::RegionUniform { level, .. } => Ok(*level),
        Representation::Analytic(_) => Ok(probes_for(d, &[], opts)?
            .into_iter()
            .map(|x| d.eval(x))
            .fold(0.0, f64::max)),
    }
}

/// Whether `d` is positive on the interior of its support.
fn positive(d: &Density, opts: &CertifyOptions) -> Result<bool> {
    if d.is_strictly_positive() {
        return Ok(true);
    }
    match d.representation() {
        Representation::PiecewiseConstant { step, .. } => Ok(step.values().iter().all(|&v| v > 0.0)),
        Representation::RegionUniform { .. } => Ok(true),
        Representation::Analytic(_) => Ok(probes_for(d, &[], opts)?.into_iter().all(|x| d.eval(x) > 0.0)),
    }
}

/// Sups of `r`, `|r log2 r|` and `|r - 1|` for `r = num / den` on `{den > 0}`,
/// plus the fraction of probes where `num` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RatioStats {
    sup: f64,
    sup_r_log_r: f64,
    sup_deviation: f64,
    zero_fraction: f64,
}

fn ratio_stats(num: &Density, den: &Density, opts: &CertifyOptions) -> Result<RatioStats> {
    let mut st = RatioStats {
        sup: 0.0,
        sup_r_log_r: 0.0,
        sup_deviation: 0.0,
        zero_fraction: 0.0,
    };
    let mut visit = |r: f64| {
        st.sup = st.sup.max(r);
        st.sup_r_log_r = st.sup_r_log_r.max(if r > 0.0 { (r * r.log2()).abs() } else { 0.0 });
        st.sup_deviation = st.sup_deviation.max((r - 1.0).abs());
    };
    if let (Some(a), Some(b)) = (num.as_step(), den.as_step()) {
        for (_, _, _, na, db) in merged_cells(a, b) {
            if db > 0.0 {
                visit(na / db);
            }
        }
    } else {
        for x in probes_for(den, &num.knots(), opts)? {
            let q = den.eval(x);
            if q > 0.0 {
                visit(num.eval(x) / q);
            }
        }
    }
    // share of the reference mass-carrying probes where the member vanishes
    let pts: Vec<f64> = probe::unit_probes(opts.probes, opts.seed)
        .into_iter()
        .map(|u| probe::map_unit(den.support(), u))
        .collect::<Result<_>>()?;
    let carrying: Vec<f64> = pts.into_iter().filter(|&x| den.eval(x) > 0.0).collect();
    if !carrying.is_empty() {
        let zeros = carrying.iter().filter(|&&x| num.eval(x) == 0.0).count();
        st.zero_fraction = zeros as f64 / carrying.len() as f64;
    }
    Ok(st)
}

/// Per-n measurements shared by the theorem checks.
#[derive(Debug, Clone)]
struct Measured {
    n: u64,
    entropy: MeasureValue,
    gap: f64,
    gap_err: f64,
    kl: Option<MeasureValue>,
    variation: MeasureValue,
    kolmogorov: Option<MeasureValue>,
    member: Density,
}

fn measure_row(fam: &FamilySpec, n: u64, h_limit: &MeasureValue, opts: &CertifyOptions) -> Result<Measured> {
    let mopts = opts.measure_options();
    let member = fam.member(n)?;
    let entropy = differential_entropy(&member, &mopts)?;
    let gap = if entropy.is_finite() && h_limit.is_finite() {
        (entropy.value - h_limit.value).abs()
    } else {
        f64::INFINITY
    };
    let kl = match kl_divergence(&member, &fam.limit, &mopts) {
        Ok(v) => Some(v),
        Err(Error::Domination(_)) => None,
        Err(e) => return Err(e),
    };
    let variation = variation_distance(&member, &fam.limit, &mopts)?;
    let kolmogorov = match kolmogorov_distance(&member, &fam.limit, &mopts) {
        Ok(v) => Some(v),
        Err(Error::UnsupportedDimension) => None,
        Err(e) => return Err(e),
    };
    Ok(Measured {
        n,
        entropy,
        gap,
        gap_err: entropy.error_estimate + h_limit.error_estimate,
        kl,
        variation,
        kolmogorov,
        member,
    })
}

fn measure_all(fam: &FamilySpec, n_list: &[u64], opts: &CertifyOptions) -> Result<(MeasureValue, Vec<Measured>)> {
    check_n_list(n_list)?;
    let h = differential_entropy(&fam.limit, &opts.measure_options())?;
    let rows = n_list
        .iter()
        .map(|&n| measure_row(fam, n, &h, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok((h, rows))
}

fn kl_value(m: &Measured) -> f64 {
    m.kl.map_or(f64::INFINITY, |k| if k.is_finite() { k.value } else { f64::INFINITY })
}

fn base_row(m: &Measured) -> CertificateRow {
    CertificateRow {
        n: m.n,
        entropy: m.entropy.value,
        entropy_gap: m.gap,
        kl: kl_value(m),
        variation: m.variation.value,
        kolmogorov: m.kolmogorov.map(|k| k.value),
        ..CertificateRow::default()
    }
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + 1e-15)
}

/// Holds below threshold, unconfirmed while decreasing, fails otherwise.
fn trend_status(xs: &[f64], threshold: f64) -> HypothesisStatus {
    match xs.last() {
        Some(&x) if small(x, threshold) => HypothesisStatus::Holds,
        Some(&x) if xs.len() > 1 && nonincreasing(xs) && x < xs[0] => HypothesisStatus::Unconfirmed,
        _ => HypothesisStatus::Fails,
    }
}

fn verdict_from(hyps: &[Hypothesis], conclusive: bool) -> Verdict {
    if hyps.iter().any(|h| h.status == HypothesisStatus::Fails) {
        Verdict::HypothesisFailed
    } else if hyps.iter().any(|h| h.status == HypothesisStatus::Unconfirmed) || !conclusive {
        Verdict::Inconclusive
    } else {
        Verdict::Certified
    }
}

fn thm1_hypotheses(fam: &FamilySpec, opts: &CertifyOptions) -> Result<Vec<Hypothesis>> {
    let limit = &fam.limit;
    let pos = positive(limit, opts)?;
    let log_sup = match fam.declared.limit_log_sup {
        Some(b) => b,
        None => log_sup(limit, opts)?,
    };
    let mut hyps = vec![
        Hypothesis::from_bool("limit-positive", pos, "limit density is positive on the probed interior"),
        Hypothesis::from_bool(
            "limit-log-bounded",
            log_sup.is_finite() && log_sup < opts.cap,
            format!("sup |log2 p| = {log_sup}"),
        ),
    ];
    hyps.push(continuity_proxy(fam, opts)?);
    Ok(hyps)
}

/// Continuity proxy for `log p`: adjacent-probe jumps must stay below
/// `10 * spacing * L`, with `L` declared or estimated by central differences.
fn continuity_proxy(fam: &FamilySpec, opts: &CertifyOptions) -> Result<Hypothesis> {
    const NAME: &str = "limit-log-continuous";
    let limit = &fam.limit;
    match limit.representation() {
        Representation::PiecewiseConstant { step, .. } => {
            let v0 = step.values()[0];
            let constant = step.values().iter().all(|&v| v == v0);
            Ok(Hypothesis::from_bool(
                NAME,
                constant,
                if constant {
                    "constant piecewise limit"
                } else {
                    "piecewise-constant limit has jumps"
                },
            ))
        }
        Representation::RegionUniform { .. } => Ok(Hypothesis::new(
            NAME,
            HypothesisStatus::Holds,
            "constant level on the region",
        )),
        Representation::Analytic(_) => {
            let pts: Vec<f64> = probes_for(limit, &[], opts)?
                .into_iter()
                .filter(|&x| limit.eval(x) > 0.0)
                .collect();
            let lp = |x: f64| limit.eval(x).log2();
            let lip = match fam.declared.log_derivative_bound {
                Some(b) => b,
                None => {
                    let mut l: f64 = 0.0;
                    for &x in &pts {
                        let h = 1e-6 * x.abs().max(1.0);
                        let (a, b) = (limit.eval(x - h), limit.eval(x + h));
                        if a > 0.0 && b > 0.0 {
                            l = l.max(((b.log2() - a.log2()) / (2.0 * h)).abs());
                        }
                    }
                    l
                }
            };
            let mut worst: f64 = 0.0;
            let mut ok = true;
            for w in pts.windows(2) {
                let jump = (lp(w[1]) - lp(w[0])).abs();
                let allowed = 10.0 * (w[1] - w[0]) * lip;
                worst = worst.max(jump - allowed);
                ok &= jump <= allowed + 1e-12;
            }
            Ok(Hypothesis::from_bool(
                NAME,
                ok,
                format!("log-derivative bound {lip:.6e}; worst excess {worst:.3e}"),
            ))
        }
    }
}

/// Equivalence route: weak convergence plus entropy convergence against KL convergence.
pub fn certify_thm1(fam: &FamilySpec, n_list: &[u64], opts: &CertifyOptions) -> Result<Certificate> {
    let hyps = thm1_hypotheses(fam, opts)?;
    let (_, ms) = measure_all(fam, n_list, opts)?;
    let rows: Vec<CertificateRow> = ms.iter().map(base_row).collect();
    let last = rows.last().unwrap();
    let weak_entropy = last.kolmogorov.is_some_and(|k| small(k, opts.threshold))
        && small(last.entropy_gap, opts.threshold);
    let consistency = Consistency::from_flags(&[weak_entropy, small(last.kl, opts.threshold)]);
    let mut notes = Vec::new();
    if consistency == Consistency::CoFailure {
        notes.push("both sides of the equivalence fail together at the final n".into());
    }
    let verdict = verdict_from(&hyps, consistency != Consistency::Split);
    Ok(Certificate {
        theorem: Theorem::Thm1Equivalence,
        family: fam.name.clone(),
        threshold: opts.threshold,
        constants: BTreeMap::new(),
        hypotheses: hyps,
        rows,
        consistency,
        verdict,
        notes,
    })
}

/// Constants of the variation route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationConstants {
    pub m: f64,
    pub limit_log_sup: f64,
    pub limit_sup: f64,
    /// `2^-(M + ||log2 p||_inf)`.
    pub m_prime: f64,
    /// `2^-(M + ||p||_inf)`, as literally written for the theorem.
    pub m_prime_literal: f64,
    /// `log2 M' / (M' - 1)`, continuously extended by `1/ln 2` at `M' = 1`.
    pub c: f64,
}

impl VariationConstants {
    pub fn from_sups(m: f64, limit_log_sup: f64, limit_sup: f64) -> Self {
        let m_prime = (-(m + limit_log_sup)).exp2();
        let m_prime_literal = (-(m + limit_sup)).exp2();
        let c = if (m_prime - 1.0).abs() < 1e-12 {
            std::f64::consts::LOG2_E
        } else {
            m_prime.log2() / (m_prime - 1.0)
        };
        Self {
            m,
            limit_log_sup,
            limit_sup,
            m_prime,
            m_prime_literal,
            c,
        }
    }

    /// Coefficient of the L1 distance in the entropy-gap bound.
    pub fn entropy_coefficient(&self) -> f64 {
        self.m + self.c
    }

    /// Coefficient of the L1 distance in the KL bound.
    pub fn kl_coefficient(&self) -> f64 {
        self.c / self.m_prime
    }
}

fn thm2_hypotheses(
    fam: &FamilySpec,
    members: &[&Density],
    opts: &CertifyOptions,
) -> Result<(Vec<Hypothesis>, Option<VariationConstants>)> {
    let mut members_positive = true;
    let mut probed_m: f64 = 0.0;
    for m in members {
        members_positive &= positive(m, opts)?;
        if fam.declared.member_log_sup.is_none() {
            probed_m = probed_m.max(log_sup(m, opts)?);
        }
    }
    let limit_positive = positive(&fam.limit, opts)?;
    let m = fam.declared.member_log_sup.unwrap_or(probed_m);
    let l = match fam.declared.limit_log_sup {
        Some(b) => b,
        None => log_sup(&fam.limit, opts)?,
    };
    let m_ok = m.is_finite() && m < opts.cap;
    let l_ok = l.is_finite() && l < opts.cap;
    let source = if fam.declared.member_log_sup.is_some() { "declared" } else { "probed" };
    let hyps = vec![
        Hypothesis::from_bool(
            "strictly-positive",
            members_positive && limit_positive,
            format!("members positive: {members_positive}; limit positive: {limit_positive}"),
        ),
        Hypothesis::from_bool("member-log-sup", m_ok, format!("M = sup_n ||log2 p_n|| = {m} ({source})")),
        Hypothesis::from_bool("limit-log-sup", l_ok, format!("||log2 p|| = {l}")),
    ];
    let constants = (m_ok && l_ok)
        .then(|| value_sup(&fam.limit, opts).map(|s| VariationConstants::from_sups(m, l, s)))
        .transpose()?;
    Ok((hyps, constants))
}

/// Variation-route constants over the members in `n_list`, when the
/// log-density sups are finite.
pub fn variation_constants(
    fam: &FamilySpec,
    n_list: &[u64],
    opts: &CertifyOptions,
) -> Result<Option<VariationConstants>> {
    check_n_list(n_list)?;
    let members = n_list.iter().map(|&n| fam.member(n)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Density> = members.iter().collect();
    let (hyps, k) = thm2_hypotheses(fam, &refs, opts)?;
    Ok(k.filter(|_| hyps.iter().all(Hypothesis::holds)))
}

fn add_variation_bounds(row: &mut CertificateRow, m: &Measured, k: &VariationConstants) {
    let v = m.variation.value;
    let af3 = k.entropy_coefficient() * v;
    let af4 = k.kl_coefficient() * v;
    row.bound_af3 = Some(af3);
    row.bound_af4 = Some(af4);
    let v_err = m.variation.error_estimate;
    row.checks.push(Check::at_most(
        "entropy-gap-bound",
        m.gap,
        af3,
        CHECK_SLACK + m.gap_err + k.entropy_coefficient() * v_err,
    ));
    let kl_err = m.kl.map_or(0.0, |x| x.error_estimate);
    row.checks.push(Check::at_most(
        "kl-bound",
        kl_value(m),
        af4,
        CHECK_SLACK + kl_err + k.kl_coefficient() * v_err,
    ));
}

fn variation_constants_map(k: &VariationConstants) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("M".to_string(), k.m),
        ("M'".to_string(), k.m_prime),
        ("M'_literal".to_string(), k.m_prime_literal),
        ("c".to_string(), k.c),
        ("limit_log_sup".to_string(), k.limit_log_sup),
        ("coefficient_af3".to_string(), k.entropy_coefficient()),
        ("coefficient_af4".to_string(), k.kl_coefficient()),
    ])
}

/// Variation route: variation convergence implies entropy and KL convergence, with
/// explicit bounds linear in the L1 distance.
pub fn certify_thm2(fam: &FamilySpec, n_list: &[u64], opts: &CertifyOptions) -> Result<Certificate> {
    let (_, ms) = measure_all(fam, n_list, opts)?;
    let members: Vec<&Density> = ms.iter().map(|m| &m.member).collect();
    let (hyps, constants) = thm2_hypotheses(fam, &members, opts)?;
    let mut rows: Vec<CertificateRow> = ms.iter().map(base_row).collect();
    let mut notes = Vec::new();
    let mut constant_map = BTreeMap::new();
    if let Some(k) = &constants {
        for (row, m) in rows.iter_mut().zip(&ms) {
            add_variation_bounds(row, m, k);
        }
        constant_map = variation_constants_map(k);
        if k.m_prime >= 1.0 {
            notes.push("M' = 1: the constant family case, c is the limit 1/ln 2".into());
        }
    } else {
        notes.push("bounds not evaluated: log-density sups are not finite".into());
    }
    let last = rows.last().unwrap();
    let v_small = small(last.variation, opts.threshold);
    let gap_small = small(last.entropy_gap, opts.threshold);
    let kl_small = small(last.kl, opts.threshold);
    let consistency = Consistency::from_flags(&[v_small, gap_small, kl_small]);
    let checks_ok = rows.iter().flat_map(|r| &r.checks).all(|c| c.holds);
    if !checks_ok {
        notes.push("a bound inequality failed".into());
    }
    if !v_small {
        notes.push("variation is not below threshold at the final n; the premise is not exercised".into());
    }
    let conclusive = checks_ok && v_small && gap_small && kl_small;
    let verdict = verdict_from(&hyps, conclusive);
    Ok(Certificate {
        theorem: Theorem::Thm2Variation,
        family: fam.name.clone(),
        threshold: opts.threshold,
        constants: constant_map,
        hypotheses: hyps,
        rows,
        consistency,
        verdict,
        notes,
    })
}

/// Pointwise route: pointwise ratio convergence with a bounded ratio implies KL and
/// entropy convergence.
pub fn certify_thm3(fam: &FamilySpec, n_list: &[u64], opts: &CertifyOptions) -> Result<Certificate> {
    let (h, ms) = measure_all(fam, n_list, opts)?;
    let dominated = ms.iter().all(|m| m.kl.is_some());
    let mut stats = Vec::with_capacity(ms.len());
    for m in &ms {
        stats.push(ratio_stats(&m.member, &fam.limit, opts)?);
    }
    let probed_sup = stats.iter().map(|s| s.sup).fold(0.0, f64::max);
    let m_sup = fam.declared.ratio_sup.unwrap_or(probed_sup);
    let m_prime = stats.iter().map(|s| s.sup_r_log_r).fold(0.0, f64::max);
    let m_second = stats.iter().map(|s| s.sup_deviation).fold(0.0, f64::max);
    let deviations: Vec<f64> = stats.iter().map(|s| s.sup_deviation).collect();
    let source = if fam.declared.ratio_sup.is_some() { "declared" } else { "probed" };
    let last_stats = stats.last().unwrap();

    let hyps = vec![
        Hypothesis::from_bool(
            "limit-entropy-finite",
            h.is_finite(),
            format!("H[limit] = {} ({:?})", h.value, h.verdict),
        ),
        Hypothesis::from_bool("dominated", dominated, "every member vanishes where the limit does"),
        Hypothesis::from_bool(
            "ratio-sup",
            m_sup.is_finite() && m_sup < opts.cap,
            format!("M = sup_n ||p_n/p|| = {m_sup} ({source})"),
        ),
        Hypothesis::new(
            "pointwise-convergence",
            trend_status(&deviations, opts.threshold),
            format!(
                "max probed |p_n/p - 1| at final n = {:.6e}; member vanishes on {:.4} of probes",
                last_stats.sup_deviation, last_stats.zero_fraction
            ),
        ),
    ];

    let mut rows: Vec<CertificateRow> = ms.iter().map(base_row).collect();
    for (row, st) in rows.iter_mut().zip(&stats) {
        row.ratio_deviation = Some(st.sup_deviation);
        if m_sup.is_finite() {
            row.checks.push(Check::at_most("deviation-within-M+1", st.sup_deviation, m_sup + 1.0, CHECK_SLACK));
        }
    }
    let last = rows.last().unwrap();
    let v_small = small(last.variation, opts.threshold);
    let gap_small = small(last.entropy_gap, opts.threshold);
    let kl_small = small(last.kl, opts.threshold);
    let consistency = Consistency::from_flags(&[kl_small, gap_small, v_small]);
    let mut notes = vec!["pointwise convergence is checked on a fixed seeded probe set".to_string()];
    if small(last_stats.sup_deviation, opts.threshold) && !v_small {
        notes.push("pointwise convergence without variation convergence contradicts Scheffé".into());
    }
    let checks_ok = rows.iter().flat_map(|r| &r.checks).all(|c| c.holds);
    let verdict = verdict_from(&hyps, checks_ok && kl_small && gap_small && v_small);
    let constants = BTreeMap::from([
        ("M".to_string(), m_sup),
        ("M'".to_string(), m_prime),
        ("M''".to_string(), m_second),
    ]);
    Ok(Certificate {
        theorem: Theorem::Thm3Pointwise,
        family: fam.name.clone(),
        threshold: opts.threshold,
        constants,
        hypotheses: hyps,
        rows,
        consistency,
        verdict,
        notes,
    })
}

/// Corollary: weak plus entropy convergence, KL convergence and variation
/// convergence must vanish or fail together.
pub fn certify_corollary(fam: &FamilySpec, n_list: &[u64], opts: &CertifyOptions) -> Result<Certificate> {
    let (_, ms) = measure_all(fam, n_list, opts)?;
    let mut hyps = thm1_hypotheses(fam, opts)?;
    let members: Vec<&Density> = ms.iter().map(|m| &m.member).collect();
    let (h2, constants) = thm2_hypotheses(fam, &members, opts)?;
    for h in h2 {
        if !hyps.iter().any(|x| x.name == h.name) {
            hyps.push(h);
        }
    }
    let mut rows: Vec<CertificateRow> = ms.iter().map(base_row).collect();
    let mut constant_map = BTreeMap::new();
    if let Some(k) = &constants {
        for (row, m) in rows.iter_mut().zip(&ms) {
            add_variation_bounds(row, m, k);
        }
        constant_map = variation_constants_map(k);
    }
    let last = rows.last().unwrap();
    let weak_entropy = last.kolmogorov.is_some_and(|k| small(k, opts.threshold))
        && small(last.entropy_gap, opts.threshold);
    let consistency = Consistency::from_flags(&[
        weak_entropy,
        small(last.kl, opts.threshold),
        small(last.variation, opts.threshold),
    ]);
    let mut notes = Vec::new();
    if consistency == Consistency::CoFailure {
        notes.push("all three columns stay away from zero: consistent co-failure".into());
    }
    let checks_ok = rows.iter().flat_map(|r| &r.checks).all(|c| c.holds);
    let verdict = verdict_from(&hyps, checks_ok && consistency != Consistency::Split);
    Ok(Certificate {
        theorem: Theorem::CorollaryCombined,
        family: fam.name.clone(),
        threshold: opts.threshold,
        constants: constant_map,
        hypotheses: hyps,
        rows,
        consistency,
        verdict,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub kl_direct: f64,
    pub kl_via_decomposition: f64,
    pub residual: f64,
    /// Sum of the error estimates of the five constituent quantities.
    pub error_budget: f64,
}

/// Compares `D(p_n || p)` with
/// `H[p] - H[p_n] + ∫ log2 p dμ - ∫ log2 p dμ_n`.
pub fn kl_decomposition_check(fam: &FamilySpec, n: u64, tol: f64) -> Result<DecompositionCheck> {
    let limit = &fam.limit;
    if !limit.is_strictly_positive() {
        return Err(Error::Argument("decomposition needs a strictly positive limit".into()));
    }
    let member = fam.member(n)?;
    let sub = tol / 8.0;
    let mopts = MeasureOptions::with_tol(sub);
    let qopts = QuadOptions::with_tol(sub);
    let direct = kl_divergence(&member, limit, &mopts)?;
    let h_limit = differential_entropy(limit, &mopts)?;
    let h_member = differential_entropy(&member, &mopts)?;
    let (on_limit, on_member) = match limit.as_step() {
        Some(step) => {
            let log_step = step.map_values(f64::log2)?;
            (
                quadrature::integrate_against(Integrand::Step(&log_step), limit, &qopts)?,
                quadrature::integrate_against(Integrand::Step(&log_step), &member, &qopts)?,
            )
        }
        None => {
            let log_p = |x: f64| limit.eval(x).log2();
            (
                quadrature::integrate_against(Integrand::Function(&log_p), limit, &qopts)?,
                quadrature::integrate_against(Integrand::Function(&log_p), &member, &qopts)?,
            )
        }
    };
    for v in [&direct, &h_limit, &h_member] {
        if !v.is_finite() {
            return Err(Error::BudgetExceeded {
                estimate: v.value,
                error: v.error_estimate,
                subdivisions: 0,
            });
        }
    }
    let via = h_limit.value - h_member.value + on_limit.value - on_member.value;
    Ok(DecompositionCheck {
        kl_direct: direct.value,
        kl_via_decomposition: via,
        residual: (direct.value - via).abs(),
        error_budget: direct.error_estimate
            + h_limit.error_estimate
            + h_member.error_estimate
            + on_limit.error_estimate
            + on_member.error_estimate,
    })
}

/// Pointwise certificate for countable alphabets: coordinatewise convergence
/// plus a bounded ratio implies KL and entropy convergence.
pub fn certify_discrete_pointwise(
    family: &DiscreteFamily,
    n_list: &[u64],
    eps: f64,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_n_list(n_list)?;
    let limit = &family.limit;
    let h = discrete::discrete_entropy(limit, eps)?;
    let idx = family.probe_indices(eps)?;
    let mut rows = Vec::with_capacity(n_list.len());
    let mut dominated = true;
    let mut m_sup: f64 = 0.0;
    let mut gaps = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let m = family.member(n)?;
        let hn = discrete::discrete_entropy(&m, eps)?;
        let kl = match discrete::discrete_kl(&m, limit, eps) {
            Ok(k) => k.value,
            Err(Error::Domination(_)) => {
                dominated = false;
                f64::INFINITY
            }
            Err(e) => return Err(e),
        };
        let v = discrete::discrete_variation(&m, limit, eps)?;
        let kolm = discrete::discrete_kolmogorov(&m, limit, eps)?;
        m_sup = m_sup.max(discrete::ratio_sup(&m, limit, &idx));
        let gap = idx
            .iter()
            .map(|&i| (m.prob(i) - limit.prob(i)).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
        rows.push(CertificateRow {
            n,
            entropy: hn.value,
            entropy_gap: (hn.value - h.value).abs(),
            kl,
            variation: v.value,
            kolmogorov: Some(kolm.value),
            coordinate_gap: Some(gap),
            ..CertificateRow::default()
        });
    }
    let m_ok = m_sup.is_finite() && m_sup <= opts.cap;
    let hyps = vec![
        Hypothesis::from_bool(
            "limit-entropy-finite",
            discrete::is_finite_value(&h),
            format!("H[limit] = {}", h.value),
        ),
        Hypothesis::from_bool("dominated", dominated, "every member vanishes where the limit does"),
        Hypothesis::from_bool(
            "ratio-sup",
            m_ok,
            format!("M = sup_(n,i) p_i^n / p_i = {m_sup} over {} probed indices", idx.len()),
        ),
        Hypothesis::new(
            "coordinatewise-convergence",
            trend_status(&gaps, opts.threshold),
            format!("max probed |p_i^n - p_i| at final n = {:.6e}", gaps.last().unwrap()),
        ),
    ];
    let last = rows.last().unwrap();
    let kl_small = small(last.kl, opts.threshold);
    let gap_small = small(last.entropy_gap, opts.threshold);
    let consistency = Consistency::from_flags(&[kl_small, gap_small]);
    let verdict = verdict_from(&hyps, kl_small && gap_small);
    Ok(Certificate {
        theorem: Theorem::DiscretePointwise,
        family: family.name.clone(),
        threshold: opts.threshold,
        constants: BTreeMap::from([("M".to_string(), m_sup)]),
        hypotheses: hyps,
        rows,
        consistency,
        verdict,
        notes: vec!["the ratio sup uses the index set where the limit is positive".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{counterexample_family, two_cell_family};

    fn opts() -> CertifyOptions {
        CertifyOptions {
            probes: 2_000,
            ..CertifyOptions::default()
        }
    }

    fn constant() -> FamilySpec {
        FamilySpec::constant("constant", Density::uniform(0.0, 1.0).unwrap())
    }

    #[test]
    fn decomposition_on_counterexample() {
        let fam = counterexample_family();
        for n in [2, 3, 8] {
            let d = kl_decomposition_check(&fam, n, 1e-9).unwrap();
            assert!((d.kl_direct - 2.0 * (n as f64).log2()).abs() < 1e-12);
            assert!(d.residual < 1e-12);
        }
    }

    #[test]
    fn decomposition_on_two_cell_and_constant() {
        let d = kl_decomposition_check(&two_cell_family(), 5, 1e-9).unwrap();
        assert!(d.residual <= 1e-10, "{d:?}");
        let d = kl_decomposition_check(&constant(), 1, 1e-9).unwrap();
        assert_eq!((d.kl_direct, d.kl_via_decomposition), (0.0, 0.0));
    }

    #[test]
    fn two_cell_constants_at_n_one() {
        let k = VariationConstants::from_sups(1.0, 0.0, 1.0);
        assert_eq!(k.m_prime, 0.5);
        assert_eq!(k.c, 2.0);
        assert_eq!(k.entropy_coefficient(), 3.0);
        assert_eq!(k.kl_coefficient(), 4.0);
        let one = VariationConstants::from_sups(0.0, 0.0, 1.0);
        assert_eq!(one.c, std::f64::consts::LOG2_E);
    }

    #[test]
    fn thm2_certifies_two_cell_family() {
        let ns: Vec<u64> = (0..=10).map(|k| 1 << k).collect();
        let c = certify_thm2(&two_cell_family(), &ns, &opts()).unwrap();
        assert!(c.checks_hold());
        assert_eq!(c.verdict, Verdict::Certified, "{c}");
    }

    #[test]
    fn counterexample_is_rejected_by_thm2_and_thm3() {
        let fam = counterexample_family();
        for ns in [vec![1], vec![1, 2, 4], vec![2, 8, 32]] {
            assert_eq!(certify_thm2(&fam, &ns, &opts()).unwrap().verdict, Verdict::HypothesisFailed);
            assert_eq!(certify_thm3(&fam, &ns, &opts()).unwrap().verdict, Verdict::HypothesisFailed);
        }
    }

    #[test]
    fn counterexample_thm1_reports_co_failure() {
        let c = certify_thm1(&counterexample_family(), &[2, 16, 1024], &opts()).unwrap();
        assert!(c.hypotheses_hold());
        assert_eq!(c.consistency, Consistency::CoFailure);
        assert_eq!(c.verdict, Verdict::Certified);
        let c = certify_corollary(&counterexample_family(), &[2, 16, 1024], &opts()).unwrap();
        assert_eq!(c.consistency, Consistency::CoFailure);
        assert_eq!(c.verdict, Verdict::HypothesisFailed);
    }

    #[test]
    fn constant_family_is_certified_everywhere() {
        let fam = constant();
        let ns = [1, 2, 3];
        for c in [
            certify_thm1(&fam, &ns, &opts()).unwrap(),
            certify_thm2(&fam, &ns, &opts()).unwrap(),
            certify_thm3(&fam, &ns, &opts()).unwrap(),
            certify_corollary(&fam, &ns, &opts()).unwrap(),
        ] {
            assert_eq!(c.verdict, Verdict::Certified, "{c}");
            assert!(c.rows.iter().all(|r| r.kl == 0.0 && r.entropy_gap == 0.0 && r.variation == 0.0));
        }
    }

    #[test]
    fn thm3_on_two_cell_family() {
        let ns: Vec<u64> = (0..=10).map(|k| 1 << k).collect();
        let c = certify_thm3(&two_cell_family(), &ns, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Certified, "{c}");
        assert!(c.constants["M"] <= 1.5);
        assert!(c.constants["M''"] <= c.constants["M"] + 1.0);
    }

    #[test]
    fn short_lists_stay_inconclusive() {
        let c = certify_thm2(&two_cell_family(), &[1, 2, 4], &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        let c = certify_thm3(&two_cell_family(), &[1, 2, 4], &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn thm1_continuity_proxy_on_analytic_limits() {
        let s = crate::density::SupportSpec::interval(0.0, 1.0).unwrap();
        // smooth: 2x + ... shifted to stay positive
        let smooth = Density::analytic(s.clone(), Arc::new(|x: f64| 0.5 + x)).strictly_positive(true).build().unwrap();
        let fam = FamilySpec::constant("smooth", smooth);
        let h = continuity_proxy(&fam, &opts()).unwrap();
        assert!(h.holds(), "{h:?}");
        let jumpy = Density::analytic(s, Arc::new(|x: f64| if x < 0.3 { 0.5 } else { 0.5 + 0.5 / 0.7 }))
            .strictly_positive(true)
            .build()
            .unwrap();
        let fam = FamilySpec::constant("jumpy", jumpy);
        assert!(!continuity_proxy(&fam, &opts()).unwrap().holds());
    }

    #[test]
    fn empty_n_list_is_an_argument_error() {
        assert!(matches!(certify_thm1(&constant(), &[], &opts()), Err(Error::Argument(_))));
    }
}
