//! Entropy, Kullback-Leibler divergence and variation distance over countable
//! alphabets, plus the coordinatewise-convergence diagnostics.
//!
//! Indices are 1-based. An infinite PMF is an explicit head followed by a
//! geometric tail, so every infinite sum below splits into a finite partial
//! sum and a closed-form remainder.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::density::KahanSum;
use crate::error::{Error, Result};
use crate::measures::{xlog2x, Finiteness, MeasureValue, Quantity};

/// Tolerance on `Σ p_i = 1`.
pub const PMF_MASS_TOL: f64 = 1e-12;

/// Default truncation residual.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Geometric remainder `p_i = start * ratio^(i - from)` for `i >= from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricTail {
    pub from: u64,
    pub start: f64,
    pub ratio: f64,
}

impl GeometricTail {
    fn at(&self, i: u64) -> f64 {
        if i < self.from {
            0.0
        } else {
            self.start * self.ratio.powi((i - self.from) as i32)
        }
    }

    /// `Σ_{i > n} p_i` for `n >= from - 1`.
    fn mass_after(&self, n: u64) -> f64 {
        self.at(n + 1) / (1.0 - self.ratio)
    }

    /// `-Σ_{i > n} p_i log2 p_i` for `n >= from - 1`.
    fn entropy_after(&self, n: u64) -> f64 {
        let p = self.at(n + 1);
        if p == 0.0 {
            return 0.0;
        }
        let r = self.ratio;
        let mut h = -p * p.log2() / (1.0 - r);
        if r > 0.0 {
            h -= p * r.log2() * r / ((1.0 - r) * (1.0 - r));
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretePmf {
    labels: Option<Vec<String>>,
    head: Vec<f64>,
    tail: Option<GeometricTail>,
}

impl DiscretePmf {
    /// Finite PMF over indices `1..=probs.len()`.
    pub fn finite(probs: Vec<f64>) -> Result<Self> {
        Self::validated(None, probs, None)
    }

    pub fn finite_labeled(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        Self::validated(Some(labels), probs, None)
    }

    /// Finite PMF over an arbitrary integer alphabet, remapped to contiguous
    /// indices in increasing symbol order.
    pub fn from_sparse(mut entries: Vec<(i64, f64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPmf("repeated symbol in sparse alphabet".into()));
        }
        let (labels, probs) = entries
            .into_iter()
            .map(|(s, p)| (s.to_string(), p))
            .unzip();
        Self::validated(Some(labels), probs, None)
    }

    /// Point mass on index `at` of an alphabet of `size` symbols.
    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at == 0 || at > size {
            return Err(Error::InvalidPmf(format!("index {at} outside 1..={size}")));
        }
        let mut p = vec![0.0; size];
        p[at - 1] = 1.0;
        Self::finite(p)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::finite(vec![p, 1.0 - p])
    }

    /// `p_i = q (1 - q)^(i - 1)` for `i >= 1`.
    pub fn geometric(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidPmf(format!("geometric parameter {q} outside (0, 1]")));
        }
        Self::with_geometric_tail(Vec::new(), q, 1.0 - q)
    }

    /// `p_i ∝ i^(-s)` on `1..=n`.
    pub fn zeta_truncated(s: f64, n: usize) -> Result<Self> {
        if n == 0 || !s.is_finite() {
            return Err(Error::InvalidPmf("zeta needs n >= 1 and finite exponent".into()));
        }
        let w: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-s)).collect();
        let mut z = KahanSum::default();
        w.iter().for_each(|&x| z.add(x));
        let z = z.total();
        Self::finite(w.into_iter().map(|x| x / z).collect())
    }

    /// Explicit `head` on `1..=head.len()` followed by a geometric tail
    /// starting at `start` with common ratio `ratio`.
    pub fn with_geometric_tail(head: Vec<f64>, start: f64, ratio: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio) {
            return Err(Error::InvalidPmf(format!("tail ratio {ratio} outside [0, 1)")));
        }
        if !(start > 0.0 && start.is_finite()) {
            return Err(Error::InvalidPmf(format!("tail start {start} must be positive")));
        }
        let from = head.len() as u64 + 1;
        Self::validated(None, head, Some(GeometricTail { from, start, ratio }))
    }

    fn validated(labels: Option<Vec<String>>, head: Vec<f64>, tail: Option<GeometricTail>) -> Result<Self> {
        if head.is_empty() && tail.is_none() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        if let Some((i, p)) = head
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0 && **p <= 1.0))
        {
            return Err(Error::InvalidPmf(format!("p_{} = {p} is not in [0, 1]", i + 1)));
        }
        let mut acc = KahanSum::default();
        head.iter().for_each(|&p| acc.add(p));
        if let Some(t) = &tail {
            acc.add(t.mass_after(t.from - 1));
        }
        let total = acc.total();
        if (total - 1.0).abs() > PMF_MASS_TOL {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { labels, head, tail })
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// Number of symbols, `None` when infinite; never empty.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        self.tail.is_none().then_some(self.head.len())
    }

    /// Length of the explicitly stored prefix.
    pub fn explicit_len(&self) -> u64 {
        self.head.len() as u64
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn tail(&self) -> Option<&GeometricTail> {
        self.tail.as_ref()
    }

    /// `p_i`; 0 for indices outside the alphabet.
    pub fn prob(&self, i: u64) -> f64 {
        if i == 0 {
            return 0.0;
        }
        if i <= self.head.len() as u64 {
            return self.head[(i - 1) as usize];
        }
        self.tail.map_or(0.0, |t| t.at(i))
    }

    /// `Σ_{i > n} p_i`, nonincreasing in `n` and tending to 0.
    pub fn tail_mass(&self, n: u64) -> f64 {
        let mut acc = KahanSum::default();
        for i in (n + 1)..=self.explicit_len() {
            acc.add(self.head[(i - 1) as usize]);
        }
        if let Some(t) = &self.tail {
            acc.add(t.mass_after(n.max(t.from - 1)));
        }
        acc.total().max(0.0)
    }

    fn tail_entropy(&self, n: u64) -> f64 {
        match &self.tail {
            Some(t) if n + 1 >= t.from => t.entropy_after(n),
            _ => 0.0,
        }
    }

    /// Smallest cutoff past the explicit prefix whose tail mass is at most `eps / 4`.
    pub fn truncation(&self, eps: f64) -> Result<TruncationPlan> {
        check_eps(eps)?;
        let mut n = self.explicit_len();
        if let Some(t) = &self.tail {
            while t.mass_after(n) > eps / 4.0 {
                n += 1;
                if n > 1 << 40 {
                    return Err(Error::Config("tail does not fall below eps".into()));
                }
            }
        }
        Ok(TruncationPlan {
            cutoff: n,
            tail_mass: self.tail_mass(n),
            tail_entropy_bound: self.tail_entropy(n),
        })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("truncation residual must be positive, got {eps}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPlan {
    pub cutoff: u64,
    pub tail_mass: f64,
    /// Exact entropy of the discarded tail; geometric tails make this closed form.
    pub tail_entropy_bound: f64,
}

fn check_alphabets(p: &DiscretePmf, q: &DiscretePmf) -> Result<()> {
    if let (Some(a), Some(b)) = (p.labels(), q.labels()) {
        if a != b {
            return Err(Error::AlphabetMismatch("symbol labels differ".into()));
        }
    }
    if let (Some(a), Some(b)) = (p.len(), q.len()) {
        if a != b {
            return Err(Error::AlphabetMismatch(format!("{a} symbols against {b}")));
        }
    }
    Ok(())
}

fn rounding(terms: u64) -> f64 {
    f64::EPSILON * (terms as f64 + 1.0)
}

/// Shannon entropy `-Σ p_i log2 p_i`.
pub fn discrete_entropy(p: &DiscretePmf, eps: f64) -> Result<MeasureValue> {
    check_eps(eps)?;
    let n = p.explicit_len();
    let mut acc = KahanSum::default();
    for i in 1..=n {
        acc.add(-xlog2x(p.prob(i)));
    }
    acc.add(p.tail_entropy(n));
    Ok(MeasureValue::finite(Quantity::Entropy, acc.total(), rounding(n)))
}

/// Kullback-Leibler divergence `Σ p_i log2(p_i / q_i)`.
pub fn discrete_kl(p: &DiscretePmf, q: &DiscretePmf, eps: f64) -> Result<MeasureValue> {
    check_eps(eps)?;
    check_alphabets(p, q)?;
    let n = p.explicit_len().max(q.explicit_len());
    let mut acc = KahanSum::default();
    for i in 1..=n {
        let (a, b) = (p.prob(i), q.prob(i));
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::Domination(format!("p_{i} = {a} but the reference has q_{i} = 0")));
        }
        acc.add(a * (a / b).log2());
    }
    match (p.tail(), q.tail()) {
        (None, _) => {}
        (Some(_), None) => {
            return Err(Error::Domination(format!(
                "p_{} > 0 beyond the finite reference alphabet",
                n + 1
            )))
        }
        (Some(tp), Some(tq)) => {
            // both tails are geometric from n + 1 on
            let (a, b) = (tp.at(n + 1), tq.at(n + 1));
            let (r, s) = (tp.ratio, tq.ratio);
            acc.add(a / (1.0 - r) * (a / b).log2());
            if r > 0.0 {
                if s == 0.0 {
                    return Err(Error::Domination(format!("p_{} > 0 where q vanishes", n + 2)));
                }
                acc.add(a * r / ((1.0 - r) * (1.0 - r)) * (r / s).log2());
            }
        }
    }
    Ok(MeasureValue::finite(Quantity::Kl, acc.total(), rounding(n)))
}

/// Variation distance `Σ |p_i - q_i|`, in `[0, 2]`.
pub fn discrete_variation(p: &DiscretePmf, q: &DiscretePmf, eps: f64) -> Result<MeasureValue> {
    check_eps(eps)?;
    check_alphabets(p, q)?;
    let n = p.truncation(eps)?.cutoff.max(q.truncation(eps)?.cutoff);
    let mut acc = KahanSum::default();
    for i in 1..=n {
        acc.add((p.prob(i) - q.prob(i)).abs());
    }
    let (tp, tq) = (p.tail_mass(n), q.tail_mass(n));
    acc.add((tp - tq).abs());
    let value = acc.total().clamp(0.0, 2.0);
    Ok(MeasureValue::finite(
        Quantity::Variation,
        value,
        2.0 * tp.min(tq) + rounding(n),
    ))
}

/// `sup_k |Σ_{i <= k} (p_i - q_i)|`, the CDF distance along the index order.
pub fn discrete_kolmogorov(p: &DiscretePmf, q: &DiscretePmf, eps: f64) -> Result<MeasureValue> {
    check_eps(eps)?;
    check_alphabets(p, q)?;
    let n = p.truncation(eps)?.cutoff.max(q.truncation(eps)?.cutoff);
    let mut acc = KahanSum::default();
    let mut sup: f64 = 0.0;
    for i in 1..=n {
        acc.add(p.prob(i) - q.prob(i));
        sup = sup.max(acc.total().abs());
    }
    let err = p.tail_mass(n).max(q.tail_mass(n));
    Ok(MeasureValue::finite(Quantity::Kolmogorov, sup.min(1.0), err + rounding(n)))
}

type PmfGenerator = Arc<dyn Fn(u64) -> Result<DiscretePmf> + Send + Sync>;

/// A sequence of PMFs indexed by `n` together with its intended limit.
#[derive(Clone)]
pub struct DiscreteFamily {
    pub name: String,
    pub limit: DiscretePmf,
    member: PmfGenerator,
    /// Index where the member/limit ratio peaks, if known.
    pub worst_index: Option<u64>,
    pub limit_entropy: Option<f64>,
}

impl fmt::Debug for DiscreteFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteFamily")
            .field("name", &self.name)
            .field("limit", &self.limit)
            .field("worst_index", &self.worst_index)
            .finish_non_exhaustive()
    }
}

impl DiscreteFamily {
    pub fn new(
        name: impl Into<String>,
        limit: DiscretePmf,
        member: impl Fn(u64) -> Result<DiscretePmf> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            limit,
            member: Arc::new(member),
            worst_index: None,
            limit_entropy: None,
        }
    }

    /// Every member equals the limit.
    pub fn constant(name: impl Into<String>, limit: DiscretePmf) -> Self {
        let l = limit.clone();
        Self::new(name, limit, move |_| Ok(l.clone()))
    }

    pub fn with_worst_index(mut self, i: u64) -> Self {
        self.worst_index = Some(i);
        self
    }

    pub fn with_limit_entropy(mut self, h: f64) -> Self {
        self.limit_entropy = Some(h);
        self
    }

    pub fn member(&self, n: u64) -> Result<DiscretePmf> {
        if n == 0 {
            return Err(Error::Argument("family index n must be at least 1".into()));
        }
        (self.member)(n)
    }

    /// Indices probed for coordinatewise gaps and ratio sups.
    pub fn probe_indices(&self, eps: f64) -> Result<Vec<u64>> {
        let cutoff = self.limit.truncation(eps)?.cutoff.max(1);
        let mut idx: Vec<u64> = (1..=cutoff).collect();
        if let Some(w) = self.worst_index {
            if w > cutoff {
                idx.push(w);
            }
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub n: u64,
    pub coordinate_gap: f64,
    pub variation: f64,
    pub probed: u64,
    pub tail_mass: f64,
    /// `variation <= gap * probed + tail masses`.
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub family: String,
    pub threshold: f64,
    pub rows: Vec<EquivalenceRow>,
    /// Both columns fall below the threshold together at the final n, or neither does.
    pub consistent: bool,
    pub both_decrease: bool,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coordinatewise diagnostic: {}", self.family)?;
        writeln!(f, "{:>8} {:>14} {:>14} {:>6}", "n", "coord_gap", "variation", "bound")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>8} {:>14.6e} {:>14.6e} {:>6}",
                r.n, r.coordinate_gap, r.variation, r.bound_holds
            )?;
        }
        writeln!(f, "consistent: {}  decreasing: {}", self.consistent, self.both_decrease)
    }
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + 1e-15)
}

/// Coordinatewise gaps against variation distance along the family.
pub fn equivalence_diagnostic(
    family: &DiscreteFamily,
    n_list: &[u64],
    eps: f64,
    threshold: f64,
) -> Result<EquivalenceReport> {
    if n_list.is_empty() {
        return Err(Error::Argument("empty n-list".into()));
    }
    let idx = family.probe_indices(eps)?;
    let probed = idx.len() as u64;
    let k = *idx.iter().max().unwrap();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let m = family.member(n)?;
        check_alphabets(&m, &family.limit)?;
        let gap = idx
            .iter()
            .map(|&i| (m.prob(i) - family.limit.prob(i)).abs())
            .fold(0.0, f64::max);
        let v = discrete_variation(&m, &family.limit, eps)?;
        let tails = m.tail_mass(k) + family.limit.tail_mass(k);
        rows.push(EquivalenceRow {
            n,
            coordinate_gap: gap,
            variation: v.value,
            probed,
            tail_mass: tails,
            bound_holds: v.value <= gap * probed as f64 + tails + v.error_estimate + eps,
        });
    }
    let last = rows.last().unwrap();
    let consistent = (last.coordinate_gap < threshold) == (last.variation < threshold);
    let gaps: Vec<f64> = rows.iter().map(|r| r.coordinate_gap).collect();
    let vars: Vec<f64> = rows.iter().map(|r| r.variation).collect();
    Ok(EquivalenceReport {
        family: family.name.clone(),
        threshold,
        both_decrease: nonincreasing(&gaps) && nonincreasing(&vars),
        rows,
        consistent,
    })
}

/// `(sup_i p_i / q_i, arg)` over the probe indices and, for geometric tails,
/// the closed-form sup over the rest.
pub(crate) fn ratio_sup(p: &DiscretePmf, q: &DiscretePmf, idx: &[u64]) -> f64 {
    let mut sup: f64 = 0.0;
    let mut last = 0;
    for &i in idx {
        let (a, b) = (p.prob(i), q.prob(i));
        last = last.max(i);
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        sup = sup.max(a / b);
    }
    let n = last.max(p.explicit_len()).max(q.explicit_len());
    for i in (last + 1)..=n {
        let (a, b) = (p.prob(i), q.prob(i));
        if a > 0.0 {
            sup = sup.max(if b == 0.0 { f64::INFINITY } else { a / b });
        }
    }
    if let (Some(tp), Some(tq)) = (p.tail(), q.tail()) {
        let (a, b) = (tp.at(n + 1), tq.at(n + 1));
        if tp.ratio > tq.ratio {
            return f64::INFINITY;
        }
        if a > 0.0 {
            sup = sup.max(a / b);
        }
    } else if p.tail().is_some() {
        return f64::INFINITY;
    }
    sup
}

/// Finiteness verdict helper for summed quantities.
pub(crate) fn is_finite_value(v: &MeasureValue) -> bool {
    v.verdict == Finiteness::Finite && v.value.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = DEFAULT_EPS;

    /// Partial sums of `i 2^-i` with the analytic remainder `(N + 2) 2^-N`.
    fn geometric_half_entropy_oracle(n: u32) -> f64 {
        let partial: f64 = (1..=n).map(|i| i as f64 * 0.5f64.powi(i as i32)).sum();
        partial + (n as f64 + 2.0) * 0.5f64.powi(n as i32)
    }

    #[test]
    fn entropy_examples() {
        let b = DiscretePmf::bernoulli(0.5).unwrap();
        assert_eq!(discrete_entropy(&b, EPS).unwrap().value, 1.0);
        let u = DiscretePmf::finite(vec![0.25; 4]).unwrap();
        assert_eq!(discrete_entropy(&u, EPS).unwrap().value, 2.0);
        let g = DiscretePmf::geometric(0.5).unwrap();
        let h = discrete_entropy(&g, EPS).unwrap().value;
        assert!((h - 2.0).abs() < 1e-10);
        assert!((h - geometric_half_entropy_oracle(60)).abs() < 1e-10);
    }

    #[test]
    fn kl_examples() {
        let a = DiscretePmf::bernoulli(0.5).unwrap();
        let b = DiscretePmf::bernoulli(0.25).unwrap();
        let k = discrete_kl(&a, &b, EPS).unwrap().value;
        assert!((k - (0.5 + 0.5 * (2.0f64 / 3.0).log2())).abs() < 1e-15);
        assert!((k - 0.207519).abs() < 1e-6);
        assert_eq!(discrete_kl(&a, &a, EPS).unwrap().value, 0.0);
    }

    #[test]
    fn geometric_kl_matches_partial_sums() {
        let p = DiscretePmf::geometric(0.5).unwrap();
        let q = DiscretePmf::geometric(1.0 / 3.0).unwrap();
        let oracle: f64 = (1..200)
            .map(|i| {
                let a = 0.5f64.powi(i);
                let b = (1.0 / 3.0) * (2.0f64 / 3.0).powi(i - 1);
                a * (a / b).log2()
            })
            .sum();
        let k = discrete_kl(&p, &q, EPS).unwrap().value;
        assert!((k - oracle).abs() < 1e-12, "{k} vs {oracle}");
        assert!((k - 0.1699250014423124).abs() < 1e-12);
    }

    #[test]
    fn kl_domination_error_names_index() {
        let p = DiscretePmf::finite(vec![0.5, 0.5, 0.0]).unwrap();
        let q = DiscretePmf::finite(vec![1.0, 0.0, 0.0]).unwrap();
        match discrete_kl(&p, &q, EPS) {
            Err(Error::Domination(msg)) => assert!(msg.contains("p_2")),
            other => panic!("{other:?}"),
        }
        let g = DiscretePmf::geometric(0.5).unwrap();
        assert!(matches!(discrete_kl(&g, &q, EPS), Err(Error::Domination(_))));
    }

    #[test]
    fn variation_examples() {
        let a = DiscretePmf::bernoulli(0.5).unwrap();
        let b = DiscretePmf::bernoulli(0.25).unwrap();
        assert_eq!(discrete_variation(&a, &b, EPS).unwrap().value, 0.5);
        assert_eq!(discrete_variation(&a, &a, EPS).unwrap().value, 0.0);
        let x1 = DiscretePmf::point_mass(3, 1).unwrap();
        let x2 = DiscretePmf::point_mass(3, 3).unwrap();
        assert_eq!(discrete_variation(&x1, &x2, EPS).unwrap().value, 2.0);
    }

    #[test]
    fn alphabet_mismatch_is_reported() {
        let a = DiscretePmf::bernoulli(0.5).unwrap();
        let b = DiscretePmf::finite(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(discrete_variation(&a, &b, EPS), Err(Error::AlphabetMismatch(_))));
        let l1 = DiscretePmf::from_sparse(vec![(3, 0.5), (9, 0.5)]).unwrap();
        let l2 = DiscretePmf::from_sparse(vec![(3, 0.5), (7, 0.5)]).unwrap();
        assert!(matches!(discrete_kl(&l1, &l2, EPS), Err(Error::AlphabetMismatch(_))));
        assert_eq!(l1.labels().unwrap(), ["3", "9"]);
    }

    #[test]
    fn construction_rejects_bad_pmfs() {
        assert!(DiscretePmf::finite(vec![0.5, 0.6]).is_err());
        assert!(DiscretePmf::finite(vec![1.5, -0.5]).is_err());
        assert!(DiscretePmf::finite(vec![]).is_err());
        assert!(DiscretePmf::with_geometric_tail(vec![0.5], 0.25, 1.0).is_err());
        assert!(DiscretePmf::with_geometric_tail(vec![0.5], 0.25, 0.5).is_ok());
        assert!(DiscretePmf::geometric(0.0).is_err());
    }

    #[test]
    fn truncation_plan_is_sound() {
        let g = DiscretePmf::geometric(0.5).unwrap();
        let plan = g.truncation(1e-6).unwrap();
        assert!(plan.tail_mass <= 1e-6 / 4.0);
        let exact: f64 = ((plan.cutoff + 1)..400)
            .map(|i| -xlog2x(g.prob(i)))
            .sum();
        assert!(plan.tail_entropy_bound >= exact - 1e-15);
        assert!((plan.tail_entropy_bound - exact).abs() < 1e-14);
        // tail mass is nonincreasing and vanishes
        let masses: Vec<f64> = (0..80).map(|n| g.tail_mass(n)).collect();
        assert!(masses.windows(2).all(|w| w[1] <= w[0]));
        assert!(masses[79] < 1e-20);
    }

    #[test]
    fn log_probabilities_are_unbounded_below_on_infinite_alphabets() {
        for q in [0.5, 0.3, 0.7] {
            let g = DiscretePmf::geometric(q).unwrap();
            let eventually = (1..200u64).filter(|&n| g.prob(n).log2() > -(n as f64).log2()).max();
            let n0 = eventually.unwrap_or(0) + 1;
            assert!(n0 < 200);
            for n in n0..400 {
                assert!(g.prob(n).log2() <= -(n as f64).log2());
            }
        }
    }

    #[test]
    fn bernoulli_drift_equivalence() {
        // p = 1/2 + 1/n is valid for n >= 3: coordinate gap 1/n, variation 2/n
        let fam = DiscreteFamily::new("bernoulli", DiscretePmf::bernoulli(0.5).unwrap(), |n| {
            DiscretePmf::bernoulli(0.5 + 1.0 / n as f64)
        });
        let rep = equivalence_diagnostic(&fam, &[3, 10, 100, 10_000], EPS, 1e-3).unwrap();
        for r in &rep.rows {
            assert!((r.coordinate_gap - 1.0 / r.n as f64).abs() < 1e-15);
            assert!((r.variation - 2.0 / r.n as f64).abs() < 1e-15);
            assert!(r.bound_holds);
        }
        assert!(rep.consistent && rep.both_decrease);
    }

    #[test]
    fn constant_family_has_zero_gaps() {
        let fam = DiscreteFamily::constant("c", DiscretePmf::geometric(0.5).unwrap());
        let rep = equivalence_diagnostic(&fam, &[1, 2, 3], EPS, 1e-3).unwrap();
        assert!(rep.rows.iter().all(|r| r.coordinate_gap == 0.0 && r.variation == 0.0));
    }

    #[test]
    fn ratio_sup_detects_heavier_tails() {
        let p = DiscretePmf::geometric(0.4).unwrap();
        let q = DiscretePmf::geometric(0.5).unwrap();
        assert_eq!(ratio_sup(&p, &q, &[1, 2, 3]), f64::INFINITY);
        let r = ratio_sup(&q, &p, &[1, 2, 3]);
        assert!((r - 1.25).abs() < 1e-15);
    }

    #[test]
    fn discrete_kolmogorov_example() {
        let a = DiscretePmf::finite(vec![0.5, 0.25, 0.25]).unwrap();
        let b = DiscretePmf::finite(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(discrete_kolmogorov(&a, &b, EPS).unwrap().value, 0.25);
    }
}
