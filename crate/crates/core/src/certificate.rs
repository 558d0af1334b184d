//! Certificate records produced by the theorem checks.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Thm1Equivalence,
    Thm2Variation,
    Thm3Pointwise,
    CorollaryCombined,
    DiscretePointwise,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Thm1Equivalence => "thm1-equivalence",
            Theorem::Thm2Variation => "thm2-variation",
            Theorem::Thm3Pointwise => "thm3-pointwise",
            Theorem::CorollaryCombined => "corollary-combined",
            Theorem::DiscretePointwise => "discrete-pointwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    HypothesisFailed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Holds,
    Fails,
    /// Trending the right way but not yet below threshold.
    Unconfirmed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
    pub diagnostic: String,
}

impl Hypothesis {
    pub fn new(name: &str, status: HypothesisStatus, diagnostic: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            status,
            diagnostic: diagnostic.into(),
        }
    }

    pub fn from_bool(name: &str, holds: bool, diagnostic: impl Into<String>) -> Self {
        let status = if holds {
            HypothesisStatus::Holds
        } else {
            HypothesisStatus::Fails
        };
        Self::new(name, status, diagnostic)
    }

    pub fn holds(&self) -> bool {
        self.status == HypothesisStatus::Holds
    }
}

/// One inequality `lhs <= rhs` checked at a given n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    /// `lhs <= rhs + slack`.
    pub fn at_most(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs + slack,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertificateRow {
    pub n: u64,
    pub entropy: f64,
    pub entropy_gap: f64,
    pub kl: f64,
    pub variation: f64,
    pub kolmogorov: Option<f64>,
    pub coordinate_gap: Option<f64>,
    pub ratio_deviation: Option<f64>,
    pub bound_af3: Option<f64>,
    pub bound_af4: Option<f64>,
    pub checks: Vec<Check>,
}

/// How the compared columns behave at the final n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Consistency {
    /// Every column is below threshold.
    CoVanishing,
    /// No column is below threshold.
    CoFailure,
    /// Some columns vanish and others do not.
    Split,
}

impl Consistency {
    pub fn from_flags(small: &[bool]) -> Self {
        if small.iter().all(|&s| s) {
            Consistency::CoVanishing
        } else if small.iter().all(|&s| !s) {
            Consistency::CoFailure
        } else {
            Consistency::Split
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub family: String,
    pub threshold: f64,
    pub constants: BTreeMap<String, f64>,
    pub hypotheses: Vec<Hypothesis>,
    pub rows: Vec<CertificateRow>,
    pub consistency: Consistency,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(Hypothesis::holds)
    }

    pub fn checks_hold(&self) -> bool {
        self.rows.iter().flat_map(|r| &r.checks).all(|c| c.holds)
    }

    pub fn last(&self) -> Option<&CertificateRow> {
        self.rows.last()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theorem: {}", self.theorem.name())?;
        writeln!(f, "family: {}", self.family)?;
        writeln!(f, "threshold: {:e}", self.threshold)?;
        if !self.constants.is_empty() {
            writeln!(f, "constants:")?;
            for (k, v) in &self.constants {
                writeln!(f, "  {k} = {v}")?;
            }
        }
        writeln!(f, "hypotheses:")?;
        for h in &self.hypotheses {
            let s = match h.status {
                HypothesisStatus::Holds => "holds",
                HypothesisStatus::Fails => "FAILS",
                HypothesisStatus::Unconfirmed => "unconfirmed",
            };
            writeln!(f, "  [{s}] {}: {}", h.name, h.diagnostic)?;
        }
        writeln!(
            f,
            "{:>8} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>6}",
            "n", "entropy_gap", "kl", "variation", "kolmogorov", "bound_af3", "bound_af4", "checks"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14} {:>14} {:>14} {:>6}",
                r.n,
                r.entropy_gap,
                r.kl,
                r.variation,
                opt(r.kolmogorov),
                opt(r.bound_af3),
                opt(r.bound_af4),
                if r.checks.iter().all(|c| c.holds) { "ok" } else { "FAIL" }
            )?;
        }
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        let c = match self.consistency {
            Consistency::CoVanishing => "co-vanishing",
            Consistency::CoFailure => "co-failure",
            Consistency::Split => "split",
        };
        writeln!(f, "consistency: {c}")?;
        let v = match self.verdict {
            Verdict::Certified => "certified",
            Verdict::HypothesisFailed => "hypothesis-failed",
            Verdict::Inconclusive => "inconclusive",
        };
        writeln!(f, "verdict: {v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistency_from_flags() {
        assert_eq!(Consistency::from_flags(&[true, true]), Consistency::CoVanishing);
        assert_eq!(Consistency::from_flags(&[false, false]), Consistency::CoFailure);
        assert_eq!(Consistency::from_flags(&[true, false]), Consistency::Split);
    }

    #[test]
    fn checks_carry_slack() {
        assert!(Check::at_most("x", 1.0, 1.0, 0.0).holds);
        assert!(Check::at_most("x", 1.0 + 1e-12, 1.0, 1e-9).holds);
        assert!(!Check::at_most("x", 1.1, 1.0, 1e-9).holds);
    }
}
