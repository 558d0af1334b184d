//! TOML run configuration and scenario resolution.

use std::path::Path;

use entconv::scenarios::{self, build_discrete_families, DiscreteParams, DISCRETE_FAMILIES, SCENARIO_NAMES};
use entconv::{Density, DiscretePmf, Error, Scenario, ScenarioFamily};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Seed for the quasi-random probe points.
    pub seed: Option<u64>,
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
}

/// Either a registered name (with optional discrete parameters), an inline
/// piecewise-constant pair, or an inline PMF pair.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub p: Option<f64>,
    pub symbols: Option<usize>,
    pub breakpoints: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    pub reference: Option<StepConfig>,
    pub pmf: Option<PmfConfig>,
    pub reference_pmf: Option<PmfConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PmfConfig {
    Explicit { probs: Vec<f64> },
    Geometric { p: f64 },
    ZetaTruncated { s: f64, support: usize },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: Option<f64>,
    pub threshold: Option<f64>,
    pub divergence_cap: Option<f64>,
    pub probes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_range: Option<String>,
    pub quantities: Option<Vec<String>>,
    pub format: Option<String>,
    pub out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub theorem: Option<String>,
    pub n: Option<Vec<u64>>,
    pub format: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

fn pmf(c: &PmfConfig) -> entconv::Result<DiscretePmf> {
    match c {
        PmfConfig::Explicit { probs } => DiscretePmf::finite(probs.clone()),
        PmfConfig::Geometric { p } => DiscretePmf::geometric(*p),
        PmfConfig::ZetaTruncated { s, support } => DiscretePmf::zeta_truncated(*s, *support),
    }
}

fn unknown() -> Error {
    Error::Config(format!(
        "no scenario given; pass --scenario or a [scenario] section. available: {}",
        SCENARIO_NAMES.join(", ")
    ))
}

/// The flag wins over the config file.
pub fn resolve_scenario(flag: Option<&str>, cfg: Option<&ScenarioConfig>) -> entconv::Result<Scenario> {
    let empty = ScenarioConfig::default();
    let sc = cfg.unwrap_or(&empty);
    if let Some(name) = flag.or(sc.name.as_deref()) {
        if DISCRETE_FAMILIES.contains(&name) && (sc.p.is_some() || sc.symbols.is_some()) {
            let d = DiscreteParams::default();
            let params = DiscreteParams {
                p: sc.p.unwrap_or(d.p),
                symbols: sc.symbols.unwrap_or(d.symbols),
            };
            // closed forms are registered for the default parameters only
            return Ok(Scenario {
                name: name.to_string(),
                family: ScenarioFamily::Discrete(build_discrete_families(name, params)?),
                golden: Vec::new(),
                tolerance: 0.0,
            });
        }
        return scenarios::scenario(name);
    }
    match (&sc.breakpoints, &sc.values, &sc.pmf) {
        (Some(b), Some(v), None) => {
            let density = Density::piecewise_constant(b.clone(), v.clone())?;
            let reference = match &sc.reference {
                Some(r) => Density::piecewise_constant(r.breakpoints.clone(), r.values.clone())?,
                None => {
                    let (lo, hi) = (b[0], b[b.len() - 1]);
                    Density::uniform(lo, hi)?
                }
            };
            Ok(Scenario::inline_continuous(density, reference))
        }
        (None, None, Some(p)) => {
            let reference = sc
                .reference_pmf
                .as_ref()
                .ok_or_else(|| Error::Config("inline pmf needs a reference_pmf".into()))?;
            Ok(Scenario::inline_discrete(pmf(p)?, pmf(reference)?))
        }
        (None, None, None) => Err(unknown()),
        _ => Err(Error::Config(
            "inline scenario needs either breakpoints and values, or pmf and reference_pmf".into(),
        )),
    }
}

/// Inclusive range `a..b` (or `a..=b`).
pub fn parse_range(s: &str) -> Result<Vec<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("n range must look like a..b, got '{s}'"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad n range bound '{t}'"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || a > b {
        return Err(format!("n range must satisfy 1 <= a <= b, got {a}..{b}"));
    }
    Ok((a..=b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_range("3..=3").unwrap(), vec![3]);
        assert!(parse_range("4..1").is_err());
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("12").is_err());
    }

    #[test]
    fn inline_step_pair_parses() {
        let cfg: Config = toml::from_str(
            "seed = 3\n[scenario]\nbreakpoints = [0.0, 0.5, 1.0]\nvalues = [1.5, 0.5]\n",
        )
        .unwrap();
        let s = resolve_scenario(None, cfg.scenario.as_ref()).unwrap();
        assert!(matches!(s.family, ScenarioFamily::Continuous(_)));
        assert_eq!(cfg.seed, Some(3));
    }

    #[test]
    fn inline_pmf_pair_parses() {
        let cfg: Config = toml::from_str(
            "[scenario]\npmf = { kind = \"geometric\", p = 0.5 }\nreference_pmf = { kind = \"explicit\", probs = [0.5, 0.25, 0.25] }\n",
        )
        .unwrap();
        assert!(resolve_scenario(None, cfg.scenario.as_ref()).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[scenario]\nnmae = \"x\"\n").is_err());
    }

    #[test]
    fn missing_scenario_lists_names() {
        let e = resolve_scenario(None, None).unwrap_err().to_string();
        assert!(e.contains("two-cell"));
    }

    #[test]
    fn discrete_params_override_defaults() {
        let sc = ScenarioConfig {
            name: Some("geometric-drift".into()),
            p: Some(0.4),
            ..Default::default()
        };
        let s = resolve_scenario(None, Some(&sc)).unwrap();
        assert!(s.golden.is_empty());
    }
}
