//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; the `*_json` functions hold the logic so they also run natively.

use entconv::certifier::CertifyOptions;
use entconv::measures::{kl_divergence, kolmogorov_distance, variation_distance, MeasureOptions};
use entconv::scenarios::scenario;
use entconv::sweep::{self, QuantitySet, SweepRecord};
use entconv::Density;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a single click well under a second in the browser.
pub const MAX_DEMO_N: u32 = 256;
pub const MAX_CELLS: usize = 64;

#[derive(Debug, Serialize)]
pub struct CounterexampleRow {
    pub n: u64,
    pub entropy: f64,
    pub kl: f64,
    pub variation: f64,
    pub kolmogorov: f64,
    pub kolmogorov_bound: f64,
}

#[derive(Debug, Serialize)]
pub struct PinskerReport {
    pub kl: f64,
    pub variation: f64,
    pub kolmogorov: f64,
    pub pinsker_bound: f64,
    pub holds: bool,
}

fn check_n(n_max: u32) -> Result<Vec<u64>, String> {
    if n_max == 0 || n_max > MAX_DEMO_N {
        return Err(format!("n must lie in 1..={MAX_DEMO_N}, got {n_max}"));
    }
    Ok((1..=n_max as u64).collect())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Spike family for n = 1..=n_max: all four measures against the uniform limit.
pub fn counterexample_json(n_max: u32) -> Result<String, String> {
    let ns = check_n(n_max)?;
    let s = scenario("counterexample").map_err(|e| e.to_string())?;
    let rows = sweep::sweep(&s, &ns, QuantitySet::all(), &CertifyOptions::default()).map_err(|e| e.to_string())?;
    let rows: Vec<CounterexampleRow> = rows
        .into_iter()
        .map(|r| {
            let nf = r.n as f64;
            CounterexampleRow {
                n: r.n,
                entropy: r.entropy.unwrap_or(f64::NAN),
                kl: r.kl.unwrap_or(f64::NAN),
                variation: r.variation.unwrap_or(f64::NAN),
                kolmogorov: r.kolmogorov.unwrap_or(f64::NAN),
                kolmogorov_bound: (1.0 - 1.0 / (nf * nf)) / nf,
            }
        })
        .collect();
    to_json(&rows)
}

/// Two-cell family for n = 1..=n_max with the variation-route bounds.
pub fn two_cell_bounds_json(n_max: u32) -> Result<String, String> {
    let ns = check_n(n_max)?;
    let s = scenario("two-cell").map_err(|e| e.to_string())?;
    let rows: Vec<SweepRecord> =
        sweep::sweep(&s, &ns, QuantitySet::all(), &CertifyOptions::default()).map_err(|e| e.to_string())?;
    to_json(&rows)
}

fn equal_cells(weights: &[f64]) -> Result<Density, String> {
    let k = weights.len();
    if k == 0 || k > MAX_CELLS {
        return Err(format!("need 1..={MAX_CELLS} cell weights, got {k}"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err("cell weights must be finite and nonnegative".into());
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err("cell weights must not all be zero".into());
    }
    let bps = (0..=k).map(|i| i as f64 / k as f64).collect();
    Density::piecewise_constant(bps, weights.iter().map(|w| w * k as f64 / total).collect()).map_err(|e| e.to_string())
}

/// Two step densities on `[0, 1]` from unnormalized equal-width cell weights.
pub fn pinsker_json(p_weights: &[f64], q_weights: &[f64]) -> Result<String, String> {
    let (p, q) = (equal_cells(p_weights)?, equal_cells(q_weights)?);
    let o = MeasureOptions::default();
    let kl = kl_divergence(&p, &q, &o).map_err(|e| e.to_string())?.value;
    let variation = variation_distance(&p, &q, &o).map_err(|e| e.to_string())?.value;
    let kolmogorov = kolmogorov_distance(&p, &q, &o).map_err(|e| e.to_string())?.value;
    let pinsker_bound = (2.0 * kl).sqrt();
    to_json(&PinskerReport {
        kl,
        variation,
        kolmogorov,
        pinsker_bound,
        holds: variation <= pinsker_bound + 1e-12,
    })
}

#[wasm_bindgen]
pub fn counterexample(n_max: u32) -> Result<String, JsError> {
    counterexample_json(n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn two_cell_bounds(n_max: u32) -> Result<String, JsError> {
    two_cell_bounds_json(n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn pinsker(p_weights: Vec<f64>, q_weights: Vec<f64>) -> Result<String, JsError> {
    pinsker_json(&p_weights, &q_weights).map_err(|e| JsError::new(&e))
}
