use entconv_web::{counterexample_json, pinsker_json, two_cell_bounds_json, MAX_DEMO_N};
use serde_json::Value;

#[test]
fn counterexample_rows_match_closed_forms() {
    let rows: Vec<Value> = serde_json::from_str(&counterexample_json(8).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let n = r["n"].as_f64().unwrap();
        assert!((r["entropy"].as_f64().unwrap() + 2.0 * n.log2()).abs() < 1e-12);
        assert!(r["kolmogorov"].as_f64().unwrap() <= r["kolmogorov_bound"].as_f64().unwrap() * (1.0 + 1e-15));
    }
}

#[test]
fn two_cell_rows_carry_bounds() {
    let rows: Vec<Value> = serde_json::from_str(&two_cell_bounds_json(16).unwrap()).unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r["certified"] == true));
    assert!(rows.iter().all(|r| r["entropy_gap"].as_f64().unwrap() <= r["bound_af3"].as_f64().unwrap()));
}

#[test]
fn pinsker_report_on_a_simple_pair() {
    let v: Value = serde_json::from_str(&pinsker_json(&[3.0, 1.0], &[1.0, 1.0]).unwrap()).unwrap();
    assert!((v["variation"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(v["holds"], true);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(counterexample_json(0).is_err());
    assert!(two_cell_bounds_json(MAX_DEMO_N + 1).is_err());
    assert!(pinsker_json(&[], &[1.0]).is_err());
    assert!(pinsker_json(&[0.0, 0.0], &[1.0]).is_err());
    assert!(pinsker_json(&[-1.0, 2.0], &[1.0]).is_err());
    // q vanishes where p has mass
    assert!(pinsker_json(&[1.0, 1.0], &[1.0, 0.0]).is_err());
}
