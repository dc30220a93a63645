//! Browser bindings: each export returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use workbench::deligne::{lifts, lifts_parity, Catalogue, DObject};
use workbench::fusion::scalar_json;
use workbench::gring::GRing;
use workbench::modular;
use workbench::qmodules::WeightModule;
use workbench::qseries;
use workbench::scalars::{conductor_for, conductor_scope, fmt_q, parse_q, CycScalar};

fn err(msg: impl std::fmt::Display) -> String {
    json!({"error": msg.to_string()}).to_string()
}

fn check_p(p: u32) -> Result<(), String> {
    if (2..=7).contains(&p) {
        Ok(())
    } else {
        Err(err(format!("p must lie in 2..=7, got {p}")))
    }
}

/// Atypical Hopf-link matrix on the ring generators, from the R-matrix,
/// with the closed form compared entrywise.
#[wasm_bindgen]
pub fn hopf_table(p: u32) -> String {
    if let Err(e) = check_p(p) {
        return e;
    }
    let g = GRing::new(p);
    let _s = conductor_scope(2 * p);
    let n = g.len();
    let mut rows = Vec::with_capacity(n);
    let mut agree = true;
    for a in 0..n {
        let (c1, i, k) = modular::generator(&g, a);
        let mut row = Vec::with_capacity(n);
        for b in 0..n {
            let (c2, j, l) = modular::generator(&g, b);
            let x = modular::atypical_hopf_first_principles(c1, i, k, c2, j, l, p);
            agree &= x == modular::atypical_hopf_closed_form(c1, i, k, c2, j, l, p);
            row.push(scalar_json(&x));
        }
        rows.push(Value::Array(row));
    }
    let basis: Vec<Value> = (0..n)
        .map(|k| {
            let (c, i, l) = g.display(&g.basis[k]);
            json!([c, i, l])
        })
        .collect();
    json!({"p": p, "basis": basis, "matrix": rows, "paths_agree": agree}).to_string()
}

/// Does F_c ⊠ V_α lift? Monodromy against the parity formula.
#[wasm_bindgen]
pub fn lift_check(p: u32, c: &str, alpha: &str) -> String {
    if let Err(e) = check_p(p) {
        return e;
    }
    let (Some(c), Some(a)) = (parse_q(c), parse_q(alpha)) else {
        return err("charges must be rationals like 1/2 or -3");
    };
    if *c.denom() > 12.into() || *a.denom() > 12.into() {
        return err("denominators above 12 are not supported in the demo");
    }
    let _g = conductor_scope(conductor_for(p, &[a.clone(), c.clone()]));
    let d = DObject::new(c.clone(), WeightModule::<CycScalar>::typical(&a, p));
    match lifts(&d) {
        Ok((l, s)) => json!({
            "p": p,
            "c": fmt_q(&c),
            "alpha": fmt_q(&a),
            "lifts": l,
            "parity": lifts_parity(&Catalogue::V(a.clone()), &c, p),
            "monodromy": scalar_json(&s),
        })
        .to_string(),
        Err(e) => err(e),
    }
}

/// The product character to order q^order, as dump lines.
#[wasm_bindgen]
pub fn series_dump(p: u32, order: u32) -> String {
    if let Err(e) = check_p(p) {
        return e;
    }
    if !(1..=16).contains(&order) {
        return err("order must lie in 1..=16");
    }
    match qseries::char_bp_product(p, &workbench::scalars::qi(order as i64)) {
        Ok(ch) => json!({"p": p, "order": order, "dump": ch.dump()}).to_string(),
        Err(e) => err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_return_json() {
        let v: Value = serde_json::from_str(&hopf_table(3)).unwrap();
        assert_eq!(v["paths_agree"], true);
        assert_eq!(v["matrix"].as_array().unwrap().len(), 3);
        let v: Value = serde_json::from_str(&lift_check(2, "1/2", "1/2")).unwrap();
        assert_eq!(v["lifts"], true);
        assert_eq!(v["parity"], true);
        let v: Value = serde_json::from_str(&series_dump(3, 3)).unwrap();
        assert!(v["dump"].as_str().unwrap().contains("q^{0} x^{0} : 1"));
        assert!(serde_json::from_str::<Value>(&hopf_table(1)).unwrap()["error"].is_string());
    }
}
