//! Deterministic artifact writers: 9-significant-digit CSV and sorted-key
//! JSON, so identical configs produce byte-identical files.

use kecon::{Equilibrium, FirmKind, Occupation};
use serde_json::{json, Map, Value};
use std::fs;
use std::path::Path;

/// Formats with 9 significant digits, `.` decimal separator, no locale.
pub fn fmt_sig(x: f64) -> String {
    const SIG: usize = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= SIG as i32 {
        format!("{:.*e}", SIG - 1, x)
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

pub fn json_num(x: f64) -> Value {
    // serde_json prints f64 with shortest round-trip formatting; good enough
    // and deterministic
    json!(x)
}

pub fn json_opt(x: Option<f64>) -> Value {
    match x {
        Some(v) => json_num(v),
        None => Value::Null,
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| format!("creating {}: {e}", parent.display()))?;
    }
    fs::write(path, contents).map_err(|e| format!("writing {}: {e}", path.display()))
}

/// Key boundaries of an equilibrium partition for `summary.json`.
pub fn breakpoints_json(eq: &Equilibrium) -> Value {
    let mut map = Map::new();
    map.insert("W_end".into(), json_opt(eq.partition.sup_workers()));
    map.insert("S_start".into(), json_opt(eq.partition.inf_solvers()));
    for (key, occ, end) in [
        ("Wa_end", Occupation::AiAssistedWorker, true),
        ("Wp_end", Occupation::HumanAssistedWorker, true),
        ("I_start", Occupation::IndependentProducer, false),
        ("I_end", Occupation::IndependentProducer, true),
        ("Sp_start", Occupation::SolverOfHumans, false),
        ("Sa_start", Occupation::SolverOfAi, false),
    ] {
        if let Some((lo, hi)) = eq.partition.interval(occ) {
            map.insert(key.into(), json_num(if end { hi } else { lo }));
        }
    }
    Value::Object(map)
}

pub fn segments_json(eq: &Equilibrium) -> Value {
    Value::Array(
        eq.partition
            .segments()
            .iter()
            .map(|s| {
                json!({
                    "label": s.occupation.label(),
                    "from": json_num(s.lo),
                    "to": json_num(s.hi),
                })
            })
            .collect(),
    )
}

pub fn residuals_json(eq: &Equilibrium) -> Value {
    let mut map = Map::new();
    for (k, v) in &eq.residuals {
        map.insert(k.clone(), json_num(*v));
    }
    Value::Object(map)
}

pub fn firm_kind_json(kind: FirmKind) -> Value {
    match kind {
        FirmKind::SingleHuman { z } => json!({"kind": "single_human", "z": json_num(z)}),
        FirmKind::SingleAi => json!({"kind": "single_ai"}),
        FirmKind::TopAutomated { worker } => {
            json!({"kind": "top_automated", "worker": json_num(worker)})
        }
        FirmKind::BottomAutomated { solver } => {
            json!({"kind": "bottom_automated", "solver": json_num(solver)})
        }
        FirmKind::TwoLayerHuman { worker, solver } => {
            json!({"kind": "two_layer_human", "worker": json_num(worker), "solver": json_num(solver)})
        }
    }
}

/// The `wages.csv` body: one row per grid point with the occupation label and
/// the match column (m(z) on Wp, the AI knowledge level on Wa, else empty).
pub fn wages_csv(eq: &Equilibrium, grid_points: usize) -> String {
    let mut out = String::from("z,wage,occupation,match\n");
    let n = grid_points.max(2);
    for i in 0..n {
        let z = i as f64 / (n - 1) as f64;
        let occupation = eq.partition.label_at(z);
        let matched = match occupation {
            Occupation::HumanAssistedWorker => eq.matching.as_ref().map(|m| m.eval_clamped(z)),
            Occupation::AiAssistedWorker => Some(eq.params.z_ai()),
            _ => None,
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(z),
            fmt_sig(eq.wage_at(z)),
            occupation.label(),
            fmt_opt(matched)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1.00000000");
        assert_eq!(fmt_sig(0.425), "0.425000000");
        assert_eq!(fmt_sig(123456789.0), "123456789");
        assert_eq!(fmt_sig(1234567891.0), "1.23456789e9");
        assert_eq!(fmt_sig(1e-7), "1.00000000e-7");
        assert_eq!(fmt_sig(-0.5331140351), "-0.533114035");
    }
}
