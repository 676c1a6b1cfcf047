//! JSON and OpenQASM-style text emission.

use serde_json::{json, Value};

use super::{Circuit, Gate, GateKind};

fn matrix_json(m: &crate::matrixkit::ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|r| Value::Array((0..m.cols()).map(|c| json!([m[(r, c)].re, m[(r, c)].im])).collect()))
        .collect();
    Value::Array(rows)
}

fn gate_json(g: &Gate) -> Value {
    match g {
        Gate::Apply { kind, controls, targets } => {
            let params = match kind {
                GateKind::X => json!({}),
                GateKind::Ry(theta) => json!({ "angle": theta }),
                GateKind::Unitary { matrix, label } => json!({ "label": label, "matrix": matrix_json(matrix) }),
            };
            let kind = match kind {
                GateKind::X => "x",
                GateKind::Ry(_) => "ry",
                GateKind::Unitary { .. } => "unitary",
            };
            json!({
                "kind": kind,
                "controls": controls.iter().map(|&(q, p)| json!([q, p as u8])).collect::<Vec<_>>(),
                "targets": targets,
                "params": params,
            })
        }
        Gate::MeasureNonSelective(q) => json!({
            "kind": "measure_nonsel", "controls": [], "targets": [q], "params": {}
        }),
        Gate::Reset(q) => json!({ "kind": "reset", "controls": [], "targets": [q], "params": {} }),
    }
}

/// Register manifest plus the ordered gate list.
pub fn to_json(c: &Circuit) -> Value {
    let registers: serde_json::Map<String, Value> = c
        .registers
        .iter()
        .map(|r| (r.name.clone(), json!(r.qubits)))
        .collect();
    json!({
        "n_qubits": c.n_qubits,
        "registers": registers,
        "gates": c.gates.iter().map(gate_json).collect::<Vec<_>>(),
    })
}

/// Plain-text listing in OpenQASM 3 syntax. Custom unitaries and
/// multi-controls are left as named composite gates.
pub fn to_qasm(c: &Circuit) -> String {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    out.push_str(&format!("qubit[{}] q;\n", c.n_qubits));
    for r in &c.registers {
        let list: Vec<String> = r.qubits.iter().map(|q| q.to_string()).collect();
        out.push_str(&format!("// {} = q[{{{}}}]\n", r.name, list.join(", ")));
    }
    for g in &c.gates {
        let line = match g {
            Gate::Apply { kind, controls, targets } => {
                let mut mods = String::new();
                for &(_, pol) in controls {
                    mods.push_str(if pol { "ctrl @ " } else { "negctrl @ " });
                }
                let name = match kind {
                    GateKind::Ry(theta) => format!("ry({theta})"),
                    other => other.name().to_string(),
                };
                let operands: Vec<String> = controls
                    .iter()
                    .map(|c| c.0)
                    .chain(targets.iter().copied())
                    .map(|q| format!("q[{q}]"))
                    .collect();
                format!("{mods}{name} {};", operands.join(", "))
            }
            Gate::MeasureNonSelective(q) => format!("// non-selective measurement\nmeasure q[{q}];"),
            Gate::Reset(q) => format!("reset q[{q}];"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_step, StepOrder};
    use crate::random::{random_chain, SeededRng};

    #[test]
    fn json_is_stable() {
        let chain = random_chain(&mut SeededRng::new(1), 2, 2, 0.6);
        let c = build_step(&chain, StepOrder::RightFirst);
        let a = to_json(&c).to_string();
        let b = to_json(&c.clone()).to_string();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["gates"].as_array().unwrap().len(), c.gates.len());
        assert_eq!(v["gates"][0]["kind"], "ry");
        assert_eq!(v["gates"][1]["kind"], "measure_nonsel");
    }

    #[test]
    fn qasm_mentions_every_gate() {
        let chain = random_chain(&mut SeededRng::new(2), 4, 2, 0.6);
        let c = build_step(&chain, StepOrder::RightFirst);
        let text = to_qasm(&c);
        assert!(text.starts_with("OPENQASM 3.0;"));
        assert!(text.contains("negctrl @"));
        assert!(text.contains("U0"));
    }
}
