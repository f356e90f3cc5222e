//! Line-oriented circuit format.
//!
//! ```text
//! # comments start with '#'
//! qubits 3          # optional; inferred from the largest operand otherwise
//! clbits 2          # optional; inferred from the largest measure target
//! h 0
//! cx 0 1
//! rz 0.7853981633974483 2
//! mcx 0 1 2         # controls first, target last
//! measure 0 -> 0
//! ```
//!
//! Parameterized gates (`rx ry rz p cp`) take the angle in radians before the
//! operands. Opaque unitaries cannot be written in this format.

use super::{Circuit, CircuitError, Gate, GateKind};

struct Line {
    number: usize,
    gate: Gate,
}

fn parse_err(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, msg: msg.into() }
}

fn parse_index(line: usize, tok: &str) -> Result<usize, CircuitError> {
    tok.parse().map_err(|_| parse_err(line, format!("expected an index, found `{tok}`")))
}

pub fn parse_circuit(src: &str) -> Result<Circuit, CircuitError> {
    let mut declared_qubits = None;
    let mut declared_clbits = None;
    let mut lines = Vec::new();

    for (i, raw) in src.lines().enumerate() {
        let number = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks[0] {
            "qubits" | "clbits" => {
                if toks.len() != 2 {
                    return Err(parse_err(number, format!("`{}` takes one count", toks[0])));
                }
                let n = parse_index(number, toks[1])?;
                if toks[0] == "qubits" {
                    declared_qubits = Some(n);
                } else {
                    declared_clbits = Some(n);
                }
                continue;
            }
            _ => {}
        }
        let kind: GateKind = toks[0].parse().map_err(|_| parse_err(number, format!("unknown gate `{}`", toks[0])))?;
        let gate = match kind {
            GateKind::Measure => {
                let (q, c) = match toks.as_slice() {
                    [_, q, "->", c] => (q, c),
                    [_, q, c] => (q, c),
                    _ => return Err(parse_err(number, "expected `measure <qubit> -> <clbit>`")),
                };
                Gate::measure(parse_index(number, q)?, parse_index(number, c)?)
            }
            GateKind::Unitary => {
                return Err(parse_err(number, "opaque unitaries are not expressible in text"))
            }
            _ => {
                let mut rest = &toks[1..];
                let angle = if kind.is_parameterized() {
                    let (first, tail) = rest
                        .split_first()
                        .ok_or_else(|| parse_err(number, format!("{kind} needs an angle")))?;
                    rest = tail;
                    Some(first.parse::<f64>().map_err(|_| {
                        parse_err(number, format!("expected an angle, found `{first}`"))
                    })?)
                } else {
                    None
                };
                let qubits =
                    rest.iter().map(|t| parse_index(number, t)).collect::<Result<Vec<_>, _>>()?;
                Gate::new(kind, qubits, angle).map_err(|e| parse_err(number, e.to_string()))?
            }
        };
        lines.push(Line { number, gate });
    }

    let num_qubits = declared_qubits.unwrap_or_else(|| {
        lines.iter().flat_map(|l| l.gate.qubits().iter().copied()).max().map_or(0, |m| m + 1)
    });
    let num_clbits = declared_clbits.unwrap_or_else(|| {
        lines.iter().filter_map(|l| l.gate.clbit()).max().map_or(0, |m| m + 1)
    });
    let mut circuit = Circuit::new(num_qubits, num_clbits);
    for Line { number, gate } in lines {
        circuit.push(gate).map_err(|e| parse_err(number, e.to_string()))?;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let c = parse_circuit(
            "# bell\nh 0\ncx 0 1\nrz 0.7853981633974483 2\nmeasure 0 -> 0\nmeasure 1 -> 1\n",
        )
        .unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.num_clbits(), 2);
        assert_eq!(c.len(), 5);
        assert_eq!(c.gates()[2].angle(), Some(std::f64::consts::FRAC_PI_4));
    }

    #[test]
    fn header_overrides_inference() {
        let c = parse_circuit("qubits 5\nclbits 1\nx 0\n").unwrap();
        assert_eq!(c.num_qubits(), 5);
        assert_eq!(c.num_clbits(), 1);
    }

    #[test]
    fn text_round_trip() {
        let src = "qubits 4\nclbits 2\nh 0\ncp 0.25 0 1\nmcx 0 1 2 3\nswap 2 3\nmeasure 3 -> 1\n";
        let c = parse_circuit(src).unwrap();
        assert_eq!(parse_circuit(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_circuit("h 0\n\ncx 0 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 3, .. }), "{err}");
        let err = parse_circuit("qubits 1\nx 3\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }), "{err}");
        assert!(parse_circuit("rz 0\n").is_err());
        assert!(parse_circuit("measure 0 0 0\n").is_err());
        assert!(parse_circuit("bogus 1\n").is_err());
    }
}
