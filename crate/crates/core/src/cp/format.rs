//! Line-oriented CP proof format:
//!
//! ```text
//! <idx>: <c_1> ... <c_n> >= <b> ; hyp <i> | bool <var> lo|hi | add <j> <k> | div <j> <d>
//! ```
//!
//! Line numbers and references are one-based. Blank lines and lines starting
//! with `#` are ignored.

use super::{BoundKind, Justification, LinearInequality, ProofLine};
use crate::error::{Error, Result};

pub fn parse_proof_lines(text: &str) -> Result<Vec<ProofLine>> {
    let mut lines = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let (idx, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(lineno, "expected `<idx>:`"))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad line index `{}`", idx.trim())))?;
        if idx != lines.len() + 1 {
            return Err(Error::parse(
                lineno,
                format!("line index {idx} out of sequence, expected {}", lines.len() + 1),
            ));
        }
        let (ineq, just) = rest
            .split_once(';')
            .ok_or_else(|| Error::parse(lineno, "expected `;` before the justification"))?;
        let (lhs, rhs) = ineq
            .split_once(">=")
            .ok_or_else(|| Error::parse(lineno, "expected `>=`"))?;
        let coeffs = lhs
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(lineno, "bad coefficient"))?;
        if *width.get_or_insert(coeffs.len()) != coeffs.len() {
            return Err(Error::parse(lineno, "coefficient count differs from earlier lines"));
        }
        let constant: i64 = rhs
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, "bad constant term"))?;
        let justification = parse_justification(just.trim()).map_err(|m| Error::parse(lineno, m))?;
        lines.push(ProofLine {
            inequality: LinearInequality::new(coeffs, constant),
            justification,
        });
    }
    Ok(lines)
}

fn parse_justification(s: &str) -> std::result::Result<Justification, String> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    let index = |t: &str| -> std::result::Result<usize, String> {
        match t.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(format!("bad reference `{t}`")),
        }
    };
    match toks.as_slice() {
        ["hyp", i] => Ok(Justification::Hypothesis(index(i)?)),
        ["bool", v, kind] => {
            let var = v.parse().map_err(|_| format!("bad variable `{v}`"))?;
            let kind = match *kind {
                "lo" => BoundKind::Lower,
                "hi" => BoundKind::Upper,
                k => return Err(format!("unknown bound kind `{k}`")),
            };
            Ok(Justification::BooleanAxiom { var, kind })
        }
        ["add", j, k] => Ok(Justification::Add(index(j)?, index(k)?)),
        ["div", j, d] => Ok(Justification::Div {
            line: index(j)?,
            divisor: d.parse().map_err(|_| format!("bad divisor `{d}`"))?,
        }),
        _ => Err(format!("unrecognized justification `{s}`")),
    }
}

pub fn write_proof_lines(lines: &[ProofLine]) -> String {
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let just = match l.justification {
            Justification::Hypothesis(r) => format!("hyp {}", r + 1),
            Justification::BooleanAxiom { var, kind } => format!(
                "bool {var} {}",
                match kind {
                    BoundKind::Lower => "lo",
                    BoundKind::Upper => "hi",
                }
            ),
            Justification::Add(j, k) => format!("add {} {}", j + 1, k + 1),
            Justification::Div { line, divisor } => format!("div {} {divisor}", line + 1),
        };
        out.push_str(&format!("{}: {} ; {just}\n", i + 1, l.inequality));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_contradiction_proof() {
        let text = "1: 1 >= 1 ; hyp 1\n# comment\n2: -1 >= 0 ; hyp 2\n3: 0 >= 1 ; add 1 2\n";
        let lines = parse_proof_lines(text).unwrap();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2].justification, Justification::Add(0, 1));
        assert_eq!(write_proof_lines(&lines), text.replace("# comment\n", ""));
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "2: 1 >= 1 ; hyp 1",
            "1: 1 >= 1",
            "1: 1 1 ; hyp 1",
            "1: 1 >= 1 ; mul 1 2",
            "1: 1 >= 1 ; hyp 0",
            "1: 1 >= 1 ; bool 1 mid",
            "1: 1 >= 1 ; hyp 1\n2: 1 1 >= 1 ; hyp 1",
        ] {
            assert!(matches!(parse_proof_lines(bad), Err(Error::Parse { .. })), "{bad}");
        }
    }

    fn arb_line(n: usize) -> impl Strategy<Value = ProofLine> {
        let just = prop_oneof![
            (0usize..5).prop_map(Justification::Hypothesis),
            (1u32..5, any::<bool>()).prop_map(|(var, hi)| Justification::BooleanAxiom {
                var,
                kind: if hi { BoundKind::Upper } else { BoundKind::Lower },
            }),
            (0usize..5, 0usize..5).prop_map(|(j, k)| Justification::Add(j, k)),
            (0usize..5, 1i64..9).prop_map(|(line, divisor)| Justification::Div { line, divisor }),
        ];
        (prop::collection::vec(-20i64..20, n), -50i64..50, just).prop_map(|(c, b, j)| ProofLine {
            inequality: LinearInequality::new(c, b),
            justification: j,
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(lines in (1usize..5).prop_flat_map(|n| prop::collection::vec(arb_line(n), 0..8))) {
            let text = write_proof_lines(&lines);
            prop_assert_eq!(parse_proof_lines(&text).unwrap(), lines);
        }
    }
}
