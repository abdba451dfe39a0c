//! Text formats for custom channels and encodings.
//!
//! Channel files:
//!
//! ```text
//! # comments start with '#', blank lines are ignored
//! dim 2
//! kraus 0
//! 1 0
//! 0 0.5
//! kraus 1
//! 0 0.8660254037844386
//! 0 0
//! ```
//!
//! The first content line is `dim N`. Each operator starts with `kraus i`,
//! indices counting up from 0, followed by `N` rows of `N` whitespace
//! separated complex numbers. A complex number is a real part, an imaginary
//! part with a `j` suffix, or both: `0.5`, `-2j`, `1e-3+0.25j`, `0.1-j`.
//!
//! Encoding files hold two rows of complex numbers in the same notation,
//! the Fock coefficients of `ψ₀` and `ψ₁`. Rows may be shorter than the
//! truncation; missing coefficients are zero.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{ChannelFamily, KrausChannel, KrausOperator};
use crate::encoder::encoding_from_coefficients;
use crate::error::{Error, Result};
use crate::subchannel::Subspace;
use crate::C64;

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

/// Parses `re`, `imj` or `re±imj`.
pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('j') else {
        return t.parse::<f64>().ok().filter(|_| !t.contains(['j', 'i'])).map(|re| C64::new(re, 0.0));
    };
    // last sign not at the start and not part of an exponent splits re from im
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    match split {
        Some(p) => {
            let re: f64 = body[..p].parse().ok()?;
            let im = parse_real(&body[p..])?;
            Some(C64::new(re, im))
        }
        None => parse_real(body).map(|im| C64::new(0.0, im)),
    }
}

/// Round-trip safe rendering, `re±imj` with 17 significant digits.
pub fn format_complex(z: C64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(n, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((n + 1, line))
    })
}

fn parse_row(line_no: usize, line: &str) -> Result<Vec<C64>> {
    line.split_whitespace()
        .map(|tok| {
            parse_complex(tok).ok_or_else(|| Error::Parse { line: line_no, msg: format!("bad complex number `{tok}`") })
        })
        .collect()
}

fn keyword<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let mut parts = line.split_whitespace();
    (parts.next() == Some(key)).then(|| parts.next()).flatten().filter(|_| parts.next().is_none())
}

pub fn parse_channel(text: &str) -> Result<KrausChannel> {
    let mut lines = content_lines(text).peekable();
    let (n0, first) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty channel file".into() })?;
    let dim: usize = keyword(first, "dim")
        .and_then(|v| v.parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::Parse { line: n0, msg: "expected `dim N` with N > 0".into() })?;

    let mut ops = Vec::new();
    while let Some((n, header)) = lines.next() {
        let index: usize = keyword(header, "kraus")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse { line: n, msg: "expected `kraus i`".into() })?;
        if index != ops.len() {
            return Err(Error::Parse { line: n, msg: format!("expected `kraus {}`, found index {index}", ops.len()) });
        }
        let mut entries = Vec::new();
        for r in 0..dim {
            let (m, line) = lines
                .next()
                .ok_or_else(|| Error::Parse { line: n, msg: format!("kraus {index} has {r} rows, expected {dim}") })?;
            let row = parse_row(m, line)?;
            if row.len() != dim {
                return Err(Error::Parse { line: m, msg: format!("row has {} entries, expected {dim}", row.len()) });
            }
            entries.extend(row.into_iter().enumerate().map(|(c, v)| (r, c, v)));
        }
        ops.push(KrausOperator::from_entries(dim, entries)?);
    }
    if ops.is_empty() {
        return Err(Error::Parse { line: n0, msg: "no Kraus operators".into() });
    }
    KrausChannel::from_kraus_operators(dim, ops, ChannelFamily::Custom)
}

pub fn write_channel(ch: &KrausChannel) -> String {
    let n = ch.dim();
    let mut out = format!("dim {n}\n");
    for (i, op) in ch.kraus_operators().iter().enumerate() {
        let _ = writeln!(out, "kraus {i}");
        let dense = op.to_dense();
        for r in 0..n {
            let row: Vec<String> = (0..n).map(|c| format_complex(dense.entry(r, c))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<KrausChannel> {
    parse_channel(&std::fs::read_to_string(path)?)
}

/// The two coefficient rows of an encoding file.
pub fn parse_encoding_rows(text: &str) -> Result<(Vec<C64>, Vec<C64>)> {
    let rows = content_lines(text).map(|(n, line)| parse_row(n, line).map(|r| (n, r))).collect::<Result<Vec<_>>>()?;
    match rows.as_slice() {
        [(_, c), (_, d)] => Ok((c.clone(), d.clone())),
        _ => Err(Error::Parse {
            line: rows.get(2).map_or(0, |r| r.0),
            msg: format!("expected two coefficient rows, found {}", rows.len()),
        }),
    }
}

pub fn parse_encoding(text: &str, dim: usize) -> Result<Subspace> {
    let (c, d) = parse_encoding_rows(text)?;
    encoding_from_coefficients(&c, &d, dim)
}

pub fn load_encoding(path: impl AsRef<Path>, dim: usize) -> Result<Subspace> {
    parse_encoding(&std::fs::read_to_string(path)?, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::amplitude_damping;

    #[test]
    fn complex_tokens() {
        let cases = [
            ("1", C64::new(1.0, 0.0)),
            ("-0.5", C64::new(-0.5, 0.0)),
            ("2j", C64::new(0.0, 2.0)),
            ("-j", C64::new(0.0, -1.0)),
            ("j", C64::new(0.0, 1.0)),
            ("1+2j", C64::new(1.0, 2.0)),
            ("1-j", C64::new(1.0, -1.0)),
            ("-1e-3+2.5e+1j", C64::new(-1e-3, 25.0)),
            ("1E+2-3E-2j", C64::new(100.0, -0.03)),
            ("-2e-3j", C64::new(0.0, -2e-3)),
        ];
        for (tok, want) in cases {
            assert_eq!(parse_complex(tok), Some(want), "{tok}");
        }
        for bad in ["", "x", "1+", "1+2i", "1+2jj", "--1j", "1e"] {
            assert_eq!(parse_complex(bad), None, "{bad}");
        }
    }

    #[test]
    fn complex_round_trip() {
        for z in [C64::new(0.1, -0.2), C64::new(-1e-300, 7.0), C64::new(std::f64::consts::PI, 0.0)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
    }

    #[test]
    fn channel_round_trip() {
        let ch = amplitude_damping(0.3, 4).unwrap();
        let back = parse_channel(&write_channel(&ch)).unwrap();
        assert_eq!(back.dim(), 4);
        assert_eq!(back.kraus_operators(), ch.kraus_operators());
    }

    #[test]
    fn channel_with_comments() {
        let text = "# qubit damping\n\ndim 2\nkraus 0\n1 0\n0 0.5 # sqrt(1-g)\nkraus 1\n0 0.8660254037844386\n0 0\n";
        let ch = parse_channel(text).unwrap();
        assert_eq!(ch.kraus_truncation(), 2);
        assert!(ch.tp_defect() < 1e-15);
    }

    #[test]
    fn channel_errors_carry_lines() {
        let err = |t: &str| match parse_channel(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(err("dims 2\n"), 1);
        assert_eq!(err("dim 2\nkraus 1\n1 0\n0 1\n"), 2);
        assert_eq!(err("dim 2\nkraus 0\n1 0 0\n0 1\n"), 3);
        assert_eq!(err("dim 2\nkraus 0\n1 0\n0 q\n"), 4);
        assert_eq!(err("dim 2\nkraus 0\n1 0\n"), 2);
        assert_eq!(err("dim 2\n"), 1);
        assert_eq!(err(""), 0);
    }

    #[test]
    fn encoding_rows() {
        let k = parse_encoding("# |0>, |1>\n1 0\n0 1\n", 4).unwrap();
        assert_eq!(k.dim(), 4);
        let k = parse_encoding("0.6 0 0.8j\n0 1\n", 4).unwrap();
        assert!((k.basis()[0].amplitudes()[2] - C64::new(0.0, 0.8)).norm() < 1e-15);
        assert!(matches!(parse_encoding("1 0\n", 4), Err(Error::Parse { .. })));
        assert!(matches!(parse_encoding("1 0\n1 0\n", 4), Err(Error::Orthogonality { .. })));
    }
}
