//! Text format for two-qubit states.
//!
//! A state file holds either an explicit matrix or a named family.
//! Everything after `#` on a line is a comment; blank lines are ignored.
//!
//! **Matrix form.** Exactly 16 complex entries in row-major order, separated
//! by whitespace and/or commas, spread over any number of lines. An entry is
//! a real number (`0.25`, `-1e-3`), an imaginary number (`0.5i`, `-i`, `2j`)
//! or both without spaces (`0.5-0.25i`). The matrix must already be a valid
//! density matrix; it is not renormalized.
//!
//! ```text
//! # |00><00|
//! 1 0 0 0
//! 0 0 0 0
//! 0 0 0 0
//! 0 0 0 0
//! ```
//!
//! **Tagged form.** The first token is `family=NAME`, followed by
//! `key=value` pairs on the same or later lines:
//!
//! | family            | keys                         |
//! |-------------------|------------------------------|
//! | `maximally-mixed` |                              |
//! | `werner`          | `e`                          |
//! | `pure`            | `theta`                      |
//! | `pure-noise`      | `theta`, `e`                 |
//! | `bell`            | `state` (`phi+`, `phi-`, `psi+`, `psi-`) |
//! | `bell-diagonal`   | `c1`, `c2`, `c3`             |
//! | `bell-mixture`    | `p1`, `p2`, `p3`, `p4`       |
//! | `rank2`           | `p`                          |
//! | `face`            | `w1`, `w2`, `w3`             |
//! | `classical`       | `c00`, `c01`, `c10`, `c11`   |
//! | `random`          | `measure` (`haar`, `bures`), `seed`, `index` |
//!
//! ```text
//! family=werner e=0.3
//! ```
//!
//! Syntax problems are reported as [`Error::Parse`] with a 1-based line
//! number; well-formed input describing an invalid state yields the error of
//! the corresponding constructor.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{self, BellDiagonalCoords, BellState, DensityMatrix, RandomMeasure};

/// A parsed state together with a one-line description of its source.
#[derive(Clone, Debug)]
pub struct StateSpec {
    pub description: String,
    pub state: DensityMatrix,
}

struct Token<'a> {
    line: usize,
    text: &'a str,
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    text.lines()
        .enumerate()
        .flat_map(|(i, raw)| {
            let content = raw.split('#').next().unwrap_or("");
            content
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(move |t| Token {
                    line: i + 1,
                    text: t,
                })
        })
        .collect()
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the contents of a state file.
pub fn parse_state(text: &str) -> Result<StateSpec> {
    let toks = tokens(text);
    let Some(first) = toks.first() else {
        let last = text.lines().count().max(1);
        return Err(parse_error(last, "empty state file"));
    };
    if first.text.contains('=') {
        parse_tagged(&toks)
    } else {
        parse_matrix(&toks)
    }
}

/// Reads and parses a state file from disk. I/O failures surface as parse
/// errors on line 0.
pub fn read_state(path: &std::path::Path) -> Result<StateSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_error(0, format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text)
}

fn parse_matrix(toks: &[Token<'_>]) -> Result<StateSpec> {
    let mut entries = Vec::with_capacity(16);
    for t in toks {
        if entries.len() == 16 {
            return Err(parse_error(t.line, "more than 16 matrix entries"));
        }
        let z = parse_complex(t.text)
            .ok_or_else(|| parse_error(t.line, format!("not a complex number: `{}`", t.text)))?;
        entries.push(z);
    }
    if entries.len() != 16 {
        let line = toks.last().map_or(1, |t| t.line);
        return Err(parse_error(
            line,
            format!("expected 16 matrix entries, found {}", entries.len()),
        ));
    }
    let state = DensityMatrix::new(ComplexMatrix::new(4, entries)?)?;
    Ok(StateSpec {
        description: "matrix".to_string(),
        state,
    })
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (`j` also accepted for the unit).
pub fn parse_complex(text: &str) -> Option<C64> {
    let finite = |x: f64| x.is_finite().then_some(x);
    let Some(body) = text.strip_suffix(['i', 'j']) else {
        return text
            .parse::<f64>()
            .ok()
            .and_then(finite)
            .map(|re| C64::new(re, 0.0));
    };
    let imag = |s: &str| -> Option<f64> {
        match s {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => s.parse::<f64>().ok().and_then(finite),
        }
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok().and_then(finite)?;
            Some(C64::new(re, imag(&body[k..])?))
        }
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

struct Params {
    values: BTreeMap<String, (usize, String)>,
    family_line: usize,
}

impl Params {
    fn take(&mut self, key: &str) -> Result<(usize, String)> {
        self.values
            .remove(key)
            .ok_or_else(|| parse_error(self.family_line, format!("missing key `{key}`")))
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let (line, v) = self.take(key)?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_error(line, format!("`{key}` is not a number: `{v}`")))
    }

    fn integer(&mut self, key: &str) -> Result<u64> {
        let (line, v) = self.take(key)?;
        v.parse::<u64>().map_err(|_| {
            parse_error(
                line,
                format!("`{key}` is not a non-negative integer: `{v}`"),
            )
        })
    }

    fn finish(self) -> Result<()> {
        match self.values.into_iter().next() {
            Some((k, (line, _))) => Err(parse_error(line, format!("unexpected key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn parse_tagged(toks: &[Token<'_>]) -> Result<StateSpec> {
    let mut values = BTreeMap::new();
    for t in toks {
        let (k, v) = t.text.split_once('=').ok_or_else(|| {
            parse_error(t.line, format!("expected key=value, found `{}`", t.text))
        })?;
        if k.is_empty() || v.is_empty() {
            return Err(parse_error(t.line, format!("malformed pair `{}`", t.text)));
        }
        if values
            .insert(k.to_string(), (t.line, v.to_string()))
            .is_some()
        {
            return Err(parse_error(t.line, format!("duplicate key `{k}`")));
        }
    }
    let family_line = toks[0].line;
    let mut p = Params {
        values,
        family_line,
    };
    let (_, family) = p
        .take("family")
        .map_err(|_| parse_error(family_line, "tagged form must start with family=NAME"))?;
    if !toks[0].text.starts_with("family=") {
        return Err(parse_error(
            family_line,
            "tagged form must start with family=NAME",
        ));
    }

    let (description, state) = match family.as_str() {
        "maximally-mixed" => (
            "maximally-mixed".to_string(),
            DensityMatrix::maximally_mixed(4),
        ),
        "werner" => {
            let e = p.number("e")?;
            (format!("werner e={e}"), states::werner(e)?)
        }
        "pure" => {
            let theta = p.number("theta")?;
            (format!("pure theta={theta}"), states::pure_schmidt(theta))
        }
        "pure-noise" => {
            let theta = p.number("theta")?;
            let e = p.number("e")?;
            let rho = states::pure_schmidt(theta).with_white_noise(e)?;
            (format!("pure-noise theta={theta} e={e}"), rho)
        }
        "bell" => {
            let (line, name) = p.take("state")?;
            let b = BellState::ALL
                .into_iter()
                .find(|b| b.name() == name)
                .ok_or_else(|| parse_error(line, format!("unknown Bell state `{name}`")))?;
            (format!("bell state={name}"), b.density())
        }
        "bell-diagonal" => {
            let c = [p.number("c1")?, p.number("c2")?, p.number("c3")?];
            let rho = states::bell_diagonal(BellDiagonalCoords { c })?;
            (
                format!("bell-diagonal c1={} c2={} c3={}", c[0], c[1], c[2]),
                rho,
            )
        }
        "bell-mixture" => {
            let w = [
                p.number("p1")?,
                p.number("p2")?,
                p.number("p3")?,
                p.number("p4")?,
            ];
            let rho = states::bell_mixture(w)?;
            (
                format!(
                    "bell-mixture p1={} p2={} p3={} p4={}",
                    w[0], w[1], w[2], w[3]
                ),
                rho,
            )
        }
        "rank2" => {
            let x = p.number("p")?;
            (format!("rank2 p={x}"), states::rank2_boundary(x)?)
        }
        "face" => {
            let w = [p.number("w1")?, p.number("w2")?, p.number("w3")?];
            let rho = states::face_state(w)?;
            (format!("face w1={} w2={} w3={}", w[0], w[1], w[2]), rho)
        }
        "classical" => {
            let w = [
                [p.number("c00")?, p.number("c01")?],
                [p.number("c10")?, p.number("c11")?],
            ];
            let rho = states::classical_state(w)?;
            let d = format!(
                "classical c00={} c01={} c10={} c11={}",
                w[0][0], w[0][1], w[1][0], w[1][1]
            );
            (d, rho)
        }
        "random" => {
            let (line, m) = p.take("measure")?;
            let measure: RandomMeasure = m
                .parse()
                .map_err(|_| parse_error(line, format!("unknown measure `{m}`")))?;
            let seed = p.integer("seed")?;
            let index = p.integer("index")?;
            let rho = states::random_state_at(seed, measure, index);
            (
                format!("random measure={measure} seed={seed} index={index}"),
                rho,
            )
        }
        other => {
            return Err(parse_error(
                family_line,
                format!("unknown family `{other}`"),
            ))
        }
    };
    p.finish()?;
    Ok(StateSpec { description, state })
}
