//! TOML problem files.
//!
//! ```toml
//! nb = 1
//! n = 2
//! A = [["1", "-1/3"], ["-1/3", "1"]]
//! b = [0, 1]
//! C = 1.0          # optional
//! mode = "exact"   # optional: exact | rounded
//! ```
//!
//! Matrix and vector entries are TOML numbers or strings of the form `re`,
//! `re+imj`, `re-imj` or `imj`, where each part is a decimal or a fraction
//! `p/q`. `i` is accepted in place of `j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::{EncodingMode, HermitianSystem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub nb: usize,
    pub n: usize,
    pub a: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
    pub c: Option<f64>,
    pub mode: Option<EncodingMode>,
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum Entry {
    Num(f64),
    Text(String),
}

impl Entry {
    fn value(&self) -> Result<Complex64> {
        match self {
            Entry::Num(x) => Ok(Complex64::new(*x, 0.0)),
            Entry::Text(s) => parse_complex(s),
        }
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    nb: usize,
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<Entry>>,
    b: Vec<Entry>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
}

fn parse_real(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("bad number '{s}'"));
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            p / q
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Parses `re`, `re+imj`, `re-imj` or `imj`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return Ok(Complex64::new(parse_real(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'/'));
    let (re, im) = match split {
        Some(i) => (parse_real(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other)?,
    };
    Ok(Complex64::new(re, im))
}

/// Shortest text that parses back to exactly `z`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{:?}-{:?}j", z.re, -z.im)
    } else {
        format!("{:?}+{:?}j", z.re, z.im)
    }
}

impl Problem {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawProblem = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
        let dim = raw.a.len();
        if dim == 0 {
            return Err(Error::Validation("A has no rows".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in raw.a.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Validation(format!("row {i} of A has {} entries, expected {dim}", row.len())));
            }
            for e in row {
                entries.push(e.value()?);
            }
        }
        let a = DMatrix::from_row_slice(dim, dim, &entries);
        let b = DVector::from_vec(raw.b.iter().map(Entry::value).collect::<Result<_>>()?);
        if raw.nb >= usize::BITS as usize || dim != 1 << raw.nb {
            return Err(Error::Validation(format!("nb = {} but A is {dim}x{dim}", raw.nb)));
        }
        let mode = match raw.mode.as_deref() {
            None => None,
            Some("exact") => Some(EncodingMode::Exact),
            Some("rounded") => Some(EncodingMode::Rounded),
            Some(other) => return Err(Error::Validation(format!("unknown mode '{other}'"))),
        };
        let problem = Self { nb: raw.nb, n: raw.n, a, b, c: raw.c, mode };
        problem.system()?;
        Ok(problem)
    }

    pub fn to_toml_string(&self) -> String {
        let raw = RawProblem {
            nb: self.nb,
            n: self.n,
            a: self
                .a
                .row_iter()
                .map(|row| row.iter().map(|&z| Entry::Text(format_complex(z))).collect())
                .collect(),
            b: self.b.iter().map(|&z| Entry::Text(format_complex(z))).collect(),
            c: self.c,
            mode: self.mode.map(|m| m.to_string()),
        };
        toml::to_string(&raw).expect("problem fields are always serializable")
    }

    pub fn system(&self) -> Result<HermitianSystem> {
        HermitianSystem::new(self.a.clone(), self.b.clone())
    }
}
