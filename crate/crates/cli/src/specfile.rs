//! TOML problem files.
//!
//! ```toml
//! A = 0.0
//! B = 0.0
//! C = [0.7071067811865476, 0.7071067811865476]
//! R = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
//! means = [[[0.7071067811865476, 0.7071067811865476], [1.0, 0.0]]]
//! quad_tol = 1e-10
//!
//! [mc]
//! samples = 1000000
//! seed = 1
//! ```
//!
//! Complex numbers are `[re, im]`. Instead of `R` a `[mu]` table with keys
//! `xx`, `yy` (real) and `xy` (complex) may be given, meaning `R = 2 [[xx, xy], [xy*, yy]]`.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use qform::model::r_from_mu;
use qform::{Complex2x2, MuParams, ProblemSpec};
use serde::{Deserialize, Serialize};
use toml::Spanned;

type Pair = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MuTable {
    xx: f64,
    yy: f64,
    xy: Pair,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: Pair,
    #[serde(rename = "R", default)]
    r: Option<Spanned<[[Pair; 2]; 2]>>,
    #[serde(default)]
    mu: Option<Spanned<MuTable>>,
    means: Vec<[Pair; 2]>,
    #[serde(default)]
    quad_tol: Option<f64>,
    #[serde(default)]
    mc: Option<McSection>,
}

#[derive(Serialize)]
struct DumpFile {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: Pair,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    r: Option<[[Pair; 2]; 2]>,
    means: Vec<[Pair; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<MuTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc: Option<McSection>,
}

/// How the covariance was written in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Covariance {
    Matrix(Complex2x2),
    Mu(MuParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub spec: ProblemSpec,
    pub covariance: Covariance,
    pub mc: Option<McSection>,
    pub quad_tol: Option<f64>,
}

/// Malformed file. `line` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Key written on the given line: `key = ...` or a `[table]` header.
fn key_on_line(src: &str, line: usize) -> Option<String> {
    let text = src.lines().nth(line - 1)?.trim();
    if let Some(rest) = text.strip_prefix('[') {
        let name = rest.trim_start_matches('[').split(']').next()?.trim();
        return (!name.is_empty()).then(|| name.to_string());
    }
    let (key, _) = text.split_once('=')?;
    let key = key.trim().trim_matches('"');
    (!key.is_empty()).then(|| key.to_string())
}

/// Key in a "missing field `x`" or "unknown field `x`" message.
fn key_in_message(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

fn spanned_error(src: &str, key: &str, span: Range<usize>, message: String) -> ParseError {
    ParseError {
        key: Some(key.to_string()),
        line: Some(line_of(src, span.start)),
        message,
    }
}

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(c: Complex64) -> Pair {
    [c.re, c.im]
}

impl SpecFile {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let raw: RawFile = toml::from_str(src).map_err(|e| {
            let message = e.message().trim().to_string();
            let line = e.span().map(|s| line_of(src, s.start));
            let key = key_in_message(&message)
                .filter(|_| message.contains(" field "))
                .or_else(|| line.and_then(|l| key_on_line(src, l)));
            ParseError { key, line, message }
        })?;
        let covariance = match (&raw.r, &raw.mu) {
            (Some(r), None) => {
                let [[r11, r12], [r21, r22]] = *r.get_ref();
                Covariance::Matrix(Complex2x2::new(complex(r11), complex(r12), complex(r21), complex(r22)))
            }
            (None, Some(mu)) => {
                let t = mu.get_ref();
                Covariance::Mu(MuParams {
                    mu_xx: t.xx,
                    mu_yy: t.yy,
                    mu_xy: complex(t.xy),
                })
            }
            (Some(r), Some(_)) => {
                return Err(spanned_error(src, "R", r.span(), "give either `R` or `[mu]`, not both".into()))
            }
            (None, None) => {
                return Err(ParseError {
                    key: Some("R".into()),
                    line: None,
                    message: "missing covariance: give either `R` or a `[mu]` table".into(),
                })
            }
        };
        let r = match covariance {
            Covariance::Matrix(r) => r,
            Covariance::Mu(mu) => r_from_mu(&mu).map_err(|e| {
                spanned_error(src, "mu", raw.mu.as_ref().expect("mu present").span(), e.to_string())
            })?,
        };
        let means = raw.means.iter().map(|&[x, y]| [complex(x), complex(y)]).collect();
        Ok(Self {
            spec: ProblemSpec::new(raw.a, raw.b, complex(raw.c), r, means),
            covariance,
            mc: raw.mc,
            quad_tol: raw.quad_tol,
        })
    }

    /// Canonical TOML text; `parse(to_toml())` reproduces `self`.
    pub fn to_toml(&self) -> String {
        let s = &self.spec;
        let (r, mu) = match self.covariance {
            Covariance::Matrix(r) => {
                let [[a, b], [c, d]] = r.rows();
                (Some([[pair(a), pair(b)], [pair(c), pair(d)]]), None)
            }
            Covariance::Mu(m) => (
                None,
                Some(MuTable {
                    xx: m.mu_xx,
                    yy: m.mu_yy,
                    xy: pair(m.mu_xy),
                }),
            ),
        };
        let dump = DumpFile {
            a: s.a(),
            b: s.b(),
            c: pair(s.c()),
            r,
            means: s.means().iter().map(|m| [pair(m[0]), pair(m[1])]).collect(),
            quad_tol: self.quad_tol,
            mu,
            mc: self.mc,
        };
        toml::to_string(&dump).expect("plain numeric data always serializes")
    }
}
