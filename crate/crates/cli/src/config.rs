//! Input parsing and the on-disk period-matrix format.

use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thetalab::RiemannMatrix64;

type C = Complex<f64>;

/// Errors split by exit-code class.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input: exit 64.
    Usage(String),
    /// Internal computation failure or bound violation: exit 1.
    Runtime(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<thetalab::Error> for CliError {
    fn from(e: thetalab::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// JSON schema of a period-matrix file: row-major real and imaginary parts.
#[derive(Serialize, Deserialize)]
pub struct TauFile {
    pub g: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TauFile {
    pub fn to_matrix(&self) -> Result<RiemannMatrix64, CliError> {
        let g = self.g;
        if self.re.len() != g || self.im.len() != g {
            return Err(CliError::usage(format!(
                "tau file: expected {g} rows in re/im, got {}/{}",
                self.re.len(),
                self.im.len()
            )));
        }
        let mut entries = Vec::with_capacity(g * g);
        for i in 0..g {
            if self.re[i].len() != g || self.im[i].len() != g {
                return Err(CliError::usage(format!(
                    "tau file: row {i} has wrong length"
                )));
            }
            for j in 0..g {
                entries.push(C::new(self.re[i][j], self.im[i][j]));
            }
        }
        RiemannMatrix64::new(g, entries)
            .map_err(|e| CliError::usage(format!("tau file rejected: {e}")))
    }

    pub fn from_matrix(tau: &RiemannMatrix64) -> Self {
        let g = tau.g();
        let mut re = vec![vec![0.0; g]; g];
        let mut im = vec![vec![0.0; g]; g];
        for i in 0..g {
            for j in 0..g {
                re[i][j] = tau.entry(i, j).re;
                im[i][j] = tau.entry(i, j).im;
            }
        }
        TauFile { g, re, im }
    }
}

pub fn load_tau_file(path: &Path) -> Result<RiemannMatrix64, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: TauFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("cannot parse {}: {e}", path.display())))?;
    file.to_matrix()
}

/// Parse one complex scalar: `1.5`, `i`, `-2i`, `0.3+1.2i`, `1e-2-3e-1i`.
pub fn parse_complex(s: &str) -> Result<C, CliError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(CliError::usage("empty complex literal"));
    }
    let bad = |s: &str| CliError::usage(format!("cannot parse complex number '{s}'"));
    if let Some(body) = t.strip_suffix(['i', 'j']) {
        // find the split between real and imaginary parts: the last +/- that
        // is not leading and not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| bad(t))?,
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str.parse::<f64>().map_err(|_| bad(t))?
        };
        Ok(C::new(re, im))
    } else {
        t.parse::<f64>()
            .map(|re| C::new(re, 0.0))
            .map_err(|_| bad(t))
    }
}

/// Parse a comma-separated list of complex scalars.
pub fn parse_complex_list(s: &str) -> Result<Vec<C>, CliError> {
    s.split(',').map(parse_complex).collect()
}

/// How the translate `a` is specified on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum TranslateSpec {
    /// `zero`: a = 0.
    Zero,
    /// `torsion:<index>`: a is the 2-torsion point with that index.
    Torsion(usize),
    /// `through:<seed>:<index>`: a = w - x where w is a located zero of
    /// theta (seeded) and x the prescribed torsion point.
    ThroughTorsion { seed: u64, index: usize },
    /// `vec:<c1,c2,...>`: explicit complex vector.
    Explicit(Vec<C>),
}

impl TranslateSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let t = s.trim();
        if t == "zero" {
            return Ok(TranslateSpec::Zero);
        }
        if let Some(rest) = t.strip_prefix("torsion:") {
            let index = rest
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("bad torsion index '{rest}'")))?;
            return Ok(TranslateSpec::Torsion(index));
        }
        if let Some(rest) = t.strip_prefix("through:") {
            let (seed_str, index_str) = rest
                .split_once(':')
                .ok_or_else(|| CliError::usage("expected through:<seed>:<index>"))?;
            let seed = seed_str
                .parse::<u64>()
                .map_err(|_| CliError::usage(format!("bad seed '{seed_str}'")))?;
            let index = index_str
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("bad torsion index '{index_str}'")))?;
            return Ok(TranslateSpec::ThroughTorsion { seed, index });
        }
        if let Some(rest) = t.strip_prefix("vec:") {
            return Ok(TranslateSpec::Explicit(parse_complex_list(rest)?));
        }
        Err(CliError::usage(format!(
            "unknown translate spec '{t}' (expected zero | torsion:<i> | through:<seed>:<i> | vec:<...>)"
        )))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TranslateSpec::Zero => "zero",
            TranslateSpec::Torsion(_) => "torsion",
            TranslateSpec::ThroughTorsion { .. } => "through",
            TranslateSpec::Explicit(_) => "vec",
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            TranslateSpec::Torsion(i) => Some(*i),
            TranslateSpec::ThroughTorsion { index, .. } => Some(*index),
            _ => None,
        }
    }

    /// Translates by a half-period (including zero) are symmetric:
    /// `2a` lies in the lattice.
    pub fn is_half_period(&self) -> bool {
        matches!(self, TranslateSpec::Zero | TranslateSpec::Torsion(_))
    }
}

/// Validate the series tolerance range accepted on the command line.
pub fn validate_eps(eps: f64) -> Result<f64, CliError> {
    if !(1e-13..=1e-3).contains(&eps) {
        return Err(CliError::usage(format!(
            "eps {eps:e} outside the accepted range [1e-13, 1e-3]"
        )));
    }
    Ok(eps)
}
