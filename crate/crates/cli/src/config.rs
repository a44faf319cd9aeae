//! JSON run configuration. Every field is optional; command-line flags take
//! precedence over values read from `--config`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use randers_core::cm::{CmPolynomial, PolynomialSpec};
use randers_core::io::GeneratorSpec;
use randers_core::{IsoFunction, SkewGenerator};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<String>,
    /// `[a, b, c]` for the `S²` generator.
    pub abc: Option<[f64; 3]>,
    pub q: Option<GeneratorSpec>,
    pub x: Option<Vec<f64>>,
    pub velocity: Option<Vec<f64>>,
    pub s_max: Option<f64>,
    pub resolution: Option<usize>,
    pub max_denominator: Option<u64>,
    pub example: Option<String>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub a: Option<f64>,
    pub polynomial: Option<PolynomialSpec>,
    pub samples: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub ts: Option<Vec<f64>>,
    pub count: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub fn positive(name: &str, value: f64) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        bail!("{name} must be a positive number, got {value}");
    }
    Ok(value)
}

pub fn at_least(name: &str, value: usize, min: usize) -> Result<usize> {
    if value < min {
        bail!("{name} must be at least {min}, got {value}");
    }
    Ok(value)
}

/// Built-in or user-supplied `(φ, Q)`.
#[derive(Debug, Clone)]
pub struct ExampleSpec {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub a: f64,
}

impl ExampleSpec {
    /// `g1`: `⟨x, e₁⟩` on `S²` with `Q₁₃ = a` (default 1/2);
    /// `g2`: `|x̄₁|² − |x̄₂|²` on `S^n` with rate `a` in the `(p, p+1)` plane.
    pub fn build(&self) -> Result<IsoFunction> {
        match self.name.as_str() {
            "g1" => {
                if self.n < 2 {
                    bail!("g1 needs n >= 2");
                }
                let q = SkewGenerator::from_planes(self.n + 1, &[(0, 2, self.a)])?;
                Ok(IsoFunction::new(CmPolynomial::coordinate(self.n + 1, 0)?, q)?)
            }
            "g2" => {
                if self.n < 2 || self.p + 1 > self.n {
                    bail!("g2 needs n >= 2 and 0 <= p <= n - 1, got n = {}, p = {}", self.n, self.p);
                }
                let q = SkewGenerator::from_planes(self.n + 1, &[(self.p, self.p + 1, self.a)])?;
                Ok(IsoFunction::new(CmPolynomial::clifford(self.p, self.n - 1 - self.p), q)?)
            }
            other => bail!("unknown example {other:?}; expected g1 or g2"),
        }
    }
}

pub fn default_rate(example: &str) -> f64 {
    if example == "g1" {
        0.5
    } else {
        0.3
    }
}

pub fn default_n(example: &str) -> usize {
    if example == "g1" {
        2
    } else {
        4
    }
}

/// `(φ, Q)` from a config file's `polynomial` and `q` entries.
pub fn custom_iso(cfg: &RunConfig) -> Result<Option<IsoFunction>> {
    match (&cfg.polynomial, &cfg.q) {
        (Some(poly), Some(q)) => Ok(Some(IsoFunction::new(CmPolynomial::generic(poly.clone())?, q.build()?)?)),
        (None, None) => Ok(None),
        _ => bail!("a custom run needs both \"polynomial\" and \"q\" in the config"),
    }
}
