//! Flat, typed run configuration.
//!
//! A config file is TOML with one key per parameter; unknown keys are
//! rejected. Command-line flags override file values key by key.

use std::fmt;
use std::path::Path;

use anyhow::Context;
use gaussbv::product::Damping;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norms,
    Coarea,
    ExtendCost,
    Reflect,
    BvIbpCheck,
    BvSemivar,
    BvLambdaIndicator,
    BvExtendZero,
    ProductTable,
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::Coarea => "coarea",
            Command::ExtendCost => "extend-cost",
            Command::Reflect => "reflect",
            Command::BvIbpCheck => "bv-ibp-check",
            Command::BvSemivar => "bv-semivar",
            Command::BvLambdaIndicator => "bv-lambda-indicator",
            Command::BvExtendZero => "bv-extend-zero",
            Command::ProductTable => "product-table",
            Command::All => "all",
        }
    }
}

/// Every key a config file may set. `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Only read by `run`.
    pub command: Option<Command>,
    pub m: Option<Vec<u32>>,
    pub p: Option<f64>,
    /// `p` list for `reflect`.
    pub p_values: Option<Vec<f64>>,
    pub res: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub kmax: Option<u32>,
    pub samples: Option<usize>,
    pub t_samples: Option<usize>,
    pub damping: Option<Damping>,
    /// Domain JSON, inline or a path.
    pub domain: Option<String>,
    /// Measure JSON, inline or a path.
    pub measure: Option<String>,
    pub eta: Option<usize>,
    /// BV1D JSON carried on every line, inline or a path.
    pub line_function: Option<String>,
    pub bound: Option<f64>,
    pub theta: Option<f64>,
    pub save_grids: Option<bool>,
    pub out: Option<String>,
    pub out_dir: Option<String>,
    pub assert: Option<bool>,
}

/// Field-by-field validation failures.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// `top` wins wherever it sets a key.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; command, m, p, p_values, res, tol, seed, kmax, samples, t_samples, damping,
            domain, measure, eta, line_function, bound, theta, save_grids, out, out_dir, assert)
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        if let Some(m) = &self.m {
            check(!m.is_empty(), "m: list is empty".into());
            for &v in m {
                check((2..=1024).contains(&v), format!("m: {v} is outside 2..=1024"));
            }
        }
        if let Some(p) = self.p {
            check((1.0..=16.0).contains(&p), format!("p: {p} is outside [1, 16]"));
        }
        if let Some(ps) = &self.p_values {
            check(!ps.is_empty(), "p_values: list is empty".into());
            for &p in ps {
                check((1.0..=16.0).contains(&p), format!("p_values: {p} is outside [1, 16]"));
            }
        }
        if let Some(r) = self.res {
            check((64..=4096).contains(&r) && r % 2 == 0, format!("res: {r} must be even and in 64..=4096"));
        }
        if let Some(t) = self.tol {
            check(t > 0.0 && t <= 1e-2, format!("tol: {t} is outside (0, 1e-2]"));
        }
        if let Some(k) = self.kmax {
            check((3..=gaussbv::product::MAX_K).contains(&k), format!("kmax: {k} is outside 3..={}", gaussbv::product::MAX_K));
        }
        if let Some(s) = self.samples {
            check((1..=100_000_000).contains(&s), format!("samples: {s} is outside 1..=1e8"));
        }
        if let Some(t) = self.t_samples {
            check((16..=100_000).contains(&t), format!("t_samples: {t} is outside 16..=100000"));
        }
        if let Some(n) = self.eta {
            check((1..=4096).contains(&n), format!("eta: {n} is outside 1..=4096"));
        }
        if let Some(b) = self.bound {
            check(b > 0.0 && b.is_finite(), format!("bound: {b} must be positive and finite"));
        }
        if let Some(t) = self.theta {
            check(t.is_finite(), format!("theta: {t} must be finite"));
        }
        if self.measure.is_some() && self.eta.is_some() {
            errs.push("measure, eta: give one of them, not both".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errs))
        }
    }

    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("p = 2.0\nresolution = 10\n").is_err());
        let c = RunConfig::from_toml("command = \"extend-cost\"\nm = [4, 8]\np = 2.0\n").unwrap();
        assert_eq!(c.command, Some(Command::ExtendCost));
        assert_eq!(c.m, Some(vec![4, 8]));
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig {
            p: Some(1.0),
            res: Some(256),
            ..Default::default()
        };
        let flags = RunConfig {
            p: Some(2.0),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!(c.p, Some(2.0));
        assert_eq!(c.res, Some(256));
    }

    #[test]
    fn validation_reports_every_field() {
        let c = RunConfig {
            p: Some(0.5),
            res: Some(63),
            m: Some(vec![1, 4]),
            ..Default::default()
        };
        let e = c.validate().unwrap_err();
        assert_eq!(e.0.len(), 3, "{e}");
        assert!(e.to_string().contains("res: 63"));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig {
            p: Some(2.0),
            ..Default::default()
        };
        assert_eq!(a.hash(), a.clone().hash());
        let b = RunConfig {
            p: Some(1.0),
            ..Default::default()
        };
        assert_ne!(a.hash(), b.hash());
    }
}
