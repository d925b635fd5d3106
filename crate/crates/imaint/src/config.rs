//! Flat key-value configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! ignored. All subcommands share one namespace, so a single file can hold
//! the model parameters next to solver settings:
//!
//! ```text
//! # model
//! sigma_e = 50
//! t_end   = 20
//! # value iteration
//! grid_n_d = 60
//! grid_n_k = 20
//! ```
//!
//! Unknown keys are ignored; a subcommand only reads the keys it owns.

use std::collections::BTreeMap;
use std::path::Path;

use crate::env::ModelParams;
use crate::{Error, Result};

/// Parsed key-value configuration.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not a number"))),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not an integer"))),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.entries.get(key).map(String::as_str) {
            None => Ok(default),
            Some("true") | Some("1") | Some("on") => Ok(true),
            Some("false") | Some("0") | Some("off") => Ok(false),
            Some(v) => Err(Error::Config(format!("key `{key}`: `{v}` is not a bool"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("key `{key}`: `{s}` is not a number")))
                })
                .collect(),
        }
    }

    /// Model parameters; every key is optional and falls back to the
    /// built-in defaults.
    pub fn model_params(&self) -> Result<ModelParams> {
        let d = ModelParams::default();
        let mut p = ModelParams {
            mu_d0: self.f64("mu_d0", d.mu_d0)?,
            mu_k0: self.f64("mu_k0", d.mu_k0)?,
            sigma_d0: self.f64("sigma_d0", d.sigma_d0)?,
            sigma_k0: self.f64("sigma_k0", d.sigma_k0)?,
            delta_d: self.f64("delta_d", d.delta_d)?,
            delta_k: self.f64("delta_k", d.delta_k)?,
            cost_action: [0.0; 4],
            cost_failure: self.f64("cost_f", d.cost_failure)?,
            gamma: self.f64("gamma", d.gamma)?,
            d_cr: self.f64("d_cr", d.d_cr)?,
            t_end: self.usize("t_end", d.t_end)?,
            sigma_e: self.f64("sigma_e", d.sigma_e)?,
        };
        for (i, slot) in p.cost_action.iter_mut().enumerate() {
            *slot = self.f64(&format!("cost_a{i}"), d.cost_action[i])?;
        }
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let cfg = KvConfig::parse("# header\n sigma_e = 50 # inline\n\nt_end=10\n").unwrap();
        assert_eq!(cfg.f64("sigma_e", 0.0).unwrap(), 50.0);
        assert_eq!(cfg.usize("t_end", 0).unwrap(), 10);
        assert_eq!(cfg.f64("gamma", 0.5).unwrap(), 0.5);
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(KvConfig::parse("just words\n").is_err());
        let cfg = KvConfig::parse("sigma_e = abc\n").unwrap();
        assert!(cfg.f64("sigma_e", 0.0).is_err());
    }

    #[test]
    fn model_params_pick_up_overrides() {
        let cfg = KvConfig::parse("sigma_e = 2.5\ncost_a2 = 7\n").unwrap();
        let p = cfg.model_params().unwrap();
        assert_eq!(p.sigma_e, 2.5);
        assert_eq!(p.cost_action[2], 7.0);
        assert_eq!(p.cost_action[3], 100.0);
    }

    #[test]
    fn sigma_list_parses() {
        let cfg = KvConfig::parse("sigma_e_list = 0.5, 1, 50\n").unwrap();
        assert_eq!(cfg.f64_list("sigma_e_list", &[]).unwrap(), vec![0.5, 1.0, 50.0]);
    }
}
