//! `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; unknown
//! keys and repeated keys are errors so typos do not pass silently.

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::recursive::Hyper;
use crate::specialfn::ErrorBoundModel;
use crate::tmcmc::TmcmcConfig;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub p_add: Option<f64>,
    pub p_mult: Option<f64>,
    pub add_scale: Option<f64>,
    pub mult_scale: Option<f64>,
    pub seed: Option<u64>,
    pub model: Option<ErrorBoundModel>,
    pub hyper: Option<Hyper>,
    pub rounds: Option<u32>,
    pub burn_in: Option<u64>,
    pub trial_factor_bits: Option<u32>,
    pub nonrec_cap: Option<usize>,
    pub ll_ceiling: Option<u64>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "p_add",
    "p_mult",
    "add_scale",
    "mult_scale",
    "seed",
    "model",
    "hyper",
    "rounds",
    "burn_in",
    "trial_factor_bits",
    "nonrec_cap",
    "ll_ceiling",
];

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(Some(line), format!("bad value {raw:?} for {key}")))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(Some(n), format!("expected key=value, got {line:?}")))?;
            let (key, val) = (key.trim(), val.trim());
            if !seen.insert(key.to_string()) && CONFIG_KEYS.contains(&key) {
                return Err(Error::parse(Some(n), format!("duplicate key {key}")));
            }
            match key {
                "p_add" => cfg.p_add = Some(value(n, key, val)?),
                "p_mult" => cfg.p_mult = Some(value(n, key, val)?),
                "add_scale" => cfg.add_scale = Some(value(n, key, val)?),
                "mult_scale" => cfg.mult_scale = Some(value(n, key, val)?),
                "seed" => cfg.seed = Some(value(n, key, val)?),
                "rounds" => cfg.rounds = Some(value(n, key, val)?),
                "burn_in" => cfg.burn_in = Some(value(n, key, val)?),
                "trial_factor_bits" => cfg.trial_factor_bits = Some(value(n, key, val)?),
                "nonrec_cap" => cfg.nonrec_cap = Some(value(n, key, val)?),
                "ll_ceiling" => cfg.ll_ceiling = Some(value(n, key, val)?),
                "model" => {
                    cfg.model = Some(val.parse().map_err(|e: Error| Error::parse(Some(n), e.to_string()))?)
                }
                "hyper" => {
                    cfg.hyper = Some(val.parse().map_err(|e: Error| Error::parse(Some(n), e.to_string()))?)
                }
                _ => return Err(Error::parse(Some(n), format!("unknown key {key:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// `base` with any kernel settings from the file applied, validated.
    pub fn tmcmc(&self, base: TmcmcConfig) -> Result<TmcmcConfig> {
        let mut c = base;
        if let Some(v) = self.p_add {
            c.p_add = v;
            if self.p_mult.is_none() {
                c.p_mult = 1.0 - v;
            }
        }
        if let Some(v) = self.p_mult {
            c.p_mult = v;
            if self.p_add.is_none() {
                c.p_add = 1.0 - v;
            }
        }
        if let Some(v) = self.add_scale {
            c.add_scale = v;
        }
        if let Some(v) = self.mult_scale {
            c.mult_scale = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# kernel\np_add = 0.25\nadd_scale=2\nmult_scale = 0.5\nseed=9\n\
                    model = rh-eps:0.1\nhyper = 1,1,2,2\nrounds=3\nburn_in=10\n\
                    trial_factor_bits=40\nnonrec_cap=32\nll_ceiling=5000\n";
        let c = ConfigFile::parse(text).unwrap();
        assert_eq!(c.model, Some(ErrorBoundModel::RhEps(0.1)));
        assert_eq!(c.hyper, Some(Hyper::new(1.0, 1.0, 2.0, 2.0).unwrap()));
        let k = c.tmcmc(TmcmcConfig::default()).unwrap();
        assert_eq!((k.p_add, k.p_mult, k.add_scale, k.mult_scale, k.seed), (0.25, 0.75, 2.0, 0.5, 9));
        assert_eq!((c.rounds, c.burn_in, c.trial_factor_bits), (Some(3), Some(10), Some(40)));
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("seed=1\nbogus=2\n", 2),
            ("\n\nseed\n", 3),
            ("seed=x\n", 1),
            ("seed=1\nseed=2\n", 2),
            ("model=nope\n", 1),
        ] {
            match ConfigFile::parse(text) {
                Err(Error::Parse { line: Some(l), .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_kernel_rejected() {
        let c = ConfigFile::parse("p_add=0.5\np_mult=0.6\n").unwrap();
        assert!(c.tmcmc(TmcmcConfig::default()).is_err());
    }
}
