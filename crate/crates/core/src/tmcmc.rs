//! Transformation-based MCMC on the log scale `z`, and the hunting targets.
//!
//! Each step is additive (`z + s·ε`) with probability `p_add` or
//! multiplicative (`z·m`, `m = exp(s·η)`) otherwise, with `s = ±1` and
//! `ε, η` drawn as the configured scale times `|N(0,1)|`. The multiplicative
//! move enters the acceptance ratio with its Jacobian `m`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::{ln_error_density, ln_error_integral, ErrorBoundModel};

/// Largest `z` for which `exp(z) + p0` stays comfortably finite.
pub const MAX_Z: f64 = 700.0;

/// Kernel settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmcmcConfig {
    pub p_add: f64,
    pub p_mult: f64,
    pub add_scale: f64,
    pub mult_scale: f64,
    pub seed: u64,
}

impl Default for TmcmcConfig {
    fn default() -> Self {
        Self { p_add: 0.1, p_mult: 0.9, add_scale: 1.0, mult_scale: 1.0, seed: 0 }
    }
}

impl TmcmcConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_add) || !prob(self.p_mult) || (self.p_add + self.p_mult - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "mixing probabilities must be in [0, 1] and sum to 1, got {} + {}",
                self.p_add, self.p_mult
            )));
        }
        for (name, v) in [("add_scale", self.add_scale), ("mult_scale", self.mult_scale)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Which hunting density to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TargetKind {
    /// `li(x)·(x·F(x)/log x)^(−k)` in `z`
    GeneralH1,
    /// `f(x)·(x·F(x)/log x)^(−k)` in `z`
    GeneralH2,
    /// `GeneralH1` reweighted by `2^(−t)`, the change of variable to `2^t − 1`
    MersenneH1,
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetKind::GeneralH1 => "GENERAL_H1",
            TargetKind::GeneralH2 => "GENERAL_H2",
            TargetKind::MersenneH1 => "MERSENNE_H1",
        })
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GENERAL_H1" => Ok(TargetKind::GeneralH1),
            "GENERAL_H2" => Ok(TargetKind::GeneralH2),
            "MERSENNE_H1" => Ok(TargetKind::MersenneH1),
            _ => Err(Error::parse(None, format!("unknown target kind {s:?}"))),
        }
    }
}

/// A hunting density over `z`, where the candidate is `floor(exp(z)) + p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuntTarget {
    pub kind: TargetKind,
    pub p0: u64,
    pub k: u64,
    pub model: ErrorBoundModel,
}

impl HuntTarget {
    pub fn new(kind: TargetKind, p0: u64, k: u64, model: ErrorBoundModel) -> Result<Self> {
        if p0 < 10 {
            return Err(Error::domain(format!("p0 must be at least 10, got {p0}")));
        }
        if k < 1 {
            return Err(Error::domain("k must be at least 1"));
        }
        Ok(Self { kind, p0, k, model })
    }

    /// Starting point `log log p0`, about one prime gap above `p0`.
    pub fn initial_z(&self) -> f64 {
        (self.p0 as f64).ln().ln()
    }

    /// Log target density at `z`, up to an additive constant.
    pub fn log_target(&self, z: f64) -> Result<f64> {
        if !z.is_finite() || z > MAX_Z {
            return Err(Error::domain(format!("z = {z} outside the safe range (−∞, {MAX_Z}]")));
        }
        let t = z.exp();
        let x = t + self.p0 as f64;
        let lx = x.ln();
        let llx = lx.ln();
        let common = -(self.k as f64) * (lx + ln_error_integral(self.model, x)? - llx) + z;
        Ok(match self.kind {
            TargetKind::GeneralH1 => -llx + common,
            TargetKind::GeneralH2 => ln_error_density(self.model, x)? + common,
            TargetKind::MersenneH1 => -llx + common - t * std::f64::consts::LN_2,
        })
    }
}

/// One visited state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// 1-based iteration that produced this state.
    pub iteration: u64,
    pub z: f64,
    pub accepted: bool,
    pub burn_in: bool,
}

/// Acceptance probability `min(1, exp(log_ratio)·jacobian)`.
pub fn acceptance_probability(log_ratio: f64, jacobian: f64) -> f64 {
    if log_ratio.is_nan() {
        return 0.0;
    }
    (log_ratio.exp() * jacobian).min(1.0)
}

/// Serializable chain state for resuming a run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSnapshot {
    pub z: f64,
    pub log_target: f64,
    pub iteration: u64,
    pub rng_seed: [u8; 32],
    pub rng_stream: u64,
    /// Word position of the generator, decimal so JSON keeps all 128 bits.
    pub rng_word_pos: String,
    pub proposed_add: u64,
    pub accepted_add: u64,
    pub proposed_mult: u64,
    pub accepted_mult: u64,
    pub out_of_range: u64,
}

/// A single TMCMC chain.
#[derive(Debug, Clone)]
pub struct TmcmcChain {
    z: f64,
    log_target: f64,
    iteration: u64,
    rng: ChaCha8Rng,
    proposed_add: u64,
    accepted_add: u64,
    proposed_mult: u64,
    accepted_mult: u64,
    out_of_range: u64,
}

impl TmcmcChain {
    /// Start at `z0`; `target` returns `None` outside its support.
    pub fn new(z0: f64, seed: u64, target: impl Fn(f64) -> Option<f64>) -> Result<Self> {
        let lt = target(z0)
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::domain(format!("log target undefined at the start z = {z0}")))?;
        Ok(Self {
            z: z0,
            log_target: lt,
            iteration: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            proposed_add: 0,
            accepted_add: 0,
            proposed_mult: 0,
            accepted_mult: 0,
            out_of_range: 0,
        })
    }

    /// Chain on a hunting target, started at [`HuntTarget::initial_z`].
    pub fn for_target(target: &HuntTarget, seed: u64) -> Result<Self> {
        Self::new(target.initial_z(), seed, |z| target.log_target(z).ok())
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// `(proposed, accepted)` for the additive and multiplicative moves.
    pub fn move_counts(&self) -> ((u64, u64), (u64, u64)) {
        ((self.proposed_add, self.accepted_add), (self.proposed_mult, self.accepted_mult))
    }

    /// Proposals rejected because the target was undefined there.
    pub fn out_of_range(&self) -> u64 {
        self.out_of_range
    }

    pub fn acceptance_rate(&self) -> f64 {
        let p = self.proposed_add + self.proposed_mult;
        if p == 0 {
            0.0
        } else {
            (self.accepted_add + self.accepted_mult) as f64 / p as f64
        }
    }

    /// One kernel transition; returns whether the proposal was accepted.
    pub fn step(&mut self, target: impl Fn(f64) -> Option<f64>, config: &TmcmcConfig) -> bool {
        self.iteration += 1;
        let additive = self.rng.random::<f64>() < config.p_add;
        let sign = if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let size: f64 = self.rng.sample::<f64, _>(StandardNormal).abs();
        let (proposal, jacobian) = if additive {
            self.proposed_add += 1;
            (self.z + sign * config.add_scale * size, 1.0)
        } else {
            self.proposed_mult += 1;
            let m = (sign * config.mult_scale * size).exp();
            (self.z * m, m)
        };
        let u: f64 = self.rng.random();
        let Some(lt) = target(proposal).filter(|v| !v.is_nan()) else {
            self.out_of_range += 1;
            return false;
        };
        let accept = u < acceptance_probability(lt - self.log_target, jacobian);
        if accept {
            self.z = proposal;
            self.log_target = lt;
            if additive {
                self.accepted_add += 1;
            } else {
                self.accepted_mult += 1;
            }
        }
        accept
    }

    /// Run `iterations` steps, handing each resulting state to `visit`.
    /// States from iterations `<= burn_in` are flagged, not dropped.
    pub fn run(
        &mut self,
        target: impl Fn(f64) -> Option<f64>,
        config: &TmcmcConfig,
        iterations: u64,
        burn_in: u64,
        mut visit: impl FnMut(&Sample),
    ) {
        for _ in 0..iterations {
            let accepted = self.step(&target, config);
            visit(&Sample {
                iteration: self.iteration,
                z: self.z,
                accepted,
                burn_in: self.iteration <= burn_in,
            });
        }
    }

    pub fn snapshot(&self) -> ChainSnapshot {
        ChainSnapshot {
            z: self.z,
            log_target: self.log_target,
            iteration: self.iteration,
            rng_seed: self.rng.get_seed(),
            rng_stream: self.rng.get_stream(),
            rng_word_pos: self.rng.get_word_pos().to_string(),
            proposed_add: self.proposed_add,
            accepted_add: self.accepted_add,
            proposed_mult: self.proposed_mult,
            accepted_mult: self.accepted_mult,
            out_of_range: self.out_of_range,
        }
    }

    pub fn restore(s: &ChainSnapshot) -> Result<Self> {
        let word_pos: u128 = s
            .rng_word_pos
            .parse()
            .map_err(|_| Error::parse(None, format!("bad RNG word position {:?}", s.rng_word_pos)))?;
        if !s.z.is_finite() || s.log_target.is_nan() {
            return Err(Error::parse(None, "snapshot holds a non-finite state"));
        }
        let mut rng = ChaCha8Rng::from_seed(s.rng_seed);
        rng.set_stream(s.rng_stream);
        rng.set_word_pos(word_pos);
        Ok(Self {
            z: s.z,
            log_target: s.log_target,
            iteration: s.iteration,
            rng,
            proposed_add: s.proposed_add,
            accepted_add: s.accepted_add,
            proposed_mult: s.proposed_mult,
            accepted_mult: s.accepted_mult,
            out_of_range: s.out_of_range,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bell(z: f64) -> Option<f64> {
        Some(-0.5 * z * z)
    }

    #[test]
    fn config_validation() {
        assert!(TmcmcConfig::default().validate().is_ok());
        let bad = TmcmcConfig { p_add: 0.2, ..TmcmcConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TmcmcConfig { mult_scale: 0.0, ..TmcmcConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn neutral_proposal_is_always_accepted() {
        assert_eq!(acceptance_probability(0.0, 1.0), 1.0);
        assert_eq!(acceptance_probability(-f64::INFINITY, 1.0), 0.0);
        assert_relative_eq!(acceptance_probability(-1.0, 2.0), 2.0 * (-1f64).exp());
    }

    #[test]
    fn mersenne_target_is_general_minus_doubling_cost() {
        for z in [-3.0, 0.0, 2.5, 5.0, 9.0] {
            let g = HuntTarget::new(TargetKind::GeneralH1, 1_000_003, 70_000, ErrorBoundModel::Mt).unwrap();
            let m = HuntTarget { kind: TargetKind::MersenneH1, ..g };
            let diff = m.log_target(z).unwrap() - g.log_target(z).unwrap();
            assert_relative_eq!(diff, -z.exp() * std::f64::consts::LN_2, max_relative = 1e-9, epsilon = 1e-9);
        }
    }

    #[test]
    fn log_target_derivative() {
        let p0 = 1_000_003u64;
        let k = 72_000u64;
        let m = ErrorBoundModel::Mt;
        let t = HuntTarget::new(TargetKind::GeneralH1, p0, k, m).unwrap();
        let z = 5.0;
        let h = 1e-5;
        let fd = (t.log_target(z + h).unwrap() - t.log_target(z - h).unwrap()) / (2.0 * h);
        // d/dz through x = e^z + p0
        let x = z.exp() + p0 as f64;
        let lx = x.ln();
        let big_f = crate::specialfn::error_integral(m, x).unwrap();
        let f = crate::specialfn::error_density(m, x).unwrap();
        let dx = -1.0 / (x * lx) - k as f64 * (1.0 / x + f / big_f - 1.0 / (x * lx));
        let analytic = z.exp() * dx + 1.0;
        assert_relative_eq!(fd, analytic, max_relative = 1e-5);
    }

    #[test]
    fn mersenne_target_falls_past_its_mode() {
        let t = HuntTarget::new(TargetKind::MersenneH1, 999_983, 72_000, ErrorBoundModel::Mt).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| -5.0 + i as f64 * 0.05).collect();
        let vals: Vec<f64> = grid.iter().map(|&z| t.log_target(z).unwrap()).collect();
        let mode = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(mode > 0 && mode < grid.len() - 1);
        assert!(vals[mode..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn target_rejects_unsafe_z() {
        let t = HuntTarget::new(TargetKind::GeneralH2, 1000, 100, ErrorBoundModel::Mt).unwrap();
        assert!(t.log_target(701.0).is_err());
        assert!(t.log_target(f64::NAN).is_err());
        assert!(t.log_target(650.0).unwrap().is_finite());
        assert!(HuntTarget::new(TargetKind::GeneralH1, 7, 1, ErrorBoundModel::Mt).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = TmcmcConfig::default();
        let trace = |seed| {
            let mut c = TmcmcChain::new(0.3, seed, bell).unwrap();
            let mut zs = Vec::new();
            c.run(bell, &cfg, 10_000, 0, |s| zs.push(s.z.to_bits()));
            zs
        };
        assert_eq!(trace(11), trace(11));
        assert_ne!(trace(11), trace(12));
    }

    #[test]
    fn snapshot_resume_is_exact() {
        let cfg = TmcmcConfig::default();
        let mut whole = TmcmcChain::new(1.0, 5, bell).unwrap();
        let mut a = Vec::new();
        whole.run(bell, &cfg, 5000, 0, |s| a.push(s.z));

        let mut first = TmcmcChain::new(1.0, 5, bell).unwrap();
        let mut b = Vec::new();
        first.run(bell, &cfg, 2000, 0, |s| b.push(s.z));
        let json = serde_json::to_string(&first.snapshot()).unwrap();
        let mut second = TmcmcChain::restore(&serde_json::from_str(&json).unwrap()).unwrap();
        second.run(bell, &cfg, 3000, 0, |s| b.push(s.z));
        assert_eq!(a, b);
        assert_eq!(second.iteration(), 5000);
    }

    #[test]
    fn out_of_support_proposals_are_rejected() {
        let half = |z: f64| (z > 0.0).then(|| -z);
        let cfg = TmcmcConfig { p_add: 1.0, p_mult: 0.0, add_scale: 5.0, ..TmcmcConfig::default() };
        let mut c = TmcmcChain::new(0.5, 1, half).unwrap();
        c.run(half, &cfg, 2000, 0, |s| assert!(s.z > 0.0));
        assert!(c.out_of_range() > 0);
    }

    #[test]
    fn burn_in_is_flagged() {
        let mut c = TmcmcChain::new(0.0, 3, bell).unwrap();
        let mut flags = Vec::new();
        c.run(bell, &TmcmcConfig::default(), 10, 4, |s| flags.push((s.iteration, s.burn_in)));
        assert_eq!(flags[3], (4, true));
        assert_eq!(flags[4], (5, false));
    }
}
