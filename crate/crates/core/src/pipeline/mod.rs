//! Prime hunting and Mersenne-candidate generation: calibration, chain
//! orchestration, primality filtering, persistence and reports.
//!
//! Each hunt runs one chain per target in parallel. Workers send records
//! over a channel to the calling thread, which is the only writer of the
//! result store. A visited state `z` yields the candidate
//! `floor(exp(z)) + p0`; floors of 0 or 1 are skipped and counted.

mod config;
mod output;
mod records;
mod verify;

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

pub use config::{ConfigFile, CONFIG_KEYS};
pub use output::{write_comparison, write_equivalence, write_simulation, write_trajectory, CsvWriter};
pub use records::{load_records, CandidateKind, CandidateRecord, ResultStore};
pub use verify::{parse_line, verify_file, verify_str, LineVerdict, Verdict, VerifyReport};

use crate::error::{Error, Result};
use crate::numtheory::{is_prime_u64, mersenne_digit_count, mersenne_trial_factor};
use crate::specialfn::ErrorBoundModel;
use crate::tmcmc::{ChainSnapshot, HuntTarget, TargetKind, TmcmcChain, TmcmcConfig};

/// First line of every CSV and JSON-lines file written here.
pub const FORMAT_HEADER: &str = "# prime-oracle v1";

/// Relative slack allowed between `k·log k` and `p0` in a plan.
pub const CALIBRATION_TOLERANCE: f64 = 0.05;

/// The integer `k` minimizing `|k·log k − p0|`.
pub fn solve_k(p0: f64) -> Result<u64> {
    if !(p0 >= 10.0) || !p0.is_finite() {
        return Err(Error::domain(format!("p0 must be a finite value >= 10, got {p0}")));
    }
    let g = |k: f64| k * k.ln() - p0;
    let (mut lo, mut hi) = (1.0_f64, p0);
    let mut k = p0 / p0.ln();
    for _ in 0..100 {
        let gk = g(k);
        if gk > 0.0 {
            hi = k;
        } else {
            lo = k;
        }
        let mut next = k - gk / (k.ln() + 1.0);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= 1e-12 * k {
            k = next;
            break;
        }
        k = next;
    }
    let below = k.floor().max(1.0);
    let best = if g(below).abs() <= g(below + 1.0).abs() { below } else { below + 1.0 };
    Ok(best as u64)
}

/// Parameters of one hunt.
#[derive(Debug, Clone, PartialEq)]
pub struct HuntPlan {
    pub p0: u64,
    /// Calibrated so that `k·log k ≈ p0`.
    pub k: u64,
    /// Steps per chain after the burn-in.
    pub iterations: u64,
    /// Leading steps per chain whose states are never recorded.
    pub burn_in: u64,
    /// Repetitions of a general hunt, each re-seating `p0` at the largest
    /// prime the previous one found.
    pub rounds: u32,
    pub config: TmcmcConfig,
    pub model: ErrorBoundModel,
    pub output: Option<PathBuf>,
    /// Screen Mersenne exponents by trial factors of `2^p − 1` below `2^B`.
    pub trial_factor_bits: Option<u32>,
    /// Chain state is saved here when a session stops early and read back
    /// on the next call.
    pub checkpoint: Option<PathBuf>,
    /// Per-chain step budget for this session; `None` runs to completion.
    pub stop_after: Option<u64>,
}

impl HuntPlan {
    pub fn new(p0: u64, iterations: u64) -> Result<Self> {
        let plan = Self {
            p0,
            k: solve_k(p0 as f64)?,
            iterations,
            burn_in: 0,
            rounds: 1,
            config: TmcmcConfig::default(),
            model: ErrorBoundModel::Mt,
            output: None,
            trial_factor_bits: None,
            checkpoint: None,
            stop_after: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Plan for a Mersenne hunt: `burn_in` discarded steps, then `keep`.
    pub fn mersenne(p0: u64, burn_in: u64, keep: u64) -> Result<Self> {
        let mut plan = Self::new(p0, keep)?;
        plan.burn_in = burn_in;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p0 < 10 {
            return Err(Error::domain(format!("p0 must be at least 10, got {}", self.p0)));
        }
        let k = self.k as f64;
        let p0 = self.p0 as f64;
        if self.k < 2 || ((k * k.ln() - p0) / p0).abs() > CALIBRATION_TOLERANCE {
            return Err(Error::domain(format!("k = {} is not calibrated to p0 = {}", self.k, self.p0)));
        }
        if self.rounds == 0 {
            return Err(Error::domain("rounds must be at least 1"));
        }
        self.burn_in
            .checked_add(self.iterations)
            .ok_or_else(|| Error::domain("burn-in plus iterations overflows"))?;
        self.config.validate()
    }

    fn total_steps(&self) -> u64 {
        self.burn_in + self.iterations
    }
}

/// Counters summed over the chains of a hunt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HuntStats {
    pub steps: u64,
    /// Post-burn-in states examined.
    pub eligible: u64,
    /// States whose floor was 0 or 1.
    pub skipped_small: u64,
    /// States whose candidate does not fit in 64 bits.
    pub skipped_overflow: u64,
    pub composite: u64,
    pub prime: u64,
    /// Prime exponents discarded because `2^p − 1` has a small factor.
    pub trial_factored: u64,
    pub accepted: u64,
}

impl HuntStats {
    fn add(&mut self, o: &HuntStats) {
        self.steps += o.steps;
        self.eligible += o.eligible;
        self.skipped_small += o.skipped_small;
        self.skipped_overflow += o.skipped_overflow;
        self.composite += o.composite;
        self.prime += o.prime;
        self.trial_factored += o.trial_factored;
        self.accepted += o.accepted;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u32,
    pub p0: u64,
    pub k: u64,
    /// Distinct primes found by any chain this round.
    pub found: usize,
    pub largest: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuntReport {
    /// Distinct records found during this call, in arrival order.
    pub records: Vec<CandidateRecord>,
    /// How many of them were new to the store.
    pub appended: usize,
    /// Every value found under each target kind, over all rounds.
    pub found_by_target: Vec<(TargetKind, BTreeSet<u64>)>,
    pub rounds: Vec<RoundSummary>,
    pub stats: HuntStats,
    /// False when the session stopped early and left a checkpoint.
    pub completed: bool,
}

impl HuntReport {
    /// Values found under both general targets.
    pub fn intersection(&self) -> BTreeSet<u64> {
        let mut sets = self.found_by_target.iter().map(|(_, s)| s);
        match sets.next() {
            Some(first) => sets.fold(first.clone(), |acc, s| acc.intersection(s).copied().collect()),
            None => BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ChainCheckpoint {
    target_kind: TargetKind,
    seed: u64,
    snapshot: ChainSnapshot,
    found: Vec<u64>,
    stats: HuntStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct HuntCheckpoint {
    fingerprint: String,
    round: u32,
    p0: u64,
    k: u64,
    chains: Vec<ChainCheckpoint>,
    found_by_target: Vec<(TargetKind, Vec<u64>)>,
    rounds: Vec<RoundSummary>,
    stats: HuntStats,
}

fn fingerprint(plan: &HuntPlan, kinds: &[TargetKind]) -> String {
    let kinds: Vec<String> = kinds.iter().map(|k| k.to_string()).collect();
    format!(
        "{}|{}|{}|{}|{}|{}|{:?}|{}|{:?}",
        kinds.join("+"),
        plan.p0,
        plan.iterations,
        plan.burn_in,
        plan.rounds,
        plan.model,
        plan.trial_factor_bits,
        plan.config.seed,
        (plan.config.p_add, plan.config.add_scale, plan.config.mult_scale),
    )
}

/// Independent seed for chain `index` of `round`.
fn chain_seed(base: u64, round: u32, index: usize) -> u64 {
    let mut z = base ^ (u64::from(round) << 32 | index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Job {
    target: HuntTarget,
    seed: u64,
    chain: TmcmcChain,
    found: BTreeSet<u64>,
    stats: HuntStats,
}

struct JobSettings {
    config: TmcmcConfig,
    total: u64,
    burn_in: u64,
    budget: Option<u64>,
    kind: CandidateKind,
    trial_factor_bits: Option<u32>,
}

fn run_job(job: &mut Job, s: &JobSettings, tx: &mpsc::Sender<CandidateRecord>, abort: &AtomicBool) {
    let target = job.target;
    let lt = |z: f64| target.log_target(z).ok();
    let mut steps_left = s.total.saturating_sub(job.chain.iteration());
    if let Some(b) = s.budget {
        steps_left = steps_left.min(b);
    }
    let mut verdicts: HashMap<u64, bool> = HashMap::new();
    for _ in 0..steps_left {
        if abort.load(Ordering::Relaxed) {
            return;
        }
        let accepted = job.chain.step(lt, &s.config);
        job.stats.steps += 1;
        job.stats.accepted += u64::from(accepted);
        let it = job.chain.iteration();
        if it <= s.burn_in {
            continue;
        }
        job.stats.eligible += 1;
        let t = job.chain.z().exp().floor();
        if t < 2.0 {
            job.stats.skipped_small += 1;
            continue;
        }
        let Some(value) = (t < 1.8e19).then_some(t as u64).and_then(|t| t.checked_add(target.p0)) else {
            job.stats.skipped_overflow += 1;
            continue;
        };
        let bits = s.trial_factor_bits;
        let admissible = *verdicts.entry(value).or_insert_with(|| {
            is_prime_u64(value) && bits.is_none_or(|b| mersenne_trial_factor(value, b).is_none())
        });
        if !admissible {
            if bits.is_some() && is_prime_u64(value) {
                job.stats.trial_factored += 1;
            } else {
                job.stats.composite += 1;
            }
            continue;
        }
        job.stats.prime += 1;
        if job.found.insert(value) {
            let rec = CandidateRecord {
                value,
                kind: s.kind,
                p0: target.p0,
                k: target.k,
                seed: job.seed,
                iteration_found: it,
                target_kind: target.kind,
                digit_count: (s.kind == CandidateKind::MersenneExponent).then(|| mersenne_digit_count(value)),
            };
            if tx.send(rec).is_err() {
                return;
            }
        }
    }
}

fn save_checkpoint(path: &Path, cp: &HuntCheckpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let json = serde_json::to_string_pretty(cp).expect("checkpoint serializes");
    std::fs::write(&tmp, json)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<Option<HuntCheckpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Error::parse(None, format!("checkpoint {}: {e}", path.display())))
}

fn run_hunt(plan: &HuntPlan, kinds: &[TargetKind], kind: CandidateKind) -> Result<HuntReport> {
    plan.validate()?;
    let mut store = match &plan.output {
        Some(p) => ResultStore::open(p)?,
        None => ResultStore::in_memory(),
    };
    let fp = fingerprint(plan, kinds);
    let resume = match &plan.checkpoint {
        Some(p) => load_checkpoint(p)?,
        None => None,
    };
    if let Some(cp) = &resume {
        if cp.fingerprint != fp {
            return Err(Error::Consistency("checkpoint belongs to a different plan".into()));
        }
    }

    let (mut round, mut p0, mut k, mut rounds, mut stats) = (0, plan.p0, plan.k, Vec::new(), HuntStats::default());
    let mut found_by_target: Vec<(TargetKind, BTreeSet<u64>)> =
        kinds.iter().map(|&t| (t, BTreeSet::new())).collect();
    let mut resumed_chains = None;
    if let Some(cp) = resume {
        round = cp.round;
        p0 = cp.p0;
        k = cp.k;
        rounds = cp.rounds;
        stats = cp.stats;
        for ((t, set), (ct, vals)) in found_by_target.iter_mut().zip(cp.found_by_target) {
            if *t != ct {
                return Err(Error::Consistency("checkpoint target order mismatch".into()));
            }
            set.extend(vals);
        }
        resumed_chains = Some(cp.chains);
    }

    let mut budget = plan.stop_after;
    let mut session_records = Vec::new();
    let mut session_seen = BTreeSet::new();
    let mut appended = 0;

    while round < plan.rounds {
        let mut jobs = Vec::with_capacity(kinds.len());
        match resumed_chains.take() {
            Some(chains) => {
                if chains.len() != kinds.len() {
                    return Err(Error::Consistency("checkpoint chain count mismatch".into()));
                }
                for c in chains {
                    jobs.push(Job {
                        target: HuntTarget::new(c.target_kind, p0, k, plan.model)?,
                        seed: c.seed,
                        chain: TmcmcChain::restore(&c.snapshot)?,
                        found: c.found.into_iter().collect(),
                        stats: c.stats,
                    });
                }
            }
            None => {
                for (i, &t) in kinds.iter().enumerate() {
                    let target = HuntTarget::new(t, p0, k, plan.model)?;
                    let seed = chain_seed(plan.config.seed, round, i);
                    jobs.push(Job {
                        target,
                        seed,
                        chain: TmcmcChain::for_target(&target, seed)?,
                        found: BTreeSet::new(),
                        stats: HuntStats::default(),
                    });
                }
            }
        }

        let start_iter = jobs.iter().map(|j| j.chain.iteration()).min().unwrap_or(0);
        let settings = JobSettings {
            config: plan.config,
            total: plan.total_steps(),
            burn_in: plan.burn_in,
            budget,
            kind,
            trial_factor_bits: plan.trial_factor_bits,
        };
        let abort = AtomicBool::new(false);
        let (tx, rx) = mpsc::channel();
        let mut write_error = None;
        std::thread::scope(|scope| {
            for job in jobs.iter_mut() {
                let tx = tx.clone();
                let (settings, abort) = (&settings, &abort);
                scope.spawn(move || run_job(job, settings, &tx, abort));
            }
            drop(tx);
            for rec in rx {
                if write_error.is_some() || !session_seen.insert((rec.value, rec.kind)) {
                    continue;
                }
                match store.append(rec.clone()) {
                    Ok(new) => appended += usize::from(new),
                    Err(e) => {
                        write_error = Some(e);
                        abort.store(true, Ordering::Relaxed);
                    }
                }
                session_records.push(rec);
            }
        });
        if let Some(e) = write_error {
            return Err(e);
        }

        let finished = jobs.iter().all(|j| j.chain.iteration() >= plan.total_steps());
        if let Some(b) = budget.as_mut() {
            let after = jobs.iter().map(|j| j.chain.iteration()).max().unwrap_or(0);
            *b = b.saturating_sub(after - start_iter);
        }
        if !finished {
            if let Some(path) = &plan.checkpoint {
                let cp = HuntCheckpoint {
                    fingerprint: fp.clone(),
                    round,
                    p0,
                    k,
                    chains: jobs
                        .iter()
                        .map(|j| ChainCheckpoint {
                            target_kind: j.target.kind,
                            seed: j.seed,
                            snapshot: j.chain.snapshot(),
                            found: j.found.iter().copied().collect(),
                            stats: j.stats,
                        })
                        .collect(),
                    found_by_target: found_by_target
                        .iter()
                        .map(|(t, s)| (*t, s.iter().copied().collect()))
                        .collect(),
                    rounds,
                    stats,
                };
                save_checkpoint(path, &cp)?;
            }
            return Ok(HuntReport {
                records: session_records,
                appended,
                found_by_target,
                rounds: Vec::new(),
                stats,
                completed: false,
            });
        }

        let mut round_found = BTreeSet::new();
        for j in &jobs {
            stats.add(&j.stats);
            round_found.extend(j.found.iter().copied());
            if let Some((_, set)) = found_by_target.iter_mut().find(|(t, _)| *t == j.target.kind) {
                set.extend(j.found.iter().copied());
            }
        }
        let largest = round_found.last().copied();
        rounds.push(RoundSummary { round, p0, k, found: round_found.len(), largest });
        round += 1;
        if let Some(l) = largest {
            p0 = l;
            k = solve_k(p0 as f64)?;
        }
    }

    if let Some(path) = &plan.checkpoint {
        if path.exists() {
            std::fs::remove_file(path)?;
        }
    }
    Ok(HuntReport { records: session_records, appended, found_by_target, rounds, stats, completed: true })
}

/// Hunt for primes above `p0` on both general targets, over `plan.rounds`
/// rounds.
pub fn hunt_general(plan: &HuntPlan) -> Result<HuntReport> {
    run_hunt(plan, &[TargetKind::GeneralH1, TargetKind::GeneralH2], CandidateKind::GeneralPrime)
}

/// Hunt for Mersenne exponent candidates; only states after the burn-in
/// are eligible. Runs a single round.
pub fn hunt_mersenne(plan: &HuntPlan) -> Result<HuntReport> {
    let mut plan = plan.clone();
    plan.rounds = 1;
    run_hunt(&plan, &[TargetKind::MersenneH1], CandidateKind::MersenneExponent)
}

/// Largest general prime recorded in a result file, as a Mersenne `p0`.
pub fn p0_from_results(path: &Path) -> Result<u64> {
    load_records(path)?
        .iter()
        .filter(|r| r.kind == CandidateKind::GeneralPrime)
        .map(|r| r.value)
        .max()
        .ok_or_else(|| Error::domain(format!("no general primes recorded in {}", path.display())))
}
