//! Exact posterior of stage-independent `(α, β)` given `t_1..t_k`.
//!
//! The likelihood carries `∏ (α·C1_i + β·C2_i)`. Expanding it gives a
//! `(k+1)`-component gamma-product mixture whose coefficients `e_r` (of
//! `α^r β^(k−r)`) are built one factor at a time in log space.

use crate::error::{Error, Result};
use crate::recursive::{log_sum_exp, GammaProductMixture, Hyper, RecursionState};
use crate::specialfn::{
    error_density, error_integral, error_integral_between, li, log_integral, log_integral_between,
    ErrorBoundModel,
};

/// Default bound on `k`.
pub const DEFAULT_NONREC_CAP: usize = 64;

/// Non-recursive posterior after `k` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct NonRecPosterior {
    k: usize,
    hyper: Hyper,
    model: ErrorBoundModel,
    t_last: f64,
    sum_b1: f64,
    sum_b2: f64,
    /// `log e_r`, coefficient of `α^r β^(k−r)`.
    ln_coeffs: Vec<f64>,
    /// Components indexed by the power of `α`: shapes `(γ+r, ξ+k−r)`.
    by_alpha: GammaProductMixture,
    /// Components indexed by the power of `β`: shapes `(γ+k−r, ξ+r)`.
    by_beta: GammaProductMixture,
}

/// `log` coefficients of `∏ (x·c1_i + y·c2_i)` in powers of `x`, from log inputs.
pub fn log_product_coefficients(ln_c1: &[f64], ln_c2: &[f64]) -> Vec<f64> {
    assert_eq!(ln_c1.len(), ln_c2.len());
    let mut coeffs = vec![0.0f64];
    for (&a, &b) in ln_c1.iter().zip(ln_c2) {
        let mut next = vec![f64::NEG_INFINITY; coeffs.len() + 1];
        for (r, &c) in coeffs.iter().enumerate() {
            next[r] = log_add(next[r], c + b);
            next[r + 1] = log_add(next[r + 1], c + a);
        }
        coeffs = next;
    }
    coeffs
}

fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

impl NonRecPosterior {
    /// Build from the ascending observations `t_1..t_k`, `k <= 64`.
    pub fn build(primes: &[u64], hyper: Hyper, model: ErrorBoundModel) -> Result<Self> {
        Self::build_with_cap(primes, hyper, model, DEFAULT_NONREC_CAP)
    }

    pub fn build_with_cap(
        primes: &[u64],
        hyper: Hyper,
        model: ErrorBoundModel,
        cap: usize,
    ) -> Result<Self> {
        let k = primes.len();
        if k == 0 {
            return Err(Error::domain("need at least one observation"));
        }
        if k > cap {
            return Err(Error::Resource(format!("non-recursive posterior is capped at k = {cap}, got {k}")));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Ordering("observations must be strictly increasing".into()));
        }
        let t_last = primes[k - 1] as f64;
        let mut ln_c1 = Vec::with_capacity(k);
        let mut ln_c2 = Vec::with_capacity(k);
        for &p in primes {
            let t = p as f64;
            ln_c1.push(li(t)?.ln());
            ln_c2.push(error_density(model, t)?.ln());
        }
        let sum_b1 = hyper.a + log_integral(t_last)?;
        let sum_b2 = hyper.b + error_integral(model, t_last)?;

        let ln_coeffs = log_product_coefficients(&ln_c1, &ln_c2);
        let kf = k as f64;
        let by_alpha = GammaProductMixture::from_log_weights(
            (0..=k)
                .map(|r| {
                    let r = r as f64;
                    (ln_coeffs[r as usize], sum_b1, hyper.gamma + r, sum_b2, hyper.xi + kf - r)
                })
                .collect(),
        )?;
        // The same product expanded in powers of β, built independently.
        let ln_dual = log_product_coefficients(&ln_c2, &ln_c1);
        let by_beta = GammaProductMixture::from_log_weights(
            (0..=k)
                .map(|r| {
                    let r = r as f64;
                    (ln_dual[r as usize], sum_b1, hyper.gamma + kf - r, sum_b2, hyper.xi + r)
                })
                .collect(),
        )?;
        Ok(Self { k, hyper, model, t_last, sum_b1, sum_b2, ln_coeffs, by_alpha, by_beta })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sum_b1(&self) -> f64 {
        self.sum_b1
    }

    pub fn sum_b2(&self) -> f64 {
        self.sum_b2
    }

    /// `log e_r` for `r = 0..=k`.
    pub fn ln_coefficients(&self) -> &[f64] {
        &self.ln_coeffs
    }

    /// Mixing probabilities `p_r` over the power `r` of `α`.
    pub fn p_weights(&self) -> Vec<f64> {
        self.by_alpha.components().iter().map(|c| c.weight).collect()
    }

    /// Mixing probabilities `q_r` over the power `r` of `β`.
    pub fn q_weights(&self) -> Vec<f64> {
        self.by_beta.components().iter().map(|c| c.weight).collect()
    }

    /// The mixture in its `α`-indexed form.
    pub fn mixture(&self) -> &GammaProductMixture {
        &self.by_alpha
    }

    /// The mixture in its `β`-indexed form.
    pub fn dual_mixture(&self) -> &GammaProductMixture {
        &self.by_beta
    }

    /// `Σ p_r (γ+r) / S1`.
    pub fn mean_alpha(&self) -> f64 {
        self.by_alpha.mean_alpha()
    }

    pub fn var_alpha(&self) -> f64 {
        self.by_alpha.var_alpha()
    }

    /// `Σ q_r (ξ+r) / S2`.
    pub fn mean_beta(&self) -> f64 {
        self.by_beta.mean_beta()
    }

    pub fn var_beta(&self) -> f64 {
        self.by_beta.var_beta()
    }

    /// Log predictive density of the next observation at `t_next > t_k`:
    /// the `α·li` part summed over `p_r`, the `β·f` part over `q_r`.
    pub fn log_predictive(&self, t_next: f64) -> Result<f64> {
        if !(t_next > self.t_last) || t_next.is_infinite() {
            return Err(Error::domain(format!(
                "predictive point {t_next} must exceed the last observation {}",
                self.t_last
            )));
        }
        let (s1, s2) = (self.sum_b1, self.sum_b2);
        let d1 = log_integral_between(self.t_last, t_next);
        let d2 = error_integral_between(self.model, self.t_last, t_next);
        let (s1n, s2n) = (s1 + d1, s2 + d2);
        let (l1, l2) = (-(d1 / s1).ln_1p(), -(d2 / s2).ln_1p()); // log(S/S')
        let (g, x, kf) = (self.hyper.gamma, self.hyper.xi, self.k as f64);

        let alpha_part = log_sum_exp(self.by_alpha.log_weights().iter().enumerate().map(|(r, lw)| {
            let r = r as f64;
            lw + ((g + r) / s1n).ln() + (g + r) * l1 + (x + kf - r) * l2
        }));
        let beta_part = log_sum_exp(self.by_beta.log_weights().iter().enumerate().map(|(r, lw)| {
            let r = r as f64;
            lw + ((x + r) / s2n).ln() + (x + r) * l2 + (g + kf - r) * l1
        }));
        Ok(log_sum_exp([
            li(t_next)?.ln() + alpha_part,
            error_density(self.model, t_next)?.ln() + beta_part,
        ]))
    }
}

/// Recursive against non-recursive moments at one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceRow {
    pub k: usize,
    pub rec_mean_alpha: f64,
    pub nonrec_mean_alpha: f64,
    pub rec_mean_beta: f64,
    pub nonrec_mean_beta: f64,
    pub gap_alpha: f64,
    pub gap_beta: f64,
}

/// Compare both engines on `primes[..k]` for each `k` in `checkpoints`.
pub fn equivalence_report(
    primes: &[u64],
    hyper: Hyper,
    model: ErrorBoundModel,
    checkpoints: &[usize],
) -> Result<Vec<EquivalenceRow>> {
    let mut ks = checkpoints.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::with_capacity(ks.len());
    let Some(&first) = primes.first() else {
        return Ok(rows);
    };
    let mut state = RecursionState::init(hyper, model, first as f64)?;
    for k in ks {
        if k == 0 || k > primes.len() {
            return Err(Error::domain(format!("checkpoint {k} outside 1..={}", primes.len())));
        }
        while (state.k() as usize) < k {
            state.advance(primes[state.k() as usize] as f64)?;
        }
        let rec = state.posterior()?;
        let non = NonRecPosterior::build(&primes[..k], hyper, model)?;
        let (ra, na, rb, nb) = (rec.mean_alpha(), non.mean_alpha(), rec.mean_beta(), non.mean_beta());
        rows.push(EquivalenceRow {
            k,
            rec_mean_alpha: ra,
            nonrec_mean_alpha: na,
            rec_mean_beta: rb,
            nonrec_mean_beta: nb,
            gap_alpha: (ra - na).abs(),
            gap_beta: (rb - nb).abs(),
        });
    }
    Ok(rows)
}
