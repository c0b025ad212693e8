//! Stage-wise recursive posterior over `(α_k, β_k)`.
//!
//! At stage `k` the posterior is a two-component mixture of products of gamma
//! densities with shapes `(γ+k, ξ+k−1)` and `(γ+k−1, ξ+k)`, common rates
//! `S1 = a + Li(t_k)` and `S2 = b + F(t_k)`, and weights proportional to
//! `li(t_k)` and `f(t_k)`.

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::specialfn::{
    error_density, error_integral, error_integral_between, li, log_integral, log_integral_between,
    ErrorBoundModel,
};

/// Prior hyperparameters `(a, b, γ, ξ)`: rates `a, b` and shapes `γ, ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub xi: f64,
}

impl Hyper {
    pub fn new(a: f64, b: f64, gamma: f64, xi: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("γ", gamma), ("ξ", xi)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("hyperparameter {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { a, b, gamma, xi })
    }
}

impl Default for Hyper {
    fn default() -> Self {
        Self { a: 0.0, b: 0.0, gamma: 1.0, xi: 1.0 }
    }
}

impl FromStr for Hyper {
    type Err = Error;

    /// `"a,b,γ,ξ"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::parse(None, format!("hyperparameters need four comma-separated values, got {s:?}")));
        }
        let mut v = [0.0; 4];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::parse(None, format!("bad hyperparameter {p:?}")))?;
        }
        Hyper::new(v[0], v[1], v[2], v[3])
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.gamma, self.xi)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn new(v: f64) -> Self {
        Self { sum: v, comp: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sufficient statistics of the recursive posterior after `k` primes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionState {
    k: u64,
    hyper: Hyper,
    sum_b1: CompensatedSum,
    sum_b2: CompensatedSum,
    t_last: f64,
    model: ErrorBoundModel,
}

impl RecursionState {
    /// Stage 1 after observing the first prime `t1`.
    pub fn init(hyper: Hyper, model: ErrorBoundModel, t1: f64) -> Result<Self> {
        if !(t1 >= 2.0) || t1.is_infinite() {
            return Err(Error::domain(format!("first observation must be >= 2, got {t1}")));
        }
        Ok(Self {
            k: 1,
            hyper,
            sum_b1: CompensatedSum::new(hyper.a + log_integral(t1)?),
            sum_b2: CompensatedSum::new(hyper.b + error_integral(model, t1)?),
            t_last: t1,
            model,
        })
    }

    /// Feed the next prime, returning the stage `k + 1` state.
    pub fn update(&self, t_next: f64) -> Result<Self> {
        let mut next = *self;
        next.advance(t_next)?;
        Ok(next)
    }

    /// In-place form of [`update`](Self::update).
    pub fn advance(&mut self, t_next: f64) -> Result<()> {
        if !(t_next > self.t_last) || t_next.is_infinite() {
            return Err(Error::Ordering(format!(
                "next observation {t_next} must exceed the last one {}",
                self.t_last
            )));
        }
        self.sum_b1.add(log_integral_between(self.t_last, t_next));
        self.sum_b2.add(error_integral_between(self.model, self.t_last, t_next));
        self.t_last = t_next;
        self.k += 1;
        Ok(())
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn hyper(&self) -> Hyper {
        self.hyper
    }

    pub fn model(&self) -> ErrorBoundModel {
        self.model
    }

    pub fn t_last(&self) -> f64 {
        self.t_last
    }

    /// `a + Li(t_k)`.
    pub fn sum_b1(&self) -> f64 {
        self.sum_b1.value()
    }

    /// `b + F(t_k)`.
    pub fn sum_b2(&self) -> f64 {
        self.sum_b2.value()
    }

    /// The two-component posterior of `(α_k, β_k)`.
    pub fn posterior(&self) -> Result<GammaProductMixture> {
        let k = self.k as f64;
        let Hyper { gamma, xi, .. } = self.hyper;
        let (s1, s2) = (self.sum_b1(), self.sum_b2());
        let c1 = li(self.t_last)?;
        let c2 = error_density(self.model, self.t_last)?;
        GammaProductMixture::from_log_weights(vec![
            (c1.ln(), s1, gamma + k, s2, xi + k - 1.0),
            (c2.ln(), s1, gamma + k - 1.0, s2, xi + k),
        ])
    }

    /// Log density of the next observation at `t > t_k`, integrating out
    /// `(α_k, β_k)` under the stage-`k` posterior.
    pub fn log_posterior_predictive(&self, t: f64) -> Result<f64> {
        if !(t > self.t_last) || t.is_infinite() {
            return Err(Error::domain(format!(
                "predictive point {t} must exceed the last observation {}",
                self.t_last
            )));
        }
        let post = self.posterior()?;
        post.log_predictive(
            log_integral_between(self.t_last, t),
            error_integral_between(self.model, self.t_last, t),
            li(t)?,
            error_density(self.model, t)?,
        )
    }
}

/// One mixture component: `weight · Gamma(α; rate_a, shape_a) · Gamma(β; rate_b, shape_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaProductComponent {
    pub weight: f64,
    pub rate_a: f64,
    pub shape_a: f64,
    pub rate_b: f64,
    pub shape_b: f64,
}

/// Mixture of products of gamma densities over `(α, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProductMixture {
    components: Vec<GammaProductComponent>,
    /// Natural log of each weight, kept so that tiny weights stay exact.
    log_weights: Vec<f64>,
}

pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn ln_gamma_density(x: f64, rate: f64, shape: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

impl GammaProductMixture {
    /// Build from `(log C, rate_a, shape_a, rate_b, shape_b)` where the
    /// unnormalized weight is `C·Γ(shape_a)/rate_a^shape_a·Γ(shape_b)/rate_b^shape_b`.
    pub(crate) fn from_log_weights(terms: Vec<(f64, f64, f64, f64, f64)>) -> Result<Self> {
        let mut raw = Vec::with_capacity(terms.len());
        for &(ln_c, ra, sa, rb, sb) in &terms {
            if !(sa > 0.0 && sb > 0.0) {
                return Err(Error::Improper(format!(
                    "posterior component has non-positive shape ({sa}, {sb})"
                )));
            }
            if !(ra > 0.0 && rb > 0.0) {
                return Err(Error::Improper(format!(
                    "posterior component has non-positive rate ({ra}, {rb})"
                )));
            }
            if ln_c.is_nan() {
                return Err(Error::domain("mixture coefficient is negative"));
            }
            raw.push(ln_c + ln_gamma(sa) - sa * ra.ln() + ln_gamma(sb) - sb * rb.ln());
        }
        let norm = log_sum_exp(raw.iter().copied());
        if !norm.is_finite() {
            return Err(Error::Improper("mixture weights do not normalize".into()));
        }
        let log_weights: Vec<f64> = raw.iter().map(|r| r - norm).collect();
        let components = terms
            .iter()
            .zip(&log_weights)
            .map(|(&(_, ra, sa, rb, sb), &lw)| GammaProductComponent {
                weight: lw.exp(),
                rate_a: ra,
                shape_a: sa,
                rate_b: rb,
                shape_b: sb,
            })
            .collect();
        Ok(Self { components, log_weights })
    }

    pub fn components(&self) -> &[GammaProductComponent] {
        &self.components
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn ln_density(&self, alpha: f64, beta: f64) -> f64 {
        if !(alpha > 0.0 && beta > 0.0) {
            return f64::NEG_INFINITY;
        }
        log_sum_exp(self.components.iter().zip(&self.log_weights).map(|(c, lw)| {
            lw + ln_gamma_density(alpha, c.rate_a, c.shape_a)
                + ln_gamma_density(beta, c.rate_b, c.shape_b)
        }))
    }

    pub fn density(&self, alpha: f64, beta: f64) -> f64 {
        self.ln_density(alpha, beta).exp()
    }

    fn mean_var(&self, pick: impl Fn(&GammaProductComponent) -> (f64, f64)) -> (f64, f64) {
        let mean: f64 = self
            .components
            .iter()
            .map(|c| {
                let (r, s) = pick(c);
                c.weight * s / r
            })
            .sum();
        // Law of total variance avoids E[x²] − E[x]² cancellation.
        let var = self
            .components
            .iter()
            .map(|c| {
                let (r, s) = pick(c);
                let m = s / r;
                c.weight * (s / (r * r) + (m - mean) * (m - mean))
            })
            .sum();
        (mean, var)
    }

    pub fn mean_alpha(&self) -> f64 {
        self.mean_var(|c| (c.rate_a, c.shape_a)).0
    }

    pub fn var_alpha(&self) -> f64 {
        self.mean_var(|c| (c.rate_a, c.shape_a)).1
    }

    pub fn mean_beta(&self) -> f64 {
        self.mean_var(|c| (c.rate_b, c.shape_b)).0
    }

    pub fn var_beta(&self) -> f64 {
        self.mean_var(|c| (c.rate_b, c.shape_b)).1
    }

    /// `log E[(α·c1 + β·c2)·exp(−α·d1 − β·d2)]` under the mixture: the
    /// predictive density of a waiting time whose intensity integrals over
    /// the gap are `d1, d2` and whose intensity coefficients at the point are
    /// `c1, c2`.
    pub fn log_predictive(&self, d1: f64, d2: f64, c1: f64, c2: f64) -> Result<f64> {
        if !(c1 >= 0.0 && c2 >= 0.0) || c1 + c2 == 0.0 {
            return Err(Error::domain(format!("intensity coefficients ({c1}, {c2}) must be non-negative")));
        }
        let mut terms = Vec::with_capacity(2 * self.components.len());
        for (c, lw) in self.components.iter().zip(&self.log_weights) {
            let ra = c.rate_a + d1;
            let rb = c.rate_b + d2;
            let survive = -c.shape_a * (d1 / c.rate_a).ln_1p() - c.shape_b * (d2 / c.rate_b).ln_1p();
            if c1 > 0.0 {
                terms.push(lw + survive + (c1 * c.shape_a / ra).ln());
            }
            if c2 > 0.0 {
                terms.push(lw + survive + (c2 * c.shape_b / rb).ln());
            }
        }
        Ok(log_sum_exp(terms))
    }
}

/// One diagnostic row of a posterior trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub k: u64,
    pub t_k: u64,
    pub mean_alpha: f64,
    pub var_alpha: f64,
    pub mean_beta: f64,
    pub var_beta: f64,
}

/// Posterior moments after all primes `<= c` for each checkpoint `c`.
///
/// `primes` must be ascending; checkpoints below the first prime are skipped.
pub fn trajectory(
    model: ErrorBoundModel,
    primes: &[u64],
    hyper: Hyper,
    checkpoints: &[u64],
) -> Result<Vec<TrajectoryRow>> {
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    let Some((&first, rest)) = primes.split_first() else {
        return Ok(Vec::new());
    };
    let mut state = RecursionState::init(hyper, model, first as f64)?;
    let mut rows = Vec::with_capacity(sorted.len());
    let mut idx = 0usize; // primes[..=idx] have been fed
    for c in sorted {
        if c < first {
            continue;
        }
        while let Some(&p) = rest.get(idx) {
            if p > c {
                break;
            }
            state.advance(p as f64)?;
            idx += 1;
        }
        let post = state.posterior()?;
        rows.push(TrajectoryRow {
            k: state.k(),
            t_k: state.t_last() as u64,
            mean_alpha: post.mean_alpha(),
            var_alpha: post.var_alpha(),
            mean_beta: post.mean_beta(),
            var_beta: post.var_beta(),
        });
    }
    Ok(rows)
}

/// One row of the asymptotic-form comparison, in log form where the values
/// overflow a double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub log10_k: f64,
    /// `log(√k / (log k)^{3/2})`
    pub ln_rh_form: f64,
    /// `(log k)^{−1/4} · exp(√(log k / 6.315))`
    pub mt_form: f64,
}

impl AsymptoticRow {
    /// `√k / (log k)^{3/2}` as `(mantissa, decimal exponent)`.
    pub fn rh_form_scientific(&self) -> (f64, i64) {
        let l10 = self.ln_rh_form / std::f64::consts::LN_10;
        let e = l10.floor();
        (10f64.powf(l10 - e), e as i64)
    }
}

/// Growth rates of the β posterior mean under the square-root and MT error
/// bounds, with `log t_k` replaced by `log k`.
pub fn asymptotic_form_table(log10_k: &[f64]) -> Result<Vec<AsymptoticRow>> {
    log10_k
        .iter()
        .map(|&e| {
            if !(e >= 3f64.log10()) || e.is_infinite() {
                return Err(Error::domain(format!("k must be at least 3, got 10^{e}")));
            }
            let lk = e * std::f64::consts::LN_10;
            Ok(AsymptoticRow {
                log10_k: e,
                ln_rh_form: 0.5 * lk - 1.5 * lk.ln(),
                mt_form: (-0.25 * lk.ln() + (lk / crate::specialfn::MT_CONSTANT).sqrt()).exp(),
            })
        })
        .collect()
}

/// `log π(t_next | M1) − log π(t_next | M2)` for two states fed the same primes.
pub fn model_compare_log_ratio(m1: &RecursionState, m2: &RecursionState, t_next: f64) -> Result<f64> {
    if m1.k != m2.k || m1.t_last != m2.t_last {
        return Err(Error::Consistency(format!(
            "states disagree: k = {} vs {}, last = {} vs {}",
            m1.k, m2.k, m1.t_last, m2.t_last
        )));
    }
    if m1 == m2 {
        return Ok(0.0);
    }
    Ok(m1.log_posterior_predictive(t_next)? - m2.log_posterior_predictive(t_next)?)
}

/// MT against x/log x at each stage `k` in `k_checkpoints`, predicting the
/// `(k+1)`-th prime.
pub fn model_compare_series(
    primes: &[u64],
    hyper: Hyper,
    k_checkpoints: &[u64],
) -> Result<Vec<(u64, f64)>> {
    let mut ks = k_checkpoints.to_vec();
    ks.sort_unstable();
    let Some(&first) = primes.first() else {
        return Ok(Vec::new());
    };
    let mut s1 = RecursionState::init(hyper, ErrorBoundModel::Mt, first as f64)?;
    let mut s2 = RecursionState::init(hyper, ErrorBoundModel::XOverLog, first as f64)?;
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        if k < 1 || k as usize >= primes.len() {
            continue;
        }
        while s1.k() < k {
            let p = primes[s1.k() as usize] as f64;
            s1.advance(p)?;
            s2.advance(p)?;
        }
        let t_next = primes[k as usize] as f64;
        out.push((k, model_compare_log_ratio(&s1, &s2, t_next)?));
    }
    Ok(out)
}
