//! The Poisson process on `[2, ∞)` with intensity `α·li + β·f`.
//!
//! Simulation inverts the cumulative intensity: unit exponential increments
//! `E_i` are mapped to the next event by solving `Λ((t_prev, t]) = E_i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specialfn::{
    error_integral_between, log_integral_between, ErrorBoundModel, IntensityParams,
};

/// A realization of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub times: Vec<f64>,
    pub model: ErrorBoundModel,
    pub params: IntensityParams,
    pub seed: u64,
}

impl EventStream {
    /// `N([2, x])`.
    pub fn count_up_to(&self, x: f64) -> usize {
        self.times.partition_point(|&t| t <= x)
    }

    /// `N((x1, x2])`.
    pub fn count_between(&self, x1: f64, x2: f64) -> usize {
        self.count_up_to(x2).saturating_sub(self.count_up_to(x1))
    }

    /// The `n`-th event time `Z_n`, 1-based.
    pub fn nth(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.times.get(i)).copied()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `λ(x) = α/log x + β·f(x)`, with no sign check.
pub(crate) fn hazard(model: ErrorBoundModel, params: IntensityParams, x: f64) -> f64 {
    let mut h = params.alpha / x.ln();
    if params.beta != 0.0 {
        h += params.beta * model.raw_density(x);
    }
    h
}

/// `Λ((x1, x2])` without argument checks.
pub(crate) fn increment(model: ErrorBoundModel, params: IntensityParams, x1: f64, x2: f64) -> f64 {
    let mut v = params.alpha * log_integral_between(x1, x2);
    if params.beta != 0.0 {
        v += params.beta * error_integral_between(model, x1, x2);
    }
    v
}

fn check_interval(x1: f64, x2: f64) -> Result<()> {
    if !(x1 >= 2.0) || !(x2 >= x1) || x2.is_infinite() {
        return Err(Error::domain(format!("need 2 <= x1 <= x2 < ∞, got ({x1}, {x2})")));
    }
    Ok(())
}

/// `Λ((x1, x2]) = α·(Li(x2) − Li(x1)) + β·(F(x2) − F(x1))`.
pub fn cumulative_intensity(
    model: ErrorBoundModel,
    params: IntensityParams,
    x1: f64,
    x2: f64,
) -> Result<f64> {
    check_interval(x1, x2)?;
    Ok(increment(model, params, x1, x2))
}

/// Log density of the next event at `t` given the previous one at `t_prev`.
pub fn log_waiting_density(
    model: ErrorBoundModel,
    params: IntensityParams,
    t_prev: f64,
    t: f64,
) -> Result<f64> {
    check_interval(t_prev, t)?;
    if t == t_prev {
        return Err(Error::domain("waiting density needs t > t_prev"));
    }
    let h = hazard(model, params, t);
    if !(h > 0.0) {
        return Err(Error::domain(format!("intensity is not positive at t = {t} under {model}")));
    }
    Ok(-increment(model, params, t_prev, t) + h.ln())
}

/// Solve `Λ((t_prev, t]) = target` for `t`, giving up past `horizon`.
fn next_event(
    model: ErrorBoundModel,
    params: IntensityParams,
    t_prev: f64,
    target: f64,
    horizon: f64,
) -> Option<f64> {
    if increment(model, params, t_prev, horizon) < target {
        return None;
    }
    let g = |t: f64| increment(model, params, t_prev, t) - target;

    // Bracket by doubling the step from t_prev, capped at the horizon.
    let h0 = hazard(model, params, t_prev);
    let mut step = if h0 > 0.0 { target / h0 } else { 1.0 };
    let mut lo = t_prev;
    let mut hi = (t_prev + step).min(horizon);
    while g(hi) < 0.0 {
        lo = hi;
        step *= 2.0;
        hi = (t_prev + step).min(horizon);
    }

    // Newton from the bracket, falling back to bisection when it strays.
    let mut t = hi;
    for _ in 0..200 {
        let gt = g(t);
        if gt > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = hazard(model, params, t);
        let mut next = if d > 0.0 { t - gt / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-12 * t || hi - lo <= 1e-12 * hi {
            return Some(next);
        }
        t = next;
    }
    Some(t)
}

/// One realization of the process on `[2, horizon]`.
pub fn simulate(
    model: ErrorBoundModel,
    params: IntensityParams,
    horizon: f64,
    seed: u64,
) -> Result<EventStream> {
    if !(horizon > 2.0) || horizon.is_infinite() {
        return Err(Error::domain(format!("horizon must exceed 2, got {horizon}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expected = increment(model, params, 2.0, horizon).max(0.0);
    let mut times = Vec::with_capacity((expected * 1.1) as usize + 16);
    let mut t = 2.0;
    loop {
        let e: f64 = Exp1.sample(&mut rng);
        match next_event(model, params, t, e, horizon) {
            Some(next) => {
                // Guard against a stalled root at floating-point resolution.
                t = if next > t { next } else { t.next_up() };
                times.push(t);
            }
            None => break,
        }
    }
    Ok(EventStream { times, model, params, seed })
}

/// Independent realizations, one per seed, run in parallel.
pub fn simulate_replications(
    model: ErrorBoundModel,
    params: IntensityParams,
    horizon: f64,
    seeds: &[u64],
) -> Result<Vec<EventStream>> {
    seeds.par_iter().map(|&s| simulate(model, params, horizon, s)).collect()
}

/// `(x, N([2, x]) / (x / log x))` for each grid point.
pub fn pnt_ratio_check(stream: &EventStream, x_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    x_grid
        .iter()
        .map(|&x| {
            if !(x > 2.0) {
                return Err(Error::domain(format!("grid point {x} must exceed 2")));
            }
            Ok((x, stream.count_up_to(x) as f64 / (x / x.ln())))
        })
        .collect()
}

/// `(N, Z_N / (N log N))` for each `N` the stream reaches.
pub fn nth_event_check(stream: &EventStream, n_grid: &[usize]) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        if n < 2 {
            return Err(Error::domain(format!("N must be at least 2, got {n}")));
        }
        if let Some(z) = stream.nth(n) {
            let nf = n as f64;
            out.push((n, z / (nf * nf.ln())));
        }
    }
    Ok(out)
}

/// `(x, N((x, x + x^θ]) · log x / x^θ)` for each grid point.
pub fn gap_window_check(
    stream: &EventStream,
    theta: f64,
    x_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if !(theta > 0.5 && theta < 1.0) {
        return Err(Error::domain(format!("θ must lie in (1/2, 1), got {theta}")));
    }
    x_grid
        .iter()
        .map(|&x| {
            if !(x > 2.0) {
                return Err(Error::domain(format!("grid point {x} must exceed 2")));
            }
            let w = x.powf(theta);
            Ok((x, stream.count_between(x, x + w) as f64 * x.ln() / w))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::{error_integral, li, log_integral};
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64) -> IntensityParams {
        IntensityParams::new(a, b).unwrap()
    }

    #[test]
    fn intensity_examples() {
        let m = ErrorBoundModel::RhSqrt;
        assert_eq!(cumulative_intensity(m, p(1.0, 1.0), 7.0, 7.0).unwrap(), 0.0);
        let want = log_integral(1e4).unwrap() + 100.0 * 1e4f64.ln() - 2f64.sqrt() * 2f64.ln();
        assert_relative_eq!(
            cumulative_intensity(m, p(1.0, 1.0), 2.0, 1e4).unwrap(),
            want,
            max_relative = 1e-12
        );
        let x = 12345.0;
        assert_relative_eq!(
            cumulative_intensity(ErrorBoundModel::XOverLog, p(2.0, 0.0), 2.0, x).unwrap(),
            2.0 * log_integral(x).unwrap(),
            max_relative = 1e-13
        );
        assert!(cumulative_intensity(m, p(1.0, 1.0), 1.0, 3.0).is_err());
        assert!(cumulative_intensity(m, p(1.0, 1.0), 5.0, 3.0).is_err());
    }

    #[test]
    fn increments_are_additive() {
        for m in ErrorBoundModel::all_default() {
            let pr = p(1.3, 0.7);
            for (a, b, c) in [(2.0, 2.5, 40.0), (100.0, 101.0, 1e6), (1e6, 1e6 + 3.0, 1e6 + 50.0)] {
                let lhs = cumulative_intensity(m, pr, a, b).unwrap() + cumulative_intensity(m, pr, b, c).unwrap();
                let rhs = cumulative_intensity(m, pr, a, c).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn short_increment_matches_closed_form() {
        for m in ErrorBoundModel::all_default() {
            let pr = p(1.0, 1.0);
            for (a, b) in [(10.0, 10.5), (1e3, 1e3 + 60.0), (1e5, 1e5 + 20.0)] {
                let closed = (log_integral(b).unwrap() - log_integral(a).unwrap())
                    + (error_integral(m, b).unwrap() - error_integral(m, a).unwrap());
                assert_relative_eq!(increment(m, pr, a, b), closed, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn waiting_density_composes_specialfn() {
        let m = ErrorBoundModel::RhSqrt;
        let got = log_waiting_density(m, p(1.0, 1.0), 2.0, 10.0).unwrap();
        let lam = log_integral(10.0).unwrap() + error_integral(m, 10.0).unwrap();
        let want = -lam + (li(10.0).unwrap() + m.raw_density(10.0)).ln();
        assert_relative_eq!(got, want, max_relative = 1e-13);
        assert!(log_waiting_density(m, p(1.0, 1.0), 10.0, 10.0).is_err());
        assert!(log_waiting_density(ErrorBoundModel::XOverLog, p(0.0, 1.0), 2.0, 2.3).is_err());
    }

    #[test]
    fn waiting_density_near_boundary() {
        let m = ErrorBoundModel::RhEps(0.1);
        let pr = p(1.0, 2.0);
        let t0 = 50.0;
        let at = log_waiting_density(m, pr, t0, t0 * (1.0 + 1e-12)).unwrap().exp();
        assert_relative_eq!(at, hazard(m, pr, t0), max_relative = 1e-9);
    }

    #[test]
    fn waiting_density_integrates_to_survival_deficit() {
        for m in ErrorBoundModel::all_default() {
            let pr = p(1.0, 0.5);
            for (t0, t1) in [(3.0, 1e3), (1e3, 1e5)] {
                let q = testkit::integrate_log_split(
                    |t| log_waiting_density(m, pr, t0, t).map(f64::exp).unwrap_or(0.0),
                    t0,
                    t1,
                    1e-12,
                );
                let want = 1.0 - (-cumulative_intensity(m, pr, t0, t1).unwrap()).exp();
                assert!((q - want).abs() < 1e-8, "{m} ({t0},{t1}): {q} vs {want}");
            }
        }
    }

    #[test]
    fn simulation_is_deterministic_and_ordered() {
        let m = ErrorBoundModel::RhSqrt;
        let a = simulate(m, p(1.0, 1.0), 1e4, 7).unwrap();
        let b = simulate(m, p(1.0, 1.0), 1e4, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.times.windows(2).all(|w| w[0] < w[1]));
        assert!(a.times.iter().all(|&t| (2.0..=1e4).contains(&t)));
        assert!(simulate(m, p(1.0, 1.0), 2.0, 1).is_err());
    }

    #[test]
    fn tiny_horizon_is_usually_empty() {
        let m = ErrorBoundModel::RhSqrt;
        let empty = (0..100)
            .filter(|&s| simulate(m, p(1.0, 0.0), 2.0 + 1e-6, s).unwrap().is_empty())
            .count();
        assert!(empty >= 99);
    }

    #[test]
    fn time_change_inverts_increments() {
        // The compensator evaluated at the events is a unit-rate process, so
        // its gaps are Exp(1): mean 1, variance 1.
        let m = ErrorBoundModel::Mt;
        let pr = p(1.0, 1.0);
        let s = simulate(m, pr, 2e5, 3).unwrap();
        let mut prev = 2.0;
        let gaps: Vec<f64> = s
            .times
            .iter()
            .map(|&t| {
                let g = cumulative_intensity(m, pr, prev, t).unwrap();
                prev = t;
                g
            })
            .collect();
        let (mean, var) = testkit::mean_var(&gaps);
        let se = (1.0 / gaps.len() as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn check_helpers() {
        let s = EventStream {
            times: vec![2.5, 3.0, 10.0, 20.0],
            model: ErrorBoundModel::RhSqrt,
            params: p(1.0, 1.0),
            seed: 0,
        };
        assert_eq!(s.count_up_to(10.0), 3);
        assert_eq!(s.count_between(2.5, 20.0), 3);
        assert_eq!(nth_event_check(&s, &[2, 9]).unwrap(), vec![(2, 3.0 / (2.0 * 2f64.ln()))]);
        assert!(nth_event_check(&s, &[1]).is_err());
        assert!(gap_window_check(&s, 0.5, &[10.0]).is_err());
        assert!(gap_window_check(&s, 0.51, &[10.0]).is_ok());
        assert!(pnt_ratio_check(&s, &[2.0]).is_err());
    }
}
