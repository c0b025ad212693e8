//! Closed-form posteriors and predictives against brute-force 2-D quadrature
//! of prior × likelihood.

use approx::assert_relative_eq;
use prime_oracle::nonrecursive::NonRecPosterior;
use prime_oracle::recursive::{Hyper, RecursionState};
use testkit::integrate;

mod common;

use common::*;

fn primes(n: usize) -> Vec<u64> {
    testkit::primes_by_trial(200).into_iter().take(n).collect()
}

#[test]
fn recursive_stage_five_against_quadrature() {
    let hyper = Hyper::default();
    let ts = primes(5);
    let mut state = RecursionState::init(hyper, RH, 2.0).unwrap();
    for &t in &ts[1..] {
        state.advance(t as f64).unwrap();
    }
    assert_eq!(state.k(), 5);
    let tk = 11.0;
    let o = recursive_flat_oracle(5, tk);

    let post = state.posterior().unwrap();
    let ma = o.expect(|a, _| a);
    let mb = o.expect(|_, b| b);
    assert_relative_eq!(post.mean_alpha(), ma, max_relative = 1e-6);
    assert_relative_eq!(post.mean_beta(), mb, max_relative = 1e-6);
    assert_relative_eq!(post.var_alpha(), o.expect(|a, _| (a - ma).powi(2)), max_relative = 1e-6);
    assert_relative_eq!(post.var_beta(), o.expect(|_, b| (b - mb).powi(2)), max_relative = 1e-6);
    let d = post.density(0.7, 0.9);
    assert_relative_eq!(d, o.eval(0.7, 0.9) / o.z, max_relative = 1e-6);

    for t in [13.0, 17.5, 40.0] {
        let want = predictive_oracle(&o, tk, t);
        let got = state.log_posterior_predictive(t).unwrap().exp();
        assert_relative_eq!(got, want, max_relative = 1e-6);
    }
}

#[test]
fn recursive_predictive_integrates_to_one() {
    let mut state = RecursionState::init(Hyper::default(), RH, 2.0).unwrap();
    for t in [3.0, 5.0, 7.0, 11.0] {
        state.advance(t).unwrap();
    }
    let pdf = |t: f64| state.log_posterior_predictive(t).unwrap().exp();
    // Substitute t = 11 + e^s to follow both the jump at 11 and the heavy tail.
    let g = |s: f64| pdf(11.0 + s.exp()) * s.exp();
    let mass: f64 = (-30..28).map(|i| integrate(g, i as f64, i as f64 + 1.0, 1e-13)).sum();
    assert!((mass - 1.0).abs() < 1e-5, "mass = {mass}");
}

#[test]
fn nonrecursive_stage_ten_against_quadrature() {
    let hyper = Hyper::default();
    let ts = primes(10);
    let post = NonRecPosterior::build(&ts, hyper, RH).unwrap();
    let tk = *ts.last().unwrap() as f64;
    let (s1, s2) = (li_oracle(2.0, tk), f_big(tk));
    let coeffs: Vec<(f64, f64)> = ts.iter().map(|&t| (1.0 / (t as f64).ln(), f_small(t as f64))).collect();
    let u = |a: f64, b: f64| {
        coeffs.iter().map(|(c1, c2)| a * c1 + b * c2).product::<f64>() * (-a * s1 - b * s2).exp()
    };
    let scale = u(10.0 / (s1 + s2), 10.0 / (s1 + s2));
    let o = Oracle::new(u, scale);
    let ma = o.expect(|a, _| a);
    let mb = o.expect(|_, b| b);
    assert_relative_eq!(post.mean_alpha(), ma, max_relative = 1e-6);
    assert_relative_eq!(post.mean_beta(), mb, max_relative = 1e-6);
    assert_relative_eq!(post.var_alpha(), o.expect(|a, _| (a - ma).powi(2)), max_relative = 1e-6);
    assert_relative_eq!(post.var_beta(), o.expect(|_, b| (b - mb).powi(2)), max_relative = 1e-6);

    let t = 31.0;
    let want = predictive_oracle(&o, tk, t);
    assert_relative_eq!(post.log_predictive(t).unwrap().exp(), want, max_relative = 1e-6);
}
