//! Quadrature oracles shared by the integration tests.
#![allow(dead_code)]

use prime_oracle::specialfn::ErrorBoundModel;
use testkit::{integrate, integrate_2d};

pub const RH: ErrorBoundModel = ErrorBoundModel::RhSqrt;

pub fn li_oracle(a: f64, b: f64) -> f64 {
    integrate(|u| 1.0 / u.ln(), a, b, 1e-14)
}

pub fn f_big(x: f64) -> f64 {
    x.sqrt() * x.ln() - 2f64.sqrt() * 2f64.ln()
}

pub fn f_small(x: f64) -> f64 {
    (x.ln() + 2.0) / (2.0 * x.sqrt())
}

/// `∫∫ g(α, β)·u(α, β)` over a box that holds all but a negligible tail.
fn box_integral(u: impl Fn(f64, f64) -> f64, scale: f64) -> f64 {
    integrate_2d(|a, b| u(a, b) / scale, 0.0, 12.0, 0.0, 12.0, 1e-12) * scale
}

pub struct Oracle<U: Fn(f64, f64) -> f64> {
    u: U,
    pub z: f64,
    scale: f64,
}

impl<U: Fn(f64, f64) -> f64> Oracle<U> {
    pub fn new(u: U, scale: f64) -> Self {
        let z = box_integral(&u, scale);
        Self { u, z, scale }
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        (self.u)(a, b)
    }

    pub fn expect(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        box_integral(|a, b| g(a, b) * (self.u)(a, b), self.scale) / self.z
    }
}

/// Unnormalized stage-`k` recursive posterior under the flat prior
/// (`a = b = 0`, `γ = ξ = 1`) for `RH_SQRT`, with observations ending at `tk`.
pub fn recursive_flat_oracle(k: i32, tk: f64) -> Oracle<impl Fn(f64, f64) -> f64> {
    let (s1, s2) = (li_oracle(2.0, tk), f_big(tk));
    let (c1, c2) = (1.0 / tk.ln(), f_small(tk));
    let u = move |a: f64, b: f64| {
        a.powi(k - 1) * b.powi(k - 1) * (a * c1 + b * c2) * (-a * s1 - b * s2).exp()
    };
    let scale = u(k as f64 / s1, k as f64 / s2);
    Oracle::new(u, scale)
}

/// Oracle predictive density at `t` after the stage ending at `tk`.
pub fn predictive_oracle<U: Fn(f64, f64) -> f64>(o: &Oracle<U>, tk: f64, t: f64) -> f64 {
    let (d1, d2) = (li_oracle(tk, t), f_big(t) - f_big(tk));
    o.expect(|a, b| (a / t.ln() + b * f_small(t)) * (-a * d1 - b * d2).exp())
}
