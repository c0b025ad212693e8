//! Logarithmic density and integral, and the error-bound integrals `F` with
//! their densities `f`.
//!
//! Every `F` is anchored at the left end of the support, `F(2) = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Constant inside the MT error bound.
pub const MT_CONSTANT: f64 = 6.315;

/// `li(2)` for the classical logarithmic integral (principal value from 0).
const LI_AT_2: f64 = 1.045_163_780_117_492_784_844_588_889_194_613_136_522_615_578_151_2;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431_042_159_335_9;

/// Error-bound model: which `F` (and `f = F'`) the second intensity term uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorBoundModel {
    /// `F(x) = √x·log x`
    RhSqrt,
    /// `F(x) = x^(1/2+ε)` with `0 < ε < 1/2`
    RhEps(f64),
    /// `F(x) = x / log x`
    XOverLog,
    /// `F(x) = x·(log x)^(-3/4)·exp(-√(log x / 6.315))`
    Mt,
}

impl ErrorBoundModel {
    pub fn rh_eps(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::domain(format!("RH_EPS needs 0 < ε < 1/2, got {epsilon}")));
        }
        Ok(ErrorBoundModel::RhEps(epsilon))
    }

    pub fn all_default() -> [ErrorBoundModel; 4] {
        [
            ErrorBoundModel::RhSqrt,
            ErrorBoundModel::RhEps(0.1),
            ErrorBoundModel::XOverLog,
            ErrorBoundModel::Mt,
        ]
    }

    /// Smallest `x >= 2` from which the density is non-negative.
    ///
    /// `x/log x` and the MT bound both dip just above 2, so their densities
    /// are negative there.
    pub fn density_floor(self) -> f64 {
        match self {
            ErrorBoundModel::RhSqrt | ErrorBoundModel::RhEps(_) => 2.0,
            ErrorBoundModel::XOverLog => std::f64::consts::E,
            ErrorBoundModel::Mt => mt_density_root(),
        }
    }

    /// Smallest prime at which the density is strictly positive.
    pub fn first_admissible_prime(self) -> u64 {
        match self {
            ErrorBoundModel::RhSqrt | ErrorBoundModel::RhEps(_) => 2,
            ErrorBoundModel::XOverLog | ErrorBoundModel::Mt => 3,
        }
    }

    /// Unanchored `F`.
    fn raw_integral(self, x: f64) -> f64 {
        let l = x.ln();
        match self {
            ErrorBoundModel::RhSqrt => x.sqrt() * l,
            ErrorBoundModel::RhEps(e) => x.powf(0.5 + e),
            ErrorBoundModel::XOverLog => x / l,
            ErrorBoundModel::Mt => x * l.powf(-0.75) * (-(l / MT_CONSTANT).sqrt()).exp(),
        }
    }

    /// `log` of the unanchored `F`, safe for very large `x`.
    fn raw_ln_integral(self, x: f64) -> f64 {
        let l = x.ln();
        match self {
            ErrorBoundModel::RhSqrt => 0.5 * l + l.ln(),
            ErrorBoundModel::RhEps(e) => (0.5 + e) * l,
            ErrorBoundModel::XOverLog => l - l.ln(),
            ErrorBoundModel::Mt => l - 0.75 * l.ln() - (l / MT_CONSTANT).sqrt(),
        }
    }

    /// `f(x)` with no domain checks.
    pub(crate) fn raw_density(self, x: f64) -> f64 {
        let l = x.ln();
        match self {
            ErrorBoundModel::RhSqrt => (0.5 * l + 1.0) / x.sqrt(),
            ErrorBoundModel::RhEps(e) => (0.5 + e) * x.powf(e - 0.5),
            ErrorBoundModel::XOverLog => (l - 1.0) / (l * l),
            ErrorBoundModel::Mt => {
                self.raw_integral(x) / x * mt_bracket(l)
            }
        }
    }

    /// `log f(x)` without domain checks beyond positivity; large-`x` safe.
    fn raw_ln_density(self, x: f64) -> f64 {
        let l = x.ln();
        match self {
            ErrorBoundModel::RhSqrt => (0.5 * l + 1.0).ln() - 0.5 * l,
            ErrorBoundModel::RhEps(e) => (0.5 + e).ln() + (e - 0.5) * l,
            ErrorBoundModel::XOverLog => (l - 1.0).ln() - 2.0 * l.ln(),
            ErrorBoundModel::Mt => self.raw_ln_integral(x) - l + mt_bracket(l).ln(),
        }
    }
}

/// `1 - 3/(4 log x) - 1/(2 √(6.315 log x))`, the MT density over `F/x`.
fn mt_bracket(l: f64) -> f64 {
    1.0 - 0.75 / l - 0.5 / (MT_CONSTANT * l).sqrt()
}

fn mt_density_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let (mut lo, mut hi) = (0.5f64, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mt_bracket(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.exp()
    })
}

impl fmt::Display for ErrorBoundModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorBoundModel::RhSqrt => write!(f, "rh-sqrt"),
            ErrorBoundModel::RhEps(e) => write!(f, "rh-eps:{e}"),
            ErrorBoundModel::XOverLog => write!(f, "x-over-log"),
            ErrorBoundModel::Mt => write!(f, "mt"),
        }
    }
}

impl FromStr for ErrorBoundModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "rh-sqrt" => Ok(ErrorBoundModel::RhSqrt),
            "x-over-log" => Ok(ErrorBoundModel::XOverLog),
            "mt" => Ok(ErrorBoundModel::Mt),
            other => match other.strip_prefix("rh-eps:") {
                Some(eps) => {
                    let e: f64 = eps
                        .parse()
                        .map_err(|_| Error::parse(None, format!("bad epsilon in model {s:?}")))?;
                    ErrorBoundModel::rh_eps(e)
                }
                None => Err(Error::parse(
                    None,
                    format!("unknown model {s:?} (expected rh-sqrt, rh-eps:<ε>, x-over-log or mt)"),
                )),
            },
        }
    }
}

/// Coefficients `(α, β)` of the intensity `α·li + β·f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityParams {
    pub alpha: f64,
    pub beta: f64,
}

impl IntensityParams {
    /// Both coefficients finite and non-negative, and not both zero.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(alpha) || !ok(beta) || alpha + beta == 0.0 {
            return Err(Error::domain(format!("invalid intensity parameters α={alpha}, β={beta}")));
        }
        Ok(Self { alpha, beta })
    }
}

/// The density `1 / log x`.
pub fn li(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::domain(format!("li needs x > 1, got {x}")));
    }
    Ok(1.0 / x.ln())
}

/// `∫_2^x dt / log t`.
pub fn log_integral(x: f64) -> Result<f64> {
    if !(x >= 2.0) || x.is_infinite() {
        return Err(Error::domain(format!("Li needs finite x >= 2, got {x}")));
    }
    Ok(log_integral_unchecked(x))
}

pub(crate) fn log_integral_unchecked(x: f64) -> f64 {
    if x < 3.0 {
        gauss_legendre_near_two(x)
    } else {
        ramanujan_li(x) - LI_AT_2
    }
}

/// Classical `li(x)` by Ramanujan's series.
fn ramanujan_li(x: f64) -> f64 {
    let l = x.ln();
    let mut sum = 0.0;
    let mut term = 1.0; // (log x)^n / (n! 2^(n-1)) with sign, built incrementally
    let mut inner = 0.0; // Σ_{k=0}^{⌊(n-1)/2⌋} 1/(2k+1)
    let mut n = 1u32;
    loop {
        term *= if n == 1 { l } else { -l / (n as f64 * 2.0) };
        if n % 2 == 1 {
            inner += 1.0 / n as f64;
        }
        let add = term * inner;
        sum += add;
        if n as f64 > l && add.abs() < 1e-17 * sum.abs() {
            break;
        }
        n += 1;
        if n > 5000 {
            break;
        }
    }
    EULER_GAMMA + l.ln() + x.sqrt() * sum
}

/// Gauss–Legendre over `[2, x]` for `x` close to 2, where the series
/// difference would cancel.
fn gauss_legendre_near_two(x: f64) -> f64 {
    gauss_legendre(|t| 1.0 / t.ln(), 2.0, x, 20)
}

/// Fixed-order Gauss–Legendre quadrature of `f` over `[a, b]`; `n` is 8 or 20.
pub(crate) fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    static RULE8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static RULE20: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (nodes, weights) = match n {
        8 => RULE8.get_or_init(|| legendre_rule(8)),
        _ => RULE20.get_or_init(|| legendre_rule(20)),
    };
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    nodes.iter().zip(weights).map(|(&t, &w)| w * f(c + h * t)).sum::<f64>() * h
}

/// Legendre roots by Newton iteration, with their quadrature weights.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `F(x) - F(2)` for the chosen model.
pub fn error_integral(model: ErrorBoundModel, x: f64) -> Result<f64> {
    if !(x >= 2.0) || x.is_infinite() {
        return Err(Error::domain(format!("F needs finite x >= 2, got {x}")));
    }
    Ok(error_integral_unchecked(model, x))
}

pub(crate) fn error_integral_unchecked(model: ErrorBoundModel, x: f64) -> f64 {
    model.raw_integral(x) - model.raw_integral(2.0)
}

/// `Li(x2) - Li(x1)`, integrated directly when the interval is short
/// relative to its distance from the singularity at 1.
pub(crate) fn log_integral_between(x1: f64, x2: f64) -> f64 {
    between(|u| 1.0 / u.ln(), x1, x2)
        .unwrap_or_else(|| log_integral_unchecked(x2) - log_integral_unchecked(x1))
}

/// `F(x2) - F(x1)`, with the same short-interval treatment.
pub(crate) fn error_integral_between(model: ErrorBoundModel, x1: f64, x2: f64) -> f64 {
    between(|u| model.raw_density(u), x1, x2)
        .unwrap_or_else(|| model.raw_integral(x2) - model.raw_integral(x1))
}

fn between(f: impl Fn(f64) -> f64, x1: f64, x2: f64) -> Option<f64> {
    let width = x2 - x1;
    let reach = x1 - 1.0;
    if width <= reach / 16.0 {
        Some(gauss_legendre(f, x1, x2, 8))
    } else if width <= reach / 2.0 {
        Some(gauss_legendre(f, x1, x2, 20))
    } else {
        None
    }
}

/// `log(F(x) - F(2))`, evaluated without forming `F` for very large `x`.
pub fn ln_error_integral(model: ErrorBoundModel, x: f64) -> Result<f64> {
    if !(x > 2.0) || x.is_infinite() {
        return Err(Error::domain(format!("log F needs finite x > 2, got {x}")));
    }
    let ln_raw = model.raw_ln_integral(x);
    let ln_anchor = model.raw_ln_integral(2.0);
    let ratio = (ln_anchor - ln_raw).exp();
    if ratio >= 1.0 {
        return Err(Error::domain(format!("F({x}) is not positive under {model}")));
    }
    Ok(ln_raw + (-ratio).ln_1p())
}

/// `f(x) = F'(x)`. Errors below 2 and wherever the density would be negative.
pub fn error_density(model: ErrorBoundModel, x: f64) -> Result<f64> {
    check_density_domain(model, x)?;
    Ok(model.raw_density(x))
}

/// `log f(x)`, large-`x` safe.
pub fn ln_error_density(model: ErrorBoundModel, x: f64) -> Result<f64> {
    check_density_domain(model, x)?;
    Ok(model.raw_ln_density(x))
}

fn check_density_domain(model: ErrorBoundModel, x: f64) -> Result<()> {
    if !(x >= 2.0) || x.is_infinite() {
        return Err(Error::domain(format!("f needs finite x >= 2, got {x}")));
    }
    if x < model.density_floor() {
        return Err(Error::domain(format!(
            "density of {model} is negative at x = {x} (below {})",
            model.density_floor()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, LN_2};

    const MODELS: [ErrorBoundModel; 4] = [
        ErrorBoundModel::RhSqrt,
        ErrorBoundModel::RhEps(0.1),
        ErrorBoundModel::XOverLog,
        ErrorBoundModel::Mt,
    ];

    #[test]
    fn li_values() {
        assert_relative_eq!(li(E).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(li(E * E).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(li(1e6).unwrap(), 0.072_382_413_650_542_36, max_relative = 1e-14);
        assert!(li(1.0).is_err());
        assert!(li(0.5).is_err());
    }

    #[test]
    fn log_integral_against_quadrature() {
        assert_eq!(log_integral(2.0).unwrap(), 0.0);
        for x in [2.000_001, 2.1, 2.5, 2.999, 3.0, 3.5, 10.0, 11.0, 1e3, 1e6, 1e8] {
            let oracle = testkit::integrate_log_split(|t| 1.0 / t.ln(), 2.0, x, 1e-14);
            assert_relative_eq!(log_integral(x).unwrap(), oracle, max_relative = 1e-10);
        }
        assert!(log_integral(1.99).is_err());
        assert!(log_integral(f64::NAN).is_err());
    }

    #[test]
    fn log_integral_reference_points() {
        // Li(10) = li(10) - li(2) with li(10) = 6.165599504787297...
        assert_relative_eq!(log_integral(10.0).unwrap(), 5.120_435_724_669_805, max_relative = 1e-12);
        let li_million = log_integral(1e6).unwrap();
        assert!((li_million - 78_626.5).abs() < 1.0, "{li_million}");
        assert!((li_million / 78_498.0 - 1.0).abs() < 0.002);
    }

    #[test]
    fn error_integral_closed_forms() {
        for m in MODELS {
            assert_eq!(error_integral(m, 2.0).unwrap(), 0.0);
        }
        let x = E * E;
        assert_relative_eq!(
            error_integral(ErrorBoundModel::XOverLog, x).unwrap(),
            x / 2.0 - 2.0 / LN_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            error_integral(ErrorBoundModel::RhSqrt, 1e4).unwrap(),
            100.0 * 1e4f64.ln() - 2f64.sqrt() * LN_2,
            max_relative = 1e-14
        );
        assert!(error_integral(ErrorBoundModel::Mt, 1.5).is_err());
    }

    #[test]
    fn mt_integral_matches_quadrature_of_density() {
        let m = ErrorBoundModel::Mt;
        // The density integrates from 2 regardless of sign, so integrate raw.
        let q = testkit::integrate_log_split(|t| m.raw_density(t), 2.0, 1e6, 1e-14);
        assert_relative_eq!(error_integral(m, 1e6).unwrap(), q, max_relative = 1e-8);
    }

    #[test]
    fn density_examples() {
        assert_relative_eq!(
            error_density(ErrorBoundModel::RhSqrt, 4.0).unwrap(),
            0.5 * (LN_2 + 1.0),
            max_relative = 1e-15
        );
        for x in [3.0, 17.0, 1e5] {
            assert_relative_eq!(
                error_density(ErrorBoundModel::RhEps(0.1), x).unwrap(),
                0.6 * f64::powf(x, -0.4),
                max_relative = 1e-14
            );
        }
        assert!(error_density(ErrorBoundModel::RhSqrt, 1.9).is_err());
        assert!(error_density(ErrorBoundModel::XOverLog, 2.5).is_err());
        assert!(error_density(ErrorBoundModel::XOverLog, E).is_ok());
        assert!(error_density(ErrorBoundModel::Mt, 2.3).is_err());
        assert!(error_density(ErrorBoundModel::Mt, 3.0).unwrap() > 0.0);
    }

    #[test]
    fn mt_root_is_a_sign_change() {
        let r = ErrorBoundModel::Mt.density_floor();
        assert!(r > 2.5 && r < 2.7, "{r}");
        let m = ErrorBoundModel::Mt;
        assert!(m.raw_density(r * (1.0 - 1e-9)) < 0.0);
        assert!(m.raw_density(r * (1.0 + 1e-9)) > 0.0);
    }

    #[test]
    fn density_is_derivative_on_decade_grid() {
        for m in MODELS {
            for e in 1..=8 {
                let x = 10f64.powi(e);
                let h = x * 1e-5;
                let fd = (error_integral(m, x + h).unwrap() - error_integral(m, x - h).unwrap()) / (2.0 * h);
                let f = error_density(m, x).unwrap();
                assert!(((fd - f) / f).abs() < 1e-6, "{m} at {x}: fd={fd} f={f}");
            }
        }
        // MT at 10^4 with h = 1e-3
        let m = ErrorBoundModel::Mt;
        let h = 1e-3;
        let fd = (error_integral(m, 1e4 + h).unwrap() - error_integral(m, 1e4 - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(fd, error_density(m, 1e4).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn error_integrals_increase_beyond_density_floor() {
        for m in MODELS {
            let start = m.density_floor();
            let mut prev = error_integral(m, start).unwrap();
            let mut x = start;
            while x < 1e9 {
                x *= 1.25;
                let v = error_integral(m, x).unwrap();
                assert!(v > prev, "{m} not increasing at {x}");
                prev = v;
            }
        }
        // RH variants are increasing from 2 itself.
        assert!(error_integral(ErrorBoundModel::RhSqrt, 2.01).unwrap() > 0.0);
    }

    #[test]
    fn log_forms_agree() {
        for m in MODELS {
            for x in [5.0, 1e3, 1e6, 1e12] {
                assert_relative_eq!(
                    ln_error_integral(m, x).unwrap(),
                    error_integral(m, x).unwrap().ln(),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    ln_error_density(m, x).unwrap(),
                    error_density(m, x).unwrap().ln(),
                    max_relative = 1e-11,
                    epsilon = 1e-13
                );
            }
            assert!(ln_error_integral(m, 1e300).unwrap().is_finite());
        }
    }

    #[test]
    fn model_parsing() {
        assert_eq!("rh-sqrt".parse::<ErrorBoundModel>().unwrap(), ErrorBoundModel::RhSqrt);
        assert_eq!("rh-eps:0.1".parse::<ErrorBoundModel>().unwrap(), ErrorBoundModel::RhEps(0.1));
        assert_eq!("MT".parse::<ErrorBoundModel>().unwrap(), ErrorBoundModel::Mt);
        assert!("rh-eps:0.5".parse::<ErrorBoundModel>().is_err());
        assert!("rh-eps:x".parse::<ErrorBoundModel>().is_err());
        assert!("zeta".parse::<ErrorBoundModel>().is_err());
        for m in MODELS {
            assert_eq!(m.to_string().parse::<ErrorBoundModel>().unwrap(), m);
        }
    }

    #[test]
    fn intensity_params_validation() {
        assert!(IntensityParams::new(1.0, 0.0).is_ok());
        assert!(IntensityParams::new(0.0, 0.0).is_err());
        assert!(IntensityParams::new(-1.0, 1.0).is_err());
        assert!(IntensityParams::new(f64::NAN, 1.0).is_err());
    }
}
