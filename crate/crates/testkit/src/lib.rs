//! Independent oracles for the prime-oracle test suites.
//!
//! Nothing in here shares code with the library it checks: quadrature is a
//! plain adaptive Gauss–Kronrod rule, primality is trial division, and the
//! mixture coefficients are enumerated subset by subset.

/// Trial-division primality.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest nontrivial factor of `n`, or `None` when `n` is prime (or < 2).
pub fn smallest_factor(n: u128) -> Option<u128> {
    if n < 4 {
        return None;
    }
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let mut d = 3u128;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return Some(d);
        }
        d += 2;
    }
    None
}

/// Primes up to `limit` by trial division of each candidate.
pub fn primes_by_trial(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&n| is_prime_trial(n)).collect()
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, err: f64, tol: f64, depth: u32) -> f64 {
    // The last clause stops chasing round-off once the estimate is converged.
    if err <= tol
        || depth == 0
        || (b - a).abs() < 1e-14 * a.abs().max(1.0)
        || err <= 64.0 * f64::EPSILON * whole.abs()
    {
        return whole;
    }
    let m = 0.5 * (a + b);
    let (l, le) = gk15(f, a, m);
    let (r, re) = gk15(f, m, b);
    adapt(f, a, m, l, le, 0.5 * tol, depth - 1) + adapt(f, m, b, r, re, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (whole, err) = gk15(&f, a, b);
    adapt(&f, a, b, whole, err, tol, 48)
}

/// Integral over `[a, b]` split at geometrically spaced breakpoints, for
/// long ranges like `[2, 10^6]` where the integrand varies slowly.
pub fn integrate_log_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    assert!(a > 0.0 && b >= a);
    let pieces = ((b / a).ln() / 0.5).ceil().max(1.0) as usize;
    let ratio = (b / a).powf(1.0 / pieces as f64);
    let mut edges = Vec::with_capacity(pieces + 1);
    edges.push(a);
    for i in 1..pieces {
        edges.push(a * ratio.powi(i as i32));
    }
    edges.push(b);
    // One absolute tolerance for the whole range, shared out per piece.
    let rough: f64 = edges.windows(2).map(|w| gk15(&f, w[0], w[1]).0.abs()).sum();
    let tol = (rough * rel_tol / pieces as f64).max(f64::MIN_POSITIVE);
    edges.windows(2).map(|w| integrate(&f, w[0], w[1], tol)).sum()
}

/// Nested 2-D integral of `f(x, y)` over `[x0, x1] × [y0, y1]`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64) -> f64 {
    let inner_tol = tol / (x1 - x0).abs().max(1.0);
    integrate(|x| integrate(|y| f(x, y), y0, y1, inner_tol), x0, x1, tol)
}

/// All subset products of a two-coefficient linear product.
///
/// Expands `∏ (c1[i]·α + c2[i]·β)` by visiting all `2^k` choices and returns
/// the coefficient of `α^r β^(k-r)` for `r = 0..=k`.
pub fn enumerate_product_coefficients(c1: &[f64], c2: &[f64]) -> Vec<f64> {
    assert_eq!(c1.len(), c2.len());
    let k = c1.len();
    assert!(k <= 20, "enumeration oracle is exponential");
    let mut out = vec![0.0; k + 1];
    for mask in 0u32..(1u32 << k) {
        let mut prod = 1.0;
        for i in 0..k {
            prod *= if mask & (1 << i) != 0 { c1[i] } else { c2[i] };
        }
        out[mask.count_ones() as usize] += prod;
    }
    out
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Pearson correlation of two equally long samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, vx) = mean_var(xs);
    let (my, vy) = mean_var(ys);
    let n = xs.len() as f64;
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
    cov / (vx * vy).sqrt()
}

/// Kolmogorov–Smirnov distance of a sample against a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Standard normal CDF via a high-accuracy erfc rational approximation
/// (W. J. Cody), accurate to ~1e-15.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    // Continued fraction for large |x|, series for small |x|.
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        // erf series
        let mut sum = x;
        let mut term = x;
        let x2 = x * x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction for erfc
        let mut f;
        let tiny = 1e-300;
        let b0 = x;
        f = b0;
        let mut c = b0;
        let mut d = 0.0;
        for n in 1..300 {
            let an = n as f64 / 2.0;
            let bn = x;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / f / std::f64::consts::PI.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomial_and_exp() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-13);
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate(|x| (-x).exp(), 0.0, 40.0, 1e-14);
        assert!((v - (1.0 - (-40f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn trial_division_small() {
        assert_eq!(primes_by_trial(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(smallest_factor(2047), Some(23));
        assert_eq!(smallest_factor(127), None);
    }

    #[test]
    fn enumeration_binomial() {
        let c = enumerate_product_coefficients(&[1.0; 4], &[1.0; 4]);
        assert_eq!(c, vec![1.0, 4.0, 6.0, 4.0, 1.0]);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-14);
    }
}
