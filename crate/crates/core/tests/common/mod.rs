//! Independent reference values. Nothing here calls into the crate: each
//! oracle is computed from classical formulas in its own code path.
#![allow(dead_code)]

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

/// B_2, B_4, …, B_20 as (numerator, denominator).
const BERNOULLI: [(f64, f64); 10] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
];

/// Γ(1/4) = sqrt((2π)^{3/2} / agm(1, √2)).
pub fn gamma_quarter(bits: u32) -> Float {
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let agm = Float::with_val(bits, 1u32).agm(&Float::with_val(bits, 2u32).sqrt());
    (Float::with_val(bits, two_pi.sqrt_ref()) * &two_pi / agm).sqrt()
}

/// ζ(1/2) by Euler–Maclaurin with N = 50 and ten Bernoulli corrections.
pub fn zeta_half(bits: u32) -> Float {
    let s = Float::with_val(bits, 0.5);
    let n = 50u32;
    let mut sum = Float::new(bits);
    for k in 1..n {
        sum += Float::with_val(bits, k).sqrt().recip();
    }
    let sqrt_n = Float::with_val(bits, n).sqrt();
    // N^{1−s}/(s−1) + N^{−s}/2
    sum -= Float::with_val(bits, &sqrt_n * 2u32);
    sum += Float::with_val(bits, sqrt_n.recip_ref()) / 2u32;
    // rising product s(s+1)…(s+2k−2) and (2k)!
    let mut rising = s.clone();
    let mut fact = Float::with_val(bits, 2u32);
    let mut npow = Float::with_val(bits, n).sqrt() * n; // N^{s+2k−1}
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k = k as u32 + 1;
        let b = Float::with_val(bits, num) / den;
        sum += b * &rising / &fact / &npow;
        rising *= Float::with_val(bits, &s + (2 * k - 1));
        rising *= Float::with_val(bits, &s + 2 * k);
        fact *= Float::with_val(bits, (2 * k + 1) * (2 * k + 2));
        npow *= n * n;
    }
    sum
}

/// ξ(1/2)/8 = −(1/64)·π^{−1/4}·Γ(1/4)·ζ(1/2), the value of the kernel
/// integral at the origin.
pub fn xi_half_over_8(bits: u32) -> Float {
    let pi = Float::with_val(bits, Constant::Pi);
    let pi_q = pi.sqrt().sqrt().recip();
    -(pi_q * gamma_quarter(bits) * zeta_half(bits)) / 64u32
}

/// ζ(s) for complex s by Euler–Maclaurin (adequate for |Im s| ≲ 60).
pub fn zeta_c(s: Complex64) -> Complex64 {
    let n = 40.0f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..40 {
        sum += Complex64::new(k as f64, 0.0).powc(-s);
    }
    let nc = Complex64::new(n, 0.0);
    sum += nc.powc(1.0 - s) / (s - 1.0);
    sum += nc.powc(-s) / 2.0;
    let mut rising = s;
    let mut fact = 2.0;
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k = k as f64 + 1.0;
        sum += rising * (num / den) / fact * nc.powc(-s - (2.0 * k - 1.0));
        rising *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    sum
}

/// Riemann–Siegel θ(t) = arg Γ(1/4 + it/2) − (t/2)·ln π via Stirling on a
/// shifted argument.
pub fn theta(t: f64) -> f64 {
    let mut z = Complex64::new(0.25, t / 2.0);
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 10.0 {
        shift += z.ln();
        z += 1.0;
    }
    let mut lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln();
    for (k, &(num, den)) in BERNOULLI.iter().take(6).enumerate() {
        let k = k as f64 + 1.0;
        lg += (num / den) / (2.0 * k * (2.0 * k - 1.0)) / z.powf(2.0 * k - 1.0);
    }
    (lg - shift).im - t / 2.0 * std::f64::consts::PI.ln()
}

/// Hardy's Z(t), real on the real line.
pub fn hardy_z(t: f64) -> f64 {
    let v = Complex64::from_polar(1.0, theta(t)) * zeta_c(Complex64::new(0.5, t));
    v.re
}

/// Ordinates γ of the zeta zeros in (0, t_max), by sign changes of Z and
/// bisection.
pub fn riemann_ordinates(t_max: f64) -> Vec<f64> {
    let step = 0.05;
    let mut out = Vec::new();
    let mut a = 10.0;
    let mut za = hardy_z(a);
    while a < t_max {
        let b = a + step;
        let zb = hardy_z(b);
        if za.signum() != zb.signum() {
            let (mut lo, mut hi, mut zlo) = (a, b, za);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let zm = hardy_z(mid);
                if zm.signum() == zlo.signum() {
                    lo = mid;
                    zlo = zm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        za = zb;
    }
    out
}

/// The kernel in f64, summed to m = 8.
pub fn kernel_f64(x: f64) -> f64 {
    use std::f64::consts::PI;
    (1..=8)
        .map(|m| {
            let m2 = (m * m) as f64;
            (2.0 * PI * PI * m2 * m2 * (9.0 * x).exp() - 3.0 * PI * m2 * (5.0 * x).exp())
                * (-PI * m2 * (4.0 * x).exp()).exp()
        })
        .sum()
}

/// `∫₀^∞ e^{−ℵx²} G(x) cosh(r x) dx` by composite Simpson on [0, 2.5].
pub fn m_real_simpson(aleph: f64, r: f64) -> f64 {
    let f = |x: f64| (-aleph * x * x).exp() * kernel_f64(x) * (r * x).cosh();
    simpson(f, 0.0, 2.5, 40_000)
}

/// `∫₀^∞ e^{−ℵx²} G(x) cos(λ x) dx` by composite Simpson on [0, 2.5].
pub fn xi_real_simpson(aleph: f64, lambda: f64) -> f64 {
    let f = |x: f64| (-aleph * x * x).exp() * kernel_f64(x) * (lambda * x).cos();
    simpson(f, 0.0, 2.5, 40_000)
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Least-squares slope of y on x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
