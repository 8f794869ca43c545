//! The kernel
//!
//! ```text
//! G(x) = Σ_{m≥1} (2π²m⁴e^{9x} − 3πm²e^{5x}) · exp(−πm²e^{4x})
//! ```
//!
//! and the truncation plan that turns every integral over `[0, ∞)` into a
//! finite sum over `m ≤ m_max` on a finite interval `[0, x_max]`.
//!
//! All planning is done in `f64` log-space: the exponents involved are at
//! most a few thousand, so double precision locates the cutoffs to far more
//! accuracy than they need.

use std::f64::consts::{LN_10, PI};

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{BoundedReal, PrecisionContext, RADIUS_BITS};

/// Slack (in nats) for the polynomial prefactors `2π²m⁴e^{9x}`.
const PREFACTOR_MARGIN: f64 = 25.0;

/// Where and how the kernel series and its integrals are truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTruncation {
    m_max: u32,
    x_max: f64,
    tail_bound: Float,
    target_digits: u32,
    tau_abs_bound: f64,
    power: u32,
}

impl KernelTruncation {
    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Bound on the absolute mass neglected by the plan, both beyond
    /// `x_max` and in the terms `m > m_max`.
    pub fn tail_bound(&self) -> &Float {
        &self.tail_bound
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    pub fn tau_abs_bound(&self) -> f64 {
        self.tau_abs_bound
    }

    /// Power `p` of the extra factor `x^p` the plan accounts for.
    pub fn power(&self) -> u32 {
        self.power
    }
}

/// Required exponent margin: `target·ln10 + 25`.
fn exponent_margin(target_digits: u32) -> f64 {
    f64::from(target_digits) * LN_10 + PREFACTOR_MARGIN
}

struct Exponent {
    slope: f64,
    quad: f64,
    power: f64,
}

impl Exponent {
    /// `F(x) = πe^{4x} − (9+τ)x − |ℵ|x² − p·ln x`
    fn value(&self, x: f64) -> f64 {
        let log_term = if self.power > 0.0 {
            self.power * x.ln()
        } else {
            0.0
        };
        PI * (4.0 * x).exp() - self.slope * x - self.quad * x * x - log_term
    }

    fn derivative(&self, x: f64) -> f64 {
        4.0 * PI * (4.0 * x).exp() - self.slope - 2.0 * self.quad * x - self.power / x
    }

    fn second_derivative(&self, x: f64) -> f64 {
        16.0 * PI * (4.0 * x).exp() - 2.0 * self.quad + self.power / (x * x)
    }
}

/// Truncation for `∫₀^∞ e^{−ℵx²} G(x) cosh(τx) dx` with `|τ| ≤ tau_abs_bound`.
///
/// `m_max` is the smallest `m` with `πm² ≥ target·ln10 + 25`, raised further
/// if the neglected terms would not otherwise fit under `10^(-target)`;
/// `x_max` is the smallest `x` past the minimum of the exponent where
/// `πe^{4x} − 9x − τx − |ℵ|x² ≥ target·ln10 + 25`.
pub fn plan_truncation(aleph: f64, tau_abs_bound: f64, ctx: &PrecisionContext) -> KernelTruncation {
    plan_moment_truncation(aleph, tau_abs_bound, 0, ctx)
}

/// As [`plan_truncation`], for the integrand carrying an extra `x^power`.
pub(crate) fn plan_moment_truncation(
    aleph: f64,
    tau_abs_bound: f64,
    power: u32,
    ctx: &PrecisionContext,
) -> KernelTruncation {
    let target = ctx.target_digits();
    let margin = exponent_margin(target);
    let tau = tau_abs_bound.abs();
    let exponent = Exponent {
        slope: 9.0 + tau,
        quad: aleph.abs(),
        power: f64::from(power),
    };
    let x_max = solve_x_max(&exponent, margin);

    // beyond x_max: Σ_m (2π²m⁴ + 3πm²) e^{-π(m²-1)e^{4x}} ≤ 4.04π² on x ≥ 0,
    // and ∫_{x_max}^∞ e^{-F} ≤ e^{-F(x_max)}/F'(x_max) for convex F
    let ln_x_tail = (4.04 * PI * PI).ln() - exponent.value(x_max) - exponent.derivative(x_max).ln();

    let mut m_max = (margin / PI).sqrt().ceil().max(1.0) as u32;
    let ln_target = -f64::from(target) * LN_10;
    let mut ln_m_tail = m_tail_log(m_max, x_max, &exponent);
    while ln_m_tail > ln_target - 3.0 * LN_10 {
        m_max += 1;
        ln_m_tail = m_tail_log(m_max, x_max, &exponent);
    }

    let tail_bound = Float::with_val(RADIUS_BITS, ln_x_tail).exp()
        + Float::with_val(RADIUS_BITS, ln_m_tail).exp();
    KernelTruncation {
        m_max,
        x_max,
        tail_bound,
        target_digits: target,
        tau_abs_bound: tau,
        power,
    }
}

fn solve_x_max(f: &Exponent, margin: f64) -> f64 {
    const STEP: f64 = 1.0 / 256.0;
    let mut lo = STEP;
    let mut x = STEP;
    loop {
        let ok = f.value(x) >= margin && f.derivative(x) > 0.0 && f.second_derivative(x) > 0.0;
        if ok {
            break;
        }
        lo = x;
        x += STEP;
    }
    if f.value(lo) >= margin || lo == x {
        return x;
    }
    // F(lo) < margin ≤ F(x): bisect
    let mut hi = x;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f.value(mid) >= margin {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `ln |term_m(x)| + τx + |ℵ|x² + p ln x`, the log-magnitude of the m-th
/// contribution to the integrand.
fn term_log(m: u32, x: f64, f: &Exponent) -> f64 {
    let m = f64::from(m);
    let pre =
        (2.0 * PI * PI * m.powi(4) * (9.0 * x).exp() + 3.0 * PI * m * m * (5.0 * x).exp()).ln();
    let log_x = if f.power > 0.0 {
        f.power * x.max(1e-300).ln()
    } else {
        0.0
    };
    pre - PI * m * m * (4.0 * x).exp() + (f.slope - 9.0) * x + f.quad * x * x + log_x
}

/// Log of `x_max · Σ_{m > m_max} max_x |term_m|`.
fn m_tail_log(m_max: u32, x_max: f64, f: &Exponent) -> f64 {
    const GRID: usize = 512;
    let mut acc = f64::NEG_INFINITY;
    for m in (m_max + 1)..=(m_max + 40) {
        let peak = (0..=GRID)
            .map(|i| term_log(m, x_max * i as f64 / GRID as f64, f))
            .fold(f64::NEG_INFINITY, f64::max);
        acc = log_add(acc, peak);
    }
    // grid slack
    acc + 1.0 + x_max.ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `G(x)` summed to `trunc.m_max()`, with a radius covering the omitted
/// terms and rounding.
pub fn eval_kernel(
    x: &Float,
    trunc: &KernelTruncation,
    ctx: &PrecisionContext,
) -> Result<BoundedReal> {
    if x.is_sign_negative() && !x.is_zero() || *x > trunc.x_max {
        return Err(Error::OutOfDomain {
            x: x.to_f64(),
            x_max: trunc.x_max,
        });
    }
    let bits = ctx.working_bits().max(x.prec());
    let pi = Float::with_val(bits, Constant::Pi);
    let ex = Float::with_val(bits, x.exp_ref());
    let e4 = Float::with_val(bits, ex.square_ref()).square();
    let e5 = Float::with_val(bits, &e4 * &ex);
    let e9 = Float::with_val(bits, &e5 * &e4);
    let a = Float::with_val(bits, pi.square_ref()) * e9 * 2u32; // 2π²e^{9x}
    let b = Float::with_val(bits, &pi * &e5) * 3u32; // 3πe^{5x}
    let q = Float::with_val(bits, -Float::with_val(bits, &pi * &e4)).exp();
    let q2 = Float::with_val(bits, q.square_ref());

    let mut sum = Float::new(bits);
    let mut abs_sum = Float::new(RADIUS_BITS);
    let mut q_m2 = q.clone(); // q^{m²}
    let mut q_step = Float::with_val(bits, &q2 * &q); // q^{2m+1}
    for m in 1..=trunc.m_max {
        let m2 = m * m;
        let term = (Float::with_val(bits, &a * (m2 * m2)) - Float::with_val(bits, &b * m2)) * &q_m2;
        abs_sum += Float::with_val(RADIUS_BITS, term.abs_ref());
        sum += term;
        q_m2 *= &q_step;
        q_step *= &q2;
    }

    let xf = x.to_f64();
    let omitted = Float::with_val(
        RADIUS_BITS,
        term_log(
            trunc.m_max + 1,
            xf,
            &Exponent {
                slope: 9.0,
                quad: 0.0,
                power: 0.0,
            },
        ),
    )
    .exp()
        * 2u32;
    let rounding = abs_sum * ctx.epsilon() * (4 * trunc.m_max + 8);
    Ok(BoundedReal::new(sum, omitted + rounding))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    /// Direct f64 summation, m up to 12.
    fn g_f64(x: f64) -> f64 {
        (1..=12)
            .map(|m| {
                let m = m as f64;
                (2.0 * PI * PI * m.powi(4) * (9.0 * x).exp() - 3.0 * PI * m * m * (5.0 * x).exp())
                    * (-PI * m * m * (4.0 * x).exp()).exp()
            })
            .sum()
    }

    #[test]
    fn plan_at_thirty_digits() {
        let plan = plan_truncation(0.0, 0.0, &ctx());
        assert_eq!(plan.m_max(), 6);
        // πe^{4x} − 9x = 30 ln10 + 25 solved by bisection in f64
        let margin = 30.0 * LN_10 + 25.0;
        let (mut lo, mut hi) = (0.5f64, 1.5f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if PI * (4.0 * mid).exp() - 9.0 * mid >= margin {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((plan.x_max() - hi).abs() < 1e-9, "{} vs {hi}", plan.x_max());
        assert!((plan.x_max() - 0.8698).abs() < 1e-3);
        assert!(plan.tail_bound().to_f64() < 1e-30);
    }

    #[test]
    fn plan_grows_with_tau_and_aleph() {
        let base = plan_truncation(0.0, 0.0, &ctx());
        let wide = plan_truncation(0.0, 200.0, &ctx());
        assert!(wide.x_max() > base.x_max());
        let big = plan_truncation(50.0, 100.0, &ctx());
        assert!(big.x_max().is_finite() && big.x_max() > base.x_max());
        assert!(big.tail_bound().to_f64() < 1e-30);
        let neg = plan_truncation(-400.0, 0.0, &ctx());
        assert!(neg.tail_bound().to_f64() < 1e-30);
    }

    #[test]
    fn moment_plan_bounds_tail() {
        // x^p < 1 on [0, 1) only helps, so the cutoff may move either way
        let moment = plan_moment_truncation(0.0, 0.0, 80, &ctx());
        assert!(moment.x_max() > 0.5 && moment.x_max() < 1.5);
        assert!(moment.tail_bound().to_f64() < 1e-30);
        let wide = plan_moment_truncation(0.0, 0.0, 400, &ctx());
        assert!(wide.tail_bound().to_f64() < 1e-30);
    }

    #[test]
    fn value_at_origin() {
        let c = ctx();
        let plan = plan_truncation(0.0, 0.0, &c);
        let g = eval_kernel(&Float::new(c.working_bits()), &plan, &c).unwrap();
        assert!((g.to_f64() - 0.4466969).abs() < 1e-6);
        assert!((g.to_f64() - g_f64(0.0)).abs() < 1e-13);
    }

    #[test]
    fn value_near_cutoff_matches_leading_term() {
        let c = ctx();
        // x = 1 lies beyond the default cutoff; widen the plan with τ
        let plan = plan_truncation(0.0, 100.0, &c);
        assert!(plan.x_max() >= 1.0);
        let g = eval_kernel(&Float::with_val(c.working_bits(), 1u32), &plan, &c).unwrap();
        let lead = (2.0 * PI * PI * 9f64.exp() - 3.0 * PI * 5f64.exp()) * (-PI * 4f64.exp()).exp();
        assert!((g.to_f64() / lead - 1.0).abs() < 1e-12);
        assert!((g.to_f64() / 5.1e-70 - 1.0).abs() < 0.02);
    }

    #[test]
    fn out_of_domain() {
        let c = ctx();
        let plan = plan_truncation(0.0, 0.0, &c);
        let bits = c.working_bits();
        assert!(matches!(
            eval_kernel(&Float::with_val(bits, -0.1), &plan, &c),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            eval_kernel(&Float::with_val(bits, 0.95), &plan, &c),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn positive_and_decaying() {
        let c = ctx();
        let plan = plan_truncation(0.0, 0.0, &c);
        let bits = c.working_bits();
        let n = 200;
        for i in 0..=n {
            let x = Float::with_val(bits, plan.x_max() * i as f64 / n as f64);
            let g = eval_kernel(&x, &plan, &c).unwrap();
            assert!(g.is_positive(), "G({}) not positive", x.to_f64());
        }
        let mut x = 0.5;
        while x + 0.05 <= plan.x_max() {
            let g0 = eval_kernel(&Float::with_val(bits, x), &plan, &c)
                .unwrap()
                .to_f64();
            let g1 = eval_kernel(&Float::with_val(bits, x + 0.05), &plan, &c)
                .unwrap()
                .to_f64();
            assert!(g1 * 10.0 <= g0, "decay at {x}");
            x += 0.05;
        }
    }

    #[test]
    fn extra_terms_change_nothing() {
        let c = ctx();
        let plan = plan_truncation(0.0, 0.0, &c);
        let mut more = plan.clone();
        more.m_max += 5;
        let bits = c.working_bits();
        for x in [0.0, 0.1, 0.3] {
            let x = Float::with_val(bits, x);
            let a = eval_kernel(&x, &plan, &c).unwrap();
            let b = eval_kernel(&x, &more, &c).unwrap();
            let d = Float::with_val(bits, a.value() - b.value()).abs();
            assert!(d <= *a.radius());
        }
    }
}
