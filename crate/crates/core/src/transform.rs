//! The transforms
//!
//! ```text
//! M_ℵ(τ) = ∫₀^∞ e^{−ℵx²} G(x) cosh(τx) dx,      Ξ_ℵ(λ) = M_ℵ(iλ),
//! ```
//!
//! their λ-derivatives, and the heat-flow residuals.
//!
//! For real λ the value of Ξ is exponentially small compared with the
//! integrand (roughly `e^{−πλ/8}`), so every evaluation raises the digit
//! budget by the expected cancellation before integrating. Reported radii are
//! therefore small relative to `|Ξ|`, not just to `max(1, |Ξ|)`.
//!
//! The weight `e^{−ℵx²}G(x)` is sampled once per (ℵ, precision, τ-range) and
//! cached process-wide, so a scan of many λ pays for the kernel only once.

use std::collections::HashMap;
use std::f64::consts::{LN_10, PI};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::kernel::{eval_kernel, plan_truncation, KernelTruncation};
use crate::numerics::{
    differentiate, format_decimal, parse_decimal, BoundedComplex, BoundedReal, PrecisionContext,
    WeightedRule, RADIUS_BITS,
};

const ALEPH_BITS: u32 = 256;

/// The real parameter ℵ. Any finite value is accepted.
///
/// The literature parametrises the same family by `t = −ℵ`
/// (factor `e^{t x²}` instead of `e^{−ℵx²}`); see [`AlephParam::literature_t`].
#[derive(Clone, Debug)]
pub struct AlephParam {
    value: Float,
}

impl AlephParam {
    pub fn new(aleph: f64) -> Result<Self> {
        if !aleph.is_finite() {
            return Err(Error::InvalidAleph(aleph.to_string()));
        }
        Ok(AlephParam {
            value: Float::with_val(ALEPH_BITS, aleph),
        })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let value = parse_decimal(s, Some(ALEPH_BITS))
            .map_err(|_| Error::InvalidAleph(s.trim().to_string()))?;
        Ok(AlephParam { value })
    }

    pub fn from_float(x: &Float) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidAleph(x.to_string()));
        }
        Ok(AlephParam {
            value: Float::with_val(ALEPH_BITS.max(x.prec()), x),
        })
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// `t = −ℵ`.
    pub fn literature_t(&self) -> AlephParam {
        AlephParam {
            value: Float::with_val(self.value.prec(), -&self.value),
        }
    }

    fn key(&self) -> String {
        self.value.to_string_radix(16, None)
    }
}

impl PartialEq for AlephParam {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for AlephParam {}

impl Hash for AlephParam {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

/// Shortest decimal that reproduces the stored value to 40 digits.
impl fmt::Display for AlephParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format_decimal(&self.value, 40);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            &s
        };
        f.write_str(s)
    }
}

/// An error-bounded function value together with how it was obtained.
#[derive(Clone, Debug)]
pub struct EvalResult {
    pub value: BoundedComplex,
    /// Truncation used; `None` for values not computed from the integral.
    pub plan: Option<KernelTruncation>,
    pub quadrature_converged: bool,
}

/// Heat-flow residuals at one point.
#[derive(Clone, Debug)]
pub struct HeatResidual {
    /// `|∂_ℵΞ − ∂_λλΞ|`, which vanishes for the `e^{−ℵx²}` convention.
    pub res_minus: BoundedReal,
    /// `|∂_ℵΞ + ∂_λλΞ|`.
    pub res_plus: BoundedReal,
    pub d_aleph: BoundedReal,
    pub d_lambda2: BoundedReal,
}

/// Extra digits needed to keep relative accuracy at `|τ|`.
fn cancellation_digits(aleph: f64, tau: &Complex) -> u32 {
    let lam = tau.imag().to_f64().abs();
    let modulus = tau.real().to_f64().hypot(lam);
    let mut nats = PI * lam / 8.0;
    let r = (modulus / (4.0 * PI)).max(1.0);
    nats += aleph.abs() / 16.0 * r.ln().powi(2);
    let digits = (nats / LN_10).ceil() as u32;
    digits.div_ceil(4) * 4
}

/// `|τ|` rounded up to the cache bucket.
fn tau_bucket(tau_abs: f64) -> u32 {
    const WIDTH: f64 = 16.0;
    ((tau_abs / WIDTH).ceil() * WIDTH) as u32
}

struct CachedRule {
    rule: WeightedRule,
    plan: KernelTruncation,
}

type RuleKey = (String, u32, u32, u32);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<CachedRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<CachedRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Entries kept before the cache is flushed (finite-difference sweeps in ℵ
/// would otherwise grow it without bound).
const RULE_CACHE_LIMIT: usize = 64;

fn weighted_rule(aleph: &AlephParam, tau_abs: f64, ctx: &PrecisionContext) -> Arc<CachedRule> {
    let bucket = tau_bucket(tau_abs);
    let key = (
        aleph.key(),
        ctx.working_digits(),
        ctx.target_digits(),
        bucket,
    );
    let mut cache = rule_cache().lock().unwrap();
    if let Some(r) = cache.get(&key) {
        return r.clone();
    }
    if cache.len() >= RULE_CACHE_LIMIT {
        cache.clear();
    }
    let plan = plan_truncation(aleph.to_f64(), f64::from(bucket), ctx);
    let bits = ctx.working_bits();
    let a = Float::with_val(bits, aleph.value());
    let weight_plan = plan.clone();
    let weight_ctx = *ctx;
    let rule = WeightedRule::new(
        &Float::new(bits),
        &Float::with_val(bits, plan.x_max()),
        bits,
        move |x| {
            let g = eval_kernel(x, &weight_plan, &weight_ctx)
                .expect("quadrature nodes lie inside the planned domain");
            let damp = Float::with_val(bits, -Float::with_val(bits, &a * x) * x).exp();
            g.scale(&damp)
        },
    );
    let entry = Arc::new(CachedRule { rule, plan });
    cache.insert(key, entry.clone());
    entry
}

/// Initial grid level so that each panel spans about one oscillation.
fn start_level(tau_abs: f64, x_max: f64) -> u32 {
    let periods = tau_abs * x_max / (2.0 * PI);
    (periods.max(2.0)).log2().ceil() as u32
}

/// `∫₀^{x_max} e^{−ℵx²} G(x) h(x) dx` on the cached rule for `|τ| ≤ tau_abs`.
fn transform_with<H>(
    aleph: &AlephParam,
    tau: &Complex,
    x_power: u32,
    ctx: &PrecisionContext,
    h: H,
) -> EvalResult
where
    H: Fn(&Float) -> Complex,
{
    let tau_abs = Float::with_val(53, tau.abs_ref()).to_f64();
    let boosted = ctx.boosted(cancellation_digits(aleph.to_f64(), tau));
    let cached = weighted_rule(aleph, tau_abs, &boosted);
    let q = cached
        .rule
        .integrate(h, start_level(tau_abs, cached.plan.x_max()), &boosted);
    // the derivative integrands carry x^p ≤ x_max^p beyond the cutoff
    let tail = Float::with_val(
        RADIUS_BITS,
        cached.plan.x_max().max(1.0).powi(x_power as i32),
    ) * cached.plan.tail_bound();
    EvalResult {
        value: q.value.widen(&tail),
        plan: Some(cached.plan.clone()),
        quadrature_converged: q.converged,
    }
}

/// Pure imaginary, pure real, or general τ.
enum Axis {
    Imaginary(Float),
    Real(Float),
    General,
}

fn axis_of(tau: &Complex) -> Axis {
    if tau.real().is_zero() {
        Axis::Imaginary(tau.imag().clone())
    } else if tau.imag().is_zero() {
        Axis::Real(tau.real().clone())
    } else {
        Axis::General
    }
}

/// `M_ℵ(τ)`.
pub fn eval_m(aleph: &AlephParam, tau: &Complex, ctx: &PrecisionContext) -> Result<EvalResult> {
    let boosted_bits = ctx
        .boosted(cancellation_digits(aleph.to_f64(), tau))
        .working_bits();
    let tau = Complex::with_val(boosted_bits, tau);
    let result = match axis_of(&tau) {
        Axis::Imaginary(b) => transform_with(aleph, &tau, 0, ctx, |x| {
            let c = Float::with_val(boosted_bits, &b * x).cos();
            Complex::with_val(boosted_bits, (c, 0))
        }),
        Axis::Real(a) => transform_with(aleph, &tau, 0, ctx, |x| {
            let c = Float::with_val(boosted_bits, &a * x).cosh();
            Complex::with_val(boosted_bits, (c, 0))
        }),
        Axis::General => transform_with(aleph, &tau, 0, ctx, |x| {
            Complex::with_val(boosted_bits, &tau * x).cosh()
        }),
    };
    Ok(result)
}

/// `iλ`, exactly.
fn times_i(lambda: &Complex) -> Complex {
    let (re, im) = lambda.clone().into_real_imag();
    Complex::with_val(lambda.prec(), (-im, re))
}

/// `Ξ_ℵ(λ) = M_ℵ(iλ)`.
pub fn eval_xi(aleph: &AlephParam, lambda: &Complex, ctx: &PrecisionContext) -> Result<EvalResult> {
    eval_m(aleph, &times_i(lambda), ctx)
}

/// `Ξ_ℵ(λ)` for real λ, as a real bounded value.
pub fn eval_xi_real(
    aleph: &AlephParam,
    lambda: &Float,
    ctx: &PrecisionContext,
) -> Result<BoundedReal> {
    let r = eval_xi(aleph, &Complex::with_val(lambda.prec(), (lambda, 0)), ctx)?;
    Ok(r.value.re())
}

/// `d^order Ξ_ℵ/dλ^order` at real λ, by differentiating under the integral:
/// `−∫x e^{−ℵx²}G(x) sin(λx) dx` and `−∫x² e^{−ℵx²}G(x) cos(λx) dx`.
///
/// # Panics
/// If `order` is not 1 or 2.
pub fn eval_xi_derivative(
    aleph: &AlephParam,
    lambda: &Float,
    order: u32,
    ctx: &PrecisionContext,
) -> Result<EvalResult> {
    eval_xi_derivative_complex(
        aleph,
        &Complex::with_val(lambda.prec(), (lambda, 0)),
        order,
        ctx,
    )
}

/// Complex-λ variant of [`eval_xi_derivative`].
pub fn eval_xi_derivative_complex(
    aleph: &AlephParam,
    lambda: &Complex,
    order: u32,
    ctx: &PrecisionContext,
) -> Result<EvalResult> {
    assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
    let tau = times_i(lambda);
    let bits = ctx
        .boosted(cancellation_digits(aleph.to_f64(), &tau))
        .working_bits();
    let lam = Complex::with_val(bits, lambda);
    let real = lam.imag().is_zero();
    let result = transform_with(aleph, &tau, order, ctx, |x| {
        let xl = Complex::with_val(bits, &lam * x);
        let osc = match (order, real) {
            (1, true) => Complex::with_val(bits, (Float::with_val(bits, xl.real().sin_ref()), 0)),
            (1, false) => xl.sin(),
            (_, true) => Complex::with_val(bits, (Float::with_val(bits, xl.real().cos_ref()), 0)),
            (_, false) => xl.cos(),
        };
        let xp = if order == 1 {
            Float::with_val(bits, x)
        } else {
            Float::with_val(bits, x.square_ref())
        };
        -(osc * xp)
    });
    Ok(result)
}

/// `∂_ℵΞ ∓ ∂_λλΞ` at real λ.
///
/// `∂_ℵ` comes from finite differences in ℵ (step `10^(-target/3)`), `∂_λλ`
/// from [`eval_xi_derivative`], so the two sides are computed independently.
pub fn heat_flow_residual(
    aleph: &AlephParam,
    lambda: &Float,
    ctx: &PrecisionContext,
) -> Result<HeatResidual> {
    let d_aleph = differentiate(
        |a| {
            let p = AlephParam::from_float(a)?;
            eval_xi_real(&p, lambda, ctx)
        },
        aleph.value(),
        1,
        ctx,
    )?;
    let d_lambda2 = eval_xi_derivative(aleph, lambda, 2, ctx)?.value.re();
    let res_minus = (&d_aleph - &d_lambda2).abs();
    let res_plus = (&d_aleph + &d_lambda2).abs();
    Ok(HeatResidual {
        res_minus,
        res_plus,
        d_aleph,
        d_lambda2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(200, (re, im))
    }

    fn zero() -> AlephParam {
        AlephParam::new(0.0).unwrap()
    }

    #[test]
    fn aleph_parsing_and_display() {
        let a = AlephParam::parse("-0.385").unwrap();
        assert_eq!(a.to_string(), "-0.385");
        assert_eq!(a.literature_t().to_string(), "0.385");
        assert_eq!(AlephParam::parse("50").unwrap().to_string(), "50");
        assert!(AlephParam::parse("inf").is_err());
        assert!(AlephParam::new(f64::NAN).is_err());
        assert_eq!(
            AlephParam::parse("0.5").unwrap(),
            AlephParam::new(0.5).unwrap()
        );
    }

    #[test]
    fn value_at_origin() {
        let r = eval_m(&zero(), &c(0.0, 0.0), &ctx()).unwrap();
        let (re, im) = r.value.to_f64_pair();
        assert!((re - 0.0621401).abs() < 1e-6, "{re}");
        assert_eq!(im, 0.0);
        assert!(r.quadrature_converged);
        assert!(*r.value.radius() >= *r.plan.as_ref().unwrap().tail_bound());
        assert!(r.value.radius().to_f64() < 1e-30);
    }

    #[test]
    fn m_is_even_and_finite_at_one() {
        let a = eval_m(&zero(), &c(1.0, 0.0), &ctx()).unwrap();
        let b = eval_m(&zero(), &c(-1.0, 0.0), &ctx()).unwrap();
        let (d, r) = a.value.distance(&b.value);
        assert!(d <= r);
        assert!(a.value.re().to_f64().is_finite());
    }

    #[test]
    fn xi_on_imaginary_axis_is_m() {
        let ctx = ctx();
        let xi = eval_xi(&zero(), &c(0.0, 5.0), &ctx).unwrap();
        let m = eval_m(&zero(), &c(5.0, 0.0), &ctx).unwrap();
        let (d, r) = xi.value.distance(&m.value);
        assert!(d <= r, "{d} > {r}");
    }

    #[test]
    fn first_zero_is_small() {
        let v = eval_xi(&zero(), &c(28.2694504, 0.0), &ctx()).unwrap();
        assert!(v.value.modulus().to_f64() < 1e-6);
        let d = eval_xi_derivative(&zero(), &Float::with_val(200, 28.2694504), 1, &ctx()).unwrap();
        assert!(d.value.modulus() > Float::with_val(64, d.value.radius() * 10u32));
    }

    #[test]
    fn conjugate_symmetry() {
        let ctx = ctx();
        let l = c(10.0, 1.5);
        let a = eval_xi(&zero(), &l, &ctx).unwrap();
        let b = eval_xi(&zero(), &Complex::with_val(200, l.conj_ref()), &ctx).unwrap();
        let (d, r) = a.value.conj().distance(&b.value);
        assert!(d <= r);
    }

    #[test]
    fn derivatives_at_origin() {
        let ctx = ctx();
        let origin = Float::new(200);
        let d1 = eval_xi_derivative(&zero(), &origin, 1, &ctx).unwrap();
        assert!(d1.value.modulus() <= *d1.value.radius());
        let d2 = eval_xi_derivative(&zero(), &origin, 2, &ctx).unwrap();
        assert!(d2.value.re().is_negative());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let ctx = ctx();
        let lam = Float::with_val(200, 7.25);
        let direct = eval_xi_derivative(&zero(), &lam, 1, &ctx)
            .unwrap()
            .value
            .re();
        let fd = differentiate(|l| eval_xi_real(&zero(), l, &ctx), &lam, 1, &ctx).unwrap();
        assert!(direct.overlaps(&fd), "{direct} vs {fd}");
    }

    #[test]
    fn heat_equation_sign() {
        let ctx = ctx();
        let h = heat_flow_residual(&zero(), &Float::with_val(200, 5), &ctx).unwrap();
        assert!(h.res_minus.to_f64() < 1e-8);
        let ratio = h.res_plus.to_f64() / (2.0 * h.d_lambda2.to_f64().abs());
        assert!((ratio - 1.0).abs() < 1e-6);
        let h1 =
            heat_flow_residual(&AlephParam::new(1.0).unwrap(), &Float::new(200), &ctx).unwrap();
        assert!(h1.res_minus.to_f64() < 1e-8);
    }

    #[test]
    fn positive_at_origin_for_several_aleph() {
        for a in [-1.0, 0.0, 1.0, 50.0] {
            let r = eval_m(&AlephParam::new(a).unwrap(), &c(0.0, 0.0), &ctx()).unwrap();
            assert!(r.value.re().is_positive(), "aleph {a}");
        }
    }
}
