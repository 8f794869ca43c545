//! First and second derivatives by Richardson-extrapolated central differences.

use rug::Float;

use super::bounded::{BoundedReal, RADIUS_BITS};
use super::{ten_pow_neg, PrecisionContext};
use crate::error::{Error, Result};

/// `f'(x)` (order 1) or `f''(x)` (order 2) with the default step
/// `h0 = 10^(-floor(target/(order+2))) · max(1, |x|)`.
///
/// # Panics
/// If `order` is not 1 or 2.
pub fn differentiate<F>(f: F, x: &Float, order: u32, ctx: &PrecisionContext) -> Result<BoundedReal>
where
    F: Fn(&Float) -> Result<BoundedReal>,
{
    assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
    let bits = ctx.working_bits();
    let scale = Float::with_val(bits, x.abs_ref()).max(&Float::with_val(bits, 1u32));
    let h0 = ten_pow_neg(ctx.target_digits() / (order + 2), bits) * scale;
    differentiate_with_step(f, x, order, &h0, ctx)
}

/// Derivative from central differences at `h0`, `h0/2`, `h0/4`, combined by
/// two Richardson steps (error `O(h^6)`).
///
/// The radius is the last extrapolation correction plus the propagated
/// radii of the function values divided by the smallest step (squared, for
/// order 2).
pub fn differentiate_with_step<F>(
    f: F,
    x: &Float,
    order: u32,
    h0: &Float,
    ctx: &PrecisionContext,
) -> Result<BoundedReal>
where
    F: Fn(&Float) -> Result<BoundedReal>,
{
    let bits = ctx.working_bits();
    let smallest = Float::with_val(bits, h0 / 4u32);
    let floor = ten_pow_neg(ctx.working_digits().saturating_sub(2), bits);
    if smallest.clone().abs() < floor || smallest == 0 {
        return Err(Error::StepUnderflow {
            step: smallest.to_f64(),
        });
    }

    assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
    let centre = if order == 2 { Some(f(x)?) } else { None };
    let mut central = Vec::with_capacity(3);
    let mut max_radius = centre
        .as_ref()
        .map_or_else(|| Float::new(RADIUS_BITS), |c| c.radius().clone());
    for k in 0..3u32 {
        let h = Float::with_val(bits, h0 >> k as i32);
        let plus = f(&Float::with_val(bits, x + &h))?;
        let minus = f(&Float::with_val(bits, x - &h))?;
        for r in [plus.radius(), minus.radius()] {
            if *r > max_radius {
                max_radius = r.clone();
            }
        }
        let d = match &centre {
            None => Float::with_val(bits, plus.value() - minus.value()) / (h * 2u32),
            Some(c) => {
                let num = Float::with_val(bits, plus.value() + minus.value())
                    - Float::with_val(bits, c.value() * 2u32);
                num / h.square()
            }
        };
        central.push(d);
    }

    // first level: (4 D(h/2) - D(h)) / 3
    let r1a = (Float::with_val(bits, &central[1] * 4u32) - &central[0]) / 3u32;
    let r1b = (Float::with_val(bits, &central[2] * 4u32) - &central[1]) / 3u32;
    // second level: (16 R(h/2) - R(h)) / 15
    let r2 = (Float::with_val(bits, &r1b * 16u32) - &r1a) / 15u32;

    let correction = Float::with_val(RADIUS_BITS, &r2 - &r1b).abs();
    // the combined weights on f-values sum (in absolute value) to below
    // 3/h_min (order 1) or 12/h_min^2 (order 2)
    let h_min = Float::with_val(RADIUS_BITS, smallest.abs_ref());
    let propagated = if order == 1 {
        max_radius * 3u32 / h_min
    } else {
        max_radius * 12u32 / h_min.square()
    };
    let rounding = Float::with_val(RADIUS_BITS, r2.abs_ref()) * ctx.epsilon() * 16u32;
    Ok(BoundedReal::new(r2, correction + propagated + rounding))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_exp() {
        let ctx = PrecisionContext::default();
        let bits = ctx.working_bits();
        let x = Float::with_val(bits, 0.7);
        let d = differentiate(
            |t| Ok(BoundedReal::exact(Float::with_val(bits, t.exp_ref()))),
            &x,
            1,
            &ctx,
        )
        .unwrap();
        let exact = Float::with_val(bits, x.exp_ref());
        let err = Float::with_val(bits, d.value() - &exact).abs();
        assert!(err < 1e-25, "err {err}");
        assert!(d.radius().to_f64() >= err.to_f64() * 0.01);
    }

    #[test]
    fn derivative_of_sine_at_large_argument() {
        let ctx = PrecisionContext::default();
        let bits = ctx.working_bits();
        let x = Float::with_val(bits, 40.0);
        let d = differentiate(
            |t| Ok(BoundedReal::exact(Float::with_val(bits, t.sin_ref()))),
            &x,
            1,
            &ctx,
        )
        .unwrap();
        let exact = Float::with_val(bits, x.cos_ref());
        assert!(Float::with_val(bits, d.value() - &exact).abs() < 1e-20);
    }

    #[test]
    fn tiny_step_underflows() {
        let ctx = PrecisionContext::default();
        let bits = ctx.working_bits();
        let x = Float::with_val(bits, 1.0);
        let h = Float::with_val(bits, 1e-60);
        let r = differentiate_with_step(|t| Ok(BoundedReal::exact(t.clone())), &x, 1, &h, &ctx);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn square_at_three() {
        let ctx = PrecisionContext::default();
        let bits = ctx.working_bits();
        let d = differentiate(
            |t| Ok(BoundedReal::exact(Float::with_val(bits, t.square_ref()))),
            &Float::with_val(bits, 3),
            1,
            &ctx,
        )
        .unwrap();
        assert!((d.value().clone() - 6u32).abs() < 1e-10);
    }

    #[test]
    fn second_derivative_of_sine_at_zero() {
        let ctx = PrecisionContext::default();
        let bits = ctx.working_bits();
        let d = differentiate(
            |t| Ok(BoundedReal::exact(Float::with_val(bits, t.sin_ref()))),
            &Float::new(bits),
            2,
            &ctx,
        )
        .unwrap();
        assert!(d.value().clone().abs() < 1e-10);
    }

    #[test]
    fn second_derivative_of_exp_at_one() {
        let ctx = PrecisionContext::new(30, 20, 5).unwrap();
        let bits = ctx.working_bits();
        let one = Float::with_val(bits, 1u32);
        let d = differentiate(
            |t| Ok(BoundedReal::exact(Float::with_val(bits, t.exp_ref()))),
            &one,
            2,
            &ctx,
        )
        .unwrap();
        let e = Float::with_val(bits, one.exp_ref());
        let err = Float::with_val(bits, d.value() - &e).abs();
        assert!(err < 1e-8, "err {err}");
        assert!(d.radius().to_f64() < 1e-6);
    }

    #[test]
    fn odd_derivative_of_even_function_vanishes() {
        let ctx = PrecisionContext::default();
        let bits = ctx.working_bits();
        let d = differentiate(
            |t| Ok(BoundedReal::exact(Float::with_val(bits, t.cos_ref()))),
            &Float::new(bits),
            1,
            &ctx,
        )
        .unwrap();
        assert!(d.value().clone().abs() <= d.radius().clone() + 1e-40);
    }
}
