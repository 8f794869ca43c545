use rug::ops::Pow;
use rug::{Complex, Float};

use super::sums::DensityFit;
use crate::error::{Error, Result};
use crate::numerics::{BoundedComplex, BoundedReal, PrecisionContext, RADIUS_BITS};
use crate::transform::EvalResult;
use crate::zeros::{ZeroTable, REAL_AXIS_TOLERANCE};

/// How much of the product was kept, and a bound on what was dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductTruncation {
    factors: usize,
    tail_estimate: f64,
}

impl ProductTruncation {
    /// Number of real-zero factors `L`.
    pub fn factors(&self) -> usize {
        self.factors
    }

    /// Bound on `|log Π_{ℓ>L}(1 − λ²/ρ_ℓ²)|`; infinite when `|λ|` reaches the
    /// first omitted zero.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    /// `scale·(e^tail − 1)`: the absolute error the omitted factors can cause
    /// in a product of size `scale`.
    pub fn envelope(&self, scale: f64) -> f64 {
        scale * self.tail_estimate.exp_m1()
    }
}

/// `M0·Π_{ℓ≤L}(1 − λ²/ρ_ℓ²)` over the first `L` positive real zeros.
///
/// Non-real zeros stored in the table with `|σ| ≤ ρ_L` contribute
/// `(1 − λ²/σ²)(1 − λ²/σ̄²)`, so the product stays correct if some zeros are
/// off the axis.
///
/// The omitted factors are bounded by `|λ|²·T/(1 − q)`, where `T` is the
/// density-fit estimate of `Σ_{ℓ>L} ρ_ℓ^(−2)` and `q = |λ|²/ρ_{L+1}²`
/// (`ρ_L` if the table stops at `L`). The radius covers `M0`'s radius and
/// each zero's certified digits.
pub fn eval_product(
    m0: &BoundedReal,
    table: &ZeroTable,
    l: usize,
    lambda: &Complex,
    ctx: &PrecisionContext,
) -> Result<(EvalResult, ProductTruncation)> {
    let real = table.real_zeros();
    if real.len() < l {
        return Err(Error::InsufficientZeros {
            have: real.len(),
            need: l,
        });
    }
    let bits = ctx.working_bits().max(m0.prec());
    let lam2 = Complex::with_val(bits, lambda.square_ref());
    let lam2_abs = Float::with_val(bits, lam2.abs_ref());
    let one = Float::with_val(RADIUS_BITS, 1u32);

    let mut prod = Complex::with_val(bits, (1, 0));
    // Π(|f| + δ) over factors, against which Π|f| gives the propagated radius
    let mut upper = Float::with_val(RADIUS_BITS, 1u32);
    let mut apply = |zero2: &Complex, dz: Float| {
        let ratio = Complex::with_val(bits, &lam2 / zero2);
        let f = Complex::with_val(bits, 1 - ratio);
        let fa = Float::with_val(RADIUS_BITS, f.abs_ref());
        upper *= fa + dz;
        prod *= f;
    };
    for z in &real[..l] {
        let rho2 = Complex::with_val(bits, (Float::with_val(bits, z.location.square_ref()), 0));
        apply(
            &rho2,
            factor_sensitivity(&lam2_abs, &z.location, z.certified_digits),
        );
    }
    let reach = real[..l].last().map(|z| z.location.to_f64()).unwrap_or(0.0);
    for z in table.complex_zeros() {
        let im = z.location.imag().to_f64().abs();
        let modulus = Float::with_val(bits, z.location.abs_ref());
        if im < REAL_AXIS_TOLERANCE || modulus.to_f64() > reach {
            continue;
        }
        let dz = factor_sensitivity(&lam2_abs, &modulus, z.certified_digits);
        let s2 = Complex::with_val(bits, z.location.square_ref());
        let c2 = Complex::with_val(bits, s2.conj_ref());
        apply(&s2, dz.clone());
        apply(&c2, dz);
    }
    let prod_abs = Float::with_val(RADIUS_BITS, prod.abs_ref());
    let zero_radius =
        Float::with_val(RADIUS_BITS, &upper - &prod_abs).max(&Float::new(RADIUS_BITS));

    let m0_abs = Float::with_val(RADIUS_BITS, m0.value().abs_ref());
    let m0_hi = Float::with_val(RADIUS_BITS, &m0_abs + m0.radius());
    let radius = Float::with_val(RADIUS_BITS, &prod_abs * m0.radius()) + zero_radius * m0_hi;
    let value = Complex::with_val(bits, &prod * m0.value());
    let rounding =
        Float::with_val(RADIUS_BITS, value.abs_ref()) * (one << (l as i32 + 8 - bits as i32));

    let tail_estimate = tail(table, l, lam2_abs.to_f64());
    Ok((
        EvalResult {
            value: BoundedComplex::new(value, radius + rounding),
            plan: None,
            quadrature_converged: true,
        },
        ProductTruncation {
            factors: l,
            tail_estimate,
        },
    ))
}

/// `|d(1 − λ²/ρ²)/dρ|·Δρ = 2|λ|²|ρ|^(−3)·10^(−digits)`.
fn factor_sensitivity(lam2_abs: &Float, rho: &Float, digits: u32) -> Float {
    let eps = Float::with_val(RADIUS_BITS, 10u32).pow(-(digits as i32));
    let r = Float::with_val(RADIUS_BITS, rho.abs_ref());
    Float::with_val(RADIUS_BITS, lam2_abs * 2u32) / r.pow(3u32) * eps
}

fn tail(table: &ZeroTable, l: usize, lam2_abs: f64) -> f64 {
    if lam2_abs == 0.0 {
        return 0.0;
    }
    let rho: Vec<f64> = table
        .real_zeros()
        .iter()
        .map(|z| z.location.to_f64())
        .collect();
    let Some(fit) = DensityFit::fit(&rho) else {
        return f64::INFINITY;
    };
    // the sum over omitted zeros starts right after ρ_L (or at the origin)
    let (omitted, next) = match l {
        0 => return f64::INFINITY,
        _ => (
            fit.tail_sum(rho[l - 1], 2),
            rho.get(l).copied().unwrap_or(rho[l - 1]),
        ),
    };
    let q = lam2_abs / (next * next);
    if q >= 1.0 {
        return f64::INFINITY;
    }
    lam2_abs * omitted / (1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{eval_m, AlephParam};
    use crate::zeros::scan_real_zeros;

    #[test]
    fn empty_product_is_m0() {
        let ctx = PrecisionContext::default();
        let aleph = AlephParam::new(0.0).unwrap();
        let table = ZeroTable::new(aleph, ctx);
        let m0 = BoundedReal::exact(Float::with_val(128, 0.0621401));
        let (r, t) = eval_product(&m0, &table, 0, &Complex::with_val(128, (3, 1)), &ctx).unwrap();
        assert_eq!(r.value.value().real(), m0.value());
        assert!(r.value.value().imag().is_zero());
        assert_eq!(t.factors(), 0);
        let short = eval_product(&m0, &table, 1, &Complex::with_val(128, 0), &ctx);
        assert!(matches!(
            short,
            Err(Error::InsufficientZeros { have: 0, need: 1 })
        ));
    }

    #[test]
    fn first_factor_vanishes_at_first_zero() {
        let ctx = PrecisionContext::default();
        let aleph = AlephParam::new(0.0).unwrap();
        let table = scan_real_zeros(&aleph, 0.0, 60.0, &ctx).unwrap();
        let m0 = eval_m(&aleph, &Complex::with_val(128, 0), &ctx)
            .unwrap()
            .value
            .re();
        let lam = Complex::with_val(128, (&table.real_zeros()[0].location, 0));
        let (r, t) = eval_product(&m0, &table, 2, &lam, &ctx).unwrap();
        assert!(r.value.modulus().to_f64() < 1e-25);
        assert!(t.tail_estimate().is_finite());
        let (_, t3) = eval_product(&m0, &table, 3, &lam, &ctx).unwrap();
        assert!(t3.tail_estimate() <= t.tail_estimate());
    }
}
