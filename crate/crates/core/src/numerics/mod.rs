//! Configurable-precision substrate shared by every other module.
//!
//! All numbers live in [`rug::Float`] / [`rug::Complex`] at a bit precision
//! derived from a [`PrecisionContext`]. Values carry a conservative,
//! first-order error radius ([`BoundedReal`], [`BoundedComplex`]); the
//! radii are estimates, not interval-arithmetic certificates.

mod bounded;
mod decimal;
mod diff;
mod quadrature;

pub use bounded::{BoundedComplex, BoundedReal, RADIUS_BITS};
pub use decimal::{format_decimal, parse_decimal, significant_digits};
pub use diff::{differentiate, differentiate_with_step};
pub use quadrature::{
    gauss_legendre, integrate, integrate_complex, GaussLegendre, Quadrature, SampledWeight,
    WeightedRule, PANEL_DEGREE,
};

use rug::Float;

use crate::error::{Error, Result};

/// log2(10).
pub(crate) const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Converts a decimal-digit budget to MPFR bits, with a small guard.
pub fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * LOG2_10).ceil() as u32 + 8
}

/// `10^(-digits)` at the given precision.
pub(crate) fn ten_pow_neg(digits: u32, bits: u32) -> Float {
    let p = Float::with_val(bits, Float::u_pow_u(10, digits));
    p.recip()
}

/// Working/target digit budget governing every numeric operation.
///
/// `working_digits` is the precision arithmetic is carried out at;
/// `target_digits` is what reported results aim to guarantee. The gap
/// between them (at least 10 digits) absorbs rounding in long sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    working_digits: u32,
    target_digits: u32,
    max_refinements: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            working_digits: Self::DEFAULT_WORKING_DIGITS,
            target_digits: Self::DEFAULT_TARGET_DIGITS,
            max_refinements: Self::DEFAULT_MAX_REFINEMENTS,
        }
    }
}

impl PrecisionContext {
    pub const DEFAULT_WORKING_DIGITS: u32 = 50;
    pub const DEFAULT_TARGET_DIGITS: u32 = 30;
    pub const DEFAULT_MAX_REFINEMENTS: u32 = 20;

    pub fn new(working_digits: u32, target_digits: u32, max_refinements: u32) -> Result<Self> {
        if target_digits == 0 {
            return Err(Error::InvalidPrecision(
                "target_digits must be positive".into(),
            ));
        }
        if working_digits < target_digits + 10 {
            return Err(Error::InvalidPrecision(format!(
                "working_digits ({working_digits}) must be at least target_digits + 10 ({})",
                target_digits + 10
            )));
        }
        if max_refinements == 0 {
            return Err(Error::InvalidPrecision(
                "max_refinements must be at least 1".into(),
            ));
        }
        Ok(PrecisionContext {
            working_digits,
            target_digits,
            max_refinements,
        })
    }

    /// Context with the given target and the default 20-digit working margin.
    pub fn with_target_digits(target_digits: u32) -> Result<Self> {
        Self::new(
            target_digits + 20,
            target_digits,
            Self::DEFAULT_MAX_REFINEMENTS,
        )
    }

    pub fn working_digits(&self) -> u32 {
        self.working_digits
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    pub fn max_refinements(&self) -> u32 {
        self.max_refinements
    }

    pub fn working_bits(&self) -> u32 {
        digits_to_bits(self.working_digits)
    }

    /// Same context with both budgets raised by `extra` digits.
    ///
    /// Used where the quantity of interest is expected to be `10^(-extra)`
    /// times the size of the integrand, so that the relative accuracy of the
    /// result stays at `target_digits`.
    pub fn boosted(&self, extra: u32) -> Self {
        PrecisionContext {
            working_digits: self.working_digits + extra,
            target_digits: self.target_digits + extra,
            max_refinements: self.max_refinements,
        }
    }

    /// Same budgets with doubled working digits.
    pub fn doubled_working(&self) -> Self {
        PrecisionContext {
            working_digits: self.working_digits * 2,
            ..*self
        }
    }

    pub fn with_max_refinements(&self, max_refinements: u32) -> Result<Self> {
        Self::new(self.working_digits, self.target_digits, max_refinements)
    }

    /// Stopping tolerance for adaptive refinement: `10^(-target-2)`.
    pub fn refinement_tolerance(&self) -> Float {
        ten_pow_neg(self.target_digits + 2, self.working_bits())
    }

    /// Unit roundoff of the working precision.
    pub fn epsilon(&self) -> Float {
        let bits = self.working_bits();
        Float::with_val(RADIUS_BITS, 1u32) >> (bits as i32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_context() {
        let ctx = PrecisionContext::default();
        assert_eq!(ctx.working_digits(), 50);
        assert_eq!(ctx.target_digits(), 30);
        assert!(ctx.working_bits() >= 166);
    }

    #[test]
    fn rejects_thin_working_margin() {
        assert!(PrecisionContext::new(39, 30, 5).is_err());
        assert!(PrecisionContext::new(40, 30, 5).is_ok());
        assert!(PrecisionContext::new(40, 30, 0).is_err());
        assert!(PrecisionContext::new(40, 0, 3).is_err());
    }

    #[test]
    fn boost_keeps_margin() {
        let ctx = PrecisionContext::default().boosted(12);
        assert_eq!(ctx.target_digits(), 42);
        assert_eq!(ctx.working_digits(), 62);
    }

    #[test]
    fn tolerance_magnitude() {
        let ctx = PrecisionContext::default();
        let tol = ctx.refinement_tolerance().to_f64();
        assert!((tol / 1e-32 - 1.0).abs() < 1e-12);
    }
}
