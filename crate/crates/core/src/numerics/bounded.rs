use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Complex, Float};

/// Precision used to carry error radii. Radii only need a few correct
/// digits but must never underflow, which `f64` would for the tiny values
/// met at large heights.
pub const RADIUS_BITS: u32 = 64;

fn radius(x: impl Into<f64>) -> Float {
    Float::with_val(RADIUS_BITS, x.into())
}

fn abs_radius(x: &Float) -> Float {
    Float::with_val(RADIUS_BITS, x.abs_ref())
}

fn abs_radius_c(z: &Complex) -> Float {
    Float::with_val(RADIUS_BITS, z.abs_ref())
}

/// A real value with an absolute error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedReal {
    value: Float,
    radius: Float,
}

impl BoundedReal {
    /// Panics if `radius` is negative or NaN.
    pub fn new(value: Float, radius: Float) -> Self {
        assert!(
            radius >= 0,
            "error radius must be nonnegative, got {radius}"
        );
        let radius = Float::with_val(RADIUS_BITS, &radius);
        BoundedReal { value, radius }
    }

    pub fn exact(value: Float) -> Self {
        BoundedReal {
            value,
            radius: radius(0.0),
        }
    }

    pub fn with_f64_radius(value: Float, r: f64) -> Self {
        Self::new(value, radius(r))
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn radius(&self) -> &Float {
        &self.radius
    }

    pub fn into_parts(self) -> (Float, Float) {
        (self.value, self.radius)
    }

    pub fn prec(&self) -> u32 {
        self.value.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Lower end `value - radius`.
    pub fn lower(&self) -> Float {
        Float::with_val(self.value.prec(), &self.value - &self.radius)
    }

    pub fn upper(&self) -> Float {
        Float::with_val(self.value.prec(), &self.value + &self.radius)
    }

    /// Strictly positive beyond the error radius.
    pub fn is_positive(&self) -> bool {
        self.lower() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.upper() < 0
    }

    /// Sign is resolved when |value| exceeds the radius.
    pub fn sign_resolved(&self) -> bool {
        abs_radius(&self.value) > self.radius
    }

    pub fn abs(&self) -> BoundedReal {
        BoundedReal {
            value: Float::with_val(self.value.prec(), self.value.abs_ref()),
            radius: self.radius.clone(),
        }
    }

    /// Grows the radius by `extra`.
    pub fn widen(mut self, extra: &Float) -> Self {
        self.radius += extra;
        self
    }

    pub fn scale(&self, k: &Float) -> BoundedReal {
        let prec = self.value.prec().max(k.prec());
        BoundedReal {
            value: Float::with_val(prec, &self.value * k),
            radius: Float::with_val(RADIUS_BITS, &self.radius * abs_radius(k)),
        }
    }

    pub fn to_complex(&self) -> BoundedComplex {
        BoundedComplex {
            value: Complex::with_val(self.value.prec(), (&self.value, 0)),
            radius: self.radius.clone(),
        }
    }

    /// True if the two balls overlap.
    pub fn overlaps(&self, other: &BoundedReal) -> bool {
        let d = abs_radius(&Float::with_val(
            self.prec().max(other.prec()),
            &self.value - &other.value,
        ));
        d <= Float::with_val(RADIUS_BITS, &self.radius + &other.radius)
    }
}

impl fmt::Display for BoundedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {}",
            self.value.to_string_radix(10, Some(20)),
            self.radius.to_string_radix(10, Some(3))
        )
    }
}

impl Add for &BoundedReal {
    type Output = BoundedReal;
    fn add(self, rhs: &BoundedReal) -> BoundedReal {
        let prec = self.prec().max(rhs.prec());
        BoundedReal {
            value: Float::with_val(prec, &self.value + &rhs.value),
            radius: Float::with_val(RADIUS_BITS, &self.radius + &rhs.radius),
        }
    }
}

impl Sub for &BoundedReal {
    type Output = BoundedReal;
    fn sub(self, rhs: &BoundedReal) -> BoundedReal {
        let prec = self.prec().max(rhs.prec());
        BoundedReal {
            value: Float::with_val(prec, &self.value - &rhs.value),
            radius: Float::with_val(RADIUS_BITS, &self.radius + &rhs.radius),
        }
    }
}

impl Mul for &BoundedReal {
    type Output = BoundedReal;
    /// Radius `|a|·rb + |b|·ra + ra·rb`.
    fn mul(self, rhs: &BoundedReal) -> BoundedReal {
        let prec = self.prec().max(rhs.prec());
        let r = abs_radius(&self.value) * &rhs.radius
            + abs_radius(&rhs.value) * &self.radius
            + Float::with_val(RADIUS_BITS, &self.radius * &rhs.radius);
        BoundedReal {
            value: Float::with_val(prec, &self.value * &rhs.value),
            radius: Float::with_val(RADIUS_BITS, r),
        }
    }
}

impl Neg for &BoundedReal {
    type Output = BoundedReal;
    fn neg(self) -> BoundedReal {
        BoundedReal {
            value: Float::with_val(self.prec(), -&self.value),
            radius: self.radius.clone(),
        }
    }
}

/// A complex value with an absolute (modulus) error radius.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedComplex {
    value: Complex,
    radius: Float,
}

impl BoundedComplex {
    pub fn new(value: Complex, radius: Float) -> Self {
        assert!(
            radius >= 0,
            "error radius must be nonnegative, got {radius}"
        );
        let radius = Float::with_val(RADIUS_BITS, &radius);
        BoundedComplex { value, radius }
    }

    pub fn exact(value: Complex) -> Self {
        BoundedComplex {
            value,
            radius: radius(0.0),
        }
    }

    pub fn value(&self) -> &Complex {
        &self.value
    }

    pub fn radius(&self) -> &Float {
        &self.radius
    }

    pub fn into_parts(self) -> (Complex, Float) {
        (self.value, self.radius)
    }

    pub fn prec(&self) -> u32 {
        self.value.prec().0
    }

    pub fn re(&self) -> BoundedReal {
        BoundedReal {
            value: self.value.real().clone(),
            radius: self.radius.clone(),
        }
    }

    pub fn im(&self) -> BoundedReal {
        BoundedReal {
            value: self.value.imag().clone(),
            radius: self.radius.clone(),
        }
    }

    pub fn modulus(&self) -> Float {
        Float::with_val(self.prec(), self.value.abs_ref())
    }

    pub fn conj(&self) -> BoundedComplex {
        BoundedComplex {
            value: self.value.clone().conj(),
            radius: self.radius.clone(),
        }
    }

    pub fn widen(mut self, extra: &Float) -> Self {
        self.radius += extra;
        self
    }

    pub fn scale(&self, k: &Float) -> BoundedComplex {
        BoundedComplex {
            value: Complex::with_val(self.value.prec(), &self.value * k),
            radius: Float::with_val(RADIUS_BITS, &self.radius * abs_radius(k)),
        }
    }

    /// `|self - other|` together with the sum of both radii.
    pub fn distance(&self, other: &BoundedComplex) -> (Float, Float) {
        let prec = self.prec().max(other.prec());
        let d = Complex::with_val(prec, &self.value - &other.value);
        (
            Float::with_val(prec, d.abs_ref()),
            Float::with_val(RADIUS_BITS, &self.radius + &other.radius),
        )
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.value.real().to_f64(), self.value.imag().to_f64())
    }
}

impl fmt::Display for BoundedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) ± {}",
            self.value.real().to_string_radix(10, Some(20)),
            self.value.imag().to_string_radix(10, Some(20)),
            self.radius.to_string_radix(10, Some(3))
        )
    }
}

impl Add for &BoundedComplex {
    type Output = BoundedComplex;
    fn add(self, rhs: &BoundedComplex) -> BoundedComplex {
        let prec = self.prec().max(rhs.prec());
        BoundedComplex {
            value: Complex::with_val(prec, &self.value + &rhs.value),
            radius: Float::with_val(RADIUS_BITS, &self.radius + &rhs.radius),
        }
    }
}

impl Sub for &BoundedComplex {
    type Output = BoundedComplex;
    fn sub(self, rhs: &BoundedComplex) -> BoundedComplex {
        let prec = self.prec().max(rhs.prec());
        BoundedComplex {
            value: Complex::with_val(prec, &self.value - &rhs.value),
            radius: Float::with_val(RADIUS_BITS, &self.radius + &rhs.radius),
        }
    }
}

impl Mul for &BoundedComplex {
    type Output = BoundedComplex;
    fn mul(self, rhs: &BoundedComplex) -> BoundedComplex {
        let prec = self.prec().max(rhs.prec());
        let r = abs_radius_c(&self.value) * &rhs.radius
            + abs_radius_c(&rhs.value) * &self.radius
            + Float::with_val(RADIUS_BITS, &self.radius * &rhs.radius);
        BoundedComplex {
            value: Complex::with_val(prec, &self.value * &rhs.value),
            radius: Float::with_val(RADIUS_BITS, r),
        }
    }
}

impl Neg for &BoundedComplex {
    type Output = BoundedComplex;
    fn neg(self) -> BoundedComplex {
        BoundedComplex {
            value: Complex::with_val(self.value.prec(), -&self.value),
            radius: self.radius.clone(),
        }
    }
}
