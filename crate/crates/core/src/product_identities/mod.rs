//! Truncated Hadamard products over the zeros, zero sums, the growth order,
//! and a suite of identity checks tying the integral, series and product
//! representations together.

mod checks;
mod order;
mod product;
mod sums;

use rug::Float;
use serde::Serialize;

pub use checks::{check_identities, check_identities_with, Check, SuiteConfig};
pub use order::{estimate_order, ORDER_RADII};
pub use product::{eval_product, ProductTruncation};
pub use sums::{termwise_delta, termwise_diagnostic, zero_sum, DensityFit, ZeroSum};

use crate::numerics::{format_decimal, BoundedComplex};
use crate::transform::AlephParam;

/// One measured identity `lhs = rhs`.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: BoundedComplex,
    pub rhs: BoundedComplex,
    pub residual: Float,
    pub tolerance: Float,
    pub pass: bool,
    pub notes: String,
}

impl IdentityReport {
    /// Builds a report with `residual = |lhs − rhs|`. The tolerance is
    /// raised to at least the combined radii.
    pub fn new(
        name: impl Into<String>,
        lhs: BoundedComplex,
        rhs: BoundedComplex,
        tolerance: Float,
    ) -> Self {
        let (residual, radii) = lhs.distance(&rhs);
        let tolerance = if tolerance < radii { radii } else { tolerance };
        IdentityReport {
            name: name.into(),
            pass: residual <= tolerance,
            lhs,
            rhs,
            residual,
            tolerance,
            notes: String::new(),
        }
    }

    /// A report for a check that could not be carried out.
    pub(crate) fn failed(name: impl Into<String>, notes: String) -> Self {
        let nan = BoundedComplex::exact(rug::Complex::with_val(53, (f64::NAN, f64::NAN)));
        IdentityReport {
            name: name.into(),
            lhs: nan.clone(),
            rhs: nan,
            residual: Float::with_val(53, f64::NAN),
            tolerance: Float::new(53),
            pass: false,
            notes,
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    aleph: String,
    checks: Vec<CheckJson<'a>>,
}

#[derive(Serialize)]
struct CheckJson<'a> {
    name: &'a str,
    lhs: [String; 2],
    rhs: [String; 2],
    residual: String,
    tolerance: String,
    pass: bool,
    notes: &'a str,
}

/// Serialises reports as `{"aleph": …, "checks": [...]}` with every number a
/// decimal string of `digits` significant digits.
pub fn reports_to_json(aleph: &AlephParam, reports: &[IdentityReport], digits: u32) -> String {
    let pair = |b: &BoundedComplex| {
        [
            format_decimal(b.value().real(), digits),
            format_decimal(b.value().imag(), digits),
        ]
    };
    let doc = ReportJson {
        aleph: aleph.to_string(),
        checks: reports
            .iter()
            .map(|r| CheckJson {
                name: &r.name,
                lhs: pair(&r.lhs),
                rhs: pair(&r.rhs),
                residual: format_decimal(&r.residual, digits),
                tolerance: format_decimal(&r.tolerance, digits),
                pass: r.pass,
                notes: &r.notes,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialisation cannot fail");
    s.push('\n');
    s
}
