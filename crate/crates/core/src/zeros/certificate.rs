use std::fmt;

use super::contour::{count_zeros_in_box_robust, Rect};
use super::locate::locate_complex_zeros;
use super::scan::scan_real_zeros;
use super::{ComplexZero, ZeroTable, REAL_AXIS_TOLERANCE};
use crate::error::Result;
use crate::numerics::PrecisionContext;
use crate::transform::AlephParam;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    AllRealInBox,
    NonRealPresent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::AllRealInBox => "ALL_REAL_IN_BOX",
            Verdict::NonRealPresent => "NON_REAL_PRESENT",
        })
    }
}

/// Outcome of comparing the argument-principle count in `[0,B]×[−h,h]`
/// with the sign-change count on `[0,B]`.
#[derive(Clone, Debug)]
pub struct RealityReport {
    /// The box actually counted (possibly grown to avoid a zero on the edge).
    pub rect: Rect,
    pub n_real: usize,
    pub n_box: u32,
    pub verdict: Verdict,
    /// Zeros located inside the box; empty when every zero is real.
    pub located: Vec<ComplexZero>,
    /// Located zeros with `Im σ > 10^(-3)`.
    pub n_upper_nonreal: usize,
    /// `n_box = n_real + 2·n_upper_nonreal` (always true for an all-real
    /// verdict).
    pub consistent: bool,
    pub real_table: ZeroTable,
}

/// Certifies whether all zeros with `|Im λ| ≤ h` and `0 ≤ Re λ ≤ B` are real.
pub fn reality_certificate(
    aleph: &AlephParam,
    b: f64,
    h: f64,
    ctx: &PrecisionContext,
) -> Result<RealityReport> {
    let rect = Rect::new(0.0, b, -h, h)?;
    let bc = count_zeros_in_box_robust(aleph, &rect, ctx)?;
    let r = bc.rect;
    let real_table = scan_real_zeros(aleph, 0.0, r.re_hi, ctx)?;
    // a perturbed box reaches past the origin; evenness mirrors those zeros in
    let mirrored = if r.re_lo < 0.0 {
        real_table
            .real_zeros()
            .iter()
            .filter(|z| z.location.to_f64() <= -r.re_lo)
            .count()
    } else {
        0
    };
    let n_real = real_table.real_zeros().len() + mirrored;
    if bc.count as usize == n_real {
        return Ok(RealityReport {
            rect: r,
            n_real,
            n_box: bc.count,
            verdict: Verdict::AllRealInBox,
            located: Vec::new(),
            n_upper_nonreal: 0,
            consistent: true,
            real_table,
        });
    }
    let located = locate_complex_zeros(aleph, &r, ctx)?;
    let n_upper_nonreal = located
        .iter()
        .filter(|z| z.location.imag().to_f64() > REAL_AXIS_TOLERANCE)
        .map(|z| z.multiplicity as usize)
        .sum();
    Ok(RealityReport {
        rect: r,
        n_real,
        n_box: bc.count,
        verdict: Verdict::NonRealPresent,
        consistent: bc.count as usize == n_real + 2 * n_upper_nonreal,
        located,
        n_upper_nonreal,
        real_table,
    })
}
