use rug::ops::Pow;
use rug::{Complex, Float};

use super::contour::{count_robust_with, count_with, BoxCount, Rect, Sampler};
use super::scan::{opposite, refine_zero, xi_f64};
use super::{ComplexZero, REAL_AXIS_TOLERANCE};
use crate::error::{Error, Result};
use crate::numerics::{PrecisionContext, RADIUS_BITS};
use crate::transform::{eval_xi, eval_xi_derivative_complex, AlephParam};

/// Boxes narrower than this are reported as a zero of multiplicity `count`.
const MIN_DIAMETER: f64 = 1e-3;
/// Half-width of the box used to confirm an isolated Newton root.
const VERIFY_HALF_WIDTH: f64 = 2.5e-4;
/// Off-centre split points; later pairs are tried when a split line meets a
/// zero or the child counts fail to add up.
const SPLIT_FRACTIONS: [(f64, f64); 4] = [
    (0.5371, 0.5213),
    (0.4629, 0.4787),
    (0.6173, 0.3917),
    (0.3827, 0.6083),
];
const NEWTON_ITERATIONS: usize = 40;

/// All zeros of Ξ_ℵ inside `rect`, each with its multiplicity.
///
/// The box is counted by the argument principle and subdivided until every
/// piece holds at most one zero or is smaller than `10^(-3)` across. A
/// single zero is located by refining a real sign change when its box
/// straddles the real axis, otherwise by complex Newton iteration confirmed
/// by a count-one box around the root. Lower-half zeros are returned as
/// they are found; the multiplicities add up to the count of the (possibly
/// perturbed) outer box.
pub fn locate_complex_zeros(
    aleph: &AlephParam,
    rect: &Rect,
    ctx: &PrecisionContext,
) -> Result<Vec<ComplexZero>> {
    let sampler = Sampler::new(aleph, ctx);
    let top = count_robust_with(&sampler, rect)?;
    let mut out = Vec::new();
    descend(&sampler, &top, 0, &mut out)?;
    out.sort_by(|a, b| {
        let ka = (a.location.real().to_f64(), a.location.imag().to_f64());
        let kb = (b.location.real().to_f64(), b.location.imag().to_f64());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn descend(
    sampler: &Sampler<'_>,
    bc: &BoxCount,
    depth: u32,
    out: &mut Vec<ComplexZero>,
) -> Result<()> {
    if bc.count == 0 {
        return Ok(());
    }
    if bc.count == 1 {
        if let Some(z) = isolate_single(sampler, &bc.rect)? {
            out.push(z);
            return Ok(());
        }
    }
    let r = bc.rect;
    if r.diameter() < MIN_DIAMETER {
        let (re, im) = r.centre();
        out.push(cluster(sampler, re, im, bc.count)?);
        return Ok(());
    }
    if depth >= 4 * sampler.ctx().max_refinements() {
        return Err(Error::SubdivisionLimit { depth });
    }
    let mut last_err = None;
    for (fr, fi) in SPLIT_FRACTIONS {
        let (fr, fi) = if r.width() > 2.0 * r.height() {
            (Some(fr), None)
        } else if r.height() > 2.0 * r.width() {
            (None, Some(fi))
        } else {
            (Some(fr), Some(fi))
        };
        match count_children(sampler, &r.split(fr, fi)) {
            Ok(children) if children.iter().map(|c| c.count).sum::<u32>() == bc.count => {
                for c in &children {
                    descend(sampler, c, depth + 1, out)?;
                }
                return Ok(());
            }
            Ok(_) => {}
            Err(e @ Error::ZeroOnContour { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::SubdivisionLimit { depth }))
}

fn count_children(sampler: &Sampler<'_>, rects: &[Rect]) -> Result<Vec<BoxCount>> {
    rects.iter().map(|r| count_with(sampler, r)).collect()
}

fn cluster(sampler: &Sampler<'_>, re: f64, im: f64, multiplicity: u32) -> Result<ComplexZero> {
    let v = sampler.eval(re, im)?;
    let bits = sampler.ctx().working_bits();
    Ok(ComplexZero {
        aleph: sampler.aleph().clone(),
        location: Complex::with_val(bits, (re, im)),
        residual: v.modulus(),
        multiplicity,
        certified_digits: 3,
    })
}

/// Locates the one zero in `rect`, or `None` if neither method settles.
fn isolate_single(sampler: &Sampler<'_>, rect: &Rect) -> Result<Option<ComplexZero>> {
    let aleph = sampler.aleph();
    let ctx = sampler.ctx();
    if rect.straddles_real_axis() {
        let lo = rect.re_lo.max(0.0);
        let hi = rect.re_hi;
        if lo < hi {
            if let Some(z) = real_root(aleph, lo, hi, ctx)? {
                return Ok(Some(z));
            }
        }
    }
    let Some((sigma, digits)) = newton(aleph, rect, ctx)? else {
        return Ok(None);
    };
    let (re, im) = (sigma.real().to_f64(), sigma.imag().to_f64());
    if im.abs() < REAL_AXIS_TOLERANCE && re > 0.0 {
        if let Some(z) = real_root(
            aleph,
            re - REAL_AXIS_TOLERANCE,
            re + REAL_AXIS_TOLERANCE,
            ctx,
        )? {
            return Ok(Some(z));
        }
    }
    let tiny = Rect::new(
        re - VERIFY_HALF_WIDTH,
        re + VERIFY_HALF_WIDTH,
        im - VERIFY_HALF_WIDTH,
        im + VERIFY_HALF_WIDTH,
    )?;
    match count_with(sampler, &tiny) {
        Ok(c) if c.count == 1 => {}
        Ok(_) | Err(Error::ZeroOnContour { .. }) => return Ok(None),
        Err(e) => return Err(e),
    }
    let residual = eval_xi(aleph, &sigma, ctx)?.value.modulus();
    Ok(Some(ComplexZero {
        aleph: aleph.clone(),
        location: sigma,
        residual,
        multiplicity: 1,
        certified_digits: digits,
    }))
}

fn real_root(
    aleph: &AlephParam,
    lo: f64,
    hi: f64,
    ctx: &PrecisionContext,
) -> Result<Option<ComplexZero>> {
    let (a, b) = (xi_f64(aleph, lo, ctx)?, xi_f64(aleph, hi, ctx)?);
    if !opposite(&a, &b) {
        return Ok(None);
    }
    let bits = ctx.working_bits();
    let z = refine_zero(
        aleph,
        &Float::with_val(bits, lo),
        &Float::with_val(bits, hi),
        ctx,
    )?;
    let location = Complex::with_val(bits, (&z.location, 0));
    let residual = eval_xi(aleph, &location, ctx)?.value.modulus();
    Ok(Some(ComplexZero {
        aleph: aleph.clone(),
        location,
        residual,
        multiplicity: 1,
        certified_digits: z.certified_digits,
    }))
}

/// Complex Newton from the centre of `rect`; gives up if an iterate leaves
/// the box (grown by 10%) or the step fails to shrink below `10^(5-target)`.
fn newton(
    aleph: &AlephParam,
    rect: &Rect,
    ctx: &PrecisionContext,
) -> Result<Option<(Complex, u32)>> {
    let bits = ctx.working_bits();
    let (re, im) = rect.centre();
    let mut sigma = Complex::with_val(bits, (re, im));
    let guard = rect.expanded(0.1 * rect.diameter());
    let tol = Float::with_val(RADIUS_BITS, 10u32).pow(5 - ctx.target_digits() as i32);
    for _ in 0..NEWTON_ITERATIONS {
        let f = eval_xi(aleph, &sigma, ctx)?.value;
        let d = eval_xi_derivative_complex(aleph, &sigma, 1, ctx)?.value;
        if d.modulus().is_zero() {
            return Ok(None);
        }
        let step = Complex::with_val(bits, f.value() / d.value());
        sigma -= &step;
        let (sr, si) = (sigma.real().to_f64(), sigma.imag().to_f64());
        if !guard.contains(sr, si) {
            return Ok(None);
        }
        let size = Float::with_val(RADIUS_BITS, step.abs_ref());
        if size < tol {
            let size = size.to_f64().max(f64::MIN_POSITIVE);
            let digits = (-size.log10())
                .floor()
                .clamp(0.0, ctx.target_digits() as f64) as u32;
            return Ok(Some((sigma, digits)));
        }
    }
    Ok(None)
}
