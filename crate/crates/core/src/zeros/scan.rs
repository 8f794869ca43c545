use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use super::{RealZero, ZeroTable};
use crate::error::{Error, Result};
use crate::numerics::{BoundedReal, PrecisionContext, RADIUS_BITS};
use crate::transform::{eval_xi_derivative, eval_xi_real, AlephParam};

/// Largest λ the scan supports at default precision.
pub const MAX_SCAN_LAMBDA: f64 = 1000.0;

const GRID_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1.0 / 64.0;
const BRACKET_WIDTH: f64 = 1e-6;

/// Ξ(x) for real x, retried at doubled target when the sign is unresolved.
pub(crate) fn xi_at(aleph: &AlephParam, x: &Float, ctx: &PrecisionContext) -> Result<BoundedReal> {
    let v = eval_xi_real(aleph, x, ctx)?;
    if v.sign_resolved() {
        return Ok(v);
    }
    eval_xi_real(aleph, x, &ctx.boosted(ctx.target_digits()))
}

pub(crate) fn xi_f64(aleph: &AlephParam, x: f64, ctx: &PrecisionContext) -> Result<BoundedReal> {
    xi_at(aleph, &Float::with_val(ctx.working_bits(), x), ctx)
}

pub(crate) fn opposite(a: &BoundedReal, b: &BoundedReal) -> bool {
    a.sign_resolved() && b.sign_resolved() && a.is_positive() != b.is_positive()
}

/// Positive real zeros in `[a, b]`, in increasing order.
///
/// Ξ is sampled every 0.5; each sign change is bracketed and refined with
/// [`refine_zero`]. Where `|Ξ|` dips to a local minimum without changing
/// sign, the grid is halved around the dip (down to 1/64) in case two zeros
/// sit between neighbouring samples. Points whose sign cannot be resolved
/// even at doubled precision are recorded in [`ZeroTable::flagged`] and the
/// scan continues past them.
pub fn scan_real_zeros(
    aleph: &AlephParam,
    a: f64,
    b: f64,
    ctx: &PrecisionContext,
) -> Result<ZeroTable> {
    if !(0.0 <= a && a < b && b <= MAX_SCAN_LAMBDA) {
        return Err(Error::InvalidInterval { a, b });
    }
    let n = ((b - a) / GRID_STEP).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| (a + GRID_STEP * i as f64).min(b)).collect();
    let vs = xs
        .par_iter()
        .map(|&x| xi_f64(aleph, x, ctx))
        .collect::<Result<Vec<_>>>()?;

    let mut table = ZeroTable::new(aleph.clone(), *ctx);
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut last: Option<usize> = None;
    for i in 0..xs.len() {
        if !vs[i].sign_resolved() {
            table.flag(xs[i.saturating_sub(1)], xs[(i + 1).min(n)]);
            continue;
        }
        if let Some(j) = last {
            if opposite(&vs[j], &vs[i]) {
                brackets.push((xs[j], xs[i]));
            }
        }
        last = Some(i);
    }
    for i in 1..n {
        let (l, m, r) = (&vs[i - 1], &vs[i], &vs[i + 1]);
        let resolved = l.sign_resolved() && m.sign_resolved() && r.sign_resolved();
        if resolved && !opposite(l, m) && !opposite(m, r) {
            let (al, am, ar) = (l.to_f64().abs(), m.to_f64().abs(), r.to_f64().abs());
            if am < al && am < ar {
                brackets.extend(zoom(
                    aleph,
                    (xs[i - 1], l),
                    (xs[i], m),
                    (xs[i + 1], r),
                    ctx,
                )?);
            }
        }
    }
    brackets.sort_by(|p, q| p.0.total_cmp(&q.0));

    let bits = ctx.working_bits();
    let zeros = brackets
        .par_iter()
        .map(|&(lo, hi)| {
            refine_zero(
                aleph,
                &Float::with_val(bits, lo),
                &Float::with_val(bits, hi),
                ctx,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    table.extend_real(zeros);
    Ok(table)
}

/// Exactly the first `n` positive real zeros, scanning `[0, 60]` and then
/// windows growing by half each time.
///
/// Fails with [`Error::InsufficientZeros`] if fewer than `n` zeros lie below
/// [`MAX_SCAN_LAMBDA`].
pub fn scan_first_zeros(aleph: &AlephParam, n: usize, ctx: &PrecisionContext) -> Result<ZeroTable> {
    let mut hi = 60.0;
    let mut table = scan_real_zeros(aleph, 0.0, hi, ctx)?;
    while table.real_zeros().len() < n {
        if hi >= MAX_SCAN_LAMBDA {
            return Err(Error::InsufficientZeros {
                have: table.real_zeros().len(),
                need: n,
            });
        }
        let next = (hi * 1.5).min(MAX_SCAN_LAMBDA);
        let more = scan_real_zeros(aleph, hi, next, ctx)?;
        for &(lo, up) in more.flagged() {
            table.flag(lo, up);
        }
        table.extend_real(more.real_zeros().iter().cloned());
        hi = next;
    }
    table.truncate_real(n);
    Ok(table)
}

/// Halves the grid around a local minimum of `|Ξ|` until a sign change
/// appears (giving two brackets) or the spacing reaches 1/64.
fn zoom(
    aleph: &AlephParam,
    l: (f64, &BoundedReal),
    m: (f64, &BoundedReal),
    r: (f64, &BoundedReal),
    ctx: &PrecisionContext,
) -> Result<Vec<(f64, f64)>> {
    let sign = m.1.clone();
    let (mut l, mut m, mut r) = ((l.0, l.1.clone()), (m.0, m.1.clone()), (r.0, r.1.clone()));
    while (r.0 - l.0) / 2.0 > MIN_STEP {
        let p = 0.5 * (l.0 + m.0);
        let q = 0.5 * (m.0 + r.0);
        let vp = xi_f64(aleph, p, ctx)?;
        let vq = xi_f64(aleph, q, ctx)?;
        if opposite(&sign, &vp) {
            return Ok(vec![(l.0, p), (p, m.0)]);
        }
        if opposite(&sign, &vq) {
            return Ok(vec![(m.0, q), (q, r.0)]);
        }
        let (ap, am, aq) = (vp.to_f64().abs(), m.1.to_f64().abs(), vq.to_f64().abs());
        if ap < am && ap <= aq {
            (l, m, r) = (l, (p, vp), m);
        } else if aq < am {
            (l, m, r) = (m, (q, vq), r);
        } else {
            (l, m, r) = ((p, vp), m, (q, vq));
        }
    }
    Ok(Vec::new())
}

/// Refines the zero in `(lo, hi)`.
///
/// The bracket is first narrowed to width `10^(-6)` (Illinois-modified
/// regula falsi, which keeps a sign-changing bracket at every step, with a
/// verified `±5·10^(-7)` window around the iterate once it settles), then
/// Newton's method with the analytic derivative runs until the step is below
/// `10^(-target+5)`. If Newton leaves the bracket, plain bisection takes
/// over and only `target/2` digits are certified.
pub fn refine_zero(
    aleph: &AlephParam,
    lo: &Float,
    hi: &Float,
    ctx: &PrecisionContext,
) -> Result<RealZero> {
    let bits = ctx.working_bits();
    let (lo_f, hi_f) = (lo.to_f64(), hi.to_f64());
    let f_lo = xi_at(aleph, lo, ctx)?;
    let f_hi = xi_at(aleph, hi, ctx)?;
    if !opposite(&f_lo, &f_hi) {
        return Err(Error::NoSignChange { lo: lo_f, hi: hi_f });
    }

    let (mut a, mut fa) = (Float::with_val(bits, lo), f_lo);
    let (mut b, mut fb) = (Float::with_val(bits, hi), f_hi);
    let width = |a: &Float, b: &Float| Float::with_val(bits, b - a).to_f64();
    let mut side = 0i8;
    let mut prev_c: Option<f64> = None;
    let mut wa = fa.value().clone();
    let mut wb = fb.value().clone();
    for _ in 0..60 {
        if width(&a, &b) <= BRACKET_WIDTH {
            break;
        }
        // regula falsi point, falling back to the midpoint if it degenerates
        let denom = Float::with_val(bits, &wb - &wa);
        let mut c = Float::with_val(bits, &a * &wb) - Float::with_val(bits, &b * &wa);
        c /= &denom;
        if !(c > a && c < b) {
            c = Float::with_val(bits, &a + &b) / 2u32;
        }
        let cf = c.to_f64();
        if let Some(p) = prev_c {
            if (cf - p).abs() < 0.1 * BRACKET_WIDTH {
                let half = Float::with_val(bits, BRACKET_WIDTH / 2.0);
                let l = Float::with_val(bits, &c - &half).max(&a);
                let r = Float::with_val(bits, &c + &half).min(&b);
                let fl = xi_at(aleph, &l, ctx)?;
                let fr = xi_at(aleph, &r, ctx)?;
                if opposite(&fl, &fr) {
                    (a, fa, b, fb) = (l, fl, r, fr);
                    break;
                }
            }
        }
        prev_c = Some(cf);
        let fc = xi_at(aleph, &c, ctx)?;
        if !fc.sign_resolved() {
            // c is a zero to working accuracy; bracket it directly
            let half = Float::with_val(bits, BRACKET_WIDTH / 4.0);
            let l = Float::with_val(bits, &c - &half).max(&a);
            let r = Float::with_val(bits, &c + &half).min(&b);
            let fl = xi_at(aleph, &l, ctx)?;
            let fr = xi_at(aleph, &r, ctx)?;
            if opposite(&fl, &fr) {
                (a, fa, b, fb) = (l, fl, r, fr);
                break;
            }
            // fall back to halving
            let mid = Float::with_val(bits, &a + &b) / 2u32;
            let fm = xi_at(aleph, &mid, ctx)?;
            if opposite(&fa, &fm) {
                (b, fb) = (mid, fm);
            } else {
                (a, fa) = (mid, fm);
            }
            wa = fa.value().clone();
            wb = fb.value().clone();
            continue;
        }
        if opposite(&fc, &fa) {
            (b, fb) = (c, fc);
            wb = fb.value().clone();
            if side == 1 {
                wa /= 2u32;
            }
            side = 1;
        } else {
            (a, fa) = (c, fc);
            wa = fa.value().clone();
            if side == -1 {
                wb /= 2u32;
            }
            side = -1;
        }
    }
    while width(&a, &b) > BRACKET_WIDTH {
        let mid = Float::with_val(bits, &a + &b) / 2u32;
        let fm = xi_at(aleph, &mid, ctx)?;
        if !fm.sign_resolved() {
            return Err(Error::PrecisionExhausted {
                lo: a.to_f64(),
                hi: b.to_f64(),
            });
        }
        if opposite(&fa, &fm) {
            (b, fb) = (mid, fm);
        } else {
            (a, fa) = (mid, fm);
        }
    }
    let _ = (&fa, &fb);

    match newton(aleph, &a, &b, ctx) {
        Ok((location, digits)) => Ok(RealZero {
            aleph: aleph.clone(),
            index: 0,
            location,
            bracket: (a, b),
            certified_digits: digits,
        }),
        Err(Error::NewtonDiverged { .. }) => {
            let (location, digits) = bisect_fine(aleph, &a, &b, ctx)?;
            Ok(RealZero {
                aleph: aleph.clone(),
                index: 0,
                location,
                bracket: (a, b),
                certified_digits: digits,
            })
        }
        Err(e) => Err(e),
    }
}

fn newton(
    aleph: &AlephParam,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
) -> Result<(Float, u32)> {
    let bits = ctx.working_bits();
    let target = ctx.target_digits();
    let stop = Float::with_val(RADIUS_BITS, 10u32).pow(-(target as i32 - 5));
    let mut x = Float::with_val(bits, a + b) / 2u32;
    let diverged = || Error::NewtonDiverged {
        lo: a.to_f64(),
        hi: b.to_f64(),
    };
    for _ in 0..30 {
        let f = eval_xi_real(aleph, &x, ctx)?;
        let d = eval_xi_derivative(aleph, &x, 1, ctx)?.value.re();
        if d.value().is_zero() {
            return Err(diverged());
        }
        let step = Float::with_val(bits, f.value() / d.value());
        x -= &step;
        if !(x > *a && x < *b) {
            return Err(diverged());
        }
        let step_abs = Float::with_val(RADIUS_BITS, step.abs_ref());
        if step_abs < stop {
            let noise = Float::with_val(RADIUS_BITS, f.radius() / d.value()).abs();
            let err = step_abs
                .max(&noise)
                .to_f64()
                .max(10f64.powi(-(target as i32)));
            let digits = (-err.log10()).floor().max(0.0) as u32;
            return Ok((x, digits.min(target)));
        }
    }
    Err(diverged())
}

fn bisect_fine(
    aleph: &AlephParam,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
) -> Result<(Float, u32)> {
    let bits = ctx.working_bits();
    let digits = ctx.target_digits() / 2;
    let tol = 10f64.powi(-(digits as i32));
    let (mut a, mut b) = (Float::with_val(bits, a), Float::with_val(bits, b));
    let mut fa = xi_at(aleph, &a, ctx)?;
    while Float::with_val(bits, &b - &a).to_f64() > tol {
        let mid = Float::with_val(bits, &a + &b) / 2u32;
        let fm = xi_at(aleph, &mid, ctx)?;
        if !fm.sign_resolved() {
            return Ok((mid, digits));
        }
        if opposite(&fa, &fm) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok((Float::with_val(bits, &a + &b) / 2u32, digits))
}
