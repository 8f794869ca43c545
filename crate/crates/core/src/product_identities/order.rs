use rug::{Complex, Float};

use crate::error::Result;
use crate::numerics::{BoundedReal, PrecisionContext};
use crate::transform::{eval_m, AlephParam};

/// Radii at which `max_{|τ|=r} |M_ℵ(τ)|` is sampled.
pub const ORDER_RADII: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

/// Least-squares slope of `ln ln(max(|M(r)|, |M(−r)|)/M(0))` against `ln r`
/// over [`ORDER_RADII`], with the RMS fit residual as the radius.
///
/// On the real axis `cosh` makes `M` largest, so `τ = ±r` stands in for the
/// maximum over the circle. Dividing by `M(0)` keeps the inner logarithm
/// positive at small `r` and leaves the limiting slope unchanged. At these
/// radii `ln M` still carries a sizeable `r·ln r` correction, so the fitted
/// slope sits well above the asymptotic order.
pub fn estimate_order(aleph: &AlephParam, ctx: &PrecisionContext) -> Result<BoundedReal> {
    let bits = ctx.working_bits();
    let at = |t: f64| -> Result<Float> {
        let v = eval_m(aleph, &Complex::with_val(bits, (t, 0)), ctx)?.value;
        Ok(v.modulus())
    };
    let m0 = at(0.0)?;
    let mut pts = Vec::with_capacity(ORDER_RADII.len());
    for r in ORDER_RADII {
        let m = at(r)?.max(&at(-r)?);
        let ratio = Float::with_val(bits, &m / &m0);
        let y = Float::with_val(bits, ratio.ln()).ln().to_f64();
        pts.push((r.ln(), y));
    }
    let (slope, rms) = fit_line(&pts);
    Ok(BoundedReal::with_f64_radius(
        Float::with_val(bits, slope),
        rms,
    ))
}

/// Slope and RMS residual of the least-squares line through `pts`.
pub(crate) fn fit_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    (slope, (ss / n).sqrt())
}
