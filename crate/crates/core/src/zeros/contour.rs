use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{BoundedComplex, PrecisionContext};
use crate::transform::{eval_xi, AlephParam};

/// Closed rectangle `[re_lo, re_hi] × [im_lo, im_hi]` in the λ-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        let finite = [re_lo, re_hi, im_lo, im_hi].iter().all(|v| v.is_finite());
        if !finite || re_lo >= re_hi {
            return Err(Error::InvalidInterval { a: re_lo, b: re_hi });
        }
        if im_lo >= im_hi {
            return Err(Error::InvalidInterval { a: im_lo, b: im_hi });
        }
        Ok(Rect {
            re_lo,
            re_hi,
            im_lo,
            im_hi,
        })
    }

    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> f64 {
        self.im_hi - self.im_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn centre(&self) -> (f64, f64) {
        (
            0.5 * (self.re_lo + self.re_hi),
            0.5 * (self.im_lo + self.im_hi),
        )
    }

    pub fn contains(&self, re: f64, im: f64) -> bool {
        self.re_lo <= re && re <= self.re_hi && self.im_lo <= im && im <= self.im_hi
    }

    /// True if the open real segment of the box lies inside it.
    pub fn straddles_real_axis(&self) -> bool {
        self.im_lo < 0.0 && 0.0 < self.im_hi
    }

    /// Grown by `eps` on every side.
    pub fn expanded(&self, eps: f64) -> Rect {
        Rect {
            re_lo: self.re_lo - eps,
            re_hi: self.re_hi + eps,
            im_lo: self.im_lo - eps,
            im_hi: self.im_hi + eps,
        }
    }

    /// Splits at the given fractions of the width and height. A fraction of
    /// `None` leaves that direction unsplit.
    pub(crate) fn split(&self, re_frac: Option<f64>, im_frac: Option<f64>) -> Vec<Rect> {
        let res = match re_frac {
            Some(f) => {
                let m = self.re_lo + f * self.width();
                vec![(self.re_lo, m), (m, self.re_hi)]
            }
            None => vec![(self.re_lo, self.re_hi)],
        };
        let ims = match im_frac {
            Some(f) => {
                let m = self.im_lo + f * self.height();
                vec![(self.im_lo, m), (m, self.im_hi)]
            }
            None => vec![(self.im_lo, self.im_hi)],
        };
        let mut out = Vec::with_capacity(4);
        for &(im_lo, im_hi) in &ims {
            for &(re_lo, re_hi) in &res {
                out.push(Rect {
                    re_lo,
                    re_hi,
                    im_lo,
                    im_hi,
                });
            }
        }
        out
    }
}

/// Argument-principle count for one rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxCount {
    /// The rectangle actually used (after any perturbation).
    pub rect: Rect,
    pub count: u32,
    /// Total phase change divided by 2π, before rounding.
    pub winding: f64,
    pub min_modulus_on_contour: f64,
    pub max_radius_on_contour: f64,
    pub samples: usize,
}

/// Memoised Ξ evaluations, folded by evenness and conjugate symmetry onto
/// the closed first quadrant.
pub(crate) struct Sampler<'a> {
    aleph: &'a AlephParam,
    ctx: &'a PrecisionContext,
    cache: Mutex<HashMap<(u64, u64), BoundedComplex>>,
    func: Option<Box<dyn Fn(f64, f64) -> BoundedComplex + Sync + 'a>>,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(aleph: &'a AlephParam, ctx: &'a PrecisionContext) -> Self {
        Sampler {
            aleph,
            ctx,
            cache: Mutex::new(HashMap::new()),
            func: None,
        }
    }

    /// Samples `func` instead of Ξ; the symmetry folding is bypassed.
    #[cfg(test)]
    fn with_fn(
        aleph: &'a AlephParam,
        ctx: &'a PrecisionContext,
        func: impl Fn(f64, f64) -> BoundedComplex + Sync + 'a,
    ) -> Self {
        Sampler {
            func: Some(Box::new(func)),
            ..Sampler::new(aleph, ctx)
        }
    }

    pub(crate) fn aleph(&self) -> &AlephParam {
        self.aleph
    }

    pub(crate) fn ctx(&self) -> &PrecisionContext {
        self.ctx
    }

    /// Ξ(re + i·im). Uses Ξ(−λ) = Ξ(λ) and Ξ(λ̄) = conj Ξ(λ).
    pub(crate) fn eval(&self, re: f64, im: f64) -> Result<BoundedComplex> {
        if let Some(f) = &self.func {
            return Ok(f(re, im));
        }
        let key = (re.abs().to_bits(), im.abs().to_bits());
        let flip = (re < 0.0) != (im < 0.0);
        let cached = self.cache.lock().unwrap().get(&key).cloned();
        let canonical = match cached {
            Some(v) => v,
            None => {
                let bits = self.ctx.working_bits();
                let lam = Complex::with_val(bits, (re.abs(), im.abs()));
                let v = eval_xi(self.aleph, &lam, self.ctx)?.value;
                self.cache.lock().unwrap().insert(key, v.clone());
                v
            }
        };
        Ok(if flip { canonical.conj() } else { canonical })
    }
}

struct Walk<'s, 'a> {
    sampler: &'s Sampler<'a>,
    min_modulus: f64,
    max_radius: f64,
    samples: usize,
    diameter: f64,
}

/// Initial spacing of contour samples.
const CONTOUR_STEP: f64 = 0.25;
/// Bisection depth for one contour segment before giving up.
const MAX_SEGMENT_DEPTH: u32 = 40;

impl Walk<'_, '_> {
    fn sample(&mut self, re: f64, im: f64) -> Result<BoundedComplex> {
        let v = self.sampler.eval(re, im)?;
        self.samples += 1;
        let m = v.modulus().to_f64();
        self.min_modulus = self.min_modulus.min(m);
        self.max_radius = self.max_radius.max(v.radius().to_f64());
        if m <= 3.0 * v.radius().to_f64() {
            return Err(self.on_contour(m));
        }
        Ok(v)
    }

    fn on_contour(&self, m: f64) -> Error {
        Error::ZeroOnContour {
            suggested_eps: 1e-3 * self.diameter,
            min_modulus: m,
        }
    }

    fn edge(&mut self, from: (f64, f64), to: (f64, f64)) -> Result<f64> {
        let len = (to.0 - from.0).hypot(to.1 - from.1);
        let n = ((len / CONTOUR_STEP).ceil() as usize).max(4);
        let point = |k: usize| {
            if k == n {
                to
            } else {
                let t = k as f64 / n as f64;
                (from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1))
            }
        };
        let mut phase = 0.0;
        let mut prev = (from, self.sample(from.0, from.1)?);
        for k in 1..=n {
            let p = point(k);
            let v = self.sample(p.0, p.1)?;
            phase += self.segment(prev.0, &prev.1, p, &v, 0)?;
            prev = (p, v);
        }
        Ok(phase)
    }

    /// Phase change from `a` to `b`, bisecting while any step reaches π/2.
    fn segment(
        &mut self,
        a: (f64, f64),
        fa: &BoundedComplex,
        b: (f64, f64),
        fb: &BoundedComplex,
        depth: u32,
    ) -> Result<f64> {
        let d = phase_step(fa, fb);
        if d.abs() < PI / 2.0 {
            return Ok(d);
        }
        if depth >= MAX_SEGMENT_DEPTH {
            return Err(self.on_contour(self.min_modulus));
        }
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let fm = self.sample(mid.0, mid.1)?;
        Ok(self.segment(a, fa, mid, &fm, depth + 1)? + self.segment(mid, &fm, b, fb, depth + 1)?)
    }
}

/// `arg(fb / fa)` in `(−π, π]`.
fn phase_step(fa: &BoundedComplex, fb: &BoundedComplex) -> f64 {
    let prec = fa.prec().max(fb.prec());
    let w = Complex::with_val(
        prec,
        fb.value() * Complex::with_val(prec, fa.value().conj_ref()),
    );
    Float::with_val(53, w.arg_ref()).to_f64()
}

pub(crate) fn count_with(sampler: &Sampler<'_>, rect: &Rect) -> Result<BoxCount> {
    let mut walk = Walk {
        sampler,
        min_modulus: f64::INFINITY,
        max_radius: 0.0,
        samples: 0,
        diameter: rect.diameter(),
    };
    let corners = [
        (rect.re_lo, rect.im_lo),
        (rect.re_hi, rect.im_lo),
        (rect.re_hi, rect.im_hi),
        (rect.re_lo, rect.im_hi),
    ];
    let mut phase = 0.0;
    for i in 0..4 {
        phase += walk.edge(corners[i], corners[(i + 1) % 4])?;
    }
    let winding = phase / (2.0 * PI);
    let count = winding.round();
    if (winding - count).abs() >= 0.1 || count < 0.0 {
        return Err(walk.on_contour(walk.min_modulus));
    }
    if walk.min_modulus <= 3.0 * walk.max_radius {
        return Err(walk.on_contour(walk.min_modulus));
    }
    Ok(BoxCount {
        rect: *rect,
        count: count as u32,
        winding,
        min_modulus_on_contour: walk.min_modulus,
        max_radius_on_contour: walk.max_radius,
        samples: walk.samples,
    })
}

/// Relative outward perturbations tried when the contour meets a zero.
pub(crate) const PERTURBATIONS: [f64; 3] = [1e-3, 3e-3, 1e-2];

pub(crate) fn count_robust_with(sampler: &Sampler<'_>, rect: &Rect) -> Result<BoxCount> {
    match count_with(sampler, rect) {
        Err(Error::ZeroOnContour { .. }) => {
            let mut last = None;
            for f in PERTURBATIONS {
                match count_with(sampler, &rect.expanded(f * rect.diameter())) {
                    Err(e @ Error::ZeroOnContour { .. }) => last = Some(e),
                    other => return other,
                }
            }
            Err(last.expect("at least one perturbation was tried"))
        }
        other => other,
    }
}

/// Number of zeros of Ξ_ℵ inside `rect`, by the argument principle.
///
/// Ξ is sampled every 0.25 along the boundary (at least four samples per
/// edge); any step whose phase change reaches π/2 is bisected. Fails with
/// [`Error::ZeroOnContour`] if the boundary passes within three error radii
/// of a zero.
pub fn count_zeros_in_box(
    aleph: &AlephParam,
    rect: &Rect,
    ctx: &PrecisionContext,
) -> Result<BoxCount> {
    count_with(&Sampler::new(aleph, ctx), rect)
}

/// [`count_zeros_in_box`], retrying with the box grown outward by
/// `{10^(-3), 3·10^(-3), 10^(-2)}` × its diameter when the boundary meets a
/// zero. The returned [`BoxCount::rect`] is the box actually counted.
pub fn count_zeros_in_box_robust(
    aleph: &AlephParam,
    rect: &Rect,
    ctx: &PrecisionContext,
) -> Result<BoxCount> {
    count_robust_with(&Sampler::new(aleph, ctx), rect)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> AlephParam {
        AlephParam::new(0.0).unwrap()
    }

    #[test]
    fn rect_validation_and_split() {
        assert!(Rect::new(1.0, 0.0, -1.0, 1.0).is_err());
        assert!(Rect::new(0.0, 1.0, 1.0, 1.0).is_err());
        let r = Rect::new(0.0, 4.0, -1.0, 1.0).unwrap();
        let q = r.split(Some(0.5), Some(0.5));
        assert_eq!(q.len(), 4);
        let area: f64 = q.iter().map(|b| b.width() * b.height()).sum();
        assert!((area - 8.0).abs() < 1e-12);
        assert_eq!(r.split(Some(0.25), None).len(), 2);
        assert!(r.straddles_real_axis());
    }

    #[test]
    fn empty_box_near_origin() {
        let ctx = PrecisionContext::default();
        let r = Rect::new(0.0, 10.0, -1.0, 1.0).unwrap();
        let c = count_zeros_in_box(&zero(), &r, &ctx).unwrap();
        assert_eq!(c.count, 0);
        assert!(c.winding.abs() < 0.1);
        assert!(c.min_modulus_on_contour > 3.0 * c.max_radius_on_contour);
    }

    #[test]
    fn one_zero_and_additivity() {
        let ctx = PrecisionContext::default();
        let r = Rect::new(25.0, 45.0, -1.0, 1.0).unwrap();
        let whole = count_zeros_in_box(&zero(), &r, &ctx).unwrap();
        assert_eq!(whole.count, 2);
        let parts = r.split(Some(0.4), None);
        let sum: u32 = parts
            .iter()
            .map(|p| count_zeros_in_box(&zero(), p, &ctx).unwrap().count)
            .sum();
        assert_eq!(sum, 2);
    }

    #[test]
    fn zero_on_edge_is_reported_and_perturbed() {
        let ctx = PrecisionContext::default();
        let aleph = zero();
        // (λ − 3)(λ − 5i), radius 1e-30: the right edge passes through 3
        let poly = |re: f64, im: f64| {
            let l = Complex::with_val(128, (re, im));
            let a = Complex::with_val(128, &l - 3u32);
            let v = a * (l - Complex::with_val(128, (0, 5)));
            BoundedComplex::new(v, Float::with_val(64, 1e-30))
        };
        let sampler = Sampler::with_fn(&aleph, &ctx, poly);
        let r = Rect::new(1.0, 3.0, -1.0, 1.0).unwrap();
        match count_with(&sampler, &r) {
            Err(Error::ZeroOnContour {
                suggested_eps,
                min_modulus,
            }) => {
                assert!(suggested_eps > 0.0);
                assert_eq!(min_modulus, 0.0);
            }
            other => panic!("expected ZeroOnContour, got {other:?}"),
        }
        let c = count_robust_with(&sampler, &r).unwrap();
        assert_eq!(c.count, 1);
        assert!(c.rect.re_hi > r.re_hi);
        let big = Rect::new(-1.0, 4.0, -1.0, 6.0).unwrap();
        assert_eq!(count_with(&sampler, &big).unwrap().count, 2);
    }
}
