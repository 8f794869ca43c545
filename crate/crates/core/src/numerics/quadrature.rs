//! Composite Gauss–Legendre quadrature at arbitrary precision.
//!
//! Two drivers share the same 20-point panel rule:
//!
//! * [`integrate`] / [`integrate_complex`] bisect individual panels until the
//!   coarse/fine difference on each panel is below its share of the global
//!   tolerance;
//! * [`WeightedRule`] integrates `w(x)·h(x)` on uniform panel grids with the
//!   weight `w` sampled once per grid and cached, doubling the panel count
//!   until two successive grids agree. This is the workhorse for the many
//!   cosine transforms of the same kernel.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::{Complex, Float};

use super::bounded::{BoundedComplex, BoundedReal, RADIUS_BITS};
use super::PrecisionContext;
use crate::error::{Error, Result};

/// Nodes per panel.
pub const PANEL_DEGREE: usize = 20;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
#[derive(Debug)]
pub struct GaussLegendre {
    bits: u32,
    nodes: Vec<Float>,
    weights: Vec<Float>,
}

impl GaussLegendre {
    fn compute(n: usize, bits: u32) -> Self {
        let guard = bits + 32;
        let eps = Float::with_val(guard, 1u32) >> (bits as i32);
        let pi = Float::with_val(53, Constant::Pi).to_f64();
        let mut nodes = vec![Float::new(bits); n];
        let mut weights = vec![Float::new(bits); n];
        for i in 0..n.div_ceil(2) {
            let guess = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = Float::with_val(guard, guess);
            let mut dp = Float::new(guard);
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, &x);
                let dx = Float::with_val(guard, &p / &d);
                x -= &dx;
                dp = d;
                if dx.abs() < eps {
                    let (_, d) = legendre_with_derivative(n, &x);
                    dp = d;
                    break;
                }
            }
            // w = 2 / ((1 - x^2) P_n'(x)^2)
            let one_minus = Float::with_val(guard, 1u32) - Float::with_val(guard, x.square_ref());
            let w = Float::with_val(guard, 2u32) / (one_minus * dp.square());
            // x is the i-th largest root; store mirrored pairs ascending
            nodes[n - 1 - i] = Float::with_val(bits, &x);
            nodes[i] = Float::with_val(bits, -&x);
            weights[n - 1 - i] = Float::with_val(bits, &w);
            weights[i] = Float::with_val(bits, &w);
        }
        GaussLegendre {
            bits,
            nodes,
            weights,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn nodes(&self) -> &[Float] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Float] {
        &self.weights
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1u32);
    let mut p1 = x.clone();
    for k in 2..=n {
        let k = k as u32;
        let p2 = (Float::with_val(prec, x * &p1) * (2 * k - 1)
            - Float::with_val(prec, &p0 * (k - 1)))
            / k;
        p0 = p1;
        p1 = p2;
    }
    // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = (Float::with_val(prec, x * &p1) - &p0) * n as u32;
    let den = Float::with_val(prec, x.square_ref()) - 1u32;
    (p1, num / den)
}

/// Cached 20-point rule at the given precision.
pub fn gauss_legendre(bits: u32) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&bits) {
        return rule.clone();
    }
    let rule = Arc::new(GaussLegendre::compute(PANEL_DEGREE, bits));
    cache.lock().unwrap().insert(bits, rule.clone());
    rule
}

/// Result of a quadrature run.
#[derive(Clone, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    /// Tolerance met everywhere before the refinement cap.
    pub converged: bool,
    /// Deepest refinement level used.
    pub refinements: u32,
    pub panels: usize,
    /// Largest coarse/fine difference that was accepted.
    pub last_difference: f64,
}

impl<T> Quadrature<T> {
    /// Turns a flagged non-converged result into [`Error::NonConvergent`].
    pub fn require_converged(self) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergent {
                refinements: self.refinements,
                difference: self.last_difference,
            })
        }
    }
}

struct PanelSum {
    value: Complex,
    abs_sum: Float,
    propagated: Float,
}

fn panel_sum<F>(f: &F, rule: &GaussLegendre, a: &Float, b: &Float, bits: u32) -> PanelSum
where
    F: Fn(&Float) -> BoundedComplex,
{
    let half = Float::with_val(bits, b - a) / 2u32;
    let mid = Float::with_val(bits, a + b) / 2u32;
    let mut value = Complex::new(bits);
    let mut abs_sum = Float::new(RADIUS_BITS);
    let mut propagated = Float::new(RADIUS_BITS);
    for (node, weight) in rule.nodes().iter().zip(rule.weights()) {
        let x = Float::with_val(bits, &half * node) + &mid;
        let fx = f(&x);
        value += Complex::with_val(bits, fx.value() * weight);
        abs_sum += Float::with_val(RADIUS_BITS, fx.value().abs_ref()) * weight;
        propagated += Float::with_val(RADIUS_BITS, fx.radius() * weight);
    }
    let half_r = Float::with_val(RADIUS_BITS, half.abs_ref());
    value *= &half;
    abs_sum *= &half_r;
    propagated *= &half_r;
    PanelSum {
        value,
        abs_sum,
        propagated,
    }
}

const INITIAL_PANELS: u32 = 4;

/// Adaptive composite Gauss–Legendre integral of a real integrand on `[a, b]`.
///
/// Each panel is compared against its two halves; panels whose difference
/// exceeds their share of `10^(-target-2) · max(1, |I|)` are bisected, at most
/// `max_refinements` times. The returned radius adds the accepted
/// differences, the integrand's own radii and a rounding term.
pub fn integrate<F>(
    f: F,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
) -> Result<Quadrature<BoundedReal>>
where
    F: Fn(&Float) -> BoundedReal,
{
    let q = integrate_complex(|x| f(x).to_complex(), a, b, ctx)?;
    Ok(Quadrature {
        value: q.value.re(),
        converged: q.converged,
        refinements: q.refinements,
        panels: q.panels,
        last_difference: q.last_difference,
    })
}

/// Complex-valued variant of [`integrate`].
pub fn integrate_complex<F>(
    f: F,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
) -> Result<Quadrature<BoundedComplex>>
where
    F: Fn(&Float) -> BoundedComplex,
{
    if a > b {
        return Err(Error::InvalidInterval {
            a: a.to_f64(),
            b: b.to_f64(),
        });
    }
    let bits = ctx.working_bits();
    let rule = gauss_legendre(bits);
    let width = Float::with_val(bits, b - a);
    if width == 0 {
        return Ok(Quadrature {
            value: BoundedComplex::exact(Complex::new(bits)),
            converged: true,
            refinements: 0,
            panels: 0,
            last_difference: 0.0,
        });
    }

    let step = Float::with_val(bits, &width / INITIAL_PANELS);
    let mut stack = Vec::new();
    let mut scale = Complex::new(bits);
    for i in 0..INITIAL_PANELS {
        let lo = Float::with_val(bits, a + Float::with_val(bits, &step * i));
        let hi = if i + 1 == INITIAL_PANELS {
            Float::with_val(bits, b)
        } else {
            Float::with_val(bits, a + Float::with_val(bits, &step * (i + 1)))
        };
        let coarse = panel_sum(&f, &rule, &lo, &hi, bits);
        scale += &coarse.value;
        stack.push((lo, hi, coarse, 0u32));
    }
    // reverse so the leftmost panel is processed first (deterministic order)
    stack.reverse();

    let magnitude = Float::with_val(bits, scale.abs_ref());
    let tol = ctx.refinement_tolerance() * magnitude.max(&Float::with_val(bits, 1u32));

    let mut total = Complex::new(bits);
    let mut diff_sum = Float::new(RADIUS_BITS);
    let mut abs_total = Float::new(RADIUS_BITS);
    let mut propagated = Float::new(RADIUS_BITS);
    let mut converged = true;
    let mut deepest = 0;
    let mut panels = 0usize;
    let mut last_difference = 0.0f64;

    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        let left = panel_sum(&f, &rule, &lo, &mid, bits);
        let right = panel_sum(&f, &rule, &mid, &hi, bits);
        let fine = Complex::with_val(bits, &left.value + &right.value);
        let diff = Float::with_val(
            bits,
            Complex::with_val(bits, &fine - &coarse.value).abs_ref(),
        );
        let local_tol = Float::with_val(bits, &tol * Float::with_val(bits, &hi - &lo)) / &width;
        if diff <= local_tol || depth >= ctx.max_refinements() {
            if diff > local_tol {
                converged = false;
            }
            last_difference = last_difference.max(diff.to_f64());
            total += &fine;
            diff_sum += &diff;
            abs_total += &left.abs_sum;
            abs_total += &right.abs_sum;
            propagated += &left.propagated;
            propagated += &right.propagated;
            deepest = deepest.max(depth);
            panels += 2;
        } else {
            stack.push((mid.clone(), hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }

    let rounding = abs_total * ctx.epsilon() * 8u32;
    let radius = diff_sum + propagated + rounding;
    Ok(Quadrature {
        value: BoundedComplex::new(total, radius),
        converged,
        refinements: deepest,
        panels,
        last_difference,
    })
}

/// A weight function sampled at every node of a uniform composite grid,
/// with the quadrature weights folded in.
#[derive(Debug)]
pub struct SampledWeight {
    nodes: Vec<Float>,
    weighted: Vec<Float>,
    radius: Float,
    abs_mass: Float,
}

impl SampledWeight {
    fn build<W>(a: &Float, b: &Float, panels: usize, bits: u32, weight: &W) -> Self
    where
        W: Fn(&Float) -> BoundedReal + ?Sized,
    {
        let rule = gauss_legendre(bits);
        let h = Float::with_val(bits, b - a) / panels as u32;
        let half = Float::with_val(bits, &h / 2u32);
        let half_r = Float::with_val(RADIUS_BITS, &half);
        let mut nodes = Vec::with_capacity(panels * PANEL_DEGREE);
        let mut weighted = Vec::with_capacity(panels * PANEL_DEGREE);
        let mut radius = Float::new(RADIUS_BITS);
        let mut abs_mass = Float::new(RADIUS_BITS);
        for p in 0..panels {
            let mid = Float::with_val(bits, a + Float::with_val(bits, &h * p as u32)) + &half;
            for (node, w) in rule.nodes().iter().zip(rule.weights()) {
                let x = Float::with_val(bits, &half * node) + &mid;
                let wx = weight(&x);
                let qw = Float::with_val(bits, &half * w);
                radius += Float::with_val(RADIUS_BITS, wx.radius() * w) * &half_r;
                let v = Float::with_val(bits, wx.value() * &qw);
                abs_mass += Float::with_val(RADIUS_BITS, v.abs_ref());
                nodes.push(x);
                weighted.push(v);
            }
        }
        SampledWeight {
            nodes,
            weighted,
            radius,
            abs_mass,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i h(x_i)` and `max |h(x_i)|`.
    fn apply<H>(&self, h: &H, bits: u32) -> (Complex, Float)
    where
        H: Fn(&Float) -> Complex,
    {
        let mut sum = Complex::new(bits);
        let mut hmax = Float::new(RADIUS_BITS);
        for (x, w) in self.nodes.iter().zip(&self.weighted) {
            let hx = h(x);
            let m = Float::with_val(RADIUS_BITS, hx.abs_ref());
            if m > hmax {
                hmax = m;
            }
            sum += Complex::with_val(bits, &hx * w);
        }
        (sum, hmax)
    }
}

/// Finest grid a [`WeightedRule`] will build: `2^16` panels.
const MAX_LEVEL: u32 = 16;

type WeightFn = dyn Fn(&Float) -> BoundedReal + Send + Sync;

/// `∫_a^b w(x) h(x) dx` for a fixed weight `w` and many different `h`.
///
/// Grids with `2^k` panels are built on demand and kept for the lifetime of
/// the rule.
pub struct WeightedRule {
    a: Float,
    b: Float,
    bits: u32,
    weight: Box<WeightFn>,
    levels: Mutex<HashMap<u32, Arc<OnceLock<Arc<SampledWeight>>>>>,
    hint: AtomicU32,
}

impl std::fmt::Debug for WeightedRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightedRule")
            .field("a", &self.a.to_f64())
            .field("b", &self.b.to_f64())
            .field("bits", &self.bits)
            .finish()
    }
}

impl WeightedRule {
    pub fn new<W>(a: &Float, b: &Float, bits: u32, weight: W) -> Self
    where
        W: Fn(&Float) -> BoundedReal + Send + Sync + 'static,
    {
        WeightedRule {
            a: Float::with_val(bits, a),
            b: Float::with_val(bits, b),
            bits,
            weight: Box::new(weight),
            levels: Mutex::new(HashMap::new()),
            hint: AtomicU32::new(0),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Grid with `2^k` panels.
    pub fn level(&self, k: u32) -> Arc<SampledWeight> {
        // concurrent callers block on the same cell instead of duplicating work
        let cell = self.levels.lock().unwrap().entry(k).or_default().clone();
        cell.get_or_init(|| {
            Arc::new(SampledWeight::build(
                &self.a,
                &self.b,
                1usize << k,
                self.bits,
                self.weight.as_ref(),
            ))
        })
        .clone()
    }

    /// Integrates `w·h`, starting from `2^start_level` panels and doubling
    /// until consecutive grids agree to `10^(-target-2) · max(1, |I|)`, at
    /// most `max_refinements` times.
    pub fn integrate<H>(
        &self,
        h: H,
        start_level: u32,
        ctx: &PrecisionContext,
    ) -> Quadrature<BoundedComplex>
    where
        H: Fn(&Float) -> Complex,
    {
        let bits = self.bits;
        let tol = ctx.refinement_tolerance();
        let mut k = start_level.max(self.hint.load(Ordering::Relaxed));
        let (mut coarse, _) = self.level(k).apply(&h, bits);
        let mut refinements = 0;
        loop {
            let fine_grid = self.level(k + 1);
            let (fine, hmax) = fine_grid.apply(&h, bits);
            let diff = Float::with_val(bits, Complex::with_val(bits, &fine - &coarse).abs_ref());
            let magnitude = Float::with_val(bits, fine.abs_ref());
            let local_tol =
                Float::with_val(bits, &tol * magnitude.max(&Float::with_val(bits, 1u32)));
            refinements += 1;
            let done = diff <= local_tol;
            if done || refinements >= ctx.max_refinements() || k + 1 >= MAX_LEVEL {
                if done {
                    self.hint.fetch_max(k, Ordering::Relaxed);
                }
                let rounding = Float::with_val(RADIUS_BITS, &fine_grid.abs_mass * &hmax)
                    * ctx.epsilon()
                    * 8u32;
                let propagated = Float::with_val(RADIUS_BITS, &fine_grid.radius * &hmax);
                let radius = Float::with_val(RADIUS_BITS, &diff) + propagated + rounding;
                return Quadrature {
                    value: BoundedComplex::new(fine, radius),
                    converged: done,
                    refinements,
                    panels: 1usize << (k + 1),
                    last_difference: diff.to_f64(),
                };
            }
            coarse = fine;
            k += 1;
        }
    }
}
