use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};

use super::product::eval_product;
use super::IdentityReport;
use crate::error::{Error, Result};
use crate::numerics::{
    differentiate, format_decimal, BoundedComplex, BoundedReal, PrecisionContext, RADIUS_BITS,
};
use crate::series::{compute_coefficients, eval_series, CoefficientTable, DEFAULT_GAMMA_MAX};
use crate::transform::{eval_m, AlephParam};
use crate::zeros::{scan_first_zeros, ZeroTable, REAL_AXIS_TOLERANCE};

/// Identity checks, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// `M(τ̄) = conj M(τ)`.
    Conj,
    /// `M(−τ) = M(τ)`.
    Even,
    /// Power series in `τ²` against the integral.
    SeriesEqIntegral,
    /// Power series against the truncated product.
    SeriesEqProduct,
    /// Truncated product against the integral.
    ProductEqIntegral,
    /// `P(τ̄) = conj P(τ)` for the truncated product.
    ConjProduct,
    /// `Σσ^(−2) = Σσ̄^(−2)` over the stored zeros of `M`.
    SumEq,
    /// `M'(0)/M(0) = 0`.
    Theta0,
    /// `M(0) = α_0 > 0` and every `α_{2γ} > 0`.
    Positivity,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Conj,
        Check::Even,
        Check::SeriesEqIntegral,
        Check::SeriesEqProduct,
        Check::ProductEqIntegral,
        Check::ConjProduct,
        Check::SumEq,
        Check::Theta0,
        Check::Positivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Conj => "CONJ",
            Check::Even => "EVEN",
            Check::SeriesEqIntegral => "SERIES_EQ_INTEGRAL",
            Check::SeriesEqProduct => "SERIES_EQ_PRODUCT",
            Check::ProductEqIntegral => "PRODUCT_EQ_INTEGRAL",
            Check::ConjProduct => "CONJ_PRODUCT",
            Check::SumEq => "SUM_EQ",
            Check::Theta0 => "THETA0",
            Check::Positivity => "POSITIVITY",
        }
    }

    fn per_point(self) -> bool {
        !matches!(self, Check::SumEq | Check::Theta0 | Check::Positivity)
    }

    fn needs_zeros(self) -> bool {
        matches!(
            self,
            Check::SeriesEqProduct | Check::ProductEqIntegral | Check::ConjProduct | Check::SumEq
        )
    }

    fn needs_coefficients(self) -> bool {
        matches!(
            self,
            Check::SeriesEqIntegral | Check::SeriesEqProduct | Check::Positivity
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Check> {
        let t = s.trim();
        Check::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unknown check {t:?}"),
            })
    }
}

/// Sizes and test points for [`check_identities_with`]. Tables left as
/// `None` are computed on demand.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub factors: usize,
    pub gamma_max: u32,
    pub points: Vec<Complex>,
    pub zeros: Option<ZeroTable>,
    pub coefficients: Option<CoefficientTable>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let p = |re: f64, im: f64| Complex::with_val(64, (re, im));
        SuiteConfig {
            factors: 50,
            gamma_max: DEFAULT_GAMMA_MAX,
            points: vec![p(0.5, 0.0), p(1.0, 1.0), p(2.0, 0.0), p(0.0, 5.0)],
            zeros: None,
            coefficients: None,
        }
    }
}

/// [`check_identities_with`] at the default sizes and test points.
pub fn check_identities(
    aleph: &AlephParam,
    suite: &[Check],
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    check_identities_with(aleph, suite, &SuiteConfig::default(), ctx)
}

/// Runs each requested check (once, or once per test point) and returns the
/// reports in [`Check::ALL`] order, then point order.
///
/// Tolerances are `3 × (combined radii)`, plus `max(M0, |P|)·(e^tail − 1)`
/// for checks involving the truncated product `P`. A check that cannot be
/// carried out is reported with `pass = false`; only `NonConvergent` and
/// `PrecisionExhausted` abort the suite.
pub fn check_identities_with(
    aleph: &AlephParam,
    suite: &[Check],
    config: &SuiteConfig,
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    let mut checks = suite.to_vec();
    checks.sort();
    checks.dedup();

    let bits = ctx.working_bits();
    let m0 = eval_m(aleph, &Complex::with_val(bits, 0), ctx)?.value.re();
    let zeros = if checks.iter().any(|c| c.needs_zeros()) {
        match &config.zeros {
            Some(t) => Some(Ok(t.clone())),
            None => Some(recoverable(scan_first_zeros(aleph, config.factors, ctx))?),
        }
    } else {
        None
    };
    let coefficients = if checks.iter().any(|c| c.needs_coefficients()) {
        match &config.coefficients {
            Some(t) => Some(Ok(t.clone())),
            None => Some(recoverable(compute_coefficients(
                aleph,
                config.gamma_max,
                ctx,
            ))?),
        }
    } else {
        None
    };
    let env = Env {
        aleph,
        ctx,
        m0,
        factors: config.factors,
        zeros,
        coefficients,
    };

    let jobs: Vec<(Check, Option<&Complex>)> = checks
        .iter()
        .flat_map(|&c| {
            if c.per_point() {
                config.points.iter().map(|p| (c, Some(p))).collect()
            } else {
                vec![(c, None)]
            }
        })
        .collect();
    jobs.par_iter()
        .map(|&(check, tau)| {
            let label = match tau {
                Some(t) => format!("{check} tau={}", tau_label(t)),
                None => check.to_string(),
            };
            match recoverable(env.run(check, tau))? {
                Ok(mut r) => {
                    r.name = label;
                    Ok(r)
                }
                Err(msg) => Ok(IdentityReport::failed(label, msg)),
            }
        })
        .collect()
}

/// Splits off the errors that should abort a whole suite.
fn recoverable<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::NonConvergent { .. } | Error::PrecisionExhausted { .. })) => Err(e),
        Err(e) => Ok(Err(e.to_string())),
    }
}

/// `0.5`, `1+1i`, `5i`, ...
fn tau_label(t: &Complex) -> String {
    let (re, im) = (t.real().to_f64(), t.imag().to_f64());
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re}"),
        (true, false) => format!("{im}i"),
        (false, false) if im < 0.0 => format!("{re}{im}i"),
        _ => format!("{re}+{im}i"),
    }
}

struct Env<'a> {
    aleph: &'a AlephParam,
    ctx: &'a PrecisionContext,
    m0: BoundedReal,
    factors: usize,
    zeros: Option<std::result::Result<ZeroTable, String>>,
    coefficients: Option<std::result::Result<CoefficientTable, String>>,
}

fn three_radii(a: &BoundedComplex, b: &BoundedComplex) -> Float {
    Float::with_val(RADIUS_BITS, a.radius() + b.radius()) * 3u32
}

impl Env<'_> {
    fn zeros(&self) -> Result<&ZeroTable> {
        match self.zeros.as_ref().expect("zero table requested up front") {
            Ok(t) => Ok(t),
            Err(msg) => Err(Error::SchemaMismatch(format!("no zero table: {msg}"))),
        }
    }

    fn coefficients(&self) -> Result<&CoefficientTable> {
        match self
            .coefficients
            .as_ref()
            .expect("coefficients requested up front")
        {
            Ok(t) => Ok(t),
            Err(msg) => Err(Error::SchemaMismatch(format!(
                "no coefficient table: {msg}"
            ))),
        }
    }

    fn m(&self, tau: &Complex) -> Result<BoundedComplex> {
        Ok(eval_m(self.aleph, tau, self.ctx)?.value)
    }

    fn series(&self, tau: &Complex) -> Result<BoundedComplex> {
        Ok(eval_series(self.coefficients()?, tau, self.ctx)?.value)
    }

    /// Product at `λ = iτ`, with its truncation envelope and a note.
    fn product(&self, tau: &Complex) -> Result<(BoundedComplex, Float, String)> {
        let table = self.zeros()?;
        let bits = self.ctx.working_bits().max(tau.prec().0);
        let lambda = Complex::with_val(bits, (-tau.imag(), tau.real()));
        let (r, t) = eval_product(&self.m0, table, self.factors, &lambda, self.ctx)?;
        let scale = self.m0.to_f64().abs().max(r.value.modulus().to_f64());
        let env = Float::with_val(RADIUS_BITS, t.envelope(scale));
        let off_axis = table
            .complex_zeros()
            .iter()
            .filter(|z| z.location.imag().to_f64().abs() >= REAL_AXIS_TOLERANCE)
            .count();
        let note = format!(
            "L={} tail_estimate={:.3e} non_real_factors={}",
            t.factors(),
            t.tail_estimate(),
            off_axis
        );
        Ok((r.value, env, note))
    }

    fn run(&self, check: Check, tau: Option<&Complex>) -> Result<IdentityReport> {
        let bits = self.ctx.working_bits();
        let tau = || Complex::with_val(bits, tau.expect("per-point check"));
        let conj = |t: &Complex| Complex::with_val(bits, t.conj_ref());
        match check {
            Check::Conj => {
                let t = tau();
                let lhs = self.m(&conj(&t))?;
                let rhs = self.m(&t)?.conj();
                let tol = three_radii(&lhs, &rhs);
                Ok(IdentityReport::new("", lhs, rhs, tol))
            }
            Check::Even => {
                let t = tau();
                let lhs = self.m(&Complex::with_val(bits, -&t))?;
                let rhs = self.m(&t)?;
                let tol = three_radii(&lhs, &rhs);
                Ok(IdentityReport::new("", lhs, rhs, tol))
            }
            Check::SeriesEqIntegral => {
                let t = tau();
                let lhs = self.series(&t)?;
                let rhs = self.m(&t)?;
                let tol = three_radii(&lhs, &rhs);
                let note = format!("gamma_max={}", self.coefficients()?.gamma_max());
                Ok(IdentityReport::new("", lhs, rhs, tol).with_notes(note))
            }
            Check::SeriesEqProduct => {
                let t = tau();
                let lhs = self.series(&t)?;
                let (rhs, env, note) = self.product(&t)?;
                let tol = three_radii(&lhs, &rhs) + env;
                Ok(IdentityReport::new("", lhs, rhs, tol).with_notes(note))
            }
            Check::ProductEqIntegral => {
                let t = tau();
                let (lhs, env, note) = self.product(&t)?;
                let rhs = self.m(&t)?;
                let tol = three_radii(&lhs, &rhs) + env;
                Ok(IdentityReport::new("", lhs, rhs, tol).with_notes(note))
            }
            Check::ConjProduct => {
                let t = tau();
                let (lhs, env, note) = self.product(&conj(&t))?;
                let (p, _, _) = self.product(&t)?;
                let rhs = p.conj();
                let tol = three_radii(&lhs, &rhs) + env;
                Ok(IdentityReport::new("", lhs, rhs, tol).with_notes(note))
            }
            Check::SumEq => self.sum_eq(),
            Check::Theta0 => self.theta0(),
            Check::Positivity => self.positivity(),
        }
    }

    /// Sums over the zeros `σ = iλ` of `M`, closed under `σ ↦ −σ̄` by adding
    /// `conj λ` for every stored non-real `λ`.
    fn sum_eq(&self) -> Result<IdentityReport> {
        let table = self.zeros()?;
        let bits = self.ctx.working_bits();
        let mut lams: Vec<(Complex, u32)> = table
            .real_zeros()
            .iter()
            .map(|z| {
                (
                    Complex::with_val(bits, (&z.location, 0)),
                    z.certified_digits,
                )
            })
            .collect();
        for z in table.complex_zeros() {
            lams.push((Complex::with_val(bits, &z.location), z.certified_digits));
            if z.location.imag().to_f64().abs() >= REAL_AXIS_TOLERANCE {
                lams.push((
                    Complex::with_val(bits, z.location.conj_ref()),
                    z.certified_digits,
                ));
            }
        }
        let mut lhs = Complex::with_val(bits, 0);
        let mut rhs = Complex::with_val(bits, 0);
        let mut radius = Float::new(RADIUS_BITS);
        for (lam, digits) in &lams {
            let sigma = Complex::with_val(bits, (-lam.imag(), lam.real()));
            lhs += Complex::with_val(bits, sigma.square_ref()).recip();
            rhs += Complex::with_val(bits, sigma.conj_ref()).square().recip();
            let m = Float::with_val(RADIUS_BITS, sigma.abs_ref());
            let eps = Float::with_val(RADIUS_BITS, 10u32).pow(-(*digits as i32));
            radius += Float::with_val(RADIUS_BITS, m.pow(-3i32)) * 2u32 * eps;
        }
        let rounding = Float::with_val(RADIUS_BITS, lhs.abs_ref())
            * (Float::with_val(RADIUS_BITS, 1u32) << (8 - bits as i32));
        radius += rounding;
        let lhs = BoundedComplex::new(lhs, radius.clone());
        let rhs = BoundedComplex::new(rhs, radius);
        let tol = three_radii(&lhs, &rhs);
        Ok(IdentityReport::new("", lhs, rhs, tol).with_notes(format!("zeros={}", lams.len())))
    }

    /// `ϑ0 = M'(0)/M(0)` by Richardson differences along the real axis.
    fn theta0(&self) -> Result<IdentityReport> {
        let bits = self.ctx.working_bits();
        let d = differentiate(
            |t| Ok(self.m(&Complex::with_val(bits, (t, 0)))?.re()),
            &Float::new(bits),
            1,
            self.ctx,
        )?;
        let m0 = self.m0.value().clone();
        let theta = d.scale(&Float::with_val(bits, m0.recip_ref()));
        let note = format!("theta0={}", format_decimal(theta.value(), 6));
        let lhs = theta.to_complex();
        let rhs = BoundedComplex::exact(Complex::with_val(bits, 0));
        let tol = three_radii(&lhs, &rhs);
        Ok(IdentityReport::new("", lhs, rhs, tol).with_notes(note))
    }

    /// `α_0` against `M(0)`; any coefficient not strictly positive beyond its
    /// radius adds its shortfall to the residual.
    fn positivity(&self) -> Result<IdentityReport> {
        let table = self.coefficients()?;
        let lhs = table.alpha(0).to_complex();
        let rhs = self.m0.to_complex();
        let tol = three_radii(&lhs, &rhs);
        let mut report = IdentityReport::new("", lhs, rhs, tol);
        let mut weakest: Option<(u32, f64)> = None;
        let mut failures = Vec::new();
        for (g, a) in table.entries() {
            let margin = Float::with_val(RADIUS_BITS, a.value() / a.radius()).to_f64();
            if weakest.is_none_or(|(_, m)| margin < m) {
                weakest = Some((g, margin));
            }
            if !a.is_positive() {
                failures.push(g);
                report.residual += Float::with_val(RADIUS_BITS, a.radius() - a.value());
            }
        }
        let m0_positive = self.m0.is_positive();
        report.pass = report.residual <= report.tolerance && failures.is_empty() && m0_positive;
        if !report.pass && report.residual <= report.tolerance {
            // keep pass ⇔ residual ≤ tolerance
            report.residual = Float::with_val(RADIUS_BITS, &report.tolerance * 2u32)
                .max(&Float::with_val(RADIUS_BITS, f64::MIN_POSITIVE));
        }
        let (g, m) = weakest.unwrap_or((0, f64::INFINITY));
        report.notes = format!(
            "gamma_max={} M0_positive={} non_positive={:?} min_value_over_radius={:.3e} at gamma={}",
            table.gamma_max(),
            m0_positive,
            failures,
            m,
            g
        );
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert_eq!("conj".parse::<Check>().unwrap(), Check::Conj);
        assert!("NOPE".parse::<Check>().is_err());
    }

    #[test]
    fn labels() {
        let c = |re: f64, im: f64| Complex::with_val(53, (re, im));
        assert_eq!(tau_label(&c(0.5, 0.0)), "0.5");
        assert_eq!(tau_label(&c(1.0, 1.0)), "1+1i");
        assert_eq!(tau_label(&c(0.0, 5.0)), "5i");
        assert_eq!(tau_label(&c(2.0, -3.0)), "2-3i");
    }

    #[test]
    fn zero_free_checks_pass() {
        let ctx = PrecisionContext::default();
        let aleph = AlephParam::new(0.0).unwrap();
        let suite = [
            Check::Conj,
            Check::Even,
            Check::SeriesEqIntegral,
            Check::Theta0,
            Check::Positivity,
        ];
        let reports = check_identities(&aleph, &suite, &ctx).unwrap();
        assert_eq!(reports.len(), 4 + 4 + 4 + 1 + 1);
        for r in &reports {
            assert!(
                r.pass,
                "{} failed: residual {} tolerance {} ({})",
                r.name, r.residual, r.tolerance, r.notes
            );
            assert!(r.tolerance >= Float::with_val(64, r.lhs.radius() + r.rhs.radius()));
        }
        assert_eq!(reports[0].name, "CONJ tau=0.5");
        assert_eq!(reports.last().unwrap().name, "POSITIVITY");
    }
}
