//! Taylor coefficients of `M_ℵ(τ) = Σ α_{2γ} τ^{2γ}`,
//!
//! ```text
//! α_{2γ} = 1/(2γ)! · ∫₀^∞ x^{2γ} e^{−ℵx²} G(x) dx,
//! ```
//!
//! evaluation of the truncated series, and the Turán ladder on the
//! factorial-normalised coefficients `c_γ = γ!·α_{2γ}`.

use std::io::{Read, Write};

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::kernel::plan_moment_truncation;
use crate::numerics::{
    format_decimal, integrate, parse_decimal, significant_digits, BoundedComplex, BoundedReal,
    PrecisionContext, RADIUS_BITS,
};
use crate::transform::{AlephParam, EvalResult};

/// Default number of coefficients beyond `α_0`.
pub const DEFAULT_GAMMA_MAX: u32 = 40;

const CSV_HEADER: [&str; 4] = ["aleph", "gamma", "alpha", "error_radius"];

/// Significant digits written for error radii.
const RADIUS_DIGITS: u32 = 6;

/// `α_{2γ}` for `γ = 0..=gamma_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    aleph: AlephParam,
    entries: Vec<BoundedReal>,
    digits: u32,
}

impl CoefficientTable {
    pub fn aleph(&self) -> &AlephParam {
        &self.aleph
    }

    pub fn gamma_max(&self) -> u32 {
        self.entries.len() as u32 - 1
    }

    /// `α_{2γ}`.
    pub fn alpha(&self, gamma: u32) -> &BoundedReal {
        &self.entries[gamma as usize]
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &BoundedReal)> {
        self.entries.iter().enumerate().map(|(g, a)| (g as u32, a))
    }

    /// Significant digits the table is reported at.
    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Every coefficient multiplied by `k` (radii included).
    pub fn scaled(&self, k: &Float) -> CoefficientTable {
        CoefficientTable {
            aleph: self.aleph.clone(),
            entries: self.entries.iter().map(|a| a.scale(k)).collect(),
            digits: self.digits,
        }
    }

    /// First `gamma_max + 1` coefficients.
    pub fn truncated(&self, gamma_max: u32) -> CoefficientTable {
        CoefficientTable {
            aleph: self.aleph.clone(),
            entries: self.entries[..=gamma_max.min(self.gamma_max()) as usize].to_vec(),
            digits: self.digits,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let aleph = self.aleph.to_string();
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        for (g, a) in self.entries() {
            w.write_record([
                aleph.as_str(),
                &g.to_string(),
                &format_decimal(a.value(), self.digits),
                &format_decimal(a.radius(), RADIUS_DIGITS),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// Reads a table written by [`CoefficientTable::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<CoefficientTable> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = r.headers().map_err(csv_error)?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::SchemaMismatch(format!(
                "expected header {}, found {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut aleph: Option<AlephParam> = None;
        let mut entries = Vec::new();
        let mut digits = 1;
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_error)?;
            let at = |e: Error| relocate(e, line);
            let a = AlephParam::parse(&rec[0]).map_err(at)?;
            match &aleph {
                None => aleph = Some(a),
                Some(prev) if *prev != a => {
                    return Err(Error::SchemaMismatch(format!(
                        "line {line}: aleph {a} differs from {prev}"
                    )))
                }
                _ => {}
            }
            let gamma: usize = rec[1].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad gamma {:?}", &rec[1]),
            })?;
            if gamma != entries.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected gamma {}, found {gamma}", entries.len()),
                });
            }
            digits = digits.max(significant_digits(&rec[2]));
            let value = parse_decimal(&rec[2], None).map_err(at)?;
            let radius = parse_decimal(&rec[3], Some(RADIUS_BITS)).map_err(at)?;
            if radius.is_sign_negative() && !radius.is_zero() {
                return Err(Error::Parse {
                    line,
                    message: "negative error radius".into(),
                });
            }
            entries.push(BoundedReal::new(value, radius));
        }
        let aleph = aleph.ok_or(Error::EmptyTable)?;
        Ok(CoefficientTable {
            aleph,
            entries,
            digits,
        })
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub(crate) fn relocate(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { message, .. } => Error::Parse { line, message },
        Error::InvalidAleph(s) => Error::Parse {
            line,
            message: format!("invalid aleph {s:?}"),
        },
        other => other,
    }
}

/// `ln G(x)` in `f64`, stable for large `x`.
pub(crate) fn ln_kernel_f64(x: f64) -> f64 {
    use std::f64::consts::PI;
    let term = |m: f64| {
        (2.0 * PI * PI * m.powi(4) * (9.0 * x).exp() - 3.0 * PI * m * m * (5.0 * x).exp())
            * (-PI * m * m * (4.0 * x).exp()).exp()
    };
    let direct: f64 = (1..=8).map(|m| term(f64::from(m))).sum();
    if direct > 1e-250 {
        direct.ln()
    } else {
        (2.0 * PI * PI * (9.0 * x).exp() - 3.0 * PI * (5.0 * x).exp()).ln() - PI * (4.0 * x).exp()
    }
}

/// Rough `log10 ∫ x^{2γ} e^{−ℵx²} G(x) dx` from the peak of the integrand.
fn moment_log10_estimate(aleph: f64, gamma: u32) -> f64 {
    const GRID: usize = 4000;
    let p = 2.0 * f64::from(gamma);
    let peak = (1..=GRID)
        .map(|i| {
            let x = 2.0 * i as f64 / GRID as f64;
            p * x.ln() - aleph * x * x + ln_kernel_f64(x)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    // the bulk of the mass sits in a window of width ~0.1 around the peak
    (peak + 0.1f64.ln()) / std::f64::consts::LN_10
}

/// `α_{2γ}` for `γ = 0..=gamma_max`, each from its own quadrature and
/// truncation plan.
///
/// The moment is integrated with the digit budget raised by its expected
/// smallness, so every coefficient carries `target_digits` relative digits.
pub fn compute_coefficients(
    aleph: &AlephParam,
    gamma_max: u32,
    ctx: &PrecisionContext,
) -> Result<CoefficientTable> {
    let entries = (0..=gamma_max)
        .into_par_iter()
        .map(|gamma| coefficient(aleph, gamma, ctx))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTable {
        aleph: aleph.clone(),
        entries,
        digits: ctx.target_digits(),
    })
}

fn coefficient(aleph: &AlephParam, gamma: u32, ctx: &PrecisionContext) -> Result<BoundedReal> {
    let a = aleph.to_f64();
    let smallness = (-moment_log10_estimate(a, gamma)).max(0.0).ceil() as u32 + 2;
    let boosted = ctx.boosted(smallness.div_ceil(4) * 4);
    let plan = plan_moment_truncation(a, 0.0, 2 * gamma, &boosted);
    let bits = boosted.working_bits();
    let al = Float::with_val(bits, aleph.value());
    let q = integrate(
        |x| {
            let g = crate::kernel::eval_kernel(x, &plan, &boosted)
                .expect("quadrature nodes lie inside the planned domain");
            let damp = Float::with_val(bits, -Float::with_val(bits, &al * x) * x).exp();
            let xp = Float::with_val(bits, x.pow(2 * gamma));
            g.scale(&(damp * xp))
        },
        &Float::new(bits),
        &Float::with_val(bits, plan.x_max()),
        &boosted,
    )?;
    let moment = q.require_converged()?.widen(plan.tail_bound());
    let fact = Float::with_val(bits, Float::factorial(2 * gamma));
    let inv = Float::with_val(bits, fact.recip_ref());
    let alpha = moment.scale(&inv);
    if !alpha.is_positive() {
        return Err(Error::PositivityViolation { gamma });
    }
    Ok(alpha)
}

/// `Σ_{γ≤G} α_{2γ} τ^{2γ}` with a geometric bound on the omitted terms.
///
/// Requires `|τ|²·α_{2G}/α_{2G−2} < 1/2`; otherwise the table is too short for
/// this `τ` and [`Error::TailNotBounded`] is returned.
pub fn eval_series(
    table: &CoefficientTable,
    tau: &Complex,
    ctx: &PrecisionContext,
) -> Result<EvalResult> {
    let bits = ctx.working_bits().max(table.alpha(0).prec());
    let u = Complex::with_val(bits, tau.square_ref());
    let u_abs = Float::with_val(bits, u.abs_ref());
    let g_max = table.gamma_max();

    let ratio = if g_max == 0 {
        if u_abs.is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        let r = Float::with_val(
            bits,
            table.alpha(g_max).value() / table.alpha(g_max - 1).value(),
        );
        (r * &u_abs).to_f64()
    };
    if ratio >= 0.5 {
        return Err(Error::TailNotBounded { ratio });
    }

    // Horner in u; radii accumulate as Σ r_γ |u|^γ
    let mut sum = Complex::new(bits);
    for g in (0..=g_max).rev() {
        sum *= &u;
        sum += table.alpha(g).value();
    }
    let mut radius = Float::new(RADIUS_BITS);
    let mut u_pow = Float::with_val(RADIUS_BITS, 1u32);
    let mut abs_sum = Float::new(RADIUS_BITS);
    let mut last = Float::new(RADIUS_BITS);
    for g in 0..=g_max {
        let a = table.alpha(g);
        radius += Float::with_val(RADIUS_BITS, a.radius() * &u_pow);
        last = Float::with_val(RADIUS_BITS, a.value() * &u_pow);
        abs_sum += &last;
        u_pow *= &u_abs;
    }
    let tail = Float::with_val(RADIUS_BITS, &last * ratio) / (1.0 - ratio);
    let rounding = abs_sum * ctx.epsilon() * (2 * g_max + 4);
    Ok(EvalResult {
        value: BoundedComplex::new(sum, radius + tail + rounding),
        plan: None,
        quadrature_converged: true,
    })
}

/// One rung of the Turán ladder.
#[derive(Clone, Debug)]
pub struct TuranMargin {
    pub gamma: u32,
    /// `c_γ² − c_{γ−1}c_{γ+1}` with `c_γ = γ!·α_{2γ}`.
    pub margin: BoundedReal,
    /// `margin ≥ −radius`.
    pub pass: bool,
}

/// Turán margins for `1 ≤ γ ≤ gamma_max − 1`.
///
/// A failing margin certifies a non-real zero; passing everywhere proves
/// nothing.
pub fn turan_diagnostic(table: &CoefficientTable) -> Result<Vec<TuranMargin>> {
    let g_max = table.gamma_max();
    if g_max < 2 {
        return Err(Error::InsufficientEntries {
            have: table.entries.len(),
            need: 3,
        });
    }
    let bits = table.alpha(0).prec();
    let c: Vec<BoundedReal> = table
        .entries()
        .map(|(g, a)| a.scale(&Float::with_val(bits, Float::factorial(g))))
        .collect();
    Ok((1..g_max)
        .map(|g| {
            let i = g as usize;
            let margin = &(&c[i] * &c[i]) - &(&c[i - 1] * &c[i + 1]);
            let neg_radius = Float::with_val(RADIUS_BITS, -margin.radius());
            let pass = *margin.value() >= neg_radius;
            TuranMargin {
                gamma: g,
                margin,
                pass,
            }
        })
        .collect())
}
