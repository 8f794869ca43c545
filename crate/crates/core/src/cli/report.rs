use rug::{Complex, Float};
use serde_json::{json, Value};

use super::args::{parse_box, parse_point, parse_range, Command, Common, Format};
use super::io::{emit, open};
use super::{bounds, diagnostic};
use crate::error::{Error, Result};
use crate::numerics::{format_decimal, BoundedComplex, PrecisionContext};
use crate::product_identities::{
    check_identities_with, eval_product, reports_to_json, Check, SuiteConfig,
};
use crate::series::{compute_coefficients, turan_diagnostic, TuranMargin};
use crate::transform::{eval_m, eval_xi, AlephParam};
use crate::zeros::{
    count_zeros_in_box_robust, reality_certificate, scan_first_zeros, scan_real_zeros, BoxCount,
    ComplexZero, Rect, ZeroTable,
};

/// Digits printed for error radii, residuals and other diagnostics.
const RADIUS_DIGITS: u32 = 6;
/// Coefficients used for the Turán margins that accompany `certify`.
const CERTIFY_GAMMA_MAX: u32 = 41;

/// Runs `command`, writes its output, and returns false if a verification
/// it carried out did not pass.
pub(crate) fn execute(command: &Command) -> Result<bool> {
    match command {
        Command::Eval(a) => {
            let (ctx, aleph) = setup(&a.common)?;
            let bits = ctx.working_bits();
            let (label, point, value) = match (&a.lambda, &a.tau) {
                (Some(l), _) => {
                    let p = parse_point(l, bits)?;
                    let v = eval_xi(&aleph, &p, &ctx)?.value;
                    ("lambda", p, v)
                }
                (None, Some(t)) => {
                    let p = parse_point(t, bits)?;
                    let v = eval_m(&aleph, &p, &ctx)?.value;
                    ("tau", p, v)
                }
                (None, None) => unreachable!("clap requires --lambda or --tau"),
            };
            let digits = ctx.target_digits();
            let text = match a.common.format.unwrap_or(Format::Csv) {
                Format::Csv => format!(
                    "aleph,{label}_re,{label}_im,value_re,value_im,error_radius\n{},{},{},{},{},{}\n",
                    aleph,
                    decimal(point.real(), digits),
                    decimal(point.imag(), digits),
                    decimal(value.value().real(), digits),
                    decimal(value.value().imag(), digits),
                    decimal(value.radius(), RADIUS_DIGITS),
                ),
                Format::Json => to_json(&json!({
                    "aleph": aleph.to_string(),
                    label: [decimal(point.real(), digits), decimal(point.imag(), digits)],
                    "value": complex_json(&value, digits),
                    "error_radius": decimal(value.radius(), RADIUS_DIGITS),
                })),
            };
            finish(&a.common, &text, true)
        }
        Command::Coeffs(a) => {
            let (ctx, aleph) = setup(&a.common)?;
            let table = compute_coefficients(&aleph, a.gamma_max, &ctx)?;
            let text = match a.common.format.unwrap_or(Format::Csv) {
                Format::Csv => table.to_csv_string(),
                Format::Json => {
                    let margins = turan_diagnostic(&table).unwrap_or_default();
                    to_json(&json!({
                        "aleph": aleph.to_string(),
                        "coefficients": table.entries().map(|(g, a)| json!({
                            "gamma": g,
                            "alpha": decimal(a.value(), table.digits()),
                            "error_radius": decimal(a.radius(), RADIUS_DIGITS),
                        })).collect::<Vec<_>>(),
                        "turan": turan_json(&margins, table.digits()),
                    }))
                }
            };
            finish(&a.common, &text, true)
        }
        Command::Zeros(a) => {
            let ctx = a.common.context()?;
            let (lo, hi) = parse_range(&a.range)?;
            let table = match &a.extend {
                Some(path) => {
                    let mut table = ZeroTable::read_csv(open(path)?)?;
                    if a.common.aleph != "0" && a.common.aleph()? != *table.aleph() {
                        return Err(Error::SchemaMismatch(format!(
                            "--aleph {} does not match the table's aleph {}",
                            a.common.aleph,
                            table.aleph()
                        )));
                    }
                    let more = scan_real_zeros(table.aleph(), lo, hi, &ctx)?;
                    for &(l, h) in more.flagged() {
                        table.flag(l, h);
                    }
                    table.extend_real(more.real_zeros().iter().cloned());
                    table
                }
                None => scan_real_zeros(&a.common.aleph()?, lo, hi, &ctx)?,
            };
            for &(l, h) in table.flagged() {
                diagnostic(
                    "warning",
                    "unresolved",
                    &format!("sign of Xi unresolved on [{l}, {h}]"),
                );
            }
            let text = match a.common.format.unwrap_or(Format::Csv) {
                Format::Csv => table.to_csv_string(),
                Format::Json => to_json(&zero_table_json(&table)),
            };
            finish(&a.common, &text, true)
        }
        Command::BoxCount(a) => {
            let (ctx, aleph) = setup(&a.common)?;
            let rect = parse_box(&a.rect)?;
            let c = count_zeros_in_box_robust(&aleph, &rect, &ctx)?;
            let text = match a.common.format.unwrap_or(Format::Json) {
                Format::Csv => format!(
                    "aleph,re_lo,re_hi,im_lo,im_hi,count,winding,min_modulus,max_radius\n{},{},{},{},{},{},{},{},{}\n",
                    aleph,
                    c.rect.re_lo,
                    c.rect.re_hi,
                    c.rect.im_lo,
                    c.rect.im_hi,
                    c.count,
                    f64_decimal(c.winding),
                    f64_decimal(c.min_modulus_on_contour),
                    f64_decimal(c.max_radius_on_contour),
                ),
                Format::Json => to_json(&box_json(&aleph, &c)),
            };
            finish(&a.common, &text, true)
        }
        Command::Certify(a) => {
            let (ctx, aleph) = setup(&a.common)?;
            let (lo, b) = parse_range(&a.range)?;
            if lo != 0.0 {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("certify --range must start at 0, got {}", a.range),
                });
            }
            if !(a.box_height > 0.0 && a.box_height.is_finite()) {
                return Err(Error::InvalidInterval {
                    a: -a.box_height,
                    b: a.box_height,
                });
            }
            let rep = reality_certificate(&aleph, b, a.box_height, &ctx)?;
            let coeffs = compute_coefficients(&aleph, CERTIFY_GAMMA_MAX, &ctx)?;
            let margins = turan_diagnostic(&coeffs)?;
            let digits = ctx.target_digits();
            let t = aleph.literature_t();
            let doc = json!({
                "aleph": aleph.to_string(),
                "literature_t": t.to_string(),
                "box": rect_json(&rep.rect),
                "n_box": rep.n_box,
                "n_real": rep.n_real,
                "verdict": rep.verdict.to_string(),
                "n_upper_nonreal": rep.n_upper_nonreal,
                "consistent": rep.consistent,
                "real_zeros": rep.real_table.real_zeros().iter()
                    .map(|z| decimal(&z.location, digits)).collect::<Vec<_>>(),
                "located": rep.located.iter().map(|z| complex_zero_json(z, digits)).collect::<Vec<_>>(),
                "turan": turan_json(&margins, coeffs.digits()),
                "turan_all_pass": margins.iter().all(|m| m.pass),
                "literature": literature_note(&t),
            });
            let text = match a.common.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&doc),
                Format::Csv => format!(
                    "aleph,b,h,n_box,n_real,verdict,consistent\n{},{},{},{},{},{},{}\n",
                    aleph,
                    rep.rect.re_hi,
                    rep.rect.im_hi,
                    rep.n_box,
                    rep.n_real,
                    rep.verdict,
                    rep.consistent
                ),
            };
            finish(&a.common, &text, rep.consistent)
        }
        Command::Product(a) => {
            let (ctx, aleph) = setup(&a.common)?;
            let bits = ctx.working_bits();
            let table = load_or_scan(&aleph, a.zeros.as_deref(), a.factors, &ctx)?;
            let (label, lambda) = match (&a.lambda, &a.tau) {
                (Some(l), _) => ("lambda", parse_point(l, bits)?),
                (None, Some(t)) => {
                    let t = parse_point(t, bits)?;
                    ("tau", Complex::with_val(bits, (-t.imag(), t.real())))
                }
                (None, None) => unreachable!("clap requires --lambda or --tau"),
            };
            let m0 = eval_m(&aleph, &Complex::with_val(bits, 0), &ctx)?
                .value
                .re();
            let (r, trunc) = eval_product(&m0, &table, a.factors, &lambda, &ctx)?;
            let digits = ctx.target_digits();
            let text = match a.common.format.unwrap_or(Format::Csv) {
                Format::Csv => format!(
                    "aleph,lambda_re,lambda_im,value_re,value_im,error_radius,factors,tail_estimate\n{},{},{},{},{},{},{},{}\n",
                    aleph,
                    decimal(lambda.real(), digits),
                    decimal(lambda.imag(), digits),
                    decimal(r.value.value().real(), digits),
                    decimal(r.value.value().imag(), digits),
                    decimal(r.value.radius(), RADIUS_DIGITS),
                    trunc.factors(),
                    f64_decimal(trunc.tail_estimate()),
                ),
                Format::Json => to_json(&json!({
                    "aleph": aleph.to_string(),
                    "input": label,
                    "lambda": [decimal(lambda.real(), digits), decimal(lambda.imag(), digits)],
                    "value": complex_json(&r.value, digits),
                    "error_radius": decimal(r.value.radius(), RADIUS_DIGITS),
                    "factors": trunc.factors(),
                    "tail_estimate": f64_decimal(trunc.tail_estimate()),
                })),
            };
            finish(&a.common, &text, true)
        }
        Command::Verify(a) => {
            let (ctx, aleph) = setup(&a.common)?;
            let suite = parse_suite(&a.suite)?;
            let mut config = SuiteConfig {
                factors: a.factors,
                gamma_max: a.gamma_max,
                ..SuiteConfig::default()
            };
            if !a.tau.is_empty() {
                config.points = a
                    .tau
                    .iter()
                    .map(|t| parse_point(t, ctx.working_bits()))
                    .collect::<Result<_>>()?;
            }
            if let Some(p) = &a.zeros {
                config.zeros = Some(read_zero_table(p, &aleph)?);
            }
            let reports = check_identities_with(&aleph, &suite, &config, &ctx)?;
            let all_pass = reports.iter().all(|r| r.pass);
            for r in reports.iter().filter(|r| !r.pass) {
                diagnostic(
                    "warning",
                    "check_failed",
                    &format!("{}: {}", r.name, r.notes),
                );
            }
            let digits = ctx.target_digits();
            let text = match a.common.format.unwrap_or(Format::Json) {
                Format::Json => reports_to_json(&aleph, &reports, digits),
                Format::Csv => {
                    let mut s = String::from("name,pass,residual,tolerance\n");
                    for r in &reports {
                        s.push_str(&format!(
                            "{},{},{},{}\n",
                            r.name,
                            r.pass,
                            decimal(&r.residual, digits),
                            decimal(&r.tolerance, digits)
                        ));
                    }
                    s
                }
            };
            finish(&a.common, &text, all_pass)
        }
        Command::Bounds(a) => {
            let text = match a.format.unwrap_or(Format::Csv) {
                Format::Csv => bounds::to_csv(),
                Format::Json => bounds::to_json(),
            };
            emit(a.out.as_deref(), &text)?;
            Ok(true)
        }
    }
}

fn setup(common: &Common) -> Result<(PrecisionContext, AlephParam)> {
    Ok((common.context()?, common.aleph()?))
}

fn finish(common: &Common, text: &str, ok: bool) -> Result<bool> {
    emit(common.out.as_deref(), text)?;
    Ok(ok)
}

fn parse_suite(s: &str) -> Result<Vec<Check>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Check::ALL.to_vec());
    }
    s.split(',').map(str::parse).collect()
}

fn read_zero_table(path: &std::path::Path, aleph: &AlephParam) -> Result<ZeroTable> {
    let table = ZeroTable::read_csv(open(path)?)?;
    if table.aleph() != aleph {
        return Err(Error::SchemaMismatch(format!(
            "zero table is for aleph {}, not {}",
            table.aleph(),
            aleph
        )));
    }
    Ok(table)
}

fn load_or_scan(
    aleph: &AlephParam,
    path: Option<&std::path::Path>,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<ZeroTable> {
    match path {
        Some(p) => read_zero_table(p, aleph),
        None => scan_first_zeros(aleph, n, ctx),
    }
}

fn decimal(x: &Float, digits: u32) -> String {
    format_decimal(x, digits)
}

/// Shortest round-trip decimal of an `f64`, always positional.
fn f64_decimal(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

fn complex_json(v: &BoundedComplex, digits: u32) -> Value {
    json!([
        decimal(v.value().real(), digits),
        decimal(v.value().imag(), digits)
    ])
}

fn rect_json(r: &Rect) -> Value {
    json!({
        "re_lo": f64_decimal(r.re_lo),
        "re_hi": f64_decimal(r.re_hi),
        "im_lo": f64_decimal(r.im_lo),
        "im_hi": f64_decimal(r.im_hi),
    })
}

fn box_json(aleph: &AlephParam, c: &BoxCount) -> Value {
    json!({
        "aleph": aleph.to_string(),
        "box": rect_json(&c.rect),
        "count": c.count,
        "winding": f64_decimal(c.winding),
        "min_modulus_on_contour": f64_decimal(c.min_modulus_on_contour),
        "max_radius_on_contour": f64_decimal(c.max_radius_on_contour),
        "samples": c.samples,
    })
}

fn complex_zero_json(z: &ComplexZero, digits: u32) -> Value {
    json!({
        "re": decimal(z.location.real(), digits),
        "im": decimal(z.location.imag(), digits),
        "multiplicity": z.multiplicity,
        "certified_digits": z.certified_digits,
        "residual": decimal(&z.residual, RADIUS_DIGITS),
    })
}

fn zero_table_json(t: &ZeroTable) -> Value {
    let digits = t.provenance().target_digits();
    json!({
        "aleph": t.aleph().to_string(),
        "real_zeros": t.real_zeros().iter().map(|z| json!({
            "index": z.index,
            "location": decimal(&z.location, digits),
            "bracket": [decimal(&z.bracket.0, 15), decimal(&z.bracket.1, 15)],
            "certified_digits": z.certified_digits,
        })).collect::<Vec<_>>(),
        "complex_zeros": t.complex_zeros().iter().map(|z| complex_zero_json(z, digits)).collect::<Vec<_>>(),
        "flagged": t.flagged().iter().map(|&(l, h)| [f64_decimal(l), f64_decimal(h)]).collect::<Vec<_>>(),
    })
}

fn turan_json(margins: &[TuranMargin], digits: u32) -> Value {
    Value::Array(
        margins
            .iter()
            .map(|m| {
                json!({
                    "gamma": m.gamma,
                    "margin": decimal(m.margin.value(), digits),
                    "error_radius": decimal(m.margin.radius(), RADIUS_DIGITS),
                    "pass": m.pass,
                })
            })
            .collect(),
    )
}

/// Places the run against the static bounds table; the verdict itself is
/// not judged.
fn literature_note(t: &AlephParam) -> Value {
    let tf = t.to_f64();
    let below: Vec<Value> = bounds::BOUNDS
        .iter()
        .filter(|r| r.direction == bounds::Direction::Lower)
        .filter(|r| {
            r.bound
                .parse::<f64>()
                .is_ok_and(|b| b.is_finite() && tf <= b)
        })
        .map(|r| json!({ "bound": r.bound, "attribution": r.attribution }))
        .collect();
    let note = if below.is_empty() {
        "t is not below any tabulated lower bound; the tables make no prediction".to_string()
    } else {
        "t lies at or below tabulated lower bounds on the constant, so for t strictly below them \
         non-real zeros exist somewhere (not necessarily inside this box)"
            .to_string()
    };
    json!({ "t": t.to_string(), "at_or_above_t": below, "note": note })
}
