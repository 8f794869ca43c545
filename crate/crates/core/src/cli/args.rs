use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Complex;

use crate::error::{Error, Result};
use crate::numerics::{parse_decimal, PrecisionContext};
use crate::transform::AlephParam;
use crate::zeros::Rect;

#[derive(Parser, Debug)]
#[command(
    name = "xizeros",
    version,
    about = "Evaluate Ξ_ℵ / M_ℵ, their coefficients, zeros and product identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ξ_ℵ(λ) (with --lambda) or M_ℵ(τ) (with --tau)
    Eval(EvalArgs),
    /// Taylor coefficients α_2γ and Turán margins
    Coeffs(CoeffsArgs),
    /// Positive real zeros in a range
    Zeros(ZerosArgs),
    /// Argument-principle zero count in a box
    BoxCount(BoxArgs),
    /// Compare the box count with the real-zero count
    Certify(CertifyArgs),
    /// Truncated Hadamard product
    Product(ProductArgs),
    /// Identity verification suite
    Verify(VerifyArgs),
    /// Literature bounds (static data)
    Bounds(BoundsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// ℵ as a decimal
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub aleph: String,
    /// Target significant digits, 15..=200
    #[arg(long, env = "XIZEROS_DIGITS", default_value_t = PrecisionContext::DEFAULT_TARGET_DIGITS)]
    pub digits: u32,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file (atomically) instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Point in the λ-plane: re[,im]
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "tau",
        required_unless_present = "tau"
    )]
    pub lambda: Option<String>,
    /// Point in the τ-plane: re[,im]
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = crate::series::DEFAULT_GAMMA_MAX)]
    pub gamma_max: u32,
}

#[derive(Args, Debug)]
pub struct ZerosArgs {
    #[command(flatten)]
    pub common: Common,
    /// lo:hi
    #[arg(long, default_value = "0:60")]
    pub range: String,
    /// Existing zero table to append to
    #[arg(long)]
    pub extend: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoxArgs {
    #[command(flatten)]
    pub common: Common,
    /// relo:rehi:imlo:imhi
    #[arg(long = "box", allow_hyphen_values = true)]
    pub rect: String,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// 0:B
    #[arg(long, default_value = "0:60")]
    pub range: String,
    /// Half-height h of the box [0,B]×[−h,h]
    #[arg(long, default_value_t = 2.0)]
    pub box_height: f64,
}

#[derive(Args, Debug)]
pub struct ProductArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "tau",
        required_unless_present = "tau"
    )]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    /// Number of zero factors L
    #[arg(long, default_value_t = 50)]
    pub factors: usize,
    /// Zero table to use instead of scanning
    #[arg(long)]
    pub zeros: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated check names, or `all`
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Test point re[,im]; repeat to give several (default 0.5, 1+i, 2, 5i)
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub factors: usize,
    #[arg(long, default_value_t = crate::series::DEFAULT_GAMMA_MAX)]
    pub gamma_max: u32,
    /// Zero table to use instead of scanning
    #[arg(long)]
    pub zeros: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn bad(message: String) -> Error {
    Error::Parse { line: 0, message }
}

impl Common {
    pub fn context(&self) -> Result<PrecisionContext> {
        if !(15..=200).contains(&self.digits) {
            return Err(Error::InvalidPrecision(format!(
                "--digits must be in 15..=200, got {}",
                self.digits
            )));
        }
        PrecisionContext::with_target_digits(self.digits)
    }

    pub fn aleph(&self) -> Result<AlephParam> {
        AlephParam::parse(&self.aleph)
    }
}

/// `re[,im]` as a complex number at `bits`.
pub fn parse_point(s: &str, bits: u32) -> Result<Complex> {
    let mut parts = s.split(',');
    let re = parse_decimal(parts.next().unwrap_or(""), Some(bits))?;
    let im = match parts.next() {
        Some(t) => parse_decimal(t, Some(bits))?,
        None => rug::Float::new(bits),
    };
    if parts.next().is_some() {
        return Err(bad(format!("expected re[,im], got {s:?}")));
    }
    Ok(Complex::with_val(bits, (re, im)))
}

fn parse_f64s(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| {
            parse_decimal(t, Some(64))
                .map(|f| f.to_f64())
                .map_err(|_| bad(format!("bad number {t:?} in {what}")))
        })
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(bad(format!(
            "{what} needs {n} colon-separated numbers, got {s:?}"
        )));
    }
    Ok(v)
}

/// `lo:hi`.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let v = parse_f64s(s, 2, "--range")?;
    if v[0] >= v[1] {
        return Err(Error::InvalidInterval { a: v[0], b: v[1] });
    }
    Ok((v[0], v[1]))
}

/// `relo:rehi:imlo:imhi`.
pub fn parse_box(s: &str) -> Result<Rect> {
    let v = parse_f64s(s, 4, "--box")?;
    Rect::new(v[0], v[1], v[2], v[3])
}
