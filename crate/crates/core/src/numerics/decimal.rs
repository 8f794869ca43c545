//! Decimal-string conversion at the CLI and file boundary.
//!
//! Output is always positional (`-0.000123…`, never `1.23e-4`) with a fixed
//! number of significant digits, trailing zeros kept, so that a value
//! written at `n` digits and read back at `n` digits prints identically.

use rug::Float;

use super::digits_to_bits;
use crate::error::{Error, Result};

/// Formats `x` positionally with exactly `sig` significant digits.
///
/// Zero prints as `"0"`; non-finite values print as `inf`, `-inf`, `nan`.
pub fn format_decimal(x: &Float, sig: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    let sig = sig.max(1) as usize;
    // digits d1 d2 ... with value 0.d1d2... × 10^exp
    let (neg, digits, exp) = x.to_sign_string_exp(10, Some(sig));
    let exp = exp.expect("finite nonzero value has an exponent");
    let mut out = String::with_capacity(sig + 8);
    if neg {
        out.push('-');
    }
    if exp <= 0 {
        out.push_str("0.");
        for _ in 0..(-exp) {
            out.push('0');
        }
        out.push_str(&digits);
    } else {
        let exp = exp as usize;
        if exp >= digits.len() {
            out.push_str(&digits);
            for _ in digits.len()..exp {
                out.push('0');
            }
        } else {
            out.push_str(&digits[..exp]);
            out.push('.');
            out.push_str(&digits[exp..]);
        }
    }
    out
}

/// Number of significant digits written in a decimal literal.
///
/// Leading zeros do not count; trailing zeros after the point do. An
/// exponent suffix is ignored.
pub fn significant_digits(s: &str) -> u32 {
    let mantissa = s
        .trim()
        .split(['e', 'E'])
        .next()
        .unwrap_or("")
        .trim_start_matches(['+', '-']);
    let mut count = 0u32;
    let mut started = false;
    for c in mantissa.chars() {
        if let Some(d) = c.to_digit(10) {
            if d != 0 {
                started = true;
            }
            if started {
                count += 1;
            }
        }
    }
    count.max(1)
}

/// Parses a finite decimal literal at `bits` of precision, or, when `bits`
/// is `None`, at enough bits to hold every digit written.
pub fn parse_decimal(s: &str, bits: Option<u32>) -> Result<Float> {
    let t = s.trim();
    let bad = |message: String| Error::Parse { line: 0, message };
    if t.is_empty() {
        return Err(bad("empty number".into()));
    }
    if !t
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return Err(bad(format!("not a decimal number: {t:?}")));
    }
    let bits = bits.unwrap_or_else(|| digits_to_bits(significant_digits(t)).max(64));
    let parsed = Float::parse(t).map_err(|e| bad(format!("{t:?}: {e}")))?;
    let x = Float::with_val(bits, parsed);
    if !x.is_finite() {
        return Err(bad(format!("not finite: {t:?}")));
    }
    Ok(x)
}
