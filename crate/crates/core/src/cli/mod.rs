//! Command-line front end: parses flags, runs one operation, writes CSV or
//! JSON, and reports through the exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O failure |
//! | 2 | bad arguments or input file |
//! | 3 | numerical failure |
//! | 4 | a verification check failed (or a certificate is inconsistent) |

mod args;
pub mod bounds;
mod io;
mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

pub use args::{Cli, Command, Format};
pub use io::write_atomic;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code. Diagnostics go to standard error as one JSON object per line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            diagnostic("error", "usage", &e.render().to_string());
            return EXIT_USAGE;
        }
    };
    let name = command_name(&cli.command);
    let started = Instant::now();
    let code = match report::execute(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            let code = exit_code(&e);
            diagnostic("error", error_kind(&e), &e.to_string());
            code
        }
    };
    let meta = serde_json::json!({
        "level": "info",
        "event": "finished",
        "command": name,
        "exit_code": code,
        "elapsed_ms": started.elapsed().as_millis() as u64,
    });
    eprintln!("{meta}");
    code
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        e if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidPrecision(_) => "InvalidPrecision",
        Error::InvalidInterval { .. } => "InvalidInterval",
        Error::NonConvergent { .. } => "NonConvergent",
        Error::StepUnderflow { .. } => "StepUnderflow",
        Error::OutOfDomain { .. } => "OutOfDomain",
        Error::InvalidAleph(_) => "InvalidAleph",
        Error::PositivityViolation { .. } => "PositivityViolation",
        Error::TailNotBounded { .. } => "TailNotBounded",
        Error::InsufficientEntries { .. } => "InsufficientEntries",
        Error::PrecisionExhausted { .. } => "PrecisionExhausted",
        Error::NoSignChange { .. } => "NoSignChange",
        Error::NewtonDiverged { .. } => "NewtonDiverged",
        Error::ZeroOnContour { .. } => "ZeroOnContour",
        Error::SubdivisionLimit { .. } => "SubdivisionLimit",
        Error::InsufficientZeros { .. } => "InsufficientZeros",
        Error::EmptyTable => "EmptyTable",
        Error::SchemaMismatch(_) => "SchemaMismatch",
        Error::Parse { .. } => "ParseError",
        Error::Io(_) => "Io",
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval(_) => "eval",
        Command::Coeffs(_) => "coeffs",
        Command::Zeros(_) => "zeros",
        Command::BoxCount(_) => "box-count",
        Command::Certify(_) => "certify",
        Command::Product(_) => "product",
        Command::Verify(_) => "verify",
        Command::Bounds(_) => "bounds",
    }
}

/// One JSON object on one line of standard error.
pub(crate) fn diagnostic(level: &str, kind: &str, message: &str) {
    let line = serde_json::json!({ "level": level, "kind": kind, "message": message.trim_end() });
    eprintln!("{line}");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(run(["xizeros", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["xizeros", "eval", "--aleph", "0"]), EXIT_USAGE);
        assert_eq!(
            run(["xizeros", "eval", "--lambda", "0", "--digits", "5"]),
            EXIT_USAGE
        );
        assert_eq!(run(["xizeros", "eval", "--lambda", "abc"]), EXIT_USAGE);
        assert_eq!(run(["xizeros", "zeros", "--range", "0:2000"]), EXIT_USAGE);
        assert_eq!(run(["xizeros", "--help"]), EXIT_OK);
        assert_eq!(
            exit_code(&Error::NonConvergent {
                refinements: 1,
                difference: 1.0
            }),
            EXIT_NUMERIC
        );
        assert_eq!(
            exit_code(&Error::PrecisionExhausted { lo: 0.0, hi: 1.0 }),
            EXIT_NUMERIC
        );
    }

    #[test]
    fn bounds_command() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        assert_eq!(
            run(["xizeros", "bounds", "--out", p.to_str().unwrap()]),
            EXIT_OK
        );
        assert_eq!(std::fs::read_to_string(&p).unwrap(), bounds::to_csv());
    }
}
