//! Zeros of Ξ_ℵ: real zeros by sign scan and Newton polish, complex zeros by
//! the argument principle and quadtree subdivision, and the "all zeros in
//! this box are real" certificate.

mod certificate;
mod contour;
mod locate;
mod scan;

use std::io::{Read, Write};

use rug::{Complex, Float};

pub use certificate::{reality_certificate, RealityReport, Verdict};
pub use contour::{count_zeros_in_box, count_zeros_in_box_robust, BoxCount, Rect};
pub use locate::locate_complex_zeros;
pub use scan::{refine_zero, scan_first_zeros, scan_real_zeros, MAX_SCAN_LAMBDA};

use crate::error::{Error, Result};
use crate::numerics::{
    format_decimal, parse_decimal, significant_digits, PrecisionContext, RADIUS_BITS,
};
use crate::series::{csv_error, relocate};
use crate::transform::AlephParam;

/// Imaginary parts below this are classified as real.
pub const REAL_AXIS_TOLERANCE: f64 = 1e-3;

const CSV_HEADER: [&str; 8] = [
    "aleph",
    "index",
    "re",
    "im",
    "bracket_lo",
    "bracket_hi",
    "certified_digits",
    "residual",
];

/// Significant digits written for bracket endpoints.
const BRACKET_DIGITS: u32 = 15;
/// Significant digits written for residuals.
const RESIDUAL_DIGITS: u32 = 6;

/// A certified positive real zero ρ_ℓ.
#[derive(Clone, Debug, PartialEq)]
pub struct RealZero {
    pub aleph: AlephParam,
    /// Rank among the positive real zeros, from 1.
    pub index: usize,
    pub location: Float,
    /// Endpoints with opposite, resolved signs of Ξ.
    pub bracket: (Float, Float),
    pub certified_digits: u32,
}

/// A located (possibly non-real) zero σ.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexZero {
    pub aleph: AlephParam,
    pub location: Complex,
    /// `|Ξ(σ)|`.
    pub residual: Float,
    pub multiplicity: u32,
    pub certified_digits: u32,
}

impl ComplexZero {
    /// `|Im σ| < 10^(-3)`.
    pub fn is_real(&self) -> bool {
        self.location.imag().to_f64().abs() < REAL_AXIS_TOLERANCE
    }
}

/// Real zeros in increasing order plus non-real zeros with `Im σ ≥ 0`
/// (conjugates are implied).
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTable {
    aleph: AlephParam,
    real_zeros: Vec<RealZero>,
    complex_zeros: Vec<ComplexZero>,
    provenance: PrecisionContext,
    flagged: Vec<(f64, f64)>,
}

impl ZeroTable {
    pub fn new(aleph: AlephParam, provenance: PrecisionContext) -> Self {
        ZeroTable {
            aleph,
            real_zeros: Vec::new(),
            complex_zeros: Vec::new(),
            provenance,
            flagged: Vec::new(),
        }
    }

    pub fn aleph(&self) -> &AlephParam {
        &self.aleph
    }

    pub fn real_zeros(&self) -> &[RealZero] {
        &self.real_zeros
    }

    pub fn complex_zeros(&self) -> &[ComplexZero] {
        &self.complex_zeros
    }

    pub fn provenance(&self) -> &PrecisionContext {
        &self.provenance
    }

    /// Subintervals where the scan could not resolve the sign of Ξ.
    pub fn flagged(&self) -> &[(f64, f64)] {
        &self.flagged
    }

    pub fn len(&self) -> usize {
        self.real_zeros.len() + self.complex_zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends real zeros beyond the current last one, renumbering them to
    /// continue the index sequence. Zeros within `10^(-6)` of an existing
    /// one are dropped.
    pub fn extend_real(&mut self, zeros: impl IntoIterator<Item = RealZero>) {
        for mut z in zeros {
            if let Some(last) = self.real_zeros.last() {
                let gap = Float::with_val(64, &z.location - &last.location).to_f64();
                if gap <= 1e-6 {
                    continue;
                }
            }
            z.index = self.real_zeros.len() + 1;
            self.real_zeros.push(z);
        }
    }

    /// Adds a located zero, folding lower-half zeros onto their conjugates
    /// and dropping duplicates.
    pub fn push_complex(&mut self, mut z: ComplexZero) {
        if z.location.imag().is_sign_negative() {
            z.location = Complex::with_val(z.location.prec(), z.location.conj_ref());
        }
        let dup = self.complex_zeros.iter().any(|c| {
            let d = Complex::with_val(64, &c.location - &z.location);
            Float::with_val(64, d.abs_ref()).to_f64() < 1e-6
        });
        if !dup {
            self.complex_zeros.push(z);
            self.complex_zeros.sort_by(|a, b| {
                a.location
                    .real()
                    .partial_cmp(b.location.real())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        }
    }

    pub(crate) fn flag(&mut self, lo: f64, hi: f64) {
        self.flagged.push((lo, hi));
    }

    /// Keeps the first `n` real zeros, and only the flags and complex zeros
    /// that lie below the last one kept.
    pub(crate) fn truncate_real(&mut self, n: usize) {
        self.real_zeros.truncate(n);
        if let Some(last) = self.real_zeros.last().map(|z| z.location.to_f64()) {
            self.flagged.retain(|&(lo, _)| lo < last);
            self.complex_zeros
                .retain(|z| z.location.real().to_f64() <= last);
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let digits = self.provenance.target_digits();
        let aleph = self.aleph.to_string();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        for z in &self.real_zeros {
            w.write_record([
                aleph.as_str(),
                &z.index.to_string(),
                &format_decimal(&z.location, digits),
                "0",
                &format_decimal(&z.bracket.0, BRACKET_DIGITS),
                &format_decimal(&z.bracket.1, BRACKET_DIGITS),
                &z.certified_digits.to_string(),
                "",
            ])
            .map_err(csv_error)?;
        }
        for (i, z) in self.complex_zeros.iter().enumerate() {
            w.write_record([
                aleph.as_str(),
                &(i + 1).to_string(),
                &format_decimal(z.location.real(), digits),
                &format_decimal(z.location.imag(), digits),
                "",
                "",
                &z.certified_digits.to_string(),
                &format_decimal(&z.residual, RESIDUAL_DIGITS),
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

    /// Reads a table written by [`ZeroTable::write_csv`].
    ///
    /// The schema carries no multiplicity column, so imported complex zeros
    /// have multiplicity 1. The precision context is reconstructed from the
    /// number of digits written.
    pub fn read_csv<R: Read>(input: R) -> Result<ZeroTable> {
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
        let mut real = Vec::new();
        let mut complex = Vec::new();
        let mut digits = 1;
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_error)?;
            let at = |e: Error| relocate(e, line);
            let bad = |message: String| Error::Parse { line, message };
            let a = AlephParam::parse(&rec[0]).map_err(at)?;
            match &aleph {
                None => aleph = Some(a.clone()),
                Some(prev) if *prev != a => {
                    return Err(Error::SchemaMismatch(format!(
                        "line {line}: aleph {a} differs from {prev}"
                    )))
                }
                _ => {}
            }
            let index: usize = rec[1]
                .parse()
                .map_err(|_| bad(format!("bad index {:?}", &rec[1])))?;
            let certified_digits: u32 = rec[6]
                .parse()
                .map_err(|_| bad(format!("bad certified_digits {:?}", &rec[6])))?;
            digits = digits.max(significant_digits(&rec[2]));
            let re = parse_decimal(&rec[2], None).map_err(at)?;
            if rec[4].is_empty() {
                digits = digits.max(significant_digits(&rec[3]));
                let im = parse_decimal(&rec[3], None).map_err(at)?;
                let residual = parse_decimal(&rec[7], Some(RADIUS_BITS)).map_err(at)?;
                let prec = re.prec().max(im.prec());
                complex.push(ComplexZero {
                    aleph: a,
                    location: Complex::with_val(prec, (re, im)),
                    residual,
                    multiplicity: 1,
                    certified_digits,
                });
            } else {
                if &rec[3] != "0" || !rec[7].is_empty() {
                    return Err(bad("real zero rows need im=0 and an empty residual".into()));
                }
                let lo = parse_decimal(&rec[4], None).map_err(at)?;
                let hi = parse_decimal(&rec[5], None).map_err(at)?;
                if !(lo < re && re < hi) {
                    return Err(bad("location outside its bracket".into()));
                }
                if index != real.len() + 1 {
                    return Err(bad(format!(
                        "expected index {}, found {index}",
                        real.len() + 1
                    )));
                }
                real.push(RealZero {
                    aleph: a,
                    index,
                    location: re,
                    bracket: (lo, hi),
                    certified_digits,
                });
            }
        }
        let aleph = aleph.ok_or(Error::EmptyTable)?;
        let provenance = PrecisionContext::with_target_digits(digits)?;
        Ok(ZeroTable {
            aleph,
            real_zeros: real,
            complex_zeros: complex,
            provenance,
            flagged: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ZeroTable {
        let a = AlephParam::new(0.0).unwrap();
        let mut t = ZeroTable::new(a.clone(), PrecisionContext::default());
        let z = |x: f64, i| RealZero {
            aleph: a.clone(),
            index: i,
            location: Float::with_val(200, x),
            bracket: (
                Float::with_val(200, x - 1e-6),
                Float::with_val(200, x + 1e-6),
            ),
            certified_digits: 25,
        };
        t.extend_real([
            z(28.2694504, 1),
            z(42.0440793, 2),
            z(42.04407935, 9),
            z(50.0217152, 3),
        ]);
        t.push_complex(ComplexZero {
            aleph: a.clone(),
            location: Complex::with_val(200, (70.5, -1.25)),
            residual: Float::with_val(64, 1e-40),
            multiplicity: 1,
            certified_digits: 20,
        });
        t
    }

    #[test]
    fn extend_drops_duplicates_and_renumbers() {
        let t = table();
        assert_eq!(t.real_zeros().len(), 3);
        assert_eq!(t.real_zeros()[2].index, 3);
        assert!(t.complex_zeros()[0].location.imag().is_sign_positive());
    }

    #[test]
    fn csv_roundtrip() {
        let t = table();
        let s = t.to_csv_string();
        assert!(
            s.starts_with("aleph,index,re,im,bracket_lo,bracket_hi,certified_digits,residual\n")
        );
        let back = ZeroTable::read_csv(s.as_bytes()).unwrap();
        assert_eq!(back.to_csv_string(), s);
        assert_eq!(back.real_zeros().len(), 3);
        assert_eq!(back.complex_zeros().len(), 1);
    }

    #[test]
    fn csv_schema_errors() {
        let s = table().to_csv_string();
        let shuffled = s.replacen("aleph,index,re,im", "aleph,index,im,re", 1);
        assert!(matches!(
            ZeroTable::read_csv(shuffled.as_bytes()),
            Err(Error::SchemaMismatch(_))
        ));
        let mut lines: Vec<String> = s.lines().map(String::from).collect();
        lines[2] = lines[2].replacen("0,2,", "0.5,2,", 1);
        let mixed = lines.join("\n");
        assert!(matches!(
            ZeroTable::read_csv(mixed.as_bytes()),
            Err(Error::SchemaMismatch(_))
        ));
        let garbled = s.replacen(",25,", ",x,", 1);
        assert!(matches!(
            ZeroTable::read_csv(garbled.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
