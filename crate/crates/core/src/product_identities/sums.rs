use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{BoundedComplex, BoundedReal, RADIUS_BITS};
use crate::zeros::ZeroTable;

/// Least-squares fit of the zero-counting function
/// `N(ρ) ≈ c1·ρ·ln ρ + c2·ρ + c3`.
///
/// The linear term matters: without it the fit over the first few dozen
/// zeros flattens `c1` and underestimates the tail sums by 10–25%.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Fewest zeros for the three-term fit; below this `c2 = 0`.
const FULL_FIT_MIN: usize = 6;

impl DensityFit {
    /// Fits `N(ρ_ℓ) = ℓ` over positive, increasing zeros `rho`. Short tables
    /// drop the linear term, and a single zero forces the line through the
    /// origin.
    pub fn fit(rho: &[f64]) -> Option<DensityFit> {
        let pts: Vec<(f64, f64)> = rho
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 1.0)
            .map(|(i, &r)| (r, (i + 1) as f64))
            .collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let xlx: Vec<f64> = pts.iter().map(|p| p.0 * p.0.ln()).collect();
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ones = vec![1.0; pts.len()];
        let valid = |f: DensityFit| (f.c1 > 0.0 && f.density(*x.last()?) > 0.0).then_some(f);
        if pts.len() >= FULL_FIT_MIN {
            if let Some(c) = least_squares(&[&xlx, &x, &ones], &y) {
                if let Some(f) = valid(DensityFit {
                    c1: c[0],
                    c2: c[1],
                    c3: c[2],
                }) {
                    return Some(f);
                }
            }
        }
        if pts.len() >= 2 {
            if let Some(c) = least_squares(&[&xlx, &ones], &y) {
                if let Some(f) = valid(DensityFit {
                    c1: c[0],
                    c2: 0.0,
                    c3: c[1],
                }) {
                    return Some(f);
                }
            }
        }
        let c = least_squares(&[&xlx], &y)?;
        valid(DensityFit {
            c1: c[0],
            c2: 0.0,
            c3: 0.0,
        })
    }

    pub fn count(&self, rho: f64) -> f64 {
        self.c1 * rho * rho.ln() + self.c2 * rho + self.c3
    }

    /// `dN/dρ = c1·(ln ρ + 1) + c2`.
    pub fn density(&self, rho: f64) -> f64 {
        self.c1 * (rho.ln() + 1.0) + self.c2
    }

    /// `∫_R^∞ ρ^(−p) dN(ρ)` under the fitted density:
    /// `(c1·(ln R + 1 + 1/(p−1)) + c2) / ((p−1)·R^(p−1))`.
    pub fn tail_sum(&self, r: f64, p: u32) -> f64 {
        let q = (p - 1) as f64;
        (self.c1 * (r.ln() + 1.0 + 1.0 / q) + self.c2) / (q * r.powf(q))
    }
}

/// Least squares `y ≈ Σ c_j·cols[j]` via the normal equations on
/// unit-scaled columns.
#[allow(clippy::needless_range_loop)]
fn least_squares(cols: &[&[f64]], y: &[f64]) -> Option<Vec<f64>> {
    let k = cols.len();
    if y.len() < k {
        return None;
    }
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if scale.contains(&0.0) {
        return None;
    }
    let col = |j: usize, i: usize| cols[j][i] / scale[j];
    // augmented normal matrix [AᵀA | Aᵀy]
    let mut m = vec![vec![0.0; k + 1]; k];
    for a in 0..k {
        for b in 0..k {
            m[a][b] = (0..y.len()).map(|i| col(a, i) * col(b, i)).sum();
        }
        m[a][k] = (0..y.len()).map(|i| col(a, i) * y[i]).sum();
    }
    for p in 0..k {
        let piv = (p..k).max_by(|&i, &j| m[i][p].abs().total_cmp(&m[j][p].abs()))?;
        m.swap(p, piv);
        if m[p][p].abs() < 1e-14 {
            return None;
        }
        for r in 0..k {
            if r != p {
                let f = m[r][p] / m[p][p];
                for c in p..=k {
                    m[r][c] -= f * m[p][c];
                }
            }
        }
    }
    Some((0..k).map(|j| m[j][k] / m[j][j] / scale[j]).collect())
}

/// Partial sums `S_k = Σ_{ℓ≤k} ρ_ℓ^(−p)` over the stored positive real zeros.
///
/// The zeros of `M_ℵ` are `σ = iρ`, so `Σσ^(−2) = −S`.
#[derive(Clone, Debug)]
pub struct ZeroSum {
    pub partial_sums: Vec<BoundedReal>,
    /// Estimated `Σ_{ℓ>n} ρ_ℓ^(−p)` beyond the last stored zero.
    pub tail_estimate: f64,
    pub fit: DensityFit,
    exponent: u32,
    rho: Vec<f64>,
}

impl ZeroSum {
    /// Estimated `Σ_{ℓ>k} ρ_ℓ^(−p)`, for `1 ≤ k ≤` number of zeros.
    pub fn tail_at(&self, k: usize) -> f64 {
        self.fit.tail_sum(self.rho[k - 1], self.exponent)
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }
}

/// Cumulative `Σ ρ_ℓ^(−exponent)` over the table's real zeros, with a tail
/// estimate from the fitted zero density.
///
/// Each term's radius is `p·ρ^(−p−1)·10^(−certified_digits)`.
///
/// # Panics
/// If `exponent < 2` (the sum diverges).
pub fn zero_sum(table: &ZeroTable, exponent: u32) -> Result<ZeroSum> {
    assert!(exponent >= 2, "Σρ^(-p) diverges for p < 2");
    let zeros = table.real_zeros();
    if zeros.is_empty() {
        return Err(Error::EmptyTable);
    }
    let bits = table.provenance().working_bits();
    let mut acc = BoundedReal::exact(Float::new(bits));
    let mut partial_sums = Vec::with_capacity(zeros.len());
    for z in zeros {
        let rho = Float::with_val(bits, &z.location);
        let term = Float::with_val(bits, rho.pow(-(exponent as i32)));
        let eps = Float::with_val(RADIUS_BITS, 10u32).pow(-(z.certified_digits as i32));
        let r = Float::with_val(RADIUS_BITS, &term / &z.location) * exponent * eps;
        acc = &acc + &BoundedReal::new(term, r);
        partial_sums.push(acc.clone());
    }
    let rho: Vec<f64> = zeros.iter().map(|z| z.location.to_f64()).collect();
    let fit = DensityFit::fit(&rho).ok_or(Error::EmptyTable)?;
    let tail_estimate = fit.tail_sum(*rho.last().unwrap(), exponent);
    Ok(ZeroSum {
        partial_sums,
        tail_estimate,
        fit,
        exponent,
        rho,
    })
}

/// `σ^(−2) − (conj σ)^(−2) = −4i·Re σ·Im σ / |σ|⁴`, exactly zero when σ is
/// real or purely imaginary.
pub fn termwise_delta(sigma: &Complex) -> BoundedComplex {
    let bits = sigma.prec().0.max(sigma.prec().1);
    let (re, im) = (sigma.real(), sigma.imag());
    let norm = Float::with_val(bits, sigma.norm_ref()).square();
    let num = Float::with_val(bits, re * im) * 4u32;
    let v = Float::with_val(bits, -num / norm);
    BoundedComplex::exact(Complex::with_val(bits, (0, v)))
}

/// `δ_ℓ = σ_ℓ^(−2) − (conj σ_ℓ)^(−2)` for the zeros `σ_ℓ = iλ_ℓ` of `M_ℵ`,
/// one per stored zero of Ξ (real zeros first, then the non-real ones,
/// numbered on from there).
///
/// Radii come from each zero's certified digits (`|dδ/dσ| ≤ 4|σ|^(−3)`).
pub fn termwise_diagnostic(table: &ZeroTable) -> Result<Vec<(usize, BoundedComplex)>> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let bits = table.provenance().working_bits();
    let locs = table
        .real_zeros()
        .iter()
        .map(|z| {
            (
                Complex::with_val(bits, (&z.location, 0)),
                z.certified_digits,
            )
        })
        .chain(
            table
                .complex_zeros()
                .iter()
                .map(|z| (Complex::with_val(bits, &z.location), z.certified_digits)),
        );
    Ok(locs
        .enumerate()
        .map(|(i, (lam, digits))| {
            let sigma = Complex::with_val(bits, (-lam.imag(), lam.real()));
            let modulus = Float::with_val(RADIUS_BITS, sigma.abs_ref());
            let eps = Float::with_val(RADIUS_BITS, 10u32).pow(-(digits as i32));
            let r = Float::with_val(RADIUS_BITS, modulus.pow(-3i32)) * 4u32 * eps;
            (i + 1, termwise_delta(&sigma).widen(&r))
        })
        .collect())
}
