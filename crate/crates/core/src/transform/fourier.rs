//! The sequence Fourier transform, quadrature over Ω, and the character
//! basis diagnostic.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::character::{chi_pair, CharacterSum, RootTable};
use super::sequence::Sequence;
use super::stepped::{OmegaDomain, Region, SteppedFunction};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::lambda::{LambdaIndex, Numra};
use crate::report::CheckResult;

/// A sequence with its support embedded in K, ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Spectrum {
    points: Vec<(FieldElement, Complex64)>,
    roots: RootTable,
}

impl Spectrum {
    pub fn new(numra: &Numra, z: &Sequence) -> Result<Self> {
        let points = z.iter().map(|(k, v)| Ok((numra.embed(k)?, v))).collect::<Result<Vec<_>>>()?;
        Ok(Spectrum { points, roots: RootTable::new(numra.p()) })
    }

    /// ẑ(ξ) = Σ z(λ)·conj χ(λξ), summed in support order.
    pub fn eval(&self, numra: &Numra, xi: &FieldElement) -> Result<Complex64> {
        let lf = numra.field();
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, v) in &self.points {
            let u = chi_pair(lf, x, xi)?;
            acc += v * self.roots.get(u.conj());
        }
        Ok(acc)
    }

    /// Smallest m for which ẑ is constant on cells ξ + 𝔅^m.
    pub fn resolution(&self) -> i32 {
        self.points.iter().filter_map(|(x, _)| x.valuation()).map(|v| -v).max().unwrap_or(0).max(0)
    }
}

pub fn fourier_sequence(numra: &Numra, z: &Sequence, xi: &FieldElement) -> Result<Complex64> {
    Spectrum::new(numra, z)?.eval(numra, xi)
}

/// ẑ sampled on a region at resolution m (refuses if m is too coarse).
pub fn sample_spectrum(numra: &Numra, z: &Sequence, region: &Region, m: i32) -> Result<SteppedFunction> {
    let spec = Spectrum::new(numra, z)?;
    let need = spec.resolution().max(region.max_k());
    if m < need {
        return Err(Error::Resolution { needed: need, got: m });
    }
    SteppedFunction::sample(numra.field(), region, m, |xi| spec.eval(numra, xi))
}

/// ∫ f χ_λ by exact quadrature over the cells of f.
pub fn inverse_on_omega(numra: &Numra, f: &SteppedFunction, lam: LambdaIndex) -> Result<Complex64> {
    let x = numra.embed(lam)?;
    let need = x.valuation().map(|v| -v).unwrap_or(i32::MIN);
    if f.resolution() < need {
        return Err(Error::Resolution { needed: need, got: f.resolution() });
    }
    let lf = numra.field();
    let roots = RootTable::new(numra.p());
    let mut acc = Complex64::new(0.0, 0.0);
    for (rep, v) in f.cells() {
        acc += v * roots.get(chi_pair(lf, &x, rep)?);
    }
    Ok(acc * f.cell_measure(lf.q()))
}

/// Exact Σ over the cells of 𝔇/𝔅^m of χ(xξ).
pub fn coset_character_sum(numra: &Numra, x: &FieldElement, m: i32) -> Result<CharacterSum> {
    let lf = numra.field();
    let mut s = CharacterSum::new(numra.p());
    for cell in Region::ball(0).cells(lf, m)? {
        s.push(chi_pair(lf, x, &cell)?);
    }
    Ok(s)
}

/// ‖z‖² against ∫_Ω |ẑ|², returning (norm², integral).
pub fn parseval_pair(numra: &Numra, z: &Sequence, region: &Region) -> Result<(f64, f64)> {
    let spec = Spectrum::new(numra, z)?;
    let m = spec.resolution().max(region.max_k());
    let f = SteppedFunction::sample(numra.field(), region, m, |xi| spec.eval(numra, xi))?;
    let integral = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * f.cell_measure(numra.field().q());
    Ok((z.norm_sq(), integral))
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisReport {
    pub omega: super::stepped::OmegaKind,
    pub omega_cosets: Vec<String>,
    pub window: u32,
    pub resolution: i32,
    pub indices: usize,
    pub cells: usize,
    /// Gram diagonal, equal to measure(Ω).
    pub constant: f64,
    pub offdiag_max: f64,
    /// max |G − c·I|.
    pub residual: f64,
    /// Every off-diagonal character sum cancels exactly.
    pub exact_orthogonal: bool,
    /// Orthogonal and as many characters as cells: {χ_λ} spans the step functions.
    pub complete_on_window: bool,
    pub nonzero_offdiag_pairs: usize,
    pub warnings: Vec<String>,
}

impl BasisReport {
    pub fn to_check(&self, threshold: f64) -> CheckResult {
        let name = match self.omega {
            super::stepped::OmegaKind::Working => "character_basis_working_omega",
            super::stepped::OmegaKind::Literal => "character_basis_literal_omega",
        };
        let mut c = CheckResult::diagnostic(name, self.residual, threshold)
            .with_constant(self.constant)
            .with_warnings(self.warnings.iter().cloned());
        c.notes.push(format!(
            "exact_orthogonal={} complete_on_window={} indices={} cells={}",
            self.exact_orthogonal, self.complete_on_window, self.indices, self.cells
        ));
        c
    }
}

/// Gram matrix G(λ,σ) = ∫_Ω χ_λ conj χ_σ over indices with n < q^window,
/// evaluated exactly as character sums over the cells of Ω.
pub fn check_character_basis(numra: &Numra, window: u32, omega: &OmegaDomain) -> Result<BasisReport> {
    let lf = numra.field();
    let p = numra.p();
    let indices = numra.index_set(window);
    let embedded = indices.iter().map(|&k| numra.embed(k)).collect::<Result<Vec<_>>>()?;
    let need = embedded
        .iter()
        .filter_map(|x| x.valuation())
        .map(|v| -v)
        .max()
        .unwrap_or(0)
        .max(omega.region.max_k());
    let cells = omega.region.cells(lf, need)?;
    let phases: Vec<Vec<u32>> = embedded
        .par_iter()
        .map(|x| cells.iter().map(|c| chi_pair(lf, x, c).map(|u| u.exponent())).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let roots = RootTable::new(p);
    let w = (lf.q() as f64).powi(-need);
    let constant = cells.len() as f64 * w;
    let rows: Vec<(f64, usize)> = (0..indices.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            let mut nonzero = 0;
            for j in i + 1..indices.len() {
                let mut s = CharacterSum::new(p);
                for (a, b) in phases[i].iter().zip(&phases[j]) {
                    s.push_exponent((a + p - b) % p);
                }
                if !s.is_zero() {
                    nonzero += 1;
                    worst = worst.max((s.to_complex(&roots) * w).norm());
                }
            }
            (worst, nonzero)
        })
        .collect();
    let offdiag_max = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let nonzero: usize = rows.iter().map(|r| r.1).sum();
    let exact_orthogonal = nonzero == 0;
    let mut warnings = omega.warnings.clone();
    if !exact_orthogonal {
        warnings.push(format!(
            "NOT_ORTHOGONAL: {nonzero} off-diagonal Gram entries are nonzero on this Omega (max {offdiag_max:.6e})"
        ));
    }
    Ok(BasisReport {
        omega: omega.kind,
        omega_cosets: omega.region.cosets.iter().map(|c| format!("{} + B^{}", lf.format(&c.rep), c.k)).collect(),
        window,
        resolution: need,
        indices: indices.len(),
        cells: cells.len(),
        constant,
        offdiag_max,
        residual: offdiag_max,
        exact_orthogonal,
        complete_on_window: exact_orthogonal && indices.len() == cells.len(),
        nonzero_offdiag_pairs: nonzero,
        warnings,
    })
}
