//! Oracle B (fiber matrices over the annihilator of δ𝒵) and the printed
//! modulation matrices, which are evaluated as diagnostics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bank::{periodic_split, FilterBank, Normalization};
use super::gram::{gram_oracle, GramReport};
use super::system::{deviation_from_scalar, mean_diagonal, ShiftSystem};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::lambda::Numra;
use crate::report::CheckResult;
use crate::transform::{chi_pair, RootTable, Spectrum};

#[derive(Clone, Debug, Serialize)]
pub struct UnitarityReport {
    pub level: usize,
    pub resolution: i32,
    pub cells: usize,
    pub shifts: usize,
    pub rows: usize,
    pub cols: usize,
    /// max over cells of ‖P*P − I‖_max with the fixed 1/√M scaling.
    pub orthonormality_residual: f64,
    /// max over cells of ‖PP* − I‖_max; None when not requested.
    pub completeness_residual: Option<f64>,
    pub residual: f64,
    /// Mean diagonal of P*P over the grid (reported, never used for the verdict).
    pub best_fit_scalar: f64,
    pub residual_after_fit: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl UnitarityReport {
    pub fn to_check(&self, name: &str) -> CheckResult {
        let mut c = CheckResult::verdict(name, self.residual, self.threshold).with_constant(self.best_fit_scalar);
        c.notes.push(format!(
            "fiber matrix {}x{} over {} cells, {} shifts; orthonormality={:.3e} completeness={} after_fit={:.3e}",
            self.rows,
            self.cols,
            self.cells,
            self.shifts,
            self.orthonormality_residual,
            self.completeness_residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "n/a".into()),
            self.residual_after_fit
        ));
        if self.rows != self.cols && self.completeness_residual.is_some() {
            c.warnings.push(format!(
                "NOT_SQUARE: {} generators against {} fiber rows, so the system cannot be a basis",
                self.cols, self.rows
            ));
        }
        c
    }
}

pub fn system_unitarity(system: &ShiftSystem, resolution: i32, completeness: bool, threshold: f64) -> Result<UnitarityReport> {
    let grid = system.grid(resolution)?;
    let per_cell: Vec<(f64, f64, f64, DMatrix<Complex64>)> = grid
        .par_iter()
        .map(|xi| {
            let p = system.fiber_matrix(xi)?;
            let pp = p.adjoint() * &p;
            let o = deviation_from_scalar(&pp, 1.0);
            let c = if completeness { deviation_from_scalar(&(&p * p.adjoint()), 1.0) } else { 0.0 };
            Ok((o, c, mean_diagonal(&pp), pp))
        })
        .collect::<Result<Vec<_>>>()?;
    let ortho = per_cell.iter().map(|r| r.0).fold(0.0, f64::max);
    let comp = per_cell.iter().map(|r| r.1).fold(0.0, f64::max);
    let fit = per_cell.iter().map(|r| r.2).sum::<f64>() / per_cell.len().max(1) as f64;
    let after = per_cell.iter().map(|r| deviation_from_scalar(&r.3, fit)).fold(0.0, f64::max);
    let residual = if completeness { ortho.max(comp) } else { ortho };
    let cols = system.generators().len();
    Ok(UnitarityReport {
        level: system.level(),
        resolution,
        cells: grid.len(),
        shifts: system.shift_count(),
        rows: system.branches() * system.shift_count(),
        cols,
        orthonormality_residual: ortho,
        completeness_residual: completeness.then_some(comp),
        residual,
        best_fit_scalar: fit,
        residual_after_fit: after,
        threshold,
        pass: residual.is_finite() && residual < threshold,
    })
}

/// Oracle B for a first-stage bank.
pub fn unitarity_check(numra: &Numra, bank: &FilterBank, resolution: i32, threshold: f64) -> Result<UnitarityReport> {
    bank.validate(numra)?;
    let system = ShiftSystem::new(numra, &bank.filters, 1)?;
    system_unitarity(&system, resolution, true, threshold)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub gram: GramReport,
    pub unitarity: UnitarityReport,
    pub agree: bool,
}

impl EquivalenceReport {
    pub fn to_check(&self) -> CheckResult {
        let mut c = CheckResult::verdict("oracle_equivalence", if self.agree { 0.0 } else { 1.0 }, 0.5);
        c.notes.push(format!("gram_pass={} unitarity_pass={}", self.gram.pass, self.unitarity.pass));
        c
    }
}

pub fn oracle_equivalence(numra: &Numra, bank: &FilterBank, window: u32, resolution: i32, threshold: f64) -> Result<EquivalenceReport> {
    let gram = gram_oracle(numra, bank, window, threshold)?;
    let unitarity = unitarity_check(numra, bank, resolution, threshold)?;
    let agree = gram.pass == unitarity.pass;
    Ok(EquivalenceReport { gram, unitarity, agree })
}

/// Which index feeds the phase of the lower blocks of the printed matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseVariant {
    S,
    SMinusQn,
}

#[derive(Clone, Debug)]
pub struct ModulationMatrix {
    pub xi: FieldElement,
    pub entries: DMatrix<Complex64>,
}

/// Shared pieces of the printed matrices: shifts u(s)δ⁻¹ (s < qN), the
/// extra shift u(N), and phases conj χ(θ𝔭u(s)) for s < q²N.
struct Printed<'a> {
    numra: &'a Numra,
    shifts: Vec<FieldElement>,
    extra: FieldElement,
    phases: Vec<Complex64>,
    qn: usize,
}

impl<'a> Printed<'a> {
    fn new(numra: &'a Numra) -> Result<Self> {
        let lf = numra.field();
        let qn = numra.arity();
        let dinv = numra.delta_inv_pow(1)?;
        let shifts = (0..qn as u64).map(|s| lf.mul(&numra.u_of(s)?, dinv)).collect::<Result<Vec<_>>>()?;
        let extra = numra.u_of(numra.params().n)?;
        let roots = RootTable::new(numra.p());
        let tp = lf.mul(numra.theta(), &lf.prime_pow(1)?)?;
        let phases = (0..(numra.q() as usize * qn) as u64)
            .map(|s| Ok(roots.get(chi_pair(lf, &tp, &numra.u_of(s)?)?.conj())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Printed { numra, shifts, extra, phases, qn })
    }

    fn point(&self, xi: &FieldElement, s: usize, plus_extra: bool) -> FieldElement {
        let lf = self.numra.field();
        let x = lf.add(xi, &self.shifts[s]);
        if plus_extra { lf.add(&x, &self.extra) } else { x }
    }

    fn phase(&self, s: usize, variant: PhaseVariant) -> Complex64 {
        match variant {
            PhaseVariant::S => self.phases[s],
            PhaseVariant::SMinusQn => self.phases[s.saturating_sub(self.qn)],
        }
    }
}

/// The printed q²N × q²N matrix built from ŵ_t. The third block, whose row
/// range duplicates the second as printed, is read as rows s < qN with
/// argument ξ + u(s)δ⁻¹.
pub fn modulation_matrix(
    numra: &Numra,
    bank: &FilterBank,
    xi: &FieldElement,
    norm: Normalization,
    variant: PhaseVariant,
) -> Result<ModulationMatrix> {
    let pr = Printed::new(numra)?;
    let spectra = bank.filters.iter().map(|f| Spectrum::new(numra, f)).collect::<Result<Vec<_>>>()?;
    let qn = pr.qn;
    let pre = norm.prefactor(numra.q(), numra.params().n);
    let mut m = DMatrix::from_element(2 * qn, 2 * qn, Complex64::new(0.0, 0.0));
    for s in 0..2 * qn {
        let (row_shift, extra) = if s < qn { (s, false) } else { (s - qn, true) };
        let x = pr.point(xi, row_shift, extra);
        for t in 0..2 * qn {
            let (filter, phase) = if t < qn { (t, Complex64::new(1.0, 0.0)) } else { (t - qn, pr.phase(s, variant)) };
            m[(s, t)] = phase * spectra[filter].eval(numra, &x)? * pre;
        }
    }
    Ok(ModulationMatrix { xi: xi.clone(), entries: m })
}

/// The printed matrix built from the split parts w_{t0}, w_{t1}, prefactor 1/√(qN).
pub fn split_part_matrix(numra: &Numra, bank: &FilterBank, xi: &FieldElement, variant: PhaseVariant) -> Result<ModulationMatrix> {
    let pr = Printed::new(numra)?;
    let splits: Vec<_> = bank.filters.iter().map(periodic_split).collect();
    let parts = splits
        .iter()
        .map(|s| Ok([Spectrum::new(numra, &s.part0)?, Spectrum::new(numra, &s.part1)?]))
        .collect::<Result<Vec<_>>>()?;
    let qn = pr.qn;
    let pre = Normalization::SqrtQN.prefactor(numra.q(), numra.params().n);
    let mut m = DMatrix::from_element(2 * qn, 2 * qn, Complex64::new(0.0, 0.0));
    for s in 0..2 * qn {
        let (row_shift, branch) = if s < qn { (s, 0) } else { (s - qn, 1) };
        let x = pr.point(xi, row_shift, false);
        for t in 0..2 * qn {
            let (filter, phase) = if t < qn { (t, Complex64::new(1.0, 0.0)) } else { (t - qn, pr.phase(s, variant)) };
            m[(s, t)] = phase * parts[filter][branch].eval(numra, &x)? * pre;
        }
    }
    Ok(ModulationMatrix { xi: xi.clone(), entries: m })
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> (f64, f64, f64) {
    let mm = m.adjoint() * m;
    let raw = deviation_from_scalar(&mm, 1.0).max(deviation_from_scalar(&(m * m.adjoint()), 1.0));
    let fit = mean_diagonal(&mm);
    (raw, fit, deviation_from_scalar(&mm, fit))
}

/// Unitarity residuals of the printed matrices over the grid of 𝔇/𝔅^m:
/// residual as printed, fitted scalar, and residual after the fit.
pub fn printed_matrix_diagnostics(numra: &Numra, bank: &FilterBank, resolution: i32, threshold: f64) -> Result<Vec<CheckResult>> {
    let system = ShiftSystem::new(numra, &bank.filters, 1)?;
    let grid = system.grid(resolution)?;
    let mut out = Vec::new();
    let mut variants: Vec<(String, Box<dyn Fn(&FieldElement) -> Result<ModulationMatrix> + Sync>)> = Vec::new();
    for norm in [Normalization::QSqrtN, Normalization::SqrtQN] {
        for var in [PhaseVariant::S, PhaseVariant::SMinusQn] {
            let name = format!("printed_modulation_matrix[{norm:?},{var:?}]").to_lowercase();
            variants.push((name, Box::new(move |xi| modulation_matrix(numra, bank, xi, norm, var))));
        }
    }
    for var in [PhaseVariant::S, PhaseVariant::SMinusQn] {
        let name = format!("printed_split_matrix[{var:?}]").to_lowercase();
        variants.push((name, Box::new(move |xi| split_part_matrix(numra, bank, xi, var))));
    }
    for (name, build) in &variants {
        let per: Vec<(f64, f64, f64)> = grid
            .par_iter()
            .map(|xi| Ok(unitarity_deviation(&build(xi)?.entries)))
            .collect::<Result<Vec<_>>>()?;
        let raw = per.iter().map(|r| r.0).fold(0.0, f64::max);
        let fit = per.iter().map(|r| r.1).sum::<f64>() / per.len().max(1) as f64;
        let after = per.iter().map(|r| r.2).fold(0.0, f64::max);
        out.push(
            CheckResult::diagnostic(name.clone(), raw, threshold)
                .with_constant(fit)
                .with_note(format!("residual_after_fit={after:.6e}")),
        );
    }
    if out.is_empty() {
        return Err(Error::Config("no printed matrix variants".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::first_stage::designs;
    use crate::lambda::{LambdaIndex, NumraParams};
    use crate::transform::Sequence;

    fn haar() -> (Numra, FilterBank) {
        let numra = Numra::new(NumraParams::simple(2, 1, 1, 1, None).unwrap()).unwrap();
        let bank = designs::haar(&numra).unwrap();
        (numra, bank)
    }

    #[test]
    fn haar_passes() {
        let (numra, bank) = haar();
        let r = unitarity_check(&numra, &bank, 3, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!((r.rows, r.cols, r.cells), (2, 2, 8));
    }

    #[test]
    fn perturbed_haar_fails() {
        let (numra, bank) = haar();
        let bad = designs::perturb(&bank, 1, LambdaIndex::z(0), Complex64::new(0.1, 0.0));
        let r = unitarity_check(&numra, &bad, 3, 1e-10).unwrap();
        assert!(!r.pass && r.residual >= 0.05);
        let e = oracle_equivalence(&numra, &bad, 3, 3, 1e-10).unwrap();
        assert!(e.agree && !e.gram.pass);
    }

    #[test]
    fn lazy_passes_and_zero_bank_fails() {
        let (numra, _) = haar();
        assert!(unitarity_check(&numra, &designs::lazy(&numra).unwrap(), 1, 1e-12).unwrap().pass);
        let zero = FilterBank::new(&numra, vec![Sequence::new(), Sequence::new()]).unwrap();
        let r = unitarity_check(&numra, &zero, 1, 1e-10).unwrap();
        assert_eq!(r.residual, 1.0);
        let m = modulation_matrix(&numra, &zero, &FieldElement::zero(), Normalization::QSqrtN, PhaseVariant::S).unwrap();
        assert!(m.entries.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn resolution_is_enforced() {
        let (numra, bank) = haar();
        let longer = designs::perturb(&bank, 0, LambdaIndex::z(5), Complex64::new(0.0, 0.0));
        assert!(unitarity_check(&numra, &longer, 0, 1e-10).is_err());
        let b = designs::perturb(&bank, 0, LambdaIndex::z(5), Complex64::new(0.1, 0.0));
        assert!(matches!(unitarity_check(&numra, &b, 2, 1e-10), Err(Error::Resolution { .. })));
    }

    #[test]
    fn phase_rotation_leaves_residual_unchanged() {
        let (numra, bank) = haar();
        let bad = designs::perturb(&bank, 1, LambdaIndex::z(1), Complex64::new(0.2, 0.1));
        let r1 = unitarity_check(&numra, &bad, 2, 1e-10).unwrap();
        let r2 = unitarity_check(&numra, &designs::phase_rotate(&bad, &[0.0, 1.3]), 2, 1e-10).unwrap();
        assert!((r1.orthonormality_residual - r2.orthonormality_residual).abs() < 1e-12);
    }

    #[test]
    fn printed_matrix_for_haar_is_bounded_and_reported() {
        let (numra, bank) = haar();
        let m = modulation_matrix(&numra, &bank, &FieldElement::zero(), Normalization::QSqrtN, PhaseVariant::S).unwrap();
        assert_eq!(m.entries.nrows(), 4);
        let bound = bank.filters.iter().map(|f| f.iter().map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max) * 0.5;
        assert!(m.entries.iter().all(|v| v.norm() <= bound + 1e-15));
        let d = printed_matrix_diagnostics(&numra, &bank, 3, 1e-10).unwrap();
        assert_eq!(d.len(), 6);
        assert!(d.iter().all(|c| c.pass.is_none()));
    }
}
