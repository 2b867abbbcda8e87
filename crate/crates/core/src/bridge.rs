//! Filter banks on Λ and their symbols m_ℓ = ŵ_ℓ/√(qN) on K.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::first_stage::{periodic_split, FilterBank, PeriodicSplit, ShiftedSums, SumPhase};
use crate::lambda::Numra;
use crate::report::CheckResult;
use crate::transform::{inverse_on_omega, OmegaDomain, Region, Sequence, Spectrum, SteppedFunction};

#[derive(Clone, Debug)]
pub struct SymbolFunction {
    pub source: Sequence,
    pub split: PeriodicSplit,
    scale: f64,
    full: Spectrum,
    parts: [Spectrum; 2],
}

impl SymbolFunction {
    pub fn new(numra: &Numra, w: &Sequence) -> Result<Self> {
        let split = periodic_split(w);
        Ok(SymbolFunction {
            source: w.clone(),
            scale: 1.0 / (numra.arity() as f64).sqrt(),
            full: Spectrum::new(numra, w)?,
            parts: [Spectrum::new(numra, &split.part0)?, Spectrum::new(numra, &split.part1)?],
            split,
        })
    }

    pub fn eval(&self, numra: &Numra, xi: &FieldElement) -> Result<Complex64> {
        Ok(self.full.eval(numra, xi)? * self.scale)
    }

    /// m_{ℓc}: the 𝔭-periodic parts.
    pub fn eval_part(&self, numra: &Numra, c: usize, xi: &FieldElement) -> Result<Complex64> {
        Ok(self.parts[c].eval(numra, xi)? * self.scale)
    }

    /// Cells at this resolution carry a constant value.
    pub fn resolution(&self) -> i32 {
        self.full.resolution()
    }

    pub fn sample(&self, numra: &Numra, region: &Region, m: i32) -> Result<SteppedFunction> {
        let need = self.resolution().max(region.max_k());
        if m < need {
            return Err(Error::Resolution { needed: need, got: m });
        }
        SteppedFunction::sample(numra.field(), region, m, |xi| self.eval(numra, xi))
    }
}

pub fn symbols_from_bank(numra: &Numra, bank: &FilterBank) -> Result<Vec<SymbolFunction>> {
    bank.validate(numra)?;
    bank.filters.iter().map(|w| SymbolFunction::new(numra, w)).collect()
}

/// Each symbol sampled on Ω at resolution m.
pub fn symbols_as_stepped(numra: &Numra, symbols: &[SymbolFunction], omega: &OmegaDomain, m: i32) -> Result<Vec<SteppedFunction>> {
    symbols.iter().map(|s| s.sample(numra, &omega.region, m)).collect()
}

#[derive(Clone, Debug)]
pub struct RecoveredBank {
    pub bank: FilterBank,
    /// max over symbols and cells of |resynthesized − input|.
    pub residual: f64,
    pub warnings: Vec<String>,
}

impl RecoveredBank {
    pub fn to_check(&self, threshold: f64) -> CheckResult {
        CheckResult::verdict("bridge_reconstruction", self.residual, threshold).with_warnings(self.warnings.clone())
    }
}

/// w_ℓ(λ) = √(qN)/|Ω| · ∫_Ω m_ℓ χ_λ for λ with n < q^window, then the
/// symbols are resynthesized from the taps and compared with the input.
pub fn filters_from_numra(
    numra: &Numra,
    symbols: &[SteppedFunction],
    omega: &OmegaDomain,
    window: u32,
    threshold: f64,
) -> Result<RecoveredBank> {
    if symbols.len() != numra.arity() {
        return Err(Error::Config(format!("{} symbols given, expected qN = {}", symbols.len(), numra.arity())));
    }
    let q = numra.q() as u32;
    let c = omega.measure(q);
    let scale = (numra.arity() as f64).sqrt() / c;
    let lambdas = numra.index_set(window);
    let filters = symbols
        .iter()
        .map(|f| {
            if f.region() != &omega.region {
                return Err(Error::Mismatch("symbol is not defined on the configured fundamental region".into()));
            }
            let taps = lambdas
                .par_iter()
                .map(|&l| Ok((l, inverse_on_omega(numra, f, l)? * scale)))
                .collect::<Result<Vec<_>>>()?;
            let mut s = Sequence::new();
            for (l, v) in taps {
                if v.norm() > 1e-15 {
                    s.set(l, v);
                }
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let bank = FilterBank::new(numra, filters)?;
    let mut residual = 0.0f64;
    for (f, w) in symbols.iter().zip(&bank.filters) {
        let re = SymbolFunction::new(numra, w)?;
        let synth = SteppedFunction::sample(numra.field(), f.region(), f.resolution(), |xi| re.eval(numra, xi))?;
        residual = residual.max(synth.max_diff(f)?);
    }
    let mut warnings = omega.warnings.clone();
    if residual >= threshold {
        warnings.push(format!("TRUNCATION: resynthesized symbols differ by {residual:.3e}; content outside the {window}-digit window or non-orthogonal characters"));
    }
    Ok(RecoveredBank { bank, residual, warnings })
}

/// Π_{j=1}^J m₀(δ^{−j}ξ) per cell of the region, without the indicator factor.
pub fn cascade_partial_products(numra: &Numra, m0: &SymbolFunction, depth: usize, region: &Region, m: i32) -> Result<Vec<SteppedFunction>> {
    if depth == 0 {
        return Err(Error::Config("cascade depth must be at least 1".into()));
    }
    let lf = numra.field();
    let invs = (1..=depth).map(|j| numra.delta_inv_pow(j).cloned()).collect::<Result<Vec<_>>>()?;
    let cells = region.cells(lf, m)?;
    let rows = cells
        .par_iter()
        .map(|xi| {
            let mut acc = Complex64::new(1.0, 0.0);
            let mut out = Vec::with_capacity(depth);
            for d in &invs {
                acc *= m0.eval(numra, &lf.mul(d, xi)?)?;
                out.push(acc);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    (0..depth)
        .map(|j| SteppedFunction::new(m, region.clone(), cells.iter().cloned().zip(rows.iter().map(|r| r[j])).collect()))
        .collect()
}

/// Π_{j=1}^J m₀(δ^{−j}ξ)·1_𝔇(δ^{−J}ξ): the J-step approximation of ψ̂₀ from
/// the seed 1_𝔇.
pub fn cascade_spectrum(numra: &Numra, m0: &SymbolFunction, depth: usize, region: &Region, m: i32) -> Result<SteppedFunction> {
    let lf = numra.field();
    let partial = cascade_partial_products(numra, m0, depth, region, m)?.pop().expect("depth >= 1");
    let d = numra.delta_inv_pow(depth)?;
    let cells = partial
        .cells()
        .map(|(xi, v)| {
            let y = lf.mul(d, xi)?;
            let inside = y.valuation().is_none_or(|v| v >= 0);
            Ok((xi.clone(), if inside { v } else { Complex64::new(0.0, 0.0) }))
        })
        .collect::<Result<Vec<_>>>()?;
    SteppedFunction::new(m, region.clone(), cells)
}

/// Partial products at J and J+1 differ by exactly the factor m₀(δ^{−J−1}ξ).
pub fn telescoping_check(numra: &Numra, m0: &SymbolFunction, depth: usize, region: &Region, m: i32) -> Result<CheckResult> {
    let lf = numra.field();
    let products = cascade_partial_products(numra, m0, depth + 1, region, m)?;
    let d = numra.delta_inv_pow(depth + 1)?;
    let mut worst = 0.0f64;
    for ((xi, a), (_, b)) in products[depth - 1].cells().zip(products[depth].cells()) {
        let factor = m0.eval(numra, &lf.mul(d, xi)?)?;
        worst = worst.max((a * factor - b).norm());
    }
    Ok(CheckResult::verdict("cascade_telescoping", worst, 1e-15).with_note(format!("J={depth}")))
}

/// Orthonormality conditions on the periodic parts m_{ℓ0}, m_{ℓ1} over the
/// shifts u(t)/δ, target δ_ℓk and 0. The printed form repeats the m_{ℓ0}
/// term; the corrected form pairs m_{ℓ0} with m_{ℓ1}. Both are diagnostics.
pub fn symbol_conditions(numra: &Numra, symbols: &[SymbolFunction], resolution: i32, threshold: f64) -> Result<Vec<CheckResult>> {
    let lf = numra.field();
    let sums = ShiftedSums::new(numra, 1)?;
    let grid = Region::ball(0).cells(lf, resolution)?;
    let n = symbols.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for (label, corrected) in [("printed", false), ("corrected", true)] {
        for (tag, phase) in [("a", SumPhase::None), ("b", SumPhase::Conj)] {
            let worst = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let target = if phase == SumPhase::None && i == j { 1.0 } else { 0.0 };
                    let mut w = 0.0f64;
                    for xi in &grid {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for t in 0..sums.count() {
                            let x = lf.add(xi, sums.shift(t));
                            let t0 = symbols[i].eval_part(numra, 0, &x)? * symbols[j].eval_part(numra, 0, &x)?.conj();
                            let t1 = if corrected {
                                symbols[i].eval_part(numra, 1, &x)? * symbols[j].eval_part(numra, 1, &x)?.conj()
                            } else {
                                t0
                            };
                            acc += sums.phase(t, phase) * (t0 + t1);
                        }
                        w = w.max((acc - Complex64::new(target, 0.0)).norm());
                    }
                    Ok(w)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let mut c = CheckResult::diagnostic(format!("symbol_{label}_{tag}"), worst, threshold);
            if phase == SumPhase::Conj && numra.is_degenerate() {
                c.warnings.push("VACUOUS: Lambda is degenerate, the coset condition does not apply".into());
            }
            out.push(c);
        }
    }
    Ok(out)
}
