//! A generator family {T_{Dλ} g : λ ∈ Λ} rewritten as translates by the
//! subgroup H = D𝒵, and its fiber matrices over the annihilator of H.
//!
//! Since DΛ ⊂ 𝒵, T_{D(θ+u)} = T_{Du} T_{Dθ}, so the family equals
//! {T_h v : h ∈ H, v ∈ V} with V = {g} ∪ {T_{Dθ} g}. Each branch of Λ is a
//! copy of 𝒵 and H acts on both alike.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::lambda::{LambdaIndex, Numra};
use crate::transform::{chi_pair, Region, RootTable, Sequence};

const MAX_SHIFTS: u64 = 1 << 14;

#[derive(Clone, Debug)]
struct BranchPart {
    points: Vec<(FieldElement, Complex64)>,
}

#[derive(Clone, Debug)]
pub struct Generator {
    /// Index of the source sequence.
    pub source: usize,
    /// Translated by Dθ.
    pub theta_shifted: bool,
    parts: [BranchPart; 2],
}

#[derive(Clone, Debug)]
pub struct ShiftSystem<'a> {
    numra: &'a Numra,
    level: usize,
    dilation: FieldElement,
    shift_theta: Option<FieldElement>,
    sources: Vec<Sequence>,
    generators: Vec<Generator>,
    shifts: Vec<FieldElement>,
    roots: RootTable,
    resolution: i32,
}

impl<'a> ShiftSystem<'a> {
    pub fn new(numra: &'a Numra, sources: &[Sequence], level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::Config("level must be at least 1".into()));
        }
        let lf = numra.field();
        let dilation = numra.delta_pow(level)?.clone();
        let degree = -dilation.valuation().expect("nonzero");
        let m = numra.q().checked_pow(degree as u32).filter(|&m| m <= MAX_SHIFTS).ok_or_else(|| {
            Error::Window(format!("|delta^{level}| = q^{degree} gives too many fiber shifts"))
        })?;
        let dinv = numra.delta_inv_pow(level)?;
        let shifts = (0..m).map(|s| lf.mul(dinv, &numra.u_of(s)?)).collect::<Result<Vec<_>>>()?;
        let shift_theta = if numra.is_degenerate() { None } else { Some(lf.mul(&dilation, numra.theta())?) };

        let mut generators = Vec::new();
        let mut digits = 0i32;
        for (i, seq) in sources.iter().enumerate() {
            let mut parts = [BranchPart { points: Vec::new() }, BranchPart { points: Vec::new() }];
            for (k, v) in seq.iter() {
                if k.eps > 1 || (k.eps == 1 && numra.is_degenerate()) {
                    return Err(Error::Config(format!("tap ({}, {}) outside the index set", k.eps, k.n)));
                }
                digits = digits.max(numra.digits(k.n) as i32);
                parts[k.eps as usize].points.push((numra.u_of(k.n)?, v));
            }
            generators.push(Generator { source: i, theta_shifted: false, parts: parts.clone() });
            if shift_theta.is_some() {
                generators.push(Generator { source: i, theta_shifted: true, parts });
            }
        }
        let theta_digits = shift_theta.as_ref().and_then(|g| g.valuation()).map(|v| -v).unwrap_or(0);
        Ok(ShiftSystem {
            numra,
            level,
            dilation,
            shift_theta,
            sources: sources.to_vec(),
            generators,
            shifts,
            roots: RootTable::new(numra.p()),
            resolution: digits.max(theta_digits).max(0),
        })
    }

    pub fn numra(&self) -> &Numra {
        self.numra
    }
    pub fn level(&self) -> usize {
        self.level
    }
    pub fn dilation(&self) -> &FieldElement {
        &self.dilation
    }
    pub fn sources(&self) -> &[Sequence] {
        &self.sources
    }
    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }
    /// M = [𝒵 : H].
    pub fn shift_count(&self) -> usize {
        self.shifts.len()
    }
    pub fn shifts(&self) -> &[FieldElement] {
        &self.shifts
    }
    pub fn branches(&self) -> usize {
        self.numra.branches() as usize
    }
    /// Coarsest grid on which every fiber entry is constant per cell.
    pub fn required_resolution(&self) -> i32 {
        self.resolution
    }

    pub fn check_resolution(&self, m: i32) -> Result<()> {
        if m < self.resolution {
            return Err(Error::Resolution { needed: self.resolution, got: m });
        }
        Ok(())
    }

    /// Fourier transform over 𝒵 of branch c of a source sequence.
    pub fn branch_transform(&self, source: usize, c: usize, x: &FieldElement) -> Result<Complex64> {
        let g = self.generators.iter().find(|g| g.source == source).expect("source exists");
        self.eval_part(&g.parts[c], x)
    }

    fn eval_part(&self, part: &BranchPart, x: &FieldElement) -> Result<Complex64> {
        let lf = self.numra.field();
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, v) in &part.points {
            acc += v * self.roots.get(chi_pair(lf, u, x)?.conj());
        }
        Ok(acc)
    }

    /// v̂_{j,c}(x).
    pub fn generator_transform(&self, j: usize, c: usize, x: &FieldElement) -> Result<Complex64> {
        let g = &self.generators[j];
        let base = self.eval_part(&g.parts[c], x)?;
        if g.theta_shifted {
            let phase = chi_pair(self.numra.field(), self.shift_theta.as_ref().expect("nondegenerate"), x)?.conj();
            Ok(base * self.roots.get(phase))
        } else {
            Ok(base)
        }
    }

    /// P(ξ): rows (branch c, shift a), columns generators, entries
    /// v̂_{j,c}(ξ + a)/√M.
    pub fn fiber_matrix(&self, xi: &FieldElement) -> Result<DMatrix<Complex64>> {
        let lf = self.numra.field();
        let mq = self.shifts.len();
        let rows = self.branches() * mq;
        let scale = 1.0 / (mq as f64).sqrt();
        let mut p = DMatrix::from_element(rows, self.generators.len(), Complex64::new(0.0, 0.0));
        for (ai, a) in self.shifts.iter().enumerate() {
            let x = lf.add(xi, a);
            for c in 0..self.branches() {
                for j in 0..self.generators.len() {
                    p[(c * mq + ai, j)] = self.generator_transform(j, c, &x)? * scale;
                }
            }
        }
        Ok(p)
    }

    /// Cells of 𝔇 at resolution m.
    pub fn grid(&self, m: i32) -> Result<Vec<FieldElement>> {
        self.check_resolution(m)?;
        Region::ball(0).cells(self.numra.field(), m)
    }

    /// The translate T_{Dλ} of source k.
    pub fn translate(&self, source: usize, lam: LambdaIndex) -> Result<(Sequence, usize)> {
        self.sources[source].translate(self.numra, lam, self.level)
    }
}

/// max_{ij} |A_ij − c·δ_ij|.
pub fn deviation_from_scalar(a: &DMatrix<Complex64>, c: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let target = if i == j { c } else { 0.0 };
            worst = worst.max((a[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Mean diagonal of a square matrix (real part).
pub fn mean_diagonal(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows().min(a.ncols());
    if n == 0 {
        return 0.0;
    }
    (0..n).map(|i| a[(i, i)].re).sum::<f64>() / n as f64
}
