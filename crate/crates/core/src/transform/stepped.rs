//! Compact open regions, their cell grids, and locally constant functions.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField};
use crate::gf::GfElement;
use crate::lambda::Numra;

/// rep + 𝔅^k, with rep holding only exponents < k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    pub rep: FieldElement,
    pub k: i32,
}

impl Coset {
    pub fn new(rep: &FieldElement, k: i32) -> Self {
        Coset { rep: rep.truncated_below(k), k }
    }

    pub fn contains(&self, lf: &LocalField, x: &FieldElement) -> bool {
        let d = lf.sub(x, &self.rep);
        d.precision() >= self.k && d.truncated_below(self.k).is_zero()
    }

    pub fn measure(&self, q: u32) -> f64 {
        (q as f64).powi(-self.k)
    }

    /// All cells rep + Σ_{k≤e<m} c_e 𝔭^e, in lexicographic digit order.
    pub fn cells(&self, lf: &LocalField, m: i32) -> Result<Vec<FieldElement>> {
        if m < self.k {
            return Err(Error::Resolution { needed: self.k, got: m });
        }
        let q = lf.q() as u64;
        let width = (m - self.k) as u32;
        let count = q.checked_pow(width).filter(|&c| c <= 1 << 26).ok_or_else(|| {
            Error::Resolution { needed: self.k, got: m }
        })?;
        let base: Vec<(i32, GfElement)> = self.rep.terms().collect();
        (0..count)
            .map(|code| {
                let mut terms = base.clone();
                let mut t = code;
                // Most significant digit at the lowest exponent so the order
                // matches lexicographic order of the digit vector.
                for j in (0..width).rev() {
                    let d = (t % q) as u32;
                    t /= q;
                    if d != 0 {
                        terms.push((self.k + j as i32, GfElement::from_index(d)));
                    }
                }
                lf.from_terms(&terms)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Region {
    pub cosets: Vec<Coset>,
}

impl Region {
    pub fn new(cosets: Vec<Coset>) -> Self {
        Region { cosets }
    }

    /// 𝔅^k.
    pub fn ball(k: i32) -> Self {
        Region { cosets: vec![Coset::new(&FieldElement::zero(), k)] }
    }

    pub fn measure(&self, q: u32) -> f64 {
        self.cosets.iter().map(|c| c.measure(q)).sum()
    }

    pub fn min_k(&self) -> i32 {
        self.cosets.iter().map(|c| c.k).min().unwrap_or(0)
    }

    pub fn max_k(&self) -> i32 {
        self.cosets.iter().map(|c| c.k).max().unwrap_or(0)
    }

    /// Pairs (i, j) of overlapping cosets.
    pub fn overlaps(&self, lf: &LocalField) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.cosets.len() {
            for j in i + 1..self.cosets.len() {
                let (a, b) = (&self.cosets[i], &self.cosets[j]);
                let kmin = a.k.min(b.k);
                if lf.sub(&a.rep, &b.rep).truncated_below(kmin).is_zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn contains(&self, lf: &LocalField, x: &FieldElement) -> bool {
        self.cosets.iter().any(|c| c.contains(lf, x))
    }

    pub fn cells(&self, lf: &LocalField, m: i32) -> Result<Vec<FieldElement>> {
        let mut out = Vec::new();
        for c in &self.cosets {
            out.extend(c.cells(lf, m)?);
        }
        Ok(out)
    }
}

/// A function constant on the cells x + 𝔅^m of a region.
#[derive(Clone, Debug)]
pub struct SteppedFunction {
    m: i32,
    region: Region,
    reps: Vec<FieldElement>,
    values: Vec<Complex64>,
    lookup: HashMap<FieldElement, usize>,
}

impl SteppedFunction {
    /// Builds from explicit cells; representatives are canonicalized and
    /// duplicates rejected.
    pub fn new(m: i32, region: Region, cells: Vec<(FieldElement, Complex64)>) -> Result<Self> {
        let mut reps = Vec::with_capacity(cells.len());
        let mut values = Vec::with_capacity(cells.len());
        let mut lookup = HashMap::with_capacity(cells.len());
        for (rep, v) in cells {
            let rep = rep.truncated_below(m);
            if lookup.insert(rep.clone(), reps.len()).is_some() {
                return Err(Error::Config("duplicate cell representative".into()));
            }
            reps.push(rep);
            values.push(v);
        }
        Ok(SteppedFunction { m, region, reps, values, lookup })
    }

    /// Samples `f` at every cell representative of `region` at resolution m.
    pub fn sample<F>(lf: &LocalField, region: &Region, m: i32, f: F) -> Result<Self>
    where
        F: Fn(&FieldElement) -> Result<Complex64> + Sync,
    {
        use rayon::prelude::*;
        let reps = region.cells(lf, m)?;
        let values = reps.par_iter().map(&f).collect::<Result<Vec<_>>>()?;
        Self::new(m, region.clone(), reps.into_iter().zip(values).collect())
    }

    pub fn constant(lf: &LocalField, region: &Region, m: i32, v: Complex64) -> Result<Self> {
        Self::sample(lf, region, m, |_| Ok(v))
    }

    pub fn resolution(&self) -> i32 {
        self.m
    }
    pub fn region(&self) -> &Region {
        &self.region
    }
    pub fn len(&self) -> usize {
        self.reps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (&FieldElement, Complex64)> + '_ {
        self.reps.iter().zip(self.values.iter().copied())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value on the cell containing x; None outside the stored cells.
    pub fn eval(&self, x: &FieldElement) -> Result<Option<Complex64>> {
        if x.precision() < self.m {
            return Err(Error::Precision { exponent: self.m - 1, precision: x.precision() });
        }
        Ok(self.lookup.get(&x.truncated_below(self.m)).map(|&i| self.values[i]))
    }

    pub fn cell_measure(&self, q: u32) -> f64 {
        (q as f64).powi(-self.m)
    }

    pub fn integral(&self, q: u32) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.cell_measure(q)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = f(*v);
        }
        out
    }

    /// Max |f − g| over the cells of self (g evaluated at the same reps).
    pub fn max_diff(&self, other: &SteppedFunction) -> Result<f64> {
        let mut worst = 0.0f64;
        for (rep, v) in self.cells() {
            let w = other.eval(rep)?.ok_or_else(|| Error::Config("cell missing from comparison function".into()))?;
            worst = worst.max((v - w).norm());
        }
        Ok(worst)
    }
}

/// Which Ω a region descriptor stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaKind {
    /// 𝔇 when Λ = 𝒵, 𝔇 ∪ (ν + 𝔇) otherwise.
    Working,
    /// 𝔭𝔇 ∪ (𝔭ν + 𝔭𝔇).
    Literal,
}

#[derive(Clone, Debug)]
pub struct OmegaDomain {
    pub kind: OmegaKind,
    pub region: Region,
    pub warnings: Vec<String>,
}

impl OmegaDomain {
    pub fn working(numra: &Numra) -> Self {
        let zero = FieldElement::zero();
        let mut cosets = vec![Coset::new(&zero, 0)];
        if !numra.is_degenerate() {
            cosets.push(Coset::new(numra.nu(), 0));
        }
        OmegaDomain { kind: OmegaKind::Working, region: Region::new(cosets), warnings: Vec::new() }
    }

    pub fn literal(numra: &Numra) -> Self {
        let lf = numra.field();
        let zero = FieldElement::zero();
        let p_nu = lf.mul(&lf.prime_pow(1).expect("window holds 1"), numra.nu()).expect("nu is inside the window");
        let mut region = Region::new(vec![Coset::new(&zero, 1), Coset::new(&p_nu, 1)]);
        let mut warnings = Vec::new();
        if !region.overlaps(lf).is_empty() {
            warnings.push(format!(
                "DEGENERATE_OMEGA: the cosets pB and p*nu + pB coincide (p*nu = {}); Omega collapses to pB with measure 1/q",
                lf.format(&p_nu)
            ));
            region.cosets.truncate(1);
        }
        OmegaDomain { kind: OmegaKind::Literal, region, warnings }
    }

    pub fn measure(&self, q: u32) -> f64 {
        self.region.measure(q)
    }
}
