//! Filter banks and the split of a sequence along the two cosets of Λ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::lambda::{LambdaIndex, Numra, NumraParams};
use crate::transform::{chi_pair, RootTable, Sequence, Spectrum};

/// Prefactor used by the printed modulation matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// 1/(q√N)
    #[default]
    QSqrtN,
    /// 1/√(qN)
    SqrtQN,
}

impl Normalization {
    pub fn prefactor(self, q: u64, n: u64) -> f64 {
        match self {
            Normalization::QSqrtN => 1.0 / (q as f64 * (n as f64).sqrt()),
            Normalization::SqrtQN => 1.0 / ((q * n) as f64).sqrt(),
        }
    }
}

/// qN filters w₀ (father) … w_{qN−1}.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    pub params: NumraParams,
    pub filters: Vec<Sequence>,
    pub normalization: Normalization,
}

impl FilterBank {
    pub fn new(numra: &Numra, filters: Vec<Sequence>) -> Result<Self> {
        let bank = FilterBank { params: numra.params().clone(), filters, normalization: Normalization::default() };
        bank.validate(numra)?;
        Ok(bank)
    }

    pub fn validate(&self, numra: &Numra) -> Result<()> {
        let p = numra.params();
        if self.params.field != p.field || self.params.n != p.n || self.params.r != p.r || self.params.policy() != numra.policy() {
            return Err(Error::Mismatch("filter bank parameters differ from the run configuration".into()));
        }
        if self.filters.len() != numra.arity() {
            return Err(Error::Config(format!("bank has {} filters, expected qN = {}", self.filters.len(), numra.arity())));
        }
        if numra.is_degenerate() && self.filters.iter().any(|f| f.has_branch_one()) {
            return Err(Error::Config("taps with eps = 1 given, but Lambda is degenerate (theta in Z)".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn scaled(&self, a: f64) -> FilterBank {
        FilterBank { filters: self.filters.iter().map(|f| f.scaled(Complex64::new(a, 0.0))).collect(), ..self.clone() }
    }

    pub fn max_digits(&self, numra: &Numra) -> u32 {
        self.filters.iter().map(|f| f.max_digits(numra)).max().unwrap_or(0)
    }
}

/// z = z₀ on 𝒵 plus z₁ moved to θ + 𝒵; both parts indexed on branch 0.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PeriodicSplit {
    pub part0: Sequence,
    pub part1: Sequence,
}

pub fn periodic_split(z: &Sequence) -> PeriodicSplit {
    let mut s = PeriodicSplit::default();
    for (k, v) in z.iter() {
        let target = if k.eps == 0 { &mut s.part0 } else { &mut s.part1 };
        target.set(LambdaIndex::z(k.n), v);
    }
    s
}

impl PeriodicSplit {
    /// ẑ₀(ξ) + conj χ(θξ)·ẑ₁(ξ).
    pub fn reassemble(&self, numra: &Numra, xi: &FieldElement) -> Result<Complex64> {
        let a = Spectrum::new(numra, &self.part0)?.eval(numra, xi)?;
        if self.part1.is_empty() {
            return Ok(a);
        }
        let b = Spectrum::new(numra, &self.part1)?.eval(numra, xi)?;
        let phase = chi_pair(numra.field(), numra.theta(), xi)?.conj();
        Ok(a + RootTable::new(numra.p()).get(phase) * b)
    }
}
