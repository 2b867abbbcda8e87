//! Finitely supported sequences on Λ.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lambda::{LambdaIndex, Numra};

/// Serialized tap: {"eps", "n", "re", "im"}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub eps: u8,
    pub n: u64,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sequence {
    taps: BTreeMap<LambdaIndex, Complex64>,
}

impl Sequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn delta(at: LambdaIndex) -> Self {
        let mut s = Self::new();
        s.set(at, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_pairs<I: IntoIterator<Item = (LambdaIndex, Complex64)>>(pairs: I) -> Self {
        let mut s = Self::new();
        for (k, v) in pairs {
            s.add_at(k, v);
        }
        s
    }

    pub fn get(&self, idx: LambdaIndex) -> Complex64 {
        self.taps.get(&idx).copied().unwrap_or_default()
    }

    /// Stores the value; exact zeros are removed from the support.
    pub fn set(&mut self, idx: LambdaIndex, v: Complex64) {
        if v == Complex64::new(0.0, 0.0) {
            self.taps.remove(&idx);
        } else {
            self.taps.insert(idx, v);
        }
    }

    pub fn add_at(&mut self, idx: LambdaIndex, v: Complex64) {
        let cur = self.get(idx);
        self.set(idx, cur + v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (LambdaIndex, Complex64)> + '_ {
        self.taps.iter().map(|(&k, &v)| (k, v))
    }

    pub fn support(&self) -> impl Iterator<Item = LambdaIndex> + '_ {
        self.taps.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.taps.values().map(|v| v.norm_sqr()).sum()
    }

    /// ⟨z, w⟩ = Σ z(λ)·conj(w(λ)), iterating the sparser support.
    pub fn inner(&self, other: &Sequence) -> Complex64 {
        if self.len() <= other.len() {
            self.iter().filter_map(|(k, v)| other.taps.get(&k).map(|w| v * w.conj())).sum()
        } else {
            other.iter().filter_map(|(k, w)| self.taps.get(&k).map(|v| v * w.conj())).sum()
        }
    }

    pub fn scaled(&self, a: Complex64) -> Sequence {
        Sequence::from_pairs(self.iter().map(|(k, v)| (k, v * a)))
    }

    pub fn axpy(&mut self, a: Complex64, x: &Sequence) {
        for (k, v) in x.iter() {
            self.add_at(k, a * v);
        }
    }

    pub fn sub(&self, other: &Sequence) -> Sequence {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.taps.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest number of base-q digits among support indices.
    pub fn max_digits(&self, numra: &Numra) -> u32 {
        self.support().map(|k| numra.digits(k.n)).max().unwrap_or(0)
    }

    pub fn has_branch_one(&self) -> bool {
        self.support().any(|k| k.eps == 1)
    }

    /// T_{δ^level λ} z: (Tz)(σ) = z(σ − δ^level λ). Returns the translate and
    /// the number of taps whose target left Λ (dropped).
    pub fn translate(&self, numra: &Numra, lam: LambdaIndex, level: usize) -> Result<(Sequence, usize)> {
        let mut out = Sequence::new();
        let mut dropped = 0;
        for (tau, v) in self.iter() {
            match numra.translate_forward(tau, lam, level)? {
                Some(sigma) => out.add_at(sigma, v),
                None => dropped += 1,
            }
        }
        Ok((out, dropped))
    }

    pub fn to_taps(&self) -> Vec<Tap> {
        self.iter().map(|(k, v)| Tap { eps: k.eps, n: k.n, re: v.re, im: v.im }).collect()
    }

    pub fn from_taps(taps: &[Tap]) -> Sequence {
        Sequence::from_pairs(taps.iter().map(|t| (LambdaIndex::new(t.eps, t.n), Complex64::new(t.re, t.im))))
    }
}
