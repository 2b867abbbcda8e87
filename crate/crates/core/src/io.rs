//! JSON forms of banks, signals, decompositions and stepped functions.

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::cascade::DecompositionResult;
use crate::error::{Error, Result};
use crate::field::LocalField;
use crate::first_stage::{FilterBank, Normalization};
use crate::lambda::{Numra, NumraParams};
use crate::transform::{Coset, Region, Sequence, SteppedFunction, Tap};

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilterEntry {
    pub k: usize,
    pub taps: Vec<Tap>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BankFile {
    pub params: NumraParams,
    pub filters: Vec<FilterEntry>,
    #[serde(default)]
    pub normalization: Normalization,
}

impl BankFile {
    pub fn from_bank(bank: &FilterBank) -> Self {
        BankFile {
            params: bank.params.clone(),
            filters: bank.filters.iter().enumerate().map(|(k, f)| FilterEntry { k, taps: f.to_taps() }).collect(),
            normalization: bank.normalization,
        }
    }

    /// Filters are placed by `k`; every k in 0..qN must appear exactly once.
    pub fn to_bank(&self, numra: &Numra) -> Result<FilterBank> {
        let n = self.filters.len();
        let mut slots: Vec<Option<Sequence>> = vec![None; n];
        for f in &self.filters {
            let slot = slots.get_mut(f.k).ok_or_else(|| Error::Config(format!("filter index k = {} out of range 0..{n}", f.k)))?;
            if slot.is_some() {
                return Err(Error::Config(format!("filter index k = {} given twice", f.k)));
            }
            if let Some(t) = f.taps.iter().find(|t| !t.re.is_finite() || !t.im.is_finite()) {
                return Err(Error::Config(format!("non-finite tap at ({}, {}) in filter {}", t.eps, t.n, f.k)));
            }
            *slot = Some(Sequence::from_taps(&f.taps));
        }
        let bank = FilterBank {
            params: self.params.clone(),
            filters: slots.into_iter().map(|s| s.expect("all slots filled")).collect(),
            normalization: self.normalization,
        };
        bank.validate(numra)?;
        Ok(bank)
    }
}

pub fn read_bank(text: &str, numra: &Numra) -> Result<FilterBank> {
    parse::<BankFile>(text)?.to_bank(numra)
}

pub fn write_bank(bank: &FilterBank) -> String {
    to_json(&BankFile::from_bank(bank))
}

/// Signals are a bare array of taps.
pub fn read_signal(text: &str) -> Result<Sequence> {
    let taps: Vec<Tap> = parse(text)?;
    if let Some(t) = taps.iter().find(|t| !t.re.is_finite() || !t.im.is_finite()) {
        return Err(Error::Config(format!("non-finite tap at ({}, {})", t.eps, t.n)));
    }
    Ok(Sequence::from_taps(&taps))
}

pub fn write_signal(z: &Sequence) -> String {
    to_json(&z.to_taps())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetailEntry {
    pub level: usize,
    pub i: usize,
    pub taps: Vec<Tap>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub levels: usize,
    pub window: u32,
    pub approx: Vec<Tap>,
    pub details: Vec<DetailEntry>,
}

impl DecompositionFile {
    pub fn from_result(d: &DecompositionResult) -> Self {
        let details = d
            .details
            .iter()
            .enumerate()
            .flat_map(|(l, row)| row.iter().enumerate().map(move |(k, s)| DetailEntry { level: l + 1, i: k + 1, taps: s.to_taps() }))
            .collect();
        DecompositionFile { levels: d.levels, window: d.window, approx: d.approx.to_taps(), details }
    }

    pub fn to_result(&self, arity: usize) -> Result<DecompositionResult> {
        let mut d = DecompositionResult::zeros(self.levels, self.window, arity);
        d.approx = Sequence::from_taps(&self.approx);
        for e in &self.details {
            if e.level == 0 || e.level > self.levels || e.i == 0 || e.i >= arity {
                return Err(Error::Config(format!("detail band ({}, {}) out of range", e.level, e.i)));
            }
            d.details[e.level - 1][e.i - 1] = Sequence::from_taps(&e.taps);
        }
        Ok(d)
    }
}

/// Field elements as [[exponent, [digits]], ...].
pub type SparseElement = Vec<(i32, Vec<u32>)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetEntry {
    pub rep: SparseElement,
    pub k: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellEntry {
    pub rep: SparseElement,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteppedFile {
    pub resolution: i32,
    pub region: Vec<CosetEntry>,
    pub cells: Vec<CellEntry>,
}

impl SteppedFile {
    pub fn from_stepped(lf: &LocalField, f: &SteppedFunction) -> Self {
        SteppedFile {
            resolution: f.resolution(),
            region: f.region().cosets.iter().map(|c| CosetEntry { rep: lf.to_sparse(&c.rep), k: c.k }).collect(),
            cells: f.cells().map(|(x, v)| CellEntry { rep: lf.to_sparse(x), re: v.re, im: v.im }).collect(),
        }
    }

    pub fn to_stepped(&self, lf: &LocalField) -> Result<SteppedFunction> {
        let cosets = self
            .region
            .iter()
            .map(|c| Ok(Coset::new(&lf.from_sparse(&c.rep)?, c.k)))
            .collect::<Result<Vec<_>>>()?;
        let cells = self
            .cells
            .iter()
            .map(|c| Ok((lf.from_sparse(&c.rep)?, Complex64::new(c.re, c.im))))
            .collect::<Result<Vec<_>>>()?;
        SteppedFunction::new(self.resolution, Region::new(cosets), cells)
    }
}
