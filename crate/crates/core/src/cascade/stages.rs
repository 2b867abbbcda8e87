//! Cascaded filters h_{ℓ,i} built from per-level banks by the two-scale relation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::first_stage::FilterBank;
use crate::lambda::{LambdaIndex, Numra, MAX_LEVEL};
use crate::report::CheckResult;
use crate::transform::{Region, Sequence, Spectrum};

/// Which earlier filter each new level is hung from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CascadeMode {
    /// h_{ℓ,i} from h_{ℓ−1,0}, so that all levels refine the same V chain.
    #[default]
    #[serde(alias = "father_chain")]
    FatherChain,
    /// h_{ℓ,i} from h_{ℓ−1,i}.
    #[serde(alias = "paper_literal")]
    PaperLiteral,
}

impl CascadeMode {
    pub fn name(self) -> &'static str {
        match self {
            CascadeMode::FatherChain => "fatherchain",
            CascadeMode::PaperLiteral => "paperliteral",
        }
    }
}

#[derive(Clone, Debug)]
pub struct WaveletStages {
    pub depth: usize,
    pub mode: CascadeMode,
    /// banks[ℓ−1] is used at level ℓ.
    pub banks: Vec<FilterBank>,
    /// h[ℓ−1][i] = h_{ℓ,i}.
    pub h: Vec<Vec<Sequence>>,
    /// Taps lost per level because a translate left Λ.
    pub dropped: Vec<usize>,
    pub warnings: Vec<String>,
}

impl WaveletStages {
    pub fn bank(&self, level: usize) -> &FilterBank {
        &self.banks[level - 1]
    }

    pub fn filters(&self, level: usize) -> &[Sequence] {
        &self.h[level - 1]
    }

    pub fn support_digits(&self, numra: &Numra, level: usize) -> u32 {
        self.h[level - 1].iter().map(|s| s.max_digits(numra)).max().unwrap_or(0)
    }
}

/// A single bank is reused at every level; otherwise one bank per level.
pub fn build_stages(numra: &Numra, banks: &[FilterBank], depth: usize, mode: CascadeMode, strict: bool) -> Result<WaveletStages> {
    if depth == 0 || depth > MAX_LEVEL {
        return Err(Error::Config(format!("stage depth must be in 1..={MAX_LEVEL}, got {depth}")));
    }
    let banks: Vec<FilterBank> = match banks.len() {
        1 => vec![banks[0].clone(); depth],
        n if n == depth => banks.to_vec(),
        n => return Err(Error::Config(format!("{n} banks given for {depth} levels"))),
    };
    for b in &banks {
        b.validate(numra)?;
    }
    numra.delta_pow(depth)?;

    let mut h = vec![banks[0].filters.clone()];
    let mut dropped = vec![0];
    let mut warnings = Vec::new();
    for level in 2..=depth {
        let prev = &h[level - 2];
        let results: Vec<(Sequence, usize)> = banks[level - 1]
            .filters
            .par_iter()
            .enumerate()
            .map(|(i, w)| {
                let base = match mode {
                    CascadeMode::FatherChain => &prev[0],
                    CascadeMode::PaperLiteral => &prev[i],
                };
                two_scale(numra, w, base, level - 1)
            })
            .collect::<Result<Vec<_>>>()?;
        let lost: usize = results.iter().map(|r| r.1).sum();
        if lost > 0 {
            let msg = format!("OUT_OF_LAMBDA: {lost} taps dropped while building level {level}");
            if strict {
                return Err(Error::OutOfLambda(msg));
            }
            warnings.push(msg);
        }
        dropped.push(lost);
        h.push(results.into_iter().map(|r| r.0).collect());
    }
    Ok(WaveletStages { depth, mode, banks, h, dropped, warnings })
}

/// Σ_σ w(σ)·T_{δ^shift_level σ} base, with the count of dropped taps.
pub fn two_scale(numra: &Numra, w: &Sequence, base: &Sequence, shift_level: usize) -> Result<(Sequence, usize)> {
    let mut out = Sequence::new();
    let mut lost = 0;
    for (sigma, a) in w.iter() {
        let (t, d) = base.translate(numra, sigma, shift_level)?;
        out.axpy(a, &t);
        lost += d;
    }
    Ok((out, lost))
}

/// ĥ_{ℓ,i}(ξ) against ĥ_{ℓ−1,·}(ξ)·ŵ_{ℓ,i}(δ^{ℓ−1}ξ) on the cells of 𝔅⁻¹ at resolution 3.
pub fn frequency_product_check(numra: &Numra, stages: &WaveletStages, level: usize, threshold: f64) -> Result<CheckResult> {
    if level == 0 || level > stages.depth {
        return Err(Error::Config(format!("level {level} not built")));
    }
    let lf = numra.field();
    let cells = Region::ball(1).cells(lf, 3)?;
    let dil = if level == 1 { lf.one() } else { numra.delta_pow(level - 1)?.clone() };
    let mut worst = 0.0f64;
    for (i, h) in stages.filters(level).iter().enumerate() {
        let lhs = Spectrum::new(numra, h)?;
        let w = Spectrum::new(numra, &stages.bank(level).filters[i])?;
        let prev = if level == 1 {
            None
        } else {
            let src = match stages.mode {
                CascadeMode::FatherChain => 0,
                CascadeMode::PaperLiteral => i,
            };
            Some(Spectrum::new(numra, &stages.filters(level - 1)[src])?)
        };
        let dev = cells
            .par_iter()
            .map(|xi| {
                let base = match &prev {
                    Some(p) => p.eval(numra, xi)?,
                    None => Complex64::new(1.0, 0.0),
                };
                let rhs = base * w.eval(numra, &lf.mul(&dil, xi)?)?;
                Ok((lhs.eval(numra, xi)? - rhs).norm())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    let mut c = CheckResult::verdict(format!("stage{level}_frequency_product"), worst, threshold);
    if stages.dropped[level - 1] > 0 {
        c.warnings.push(format!("OUT_OF_LAMBDA: {} taps were dropped at this level", stages.dropped[level - 1]));
    }
    Ok(c)
}

/// h_{0,0} = δ at the origin.
pub fn level_zero() -> Sequence {
    Sequence::delta(LambdaIndex::ORIGIN)
}
