//! Analysis and synthesis along the cascade, fast (one bank per level) and
//! slow (direct inner products with h_{ℓ,i}).

use num_complex::Complex64;
use rayon::prelude::*;

use super::stages::WaveletStages;
use crate::error::{Error, Result};
use crate::lambda::{LambdaIndex, Numra};
use crate::transform::Sequence;

/// c(λ) = ⟨z, T_{δ^level λ} h⟩ for every λ whose translate meets supp z.
pub fn correlate(numra: &Numra, z: &Sequence, h: &Sequence, level: usize) -> Result<Sequence> {
    let taps: Vec<(LambdaIndex, Complex64)> = z.iter().collect();
    let parts = taps
        .par_iter()
        .map(|&(tau, zv)| {
            let mut out = Vec::new();
            for (kappa, hv) in h.iter() {
                if let Some(lam) = numra.preimage_index(tau, kappa, level)? {
                    out.push((lam, zv * hv.conj()));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = Sequence::new();
    for (lam, v) in parts.into_iter().flatten() {
        c.add_at(lam, v);
    }
    Ok(c)
}

/// Σ_λ c(λ)·T_{δ^level λ} h, with the number of taps that left Λ.
pub fn synthesize(numra: &Numra, c: &Sequence, h: &Sequence, level: usize) -> Result<(Sequence, usize)> {
    let coeffs: Vec<(LambdaIndex, Complex64)> = c.iter().collect();
    let parts = coeffs
        .par_iter()
        .map(|&(lam, cv)| {
            let (t, d) = h.translate(numra, lam, level)?;
            Ok((t.scaled(cv), d))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Sequence::new();
    let mut lost = 0;
    for (t, d) in parts {
        out.axpy(Complex64::new(1.0, 0.0), &t);
        lost += d;
    }
    Ok((out, lost))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult {
    pub levels: usize,
    pub window: u32,
    /// a_J.
    pub approx: Sequence,
    /// details[ℓ−1][i−1] = d_{ℓ,i}.
    pub details: Vec<Vec<Sequence>>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SubbandEnergy {
    pub band: String,
    pub level: usize,
    pub i: usize,
    pub energy: f64,
}

impl DecompositionResult {
    pub fn zeros(levels: usize, window: u32, arity: usize) -> Self {
        DecompositionResult {
            levels,
            window,
            approx: Sequence::new(),
            details: vec![vec![Sequence::new(); arity.saturating_sub(1)]; levels],
        }
    }

    /// Approximation first, then details by level and filter.
    pub fn subband_energies(&self) -> Vec<SubbandEnergy> {
        let mut out = vec![SubbandEnergy { band: format!("a{}", self.levels), level: self.levels, i: 0, energy: self.approx.norm_sq() }];
        for (l, row) in self.details.iter().enumerate() {
            for (k, d) in row.iter().enumerate() {
                out.push(SubbandEnergy { band: format!("d{}_{}", l + 1, k + 1), level: l + 1, i: k + 1, energy: d.norm_sq() });
            }
        }
        out
    }

    pub fn energy(&self) -> f64 {
        self.subband_energies().iter().map(|e| e.energy).sum()
    }

    pub fn max_diff(&self, other: &DecompositionResult) -> f64 {
        let mut worst = self.approx.sub(&other.approx).max_abs();
        for (a, b) in self.details.iter().zip(&other.details) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max(x.sub(y).max_abs());
            }
        }
        worst
    }
}

fn check_window(numra: &Numra, z: &Sequence, window: u32) -> Result<()> {
    let clipped: Vec<String> = z
        .support()
        .filter(|k| numra.digits(k.n) > window)
        .map(|k| format!("({}, {})", k.eps, k.n))
        .collect();
    if clipped.is_empty() {
        Ok(())
    } else {
        Err(Error::Window(format!("signal taps outside the window of {window} digits: {}", clipped.join(", "))))
    }
}

/// a_ℓ(λ) = Σ_σ conj(w_{ℓ,0}(σ−δλ))·a_{ℓ−1}(σ), likewise d_{ℓ,i} with w_{ℓ,i}.
pub fn dwt(numra: &Numra, z: &Sequence, stages: &WaveletStages, window: u32) -> Result<DecompositionResult> {
    check_window(numra, z, window)?;
    let mut a = z.clone();
    let mut details = Vec::with_capacity(stages.depth);
    for level in 1..=stages.depth {
        let bank = &stages.bank(level).filters;
        let mut row = Vec::with_capacity(bank.len() - 1);
        for w in &bank[1..] {
            row.push(correlate(numra, &a, w, 1)?);
        }
        a = correlate(numra, &a, &bank[0], 1)?;
        details.push(row);
    }
    Ok(DecompositionResult { levels: stages.depth, window, approx: a, details })
}

/// The same coefficients as direct inner products ⟨z, T_{δ^ℓ λ} h_{ℓ,i}⟩.
pub fn dwt_slow(numra: &Numra, z: &Sequence, stages: &WaveletStages, window: u32) -> Result<DecompositionResult> {
    check_window(numra, z, window)?;
    let mut details = Vec::with_capacity(stages.depth);
    for level in 1..=stages.depth {
        let hs = stages.filters(level);
        details.push(hs[1..].iter().map(|h| correlate(numra, z, h, level)).collect::<Result<Vec<_>>>()?);
    }
    let approx = correlate(numra, z, &stages.filters(stages.depth)[0], stages.depth)?;
    Ok(DecompositionResult { levels: stages.depth, window, approx, details })
}

/// a_{ℓ−1}(σ) = Σ_λ w_{ℓ,0}(σ−δλ)a_ℓ(λ) + Σ_{i≥1} Σ_λ w_{ℓ,i}(σ−δλ)d_{ℓ,i}(λ).
pub fn idwt(numra: &Numra, dec: &DecompositionResult, stages: &WaveletStages) -> Result<Sequence> {
    if dec.levels != stages.depth || dec.details.len() != stages.depth {
        return Err(Error::Mismatch(format!("decomposition has {} levels, stages have {}", dec.levels, stages.depth)));
    }
    let mut a = dec.approx.clone();
    for level in (1..=stages.depth).rev() {
        let bank = &stages.bank(level).filters;
        let row = &dec.details[level - 1];
        if row.len() + 1 != bank.len() {
            return Err(Error::Mismatch(format!("level {level} has {} detail bands, expected {}", row.len(), bank.len() - 1)));
        }
        let (mut next, mut lost) = synthesize(numra, &a, &bank[0], 1)?;
        for (w, d) in bank[1..].iter().zip(row) {
            let (s, l) = synthesize(numra, d, w, 1)?;
            next.axpy(Complex64::new(1.0, 0.0), &s);
            lost += l;
        }
        if lost > 0 {
            return Err(Error::OutOfLambda(format!("{lost} synthesis taps left Lambda at level {level}")));
        }
        a = next;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{build_stages, CascadeMode};
    use crate::first_stage::designs;
    use crate::lambda::NumraParams;

    fn haar_stages(depth: usize) -> (Numra, WaveletStages) {
        let numra = Numra::new(NumraParams::simple(2, 1, 1, 1, None).unwrap()).unwrap();
        let bank = designs::haar(&numra).unwrap();
        let s = build_stages(&numra, &[bank], depth, CascadeMode::FatherChain, true).unwrap();
        (numra, s)
    }

    #[test]
    fn haar_single_level_on_delta() {
        let (numra, s) = haar_stages(1);
        let d = dwt(&numra, &Sequence::delta(LambdaIndex::ORIGIN), &s, 4).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.approx.get(LambdaIndex::ORIGIN) - r).norm() < 1e-15);
        assert!((d.details[0][0].get(LambdaIndex::ORIGIN) - r).norm() < 1e-15);
        assert_eq!((d.approx.len(), d.details[0][0].len()), (1, 1));
    }

    #[test]
    fn zero_signal_and_zero_coefficients() {
        let (numra, s) = haar_stages(2);
        let d = dwt(&numra, &Sequence::new(), &s, 4).unwrap();
        assert_eq!(d, DecompositionResult::zeros(2, 4, 2));
        assert!(idwt(&numra, &d, &s).unwrap().is_empty());
    }

    #[test]
    fn coarse_generator_maps_to_a_delta() {
        let (numra, s) = haar_stages(3);
        let z = s.filters(3)[0].clone();
        let d = dwt(&numra, &z, &s, 4).unwrap();
        assert!(d.approx.sub(&Sequence::delta(LambdaIndex::ORIGIN)).max_abs() < 1e-12);
        assert!(d.details.iter().flatten().all(|x| x.max_abs() < 1e-12));
    }

    #[test]
    fn round_trip_and_fast_slow() {
        let (numra, s) = haar_stages(3);
        let z = designs::random_gaussian(&numra, 5, 9).unwrap().filters[0].clone();
        let d = dwt(&numra, &z, &s, 5).unwrap();
        assert!(idwt(&numra, &d, &s).unwrap().sub(&z).max_abs() < 1e-12);
        assert!((d.energy() - z.norm_sq()).abs() < 1e-10);
        assert!(d.max_diff(&dwt_slow(&numra, &z, &s, 5).unwrap()) < 1e-12);
    }

    #[test]
    fn window_overflow_names_taps() {
        let (numra, s) = haar_stages(1);
        let e = dwt(&numra, &Sequence::delta(LambdaIndex::z(40)), &s, 3).unwrap_err();
        assert!(e.to_string().contains("(0, 40)"));
    }
}
