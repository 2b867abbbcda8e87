//! Orthonormality of a stage, the V/W split, and approximation energy decay.

use serde::Serialize;

use super::dwt::{correlate, dwt};
use super::stages::WaveletStages;
use crate::error::{Error, Result};
use crate::first_stage::designs::{gaussian, rng};
use crate::first_stage::{gram_system, printed_sum_diagnostics, system_unitarity, ShiftSystem};
use crate::lambda::Numra;
use crate::report::CheckResult;
use crate::transform::Sequence;

fn check_level(stages: &WaveletStages, level: usize) -> Result<()> {
    if level == 0 || level > stages.depth {
        return Err(Error::Config(format!("level {level} not built (depth {})", stages.depth)));
    }
    Ok(())
}

/// Gram oracle and fiber oracle for {T_{δ^ℓ λ} h_{ℓ,i}}, plus the printed
/// shift sums at level ℓ as diagnostics. Completeness is only asked at ℓ = 1.
pub fn stage_orthonormality_check(
    numra: &Numra,
    stages: &WaveletStages,
    level: usize,
    window: u32,
    resolution: i32,
    threshold: f64,
) -> Result<Vec<CheckResult>> {
    check_level(stages, level)?;
    let hs = stages.filters(level);
    let complete = level == 1;
    let gram = gram_system(numra, hs, level, window, complete, threshold)?;
    let system = ShiftSystem::new(numra, hs, level)?;
    let fiber = system_unitarity(&system, resolution, complete, threshold)?;
    let mut out = vec![
        gram.to_check(&format!("stage{level}_gram")),
        fiber.to_check(&format!("stage{level}_fiber")),
    ];
    let grid = system.grid(resolution)?;
    out.extend(printed_sum_diagnostics(numra, hs, level, &grid, threshold, &format!("stage{level}_printed"))?);
    let mode = stages.mode.name();
    for c in &mut out {
        c.notes.push(format!("cascade_mode={mode}"));
        if stages.dropped[level - 1] > 0 {
            c.warnings.push(format!("OUT_OF_LAMBDA: {} taps dropped building this level", stages.dropped[level - 1]));
        }
    }
    Ok(out)
}

/// (‖P_V z‖², ‖P_W z‖²) at level ℓ, as coefficient energies against h_{ℓ,0}
/// and h_{ℓ,i}, i ≥ 1.
pub fn split_energies(numra: &Numra, stages: &WaveletStages, level: usize, z: &Sequence) -> Result<(f64, f64)> {
    check_level(stages, level)?;
    let hs = stages.filters(level);
    let ev = correlate(numra, z, &hs[0], level)?.norm_sq();
    let mut ew = 0.0;
    for h in &hs[1..] {
        ew += correlate(numra, z, h, level)?.norm_sq();
    }
    Ok((ev, ew))
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub level: usize,
    pub samples: usize,
    pub energy_residual: f64,
    pub cross_gram: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl SplitReport {
    pub fn to_check(&self) -> CheckResult {
        CheckResult::verdict(format!("stage{}_splitting", self.level), self.energy_residual.max(self.cross_gram), self.threshold)
            .with_note(format!(
                "samples={} energy_residual={:.3e} cross_gram={:.3e}",
                self.samples, self.energy_residual, self.cross_gram
            ))
    }
}

/// Random z = Σ c_λ T_{δ^{ℓ−1}λ} h_{ℓ−1,0} with λ in the window.
pub fn random_coarse_signal(numra: &Numra, stages: &WaveletStages, level: usize, window: u32, seed: u64) -> Result<Sequence> {
    let mut g = rng(seed);
    let mut z = Sequence::new();
    for lam in numra.index_set(window) {
        let c = gaussian(&mut g);
        if level == 1 {
            z.add_at(lam, c);
        } else {
            let (t, _) = stages.filters(level - 1)[0].translate(numra, lam, level - 1)?;
            z.axpy(c, &t);
        }
    }
    Ok(z)
}

pub fn splitting_check(
    numra: &Numra,
    stages: &WaveletStages,
    level: usize,
    window: u32,
    samples: usize,
    seed: u64,
    threshold: f64,
) -> Result<SplitReport> {
    check_level(stages, level)?;
    let mut energy_residual = 0.0f64;
    for k in 0..samples {
        let z = random_coarse_signal(numra, stages, level, window, seed.wrapping_add(k as u64))?;
        let (ev, ew) = split_energies(numra, stages, level, &z)?;
        let norm = z.norm_sq();
        energy_residual = energy_residual.max((ev + ew - norm).abs() / norm.max(1.0));
    }
    let hs = stages.filters(level);
    let mut cross_gram = 0.0f64;
    for h in &hs[1..] {
        cross_gram = cross_gram.max(correlate(numra, &hs[0], h, level)?.max_abs());
    }
    Ok(SplitReport {
        level,
        samples,
        energy_residual,
        cross_gram,
        threshold,
        pass: energy_residual < threshold && cross_gram < threshold,
    })
}

/// ‖a_J‖² for J = 1..depth with the largest increase as residual (diagnostic).
pub fn tail_energy_check(numra: &Numra, stages: &WaveletStages, z: &Sequence, window: u32, threshold: f64) -> Result<(Vec<f64>, CheckResult)> {
    let mut energies = Vec::with_capacity(stages.depth);
    for depth in 1..=stages.depth {
        let sub = WaveletStages {
            depth,
            h: stages.h[..depth].to_vec(),
            banks: stages.banks[..depth].to_vec(),
            dropped: stages.dropped[..depth].to_vec(),
            ..stages.clone()
        };
        energies.push(dwt(numra, z, &sub, window)?.approx.norm_sq());
    }
    let mut rise = 0.0f64;
    let mut prev = z.norm_sq();
    for &e in &energies {
        rise = rise.max(e - prev);
        prev = e;
    }
    let list: Vec<String> = energies.iter().map(|e| format!("{e:.6e}")).collect();
    let c = CheckResult::diagnostic("tail_energy", rise.max(0.0), threshold)
        .with_constant(z.norm_sq())
        .with_note(format!("approximation energies by level: [{}]", list.join(", ")));
    Ok((energies, c))
}
