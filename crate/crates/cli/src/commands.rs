use std::path::Path;

use num_complex::Complex64;
use serde_json::json;

use localwave::bridge::{self, SymbolFunction};
use localwave::cascade::{self, WaveletStages};
use localwave::first_stage::{self, designs, FilterBank, ShiftSystem};
use localwave::io::{self, BankFile, DecompositionFile, SteppedFile};
use localwave::lambda::Numra;
use localwave::report::CheckResult;
use localwave::transform::{check_character_basis, OmegaDomain, Region, Sequence};

use crate::{read_file, CliError, Report, RunConfig};

/// (main output, side output, exit code).
pub type CommandOutput = (String, String, i32);

fn numra(cfg: &RunConfig) -> Result<Numra, CliError> {
    Ok(Numra::new(cfg.params.clone())?)
}

fn load_bank(cfg: &RunConfig, numra: &Numra, path: &Path) -> Result<FilterBank, CliError> {
    let mut bank = io::read_bank(&read_file(path)?, numra)?;
    bank.normalization = cfg.normalization;
    Ok(bank)
}

fn finish(report: Report) -> CommandOutput {
    let code = if report.pass { 0 } else { 1 };
    let side = if report.failing.is_empty() {
        String::new()
    } else {
        format!("failing checks: {}\n", report.failing.join(", "))
    };
    (io::to_json(&report) + "\n", side, code)
}

fn field_summary(cfg: &RunConfig, numra: &Numra) -> serde_json::Value {
    let lf = numra.field();
    json!({
        "p": numra.p(),
        "c": cfg.params.field.c,
        "q": numra.q(),
        "modulus": cfg.params.field.modulus,
        "N": cfg.params.n,
        "r": cfg.params.r,
        "nu_policy": numra.policy(),
        "arity": numra.arity(),
        "branches": numra.branches(),
        "nu": lf.format(numra.nu()),
        "theta": lf.format(numra.theta()),
        "delta": lf.format(numra.delta()),
        "delta_degree": numra.delta_degree(),
        "degenerate": numra.is_degenerate(),
        "lambda": if numra.is_degenerate() { "Z" } else { "Z ∪ (theta + Z)" },
    })
}

fn basis_checks(cfg: &RunConfig, numra: &Numra) -> Result<(CheckResult, CheckResult), CliError> {
    let working = check_character_basis(numra, cfg.window, &OmegaDomain::working(numra))?;
    let literal = check_character_basis(numra, cfg.window, &OmegaDomain::literal(numra))?;
    let mut w = working.to_check(cfg.tolerance);
    w.pass = Some(working.exact_orthogonal);
    Ok((w, literal.to_check(cfg.tolerance)))
}

pub fn field_info(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let numra = numra(cfg)?;
    let (mut w, l) = basis_checks(cfg, &numra)?;
    // field-info only reports; the verdict belongs to basis-check.
    w.pass = None;
    let report = Report::new("field-info", cfg, vec![w, l], numra.warnings().to_vec(), field_summary(cfg, &numra));
    let (main, _, _) = finish(report);
    Ok((main, String::new(), 0))
}

pub fn basis_check(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let numra = numra(cfg)?;
    let (w, l) = basis_checks(cfg, &numra)?;
    Ok(finish(Report::new("basis-check", cfg, vec![w, l], numra.warnings().to_vec(), field_summary(cfg, &numra))))
}

fn random_signal(numra: &Numra, window: u32, seed: u64) -> Sequence {
    let mut g = designs::rng(seed);
    Sequence::from_pairs(numra.index_set(window).into_iter().map(|l| (l, designs::gaussian(&mut g))))
}

fn required_resolution(numra: &Numra, sources: &[Sequence], level: usize) -> Result<i32, CliError> {
    Ok(ShiftSystem::new(numra, sources, level)?.required_resolution())
}

fn build(cfg: &RunConfig, numra: &Numra, bank: &FilterBank, depth: usize) -> Result<WaveletStages, CliError> {
    if depth == 0 {
        return Err(CliError::Usage("--stage must be at least 1".into()));
    }
    Ok(cascade::build_stages(numra, std::slice::from_ref(bank), depth, cfg.cascade_mode, cfg.strict)?)
}

pub fn verify(cfg: &RunConfig, bank_path: &Path, depth: usize) -> Result<CommandOutput, CliError> {
    let numra = numra(cfg)?;
    let bank = load_bank(cfg, &numra, bank_path)?;
    let tol = cfg.tolerance;
    let mut warnings = numra.warnings().to_vec();

    let degree = numra.delta_degree().max(0) as u32;
    let window = cfg.window.max(bank.max_digits(&numra)).max(degree);
    if window != cfg.window {
        warnings.push(format!("WINDOW_RAISED: window {} -> {window} to cover the filter support and coset representatives", cfg.window));
    }
    let need = required_resolution(&numra, &bank.filters, 1)?;
    let resolution = cfg.resolution.max(need);
    if resolution != cfg.resolution {
        warnings.push(format!("RESOLUTION_RAISED: resolution {} -> {resolution} so the transforms are constant on cells", cfg.resolution));
    }

    let mut checks = Vec::new();
    let eq = first_stage::oracle_equivalence(&numra, &bank, window, resolution, tol)?;
    checks.push(eq.gram.to_check("gram_oracle"));
    checks.push(eq.unitarity.to_check("unitarity"));
    checks.push(eq.to_check());
    checks.extend(first_stage::onb_conditions_check(&numra, &bank, resolution, tol)?);
    checks.extend(first_stage::printed_matrix_diagnostics(&numra, &bank, resolution, tol)?);
    checks.push(first_stage::m0_periodicity_check(&numra, &bank, resolution, tol)?);

    let stages = build(cfg, &numra, &bank, depth)?;
    warnings.extend(stages.warnings.iter().cloned());
    for level in 2..=depth {
        let hs = stages.filters(level);
        let res = resolution.max(required_resolution(&numra, hs, level)?);
        checks.extend(cascade::stage_orthonormality_check(&numra, &stages, level, window, res, tol)?);
        checks.push(cascade::frequency_product_check(&numra, &stages, level, tol)?);
        // The coarse test signals are built from translates of h_{ℓ−1,0}; a
        // small window keeps the cost flat in J.
        let split = cascade::splitting_check(&numra, &stages, level, window.min(2), 5, cfg.seed, tol)?;
        checks.push(split.to_check());
    }

    let z = random_signal(&numra, window, cfg.seed);
    let fast = cascade::dwt(&numra, &z, &stages, window)?;
    let slow = cascade::dwt_slow(&numra, &z, &stages, window)?;
    checks.push(CheckResult::verdict("dwt_fast_slow", fast.max_diff(&slow), tol).with_note(format!("seed={}", cfg.seed)));
    let energy_gap = (fast.energy() - z.norm_sq()).abs() / z.norm_sq().max(1.0);
    checks.push(CheckResult::verdict("decomposition_energy", energy_gap, tol).with_constant(z.norm_sq()));
    let round_trip = match cascade::idwt(&numra, &fast, &stages) {
        Ok(back) => CheckResult::verdict("decomposition_round_trip", back.sub(&z).max_abs(), tol),
        Err(e) => CheckResult::verdict("decomposition_round_trip", f64::INFINITY, tol).with_warnings([e.to_string()]),
    };
    checks.push(round_trip);
    let (_, tail) = cascade::tail_energy_check(&numra, &stages, &z, window, tol)?;
    checks.push(tail);

    let data = json!({
        "stage": depth,
        "window": window,
        "resolution": resolution,
        "cascade_mode": stages.mode.name(),
        "dropped_taps": stages.dropped,
        "subband_energies": fast.subband_energies(),
    });
    Ok(finish(Report::new("verify", cfg, checks, warnings, data)))
}

fn energy_table(rows: &[cascade::SubbandEnergy], input: f64) -> String {
    let mut s = String::from("band\tenergy\n");
    for r in rows {
        s.push_str(&format!("{}\t{:.12e}\n", r.band, r.energy));
    }
    let total: f64 = rows.iter().map(|r| r.energy).sum();
    s.push_str(&format!("total\t{total:.12e}\ninput\t{input:.12e}\n"));
    s
}

/// Window overflow is a transform failure (exit 1), not a usage error.
fn window_failure(e: localwave::Error) -> CliError {
    match e {
        localwave::Error::Window(m) => CliError::Failed(m),
        other => CliError::Core(other),
    }
}

pub fn transform(
    cfg: &RunConfig,
    bank_path: &Path,
    signal_path: &Path,
    depth: usize,
    inverse: bool,
    force: bool,
) -> Result<CommandOutput, CliError> {
    let numra = numra(cfg)?;
    let bank = load_bank(cfg, &numra, bank_path)?;
    if !force {
        let degree = numra.delta_degree().max(0) as u32;
        let window = cfg.window.max(bank.max_digits(&numra)).max(degree);
        let gram = first_stage::gram_oracle(&numra, &bank, window, cfg.tolerance)?;
        if !gram.pass {
            return Err(CliError::Failed(format!(
                "bank fails the orthonormality check (residual {:.3e}); pass --force to transform anyway",
                gram.residual
            )));
        }
    }
    let stages = build(cfg, &numra, &bank, depth)?;
    let text = read_file(signal_path)?;
    if inverse {
        let dec = io::parse::<DecompositionFile>(&text)?.to_result(numra.arity())?;
        let z = cascade::idwt(&numra, &dec, &stages)?;
        let table = energy_table(&dec.subband_energies(), z.norm_sq());
        return Ok((io::write_signal(&z) + "\n", table, 0));
    }
    let z = io::read_signal(&text)?;
    let dec = cascade::dwt(&numra, &z, &stages, cfg.window).map_err(window_failure)?;
    let table = energy_table(&dec.subband_energies(), z.norm_sq());
    Ok((io::to_json(&DecompositionFile::from_result(&dec)) + "\n", table, 0))
}

pub fn bridge(cfg: &RunConfig, bank_path: &Path, depth: usize) -> Result<CommandOutput, CliError> {
    if depth == 0 {
        return Err(CliError::Usage("--stage must be at least 1".into()));
    }
    let numra = numra(cfg)?;
    let bank = load_bank(cfg, &numra, bank_path)?;
    let tol = cfg.tolerance;
    let lf = numra.field();
    let mut warnings = numra.warnings().to_vec();

    let symbols = bridge::symbols_from_bank(&numra, &bank)?;
    let window = cfg.window.max(bank.max_digits(&numra));
    // Cells must resolve both the symbols and every character χ_λ recovered on the window.
    let mut need = symbols.iter().map(SymbolFunction::resolution).max().unwrap_or(0);
    for lam in numra.index_set(window) {
        if let Some(v) = numra.embed(lam)?.valuation() {
            need = need.max(-v);
        }
    }
    let resolution = cfg.resolution.max(need);
    if resolution != cfg.resolution {
        warnings.push(format!("RESOLUTION_RAISED: resolution {} -> {resolution} to resolve the symbols and the window characters", cfg.resolution));
    }
    let omega = OmegaDomain::working(&numra);
    let stepped = bridge::symbols_as_stepped(&numra, &symbols, &omega, resolution)?;
    let recovered = bridge::filters_from_numra(&numra, &stepped, &omega, window, tol)?;

    let mut checks = vec![recovered.to_check(tol)];
    let tap_error = bank
        .filters
        .iter()
        .zip(&recovered.bank.filters)
        .map(|(a, b)| a.sub(b).max_abs())
        .fold(0.0, f64::max);
    checks.push(CheckResult::verdict("bridge_bank_round_trip", tap_error, tol));
    checks.extend(bridge::symbol_conditions(&numra, &symbols, resolution, tol)?);

    // 𝔅⁻¹ holds cells on both sides of the 𝔇 boundary.
    let region = Region::ball(-1);
    let spectrum = bridge::cascade_spectrum(&numra, &symbols[0], depth, &region, resolution)?;
    checks.push(bridge::telescoping_check(&numra, &symbols[0], depth, &region, resolution)?);

    let zero = Complex64::new(0.0, 0.0);
    let data = json!({
        "stage": depth,
        "resolution": resolution,
        "window": window,
        "omega": omega.region.cosets.iter().map(|c| format!("{} + B^{}", lf.format(&c.rep), c.k)).collect::<Vec<_>>(),
        "symbols": stepped.iter().map(|f| SteppedFile::from_stepped(lf, f)).collect::<Vec<_>>(),
        "recovered_bank": BankFile::from_bank(&recovered.bank),
        "cascade_spectrum": SteppedFile::from_stepped(lf, &spectrum),
        "cascade_nonzero_cells": spectrum.values().iter().filter(|v| **v != zero).count(),
    });
    Ok(finish(Report::new("bridge", cfg, checks, warnings, data)))
}
