//! Oracle A: inner products of translates computed directly on Λ.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::bank::FilterBank;
use crate::error::{Error, Result};
use crate::lambda::{LambdaIndex, Numra};
use crate::report::CheckResult;
use crate::transform::Sequence;

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub level: usize,
    pub window: u32,
    pub translates: usize,
    /// Translates that lost taps outside Λ; excluded from the residual.
    pub boundary_translates: usize,
    /// max |⟨T g_i, T g_j⟩ − δ_ij| over the window.
    pub orthonormality_residual: f64,
    /// max_σ |Σ |T g(σ)|² − 1| over all translates hitting σ; None if not requested.
    pub completeness_residual: Option<f64>,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl GramReport {
    pub fn to_check(&self, name: &str) -> CheckResult {
        let mut c = CheckResult::verdict(name, self.residual, self.threshold);
        c.notes.push(format!(
            "orthonormality={:.3e} completeness={} translates={} boundary={}",
            self.orthonormality_residual,
            self.completeness_residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "n/a".into()),
            self.translates,
            self.boundary_translates
        ));
        c
    }
}

/// Gram matrix of {T_{δ^level λ} g_k} for λ with n < q^window (order: source, then λ).
pub fn gram_matrix(numra: &Numra, sources: &[Sequence], level: usize, window: u32) -> Result<(DMatrix<Complex64>, Vec<bool>)> {
    let translates = translates(numra, sources, level, window)?;
    let n = translates.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| translates[i].1.inner(&translates[j].1)).collect())
        .collect();
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            g[(i, j)] = v;
        }
    }
    Ok((g, translates.iter().map(|t| t.2 == 0).collect()))
}

type Translate = ((usize, LambdaIndex), Sequence, usize);

fn translates(numra: &Numra, sources: &[Sequence], level: usize, window: u32) -> Result<Vec<Translate>> {
    let need = sources.iter().map(|s| s.max_digits(numra)).max().unwrap_or(0);
    if window < need {
        return Err(Error::Config(format!("window {window} smaller than filter support ({need} digits)")));
    }
    let lambdas = numra.index_set(window);
    let jobs: Vec<(usize, LambdaIndex)> =
        (0..sources.len()).flat_map(|k| lambdas.iter().map(move |&l| (k, l))).collect();
    jobs.par_iter()
        .map(|&(k, l)| {
            let (t, dropped) = sources[k].translate(numra, l, level)?;
            Ok(((k, l), t, dropped))
        })
        .collect()
}

pub fn gram_system(
    numra: &Numra,
    sources: &[Sequence],
    level: usize,
    window: u32,
    completeness: bool,
    threshold: f64,
) -> Result<GramReport> {
    let translates = translates(numra, sources, level, window)?;
    let n = translates.len();
    let boundary = translates.iter().filter(|t| t.2 > 0).count();
    let ortho = (0..n)
        .into_par_iter()
        .map(|i| {
            if translates[i].2 > 0 {
                return 0.0;
            }
            let mut worst = 0.0f64;
            for j in i..n {
                if translates[j].2 > 0 {
                    continue;
                }
                let g = translates[i].1.inner(&translates[j].1);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - Complex64::new(target, 0.0)).norm());
            }
            worst
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);

    let complete = if completeness {
        let degree = -numra.delta_pow(level)?.valuation().expect("nonzero");
        if (window as i32) < degree {
            return Err(Error::Config(format!(
                "window {window} too small to cover the {degree}-digit coset representatives of the translation lattice"
            )));
        }
        let sigmas = numra.index_set(window);
        let sums = sigmas
            .par_iter()
            .map(|&sigma| {
                let mut s = 0.0;
                for src in sources {
                    for (tau, v) in src.iter() {
                        if numra.preimage_index(sigma, tau, level)?.is_some() {
                            s += v.norm_sqr();
                        }
                    }
                }
                Ok((s - 1.0).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        Some(sums.into_iter().fold(0.0, f64::max))
    } else {
        None
    };
    let residual = ortho.max(complete.unwrap_or(0.0));
    Ok(GramReport {
        level,
        window,
        translates: n,
        boundary_translates: boundary,
        orthonormality_residual: ortho,
        completeness_residual: complete,
        residual,
        threshold,
        pass: residual.is_finite() && residual < threshold,
    })
}

/// Oracle A for a first-stage bank: orthonormality plus completeness of
/// {T_{δλ} w_k} on the index window.
pub fn gram_oracle(numra: &Numra, bank: &FilterBank, window: u32, threshold: f64) -> Result<GramReport> {
    bank.validate(numra)?;
    gram_system(numra, &bank.filters, 1, window, true, threshold)
}
