//! Banks built by formula: Haar, Vilenkin (DFT), lazy, and operations that
//! preserve or break orthonormality. Random banks are seeded.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::bank::FilterBank;
use crate::error::{Error, Result};
use crate::lambda::{LambdaIndex, Numra};
use crate::transform::Sequence;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Haar bank for q = 2, N = 1.
pub fn haar(numra: &Numra) -> Result<FilterBank> {
    if numra.q() != 2 || numra.params().n != 1 {
        return Err(Error::Config("the Haar bank needs q = 2 and N = 1".into()));
    }
    vilenkin(numra)
}

/// w_k(u(n)) = ω^{kn}/√q for n < q (prime q, N = 1).
pub fn vilenkin(numra: &Numra) -> Result<FilterBank> {
    let q = numra.q();
    if numra.field().gf().c() != 1 || numra.params().n != 1 {
        return Err(Error::Config("the Vilenkin bank needs a prime field and N = 1".into()));
    }
    let s = 1.0 / (q as f64).sqrt();
    let filters = (0..q)
        .map(|k| {
            Sequence::from_pairs((0..q).map(|n| {
                let e = (k * n) % q;
                let w = if e == 0 {
                    c(1.0)
                } else if 2 * e == q {
                    c(-1.0)
                } else {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / q as f64)
                };
                (LambdaIndex::z(n), w * s)
            }))
        })
        .collect();
    FilterBank::new(numra, filters)
}

/// w_k = δ at (0, k).
pub fn lazy(numra: &Numra) -> Result<FilterBank> {
    let filters = (0..numra.arity() as u64).map(|k| Sequence::delta(LambdaIndex::z(k))).collect();
    FilterBank::new(numra, filters)
}

pub fn phase_rotate(bank: &FilterBank, phases: &[f64]) -> FilterBank {
    let filters = bank
        .filters
        .iter()
        .zip(phases.iter().chain(std::iter::repeat(&0.0)))
        .map(|(f, &phi)| f.scaled(Complex64::from_polar(1.0, phi)))
        .collect();
    FilterBank { filters, ..bank.clone() }
}

/// w'_k = Σ_j U_kj w_j.
pub fn unitary_mix(bank: &FilterBank, u: &DMatrix<Complex64>) -> Result<FilterBank> {
    let n = bank.filters.len();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Config(format!("mixing matrix must be {n}x{n}")));
    }
    let filters = (0..n)
        .map(|k| {
            let mut acc = Sequence::new();
            for j in 0..n {
                acc.axpy(u[(k, j)], &bank.filters[j]);
            }
            acc
        })
        .collect();
    Ok(FilterBank { filters, ..bank.clone() })
}

/// Moves every tap of branch `eps` lying in the coset u(s0) + δ𝒵 by δ·e(lam).
/// This multiplies one polyphase row by a unimodular factor, so orthonormality
/// is preserved when Λ is degenerate.
pub fn coset_shift(numra: &Numra, bank: &FilterBank, eps: u8, s0: u64, lam: LambdaIndex) -> Result<FilterBank> {
    let filters = bank
        .filters
        .iter()
        .map(|f| {
            let mut out = Sequence::new();
            for (tau, v) in f.iter() {
                let target = if tau.eps == eps && in_coset(numra, tau, s0)? {
                    numra.translate_forward(tau, lam, 1)?.ok_or_else(|| Error::OutOfLambda(format!("{tau:?}")))?
                } else {
                    tau
                };
                out.add_at(target, v);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBank { filters, ..bank.clone() })
}

fn in_coset(numra: &Numra, tau: LambdaIndex, s0: u64) -> Result<bool> {
    let base = LambdaIndex::new(tau.eps, s0);
    Ok(numra.preimage_index(tau, base, 1)?.is_some_and(|l| l.eps == 0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column phases so the distribution does not depend on QR conventions.
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Taps i.i.d. complex Gaussian on n < q^digits of every branch in use.
pub fn random_gaussian(numra: &Numra, digits: u32, seed: u64) -> Result<FilterBank> {
    let mut rng = rng(seed);
    let idx = numra.index_set(digits);
    let filters = (0..numra.arity()).map(|_| Sequence::from_pairs(idx.iter().map(|&k| (k, gaussian(&mut rng))))).collect();
    FilterBank::new(numra, filters)
}

/// Lazy bank passed through `depth` rounds of random unitary mixing and
/// random coset shifts; orthonormal by construction on degenerate Λ.
pub fn random_paraunitary(numra: &Numra, depth: usize, seed: u64) -> Result<FilterBank> {
    let mut rng = rng(seed);
    let mut bank = lazy(numra)?;
    let m = numra.q().pow(numra.delta_degree() as u32);
    for _ in 0..depth {
        bank = unitary_mix(&bank, &random_unitary(bank.len(), &mut rng))?;
        let s0 = rng.random_range(0..m);
        let lam = LambdaIndex::z(rng.random_range(1..numra.q()));
        bank = coset_shift(numra, &bank, 0, s0, lam)?;
    }
    Ok(bank)
}

/// Adds `delta` to tap `at` of filter `k`.
pub fn perturb(bank: &FilterBank, k: usize, at: LambdaIndex, delta: Complex64) -> FilterBank {
    let mut out = bank.clone();
    out.filters[k].add_at(at, delta);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::first_stage::gram::gram_oracle;
    use crate::lambda::NumraParams;

    fn numra(p: u32, n: u64) -> Numra {
        Numra::new(NumraParams::simple(p, 1, n, 1, None).unwrap()).unwrap()
    }

    #[test]
    fn curated_banks_are_orthonormal() {
        let a = numra(2, 1);
        let h = haar(&a).unwrap();
        assert!(gram_oracle(&a, &h, 4, 1e-12).unwrap().pass);
        assert!(gram_oracle(&a, &lazy(&a).unwrap(), 3, 1e-12).unwrap().pass);
        assert!(gram_oracle(&a, &phase_rotate(&h, &[0.3, -1.1]), 3, 1e-12).unwrap().pass);
        let b = numra(3, 1);
        assert!(gram_oracle(&b, &vilenkin(&b).unwrap(), 3, 1e-12).unwrap().pass);
        assert!(haar(&b).is_err());
    }

    #[test]
    fn coset_shift_lengthens_and_preserves() {
        let a = numra(3, 1);
        let v = vilenkin(&a).unwrap();
        let s = coset_shift(&a, &v, 0, 1, LambdaIndex::z(2)).unwrap();
        assert!(s.max_digits(&a) > v.max_digits(&a));
        assert!(gram_oracle(&a, &s, 3, 1e-12).unwrap().pass);
        let r = random_paraunitary(&a, 3, 7).unwrap();
        assert!(gram_oracle(&a, &r, r.max_digits(&a).max(1), 1e-10).unwrap().pass);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut g = rng(1);
        let u = random_unitary(4, &mut g);
        let d = &u.adjoint() * &u - DMatrix::<Complex64>::identity(4, 4);
        assert!(d.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn seeded_banks_repeat() {
        let a = numra(2, 1);
        assert_eq!(random_gaussian(&a, 2, 5).unwrap(), random_gaussian(&a, 2, 5).unwrap());
        assert_ne!(random_gaussian(&a, 2, 5).unwrap(), random_gaussian(&a, 2, 6).unwrap());
    }
}
