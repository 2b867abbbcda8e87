//! The digit map n ↦ u(n), the translation set Λ = {0, θ} + 𝒵 and the
//! dilation δ acting on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField, Window};
use crate::gf::{FieldParams, GfElement};

/// Highest dilation power cached at construction.
pub const MAX_LEVEL: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuPolicy {
    /// ν = (N mod p)·1.
    #[serde(alias = "scalar")]
    ScalarModP,
    /// ν = u(N) (ν = 1 when N = 1).
    #[serde(alias = "coset")]
    CosetRep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumraParams {
    #[serde(flatten)]
    pub field: FieldParams,
    #[serde(rename = "N")]
    pub n: u64,
    pub r: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_policy: Option<NuPolicy>,
}

impl NumraParams {
    pub fn new(field: FieldParams, n: u64, r: u64, nu_policy: Option<NuPolicy>) -> Self {
        NumraParams { field, n, r, nu_policy }
    }

    /// Shortcut with the default modulus.
    pub fn simple(p: u32, c: u32, n: u64, r: u64, nu_policy: Option<NuPolicy>) -> Result<Self> {
        Ok(NumraParams { field: FieldParams::new(p, c, None)?, n, r, nu_policy })
    }

    pub fn q(&self) -> u64 {
        self.field.q() as u64
    }

    pub fn arity(&self) -> usize {
        (self.q() * self.n) as usize
    }

    /// The configured policy, or ScalarModP when gcd(N, p) = 1 and CosetRep otherwise.
    pub fn policy(&self) -> NuPolicy {
        self.nu_policy.unwrap_or(if self.n % self.field.p as u64 != 0 { NuPolicy::ScalarModP } else { NuPolicy::CosetRep })
    }

    pub fn validate(&self) -> Result<()> {
        let qn = self.q() * self.n;
        if self.n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.r % 2 == 0 || self.r < 1 || self.r >= qn {
            return Err(Error::Config(format!("r = {} must be odd with 1 <= r <= qN-1 = {}", self.r, qn - 1)));
        }
        if gcd(self.r, self.n) != 1 {
            return Err(Error::Config(format!("gcd(r, N) = gcd({}, {}) != 1", self.r, self.n)));
        }
        if self.policy() == NuPolicy::ScalarModP && self.n % self.field.p as u64 == 0 {
            return Err(Error::Config(format!("ScalarModP needs gcd(N, p) = 1, but p = {} divides N = {}", self.field.p, self.n)));
        }
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// (eps, n) ↦ eps·θ + u(n). Ordered by eps, then n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LambdaIndex {
    pub eps: u8,
    pub n: u64,
}

impl LambdaIndex {
    pub const ORIGIN: LambdaIndex = LambdaIndex { eps: 0, n: 0 };

    pub fn new(eps: u8, n: u64) -> Self {
        LambdaIndex { eps, n }
    }
    pub fn z(n: u64) -> Self {
        LambdaIndex { eps: 0, n }
    }
}

/// Runtime context: field, policy, ν, θ, δ and cached powers of δ.
#[derive(Clone, Debug)]
pub struct Numra {
    params: NumraParams,
    policy: NuPolicy,
    lf: LocalField,
    nu: FieldElement,
    theta: FieldElement,
    delta: FieldElement,
    degenerate: bool,
    delta_pows: Vec<FieldElement>,
    delta_inv_pows: Vec<FieldElement>,
    warnings: Vec<String>,
}

impl Numra {
    pub fn new(params: NumraParams) -> Result<Self> {
        Self::with_window(params, Window::default())
    }

    pub fn with_window(params: NumraParams, window: Window) -> Result<Self> {
        params.validate()?;
        let policy = params.policy();
        let lf = LocalField::new(params.field.clone(), window)?;
        let prec = window.vmax + 1;
        let mut numra = Numra {
            params: params.clone(),
            policy,
            nu: FieldElement::zero(),
            theta: FieldElement::zero(),
            delta: FieldElement::zero(),
            degenerate: true,
            delta_pows: Vec::new(),
            delta_inv_pows: Vec::new(),
            warnings: Vec::new(),
            lf,
        };
        let nu = match policy {
            NuPolicy::ScalarModP => numra.lf.constant(numra.lf.gf().from_int(params.n)),
            NuPolicy::CosetRep if params.n == 1 => numra.lf.one(),
            NuPolicy::CosetRep => numra.u_of(params.n)?,
        };
        let nu_inv = numra.lf.inv(&nu, prec)?;
        let theta = numra.lf.mul(&numra.u_of(params.r)?, &nu_inv)?;
        let delta = numra.lf.mul(&numra.lf.prime_pow(-1)?, &nu)?;
        let delta_inv = numra.lf.inv(&delta, prec)?;
        numra.degenerate = numra.u_inverse(&theta).is_some();
        if numra.degenerate {
            numra.warnings.push(format!(
                "DEGENERATE: theta = {} lies in Z, so Lambda collapses to Z (index set eps = 0, arity still qN = {})",
                numra.lf.format(&theta),
                params.arity()
            ));
        }
        let mut pows = vec![numra.lf.one()];
        let mut inv_pows = vec![numra.lf.one()];
        for l in 1..=MAX_LEVEL {
            match numra.lf.mul(&pows[l - 1], &delta) {
                Ok(x) => pows.push(x),
                Err(_) => break,
            }
        }
        for l in 1..=MAX_LEVEL {
            match numra.lf.mul(&inv_pows[l - 1], &delta_inv) {
                Ok(x) => inv_pows.push(x),
                Err(_) => break,
            }
        }
        numra.nu = nu;
        numra.theta = theta;
        numra.delta = delta;
        numra.delta_pows = pows;
        numra.delta_inv_pows = inv_pows;
        Ok(numra)
    }

    pub fn params(&self) -> &NumraParams {
        &self.params
    }
    pub fn policy(&self) -> NuPolicy {
        self.policy
    }
    pub fn field(&self) -> &LocalField {
        &self.lf
    }
    pub fn q(&self) -> u64 {
        self.lf.q() as u64
    }
    pub fn p(&self) -> u32 {
        self.lf.p()
    }
    pub fn arity(&self) -> usize {
        self.params.arity()
    }
    pub fn nu(&self) -> &FieldElement {
        &self.nu
    }
    pub fn theta(&self) -> &FieldElement {
        &self.theta
    }
    pub fn delta(&self) -> &FieldElement {
        &self.delta
    }
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Number of cosets of 𝒵 making up Λ in use (1 when degenerate).
    pub fn branches(&self) -> u8 {
        if self.degenerate { 1 } else { 2 }
    }

    /// −v(δ): |δ| = q^degree.
    pub fn delta_degree(&self) -> i32 {
        -self.delta.valuation().expect("delta is nonzero")
    }

    pub fn delta_pow(&self, level: usize) -> Result<&FieldElement> {
        self.delta_pows
            .get(level)
            .ok_or_else(|| Error::Window(format!("delta^{level} exceeds the exponent window")))
    }

    pub fn delta_inv_pow(&self, level: usize) -> Result<&FieldElement> {
        self.delta_inv_pows
            .get(level)
            .ok_or_else(|| Error::Window(format!("delta^-{level} exceeds the exponent window")))
    }

    /// u(n) = Σ u(b_k) 𝔭^(−k), digit b_k at exponent −(k+1).
    pub fn u_of(&self, n: u64) -> Result<FieldElement> {
        let q = self.q();
        let mut terms = Vec::new();
        let (mut m, mut k) = (n, 0i32);
        while m > 0 {
            let d = (m % q) as u32;
            if d != 0 {
                terms.push((-(k + 1), GfElement::from_index(d)));
            }
            m /= q;
            k += 1;
        }
        self.lf.from_terms(&terms)
    }

    /// n with u(n) = x, or None when x ∉ 𝒵 (judged on the known coefficients).
    pub fn u_inverse(&self, x: &FieldElement) -> Option<u64> {
        if x.precision() < 1 {
            return None;
        }
        if x.is_zero() {
            return Some(0);
        }
        let top = x.end().min(x.precision());
        if (0.max(x.valuation()?)..top).any(|e| !x.coeff(e).is_zero()) {
            return None;
        }
        let q = self.q();
        let mut n = 0u64;
        for e in x.valuation()?..0 {
            let d = x.coeff(e).index() as u64;
            let k = (-e - 1) as u32;
            if d != 0 {
                n = n.checked_add(d.checked_mul(q.checked_pow(k)?)?)?;
            }
        }
        Some(n)
    }

    pub fn embed(&self, idx: LambdaIndex) -> Result<FieldElement> {
        let u = self.u_of(idx.n)?;
        match idx.eps {
            0 => Ok(u),
            1 if self.degenerate => Err(Error::Config(format!(
                "index (1, {}) used but Lambda is degenerate (theta in Z)",
                idx.n
            ))),
            1 => Ok(self.lf.add(&self.theta, &u)),
            e => Err(Error::Config(format!("eps = {e} is not 0 or 1"))),
        }
    }

    /// Re-index an element of K into Λ, trying the 𝒵 branch first.
    pub fn reindex(&self, x: &FieldElement) -> Option<LambdaIndex> {
        if let Some(n) = self.u_inverse(x) {
            return Some(LambdaIndex::z(n));
        }
        if self.degenerate {
            return None;
        }
        self.u_inverse(&self.lf.sub(x, &self.theta)).map(|n| LambdaIndex::new(1, n))
    }

    /// σ − δ^level·λ re-indexed; None when it leaves Λ.
    pub fn translate_index(&self, sigma: LambdaIndex, lam: LambdaIndex, level: usize) -> Result<Option<LambdaIndex>> {
        if lam == LambdaIndex::ORIGIN {
            return Ok(Some(sigma));
        }
        let d = self.lf.mul(self.delta_pow(level)?, &self.embed(lam)?)?;
        let x = self.lf.sub(&self.embed(sigma)?, &d);
        Ok(self.reindex(&x))
    }

    /// σ + δ^level·λ re-indexed.
    pub fn translate_forward(&self, sigma: LambdaIndex, lam: LambdaIndex, level: usize) -> Result<Option<LambdaIndex>> {
        if lam == LambdaIndex::ORIGIN {
            return Ok(Some(sigma));
        }
        let d = self.lf.mul(self.delta_pow(level)?, &self.embed(lam)?)?;
        let x = self.lf.add(&self.embed(sigma)?, &d);
        Ok(self.reindex(&x))
    }

    /// The λ ∈ Λ with σ − δ^level·λ = τ, if any.
    pub fn preimage_index(&self, sigma: LambdaIndex, tau: LambdaIndex, level: usize) -> Result<Option<LambdaIndex>> {
        let diff = self.lf.sub(&self.embed(sigma)?, &self.embed(tau)?);
        let lam = self.lf.mul(self.delta_inv_pow(level)?, &diff)?;
        let Some(idx) = self.reindex(&lam) else { return Ok(None) };
        // Confirm exactly: reindexing judged only on known coefficients.
        Ok((self.translate_index(sigma, idx, level)? == Some(tau)).then_some(idx))
    }

    /// Λ-indices with n < q^window on every branch in use.
    pub fn index_set(&self, window: u32) -> Vec<LambdaIndex> {
        let count = self.q().pow(window);
        (0..self.branches()).flat_map(|eps| (0..count).map(move |n| LambdaIndex::new(eps, n))).collect()
    }

    /// Number of base-q digits of n (0 for n = 0).
    pub fn digits(&self, n: u64) -> u32 {
        let (mut m, mut d) = (n, 0);
        while m > 0 {
            m /= self.q();
            d += 1;
        }
        d
    }
}
