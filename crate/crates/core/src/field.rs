//! Truncated Laurent series Σ c_ℓ 𝔭^ℓ over GF(q) with per-element precision.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{FieldParams, GaloisField, GfElement};

/// Precision value for elements known exactly.
pub const EXACT: i32 = i32::MAX;

/// Default global exponent window.
pub const DEFAULT_VMIN: i32 = -32;
pub const DEFAULT_VMAX: i32 = 32;

/// A series known on exponents below `precision`.
///
/// Canonical form: `coeffs` has no leading or trailing zeros; the zero element
/// has empty `coeffs` and `vmin = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    vmin: i32,
    coeffs: Vec<GfElement>,
    precision: i32,
}

impl FieldElement {
    pub fn zero() -> Self {
        FieldElement { vmin: 0, coeffs: Vec::new(), precision: EXACT }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.vmin)
    }

    /// One past the highest stored exponent.
    pub fn end(&self) -> i32 {
        self.vmin + self.coeffs.len() as i32
    }

    pub fn precision(&self) -> i32 {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision == EXACT
    }

    pub fn coeff(&self, exp: i32) -> GfElement {
        if exp < self.vmin || exp >= self.end() {
            GfElement::ZERO
        } else {
            self.coeffs[(exp - self.vmin) as usize]
        }
    }

    /// Coefficient at `exp`, failing if it lies beyond the known precision.
    pub fn known_coeff(&self, exp: i32) -> Result<GfElement> {
        if exp >= self.precision {
            return Err(Error::Precision { exponent: exp, precision: self.precision });
        }
        Ok(self.coeff(exp))
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, GfElement)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, &c)| (self.vmin + i as i32, c))
    }

    pub fn with_precision(mut self, precision: i32) -> Self {
        self.precision = self.precision.min(precision);
        self.truncate_to_precision();
        self
    }

    /// Drop all terms with exponent ≥ `k`; the result is exact (a coset
    /// representative of x + 𝔅^k).
    pub fn truncated_below(&self, k: i32) -> Self {
        let keep = (k - self.vmin).clamp(0, self.coeffs.len() as i32) as usize;
        let mut out = FieldElement { vmin: self.vmin, coeffs: self.coeffs[..keep].to_vec(), precision: EXACT };
        out.normalize();
        out
    }

    /// Equality of the parts both elements know.
    pub fn agrees_with(&self, other: &FieldElement) -> bool {
        let prec = self.precision.min(other.precision);
        let lo = self.vmin.min(other.vmin);
        let hi = self.end().max(other.end()).min(prec);
        (lo..hi).all(|e| self.coeff(e) == other.coeff(e))
    }

    fn truncate_to_precision(&mut self) {
        if self.precision != EXACT && self.end() > self.precision {
            let keep = (self.precision - self.vmin).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.vmin += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.vmin = 0;
        }
    }
}

/// Precision sum where EXACT absorbs everything.
fn padd(a: i32, b: i32) -> i32 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a.saturating_add(b)
    }
}

/// Exact norm |x| = q^(-v(x)) kept as the pair (q, -v).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Zero,
    Power { q: u32, exponent: i32 },
}

impl Norm {
    pub fn to_f64(self) -> f64 {
        match self {
            Norm::Zero => 0.0,
            Norm::Power { q, exponent } => (q as f64).powi(exponent),
        }
    }
}

impl PartialOrd for Norm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        Some(match (self, other) {
            (Norm::Zero, Norm::Zero) => Equal,
            (Norm::Zero, _) => Less,
            (_, Norm::Zero) => Greater,
            (Norm::Power { exponent: a, .. }, Norm::Power { exponent: b, .. }) => a.cmp(b),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub vmin: i32,
    pub vmax: i32,
}

impl Default for Window {
    fn default() -> Self {
        Window { vmin: DEFAULT_VMIN, vmax: DEFAULT_VMAX }
    }
}

/// Arithmetic context for K = GF(q)((𝔭)) on a fixed exponent window.
#[derive(Clone, Debug)]
pub struct LocalField {
    gf: GaloisField,
    window: Window,
}

impl LocalField {
    pub fn new(params: FieldParams, window: Window) -> Result<Self> {
        if window.vmin >= 0 || window.vmax < 0 {
            return Err(Error::Config(format!("window [{}, {}] must contain -1 and 0", window.vmin, window.vmax)));
        }
        Ok(LocalField { gf: GaloisField::new(params), window })
    }

    pub fn gf(&self) -> &GaloisField {
        &self.gf
    }
    pub fn q(&self) -> u32 {
        self.gf.q()
    }
    pub fn p(&self) -> u32 {
        self.gf.p()
    }
    pub fn window(&self) -> Window {
        self.window
    }

    pub fn one(&self) -> FieldElement {
        self.constant(GfElement::ONE)
    }

    pub fn constant(&self, c: GfElement) -> FieldElement {
        self.monomial(c, 0).expect("exponent 0 is inside every window")
    }

    pub fn monomial(&self, c: GfElement, exp: i32) -> Result<FieldElement> {
        self.from_terms(&[(exp, c)])
    }

    /// 𝔭^k.
    pub fn prime_pow(&self, k: i32) -> Result<FieldElement> {
        self.monomial(GfElement::ONE, k)
    }

    /// Exact element from (exponent, coefficient) pairs; repeated exponents add.
    pub fn from_terms(&self, terms: &[(i32, GfElement)]) -> Result<FieldElement> {
        self.from_terms_with_precision(terms, EXACT)
    }

    pub fn from_terms_with_precision(&self, terms: &[(i32, GfElement)], precision: i32) -> Result<FieldElement> {
        let live: Vec<_> = terms.iter().filter(|(e, c)| !c.is_zero() && *e < precision).copied().collect();
        if live.is_empty() {
            return Ok(FieldElement { precision, ..FieldElement::zero() });
        }
        let lo = live.iter().map(|t| t.0).min().unwrap();
        let hi = live.iter().map(|t| t.0).max().unwrap();
        self.check_low(lo)?;
        let mut precision = precision;
        if hi > self.window.vmax {
            precision = precision.min(self.window.vmax + 1);
        }
        let top = hi.min(self.window.vmax);
        let mut coeffs = vec![GfElement::ZERO; (top - lo + 1).max(0) as usize];
        for (e, c) in live {
            if e <= top {
                let slot = &mut coeffs[(e - lo) as usize];
                *slot = self.gf.add(*slot, c);
            }
        }
        let mut x = FieldElement { vmin: lo, coeffs, precision };
        x.normalize();
        Ok(x)
    }

    fn check_low(&self, exponent: i32) -> Result<()> {
        if exponent < self.window.vmin {
            return Err(Error::WindowUnderflow { exponent, vmin: self.window.vmin });
        }
        Ok(())
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.combine(x, y, false)
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.combine(x, y, true)
    }

    fn combine(&self, x: &FieldElement, y: &FieldElement, negate_y: bool) -> FieldElement {
        let precision = x.precision.min(y.precision);
        if x.is_zero() && y.is_zero() {
            return FieldElement { precision, ..FieldElement::zero() };
        }
        let lo = match (x.is_zero(), y.is_zero()) {
            (true, _) => y.vmin,
            (_, true) => x.vmin,
            _ => x.vmin.min(y.vmin),
        };
        let hi = x.end().max(y.end()).min(precision.max(lo));
        let coeffs = (lo..hi)
            .map(|e| {
                let b = if negate_y { self.gf.neg(y.coeff(e)) } else { y.coeff(e) };
                self.gf.add(x.coeff(e), b)
            })
            .collect();
        let mut out = FieldElement { vmin: lo, coeffs, precision };
        out.normalize();
        out
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        let mut out = x.clone();
        for c in out.coeffs.iter_mut() {
            *c = self.gf.neg(*c);
        }
        out
    }

    pub fn scale(&self, a: GfElement, x: &FieldElement) -> FieldElement {
        if a.is_zero() {
            return FieldElement::zero();
        }
        let mut out = x.clone();
        for c in out.coeffs.iter_mut() {
            *c = self.gf.mul(a, *c);
        }
        out
    }

    /// Cauchy product; precision is min(v(x)+py, v(y)+px, px+py), capped at
    /// Vmax+1 when terms above the window are dropped.
    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        let vx = x.valuation();
        let vy = y.valuation();
        let mut precision = padd(x.precision, y.precision);
        if let Some(v) = vx {
            precision = precision.min(padd(v, y.precision));
        }
        if let Some(v) = vy {
            precision = precision.min(padd(v, x.precision));
        }
        let (Some(vx), Some(vy)) = (vx, vy) else {
            return Ok(FieldElement { precision, ..FieldElement::zero() });
        };
        let lo = vx + vy;
        self.check_low(lo)?;
        let full_end = x.end() + y.end() - 1;
        let mut end = full_end.min(precision.max(lo));
        if end > self.window.vmax + 1 {
            end = self.window.vmax + 1;
            precision = precision.min(end);
        }
        let mut coeffs = vec![GfElement::ZERO; (end - lo).max(0) as usize];
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in y.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= coeffs.len() {
                    break;
                }
                coeffs[k] = self.gf.add(coeffs[k], self.gf.mul(a, b));
            }
        }
        let mut out = FieldElement { vmin: lo, coeffs, precision };
        out.normalize();
        Ok(out)
    }

    /// Coefficient of xy at `exp` without forming the product.
    pub fn product_coeff(&self, x: &FieldElement, y: &FieldElement, exp: i32) -> Result<GfElement> {
        let mut precision = padd(x.precision, y.precision);
        if let Some(v) = x.valuation() {
            precision = precision.min(padd(v, y.precision));
        }
        if let Some(v) = y.valuation() {
            precision = precision.min(padd(v, x.precision));
        }
        if exp >= precision {
            return Err(Error::Precision { exponent: exp, precision });
        }
        let mut acc = GfElement::ZERO;
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let e = exp - (x.vmin + i as i32);
            let b = y.coeff(e);
            if !b.is_zero() {
                acc = self.gf.add(acc, self.gf.mul(a, b));
            }
        }
        Ok(acc)
    }

    /// Inverse known below `out_precision` (and no further than the input
    /// allows); exact when x is an exact monomial.
    pub fn inv(&self, x: &FieldElement, out_precision: i32) -> Result<FieldElement> {
        let v = x.valuation().ok_or(Error::DivisionByZero)?;
        self.check_low(-v)?;
        let a0inv = self.gf.inv(x.coeffs[0])?;
        if x.is_exact() && x.coeffs.len() == 1 {
            return self.monomial(a0inv, -v);
        }
        let mut precision = out_precision.min(self.window.vmax + 1);
        if x.precision != EXACT {
            precision = precision.min(x.precision - 2 * v);
        }
        let n = (precision + v).max(0) as usize;
        // b_k with x·Σ b_k 𝔭^(k−v) = 1: a0 b0 = 1, Σ_{i≤k} a_i b_{k−i} = 0.
        let mut b = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                b.push(a0inv);
                continue;
            }
            let mut s = GfElement::ZERO;
            for i in 1..=k.min(x.coeffs.len() - 1) {
                s = self.gf.add(s, self.gf.mul(x.coeffs[i], b[k - i]));
            }
            b.push(self.gf.mul(self.gf.neg(s), a0inv));
        }
        let mut out = FieldElement { vmin: -v, coeffs: b, precision };
        out.normalize();
        Ok(out)
    }

    pub fn norm(&self, x: &FieldElement) -> Norm {
        match x.valuation() {
            None => Norm::Zero,
            Some(v) => Norm::Power { q: self.q(), exponent: -v },
        }
    }

    /// Sparse text form, e.g. `[(-2,[1]),(-1,[1])]`.
    pub fn format(&self, x: &FieldElement) -> String {
        let terms: Vec<String> = x
            .terms()
            .map(|(e, c)| {
                let digits: Vec<String> = self.gf.coeffs(c).iter().map(|d| d.to_string()).collect();
                format!("({e},[{}])", digits.join(","))
            })
            .collect();
        let mut s = format!("[{}]", terms.join(","));
        if !x.is_exact() {
            s.push_str(&format!("+O({})", x.precision));
        }
        s
    }

    /// Sparse (exponent, ζ-digits) pairs for JSON.
    pub fn to_sparse(&self, x: &FieldElement) -> Vec<(i32, Vec<u32>)> {
        x.terms().map(|(e, c)| (e, self.gf.coeffs(c))).collect()
    }

    pub fn from_sparse(&self, terms: &[(i32, Vec<u32>)]) -> Result<FieldElement> {
        let ts = terms
            .iter()
            .map(|(e, d)| Ok((*e, self.gf.from_coeffs(d)?)))
            .collect::<Result<Vec<_>>>()?;
        self.from_terms(&ts)
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Zero => write!(f, "0"),
            Norm::Power { q, exponent } => write!(f, "{q}^{exponent}"),
        }
    }
}
