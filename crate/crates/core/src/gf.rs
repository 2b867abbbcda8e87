//! The residue field GF(q), q = p^c, on the polynomial basis ζ_j = x^j.
//!
//! An element is stored as the integer Σ a_j p^j, where a_j is the coefficient
//! of ζ_j. This packing makes a_0 (the ζ₀ component read by the character)
//! equal to `index % p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 8;
const TABLE_LIMIT: u32 = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GfElement(u32);

impl GfElement {
    pub const ZERO: GfElement = GfElement(0);
    pub const ONE: GfElement = GfElement(1);

    pub fn from_index(i: u32) -> Self {
        GfElement(i)
    }
    pub fn index(self) -> u32 {
        self.0
    }
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Deserialize)]
struct RawFieldParams {
    p: u32,
    c: u32,
    #[serde(default)]
    modulus: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFieldParams")]
pub struct FieldParams {
    pub p: u32,
    pub c: u32,
    /// Monic, ascending degree order, length c+1.
    pub modulus: Vec<u32>,
}

impl TryFrom<RawFieldParams> for FieldParams {
    type Error = Error;
    fn try_from(r: RawFieldParams) -> Result<Self> {
        FieldParams::new(r.p, r.c, r.modulus)
    }
}

impl FieldParams {
    pub fn new(p: u32, c: u32, modulus: Option<Vec<u32>>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Config(format!("p = {p} is not prime")));
        }
        if c == 0 || c > MAX_DEGREE {
            return Err(Error::Config(format!("c = {c} outside 1..={MAX_DEGREE}")));
        }
        let q = (p as u64).checked_pow(c).filter(|&q| q <= 1 << 24);
        if q.is_none() {
            return Err(Error::Config(format!("q = {p}^{c} too large")));
        }
        let modulus = match modulus {
            Some(m) => m,
            None => default_modulus(p, c),
        };
        if modulus.len() != c as usize + 1 {
            return Err(Error::Config(format!("modulus must have degree {c}")));
        }
        if modulus.iter().any(|&a| a >= p) {
            return Err(Error::Config("modulus coefficients must lie in [0, p)".into()));
        }
        if modulus[c as usize] != 1 {
            return Err(Error::Config("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::Config(format!("modulus {modulus:?} is reducible over Z_{p}")));
        }
        Ok(FieldParams { p, c, modulus })
    }

    pub fn q(&self) -> u32 {
        self.p.pow(self.c)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Small Conway-style moduli for q in {4, 8, 9}; x for prime fields; otherwise
/// the lexicographically first monic irreducible of degree c.
pub fn default_modulus(p: u32, c: u32) -> Vec<u32> {
    match (p, c) {
        (_, 1) => vec![0, 1],
        (2, 2) => vec![1, 1, 1],
        (2, 3) => vec![1, 1, 0, 1],
        (3, 2) => vec![2, 2, 1],
        _ => first_irreducible(p, c),
    }
}

fn first_irreducible(p: u32, c: u32) -> Vec<u32> {
    let count = (p as u64).pow(c);
    for code in 0..count {
        let mut f = Vec::with_capacity(c as usize + 1);
        let mut t = code;
        for _ in 0..c {
            f.push((t % p as u64) as u32);
            t /= p as u64;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

// Dense polynomials over Z_p, ascending order, trimmed of trailing zeros.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(a: u32, mut e: u32, p: u32) -> u32 {
    let (mut b, mut r) = (a as u64 % p as u64, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let f = trim(f.to_vec());
    let df = f.len() - 1;
    let lead_inv = inv_mod_p(f[df], p);
    while a.len() > df {
        let da = a.len() - 1;
        let coef = (a[da] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &fi) in f.iter().enumerate() {
            let idx = da - df + i;
            a[idx] = ((a[idx] as u64 + (p - coef) as u64 * fi as u64) % p as u64) as u32;
        }
        a = trim(a);
    }
    a
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|v| v as u32).collect())
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    poly_rem(&poly_mul(a, b, p), f, p)
}

/// x^(p^k) mod f by k repeated p-th powers.
fn frobenius_x(k: u32, f: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_rem(&[0, 1], f, p);
    for _ in 0..k {
        let mut acc = vec![1u32];
        let mut base = r.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        r = acc;
    }
    r
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let v = (0..n)
        .map(|i| {
            let x = *a.get(i).unwrap_or(&0);
            let y = *b.get(i).unwrap_or(&0);
            (x + p - y) % p
        })
        .collect();
    trim(v)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn has_root(f: &[u32], p: u32) -> bool {
    (0..p).any(|x| {
        let mut acc = 0u64;
        for &a in f.iter().rev() {
            acc = (acc * x as u64 + a as u64) % p as u64;
        }
        acc == 0
    })
}

/// Root test for degree ≤ 3, Rabin's test (gcd with Frobenius) otherwise.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let f = trim(f.to_vec());
    if f.len() < 2 {
        return false;
    }
    let c = (f.len() - 1) as u32;
    if c == 1 {
        return true;
    }
    if c <= 3 {
        return !has_root(&f, p);
    }
    rabin_irreducible(&f, p)
}

pub fn rabin_irreducible(f: &[u32], p: u32) -> bool {
    let c = (f.len() - 1) as u32;
    let x = poly_rem(&[0, 1], f, p);
    if poly_sub(&frobenius_x(c, f, p), &x, p) != Vec::<u32>::new() {
        return false;
    }
    (2..=c).filter(|&d| c % d == 0 && is_prime(d)).all(|d| {
        let h = poly_sub(&frobenius_x(c / d, f, p), &x, p);
        poly_gcd(f, &h, p).len() == 1
    })
}

#[derive(Clone, Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct GaloisField {
    params: FieldParams,
    q: u32,
    tables: Option<Tables>,
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl GaloisField {
    pub fn new(params: FieldParams) -> Self {
        let q = params.q();
        let mut gf = GaloisField { params, q, tables: None };
        if q <= TABLE_LIMIT {
            let n = q as usize;
            let mut t = Tables { add: vec![0; n * n], mul: vec![0; n * n], neg: vec![0; n], inv: vec![0; n] };
            for a in 0..q {
                for b in 0..q {
                    t.add[a as usize * n + b as usize] = gf.add_slow(a, b);
                    t.mul[a as usize * n + b as usize] = gf.mul_slow(a, b);
                }
                t.neg[a as usize] = gf.neg_slow(a);
            }
            for a in 1..q {
                let b = (1..q).find(|&b| t.mul[a as usize * n + b as usize] == 1).expect("field");
                t.inv[a as usize] = b;
            }
            gf.tables = Some(t);
        }
        gf
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }
    pub fn p(&self) -> u32 {
        self.params.p
    }
    pub fn c(&self) -> u32 {
        self.params.c
    }
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn element(&self, index: u32) -> Result<GfElement> {
        if index >= self.q {
            return Err(Error::Config(format!("GF index {index} >= q = {}", self.q)));
        }
        Ok(GfElement(index))
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<GfElement> {
        if coeffs.len() > self.c() as usize || coeffs.iter().any(|&a| a >= self.p()) {
            return Err(Error::Config(format!("invalid GF coefficients {coeffs:?}")));
        }
        Ok(GfElement(coeffs.iter().rev().fold(0, |acc, &a| acc * self.p() + a)))
    }

    pub fn coeffs(&self, a: GfElement) -> Vec<u32> {
        let mut d = a.0;
        (0..self.c())
            .map(|_| {
                let r = d % self.p();
                d /= self.p();
                r
            })
            .collect()
    }

    /// ζ₀ component.
    pub fn trace_digit(&self, a: GfElement) -> u32 {
        a.0 % self.p()
    }

    pub fn all(&self) -> impl Iterator<Item = GfElement> {
        (0..self.q).map(GfElement)
    }

    pub fn add(&self, a: GfElement, b: GfElement) -> GfElement {
        match &self.tables {
            Some(t) => GfElement(t.add[(a.0 * self.q + b.0) as usize]),
            None => GfElement(self.add_slow(a.0, b.0)),
        }
    }

    pub fn neg(&self, a: GfElement) -> GfElement {
        match &self.tables {
            Some(t) => GfElement(t.neg[a.0 as usize]),
            None => GfElement(self.neg_slow(a.0)),
        }
    }

    pub fn sub(&self, a: GfElement, b: GfElement) -> GfElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: GfElement, b: GfElement) -> GfElement {
        match &self.tables {
            Some(t) => GfElement(t.mul[(a.0 * self.q + b.0) as usize]),
            None => GfElement(self.mul_slow(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: GfElement) -> Result<GfElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match &self.tables {
            Some(t) => GfElement(t.inv[a.0 as usize]),
            None => self.pow(a, self.q as u64 - 2),
        })
    }

    pub fn pow(&self, a: GfElement, mut e: u64) -> GfElement {
        let (mut base, mut acc) = (a, GfElement::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of an integer under Z → GF(p) ⊂ GF(q).
    pub fn from_int(&self, n: u64) -> GfElement {
        GfElement((n % self.p() as u64) as u32)
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        let (mut a, mut b, mut out, mut place) = (a, b, 0u32, 1u32);
        for _ in 0..self.c() {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    fn neg_slow(&self, a: u32) -> u32 {
        let p = self.p();
        let (mut a, mut out, mut place) = (a, 0u32, 1u32);
        for _ in 0..self.c() {
            out += ((p - a % p) % p) * place;
            a /= p;
            place *= p;
        }
        out
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        let prod = poly_mulmod(&self.coeffs(GfElement(a)), &self.coeffs(GfElement(b)), &self.params.modulus, p);
        prod.iter().rev().fold(0, |acc, &x| acc * p + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, c: u32) -> GaloisField {
        GaloisField::new(FieldParams::new(p, c, None).unwrap())
    }

    #[test]
    fn small_examples() {
        let g2 = gf(2, 1);
        assert_eq!(g2.add(GfElement::ONE, GfElement::ONE), GfElement::ZERO);
        assert_eq!(g2.mul(GfElement::ONE, GfElement::ONE), GfElement::ONE);
        assert_eq!(g2.inv(GfElement::ONE).unwrap(), GfElement::ONE);
        let g3 = gf(3, 1);
        let two = g3.element(2).unwrap();
        assert_eq!(g3.add(two, two), GfElement::ONE);
        assert_eq!(g3.mul(two, two), GfElement::ONE);
        let g5 = gf(5, 1);
        assert_eq!(g5.inv(g5.element(2).unwrap()).unwrap(), g5.element(3).unwrap());
    }

    #[test]
    fn gf4_examples() {
        let g = gf(2, 2);
        assert_eq!(g.params().modulus, vec![1, 1, 1]);
        let z1 = g.from_coeffs(&[0, 1]).unwrap();
        let z1p1 = g.from_coeffs(&[1, 1]).unwrap();
        assert_eq!(g.add(z1, GfElement::ONE), z1p1);
        assert_eq!(g.mul(z1, z1), z1p1);
        assert_eq!(g.inv(z1).unwrap(), z1p1);
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(gf(3, 2).inv(GfElement::ZERO), Err(Error::DivisionByZero));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(FieldParams::new(4, 1, None).is_err());
        assert!(FieldParams::new(2, 2, Some(vec![1, 0, 1])).is_err());
        assert!(FieldParams::new(2, 2, Some(vec![1, 1, 0])).is_err());
        assert!(FieldParams::new(2, 9, None).is_err());
    }

    #[test]
    fn root_test_agrees_with_rabin_for_low_degree() {
        for p in [2u32, 3, 5] {
            for c in 2..=3u32 {
                for code in 0..p.pow(c) {
                    let mut f: Vec<u32> = (0..c).map(|i| code / p.pow(i) % p).collect();
                    f.push(1);
                    assert_eq!(is_irreducible(&f, p), rabin_irreducible(&f, p), "{f:?} over Z_{p}");
                }
            }
        }
    }

    #[test]
    fn count_of_irreducibles_matches_necklace_formula() {
        // Number of monic irreducibles of degree 4 over GF(2) is 3, over GF(3) is 18.
        for (p, want) in [(2u32, 3usize), (3, 18)] {
            let n = (0..p.pow(4))
                .filter(|code| {
                    let mut f: Vec<u32> = (0..4).map(|i| code / p.pow(i) % p).collect();
                    f.push(1);
                    is_irreducible(&f, p)
                })
                .count();
            assert_eq!(n, want);
        }
    }

    #[test]
    fn table_and_slow_paths_agree() {
        let g = gf(3, 2);
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(g.mul(GfElement(a), GfElement(b)).0, g.mul_slow(a, b));
                assert_eq!(g.add(GfElement(a), GfElement(b)).0, g.add_slow(a, b));
            }
        }
    }

    #[test]
    fn large_field_without_tables() {
        let g = gf(2, 8);
        assert!(g.tables.is_some());
        let g = gf(3, 6);
        assert!(g.tables.is_none());
        for a in 1..50 {
            let a = GfElement(a * 13 % 729);
            if a.is_zero() {
                continue;
            }
            assert_eq!(g.mul(a, g.inv(a).unwrap()), GfElement::ONE);
            assert_eq!(g.pow(a, 729), a);
        }
    }

    #[test]
    fn field_axioms_exhaustive_up_to_64() {
        for (p, c) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4), (2, 5), (2, 6), (5, 2)] {
            let g = gf(p, c);
            let q = g.q();
            for a in g.all() {
                assert_eq!(g.pow(a, q as u64), a);
                if !a.is_zero() {
                    assert_eq!(g.mul(a, g.inv(a).unwrap()), GfElement::ONE);
                    let invs = g.all().filter(|&b| g.mul(a, b) == GfElement::ONE).count();
                    assert_eq!(invs, 1);
                }
                for b in g.all() {
                    assert_eq!(g.add(a, b), g.add(b, a));
                    assert_eq!(g.mul(a, b), g.mul(b, a));
                    for c in g.all() {
                        assert_eq!(g.add(g.add(a, b), c), g.add(a, g.add(b, c)));
                        assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                        assert_eq!(g.mul(a, g.add(b, c)), g.add(g.mul(a, b), g.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn serde_defaults_modulus() {
        let fp: FieldParams = serde_json::from_str(r#"{"p":3,"c":2}"#).unwrap();
        assert_eq!(fp.modulus, vec![2, 2, 1]);
        assert!(serde_json::from_str::<FieldParams>(r#"{"p":6,"c":1}"#).is_err());
    }
}
