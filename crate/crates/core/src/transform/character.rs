//! The additive character χ and exact sums of its values.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField};

/// exp(2πi·e/p), kept as the exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnitRoot {
    e: u32,
    p: u32,
}

impl UnitRoot {
    pub fn one(p: u32) -> Self {
        UnitRoot { e: 0, p }
    }
    pub fn new(e: u32, p: u32) -> Self {
        UnitRoot { e: e % p, p }
    }
    pub fn exponent(self) -> u32 {
        self.e
    }
    pub fn modulus(self) -> u32 {
        self.p
    }
    pub fn is_one(self) -> bool {
        self.e == 0
    }
    pub fn combine(self, other: UnitRoot) -> Result<UnitRoot> {
        if self.p != other.p {
            return Err(Error::Mismatch(format!("roots of order {} and {}", self.p, other.p)));
        }
        Ok(UnitRoot::new(self.e + other.e, self.p))
    }
    pub fn conj(self) -> UnitRoot {
        UnitRoot::new(self.p - self.e, self.p)
    }
    pub fn to_complex(self) -> Complex64 {
        RootTable::value(self.e, self.p)
    }
}

/// The p roots of unity in double precision, with ±1 exact.
#[derive(Clone, Debug)]
pub struct RootTable {
    values: Vec<Complex64>,
}

impl RootTable {
    pub fn new(p: u32) -> Self {
        RootTable { values: (0..p).map(|e| Self::value(e, p)).collect() }
    }

    fn value(e: u32, p: u32) -> Complex64 {
        if e == 0 {
            Complex64::new(1.0, 0.0)
        } else if 2 * e == p {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / p as f64)
        }
    }

    pub fn get(&self, u: UnitRoot) -> Complex64 {
        self.values[u.e as usize]
    }
}

/// χ(x): ζ₀ component of the 𝔭⁻¹ coefficient.
pub fn chi(lf: &LocalField, x: &FieldElement) -> Result<UnitRoot> {
    let c = x.known_coeff(-1)?;
    Ok(UnitRoot::new(lf.gf().trace_digit(c), lf.p()))
}

/// χ(ξx), computed from the single product coefficient it needs.
pub fn chi_pair(lf: &LocalField, xi: &FieldElement, x: &FieldElement) -> Result<UnitRoot> {
    let c = lf.product_coeff(xi, x, -1)?;
    Ok(UnitRoot::new(lf.gf().trace_digit(c), lf.p()))
}

/// Σ of unit roots held as a histogram over exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterSum {
    counts: Vec<u64>,
}

impl CharacterSum {
    pub fn new(p: u32) -> Self {
        CharacterSum { counts: vec![0; p as usize] }
    }

    pub fn push(&mut self, u: UnitRoot) {
        self.counts[u.e as usize] += 1;
    }

    pub fn push_exponent(&mut self, e: u32) {
        self.counts[e as usize] += 1;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact: for p prime, Σ c_e ω^e = 0 iff all c_e are equal.
    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == self.counts[0])
    }

    pub fn to_complex(&self, roots: &RootTable) -> Complex64 {
        let p = self.counts.len() as u32;
        self.counts.iter().enumerate().map(|(e, &c)| roots.get(UnitRoot::new(e as u32, p)) * c as f64).sum()
    }
}

impl Extend<UnitRoot> for CharacterSum {
    fn extend<T: IntoIterator<Item = UnitRoot>>(&mut self, iter: T) {
        for u in iter {
            self.push(u);
        }
    }
}
