//! Exact arithmetic over GF(p^e).
//!
//! Elements are identified by an index in `[0, q)` that encodes the
//! coefficient vector `(c_0, ..., c_{e-1})` over GF(p) in base p, with `c_0`
//! least significant. Index 0 is the additive identity and index 1 the
//! multiplicative identity, so the canonical enumeration `f_1, ..., f_q`
//! returned by [`FieldSpec::elements`] always starts at zero.
//!
//! All arithmetic is exact integer arithmetic; field orders are capped at
//! [`FIELD_ORDER_CAP`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest supported field order (2^20).
pub const FIELD_ORDER_CAP: u64 = 1 << 20;

/// An element of a finite field, identified by its canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> u64 {
        self.0
    }
}

/// A finite field GF(p^e) with a fixed modulus and element ordering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u64,
    e: u32,
    q: u64,
    /// Coefficients of the monic degree-e modulus over GF(p), constant term
    /// first (length e + 1). For e = 1 this is the placeholder `x`.
    modulus: Vec<u64>,
}

/// Build GF(p^e) with the lexicographically smallest monic irreducible
/// modulus of degree e (coefficient vectors compared high-to-low).
pub fn make_field(p: u64, e: u32) -> Result<FieldSpec> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if e == 0 {
        return Err(Error::InvalidParams("extension degree e must be >= 1".into()));
    }
    let q = (p as u128).checked_pow(e).ok_or(Error::TooLarge {
        q: u128::MAX,
        cap: FIELD_ORDER_CAP,
    })?;
    if q > FIELD_ORDER_CAP as u128 {
        return Err(Error::TooLarge { q, cap: FIELD_ORDER_CAP });
    }
    let q = q as u64;

    let modulus = if e == 1 {
        vec![0, 1]
    } else {
        find_irreducible(p, e).expect("an irreducible polynomial of every degree exists over GF(p)")
    };

    Ok(FieldSpec { p, e, q, modulus })
}

impl FieldSpec {
    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn extension_degree(&self) -> u32 {
        self.e
    }

    /// Field order q = p^e.
    pub fn order(&self) -> u64 {
        self.q
    }

    /// Modulus coefficients, constant term first; length e + 1, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn element(&self, index: u64) -> Result<FieldElement> {
        if index < self.q {
            Ok(FieldElement(index))
        } else {
            Err(Error::InvalidParams(format!(
                "element index {index} out of range for field of order {}",
                self.q
            )))
        }
    }

    /// All q elements in canonical index order; the first element is 0.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.e == 1 {
            return FieldElement((a.0 + b.0) % self.p);
        }
        let (da, db) = (self.digits(a.0), self.digits(b.0));
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        FieldElement(self.from_digits(&sum))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.e == 1 {
            return FieldElement((self.p - a.0) % self.p);
        }
        let da = self.digits(a.0);
        let neg: Vec<u64> = da.iter().map(|x| (self.p - x) % self.p).collect();
        FieldElement(self.from_digits(&neg))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.e == 1 {
            return FieldElement(a.0 * b.0 % self.p);
        }
        let (da, db) = (self.digits(a.0), self.digits(b.0));
        let e = self.e as usize;
        // Schoolbook product, then reduce x^i (i >= e) via the monic modulus:
        // x^e = -(m_0 + m_1 x + ... + m_{e-1} x^{e-1}).
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        for i in (e..2 * e - 1).rev() {
            let t = prod[i];
            if t == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..e {
                let m = self.modulus[j];
                prod[i - e + j] = (prod[i - e + j] + t * (self.p - m) % self.p) % self.p;
            }
        }
        FieldElement(self.from_digits(&prod[..e]))
    }

    /// Multiplicative inverse via a^(q-2).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn pow(&self, a: FieldElement, mut n: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    fn digits(&self, mut x: u64) -> Vec<u64> {
        let mut d = vec![0u64; self.e as usize];
        for slot in d.iter_mut() {
            *slot = x % self.p;
            x /= self.p;
        }
        d
    }

    fn from_digits(&self, d: &[u64]) -> u64 {
        let mut x = 0u64;
        for &c in d.iter().rev() {
            x = x * self.p + c;
        }
        x
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Lexicographic search (coefficients read high-to-low) for a monic
/// irreducible polynomial of degree e over GF(p).
fn find_irreducible(p: u64, e: u32) -> Option<Vec<u64>> {
    let e = e as usize;
    let total = (p as u128).pow(e as u32);
    let mut n = 0u128;
    while n < total {
        // Digit i of n (most significant first) is the coefficient of x^{e-1-i}.
        let mut coeffs = vec![0u64; e + 1];
        coeffs[e] = 1;
        let mut rem = n;
        for i in 0..e {
            let place = (p as u128).pow((e - 1 - i) as u32);
            coeffs[e - 1 - i] = (rem / place) as u64;
            rem %= place;
        }
        if is_irreducible(&coeffs, p) {
            return Some(coeffs);
        }
        n += 1;
    }
    None
}

/// Trial division by every monic polynomial of degree 1..=e/2.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let e = f.len() - 1;
    for deg in 1..=e / 2 {
        let count = (p as u128).pow(deg as u32);
        let mut n = 0u128;
        while n < count {
            let mut g = vec![0u64; deg + 1];
            g[deg] = 1;
            let mut rem = n;
            for c in g.iter_mut().take(deg) {
                *c = (rem % p as u128) as u64;
                rem /= p as u128;
            }
            if poly_rem_is_zero(f, &g, p) {
                return false;
            }
            n += 1;
        }
    }
    true
}

/// True when g (monic) divides f exactly over GF(p).
fn poly_rem_is_zero(f: &[u64], g: &[u64], p: u64) -> bool {
    let mut r: Vec<u64> = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        if lead != 0 {
            let shift = r.len() - 1 - dg;
            for j in 0..=dg {
                let t = lead * g[j] % p;
                r[shift + j] = (r[shift + j] + p - t) % p;
            }
        }
        r.pop();
    }
    r.iter().all(|&c| c == 0)
}
