//! Coefficient arithmetic: the chain ring `Z/p^N` and the cyclotomic
//! quotients `Z[X]/(Phi_{p^m}(X), p^N)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus we allow, so that products fit comfortably in `u128`.
const MODULUS_LIMIT: u128 = 1 << 62;

pub(crate) fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// `p^e` as an integer, without any modular reduction.
pub fn ipow(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("power overflows u64")
}

/// The ring `Z/p^N`. Cheap to copy; every residue carries one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zpn {
    p: u64,
    prec: u32,
    modulus: u64,
}

impl Zpn {
    pub fn new(p: u64, prec: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if prec == 0 {
            return Err(Error::OutOfRange("precision must be positive".into()));
        }
        let modulus = (p as u128)
            .checked_pow(prec)
            .filter(|&m| m < MODULUS_LIMIT)
            .ok_or(Error::PrecisionTooLarge { p, prec })?;
        Ok(Zpn { p, prec, modulus: modulus as u64 })
    }

    /// Highest precision supported for this prime.
    pub fn max_prec(p: u64) -> u32 {
        let mut e = 0;
        let mut acc: u128 = 1;
        while acc * (p as u128) < MODULUS_LIMIT {
            acc *= p as u128;
            e += 1;
        }
        e
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime, different precision.
    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        Zpn::new(self.p, prec)
    }

    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// `a + b*c`
    pub fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        ((a as u128 + b as u128 * c as u128) % self.modulus as u128) as u64
    }

    /// p-adic valuation of a residue, `prec` for zero.
    pub fn val(&self, mut x: u64) -> u32 {
        if x == 0 {
            return self.prec;
        }
        let mut e = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            e += 1;
        }
        e
    }

    pub fn valuation(&self, x: u64) -> Valuation {
        if x == 0 {
            Valuation::AtLeast(self.prec)
        } else {
            Valuation::Finite(self.val(x))
        }
    }

    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    /// Inverse of a unit.
    pub fn inv(&self, x: u64) -> Option<u64> {
        if !self.is_unit(x) {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.reduce_i128(t0))
    }

    /// `p^e mod p^N`.
    pub fn p_pow(&self, e: u32) -> u64 {
        if e >= self.prec {
            0
        } else {
            ipow(self.p, e)
        }
    }

    /// Exact quotient `x / p^e` of the representative; requires `val(x) >= e`.
    pub fn div_p_pow(&self, x: u64, e: u32) -> u64 {
        debug_assert!(self.val(x) >= e);
        x / ipow(self.p, e)
    }

    pub fn residue(&self, value: i128) -> Residue {
        Residue { value: self.reduce_i128(value), ring: *self }
    }
}

/// p-adic valuation of a residue modulo `p^N`: either exact, or only known
/// to be at least `N` (the residue is zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    AtLeast(u32),
}

impl Valuation {
    /// Lower bound carried by the valuation.
    pub fn bound(&self) -> u32 {
        match *self {
            Valuation::Finite(e) | Valuation::AtLeast(e) => e,
        }
    }

    pub fn is_at_least(&self, e: u32) -> bool {
        self.bound() >= e
    }

    pub fn min(self, other: Valuation) -> Valuation {
        if self.bound() <= other.bound() {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(e) => write!(f, "{e}"),
            Valuation::AtLeast(e) => write!(f, ">= {e}"),
        }
    }
}

/// An element of `Z/p^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    ring: Zpn,
}

impl Residue {
    pub fn new(ring: Zpn, value: i128) -> Self {
        ring.residue(value)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn val_p(&self) -> Valuation {
        self.ring.valuation(self.value)
    }

    pub fn inv(&self) -> Option<Residue> {
        self.ring.inv(self.value).map(|value| Residue { value, ring: self.ring })
    }

    fn check(&self, rhs: &Residue) {
        assert_eq!(self.ring, rhs.ring, "residues from different rings");
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        self.check(&rhs);
        Residue { value: self.ring.add(self.value, rhs.value), ring: self.ring }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        self.check(&rhs);
        Residue { value: self.ring.sub(self.value, rhs.value), ring: self.ring }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        self.check(&rhs);
        Residue { value: self.ring.mul(self.value, rhs.value), ring: self.ring }
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue { value: self.ring.neg(self.value), ring: self.ring }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.ring.p, self.ring.prec)
    }
}

/// Degree of `Phi_{p^m}`, i.e. `phi(p^m)`; 1 for `m = 0`.
pub fn cyclotomic_degree(p: u64, level: u32) -> usize {
    if level == 0 {
        1
    } else {
        ((p - 1) * ipow(p, level - 1)) as usize
    }
}

/// Residue of `Z[zeta_{p^m}]/(p^N)`, stored in the power basis
/// `1, X, ..., X^{phi(p^m)-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    ring: Zpn,
    level: u32,
    coeffs: Vec<u64>,
}

impl CyclotomicInt {
    pub fn zero(ring: Zpn, level: u32) -> Self {
        CyclotomicInt { ring, level, coeffs: vec![0; cyclotomic_degree(ring.p, level)] }
    }

    pub fn one(ring: Zpn, level: u32) -> Self {
        let mut z = Self::zero(ring, level);
        z.coeffs[0] = 1;
        z
    }

    pub fn from_int(ring: Zpn, level: u32, c: i128) -> Self {
        let mut z = Self::zero(ring, level);
        z.coeffs[0] = ring.reduce_i128(c);
        z
    }

    /// `zeta_{p^m}^e` for `0 <= e < p^m`.
    pub fn root(ring: Zpn, level: u32, e: u64) -> Result<Self> {
        let order = ipow(ring.p, level);
        if e >= order {
            return Err(Error::OutOfRange(format!("root exponent {e} >= {order}")));
        }
        let mut counts = vec![0u64; order as usize];
        counts[e as usize] = 1;
        Ok(Self::from_power_sums(ring, level, counts))
    }

    /// `sum_k counts[k] X^k` for `k < p^m`, reduced to canonical form.
    pub fn from_power_sums(ring: Zpn, level: u32, mut counts: Vec<u64>) -> Self {
        let p = ring.p;
        let order = ipow(p, level) as usize;
        assert_eq!(counts.len(), order);
        let deg = cyclotomic_degree(p, level);
        if level == 0 {
            return CyclotomicInt { ring, level, coeffs: counts };
        }
        let step = ipow(p, level - 1) as usize;
        for k in (deg..order).rev() {
            let c = counts[k];
            if c == 0 {
                continue;
            }
            counts[k] = 0;
            for j in 0..(p as usize - 1) {
                let t = k - deg + j * step;
                counts[t] = ring.sub(counts[t], c);
            }
        }
        counts.truncate(deg);
        CyclotomicInt { ring, level, coeffs: counts }
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Largest `e` with `p^e` dividing the element in `Z_p[zeta]`; the power
    /// basis is a `Z_p`-basis, so this is the minimum over coefficients.
    pub fn valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .map(|&c| self.ring.valuation(c))
            .fold(Valuation::AtLeast(self.ring.prec), Valuation::min)
    }

    fn check(&self, rhs: &Self) -> Result<()> {
        if self.ring != rhs.ring || self.level != rhs.level {
            return Err(Error::Mismatch(format!(
                "cyclotomic integers at (p^{}, level {}) and (p^{}, level {})",
                self.ring.prec, self.level, rhs.ring.prec, rhs.level
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| self.ring.add(a, b)).collect();
        Ok(CyclotomicInt { coeffs, ..self.clone() })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| self.ring.sub(a, b)).collect();
        Ok(CyclotomicInt { coeffs, ..self.clone() })
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|&a| self.ring.neg(a)).collect();
        CyclotomicInt { coeffs, ..self.clone() }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        let order = ipow(self.ring.p, self.level) as usize;
        let mut acc = vec![0u64; order];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b != 0 {
                    let k = (i + j) % order;
                    acc[k] = self.ring.mul_add(acc[k], a, b);
                }
            }
        }
        Ok(Self::from_power_sums(self.ring, self.level, acc))
    }

    pub fn scale(&self, c: u64) -> Self {
        let coeffs = self.coeffs.iter().map(|&a| self.ring.mul(a, c)).collect();
        CyclotomicInt { coeffs, ..self.clone() }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.ring, self.level);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", terms.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32) -> Zpn {
        Zpn::new(p, n).unwrap()
    }

    #[test]
    fn valuations() {
        assert_eq!(ring(3, 3).residue(9).val_p(), Valuation::Finite(2));
        assert_eq!(ring(2, 4).residue(0).val_p(), Valuation::AtLeast(4));
        assert_eq!(ring(3, 3).residue(5).val_p(), Valuation::Finite(0));
    }

    #[test]
    fn rejects_composites_and_huge_precision() {
        assert_eq!(Zpn::new(4, 2), Err(Error::NotPrime(4)));
        assert!(matches!(Zpn::new(2, 70), Err(Error::PrecisionTooLarge { .. })));
        assert!(Zpn::new(2, Zpn::max_prec(2)).is_ok());
        assert!(Zpn::new(5, Zpn::max_prec(5) + 1).is_err());
    }

    #[test]
    fn inverse_of_units() {
        let r = ring(3, 4);
        for x in 1..81u64 {
            match r.inv(x) {
                Some(y) => assert_eq!(r.mul(x, y), 1),
                None => assert_eq!(x % 3, 0),
            }
        }
    }

    #[test]
    fn cyclotomic_products() {
        let r = ring(2, 4);
        let z2 = CyclotomicInt::root(r, 1, 1).unwrap();
        assert_eq!(z2.mul(&z2).unwrap(), CyclotomicInt::one(r, 1));
        let z4 = CyclotomicInt::root(r, 2, 1).unwrap();
        assert_eq!(z4.mul(&z4).unwrap(), CyclotomicInt::from_int(r, 2, -1));

        // (1 + z3)(1 + z3^2) = 2 + z3 + z3^2 = 1
        let r3 = ring(3, 3);
        let one = CyclotomicInt::one(r3, 1);
        let a = one.add(&CyclotomicInt::root(r3, 1, 1).unwrap()).unwrap();
        let b = one.add(&CyclotomicInt::root(r3, 1, 2).unwrap()).unwrap();
        assert_eq!(a.mul(&b).unwrap(), one);
    }

    #[test]
    fn embedded_roots() {
        let r = ring(3, 2);
        assert_eq!(CyclotomicInt::root(r, 2, 0).unwrap(), CyclotomicInt::one(r, 2));
        assert_eq!(CyclotomicInt::root(r, 0, 0).unwrap(), CyclotomicInt::one(r, 0));
        let r2 = ring(2, 3);
        assert_eq!(CyclotomicInt::root(r2, 1, 1).unwrap(), CyclotomicInt::from_int(r2, 1, -1));
        // zeta_3^2 = -1 - zeta_3
        let z = CyclotomicInt::root(r, 1, 2).unwrap();
        assert_eq!(z.coeffs(), &[8, 8]);
        assert!(CyclotomicInt::root(r, 1, 3).is_err());
    }

    #[test]
    fn mismatched_levels_are_rejected() {
        let r = ring(2, 3);
        let a = CyclotomicInt::one(r, 1);
        let b = CyclotomicInt::one(r, 2);
        assert!(a.mul(&b).is_err());
        let c = CyclotomicInt::one(ring(2, 4), 1);
        assert!(a.add(&c).is_err());
    }

    #[test]
    fn orbit_sums_vanish() {
        for p in [2u64, 3] {
            let r = ring(p, 4);
            for m in 1..=3u32 {
                let mut s = CyclotomicInt::zero(r, m);
                for e in 0..ipow(p, m) {
                    s = s.add(&CyclotomicInt::root(r, m, e).unwrap()).unwrap();
                }
                assert!(s.is_zero(), "p={p} m={m}");
                // Phi_{p^m}(zeta) = sum_j zeta^{j p^{m-1}}
                let step = ipow(p, m - 1);
                let mut phi = CyclotomicInt::zero(r, m);
                for j in 0..p {
                    phi = phi.add(&CyclotomicInt::root(r, m, j * step).unwrap()).unwrap();
                }
                assert!(phi.is_zero());
            }
        }
    }

    #[test]
    fn level_zero_is_plain_residue() {
        let r = ring(3, 2);
        let a = CyclotomicInt::from_int(r, 0, 4);
        let b = CyclotomicInt::from_int(r, 0, 7);
        assert_eq!(a.mul(&b).unwrap(), CyclotomicInt::from_int(r, 0, 28));
        assert_eq!(a.coeffs().len(), 1);
    }

    #[test]
    fn cyclotomic_valuation() {
        let r = ring(3, 4);
        let x = CyclotomicInt::root(r, 1, 1).unwrap().scale(9).add(&CyclotomicInt::from_int(r, 1, 27)).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(2));
        assert_eq!(CyclotomicInt::zero(r, 2).valuation(), Valuation::AtLeast(4));
    }
}
