//! The finite-level Iwasawa algebra `R_{m,N} = (Z/p^N)[(Z/p^m)^d]`.
//!
//! Elements are dense coefficient arrays indexed by group elements in
//! mixed radix: the exponent vector `(e_1, .., e_d)` sits at index
//! `e_1 + e_2 q + .. + e_d q^{d-1}` with `q = p^m`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{ipow, Zpn};
use crate::poly::Poly;

/// Hard ceiling on dense array sizes.
pub const MAX_GROUP_SIZE: u128 = 1 << 20;

/// An element of `Gamma = Z_p^d`, named by its exponent vector in the
/// standard basis `sigma_1, .., sigma_d`. Interpreted mod `p^m` at level `m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GammaVector(pub Vec<i64>);

impl GammaVector {
    pub fn new(exps: impl Into<Vec<i64>>) -> Self {
        GammaVector(exps.into())
    }

    /// The `i`-th standard generator `sigma_{i+1}`.
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        GammaVector(v)
    }

    pub fn standard_basis(rank: usize) -> Vec<Self> {
        (0..rank).map(|i| Self::basis(rank, i)).collect()
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[i64] {
        &self.0
    }

    /// `sigma^k`
    pub fn scaled(&self, k: i64) -> Self {
        GammaVector(self.0.iter().map(|&e| e * k).collect())
    }
}

impl fmt::Display for GammaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Rank of an integer matrix reduced mod `p`.
pub(crate) fn rank_mod_p(rows: &[Vec<i64>], p: u64) -> usize {
    let f = Zpn::new(p, 1).expect("prime");
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| f.reduce_i128(x as i128)).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][c]).expect("nonzero in F_p");
        for i in 0..m.len() {
            if i != rank && m[i][c] != 0 {
                let q = f.mul(m[i][c], inv);
                for j in c..cols {
                    let t = f.mul(q, m[rank][j]);
                    m[i][j] = f.sub(m[i][j], t);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Checks that `basis` is a `Z_p`-basis of `Gamma`: `d` vectors whose
/// exponent matrix is invertible mod `p`.
pub fn validate_basis(basis: &[GammaVector], p: u64, rank: usize) -> Result<()> {
    if basis.len() != rank || basis.iter().any(|b| b.rank() != rank) {
        return Err(Error::InvalidBasis(format!("need {rank} vectors of length {rank}")));
    }
    let rows: Vec<Vec<i64>> = basis.iter().map(|b| b.0.clone()).collect();
    if rank_mod_p(&rows, p) != rank {
        return Err(Error::InvalidBasis("exponent matrix is singular mod p".into()));
    }
    Ok(())
}

/// A chosen tight set `tau_1, .., tau_c` of generators of `Gamma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TightSet(pub Vec<GammaVector>);

impl TightSet {
    pub fn standard(rank: usize) -> Self {
        TightSet(GammaVector::standard_basis(rank))
    }

    pub fn taus(&self) -> &[GammaVector] {
        &self.0
    }

    /// Finite-level check at `p^max(level,1)`: every `tau` is outside
    /// `Gamma^p`, the set generates `Gamma`, and no two members span the
    /// same procyclic subgroup mod `p^level`.
    pub fn validate(&self, p: u64, rank: usize, level: u32) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidTightSet("empty".into()));
        }
        if self.0.iter().any(|t| t.rank() != rank) {
            return Err(Error::InvalidTightSet(format!("vectors must have length {rank}")));
        }
        for t in &self.0 {
            if t.0.iter().all(|&e| e.rem_euclid(p as i64) == 0) {
                return Err(Error::InvalidTightSet(format!("{t} lies in Gamma^p")));
            }
        }
        let rows: Vec<Vec<i64>> = self.0.iter().map(|t| t.0.clone()).collect();
        if rank_mod_p(&rows, p) != rank {
            return Err(Error::InvalidTightSet("does not generate Gamma".into()));
        }
        let ring = Zpn::new(p, level.max(1))?;
        let red = |t: &GammaVector| -> Vec<u64> { t.0.iter().map(|&e| ring.reduce_i128(e as i128)).collect() };
        for (i, a) in self.0.iter().enumerate() {
            for b in &self.0[i + 1..] {
                let (ra, rb) = (red(a), red(b));
                // b primitive: pick a unit coordinate and test ra == u * rb
                let k = rb.iter().position(|&x| ring.is_unit(x)).expect("primitive");
                let u = ring.mul(ra[k], ring.inv(rb[k]).unwrap());
                if ring.is_unit(u) && ra.iter().zip(&rb).all(|(&x, &y)| x == ring.mul(u, y)) {
                    return Err(Error::InvalidTightSet(format!("{a} and {b} generate the same subgroup")));
                }
            }
        }
        Ok(())
    }
}

/// The ring `R_{m,N}`: prime, rank `d`, level `m` and coefficient ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupRing {
    rank: usize,
    level: u32,
    coeffs: Zpn,
    order: u64,
    size: usize,
}

impl GroupRing {
    pub fn new(p: u64, rank: usize, level: u32, prec: u32) -> Result<Self> {
        Self::over(Zpn::new(p, prec)?, rank, level)
    }

    pub fn over(coeffs: Zpn, rank: usize, level: u32) -> Result<Self> {
        let p = coeffs.p();
        let size = (p as u128)
            .checked_pow(level * rank as u32)
            .filter(|&s| s <= MAX_GROUP_SIZE)
            .ok_or(Error::CapExceeded { needed: u128::MAX, cap: MAX_GROUP_SIZE })?;
        Ok(GroupRing { rank, level, coeffs, order: ipow(p, level), size: size as usize })
    }

    pub fn p(&self) -> u64 {
        self.coeffs.p()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.prec()
    }

    pub fn zpn(&self) -> Zpn {
        self.coeffs
    }

    /// `p^m`, the order of each cyclic factor.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Number of group elements, `p^{dm}`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Same group, other level and precision.
    pub fn at(&self, level: u32, prec: u32) -> Result<Self> {
        Self::over(self.coeffs.with_prec(prec)?, self.rank, level)
    }

    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        self.at(self.level, prec)
    }

    pub fn index_of(&self, exps: &[u64]) -> usize {
        exps.iter().rev().fold(0usize, |acc, &e| acc * self.order as usize + e as usize)
    }

    pub fn exps_of(&self, mut idx: usize) -> Vec<u64> {
        let q = self.order as usize;
        (0..self.rank)
            .map(|_| {
                let e = idx % q;
                idx /= q;
                e as u64
            })
            .collect()
    }

    pub fn reduce_gamma(&self, g: &GammaVector) -> Result<Vec<u64>> {
        if g.rank() != self.rank {
            return Err(Error::Mismatch(format!("group vector {g} in rank {}", self.rank)));
        }
        Ok(g.0.iter().map(|&e| e.rem_euclid(self.order as i64) as u64).collect())
    }

    /// Index of `g * h` given indices of `g` and `h`.
    pub fn add_indices(&self, a: usize, b: usize) -> usize {
        let q = self.order as usize;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.rank {
            let s = (a % q + b % q) % q;
            out += s * place;
            place *= q;
            a /= q;
            b /= q;
        }
        out
    }

    pub fn inverse_index(&self, a: usize) -> usize {
        let q = self.order;
        let inv: Vec<u64> = self.exps_of(a).into_iter().map(|e| (q - e) % q).collect();
        self.index_of(&inv)
    }

    pub fn zero(&self) -> GroupRingElement {
        GroupRingElement { ring: *self, coeffs: vec![0; self.size] }
    }

    pub fn scalar(&self, c: i128) -> GroupRingElement {
        let mut z = self.zero();
        z.coeffs[0] = self.coeffs.reduce_i128(c);
        z
    }

    pub fn one(&self) -> GroupRingElement {
        self.scalar(1)
    }

    pub fn from_coeffs(&self, coeffs: Vec<u64>) -> Result<GroupRingElement> {
        if coeffs.len() != self.size {
            return Err(Error::Mismatch(format!("{} coefficients for a group of size {}", coeffs.len(), self.size)));
        }
        Ok(GroupRingElement { ring: *self, coeffs: coeffs.into_iter().map(|c| self.coeffs.reduce(c)).collect() })
    }

    /// The group element `g` as a ring element.
    pub fn group_element(&self, g: &GammaVector) -> Result<GroupRingElement> {
        let idx = self.index_of(&self.reduce_gamma(g)?);
        let mut z = self.zero();
        z.coeffs[idx] = 1;
        Ok(z)
    }

    /// `sigma_{i+1}`
    pub fn generator(&self, i: usize) -> GroupRingElement {
        self.group_element(&GammaVector::basis(self.rank, i)).expect("rank matches")
    }

    /// `omega_{s,n} = s^{p^n} - 1`, with `omega_{s,-1} = 1`.
    pub fn omega(&self, s: &GammaVector, n: i64) -> Result<GroupRingElement> {
        if n < -1 {
            return Err(Error::IndexOrder(format!("omega index {n} < -1")));
        }
        if n == -1 {
            return Ok(self.one());
        }
        let g = self.power_of(s, n as u32)?;
        Ok(&g - &self.one())
    }

    /// `s^{p^n}`
    fn power_of(&self, s: &GammaVector, n: u32) -> Result<GroupRingElement> {
        let base = self.reduce_gamma(s)?;
        if n >= self.level {
            return Ok(self.one());
        }
        let k = ipow(self.p(), n);
        let exps: Vec<u64> = base.iter().map(|&e| (e * k) % self.order).collect();
        let mut z = self.zero();
        z.coeffs[self.index_of(&exps)] = 1;
        Ok(z)
    }

    /// `nu_{s,n,m} = omega_{s,m} / omega_{s,n}`, expanded as the sum
    /// `sum_{j < p^{m-n}} s^{j p^n}` for `n >= 0`.
    pub fn nu(&self, s: &GammaVector, n: i64, m: i64) -> Result<GroupRingElement> {
        if !(m >= n && n >= -1) {
            return Err(Error::IndexOrder(format!("nu needs m >= n >= -1, got n = {n}, m = {m}")));
        }
        if n == -1 {
            return self.omega(s, m);
        }
        let (n, m) = (n as u32, m as u32);
        let step = self.power_of(s, n)?;
        let step_idx = step.coeffs.iter().position(|&c| c == 1).expect("group element");
        // s^{p^n} has order p^{level-n}; the sum wraps that cycle p^{(m-n)-(level-n)} times
        let cycle = self.level.saturating_sub(n);
        let terms = m - n;
        let (count, mult) = if terms >= cycle {
            (ipow(self.p(), cycle), self.coeffs.p_pow(terms - cycle))
        } else {
            (ipow(self.p(), terms), 1)
        };
        let mut z = self.zero();
        let mut idx = 0;
        for _ in 0..count {
            z.coeffs[idx] = self.coeffs.add(z.coeffs[idx], mult);
            idx = self.add_indices(idx, step_idx);
        }
        Ok(z)
    }

    /// `nu_{n,m} = prod_i nu_{sigma_i,n,m}` over a basis of `Gamma`.
    pub fn nu_full(&self, n: i64, m: i64, basis: &[GammaVector]) -> Result<GroupRingElement> {
        if !(m >= n && n >= 0) {
            return Err(Error::IndexOrder(format!("nu_full needs m >= n >= 0, got n = {n}, m = {m}")));
        }
        validate_basis(basis, self.p(), self.rank)?;
        let mut acc = self.one();
        for s in basis {
            acc = &acc * &self.nu(s, n, m)?;
        }
        Ok(acc)
    }

    /// `nu_{n,m}` for the standard basis; modulo `I_m` this is the norm
    /// element of `Gamma^{(n)}/Gamma^{(m)}` and does not depend on the basis.
    pub fn norm_element(&self, n: i64, m: i64) -> Result<GroupRingElement> {
        self.nu_full(n, m, &GammaVector::standard_basis(self.rank))
    }

    /// Substitutes `T_i = sigma_i - 1` into an integer polynomial.
    pub fn lift(&self, poly: &Poly) -> Result<GroupRingElement> {
        if poly.nvars() > self.rank {
            return Err(Error::Mismatch(format!("polynomial in {} variables over rank {}", poly.nvars(), self.rank)));
        }
        let ts: Vec<GroupRingElement> = (0..self.rank).map(|i| &self.generator(i) - &self.one()).collect();
        let mut powers: Vec<Vec<GroupRingElement>> = ts.iter().map(|t| vec![self.one(), t.clone()]).collect();
        let mut acc = self.zero();
        for (mono, &c) in poly.terms() {
            let mut term = self.scalar(c);
            for (i, &e) in mono.iter().enumerate() {
                let cache = &mut powers[i];
                while cache.len() <= e as usize {
                    let next = &cache[cache.len() - 1] * &ts[i];
                    cache.push(next);
                }
                term = &term * &cache[e as usize];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }
}

/// An element of `R_{m,N}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    ring: GroupRing,
    coeffs: Vec<u64>,
}

impl GroupRingElement {
    pub fn ring(&self) -> &GroupRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, exps: &[u64]) -> u64 {
        self.coeffs[self.ring.index_of(exps)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check(&self, rhs: &Self) -> Result<()> {
        if self.ring != rhs.ring {
            return Err(Error::Mismatch(format!("{:?} vs {:?}", self.ring, rhs.ring)));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        let f = self.ring.coeffs;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(GroupRingElement { ring: self.ring, coeffs })
    }

    /// Convolution product.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        let f = self.ring.coeffs;
        let mut out = vec![0u64; self.ring.size];
        let nz: Vec<(usize, u64)> = rhs.coeffs.iter().copied().enumerate().filter(|&(_, c)| c != 0).collect();
        for (h, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(k, b) in &nz {
                let g = self.ring.add_indices(h, k);
                out[g] = f.mul_add(out[g], a, b);
            }
        }
        Ok(GroupRingElement { ring: self.ring, coeffs: out })
    }

    pub fn scale(&self, c: u64) -> Self {
        let f = self.ring.coeffs;
        GroupRingElement { ring: self.ring, coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect() }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Multiplication by the group element with index `g`.
    pub fn translate(&self, g: usize) -> Self {
        let mut out = vec![0u64; self.ring.size];
        for (h, &a) in self.coeffs.iter().enumerate() {
            if a != 0 {
                out[self.ring.add_indices(h, g)] = a;
            }
        }
        GroupRingElement { ring: self.ring, coeffs: out }
    }

    /// The involution induced by `gamma -> gamma^{-1}`.
    pub fn sharp(&self) -> Self {
        let mut out = vec![0u64; self.ring.size];
        for (h, &a) in self.coeffs.iter().enumerate() {
            out[self.ring.inverse_index(h)] = a;
        }
        GroupRingElement { ring: self.ring, coeffs: out }
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> u64 {
        let f = self.ring.coeffs;
        self.coeffs.iter().fold(0, |acc, &c| f.add(acc, c))
    }

    /// Image under `R_{m,N} -> R_{m',N'}`, summing fibres of
    /// `(Z/p^m)^d -> (Z/p^m')^d` and reducing coefficients.
    pub fn project(&self, level: u32, prec: u32) -> Result<Self> {
        if level > self.ring.level || prec > self.ring.prec() {
            return Err(Error::OutOfRange(format!(
                "cannot raise (level {}, precision {}) to ({level}, {prec})",
                self.ring.level,
                self.ring.prec()
            )));
        }
        let target = self.ring.at(level, prec)?;
        let f = target.coeffs;
        let q = target.order;
        let mut out = vec![0u64; target.size];
        for (h, &a) in self.coeffs.iter().enumerate() {
            if a != 0 {
                let exps: Vec<u64> = self.ring.exps_of(h).into_iter().map(|e| e % q).collect();
                let idx = target.index_of(&exps);
                out[idx] = f.add(out[idx], f.reduce(a));
            }
        }
        Ok(GroupRingElement { ring: target, coeffs: out })
    }

    /// Reduction of the coefficients to a lower precision at the same level.
    pub fn reduce_prec(&self, prec: u32) -> Result<Self> {
        self.project(self.ring.level, prec)
    }

    /// Nonzero terms as `(exponent vector, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u64>, u64)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (self.ring.exps_of(i), c))
    }
}

impl Add for &GroupRingElement {
    type Output = GroupRingElement;
    fn add(self, rhs: &GroupRingElement) -> GroupRingElement {
        self.try_add(rhs).expect("group ring mismatch")
    }
}

impl Sub for &GroupRingElement {
    type Output = GroupRingElement;
    fn sub(self, rhs: &GroupRingElement) -> GroupRingElement {
        self.try_add(&-rhs).expect("group ring mismatch")
    }
}

impl Mul for &GroupRingElement {
    type Output = GroupRingElement;
    fn mul(self, rhs: &GroupRingElement) -> GroupRingElement {
        self.try_mul(rhs).expect("group ring mismatch")
    }
}

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        let f = self.ring.coeffs;
        GroupRingElement { ring: self.ring, coeffs: self.coeffs.iter().map(|&a| f.neg(a)).collect() }
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(i, &x)| if x == 1 { format!("s{}", i + 1) } else { format!("s{}^{}", i + 1, x) })
                    .collect();
                match (c, mono.is_empty()) {
                    (_, true) => c.to_string(),
                    (1, false) => mono.join("*"),
                    _ => format!("{c}*{}", mono.join("*")),
                }
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}
