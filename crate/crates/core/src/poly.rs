//! Integer polynomials in `T_1, .., T_d`.

use std::collections::BTreeMap;
use std::fmt;

/// Sparse polynomial with integer coefficients. Monomials are exponent
/// vectors with trailing zeros stripped, so equality is structural.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Vec<u32>, i128>,
}

fn trim(mut mono: Vec<u32>) -> Vec<u32> {
    while mono.last() == Some(&0) {
        mono.pop();
    }
    mono
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: i128) -> Self {
        Poly::monomial(Vec::new(), c)
    }

    /// `T_{i+1}`
    pub fn var(i: usize) -> Self {
        let mut mono = vec![0; i + 1];
        mono[i] = 1;
        Poly::monomial(mono, 1)
    }

    pub fn monomial(exps: Vec<u32>, c: i128) -> Self {
        let mut p = Poly::zero();
        p.add_term(exps, c);
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: i128) {
        if c == 0 {
            return;
        }
        let key = trim(exps);
        let entry = self.terms.entry(key.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of variables that actually occur (highest index + 1).
    pub fn nvars(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &i128)> {
        self.terms.iter()
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, &c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                let len = a.len().max(b.len());
                let mono = (0..len).map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)).collect();
                out.add_term(mono, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(1), |acc, _| acc.mul(self))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<String> = m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("T{}", i + 1) } else { format!("T{}^{}", i + 1, e) })
                    .collect();
                if vars.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
