//! Symbolic group-ring expressions.
//!
//! An [`Expr`] is realizable at any level and precision, and keeps the
//! distinguished generators `omega`, `nu` and `nu_full` as named nodes so
//! their character values can be decided exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::group_ring::{GammaVector, GroupRing, GroupRingElement};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(i128),
    /// `T_{i+1} = sigma_{i+1} - 1`
    Var(usize),
    /// A group element of `Gamma`.
    Group(GammaVector),
    Omega(GammaVector, i64),
    Nu(GammaVector, i64, i64),
    /// `nu_{n,m}` over the standard basis.
    NuFull(i64, i64),
    Sharp(Box<Expr>),
    Sum(Vec<Expr>),
    Neg(Box<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn omega(s: GammaVector, n: i64) -> Self {
        Expr::Omega(s, n)
    }

    pub fn nu(s: GammaVector, n: i64, m: i64) -> Self {
        Expr::Nu(s, n, m)
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        Expr::Product(factors)
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        Expr::Sum(terms)
    }

    /// Expands the expression in `R_{m,N}`.
    pub fn eval(&self, ring: &GroupRing) -> Result<GroupRingElement> {
        Ok(match self {
            Expr::Int(c) => ring.scalar(*c),
            Expr::Var(i) => {
                if *i >= ring.rank() {
                    return Err(Error::Mismatch(format!("T{} used in rank {}", i + 1, ring.rank())));
                }
                &ring.generator(*i) - &ring.one()
            }
            Expr::Group(g) => ring.group_element(g)?,
            Expr::Omega(s, n) => ring.omega(s, *n)?,
            Expr::Nu(s, n, m) => ring.nu(s, *n, *m)?,
            Expr::NuFull(n, m) => ring.norm_element(*n, *m)?,
            Expr::Sharp(e) => e.eval(ring)?.sharp(),
            Expr::Sum(terms) => {
                let mut acc = ring.zero();
                for t in terms {
                    acc = acc.try_add(&t.eval(ring)?)?;
                }
                acc
            }
            Expr::Neg(e) => -&e.eval(ring)?,
            Expr::Product(factors) => {
                let mut acc = ring.one();
                for f in factors {
                    acc = acc.try_mul(&f.eval(ring)?)?;
                }
                acc
            }
            Expr::Pow(e, k) => e.eval(ring)?.pow(*k),
        })
    }

    /// The polynomial in `T_i` this expression denotes, if it only uses
    /// integers, variables, sums, products and powers.
    pub fn to_poly(&self) -> Option<Poly> {
        match self {
            Expr::Int(c) => Some(Poly::constant(*c)),
            Expr::Var(i) => Some(Poly::var(*i)),
            Expr::Sum(ts) => ts.iter().try_fold(Poly::zero(), |acc, t| Some(acc.add(&t.to_poly()?))),
            Expr::Product(fs) => fs.iter().try_fold(Poly::constant(1), |acc, f| Some(acc.mul(&f.to_poly()?))),
            Expr::Neg(e) => Some(e.to_poly()?.neg()),
            Expr::Pow(e, k) => Some(e.to_poly()?.pow(*k)),
            _ => None,
        }
    }

    /// Largest tower index appearing in `omega`/`nu` nodes.
    pub fn max_index(&self) -> i64 {
        match self {
            Expr::Omega(_, n) => *n,
            Expr::Nu(_, _, m) | Expr::NuFull(_, m) => *m,
            Expr::Sharp(e) | Expr::Neg(e) | Expr::Pow(e, _) => e.max_index(),
            Expr::Sum(v) | Expr::Product(v) => v.iter().map(Expr::max_index).max().unwrap_or(-1),
            _ => -1,
        }
    }
}

impl From<Poly> for Expr {
    fn from(p: Poly) -> Self {
        let terms = p
            .terms()
            .map(|(mono, &c)| {
                let mut factors = vec![Expr::Int(c)];
                for (i, &e) in mono.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(Expr::Var(i)),
                        _ => factors.push(Expr::Pow(Box::new(Expr::Var(i)), e)),
                    }
                }
                Expr::Product(factors)
            })
            .collect();
        Expr::Sum(terms)
    }
}

fn fmt_gamma(g: &GammaVector) -> String {
    let nonzero: Vec<usize> = (0..g.rank()).filter(|&i| g.0[i] != 0).collect();
    if nonzero.len() == 1 && g.0[nonzero[0]] == 1 {
        format!("s{}", nonzero[0] + 1)
    } else {
        g.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "T{}", i + 1),
            Expr::Group(g) => {
                let parts: Vec<String> = g
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0)
                    .map(|(i, &e)| if e == 1 { format!("s{}", i + 1) } else { format!("s{}^{}", i + 1, e) })
                    .collect();
                if parts.is_empty() {
                    write!(f, "1")
                } else {
                    write!(f, "{}", parts.join("*"))
                }
            }
            Expr::Omega(s, n) => write!(f, "omega({},{n})", fmt_gamma(s)),
            Expr::Nu(s, n, m) => write!(f, "nu({},{n},{m})", fmt_gamma(s)),
            Expr::NuFull(n, m) => write!(f, "nufull({n},{m})"),
            Expr::Sharp(e) => write!(f, "sharp({e})"),
            Expr::Sum(ts) => {
                if ts.is_empty() {
                    return write!(f, "0");
                }
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Product(fs) => {
                if fs.is_empty() {
                    return write!(f, "1");
                }
                let parts: Vec<String> = fs.iter().map(|t| t.to_string()).collect();
                write!(f, "({})", parts.join("*"))
            }
            Expr::Pow(e, k) => write!(f, "({e})^{k}"),
        }
    }
}
