//! The ideal families `I_n`, `J_n`, `I_{r,n}` and explicit ideals, with
//! exact (linear) and character-based membership tests.

use std::fmt;

use serde::Serialize;

use crate::characters::{delta_set_of, eval_char, Character, DeltaSet};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::group_ring::{validate_basis, GammaVector, GroupRing, GroupRingElement, TightSet};
use crate::linalg::{ColumnSpan, Matrix};
use crate::padic::Valuation;

pub use crate::towers::{separation_index, SeparationIndex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealSpec {
    /// `I_n = (omega_{sigma_i,n})`
    Augmentation { n: i64 },
    /// `J_n = (nu_{tau_j,0,n})`
    Tight { n: i64, taus: TightSet },
    /// `I_{r,n} = (nu_{sigma_i,r_i,n_i})`
    Rn { basis: Vec<GammaVector>, r: Vec<i64>, n: Vec<i64> },
    Sum(Vec<IdealSpec>),
    Explicit(Vec<Expr>),
}

impl IdealSpec {
    pub fn augmentation(n: i64) -> Self {
        IdealSpec::Augmentation { n }
    }

    pub fn tight(n: i64, taus: TightSet) -> Self {
        IdealSpec::Tight { n, taus }
    }

    /// `I_{r,n}` over the standard basis.
    pub fn rn(r: Vec<i64>, n: Vec<i64>) -> Self {
        let basis = GammaVector::standard_basis(r.len());
        IdealSpec::Rn { basis, r, n }
    }

    /// Checks the parameter constraints for rank `rank` over `p`.
    pub fn validate(&self, p: u64, rank: usize, level: u32) -> Result<()> {
        match self {
            IdealSpec::Augmentation { n } => {
                if *n < 0 {
                    return Err(Error::OutOfRange(format!("AUG index {n} < 0")));
                }
            }
            IdealSpec::Tight { n, taus } => {
                if *n < 0 {
                    return Err(Error::OutOfRange(format!("TIGHT index {n} < 0")));
                }
                taus.validate(p, rank, level)?;
            }
            IdealSpec::Rn { basis, r, n } => {
                if r.len() != rank || n.len() != rank {
                    return Err(Error::Mismatch(format!("RN needs {rank} entries in r and n")));
                }
                validate_basis(basis, p, rank)?;
                for (ri, ni) in r.iter().zip(n) {
                    if !(ni > ri && *ri >= -1) {
                        return Err(Error::IndexOrder(format!("need n > r >= -1, got r={ri}, n={ni}")));
                    }
                }
            }
            IdealSpec::Sum(parts) => {
                for s in parts {
                    s.validate(p, rank, level)?;
                }
            }
            IdealSpec::Explicit(gens) => {
                if let Some(g) = gens.iter().find(|g| max_var(g).is_some_and(|v| v >= rank)) {
                    return Err(Error::Mismatch(format!("{g} uses a variable beyond rank {rank}")));
                }
            }
        }
        Ok(())
    }

    /// Symbolic generators.
    pub fn generators(&self, rank: usize) -> Result<Vec<Expr>> {
        Ok(match self {
            IdealSpec::Augmentation { n } => {
                GammaVector::standard_basis(rank).into_iter().map(|s| Expr::Omega(s, *n)).collect()
            }
            IdealSpec::Tight { n, taus } => taus.taus().iter().map(|t| Expr::Nu(t.clone(), 0, *n)).collect(),
            IdealSpec::Rn { basis, r, n } => {
                if basis.len() != rank || r.len() != rank || n.len() != rank {
                    return Err(Error::Mismatch(format!("RN needs {rank} entries")));
                }
                basis.iter().zip(r.iter().zip(n)).map(|(s, (&ri, &ni))| Expr::Nu(s.clone(), ri, ni)).collect()
            }
            IdealSpec::Sum(parts) => {
                let mut out = Vec::new();
                for s in parts {
                    out.extend(s.generators(rank)?);
                }
                out
            }
            IdealSpec::Explicit(gens) => gens.clone(),
        })
    }

    /// Largest tower index among the parameters.
    pub fn required_level(&self) -> i64 {
        match self {
            IdealSpec::Augmentation { n } | IdealSpec::Tight { n, .. } => *n,
            IdealSpec::Rn { n, .. } => n.iter().copied().max().unwrap_or(0),
            IdealSpec::Sum(parts) => parts.iter().map(IdealSpec::required_level).max().unwrap_or(0),
            IdealSpec::Explicit(gens) => gens.iter().map(Expr::max_index).max().unwrap_or(0),
        }
    }

    /// Generators as elements of `R_{m,N}`.
    pub fn realize(&self, ring: &GroupRing) -> Result<Vec<GroupRingElement>> {
        let required = self.required_level();
        if required > ring.level() as i64 {
            return Err(Error::LevelTooLow { level: ring.level(), required });
        }
        self.validate(ring.p(), ring.rank(), ring.level())?;
        self.generators(ring.rank())?.iter().map(|g| g.eval(ring)).collect()
    }
}

fn max_var(e: &Expr) -> Option<usize> {
    match e {
        Expr::Var(i) => Some(*i),
        Expr::Group(g) | Expr::Omega(g, _) | Expr::Nu(g, _, _) => Some(g.rank().saturating_sub(1)),
        Expr::Sharp(x) | Expr::Neg(x) | Expr::Pow(x, _) => max_var(x),
        Expr::Sum(v) | Expr::Product(v) => v.iter().filter_map(max_var).max(),
        Expr::Int(_) | Expr::NuFull(..) => None,
    }
}

fn fmt_ints(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

impl fmt::Display for IdealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealSpec::Augmentation { n } => write!(f, "AUG({n})"),
            IdealSpec::Tight { n, taus } => {
                let t: Vec<String> = taus.taus().iter().map(|t| t.to_string()).collect();
                write!(f, "TIGHT({n}; tau=[{}])", t.join(","))
            }
            IdealSpec::Rn { basis, r, n } => {
                let b: Vec<String> = basis.iter().map(|t| t.to_string()).collect();
                write!(f, "RN(r={}, n={}, basis=[{}])", fmt_ints(r), fmt_ints(n), b.join(","))
            }
            IdealSpec::Sum(parts) => {
                let p: Vec<String> = parts.iter().map(|s| s.to_string()).collect();
                write!(f, "SUM({})", p.join(", "))
            }
            IdealSpec::Explicit(gens) => {
                let g: Vec<String> = gens.iter().map(|e| e.to_string()).collect();
                write!(f, "EXPL([{}])", g.join(", "))
            }
        }
    }
}

/// Rows `gamma * g` for every group element `gamma` and generator `g`,
/// row-reduced. Their `Z/p^N`-span is the ideal.
pub fn ideal_span_rows(ring: &GroupRing, gens: &[GroupRingElement]) -> Matrix {
    let mut rows = Vec::with_capacity(gens.len() * ring.size());
    for g in gens {
        for h in 0..ring.size() {
            rows.push(g.translate(h).coeffs().to_vec());
        }
    }
    Matrix::from_rows(ring.zpn(), ring.size(), rows).expect("uniform rows").row_reduced()
}

/// An ideal realized in `R_{m,N}`, ready for repeated membership queries.
#[derive(Clone, Debug)]
pub struct IdealMembership {
    ring: GroupRing,
    spec: IdealSpec,
    generators: Vec<GroupRingElement>,
    span: ColumnSpan,
}

impl IdealMembership {
    pub fn new(spec: &IdealSpec, ring: &GroupRing) -> Result<Self> {
        let generators = spec.realize(ring)?;
        let span = ColumnSpan::new(&ideal_span_rows(ring, &generators).transpose());
        Ok(IdealMembership { ring: *ring, spec: spec.clone(), generators, span })
    }

    pub fn ring(&self) -> &GroupRing {
        &self.ring
    }

    pub fn spec(&self) -> &IdealSpec {
        &self.spec
    }

    pub fn generators(&self) -> &[GroupRingElement] {
        &self.generators
    }

    /// `log_p` of the number of elements of the realized ideal.
    pub fn order_exp(&self) -> u64 {
        self.span.order_exp()
    }

    /// Exact membership in the realized ideal.
    pub fn member_linear(&self, x: &GroupRingElement) -> Result<bool> {
        if x.ring() != &self.ring {
            return Err(Error::Mismatch("element and ideal live in different rings".into()));
        }
        Ok(self.span.contains(x.coeffs()))
    }

    /// `Delta` of this ideal at the ring's level.
    pub fn delta(&self, cap: usize) -> Result<DeltaSet> {
        delta_set_of(&self.spec.generators(self.ring.rank())?, &self.ring, cap)
    }

    /// `chi(x) = 0` for every `chi` in `Delta`.
    pub fn member_char(&self, x: &GroupRingElement, delta: &DeltaSet) -> Result<bool> {
        if !matches!(self.spec, IdealSpec::Rn { .. }) {
            return Err(Error::Precondition("character membership applies to RN ideals".into()));
        }
        if x.ring() != &self.ring {
            return Err(Error::Mismatch("element and ideal live in different rings".into()));
        }
        for chi in &delta.members {
            if !eval_char(chi, x)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibilityCheck {
    pub observed: Valuation,
    pub bound: u32,
    pub pass: bool,
}

/// For `x` in `I_{r,n} + J_n`, compares the valuation of `chi(x)` with
/// `min(n, n_i - r_i)`. The order of `chi` must not exceed `p^n` nor any
/// `p^{n_i}`.
pub fn divisibility_check(x: &GroupRingElement, spec: &IdealSpec, chi: &Character) -> Result<DivisibilityCheck> {
    let (rn, tight_n) = split_rn_tight(spec)?;
    let IdealSpec::Rn { r, n, .. } = rn else { unreachable!() };
    let p = x.ring().p();
    let ord = chi.order_level(p) as i64;
    let limit = n.iter().copied().min().unwrap_or(tight_n).min(tight_n);
    if ord > limit {
        return Err(Error::Precondition(format!("character of order p^{ord} exceeds p^{limit}")));
    }
    let bound = r.iter().zip(n).map(|(ri, ni)| ni - ri).min().unwrap_or(tight_n).min(tight_n);
    let observed = eval_char(chi, x)?.valuation();
    let bound = bound.max(0) as u32;
    let pass = match observed {
        Valuation::Finite(v) => v >= bound,
        Valuation::AtLeast(_) => true,
    };
    Ok(DivisibilityCheck { observed, bound, pass })
}

fn split_rn_tight(spec: &IdealSpec) -> Result<(&IdealSpec, i64)> {
    if let IdealSpec::Sum(parts) = spec {
        if let [a, b] = parts.as_slice() {
            match (a, b) {
                (rn @ IdealSpec::Rn { .. }, IdealSpec::Tight { n, .. })
                | (IdealSpec::Tight { n, .. }, rn @ IdealSpec::Rn { .. }) => return Ok((rn, *n)),
                _ => {}
            }
        }
    }
    Err(Error::Precondition("divisibility check expects SUM(RN, TIGHT)".into()))
}
