//! Characters of `Gamma/Gamma^{(m)}`, their values on group-ring elements,
//! zero sets, and `Z_p`-flats.
//!
//! A character at level `m` is the exponent vector `e` with
//! `chi(sigma_i) = zeta_{p^m}^{e_i}`.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::group_ring::{rank_mod_p, GammaVector, GroupRing, GroupRingElement};
use crate::ideals::IdealSpec;
use crate::padic::{ipow, CyclotomicInt, Zpn};

/// Default number of characters a single query may enumerate.
pub const DEFAULT_CHAR_CAP: usize = 729;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<FlatEquation>", try_from = "Vec<FlatEquation>")]
pub struct Character {
    level: u32,
    exps: Vec<u64>,
}

fn gamma_pairing(exps: &[u64], g: &[i64], modulus: u64) -> u64 {
    exps.iter().zip(g).fold(0u64, |acc, (&e, &x)| {
        let t = (e as i128 * x as i128).rem_euclid(modulus as i128) as u64;
        (acc + t) % modulus
    })
}

impl Character {
    pub fn new(p: u64, level: u32, exps: Vec<u64>) -> Result<Self> {
        let q = ipow(p, level);
        if let Some(e) = exps.iter().find(|&&e| e >= q) {
            return Err(Error::OutOfRange(format!("character exponent {e} >= {q}")));
        }
        Ok(Character { level, exps })
    }

    pub fn trivial(rank: usize) -> Self {
        Character { level: 0, exps: vec![0; rank] }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn exps(&self) -> &[u64] {
        &self.exps
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    /// `log_p` of the order of `chi`.
    pub fn order_level(&self, p: u64) -> u32 {
        let f = Zpn::new(p, self.level.max(1)).expect("prime");
        self.exps.iter().map(|&e| if e == 0 { 0 } else { self.level - f.val(e) }).max().unwrap_or(0)
    }

    /// `log_p` of the order of `chi(s)`.
    pub fn order_at(&self, p: u64, s: &GammaVector) -> u32 {
        let q = ipow(p, self.level);
        let t = gamma_pairing(&self.exps, s.exps(), q);
        if t == 0 {
            0
        } else {
            self.level - Zpn::new(p, self.level).expect("prime").val(t)
        }
    }

    /// Exponent `k` with `chi(s) = zeta_{p^m}^k`.
    pub fn exponent_at(&self, p: u64, s: &GammaVector) -> u64 {
        gamma_pairing(&self.exps, s.exps(), ipow(p, self.level))
    }

    pub fn inverse(&self, p: u64) -> Self {
        let q = ipow(p, self.level);
        Character { level: self.level, exps: self.exps.iter().map(|&e| (q - e) % q).collect() }
    }

    /// The same character viewed at a higher level.
    pub fn at_level(&self, p: u64, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(Error::OutOfRange(format!("cannot lower character level {} to {level}", self.level)));
        }
        let k = ipow(p, level - self.level);
        Ok(Character { level, exps: self.exps.iter().map(|&e| e * k).collect() })
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]@{}", parts.join(","), self.level)
    }
}

impl From<Character> for Vec<FlatEquation> {
    fn from(c: Character) -> Self {
        let rank = c.rank();
        c.exps
            .iter()
            .enumerate()
            .map(|(i, &e)| FlatEquation { xi: GammaVector::basis(rank, i), root: e, level: c.level })
            .collect()
    }
}

impl TryFrom<Vec<FlatEquation>> for Character {
    type Error = String;
    fn try_from(eqs: Vec<FlatEquation>) -> std::result::Result<Self, String> {
        let rank = eqs.len();
        let level = eqs.first().map_or(0, |e| e.level);
        let mut exps = Vec::with_capacity(rank);
        for (i, eq) in eqs.into_iter().enumerate() {
            if eq.xi != GammaVector::basis(rank, i) || eq.level != level {
                return Err("a character record lists chi(sigma_i) for each basis vector at one level".into());
            }
            exps.push(eq.root);
        }
        Ok(Character { level, exps })
    }
}

/// All `p^{dm}` characters of level `m`, in lexicographic exponent order.
pub fn enumerate_characters(p: u64, rank: usize, level: u32, cap: usize) -> Result<Vec<Character>> {
    let needed = (p as u128).pow(level * rank as u32);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed, cap: cap as u128 });
    }
    let q = ipow(p, level);
    let mut out = Vec::with_capacity(needed as usize);
    let mut exps = vec![0u64; rank];
    loop {
        out.push(Character { level, exps: exps.clone() });
        let mut i = rank;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < q {
                break;
            }
            exps[i] = 0;
        }
    }
}

/// `chi(a) = sum_g a_g zeta^{<chi, g>}` in `Z[zeta_{p^m}]/(p^N)`, `m` the
/// level of `chi`.
pub fn eval_char(chi: &Character, a: &GroupRingElement) -> Result<CyclotomicInt> {
    let ring = a.ring();
    let p = ring.p();
    if chi.rank() != ring.rank() {
        return Err(Error::Mismatch(format!("character of rank {} on rank {}", chi.rank(), ring.rank())));
    }
    if chi.order_level(p) > ring.level() {
        return Err(Error::Mismatch(format!(
            "character of order p^{} does not factor through level {}",
            chi.order_level(p),
            ring.level()
        )));
    }
    let f = ring.zpn();
    let q = ipow(p, chi.level);
    let mut counts = vec![0u64; q as usize];
    for (h, &c) in a.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let g: Vec<i64> = ring.exps_of(h).into_iter().map(|e| e as i64).collect();
        let k = gamma_pairing(&chi.exps, &g, q) as usize;
        counts[k] = f.add(counts[k], c);
    }
    Ok(CyclotomicInt::from_power_sums(f, chi.level, counts))
}

/// Decides `chi(expr) = 0` exactly in `Z_p[zeta]` when the expression is
/// built from the distinguished generators: `chi(omega_{s,n}) = 0` iff
/// `alpha <= n`, and `chi(nu_{s,r,m}) = 0` iff `r < alpha <= m`, where
/// `p^alpha` is the order of `chi(s)`. Returns `None` otherwise.
pub fn exact_vanishing(expr: &Expr, chi: &Character, p: u64) -> Option<bool> {
    match expr {
        Expr::Int(c) => Some(*c == 0),
        Expr::Group(_) => Some(false),
        Expr::Omega(s, n) => Some(*n >= 0 && (chi.order_at(p, s) as i64) <= *n),
        Expr::Nu(s, r, m) => {
            let alpha = chi.order_at(p, s) as i64;
            Some(*r < alpha && alpha <= *m)
        }
        Expr::NuFull(n, m) => {
            let rank = chi.rank();
            Some((0..rank).any(|i| {
                let alpha = chi.order_at(p, &GammaVector::basis(rank, i)) as i64;
                *n < alpha && alpha <= *m
            }))
        }
        Expr::Sharp(e) => exact_vanishing(e, &chi.inverse(p), p),
        Expr::Neg(e) => exact_vanishing(e, chi, p),
        Expr::Pow(e, k) => {
            if *k == 0 {
                Some(false)
            } else {
                exact_vanishing(e, chi, p)
            }
        }
        Expr::Product(fs) => {
            let mut all_known = true;
            for f in fs {
                match exact_vanishing(f, chi, p) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => all_known = false,
                }
            }
            all_known.then_some(false)
        }
        Expr::Var(_) | Expr::Sum(_) => None,
    }
}

/// Vanishing of `chi` on a generator: exact when decidable symbolically,
/// otherwise `chi(x) = 0 mod p^N`. The flag reports which.
pub fn vanishes(expr: &Expr, realized: &GroupRingElement, chi: &Character) -> Result<(bool, bool)> {
    if let Some(v) = exact_vanishing(expr, chi, realized.ring().p()) {
        return Ok((v, true));
    }
    Ok((eval_char(chi, realized)?.is_zero(), false))
}

/// The characters of one level killing every generator of an ideal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaSet {
    pub level: u32,
    pub members: Vec<Character>,
    /// Every vanishing decision was exact rather than mod `p^N`.
    pub exact: bool,
}

impl DeltaSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, chi: &Character) -> bool {
        self.members.binary_search(chi).is_ok()
    }
}

/// Common zero set of a list of generators among level-`m` characters,
/// `m` the level of `ring`.
pub fn delta_set_of(generators: &[Expr], ring: &GroupRing, cap: usize) -> Result<DeltaSet> {
    let chars = enumerate_characters(ring.p(), ring.rank(), ring.level(), cap)?;
    let realized: Vec<GroupRingElement> = generators.iter().map(|g| g.eval(ring)).collect::<Result<_>>()?;
    let decisions: Vec<(bool, bool)> = chars
        .par_iter()
        .map(|chi| {
            let mut exact = true;
            for (g, x) in generators.iter().zip(&realized) {
                let (zero, ex) = vanishes(g, x, chi)?;
                exact &= ex;
                if !zero {
                    return Ok((false, exact));
                }
            }
            Ok((true, exact))
        })
        .collect::<Result<_>>()?;
    let exact = decisions.iter().all(|d| d.1);
    let members = chars.into_iter().zip(decisions).filter(|(_, d)| d.0).map(|(c, _)| c).collect();
    Ok(DeltaSet { level: ring.level(), members, exact })
}

/// `Delta_I` for an ideal, at the level of `ring`.
pub fn delta_set(ideal: &IdealSpec, ring: &GroupRing, cap: usize) -> Result<DeltaSet> {
    delta_set_of(&ideal.generators(ring.rank())?, ring, cap)
}

/// One defining equation `chi(xi) = zeta_{p^r}^root` of a flat.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(GammaVector, u64, u32)", into = "(GammaVector, u64, u32)")]
pub struct FlatEquation {
    pub xi: GammaVector,
    pub root: u64,
    pub level: u32,
}

impl From<(GammaVector, u64, u32)> for FlatEquation {
    fn from((xi, root, level): (GammaVector, u64, u32)) -> Self {
        FlatEquation { xi, root, level }
    }
}

impl From<FlatEquation> for (GammaVector, u64, u32) {
    fn from(e: FlatEquation) -> Self {
        (e.xi, e.root, e.level)
    }
}

/// A `Z_p`-flat: the characters solving `chi(xi_j) = zeta_j` for `xi_j`
/// extendable to a basis of `Gamma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZpFlat {
    equations: Vec<FlatEquation>,
}

impl ZpFlat {
    pub fn new(p: u64, rank: usize, equations: Vec<FlatEquation>) -> Result<Self> {
        for eq in &equations {
            if eq.xi.rank() != rank {
                return Err(Error::Mismatch(format!("flat vector {} in rank {rank}", eq.xi)));
            }
            if eq.root >= ipow(p, eq.level) {
                return Err(Error::OutOfRange(format!("root exponent {} at level {}", eq.root, eq.level)));
            }
        }
        let rows: Vec<Vec<i64>> = equations.iter().map(|e| e.xi.0.clone()).collect();
        if !rows.is_empty() && rank_mod_p(&rows, p) != rows.len() {
            return Err(Error::InvalidBasis("flat vectors do not extend to a basis".into()));
        }
        Ok(ZpFlat { equations })
    }

    pub fn equations(&self) -> &[FlatEquation] {
        &self.equations
    }

    /// The flats `{chi(xi) = zeta}` over all `zeta` of exact order `p^r`;
    /// their union is the zero set of `nu_{xi,r-1,r}`.
    pub fn cyclotomic_cover(p: u64, rank: usize, xi: &GammaVector, r: u32) -> Result<Vec<ZpFlat>> {
        let roots: Vec<u64> = if r == 0 { vec![0] } else { (0..ipow(p, r)).filter(|e| e % p != 0).collect() };
        roots
            .into_iter()
            .map(|root| ZpFlat::new(p, rank, vec![FlatEquation { xi: xi.clone(), root, level: r }]))
            .collect()
    }

    pub fn contains(&self, p: u64, chi: &Character) -> bool {
        self.equations.iter().all(|eq| {
            if eq.level > chi.level() {
                // zeta_j of order above the level: only the trivial case survives
                let k = ipow(p, eq.level - chi.level());
                return eq.root % k == 0 && chi.exponent_at(p, &eq.xi) == eq.root / k;
            }
            chi.exponent_at(p, &eq.xi) == eq.root * ipow(p, chi.level() - eq.level)
        })
    }

    /// Level-`m` characters on the flat.
    pub fn members(&self, p: u64, rank: usize, level: u32, cap: usize) -> Result<Vec<Character>> {
        Ok(enumerate_characters(p, rank, level, cap)?.into_iter().filter(|c| self.contains(p, c)).collect())
    }
}

/// Outcome of comparing a zero set with a proposed union of flats.
#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub level: u32,
    pub zero_set_size: usize,
    pub cover_size: usize,
    /// Characters killing `f` that no flat contains.
    pub uncovered: Vec<Character>,
    /// Characters on some flat that do not kill `f`.
    pub spurious: Vec<Character>,
    pub equal: bool,
    pub exact: bool,
    pub proper: bool,
    pub caveat: Option<String>,
}

/// Checks `Delta_f = Z_1 u .. u Z_l` among all characters of the level of `ring`.
pub fn verify_cover(f: &Expr, flats: &[ZpFlat], ring: &GroupRing, cap: usize) -> Result<CoverReport> {
    let p = ring.p();
    let all = enumerate_characters(p, ring.rank(), ring.level(), cap)?;
    let delta = delta_set_of(std::slice::from_ref(f), ring, cap)?;
    let zero: BTreeSet<&Character> = delta.members.iter().collect();
    let covered: BTreeSet<&Character> = all.iter().filter(|c| flats.iter().any(|z| z.contains(p, c))).collect();
    let uncovered: Vec<Character> = zero.difference(&covered).map(|c| (*c).clone()).collect();
    let spurious: Vec<Character> = covered.difference(&zero).map(|c| (*c).clone()).collect();
    let caveat = (!delta.exact).then(|| {
        format!("vanishing of a non-structured element was decided mod p^{}; the zero set may be overcounted", ring.prec())
    });
    Ok(CoverReport {
        level: ring.level(),
        zero_set_size: zero.len(),
        cover_size: covered.len(),
        equal: uncovered.is_empty() && spurious.is_empty(),
        proper: zero.len() < all.len(),
        uncovered,
        spurious,
        exact: delta.exact,
        caveat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> GammaVector {
        GammaVector::new(v.to_vec())
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_characters(2, 2, 0, 10).unwrap(), vec![Character::trivial(2)]);
        assert_eq!(enumerate_characters(2, 1, 1, 10).unwrap().len(), 2);
        assert_eq!(enumerate_characters(3, 2, 2, 729).unwrap().len(), 81);
        assert!(matches!(enumerate_characters(3, 3, 3, 729), Err(Error::CapExceeded { .. })));
        let all = enumerate_characters(3, 2, 1, 100).unwrap();
        let distinct: BTreeSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 9);
    }

    #[test]
    fn trivial_character_is_augmentation() {
        let ring = GroupRing::new(3, 2, 2, 3).unwrap();
        let x = &(&ring.scalar(4) + &ring.generator(0)) + &ring.generator(1).scale(5);
        let v = eval_char(&Character::trivial(2), &x).unwrap();
        assert_eq!(v.coeffs(), &[10]);
    }

    #[test]
    fn order_rule_for_nu() {
        // chi(nu_{s,r,m}) is p^{m-r} if alpha <= r, else 0 (alpha <= m)
        let p = 3;
        let ring = GroupRing::new(p, 1, 3, 6).unwrap();
        let sig = s(&[1]);
        for chi in enumerate_characters(p, 1, 3, 100).unwrap() {
            let alpha = chi.order_at(p, &sig) as i64;
            for r in 0..=3i64 {
                for m in r..=3 {
                    if alpha > m {
                        continue;
                    }
                    let v = eval_char(&chi, &ring.nu(&sig, r, m).unwrap()).unwrap();
                    if alpha > r {
                        assert!(v.is_zero());
                    } else {
                        let expected = CyclotomicInt::from_int(ring.zpn(), 3, ipow(p, (m - r) as u32) as i128);
                        assert_eq!(v, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn character_level_must_divide_element_level() {
        let ring = GroupRing::new(2, 1, 1, 3).unwrap();
        let chi = Character::new(2, 2, vec![1]).unwrap();
        assert!(eval_char(&chi, &ring.one()).is_err());
        // a level-2 encoding of an order-2 character is fine
        let chi2 = Character::new(2, 2, vec![2]).unwrap();
        let v = eval_char(&chi2, &ring.generator(0)).unwrap();
        assert_eq!(v, CyclotomicInt::from_int(ring.zpn(), 2, -1));
    }

    #[test]
    fn delta_examples() {
        let ring = GroupRing::new(2, 1, 1, 3).unwrap();
        let zero = delta_set_of(&[Expr::Int(0)], &ring, 100).unwrap();
        assert_eq!(zero.len(), 2);
        let one = delta_set_of(&[Expr::Int(1)], &ring, 100).unwrap();
        assert!(one.is_empty());
        let nu = delta_set_of(&[Expr::nu(s(&[1]), 0, 1)], &ring, 100).unwrap();
        assert_eq!(nu.members, vec![Character::new(2, 1, vec![1]).unwrap()]);
        assert!(nu.exact);
    }

    #[test]
    fn flats() {
        let all = ZpFlat::new(2, 1, vec![]).unwrap();
        assert_eq!(all.members(2, 1, 2, 100).unwrap().len(), 4);
        let fixed = ZpFlat::new(2, 1, vec![FlatEquation { xi: s(&[1]), root: 0, level: 0 }]).unwrap();
        assert_eq!(fixed.members(2, 1, 2, 100).unwrap(), vec![Character::trivial(1).at_level(2, 2).unwrap()]);
        let minus = ZpFlat::new(2, 2, vec![FlatEquation { xi: s(&[1, 0]), root: 1, level: 1 }]).unwrap();
        assert_eq!(minus.members(2, 2, 1, 100).unwrap().len(), 2);
        assert!(ZpFlat::new(2, 2, vec![FlatEquation { xi: s(&[2, 0]), root: 1, level: 1 }]).is_err());
    }

    #[test]
    fn cover_of_product() {
        let ring = GroupRing::new(2, 2, 2, 3).unwrap();
        let f = Expr::product(vec![Expr::omega(s(&[1, 0]), 0), Expr::nu(s(&[0, 1]), 0, 1)]);
        let flats = vec![
            ZpFlat::new(2, 2, vec![FlatEquation { xi: s(&[1, 0]), root: 0, level: 0 }]).unwrap(),
            ZpFlat::new(2, 2, vec![FlatEquation { xi: s(&[0, 1]), root: 1, level: 1 }]).unwrap(),
        ];
        let report = verify_cover(&f, &flats, &ring, 100).unwrap();
        assert!(report.equal, "{report:?}");
        assert!(report.proper);
        // 4 with chi(s1)=1, 4 with chi(s2)=-1, 1 in both
        assert_eq!(report.zero_set_size, 7);

        let missing = verify_cover(&f, &flats[..1], &ring, 100).unwrap();
        assert!(!missing.equal);
        assert_eq!(missing.uncovered.len(), 3);
    }

    #[test]
    fn cover_of_one_is_empty() {
        let ring = GroupRing::new(2, 2, 2, 3).unwrap();
        let r = verify_cover(&Expr::Int(1), &[], &ring, 100).unwrap();
        assert!(r.equal && r.zero_set_size == 0);
    }

    #[test]
    fn serialization_round_trip() {
        let chi = Character::new(3, 2, vec![4, 0]).unwrap();
        let json = serde_json::to_string(&chi).unwrap();
        assert_eq!(json, "[[[1,0],4,2],[[0,1],0,2]]");
        assert_eq!(serde_json::from_str::<Character>(&json).unwrap(), chi);
        let flat = ZpFlat::new(3, 2, vec![FlatEquation { xi: s(&[1, 1]), root: 2, level: 1 }]).unwrap();
        let json = serde_json::to_string(&flat).unwrap();
        assert_eq!(json, "[[[1,1],2,1]]");
        assert_eq!(serde_json::from_str::<ZpFlat>(&json).unwrap(), flat);
    }
}
