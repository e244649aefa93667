//! Seeded random elements for membership cross-checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characters::DeltaSet;
use crate::error::{Error, Result};
use crate::group_ring::{GroupRing, GroupRingElement};
use crate::ideals::{IdealMembership, IdealSpec};
use crate::padic::ipow;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_element<R: Rng>(ring: &GroupRing, rng: &mut R) -> GroupRingElement {
    let q = ring.zpn().modulus();
    ring.from_coeffs((0..ring.size()).map(|_| rng.gen_range(0..q)).collect()).expect("right length")
}

/// `sum_i a_i g_i` with uniformly random ring elements `a_i`.
pub fn random_member<R: Rng>(gens: &[GroupRingElement], ring: &GroupRing, rng: &mut R) -> GroupRingElement {
    gens.iter().fold(ring.zero(), |acc, g| &acc + &(&random_element(ring, rng) * g))
}

/// A nonzero combination of the monomials `prod (sigma_i - 1)^{a_i}` with
/// `a_i < p^{n_i} - [p^{r_i}]` (`[p^{-1}] = 0`). These monomials are a
/// `Z_p`-basis of `Lambda/I_{r,n}`, so the result is never in the ideal.
pub fn rn_remainder<R: Rng>(spec: &IdealSpec, ring: &GroupRing, rng: &mut R) -> Result<GroupRingElement> {
    let IdealSpec::Rn { basis, r, n } = spec else {
        return Err(Error::Precondition("remainders are defined for RN ideals".into()));
    };
    let p = ring.p();
    let bounds: Vec<u64> = r
        .iter()
        .zip(n)
        .map(|(&ri, &ni)| ipow(p, ni as u32) - if ri >= 0 { ipow(p, ri as u32) } else { 0 })
        .collect();
    let ts: Vec<GroupRingElement> = basis.iter().map(|s| Ok(&ring.group_element(s)? - &ring.one())).collect::<Result<_>>()?;
    let q = ring.zpn().modulus();
    loop {
        let mut acc = ring.zero();
        let mut nonzero = false;
        let mut a = vec![0u64; bounds.len()];
        loop {
            let c = rng.gen_range(0..q);
            if c != 0 {
                nonzero = true;
                let mono = a.iter().zip(&ts).fold(ring.scalar(c as i128), |m, (&e, t)| &m * &t.pow(e as u32));
                acc = &acc + &mono;
            }
            let mut k = 0;
            while k < a.len() {
                a[k] += 1;
                if a[k] < bounds[k] {
                    break;
                }
                a[k] = 0;
                k += 1;
            }
            if k == a.len() {
                break;
            }
        }
        if nonzero {
            return Ok(acc);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub samples: usize,
    pub agreements: usize,
    /// Elements (as coefficient lists) on which the two tests differ,
    /// with the expected verdict.
    pub witnesses: Vec<(Vec<u64>, bool)>,
}

impl CrossCheck {
    pub fn rate(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.agreements as f64 / self.samples as f64
        }
    }
}

/// Compares linear and character membership on `count` members and
/// `count` non-members of an RN ideal.
pub fn cross_check(ideal: &IdealMembership, delta: &DeltaSet, count: usize, seed: u64) -> Result<CrossCheck> {
    let mut rng = rng(seed);
    let ring = *ideal.ring();
    let mut out = CrossCheck { samples: 0, agreements: 0, witnesses: Vec::new() };
    for k in 0..2 * count {
        let member = k % 2 == 0;
        let x = random_member(ideal.generators(), &ring, &mut rng);
        let x = if member { x } else { &x + &rn_remainder(ideal.spec(), &ring, &mut rng)? };
        let lin = ideal.member_linear(&x)?;
        let chr = ideal.member_char(&x, delta)?;
        out.samples += 1;
        if lin == chr && lin == member {
            out.agreements += 1;
        } else {
            out.witnesses.push((x.coeffs().to_vec(), member));
        }
    }
    Ok(out)
}
