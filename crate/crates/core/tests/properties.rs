use std::collections::BTreeSet;

use iwasawa::characters::{delta_set_of, enumerate_characters, eval_char, verify_cover, ZpFlat};
use iwasawa::linalg::{ColumnSpan, Matrix};
use iwasawa::padic::Zpn;
use iwasawa::parse::parse_expr;
use iwasawa::towers::{capitulation_tower, ddot_profile, ChainMethod, IdealFamily, InertiaDatum, LambdaPresentation};
use iwasawa::{Expr, GammaVector, GroupRing, GroupRingElement, Poly, TightSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring_params() -> impl Strategy<Value = (u64, usize, u32, u32)> {
    (prop::sample::select(vec![2u64, 3]), 1usize..=2, 0u32..=2, 1u32..=3)
}

fn random_elem(ring: &GroupRing, rng: &mut ChaCha8Rng) -> GroupRingElement {
    let q = ring.zpn().modulus();
    ring.from_coeffs((0..ring.size()).map(|_| rng.gen_range(0..q)).collect()).unwrap()
}

fn random_gamma(d: usize, rng: &mut ChaCha8Rng) -> GammaVector {
    loop {
        let g: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
        if g.iter().any(|&x| x % 2 != 0 && x % 3 != 0) {
            return GammaVector::new(g);
        }
    }
}

fn random_poly(d: usize, rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..3 {
        let exps: Vec<u32> = (0..d).map(|_| rng.gen_range(0..3)).collect();
        p = p.add(&Poly::monomial(exps, rng.gen_range(-5..=5)));
    }
    p
}

fn random_matrix(f: Zpn, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let q = f.modulus();
    // bias toward non-units so that nontrivial valuations show up
    let data = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(0.5) { rng.gen_range(0..q) } else { f.mul(f.p(), rng.gen_range(0..q)) })
                .collect()
        })
        .collect();
    Matrix::from_rows(f, cols, data).unwrap()
}

fn all_vectors(q: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| (0..q).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((p, d, level, prec) in ring_params(), seed in any::<u64>()) {
        let ring = GroupRing::new(p, d, level, prec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_elem(&ring, &mut rng), random_elem(&ring, &mut rng), random_elem(&ring, &mut rng));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &ring.one(), a.clone());
        prop_assert_eq!(&a - &a, ring.zero());
    }

    #[test]
    fn omega_times_nu((p, d, level, prec) in ring_params(), seed in any::<u64>()) {
        let ring = GroupRing::new(p, d, level, prec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_gamma(d, &mut rng);
        for n in -1..=level as i64 {
            for m in n..=level as i64 {
                prop_assert_eq!(&ring.omega(&s, n).unwrap() * &ring.nu(&s, n, m).unwrap(), ring.omega(&s, m).unwrap());
            }
        }
    }

    #[test]
    fn sharp_and_project_are_homomorphisms((p, d, level, prec) in ring_params(), seed in any::<u64>()) {
        let ring = GroupRing::new(p, d, level, prec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_elem(&ring, &mut rng), random_elem(&ring, &mut rng));
        prop_assert_eq!((&a * &b).sharp(), &a.sharp() * &b.sharp());
        prop_assert_eq!(a.sharp().sharp(), a.clone());
        let (l, n) = (rng.gen_range(0..=level), rng.gen_range(1..=prec));
        let pr = |x: &GroupRingElement| x.project(l, n).unwrap();
        prop_assert_eq!(pr(&(&a * &b)), &pr(&a) * &pr(&b));
        prop_assert_eq!(pr(&(&a + &b)), &pr(&a) + &pr(&b));
    }

    #[test]
    fn lift_is_a_homomorphism((p, d, level, prec) in ring_params(), seed in any::<u64>()) {
        let ring = GroupRing::new(p, d, level, prec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, g) = (random_poly(d, &mut rng), random_poly(d, &mut rng));
        prop_assert_eq!(ring.lift(&f.mul(&g)).unwrap(), &ring.lift(&f).unwrap() * &ring.lift(&g).unwrap());
        prop_assert_eq!(ring.lift(&f.add(&g)).unwrap(), &ring.lift(&f).unwrap() + &ring.lift(&g).unwrap());
    }

    #[test]
    fn characters_are_multiplicative((p, d, level, prec) in ring_params(), seed in any::<u64>()) {
        let ring = GroupRing::new(p, d, level, prec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_elem(&ring, &mut rng), random_elem(&ring, &mut rng));
        let chars = enumerate_characters(p, d, level, 1000).unwrap();
        let chi = &chars[rng.gen_range(0..chars.len())];
        let ea = eval_char(chi, &a).unwrap();
        prop_assert_eq!(eval_char(chi, &(&a * &b)).unwrap(), ea.mul(&eval_char(chi, &b).unwrap()).unwrap());
        prop_assert_eq!(eval_char(chi, &a.sharp()).unwrap(), eval_char(&chi.inverse(p), &a).unwrap());
    }

    #[test]
    fn delta_is_antitone(seed in any::<u64>()) {
        let ring = GroupRing::new(2, 2, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = |rng: &mut ChaCha8Rng| {
            let s = random_gamma(2, rng);
            let r = rng.gen_range(-1..=1i64);
            Expr::nu(s, r, rng.gen_range(r..=2))
        };
        let f = gen(&mut rng);
        let g = gen(&mut rng);
        let small = delta_set_of(&[f.clone(), g], &ring, 64).unwrap();
        let big = delta_set_of(&[f], &ring, 64).unwrap();
        for chi in &small.members {
            prop_assert!(big.contains(chi));
        }
    }

    #[test]
    fn cyclotomic_covers_are_exact(seed in any::<u64>(), r in 0u32..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = random_gamma(2, &mut rng);
        let ring = GroupRing::new(2, 2, 2, 5).unwrap();
        let flats = ZpFlat::cyclotomic_cover(2, 2, &xi, r).unwrap();
        let rep = verify_cover(&Expr::nu(xi, r as i64 - 1, r as i64), &flats, &ring, 64).unwrap();
        prop_assert!(rep.equal && rep.uncovered.is_empty() && rep.spurious.is_empty());
    }

    #[test]
    fn nu_full_is_basis_independent(seed in any::<u64>(), n in 0i64..=1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = GroupRing::new(3, 2, 2, 3).unwrap();
        // an upper unitriangular change of basis is always invertible
        let k = rng.gen_range(-2..=2);
        let basis = vec![GammaVector::new([1, 0]), GammaVector::new([k, 1])];
        prop_assert_eq!(ring.nu_full(n, 2, &basis).unwrap(), ring.norm_element(n, 2).unwrap());
    }

    #[test]
    fn expressions_survive_display_and_parse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = GroupRing::new(2, 2, 2, 3).unwrap();
        let terms: Vec<Expr> = (0..3)
            .map(|_| {
                let s = random_gamma(2, &mut rng);
                let a = Expr::omega(s.clone(), rng.gen_range(0..=2));
                let b = Expr::nu(s, 0, rng.gen_range(0..=2));
                Expr::product(vec![a, b, Expr::Int(rng.gen_range(-3..=3))])
            })
            .collect();
        let e = Expr::sum(terms);
        let back = parse_expr(&e.to_string(), 2).unwrap();
        prop_assert_eq!(back.eval(&ring).unwrap(), e.eval(&ring).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn smith_recomposes(p in prop::sample::select(vec![2u64, 3, 5]), prec in 1u32..=4, rows in 1usize..=5, cols in 1usize..=5, seed in any::<u64>()) {
        let f = Zpn::new(p, prec).unwrap();
        let m = random_matrix(f, rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = m.smith_form();
        let (u, v) = (s.u.clone().unwrap(), s.v.clone().unwrap());
        prop_assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), s.d.clone());
        prop_assert!(u.inverse().is_ok() && v.inverse().is_ok());
        for i in 0..rows {
            for j in 0..cols {
                if i != j {
                    prop_assert_eq!(s.d.get(i, j), 0);
                }
            }
        }
        prop_assert!(s.exps.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn kernel_and_membership_match_enumeration(
        (p, prec) in prop::sample::select(vec![(2u64, 2u32), (2, 3), (3, 2), (5, 1)]),
        rows in 1usize..=3,
        cols in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let f = Zpn::new(p, prec).unwrap();
        let q = f.modulus();
        let m = random_matrix(f, rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
        let kernel: BTreeSet<Vec<u64>> = all_vectors(q, cols).into_iter().filter(|x| m.mul_vec(x).iter().all(|&c| c == 0)).collect();
        for g in m.kernel() {
            prop_assert!(kernel.contains(&g));
        }
        prop_assert_eq!(f.p().pow(m.kernel_order_exp() as u32) as usize, kernel.len());
        let image: BTreeSet<Vec<u64>> = all_vectors(q, cols).iter().map(|x| m.mul_vec(x)).collect();
        let span = ColumnSpan::new(&m);
        // rank-nullity for finite modules
        prop_assert_eq!(image.len() * kernel.len(), (q as usize).pow(cols as u32));
        prop_assert_eq!(f.p().pow(span.order_exp() as u32) as usize, image.len());
        for y in all_vectors(q, rows) {
            prop_assert_eq!(span.contains(&y), image.contains(&y));
            prop_assert_eq!(m.membership(&y), image.contains(&y));
            if let Some(x) = m.solve(&y) {
                prop_assert_eq!(m.mul_vec(&x), y);
            }
        }
    }
}

#[test]
fn chain_routes_agree_on_a_torsion_quotient() {
    let ring = GroupRing::new(2, 2, 3, 3).unwrap();
    let pres = LambdaPresentation::cyclic(vec![Expr::Int(2), Expr::omega(GammaVector::basis(2, 0), 0)]);
    let rep = ddot_profile(&pres, &IdealFamily::Tight(TightSet::standard(2)), 2, 3, &ring, 100_000).unwrap();
    assert_eq!(rep.chains.method, ChainMethod::Exhaustive);
    assert_eq!(rep.chains.exhaustive, Some(8));
    assert_eq!(rep.chains.linear_log_p, 3);
    assert!(rep.chains.coherent);
    assert!(rep.max_order_exp() > 0);
}

#[test]
fn capitulation_without_inertia_is_the_augmentation_profile() {
    let ring = GroupRing::new(2, 2, 2, 3).unwrap();
    let x = LambdaPresentation::cyclic(vec![Expr::Int(2), Expr::omega(GammaVector::basis(2, 0), 0)]);
    let taus = TightSet::standard(2);
    let cap = capitulation_tower(&x, &taus, &InertiaDatum::new(vec![]), 2, 2, &ring, 10_000).unwrap();
    let aug = ddot_profile(&x, &IdealFamily::Augmentation, 2, 2, &ring, 10_000).unwrap();
    let key = |r: &iwasawa::TowerReport| r.grid.iter().map(|e| (e.n, e.m, e.exponents.clone())).collect::<Vec<_>>();
    assert_eq!(key(&cap), key(&aug));
    assert_eq!(cap.chains.count, aug.chains.count);
}
