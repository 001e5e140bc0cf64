use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use iwahori_core::{
    teichmuller_lift, Enveloping, GradedLie, GradedLieElement, IwahoriElement, Residue, RingSpec,
    RootSystem, StructureConstants, TruncatedUnramified as Tu,
};

fn spec() -> Arc<RingSpec> {
    RingSpec::new(5, 2, 3).unwrap()
}

fn elem() -> impl Strategy<Value = Tu> {
    (0u64..125, 0u64..125).prop_map(|(a, b)| Tu::from_coeffs(&spec(), &[a, b]))
}

fn residue() -> impl Strategy<Value = Residue> {
    (0u64..5, 0u64..5).prop_map(|(a, b)| Residue::from_coeffs(&spec(), &[a, b]))
}

proptest! {
    #[test]
    fn ring_axioms(a in elem(), b in elem(), c in elem()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &Tu::one(&spec()), a);
    }

    #[test]
    fn unit_inverse(a in elem()) {
        if a.is_unit() {
            prop_assert_eq!(&a * &a.inv_unit().unwrap(), Tu::one(&spec()));
        } else {
            prop_assert!(a.inv_unit().is_err());
        }
    }

    #[test]
    fn valuation_rules(a in elem(), b in elem()) {
        let (va, vb) = (a.valuation(), b.valuation());
        if let (Some(x), Some(y)) = (va.finite(), vb.finite()) {
            if x + y < 3 {
                prop_assert_eq!((&a * &b).valuation().finite(), Some(x + y));
            }
        }
        prop_assert!((&a + &b).valuation().lower_bound() >= va.lower_bound().min(vb.lower_bound()));
    }

    #[test]
    fn teichmuller_multiplicative(r in residue(), s in residue()) {
        let lhs = teichmuller_lift(&r.mul(&s));
        prop_assert_eq!(lhs, &teichmuller_lift(&r) * &teichmuller_lift(&s));
        let t = teichmuller_lift(&r);
        prop_assert_eq!(t.pow(25), t.clone());
        prop_assert_eq!(t.residue(), r);
    }

    #[test]
    fn ldu_round_trip(seed in any::<u64>()) {
        let rs = Arc::new(RootSystem::from_label("A3").unwrap());
        let spec = RingSpec::new(7, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = IwahoriElement::random(&rs, &spec, 0, None, &mut rng).unwrap();
        let m = g.to_matrix().unwrap();
        prop_assert_eq!(IwahoriElement::from_matrix(&rs, &m, &[]).unwrap(), g);
    }

    #[test]
    fn group_law(seed in any::<u64>()) {
        let rs = Arc::new(RootSystem::from_label("A2").unwrap());
        let spec = RingSpec::new(5, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || IwahoriElement::random(&rs, &spec, 0, None, &mut rng).unwrap();
        let (a, b, c) = (draw(), draw(), draw());
        let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(a.multiply(&a.inverse().unwrap()).unwrap().is_identity());
    }
}

fn lie_c2() -> GradedLie {
    let rs = Arc::new(RootSystem::from_label("C2").unwrap());
    let sc = Arc::new(StructureConstants::compute(rs).unwrap());
    GradedLie::new(sc, RingSpec::new(7, 2, 2).unwrap(), 1, false).unwrap()
}

fn combo(la: &GradedLie, coeffs: &[i64]) -> GradedLieElement {
    let mut e = la.zero();
    for (s, &c) in la.basis(2 * la.h()).into_iter().zip(coeffs) {
        e.add_term(s, c);
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_and_antisymmetry(
        x in prop::collection::vec(0i64..7, 40),
        y in prop::collection::vec(0i64..7, 40),
        z in prop::collection::vec(0i64..7, 40),
    ) {
        let la = lie_c2();
        let (x, y, z) = (combo(&la, &x), combo(&la, &y), combo(&la, &z));
        let br = |a: &GradedLieElement, b: &GradedLieElement| la.bracket(a, b).unwrap();
        let sum = br(&x, &br(&y, &z))
            .add(&br(&y, &br(&z, &x))).unwrap()
            .add(&br(&z, &br(&x, &y))).unwrap();
        prop_assert!(sum.is_zero());
        prop_assert!(br(&x, &y).add(&br(&y, &x)).unwrap().is_zero());
        prop_assert!(br(&x, &x).is_zero());
    }

    #[test]
    fn pbw_multiplication_associative(a in 0u16..6, b in 0u16..6, c in 0u16..6, d in 0u16..6) {
        let rs = Arc::new(RootSystem::from_label("A2").unwrap());
        let sc = Arc::new(StructureConstants::compute(rs).unwrap());
        let la = GradedLie::new(sc, RingSpec::new(5, 1, 2).unwrap(), 0, true).unwrap();
        let env = Enveloping::new(la).unwrap();
        let n = env.symbols().len() as u16;
        let (a, b, c, d) = (env.symbol(a % n), env.symbol(b % n), env.symbol(c % n), env.symbol(d % n));
        let ab = env.multiply(&a, &b);
        let left = env.multiply(&env.multiply(&ab, &c), &d);
        let right = env.multiply(&a, &env.multiply(&b, &env.multiply(&c, &d)));
        prop_assert_eq!(left, right);
    }
}
