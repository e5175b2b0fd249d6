use kdlab::fragment::{is_kd_real, HermitianOperator, PureFamily, Verdict};
use kdlab::kd::{akd, char_fn, kd, kd_inverse, marginals, symplectic_fourier, symplectic_fourier_inverse, CharOrder};
use kdlab::random::{random_hermitian, random_operator, random_state, rng};
use kdlab::weyl_heisenberg::{wh_conjugate, wh_inv, wh_mul, wh_unitary, WHElement};
use kdlab::{parse_group, FiniteAbelianGroup, Operator};
use num_complex::Complex64;
use proptest::prelude::*;

fn group() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop::sample::select(vec!["Z1", "Z2", "Z3", "Z4", "Z5", "Z2xZ2", "Z6", "Z2xZ3", "Z8", "Z3xZ3"])
        .prop_map(|s| parse_group(s).unwrap())
}

fn op_pair() -> impl Strategy<Value = (FiniteAbelianGroup, Operator, Operator)> {
    (group(), any::<u64>()).prop_map(|(g, seed)| {
        let mut r = rng(seed, 0);
        let a = random_operator(&g, &mut r);
        let b = random_operator(&g, &mut r);
        (g, a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kd_preserves_inner_products((_g, a, b) in op_pair()) {
        prop_assert!((a.hs_inner(&b) - kd(&a).inner(&kd(&b))).norm() < 1e-10);
        prop_assert!(kd_inverse(&kd(&a)).sub(&a).hs_norm() < 1e-10);
    }

    #[test]
    fn kd_is_linear((_g, a, b) in op_pair(), s in -3.0f64..3.0) {
        let lhs = kd(&a.add(&b.scale(s)));
        let ka = kd(&a);
        let kb = kd(&b);
        let rhs = kdlab::PhaseSpaceFunction::from_fn(&a.group, |x, c| ka.get(x, c) + kb.get(x, c) * s);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn symplectic_fourier_round_trip((_g, a, _b) in op_pair()) {
        let x = char_fn(&a, CharOrder::Standard0).unwrap();
        prop_assert!(symplectic_fourier_inverse(&symplectic_fourier(&x)).max_abs_diff(&x) < 1e-10);
        prop_assert!((symplectic_fourier(&x).norm() - x.norm()).abs() < 1e-10);
        prop_assert!(akd(&a).max_abs_diff(&symplectic_fourier(&x)) < 1e-10);
    }

    #[test]
    fn states_have_unit_mass_and_marginals(g in group(), seed in any::<u64>(), rank in 1usize..4) {
        let rho = random_state(&g, rank, &mut rng(seed, 1));
        prop_assert!((kd(&rho).total_mass() - 1.0).norm() < 1e-10);
        let m = marginals(&rho, 1e-10).unwrap();
        prop_assert!((m.momentum.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(m.momentum.iter().all(|&p| p > -1e-12));
        prop_assert!(m.position.iter().all(|&p| p > -1e-12));
    }

    #[test]
    fn wh_action_translates_kd((g, a, _b) in op_pair(), gi in any::<prop::sample::Index>(), ci in any::<prop::sample::Index>(), phase in 0.0f64..6.3) {
        let n = g.order();
        let (gi, ci) = (gi.index(n), ci.index(n));
        let w = WHElement::from_indices(&g, gi, ci, Complex64::from_polar(1.0, phase)).unwrap();
        let lhs = kd(&wh_conjugate(&a, &w).unwrap());
        let rhs = kd(&a);
        for x in 0..n {
            for c in 0..n {
                prop_assert!((lhs.get(x, c) - rhs.get(g.sub_idx(x, gi), g.sub_idx(c, ci))).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wh_representation_is_multiplicative(g in group(), idx in prop::collection::vec(any::<prop::sample::Index>(), 4), p in 0.0f64..6.3, q in 0.0f64..6.3) {
        let n = g.order();
        let a = WHElement::from_indices(&g, idx[0].index(n), idx[1].index(n), Complex64::from_polar(1.0, p)).unwrap();
        let b = WHElement::from_indices(&g, idx[2].index(n), idx[3].index(n), Complex64::from_polar(1.0, q)).unwrap();
        let ab = wh_unitary(&g, &wh_mul(&g, &a, &b).unwrap()).unwrap();
        let prod = wh_unitary(&g, &a).unwrap().compose(&wh_unitary(&g, &b).unwrap());
        prop_assert!(ab.sub(&prod).hs_norm() < 1e-10);
        let id = wh_mul(&g, &a, &wh_inv(&g, &a).unwrap()).unwrap();
        prop_assert!(id.approx_eq(&WHElement::identity(&g), 1e-12));
    }

    #[test]
    fn kd_real_methods_agree(g in group(), seed in any::<u64>()) {
        let h = HermitianOperator::new(random_hermitian(&g, &mut rng(seed, 2))).unwrap();
        prop_assert!(is_kd_real(&h, 1e-10).method_agreement);
    }

    #[test]
    fn hull_contains_mixtures_of_members(g in group(), seed in any::<u64>(), k in 1usize..5) {
        use rand::Rng;
        let fam = PureFamily::new(&g).unwrap();
        let mut r = rng(seed, 3);
        let weights: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut rho = Operator::zero(&g);
        for w in &weights {
            let p = &fam.projectors()[r.random_range(0..fam.len())];
            rho = rho.add(&p.scale(w / total));
        }
        let rho = HermitianOperator::new(rho.hermitian_part()).unwrap();
        let res = fam.conv_membership(&rho, 1e-8).unwrap();
        prop_assert_eq!(res.verdict, Verdict::Inside);
        prop_assert!(fam.recheck(&rho, &res, true, 1e-6));
    }
}
