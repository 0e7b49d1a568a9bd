use gmt_epi::chain::{boundary, cone, cone_mass_formula};
use gmt_epi::coeff::{Coeff, GroupSpec};
use gmt_epi::generate::random_chain;
use gmt_epi::io::ChainFile;
use proptest::prelude::*;

fn group() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        Just(GroupSpec::Integers),
        Just(GroupSpec::Unit),
        (1u32..=8).prop_map(|depth| GroupSpec::Cantor { depth }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_of_boundary_vanishes(n in 2usize..=4, m in 2usize..=3, count in 1usize..6, g in group(), seed: u64) {
        prop_assume!(m <= n);
        let t = random_chain(n, m, count, g, seed).unwrap();
        let bb = boundary(&boundary(&t).unwrap()).unwrap();
        prop_assert!(bb.is_empty(), "{} terms left", bb.len());
    }

    #[test]
    fn cone_mass_is_the_height_weighted_face_sum(count in 1usize..8, seed: u64, v in prop::array::uniform3(-2.0f64..2.0)) {
        let t = random_chain(3, 1, count, GroupSpec::Integers, seed).unwrap();
        let c = cone(&v, &t).unwrap();
        let want = cone_mass_formula(&v, &t);
        prop_assert!((c.mass() - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", c.mass(), want);
    }

    #[test]
    fn mass_scales_with_dilation(n in 2usize..=3, m in 1usize..=2, seed: u64, s in 0.1f64..10.0) {
        prop_assume!(m <= n);
        let t = random_chain(n, m, 4, GroupSpec::Integers, seed).unwrap();
        let want = t.mass() * s.powi(m as i32);
        prop_assert!((t.dilate(s).mass() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn mass_is_subadditive(seed_a: u64, seed_b: u64, g in group()) {
        let a = random_chain(3, 2, 4, g, seed_a).unwrap();
        let b = random_chain(3, 2, 4, g, seed_b).unwrap();
        let sum = a.try_add(&b).unwrap();
        prop_assert!(sum.mass() <= a.mass() + b.mass() + 1e-12);
        prop_assert!(a.try_sub(&a).unwrap().is_empty());
    }

    #[test]
    fn chain_files_round_trip_bit_exactly(n in 1usize..=4, m in 0usize..=2, count in 1usize..10, g in group(), seed: u64) {
        prop_assume!(m <= n);
        let t = random_chain(n, m, count, g, seed).unwrap();
        let f = ChainFile::from_chain(&t, serde_json::Value::Null);
        let back = ChainFile::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_chain().unwrap(), t);
    }

    #[test]
    fn cantor_norm_is_subadditive_and_bounded_below(depth in 1u32..=12, a: u64, b: u64) {
        let g = GroupSpec::Cantor { depth };
        let (x, y) = (g.element(a as i64), g.element(b as i64));
        let s = x.add(&y);
        prop_assert!(s.norm() <= x.norm() + y.norm() + 1e-15);
        if !x.is_zero() {
            prop_assert!(x.norm() >= g.gap() * (1.0 - 1e-15));
        }
        prop_assert_eq!(x.add(&x.neg()), g.zero());
        prop_assert_eq!(Coeff::from_cantor_digits(&x.cantor_digits().unwrap()).unwrap(), x);
    }
}
