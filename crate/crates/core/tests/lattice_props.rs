mod common;

use cvp_qubo::lattice::{basis_coords, paper_bits};
use cvp_qubo::pipeline::cvp_oracle_certified;
use cvp_qubo::{encoding_bits, kappa_bound_sq, reduce_to_parallelepiped, BoundMode, CvpInstance};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(max_n: usize, lo: i64, hi: i64) -> impl Strategy<Value = CvpInstance> {
    (1..=max_n, any::<u64>()).prop_map(move |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        common::random_instance(&mut rng, n, lo, hi, 40)
    })
}

proptest! {
    #[test]
    fn reduced_target_lies_in_parallelepiped(inst in instance(5, -6, 6)) {
        let red = reduce_to_parallelepiped(&inst).unwrap();
        let c = basis_coords(inst.basis(), &red.x_hat).unwrap();
        for ci in &c.0 {
            prop_assert!(!ci.is_negative() && *ci < BigRational::one());
        }
        let back: Vec<BigInt> = red.x_hat.iter().zip(&red.lambda0).map(|(a, b)| a + b).collect();
        prop_assert_eq!(&back[..], inst.target());
        prop_assert_eq!(inst.basis().mul_vec(&red.floor_coords).unwrap(), red.lambda0);
    }

    #[test]
    fn reduction_is_translation_invariant(inst in instance(4, -5, 5), w in prop::collection::vec(-9i64..=9, 4)) {
        let n = inst.dim();
        let shift = inst.basis().mul_vec(&common::ints(&w[..n])).unwrap();
        let moved: Vec<BigInt> = inst.target().iter().zip(&shift).map(|(a, b)| a + b).collect();
        let a = reduce_to_parallelepiped(&inst).unwrap();
        let b = reduce_to_parallelepiped(&inst.with_target(moved).unwrap()).unwrap();
        prop_assert_eq!(a.x_hat, b.x_hat);
    }

    #[test]
    fn kappa_bound_dominates_diagonal_condition(d in prop::collection::vec(1i64..=9, 1..=5)) {
        let a = cvp_qubo::IntMatrix::diagonal(&d);
        let (mx, mn) = (*d.iter().max().unwrap(), *d.iter().min().unwrap());
        let kappa_sq = BigRational::new(BigInt::from(mx * mx), BigInt::from(mn * mn));
        prop_assert!(kappa_bound_sq(&a).unwrap() >= kappa_sq);
    }

    #[test]
    fn tight_bits_never_exceed_paper_bits(inst in instance(5, -4, 4)) {
        prop_assume!(inst.dim() >= 3);
        let rep = encoding_bits(&inst, BoundMode::Tight).unwrap();
        prop_assert!(rep.m_tight <= rep.m_paper.unwrap());
        prop_assert_eq!(rep.m_paper.unwrap(), paper_bits(inst.dim(), inst.max_entry()));
    }

    #[test]
    fn tight_bits_are_least(inst in instance(4, -5, 5)) {
        let rep = encoding_bits(&inst, BoundMode::Tight).unwrap();
        let four_m = BigRational::from_integer(BigInt::from(1) << (2 * rep.m_tight));
        prop_assert!(four_m >= rep.z_norm_sq_upper);
        if rep.m_tight > 0 {
            let below = BigRational::from_integer(BigInt::from(1) << (2 * rep.m_tight - 2));
            prop_assert!(below < rep.z_norm_sq_upper);
        }
        prop_assert!(&rep.kappa_upper * &rep.kappa_upper >= rep.kappa_sq_upper);
    }

    #[test]
    fn closest_vectors_respect_tight_bound(inst in instance(3, -3, 3)) {
        let red = reduce_to_parallelepiped(&inst).unwrap();
        let rep = encoding_bits(&inst, BoundMode::Tight).unwrap();
        let o = cvp_oracle_certified(inst.basis(), &red.x_hat, 1 << 24).unwrap();
        let edge = BigInt::from(1) << rep.m_tight;
        for zi in &o.z {
            prop_assert!(zi.abs() <= edge);
        }
        prop_assert!(!o.dist_sq.is_negative());
    }
}
