//! Randomized invariants over a small pool of ring configurations.

use cokernel_core::counting::{reduced_pencil_type, twisted_pencil, TwistSpec};
use cokernel_core::matrix::{det, eval_poly, mat_mul, Matrix};
use cokernel_core::params::RingParams;
use cokernel_core::partition::ModuleType;
use cokernel_core::ring::{ExtRing, RElem, Ring, ZmodRing};
use cokernel_core::snf::{cokernel_type, companion_cokernel, smith_normal_form};
use proptest::prelude::*;

fn pool() -> Vec<RingParams> {
    vec![
        RingParams::new(2, 0, &[0, 1]).unwrap(),
        RingParams::new(2, 1, &[1, 1, 1]).unwrap(),
        RingParams::new(2, 2, &[1, 1, 1]).unwrap(),
        RingParams::new(2, 1, &[1, 1, 0, 1]).unwrap(),
        RingParams::new(3, 1, &[1, 0, 1]).unwrap(),
        RingParams::new(5, 1, &[3, 0, 1]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ring_axioms(pi in 0usize..6, coeffs in proptest::collection::vec(0u64..4096, 12)) {
        let params = pool().swap_remove(pi);
        let ring = ExtRing::new(&params);
        let d = params.degree();
        let take = |offset: usize| {
            let signed: Vec<i64> = (0..d)
                .map(|i| (coeffs[(offset + i) % coeffs.len()] % params.modulus()) as i64)
                .collect();
            RElem::new(&signed, &params).unwrap()
        };
        let a = take(0);
        let b = take(4);
        let c = take(8);
        prop_assert_eq!(ring.add(&a, &b), ring.add(&b, &a));
        prop_assert_eq!(ring.mul(&a, &b), ring.mul(&b, &a));
        prop_assert_eq!(
            ring.mul(&a, &ring.mul(&b, &c)),
            ring.mul(&ring.mul(&a, &b), &c)
        );
        prop_assert_eq!(
            ring.mul(&a, &ring.add(&b, &c)),
            ring.add(&ring.mul(&a, &b), &ring.mul(&a, &c))
        );
        prop_assert_eq!(ring.add(&a, &ring.neg(&a)), ring.zero());
        prop_assert_eq!(ring.mul(&a, &ring.one()), a.clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn valuations_multiply_and_units_invert(pi in 0usize..6, coeffs in proptest::collection::vec(0u64..4096, 8)) {
        let params = pool().swap_remove(pi);
        let ring = ExtRing::new(&params);
        let d = params.degree();
        let take = |offset: usize| {
            let signed: Vec<i64> = (0..d)
                .map(|i| (coeffs[(offset + i) % coeffs.len()] % params.modulus()) as i64)
                .collect();
            RElem::new(&signed, &params).unwrap()
        };
        let a = take(0);
        let b = take(3);
        let lhs = ring.valuation(&ring.mul(&a, &b));
        let rhs = (ring.valuation(&a) + ring.valuation(&b)).min(ring.nilpotency());
        prop_assert_eq!(lhs, rhs);
        if ring.valuation(&a) == 0 {
            let inv = ring.invert_unit(&a).unwrap();
            prop_assert_eq!(ring.mul(&a, &inv), ring.one());
            prop_assert_eq!(ring.invert_unit(&inv).unwrap(), a);
        }
    }

    #[test]
    fn snf_transforms_reproduce_the_input(
        pi in 0usize..6,
        n in 1usize..=3,
        entries in proptest::collection::vec(0u64..65536, 9 * 4),
    ) {
        let params = pool().swap_remove(pi);
        let ring = ExtRing::new(&params);
        let d = params.degree();
        let data: Vec<RElem> = (0..n * n)
            .map(|e| {
                let signed: Vec<i64> = (0..d)
                    .map(|c| (entries[(e * d + c) % entries.len()] % params.modulus()) as i64)
                    .collect();
                RElem::new(&signed, &params).unwrap()
            })
            .collect();
        let m = Matrix::new(n, n, data).unwrap();
        let snf = smith_normal_form(&ring, &m);
        prop_assert!(snf.verify(&ring, &m));
        prop_assert!(snf.exponents.windows(2).all(|w| w[0] <= w[1]));
        // diagonal exponents, capped, sum to the determinant valuation
        let cap = ring.nilpotency();
        let sum = snf.exponents.iter().sum::<u32>().min(cap);
        prop_assert_eq!(sum, ring.valuation(&det(&ring, &m)));
    }

    #[test]
    fn dual_cokernel_paths_agree(
        pi in 0usize..6,
        n in 1usize..=2,
        entries in proptest::collection::vec(0u64..65536, 4),
    ) {
        let params = pool().swap_remove(pi);
        let zring = ZmodRing::new(&params);
        let data: Vec<u64> = (0..n * n)
            .map(|e| entries[e % entries.len()] % params.modulus())
            .collect();
        let x = Matrix::new(n, n, data).unwrap();
        let via_pencil = companion_cokernel(&x, &params).abelianize(params.degree());
        let via_eval = cokernel_type(&zring, &eval_poly(&x, &params));
        prop_assert_eq!(via_pencil, via_eval);
    }

    #[test]
    fn cokernel_types_survive_unimodular_transforms(
        pi in 0usize..6,
        n in 1usize..=3,
        entries in proptest::collection::vec(0u64..65536, 9 * 3),
    ) {
        let params = pool().swap_remove(pi);
        let ring = ZmodRing::new(&params);
        let m = params.modulus();
        let pick = |block: usize, e: usize| entries[(block * n * n + e) % entries.len()] % m;
        let a = Matrix::new(n, n, (0..n * n).map(|e| pick(0, e)).collect()).unwrap();
        // turn arbitrary matrices into unimodular ones by unit-scaling the
        // diagonal of an upper-plus-lower split
        let unimod = |block: usize| {
            let mut u = Matrix::filled(n, n, 0u64);
            for i in 0..n {
                for j in 0..n {
                    let v = pick(block, i * n + j);
                    *u.at_mut(i, j) = match i.cmp(&j) {
                        std::cmp::Ordering::Less => v,
                        std::cmp::Ordering::Equal => {
                            if v % params.p() == 0 { (v + 1) % m } else { v }
                        }
                        std::cmp::Ordering::Greater => v - v % params.p(),
                    };
                }
            }
            u
        };
        let u = unimod(1);
        let v = unimod(2);
        prop_assume!(ring.valuation(&det(&ring, &u)) == 0);
        prop_assume!(ring.valuation(&det(&ring, &v)) == 0);
        let uav = mat_mul(&ring, &mat_mul(&ring, &u, &a).unwrap(), &v).unwrap();
        prop_assert_eq!(cokernel_type(&ring, &a), cokernel_type(&ring, &uav));
    }

    #[test]
    fn reduction_commutes_with_pencil_types(
        pi in 1usize..6,
        entries in proptest::collection::vec(0u64..65536, 4),
    ) {
        // the reduced pencil type equals the reduction of the full type
        let params = pool().swap_remove(pi);
        let n = 2usize;
        let data: Vec<u64> = (0..n * n)
            .map(|e| entries[e % entries.len()] % params.modulus())
            .collect();
        let x = Matrix::new(n, n, data).unwrap();
        let pencil = twisted_pencil(&x, &TwistSpec::zero(&params, n), &params);
        let full = cokernel_type(&ExtRing::new(&params), &pencil);
        for level in 1..=params.nilpotency() {
            prop_assert_eq!(
                reduced_pencil_type(&pencil, &params, level),
                full.reduce_mod(level)
            );
        }
    }

    #[test]
    fn partition_strings_round_trip(parts in proptest::collection::vec(1u32..9, 0..6)) {
        let g = ModuleType::from_unsorted(parts);
        let back: ModuleType = g.to_string().parse().unwrap();
        prop_assert_eq!(back, g);
    }
}
