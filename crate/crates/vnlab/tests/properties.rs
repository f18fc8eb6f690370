//! Randomized invariant checks driven by proptest over seeds and small
//! dimensions.

use proptest::prelude::*;

use vnlab::algebra::VnAlgebra;
use vnlab::channels::{self, Channel};
use vnlab::matcore::{
    derive_seed, fidelity, sample_density, sample_haar_unitary, trace_distance, Density,
};
use vnlab::entropy::vn_entropy;
use vnlab::squares;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // 1 − F ≤ T ≤ sqrt(1 − F²), plus symmetry of both metrics
    #[test]
    fn fidelity_and_trace_distance_bounds(seed in any::<u64>(), dim in 2usize..=6) {
        let rho = sample_density(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = sample_density(dim, 1 + (seed as usize % dim), derive_seed(seed, 1)).unwrap();
        let f = fidelity(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(1.0 - f <= t + 1e-9);
        prop_assert!(t <= (1.0 - f * f).sqrt() + 1e-9);
        prop_assert!((fidelity(&sigma, &rho).unwrap() - f).abs() < 1e-9);
        prop_assert!((trace_distance(&sigma, &rho).unwrap() - t).abs() < 1e-12);
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
    }

    // 0 ≤ H(ρ) ≤ log₂ d, and entropy is additive over tensor products
    #[test]
    fn entropy_range_and_tensor_additivity(seed in any::<u64>(), a in 2usize..=4, b in 2usize..=3) {
        let rho = sample_density(a, a, derive_seed(seed, 2)).unwrap();
        let sigma = sample_density(b, b, derive_seed(seed, 3)).unwrap();
        let h_a = vn_entropy(&rho).expect_finite();
        let h_b = vn_entropy(&sigma).expect_finite();
        prop_assert!(h_a >= -1e-12 && h_a <= (a as f64).log2() + 1e-9);
        let joint = Density::new(rho.mat().kron(sigma.mat())).unwrap();
        let h_joint = vn_entropy(&joint).expect_finite();
        prop_assert!((h_joint - h_a - h_b).abs() < 1e-9);
    }

    // the double commutant inside the full algebra returns the same span
    #[test]
    fn double_commutant_is_identity(seed in any::<u64>(), dim in 2usize..=6) {
        let mut pattern = Vec::new();
        let mut left = dim;
        let mut s = seed;
        while left > 0 {
            s = derive_seed(s, 17);
            let n = 1 + (s as usize) % left;
            pattern.push((n, 1));
            left -= n;
        }
        let alg = VnAlgebra::block_pattern(&pattern)
            .conjugated(&sample_haar_unitary(dim, derive_seed(seed, 4)));
        let full = VnAlgebra::full(dim);
        let double = alg.commutant(&full).unwrap().commutant(&full).unwrap();
        prop_assert!(double.same_span(&alg));
    }

    // conditional expectations are idempotent and trace preserving
    #[test]
    fn cond_expectation_is_idempotent(seed in any::<u64>(), dim in 2usize..=6) {
        let alg = VnAlgebra::diagonal_in_basis(&sample_haar_unitary(dim, derive_seed(seed, 5)));
        let e = Channel::cond_expectation(&alg).unwrap();
        let rho = sample_density(dim, dim, derive_seed(seed, 6)).unwrap();
        let once = e.apply(&rho).unwrap();
        let twice = e.apply(&once).unwrap();
        prop_assert!(trace_distance(&once, &twice).unwrap() < 1e-10);
        prop_assert!((once.mat().trace().re - 1.0).abs() < 1e-10);
    }

    // the generalized CMI of a sampled commuting square is non-negative
    #[test]
    fn sampled_squares_have_nonnegative_cmi(seed in any::<u64>(), dim in 2usize..=6) {
        let square = squares::sample_commuting_square(dim, derive_seed(seed, 7)).unwrap();
        let d = square.m().ambient_dim();
        let rho = sample_density(d, d, derive_seed(seed, 8)).unwrap();
        let rep = squares::gen_cmi_classified(&square, &rho).unwrap();
        prop_assert!(rep.value_bits >= -1e-9);
    }

    // publishing a shared slot cannot lower the CMI: with S = A⊗1⊗D the
    // value against T = 1⊗B⊗1 dominates the value against T = 1⊗B⊗D
    #[test]
    fn publishing_a_shared_slot_is_monotone(seed in any::<u64>()) {
        let f = VnAlgebra::full(2);
        let one = VnAlgebra::trivial(2);
        let s = VnAlgebra::tensor(&VnAlgebra::tensor(&f, &one), &f);
        let t_private = VnAlgebra::tensor(&VnAlgebra::tensor(&one, &f), &one);
        let t_shared = VnAlgebra::tensor(&VnAlgebra::tensor(&one, &f), &f);
        let m = VnAlgebra::full(8);
        let rho = sample_density(8, 8, derive_seed(seed, 9)).unwrap();
        let wide = squares::gen_cmi(&s, &t_private, &m, &rho).unwrap().value_bits;
        let narrow = squares::gen_cmi(&s, &t_shared, &m, &rho).unwrap().value_bits;
        prop_assert!(wide >= narrow - 1e-9);
    }

    // the Petz map of a conditional expectation fixes its default state
    #[test]
    fn petz_map_fixes_the_default_state(seed in any::<u64>(), dim in 2usize..=5) {
        let alg = VnAlgebra::diagonal_in_basis(&sample_haar_unitary(dim, derive_seed(seed, 10)));
        let e = Channel::cond_expectation(&alg).unwrap();
        let sigma = sample_density(dim, dim, derive_seed(seed, 11)).unwrap();
        let r = channels::petz_map(&e, &sigma).unwrap();
        let round = r.apply(&e.apply(&sigma).unwrap()).unwrap();
        prop_assert!(trace_distance(&round, &sigma).unwrap() < 1e-9);
    }
}
