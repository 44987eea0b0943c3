mod common;

use genrank::constructions::{
    make_invertible, perturb_to_generating_tuple, separate_values, BlockAlgebra,
};
use genrank::cx_homogeneous::{conjugating_unitary, orbit_word_length, same_unitary_orbit};
use genrank::generation::{classify_subalgebra, generated_algebra, OrbitType};
use genrank::matrix_core::{
    apply_real_fn, min_singular_value, op_norm, random_hermitian, random_hermitian_tuple,
    random_unitary, spectral_decomposition, CMatrix,
};
use genrank::rank_calculus::{
    generator_rank_bounds, gr_prime, parse, real_rank_bounds, AlgDesc, ExtNat, SpaceType,
};
use genrank::stratification::{enumerate_orbit_types, mc_generation_rate, sample_stratum_tuple};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hermitian(n: usize, seed: u64) -> CMatrix {
    random_hermitian(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functional_calculus_is_multiplicative(n in 1usize..6, seed in any::<u64>()) {
        let h = hermitian(n, seed);
        let f = |x: f64| x.sin() + 0.5;
        let g = |x: f64| x * x - x;
        let fg = apply_real_fn(&h, |x| f(x) * g(x)).unwrap();
        let prod = apply_real_fn(&h, f).unwrap() * apply_real_fn(&h, g).unwrap();
        prop_assert!(op_norm(&(fg - prod)) < 1e-9 * (1.0 + op_norm(&h)).powi(3));
    }

    #[test]
    fn spectral_decomposition_reconstructs(n in 1usize..7, seed in any::<u64>()) {
        let h = hermitian(n, seed);
        let sd = spectral_decomposition(&h).unwrap();
        prop_assert!(op_norm(&(sd.reconstruct() - &h)) < 1e-9 * (1.0 + op_norm(&h)));
        prop_assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn closure_dimension_is_conjugation_invariant(n in 2usize..5, pick in any::<usize>(), seed in any::<u64>()) {
        let types = enumerate_orbit_types(n);
        let omega = &types[pick % types.len()];
        let t = sample_stratum_tuple(n, 2, omega, seed).unwrap();
        let u = random_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 0xabc));
        let a = generated_algebra(&t).unwrap().dimension();
        let b = generated_algebra(&t.conjugate_by(&u)).unwrap().dimension();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a, common::algebra_dim(t.entries()));
    }

    #[test]
    fn stratum_samples_classify_back(n in 1usize..5, pick in any::<usize>(), seed in any::<u64>()) {
        let types = enumerate_orbit_types(n);
        let omega = &types[pick % types.len()];
        let t = sample_stratum_tuple(n, 2, omega, seed).unwrap();
        let s = generated_algebra(&t).unwrap();
        prop_assert_eq!(s.dimension(), omega.intrinsic_dimension());
        prop_assert_eq!(&classify_subalgebra(&s).unwrap(), omega);
    }

    #[test]
    fn separated_values_respect_gap_and_budget(
        values in prop::collection::vec(-2.0f64..2.0, 1..12),
        clump in prop::bool::ANY,
        gap in 1e-4f64..0.1,
    ) {
        let values: Vec<f64> = if clump {
            values.iter().map(|v| (v * 3.0).round() / 3.0).collect()
        } else {
            values
        };
        let out = separate_values(&values, gap);
        prop_assert_eq!(out.len(), values.len());
        let slack = 1e-12;
        for (i, y) in out.iter().enumerate() {
            prop_assert!(y.abs() >= gap - slack, "{y} too close to 0");
            prop_assert!((y - values[i]).abs() <= gap * values.len() as f64 + slack);
            for z in &out[i + 1..] {
                prop_assert!((y - z).abs() >= gap - slack);
            }
        }
        prop_assert_eq!(separate_values(&out, gap), out);
    }

    #[test]
    fn make_invertible_moves_little(n in 1usize..6, seed in any::<u64>(), delta in 1e-3f64..1.0, rank in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(n, &mut rng);
        let v = random_unitary(n, &mut rng);
        let sv: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 + i as f64 } else { 0.0 }).collect();
        let m = &u * genrank::matrix_core::diag(&sv) * &v;
        let out = make_invertible(&m, delta);
        prop_assert!(min_singular_value(&out) >= delta / 2.0 - 1e-9);
        prop_assert!(op_norm(&(&out - &m)) <= delta / 2.0 + 1e-9);
    }

    #[test]
    fn orbit_relation_is_transitive(n in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t1 = random_hermitian_tuple(n, 2, seed).unwrap();
        let t2 = t1.conjugate_by(&random_unitary(n, &mut rng));
        let t3 = t2.conjugate_by(&random_unitary(n, &mut rng));
        let l = orbit_word_length(n);
        prop_assert!(same_unitary_orbit(&t1, &t2, l).unwrap());
        prop_assert!(same_unitary_orbit(&t2, &t3, l).unwrap());
        prop_assert!(same_unitary_orbit(&t1, &t3, l).unwrap());
        let w = conjugating_unitary(&t1, &t3).unwrap().expect("same orbit");
        prop_assert!(t1.conjugate_by(&w).distance(&t3).unwrap() < 1e-6);
        let other = random_hermitian_tuple(n, 2, seed.wrapping_add(1)).unwrap();
        prop_assert!(!same_unitary_orbit(&t1, &other, l).unwrap());
    }

    #[test]
    fn perturbation_generates_block_algebras(
        blocks in prop::collection::vec(1usize..4, 1..4),
        seed in any::<u64>(),
        degenerate in prop::bool::ANY,
    ) {
        let algebra = BlockAlgebra::new(blocks).unwrap();
        let t = algebra.random_tuple(2, seed).unwrap();
        let t = if degenerate { t.with_entry(0, t.entry(1).clone()).unwrap() } else { t };
        let eps = 0.02;
        let out = perturb_to_generating_tuple(&algebra, &t, eps).unwrap();
        prop_assert!(out.distance(&t).unwrap() < eps);
        prop_assert_eq!(common::algebra_dim(out.entries()), algebra.dimension());
        prop_assert!(out.entries().iter().all(|m| algebra.contains(m)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generation_rate_is_monotone_in_k(n in 1usize..4, seed in any::<u64>()) {
        let two = mc_generation_rate(n, 2, 40, seed).unwrap();
        let three = mc_generation_rate(n, 3, 40, seed).unwrap();
        prop_assert!(three.generating >= two.generating);
    }
}

fn ext_nat() -> impl Strategy<Value = ExtNat> {
    prop_oneof![4 => (0u64..15).prop_map(ExtNat::Fin), 1 => Just(ExtNat::Inf)]
}

fn space() -> impl Strategy<Value = SpaceType> {
    prop_oneof![Just(SpaceType::Basic), Just(SpaceType::Exceptional), Just(SpaceType::Unknown)]
}

fn desc() -> impl Strategy<Value = AlgDesc> {
    let leaf = prop_oneof![
        (ext_nat(), space()).prop_map(|(dim, space)| AlgDesc::Commutative { dim, space }),
        (1usize..9).prop_map(AlgDesc::Matrix),
        prop::collection::vec(1usize..5, 1..4).prop_map(AlgDesc::FiniteDim),
        (2usize..7, ext_nat()).prop_map(|(n, dim)| AlgDesc::Homogeneous { n, dim }),
        Just(AlgDesc::Af),
        Just(AlgDesc::AhSimpleSlowGrowth),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(AlgDesc::DirectSum),
            (inner.clone(), inner.clone()).prop_map(|(i, q)| AlgDesc::Extension {
                ideal: Box::new(i),
                quotient: Box::new(q),
            }),
            (inner.clone(), 1usize..5, any::<[bool; 3]>()).prop_map(|(c, n, f)| AlgDesc::TensorMn {
                child: Box::new(c),
                n,
                rr0: f[0],
                sr1: f[1],
                unital: f[2],
            }),
            (prop::collection::vec(inner.clone(), 1..3), any::<bool>())
                .prop_map(|(children, repeats)| AlgDesc::InductiveLimit { children, repeats }),
            inner.clone().prop_map(|c| AlgDesc::UhfAbsorbingRr0(Box::new(c))),
            inner.clone().prop_map(|c| AlgDesc::Ideal(Box::new(c))),
            inner.prop_map(|c| AlgDesc::Quotient(Box::new(c))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn description_text_round_trips(d in desc()) {
        prop_assert_eq!(parse(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn bounds_are_ordered_and_wrappers_do_not_raise(d in desc()) {
        let gr = generator_rank_bounds(&d).unwrap();
        let rr = real_rank_bounds(&d).unwrap();
        prop_assert!(gr.lo <= gr.hi);
        prop_assert!(rr.lo <= rr.hi);
        prop_assert!(rr.hi <= gr.hi);
        for wrapped in [AlgDesc::Ideal(Box::new(d.clone())), AlgDesc::Quotient(Box::new(d.clone()))] {
            prop_assert!(generator_rank_bounds(&wrapped).unwrap().hi <= gr.hi);
        }
        prop_assert!(!gr.trace.is_empty());
    }
}

#[test]
fn non_self_adjoint_rank_formula_exhaustive() {
    for g in 0..1_000_000u64 {
        let p = gr_prime(ExtNat::Fin(g)).finite().unwrap();
        // Smallest k >= 1 whose 2k self-adjoint parts reach gr + 1 entries.
        let expected = (g + 1).div_ceil(2).max(1);
        assert_eq!(p, expected, "gr = {g}");
        if g >= 1 {
            assert!(p <= g);
            assert_eq!(p == g, g == 1 || g == 2, "gr = {g}");
        }
    }
    assert_eq!(gr_prime(ExtNat::Inf), ExtNat::Inf);
}

#[test]
fn orbit_type_bookkeeping() {
    for n in 1..=6 {
        for w in enumerate_orbit_types(n) {
            assert!(w.is_valid_for(n));
            assert!(w.occupied_size() <= n);
            assert_eq!(w == OrbitType::full(n), w.intrinsic_dimension() == n * n);
        }
    }
}
