mod common;

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinamp::algebra::{
    apply_spec, apply_spec_raw, expectation, hermiticity_defect, realize_dense, realize_sparse,
    BitConfig, HamiltonianSpec, Pauli, PauliString, PauliTerm, StateVector,
};
use spinamp::chains::{cluster_chain, exchange_chain, CouplingProfile};

fn spec_strategy(max_sites: usize) -> impl Strategy<Value = HamiltonianSpec> {
    (1..=max_sites, any::<u64>(), 1usize..12)
        .prop_map(|(n, seed, terms)| random_spec(n, terms, &mut rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realized_matrices_are_hermitian(spec in spec_strategy(6)) {
        let m = realize_dense(&spec).unwrap();
        prop_assert!(hermiticity_defect(&m) < 1e-12);
    }

    #[test]
    fn realization_matches_kronecker_products(spec in spec_strategy(5)) {
        let diff = realize_dense(&spec).unwrap() - kron_spec(&spec);
        prop_assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn canonical_form_is_idempotent(spec in spec_strategy(6)) {
        let once = spec.canonical();
        prop_assert!(once.is_canonical());
        prop_assert_eq!(once.canonical(), once);
    }

    #[test]
    fn canonical_form_keeps_the_operator(spec in spec_strategy(5)) {
        let diff = realize_dense(&spec).unwrap() - realize_dense(&spec.canonical()).unwrap();
        prop_assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn matrix_free_action_matches_dense(
        spec in spec_strategy(8),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let dense = realize_dense(&spec).unwrap();
        for _ in 0..4 {
            let psi = random_state(spec.n_sites(), &mut r);
            let free = to_vector(&apply_spec(&spec, &psi).unwrap());
            let full = &dense * to_vector(psi.amplitudes());
            prop_assert!((free - full).norm() < 1e-12);
        }
    }

    #[test]
    fn action_is_linear(
        spec in spec_strategy(6),
        seed in any::<u64>(),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let mut r = rng(seed);
        let n = spec.n_sites();
        let psi = random_state(n, &mut r);
        let phi = random_state(n, &mut r);
        let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
        let mix: Vec<C64> = psi.amplitudes().iter().zip(phi.amplitudes())
            .map(|(x, y)| a * x + b * y).collect();
        let lhs = apply_spec_raw(&spec, &mix).unwrap();
        let hp = apply_spec(&spec, &psi).unwrap();
        let hf = apply_spec(&spec, &phi).unwrap();
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (a * hp[i] + b * hf[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn sparse_matches_dense(spec in spec_strategy(6)) {
        let diff = realize_sparse(&spec).unwrap().to_dense() - realize_dense(&spec).unwrap();
        prop_assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn json_round_trip(spec in spec_strategy(6)) {
        let text = serde_json::to_string(&spec).unwrap();
        let back: HamiltonianSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn commutation_matches_matrices(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let (p, q) = (random_string(n, &mut r), random_string(n, &mut r));
        let (mp, mq) = (kron_string(&p, n), kron_string(&q, n));
        let comm = &mp * &mq - &mq * &mp;
        prop_assert_eq!(p.commutes_with(&q), max_abs(&comm) < 1e-12);
    }
}

fn cfg(s: &str) -> BitConfig {
    s.parse().unwrap()
}

#[test]
fn single_z() {
    let spec = HamiltonianSpec::new(1, vec![PauliTerm::from_letters(1.0, [(1, Pauli::Z)]).unwrap()])
        .unwrap();
    let m = realize_dense(&spec).unwrap();
    assert_eq!(m[(0, 0)], c(1.0, 0.0));
    assert_eq!(m[(1, 1)], c(-1.0, 0.0));
    assert_eq!(m[(0, 1)], c(0.0, 0.0));
}

#[test]
fn two_site_hopping_has_one_off_diagonal_pair() {
    let spec = exchange_chain(&CouplingProfile::uniform(2).unwrap()).unwrap();
    let m = realize_dense(&spec).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = if (i, j) == (1, 2) || (i, j) == (2, 1) { 1.0 } else { 0.0 };
            assert!((m[(i, j)] - c(want, 0.0)).norm() < 1e-15, "({i},{j})");
        }
    }
}

#[test]
fn duplicates_merge() {
    let x1 = PauliTerm::from_letters(1.0, [(1, Pauli::X)]).unwrap();
    let spec = HamiltonianSpec::new(1, vec![x1, x1]).unwrap().canonical();
    assert_eq!(spec.terms().len(), 1);
    assert_eq!(spec.terms()[0].coefficient(), 2.0);
}

#[test]
fn cluster_chain_amplifies_first_branch() {
    let spec = cluster_chain(&CouplingProfile::engineered(3).unwrap()).unwrap();
    let out = apply_spec(&spec, &StateVector::basis(&cfg("100"))).unwrap();
    for (i, a) in out.iter().enumerate() {
        let want = if i == cfg("110").index() { 2f64.sqrt() } else { 0.0 };
        assert!((a - c(want, 0.0)).norm() < 1e-12, "index {i}: {a}");
    }
}

#[test]
fn expectation_examples() {
    let z1 = HamiltonianSpec::new(1, vec![PauliTerm::from_letters(1.0, [(1, Pauli::Z)]).unwrap()])
        .unwrap();
    assert_eq!(expectation(&z1, &StateVector::basis(&cfg("0"))).unwrap(), 1.0);

    let h = cluster_chain(&CouplingProfile::engineered(4).unwrap()).unwrap();
    assert_eq!(expectation(&h, &StateVector::basis(&cfg("0000"))).unwrap(), 0.0);

    let hex = exchange_chain(&CouplingProfile::uniform(2).unwrap()).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = StateVector::from_amplitudes(2, vec![c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)])
        .unwrap();
    assert!((expectation(&hex, &psi).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn y_string_phase_on_basis_states() {
    // Y|0> = i|1>, Y|1> = -i|0>
    let y = PauliString::single(1, Pauli::Y).unwrap();
    assert_eq!(y.apply_to_basis(0), (1, c(0.0, 1.0)));
    assert_eq!(y.apply_to_basis(1), (0, c(0.0, -1.0)));
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let spec = exchange_chain(&CouplingProfile::uniform(3).unwrap()).unwrap();
    let psi = StateVector::basis(&cfg("10"));
    assert!(apply_spec(&spec, &psi).is_err());
    assert!(expectation(&spec, &psi).is_err());
}
