use nalgebra::DMatrix;
use nicolai_core::charges::{adjoint_identity_check, enumerate_hat_xi, ConservedSequence};
use nicolai_core::dynamics::{dephase, diagonalize, evolve, hermitian_charge, mazur_gap, ThermalState};
use nicolai_core::groundstates::{enumerate_ground_configs, is_ground_config, Configuration};
use nicolai_core::transfer::{count_hat_xi, count_ring};
use nicolai_core::{Lattice, Model, ModelSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn ring2() -> &'static (Model, nicolai_core::dynamics::Spectrum) {
    static CELL: OnceLock<(Model, nicolai_core::dynamics::Spectrum)> = OnceLock::new();
    CELL.get_or_init(|| {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let s = diagonalize(&model.h).unwrap();
        (model, s)
    })
}

fn sequence(k: i64, values: &[bool]) -> ConservedSequence {
    let v: Vec<i64> = values.iter().map(|&b| if b { 1 } else { -1 }).collect();
    ConservedSequence::from_values(2 * k, &v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn negation_preserves_membership(k in -3i64..3, d in 1i64..5, bits in prop::collection::vec(any::<bool>(), 9)) {
        let f = sequence(k, &bits[..(2 * d + 1) as usize]);
        let member = f.is_permitted() && f.has_edge_conditions();
        let g = f.negated();
        prop_assert_eq!(member, g.is_permitted() && g.has_edge_conditions());
        prop_assert_eq!(g.negated(), f);
    }

    #[test]
    fn ground_configs_are_permitted_sequences(m in 2i64..6, raw in any::<u64>()) {
        let lattice = Lattice::ring(m).unwrap();
        let bits: Vec<bool> = (0..lattice.len()).map(|i| raw >> i & 1 == 1).collect();
        let g = Configuration::from_bits(&lattice, &bits).unwrap();
        let f = g.to_sequence().unwrap();
        prop_assert_eq!(is_ground_config(&g), f.is_permitted());
        prop_assert_eq!(Configuration::from_sequence(&lattice, &f).unwrap(), g.clone());
        prop_assert_eq!(is_ground_config(&g), is_ground_config(&g.flipped()));
    }

    #[test]
    fn transfer_counts_match_enumeration(k in -4i64..4, d in 1i64..6) {
        prop_assert_eq!(count_hat_xi(k, k + d).unwrap(), enumerate_hat_xi(k, k + d).unwrap().len() as u128);
    }

    #[test]
    fn adjoint_sign_holds_for_random_members(k in -2i64..2, d in 1i64..4, pick in any::<prop::sample::Index>()) {
        let table = enumerate_hat_xi(k, k + d).unwrap();
        let f = pick.get(&table);
        prop_assert!(adjoint_identity_check(f).unwrap());
        prop_assert!(adjoint_identity_check(&f.negated()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mazur_gap_is_nonnegative(entries in prop::collection::vec(-1.0f64..1.0, 64 * 64), beta in 0.1f64..3.0) {
        let (_, s) = ring2();
        let raw = DMatrix::from_vec(64, 64, entries);
        let a = &raw + raw.transpose();
        prop_assert!(mazur_gap(&a, &ThermalState::trace(64), s).unwrap() >= -1e-10);
        prop_assert!(mazur_gap(&a, &ThermalState::gibbs(s, beta), s).unwrap() >= -1e-10);
    }

    #[test]
    fn dephasing_is_idempotent(entries in prop::collection::vec(-1.0f64..1.0, 64 * 64)) {
        let (model, s) = ring2();
        let a = DMatrix::from_vec(64, 64, entries);
        let d = dephase(&a, s).unwrap();
        prop_assert!((dephase(&d, s).unwrap() - &d).amax() < 1e-10);
        prop_assert!((d.trace() - a.trace()).abs() < 1e-10);
        let h = model.h.to_dense();
        prop_assert!((&h * &d - &d * &h).amax() < 1e-8);
    }
}

#[test]
fn ring_counts_match_exhaustive() {
    for m in 2..=6 {
        let lattice = Lattice::ring(m).unwrap();
        assert_eq!(count_ring(lattice.len()).unwrap(), enumerate_ground_configs(&lattice).unwrap().len() as u128);
    }
}

#[test]
fn charges_are_frozen_in_time() {
    let (model, s) = ring2();
    for f in nicolai_core::charges::embeddable_hat_sequences(model.lattice()).unwrap() {
        let a = hermitian_charge(model, &f).unwrap();
        for t in [0.0, 0.37, 1.0, 12.5, 200.0] {
            let at = evolve(&a, s, t).unwrap();
            let err = at.iter().zip(a.iter()).fold(0.0f64, |m, (z, x)| m.max((z.re - x).abs().max(z.im.abs())));
            assert!(err < 1e-9, "{f} at t={t}: {err:e}");
        }
    }
}

#[test]
fn evolution_preserves_the_spectral_norm() {
    let (model, s) = ring2();
    let a = model.h_hop().unwrap().to_dense() + model.q.to_dense();
    let a = &a + a.transpose();
    let norm = a.clone().symmetric_eigenvalues().amax();
    let at = evolve(&a, s, 3.3).unwrap();
    let sv = at.singular_values();
    assert!((sv.max() - norm).abs() < 1e-9);
    let zero = evolve(&a, s, 0.0).unwrap();
    assert!(zero.iter().zip(a.iter()).all(|(z, x)| (z.re - x).abs() < 1e-12 && z.im.abs() < 1e-12));
}

#[test]
fn gibbs_states_are_invariant() {
    let (model, s) = ring2();
    let h = model.h.to_dense();
    for beta in [0.5, 1.0, 2.0] {
        let rho = ThermalState::gibbs(s, beta).density;
        assert!((&h * &rho - &rho * &h).amax() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quadratic_form_matches_supercharge_norms() {
    let (model, _) = ring2();
    let (h, q, qa) = (model.h.to_f64(), model.q.to_f64(), model.q_adj.to_f64());
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let v: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (qv, qav) = (q.apply(&v), qa.apply(&v));
        assert!((dot(&v, &h.apply(&v)) - dot(&qv, &qv) - dot(&qav, &qav)).abs() < 1e-10);
    }
}
