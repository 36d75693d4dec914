//! Verification suites shared by the subcommands.

use nicolai_core::charges::{
    conservation_check, edge_violating_sequences, embeddable_hat_sequences, enumerate_ring_sequences, even_rectangles,
    ConservationReport, ConservedSequence, Sign,
};
use nicolai_core::dynamics::{diagonalize, ergodicity_report, lanczos_min_eigenvalue, ErgodicityReport, MAX_DENSE_DIM};
use nicolai_core::groundstates::{
    enumerate_ground_configs, ground_set_equivalence, kernel_census, verify_susy_ground,
};
use nicolai_core::model::{build_h_classical, build_h_hop, build_hamiltonian_explicit, number_operator, particle_hole, translate2};
use nicolai_core::sparse::{anticommutator, commutator};
use nicolai_core::{Model, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::formats::num;
use crate::{AppError, Check};

/// Largest Fock dimension for the per-sequence conservation sweep.
pub const MAX_SWEEP_DIM: usize = 1 << 14;
/// Largest Fock dimension for the Mazur report.
pub const MAX_ERGODICITY_DIM: usize = 1024;
/// Largest Fock dimension for the full-ring sequences in the Mazur report.
pub const MAX_RING_GENERATOR_DIM: usize = 256;

fn exact(name: &str, passed: bool) -> Check {
    Check::new(name, passed, json!({}))
}

/// Parity of a full-basis index is the parity of its popcount.
fn odd(i: usize) -> bool {
    i.count_ones() % 2 == 1
}

/// Algebraic identities of the supercharge and Hamiltonian.
pub fn model_checks(model: &Model, seed: u64) -> Result<Vec<Check>, AppError> {
    let mut out = Vec::new();
    let (q, qa, h) = (&model.q, &model.q_adj, &model.h);
    out.push(exact("q_squared_zero", q.mul(q)?.is_zero()));
    out.push(exact("q_adjoint_squared_zero", qa.mul(qa)?.is_zero()));
    out.push(exact("h_symmetric", h.is_symmetric()));
    out.push(exact("h_commutes_with_q", commutator(h, q)?.is_zero()));
    out.push(exact("q_is_odd", q.entries().all(|(r, c, _)| odd(r) != odd(c))));
    let n = number_operator(&model.basis);
    out.push(exact("h_commutes_with_number", commutator(h, &n)?.is_zero()));

    let lattice = model.lattice();
    let ph_q = model.realize(&particle_hole(&model.supercharge))?;
    // reversing a product of n distinct-site factors costs (-1)^(n(n-1)/2):
    // -Q* for the three-site charge, +Q* for the five-site cross
    let ph_sign = match model.spec.variant() {
        Variant::Nicolai1d => -1,
        Variant::Nicolai2d => 1,
    };
    out.push(exact("particle_hole_q_is_signed_q_adjoint", ph_q == qa.scale(ph_sign)));
    out.push(exact("particle_hole_h", anticommutator(&ph_q, &ph_q.adjoint())? == *h));
    if lattice.is_periodic() {
        let tq = model.realize(&translate2(&model.supercharge, lattice)?)?;
        out.push(exact("translate2_q", tq == *q));
        out.push(exact("translate2_h", anticommutator(&tq, &tq.adjoint())? == *h));
    }
    if model.spec.variant() == Variant::Nicolai1d {
        let explicit = build_hamiltonian_explicit(&model.spec)?;
        let he = model.realize(&explicit)?;
        let split = model.realize(&build_h_classical(&model.spec)?)?.add(&model.realize(&build_h_hop(&model.spec)?)?)?;
        out.push(exact("h_equals_explicit", he == *h));
        out.push(exact("explicit_equals_classical_plus_hop", he == split));
        out.push(exact("particle_hole_explicit", model.realize(&particle_hole(&explicit))? == he));
    }

    // <v|H|v> = |Q*v|^2 + |Qv|^2 for seeded random vectors
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hf, qf, qaf) = (h.to_f64(), q.to_f64(), qa.to_f64());
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let v: Vec<f64> = (0..model.basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let lhs = dot(&v, &hf.apply(&v));
        let (a, b) = (qaf.apply(&v), qf.apply(&v));
        let rhs = dot(&a, &a) + dot(&b, &b);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    out.push(Check::new("quadratic_form_identity", worst <= 1e-10, json!({"max_relative_error": num(worst)})));

    if model.basis.len() <= MAX_DENSE_DIM {
        let s = diagonalize(h)?;
        let min = s.min_eigenvalue();
        out.push(Check::new(
            "h_positive_semidefinite",
            min >= -1e-10,
            json!({"method": "dense", "min_eigenvalue": num(min)}),
        ));
    } else {
        let start: Vec<f64> = (0..model.basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ritz = lanczos_min_eigenvalue(&hf, &start, 60)?;
        // H = QQ* + Q*Q holds exactly in integer arithmetic, which certifies H >= 0.
        let gram = anticommutator(q, qa)? == *h;
        out.push(Check::new(
            "h_positive_semidefinite",
            gram && ritz >= -1e-10,
            json!({"method": "gram identity + lanczos", "gram_identity": gram, "lanczos_min_ritz": num(ritz)}),
        ));
    }
    Ok(out)
}

/// Sequences whose operators must commute with the Hamiltonian on this model.
pub fn conserved_candidates(model: &Model) -> Result<Vec<ConservedSequence>, AppError> {
    let lattice = model.lattice();
    Ok(match model.spec.variant() {
        Variant::Nicolai1d => {
            let mut v = embeddable_hat_sequences(lattice)?;
            if lattice.is_periodic() {
                v.extend(enumerate_ring_sequences(lattice)?);
            }
            v
        }
        Variant::Nicolai2d => even_rectangles(lattice)?
            .into_iter()
            .flat_map(|r| [Sign::Minus, Sign::Plus].map(|s| ConservedSequence::constant(r, s)))
            .collect(),
    })
}

pub fn conservation_sweep(
    model: &Model,
    seqs: &[ConservedSequence],
) -> Result<Vec<ConservationReport>, AppError> {
    crate::thread_pool().install(|| {
        seqs.par_iter()
            .map(|f| conservation_check(model, f).map_err(AppError::from))
            .collect()
    })
}

fn conservation_summary(name: &str, seqs: &[ConservedSequence], reports: &[ConservationReport]) -> Check {
    let failures: Vec<String> = seqs
        .iter()
        .zip(reports)
        .filter(|(_, r)| !(r.is_conserved() && r.square == 0 && r.local_products_vanish))
        .map(|(f, _)| f.to_string())
        .take(10)
        .collect();
    Check::new(
        name,
        failures.is_empty(),
        json!({"sequences": seqs.len(), "first_failures": failures}),
    )
}

/// Edge-violating interval sequences sampled with `seed`: how many have a
/// nonzero commutator with `H`, out of how many drawn.
pub fn edge_violation_sample(model: &Model, seed: u64, samples: usize) -> Result<(usize, usize), AppError> {
    let lattice = model.lattice();
    let (lo, hi) = lattice.interval().ok_or(AppError::Config("edge sampling needs a 1D lattice".into()))?;
    let max_len = if lattice.is_periodic() { lattice.len() as i64 - 1 } else { hi - lo + 1 };
    let mut pool = Vec::new();
    // on an open chain only arcs with a neighbour on both sides can feel a
    // broken edge pair
    let (first, last) = if lattice.is_periodic() { (lo + lo.rem_euclid(2), hi) } else { (lo + 2, hi - 2) };
    for start in (first..=last).step_by(2) {
        let mut d = 1;
        while 2 * d < max_len && (lattice.is_periodic() || start + 2 * d <= last) {
            pool.extend(edge_violating_sequences(start / 2, start / 2 + d)?);
            d += 1;
        }
    }
    if pool.is_empty() {
        return Ok((0, 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<ConservedSequence> = (0..samples).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
    let reports = conservation_sweep(model, &picks)?;
    Ok((reports.iter().filter(|r| r.commutator != 0).count(), picks.len()))
}

pub fn charge_checks(model: &Model, seed: u64) -> Result<Vec<Check>, AppError> {
    let mut out = Vec::new();
    if model.basis.len() > MAX_SWEEP_DIM && model.spec.variant() == Variant::Nicolai1d {
        return Err(AppError::Config(format!(
            "Fock dimension {} exceeds {MAX_SWEEP_DIM} for the charge sweep",
            model.basis.len()
        )));
    }
    let seqs = conserved_candidates(model)?;
    let reports = conservation_sweep(model, &seqs)?;
    out.push(conservation_summary("sequences_conserved", &seqs, &reports));
    if model.spec.variant() == Variant::Nicolai1d {
        let (nonzero, total) = edge_violation_sample(model, seed, 200)?;
        let frac = if total == 0 { 1.0 } else { nonzero as f64 / total as f64 };
        out.push(Check::new(
            "edge_violations_not_conserved",
            frac >= 0.95,
            json!({"nonzero": nonzero, "sampled": total, "fraction": num(frac)}),
        ));
    }
    Ok(out)
}

pub fn ground_checks(model: &Model) -> Result<Vec<Check>, AppError> {
    let mut out = Vec::new();
    let grounds = enumerate_ground_configs(model.lattice())?;
    let mut bad = Vec::new();
    for g in &grounds {
        let r = verify_susy_ground(model, g)?;
        if !(r.consistent() && r.is_ground && r.h_annihilates) {
            bad.push(g.bitstring());
        }
    }
    out.push(Check::new(
        "ground_configs_annihilated",
        bad.is_empty(),
        json!({"configs": grounds.len(), "failures": bad}),
    ));
    let eq = ground_set_equivalence(model)?;
    out.push(Check::new(
        "ground_set_equivalence",
        eq.coincide,
        json!({"forbidden_free": eq.forbidden_free, "zero_diagonal": eq.zero_diagonal, "annihilated": eq.annihilated}),
    ));
    if model.spec.variant() == Variant::Nicolai1d {
        let hop = model.h_hop()?;
        let worst = grounds
            .iter()
            .filter_map(|g| model.basis.index_of(g.state()))
            .flat_map(|c| hop.column(c))
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or(0);
        out.push(Check::new("no_resonance", worst == 0, json!({"max_residual": worst})));
    }
    if model.basis.len() <= MAX_DENSE_DIM {
        let c = kernel_census(model)?;
        out.push(Check::new(
            "kernel_census",
            c.dim_ker_h_classical == c.classical_count
                && c.dim_ker_h >= c.classical_count
                && c.min_eigenvalue.abs() <= 1e-10,
            json!({
                "classical_count": c.classical_count,
                "dim_ker_h": c.dim_ker_h,
                "dim_ker_h_classical": c.dim_ker_h_classical,
                "min_eigenvalue": num(c.min_eigenvalue),
                "min_nonzero_classical": c.min_nonzero_classical,
            }),
        ));
    }
    Ok(out)
}

/// Generators for the Mazur report: interval charges on arcs of at most five
/// sites, plus the full-ring sequences on small rings.
pub fn ergodicity_generators(model: &Model) -> Result<Vec<ConservedSequence>, AppError> {
    let lattice = model.lattice();
    let mut gens: Vec<ConservedSequence> =
        embeddable_hat_sequences(lattice)?.into_iter().filter(|f| f.len() <= 5).collect();
    if lattice.is_periodic() && model.basis.len() <= MAX_RING_GENERATOR_DIM {
        gens.extend(enumerate_ring_sequences(lattice)?);
    }
    Ok(gens)
}

pub fn ergodicity(model: &Model, betas: &[f64]) -> Result<ErgodicityReport, AppError> {
    if model.spec.variant() != Variant::Nicolai1d {
        return Err(AppError::Config("the Mazur report needs a one-dimensional model".into()));
    }
    if model.basis.len() > MAX_ERGODICITY_DIM {
        return Err(AppError::Config(format!(
            "Fock dimension {} exceeds {MAX_ERGODICITY_DIM} for the Mazur report",
            model.basis.len()
        )));
    }
    Ok(ergodicity_report(model, &ergodicity_generators(model)?, betas)?)
}

pub fn ergodicity_check(report: &ErgodicityReport) -> Check {
    let moment_error = report
        .entries
        .iter()
        .map(|e| (e.trace_gap - e.second_moment).abs())
        .fold(0.0f64, f64::max);
    Check::new(
        "mazur_gap_positive",
        report.non_ergodic() && moment_error <= 1e-9,
        json!({
            "generators": report.entries.len(),
            "min_gap": num(report.min_gap()),
            "invariant_rank": report.invariant_rank,
            "trace_gap_vs_second_moment": num(moment_error),
        }),
    )
}

/// Everything that applies to this model at its size.
pub fn full_suite(model: &Model, seed: u64) -> Result<Vec<Check>, AppError> {
    let mut checks = model_checks(model, seed)?;
    checks.extend(charge_checks(model, seed)?);
    if model.lattice().len() <= 16 {
        checks.extend(ground_checks(model)?);
    }
    if model.spec.variant() == Variant::Nicolai1d && model.basis.len() <= MAX_ERGODICITY_DIM {
        checks.push(ergodicity_check(&ergodicity(model, &[0.5, 1.0, 2.0])?));
    }
    Ok(checks)
}
