//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Every numeric claim is exact unless a tolerance is stated in the
//! assertion itself.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use eqcoupling::applications::{
    asymmetry_instance, bitflip_coupling, eventual_equality_chain, hellinger_with,
    multiset_relation, orbit_relation, poisson_tail_instance, tilt_measure, FiniteAction,
    PoissonTailSpec, SequenceSpace,
};
use eqcoupling::chain::{mass_ledger, solve_chain};
use eqcoupling::coupling::complete_subcoupling;
use eqcoupling::measure::Measure;
use eqcoupling::rational::Rational;
use eqcoupling::relations::EquivalenceRelation;
use eqcoupling::sampling::{
    random_chain, random_instance, random_measurable_family, random_probability, random_relation,
    random_space, random_subcoupling, seeded_rng,
};
use eqcoupling::solver::{
    optimal_value, solve_quotient, verify_strong_duality, CouplingStrategy, Verdict,
};
use eqcoupling::space::{numbered_labels, GroundSpace, Partition};

use common::{all_partitions, brute_force_tv};

fn r(n: i64, d: i64) -> Rational {
    Rational::of(n, d)
}

fn report(number: u32, name: &str, failures: &[String]) {
    let status = if failures.is_empty() { "pass" } else { "FAIL" };
    println!("criterion {number:2} ({name}): {status}");
    assert!(
        failures.is_empty(),
        "criterion {number} ({name}) failed:\n{}",
        failures.join("\n")
    );
}

#[test]
fn criterion_01_strong_duality_exactness_on_random_instances() {
    let mut rng = seeded_rng(1);
    let mut failures = Vec::new();
    for case in 0..500 {
        let inst = random_instance(&mut rng, 40, 64);
        match verify_strong_duality(&inst.p, &inst.p_prime, &inst.relation) {
            Ok(report) => {
                if report.verdict != Verdict::Pass {
                    failures.push(format!(
                        "case {case}: primal {}, dual {}, oracle {}",
                        report.primal_value, report.dual_value, report.oracle_value
                    ));
                }
            }
            Err(e) => failures.push(format!("case {case}: error {e}")),
        }
    }
    report(
        1,
        "strong duality exactness, 500 random instances",
        &failures,
    );
}

#[test]
fn criterion_02_exhaustive_small_space_check() {
    let mut rng = seeded_rng(2);
    let mut failures = Vec::new();
    for n in 1..=5usize {
        let space = GroundSpace::full(numbered_labels(n));
        for assignment in all_partitions(n) {
            let relation = EquivalenceRelation::from_partition(
                Arc::clone(&space),
                Partition::from_assignment(&assignment),
            )
            .unwrap();
            for _ in 0..20 {
                let p = random_probability(&mut rng, &space, 64);
                let q = random_probability(&mut rng, &space, 64);
                let verdict = verify_strong_duality(&p, &q, &relation).unwrap();
                if verdict.verdict != Verdict::Pass {
                    failures.push(format!(
                        "n={n} classes={:?}: three-way disagreement",
                        relation.classes().blocks()
                    ));
                }
                // full-space total variation against the exhaustive oracle
                let (tv, _) = p.total_variation(&q).unwrap();
                if tv != brute_force_tv(&p, &q) {
                    failures.push(format!("n={n}: tv mismatch vs subset enumeration"));
                }
                // dual value against the exhaustive oracle over the dual
                // sigma-algebra
                let dual_space = relation.dual_sigma();
                let pc = p.coarsen_to(&dual_space).unwrap();
                let qc = q.coarsen_to(&dual_space).unwrap();
                if verdict.dual_value != brute_force_tv(&pc, &qc) {
                    failures.push(format!("n={n}: dual value mismatch vs enumeration"));
                }
            }
        }
    }
    report(
        2,
        "exhaustive check on all relations over <=5 atoms",
        &failures,
    );
}

#[test]
fn criterion_03_subcoupling_completion() {
    let mut rng = seeded_rng(3);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let inst = random_instance(&mut rng, 20, 64);
        let sub = random_subcoupling(&mut rng, &inst.p, &inst.p_prime);
        match complete_subcoupling(&sub, &inst.p, &inst.p_prime) {
            Ok(full) => {
                if !sub.dominated_by(&full) {
                    failures.push(format!("case {case}: output does not dominate input"));
                }
                if !full.is_coupling_of(&inst.p, &inst.p_prime) {
                    failures.push(format!("case {case}: marginals are not exact"));
                }
                if full.total() != Rational::one() {
                    failures.push(format!("case {case}: total mass {}", full.total()));
                }
            }
            Err(e) => failures.push(format!("case {case}: error {e}")),
        }
    }
    report(3, "completion of 1000 random sub-couplings", &failures);
}

#[test]
fn criterion_04_chain_solver_matches_direct_solve() {
    let mut rng = seeded_rng(4);
    let mut failures = Vec::new();
    for case in 0..200 {
        let space = random_space(&mut rng, 16);
        let chain = random_chain(&mut rng, &space, 5);
        let p = random_probability(&mut rng, &space, 64);
        let q = random_probability(&mut rng, &space, 64);
        match solve_chain(&p, &q, &chain, CouplingStrategy::Product) {
            Ok((solution, trace)) => {
                let direct = optimal_value(&p, &q, chain.last()).unwrap();
                if solution.value != direct {
                    failures.push(format!(
                        "case {case}: chain {} vs direct {direct}",
                        solution.value
                    ));
                }
                if !mass_ledger(&trace) {
                    failures.push(format!("case {case}: residual ledger violated"));
                }
            }
            Err(e) => failures.push(format!("case {case}: error {e}")),
        }
    }
    report(
        4,
        "200 random increasing chains vs direct solves",
        &failures,
    );
}

#[test]
fn criterion_05_galois_laws() {
    let mut rng = seeded_rng(5);
    let mut failures = Vec::new();
    // adjunction on 500 random (relation, family) pairs
    for case in 0..500 {
        let space = random_space(&mut rng, 10);
        let e = random_relation(&mut rng, &space);
        let g = random_measurable_family(&mut rng, &space, 4);
        let left = e.is_subrelation_of(&g.dual_relation());
        let right = g.measurable_for(&e.dual_sigma());
        if left != right {
            failures.push(format!("case {case}: adjunction equivalence broken"));
        }
    }
    // double dual fixes every relation on fully measurable spaces
    for case in 0..500 {
        let n = rng.gen_range(2..=10usize);
        let space = GroundSpace::full(numbered_labels(n));
        let e = random_relation(&mut rng, &space);
        if e.double_dual() != e {
            failures.push(format!("case {case}: double dual moved a relation"));
        }
    }
    // antitonicity on nested pairs
    for case in 0..500 {
        let space = random_space(&mut rng, 10);
        let finer = random_relation(&mut rng, &space);
        let k = finer.classes().num_blocks();
        let groups = rng.gen_range(1..=k);
        let merged: Vec<usize> = (0..k).map(|_| rng.gen_range(0..groups)).collect();
        let assignment: Vec<usize> = (0..space.num_atoms())
            .map(|a| merged[finer.class_of(a)])
            .collect();
        let coarser = EquivalenceRelation::from_partition(
            Arc::clone(&space),
            Partition::from_assignment(&assignment),
        )
        .unwrap();
        if !finer
            .dual_sigma()
            .sigma()
            .refines(coarser.dual_sigma().sigma())
        {
            failures.push(format!("case {case}: dual sigma not antitone"));
        }
    }
    report(5, "Galois adjunction, double dual, antitonicity", &failures);
}

#[test]
fn criterion_06_bitflip_coupling_success_mass() {
    let mut failures = Vec::new();
    for horizon in 2..=10usize {
        let seq = SequenceSpace::new(2, horizon).unwrap();
        let coupling = bitflip_coupling(&seq).unwrap();
        let uniform = Measure::uniform(seq.space());
        if !coupling.is_coupling_of(&uniform, &uniform) {
            failures.push(format!("horizon {horizon}: marginals are not uniform"));
        }
        let union_relation = eventual_equality_chain(&seq).last().clone();
        let mass = coupling.mass_on(&union_relation).unwrap();
        if mass != r(1, 2) {
            failures.push(format!("horizon {horizon}: success mass {mass}"));
        }
    }
    report(6, "bit-flip coupling has success mass 1/2", &failures);
}

#[test]
fn criterion_07_asymmetry_gap_at_every_even_resolution() {
    let mut failures = Vec::new();
    for n in (2..=1000usize).step_by(2) {
        let (space, p, q) = asymmetry_instance(n).unwrap();
        let delta = EquivalenceRelation::identity(&space);
        let value = optimal_value(&p, &q, &delta).unwrap();

        // independent closed-form oracle: cellwise integral of the smaller
        // density; on [i/n,(i+1)/n] that is (2i+1)/n^2 left of 1/2 and
        // (2(n-i)-1)/n^2 right of it
        let n_i64 = n as i64;
        let mut overlap = Rational::zero();
        for i in 0..n_i64 {
            let cell = if 2 * i + 1 < n_i64 {
                r(2 * i + 1, n_i64 * n_i64)
            } else {
                r(2 * (n_i64 - i) - 1, n_i64 * n_i64)
            };
            overlap += cell;
        }
        let expected = Rational::one() - overlap;
        if value != expected {
            failures.push(format!("n={n}: value {value} vs oracle {expected}"));
        }
        if value != r(1, 2) {
            failures.push(format!("n={n}: value {value} is not 1/2"));
        }

        let trivial = GroundSpace::trivial(space.atom_labels().to_vec());
        let (tv, _) = p
            .coarsen_to(&trivial)
            .unwrap()
            .total_variation(&q.coarsen_to(&trivial).unwrap())
            .unwrap();
        if !tv.is_zero() {
            failures.push(format!("n={n}: trivial-sigma tv {tv}"));
        }
    }
    // spot-check the full three-way verification on small instances
    for n in [2usize, 10, 100] {
        let (space, p, q) = asymmetry_instance(n).unwrap();
        let delta = EquivalenceRelation::identity(&space);
        let report = verify_strong_duality(&p, &q, &delta).unwrap();
        if report.verdict != Verdict::Pass || report.primal_value != r(1, 2) {
            failures.push(format!("n={n}: verification failed"));
        }
    }
    report(
        7,
        "asymmetry instance: value 1/2, reversed dual 0",
        &failures,
    );
}

#[test]
fn criterion_08_orbit_demo() {
    let mut failures = Vec::new();
    let seq = SequenceSpace::new(2, 3).unwrap();
    let action = FiniteAction::new(Arc::clone(seq.space()), vec![seq.cyclic_shift()]).unwrap();
    let (orbits, invariant) = orbit_relation(&action);

    let uniform = Measure::uniform(seq.space());
    let delta = Measure::point_mass(seq.space(), 0).unwrap();
    let solution = solve_quotient(&uniform, &delta, &orbits, CouplingStrategy::Product).unwrap();
    if solution.value != r(7, 8) {
        failures.push(format!("orbit value {}", solution.value));
    }
    let verdict = verify_strong_duality(&uniform, &delta, &orbits).unwrap();
    if verdict.verdict != Verdict::Pass {
        failures.push("three-way verification failed".to_string());
    }

    // independent computation of the invariant sigma-algebra: an atom's
    // invariant atom is the intersection of all shift-invariant sets
    // containing it
    let shift = &action.generators()[0];
    let n = seq.num_sequences();
    let mut invariant_sets: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 0u32..(1 << n) {
        let set: BTreeSet<usize> = (0..n).filter(|&a| mask & (1 << a) != 0).collect();
        let image: BTreeSet<usize> = set.iter().map(|&a| shift[a]).collect();
        if image == set {
            invariant_sets.push(set);
        }
    }
    let assignment: Vec<usize> = (0..n)
        .map(|a| {
            let mut cell: BTreeSet<usize> = (0..n).collect();
            for set in &invariant_sets {
                if set.contains(&a) {
                    cell = cell.intersection(set).copied().collect();
                }
            }
            *cell.iter().next().unwrap()
        })
        .collect();
    let expected_atoms = Partition::from_assignment(&assignment);
    if invariant.sigma() != &expected_atoms {
        failures.push("invariant sigma-algebra differs from enumeration".to_string());
    }
    report(8, "cyclic-shift orbit demo: value 7/8", &failures);
}

#[test]
fn criterion_09_reassortment_demo() {
    let mut failures = Vec::new();
    let indicator = |seq: &SequenceSpace| -> Vec<Rational> {
        (0..seq.num_sequences())
            .map(|i| {
                if seq.symbols(i)[0] == 1 {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };

    let value_at = |t: usize| -> Rational {
        let seq = SequenceSpace::new(2, t).unwrap();
        let base = Measure::uniform(seq.space());
        let tilted = tilt_measure(&base, &indicator(&seq)).unwrap();
        let relation = multiset_relation(&seq);
        let value = optimal_value(&base, &tilted, &relation).unwrap();
        // cross-check through the dual route
        let dual_space = relation.dual_sigma();
        let (tv, _) = base
            .coarsen_to(&dual_space)
            .unwrap()
            .total_variation(&tilted.coarsen_to(&dual_space).unwrap())
            .unwrap();
        assert_eq!(value, tv, "primal/dual disagreement at horizon {t}");
        value
    };

    let at3 = value_at(3);
    if at3 != r(1, 4) {
        failures.push(format!("horizon 3 value {at3}"));
    }
    // full solve with coupling at the small horizon
    {
        let seq = SequenceSpace::new(2, 3).unwrap();
        let base = Measure::uniform(seq.space());
        let tilted = tilt_measure(&base, &indicator(&seq)).unwrap();
        let relation = multiset_relation(&seq);
        let verdict = verify_strong_duality(&base, &tilted, &relation).unwrap();
        if verdict.verdict != Verdict::Pass {
            failures.push("horizon 3 verification failed".to_string());
        }
    }
    let at11 = value_at(11);
    if at11 != r(63, 512) {
        failures.push(format!("horizon 11 value {at11}, expected 63/512"));
    }
    if at11 >= at3 {
        failures.push(format!("no decay: horizon 11 {at11} vs horizon 3 {at3}"));
    }
    report(
        9,
        "reassortment demo: 1/4 at horizon 3, decaying",
        &failures,
    );
}

#[test]
fn criterion_10_poisson_and_hellinger() {
    let mut failures = Vec::new();

    // equal intensities outside the window couple perfectly
    let equal_outside = PoissonTailSpec {
        intensities: vec![(3.0, 0.5), (1.0, 1.0)],
        inside_window: vec![0],
        truncation: 20,
    };
    let inst = poisson_tail_instance(&equal_outside).unwrap();
    let value = optimal_value(&inst.p, &inst.p_prime, &inst.relation).unwrap();
    if !value.is_zero() {
        failures.push(format!("equal-outside value {value} is not exactly 0"));
    }

    // one site outside the window: exact solve vs direct summation
    let one_site = PoissonTailSpec {
        intensities: vec![(1.0, 2.0)],
        inside_window: vec![],
        truncation: 30,
    };
    let inst = poisson_tail_instance(&one_site).unwrap();
    let value = optimal_value(&inst.p, &inst.p_prime, &inst.relation)
        .unwrap()
        .to_f64();
    // independent oracle: direct summation of min(exp(-1)/k!, exp(-2) 2^k/k!)
    let mut overlap = 0.0f64;
    let mut w1 = (-1.0f64).exp();
    let mut w2 = (-2.0f64).exp();
    for k in 0..=30u32 {
        overlap += w1.min(w2);
        w1 *= 1.0 / (k as f64 + 1.0);
        w2 *= 2.0 / (k as f64 + 1.0);
    }
    let oracle = 1.0 - overlap;
    if (value - oracle).abs() > 1e-9 {
        failures.push(format!("one-site value {value} vs oracle {oracle}"));
    }
    // frozen from an independent high-precision summation
    if (oracle - 0.329_753_032_633_046_57).abs() > 1e-12 {
        failures.push(format!("oracle drifted: {oracle}"));
    }

    // Hellinger invariance under the dominating choice
    let mu = [0.8, 0.0, 1.3, 0.4, 2.2];
    let nu = [0.1, 0.9, 1.3, 0.0, 0.6];
    let lambda: Vec<f64> = mu.iter().zip(&nu).map(|(a, b)| a + b).collect();
    let doubled: Vec<f64> = lambda.iter().map(|l| 2.0 * l).collect();
    let d1 = hellinger_with(&mu, &nu, &lambda);
    let d2 = hellinger_with(&mu, &nu, &doubled);
    if (d1 - d2).abs() / d1.abs().max(d2.abs()) > 1e-12 {
        failures.push(format!(
            "hellinger depends on the dominating choice: {d1} vs {d2}"
        ));
    }

    report(10, "Poisson tails and Hellinger invariance", &failures);
}
