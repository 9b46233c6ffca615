//! Deterministic random instance generation for batch verification.
//!
//! All generators take an explicit RNG; [`seeded_rng`] gives a fixed
//! stream per seed so verification runs are reproducible byte for byte.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::Chain;
use crate::coupling::{Coupling, CouplingKind};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::relations::{EquivalenceRelation, SetFamily};
use crate::space::{numbered_labels, GroundSpace, Partition};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random partition of `0..n` with roughly `target_blocks` blocks.
pub fn random_partition(rng: &mut impl Rng, n: usize, target_blocks: usize) -> Partition {
    let k = target_blocks.clamp(1, n);
    let assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    Partition::from_assignment(&assignment)
}

/// Random space on `n` atoms; half the time the sigma-algebra is full,
/// otherwise a random coarser partition.
pub fn random_space(rng: &mut impl Rng, n: usize) -> Arc<GroundSpace> {
    if rng.gen_bool(0.5) {
        GroundSpace::full(numbered_labels(n))
    } else {
        let blocks = rng.gen_range(1..=n);
        let sigma = random_partition(rng, n, blocks);
        GroundSpace::full(numbered_labels(n)).with_sigma(sigma)
    }
}

/// Random measurable relation: a random partition of the sigma blocks,
/// lifted to atoms.
pub fn random_measurable_relation(
    rng: &mut impl Rng,
    space: &Arc<GroundSpace>,
) -> EquivalenceRelation {
    let k = space.num_blocks();
    let classes = rng.gen_range(1..=k);
    let block_class: Vec<usize> = (0..k).map(|_| rng.gen_range(0..classes)).collect();
    let assignment: Vec<usize> = (0..space.num_atoms())
        .map(|a| block_class[space.sigma().block_of(a)])
        .collect();
    EquivalenceRelation::from_partition(Arc::clone(space), Partition::from_assignment(&assignment))
        .expect("lifted partition covers all atoms")
}

/// Random relation on atoms, measurable or not.
pub fn random_relation(rng: &mut impl Rng, space: &Arc<GroundSpace>) -> EquivalenceRelation {
    let n = space.num_atoms();
    let classes = rng.gen_range(1..=n);
    EquivalenceRelation::from_partition(Arc::clone(space), random_partition(rng, n, classes))
        .expect("random partition covers all atoms")
}

/// Random probability measure whose masses share a denominator of at
/// most `max_denominator`: `max_denominator` unit weights are dropped
/// uniformly over the blocks.
pub fn random_probability(
    rng: &mut impl Rng,
    space: &Arc<GroundSpace>,
    max_denominator: u32,
) -> Measure {
    let k = space.num_blocks();
    let denominator = rng.gen_range(1..=max_denominator) as i64;
    let mut counts = vec![0i64; k];
    for _ in 0..denominator {
        counts[rng.gen_range(0..k)] += 1;
    }
    let mass = counts
        .into_iter()
        .map(|c| Rational::of(c, denominator))
        .collect();
    Measure::probability(Arc::clone(space), mass).expect("counts sum to the denominator")
}

/// A random verification instance: space, measurable relation, and two
/// probability measures.
pub struct RandomInstance {
    pub space: Arc<GroundSpace>,
    pub relation: EquivalenceRelation,
    pub p: Measure,
    pub p_prime: Measure,
}

pub fn random_instance(
    rng: &mut impl Rng,
    max_atoms: usize,
    max_denominator: u32,
) -> RandomInstance {
    let n = rng.gen_range(2..=max_atoms.max(2));
    let space = random_space(rng, n);
    let relation = random_measurable_relation(rng, &space);
    let p = random_probability(rng, &space, max_denominator);
    let p_prime = random_probability(rng, &space, max_denominator);
    RandomInstance {
        space,
        relation,
        p,
        p_prime,
    }
}

/// Random sub-coupling of `(p, p_prime)`: the product coupling with each
/// entry damped by an independent random fraction.
pub fn random_subcoupling(rng: &mut impl Rng, p: &Measure, p_prime: &Measure) -> Coupling {
    let k = p.space().num_blocks();
    let mut entries = std::collections::BTreeMap::new();
    for i in 0..k {
        if p.block_mass(i).is_zero() {
            continue;
        }
        for j in 0..k {
            if p_prime.block_mass(j).is_zero() {
                continue;
            }
            let damp = Rational::of(rng.gen_range(0..=8), 8);
            let mass = &(p.block_mass(i) * p_prime.block_mass(j)) * &damp;
            if !mass.is_zero() {
                entries.insert((i, j), mass);
            }
        }
    }
    Coupling::new(Arc::clone(p.space()), entries, CouplingKind::SubCoupling)
        .expect("damped product entries are nonnegative")
}

/// Random increasing chain of measurable relations, built by repeatedly
/// merging classes of a random starting relation.
pub fn random_chain(rng: &mut impl Rng, space: &Arc<GroundSpace>, max_length: usize) -> Chain {
    let mut current = random_measurable_relation(rng, space);
    let length = rng.gen_range(1..=max_length.max(1));
    let mut relations = vec![current.clone()];
    for _ in 1..length {
        let classes = current.classes();
        let k = classes.num_blocks();
        let merged: Vec<usize> = if k == 1 {
            vec![0; 1]
        } else {
            // merge a random pair of classes (possibly more, by collapsing labels)
            let groups = rng.gen_range(1..=k);
            (0..k).map(|_| rng.gen_range(0..groups)).collect()
        };
        let assignment: Vec<usize> = (0..space.num_atoms())
            .map(|a| merged[classes.block_of(a)])
            .collect();
        current = EquivalenceRelation::from_partition(
            Arc::clone(space),
            Partition::from_assignment(&assignment),
        )
        .expect("merged partition covers all atoms");
        relations.push(current.clone());
    }
    Chain::new(relations).expect("merging classes keeps the chain increasing")
}

/// Random family of measurable sets (unions of sigma blocks).
pub fn random_measurable_family(
    rng: &mut impl Rng,
    space: &Arc<GroundSpace>,
    max_sets: usize,
) -> SetFamily {
    let count = rng.gen_range(0..=max_sets);
    let sets = (0..count)
        .map(|_| {
            let mut set = std::collections::BTreeSet::new();
            for block in space.sigma().blocks() {
                if rng.gen_bool(0.5) {
                    set.extend(block.iter().copied());
                }
            }
            set
        })
        .collect();
    SetFamily::new(Arc::clone(space), sets).expect("blocks index valid atoms")
}

/// Random family of arbitrary atom sets.
pub fn random_family(rng: &mut impl Rng, space: &Arc<GroundSpace>, max_sets: usize) -> SetFamily {
    let count = rng.gen_range(0..=max_sets);
    let n = space.num_atoms();
    let sets = (0..count)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).collect())
        .collect();
    SetFamily::new(Arc::clone(space), sets).expect("atom indices in range")
}
