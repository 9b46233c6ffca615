//! Shared helpers for the integration suites: independent brute-force
//! oracles and small-space enumeration. Nothing here calls into the code
//! paths it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use eqcoupling::measure::Measure;
use eqcoupling::rational::Rational;

/// Exhaustive total-variation oracle: maximizes `|P(A) - P'(A)|` over all
/// `2^k` unions of sigma blocks. Returns the maximum value.
pub fn brute_force_tv(p: &Measure, p_prime: &Measure) -> Rational {
    let k = p.space().num_blocks();
    assert!(k <= 20, "brute force oracle capped at 20 blocks");
    let mut best = Rational::zero();
    for mask in 0u32..(1u32 << k) {
        let mut diff = Rational::zero();
        for b in 0..k {
            if mask & (1 << b) != 0 {
                diff += &(p.block_mass(b) - p_prime.block_mass(b));
            }
        }
        let diff = diff.abs();
        if diff > best {
            best = diff;
        }
    }
    best
}

/// Mass of an explicit atom set, which must be a union of sigma blocks.
pub fn measure_of_set(p: &Measure, set: &BTreeSet<usize>) -> Rational {
    let space = p.space();
    assert!(space.is_measurable_set(set), "set is not measurable");
    let mut mass = Rational::zero();
    for (b, block) in space.sigma().blocks().iter().enumerate() {
        if set.contains(&block[0]) {
            mass += p.block_mass(b);
        }
    }
    mass
}

/// All partitions of `{0, .., n-1}` as assignment vectors, enumerated via
/// restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn recurse(current: &mut Vec<usize>, pos: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        for label in 0..=max_used + 1 {
            current[pos] = label;
            recurse(current, pos + 1, max_used.max(label), out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    current[0] = 0;
    recurse(&mut current, 1, 0, &mut out);
    out
}

#[test]
fn partition_enumeration_matches_bell_numbers() {
    assert_eq!(all_partitions(1).len(), 1);
    assert_eq!(all_partitions(2).len(), 2);
    assert_eq!(all_partitions(3).len(), 5);
    assert_eq!(all_partitions(4).len(), 15);
    assert_eq!(all_partitions(5).len(), 52);
}
