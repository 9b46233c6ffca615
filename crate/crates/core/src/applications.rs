//! Instance builders: group orbits, finite sequence spaces, tilted
//! measures, the bit-flip coupling, the two-density asymmetry example,
//! Hellinger distance, and truncated product-Poisson tails.
//!
//! Everything duality-critical stays rational; only the Poisson weights
//! and the Hellinger distance use a floating-point backend, and the
//! Poisson weights are converted exactly (every finite `f64` is a
//! rational) before any solving happens.

use std::sync::Arc;

use crate::chain::Chain;
use crate::coupling::{Coupling, CouplingKind};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::relations::EquivalenceRelation;
use crate::space::{GroundSpace, UnionFind};

/// A finite group action given by generating permutations of the atoms.
#[derive(Clone, Debug)]
pub struct FiniteAction {
    space: Arc<GroundSpace>,
    generators: Vec<Vec<usize>>,
}

impl FiniteAction {
    pub fn new(space: Arc<GroundSpace>, generators: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.num_atoms();
        for (g, perm) in generators.iter().enumerate() {
            if perm.len() != n {
                return Err(Error::InvalidInput(format!(
                    "generator {g} has length {}, expected {n}",
                    perm.len()
                )));
            }
            let mut seen = vec![false; n];
            for &image in perm {
                if image >= n || seen[image] {
                    return Err(Error::InvalidInput(format!(
                        "generator {g} is not a permutation of the atoms"
                    )));
                }
                seen[image] = true;
            }
        }
        Ok(FiniteAction { space, generators })
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }
}

/// Orbit equivalence relation of the generated group, together with the
/// invariant sigma-algebra (the orbit relation's dual sigma-algebra).
pub fn orbit_relation(action: &FiniteAction) -> (EquivalenceRelation, Arc<GroundSpace>) {
    let n = action.space.num_atoms();
    let mut uf = UnionFind::new(n);
    for perm in &action.generators {
        for (atom, &image) in perm.iter().enumerate() {
            uf.unite(atom, image);
        }
    }
    let relation =
        EquivalenceRelation::from_partition(Arc::clone(&action.space), uf.into_partition())
            .expect("orbit partition covers all atoms");
    let invariant = relation.dual_sigma();
    debug_assert!(action.generators.iter().all(|perm| {
        invariant.sigma().blocks().iter().all(|block| {
            let target = invariant.sigma().block_of(perm[block[0]]);
            block
                .iter()
                .all(|&a| invariant.sigma().block_of(perm[a]) == target)
                && target == invariant.sigma().block_of(block[0])
        })
    }));
    (relation, invariant)
}

/// All length-`horizon` sequences over a finite alphabet, in
/// lexicographic order, with the full sigma-algebra.
#[derive(Clone, Debug)]
pub struct SequenceSpace {
    alphabet: usize,
    horizon: usize,
    space: Arc<GroundSpace>,
}

impl SequenceSpace {
    pub fn new(alphabet: usize, horizon: usize) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::InvalidInput(
                "alphabet size must be at least 2".to_string(),
            ));
        }
        if horizon < 1 {
            return Err(Error::InvalidInput(
                "horizon must be at least 1".to_string(),
            ));
        }
        let count = alphabet
            .checked_pow(horizon as u32)
            .filter(|&c| c <= 1 << 20)
            .ok_or_else(|| {
                Error::InvalidInput(format!("sequence space {alphabet}^{horizon} is too large"))
            })?;
        let labels = (0..count)
            .map(|i| Self::label(alphabet, horizon, i))
            .collect();
        Ok(SequenceSpace {
            alphabet,
            horizon,
            space: GroundSpace::full(labels),
        })
    }

    fn label(alphabet: usize, horizon: usize, index: usize) -> String {
        let symbols = Self::digits(alphabet, horizon, index);
        if alphabet <= 10 {
            symbols.iter().map(|d| d.to_string()).collect()
        } else {
            symbols
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    fn digits(alphabet: usize, horizon: usize, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; horizon];
        for slot in (0..horizon).rev() {
            out[slot] = index % alphabet;
            index /= alphabet;
        }
        out
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn num_sequences(&self) -> usize {
        self.space.num_atoms()
    }

    /// Symbols of the sequence at `index`, coordinate 1 first.
    pub fn symbols(&self, index: usize) -> Vec<usize> {
        Self::digits(self.alphabet, self.horizon, index)
    }

    /// Index of the atom obtained by applying `permutation` to the
    /// coordinates: new coordinate `t` holds old coordinate
    /// `permutation[t]`.
    fn permute_coordinates(&self, index: usize, permutation: &[usize]) -> usize {
        let symbols = self.symbols(index);
        let mut out = 0;
        for &source in permutation {
            out = out * self.alphabet + symbols[source];
        }
        out
    }

    /// The coordinate-rotation permutation of atoms (each sequence mapped
    /// to its left rotation), as a generator for [`FiniteAction`].
    pub fn cyclic_shift(&self) -> Vec<usize> {
        let perm: Vec<usize> = (0..self.horizon).map(|t| (t + 1) % self.horizon).collect();
        (0..self.num_sequences())
            .map(|i| self.permute_coordinates(i, &perm))
            .collect()
    }

    /// Atom permutations swapping adjacent coordinates; together they
    /// generate all coordinate permutations.
    pub fn coordinate_transpositions(&self) -> Vec<Vec<usize>> {
        (0..self.horizon.saturating_sub(1))
            .map(|t| {
                let mut perm: Vec<usize> = (0..self.horizon).collect();
                perm.swap(t, t + 1);
                (0..self.num_sequences())
                    .map(|i| self.permute_coordinates(i, &perm))
                    .collect()
            })
            .collect()
    }
}

/// The increasing chain where step `n` (1-based) relates sequences that
/// agree on coordinates `n..=horizon`. The first relation is equality;
/// the last only constrains the final coordinate.
pub fn eventual_equality_chain(seq: &SequenceSpace) -> Chain {
    let t = seq.horizon();
    let relations = (1..=t)
        .map(|n| {
            // group by the suffix starting at coordinate n
            let assignment: Vec<usize> = (0..seq.num_sequences())
                .map(|i| {
                    let symbols = seq.symbols(i);
                    symbols[n - 1..]
                        .iter()
                        .fold(0, |acc, &s| acc * seq.alphabet() + s)
                })
                .collect();
            EquivalenceRelation::from_partition(
                Arc::clone(seq.space()),
                crate::space::Partition::from_assignment(&assignment),
            )
            .expect("suffix grouping is a partition")
        })
        .collect();
    Chain::new(relations).expect("suffix relations form an increasing measurable chain")
}

/// Sequences related iff they use the same multiset of symbols.
pub fn multiset_relation(seq: &SequenceSpace) -> EquivalenceRelation {
    let mut keys: Vec<Vec<usize>> = Vec::new();
    let assignment: Vec<usize> = (0..seq.num_sequences())
        .map(|i| {
            let mut counts = vec![0usize; seq.alphabet()];
            for s in seq.symbols(i) {
                counts[s] += 1;
            }
            match keys.iter().position(|k| *k == counts) {
                Some(j) => j,
                None => {
                    keys.push(counts);
                    keys.len() - 1
                }
            }
        })
        .collect();
    EquivalenceRelation::from_partition(
        Arc::clone(seq.space()),
        crate::space::Partition::from_assignment(&assignment),
    )
    .expect("multiset grouping is a partition")
}

/// Reweights a probability measure by a nonnegative density and
/// normalizes: the result gives each block mass `V(b) * P(b) / sum(V P)`.
///
/// Weights are given per atom and must be constant on each sigma block
/// (otherwise the reweighted measure would not be defined on the
/// sigma-algebra). Fails when the weighted total is zero.
pub fn tilt_measure(base: &Measure, weights: &[Rational]) -> Result<Measure> {
    let space = base.space();
    if weights.len() != space.num_atoms() {
        return Err(Error::InvalidInput(format!(
            "expected one weight per atom ({}), got {}",
            space.num_atoms(),
            weights.len()
        )));
    }
    if let Some(i) = weights.iter().position(|w| w.is_negative()) {
        return Err(Error::InvalidInput(format!(
            "weights[{i}] = {} is negative",
            weights[i]
        )));
    }
    let mut block_weight = Vec::with_capacity(space.num_blocks());
    for block in space.sigma().blocks() {
        let w = &weights[block[0]];
        if block.iter().any(|&a| &weights[a] != w) {
            return Err(Error::InvalidInput(
                "weights must be constant on each sigma block".to_string(),
            ));
        }
        block_weight.push(w.clone());
    }
    let weighted: Vec<Rational> = base
        .block_masses()
        .iter()
        .zip(&block_weight)
        .map(|(m, w)| m * w)
        .collect();
    let total: Rational = weighted.iter().sum();
    if total.is_zero() {
        return Err(Error::InvalidInput(
            "tilt weight integrates to zero against the base measure".to_string(),
        ));
    }
    let mass = weighted
        .into_iter()
        .map(|m| m.checked_div(&total))
        .collect::<Result<Vec<_>>>()?;
    Measure::probability(Arc::clone(space), mass)
}

/// The half-identity, half-flip coupling of the uniform measure on binary
/// sequences with itself: mass `2^-(T+1)` on every pair `(w, w)` and
/// every pair `(w, flip(w))`. Both marginals are uniform and exactly half
/// the mass sits on sequences that agree from some coordinate on.
pub fn bitflip_coupling(seq: &SequenceSpace) -> Result<Coupling> {
    if seq.alphabet() != 2 {
        return Err(Error::InvalidInput(
            "bitflip coupling needs a binary alphabet".to_string(),
        ));
    }
    let n = seq.num_sequences();
    let half_cell = Rational::of(1, 2 * n as i64);
    let mut entries = std::collections::BTreeMap::new();
    for i in 0..n {
        let flipped = n - 1 - i; // bitwise complement in lex order
        entries.insert((i, i), half_cell.clone());
        entries.insert((i, flipped), half_cell.clone());
    }
    Coupling::new(Arc::clone(seq.space()), entries, CouplingKind::Coupling)
}

/// Discretization of the densities `2x` and `2(1-x)` on `[0,1]` into `n`
/// equal cells, with exact per-cell integrals. `n` must be even so that
/// no cell straddles the crossing point `1/2`.
pub fn asymmetry_instance(n: usize) -> Result<(Arc<GroundSpace>, Measure, Measure)> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "cell count must be even and at least 2, got {n}"
        )));
    }
    let labels = (0..n).map(|i| format!("cell{i}")).collect();
    let space = GroundSpace::full(labels);
    let n_i64 = n as i64;
    let denom = n_i64 * n_i64;
    let mut rising = Vec::with_capacity(n);
    let mut falling = Vec::with_capacity(n);
    for i in 0..n_i64 {
        // integral of 2x over [i/n, (i+1)/n] = (2i+1)/n^2
        rising.push(Rational::of(2 * i + 1, denom));
        falling.push(Rational::of(2 * (n_i64 - i) - 1, denom));
    }
    let p = Measure::probability(Arc::clone(&space), rising)?;
    let q = Measure::probability(Arc::clone(&space), falling)?;
    Ok((space, p, q))
}

/// Hellinger distance between two nonnegative mass vectors, using the sum
/// of the two as the dominating measure.
pub fn hellinger(mu: &[f64], mu_prime: &[f64]) -> f64 {
    assert_eq!(mu.len(), mu_prime.len(), "index sets differ");
    let lambda: Vec<f64> = mu.iter().zip(mu_prime).map(|(a, b)| a + b).collect();
    hellinger_with(mu, mu_prime, &lambda)
}

/// Hellinger distance with an explicit dominating vector. Entries where
/// the dominating mass vanishes are skipped; the caller must make sure
/// `lambda` dominates both inputs. The value does not depend on the
/// choice of dominating vector.
pub fn hellinger_with(mu: &[f64], mu_prime: &[f64], lambda: &[f64]) -> f64 {
    assert_eq!(mu.len(), mu_prime.len(), "index sets differ");
    assert_eq!(mu.len(), lambda.len(), "index sets differ");
    let mut sum = 0.0;
    for ((&a, &b), &l) in mu.iter().zip(mu_prime).zip(lambda) {
        if l == 0.0 {
            continue;
        }
        let diff = (a / l).sqrt() - (b / l).sqrt();
        sum += diff * diff * l;
    }
    (0.5 * sum).sqrt()
}

/// Specification of a truncated product-Poisson instance.
#[derive(Clone, Debug)]
pub struct PoissonTailSpec {
    /// Per-site intensity pair `(mu, mu')`.
    pub intensities: Vec<(f64, f64)>,
    /// Site indices inside the window where the processes may differ.
    pub inside_window: Vec<usize>,
    /// Occupation counts run over `0..=truncation` at every site.
    pub truncation: usize,
}

/// A solvable instance built from a [`PoissonTailSpec`]: atoms are
/// truncated occupation vectors, the measures are the renormalized
/// truncated product-Poisson laws, and the relation couples vectors that
/// agree at every site outside the window.
#[derive(Clone, Debug)]
pub struct PoissonTailInstance {
    pub space: Arc<GroundSpace>,
    pub p: Measure,
    pub p_prime: Measure,
    pub relation: EquivalenceRelation,
    /// Product mass retained by the truncation, per measure.
    pub retained_mass: (f64, f64),
    /// Site indices outside the window (the coupled coordinates).
    pub outside_sites: Vec<usize>,
}

/// Poisson weights `exp(-mu) mu^k / k!` for `k = 0..=m`.
fn poisson_weights(mu: f64, m: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(m + 1);
    let mut current = (-mu).exp();
    for k in 0..=m {
        w.push(current);
        current *= mu / (k as f64 + 1.0);
    }
    w
}

pub fn poisson_tail_instance(spec: &PoissonTailSpec) -> Result<PoissonTailInstance> {
    let sites = spec.intensities.len();
    if sites == 0 {
        return Err(Error::InvalidInput(
            "at least one site is required".to_string(),
        ));
    }
    for &s in &spec.inside_window {
        if s >= sites {
            return Err(Error::InvalidInput(format!(
                "inside_window references site {s}, but there are only {sites} sites"
            )));
        }
    }
    let outside_sites: Vec<usize> = (0..sites)
        .filter(|s| !spec.inside_window.contains(s))
        .collect();
    if outside_sites.len() > 3 {
        return Err(Error::InvalidInput(format!(
            "at most 3 sites outside the window are supported, got {}",
            outside_sites.len()
        )));
    }
    let m = spec.truncation;
    let atom_count = (m + 1)
        .checked_pow(sites as u32)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| {
            Error::InvalidInput(format!("occupation grid ({}+1)^{sites} is too large", m))
        })?;

    // per-site float weights, converted exactly so that common factors
    // cancel in rational arithmetic
    let mut site_weights_p: Vec<Vec<Rational>> = Vec::with_capacity(sites);
    let mut site_weights_q: Vec<Vec<Rational>> = Vec::with_capacity(sites);
    let mut retained_p = 1.0;
    let mut retained_q = 1.0;
    for &(mu, mu_prime) in &spec.intensities {
        if mu < 0.0 || mu_prime < 0.0 {
            return Err(Error::InvalidInput(
                "intensities must be nonnegative".to_string(),
            ));
        }
        let wp = poisson_weights(mu, m);
        let wq = poisson_weights(mu_prime, m);
        retained_p *= wp.iter().sum::<f64>();
        retained_q *= wq.iter().sum::<f64>();
        site_weights_p.push(
            wp.iter()
                .map(|&x| Rational::from_f64_exact(x).expect("finite weight"))
                .collect(),
        );
        site_weights_q.push(
            wq.iter()
                .map(|&x| Rational::from_f64_exact(x).expect("finite weight"))
                .collect(),
        );
    }
    let threshold = 1.0 - 1e-9;
    if retained_p < threshold || retained_q < threshold {
        return Err(Error::TruncationTooCoarse {
            retained: retained_p.min(retained_q),
        });
    }

    // occupation vectors in lexicographic order
    let occupation = |index: usize| -> Vec<usize> {
        let mut v = vec![0; sites];
        let mut rest = index;
        for s in (0..sites).rev() {
            v[s] = rest % (m + 1);
            rest /= m + 1;
        }
        v
    };
    let labels: Vec<String> = (0..atom_count)
        .map(|i| {
            occupation(i)
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    let space = GroundSpace::full(labels);

    let mut mass_p = Vec::with_capacity(atom_count);
    let mut mass_q = Vec::with_capacity(atom_count);
    for i in 0..atom_count {
        let occ = occupation(i);
        let mut wp = Rational::one();
        let mut wq = Rational::one();
        for (s, &k) in occ.iter().enumerate() {
            wp = wp * &site_weights_p[s][k];
            wq = wq * &site_weights_q[s][k];
        }
        mass_p.push(wp);
        mass_q.push(wq);
    }
    let total_p: Rational = mass_p.iter().sum();
    let total_q: Rational = mass_q.iter().sum();
    let mass_p = mass_p
        .into_iter()
        .map(|x| x.checked_div(&total_p))
        .collect::<Result<Vec<_>>>()?;
    let mass_q = mass_q
        .into_iter()
        .map(|x| x.checked_div(&total_q))
        .collect::<Result<Vec<_>>>()?;
    let p = Measure::probability(Arc::clone(&space), mass_p)?;
    let p_prime = Measure::probability(Arc::clone(&space), mass_q)?;

    // relate occupation vectors agreeing at every outside site
    let assignment: Vec<usize> = (0..atom_count)
        .map(|i| {
            let occ = occupation(i);
            outside_sites
                .iter()
                .fold(0, |acc, &s| acc * (m + 1) + occ[s])
        })
        .collect();
    let relation = EquivalenceRelation::from_partition(
        Arc::clone(&space),
        crate::space::Partition::from_assignment(&assignment),
    )
    .expect("outside-site grouping is a partition");

    Ok(PoissonTailInstance {
        space,
        p,
        p_prime,
        relation,
        retained_mass: (retained_p, retained_q),
        outside_sites,
    })
}
