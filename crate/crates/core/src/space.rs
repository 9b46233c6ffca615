//! Finite measurable spaces.
//!
//! A [`GroundSpace`] is an ordered list of atom labels together with a
//! sigma-algebra, represented by its atom partition: a set is measurable
//! exactly when it is a union of partition blocks. Every finite
//! sigma-algebra is atomic, so this representation is lossless.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A partition of `{0, .., n-1}` into disjoint nonempty blocks, kept in
/// canonical form: members ascending within each block, blocks ordered by
/// their minimal member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Validates and canonicalizes a block list over `n` elements.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "block {b} references element {i}, but there are only {n} elements"
                    )));
                }
                if assignment[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "element {i} appears in more than one block"
                    )));
                }
                assignment[i] = b;
            }
        }
        if let Some(missing) = assignment.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "element {missing} is not covered by any block"
            )));
        }
        Ok(Self::from_assignment(&assignment))
    }

    /// Builds the canonical partition with the same fibers as `assignment`.
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let n = assignment.len();
        let mut relabel: Vec<usize> = Vec::new();
        let mut block_of = vec![0usize; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let old = assignment[i];
            let new = match relabel.iter().position(|&label| label == old) {
                Some(new) => new,
                None => {
                    relabel.push(old);
                    blocks.push(Vec::new());
                    relabel.len() - 1
                }
            };
            block_of[i] = new;
            blocks[new].push(i);
        }
        Partition { blocks, block_of }
    }

    /// The all-singletons partition.
    pub fn singletons(n: usize) -> Self {
        Self::from_assignment(&(0..n).collect::<Vec<_>>())
    }

    /// The one-block partition. `n` must be positive.
    pub fn trivial(n: usize) -> Self {
        Self::from_assignment(&vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> &[usize] {
        &self.blocks[index]
    }

    pub fn block_of(&self, element: usize) -> usize {
        self.block_of[element]
    }

    /// True when every block of `self` is contained in a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        self.blocks.iter().all(|block| {
            let target = coarser.block_of[block[0]];
            block.iter().all(|&i| coarser.block_of[i] == target)
        })
    }

    /// Finest partition coarser than both inputs: connected components of
    /// the union of the two block structures.
    pub fn join(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len(), "partition sizes differ");
        let mut uf = UnionFind::new(self.len());
        for block in self.blocks.iter().chain(other.blocks.iter()) {
            for pair in block.windows(2) {
                uf.unite(pair[0], pair[1]);
            }
        }
        uf.into_partition()
    }

    /// Common refinement: elements together iff together in both inputs.
    pub fn meet(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len(), "partition sizes differ");
        let mut key_to_label: Vec<(usize, usize)> = Vec::new();
        let assignment: Vec<usize> = (0..self.len())
            .map(|i| {
                let key = (self.block_of[i], other.block_of[i]);
                match key_to_label.iter().position(|&k| k == key) {
                    Some(label) => label,
                    None => {
                        key_to_label.push(key);
                        key_to_label.len() - 1
                    }
                }
            })
            .collect();
        Partition::from_assignment(&assignment)
    }
}

/// Path-compressed union-find over `0..n`.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn unite(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // attach the larger root index under the smaller so roots are
            // stable under input order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn into_partition(mut self) -> Partition {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        Partition::from_assignment(&roots)
    }
}

/// A finite measurable space: atom labels plus the sigma-algebra's atom
/// partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSpace {
    atoms: Vec<String>,
    sigma: Partition,
}

impl GroundSpace {
    /// Space with the given sigma-algebra atoms.
    pub fn new(atoms: Vec<String>, sigma_blocks: Vec<Vec<usize>>) -> Result<Arc<Self>> {
        if atoms.is_empty() {
            return Err(Error::InvalidPartition(
                "a ground space needs at least one atom".to_string(),
            ));
        }
        let sigma = Partition::new(atoms.len(), sigma_blocks)?;
        Ok(Arc::new(GroundSpace { atoms, sigma }))
    }

    /// Space carrying the full sigma-algebra (all subsets measurable).
    /// Panics on an empty atom list; use [`GroundSpace::new`] to validate.
    pub fn full(atoms: Vec<String>) -> Arc<Self> {
        assert!(!atoms.is_empty(), "a ground space needs at least one atom");
        let sigma = Partition::singletons(atoms.len());
        Arc::new(GroundSpace { atoms, sigma })
    }

    /// Space with the trivial sigma-algebra `{empty, everything}`.
    /// Panics on an empty atom list; use [`GroundSpace::new`] to validate.
    pub fn trivial(atoms: Vec<String>) -> Arc<Self> {
        assert!(!atoms.is_empty(), "a ground space needs at least one atom");
        let sigma = Partition::trivial(atoms.len());
        Arc::new(GroundSpace { atoms, sigma })
    }

    /// Same atoms, new sigma-algebra.
    pub fn with_sigma(&self, sigma: Partition) -> Arc<Self> {
        assert_eq!(sigma.len(), self.atoms.len());
        Arc::new(GroundSpace {
            atoms: self.atoms.clone(),
            sigma,
        })
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_labels(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_label(&self, index: usize) -> &str {
        &self.atoms[index]
    }

    pub fn sigma(&self) -> &Partition {
        &self.sigma
    }

    pub fn num_blocks(&self) -> usize {
        self.sigma.num_blocks()
    }

    /// Membership predicate for the sigma-algebra: a set of atoms is
    /// measurable iff it is a union of sigma blocks.
    pub fn is_measurable_set(&self, set: &BTreeSet<usize>) -> bool {
        self.sigma.blocks().iter().all(|block| {
            let inside = block.iter().filter(|i| set.contains(i)).count();
            inside == 0 || inside == block.len()
        })
    }

    /// True when the two spaces have the same atoms and sigma-algebra.
    pub fn same_space(a: &Arc<GroundSpace>, b: &Arc<GroundSpace>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }

    /// True when the two spaces share atoms (sigma-algebras may differ).
    pub fn same_atoms(a: &Arc<GroundSpace>, b: &Arc<GroundSpace>) -> bool {
        Arc::ptr_eq(a, b) || a.atoms == b.atoms
    }
}

/// Convenience: numbered labels `a0, a1, ..`.
pub fn numbered_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}
