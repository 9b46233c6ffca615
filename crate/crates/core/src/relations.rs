//! Equivalence relations on finite spaces and the duality between
//! relations and sub-sigma-algebras.
//!
//! A relation is stored as its class partition, which keeps the
//! equivalence axioms true by construction; the pair-set view is derived
//! on demand. The two dual operations:
//!
//! * [`EquivalenceRelation::dual_sigma`] sends a relation to the
//!   sigma-algebra of measurable saturated sets (sets that contain each
//!   point's whole class), returned as a coarser partition on the same
//!   atoms.
//! * [`SetFamily::dual_relation`] sends a family of sets to the relation
//!   "indistinguishable by every set in the family".
//!
//! Together these form an antitone Galois correspondence: relations grow,
//! dual sigma-algebras shrink, and vice versa.
//!
//! On a finite space a measurable relation is automatically "basic"
//! (measurable for the product of its own dual sigma-algebra with itself):
//! the dual atoms of a measurable relation are exactly its classes. The
//! strict gap between measurable and basic only appears on infinite
//! spaces, so [`EquivalenceRelation::is_basic`] and
//! [`EquivalenceRelation::is_measurable`] agree here; both are exposed
//! because callers care about the two contracts separately.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{GroundSpace, Partition, UnionFind};

/// An equivalence relation on the atoms of a ground space, canonically
/// represented by its partition into classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceRelation {
    space: Arc<GroundSpace>,
    classes: Partition,
}

impl EquivalenceRelation {
    /// Relation with the given classes (validated as a partition).
    pub fn from_classes(space: Arc<GroundSpace>, classes: Vec<Vec<usize>>) -> Result<Self> {
        let classes = Partition::new(space.num_atoms(), classes)?;
        Ok(EquivalenceRelation { space, classes })
    }

    pub fn from_partition(space: Arc<GroundSpace>, classes: Partition) -> Result<Self> {
        if classes.len() != space.num_atoms() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} elements, space has {} atoms",
                classes.len(),
                space.num_atoms()
            )));
        }
        Ok(EquivalenceRelation { space, classes })
    }

    /// Builds a relation from atom pairs. With `close` set, takes the
    /// reflexive-symmetric-transitive closure; otherwise the pairs
    /// (plus implied reflexivity) must already be an equivalence relation.
    pub fn from_pairs(
        space: Arc<GroundSpace>,
        pairs: &[(usize, usize)],
        close: bool,
    ) -> Result<Self> {
        let n = space.num_atoms();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!(
                    "pair ({a},{b}) references an atom out of range ({n} atoms)"
                )));
            }
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in pairs {
            uf.unite(a, b);
        }
        let classes = uf.into_partition();
        if !close {
            let given: BTreeSet<(usize, usize)> =
                pairs.iter().copied().filter(|(a, b)| a != b).collect();
            for (a, b) in &given {
                if !given.contains(&(*b, *a)) {
                    return Err(Error::NotAnEquivalence(format!(
                        "missing symmetric pair ({b},{a})"
                    )));
                }
            }
            for class in classes.blocks() {
                for &a in class {
                    for &b in class {
                        if a != b && !given.contains(&(a, b)) {
                            return Err(Error::NotAnEquivalence(format!(
                                "missing pair ({a},{b}) implied by transitivity"
                            )));
                        }
                    }
                }
            }
        }
        Ok(EquivalenceRelation { space, classes })
    }

    /// The identity relation (all classes singletons).
    pub fn identity(space: &Arc<GroundSpace>) -> Self {
        let classes = Partition::singletons(space.num_atoms());
        EquivalenceRelation {
            space: Arc::clone(space),
            classes,
        }
    }

    /// The full relation (a single class).
    pub fn full(space: &Arc<GroundSpace>) -> Self {
        let classes = Partition::trivial(space.num_atoms());
        EquivalenceRelation {
            space: Arc::clone(space),
            classes,
        }
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn classes(&self) -> &Partition {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.num_blocks()
    }

    pub fn class_of(&self, atom: usize) -> usize {
        self.classes.block_of(atom)
    }

    /// Membership query `(a, b) in E`.
    pub fn related(&self, a: usize, b: usize) -> bool {
        self.classes.block_of(a) == self.classes.block_of(b)
    }

    /// The relation as an explicit set of ordered atom pairs.
    pub fn pair_set(&self) -> BTreeSet<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        for class in self.classes.blocks() {
            for &a in class {
                for &b in class {
                    pairs.insert((a, b));
                }
            }
        }
        pairs
    }

    /// `self` is a subrelation of `other` (every class of `self` sits
    /// inside a class of `other`).
    pub fn is_subrelation_of(&self, other: &EquivalenceRelation) -> bool {
        GroundSpace::same_space(&self.space, &other.space) && self.classes.refines(&other.classes)
    }

    /// The sigma-algebra of measurable saturated sets, as a new
    /// sigma-algebra on the same atoms. Its atoms are the components of
    /// the join of the class partition with the sigma blocks.
    pub fn dual_sigma(&self) -> Arc<GroundSpace> {
        let joined = self.classes.join(self.space.sigma());
        self.space.with_sigma(joined)
    }

    /// Measurability for the product sigma-algebra: every class is a
    /// union of sigma blocks.
    pub fn is_measurable(&self) -> bool {
        self.space.sigma().refines(&self.classes)
    }

    /// Measurability for the product of the dual sigma-algebra with
    /// itself, computed through [`dual_sigma`](Self::dual_sigma).
    pub fn is_basic(&self) -> bool {
        let dual = self.dual_sigma();
        dual.sigma().refines(&self.classes)
    }

    /// Applies the correspondence twice: the dual relation of the dual
    /// sigma-algebra's atoms, on the original space. Always contains
    /// `self`; equals `self` exactly when the relation is measurable.
    pub fn double_dual(&self) -> EquivalenceRelation {
        let dual = self.dual_sigma();
        let sets = dual
            .sigma()
            .blocks()
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect();
        let family =
            SetFamily::new(Arc::clone(&self.space), sets).expect("dual atoms index valid atoms");
        family.dual_relation()
    }
}

/// An arbitrary finite family of atom sets; the sets need not be
/// measurable and the family need not be a sigma-algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    space: Arc<GroundSpace>,
    sets: Vec<BTreeSet<usize>>,
}

impl SetFamily {
    pub fn new(space: Arc<GroundSpace>, sets: Vec<BTreeSet<usize>>) -> Result<Self> {
        let n = space.num_atoms();
        for (k, set) in sets.iter().enumerate() {
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidInput(format!(
                    "sets[{k}] references atom {bad}, but there are only {n} atoms"
                )));
            }
        }
        Ok(SetFamily { space, sets })
    }

    /// The family of a sigma-algebra's atoms.
    pub fn from_blocks(space: &Arc<GroundSpace>) -> Self {
        let sets = space
            .sigma()
            .blocks()
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect();
        SetFamily {
            space: Arc::clone(space),
            sets,
        }
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    /// True when every set of the family is measurable for `sigma_space`.
    pub fn measurable_for(&self, sigma_space: &Arc<GroundSpace>) -> bool {
        self.sets.iter().all(|s| sigma_space.is_measurable_set(s))
    }

    /// The relation "agree on membership in every set of the family":
    /// atoms are grouped by their membership indicator vectors. The empty
    /// family yields the full relation.
    pub fn dual_relation(&self) -> EquivalenceRelation {
        let n = self.space.num_atoms();
        let mut signatures: Vec<Vec<bool>> = vec![Vec::with_capacity(self.sets.len()); n];
        for set in &self.sets {
            for (i, sig) in signatures.iter_mut().enumerate() {
                sig.push(set.contains(&i));
            }
        }
        let mut seen: Vec<&Vec<bool>> = Vec::new();
        let assignment: Vec<usize> = (0..n)
            .map(|i| match seen.iter().position(|s| **s == signatures[i]) {
                Some(j) => j,
                None => {
                    seen.push(&signatures[i]);
                    seen.len() - 1
                }
            })
            .collect();
        EquivalenceRelation {
            space: Arc::clone(&self.space),
            classes: Partition::from_assignment(&assignment),
        }
    }
}
