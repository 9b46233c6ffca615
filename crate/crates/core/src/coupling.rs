//! Couplings and sub-couplings as sparse rational matrices over ordered
//! pairs of sigma blocks.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::relations::EquivalenceRelation;
use crate::space::GroundSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    /// Marginals match two probability measures exactly; total mass one.
    Coupling,
    /// Marginals dominated by the target measures; total mass at most one.
    SubCoupling,
}

/// A nonnegative rational mass per ordered pair of sigma blocks. Zero
/// entries are not stored, so equal couplings have equal entry maps.
#[derive(Clone, Debug)]
pub struct Coupling {
    space: Arc<GroundSpace>,
    entries: BTreeMap<(usize, usize), Rational>,
    kind: CouplingKind,
}

impl PartialEq for Coupling {
    fn eq(&self, other: &Self) -> bool {
        GroundSpace::same_space(&self.space, &other.space) && self.entries == other.entries
    }
}

impl Eq for Coupling {}

impl Coupling {
    pub fn new(
        space: Arc<GroundSpace>,
        entries: BTreeMap<(usize, usize), Rational>,
        kind: CouplingKind,
    ) -> Result<Self> {
        let k = space.num_blocks();
        for (&(i, j), mass) in &entries {
            if i >= k || j >= k {
                return Err(Error::InvalidInput(format!(
                    "coupling entry ({i},{j}) out of range ({k} blocks)"
                )));
            }
            if mass.is_negative() {
                return Err(Error::InvalidInput(format!(
                    "coupling entry ({i},{j}) has negative mass {mass}"
                )));
            }
        }
        let entries = entries.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(Coupling {
            space,
            entries,
            kind,
        })
    }

    pub fn zero(space: &Arc<GroundSpace>) -> Self {
        Coupling {
            space: Arc::clone(space),
            entries: BTreeMap::new(),
            kind: CouplingKind::SubCoupling,
        }
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.entries.values().sum()
    }

    /// First-coordinate marginal, as block masses.
    pub fn row_marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.space.num_blocks()];
        for (&(i, _), mass) in &self.entries {
            out[i] += mass;
        }
        out
    }

    /// Second-coordinate marginal, as block masses.
    pub fn col_marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.space.num_blocks()];
        for (&(_, j), mass) in &self.entries {
            out[j] += mass;
        }
        out
    }

    pub fn row_marginal_measure(&self) -> Measure {
        Measure::classified(Arc::clone(&self.space), self.row_marginal())
            .expect("marginal has the right block count")
    }

    pub fn col_marginal_measure(&self) -> Measure {
        Measure::classified(Arc::clone(&self.space), self.col_marginal())
            .expect("marginal has the right block count")
    }

    /// Exact marginal checks against a pair of target measures.
    pub fn is_coupling_of(&self, p: &Measure, p_prime: &Measure) -> bool {
        self.row_marginal() == p.block_masses() && self.col_marginal() == p_prime.block_masses()
    }

    pub fn is_subcoupling_of(&self, p: &Measure, p_prime: &Measure) -> bool {
        self.row_marginal()
            .iter()
            .zip(p.block_masses())
            .all(|(a, b)| a <= b)
            && self
                .col_marginal()
                .iter()
                .zip(p_prime.block_masses())
                .all(|(a, b)| a <= b)
    }

    /// Mass the coupling places on a measurable relation: the sum of all
    /// entries whose two blocks lie in the same class.
    pub fn mass_on(&self, relation: &EquivalenceRelation) -> Result<Rational> {
        let class_of_block = block_classes(relation)?;
        if !GroundSpace::same_space(&self.space, relation.space()) {
            return Err(Error::SpaceMismatch("coupling and relation spaces differ"));
        }
        let mut mass = Rational::zero();
        for (&(i, j), entry) in &self.entries {
            if class_of_block[i] == class_of_block[j] {
                mass += entry;
            }
        }
        Ok(mass)
    }

    /// Keeps only the entries supported on the relation.
    pub fn restrict_to(&self, relation: &EquivalenceRelation) -> Result<Coupling> {
        let class_of_block = block_classes(relation)?;
        if !GroundSpace::same_space(&self.space, relation.space()) {
            return Err(Error::SpaceMismatch("coupling and relation spaces differ"));
        }
        let entries = self
            .entries
            .iter()
            .filter(|(&(i, j), _)| class_of_block[i] == class_of_block[j])
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Ok(Coupling {
            space: Arc::clone(&self.space),
            entries,
            kind: CouplingKind::SubCoupling,
        })
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Coupling) -> Result<Coupling> {
        if !GroundSpace::same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch("coupling spaces differ"));
        }
        let mut entries = self.entries.clone();
        for (&key, mass) in &other.entries {
            entries
                .entry(key)
                .and_modify(|m| *m += mass)
                .or_insert_with(|| mass.clone());
        }
        Ok(Coupling {
            space: Arc::clone(&self.space),
            entries,
            kind: CouplingKind::SubCoupling,
        })
    }

    pub fn scale(&self, factor: &Rational) -> Coupling {
        assert!(!factor.is_negative(), "coupling scale factor must be >= 0");
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (*k, v * factor))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Coupling {
            space: Arc::clone(&self.space),
            entries,
            kind: CouplingKind::SubCoupling,
        }
    }

    /// Entrywise `self <= other`.
    pub fn dominated_by(&self, other: &Coupling) -> bool {
        self.entries
            .iter()
            .all(|(key, mass)| mass <= &other.get(key.0, key.1))
    }

    pub(crate) fn with_kind(mut self, kind: CouplingKind) -> Coupling {
        self.kind = kind;
        self
    }
}

/// Class index of each sigma block under a measurable relation.
pub(crate) fn block_classes(relation: &EquivalenceRelation) -> Result<Vec<usize>> {
    if !relation.is_measurable() {
        return Err(Error::NonMeasurableRelation);
    }
    Ok(relation
        .space()
        .sigma()
        .blocks()
        .iter()
        .map(|block| relation.class_of(block[0]))
        .collect())
}

/// Extends a sub-coupling to a full coupling of `(p, p_prime)` that
/// dominates it entrywise, by adding the product of the marginal
/// residuals scaled by the missing mass. With nothing missing the input
/// is returned unchanged (as a full coupling).
pub fn complete_subcoupling(m: &Coupling, p: &Measure, p_prime: &Measure) -> Result<Coupling> {
    if !GroundSpace::same_space(m.space(), p.space())
        || !GroundSpace::same_space(p.space(), p_prime.space())
    {
        return Err(Error::SpaceMismatch(
            "sub-coupling and marginals must share a space",
        ));
    }
    if !p.is_probability() || !p_prime.is_probability() {
        return Err(Error::InvalidMeasure(
            "completion targets must be probability measures".to_string(),
        ));
    }
    let rows = m.row_marginal();
    let cols = m.col_marginal();
    let residual_row: Vec<Rational> = p
        .block_masses()
        .iter()
        .zip(&rows)
        .map(|(target, used)| target - used)
        .collect();
    let residual_col: Vec<Rational> = p_prime
        .block_masses()
        .iter()
        .zip(&cols)
        .map(|(target, used)| target - used)
        .collect();
    if let Some(i) = residual_row.iter().position(|r| r.is_negative()) {
        return Err(Error::NotSubcoupling(format!(
            "row marginal exceeds target on block {i}"
        )));
    }
    if let Some(j) = residual_col.iter().position(|r| r.is_negative()) {
        return Err(Error::NotSubcoupling(format!(
            "column marginal exceeds target on block {j}"
        )));
    }
    let gamma = Rational::one() - m.total();
    if gamma.is_zero() {
        return Ok(m.clone().with_kind(CouplingKind::Coupling));
    }
    if gamma.is_negative() {
        return Err(Error::NotSubcoupling("total mass exceeds one".to_string()));
    }
    let mut entries = m.entries.clone();
    for (i, qi) in residual_row.iter().enumerate() {
        if qi.is_zero() {
            continue;
        }
        for (j, qj) in residual_col.iter().enumerate() {
            if qj.is_zero() {
                continue;
            }
            let extra = (qi * qj).checked_div(&gamma)?;
            entries
                .entry((i, j))
                .and_modify(|m| *m += &extra)
                .or_insert(extra);
        }
    }
    Ok(Coupling {
        space: Arc::clone(m.space()),
        entries,
        kind: CouplingKind::Coupling,
    })
}
