//! Finite signed measures on a [`GroundSpace`].
//!
//! Masses are stored per sigma-algebra block, never per atom: a measure
//! only sees measurable sets. Coarsening to a sub-sigma-algebra sums
//! blocks; the reverse direction would need a conditional-mass rule and is
//! deliberately not offered here.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::space::GroundSpace;

/// The constraint class a measure is declared to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    /// Nonnegative with total mass exactly one.
    Probability,
    /// Nonnegative with total mass at most one.
    SubProbability,
    /// No sign constraint.
    Signed,
}

/// A finite signed measure: one exact mass per sigma block.
#[derive(Clone, Debug)]
pub struct Measure {
    space: Arc<GroundSpace>,
    mass: Vec<Rational>,
    kind: MeasureKind,
}

impl PartialEq for Measure {
    /// Equality as measures: same space, same block masses. The declared
    /// kind is a constraint tag, not part of the value.
    fn eq(&self, other: &Self) -> bool {
        GroundSpace::same_space(&self.space, &other.space) && self.mass == other.mass
    }
}

impl Eq for Measure {}

impl Measure {
    /// Validating constructor for an explicitly tagged measure.
    pub fn new(space: Arc<GroundSpace>, mass: Vec<Rational>, kind: MeasureKind) -> Result<Self> {
        if mass.len() != space.num_blocks() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} block masses, got {}",
                space.num_blocks(),
                mass.len()
            )));
        }
        match kind {
            MeasureKind::Probability | MeasureKind::SubProbability => {
                if let Some(i) = mass.iter().position(|m| m.is_negative()) {
                    return Err(Error::InvalidMeasure(format!(
                        "mass[{i}] = {} is negative",
                        mass[i]
                    )));
                }
                let total: Rational = mass.iter().sum();
                if kind == MeasureKind::Probability && total != Rational::one() {
                    return Err(Error::InvalidMeasure(format!(
                        "probability masses must sum to 1, got {total}"
                    )));
                }
                if kind == MeasureKind::SubProbability && total > Rational::one() {
                    return Err(Error::InvalidMeasure(format!(
                        "sub-probability masses must sum to at most 1, got {total}"
                    )));
                }
            }
            MeasureKind::Signed => {}
        }
        Ok(Measure { space, mass, kind })
    }

    pub fn probability(space: Arc<GroundSpace>, mass: Vec<Rational>) -> Result<Self> {
        Self::new(space, mass, MeasureKind::Probability)
    }

    pub fn sub_probability(space: Arc<GroundSpace>, mass: Vec<Rational>) -> Result<Self> {
        Self::new(space, mass, MeasureKind::SubProbability)
    }

    pub fn signed(space: Arc<GroundSpace>, mass: Vec<Rational>) -> Result<Self> {
        Self::new(space, mass, MeasureKind::Signed)
    }

    /// Constructor that picks the strongest kind the masses satisfy.
    pub fn classified(space: Arc<GroundSpace>, mass: Vec<Rational>) -> Result<Self> {
        if mass.len() != space.num_blocks() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} block masses, got {}",
                space.num_blocks(),
                mass.len()
            )));
        }
        let kind = if mass.iter().any(|m| m.is_negative()) {
            MeasureKind::Signed
        } else {
            let total: Rational = mass.iter().sum();
            if total == Rational::one() {
                MeasureKind::Probability
            } else if total < Rational::one() {
                MeasureKind::SubProbability
            } else {
                MeasureKind::Signed
            }
        };
        Ok(Measure { space, mass, kind })
    }

    /// Uniform probability over atoms: each block weighs its atom count.
    pub fn uniform(space: &Arc<GroundSpace>) -> Self {
        let n = space.num_atoms() as i64;
        let mass = space
            .sigma()
            .blocks()
            .iter()
            .map(|b| Rational::of(b.len() as i64, n))
            .collect();
        Measure {
            space: Arc::clone(space),
            mass,
            kind: MeasureKind::Probability,
        }
    }

    /// Point mass at one atom (all of its block's mass, as the
    /// sigma-algebra cannot see finer).
    pub fn point_mass(space: &Arc<GroundSpace>, atom: usize) -> Result<Self> {
        if atom >= space.num_atoms() {
            return Err(Error::InvalidInput(format!(
                "atom index {atom} out of range ({} atoms)",
                space.num_atoms()
            )));
        }
        let mut mass = vec![Rational::zero(); space.num_blocks()];
        mass[space.sigma().block_of(atom)] = Rational::one();
        Ok(Measure {
            space: Arc::clone(space),
            mass,
            kind: MeasureKind::Probability,
        })
    }

    pub fn zero(space: &Arc<GroundSpace>) -> Self {
        Measure {
            space: Arc::clone(space),
            mass: vec![Rational::zero(); space.num_blocks()],
            kind: MeasureKind::SubProbability,
        }
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn block_masses(&self) -> &[Rational] {
        &self.mass
    }

    pub fn block_mass(&self, block: usize) -> &Rational {
        &self.mass[block]
    }

    pub fn total(&self) -> Rational {
        self.mass.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.mass.iter().any(|m| m.is_negative())
    }

    pub fn is_probability(&self) -> bool {
        self.is_nonnegative() && self.total() == Rational::one()
    }

    /// Mass of a union of sigma blocks.
    pub fn mass_of_blocks(&self, blocks: &[usize]) -> Rational {
        blocks.iter().map(|&b| &self.mass[b]).sum()
    }

    /// Blockwise `self <= other`.
    pub fn dominated_by(&self, other: &Measure) -> Result<bool> {
        self.check_same_space(other, "dominated_by")?;
        Ok(self.mass.iter().zip(&other.mass).all(|(a, b)| a <= b))
    }

    pub fn add(&self, other: &Measure) -> Result<Measure> {
        self.check_same_space(other, "add")?;
        let mass = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| a + b)
            .collect();
        Measure::classified(Arc::clone(&self.space), mass)
    }

    /// Signed difference `self - other`.
    pub fn sub(&self, other: &Measure) -> Result<Measure> {
        self.check_same_space(other, "sub")?;
        let mass = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| a - b)
            .collect();
        Measure::new(Arc::clone(&self.space), mass, MeasureKind::Signed)
    }

    pub fn scale(&self, factor: &Rational) -> Measure {
        let mass = self.mass.iter().map(|m| m * factor).collect::<Vec<_>>();
        Measure::classified(Arc::clone(&self.space), mass)
            .expect("scaling preserves the block count")
    }

    /// Splits a signed measure into mutually singular nonnegative parts.
    ///
    /// Blocks with zero mass are assigned to the positive set, so the
    /// decomposition is deterministic.
    pub fn jordan_decomposition(&self) -> JordanDecomposition {
        let mut positive_set = Vec::new();
        let mut negative_set = Vec::new();
        let mut positive_mass = vec![Rational::zero(); self.mass.len()];
        let mut negative_mass = vec![Rational::zero(); self.mass.len()];
        for (b, m) in self.mass.iter().enumerate() {
            if m.is_negative() {
                negative_set.push(b);
                negative_mass[b] = -m;
            } else {
                positive_set.push(b);
                positive_mass[b] = m.clone();
            }
        }
        let positive_part = Measure::classified(Arc::clone(&self.space), positive_mass)
            .expect("part has the right block count");
        let negative_part = Measure::classified(Arc::clone(&self.space), negative_mass)
            .expect("part has the right block count");
        JordanDecomposition {
            positive_set,
            negative_set,
            positive_part,
            negative_part,
        }
    }

    /// Greatest measure dominated by both inputs, computed from the
    /// decomposition of `self - other`: take `self` on the negative set
    /// and `other` on the positive set. On an atomic space this is the
    /// blockwise minimum.
    pub fn meet(&self, other: &Measure) -> Result<Measure> {
        self.check_same_space(other, "meet")?;
        if !self.is_nonnegative() || !other.is_nonnegative() {
            return Err(Error::InvalidMeasure(
                "meet requires nonnegative measures".to_string(),
            ));
        }
        let diff = self.sub(other)?;
        let jd = diff.jordan_decomposition();
        let mut mass = vec![Rational::zero(); self.mass.len()];
        for &b in &jd.negative_set {
            mass[b] = self.mass[b].clone();
        }
        for &b in &jd.positive_set {
            mass[b] = other.mass[b].clone();
        }
        Measure::classified(Arc::clone(&self.space), mass)
    }

    /// Largest deviation `|self(A) - other(A)|` over measurable `A`,
    /// together with an attaining set of sigma blocks (the positive set of
    /// the difference). Requires two probability measures.
    pub fn total_variation(&self, other: &Measure) -> Result<(Rational, Vec<usize>)> {
        self.check_same_space(other, "total_variation")?;
        if !self.is_probability() || !other.is_probability() {
            return Err(Error::InvalidMeasure(
                "total_variation requires probability measures".to_string(),
            ));
        }
        let diff = self.sub(other)?;
        let jd = diff.jordan_decomposition();
        Ok((jd.positive_part.total(), jd.positive_set))
    }

    /// Image measure under a map from sigma blocks onto quotient classes.
    /// The result lives on a fresh space with one atom per class and the
    /// full sigma-algebra; total mass is preserved.
    pub fn pushforward(&self, block_to_class: &[usize]) -> Result<Measure> {
        if block_to_class.len() != self.mass.len() {
            return Err(Error::InvalidInput(format!(
                "quotient map covers {} blocks, measure has {}",
                block_to_class.len(),
                self.mass.len()
            )));
        }
        let num_classes = match block_to_class.iter().max() {
            Some(&m) => m + 1,
            None => 0,
        };
        let mut mass = vec![Rational::zero(); num_classes];
        for (b, &c) in block_to_class.iter().enumerate() {
            mass[c] += &self.mass[b];
        }
        let labels = (0..num_classes).map(|c| format!("q{c}")).collect();
        let space = GroundSpace::full(labels);
        Ok(Measure {
            space,
            mass,
            kind: self.kind,
        })
    }

    /// Restriction to a coarser sigma-algebra on the same atoms: block
    /// masses are summed into the coarser blocks.
    pub fn coarsen_to(&self, target: &Arc<GroundSpace>) -> Result<Measure> {
        if !GroundSpace::same_atoms(&self.space, target) {
            return Err(Error::SpaceMismatch("coarsen_to needs identical atoms"));
        }
        if !self.space.sigma().refines(target.sigma()) {
            return Err(Error::SpaceMismatch(
                "target sigma-algebra is not coarser than the measure's",
            ));
        }
        let mut mass = vec![Rational::zero(); target.num_blocks()];
        for (b, block) in self.space.sigma().blocks().iter().enumerate() {
            let target_block = target.sigma().block_of(block[0]);
            mass[target_block] += &self.mass[b];
        }
        Ok(Measure {
            space: Arc::clone(target),
            mass,
            kind: self.kind,
        })
    }

    fn check_same_space(&self, other: &Measure, op: &'static str) -> Result<()> {
        if GroundSpace::same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(op))
        }
    }
}

/// The two mutually singular nonnegative parts of a signed measure,
/// together with the supporting block sets.
#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    /// Blocks with nonnegative mass (zero-mass blocks land here).
    pub positive_set: Vec<usize>,
    /// Blocks with strictly negative mass.
    pub negative_set: Vec<usize>,
    pub positive_part: Measure,
    pub negative_part: Measure,
}

impl JordanDecomposition {
    /// Reassembles the original signed measure.
    pub fn reconstruct(&self) -> Measure {
        self.positive_part
            .sub(&self.negative_part)
            .expect("parts share a space")
    }
}
