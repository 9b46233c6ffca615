//! Iterative solver for finite increasing chains of equivalence relations.
//!
//! The chain solver couples what it can under the first relation, removes
//! that mass from both marginals, and repeats with the next (coarser)
//! relation on the residuals. The accumulated sub-coupling is completed
//! at the end. Because each step is exactly optimal on its residuals, the
//! final coupling is optimal for the last relation, and the per-step
//! bookkeeping satisfies an exact mass ledger:
//! `residual before step n = initial total - sum of earlier successes`.

use crate::coupling::{complete_subcoupling, Coupling};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::relations::EquivalenceRelation;
use crate::solver::{solve_quotient, CouplingStrategy, Solution};
use crate::space::GroundSpace;

/// A nonempty increasing chain of measurable equivalence relations on a
/// common space: each relation's classes are unions of the previous one's.
#[derive(Clone, Debug)]
pub struct Chain {
    relations: Vec<EquivalenceRelation>,
}

impl Chain {
    pub fn new(relations: Vec<EquivalenceRelation>) -> Result<Self> {
        if relations.is_empty() {
            return Err(Error::InvalidChain("chain is empty".to_string()));
        }
        let space = relations[0].space();
        for (n, rel) in relations.iter().enumerate() {
            if !GroundSpace::same_space(rel.space(), space) {
                return Err(Error::InvalidChain(format!(
                    "relation {n} lives on a different space"
                )));
            }
            if !rel.is_measurable() {
                return Err(Error::InvalidChain(format!(
                    "relation {n} is not measurable"
                )));
            }
        }
        for n in 1..relations.len() {
            if !relations[n - 1].is_subrelation_of(&relations[n]) {
                return Err(Error::InvalidChain(format!(
                    "relation {} is not contained in relation {}",
                    n - 1,
                    n
                )));
            }
        }
        Ok(Chain { relations })
    }

    pub fn relations(&self) -> &[EquivalenceRelation] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> &EquivalenceRelation {
        self.relations.last().expect("chain is nonempty")
    }

    /// The chain cut after `len` relations.
    pub fn prefix(&self, len: usize) -> Result<Chain> {
        if len == 0 || len > self.relations.len() {
            return Err(Error::InvalidChain(format!(
                "prefix length {len} out of range"
            )));
        }
        Ok(Chain {
            relations: self.relations[..len].to_vec(),
        })
    }
}

/// One step of the residual iteration.
#[derive(Clone, Debug)]
pub struct ChainStep {
    /// Total residual mass entering this step.
    pub residual_before: Rational,
    /// Mass successfully coupled under this step's relation.
    pub success_mass: Rational,
    /// Running accumulated sub-coupling after this step.
    pub accumulated: Coupling,
}

/// Full ledger of a chain run.
#[derive(Clone, Debug)]
pub struct ChainTrace {
    pub initial_total: Rational,
    pub steps: Vec<ChainStep>,
    /// Residual mass left after the last executed step.
    pub final_residual: Rational,
    /// Largest deviation of the original measures over the last
    /// relation's dual sigma-algebra; bounds the final residual.
    pub final_dual_value: Rational,
}

impl ChainTrace {
    pub fn total_success(&self) -> Rational {
        self.steps.iter().map(|s| &s.success_mass).sum()
    }
}

/// Runs the residual iteration over the chain and returns the optimal
/// solution for the last relation together with the step ledger.
///
/// Residuals are normalized back to probability measures before each
/// inner solve and the resulting coupling is scaled back; a step whose
/// residual vanishes terminates the loop early.
pub fn solve_chain(
    p: &Measure,
    p_prime: &Measure,
    chain: &Chain,
    strategy: CouplingStrategy,
) -> Result<(Solution, ChainTrace)> {
    let space = chain.relations()[0].space();
    if !GroundSpace::same_space(p.space(), space)
        || !GroundSpace::same_space(p_prime.space(), space)
    {
        return Err(Error::SpaceMismatch(
            "measures must live on the chain's space",
        ));
    }
    if !p.is_probability() || !p_prime.is_probability() {
        return Err(Error::InvalidMeasure(
            "solve_chain requires probability measures".to_string(),
        ));
    }

    let mut residual_p = p.clone();
    let mut residual_q = p_prime.clone();
    let mut accumulated = Coupling::zero(space);
    let mut steps: Vec<ChainStep> = Vec::with_capacity(chain.len());

    for relation in chain.relations() {
        let total_p = residual_p.total();
        let total_q = residual_q.total();
        if total_p != total_q {
            return Err(Error::InternalInvariant(format!(
                "residual masses diverged: {total_p} vs {total_q}"
            )));
        }
        if total_p.is_zero() {
            break;
        }
        let scale_up = Rational::one().checked_div(&total_p)?;
        let norm_p = residual_p.scale(&scale_up);
        let norm_q = residual_q.scale(&scale_up);
        let inner = solve_quotient(&norm_p, &norm_q, relation, strategy)?;
        let step_coupling = inner.coupling.restrict_to(relation)?.scale(&total_p);
        let success = step_coupling.total();

        residual_p = residual_p.sub(&step_coupling.row_marginal_measure())?;
        residual_q = residual_q.sub(&step_coupling.col_marginal_measure())?;
        if !residual_p.is_nonnegative() || !residual_q.is_nonnegative() {
            return Err(Error::InternalInvariant(
                "residual went negative".to_string(),
            ));
        }
        accumulated = accumulated.add(&step_coupling)?;
        steps.push(ChainStep {
            residual_before: total_p,
            success_mass: success,
            accumulated: accumulated.clone(),
        });
    }

    let coupling = complete_subcoupling(&accumulated, p, p_prime)?;
    let last = chain.last();
    let value = Rational::one() - coupling.mass_on(last)?;

    let dual_space = last.dual_sigma();
    let p_coarse = p.coarsen_to(&dual_space)?;
    let q_coarse = p_prime.coarsen_to(&dual_space)?;
    let (dual_value, witness_blocks) = p_coarse.total_variation(&q_coarse)?;
    let witness: Vec<Vec<usize>> = witness_blocks
        .iter()
        .map(|&b| dual_space.sigma().block(b).to_vec())
        .collect();

    if value != dual_value {
        return Err(Error::InternalInvariant(format!(
            "chain value {value} disagrees with dual value {dual_value}"
        )));
    }

    let trace = ChainTrace {
        initial_total: Rational::one(),
        final_residual: residual_p.total(),
        final_dual_value: dual_value.clone(),
        steps,
    };
    let solution = Solution {
        value,
        dual_value,
        witness,
        coupling,
        oracle_value: None,
    };
    Ok((solution, trace))
}

/// Checks the residual-mass ledger of a trace exactly: each step's
/// residual equals the initial total minus all earlier successes,
/// successes are nonnegative, the accumulated totals agree, and the final
/// shortfall is bounded by the dual value over the last relation.
pub fn mass_ledger(trace: &ChainTrace) -> bool {
    let mut expected = trace.initial_total.clone();
    let mut accumulated_total = Rational::zero();
    for step in &trace.steps {
        if step.residual_before != expected {
            return false;
        }
        if step.success_mass.is_negative() {
            return false;
        }
        accumulated_total += &step.success_mass;
        if step.accumulated.total() != accumulated_total {
            return false;
        }
        expected -= &step.success_mass;
    }
    if trace.final_residual != expected {
        return false;
    }
    // shortfall after the whole run is bounded by the dual optimum
    expected <= trace.final_dual_value
}
