//! Exact optimal couplings for equivalence relations on finite
//! measurable spaces, and their total-variation duals.
//!
//! Given two probability measures `P`, `P'` on a finite space and a
//! measurable equivalence relation `E`, the crate computes
//!
//! * the smallest failure probability `1 - coupling(E)` over all
//!   couplings of `P` and `P'` (with an explicit optimal coupling),
//! * the largest deviation `|P(A) - P'(A)|` over sets `A` measurable and
//!   saturated under `E`, and
//! * an independent maximum-flow certificate of the same optimum,
//!
//! all in exact rational arithmetic, so the equality of the three numbers
//! is checked as an identity rather than up to tolerance. An iterative
//! solver handles increasing chains of relations, and the
//! [`applications`] module builds orbit, sequence-space, tilting, and
//! Poisson-tail instances.
//!
//! ```
//! use eqcoupling::{
//!     solve_quotient, verify_strong_duality, CouplingStrategy, EquivalenceRelation,
//!     GroundSpace, Measure, Rational, Verdict,
//! };
//!
//! let space = GroundSpace::full(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
//! let relation =
//!     EquivalenceRelation::from_classes(space.clone(), vec![vec![0, 1], vec![2, 3]])?;
//! let p = Measure::uniform(&space);
//! let q = Measure::point_mass(&space, 0)?;
//!
//! let solution = solve_quotient(&p, &q, &relation, CouplingStrategy::Product)?;
//! assert_eq!(solution.value, Rational::of(1, 2));
//! assert!(solution.coupling.is_coupling_of(&p, &q));
//!
//! let report = verify_strong_duality(&p, &q, &relation)?;
//! assert_eq!(report.verdict, Verdict::Pass);
//! # Ok::<(), eqcoupling::Error>(())
//! ```

pub mod applications;
pub mod chain;
pub mod coupling;
pub mod error;
pub mod measure;
pub mod rational;
pub mod relations;
pub mod sampling;
pub mod solver;
pub mod space;

pub use crate::chain::{mass_ledger, solve_chain, Chain, ChainStep, ChainTrace};
pub use crate::coupling::{complete_subcoupling, Coupling, CouplingKind};
pub use crate::error::{Error, Result};
pub use crate::measure::{JordanDecomposition, Measure, MeasureKind};
pub use crate::rational::Rational;
pub use crate::relations::{EquivalenceRelation, SetFamily};
pub use crate::solver::{
    couple_within_classes, flow_oracle, optimal_value, solve_quotient, verify_strong_duality,
    CouplingStrategy, DualityReport, Solution, Verdict,
};
pub use crate::space::{GroundSpace, Partition};
