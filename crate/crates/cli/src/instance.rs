//! Instance file schema, parsing, and canonical emission.
//!
//! An instance is a JSON object:
//!
//! ```json
//! {
//!   "atoms": ["a", "b", "c", "d"],
//!   "sigma": "powerset",
//!   "relation": { "classes": [[0, 1], [2, 3]] },
//!   "P": ["1/4", "1/4", "1/4", "1/4"],
//!   "Pprime": ["1/2", "0", "0", "1/2"]
//! }
//! ```
//!
//! `sigma` is either the string `"powerset"` or a partition of atom
//! indices (the sigma-algebra's atoms). Relations are given by `classes`
//! or by `pairs` plus a `close` flag. `P` and `Pprime` list one rational
//! string per sigma block. Optional fields: `chain` (a list of relations,
//! innermost first) and `sets` (atom-index sets for the `galois`
//! subcommand).

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use eqcoupling::chain::Chain;
use eqcoupling::measure::Measure;
use eqcoupling::rational::Rational;
use eqcoupling::relations::{EquivalenceRelation, SetFamily};
use eqcoupling::space::GroundSpace;

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub atoms: Vec<String>,
    pub sigma: SigmaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationSpec>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<String>>,
    #[serde(rename = "Pprime", default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<RelationSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SigmaSpec {
    Keyword(String),
    Partition(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RelationSpec {
    Classes {
        classes: Vec<Vec<usize>>,
    },
    Pairs {
        pairs: Vec<(usize, usize)>,
        #[serde(default)]
        close: bool,
    },
}

/// Domain objects compiled from a parsed instance file.
#[derive(Debug)]
pub struct CompiledInstance {
    pub space: Arc<GroundSpace>,
    pub relation: Option<EquivalenceRelation>,
    pub p: Option<Measure>,
    pub p_prime: Option<Measure>,
    pub chain: Option<Chain>,
    pub sets: Option<SetFamily>,
}

pub fn parse_instance(bytes: &[u8]) -> Result<InstanceFile, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::invalid(format!("instance file: {e}")))
}

/// Canonical emission; `emit(parse(x))` is byte-identical for files
/// already in canonical form.
pub fn emit_instance(file: &InstanceFile) -> String {
    let mut text = serde_json::to_string_pretty(file).expect("schema serializes");
    text.push('\n');
    text
}

fn parse_mass_vector(
    field: &str,
    strings: &[String],
    space: &Arc<GroundSpace>,
) -> Result<Measure, CliError> {
    if strings.len() != space.num_blocks() {
        return Err(CliError::invalid(format!(
            "{field}: expected {} entries (one per sigma block), got {}",
            space.num_blocks(),
            strings.len()
        )));
    }
    let mut mass = Vec::with_capacity(strings.len());
    for (i, s) in strings.iter().enumerate() {
        let value =
            Rational::from_str(s).map_err(|e| CliError::invalid(format!("{field}[{i}]: {e}")))?;
        if value.is_negative() {
            return Err(CliError::invalid(format!(
                "{field}[{i}]: negative mass {value}"
            )));
        }
        mass.push(value);
    }
    let total: Rational = mass.iter().sum();
    if total != Rational::one() {
        return Err(CliError::invalid(format!(
            "{field}: masses sum to {total}, expected 1"
        )));
    }
    Measure::probability(Arc::clone(space), mass)
        .map_err(|e| CliError::invalid(format!("{field}: {e}")))
}

fn compile_relation(
    field: &str,
    spec: &RelationSpec,
    space: &Arc<GroundSpace>,
) -> Result<EquivalenceRelation, CliError> {
    match spec {
        RelationSpec::Classes { classes } => {
            EquivalenceRelation::from_classes(Arc::clone(space), classes.clone())
                .map_err(|e| CliError::invalid(format!("{field}: {e}")))
        }
        RelationSpec::Pairs { pairs, close } => {
            EquivalenceRelation::from_pairs(Arc::clone(space), pairs, *close)
                .map_err(|e| CliError::invalid(format!("{field}: {e}")))
        }
    }
}

pub fn compile_instance(file: &InstanceFile) -> Result<CompiledInstance, CliError> {
    if file.atoms.is_empty() {
        return Err(CliError::invalid("atoms: at least one atom is required"));
    }
    let space = match &file.sigma {
        SigmaSpec::Keyword(word) if word == "powerset" => GroundSpace::full(file.atoms.clone()),
        SigmaSpec::Keyword(word) => {
            return Err(CliError::invalid(format!(
                "sigma: unknown keyword '{word}' (expected \"powerset\" or a partition)"
            )));
        }
        SigmaSpec::Partition(blocks) => GroundSpace::new(file.atoms.clone(), blocks.clone())
            .map_err(|e| CliError::invalid(format!("sigma: {e}")))?,
    };
    let relation = file
        .relation
        .as_ref()
        .map(|spec| compile_relation("relation", spec, &space))
        .transpose()?;
    let p = file
        .p
        .as_ref()
        .map(|masses| parse_mass_vector("P", masses, &space))
        .transpose()?;
    let p_prime = file
        .p_prime
        .as_ref()
        .map(|masses| parse_mass_vector("Pprime", masses, &space))
        .transpose()?;
    let chain = match &file.chain {
        Some(specs) => {
            let relations = specs
                .iter()
                .enumerate()
                .map(|(i, spec)| compile_relation(&format!("chain[{i}]"), spec, &space))
                .collect::<Result<Vec<_>, _>>()?;
            Some(Chain::new(relations).map_err(|e| CliError::invalid(format!("chain: {e}")))?)
        }
        None => None,
    };
    let sets = match &file.sets {
        Some(raw) => {
            let sets = raw
                .iter()
                .map(|s| s.iter().copied().collect())
                .collect::<Vec<_>>();
            Some(
                SetFamily::new(Arc::clone(&space), sets)
                    .map_err(|e| CliError::invalid(format!("sets: {e}")))?,
            )
        }
        None => None,
    };
    Ok(CompiledInstance {
        space,
        relation,
        p,
        p_prime,
        chain,
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "atoms": ["a", "b"],
  "sigma": "powerset",
  "P": ["1/2", "1/2"],
  "Pprime": ["3/4", "1/4"]
}
"#;

    #[test]
    fn minimal_instance_parses() {
        let file = parse_instance(MINIMAL.as_bytes()).unwrap();
        let compiled = compile_instance(&file).unwrap();
        assert_eq!(compiled.space.num_atoms(), 2);
        assert!(compiled.p.unwrap().is_probability());
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let file = parse_instance(MINIMAL.as_bytes()).unwrap();
        let emitted = emit_instance(&file);
        let reparsed = parse_instance(emitted.as_bytes()).unwrap();
        assert_eq!(emit_instance(&reparsed), emitted);
    }

    #[test]
    fn non_normalized_masses_are_rejected_with_position() {
        let text = r#"{"atoms":["a","b"],"sigma":"powerset","P":["1/2","1/4"]}"#;
        let file = parse_instance(text.as_bytes()).unwrap();
        let err = compile_instance(&file).unwrap_err();
        assert!(err.to_string().contains("P: masses sum to 3/4"));
    }

    #[test]
    fn negative_masses_are_rejected_with_position() {
        let text = r#"{"atoms":["a","b"],"sigma":"powerset","P":["-1/2","3/2"]}"#;
        let file = parse_instance(text.as_bytes()).unwrap();
        let err = compile_instance(&file).unwrap_err();
        assert!(err.to_string().contains("P[0]"));
    }

    #[test]
    fn bad_rational_is_rejected_with_position() {
        let text = r#"{"atoms":["a","b"],"sigma":"powerset","Pprime":["1/0","1"]}"#;
        let file = parse_instance(text.as_bytes()).unwrap();
        let err = compile_instance(&file).unwrap_err();
        assert!(err.to_string().contains("Pprime[0]"));
    }

    #[test]
    fn overlapping_sigma_blocks_are_rejected() {
        let text = r#"{"atoms":["a","b"],"sigma":[[0,1],[1]]}"#;
        let file = parse_instance(text.as_bytes()).unwrap();
        let err = compile_instance(&file).unwrap_err();
        assert!(err.to_string().contains("sigma"));
    }

    #[test]
    fn pairs_relation_without_closure_must_be_transitive() {
        let text = r#"{
            "atoms": ["a", "b", "c"],
            "sigma": "powerset",
            "relation": {"pairs": [[0,1],[1,0],[1,2],[2,1]], "close": false}
        }"#;
        let file = parse_instance(text.as_bytes()).unwrap();
        let err = compile_instance(&file).unwrap_err();
        assert!(err.to_string().contains("relation"));

        let closed = r#"{
            "atoms": ["a", "b", "c"],
            "sigma": "powerset",
            "relation": {"pairs": [[0,1],[1,2]], "close": true}
        }"#;
        let file = parse_instance(closed.as_bytes()).unwrap();
        let compiled = compile_instance(&file).unwrap();
        assert_eq!(compiled.relation.unwrap().num_classes(), 1);
    }
}
