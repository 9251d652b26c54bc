//! Decision procedure and proof toolkit for intuitionistic epistemic logic.
//!
//! The crate provides formula and sequent syntax, declarative rule tables for
//! the sequent calculi `IELG`, `IELG-`, `IELG+` and `IELG++`, a proof checker,
//! executable proof transformations (weakening, inversion, contraction,
//! K-elimination, cut elimination, monotonization, set-normalization), and a
//! bounded backward-search prover with an independent saturation oracle.

pub mod calculus;
pub mod document;
pub mod formula;
pub mod prover;
pub mod sequent;
pub mod transform;

pub use calculus::{
    backward_instances, check_proof, validate_instance, Annotation, CalculusId, CheckVerdict,
    ProofTree, RuleInstance, RuleName,
};
pub use formula::{subformula_closure, Formula, FormulaSet, ParseError, Syntax};
pub use prover::{
    depth_bound, prove, prove_formula, saturate_oracle, ProveOptions, SearchResult, SearchStats,
};
pub use sequent::{k_prefix_set, Multiset, Sequent, SetSequent};
