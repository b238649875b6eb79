//! Reachability analysis for linear hybrid automata with variable-set
//! separation: variables are split into discrete, clock and remaining
//! sub-spaces and flowpipes are computed per sub-space in lockstep.

pub mod automaton;
pub mod decomposition;
pub mod geometry;
pub mod linalg;
pub mod reach;

pub use automaton::{
    parse_model, validate, AffineFlow, AffineReset, DecompositionMode, HybridAutomaton, Jump, Location, Model,
    ParseError, ReachSettings, UnsafeSpec,
};
pub use decomposition::{classify, decompose, projective_of, DecomposedAutomaton, SubspaceTag, VariablePartition};
pub use geometry::{BoxSet, Condition, HPolytope, Representation, StateSet, SupportFunction, TemplateDirections};
pub use linalg::{Matrix, Vector};
pub use reach::{analyze, analyze_with_cap, FlowpipeSegment, ReachError, ReachResult, ReachStats, Verdict};
