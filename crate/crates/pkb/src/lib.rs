//! Analysis of conditional probabilistic knowledge bases.
//!
//! A knowledge base is a list of constraints `(A | B)[d]` — "if B then A
//! with probability d" — over propositional variables with finite domains.
//! This crate decides whether such a base has a model (a probability
//! distribution over the complete assignments satisfying every constraint),
//! quantifies by how much an inconsistent base misses one, attributes the
//! blame to individual constraints, and emits minimally adjusted repairs.
//!
//! The pieces:
//!
//! - [`logic`]: variables, worlds, formulas, model sets.
//! - [`kb`] / [`parser`]: the constraint data model and its text format.
//! - [`feasibility`]: consistency via linear feasibility, witness
//!   distributions, minimal inconsistent subsets.
//! - [`measure`]: the deviation-minimization inconsistency measure, its
//!   normalization, repairs, and an independent lattice oracle.
//! - [`shapley`]: exact Shapley values and per-constraint blame.
//! - [`report`]: the JSON report schema used by the command-line tool.
//!
//! ```
//! use pkb::{inc_star, parse_kb, shapley_inconsistency, SolverConfig};
//!
//! let kb = parse_kb("var A\nvar B\n(A | B)[1]\n(B)[1]\n(A)[0]").unwrap();
//! let cfg = SolverConfig::default();
//! let measured = inc_star(&kb, &cfg).unwrap();
//! assert!((measured.value - 1.0).abs() < 1e-6);
//! let blame = shapley_inconsistency(&kb, &cfg).unwrap();
//! assert!(blame.values.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-3));
//! ```

mod error;
pub mod feasibility;
pub mod kb;
pub mod logic;
pub mod measure;
pub mod parser;
pub mod random;
pub mod report;
pub mod shapley;
mod simplex;

pub use error::{Error, Result};
pub use feasibility::{
    build_cs, is_consistent, is_free, minimal_inconsistent_subsets,
    minimal_inconsistent_subsets_with_cap, Distribution, LinearSystem, MisReport,
    DEFAULT_SUBSET_CAP,
};
pub use kb::{check_self_consistency, serialize_kb, CompiledKb, Constraint, KnowledgeBase};
pub use logic::{
    enumerate_worlds, models, satisfies, Formula, Signature, Variable, World, WorldSet,
    DEFAULT_WORLD_CAP,
};
pub use measure::{
    characteristic_inconsistency, conditional_deviation, grid_oracle, grid_oracle_with_budget,
    inc_star, inc_star_normalized, repair, total_deviation, DeviationVector, MeasureResult,
    SolverConfig, SolverDiagnostics,
};
pub use parser::{parse_kb, parse_kb_with, ParseOptions};
pub use report::{
    constraint_label, round_sig12, witness_entries, AnalysisReport, ConstraintReport, Diagnostics,
    WitnessEntry,
};
pub use shapley::{
    shapley_generic, shapley_inconsistency, shapley_inconsistency_with_threads, CoalitionGame,
    ShapleyReport, DEFAULT_PLAYER_CAP,
};
