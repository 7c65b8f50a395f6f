//! Datalog materialisation with `owl:sameAs` handled by rewriting, and
//! incremental maintenance of the rewritten materialisation under deletion.
//!
//! The main entry points are [`rmaterialise`], which computes a
//! representative map `π` and the normalised facts `I`, and [`bf_delete`],
//! which updates both in place after explicit facts are removed.

pub mod dictionary;
pub mod engine;
pub mod equality;
pub mod error;
pub mod incremental;
pub mod oracle;
pub mod parse;
pub mod program;
pub mod rules;
pub mod store;
pub mod term;

pub use dictionary::Dictionary;
pub use engine::{materialise_axiomatised, rewriting_of, rmaterialise, AxiomStore, DerivationCounter, RStore};
pub use equality::RepMap;
pub use error::{HeightError, ParseError};
pub use incremental::{bf_delete, bf_delete_axiomatised, UpdateOptions, UpdateReport};
pub use parse::{parse_facts, parse_program, write_facts};
pub use program::{equality_axioms, Program, Rule};
pub use store::FactSet;
pub use term::{Atom, Constant, Substitution, Term, Triple, Var, SAME_AS};
