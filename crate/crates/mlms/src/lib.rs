//! The modal logic of mention-some: formulas with the `K[x]` operator
//! ("there is an `x` such that `K φ`"), increasing-domain Kripke semantics,
//! a tableau decision procedure, ∃□-bisimulation, a Hilbert proof checker
//! for the S5 system, and first-order translations.

pub mod bisim;
pub mod formula;
pub mod harness;
pub mod hilbert;
pub mod par;
pub mod parse;
pub mod semantics;
pub mod tableau;
pub mod translate;

pub use formula::{Formula, FormulaError, Var};
pub use parse::{parse_formula, print_formula};
