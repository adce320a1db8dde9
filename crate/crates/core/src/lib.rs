//! Nested weighted automata with limit-average masters and sum slaves.
//!
//! The crate evaluates deterministic automata exactly on lasso words, checks width bounds, and
//! decides threshold emptiness and deterministic universality for automata of bounded width.

pub mod config;
pub mod corpus;
pub mod decide;
pub mod determinize;
pub mod error;
pub(crate) mod graph;
pub mod mca;
pub mod meanpayoff;
pub mod model;
pub mod oracle;
pub mod par;
pub mod random;
pub mod reduce;
pub mod starcond;
pub mod text;
pub mod value;
pub mod width;

pub use config::{config_initials, config_successors, count_configurations, ConfigEdge, Configuration, Slot};
pub use error::{Error, Result};
pub use model::{Alphabet, Automaton, LassoWord, Letter, Nwa, State, Transition, WeightedAutomaton};
pub use oracle::{enumerate_lasso_infimum, evaluate_lasso, run_prefix};
pub use par::Exec;
pub use value::{finite_value, limavg_periodic, Threshold, ValueFn, ValueResult};
pub use width::{has_width, minimal_width};
