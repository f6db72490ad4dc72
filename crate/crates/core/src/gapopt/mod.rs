//! Optimizers for the gap functionals and the revenue program.

pub mod mechanism_lp;
pub mod menu_lp;
pub mod relax;
pub mod search;
pub mod simplex;

pub use mechanism_lp::{optimal_mechanism_lp, optimal_mechanism_lp_capped, OptimalMechanism};
pub use menu_lp::{menu_gap_lp, menu_gap_lp_capped, LpSolution};
pub use relax::{lagrel_chain, lagrel_coefficients, lagrel_value, RelaxationReport};
pub use search::{
    align_gap_bruteforce, align_gap_search, align_gap_search_with, AlignProblem, SearchResult,
};
pub use simplex::{LinearProgram, LpResult, LpStatus};
