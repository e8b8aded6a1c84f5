//! Regression search on commit DAGs: find the commit that introduced a bug
//! with as few "is this commit bugged?" queries as possible.
//!
//! The crate provides the graph model, the `git bisect` and golden bisect
//! pickers, exact minimax solvers, the graph families used to probe them, and
//! the reduction from bounded SAT to confined search.

pub mod bounds;
pub mod claims;
pub mod dag;
pub mod error;
pub mod format;
pub mod generators;
pub mod optimal;
pub mod reduction;
pub mod state;
pub mod strategies;
pub mod tree;

pub use dag::{ancestor_table, max_indegree, AncestorTable, Dag};
pub use error::{Error, Result};
pub use format::{export_dot, parse_dag, write_dag, DotOptions};
pub use state::{apply_verdict, prune_to_ancestors, score, BisectState, Verdict};
pub use strategies::{
    boundary_sets, build_strategy_tree, git_bisect_pick, golden_bisect_pick, golden_threshold,
    run_session, worst_case_queries, BoundarySets, GitBisect, GoldenBisect, Picker, StrategyKind,
};
pub use tree::{verify_tree, StrategyTree};
