use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph contains a directed cycle")]
    Cycle,

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(usize, usize),

    #[error("vertex {vertex} out of range (graph has {n} vertices)")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("graph has no marked bugged vertex")]
    NoMarkedVertex,

    #[error("vertex {0} is not a live candidate")]
    NotLive(usize),

    #[error("verdict on vertex {query} leaves no candidate: oracle answers are inconsistent")]
    Inconsistent { query: usize },

    #[error("at least two live candidates are required to pick a query, found {0}")]
    TooFewCandidates(usize),

    #[error("{candidates} outcomes exceed the exact-solve cap of {cap}")]
    CapExceeded { candidates: usize, cap: usize },

    #[error("memo table exceeded {0} entries")]
    MemoLimit(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("order is not a topological order of the graph")]
    InvalidOrder,

    #[error("input is not comb-labelled: {0}")]
    NotCombLabelled(String),

    #[error("clause {clause} has {len} literals, expected 2 or 3")]
    ClauseSize { clause: usize, len: usize },

    #[error("variable {var} occurs in {count} clauses, at most 3 allowed")]
    VariableOccurrences { var: usize, count: usize },

    #[error("literal {literal} occurs {count} times; run pure-literal preprocessing first")]
    Unpreprocessed { literal: i32, count: usize },

    #[error("assignment does not satisfy the formula")]
    NotSatisfying,

    #[error("malformed strategy tree: {0}")]
    MalformedTree(String),
}
