//! Strategy trees: inner nodes query a vertex, the left (bugged) and right
//! (clean) subtrees continue the search, leaves name the faulty commit.
//! Confined searches may also end in a "no fault" leaf.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::format::escape;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategyTree {
    Query {
        query: usize,
        bugged: Box<StrategyTree>,
        clean: Box<StrategyTree>,
    },
    /// `faulty: None` is the confined "no bugged vertex" outcome.
    Leaf { faulty: Option<usize> },
}

impl StrategyTree {
    pub fn leaf(v: usize) -> Self {
        StrategyTree::Leaf { faulty: Some(v) }
    }

    pub fn no_fault() -> Self {
        StrategyTree::Leaf { faulty: None }
    }

    pub fn query(q: usize, bugged: StrategyTree, clean: StrategyTree) -> Self {
        StrategyTree::Query {
            query: q,
            bugged: Box::new(bugged),
            clean: Box::new(clean),
        }
    }

    /// Worst-case number of queries.
    pub fn height(&self) -> usize {
        match self {
            StrategyTree::Leaf { .. } => 0,
            StrategyTree::Query { bugged, clean, .. } => 1 + bugged.height().max(clean.height()),
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Option<usize>>) {
        match self {
            StrategyTree::Leaf { faulty } => out.push(*faulty),
            StrategyTree::Query { bugged, clean, .. } => {
                bugged.collect_leaves(out);
                clean.collect_leaves(out);
            }
        }
    }

    /// Number of queries spent before reaching the leaf for `outcome`.
    pub fn depth_of(&self, outcome: Option<usize>) -> Option<usize> {
        match self {
            StrategyTree::Leaf { faulty } => (*faulty == outcome).then_some(0),
            StrategyTree::Query { bugged, clean, .. } => bugged
                .depth_of(outcome)
                .or_else(|| clean.depth_of(outcome))
                .map(|d| d + 1),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }

    /// Graphviz rendering; queried vertices are shown by label.
    pub fn to_dot(&self, dag: &Dag) -> String {
        let mut out = String::from("digraph strategy {\n");
        let mut next = 0usize;
        self.dot_node(dag, &mut out, &mut next);
        out.push_str("}\n");
        out
    }

    fn dot_node(&self, dag: &Dag, out: &mut String, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        match self {
            StrategyTree::Leaf { faulty } => {
                let text = match faulty {
                    Some(v) => escape(&dag.label(*v)),
                    None => "none".to_string(),
                };
                let _ = writeln!(out, "  n{id} [label=\"{text}\", shape=box];");
            }
            StrategyTree::Query { query, bugged, clean } => {
                let _ = writeln!(out, "  n{id} [label=\"{}\"];", escape(&dag.label(*query)));
                let b = bugged.dot_node(dag, out, next);
                let c = clean.dot_node(dag, out, next);
                let _ = writeln!(out, "  n{id} -> n{b} [label=\"bugged\"];");
                let _ = writeln!(out, "  n{id} -> n{c} [label=\"clean\"];");
            }
        }
        id
    }
}

/// Checks a tree against the outcome set `(candidates, no_fault_possible)`:
/// every leaf's outcome must be the only one consistent with the verdicts on
/// its path. This implies each outcome labels exactly one leaf.
pub(crate) fn consistent(
    tree: &StrategyTree,
    dag: &Dag,
    candidates: &FixedBitSet,
    no_fault_possible: bool,
) -> bool {
    match tree {
        StrategyTree::Leaf { faulty: Some(v) } => {
            !no_fault_possible
                && *v < dag.len()
                && candidates.count_ones(..) == 1
                && candidates.contains(*v)
        }
        StrategyTree::Leaf { faulty: None } => {
            no_fault_possible && candidates.is_clear()
        }
        StrategyTree::Query { query, bugged, clean } => {
            if *query >= dag.len() {
                return false;
            }
            let anc = dag.ancestors(*query);
            let mut yes = candidates.clone();
            yes.intersect_with(anc);
            let mut no = candidates.clone();
            no.difference_with(anc);
            consistent(bugged, dag, &yes, false) && consistent(clean, dag, &no, no_fault_possible)
        }
    }
}

/// True iff `tree` is a correct strategy for the marked vertex of `dag`.
pub fn verify_tree(tree: &StrategyTree, dag: &Dag) -> bool {
    match dag.sink() {
        Some(b) => consistent(tree, dag, dag.ancestors(b), false),
        None => false,
    }
}

/// True iff `tree` resolves exactly the given candidate set.
pub fn verify_tree_from(tree: &StrategyTree, dag: &Dag, candidates: &FixedBitSet) -> bool {
    let mut c = candidates.clone();
    c.grow(dag.len());
    consistent(tree, dag, &c, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path5() -> Dag {
        Dag::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4)])
            .unwrap()
            .with_sink(4)
            .unwrap()
    }

    /// The path strategy that queries 2 first, then 1 or 4, then 3.
    fn path_strategy() -> StrategyTree {
        use StrategyTree as T;
        T::query(
            1,
            T::query(0, T::leaf(0), T::leaf(1)),
            T::query(3, T::query(2, T::leaf(2), T::leaf(3)), T::leaf(4)),
        )
    }

    #[test]
    fn path_strategy_verifies() {
        let t = path_strategy();
        assert!(verify_tree(&t, &path5()));
        assert_eq!(t.height(), 3);
        assert_eq!(t.depth_of(Some(0)), Some(2));
        assert_eq!(t.depth_of(Some(4)), Some(2));
    }

    #[test]
    fn swapped_leaves_fail() {
        use StrategyTree as T;
        let t = T::query(
            1,
            T::query(0, T::leaf(1), T::leaf(0)),
            T::query(3, T::query(2, T::leaf(2), T::leaf(3)), T::leaf(4)),
        );
        assert!(!verify_tree(&t, &path5()));
    }

    #[test]
    fn missing_leaf_fails() {
        use StrategyTree as T;
        let t = T::query(
            1,
            T::query(0, T::leaf(0), T::leaf(1)),
            T::query(3, T::leaf(3), T::leaf(4)),
        );
        assert!(!verify_tree(&t, &path5()));
    }

    #[test]
    fn json_shape() {
        use StrategyTree as T;
        let t = T::query(0, T::leaf(0), T::no_fault());
        let s = t.to_json();
        assert_eq!(s, r#"{"query":0,"bugged":{"faulty":0},"clean":{"faulty":null}}"#);
        let back: StrategyTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn dot_has_all_nodes() {
        let dot = path_strategy().to_dot(&path5());
        assert_eq!(dot.matches("shape=box").count(), 5);
        assert_eq!(dot.matches("->").count(), 8);
    }
}
