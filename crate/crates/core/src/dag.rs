//! Immutable commit graph with precomputed ancestor sets.
//!
//! Vertices are dense ids `0..n`. Every vertex counts as its own ancestor, so
//! `count(v) >= 1` always holds.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Per-vertex ancestor bit-vectors, filled in topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestorTable {
    rows: Vec<FixedBitSet>,
    counts: Vec<usize>,
}

impl AncestorTable {
    fn compute(n: usize, parents: &[Vec<usize>], topo: &[usize]) -> Self {
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        for &v in topo {
            let mut row = FixedBitSet::with_capacity(n);
            row.insert(v);
            for &p in &parents[v] {
                row.union_with(&rows[p]);
            }
            rows[v] = row;
        }
        let counts = rows.iter().map(|r| r.count_ones(..)).collect();
        AncestorTable { rows, counts }
    }

    /// The set of ancestors of `v`, including `v`.
    pub fn ancestors(&self, v: usize) -> &FixedBitSet {
        &self.rows[v]
    }

    /// `|v|`: the number of ancestors of `v`.
    pub fn count(&self, v: usize) -> usize {
        self.counts[v]
    }

    pub fn is_ancestor(&self, u: usize, v: usize) -> bool {
        self.rows[v].contains(u)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A validated directed acyclic graph, optionally with a marked bugged vertex.
#[derive(Debug, Clone)]
pub struct Dag {
    n: usize,
    arcs: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    sink: Option<usize>,
    labels: Option<Vec<String>>,
    ancestors: AncestorTable,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.arcs == other.arcs
            && self.sink == other.sink
            && self.labels == other.labels
    }
}

impl Eq for Dag {}

impl Dag {
    /// Builds a graph from `(parent, child)` arcs. Arc order is preserved.
    pub fn new(n: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(arcs.len());
        for &(u, v) in &arcs {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateArc(u, v));
            }
            parents[v].push(u);
            children[u].push(v);
        }
        let topo = kahn_order(n, &parents, &children).ok_or(Error::Cycle)?;
        let ancestors = AncestorTable::compute(n, &parents, &topo);
        Ok(Dag {
            n,
            arcs,
            parents,
            children,
            topo,
            sink: None,
            labels: None,
            ancestors,
        })
    }

    /// Marks `b` as the vertex known to be bugged.
    pub fn with_sink(mut self, b: usize) -> Result<Self> {
        if b >= self.n {
            return Err(Error::VertexOutOfRange { vertex: b, n: self.n });
        }
        self.sink = Some(b);
        Ok(self)
    }

    /// Attaches display labels (one per vertex).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Kahn order with smallest-id tie-break.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn marked(&self) -> Result<usize> {
        self.sink.ok_or(Error::NoMarkedVertex)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of `v`: its label when present, otherwise the id.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    /// Finds the vertex carrying `label`.
    pub fn vertex_by_label(&self, label: &str) -> Option<usize> {
        match &self.labels {
            Some(l) => l.iter().position(|x| x == label),
            None => label.parse().ok().filter(|&v: &usize| v < self.n),
        }
    }

    pub fn ancestor_table(&self) -> &AncestorTable {
        &self.ancestors
    }

    pub fn ancestors(&self, v: usize) -> &FixedBitSet {
        self.ancestors.ancestors(v)
    }

    pub fn ancestor_count(&self, v: usize) -> usize {
        self.ancestors.count(v)
    }

    pub fn indegree(&self, v: usize) -> usize {
        self.parents[v].len()
    }

    pub fn max_indegree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.max_indegree() <= 2
    }

    /// Vertices with no outgoing arc.
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.children[v].is_empty()).collect()
    }

    /// Descendants of `v`, including `v`.
    pub fn descendants(&self, v: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        for w in 0..self.n {
            if self.ancestors.is_ancestor(v, w) {
                out.insert(w);
            }
        }
        out
    }

    /// Checks whether `order` lists every vertex once with arcs pointing forward.
    pub fn is_topological(&self, order: &[usize]) -> bool {
        if order.len() != self.n {
            return false;
        }
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in order.iter().enumerate() {
            if v >= self.n || pos[v] != usize::MAX {
                return false;
            }
            pos[v] = i;
        }
        self.arcs.iter().all(|&(u, v)| pos[u] < pos[v])
    }

    /// Induced subgraph on `keep`, renumbered in increasing id order.
    /// Returns the graph and the original id of each new vertex. Labels are
    /// carried over; an unlabelled source gets its original ids as labels.
    pub fn induced(&self, keep: &FixedBitSet) -> (Dag, Vec<usize>) {
        let old: Vec<usize> = keep.ones().filter(|&v| v < self.n).collect();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &v) in old.iter().enumerate() {
            new_id[v] = i;
        }
        let arcs = self
            .arcs
            .iter()
            .filter(|&&(u, v)| new_id[u] != usize::MAX && new_id[v] != usize::MAX)
            .map(|&(u, v)| (new_id[u], new_id[v]))
            .collect();
        let labels = old.iter().map(|&v| self.label(v)).collect();
        let mut dag = Dag::new(old.len(), arcs)
            .expect("induced subgraph of a valid DAG is valid")
            .with_labels(labels)
            .expect("label count matches");
        if let Some(b) = self.sink.filter(|&b| new_id[b] != usize::MAX) {
            dag.sink = Some(new_id[b]);
        }
        (dag, old)
    }
}

fn kahn_order(n: usize, parents: &[Vec<usize>], children: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                heap.push(Reverse(c));
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Free-function form of [`Dag::ancestor_table`].
pub fn ancestor_table(dag: &Dag) -> &AncestorTable {
    dag.ancestor_table()
}

/// Free-function form of [`Dag::max_indegree`].
pub fn max_indegree(dag: &Dag) -> usize {
    dag.max_indegree()
}
