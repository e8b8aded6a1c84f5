use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::dag::Dag;
use crate::error::{Error, Result};

/// Answer to a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bugged,
    Clean,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bugged => "bugged",
            Verdict::Clean => "clean",
        })
    }
}

/// A live search: the graph plus the set of commits that may still be faulty.
///
/// Candidate sets are always of the form `anc(x) \ (anc(c1) ∪ ... ∪ anc(ck))`
/// for one bugged-verified `x` and clean-verified `ci`.
#[derive(Debug, Clone)]
pub struct BisectState<'a> {
    dag: &'a Dag,
    candidates: FixedBitSet,
    n_live: usize,
}

impl PartialEq for BisectState<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.dag, other.dag) && self.candidates == other.candidates
    }
}

impl Eq for BisectState<'_> {}

impl<'a> BisectState<'a> {
    /// State restricted to the ancestors of `b`.
    pub fn new(dag: &'a Dag, b: usize) -> Result<Self> {
        if b >= dag.len() {
            return Err(Error::VertexOutOfRange { vertex: b, n: dag.len() });
        }
        let candidates = dag.ancestors(b).clone();
        let n_live = dag.ancestor_count(b);
        Ok(BisectState { dag, candidates, n_live })
    }

    /// State on the marked bugged vertex of `dag`.
    pub fn for_marked(dag: &'a Dag) -> Result<Self> {
        Self::new(dag, dag.marked()?)
    }

    /// Arbitrary candidate set; used by solvers and tests.
    pub fn from_candidates(dag: &'a Dag, candidates: FixedBitSet) -> Self {
        let mut candidates = candidates;
        candidates.grow(dag.len());
        let n_live = candidates.count_ones(..);
        BisectState { dag, candidates, n_live }
    }

    pub fn dag(&self) -> &'a Dag {
        self.dag
    }

    pub fn candidates(&self) -> &FixedBitSet {
        &self.candidates
    }

    pub fn n_live(&self) -> usize {
        self.n_live
    }

    pub fn is_live(&self, v: usize) -> bool {
        self.candidates.contains(v)
    }

    pub fn live(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidates.ones()
    }

    /// The identified faulty commit, once a single candidate remains.
    pub fn resolved(&self) -> Option<usize> {
        if self.n_live == 1 {
            self.candidates.ones().next()
        } else {
            None
        }
    }

    /// `|anc(v) ∩ candidates|`.
    pub fn live_ancestors(&self, v: usize) -> usize {
        self.dag.ancestors(v).intersection_count(&self.candidates)
    }

    /// `min(a, n_live - a)` with `a` the live ancestor count of a live `v`.
    pub fn score(&self, v: usize) -> Result<usize> {
        if v >= self.dag.len() || !self.is_live(v) {
            return Err(Error::NotLive(v));
        }
        let a = self.live_ancestors(v);
        Ok(a.min(self.n_live - a))
    }

    /// Live parents of `v` in the induced live subgraph.
    pub fn live_parents(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.dag
            .parents(v)
            .iter()
            .copied()
            .filter(|&p| self.candidates.contains(p))
    }

    /// Candidates left if `q` receives `verdict`, without checking emptiness.
    pub fn split(&self, q: usize, verdict: Verdict) -> FixedBitSet {
        let mut next = self.candidates.clone();
        match verdict {
            Verdict::Bugged => next.intersect_with(self.dag.ancestors(q)),
            Verdict::Clean => next.difference_with(self.dag.ancestors(q)),
        }
        next
    }

    /// Applies a query answer. An empty result means the oracle contradicted
    /// an earlier answer and is reported as an error.
    pub fn apply_verdict(&self, q: usize, verdict: Verdict) -> Result<BisectState<'a>> {
        if q >= self.dag.len() {
            return Err(Error::VertexOutOfRange { vertex: q, n: self.dag.len() });
        }
        let candidates = self.split(q, verdict);
        let n_live = candidates.count_ones(..);
        if n_live == 0 {
            return Err(Error::Inconsistent { query: q });
        }
        Ok(BisectState { dag: self.dag, candidates, n_live })
    }

    /// Re-prunes to the ancestors of `b`. Idempotent.
    pub fn prune_to_ancestors(&self, b: usize) -> Result<BisectState<'a>> {
        self.apply_verdict(b, Verdict::Bugged)
    }
}

/// Removes every non-ancestor of `b`.
pub fn prune_to_ancestors(dag: &Dag, b: usize) -> Result<BisectState<'_>> {
    BisectState::new(dag, b)
}

/// Score of `v` relative to the live candidates.
pub fn score(state: &BisectState<'_>, v: usize) -> Result<usize> {
    state.score(v)
}

/// See [`BisectState::apply_verdict`].
pub fn apply_verdict<'a>(
    state: &BisectState<'a>,
    q: usize,
    verdict: Verdict,
) -> Result<BisectState<'a>> {
    state.apply_verdict(q, verdict)
}
