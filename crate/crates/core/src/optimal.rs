//! Exact minimax solvers and the constructive optimal strategies.
//!
//! Outcomes are reindexed into a `u64` mask. For a plain search the outcomes
//! are the candidates; a confined search adds one extra bit for "no faulty
//! vertex", which no query mask ever contains.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;

use crate::bounds::ceil_log2;
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::generators::CombLabelling;
use crate::tree::StrategyTree;

pub const DEFAULT_CAP: usize = 24;
pub const DEFAULT_MEMO_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest outcome count accepted.
    pub cap: usize,
    /// Memo entries allowed before the solve is aborted.
    pub memo_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { cap: DEFAULT_CAP, memo_limit: DEFAULT_MEMO_LIMIT }
    }
}

impl SolverConfig {
    pub fn with_cap(cap: usize) -> Self {
        SolverConfig { cap, ..Default::default() }
    }
}

/// Mask-level solver shared by both problem variants.
struct Solver {
    /// Distinct useful query masks, each with its smallest representative vertex.
    queries: Vec<(u64, usize)>,
    /// Outcome bit -> vertex (`None` for the no-fault bit).
    outcomes: Vec<Option<usize>>,
    memo: HashMap<u64, u8>,
    memo_limit: usize,
}

impl Solver {
    fn new(
        dag: &Dag,
        candidates: &[usize],
        no_fault: bool,
        config: SolverConfig,
    ) -> Result<Self> {
        let count = candidates.len() + usize::from(no_fault);
        if count > config.cap.min(64) {
            return Err(Error::CapExceeded { candidates: count, cap: config.cap.min(64) });
        }
        let full = full_mask(count);
        let mut seen = HashSet::new();
        let mut queries = Vec::new();
        for v in 0..dag.len() {
            let anc = dag.ancestors(v);
            let mut m = 0u64;
            for (bit, &c) in candidates.iter().enumerate() {
                if anc.contains(c) {
                    m |= 1 << bit;
                }
            }
            if m != 0 && m != full && seen.insert(m) {
                queries.push((m, v));
            }
        }
        let mut outcomes: Vec<Option<usize>> = candidates.iter().map(|&c| Some(c)).collect();
        if no_fault {
            outcomes.push(None);
        }
        Ok(Solver {
            queries,
            outcomes,
            memo: HashMap::new(),
            memo_limit: config.memo_limit,
        })
    }

    fn full(&self) -> u64 {
        full_mask(self.outcomes.len())
    }

    /// Non-trivial splits of `s`, deduplicated by the unordered pair and
    /// ordered from most to least balanced.
    fn splits(&self, s: u64) -> Vec<(u64, u64, usize)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &(m, v) in &self.queries {
            let a = s & m;
            let b = s & !m;
            if a == 0 || b == 0 {
                continue;
            }
            if seen.insert(a.min(b)) {
                out.push((a, b, v));
            }
        }
        out.sort_by_key(|&(a, b, _)| a.count_ones().max(b.count_ones()));
        out
    }

    fn opt(&mut self, s: u64) -> Result<u8> {
        let size = s.count_ones() as usize;
        if size <= 1 {
            return Ok(0);
        }
        if let Some(&v) = self.memo.get(&s) {
            return Ok(v);
        }
        let lb = ceil_log2(size) as u8;
        let mut best = u8::MAX;
        for (a, b, _) in self.splits(s) {
            let (big, small) = if a.count_ones() >= b.count_ones() { (a, b) } else { (b, a) };
            if 1 + ceil_log2(big.count_ones() as usize) as u8 >= best {
                continue;
            }
            let vb = self.opt(big)?;
            if 1 + vb >= best {
                continue;
            }
            let vs = self.opt(small)?;
            best = best.min(1 + vb.max(vs));
            if best == lb {
                break;
            }
        }
        debug_assert!(best != u8::MAX, "a non-trivial split always exists");
        if self.memo.len() >= self.memo_limit {
            return Err(Error::MemoLimit(self.memo_limit));
        }
        self.memo.insert(s, best);
        Ok(best)
    }

    fn tree(&mut self, s: u64) -> Result<StrategyTree> {
        if s.count_ones() <= 1 {
            let bit = s.trailing_zeros() as usize;
            return Ok(match self.outcomes.get(bit).copied().flatten() {
                Some(v) => StrategyTree::leaf(v),
                None => StrategyTree::no_fault(),
            });
        }
        let target = self.opt(s)?;
        for (a, b, v) in self.splits(s) {
            if 1 + self.opt(a)?.max(self.opt(b)?) == target {
                // `a` is the side inside the queried vertex's ancestry.
                return Ok(StrategyTree::query(v, self.tree(a)?, self.tree(b)?));
            }
        }
        unreachable!("optimal value is attained by some split")
    }
}

fn full_mask(count: usize) -> u64 {
    if count >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

fn marked_candidates(dag: &Dag) -> Result<Vec<usize>> {
    Ok(dag.ancestors(dag.marked()?).ones().collect())
}

/// Minimax number of queries for the marked vertex of `dag`. Any vertex may
/// be queried, including eliminated ones.
pub fn optimal_queries(dag: &Dag) -> Result<usize> {
    optimal_queries_with(dag, SolverConfig::default())
}

pub fn optimal_queries_with(dag: &Dag, config: SolverConfig) -> Result<usize> {
    let mut s = Solver::new(dag, &marked_candidates(dag)?, false, config)?;
    let full = s.full();
    s.opt(full).map(usize::from)
}

/// One optimal tree; its height equals [`optimal_queries`].
pub fn optimal_strategy(dag: &Dag) -> Result<StrategyTree> {
    optimal_strategy_with(dag, SolverConfig::default())
}

pub fn optimal_strategy_with(dag: &Dag, config: SolverConfig) -> Result<StrategyTree> {
    let mut s = Solver::new(dag, &marked_candidates(dag)?, false, config)?;
    let full = s.full();
    s.tree(full)
}

/// Optimum for a confined instance: the candidates are the non-innocent
/// vertices, plus the possibility that none is faulty.
pub fn crsp_optimal_queries(dag: &Dag, innocent: &FixedBitSet) -> Result<usize> {
    crsp_optimal_queries_with(dag, innocent, SolverConfig::default())
}

pub fn crsp_optimal_queries_with(
    dag: &Dag,
    innocent: &FixedBitSet,
    config: SolverConfig,
) -> Result<usize> {
    let cands = non_innocent(dag, innocent);
    let mut s = Solver::new(dag, &cands, true, config)?;
    let full = s.full();
    s.opt(full).map(usize::from)
}

pub fn crsp_optimal_strategy(dag: &Dag, innocent: &FixedBitSet) -> Result<StrategyTree> {
    let cands = non_innocent(dag, innocent);
    let mut s = Solver::new(dag, &cands, true, SolverConfig::default())?;
    let full = s.full();
    s.tree(full)
}

fn non_innocent(dag: &Dag, innocent: &FixedBitSet) -> Vec<usize> {
    (0..dag.len()).filter(|&v| !innocent.contains(v)).collect()
}

/// Plain minimax recursion without memo or pruning, over bit sets. Only for
/// small inputs; used as a reference.
pub fn brute_force_optimal(dag: &Dag) -> Result<usize> {
    let b = dag.marked()?;
    Ok(brute(dag, dag.ancestors(b), false))
}

/// Reference for the confined variant.
pub fn brute_force_crsp_optimal(dag: &Dag, innocent: &FixedBitSet) -> usize {
    let mut s = FixedBitSet::with_capacity(dag.len());
    for v in non_innocent(dag, innocent) {
        s.insert(v);
    }
    brute(dag, &s, true)
}

fn brute(dag: &Dag, s: &FixedBitSet, flag: bool) -> usize {
    let outcomes = s.count_ones(..) + usize::from(flag);
    if outcomes <= 1 {
        return 0;
    }
    let mut best = usize::MAX;
    for v in 0..dag.len() {
        let mut yes = s.clone();
        yes.intersect_with(dag.ancestors(v));
        let mut no = s.clone();
        no.difference_with(dag.ancestors(v));
        let ny = yes.count_ones(..);
        let nn = no.count_ones(..) + usize::from(flag);
        if ny == 0 || nn == 0 {
            continue;
        }
        let val = 1 + brute(dag, &yes, false).max(brute(dag, &no, flag));
        best = best.min(val);
    }
    best
}

/// Recursive halving along the comb path: query `u_ceil(len/2)` of the current
/// range, and `v` itself once a single pair remains.
pub fn comb_strategy(dag: &Dag, labelling: &CombLabelling) -> Result<StrategyTree> {
    labelling.check(dag)?;
    fn rec(l: &CombLabelling, lo: usize, hi: usize) -> StrategyTree {
        if hi - lo == 1 {
            let v = l.base[lo];
            return StrategyTree::query(v, StrategyTree::leaf(v), StrategyTree::leaf(l.comb[lo]));
        }
        let mid = lo + (hi - lo).div_ceil(2) - 1;
        StrategyTree::query(l.comb[mid], rec(l, lo, mid + 1), rec(l, mid + 1, hi))
    }
    Ok(rec(labelling, 0, labelling.base.len()))
}

/// Which Fibonacci family a strategy is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FibKind {
    /// `F_i`.
    Tree,
    /// `F'_i`: `F_i` with one extra sink below it.
    Prime,
}

/// Strategy that queries the sink of the larger subtree, recursing into
/// `F_{i-1}` on bugged and into `F'_{i-2}` on clean. Vertex ids follow
/// [`crate::generators::gen_fibonacci`].
pub fn fibonacci_strategy(kind: FibKind, i: usize) -> Result<StrategyTree> {
    if i < 1 {
        return Err(Error::InvalidParameter("fibonacci index must be >= 1".into()));
    }
    let sizes = crate::generators::fibonacci_sizes(i);
    Ok(match kind {
        FibKind::Tree => fib_tree(&sizes, i, 0),
        FibKind::Prime => fib_prime_tree(&sizes, i, 0, sizes[i]),
    })
}

fn fib_tree(sizes: &[usize], i: usize, off: usize) -> StrategyTree {
    if i == 1 {
        return StrategyTree::leaf(off);
    }
    let left = sizes[i - 1];
    let sink = off + left + sizes[i - 2];
    StrategyTree::query(
        off + left - 1,
        fib_tree(sizes, i - 1, off),
        fib_prime_tree(sizes, i - 2, off + left, sink),
    )
}

/// `F_j` at `off` followed by an extra sink `sink`.
fn fib_prime_tree(sizes: &[usize], j: usize, off: usize, sink: usize) -> StrategyTree {
    if j == 0 {
        return StrategyTree::leaf(sink);
    }
    StrategyTree::query(
        off + sizes[j] - 1,
        fib_tree(sizes, j, off),
        StrategyTree::leaf(sink),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::*;
    use crate::tree::verify_tree;

    #[test]
    fn small_families() {
        assert_eq!(optimal_queries(&gen_path(5).unwrap()).unwrap(), 3);
        assert_eq!(optimal_queries(&gen_octopus(6).unwrap()).unwrap(), 5);
        assert_eq!(optimal_queries(&gen_claw()).unwrap(), 3);
        assert_eq!(optimal_queries(&gen_fibonacci(5).unwrap()).unwrap(), 4);
        assert_eq!(optimal_queries(&gen_pathological(4).unwrap()).unwrap(), 4);
    }

    #[test]
    fn trees_verify() {
        for d in [gen_path(4).unwrap(), gen_claw(), gen_fibonacci(4).unwrap()] {
            let t = optimal_strategy(&d).unwrap();
            assert!(verify_tree(&t, &d));
            assert_eq!(t.height(), optimal_queries(&d).unwrap());
        }
        assert_eq!(optimal_strategy(&gen_path(4).unwrap()).unwrap().height(), 2);
        assert_eq!(optimal_strategy(&gen_fibonacci(4).unwrap()).unwrap().height(), 3);
    }

    #[test]
    fn cap_is_enforced() {
        let d = gen_path(30).unwrap();
        assert_eq!(
            optimal_queries(&d),
            Err(Error::CapExceeded { candidates: 30, cap: 24 })
        );
        assert_eq!(optimal_queries_with(&d, SolverConfig::with_cap(30)).unwrap(), 5);
    }

    #[test]
    fn memo_limit_aborts() {
        let d = gen_octopus(12).unwrap();
        let cfg = SolverConfig { cap: 24, memo_limit: 4 };
        assert_eq!(optimal_queries_with(&d, cfg), Err(Error::MemoLimit(4)));
    }

    #[test]
    fn crsp_trivial_cases() {
        let d = Dag::new(1, vec![]).unwrap();
        let none = FixedBitSet::with_capacity(1);
        assert_eq!(crsp_optimal_queries(&d, &none).unwrap(), 1);
        let mut all = FixedBitSet::with_capacity(1);
        all.insert(0);
        assert_eq!(crsp_optimal_queries(&d, &all).unwrap(), 0);
        assert_eq!(crsp_optimal_strategy(&d, &all).unwrap(), StrategyTree::no_fault());
    }

    #[test]
    fn brute_agrees_on_small() {
        for d in [gen_path(6).unwrap(), gen_octopus(5).unwrap(), gen_claw()] {
            assert_eq!(brute_force_optimal(&d).unwrap(), optimal_queries(&d).unwrap());
        }
    }

    #[test]
    fn comb_heights() {
        let (c, l) = gen_comb(&gen_path(3).unwrap(), None).unwrap();
        let t = comb_strategy(&c, &l).unwrap();
        assert!(verify_tree(&t, &c));
        assert_eq!(t.height(), 3);
        let (c, l) = gen_comb(&gen_path(1).unwrap(), None).unwrap();
        assert_eq!(comb_strategy(&c, &l).unwrap().height(), 1);
    }

    #[test]
    fn fib_heights() {
        assert_eq!(fibonacci_strategy(FibKind::Tree, 2).unwrap().height(), 1);
        let t = fibonacci_strategy(FibKind::Tree, 6).unwrap();
        assert_eq!(t.height(), 5);
        assert!(verify_tree(&t, &gen_fibonacci(6).unwrap()));
        let p = fibonacci_strategy(FibKind::Prime, 3).unwrap();
        assert!(p.height() <= 3);
        assert!(verify_tree(&p, &gen_fibonacci_prime(3).unwrap()));
    }
}
