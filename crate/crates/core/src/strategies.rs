//! Greedy pickers, strategy-tree construction and session execution.

use std::io::{BufRead, Write};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{le_n_over_phi, le_n_over_phi2};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::state::{BisectState, Verdict};
use crate::tree::StrategyTree;

/// A deterministic query rule.
pub trait Picker: Sync {
    fn name(&self) -> &'static str;

    /// Vertex to query next. Requires at least two live candidates.
    fn pick(&self, state: &BisectState<'_>) -> Result<usize>;
}

/// Highest live score, smallest id on ties.
fn max_score_in(
    state: &BisectState<'_>,
    pool: impl Iterator<Item = usize>,
) -> Option<(usize, usize)> {
    let n = state.n_live();
    let mut best: Option<(usize, usize)> = None;
    for v in pool {
        let a = state.live_ancestors(v);
        let s = a.min(n - a);
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((v, s));
        }
    }
    best
}

fn require_two(state: &BisectState<'_>) -> Result<()> {
    if state.n_live() < 2 {
        Err(Error::TooFewCandidates(state.n_live()))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GitBisect;

impl Picker for GitBisect {
    fn name(&self) -> &'static str {
        "git"
    }

    fn pick(&self, state: &BisectState<'_>) -> Result<usize> {
        git_bisect_pick(state)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GoldenBisect;

impl Picker for GoldenBisect {
    fn name(&self) -> &'static str {
        "golden"
    }

    fn pick(&self, state: &BisectState<'_>) -> Result<usize> {
        golden_bisect_pick(state)
    }
}

/// Named picker, convenient for command-line selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Git,
    Golden,
}

impl StrategyKind {
    pub fn picker(self) -> &'static dyn Picker {
        match self {
            StrategyKind::Git => &GitBisect,
            StrategyKind::Golden => &GoldenBisect,
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "git" => Ok(StrategyKind::Git),
            "golden" => Ok(StrategyKind::Golden),
            other => Err(Error::InvalidParameter(format!("unknown strategy `{other}`"))),
        }
    }
}

pub fn git_bisect_pick(state: &BisectState<'_>) -> Result<usize> {
    require_two(state)?;
    let (v, _) = max_score_in(state, state.live()).expect("non-empty");
    Ok(v)
}

/// `s >= n / phi^2`, exactly: `3ns >= n^2 + s^2` for `0 <= s <= n`.
pub fn golden_threshold(n_live: usize, s: usize) -> bool {
    let (n, s) = (n_live as u128, s as u128);
    3 * n * s >= n * n + s * s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySets {
    pub v_ge: Vec<usize>,
    pub b_ge: Vec<usize>,
    pub b_lt: Vec<usize>,
}

pub fn boundary_sets(state: &BisectState<'_>) -> BoundarySets {
    let n = state.n_live();
    let len = state.dag().len();
    let mut in_v = FixedBitSet::with_capacity(len);
    for v in state.live() {
        if 2 * state.live_ancestors(v) > n {
            in_v.insert(v);
        }
    }
    let b_ge: Vec<usize> = in_v
        .ones()
        .filter(|&v| !state.live_parents(v).any(|p| in_v.contains(p)))
        .collect();
    let mut lt = FixedBitSet::with_capacity(len);
    for &v in &b_ge {
        for p in state.live_parents(v) {
            lt.insert(p);
        }
    }
    BoundarySets {
        v_ge: in_v.ones().collect(),
        b_ge,
        b_lt: lt.ones().collect(),
    }
}

pub fn golden_bisect_pick(state: &BisectState<'_>) -> Result<usize> {
    require_two(state)?;
    let (v, s) = max_score_in(state, state.live()).expect("non-empty");
    if golden_threshold(state.n_live(), s) {
        return Ok(v);
    }
    let sets = boundary_sets(state);
    let mut pool = sets.b_ge;
    pool.extend(sets.b_lt);
    pool.sort_unstable();
    match max_score_in(state, pool.into_iter()) {
        Some((q, s)) if s > 0 => Ok(q),
        _ => Ok(v),
    }
}

/// Full decision tree of `picker` from `state`.
pub fn build_strategy_tree(picker: &dyn Picker, state: &BisectState<'_>) -> Result<StrategyTree> {
    if let Some(v) = state.resolved() {
        return Ok(StrategyTree::leaf(v));
    }
    let q = picker.pick(state)?;
    let bugged = state.apply_verdict(q, Verdict::Bugged)?;
    let clean = state.apply_verdict(q, Verdict::Clean)?;
    Ok(StrategyTree::query(
        q,
        build_strategy_tree(picker, &bugged)?,
        build_strategy_tree(picker, &clean)?,
    ))
}

/// Worst-case number of queries of `picker` on the marked vertex of `dag`.
pub fn worst_case_queries(picker: &dyn Picker, dag: &Dag) -> Result<usize> {
    let state = BisectState::for_marked(dag)?;
    Ok(build_strategy_tree(picker, &state)?.height())
}

/// Session length for every candidate, in increasing candidate order.
/// Runs in parallel; the output does not depend on scheduling.
pub fn per_faulty_queries(picker: &dyn Picker, dag: &Dag) -> Result<Vec<(usize, usize)>> {
    let root = BisectState::for_marked(dag)?;
    let candidates: Vec<usize> = root.live().collect();
    candidates
        .par_iter()
        .map(|&f| {
            let mut oracle = SimulatedOracle::new(f);
            run_session_from(picker, root.clone(), &mut oracle).map(|r| (f, r.queries))
        })
        .collect()
}

/// Answers queries about a vertex.
pub trait Oracle {
    fn answer(&mut self, dag: &Dag, q: usize) -> Result<Verdict>;
}

/// Oracle backed by a known faulty commit.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedOracle {
    faulty: usize,
}

impl SimulatedOracle {
    pub fn new(faulty: usize) -> Self {
        SimulatedOracle { faulty }
    }
}

impl Oracle for SimulatedOracle {
    fn answer(&mut self, dag: &Dag, q: usize) -> Result<Verdict> {
        Ok(if dag.ancestor_table().is_ancestor(self.faulty, q) {
            Verdict::Bugged
        } else {
            Verdict::Clean
        })
    }
}

/// Line protocol: writes `? <id>`, reads `b` or `c`.
pub struct StreamOracle<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> StreamOracle<R, W> {
    pub fn new(input: R, output: W) -> Self {
        StreamOracle { input, output }
    }
}

impl<R: BufRead, W: Write> Oracle for StreamOracle<R, W> {
    fn answer(&mut self, _dag: &Dag, q: usize) -> Result<Verdict> {
        let io = |e: std::io::Error| Error::InvalidParameter(format!("oracle stream: {e}"));
        writeln!(self.output, "? {q}").map_err(io)?;
        self.output.flush().map_err(io)?;
        loop {
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Err(Error::InvalidParameter("oracle input closed".into()));
            }
            match line.trim() {
                "" => continue,
                "b" | "bugged" => return Ok(Verdict::Bugged),
                "c" | "clean" => return Ok(Verdict::Clean),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "expected `b` or `c`, got `{other}`"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub query: usize,
    pub verdict: Verdict,
    pub live: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionResult {
    pub faulty: usize,
    pub queries: usize,
    pub transcript: Vec<TranscriptStep>,
}

impl SessionResult {
    /// One JSON object per line.
    pub fn transcript_jsonl(&self) -> String {
        self.transcript
            .iter()
            .map(|s| serde_json::to_string(s).expect("step serializes") + "\n")
            .collect()
    }
}

/// Runs `picker` against `oracle` on the marked vertex of `dag`.
pub fn run_session(
    picker: &dyn Picker,
    dag: &Dag,
    oracle: &mut dyn Oracle,
) -> Result<SessionResult> {
    run_session_from(picker, BisectState::for_marked(dag)?, oracle)
}

pub fn run_session_from(
    picker: &dyn Picker,
    mut state: BisectState<'_>,
    oracle: &mut dyn Oracle,
) -> Result<SessionResult> {
    let mut transcript = Vec::new();
    while state.resolved().is_none() {
        let q = picker.pick(&state)?;
        let verdict = oracle.answer(state.dag(), q)?;
        state = state.apply_verdict(q, verdict)?;
        transcript.push(TranscriptStep { query: q, verdict, live: state.n_live() });
    }
    Ok(SessionResult {
        faulty: state.resolved().expect("loop exit"),
        queries: transcript.len(),
        transcript,
    })
}

/// Whether golden bisect shrinks `state` to at most `n/phi` candidates in one
/// query or to at most `n/phi^2` in two, whatever the answers.
pub fn golden_two_step_holds(state: &BisectState<'_>) -> Result<bool> {
    let n = state.n_live();
    if n < 2 {
        return Ok(true);
    }
    let q1 = golden_bisect_pick(state)?;
    for v1 in [Verdict::Bugged, Verdict::Clean] {
        let s1 = state.apply_verdict(q1, v1)?;
        if le_n_over_phi(n, s1.n_live()) || s1.n_live() < 2 {
            continue;
        }
        let q2 = golden_bisect_pick(&s1)?;
        for v2 in [Verdict::Bugged, Verdict::Clean] {
            let s2 = s1.apply_verdict(q2, v2)?;
            if !le_n_over_phi2(n, s2.n_live()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Live counts along the adversarial path that always keeps the larger side.
pub fn worst_live_sizes(picker: &dyn Picker, state: &BisectState<'_>, steps: usize) -> Result<Vec<usize>> {
    let mut sizes = vec![state.n_live()];
    let mut cur = state.clone();
    for _ in 0..steps {
        if cur.n_live() < 2 {
            break;
        }
        let q = picker.pick(&cur)?;
        let b = cur.apply_verdict(q, Verdict::Bugged)?;
        let c = cur.apply_verdict(q, Verdict::Clean)?;
        cur = if b.n_live() >= c.n_live() { b } else { c };
        sizes.push(cur.n_live());
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Dag {
        Dag::new(n, (1..n).map(|i| (i - 1, i)).collect())
            .unwrap()
            .with_sink(n - 1)
            .unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert!(!golden_threshold(21, 8));
        assert!(golden_threshold(13, 5));
        assert!(golden_threshold(2, 1));
        assert!(!golden_threshold(13, 4));
    }

    #[test]
    fn two_path_picks_source() {
        let d = path(2);
        let s = BisectState::for_marked(&d).unwrap();
        assert_eq!(git_bisect_pick(&s).unwrap(), 0);
        assert_eq!(golden_bisect_pick(&s).unwrap(), 0);
    }

    #[test]
    fn single_candidate_rejected() {
        let d = path(1);
        let s = BisectState::for_marked(&d).unwrap();
        assert_eq!(git_bisect_pick(&s), Err(Error::TooFewCandidates(1)));
        let r = run_session(&GitBisect, &d, &mut SimulatedOracle::new(0)).unwrap();
        assert_eq!(r.queries, 0);
        assert_eq!(r.faulty, 0);
    }

    #[test]
    fn boundary_sets_on_path4() {
        let d = path(4);
        let s = BisectState::for_marked(&d).unwrap();
        let b = boundary_sets(&s);
        assert_eq!(b.v_ge, vec![2, 3]);
        assert_eq!(b.b_ge, vec![2]);
        assert_eq!(b.b_lt, vec![1]);
    }

    #[test]
    fn boundary_sets_single_vertex() {
        let d = path(1);
        let s = BisectState::for_marked(&d).unwrap();
        let b = boundary_sets(&s);
        assert_eq!(b.v_ge, vec![0]);
        assert_eq!(b.b_ge, vec![0]);
        assert!(b.b_lt.is_empty());
    }

    #[test]
    fn path5_height() {
        let d = path(5);
        assert_eq!(worst_case_queries(&GitBisect, &d).unwrap(), 3);
    }

    #[test]
    fn stream_oracle_protocol() {
        let d = path(4);
        let input = std::io::Cursor::new("c\n\nb\n");
        let mut out = Vec::new();
        let r = {
            let mut o = StreamOracle::new(input, &mut out);
            run_session(&GitBisect, &d, &mut o).unwrap()
        };
        assert_eq!(r.faulty, 2);
        assert_eq!(String::from_utf8(out).unwrap(), "? 1\n? 2\n");
        assert_eq!(
            r.transcript_jsonl().lines().next().unwrap(),
            r#"{"query":1,"verdict":"clean","live":2}"#
        );
    }

    #[test]
    fn inconsistent_stream_fails() {
        let d = path(4);
        let mut o = StreamOracle::new(std::io::Cursor::new("x\n"), Vec::new());
        assert!(run_session(&GitBisect, &d, &mut o).is_err());
    }
}
