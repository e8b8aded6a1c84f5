//! Bounded (2,3)-SAT, confined instances, and the transformations between
//! formulas, confined searches and plain searches.

use std::collections::HashSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::format::{parse_document, write_dag_body};
use crate::optimal::{crsp_optimal_queries_with, SolverConfig};
use crate::tree::{consistent, StrategyTree};

/// CNF formula; literals are DIMACS-style signed variable numbers (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsatFormula {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl BsatFormula {
    /// Checks clause sizes and variable occurrence limits.
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        let f = BsatFormula { vars, clauses };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let mut occ = vec![0usize; self.vars + 1];
        for (j, c) in self.clauses.iter().enumerate() {
            if !(2..=3).contains(&c.len()) {
                return Err(Error::ClauseSize { clause: j, len: c.len() });
            }
            let mut vars: Vec<usize> = c.iter().map(|l| l.unsigned_abs() as usize).collect();
            if vars.iter().any(|&v| v == 0 || v > self.vars) {
                return Err(Error::InvalidParameter(format!(
                    "clause {j} uses a variable outside 1..={}",
                    self.vars
                )));
            }
            vars.sort_unstable();
            vars.dedup();
            for v in vars {
                occ[v] += 1;
                if occ[v] > 3 {
                    return Err(Error::VariableOccurrences { var: v, count: occ[v] });
                }
            }
        }
        Ok(())
    }

    /// Number of clauses containing `literal`.
    pub fn literal_count(&self, literal: i32) -> usize {
        self.clauses.iter().filter(|c| c.contains(&literal)).count()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = assignment[l.unsigned_abs() as usize - 1];
                if l > 0 { v } else { !v }
            })
        })
    }

    /// No clauses left: satisfied by every assignment.
    pub fn is_trivially_satisfiable(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Reads DIMACS CNF (`c` comment lines, `p cnf <vars> <clauses>` header,
/// `0`-terminated clauses).
pub fn parse_bsat(text: &str) -> Result<BsatFormula> {
    let err = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
    let mut header = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if t.starts_with('p') {
            if header.is_some() {
                return Err(err(line, "duplicate header"));
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(err(line, "expected `p cnf <vars> <clauses>`"));
            }
            let n: usize = parts[2].parse().map_err(|_| err(line, "invalid variable count"))?;
            let m: usize = parts[3].parse().map_err(|_| err(line, "invalid clause count"))?;
            header = Some((n, m));
            continue;
        }
        if header.is_none() {
            return Err(err(line, "clause before header"));
        }
        for tok in t.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| err(line, &format!("invalid literal `{tok}`")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                cur.push(l);
            }
        }
    }
    let (n, m) = header.ok_or_else(|| err(0, "missing header"))?;
    if !cur.is_empty() {
        return Err(err(0, "last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(err(0, &format!("header declares {m} clauses, found {}", clauses.len())));
    }
    BsatFormula::new(n, clauses)
}

/// Drops every clause containing a literal that occurs three times. Its
/// negation cannot occur, so setting it true preserves satisfiability.
pub fn preprocess_pure_literals(f: &BsatFormula) -> BsatFormula {
    let mut clauses = f.clauses.clone();
    loop {
        let pure = (1..=f.vars as i32)
            .flat_map(|v| [v, -v])
            .find(|&l| clauses.iter().filter(|c| c.contains(&l)).count() >= 3);
        match pure {
            Some(l) => clauses.retain(|c| !c.contains(&l)),
            None => break,
        }
    }
    BsatFormula { vars: f.vars, clauses }
}

/// A satisfying assignment by exhaustive enumeration, if any.
pub fn brute_force_sat(f: &BsatFormula) -> Option<Vec<bool>> {
    assert!(f.vars <= 24, "brute-force SAT is for small formulas");
    (0u32..1 << f.vars)
        .map(|bits| (0..f.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
        .find(|a| f.is_satisfied_by(a))
}

/// Confined search instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrspInstance {
    pub dag: Dag,
    pub innocent: FixedBitSet,
    pub budget: usize,
}

impl CrspInstance {
    pub fn new(dag: Dag, innocent: impl IntoIterator<Item = usize>, budget: usize) -> Result<Self> {
        let mut set = FixedBitSet::with_capacity(dag.len());
        for v in innocent {
            if v >= dag.len() {
                return Err(Error::VertexOutOfRange { vertex: v, n: dag.len() });
            }
            set.insert(v);
        }
        Ok(CrspInstance { dag, innocent: set, budget })
    }

    pub fn candidates(&self) -> FixedBitSet {
        let mut c = FixedBitSet::with_capacity(self.dag.len());
        c.insert_range(..);
        c.difference_with(&self.innocent);
        c
    }

    pub fn optimal_queries(&self, config: SolverConfig) -> Result<usize> {
        crsp_optimal_queries_with(&self.dag, &self.innocent, config)
    }

    /// Whether every innocent vertex's descendants are innocent too.
    pub fn innocent_is_descendant_closed(&self) -> bool {
        self.dag
            .arcs()
            .iter()
            .all(|&(u, v)| !self.innocent.contains(u) || self.innocent.contains(v))
    }

    /// Checks a confined strategy: each leaf names the one remaining outcome,
    /// with the no-fault leaf reached only once every candidate is cleared.
    pub fn verify_tree(&self, tree: &StrategyTree) -> bool {
        consistent(tree, &self.dag, &self.candidates(), true)
    }

    /// DAG text format plus `innocent <v>` lines and `budget <k>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_dag_body(&self.dag, &mut out);
        for v in self.innocent.ones() {
            let _ = writeln!(out, "innocent {v}");
        }
        let _ = writeln!(out, "budget {}", self.budget);
        out
    }
}

pub fn parse_crsp(text: &str) -> Result<CrspInstance> {
    let doc = parse_document(text, true)?;
    CrspInstance::new(doc.dag, doc.innocent, doc.budget.unwrap_or(0))
}

/// Vertex ids of the reduction gadgets (0-based variable and clause index).
///
/// Variable `i` owns ids `5i..5i+5` as `x, x̄, b, b̄, ct`; clause `j` is
/// `5n + j`; the terminals follow as `5n + m + {0,1,2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetMap {
    pub x: Vec<usize>,
    pub x_bar: Vec<usize>,
    pub b: Vec<usize>,
    pub b_bar: Vec<usize>,
    pub ct: Vec<usize>,
    pub c: Vec<usize>,
    pub t: [usize; 3],
}

impl GadgetMap {
    fn new(n: usize, m: usize) -> Self {
        GadgetMap {
            x: (0..n).map(|i| 5 * i).collect(),
            x_bar: (0..n).map(|i| 5 * i + 1).collect(),
            b: (0..n).map(|i| 5 * i + 2).collect(),
            b_bar: (0..n).map(|i| 5 * i + 3).collect(),
            ct: (0..n).map(|i| 5 * i + 4).collect(),
            c: (0..m).map(|j| 5 * n + j).collect(),
            t: [5 * n + m, 5 * n + m + 1, 5 * n + m + 2],
        }
    }

    /// Literal vertex (`x_i` or `x̄_i`).
    pub fn literal_vertex(&self, literal: i32) -> usize {
        let i = literal.unsigned_abs() as usize - 1;
        if literal > 0 { self.x[i] } else { self.x_bar[i] }
    }

    /// Branching vertex above a literal.
    pub fn branch_vertex(&self, literal: i32) -> usize {
        let i = literal.unsigned_abs() as usize - 1;
        if literal > 0 { self.b[i] } else { self.b_bar[i] }
    }
}

/// Builds the confined instance with budget `n + 3` that is solvable within
/// budget iff `f` is satisfiable. `f` must have each literal at most twice.
pub fn reduce_bsat_to_crsp(f: &BsatFormula) -> Result<(CrspInstance, GadgetMap)> {
    f.validate()?;
    for v in 1..=f.vars as i32 {
        for l in [v, -v] {
            let count = f.literal_count(l);
            if count > 2 {
                return Err(Error::Unpreprocessed { literal: l, count });
            }
        }
    }
    let (n, m) = (f.vars, f.clauses.len());
    let g = GadgetMap::new(n, m);
    let mut arcs = Vec::new();
    for i in 0..n {
        arcs.extend([(g.b[i], g.x[i]), (g.ct[i], g.x[i]), (g.b_bar[i], g.x_bar[i]), (g.ct[i], g.x_bar[i])]);
    }
    let mut seen = HashSet::new();
    for (j, c) in f.clauses.iter().enumerate() {
        for &l in c {
            let arc = (g.c[j], g.branch_vertex(l));
            if seen.insert(arc) {
                arcs.push(arc);
            }
        }
    }
    let total = 5 * n + m + 3;
    let mut labels = vec![String::new(); total];
    for i in 0..n {
        let k = i + 1;
        labels[g.x[i]] = format!("x{k}");
        labels[g.x_bar[i]] = format!("~x{k}");
        labels[g.b[i]] = format!("b{k}");
        labels[g.b_bar[i]] = format!("~b{k}");
        labels[g.ct[i]] = format!("ct{k}");
    }
    for j in 0..m {
        labels[g.c[j]] = format!("c{}", j + 1);
    }
    for (r, &t) in g.t.iter().enumerate() {
        labels[t] = format!("t{}", r + 1);
    }
    let dag = Dag::new(total, arcs)?.with_labels(labels)?;
    let innocent: Vec<usize> = (0..n)
        .flat_map(|i| [g.x[i], g.x_bar[i], g.b[i], g.b_bar[i]])
        .collect();
    Ok((CrspInstance::new(dag, innocent, n + 3)?, g))
}

/// Adds a bugged sink `b` (id `n`) below every non-innocent vertex.
///
/// The optimum is preserved when the innocent set is closed under
/// descendants. Otherwise innocent ancestors of non-innocent vertices become
/// candidates of the plain search.
pub fn crsp_to_rsp(inst: &CrspInstance) -> Dag {
    let n = inst.dag.len();
    let mut arcs = inst.dag.arcs().to_vec();
    arcs.extend((0..n).filter(|&v| !inst.innocent.contains(v)).map(|v| (v, n)));
    let mut dag = Dag::new(n + 1, arcs)
        .expect("new sink keeps the graph acyclic")
        .with_sink(n)
        .expect("in range");
    if let Some(l) = inst.dag.labels() {
        let mut l = l.to_vec();
        l.push("b".to_string());
        dag = dag.with_labels(l).expect("label count");
    }
    dag
}

/// Deletes `b` with its descendants; former non-ancestors of `b` become
/// innocent. Returns the instance and the original id of each vertex.
pub fn rsp_to_crsp(dag: &Dag, b: usize, budget: usize) -> Result<(CrspInstance, Vec<usize>)> {
    if b >= dag.len() {
        return Err(Error::VertexOutOfRange { vertex: b, n: dag.len() });
    }
    let mut keep = FixedBitSet::with_capacity(dag.len());
    keep.insert_range(..);
    keep.difference_with(&dag.descendants(b));
    let (sub, old) = dag.induced(&keep);
    let innocent: Vec<usize> = old
        .iter()
        .enumerate()
        .filter(|&(_, &v)| !dag.ancestor_table().is_ancestor(v, b))
        .map(|(i, _)| i)
        .collect();
    Ok((CrspInstance::new(sub, innocent, budget)?, old))
}

/// Strategy for the reduced instance built from a satisfying assignment:
/// query the true literal of each variable; after a bugged literal, query its
/// clause vertices (the control vertex is then the only remaining culprit);
/// if every literal is clean, query the three terminals. Queries that cannot
/// split the current outcomes are skipped.
pub fn satisfying_assignment_to_strategy(
    f: &BsatFormula,
    assignment: &[bool],
    map: &GadgetMap,
    inst: &CrspInstance,
) -> Result<StrategyTree> {
    if assignment.len() != f.vars || !f.is_satisfied_by(assignment) {
        return Err(Error::NotSatisfying);
    }
    let lits: Vec<i32> = (0..f.vars)
        .map(|i| if assignment[i] { i as i32 + 1 } else { -(i as i32 + 1) })
        .collect();
    let plan = Plan { f, map, dag: &inst.dag, lits };
    plan.literals(0, inst.candidates(), true)
}

struct Plan<'a> {
    f: &'a BsatFormula,
    map: &'a GadgetMap,
    dag: &'a Dag,
    lits: Vec<i32>,
}

impl Plan<'_> {
    fn split(&self, s: &FixedBitSet, q: usize) -> (FixedBitSet, FixedBitSet) {
        let mut yes = s.clone();
        yes.intersect_with(self.dag.ancestors(q));
        let mut no = s.clone();
        no.difference_with(self.dag.ancestors(q));
        (yes, no)
    }

    fn leaf(s: &FixedBitSet, flag: bool) -> Option<StrategyTree> {
        match (s.count_ones(..), flag) {
            (0, true) => Some(StrategyTree::no_fault()),
            (1, false) => Some(StrategyTree::leaf(s.ones().next().unwrap())),
            _ => None,
        }
    }

    fn literals(&self, i: usize, s: FixedBitSet, flag: bool) -> Result<StrategyTree> {
        if let Some(t) = Self::leaf(&s, flag) {
            return Ok(t);
        }
        if i == self.lits.len() {
            return self.sequence(&self.map.t, s, flag);
        }
        let lit = self.lits[i];
        let q = self.map.literal_vertex(lit);
        let (yes, no) = self.split(&s, q);
        if yes.is_clear() {
            return self.literals(i + 1, s, flag);
        }
        let mut follow: Vec<usize> = self
            .f
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.contains(&lit))
            .map(|(j, _)| self.map.c[j])
            .collect();
        let var = lit.unsigned_abs() as usize - 1;
        follow.push(self.map.ct[var]);
        Ok(StrategyTree::query(
            q,
            self.sequence(&follow, yes, false)?,
            self.literals(i + 1, no, flag)?,
        ))
    }

    fn sequence(&self, queue: &[usize], s: FixedBitSet, flag: bool) -> Result<StrategyTree> {
        if let Some(t) = Self::leaf(&s, flag) {
            return Ok(t);
        }
        let Some((&q, rest)) = queue.split_first() else {
            return Err(Error::MalformedTree("recipe left several outcomes".into()));
        };
        let (yes, no) = self.split(&s, q);
        if yes.is_clear() || (no.is_clear() && !flag) {
            return self.sequence(rest, s, flag);
        }
        Ok(StrategyTree::query(
            q,
            self.sequence(rest, yes, false)?,
            self.sequence(rest, no, flag)?,
        ))
    }
}

/// Searches formulas over `vars` variables with up to `max_clauses` distinct
/// clauses (no repeated variable inside a clause) and returns every one that
/// is a valid bounded formula with each literal at most twice.
pub fn enumerate_preprocessed(vars: usize, max_clauses: usize) -> Vec<BsatFormula> {
    let pool = all_clauses(vars);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    enumerate_rec(vars, &pool, 0, max_clauses, &mut chosen, &mut out);
    out
}

/// First unsatisfiable preprocessed formula in enumeration order, trying
/// variable counts and then clause counts in increasing order.
pub fn find_unsatisfiable(max_vars: usize, max_clauses: usize) -> Option<BsatFormula> {
    for vars in 1..=max_vars {
        let pool = all_clauses(vars);
        for m in 1..=max_clauses {
            let mut found = None;
            let mut chosen = Vec::new();
            enumerate_exact(vars, &pool, 0, m, &mut chosen, &mut found);
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

fn all_clauses(vars: usize) -> Vec<Vec<i32>> {
    let mut pool = Vec::new();
    let v = vars as i32;
    for a in 1..=v {
        for b in a + 1..=v {
            for sa in [1, -1] {
                for sb in [1, -1] {
                    pool.push(vec![sa * a, sb * b]);
                }
            }
            for c in b + 1..=v {
                for sa in [1, -1] {
                    for sb in [1, -1] {
                        for sc in [1, -1] {
                            pool.push(vec![sa * a, sb * b, sc * c]);
                        }
                    }
                }
            }
        }
    }
    pool
}

fn within_limits(vars: usize, clauses: &[Vec<i32>]) -> bool {
    let mut var = vec![0usize; vars + 1];
    let mut pos = vec![0usize; vars + 1];
    let mut neg = vec![0usize; vars + 1];
    for c in clauses {
        for &l in c {
            let v = l.unsigned_abs() as usize;
            var[v] += 1;
            if l > 0 {
                pos[v] += 1;
            } else {
                neg[v] += 1;
            }
        }
    }
    (1..=vars).all(|v| var[v] <= 3 && pos[v] <= 2 && neg[v] <= 2)
}

fn enumerate_rec(
    vars: usize,
    pool: &[Vec<i32>],
    start: usize,
    left: usize,
    chosen: &mut Vec<Vec<i32>>,
    out: &mut Vec<BsatFormula>,
) {
    out.push(BsatFormula { vars, clauses: chosen.clone() });
    if left == 0 {
        return;
    }
    for i in start..pool.len() {
        chosen.push(pool[i].clone());
        if within_limits(vars, chosen) {
            enumerate_rec(vars, pool, i + 1, left - 1, chosen, out);
        }
        chosen.pop();
    }
}

fn enumerate_exact(
    vars: usize,
    pool: &[Vec<i32>],
    start: usize,
    left: usize,
    chosen: &mut Vec<Vec<i32>>,
    found: &mut Option<BsatFormula>,
) {
    if found.is_some() {
        return;
    }
    if left == 0 {
        let f = BsatFormula { vars, clauses: chosen.clone() };
        if brute_force_sat(&f).is_none() {
            *found = Some(f);
        }
        return;
    }
    for i in start..pool.len() {
        chosen.push(pool[i].clone());
        if within_limits(vars, chosen) {
            enumerate_exact(vars, pool, i + 1, left - 1, chosen, found);
        }
        chosen.pop();
        if found.is_some() {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = "p cnf 3 2\n1 -2 0\n-1 -2 -3 0\n";

    #[test]
    fn parses_example() {
        let f = parse_bsat(EXAMPLE).unwrap();
        assert_eq!(f.vars, 3);
        assert_eq!(f.clauses, vec![vec![1, -2], vec![-1, -2, -3]]);
        assert_eq!(parse_bsat(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_formulas() {
        assert!(matches!(
            parse_bsat("p cnf 2 1\n1 0\n"),
            Err(Error::ClauseSize { clause: 0, len: 1 })
        ));
        assert!(matches!(
            parse_bsat("p cnf 3 4\n1 2 0\n1 3 0\n-1 2 0\n-1 -3 0\n"),
            Err(Error::VariableOccurrences { var: 1, count: 4 })
        ));
        assert!(matches!(parse_bsat("p cnf 2 1\n1 x 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn pure_literal_removal() {
        let f = BsatFormula::new(4, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, -3]]).unwrap();
        let g = preprocess_pure_literals(&f);
        assert_eq!(g.clauses, vec![vec![2, -3]]);
        let h = preprocess_pure_literals(&g);
        assert_eq!(h, g);
        let e = BsatFormula::new(2, vec![vec![1, 2], vec![1, -2], vec![1, 2, -2]]).unwrap();
        assert!(preprocess_pure_literals(&e).is_trivially_satisfiable());
    }

    #[test]
    fn example_reduction_shape() {
        let f = parse_bsat(EXAMPLE).unwrap();
        let (inst, g) = reduce_bsat_to_crsp(&f).unwrap();
        assert_eq!(inst.dag.len(), 20);
        assert_eq!(inst.innocent.count_ones(..), 12);
        assert_eq!(inst.budget, 6);
        assert_eq!(inst.dag.max_indegree(), 2);
        assert!(inst.innocent_is_descendant_closed());
        assert_eq!(g.t, [17, 18, 19]);
    }

    #[test]
    fn empty_formula_reduction() {
        let f = BsatFormula::new(2, vec![]).unwrap();
        let (inst, _) = reduce_bsat_to_crsp(&f).unwrap();
        assert_eq!(inst.dag.len(), 13);
    }

    #[test]
    fn unpreprocessed_rejected() {
        let f = BsatFormula::new(4, vec![vec![1, 2], vec![1, 3], vec![1, 4]]).unwrap();
        assert!(matches!(
            reduce_bsat_to_crsp(&f),
            Err(Error::Unpreprocessed { literal: 1, count: 3 })
        ));
    }

    #[test]
    fn crsp_text_round_trip() {
        let f = parse_bsat(EXAMPLE).unwrap();
        let (inst, _) = reduce_bsat_to_crsp(&f).unwrap();
        let back = parse_crsp(&inst.to_text()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn transforms_on_path() {
        let p = crate::generators::gen_path(3).unwrap();
        let (inst, old) = rsp_to_crsp(&p, 2, 0).unwrap();
        assert_eq!(inst.dag.len(), 2);
        assert_eq!(old, vec![0, 1]);
        assert!(inst.innocent.is_clear());

        let all = CrspInstance::new(Dag::new(2, vec![(0, 1)]).unwrap(), [0, 1], 0).unwrap();
        let d = crsp_to_rsp(&all);
        assert_eq!(d.len(), 3);
        assert!(d.parents(2).is_empty());
    }

    #[test]
    fn recipe_on_example() {
        let f = parse_bsat(EXAMPLE).unwrap();
        let (inst, g) = reduce_bsat_to_crsp(&f).unwrap();
        for a in [[true, false, false], [true, false, true]] {
            let t = satisfying_assignment_to_strategy(&f, &a, &g, &inst).unwrap();
            assert!(inst.verify_tree(&t));
            assert!(t.height() <= 6);
            assert_eq!(t.depth_of(None), Some(6));
        }
        assert_eq!(
            satisfying_assignment_to_strategy(&f, &[false, true, true], &g, &inst),
            Err(Error::NotSatisfying)
        );
    }
}
