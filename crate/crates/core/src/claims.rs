//! Runnable acceptance checks. Each claim produces rows of
//! expected vs. actual values; a claim passes when all of its rows do.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    ceil_log2, ceil_log_phi, table1_f, within_delta_bound, within_git_bound, within_golden_bound,
};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::generators::*;
use crate::optimal::{
    brute_force_optimal, comb_strategy, crsp_optimal_queries, fibonacci_strategy,
    optimal_queries, FibKind,
};
use crate::reduction::{
    brute_force_sat, crsp_to_rsp, enumerate_preprocessed, find_unsatisfiable, parse_bsat,
    reduce_bsat_to_crsp, rsp_to_crsp, satisfying_assignment_to_strategy, CrspInstance,
};
use crate::state::BisectState;
use crate::strategies::{
    build_strategy_tree, golden_two_step_holds, per_faulty_queries, worst_case_queries,
    worst_live_sizes, GitBisect, GoldenBisect, Picker,
};
use crate::tree::{verify_tree, StrategyTree};

pub const CLAIM_NAMES: [&str; 11] = [
    "pathological",
    "comb",
    "figures",
    "table1",
    "upper-bounds",
    "jk",
    "fibonacci",
    "golden-two-step",
    "reduction",
    "transform-equivalence",
    "oracle-equivalence",
];

/// The worked example formula `(x1 | !x2) & (!x1 | !x2 | !x3)`.
pub const EXAMPLE_CNF: &str = "p cnf 3 2\n1 -2 0\n-1 -2 -3 0\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRow {
    pub case: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim: String,
    pub pass: bool,
    pub rows: Vec<ClaimRow>,
}

#[derive(Default)]
struct Rows(Vec<ClaimRow>);

impl Rows {
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, case: impl Into<String>, expected: T, actual: T) {
        self.0.push(ClaimRow {
            case: case.into(),
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
            pass: expected == actual,
        });
    }

    fn check(&mut self, case: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>, pass: bool) {
        self.0.push(ClaimRow {
            case: case.into(),
            expected: expected.into(),
            actual: actual.into(),
            pass,
        });
    }

    /// One summary row for a batch of instances.
    fn count(&mut self, case: impl Into<String>, total: usize, failures: &[String]) {
        let actual = if failures.is_empty() {
            format!("0 violations over {total}")
        } else {
            format!(
                "{} violations over {total}; first: {}",
                failures.len(),
                failures[0]
            )
        };
        self.check(case, format!("0 violations over {total}"), actual, failures.is_empty());
    }
}

/// Runs one claim by name.
pub fn run_claim(name: &str) -> Result<ClaimReport> {
    let mut rows = Rows::default();
    match name {
        "pathological" => pathological(&mut rows)?,
        "comb" => comb(&mut rows)?,
        "figures" => figures(&mut rows)?,
        "table1" => table1(&mut rows)?,
        "upper-bounds" => upper_bounds(&mut rows)?,
        "jk" => jk(&mut rows)?,
        "fibonacci" => fibonacci(&mut rows)?,
        "golden-two-step" => golden_two_step(&mut rows)?,
        "reduction" => reduction(&mut rows)?,
        "transform-equivalence" => transform_equivalence(&mut rows)?,
        "oracle-equivalence" => oracle_equivalence(&mut rows)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown claim `{other}`; known claims: {}",
                CLAIM_NAMES.join(", ")
            )))
        }
    }
    let pass = rows.0.iter().all(|r| r.pass);
    Ok(ClaimReport { claim: name.to_string(), pass, rows: rows.0 })
}

/// Runs every claim concurrently; reports come back in [`CLAIM_NAMES`] order.
pub fn run_all() -> Result<Vec<ClaimReport>> {
    CLAIM_NAMES.par_iter().map(|n| run_claim(n)).collect()
}

fn pathological(rows: &mut Rows) -> Result<()> {
    for k in 3..=6 {
        let d = gen_pathological(k)?;
        rows.eq(format!("git worst case, k={k}"), (1usize << (k - 1)) - 1, worst_case_queries(&GitBisect, &d)?);
    }
    for k in 3..=4 {
        let d = gen_pathological(k)?;
        rows.eq(format!("optimal, k={k}"), k, optimal_queries(&d)?);
    }
    Ok(())
}

/// Odd-size bases for the comb check.
fn odd_comb_corpus() -> Result<Vec<(String, Dag)>> {
    let mut out = Vec::new();
    for n in (1..=11).step_by(2) {
        out.push((format!("path{n}"), gen_path(n)?));
    }
    for n in (3..=11).step_by(2) {
        out.push((format!("octopus{n}"), gen_octopus(n)?));
    }
    for n in (3..=11).step_by(2) {
        for seed in 0..4 {
            out.push((format!("random-binary n={n} seed={seed}"), gen_random_binary(n, seed)?));
        }
    }
    Ok(out)
}

fn comb(rows: &mut Rows) -> Result<()> {
    for (name, base) in odd_comb_corpus()? {
        let n = base.len();
        let (c, l) = gen_comb(&base, None)?;
        let t = comb_strategy(&c, &l)?;
        let ok = verify_tree(&t, &c);
        rows.check(
            format!("{name}: comb strategy height"),
            format!("{} (valid tree)", ceil_log2(2 * n)),
            format!("{}{}", t.height(), if ok { " (valid tree)" } else { " (INVALID tree)" }),
            ok && t.height() == ceil_log2(2 * n),
        );
        let x = worst_case_queries(&GitBisect, &base)?;
        rows.eq(format!("{name}: git on comb = git on base + 1"), x + 1, worst_case_queries(&GitBisect, &c)?);
    }
    Ok(())
}

fn figures(rows: &mut Rows) -> Result<()> {
    let d = gen_fig4();
    let s = BisectState::for_marked(&d)?;
    let label = |v: usize| d.label(v);
    rows.eq("fig4 git worst case", 6, worst_case_queries(&GitBisect, &d)?);
    rows.eq("fig4 git first pick", "18".to_string(), label(GitBisect.pick(&s)?));
    rows.eq("fig4 golden worst case", 5, worst_case_queries(&GoldenBisect, &d)?);
    let g = GoldenBisect.pick(&s)?;
    let name = label(g);
    rows.check(
        "fig4 golden first pick",
        "7 or 14",
        name.clone(),
        name == "7" || name == "14",
    );
    rows.eq("fig4 golden first pick score", 7, s.score(g)?);
    Ok(())
}

fn worst_pair(d: &Dag) -> Result<(usize, usize)> {
    Ok((worst_case_queries(&GitBisect, d)?, worst_case_queries(&GoldenBisect, d)?))
}

fn table1(rows: &mut Rows) -> Result<()> {
    let expected = [0, 1, 2, 3, 3, 4, 4, 4, 5, 5, 5, 5, 6];
    rows.eq(
        "F(n) recurrence reproduces the table",
        expected.to_vec(),
        (1..=13).map(table1_f).collect::<Vec<_>>(),
    );
    const PER_SIZE: u64 = 250;
    for n in 1..=13usize {
        let f = table1_f(n);
        let worst: Vec<(usize, usize)> = (0..PER_SIZE)
            .into_par_iter()
            .map(|seed| worst_pair(&gen_random_binary(n, seed)?))
            .collect::<Result<_>>()?;
        let g = worst.iter().map(|w| w.0).max().unwrap_or(0);
        let h = worst.iter().map(|w| w.1).max().unwrap_or(0);
        rows.check(
            format!("n={n}, {PER_SIZE} random binary DAGs"),
            format!("git <= {f}, golden <= {f}"),
            format!("git max {g}, golden max {h}"),
            g <= f && h <= f,
        );
    }
    Ok(())
}

/// Size drawn for instance `i` of a corpus, uniform in `lo..=hi`.
fn corpus_size(tag: u64, i: u64, lo: usize, hi: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(tag.wrapping_mul(1_000_003).wrapping_add(i));
    rng.random_range(lo..=hi)
}

fn upper_bounds(rows: &mut Rows) -> Result<()> {
    const COUNT: u64 = 500;
    let results: Vec<Option<String>> = (0..COUNT)
        .into_par_iter()
        .map(|seed| -> Result<Option<String>> {
            let n = corpus_size(5, seed, 2, 300);
            let d = gen_random_binary(n, seed)?;
            let (g, h) = worst_pair(&d)?;
            let mut bad = Vec::new();
            if !within_git_bound(g, n) {
                bad.push(format!("git {g}"));
            }
            if !within_golden_bound(h, n) {
                bad.push(format!("golden {h}"));
            }
            Ok((!bad.is_empty()).then(|| format!("n={n} seed={seed}: {}", bad.join(", "))))
        })
        .collect::<Result<_>>()?;
    let fails: Vec<String> = results.into_iter().flatten().collect();
    rows.count("binary: git <= log_{3/2} n and golden <= log_phi n + 1", COUNT as usize, &fails);

    for delta in [3usize, 4] {
        const DCOUNT: u64 = 250;
        let results: Vec<Option<String>> = (0..DCOUNT)
            .into_par_iter()
            .map(|seed| -> Result<Option<String>> {
                let n = corpus_size(delta as u64, seed, 2, 300);
                let d = gen_random_delta(n, delta, seed)?;
                let g = worst_case_queries(&GitBisect, &d)?;
                Ok((!within_delta_bound(g, n, delta)).then(|| format!("n={n} seed={seed}: git {g}")))
            })
            .collect::<Result<_>>()?;
        let fails: Vec<String> = results.into_iter().flatten().collect();
        rows.count(
            format!("delta={delta}: git <= log2 n / log2((delta+1)/delta)"),
            DCOUNT as usize,
            &fails,
        );
    }
    Ok(())
}

/// Checks the construction invariants on every stage of `J_k`.
fn jk_stage_failures(k: usize, dag: &Dag, l: &JkLayout) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for d in 0..=k {
        let stage = l.stage(dag, d);
        let n = stage.len();
        let s = BisectState::for_marked(&stage)?;
        for i in 0..d {
            let a = stage.ancestor_count(l.z_prime[i]);
            if a != 3 * l.ell[i] {
                bad.push(format!("stage {d}: |z'_{}| = {a}, want {}", i + 1, 3 * l.ell[i]));
            }
        }
        if !(n - 1).is_multiple_of(3) {
            bad.push(format!("stage {d}: n = {n} not 1 mod 3"));
            continue;
        }
        let want = (n - 1) / 3;
        let mut scores: Vec<usize> = l.x_k.iter().map(|&x| s.score(x)).collect::<Result<_>>()?;
        scores.push(s.score(l.c)?);
        if scores.iter().any(|&x| x != want) {
            bad.push(format!("stage {d}: backbone scores {scores:?}, want {want}"));
        }
    }
    Ok(bad)
}

fn jk(rows: &mut Rows) -> Result<()> {
    for k in 1..=6usize {
        let (d, l) = gen_jk(k, true)?;
        let base = k + ceil_log2(k + 1) + 2;
        rows.eq(format!("k={k}: git on J_k"), base, worst_case_queries(&GitBisect, &d)?);
        let (c, _) = gen_comb(&d, None)?;
        rows.eq(format!("k={k}: git on comb(J_k)"), base + 1, worst_case_queries(&GitBisect, &c)?);
        rows.count(format!("k={k}: stage invariants"), k + 1, &jk_stage_failures(k, &d, &l)?);
    }
    Ok(())
}

fn fibonacci(rows: &mut Rows) -> Result<()> {
    for i in 1..=6usize {
        rows.eq(format!("optimal on F_{i}"), i - 1, optimal_queries(&gen_fibonacci(i)?)?);
    }
    for i in 1..=12usize {
        let t = fibonacci_strategy(FibKind::Tree, i)?;
        let ok = verify_tree(&t, &gen_fibonacci(i)?);
        rows.check(
            format!("strategy on F_{i}"),
            format!("height {} (valid tree)", i - 1),
            format!("height {}{}", t.height(), if ok { " (valid tree)" } else { " (INVALID tree)" }),
            ok && t.height() == i - 1,
        );
    }
    for i in 4..=12usize {
        let n = fibonacci_sizes(i)[i];
        rows.eq(format!("ceil(log_phi |F_{i}|) - 2 with |F_{i}| = {n}"), i - 1, ceil_log_phi(n) - 2);
    }
    Ok(())
}

/// States of a strategy tree with at least `min` live candidates.
fn tree_states<'a>(
    tree: &StrategyTree,
    state: BisectState<'a>,
    min: usize,
    out: &mut Vec<BisectState<'a>>,
) -> Result<()> {
    if state.n_live() < min {
        return Ok(());
    }
    if let StrategyTree::Query { query, bugged, clean } = tree {
        tree_states(bugged, state.apply_verdict(*query, crate::state::Verdict::Bugged)?, min, out)?;
        tree_states(clean, state.apply_verdict(*query, crate::state::Verdict::Clean)?, min, out)?;
    }
    out.push(state);
    Ok(())
}

fn golden_two_step(rows: &mut Rows) -> Result<()> {
    const COUNT: u64 = 500;
    let results: Vec<(usize, Option<String>)> = (0..COUNT)
        .into_par_iter()
        .map(|seed| -> Result<(usize, Option<String>)> {
            let n = corpus_size(8, seed, 14, 300);
            let d = gen_random_binary(n, seed)?;
            let root = BisectState::for_marked(&d)?;
            let tree = build_strategy_tree(&GoldenBisect, &root)?;
            let mut states = Vec::new();
            tree_states(&tree, root, 14, &mut states)?;
            for s in &states {
                if !golden_two_step_holds(s)? {
                    return Ok((states.len(), Some(format!("n={n} seed={seed} at {} live", s.n_live()))));
                }
            }
            Ok((states.len(), None))
        })
        .collect::<Result<_>>()?;
    let checked: usize = results.iter().map(|r| r.0).sum();
    let fails: Vec<String> = results.into_iter().filter_map(|r| r.1).collect();
    rows.count(
        format!("{COUNT} random binary DAGs, 14 <= n <= 300 ({checked} states with >= 14 live)"),
        COUNT as usize,
        &fails,
    );

    let f9 = gen_fig9();
    let s = BisectState::for_marked(&f9)?;
    rows.eq("fig9 worst-case live sizes", vec![13, 9, 5], worst_live_sizes(&GoldenBisect, &s, 2)?);
    rows.eq("fig9 violates the two-step bound", false, golden_two_step_holds(&s)?);
    Ok(())
}

fn reduction(rows: &mut Rows) -> Result<()> {
    let f = parse_bsat(EXAMPLE_CNF)?;
    let (inst, _) = reduce_bsat_to_crsp(&f)?;
    rows.eq("example formula: optimum", 6, crsp_optimal_queries(&inst.dag, &inst.innocent)?);

    let mut formulas = Vec::new();
    for vars in 1..=3 {
        formulas.extend(enumerate_preprocessed(vars, 4));
    }
    let results: Vec<(bool, Option<String>)> = formulas
        .par_iter()
        .map(|f| -> Result<(bool, Option<String>)> {
            let (inst, map) = reduce_bsat_to_crsp(f)?;
            let opt = crsp_optimal_queries(&inst.dag, &inst.innocent)?;
            let n = f.vars;
            Ok(match brute_force_sat(f) {
                Some(a) => {
                    let t = satisfying_assignment_to_strategy(f, &a, &map, &inst)?;
                    let ok = opt <= n + 3 && inst.verify_tree(&t) && t.height() <= n + 3;
                    (true, (!ok).then(|| format!("{:?}: opt {opt}, recipe height {}", f.clauses, t.height())))
                }
                None => (false, (opt <= n + 3).then(|| format!("{:?}: unsat but opt {opt}", f.clauses))),
            })
        })
        .collect::<Result<_>>()?;
    let sat = results.iter().filter(|r| r.0).count();
    let unsat = results.len() - sat;
    let fails: Vec<String> = results.into_iter().filter_map(|r| r.1).collect();
    rows.count(
        format!("all formulas over <= 3 variables, <= 4 clauses ({sat} satisfiable, {unsat} unsatisfiable): optimum <= n+3 iff satisfiable"),
        sat + unsat,
        &fails,
    );

    match find_unsatisfiable(4, 6) {
        Some(u) => {
            let (inst, _) = reduce_bsat_to_crsp(&u)?;
            let opt = crsp_optimal_queries(&inst.dag, &inst.innocent)?;
            rows.check(
                format!("unsatisfiable formula {:?} over {} variables", u.clauses, u.vars),
                format!(">= {}", u.vars + 4),
                opt.to_string(),
                opt >= u.vars + 4,
            );
        }
        None => rows.check("unsatisfiable formula search", "found", "none", false),
    }
    Ok(())
}

/// Descendant-closed random innocent set: all descendants of a random seed set.
fn random_closed_innocent(d: &Dag, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut set = fixedbitset::FixedBitSet::with_capacity(d.len());
    for v in 0..d.len() {
        if rng.random_bool(0.25) {
            set.union_with(&d.descendants(v));
        }
    }
    set.ones().collect()
}

fn transform_equivalence(rows: &mut Rows) -> Result<()> {
    const EACH: u64 = 50;
    let forward: Vec<Option<String>> = (0..EACH)
        .into_par_iter()
        .map(|seed| -> Result<Option<String>> {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let n = rng.random_range(2..=16);
            let d = gen_random_delta(n, 3, seed)?;
            let fits: Vec<usize> = (0..n).filter(|&b| d.ancestor_count(b) <= 12).collect();
            let b = fits[rng.random_range(0..fits.len())];
            let rsp = d.clone().with_sink(b)?;
            let (inst, _) = rsp_to_crsp(&d, b, 0)?;
            let a = optimal_queries(&rsp)?;
            let c = crsp_optimal_queries(&inst.dag, &inst.innocent)?;
            Ok((a != c).then(|| format!("seed={seed} b={b}: rsp {a}, crsp {c}")))
        })
        .collect::<Result<_>>()?;
    let fails: Vec<String> = forward.into_iter().flatten().collect();
    rows.count("plain -> confined keeps the optimum", EACH as usize, &fails);

    let backward: Vec<Option<String>> = (0..EACH)
        .into_par_iter()
        .map(|seed| -> Result<Option<String>> {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let n = rng.random_range(1..=11);
            let d = gen_random_delta(n, 3, 5000 + seed)?.without_labels();
            let inst = CrspInstance::new(d.clone(), random_closed_innocent(&d, &mut rng), 0)?;
            let rsp = crsp_to_rsp(&inst);
            let a = crsp_optimal_queries(&inst.dag, &inst.innocent)?;
            let c = optimal_queries(&rsp)?;
            Ok((a != c).then(|| format!("seed={seed}: crsp {a}, rsp {c}")))
        })
        .collect::<Result<_>>()?;
    let fails: Vec<String> = backward.into_iter().flatten().collect();
    rows.count(
        "confined (descendant-closed innocents) -> plain keeps the optimum",
        EACH as usize,
        &fails,
    );
    Ok(())
}

/// Small graphs for the solver cross-check.
fn small_corpus() -> Result<Vec<(String, Dag)>> {
    let mut out = Vec::new();
    for n in 1..=10 {
        out.push((format!("path{n}"), gen_path(n)?));
        out.push((format!("octopus{n}"), gen_octopus(n)?));
    }
    out.push(("claw".into(), gen_claw()));
    for i in 1..=4 {
        out.push((format!("fib{i}"), gen_fibonacci(i)?));
        out.push((format!("fib'{i}"), gen_fibonacci_prime(i)?));
    }
    out.push(("pathological3".into(), gen_pathological(3)?));
    for n in 2..=10 {
        for seed in 0..8 {
            out.push((format!("random-binary n={n} seed={seed}"), gen_random_binary(n, seed)?));
            out.push((format!("random-delta3 n={n} seed={seed}"), gen_random_delta(n, 3, seed)?));
        }
    }
    Ok(out)
}

fn oracle_equivalence(rows: &mut Rows) -> Result<()> {
    let small = small_corpus()?;
    let results: Vec<Option<String>> = small
        .par_iter()
        .map(|(name, d)| -> Result<Option<String>> {
            let a = optimal_queries(d)?;
            let b = brute_force_optimal(d)?;
            Ok((a != b).then(|| format!("{name}: memo {a}, brute {b}")))
        })
        .collect::<Result<_>>()?;
    let fails: Vec<String> = results.into_iter().flatten().collect();
    rows.count("memoized solver = brute force (n <= 10)", small.len(), &fails);

    let mut all = small;
    all.push(("fig4".into(), gen_fig4()));
    all.push(("fig9".into(), gen_fig9()));
    all.push(("pathological5".into(), gen_pathological(5)?));
    all.push(("jk3".into(), gen_jk(3, true)?.0));
    for seed in 0..20 {
        all.push((format!("random-binary n=60 seed={seed}"), gen_random_binary(60, seed)?));
    }
    let results: Vec<Option<String>> = all
        .par_iter()
        .map(|(name, d)| -> Result<Option<String>> {
            let mut bad = Vec::new();
            for p in [&GitBisect as &dyn Picker, &GoldenBisect] {
                let t = build_strategy_tree(p, &BisectState::for_marked(d)?)?;
                let per = per_faulty_queries(p, d)?;
                let m = per.iter().map(|x| x.1).max().unwrap_or(0);
                if t.height() != m || !verify_tree(&t, d) {
                    bad.push(format!("{}: height {}, enumeration {m}", p.name(), t.height()));
                }
            }
            Ok((!bad.is_empty()).then(|| format!("{name}: {}", bad.join("; "))))
        })
        .collect::<Result<_>>()?;
    let fails: Vec<String> = results.into_iter().flatten().collect();
    rows.count("tree height = max over faulty commits (git, golden)", all.len(), &fails);
    Ok(())
}
