//! Property tests over random graphs.

use std::collections::VecDeque;

use dagbisect::bounds::{ceil_log2, ceil_log_phi};
use dagbisect::generators::{gen_random_binary, gen_random_delta};
use dagbisect::optimal::{optimal_queries, optimal_strategy};
use dagbisect::reduction::{crsp_to_rsp, parse_crsp, rsp_to_crsp};
use dagbisect::strategies::{per_faulty_queries, run_session, SimulatedOracle};
use dagbisect::{
    boundary_sets, build_strategy_tree, parse_dag, verify_tree, write_dag, BisectState, Dag,
    Error, GitBisect, GoldenBisect, Picker, StrategyTree, Verdict,
};
use proptest::prelude::*;

/// Reachability by breadth-first search over child lists.
fn reaches(d: &Dag, u: usize, v: usize) -> bool {
    let mut seen = vec![false; d.len()];
    let mut queue = VecDeque::from([u]);
    seen[u] = true;
    while let Some(x) = queue.pop_front() {
        if x == v {
            return true;
        }
        for &c in d.children(x) {
            if !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    false
}

/// Random state reached by following random verdicts from the marked vertex.
fn walk<'a>(d: &'a Dag, picker: &dyn Picker, answers: &[bool]) -> Vec<BisectState<'a>> {
    let mut s = BisectState::for_marked(d).unwrap();
    let mut out = vec![s.clone()];
    for &bugged in answers {
        if s.n_live() < 2 {
            break;
        }
        let q = picker.pick(&s).unwrap();
        let v = if bugged { Verdict::Bugged } else { Verdict::Clean };
        s = s.apply_verdict(q, v).unwrap();
        out.push(s.clone());
    }
    out
}

fn binary() -> impl Strategy<Value = Dag> {
    (1usize..=120, any::<u64>()).prop_map(|(n, seed)| gen_random_binary(n, seed).unwrap())
}

fn small_binary() -> impl Strategy<Value = Dag> {
    (1usize..=14, any::<u64>()).prop_map(|(n, seed)| gen_random_binary(n, seed).unwrap())
}

fn small_any() -> impl Strategy<Value = Dag> {
    (1usize..=14, 2usize..=5, any::<u64>())
        .prop_map(|(n, delta, seed)| gen_random_delta(n, delta, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ancestor_table_is_transitive_closure(n in 1usize..=50, delta in 2usize..=4, seed in any::<u64>()) {
        let d = gen_random_delta(n, delta, seed).unwrap();
        let t = d.ancestor_table();
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(t.is_ancestor(u, v), reaches(&d, u, v), "{} -> {}", u, v);
            }
        }
    }

    #[test]
    fn scores_bounded(d in binary(), answers in prop::collection::vec(any::<bool>(), 0..6)) {
        for s in walk(&d, &GitBisect, &answers) {
            for v in s.live().collect::<Vec<_>>() {
                let sc = s.score(v).unwrap();
                prop_assert!(sc <= s.n_live() / 2);
            }
        }
    }

    #[test]
    fn contradicting_verdicts_fail(d in binary()) {
        let s = BisectState::for_marked(&d).unwrap();
        prop_assume!(s.n_live() >= 2);
        let q = GitBisect.pick(&s).unwrap();
        let b = s.apply_verdict(q, Verdict::Bugged).unwrap();
        let inconsistent = matches!(b.apply_verdict(q, Verdict::Clean), Err(Error::Inconsistent { .. }));
        prop_assert!(inconsistent);
    }

    #[test]
    fn prune_idempotent(d in binary(), v in any::<prop::sample::Index>()) {
        let b = v.index(d.len());
        let once = BisectState::new(&d, b).unwrap();
        let twice = once.prune_to_ancestors(b).unwrap();
        prop_assert_eq!(once.candidates(), twice.candidates());
    }

    #[test]
    fn balanced_vertex_exists(d in binary(), answers in prop::collection::vec(any::<bool>(), 0..6)) {
        for s in walk(&d, &GoldenBisect, &answers) {
            let n = s.n_live();
            if n < 2 { continue; }
            let live: Vec<usize> = s.live().collect();
            // n/3 <= |v| <= (2n+1)/3
            let ok = live.iter().any(|&v| {
                let a = s.live_ancestors(v);
                3 * a >= n && 3 * a <= 2 * n + 1
            });
            prop_assert!(ok, "no balanced vertex at {} live", n);
            let b = boundary_sets(&s);
            let best = b.b_ge.iter().chain(&b.b_lt).map(|&v| s.score(v).unwrap()).max().unwrap_or(0);
            prop_assert!(3 * best + 1 >= n, "pool best {} at {} live", best, n);
        }
    }

    #[test]
    fn delta_ary_balanced_vertex(n in 2usize..=150, delta in 3usize..=4, seed in any::<u64>()) {
        let d = gen_random_delta(n, delta, seed).unwrap();
        let s = BisectState::for_marked(&d).unwrap();
        let m = s.n_live();
        prop_assume!(m >= 2);
        // (m-1)/(delta+1) < |v| <= (delta m + 1)/(delta+1)
        let ok = s.live().any(|v| {
            let a = s.live_ancestors(v);
            a * (delta + 1) > m - 1 && a * (delta + 1) <= delta * m + 1
        });
        prop_assert!(ok);
    }

    #[test]
    fn tree_height_matches_sessions(d in binary()) {
        for p in [&GitBisect as &dyn Picker, &GoldenBisect] {
            let t = build_strategy_tree(p, &BisectState::for_marked(&d).unwrap()).unwrap();
            prop_assert!(verify_tree(&t, &d));
            let mut worst = 0;
            for f in d.ancestors(d.marked().unwrap()).ones() {
                let r = run_session(p, &d, &mut SimulatedOracle::new(f)).unwrap();
                prop_assert_eq!(r.faulty, f);
                prop_assert_eq!(Some(r.queries), t.depth_of(Some(f)));
                worst = worst.max(r.queries);
            }
            prop_assert_eq!(t.height(), worst);
            let per = per_faulty_queries(p, &d).unwrap();
            prop_assert_eq!(per.iter().map(|x| x.1).max().unwrap(), worst);
        }
    }

    #[test]
    fn optimum_sandwich(d in small_any()) {
        let n = d.ancestor_count(d.marked().unwrap());
        let opt = optimal_queries(&d).unwrap();
        prop_assert!(ceil_log2(n) <= opt && opt < n);
        let t = optimal_strategy(&d).unwrap();
        prop_assert!(verify_tree(&t, &d));
        prop_assert_eq!(t.height(), opt);
        let git = dagbisect::worst_case_queries(&GitBisect, &d).unwrap();
        prop_assert!(opt <= git);
    }

    #[test]
    fn binary_optimum_within_log_phi(d in small_binary()) {
        let n = d.ancestor_count(d.marked().unwrap());
        prop_assert!(optimal_queries(&d).unwrap() <= ceil_log_phi(n));
    }

    #[test]
    fn dag_text_round_trip(d in binary()) {
        let text = write_dag(&d);
        let back = parse_dag(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(write_dag(&back), text);
    }

    #[test]
    fn tree_json_round_trip(d in small_binary()) {
        let t = build_strategy_tree(&GoldenBisect, &BisectState::for_marked(&d).unwrap()).unwrap();
        let json = t.to_json();
        let back: StrategyTree = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_json(), json);
    }

    #[test]
    fn confined_round_trip(n in 1usize..=12, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let d = gen_random_delta(n, 3, seed).unwrap();
        let b = pick.index(n);
        let plain = d.clone().with_sink(b).unwrap();
        let (inst, _) = rsp_to_crsp(&d, b, 3).unwrap();
        let text = inst.to_text();
        let parsed = parse_crsp(&text).unwrap();
        prop_assert_eq!(parsed.to_text(), text);
        let a = optimal_queries(&plain).unwrap();
        prop_assert_eq!(inst.optimal_queries(Default::default()).unwrap(), a);
        let back = crsp_to_rsp(&inst);
        prop_assert_eq!(optimal_queries(&back).unwrap(), a);
    }
}
