//! Reduction soundness on four-variable formulas and the transform round trip.

use dagbisect::optimal::crsp_optimal_queries;
use dagbisect::reduction::*;
use rayon::prelude::*;

const EXAMPLE: &str = "p cnf 3 2\n1 -2 0\n-1 -2 -3 0\n";

fn optimum(f: &BsatFormula) -> usize {
    let (inst, _) = reduce_bsat_to_crsp(f).unwrap();
    crsp_optimal_queries(&inst.dag, &inst.innocent).unwrap()
}

#[test]
fn example_instance() {
    let f = parse_bsat(EXAMPLE).unwrap();
    let (inst, map) = reduce_bsat_to_crsp(&f).unwrap();
    assert_eq!(inst.dag.len(), 20);
    assert_eq!(crsp_optimal_queries(&inst.dag, &inst.innocent).unwrap(), 6);
    let a = brute_force_sat(&f).unwrap();
    let t = satisfying_assignment_to_strategy(&f, &a, &map, &inst).unwrap();
    assert!(inst.verify_tree(&t));
    assert!(t.height() <= 6);
    assert!(satisfying_assignment_to_strategy(&f, &[true, true, true], &map, &inst).is_err());
}

#[test]
fn every_unsatisfiable_four_variable_formula_exceeds_budget() {
    // More than 6 clauses cannot fit: 12 occurrences, 2 per clause at least.
    let unsat: Vec<BsatFormula> = enumerate_preprocessed(4, 6)
        .into_par_iter()
        .filter(|f| brute_force_sat(f).is_none())
        .collect();
    assert_eq!(unsat.len(), 288);
    let low: Vec<_> = unsat
        .par_iter()
        .filter(|f| optimum(f) <= f.vars + 3)
        .map(|f| f.clauses.clone())
        .collect();
    assert!(low.is_empty(), "{low:?}");
}

#[test]
fn sampled_satisfiable_four_variable_formulas_meet_budget() {
    let sat: Vec<(BsatFormula, Vec<bool>)> = enumerate_preprocessed(4, 6)
        .into_iter()
        .step_by(211)
        .filter_map(|f| brute_force_sat(&f).map(|a| (f, a)))
        .collect();
    assert!(sat.len() > 500);
    let bad: Vec<_> = sat
        .par_iter()
        .filter(|(f, a)| {
            let (inst, map) = reduce_bsat_to_crsp(f).unwrap();
            let t = satisfying_assignment_to_strategy(f, a, &map, &inst).unwrap();
            !(inst.verify_tree(&t) && t.height() <= f.vars + 3 && optimum(f) <= f.vars + 3)
        })
        .map(|(f, _)| f.clauses.clone())
        .collect();
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn reduce_output_shape() {
    for f in enumerate_preprocessed(3, 4).into_iter().step_by(7) {
        let (inst, _) = reduce_bsat_to_crsp(&f).unwrap();
        assert_eq!(inst.dag.len(), 5 * f.vars + f.clauses.len() + 3);
        assert!(inst.dag.is_binary());
        assert_eq!(inst.budget, f.vars + 3);
    }
}

#[test]
fn dimacs_round_trip() {
    let f = parse_bsat(EXAMPLE).unwrap();
    assert_eq!(parse_bsat(&f.to_dimacs()).unwrap(), f);
    assert!(parse_bsat("p cnf 2 1\n1 0\n").is_err());
    assert!(parse_bsat("p cnf 1 4\n1 1 0\n1 -1 0\n-1 1 0\n1 -1 0\n").is_err());
}

#[test]
fn all_innocent_instance_is_trivial() {
    let d = dagbisect::generators::gen_path(4).unwrap();
    let inst = CrspInstance::new(d.clone(), 0..4, 0).unwrap();
    assert_eq!(crsp_optimal_queries(&inst.dag, &inst.innocent).unwrap(), 0);
    let rsp = crsp_to_rsp(&inst);
    assert_eq!(dagbisect::optimal::optimal_queries(&rsp).unwrap(), 0);
}
