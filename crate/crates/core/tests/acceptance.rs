//! Runs every acceptance claim and prints one PASS/FAIL line per claim.
//! Exits non-zero when any claim fails.

use dagbisect::claims::{run_claim, CLAIM_NAMES};
use rayon::prelude::*;

fn main() {
    let reports: Vec<_> = CLAIM_NAMES
        .par_iter()
        .map(|n| run_claim(n).unwrap_or_else(|e| panic!("{n}: {e}")))
        .collect();
    let mut failed = Vec::new();
    for r in &reports {
        println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.claim);
        for row in r.rows.iter().filter(|row| !row.pass) {
            println!("    {}: expected {}, got {}", row.case, row.expected, row.actual);
        }
        if !r.pass {
            failed.push(r.claim.clone());
        }
    }
    println!("acceptance: {}/{} claims pass", reports.len() - failed.len(), reports.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
