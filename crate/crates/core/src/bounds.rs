//! Exact integer forms of the logarithmic bounds. Nothing here touches
//! floating point: powers of phi are handled as `(L_e + F_e sqrt 5) / 2`
//! with Lucas and Fibonacci numbers.

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1, "log of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// `s <= n / phi`, i.e. `s^2 + sn <= n^2`.
pub fn le_n_over_phi(n: usize, s: usize) -> bool {
    let (n, s) = (n as u128, s as u128);
    s * s + s * n <= n * n
}

/// `s <= n / phi^2`, i.e. `3ns <= n^2 + s^2` (valid for `s <= n`).
pub fn le_n_over_phi2(n: usize, s: usize) -> bool {
    let (n, s) = (n as u128, s as u128);
    s <= n && 3 * n * s <= n * n + s * s
}

/// (Lucas L_e, Fibonacci F_e).
fn lucas_fib(e: u32) -> (i128, i128) {
    let (mut l, mut f) = (2i128, 0i128);
    let (mut l1, mut f1) = (1i128, 1i128);
    for _ in 0..e {
        (l, l1) = (l1, l + l1);
        (f, f1) = (f1, f + f1);
    }
    (l, f)
}

/// Sign of `phi^e - n`.
fn cmp_phi_pow(e: u32, n: usize) -> std::cmp::Ordering {
    // phi^e - n = ((L - 2n) + F sqrt 5) / 2 with F >= 0.
    let (l, f) = lucas_fib(e);
    let a = l - 2 * n as i128;
    let b2 = 5 * f * f;
    if a >= 0 {
        if a == 0 && f == 0 {
            std::cmp::Ordering::Equal
        } else {
            std::cmp::Ordering::Greater
        }
    } else {
        // a < 0: sign of b sqrt5 - |a|.
        (b2).cmp(&(a * a))
    }
}

/// `ceil(log_phi n)` for `n >= 1`.
pub fn ceil_log_phi(n: usize) -> usize {
    assert!(n >= 1, "log of zero");
    (0u32..)
        .find(|&e| cmp_phi_pow(e, n) != std::cmp::Ordering::Less)
        .unwrap() as usize
}

/// `q <= log_phi(n) + 1`.
pub fn within_golden_bound(q: usize, n: usize) -> bool {
    q == 0 || cmp_phi_pow((q - 1) as u32, n) != std::cmp::Ordering::Greater
}

/// `q <= log2(n) / log2((d+1)/d)`, i.e. `(d+1)^q <= n d^q`.
pub fn within_delta_bound(q: usize, n: usize, delta: usize) -> bool {
    use num_bigint::BigUint;
    let lhs = BigUint::from(delta + 1).pow(q as u32);
    let rhs = BigUint::from(n) * BigUint::from(delta).pow(q as u32);
    lhs <= rhs
}

/// `q <= log_{3/2} n`.
pub fn within_git_bound(q: usize, n: usize) -> bool {
    within_delta_bound(q, n, 2)
}

/// Table 1 values: `F(1) = 0`, `F(n) = 1 + F(floor((2n+1)/3))`.
pub fn table1_f(n: usize) -> usize {
    assert!(n >= 1);
    if n == 1 {
        0
    } else {
        1 + table1_f((2 * n + 1) / 3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2() {
        let got: Vec<usize> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn log_phi_matches_float() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for n in 1..2000usize {
            let f = ((n as f64).ln() / phi.ln() - 1e-9).ceil().max(0.0) as usize;
            assert_eq!(ceil_log_phi(n), f, "n = {n}");
        }
        assert_eq!(ceil_log_phi(4), 3);
    }

    #[test]
    fn phi_predicates() {
        // 13 -> 9 -> 5 breaks both.
        assert!(!le_n_over_phi(13, 9));
        assert!(le_n_over_phi(13, 8));
        assert!(!le_n_over_phi2(13, 5));
        assert!(le_n_over_phi2(13, 4));
    }

    #[test]
    fn table1() {
        let got: Vec<usize> = (1..=13).map(table1_f).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 3, 4, 4, 4, 5, 5, 5, 5, 6]);
    }

    #[test]
    fn git_bound_small() {
        // log_{3/2} 21 ~ 7.5
        assert!(within_git_bound(7, 21));
        assert!(!within_git_bound(8, 21));
        // log_phi 21 + 1 ~ 7.33
        assert!(within_golden_bound(7, 21));
        assert!(!within_golden_bound(8, 21));
    }
}
