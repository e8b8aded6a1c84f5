//! Graph families. Every generator marks its sink as the bugged vertex and
//! documents its id layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dag::Dag;
use crate::error::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn marked(n: usize, arcs: Vec<(usize, usize)>, sink: usize) -> Dag {
    Dag::new(n, arcs)
        .expect("generator output is acyclic")
        .with_sink(sink)
        .expect("sink in range")
}

/// Chain `0 -> 1 -> ... -> n-1`.
pub fn gen_path(n: usize) -> Result<Dag> {
    if n < 1 {
        return Err(bad("path needs n >= 1"));
    }
    Ok(marked(n, (1..n).map(|i| (i - 1, i)).collect(), n - 1))
}

/// Vertices `0..n-1` are all parents of the sink `n-1`.
pub fn gen_octopus(n: usize) -> Result<Dag> {
    if n < 1 {
        return Err(bad("octopus needs n >= 1"));
    }
    Ok(marked(n, (0..n - 1).map(|i| (i, n - 1)).collect(), n - 1))
}

/// `0 -> 2`, `1 -> 2`, `2 -> 3`.
pub fn gen_claw() -> Dag {
    marked(4, vec![(0, 2), (1, 2), (2, 3)], 3)
}

/// Base vertex `base[i]` is `v_{i+1}`, `comb[i]` is `u_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombLabelling {
    pub base: Vec<usize>,
    pub comb: Vec<usize>,
}

impl CombLabelling {
    /// Checks that `dag` is the comb this labelling describes.
    pub fn check(&self, dag: &Dag) -> Result<()> {
        let n = self.base.len();
        let fail = |m: &str| Err(Error::NotCombLabelled(m.to_string()));
        if n == 0 || self.comb.len() != n || dag.len() != 2 * n {
            return fail("size mismatch");
        }
        if dag.sink() != Some(self.comb[n - 1]) {
            return fail("u_n is not the marked vertex");
        }
        for i in 0..n {
            let (v, u) = (self.base[i], self.comb[i]);
            if v >= dag.len() || u >= dag.len() || !dag.parents(u).contains(&v) {
                return fail("missing v_i -> u_i");
            }
            if i + 1 < n && !dag.parents(self.comb[i + 1]).contains(&u) {
                return fail("missing u_i -> u_i+1");
            }
        }
        Ok(())
    }
}

fn comb_order(dag: &Dag, order: Option<&[usize]>) -> Result<Vec<usize>> {
    match order {
        Some(o) if dag.is_topological(o) => Ok(o.to_vec()),
        Some(_) => Err(Error::InvalidOrder),
        None => {
            let ids: Vec<usize> = (0..dag.len()).collect();
            if dag.is_topological(&ids) {
                Ok(ids)
            } else {
                Ok(dag.topological_order().to_vec())
            }
        }
    }
}

/// Adds a comb along `order` (default: id order if topological, else the
/// smallest-id Kahn order). Base ids are kept; `u_i` gets id `n + i - 1`.
pub fn gen_comb(dag: &Dag, order: Option<&[usize]>) -> Result<(Dag, CombLabelling)> {
    let n = dag.len();
    if n == 0 {
        return Err(bad("comb of an empty graph"));
    }
    let base = comb_order(dag, order)?;
    let comb: Vec<usize> = (n..2 * n).collect();
    let mut arcs = dag.arcs().to_vec();
    arcs.extend(base.iter().zip(&comb).map(|(&v, &u)| (v, u)));
    arcs.extend((1..n).map(|i| (comb[i - 1], comb[i])));
    let mut out = marked(2 * n, arcs, comb[n - 1]);
    if let Some(labels) = dag.labels() {
        let mut l = labels.to_vec();
        l.extend((1..=n).map(|i| format!("u{i}")));
        out = out.with_labels(l)?;
    }
    Ok((out, CombLabelling { base, comb }))
}

/// Comb of an even-size graph without the arc `v_{n/2} -> u_{n/2}`.
pub fn gen_comb_even_tweak(dag: &Dag, order: Option<&[usize]>) -> Result<(Dag, CombLabelling)> {
    let n = dag.len();
    if n == 0 || n % 2 == 1 {
        return Err(bad("even-comb tweak needs an even, non-zero vertex count"));
    }
    let (c, l) = gen_comb(dag, order)?;
    let drop = (l.base[n / 2 - 1], l.comb[n / 2 - 1]);
    let arcs = c.arcs().iter().copied().filter(|&a| a != drop).collect();
    let mut out = marked(2 * n, arcs, l.comb[n - 1]);
    if let Some(labels) = c.labels() {
        out = out.with_labels(labels.to_vec())?;
    }
    Ok((out, l))
}

/// `comb(octopus(2^{k-1} - 1))`, `2^k - 2` vertices.
pub fn gen_pathological(k: usize) -> Result<Dag> {
    if !(3..=20).contains(&k) {
        return Err(bad("pathological needs 3 <= k <= 20"));
    }
    let oct = gen_octopus((1 << (k - 1)) - 1)?;
    Ok(gen_comb(&oct, None)?.0)
}

/// Vertex ids of the interesting parts of a `J_k` graph.
///
/// Layout: for each of the `delta` long backbone paths `p`, its vertices
/// `p_1..p_k` get ids `p*k .. p*k+k-1`; then `c`; then `z_1..z_k`. Stage
/// `d = 1..k` follows: one `ell_d`-vertex path per long backbone path (in
/// order), then the path ending in `z'_d`, each listed from its first
/// vertex. Stage `J_k^d` is the prefix of the first `stage_sizes[d]` ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JkLayout {
    pub k: usize,
    pub delta: usize,
    /// `p_k` for each long backbone path (the parents of `c`).
    pub x_k: Vec<usize>,
    pub c: usize,
    /// `z_1..z_k`; `z_k` is the sink.
    pub z: Vec<usize>,
    /// `z'_d` for `d = 1..k` (index `d-1`).
    pub z_prime: Vec<usize>,
    /// `ell_d` for `d = 1..k` (index `d-1`), after any parity fix.
    pub ell: Vec<usize>,
    /// `n_0..n_k`.
    pub stage_sizes: Vec<usize>,
    pub parity_fixed: bool,
}

impl JkLayout {
    /// Stage `J_k^d` as its own graph, sink `z_k` marked.
    pub fn stage(&self, dag: &Dag, d: usize) -> Dag {
        let n = self.stage_sizes[d];
        let arcs = dag.arcs().iter().copied().filter(|&(u, v)| u < n && v < n).collect();
        marked(n, arcs, self.z[self.k - 1])
    }
}

/// Binary `J_k`; see [`gen_jk_delta`].
pub fn gen_jk(k: usize, parity_fix: bool) -> Result<(Dag, JkLayout)> {
    gen_jk_delta(k, 2, parity_fix)
}

/// `delta + 1` merged backbone paths with `ell_d = floor(n_{d-1} / (delta(delta+1))) + 1`.
/// With `parity_fix`, an even final size gets `ell_k + 1`; for odd `delta`
/// the size is always odd already.
pub fn gen_jk_delta(k: usize, delta: usize, parity_fix: bool) -> Result<(Dag, JkLayout)> {
    if k < 1 {
        return Err(bad("J_k needs k >= 1"));
    }
    if delta < 2 {
        return Err(bad("J_k needs delta >= 2"));
    }
    let mut arcs = Vec::new();
    for p in 0..delta {
        for j in 1..k {
            arcs.push((p * k + j - 1, p * k + j));
        }
    }
    let c = delta * k;
    let x_k: Vec<usize> = (0..delta).map(|p| p * k + k - 1).collect();
    for &x in &x_k {
        arcs.push((x, c));
    }
    let z: Vec<usize> = (c + 1..=c + k).collect();
    arcs.push((c, z[0]));
    for j in 1..k {
        arcs.push((z[j - 1], z[j]));
    }
    let mut n = c + k + 1;
    let mut stage_sizes = vec![n];
    let mut ell = Vec::new();
    let mut z_prime = Vec::new();
    let mut parity_fixed = false;
    for d in 1..=k {
        let mut l = n / (delta * (delta + 1)) + 1;
        if d == k && parity_fix && (n + (delta + 1) * l).is_multiple_of(2) && (delta + 1) % 2 == 1 {
            l += 1;
            parity_fixed = true;
        }
        let mut ends = Vec::new();
        let push_path = |target: usize, arcs: &mut Vec<(usize, usize)>, n: &mut usize| {
            let first = *n;
            for t in 1..l {
                arcs.push((first + t - 1, first + t));
            }
            let last = first + l - 1;
            arcs.push((last, target));
            *n += l;
            (first, last)
        };
        for p in 0..delta {
            // p_{k+1-d}, 1-indexed.
            let target = p * k + (k - d);
            ends.push(push_path(target, &mut arcs, &mut n).1);
        }
        let (zfirst, zlast) = push_path(z[d - 1], &mut arcs, &mut n);
        for e in ends {
            arcs.push((e, zfirst));
        }
        z_prime.push(zlast);
        ell.push(l);
        stage_sizes.push(n);
    }
    let dag = marked(n, arcs, z[k - 1]);
    Ok((
        dag,
        JkLayout { k, delta, x_k, c, z, z_prime, ell, stage_sizes, parity_fixed },
    ))
}

/// `|F_0| .. |F_i|` with `|F_0| = 0`.
pub fn fibonacci_sizes(i: usize) -> Vec<usize> {
    let mut s = vec![0, 1];
    while s.len() <= i {
        let j = s.len();
        s.push(s[j - 1] + s[j - 2] + 1);
    }
    s.truncate(i + 1);
    s
}

/// `F_i` laid out as `[F_{i-1}][F_{i-2}][sink]`, `F_0` empty.
pub fn gen_fibonacci(i: usize) -> Result<Dag> {
    if i < 1 {
        return Err(bad("fibonacci index must be >= 1"));
    }
    let sizes = fibonacci_sizes(i);
    let mut arcs = Vec::new();
    fib_arcs(&sizes, i, 0, &mut arcs);
    Ok(marked(sizes[i], arcs, sizes[i] - 1))
}

fn fib_arcs(sizes: &[usize], i: usize, off: usize, arcs: &mut Vec<(usize, usize)>) {
    if i < 2 {
        return;
    }
    let sink = off + sizes[i] - 1;
    fib_arcs(sizes, i - 1, off, arcs);
    arcs.push((off + sizes[i - 1] - 1, sink));
    if sizes[i - 2] > 0 {
        let off2 = off + sizes[i - 1];
        fib_arcs(sizes, i - 2, off2, arcs);
        arcs.push((off2 + sizes[i - 2] - 1, sink));
    }
}

/// `F_i` plus one new sink below its sink.
pub fn gen_fibonacci_prime(i: usize) -> Result<Dag> {
    let f = gen_fibonacci(i)?;
    let n = f.len();
    let mut arcs = f.arcs().to_vec();
    arcs.push((n - 1, n));
    Ok(marked(n + 1, arcs, n))
}

fn labelled(n: usize, arcs_by_label: &[(usize, usize)]) -> Dag {
    let arcs = arcs_by_label.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
    marked(n, arcs, n - 1)
        .with_labels((1..=n).map(|i| i.to_string()).collect())
        .expect("label count")
}

/// The 21-vertex worked example; id = label - 1, sink labelled 21.
pub fn gen_fig4() -> Dag {
    labelled(
        21,
        &[
            (1, 2), (2, 3), (3, 4), (4, 5), (5, 7), (6, 7), (7, 14),
            (8, 9), (9, 10), (10, 11), (11, 12), (12, 13), (13, 14),
            (14, 15), (15, 16), (16, 21),
            (17, 18), (18, 19), (19, 20), (20, 21),
            (4, 17), (9, 17), (14, 19),
        ],
    )
}

/// The 13-vertex backbone on which golden bisect misses its two-step bound.
pub fn gen_fig9() -> Dag {
    labelled(
        13,
        &[
            (1, 2), (2, 3), (3, 4), (4, 9),
            (5, 6), (6, 7), (7, 8), (8, 9),
            (9, 10), (10, 11), (11, 12), (12, 13),
        ],
    )
}

/// Random single-sink DAG with indegree at most 2.
pub fn gen_random_binary(n: usize, seed: u64) -> Result<Dag> {
    gen_random_delta(n, 2, seed)
}

/// Random single-sink DAG with indegree at most `delta`.
///
/// Ids are a topological order and `n-1` is the sink. With a ChaCha8 stream
/// seeded by `seed`:
/// 1. for `i = n-2` down to `0`, add `i -> j` for `j` uniform among the later
///    vertices whose indegree is below `delta` (vertex `i+1` always
///    qualifies), so every vertex reaches the sink;
/// 2. draw `t` uniform in `0..=n` and make `t` attempts: draw `u`, `v`
///    uniform in `0..n`, order them, and add `u -> v` unless `u == v`, the
///    arc exists, or `v` is full.
pub fn gen_random_delta(n: usize, delta: usize, seed: u64) -> Result<Dag> {
    if n < 1 {
        return Err(bad("random DAG needs n >= 1"));
    }
    if delta < 1 {
        return Err(bad("indegree cap must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indeg = vec![0usize; n];
    let mut present = std::collections::HashSet::new();
    let mut arcs = Vec::new();
    for i in (0..n.saturating_sub(1)).rev() {
        let open: Vec<usize> = (i + 1..n).filter(|&j| indeg[j] < delta).collect();
        let j = open[rng.random_range(0..open.len())];
        indeg[j] += 1;
        present.insert((i, j));
        arcs.push((i, j));
    }
    let tries = rng.random_range(0..=n);
    for _ in 0..tries {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let (u, v) = (a.min(b), a.max(b));
        if u == v || indeg[v] >= delta || present.contains(&(u, v)) {
            continue;
        }
        indeg[v] += 1;
        present.insert((u, v));
        arcs.push((u, v));
    }
    Ok(marked(n, arcs, n - 1))
}

/// Family names understood by [`gen_by_name`]: `fig4`, `fig9`, `claw`,
/// `pathN`, `octopusN`, `fibN`, `pathologicalK`, `jkK`.
pub fn gen_by_name(name: &str) -> Option<Dag> {
    let num = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.parse().ok() };
    match name {
        "fig4" => return Some(gen_fig4()),
        "fig9" => return Some(gen_fig9()),
        "claw" => return Some(gen_claw()),
        _ => {}
    }
    if let Some(k) = num("pathological") {
        return gen_pathological(k).ok();
    }
    if let Some(n) = num("path") {
        return gen_path(n).ok();
    }
    if let Some(n) = num("octopus") {
        return gen_octopus(n).ok();
    }
    if let Some(i) = num("fib") {
        return gen_fibonacci(i).ok();
    }
    if let Some(k) = num("jk") {
        return gen_jk(k, true).ok().map(|(d, _)| d);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octopus_shape() {
        let d = gen_octopus(6).unwrap();
        assert_eq!(d.arcs().len(), 5);
        assert_eq!(d.indegree(5), 5);
        assert_eq!(d.max_indegree(), 5);
        assert_eq!(d.ancestor_count(5), 6);
        assert!((0..5).all(|v| d.ancestor_count(v) == 1));
    }

    #[test]
    fn small_ones() {
        assert_eq!(gen_path(1).unwrap().len(), 1);
        assert!(gen_path(0).is_err());
        let c = gen_claw();
        assert_eq!((c.len(), c.max_indegree()), (4, 2));
    }

    #[test]
    fn comb_counts() {
        let base = gen_random_binary(7, 3).unwrap();
        let (c, l) = gen_comb(&base, None).unwrap();
        assert_eq!(c.len(), 14);
        assert_eq!(c.arcs().len(), base.arcs().len() + 13);
        for (i, &u) in l.comb.iter().enumerate() {
            assert_eq!(c.ancestor_count(u), 2 * (i + 1));
        }
        for v in 0..7 {
            assert_eq!(c.ancestor_count(v), base.ancestor_count(v));
        }
        l.check(&c).unwrap();
    }

    #[test]
    fn comb_rejects_bad_order() {
        let p = gen_path(3).unwrap();
        assert_eq!(gen_comb(&p, Some(&[2, 1, 0])).unwrap_err(), Error::InvalidOrder);
    }

    #[test]
    fn comb_uses_kahn_when_ids_are_not_topological() {
        let d = Dag::new(3, vec![(2, 0), (0, 1)]).unwrap();
        let (_, l) = gen_comb(&d, None).unwrap();
        assert_eq!(l.base, vec![2, 0, 1]);
    }

    #[test]
    fn tweak_drops_one_arc() {
        let base = gen_octopus(4).unwrap();
        let (c, _) = gen_comb(&base, None).unwrap();
        let (t, _) = gen_comb_even_tweak(&base, None).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.arcs().len() + 1, c.arcs().len());
        assert!(gen_comb_even_tweak(&gen_path(3).unwrap(), None).is_err());
    }

    #[test]
    fn pathological_sizes() {
        assert_eq!(gen_pathological(3).unwrap().len(), 6);
        assert_eq!(gen_pathological(4).unwrap().len(), 14);
        assert!(gen_pathological(2).is_err());
    }

    #[test]
    fn jk3_matches_figure() {
        let (d, l) = gen_jk(3, false).unwrap();
        assert_eq!(d.len(), 40);
        assert_eq!(l.ell, vec![2, 3, 5]);
        assert_eq!(l.stage_sizes, vec![10, 16, 25, 40]);
        // x_1 has id 0.
        assert_eq!(d.ancestor_count(0), 6);
        assert!(d.is_binary());
        let (d, l) = gen_jk(3, true).unwrap();
        assert_eq!(d.len(), 43);
        assert!(l.parity_fixed);
    }

    #[test]
    fn fibonacci_shapes() {
        assert_eq!(gen_fibonacci(1).unwrap().len(), 1);
        assert_eq!(gen_fibonacci(2).unwrap().len(), 2);
        assert_eq!(gen_fibonacci(5).unwrap().len(), 12);
        let f6 = gen_fibonacci(6).unwrap();
        assert_eq!(f6.len(), 20);
        assert!(f6.is_binary());
        assert!((0..20).all(|v| f6.children(v).len() <= 1));
        assert_eq!(gen_fibonacci_prime(3).unwrap().len(), 5);
    }

    #[test]
    fn figures() {
        let f4 = gen_fig4();
        assert_eq!(f4.len(), 21);
        assert_eq!(f4.label(f4.sink().unwrap()), "21");
        assert_eq!(f4.ancestor_count(4), 5);
        assert_eq!(f4.ancestor_count(17), 8);
        assert!(f4.is_binary());
        assert_eq!(gen_fig9().len(), 13);
    }

    #[test]
    fn random_is_deterministic() {
        let a = gen_random_binary(50, 7).unwrap();
        let b = gen_random_binary(50, 7).unwrap();
        assert_eq!(a.arcs(), b.arcs());
        assert_eq!(gen_random_binary(1, 0).unwrap().len(), 1);
        assert_eq!(a.ancestor_count(49), 50);
        assert!(a.is_binary());
    }

    #[test]
    fn names() {
        assert_eq!(gen_by_name("path5").unwrap().len(), 5);
        assert_eq!(gen_by_name("pathological4").unwrap().len(), 14);
        assert!(gen_by_name("nope").is_none());
    }
}
