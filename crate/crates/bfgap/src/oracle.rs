//! Brute-force reference implementations.
//!
//! Everything here is written for independence from the optimized search
//! paths, not for speed: plain enumeration over all cubes or all subsets.
//! The unit and acceptance suites use these as oracles at small `n`.

use crate::bfcore::{spanning_subcube, Cube, PartialFunction, View};
use crate::implicants::cube_meets_ones;

/// All implicates of `f`: every cube free of 1-points, by direct
/// enumeration of all `3^n` cubes.
pub fn all_implicates(f: &PartialFunction) -> Vec<Cube> {
    let n = f.n();
    let ones = f.one_points();
    let mut out = Vec::new();
    for fixed in 0..1u32 << n {
        let mut values = fixed;
        loop {
            let c = Cube::new(n, fixed, values);
            if !cube_meets_ones(f, &c, &ones) {
                out.push(c);
            }
            if values == 0 {
                break;
            }
            values = (values - 1) & fixed;
        }
    }
    out
}

/// Does a CNF of at most `k` clauses consistent with `f` exist?  Searches
/// covers of the 0-points over all implicates (not just primes), so it is
/// independent of the prime-based minimizer.
pub fn cnf_of_size_exists(f: &PartialFunction, k: usize) -> bool {
    let zeros = f.zero_points();
    if zeros.is_empty() {
        return true;
    }
    let implicates = all_implicates(f);
    fn cover(zeros: &[u32], implicates: &[Cube], covered: &mut Vec<bool>, budget: usize) -> bool {
        let Some(next) = covered.iter().position(|&c| !c) else {
            return true;
        };
        if budget == 0 {
            return false;
        }
        let target = zeros[next];
        for c in implicates {
            if !c.contains_index(target) {
                continue;
            }
            let newly: Vec<usize> = zeros
                .iter()
                .enumerate()
                .filter(|(i, &z)| !covered[*i] && c.contains_index(z))
                .map(|(i, _)| i)
                .collect();
            for &i in &newly {
                covered[i] = true;
            }
            if cover(zeros, implicates, covered, budget - 1) {
                return true;
            }
            for &i in &newly {
                covered[i] = false;
            }
        }
        false
    }
    let mut covered = vec![false; zeros.len()];
    cover(&zeros, &implicates, &mut covered, k)
}

fn view_points(f: &PartialFunction, view: View) -> (Vec<u32>, PartialFunction) {
    let g = match view {
        View::Falsify => f.clone(),
        View::Satisfy => f.dual(),
    };
    (g.zero_points(), g)
}

/// Pairwise independence by direct subcube scan: the spanning subcube of
/// the pair holds a genuine point of opposite polarity.
pub fn independent_pair(f: &PartialFunction, view: View, x: u32, y: u32) -> bool {
    let g = match view {
        View::Falsify => f.clone(),
        View::Satisfy => f.dual(),
    };
    let span = spanning_subcube(g.n(), &[x, y]).unwrap();
    span.members().any(|i| g.ones().get(i as usize))
}

/// Exhaustive max independent point set, by recursive extension.
pub fn ess_bruteforce(f: &PartialFunction, view: View) -> usize {
    let (points, g) = view_points(f, view);
    let n = points.len();
    let mut indep = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let span = spanning_subcube(g.n(), &[points[i], points[j]]).unwrap();
            let ok = span.members().any(|m| g.ones().get(m as usize));
            indep[i][j] = ok;
            indep[j][i] = ok;
        }
    }
    fn extend(indep: &[Vec<bool>], chosen: &[usize], from: usize, best: &mut usize) {
        *best = (*best).max(chosen.len());
        for v in from..indep.len() {
            if chosen.len() + (indep.len() - v) <= *best {
                break;
            }
            if chosen.iter().all(|&u| indep[u][v]) {
                let mut next = chosen.to_vec();
                next.push(v);
                extend(indep, &next, v + 1, best);
            }
        }
    }
    let mut best = 0;
    extend(&indep, &[], 0, &mut best);
    best
}

/// Exhaustive max k-independent point set: every k-subset's spanning
/// subcube holds an opposite-polarity point.
pub fn ess_k_bruteforce(f: &PartialFunction, k: usize, view: View) -> usize {
    assert!(k >= 2);
    let (points, g) = view_points(f, view);
    let subset_ok = |subset: &[usize]| -> bool {
        let pts: Vec<u32> = subset.iter().map(|&i| points[i]).collect();
        let span = spanning_subcube(g.n(), &pts).unwrap();
        span.members().any(|m| g.ones().get(m as usize))
    };
    fn extend(
        n: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        from: usize,
        best: &mut usize,
        subset_ok: &dyn Fn(&[usize]) -> bool,
    ) {
        *best = (*best).max(chosen.len());
        for v in from..n {
            if chosen.len() + (n - v) <= *best {
                break;
            }
            chosen.push(v);
            let feasible = if chosen.len() < k {
                true
            } else {
                // Every k-subset containing v must be separable.
                combinations_ok(chosen, k, subset_ok)
            };
            if feasible {
                extend(n, k, chosen, v + 1, best, subset_ok);
            }
            chosen.pop();
        }
    }
    /// All k-subsets that include the last-added point.
    fn combinations_ok(chosen: &[usize], k: usize, subset_ok: &dyn Fn(&[usize]) -> bool) -> bool {
        let v = *chosen.last().unwrap();
        let rest = &chosen[..chosen.len() - 1];
        fn rec(
            rest: &[usize],
            start: usize,
            need: usize,
            cur: &mut Vec<usize>,
            subset_ok: &dyn Fn(&[usize]) -> bool,
        ) -> bool {
            if need == 0 {
                return subset_ok(cur);
            }
            for i in start..rest.len() {
                if rest.len() - i < need {
                    break;
                }
                cur.insert(cur.len() - 1, rest[i]);
                let ok = rec(rest, i + 1, need - 1, cur, subset_ok);
                cur.remove(cur.len() - 2);
                if !ok {
                    return false;
                }
            }
            true
        }
        let mut cur = vec![v];
        rec(rest, 0, k - 1, &mut cur, subset_ok)
    }
    if points.len() < k {
        return points.len();
    }
    let mut best = 0;
    let mut chosen = Vec::new();
    extend(points.len(), k, &mut chosen, 0, &mut best, &subset_ok);
    best
}
