//! Exact minimum set cover and minimum CNF/DNF sizes.
//!
//! The covering core works over a row/column incidence structure with
//! duplicate rows merged up front.  Essential columns and dominated
//! columns are eliminated at the root; the column set is then frozen, so
//! branching on the columns of an uncovered row makes the residual row
//! set a complete search state, and the search is a memoized
//! branch-and-bound (bounds from a greedy maximal set of pairwise
//! column-disjoint rows, sharpened by the fractional LP relaxation on
//! larger states).  `min_cnf` instantiates it with rows = 0-points and
//! columns = prime implicates, which is lossless for the minimum size by
//! absorption.

use crate::bfcore::{PartialFunction, View};
use crate::bitset::Bitset;
use crate::implicants::{self, ClauseSet};
use crate::{Error, Result};
use std::io::{BufRead, Write};

/// A set covering instance: ground set `{1..m}` and a family of subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverInstance {
    pub m: usize,
    pub subsets: Vec<Vec<usize>>,
    /// Uniform subset size, when the family is r-uniform.
    pub r: Option<usize>,
}

impl SetCoverInstance {
    pub fn new(m: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        for s in &subsets {
            for &e in s {
                if e == 0 || e > m {
                    return Err(Error::InvalidParams(format!(
                        "element {e} out of range 1..={m}"
                    )));
                }
            }
        }
        let r = subsets.first().map(|s| s.len());
        let uniform = r.is_some() && subsets.iter().all(|s| s.len() == r.unwrap());
        Ok(SetCoverInstance {
            m,
            subsets,
            r: if uniform { r } else { None },
        })
    }

    /// Text format: first line `m p`, then `p` lines of element indices.
    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidParams("empty instance file".into()))??;
        let mut it = header.split_whitespace();
        let parse = |t: Option<&str>| -> Result<usize> {
            t.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::InvalidParams(format!("bad instance header {header:?}")))
        };
        let m = parse(it.next())?;
        let p = parse(it.next())?;
        let mut subsets = Vec::with_capacity(p);
        for line in lines.take(p) {
            let line = line?;
            let subset: std::result::Result<Vec<usize>, _> =
                line.split_whitespace().map(|t| t.parse()).collect();
            subsets.push(subset.map_err(|_| {
                Error::InvalidParams(format!("bad subset line {line:?}"))
            })?);
        }
        if subsets.len() != p {
            return Err(Error::InvalidParams(format!(
                "expected {p} subsets, found {}",
                subsets.len()
            )));
        }
        Self::new(m, subsets)
    }

    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {}", self.m, self.subsets.len())?;
        for s in &self.subsets {
            let line: Vec<String> = s.iter().map(|e| e.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCoverResult {
    pub size: usize,
    /// Subset indices (0-based), lexicographically least among minimum
    /// covers.
    pub witness: Vec<usize>,
    pub optimal: bool,
}

/// Exact minimum set cover with a deterministic lexicographically least
/// witness.
pub fn min_set_cover(inst: &SetCoverInstance) -> Result<MinCoverResult> {
    let cols: Vec<Vec<usize>> = inst
        .subsets
        .iter()
        .map(|s| s.iter().map(|&e| e - 1).collect())
        .collect();
    let problem = CoverProblem::new(inst.m, &cols);
    let size = problem.min_cover_size()?;
    let witness = problem.lex_min_witness(size);
    Ok(MinCoverResult {
        size,
        witness,
        optimal: true,
    })
}

/// Exact cs(f): minimum number of clauses in a CNF consistent with `f`.
/// Conventions: cs = 0 when `f` has no 0-point (empty conjunction), and
/// the empty clause counts when `f` has no 1-point.
pub fn min_cnf(f: &PartialFunction) -> Result<(usize, ClauseSet)> {
    min_cover_by_primes(f, View::Falsify)
}

/// Exact ds(f), dual of [`min_cnf`].
pub fn min_dnf(f: &PartialFunction) -> Result<(usize, ClauseSet)> {
    let (size, mut cs) = min_cover_by_primes(&f.dual(), View::Falsify)?;
    cs.view = View::Satisfy;
    Ok((size, cs))
}

fn min_cover_by_primes(f: &PartialFunction, view: View) -> Result<(usize, ClauseSet)> {
    let zeros = f.zero_points();
    if zeros.is_empty() {
        return Ok((0, ClauseSet::empty(f.n(), view)));
    }
    let primes = implicants::prime_implicates(f);
    let cols: Vec<Vec<usize>> = primes
        .clauses()
        .iter()
        .map(|c| {
            zeros
                .iter()
                .enumerate()
                .filter(|(_, &z)| c.contains_index(z))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let problem = CoverProblem::new(zeros.len(), &cols);
    let result = problem.solve()?;
    let chosen: Vec<_> = result
        .witness
        .iter()
        .map(|&i| primes.clauses()[i])
        .collect();
    Ok((result.size, ClauseSet::new(f.n(), view, chosen)))
}

/// Proven lower bound for a residual state, plus the exact value and
/// optimal first column once established.
type MemoEntry = (usize, Option<(usize, usize)>);

/// Row/column covering problem; rows must all be covered.
pub(crate) struct CoverProblem {
    n_rows: usize,
    n_cols: usize,
    col_rows: Vec<Bitset>,
    row_cols: Vec<Bitset>,
}

impl CoverProblem {
    pub fn new(n_rows: usize, cols: &[Vec<usize>]) -> Self {
        let n_cols = cols.len();
        let mut full_row_cols = vec![Bitset::new(n_cols); n_rows];
        for (c, rows) in cols.iter().enumerate() {
            for &r in rows {
                full_row_cols[r].set(c, true);
            }
        }
        // Rows with equal column sets impose the same constraint; keep
        // one of each (an uncoverable row survives as its empty set).
        // This also brings large instances under the size guards of the
        // quadratic dominance passes.
        let mut seen = std::collections::HashSet::new();
        let row_cols: Vec<Bitset> = full_row_cols
            .into_iter()
            .filter(|rc| seen.insert(rc.clone()))
            .collect();
        let n_rows = row_cols.len();
        let mut col_rows = vec![Bitset::new(n_rows); n_cols];
        for (r, rc) in row_cols.iter().enumerate() {
            for c in rc.iter_ones() {
                col_rows[c].set(r, true);
            }
        }
        CoverProblem {
            n_rows,
            n_cols,
            col_rows,
            row_cols,
        }
    }

    pub fn min_cover_size(&self) -> Result<usize> {
        Ok(self.solve()?.size)
    }

    /// Exact minimum; the witness is the deterministic one found by the
    /// sequential branch-and-bound, not necessarily lexicographically
    /// least.
    pub fn solve(&self) -> Result<MinCoverResult> {
        if self.n_rows == 0 {
            return Ok(MinCoverResult {
                size: 0,
                witness: Vec::new(),
                optimal: true,
            });
        }
        for (r, cols) in self.row_cols.iter().enumerate() {
            if cols.first_set().is_none() {
                return Err(Error::Infeasible(format!(
                    "element {} is covered by no subset",
                    r + 1
                )));
            }
        }
        let mut arows = {
            let mut b = Bitset::new(self.n_rows);
            b.negate();
            b
        };
        let mut acols = {
            let mut b = Bitset::new(self.n_cols);
            b.negate();
            b
        };
        // Root reductions to a fixpoint: forced columns (a row with a
        // single covering column), then column dominance.  The column
        // set is frozen afterwards, which is what makes the residual
        // row set a complete search state below.
        let mut forced = Vec::new();
        loop {
            let mut changed = false;
            for r in arows.iter_ones().collect::<Vec<_>>() {
                if !arows.get(r) {
                    continue;
                }
                let mut cs = self.row_cols[r].clone();
                cs.intersect_with(&acols);
                if let Some(only) = cs.first_set() {
                    if cs.count() == 1 {
                        forced.push(only);
                        arows.subtract(&self.col_rows[only]);
                        acols.set(only, false);
                        changed = true;
                    }
                }
            }
            let nc = acols.count();
            if nc * nc <= 4_000_000 && self.col_dominance(&arows, &mut acols) {
                changed = true;
            }
            if !changed {
                break;
            }
        }
        let greedy = self.greedy_cover(&arows, &acols);
        let mut memo: std::collections::HashMap<Bitset, MemoEntry> =
            std::collections::HashMap::new();
        let ub = greedy.len();
        let val = self.cover_dp(arows.clone(), ub, &acols, &mut memo);
        let mut witness = forced;
        let size;
        if val < ub {
            size = witness.len() + val;
            // Replay the optimal choices recorded in the memo.
            let mut rows = arows;
            loop {
                if self.n_rows * self.n_rows <= 4_000_000 {
                    self.row_dominance(&mut rows, &acols);
                }
                if rows.first_set().is_none() {
                    break;
                }
                let (_, Some((_, c))) = memo[&rows] else {
                    unreachable!("exact state missing from the replay path");
                };
                witness.push(c);
                rows.subtract(&self.col_rows[c]);
            }
        } else {
            size = witness.len() + ub;
            witness.extend(greedy);
        }
        witness.sort_unstable();
        Ok(MinCoverResult {
            size,
            witness,
            optimal: true,
        })
    }

    /// Minimum cover size of the residual `rows` over the frozen column
    /// set, or a proven lower bound of at least `budget` when no cover
    /// smaller than `budget` exists.  Residual row sets recur along many
    /// branches, so results (exact values with the optimal first column,
    /// or budget-derived lower bounds) are memoized per state.
    fn cover_dp(
        &self,
        mut rows: Bitset,
        budget: usize,
        acols: &Bitset,
        memo: &mut std::collections::HashMap<Bitset, MemoEntry>,
    ) -> usize {
        if rows.first_set().is_none() {
            return 0;
        }
        if self.n_rows * self.n_rows <= 4_000_000 {
            self.row_dominance(&mut rows, acols);
        }
        if let Some(&(lb, exact)) = memo.get(&rows) {
            if let Some((v, _)) = exact {
                return v;
            }
            if lb >= budget {
                return lb;
            }
        }
        if budget == 0 {
            return 1;
        }
        let mut lb = self.independent_rows_bound(&rows, acols);
        if lb < budget && rows.count() > 8 {
            if let Some(f) = self.lp_bound(&rows, acols) {
                lb = lb.max((f - 1e-6).ceil() as usize);
            }
        }
        if lb >= budget {
            let e = memo.entry(rows).or_insert((0, None));
            e.0 = e.0.max(lb);
            return lb;
        }
        // Branch on the row with fewest covering columns; its cover is in
        // every solution, so trying each column is exhaustive.
        let mut branch_row = usize::MAX;
        let mut branch_count = usize::MAX;
        for r in rows.iter_ones() {
            let mut cs = self.row_cols[r].clone();
            cs.intersect_with(acols);
            let count = cs.count();
            if count < branch_count {
                branch_count = count;
                branch_row = r;
            }
        }
        let mut cols: Vec<usize> = self.row_cols[branch_row]
            .iter_ones()
            .filter(|&c| acols.get(c))
            .collect();
        // Wide columns first: good incumbents early tighten the budgets
        // of the remaining branches.
        cols.sort_by_key(|&c| {
            let mut g = self.col_rows[c].clone();
            g.intersect_with(&rows);
            std::cmp::Reverse(g.count())
        });
        let mut best_val = usize::MAX;
        let mut best_col = usize::MAX;
        for c in cols {
            let mut sub_rows = rows.clone();
            sub_rows.subtract(&self.col_rows[c]);
            let b = budget.min(best_val).saturating_sub(1);
            let sub = self.cover_dp(sub_rows, b, acols, memo);
            // `sub` is exact only below its budget `b`; larger returns
            // are lower bounds and cannot improve `best_val` anyway.
            if sub < b && 1 + sub < best_val {
                best_val = 1 + sub;
                best_col = c;
            }
        }
        if best_val < budget {
            memo.insert(rows, (0, Some((best_val, best_col))));
            best_val
        } else {
            let e = memo.entry(rows).or_insert((0, None));
            e.0 = e.0.max(budget);
            budget.max(lb)
        }
    }

    fn greedy_cover(&self, arows: &Bitset, acols: &Bitset) -> Vec<usize> {
        let mut uncovered = arows.clone();
        let mut picked = Vec::new();
        while uncovered.first_set().is_some() {
            let mut best_col = usize::MAX;
            let mut best_gain = 0usize;
            for c in acols.iter_ones() {
                let mut gain_set = self.col_rows[c].clone();
                gain_set.intersect_with(&uncovered);
                let gain = gain_set.count();
                if gain > best_gain {
                    best_gain = gain;
                    best_col = c;
                }
            }
            if best_col == usize::MAX {
                break;
            }
            uncovered.subtract(&self.col_rows[best_col]);
            picked.push(best_col);
        }
        picked
    }

    /// Fractional covering relaxation of the active subproblem, solved
    /// exactly; any cover has at least ceil(value) columns.
    fn lp_bound(&self, arows: &Bitset, acols: &Bitset) -> Option<f64> {
        use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
        let mut prob = Problem::new(OptimizationDirection::Minimize);
        let mut var_of = vec![None; self.n_cols];
        for c in acols.iter_ones() {
            var_of[c] = Some(prob.add_var(1.0, (0.0, 1.0)));
        }
        for r in arows.iter_ones() {
            let mut expr = LinearExpr::empty();
            for c in self.row_cols[r].iter_ones() {
                if let Some(v) = var_of[c] {
                    expr.add(v, 1.0);
                }
            }
            prob.add_constraint(expr, ComparisonOp::Ge, 1.0);
        }
        let out = prob.solve().ok()?;
        if !out.is_optimal() {
            return None;
        }
        out.solution().map(|s| s.objective())
    }

    /// Greedy maximal set of rows no two of which share an active column:
    /// any cover needs one column per such row.
    fn independent_rows_bound(&self, arows: &Bitset, acols: &Bitset) -> usize {
        let mut used = Bitset::new(self.n_cols);
        let mut count = 0;
        for r in arows.iter_ones() {
            let mut cols = self.row_cols[r].clone();
            cols.intersect_with(acols);
            if cols.is_disjoint(&used) {
                count += 1;
                used.union_with(&cols);
            }
        }
        count
    }

    /// Deactivate rows whose active column set contains another row's:
    /// covering the smaller row covers them for free.  Returns true on
    /// change.
    fn row_dominance(&self, arows: &mut Bitset, acols: &Bitset) -> bool {
        let rows: Vec<usize> = arows.iter_ones().collect();
        let mut changed = false;
        for (i, &r1) in rows.iter().enumerate() {
            if !arows.get(r1) {
                continue;
            }
            for &r2 in &rows {
                if r1 == r2 || !arows.get(r2) {
                    continue;
                }
                // cols(r2) ∩ acols ⊆ cols(r1) ∩ acols → drop r1.
                let subset = self.masked_subset(&self.row_cols[r2], &self.row_cols[r1], acols);
                if subset {
                    let equal =
                        self.masked_subset(&self.row_cols[r1], &self.row_cols[r2], acols);
                    // On equality keep the lower-index row.
                    if !equal || r2 < r1 {
                        arows.set(r1, false);
                        changed = true;
                        break;
                    }
                }
            }
            let _ = i;
        }
        changed
    }

    /// Deactivate columns whose active row set is contained in another
    /// active column's.  Returns true on change.
    fn col_dominance(&self, arows: &Bitset, acols: &mut Bitset) -> bool {
        let cols: Vec<usize> = acols.iter_ones().collect();
        let mut changed = false;
        for &c1 in &cols {
            if !acols.get(c1) {
                continue;
            }
            for &c2 in &cols {
                if c1 == c2 || !acols.get(c2) {
                    continue;
                }
                let subset = self.masked_subset(&self.col_rows[c1], &self.col_rows[c2], arows);
                if subset {
                    let equal =
                        self.masked_subset(&self.col_rows[c2], &self.col_rows[c1], arows);
                    if !equal || c2 < c1 {
                        acols.set(c1, false);
                        changed = true;
                        break;
                    }
                }
            }
        }
        changed
    }

    /// `(a ∩ mask) ⊆ (b ∩ mask)` without allocating.
    fn masked_subset(&self, a: &Bitset, b: &Bitset, mask: &Bitset) -> bool {
        a.masked_subset_of(b, mask)
    }

    /// Lexicographically least witness of the known optimal size.
    pub fn lex_min_witness(&self, size: usize) -> Vec<usize> {
        let mut chosen = Vec::new();
        let mut arows = Bitset::new(self.n_rows);
        arows.negate();
        for j in 0..self.n_cols {
            if chosen.len() == size {
                break;
            }
            let mut arows2 = arows.clone();
            arows2.subtract(&self.col_rows[j]);
            if self.coverable_within(&arows2, j + 1, size - chosen.len() - 1) {
                chosen.push(j);
                arows = arows2;
            }
        }
        chosen
    }

    /// Can the remaining rows be covered with at most `budget` columns of
    /// index ≥ `from`?
    fn coverable_within(&self, arows: &Bitset, from: usize, budget: usize) -> bool {
        let Some(row) = arows.first_set() else {
            return true;
        };
        if budget == 0 {
            return false;
        }
        for c in self.row_cols[row].iter_ones() {
            if c < from {
                continue;
            }
            let mut arows2 = arows.clone();
            arows2.subtract(&self.col_rows[c]);
            if self.coverable_within(&arows2, from, budget - 1) {
                return true;
            }
        }
        false
    }
}
