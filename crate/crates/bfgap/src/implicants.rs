//! Implicate/implicant predicates and prime enumeration.
//!
//! A clause is identified with the cube of assignments falsifying it, a
//! term with the cube of assignments satisfying it.  A clause is an
//! implicate of a partial function iff its cube contains no 1-point
//! (don't-cares are permitted); a prime implicate is a maximal such cube.

use crate::bfcore::{Assignment, Cube, PartialFunction, View};
use crate::{Error, Result};
use std::collections::HashSet;
use std::io::{BufRead, Write};

/// A set of clauses (or terms, per `view`) over `n` variables, kept
/// sorted by `(literal count, fixed, values)` and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseSet {
    pub n: usize,
    pub view: View,
    clauses: Vec<Cube>,
}

impl ClauseSet {
    pub fn new(n: usize, view: View, mut clauses: Vec<Cube>) -> Self {
        clauses.sort_by_key(Cube::sort_key);
        clauses.dedup();
        ClauseSet { n, view, clauses }
    }

    pub fn empty(n: usize, view: View) -> Self {
        ClauseSet {
            n,
            view,
            clauses: Vec::new(),
        }
    }

    pub fn clauses(&self) -> &[Cube] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Evaluate the formula at a point: a CNF (falsify view) is 1 iff no
    /// clause cube contains the point, a DNF (satisfy view) is 1 iff some
    /// term cube does.
    pub fn evaluate(&self, index: u32) -> bool {
        let hit = self.clauses.iter().any(|c| c.contains_index(index));
        match self.view {
            View::Falsify => !hit,
            View::Satisfy => hit,
        }
    }

    pub fn to_total(&self) -> Result<crate::TotalFunction> {
        crate::TotalFunction::from_ones(
            self.n,
            (0..1u32 << self.n).filter(|&i| self.evaluate(i)),
        )
    }

    pub fn write_dimacs<W: Write>(&self, w: &mut W) -> Result<()> {
        let view = match self.view {
            View::Falsify => "falsify",
            View::Satisfy => "satisfy",
        };
        writeln!(w, "c bfgap n={} view={}", self.n, view)?;
        writeln!(w, "p cnf {} {}", self.n, self.clauses.len())?;
        for c in &self.clauses {
            let mut lits = Vec::new();
            for i in 0..self.n {
                let bit = 1u32 << i;
                if c.fixed & bit != 0 {
                    let set = c.values & bit != 0;
                    // Falsify view: fixed-to-0 means positive literal.
                    let positive = match self.view {
                        View::Falsify => !set,
                        View::Satisfy => set,
                    };
                    lits.push(if positive {
                        (i + 1) as i64
                    } else {
                        -((i + 1) as i64)
                    });
                }
            }
            for l in lits {
                write!(w, "{l} ")?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }

    pub fn read_dimacs<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut view = View::Falsify;
        let mut n = 0usize;
        let mut clauses = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('c') {
                if rest.contains("view=satisfy") {
                    view = View::Satisfy;
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let mut it = rest.split_whitespace();
                n = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::InvalidFunction("bad DIMACS header".into()))?;
                continue;
            }
            let mut fixed = 0u32;
            let mut values = 0u32;
            for tok in line.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| Error::InvalidFunction(format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    break;
                }
                let var = lit.unsigned_abs() as usize;
                if var == 0 || var > n {
                    return Err(Error::InvalidFunction(format!(
                        "literal {lit} out of range for n={n}"
                    )));
                }
                let bit = 1u32 << (var - 1);
                fixed |= bit;
                let positive = lit > 0;
                let set = match view {
                    View::Falsify => !positive,
                    View::Satisfy => positive,
                };
                if set {
                    values |= bit;
                }
            }
            clauses.push(Cube::new(n, fixed, values));
        }
        Ok(ClauseSet::new(n, view, clauses))
    }
}

/// Clause/term coverage of a point is cube membership in either view.
pub fn covers(c: &Cube, a: Assignment, _view: View) -> bool {
    c.contains(a)
}

/// Does the cube contain a 1-point of `f`?  Scans whichever of the cube
/// and the 1-point list is smaller.
pub fn cube_meets_ones(f: &PartialFunction, c: &Cube, one_list: &[u32]) -> bool {
    if c.member_count() <= one_list.len() as u64 {
        c.members().any(|i| f.ones().get(i as usize))
    } else {
        one_list.iter().any(|&i| c.contains_index(i))
    }
}

pub fn is_implicate(c: &Cube, f: &PartialFunction) -> Result<bool> {
    if c.n != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: c.n,
        });
    }
    Ok(!cube_meets_ones(f, c, &f.one_points()))
}

/// All prime implicates of `f`: the maximal cubes free of 1-points,
/// computed by iterated merging of the non-1 minterms.  Don't-care points
/// participate in merging but are never required to be covered.  Returns
/// the empty set when `f` has no 0-point.
pub fn prime_implicates(f: &PartialFunction) -> ClauseSet {
    prime_cubes(f, View::Falsify)
}

/// Dual of [`prime_implicates`]: prime implicants as satisfy-view terms.
pub fn prime_implicants(f: &PartialFunction) -> ClauseSet {
    let mut cs = prime_cubes(&f.dual(), View::Falsify);
    cs.view = View::Satisfy;
    cs
}

fn prime_cubes(f: &PartialFunction, view: View) -> ClauseSet {
    let n = f.n();
    if f.zero_points().is_empty() {
        return ClauseSet::empty(n, view);
    }
    let mask = Cube::var_mask(n);
    let mut current: HashSet<(u32, u32)> = (0..1u32 << n)
        .filter(|&i| !f.ones().get(i as usize))
        .map(|i| (mask, i))
        .collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        let mut merged: HashSet<(u32, u32)> = HashSet::new();
        let mut next: HashSet<(u32, u32)> = HashSet::new();
        for &(fixed, values) in &current {
            let mut bits = fixed;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                bits &= bits - 1;
                if values & b != 0 {
                    continue;
                }
                if current.contains(&(fixed, values | b)) {
                    merged.insert((fixed, values));
                    merged.insert((fixed, values | b));
                    next.insert((fixed & !b, values));
                }
            }
        }
        primes.extend(
            current
                .iter()
                .filter(|c| !merged.contains(c))
                .map(|&(fixed, values)| Cube::new(n, fixed, values)),
        );
        current = next;
    }
    ClauseSet::new(n, view, primes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfcore::{spanning_subcube, TotalFunction};
    use rand::{Rng, SeedableRng};

    fn pf(f: &TotalFunction) -> PartialFunction {
        PartialFunction::from_total(f)
    }

    fn and2() -> PartialFunction {
        pf(&TotalFunction::from_ones(2, [3]).unwrap())
    }

    fn maj3() -> PartialFunction {
        pf(&TotalFunction::from_ones(3, [3, 5, 6, 7]).unwrap())
    }

    #[test]
    fn covers_examples() {
        // Clause (x1 v x2) = cube fixing x1=0, x2=0.
        let c = Cube::new(2, 0b11, 0b00);
        assert!(covers(&c, Assignment::new(2, 0b00).unwrap(), View::Falsify));
        assert!(!covers(&c, Assignment::new(2, 0b01).unwrap(), View::Falsify));
        // Term x1 x2 = cube fixing both to 1.
        let t = Cube::new(2, 0b11, 0b11);
        assert!(covers(&t, Assignment::new(2, 0b11).unwrap(), View::Satisfy));
    }

    #[test]
    fn implicate_examples() {
        let f = and2();
        // (x1): falsified when x1=0.
        assert!(is_implicate(&Cube::new(2, 0b01, 0b00), &f).unwrap());
        // (x1 v ~x2): falsified only at x1=0, x2=1 = 0b10.
        assert!(is_implicate(&Cube::new(2, 0b11, 0b10), &f).unwrap());
        let parity2 = pf(&TotalFunction::from_ones(2, [1, 2]).unwrap());
        assert!(!is_implicate(&Cube::new(2, 0b01, 0b00), &parity2).unwrap());
    }

    #[test]
    fn prime_implicates_and2() {
        let primes = prime_implicates(&and2());
        assert_eq!(
            primes.clauses(),
            &[Cube::new(2, 0b01, 0b00), Cube::new(2, 0b10, 0b00)]
        );
    }

    #[test]
    fn prime_implicates_majority() {
        let primes = prime_implicates(&maj3());
        // (x1 v x2), (x1 v x3), (x2 v x3).
        assert_eq!(
            primes.clauses(),
            &[
                Cube::new(3, 0b011, 0b000),
                Cube::new(3, 0b101, 0b000),
                Cube::new(3, 0b110, 0b000),
            ]
        );
    }

    #[test]
    fn prime_implicants_majority() {
        let primes = prime_implicants(&maj3());
        assert_eq!(
            primes.clauses(),
            &[
                Cube::new(3, 0b011, 0b011),
                Cube::new(3, 0b101, 0b101),
                Cube::new(3, 0b110, 0b110),
            ]
        );
    }

    #[test]
    fn prime_implicants_or2() {
        let f = pf(&TotalFunction::from_ones(2, [1, 2, 3]).unwrap());
        let primes = prime_implicants(&f);
        assert_eq!(
            primes.clauses(),
            &[Cube::new(2, 0b01, 0b01), Cube::new(2, 0b10, 0b10)]
        );
    }

    #[test]
    fn constants() {
        let c1 = pf(&TotalFunction::constant(3, true).unwrap());
        assert!(prime_implicates(&c1).is_empty());
        let c0 = pf(&TotalFunction::constant(3, false).unwrap());
        assert!(prime_implicants(&c0).is_empty());
        // Constant 0 has the empty clause as its single prime implicate.
        let primes = prime_implicates(&c0);
        assert_eq!(primes.clauses(), &[Cube::full(3)]);
    }

    /// Exhaustive absorption oracle: every implicate is a subcube of some
    /// returned prime, and every returned prime is a maximal implicate.
    fn check_absorption(f: &PartialFunction) {
        let n = f.n();
        let primes = prime_implicates(f);
        if f.zero_points().is_empty() {
            assert!(primes.is_empty());
            return;
        }
        let ones = f.one_points();
        // Walk all cubes: fixed mask + values.
        for fixed in 0..1u32 << n {
            let mut values = fixed;
            loop {
                let c = Cube::new(n, fixed, values);
                let one_free = !cube_meets_ones(f, &c, &ones);
                let absorbed = primes.clauses().iter().any(|p| c.is_subcube_of(p));
                assert_eq!(one_free, absorbed, "cube {c:?}");
                if values == 0 {
                    break;
                }
                values = (values - 1) & fixed;
            }
        }
    }

    #[test]
    fn absorption_random_corpus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(1..=5);
            let size = 1usize << n;
            let mut ones = Vec::new();
            let mut stars = Vec::new();
            for i in 0..size as u32 {
                match rng.gen_range(0..4) {
                    0 | 1 => ones.push(i),
                    2 => stars.push(i),
                    _ => {}
                }
            }
            let f = PartialFunction::from_indices(n, ones, stars).unwrap();
            check_absorption(&f);
        }
    }

    #[test]
    fn duality_on_random_corpus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(1..=6);
            let f = pf(&TotalFunction::random(n, &mut rng).unwrap());
            let imps = prime_implicants(&f);
            let dual_imps = prime_implicates(&f.dual());
            assert_eq!(imps.clauses(), dual_imps.clauses());
        }
    }

    #[test]
    fn total_function_primes_cover_a_zero_point() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.gen_range(1..=6);
            let f = pf(&TotalFunction::random(n, &mut rng).unwrap());
            let zeros = f.zero_points();
            for p in prime_implicates(&f).clauses() {
                assert!(zeros.iter().any(|&z| p.contains_index(z)));
            }
        }
    }

    #[test]
    fn primes_separate_pairs_like_subcube_scan() {
        // A pair of 0-points shares a prime implicate iff their spanning
        // subcube is free of 1-points.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let f = pf(&TotalFunction::random(n, &mut rng).unwrap());
            let primes = prime_implicates(&f);
            let zeros = f.zero_points();
            let ones = f.one_points();
            for (i, &x) in zeros.iter().enumerate() {
                for &y in &zeros[i + 1..] {
                    let span = spanning_subcube(n, &[x, y]).unwrap();
                    let joint = primes
                        .clauses()
                        .iter()
                        .any(|p| p.contains_index(x) && p.contains_index(y));
                    assert_eq!(joint, !cube_meets_ones(&f, &span, &ones));
                }
            }
        }
    }

    #[test]
    fn dimacs_roundtrip() {
        let primes = prime_implicates(&maj3());
        let mut buf = Vec::new();
        primes.write_dimacs(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("c bfgap n=3 view=falsify\np cnf 3 3\n"));
        let back = ClauseSet::read_dimacs(&mut &buf[..]).unwrap();
        assert_eq!(back, primes);
    }
}
