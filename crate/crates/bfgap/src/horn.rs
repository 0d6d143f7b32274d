//! Horn functions: recognition, meta-clause implication bases, forward
//! chaining, the membership/equivalence learner, and an exact minimum
//! implication size `mi` by brute force.

use crate::bfcore::{PartialFunction, TotalFunction, View};
use crate::essence;
use crate::implicants::ClauseSet;
use crate::{Cube, Error, Result};
use serde::Serialize;
use std::io::{BufRead, Write};

/// An implication A → B over variable sets, standing for the conjunction
/// of clauses A → b over b ∈ B.  `bottom` marks the impure form A → ⊥
/// (every extension of A is a falsepoint); then `consequent` is empty.
/// Variable sets are bitmasks with `x_i` at bit `i-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetaClause {
    pub antecedent: u32,
    pub consequent: u32,
    pub bottom: bool,
}

impl MetaClause {
    pub fn definite(antecedent: u32, consequent: u32) -> Result<Self> {
        if antecedent & consequent != 0 {
            return Err(Error::InvalidParams(
                "antecedent and consequent must be disjoint".into(),
            ));
        }
        Ok(MetaClause {
            antecedent,
            consequent,
            bottom: false,
        })
    }

    pub fn falsum(antecedent: u32) -> Self {
        MetaClause {
            antecedent,
            consequent: 0,
            bottom: true,
        }
    }

    /// Does the assignment satisfy every clause of the implication?
    #[inline]
    pub fn satisfied_by(&self, x: u32) -> bool {
        if x & self.antecedent != self.antecedent {
            return true;
        }
        !self.bottom && x & self.consequent == self.consequent
    }
}

/// An implication basis together with the learner's example lists.  The
/// expanded basis is functionally equal to the learned target, with one
/// meta-clause (and one negative example) per implication.
#[derive(Debug, Clone, Serialize)]
pub struct HornBasis {
    pub n: usize,
    pub meta_clauses: Vec<MetaClause>,
    pub negatives: Vec<u32>,
    pub positives: Vec<u32>,
}

impl HornBasis {
    pub fn evaluate(&self, x: u32) -> bool {
        self.meta_clauses.iter().all(|c| c.satisfied_by(x))
    }

    pub fn to_total(&self) -> Result<TotalFunction> {
        let ones = (0..1u32 << self.n).filter(|&x| self.evaluate(x));
        TotalFunction::from_ones(self.n, ones)
    }
}

/// A function is Horn iff its truepoint set is closed under componentwise
/// AND.
pub fn is_horn(f: &TotalFunction) -> bool {
    let ones = f.truepoints();
    for (i, &a) in ones.iter().enumerate() {
        for &b in &ones[i + 1..] {
            if !f.value(a & b) {
                return false;
            }
        }
    }
    true
}

/// Least fixed point of the assignment under the definite implications:
/// repeatedly add consequents of fired antecedents.  Monotone and
/// idempotent; `bottom` markers carry no consequents and are ignored.
pub fn horn_closure(basis: &[MetaClause], a: u32) -> u32 {
    let mut x = a;
    loop {
        let mut next = x;
        for c in basis {
            if !c.bottom && x & c.antecedent == c.antecedent {
                next |= c.consequent;
            }
        }
        if next == x {
            return x;
        }
        x = next;
    }
}

/// One clause per consequent variable; A → ⊥ expands to the single
/// negative clause over A.
pub fn expand_meta_clauses(basis: &HornBasis) -> ClauseSet {
    let mut clauses = Vec::new();
    for c in &basis.meta_clauses {
        if c.bottom {
            clauses.push(Cube::new(basis.n, c.antecedent, c.antecedent));
            continue;
        }
        let mut rem = c.consequent;
        while rem != 0 {
            let b = rem & rem.wrapping_neg();
            rem &= rem - 1;
            clauses.push(Cube::new(basis.n, c.antecedent | b, c.antecedent));
        }
    }
    ClauseSet::new(basis.n, View::Falsify, clauses)
}

/// Learn an implication basis for a Horn target with a membership oracle
/// (table lookup) and an equivalence oracle (full comparison returning
/// the least misclassified index).  The negative-example list is refined
/// by intersection, so it ends with one example per implication of a
/// minimum basis.
pub fn afp_learn(target: &TotalFunction) -> Result<HornBasis> {
    if !is_horn(target) {
        return Err(Error::InvalidParams("target is not a Horn function".into()));
    }
    let n = target.n();
    let size = 1u32 << n;
    let mut negatives: Vec<u32> = Vec::new();
    let mut positives: Vec<u32> = Vec::new();
    // Generous bound: each round either refines a negative example
    // strictly (< n·|negatives| times), appends one, or appends a
    // distinct positive example.
    let round_limit = 4 * (n as u64 + 2) * size as u64;
    for _ in 0..round_limit {
        let basis = hypothesis(n, &negatives, &positives);
        let counterexample =
            (0..size).find(|&x| basis.evaluate(x) != target.value(x));
        let Some(x) = counterexample else {
            return Ok(basis);
        };
        if target.value(x) {
            positives.push(x);
            continue;
        }
        let refined = negatives.iter().position(|&ni| {
            let s = ni & x;
            s != ni && !target.value(s)
        });
        match refined {
            Some(i) => negatives[i] &= x,
            None => negatives.push(x),
        }
    }
    Err(Error::WorkLimit("learner did not converge".into()))
}

/// The hypothesis induced by the example lists: per negative example n_i
/// the implication ones(n_i) → (AND of the positives above it) \ n_i, or
/// n_i → ⊥ while no positive example lies above it.
fn hypothesis(n: usize, negatives: &[u32], positives: &[u32]) -> HornBasis {
    let meta_clauses = negatives
        .iter()
        .map(|&ni| {
            let mut meet: Option<u32> = None;
            for &p in positives {
                if p & ni == ni {
                    meet = Some(meet.map_or(p, |m| m & p));
                }
            }
            match meet {
                Some(m) => MetaClause {
                    antecedent: ni,
                    consequent: m & !ni,
                    bottom: false,
                },
                None => MetaClause::falsum(ni),
            }
        })
        .collect();
    HornBasis {
        n,
        meta_clauses,
        negatives: negatives.to_vec(),
        positives: positives.to_vec(),
    }
}

/// Exact minimum implication size by exhaustive search of increasing
/// size over the canonical candidates A → cl(A)\A (or A → ⊥), where
/// cl(A) is the meet of the truepoints above A.  Any sound implication
/// strengthens to a canonical one, so the search is lossless.
pub fn mi_bruteforce(target: &TotalFunction) -> Result<usize> {
    if !is_horn(target) {
        return Err(Error::InvalidParams("target is not a Horn function".into()));
    }
    let n = target.n();
    if n > 5 {
        return Err(Error::SizeCap { n, cap: 5 });
    }
    let size = 1u32 << n;
    let mut candidates: Vec<MetaClause> = Vec::new();
    for a in 0..size {
        let mut meet: Option<u32> = None;
        for x in 0..size {
            if target.value(x) && x & a == a {
                meet = Some(meet.map_or(x, |m| m & x));
            }
        }
        match meet {
            None => candidates.push(MetaClause::falsum(a)),
            Some(m) if m != a => candidates.push(MetaClause {
                antecedent: a,
                consequent: m & !a,
                bottom: false,
            }),
            Some(_) => {}
        }
    }
    let equivalent = |chosen: &[MetaClause]| {
        (0..size).all(|x| chosen.iter().all(|c| c.satisfied_by(x)) == target.value(x))
    };
    fn pick(
        candidates: &[MetaClause],
        from: usize,
        need: usize,
        chosen: &mut Vec<MetaClause>,
        equivalent: &dyn Fn(&[MetaClause]) -> bool,
    ) -> bool {
        if need == 0 {
            return equivalent(chosen);
        }
        for i in from..candidates.len() {
            if candidates.len() - i < need {
                break;
            }
            chosen.push(candidates[i]);
            if pick(candidates, i + 1, need - 1, chosen, equivalent) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    for k in 0..=candidates.len() {
        let mut chosen = Vec::with_capacity(k);
        if pick(&candidates, 0, k, &mut chosen, &equivalent) {
            return Ok(k);
        }
    }
    unreachable!("the full canonical candidate set is always equivalent")
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativesIndependence {
    pub independent: bool,
    /// Pairwise independence matrix over the basis's negative examples.
    pub matrix: Vec<Vec<bool>>,
}

/// Are the learner's negative examples pairwise independent falsepoints
/// of the target?
pub fn check_negatives_independent(
    basis: &HornBasis,
    target: &TotalFunction,
) -> Result<NegativesIndependence> {
    let f = PartialFunction::from_total(target);
    let pts = &basis.negatives;
    let mut matrix = vec![vec![true; pts.len()]; pts.len()];
    let mut independent = true;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let ok = essence::are_independent(&f, View::Falsify, pts[i], pts[j])?;
            matrix[i][j] = ok;
            matrix[j][i] = ok;
            independent &= ok;
        }
    }
    Ok(NegativesIndependence {
        independent,
        matrix,
    })
}

/// A random Horn function: the AND-closure of a random truepoint sample
/// together with the all-ones point (so the function is definite).
pub fn random_horn<R: rand::Rng>(n: usize, rng: &mut R) -> Result<TotalFunction> {
    let size = 1usize << n;
    let mut points: Vec<u32> = vec![(size - 1) as u32];
    let seeds = rng.gen_range(0..=size / 2);
    for _ in 0..seeds {
        points.push(rng.gen_range(0..size) as u32);
    }
    // Close under pairwise AND to a fixpoint.
    loop {
        let mut added = false;
        let len = points.len();
        for i in 0..len {
            for j in i + 1..len {
                let meet = points[i] & points[j];
                if !points.contains(&meet) {
                    points.push(meet);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    TotalFunction::from_ones(n, points)
}

/// Text format, one implication per line: `a1 a2 -> b1 b2` with 1-based
/// variable indices; an empty side is omitted and `A -> ⊥` is written
/// with the token `_|_`.
pub fn write_meta_clauses<W: Write>(w: &mut W, clauses: &[MetaClause]) -> Result<()> {
    let vars = |mask: u32| -> String {
        let names: Vec<String> = (0..32)
            .filter(|b| mask >> b & 1 != 0)
            .map(|b| (b + 1).to_string())
            .collect();
        names.join(" ")
    };
    for c in clauses {
        let rhs = if c.bottom {
            "_|_".to_string()
        } else {
            vars(c.consequent)
        };
        writeln!(w, "{} -> {}", vars(c.antecedent), rhs)?;
    }
    Ok(())
}

pub fn read_meta_clauses<R: BufRead>(r: &mut R) -> Result<Vec<MetaClause>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line.split_once("->").ok_or_else(|| {
            Error::InvalidParams(format!("meta-clause line without '->': {line:?}"))
        })?;
        let parse_mask = |side: &str| -> Result<u32> {
            let mut mask = 0u32;
            for tok in side.split_whitespace() {
                let v: u32 = tok.parse().map_err(|_| {
                    Error::InvalidParams(format!("bad variable index {tok:?}"))
                })?;
                if v == 0 || v > 32 {
                    return Err(Error::InvalidParams(format!("variable index {v} out of range")));
                }
                mask |= 1 << (v - 1);
            }
            Ok(mask)
        };
        let antecedent = parse_mask(lhs)?;
        if rhs.trim() == "_|_" {
            out.push(MetaClause::falsum(antecedent));
        } else {
            out.push(MetaClause::definite(antecedent, parse_mask(rhs)?)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{horn_gap_family, HornGapParams};
    use crate::exactmin::min_cnf;
    use rand::SeedableRng;

    fn implication_target() -> TotalFunction {
        // (x1 → x2) ∧ (x1 → x3) on 3 variables.
        TotalFunction::from_ones(3, [0b000, 0b010, 0b100, 0b110, 0b111]).unwrap()
    }

    #[test]
    fn horn_recognition() {
        assert!(is_horn(&TotalFunction::from_ones(2, [3]).unwrap()));
        assert!(!is_horn(&TotalFunction::from_ones(2, [1, 2, 3]).unwrap()));
        assert!(!is_horn(
            &TotalFunction::from_ones(3, [1, 2, 4, 7]).unwrap()
        ));
        assert!(is_horn(&implication_target()));
    }

    #[test]
    fn closure_examples() {
        let basis = [MetaClause::definite(0b001, 0b010).unwrap()];
        assert_eq!(horn_closure(&basis, 0b001), 0b011);
        assert_eq!(horn_closure(&basis, 0b100), 0b100);
        assert_eq!(horn_closure(&[], 0b101), 0b101);
    }

    #[test]
    fn closure_monotone_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..50 {
            let basis: Vec<MetaClause> = (0..rng.gen_range(0..5))
                .map(|_| {
                    let a = rng.gen_range(0u32..32);
                    MetaClause::definite(a, rng.gen_range(0u32..32) & !a).unwrap()
                })
                .collect();
            let a: u32 = rng.gen_range(0..32);
            let b: u32 = a | rng.gen_range(0u32..32);
            let ca = horn_closure(&basis, a);
            let cb = horn_closure(&basis, b);
            assert_eq!(ca & cb, ca, "monotone");
            assert_eq!(horn_closure(&basis, ca), ca, "idempotent");
        }
    }

    #[test]
    fn closure_chases_gap_family() {
        // k=3, t=1: firing z_1 sets every s_J, then every x_i, and the
        // feedback clauses keep all s_J set -- all element/set variables.
        let fam = horn_gap_family(HornGapParams { k: 3, t: 1 }).unwrap();
        let meta: Vec<MetaClause> = fam
            .clauses
            .clauses()
            .iter()
            .map(|c| {
                let b = c.fixed & !c.values;
                MetaClause::definite(c.values, b).unwrap()
            })
            .collect();
        let z1 = 1u32 << 6;
        assert_eq!(horn_closure(&meta, z1), (1 << 7) - 1);
    }

    #[test]
    fn afp_learns_single_metaclause() {
        let basis = afp_learn(&implication_target()).unwrap();
        assert_eq!(basis.meta_clauses.len(), 1);
        let c = basis.meta_clauses[0];
        assert_eq!((c.antecedent, c.consequent, c.bottom), (0b001, 0b110, false));
        assert_eq!(basis.negatives.len(), 1);
    }

    #[test]
    fn afp_learns_conjunction() {
        let target = TotalFunction::from_ones(2, [3]).unwrap();
        let basis = afp_learn(&target).unwrap();
        assert_eq!(basis.meta_clauses.len(), 1);
        let c = basis.meta_clauses[0];
        assert_eq!((c.antecedent, c.consequent), (0, 0b11));
        assert_eq!(basis.to_total().unwrap(), target);
    }

    #[test]
    fn afp_rejects_non_horn() {
        assert!(afp_learn(&TotalFunction::from_ones(2, [1, 2, 3]).unwrap()).is_err());
    }

    #[test]
    fn mi_examples() {
        assert_eq!(
            mi_bruteforce(&TotalFunction::constant(3, true).unwrap()).unwrap(),
            0
        );
        assert_eq!(mi_bruteforce(&implication_target()).unwrap(), 1);
        assert_eq!(
            mi_bruteforce(&TotalFunction::from_ones(2, [3]).unwrap()).unwrap(),
            1
        );
    }

    #[test]
    fn afp_count_matches_mi_on_corpus() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        use rand::Rng;
        for _ in 0..30 {
            let n = rng.gen_range(2..=4);
            let f = random_horn(n, &mut rng).unwrap();
            let basis = afp_learn(&f).unwrap();
            assert_eq!(basis.to_total().unwrap(), f, "learned basis equivalent");
            assert_eq!(
                basis.meta_clauses.len(),
                mi_bruteforce(&f).unwrap(),
                "n={n}"
            );
        }
    }

    #[test]
    fn expansion_and_bounds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        use rand::Rng;
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let f = random_horn(n, &mut rng).unwrap();
            let basis = afp_learn(&f).unwrap();
            let cnf = expand_meta_clauses(&basis);
            assert_eq!(cnf.to_total().unwrap(), f);
            assert!(cnf.len() <= n * basis.meta_clauses.len());
            // cs ≤ n·mi and mi ≤ ess (negatives are independent).
            let pf = PartialFunction::from_total(&f);
            let (cs, _) = min_cnf(&pf).unwrap();
            let mi = basis.meta_clauses.len();
            if mi > 0 {
                assert!(cs <= n * mi, "cs={cs} n={n} mi={mi}");
            }
            let indep = check_negatives_independent(&basis, &f).unwrap();
            assert!(indep.independent);
            let ess = essence::ess(&pf, View::Falsify).unwrap().value;
            assert!(ess >= mi);
        }
    }

    #[test]
    fn expand_example() {
        let basis = HornBasis {
            n: 3,
            meta_clauses: vec![MetaClause::definite(0b001, 0b110).unwrap()],
            negatives: vec![0b001],
            positives: vec![],
        };
        let cnf = expand_meta_clauses(&basis);
        assert_eq!(cnf.len(), 2);
        let empty = HornBasis {
            n: 3,
            meta_clauses: vec![],
            negatives: vec![],
            positives: vec![],
        };
        assert!(expand_meta_clauses(&empty).is_empty());
    }

    #[test]
    fn meta_text_roundtrip() {
        let clauses = vec![
            MetaClause::definite(0b011, 0b100).unwrap(),
            MetaClause::definite(0, 0b001).unwrap(),
            MetaClause::falsum(0b101),
        ];
        let mut buf = Vec::new();
        write_meta_clauses(&mut buf, &clauses).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("1 2 -> 3"));
        assert!(text.contains("1 3 -> _|_"));
        let back = read_meta_clauses(&mut &buf[..]).unwrap();
        assert_eq!(back, clauses);
    }
}
