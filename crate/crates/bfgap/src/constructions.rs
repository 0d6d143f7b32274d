//! Generators for the gap-witness families: uniform set-cover instances,
//! the set-cover-to-partial-function reductions (classic and the V/W
//! generalization, deterministic and randomized), the total-function lift,
//! and the Horn amplification family.

use crate::bfcore::{parity_chi, PartialFunction, TotalFunction, View};
use crate::bitset::Bitset;
use crate::exactmin::SetCoverInstance;
use crate::implicants::ClauseSet;
use crate::{Cube, Error, Result, MAX_VARS};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::HashSet;

/// The instance whose subsets are all r-subsets of {1..m}.  Its minimum
/// cover has size ⌈m/r⌉, while no two elements are "independent": every
/// pair lies in a common subset once r ≥ 2 and m > r.
pub fn all_k_subsets_instance(m: usize, r: usize) -> Result<SetCoverInstance> {
    if r < 1 || r > m {
        return Err(Error::InvalidParams(format!(
            "need 1 <= r <= m, got r={r}, m={m}"
        )));
    }
    let mut subsets = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(r);
    fn rec(m: usize, r: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for e in from..=m {
            if m - e + 1 < r - cur.len() {
                break;
            }
            cur.push(e);
            rec(m, r, e + 1, cur, out);
            cur.pop();
        }
    }
    rec(m, r, 1, &mut cur, &mut subsets);
    SetCoverInstance::new(m, subsets)
}

/// Vector pair encoding a set-cover instance on the hypercube: element i
/// belongs to subset j exactly when `v[i] >= w[j]` componentwise.  Built
/// only through constructors that verify this property exhaustively.
#[derive(Debug, Clone, Serialize)]
pub struct VWPair {
    pub t: usize,
    pub v: Vec<u64>,
    pub w: Vec<u64>,
    pub seed: Option<u64>,
    pub retries: u32,
    certified: bool,
}

impl VWPair {
    /// Verify the membership-iff-dominance property against `inst` and
    /// return the certified pair.
    pub fn certify(
        inst: &SetCoverInstance,
        t: usize,
        v: Vec<u64>,
        w: Vec<u64>,
        seed: Option<u64>,
        retries: u32,
    ) -> Result<VWPair> {
        if t == 0 || t > 64 {
            return Err(Error::InvalidParams(format!("vector length t={t} out of range")));
        }
        if v.len() != inst.m || w.len() != inst.subsets.len() {
            return Err(Error::InvalidParams(
                "vector counts do not match the instance".into(),
            ));
        }
        let membership: Vec<HashSet<usize>> = inst
            .subsets
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect();
        for (j, wj) in w.iter().enumerate() {
            for i in 1..=inst.m {
                let dominates = v[i - 1] & wj == *wj;
                if dominates != membership[j].contains(&i) {
                    return Err(Error::VerificationFailed(format!(
                        "element {i} / subset {} disagree: in-subset={}, v>=w={dominates}",
                        j + 1,
                        membership[j].contains(&i)
                    )));
                }
            }
        }
        Ok(VWPair {
            t,
            v,
            w,
            seed,
            retries,
            certified: true,
        })
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }
}

/// The deterministic embedding with t = m: `v[i]` is all-ones except
/// position i, `w[j]` is all-ones except the positions of subset j.
pub fn classic_embedding(inst: &SetCoverInstance) -> Result<VWPair> {
    let m = inst.m;
    if m == 0 || m > 64 {
        return Err(Error::InvalidParams(format!("m={m} out of range")));
    }
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let v: Vec<u64> = (1..=m).map(|i| mask & !(1u64 << (i - 1))).collect();
    let w: Vec<u64> = inst
        .subsets
        .iter()
        .map(|s| {
            let subset_mask: u64 = s.iter().map(|&e| 1u64 << (e - 1)).sum();
            mask & !subset_mask
        })
        .collect();
    VWPair::certify(inst, m, v, w, None, 0)
}

/// Retry budget for the randomized vectors; each draw succeeds with
/// probability > 1/2 at the chosen length.
pub const VW_RETRY_BUDGET: u32 = 64;

/// Randomized short vectors: length t = ⌈3r(1+ln(pm))⌉, each bit of v
/// zero with probability 1/r, w[j] the AND of its members' vectors.
/// Draws are certified exhaustively and redrawn on failure.
pub fn random_vw(inst: &SetCoverInstance, seed: u64) -> Result<VWPair> {
    let r = inst
        .r
        .ok_or_else(|| Error::InvalidParams("instance is not r-uniform".into()))?;
    let m = inst.m;
    let p = inst.subsets.len();
    let t = (3.0 * r as f64 * (1.0 + ((p * m) as f64).ln())).ceil() as usize;
    if t > 64 {
        return Err(Error::InvalidParams(format!(
            "vector length t={t} exceeds the 64-bit limit"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..VW_RETRY_BUDGET {
        let (v, w) = draw_vw(inst, r, t, &mut rng);
        match VWPair::certify(inst, t, v, w, Some(seed), attempt) {
            Ok(pair) => return Ok(pair),
            Err(Error::VerificationFailed(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::WorkLimit(format!(
        "no certified vector pair within {VW_RETRY_BUDGET} draws"
    )))
}

fn draw_vw<R: Rng>(inst: &SetCoverInstance, r: usize, t: usize, rng: &mut R) -> (Vec<u64>, Vec<u64>) {
    let v: Vec<u64> = (0..inst.m)
        .map(|_| {
            let mut word = 0u64;
            for b in 0..t {
                if !rng.gen_bool(1.0 / r as f64) {
                    word |= 1u64 << b;
                }
            }
            word
        })
        .collect();
    let full = if t == 64 { u64::MAX } else { (1u64 << t) - 1 };
    let w: Vec<u64> = inst
        .subsets
        .iter()
        .map(|s| s.iter().fold(full, |acc, &e| acc & v[e - 1]))
        .collect();
    (v, w)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VwTrialStats {
    pub trials: usize,
    pub successes: usize,
    pub t: usize,
    /// Whether membership implied dominance on every draw, including the
    /// failed ones -- it must, since w is an AND over its members.
    pub forward_always: bool,
}

/// Success statistics of single (retry-free) randomized draws, each
/// certified exhaustively.
pub fn vw_success_trials(
    inst: &SetCoverInstance,
    seed: u64,
    trials: usize,
) -> Result<VwTrialStats> {
    let r = inst
        .r
        .ok_or_else(|| Error::InvalidParams("instance is not r-uniform".into()))?;
    let t = (3.0 * r as f64 * (1.0 + ((inst.subsets.len() * inst.m) as f64).ln())).ceil() as usize;
    if t > 64 {
        return Err(Error::InvalidParams(format!(
            "vector length t={t} exceeds the 64-bit limit"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0;
    let mut forward_always = true;
    for _ in 0..trials {
        let (v, w) = draw_vw(inst, r, t, &mut rng);
        for (j, s) in inst.subsets.iter().enumerate() {
            for &e in s {
                forward_always &= v[e - 1] & w[j] == w[j];
            }
        }
        if VWPair::certify(inst, t, v, w, Some(seed), 0).is_ok() {
            successes += 1;
        }
    }
    Ok(VwTrialStats {
        trials,
        successes,
        t,
        forward_always,
    })
}

/// The classic reduction: on m variables, 1 at the m points of weight
/// m-1, ∗ strictly above some subset's characteristic point x_S (zero
/// exactly at the subset's elements), 0 elsewhere.  The minimum DNF size
/// of the result equals the instance's minimum cover size.
pub fn gimpel_partial(inst: &SetCoverInstance) -> Result<PartialFunction> {
    let m = inst.m;
    if m == 0 || m > MAX_VARS {
        return Err(Error::SizeCap { n: m, cap: MAX_VARS });
    }
    let size = 1usize << m;
    let mut ones = Bitset::new(size);
    for x in 0..size {
        if x.count_ones() as usize == m - 1 {
            ones.set(x, true);
        }
    }
    let mut stars = Bitset::new(size);
    for s in &inst.subsets {
        let subset_mask: usize = s.iter().map(|&e| 1usize << (e - 1)).sum();
        let x_s = (size - 1) & !subset_mask;
        for x in 0..size {
            if x & x_s == x_s && !ones.get(x) {
                stars.set(x, true);
            }
        }
    }
    PartialFunction::new(m, ones, stars)
}

/// The V/W generalization on t variables: 1 on V, ∗ above some w ∈ W
/// (where not already 1), 0 elsewhere.  With the classic embedding this
/// is exactly [`gimpel_partial`].
pub fn generalized_gimpel(vw: &VWPair) -> Result<PartialFunction> {
    if !vw.is_certified() {
        return Err(Error::InvalidParams("vector pair is not certified".into()));
    }
    let t = vw.t;
    if t > MAX_VARS {
        return Err(Error::SizeCap { n: t, cap: MAX_VARS });
    }
    let size = 1usize << t;
    let mut ones = Bitset::new(size);
    for &vi in &vw.v {
        ones.set(vi as usize, true);
    }
    let mut stars = Bitset::new(size);
    for &wj in &vw.w {
        for x in 0..size {
            if x as u64 & wj == wj && !ones.get(x) {
                stars.set(x, true);
            }
        }
    }
    PartialFunction::new(t, ones, stars)
}

/// Parameters of the lift: length of the z-block and the chosen
/// odd-parity tags, one per ∗-point of the input.
#[derive(Debug, Clone, Serialize)]
pub struct LiftParams {
    pub t: usize,
    pub s_odd: Vec<u32>,
}

/// Lift a partial function to a total one on vars(f) + 2 + t variables
/// (x low, then y1, y2, then z).  Each ∗-point of f gets a distinct
/// odd-parity z-tag; the lifted function satisfies
/// ds(g) = s·(ds(f) + 1) on the reduction families.
pub fn allender_lift(f: &PartialFunction) -> Result<(TotalFunction, LiftParams)> {
    let nf = f.n();
    let s = f.star_count();
    // z is one longer than x, raised if s odd-parity tags would not fit.
    let mut t = nf + 1;
    while s > 1usize << (t - 1) {
        t += 1;
    }
    let n = nf + 2 + t;
    if n > MAX_VARS {
        return Err(Error::SizeCap { n, cap: MAX_VARS });
    }
    let mut s_odd = Vec::with_capacity(s);
    for z in 0..1u32 << t {
        if s_odd.len() == s {
            break;
        }
        if z.count_ones() % 2 == 1 {
            s_odd.push(z);
        }
    }
    debug_assert_eq!(s_odd.len(), s);
    let s_set: HashSet<u32> = s_odd.iter().copied().collect();
    let x_mask = (1u32 << nf) - 1;
    let mut table = Bitset::new(1 << n);
    for a in 0..1u32 << n {
        let x = a & x_mask;
        let y1 = a >> nf & 1 != 0;
        let y2 = a >> (nf + 1) & 1 != 0;
        let z = a >> (nf + 2);
        let value = match f.value(x) {
            crate::bfcore::Value::One => y1 && y2 && s_set.contains(&z),
            crate::bfcore::Value::Star => {
                (y1 && y2) || (y1 == parity_chi(x) && y2 == !parity_chi(x))
            }
            crate::bfcore::Value::Zero => false,
        };
        if value {
            table.set(a as usize, true);
        }
    }
    Ok((TotalFunction::new(n, table)?, LiftParams { t, s_odd }))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HornGapParams {
    /// Element count; the family uses the all-pairs instance on k
    /// elements.
    pub k: usize,
    /// Number of amplification variables.
    pub t: usize,
}

/// The Horn amplification family: its clause set and, when the variable
/// count is within the table cap, the materialized function.
#[derive(Debug, Clone)]
pub struct HornGap {
    pub params: HornGapParams,
    pub n: usize,
    pub clauses: ClauseSet,
    pub table: Option<TotalFunction>,
    /// 3·C(k,2) + t·⌈k/2⌉, the exact minimum CNF size.
    pub expected_cs: usize,
    /// 3·C(k,2) + t, an upper bound on ess.
    pub ess_upper: usize,
}

/// Variables in order: x_1..x_k, then s_J over 2-subsets J in
/// lexicographic order, then z_1..z_t.  Clauses: s_J → x_i for both
/// members of each J; x_1…x_k → s_J; z_h → s_J.
pub fn horn_gap_family(params: HornGapParams) -> Result<HornGap> {
    let (k, t) = (params.k, params.t);
    if k < 2 || t < 1 {
        return Err(Error::InvalidParams(format!(
            "need k >= 2 and t >= 1, got k={k}, t={t}"
        )));
    }
    let pairs = k * (k - 1) / 2;
    let n = k + pairs + t;
    if n > 32 {
        return Err(Error::InvalidParams(format!(
            "variable count {n} exceeds the assignment-index limit"
        )));
    }
    let x_bit = |i: usize| i - 1; // x_i, 1-based
    let s_bit = |idx: usize| k + idx; // s_J by lex pair index
    let z_bit = |h: usize| k + pairs + h - 1; // z_h, 1-based
    // A definite clause A → b falsifies exactly the cube with A fixed to
    // 1 and b fixed to 0.
    let implication = |antecedent_bits: &[usize], b: usize| {
        let mut fixed = 1u32 << b;
        let mut values = 0u32;
        for &a in antecedent_bits {
            fixed |= 1 << a;
            values |= 1 << a;
        }
        Cube::new(n, fixed, values)
    };
    let mut clauses = Vec::new();
    let mut pair_idx = 0;
    let mut pair_bits = Vec::with_capacity(pairs);
    for i in 1..=k {
        for j in i + 1..=k {
            let s = s_bit(pair_idx);
            pair_bits.push((s, i, j));
            pair_idx += 1;
            clauses.push(implication(&[s], x_bit(i)));
            clauses.push(implication(&[s], x_bit(j)));
        }
    }
    let all_x: Vec<usize> = (1..=k).map(x_bit).collect();
    for &(s, _, _) in &pair_bits {
        clauses.push(implication(&all_x, s));
    }
    for h in 1..=t {
        for &(s, _, _) in &pair_bits {
            clauses.push(implication(&[z_bit(h)], s));
        }
    }
    let clauses = ClauseSet::new(n, View::Falsify, clauses);
    let table = if n <= MAX_VARS {
        Some(clauses.to_total()?)
    } else {
        None
    };
    Ok(HornGap {
        params,
        n,
        expected_cs: 3 * pairs + t * k.div_ceil(2),
        ess_upper: 3 * pairs + t,
        clauses,
        table,
    })
}
