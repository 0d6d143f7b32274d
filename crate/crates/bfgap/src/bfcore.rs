//! Truth-table representation of total and partial Boolean functions,
//! assignments and subcubes.
//!
//! Convention used everywhere: variable `x_1` is the least significant bit
//! of an assignment index, so assignment `a` sets `x_i` to
//! `(a >> (i-1)) & 1`.  A function on `n` variables is a bit table of
//! length `2^n` indexed by assignment.

use crate::bitset::Bitset;
use crate::{Error, Result, MAX_VARS};
use serde::{Deserialize, Serialize};

/// A point of {0,1}^n, identified by its index in the truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub n: usize,
    pub index: u32,
}

impl Assignment {
    pub fn new(n: usize, index: u32) -> Result<Self> {
        if n == 0 || n > 32 || (index as u64) >= (1u64 << n) {
            return Err(Error::InvalidFunction(format!(
                "assignment index {index} out of range for n={n}"
            )));
        }
        Ok(Assignment { n, index })
    }

    /// Value of variable `x_i` (1-based).
    pub fn var(&self, i: usize) -> bool {
        debug_assert!(1 <= i && i <= self.n);
        self.index >> (i - 1) & 1 != 0
    }
}

/// 0 if the point has an even number of ones, 1 otherwise.
pub fn parity_chi(index: u32) -> bool {
    index.count_ones() % 2 == 1
}

/// Whether clauses are read as the set of assignments falsifying them
/// (CNF view) or terms as the set of assignments satisfying them (DNF
/// view).  Cube membership is identical in both; the view changes literal
/// polarity in I/O and which polarity of points is being covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Falsify,
    Satisfy,
}

impl View {
    pub fn opposite(self) -> View {
        match self {
            View::Falsify => View::Satisfy,
            View::Satisfy => View::Falsify,
        }
    }
}

/// A subcube of {0,1}^n: the assignments agreeing with `values` on the
/// positions in `fixed`.
///
/// Under the falsify view a cube is a clause (fixed position with value 0
/// = positive literal); under the satisfy view it is a term (fixed
/// position with value 1 = positive literal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub n: usize,
    pub fixed: u32,
    pub values: u32,
}

impl Cube {
    pub fn new(n: usize, fixed: u32, values: u32) -> Self {
        debug_assert_eq!(values & !fixed, 0, "values must be within fixed");
        debug_assert!(n == 32 || fixed < (1 << n));
        Cube { n, fixed, values }
    }

    pub fn full(n: usize) -> Self {
        Cube::new(n, 0, 0)
    }

    pub fn minterm(n: usize, index: u32) -> Self {
        let mask = Self::var_mask(n);
        Cube::new(n, mask, index & mask)
    }

    pub fn var_mask(n: usize) -> u32 {
        if n == 32 {
            u32::MAX
        } else {
            (1u32 << n) - 1
        }
    }

    #[inline]
    pub fn contains_index(&self, index: u32) -> bool {
        index & self.fixed == self.values
    }

    pub fn contains(&self, a: Assignment) -> bool {
        a.n == self.n && self.contains_index(a.index)
    }

    /// Number of literals when read as a clause/term.
    pub fn literal_count(&self) -> u32 {
        self.fixed.count_ones()
    }

    pub fn member_count(&self) -> u64 {
        1u64 << (self.n as u32 - self.fixed.count_ones())
    }

    pub fn is_subcube_of(&self, other: &Cube) -> bool {
        // Every member of self is a member of other.
        other.fixed & !self.fixed == 0 && self.values & other.fixed == other.values
    }

    pub fn members(self) -> impl Iterator<Item = u32> {
        let free = !self.fixed & Self::var_mask(self.n);
        let values = self.values;
        let mut cur = Some(free);
        std::iter::from_fn(move || {
            let x = cur?;
            cur = if x == 0 { None } else { Some((x - 1) & free) };
            Some(values | x)
        })
    }

    /// Sort key giving the deterministic output order for clause sets.
    pub fn sort_key(&self) -> (u32, u32, u32) {
        (self.fixed.count_ones(), self.fixed, self.values)
    }
}

/// The smallest cube containing all given points: positions where every
/// point agrees are fixed to the agreed bit.  The members are exactly the
/// assignments separating the point set.
pub fn spanning_subcube(n: usize, points: &[u32]) -> Result<Cube> {
    let (first, rest) = points.split_first().ok_or(Error::EmptyPointSet)?;
    let mut fixed = Cube::var_mask(n);
    for p in rest {
        fixed &= !(p ^ first);
    }
    Ok(Cube::new(n, fixed, first & fixed))
}

/// A total Boolean function as a dense truth table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalFunction {
    n: usize,
    table: Bitset,
}

impl TotalFunction {
    pub fn new(n: usize, table: Bitset) -> Result<Self> {
        Self::new_with_cap(n, table, MAX_VARS)
    }

    pub fn new_with_cap(n: usize, table: Bitset, cap: usize) -> Result<Self> {
        if n == 0 || n > cap {
            return Err(Error::SizeCap { n, cap });
        }
        if table.len() != 1 << n {
            return Err(Error::InvalidFunction(format!(
                "table length {} != 2^{n}",
                table.len()
            )));
        }
        Ok(TotalFunction { n, table })
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        let mut table = Bitset::new(1 << n);
        if value {
            table.negate();
        }
        Self::new(n, table)
    }

    pub fn from_ones(n: usize, ones: impl IntoIterator<Item = u32>) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::SizeCap { n, cap: MAX_VARS });
        }
        let mut table = Bitset::new(1 << n);
        for i in ones {
            if (i as usize) >= (1 << n) {
                return Err(Error::InvalidFunction(format!(
                    "point index {i} out of range for n={n}"
                )));
            }
            table.set(i as usize, true);
        }
        Self::new(n, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &Bitset {
        &self.table
    }

    pub fn eval(&self, a: Assignment) -> Result<bool> {
        if a.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: a.n,
            });
        }
        Ok(self.table.get(a.index as usize))
    }

    #[inline]
    pub fn value(&self, index: u32) -> bool {
        self.table.get(index as usize)
    }

    pub fn complement(&self) -> TotalFunction {
        let mut table = self.table.clone();
        table.negate();
        TotalFunction { n: self.n, table }
    }

    pub fn truepoints(&self) -> Vec<u32> {
        self.table.iter_ones().map(|i| i as u32).collect()
    }

    pub fn falsepoints(&self) -> Vec<u32> {
        let mut neg = self.table.clone();
        neg.negate();
        neg.iter_ones().map(|i| i as u32).collect()
    }

    pub fn random<R: rand::Rng>(n: usize, rng: &mut R) -> Result<Self> {
        let mut table = Bitset::new(1 << n);
        for i in 0..1usize << n {
            table.set(i, rng.gen());
        }
        Self::new(n, table)
    }

    /// Random monotone function: the up-closure of a random point sample.
    pub fn random_monotone<R: rand::Rng>(n: usize, rng: &mut R) -> Result<Self> {
        let size = 1usize << n;
        let mut table = Bitset::new(size);
        let seeds = rng.gen_range(0..=size / 2);
        for _ in 0..seeds {
            table.set(rng.gen_range(0..size), true);
        }
        // Upward closure in one pass per variable.
        for bit in 0..n {
            for i in 0..size {
                if table.get(i) && i & (1 << bit) == 0 {
                    table.set(i | 1 << bit, true);
                }
            }
        }
        Self::new(n, table)
    }
}

/// Value of a partial function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Zero,
    One,
    Star,
}

/// A partial Boolean function: explicit 1-points and don't-care points,
/// every other assignment a 0-point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFunction {
    n: usize,
    ones: Bitset,
    stars: Bitset,
}

impl PartialFunction {
    pub fn new(n: usize, ones: Bitset, stars: Bitset) -> Result<Self> {
        Self::new_with_cap(n, ones, stars, MAX_VARS)
    }

    pub fn new_with_cap(n: usize, ones: Bitset, stars: Bitset, cap: usize) -> Result<Self> {
        if n == 0 || n > cap {
            return Err(Error::SizeCap { n, cap });
        }
        if ones.len() != 1 << n || stars.len() != 1 << n {
            return Err(Error::InvalidFunction(format!(
                "bitset lengths ({}, {}) != 2^{n}",
                ones.len(),
                stars.len()
            )));
        }
        if !ones.is_disjoint(&stars) {
            return Err(Error::InvalidFunction(
                "ones and stars must be disjoint".into(),
            ));
        }
        Ok(PartialFunction { n, ones, stars })
    }

    pub fn from_indices(
        n: usize,
        ones: impl IntoIterator<Item = u32>,
        stars: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::SizeCap { n, cap: MAX_VARS });
        }
        let size = 1usize << n;
        let check = |i: u32| -> Result<usize> {
            if (i as usize) < size {
                Ok(i as usize)
            } else {
                Err(Error::InvalidFunction(format!(
                    "point index {i} out of range for n={n}"
                )))
            }
        };
        let mut o = Bitset::new(size);
        for i in ones {
            o.set(check(i)?, true);
        }
        let mut s = Bitset::new(size);
        for i in stars {
            s.set(check(i)?, true);
        }
        Self::new(n, o, s)
    }

    pub fn from_total(f: &TotalFunction) -> Self {
        PartialFunction {
            n: f.n(),
            ones: f.table().clone(),
            stars: Bitset::new(1 << f.n()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ones(&self) -> &Bitset {
        &self.ones
    }

    pub fn stars(&self) -> &Bitset {
        &self.stars
    }

    pub fn is_total(&self) -> bool {
        self.stars.count() == 0
    }

    pub fn star_count(&self) -> usize {
        self.stars.count()
    }

    #[inline]
    pub fn value(&self, index: u32) -> Value {
        if self.ones.get(index as usize) {
            Value::One
        } else if self.stars.get(index as usize) {
            Value::Star
        } else {
            Value::Zero
        }
    }

    /// Swap the roles of 0- and 1-points; don't-cares stay don't-cares.
    pub fn dual(&self) -> PartialFunction {
        let mut zeros = self.ones.clone();
        zeros.union_with(&self.stars);
        zeros.negate();
        PartialFunction {
            n: self.n,
            ones: zeros,
            stars: self.stars.clone(),
        }
    }

    pub fn zero_points(&self) -> Vec<u32> {
        let mut z = self.ones.clone();
        z.union_with(&self.stars);
        z.negate();
        z.iter_ones().map(|i| i as u32).collect()
    }

    pub fn one_points(&self) -> Vec<u32> {
        self.ones.iter_ones().map(|i| i as u32).collect()
    }

    pub fn to_total(&self) -> Result<TotalFunction> {
        if !self.is_total() {
            return Err(Error::InvalidFunction(
                "function has don't-care points".into(),
            ));
        }
        TotalFunction::new(self.n, self.ones.clone())
    }

    /// A formula value table is consistent with the function if it is 1 on
    /// every 1-point and 0 on every 0-point.
    pub fn is_consistent_with(&self, g: &TotalFunction) -> bool {
        g.n() == self.n
            && (0..1u32 << self.n).all(|i| match self.value(i) {
                Value::One => g.value(i),
                Value::Zero => !g.value(i),
                Value::Star => true,
            })
    }
}

/// On-disk JSON form: `{"n":…, "ones":[…], "stars":[…]}`; absent `stars`
/// means a total function.
#[derive(Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    pub n: usize,
    pub ones: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stars: Option<Vec<u32>>,
}

impl FunctionFile {
    pub fn from_partial(f: &PartialFunction) -> Self {
        FunctionFile {
            n: f.n(),
            ones: f.one_points(),
            stars: if f.is_total() {
                None
            } else {
                Some(f.stars().iter_ones().map(|i| i as u32).collect())
            },
        }
    }

    pub fn from_total(f: &TotalFunction) -> Self {
        FunctionFile {
            n: f.n(),
            ones: f.truepoints(),
            stars: None,
        }
    }

    pub fn to_partial(&self) -> Result<PartialFunction> {
        self.to_partial_with_cap(MAX_VARS)
    }

    pub fn to_partial_with_cap(&self, cap: usize) -> Result<PartialFunction> {
        if self.n == 0 || self.n > cap {
            return Err(Error::SizeCap { n: self.n, cap });
        }
        let size = 1usize << self.n;
        let mut ones = Bitset::new(size);
        let mut stars = Bitset::new(size);
        for (set, indices) in [
            (&mut ones, Some(&self.ones)),
            (&mut stars, self.stars.as_ref()),
        ] {
            for &i in indices.into_iter().flatten() {
                if (i as usize) >= size {
                    return Err(Error::InvalidFunction(format!(
                        "point index {i} out of range for n={}",
                        self.n
                    )));
                }
                set.set(i as usize, true);
            }
        }
        PartialFunction::new_with_cap(self.n, ones, stars, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> TotalFunction {
        TotalFunction::from_ones(2, [3]).unwrap()
    }

    fn parity3() -> TotalFunction {
        TotalFunction::from_ones(3, [1, 2, 4, 7]).unwrap()
    }

    #[test]
    fn eval_basics() {
        let f = and2();
        assert!(f.eval(Assignment::new(2, 3).unwrap()).unwrap());
        assert!(!f.eval(Assignment::new(2, 1).unwrap()).unwrap());
        assert!(!parity3().eval(Assignment::new(3, 0b011).unwrap()).unwrap());
    }

    #[test]
    fn eval_dimension_mismatch() {
        let f = and2();
        assert!(matches!(
            f.eval(Assignment::new(3, 3).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complement_involutive() {
        let c0 = TotalFunction::constant(2, false).unwrap();
        assert_eq!(c0.complement(), TotalFunction::constant(2, true).unwrap());
        let f = parity3();
        assert_eq!(f.complement().complement(), f);
    }

    #[test]
    fn parity_examples() {
        assert!(!parity_chi(0b0000));
        assert!(!parity_chi(0b011));
        assert!(parity_chi(0b001));
    }

    #[test]
    fn spanning_subcube_examples() {
        // Identical points fix everything.
        let c = spanning_subcube(4, &[0b0101, 0b0101]).unwrap();
        assert_eq!((c.fixed, c.values), (0b1111, 0b0101));
        // Total disagreement leaves the full cube.
        let c = spanning_subcube(2, &[0b01, 0b10]).unwrap();
        assert_eq!(c.fixed, 0);
        assert_eq!(c.member_count(), 4);
        // Partial agreement.
        let c = spanning_subcube(3, &[0b000, 0b011]).unwrap();
        assert_eq!((c.fixed, c.values), (0b100, 0b000));
        let mut members: Vec<u32> = c.members().collect();
        members.sort_unstable();
        assert_eq!(members, vec![0b000, 0b001, 0b010, 0b011]);
    }

    #[test]
    fn spanning_subcube_empty_set() {
        assert!(matches!(
            spanning_subcube(3, &[]),
            Err(Error::EmptyPointSet)
        ));
    }

    #[test]
    fn cube_membership_count_by_enumeration() {
        for n in 1..=6usize {
            let cube = Cube::new(n, Cube::var_mask(n) & 0b10101, 0b00101 & Cube::var_mask(n) & 0b10101);
            let members = (0..1u32 << n).filter(|&i| cube.contains_index(i)).count();
            assert_eq!(members as u64, cube.member_count());
            assert_eq!(cube.members().count() as u64, cube.member_count());
        }
    }

    #[test]
    fn partial_dual_roundtrip() {
        let f = PartialFunction::from_indices(3, [1, 2], [7]).unwrap();
        let d = f.dual();
        assert_eq!(d.value(1), Value::Zero);
        assert_eq!(d.value(0), Value::One);
        assert_eq!(d.value(7), Value::Star);
        assert_eq!(d.dual(), f);
    }

    #[test]
    fn json_roundtrip() {
        let f = PartialFunction::from_indices(3, [1, 2], [7]).unwrap();
        let file = FunctionFile::from_partial(&f);
        let text = serde_json::to_string(&file).unwrap();
        let back: FunctionFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_partial().unwrap(), f);
        // Absent stars parses as total.
        let t: FunctionFile = serde_json::from_str(r#"{"n":2,"ones":[3]}"#).unwrap();
        assert!(t.to_partial().unwrap().is_total());
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            TotalFunction::constant(25, false),
            Err(Error::SizeCap { .. })
        ));
    }
}
