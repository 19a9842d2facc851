//! Word-sized element sets.
//!
//! Universes are initial segments of the naturals capped at
//! [`crate::MAX_UNIVERSE`], so a subset fits in one `u64`.  All set values
//! in the crate go through this type, which keeps hashing and memo keys
//! stable.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A subset of `{0, .., 63}` stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct ElemSet(u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn empty() -> Self {
        ElemSet(0)
    }

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 64);
        if n == 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(x: usize) -> Self {
        debug_assert!(x < 64);
        ElemSet(1u64 << x)
    }

    pub fn from_mask(mask: u64) -> Self {
        ElemSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, x: usize) -> bool {
        x < 64 && self.0 & (1u64 << x) != 0
    }

    #[must_use]
    pub fn with(self, x: usize) -> Self {
        debug_assert!(x < 64);
        ElemSet(self.0 | (1u64 << x))
    }

    #[must_use]
    pub fn without(self, x: usize) -> Self {
        ElemSet(self.0 & !(1u64 << x))
    }

    pub fn insert(&mut self, x: usize) {
        debug_assert!(x < 64);
        self.0 |= 1u64 << x;
    }

    pub fn union(self, other: Self) -> Self {
        ElemSet(self.0 | other.0)
    }

    pub fn intersect(self, other: Self) -> Self {
        ElemSet(self.0 & other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        ElemSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn min(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let x = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(x)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in ascending mask order.
    pub fn subsets(self) -> impl Iterator<Item = ElemSet> {
        let full = self.0;
        let mut sub: u64 = 0;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = ElemSet(sub);
            if sub == full {
                done = true;
            } else {
                sub = (sub.wrapping_sub(full)) & full;
            }
            Some(out)
        })
    }

    /// Subsets of `self` with exactly `k` elements, in ascending mask
    /// order.
    pub fn combinations(self, k: usize) -> Vec<ElemSet> {
        let elems = self.to_vec();
        if k > elems.len() {
            return vec![];
        }
        let mut out = vec![];
        let mut chosen = ElemSet::empty();
        fn rec(
            elems: &[usize],
            start: usize,
            left: usize,
            chosen: &mut ElemSet,
            out: &mut Vec<ElemSet>,
        ) {
            if left == 0 {
                out.push(*chosen);
                return;
            }
            for i in start..=elems.len() - left {
                chosen.insert(elems[i]);
                rec(elems, i + 1, left - 1, chosen, out);
                *chosen = chosen.without(elems[i]);
            }
        }
        rec(&elems, 0, k, &mut chosen, &mut out);
        out.sort();
        out
    }

    /// Subsets of `self` with at most `k` elements, ascending by mask
    /// within each size, sizes interleaved in mask order overall.
    pub fn subsets_up_to(self, k: usize) -> Vec<ElemSet> {
        if self.len() <= 16 {
            return self.subsets().filter(|s| s.len() <= k).collect();
        }
        let mut out: Vec<ElemSet> = (0..=k.min(self.len()))
            .flat_map(|size| self.combinations(size))
            .collect();
        out.sort();
        out
    }

    /// Image of the set under a permutation given as an image table.
    pub fn map(self, images: &[usize]) -> ElemSet {
        let mut out = ElemSet::empty();
        for x in self.iter() {
            out.insert(images[x]);
        }
        out
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ElemSet::empty();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl From<ElemSet> for Vec<usize> {
    fn from(s: ElemSet) -> Vec<usize> {
        s.to_vec()
    }
}

impl From<Vec<usize>> for ElemSet {
    fn from(v: Vec<usize>) -> ElemSet {
        v.into_iter().collect()
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
