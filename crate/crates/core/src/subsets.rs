//! Subsets of cache groups `[Λ] = {1, …, Λ}` as bitsets, plus enumeration in
//! lexicographic order.

use alloc::vec::Vec;
use core::fmt;

/// Largest supported number of cache groups.
pub const MAX_GROUPS: u32 = 63;

/// A subset of `{1, …, 63}`; element `i` is bit `i − 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GroupSet(u64);

impl GroupSet {
    pub const EMPTY: GroupSet = GroupSet(0);

    pub fn from_bits(bits: u64) -> Self {
        GroupSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(i: u32) -> Self {
        debug_assert!((1..=MAX_GROUPS).contains(&i));
        GroupSet(1 << (i - 1))
    }

    pub fn contains(self, i: u32) -> bool {
        (1..=MAX_GROUPS).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn insert(self, i: u32) -> Self {
        self | GroupSet::singleton(i)
    }

    pub fn remove(self, i: u32) -> Self {
        if self.contains(i) {
            GroupSet(self.0 & !(1 << (i - 1)))
        } else {
            self
        }
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: GroupSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl Iterator<Item = u32> {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros();
            rest &= rest - 1;
            Some(i + 1)
        })
    }

    pub fn to_vec(self) -> Vec<u32> {
        self.iter().collect()
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn lex_cmp(self, other: GroupSet) -> core::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl FromIterator<u32> for GroupSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        iter.into_iter().fold(GroupSet::EMPTY, GroupSet::insert)
    }
}

impl core::ops::BitOr for GroupSet {
    type Output = GroupSet;
    fn bitor(self, rhs: GroupSet) -> GroupSet {
        GroupSet(self.0 | rhs.0)
    }
}

impl fmt::Debug for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// `C(n, k)`, zero when `k > n`. Panics on `u64` overflow.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial overflows u64")
}

/// All `k`-subsets of `{1, …, n}` in lexicographic order.
pub fn k_subsets(n: u32, k: u32) -> KSubsets {
    assert!(n <= MAX_GROUPS, "at most {MAX_GROUPS} groups supported");
    let current = (k <= n).then(|| (1..=k).collect());
    KSubsets { n, current }
}

/// Iterator behind [`k_subsets`].
pub struct KSubsets {
    n: u32,
    current: Option<Vec<u32>>,
}

impl Iterator for KSubsets {
    type Item = GroupSet;

    fn next(&mut self) -> Option<GroupSet> {
        let cur = self.current.as_mut()?;
        let out: GroupSet = cur.iter().copied().collect();
        let k = cur.len();
        // Rightmost position that can still advance.
        let mut i = k;
        while i > 0 && cur[i - 1] == self.n - (k - i) as u32 {
            i -= 1;
        }
        if i == 0 {
            self.current = None;
        } else {
            cur[i - 1] += 1;
            for j in i..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
        Some(out)
    }
}
