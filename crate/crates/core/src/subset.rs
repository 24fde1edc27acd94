//! Variable subsets as bitmasks, with the canonical (size, lexicographic)
//! ordering used to index moment tables and moment matrices.

use std::fmt;

/// A subset of variables `{1, ..., n}` stored as a bitmask (bit `i-1` set
/// means variable `i` is a member). Supports up to 32 variables.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarSet(pub u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    /// Singleton `{i}`, 1-based.
    #[inline]
    pub fn single(i: usize) -> Self {
        debug_assert!((1..=32).contains(&i));
        VarSet(1 << (i - 1))
    }

    /// Pair `{i, j}`, 1-based, `i != j`.
    #[inline]
    pub fn pair(i: usize, j: usize) -> Self {
        Self::single(i).sym_diff(Self::single(j))
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        let mut m = 0u32;
        for &i in indices {
            m |= 1 << (i - 1);
        }
        VarSet(m)
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    /// Symmetric difference; under `X_i^2 = 1` this is monomial multiplication.
    #[inline]
    pub fn sym_diff(self, other: VarSet) -> VarSet {
        VarSet(self.0 ^ other.0)
    }

    #[inline]
    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending order, 1-based.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize + 1;
                m &= m - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, in submask order (ends with `self`).
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let full = self.0;
        let mut sub = 0u32;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let cur = VarSet(sub);
            if sub == full {
                done = true;
            } else {
                sub = (sub.wrapping_sub(full)) & full;
            }
            Some(cur)
        })
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl PartialOrd for VarSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VarSet {
    /// Canonical total order: by size first, then lexicographically on the
    /// ascending index lists. For equal sizes the lexicographically smaller
    /// set is the one owning the lowest non-common element.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.len().cmp(&other.len()) {
            Ordering::Equal => {
                let diff = self.0 ^ other.0;
                if diff == 0 {
                    return Ordering::Equal;
                }
                let low = diff & diff.wrapping_neg();
                if self.0 & low != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            ord => ord,
        }
    }
}

/// Dense index over all subsets of `[1, n]` of size at most `max_size`,
/// in canonical order, with O(1) reverse lookup by mask (direct table for
/// small n, hash map beyond).
#[derive(Debug, Clone)]
pub struct SubsetIndex {
    n: usize,
    max_size: usize,
    subsets: Vec<VarSet>,
    /// mask -> position, u32::MAX when out of range. Empty when the
    /// hash lookup is in use.
    lookup: Vec<u32>,
    hash_lookup: std::collections::HashMap<u32, u32>,
}

impl SubsetIndex {
    pub fn new(n: usize, max_size: usize) -> Self {
        assert!(n <= 32, "subset index supports n <= 32, got {n}");
        let max_size = max_size.min(n);
        let mut subsets = Vec::new();
        for k in 0..=max_size {
            combinations(n, k, &mut subsets);
        }
        let mut lookup = Vec::new();
        let mut hash_lookup = std::collections::HashMap::new();
        if n <= 20 {
            lookup = vec![u32::MAX; 1 << n];
            for (pos, s) in subsets.iter().enumerate() {
                lookup[s.0 as usize] = pos as u32;
            }
        } else {
            for (pos, s) in subsets.iter().enumerate() {
                hash_lookup.insert(s.0, pos as u32);
            }
        }
        SubsetIndex { n, max_size, subsets, lookup, hash_lookup }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn max_size(&self) -> usize {
        self.max_size
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    #[inline]
    pub fn subset(&self, pos: usize) -> VarSet {
        self.subsets[pos]
    }

    #[inline]
    pub fn subsets(&self) -> &[VarSet] {
        &self.subsets
    }

    /// Position of `s`, or None if `|s| > max_size`.
    #[inline]
    pub fn position(&self, s: VarSet) -> Option<usize> {
        if !self.lookup.is_empty() {
            let p = self.lookup[s.0 as usize];
            if p == u32::MAX {
                None
            } else {
                Some(p as usize)
            }
        } else {
            self.hash_lookup.get(&s.0).map(|&p| p as usize)
        }
    }
}

/// Appends all k-subsets of `[1, n]` in canonical (lexicographic) order.
fn combinations(n: usize, k: usize, out: &mut Vec<VarSet>) {
    if k == 0 {
        out.push(VarSet::EMPTY);
        return;
    }
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (1..=k).collect();
    loop {
        out.push(VarSet::from_indices(&idx));
        // next combination
        let mut i = k;
        while i > 0 && idx[i - 1] == n - (k - i) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All subsets of `[1, n]` of size at most `k`, canonical order.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<VarSet> {
    let mut out = Vec::new();
    for sz in 0..=k.min(n) {
        combinations(n, sz, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_order_small() {
        let idx = SubsetIndex::new(3, 2);
        let got: Vec<Vec<usize>> = idx.subsets().iter().map(|s| s.iter().collect()).collect();
        let want: Vec<Vec<usize>> = vec![
            vec![],
            vec![1],
            vec![2],
            vec![3],
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn order_is_size_then_lex() {
        // {1,4} precedes {2,3} lexicographically despite larger mask value.
        assert!(VarSet::from_indices(&[1, 4]) < VarSet::from_indices(&[2, 3]));
        assert!(VarSet::from_indices(&[1, 2]) < VarSet::from_indices(&[1, 3]));
        assert!(VarSet::single(3) < VarSet::pair(1, 2));
    }

    #[test]
    fn position_roundtrip() {
        let idx = SubsetIndex::new(6, 3);
        for (pos, s) in idx.subsets().iter().enumerate() {
            assert_eq!(idx.position(*s), Some(pos));
        }
        assert_eq!(idx.position(VarSet::from_indices(&[1, 2, 3, 4])), None);
    }

    proptest! {
        #[test]
        fn ord_matches_list_comparison(a in 0u32..256, b in 0u32..256) {
            let (sa, sb) = (VarSet(a), VarSet(b));
            let la: Vec<usize> = sa.iter().collect();
            let lb: Vec<usize> = sb.iter().collect();
            let want = la.len().cmp(&lb.len()).then(la.cmp(&lb));
            prop_assert_eq!(sa.cmp(&sb), want);
        }

        #[test]
        fn subsets_enumeration_complete(mask in 0u32..64) {
            let s = VarSet(mask);
            let subs: Vec<VarSet> = s.subsets().collect();
            prop_assert_eq!(subs.len(), 1 << s.len());
            for sub in &subs {
                prop_assert!(sub.is_subset_of(s));
            }
        }
    }
}
