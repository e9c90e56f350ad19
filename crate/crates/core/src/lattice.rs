//! Subset algebra over the ground set `{1..n}` of transparencies.
//!
//! Subsets are n-bit masks (bit `i-1` set means transparency `i` is in the
//! subset). The canonical index order for all matrices and vectors is the
//! recursive block order: the nonempty subsets of `{1..n-1}` first, then
//! `{n}`, then each of those subsets unioned with `{n}`, recursively. That
//! order coincides with ascending mask order, which the tests pin down.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ground set. 2^16 - 1 subsets is already far beyond
/// what the search and table builders can hold; the cap makes the
/// exponential blow-up an explicit contract instead of an OOM.
pub const MAX_GROUND_SET: u8 = 16;

/// A subset of the ground set `{1..n}`, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetId {
    mask: u16,
    n: u8,
}

impl SubsetId {
    pub fn new(mask: u32, n: u8) -> Result<Self> {
        check_ground_size(n)?;
        if mask >> n != 0 {
            return Err(Error::MaskOutOfRange { mask, n });
        }
        Ok(SubsetId {
            mask: mask as u16,
            n,
        })
    }

    pub fn empty(n: u8) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn full(n: u8) -> Result<Self> {
        check_ground_size(n)?;
        Ok(SubsetId {
            mask: full_mask(n),
            n,
        })
    }

    /// The singleton `{i}` (1-based).
    pub fn singleton(i: u32, n: u8) -> Result<Self> {
        check_ground_size(n)?;
        if i == 0 || i > n as u32 {
            return Err(Error::ElementOutOfRange { element: i, n });
        }
        Ok(SubsetId {
            mask: 1 << (i - 1),
            n,
        })
    }

    /// Builds a subset from 1-based element labels.
    pub fn from_elements(elements: &[u32], n: u8) -> Result<Self> {
        check_ground_size(n)?;
        let mut mask = 0u16;
        for &e in elements {
            if e == 0 || e > n as u32 {
                return Err(Error::ElementOutOfRange { element: e, n });
            }
            mask |= 1 << (e - 1);
        }
        Ok(SubsetId { mask, n })
    }

    /// 1-based element labels in ascending order.
    pub fn elements(self) -> Vec<u32> {
        (1..=self.n as u32)
            .filter(|&i| self.mask & (1 << (i - 1)) != 0)
            .collect()
    }

    #[inline]
    pub fn mask(self) -> u16 {
        self.mask
    }

    #[inline]
    pub fn ground_size(self) -> u8 {
        self.n
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.mask.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn contains_element(self, i: u32) -> bool {
        i >= 1 && i <= self.n as u32 && self.mask & (1 << (i - 1)) != 0
    }

    #[inline]
    pub fn is_subset_of(self, other: SubsetId) -> bool {
        self.assert_same_ground(other);
        self.mask & !other.mask == 0
    }

    #[inline]
    pub fn intersects(self, other: SubsetId) -> bool {
        self.assert_same_ground(other);
        self.mask & other.mask != 0
    }

    #[inline]
    pub fn union(self, other: SubsetId) -> SubsetId {
        self.assert_same_ground(other);
        SubsetId {
            mask: self.mask | other.mask,
            n: self.n,
        }
    }

    #[inline]
    pub fn intersection(self, other: SubsetId) -> SubsetId {
        self.assert_same_ground(other);
        SubsetId {
            mask: self.mask & other.mask,
            n: self.n,
        }
    }

    #[inline]
    pub fn difference(self, other: SubsetId) -> SubsetId {
        self.assert_same_ground(other);
        SubsetId {
            mask: self.mask & !other.mask,
            n: self.n,
        }
    }

    #[inline]
    pub fn complement(self) -> SubsetId {
        SubsetId {
            mask: full_mask(self.n) & !self.mask,
            n: self.n,
        }
    }

    /// Re-indexes `self` (a subset of `within`) onto the ground set
    /// `{1..|within|}`, compressing the elements of `within` in ascending
    /// order. Used when solving the linear system restricted to a
    /// sub-ground-set.
    pub fn compact_within(self, within: SubsetId) -> SubsetId {
        assert!(
            self.is_subset_of(within),
            "compact_within: {self} is not a subset of {within}"
        );
        let q = within.len() as u8;
        let mut mask = 0u16;
        let mut j = 0;
        for i in 0..within.n {
            if within.mask & (1 << i) != 0 {
                if self.mask & (1 << i) != 0 {
                    mask |= 1 << j;
                }
                j += 1;
            }
        }
        SubsetId { mask, n: q.max(1) }
    }

    /// Inverse of [`compact_within`](Self::compact_within): maps a subset of
    /// `{1..|within|}` back onto the original ground set.
    pub fn expand_within(self, within: SubsetId) -> SubsetId {
        assert!(
            self.n as u32 <= within.len().max(1),
            "expand_within: ground {} exceeds |{within}|",
            self.n
        );
        let mut mask = 0u16;
        let mut j = 0;
        for i in 0..within.n {
            if within.mask & (1 << i) != 0 {
                if self.mask & (1 << j) != 0 {
                    mask |= 1 << i;
                }
                j += 1;
            }
        }
        SubsetId {
            mask,
            n: within.n,
        }
    }

    /// Applies a transparency relabeling. `perm[i-1]` is the 1-based image
    /// of element `i`.
    pub fn relabel(self, perm: &[u8]) -> SubsetId {
        assert_eq!(perm.len(), self.n as usize, "permutation length mismatch");
        let mut mask = 0u16;
        for i in 0..self.n {
            if self.mask & (1 << i) != 0 {
                mask |= 1 << (perm[i as usize] - 1);
            }
        }
        SubsetId { mask, n: self.n }
    }

    fn assert_same_ground(self, other: SubsetId) {
        assert_eq!(
            self.n, other.n,
            "subset ground sets differ: {} vs {}",
            self.n, other.n
        );
    }
}

impl fmt::Display for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for e in self.elements() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}@{}", self.n)
    }
}

#[inline]
pub(crate) fn full_mask(n: u8) -> u16 {
    if n >= 16 {
        u16::MAX
    } else {
        (1u16 << n) - 1
    }
}

pub(crate) fn check_ground_size(n: u8) -> Result<()> {
    if n == 0 || n > MAX_GROUND_SET {
        Err(Error::GroundSetSize { got: n as u32 })
    } else {
        Ok(())
    }
}

/// Iterates all submasks of `d`, ascending, including `0` and `d` itself.
pub(crate) fn submasks(d: u16) -> impl Iterator<Item = u16> {
    let mut cur: u16 = 0;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = cur;
        if cur == d {
            done = true;
        } else {
            cur = cur.wrapping_sub(d) & d;
        }
        Some(out)
    })
}

/// All 2^n - 1 nonempty subsets in the canonical recursive block order:
/// the order for `n` is the order for `n-1`, then `{n}`, then each subset
/// of the `n-1` order unioned with `{n}`.
pub fn nonempty_subsets(n: u8) -> Result<Vec<SubsetId>> {
    check_ground_size(n)?;
    fn rec(k: u8, out: &mut Vec<u16>) {
        if k == 1 {
            out.push(1);
            return;
        }
        rec(k - 1, out);
        let lower = out.len();
        let top = 1u16 << (k - 1);
        out.push(top);
        for i in 0..lower {
            let m = out[i];
            out.push(m | top);
        }
    }
    let mut masks = Vec::with_capacity((1usize << n) - 1);
    rec(n, &mut masks);
    Ok(masks.into_iter().map(|mask| SubsetId { mask, n }).collect())
}

/// All 2^n subsets (including the empty set) in ascending mask order.
pub fn all_subsets(n: u8) -> Result<Vec<SubsetId>> {
    check_ground_size(n)?;
    Ok((0..(1u32 << n))
        .map(|mask| SubsetId {
            mask: mask as u16,
            n,
        })
        .collect())
}

/// The interval `[lo, hi]` in the subset lattice: every `T` with
/// `lo ⊆ T ⊆ hi`, ascending by mask, each exactly once.
pub fn interval_subsets(lo: SubsetId, hi: SubsetId) -> Result<Vec<SubsetId>> {
    if lo.ground_size() != hi.ground_size() {
        return Err(Error::GroundSetMismatch {
            left: lo.ground_size(),
            right: hi.ground_size(),
        });
    }
    if lo.mask & !hi.mask != 0 {
        return Err(Error::NotASubset { lo, hi });
    }
    let free = hi.mask & !lo.mask;
    Ok(submasks(free)
        .map(|s| SubsetId {
            mask: lo.mask | s,
            n: lo.n,
        })
        .collect())
}

/// `(-1)^(|a| + |b| + n + 1)`, the sign that appears in the closed-form
/// solution of the subset linear system.
pub fn parity_sign(a: SubsetId, b: SubsetId, n: u8) -> i8 {
    assert_eq!(a.ground_size(), n, "parity_sign: ground set of a");
    assert_eq!(b.ground_size(), n, "parity_sign: ground set of b");
    if (a.len() + b.len() + n as u32 + 1) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A family of nonempty subsets sharing one ground set: the collection of
/// transparency subsets that each carry their own secret image.
#[derive(Clone, PartialEq, Eq)]
pub struct SubsetFamily {
    n: u8,
    members: Vec<SubsetId>,
    position: Vec<Option<u16>>,
}

impl SubsetFamily {
    pub fn new<I: IntoIterator<Item = SubsetId>>(n: u8, members: I) -> Result<Self> {
        check_ground_size(n)?;
        let mut list: Vec<SubsetId> = Vec::new();
        for m in members {
            if m.ground_size() != n {
                return Err(Error::GroundSetMismatch {
                    left: n,
                    right: m.ground_size(),
                });
            }
            if m.is_empty() {
                return Err(Error::EmptyFamilyMember);
            }
            list.push(m);
        }
        list.sort();
        list.dedup();
        let mut position = vec![None; 1usize << n];
        for (i, m) in list.iter().enumerate() {
            position[m.mask() as usize] = Some(i as u16);
        }
        Ok(SubsetFamily {
            n,
            members: list,
            position,
        })
    }

    /// Every nonempty subset of `{1..n}`.
    pub fn all_nonempty(n: u8) -> Result<Self> {
        Self::new(n, nonempty_subsets(n)?)
    }

    /// Every nonempty subset except the full ground set.
    pub fn all_but_top(n: u8) -> Result<Self> {
        let full = SubsetId::full(n)?;
        Self::new(
            n,
            nonempty_subsets(n)?.into_iter().filter(|s| *s != full),
        )
    }

    #[inline]
    pub fn ground_size(&self) -> u8 {
        self.n
    }

    #[inline]
    pub fn members(&self) -> &[SubsetId] {
        &self.members
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, s: SubsetId) -> bool {
        s.ground_size() == self.n && self.position[s.mask() as usize].is_some()
    }

    /// Position of `s` in the canonical member listing.
    #[inline]
    pub fn index_of(&self, s: SubsetId) -> Option<usize> {
        if s.ground_size() != self.n {
            return None;
        }
        self.position[s.mask() as usize].map(|i| i as usize)
    }

    /// Bit mask over member positions selecting the members contained in `q`.
    pub fn members_within(&self, q: SubsetId) -> u32 {
        let mut bits = 0u32;
        for (i, m) in self.members.iter().enumerate() {
            if m.is_subset_of(q) {
                bits |= 1 << i;
            }
        }
        bits
    }

    /// Union of all members.
    pub fn union_support(&self) -> SubsetId {
        let mut mask = 0u16;
        for m in &self.members {
            mask |= m.mask();
        }
        SubsetId { mask, n: self.n }
    }

    /// The family `{S ∈ 𝔖 : S ⊆ within}` re-indexed onto `{1..|within|}`.
    pub fn restrict_to(&self, within: SubsetId) -> SubsetFamily {
        let q = within.len().max(1) as u8;
        let members = self
            .members
            .iter()
            .filter(|m| m.is_subset_of(within))
            .map(|m| m.compact_within(within));
        SubsetFamily::new(q, members).expect("restriction preserves validity")
    }

    /// Applies a transparency relabeling to every member.
    pub fn relabel(&self, perm: &[u8]) -> SubsetFamily {
        SubsetFamily::new(self.n, self.members.iter().map(|m| m.relabel(perm)))
            .expect("relabeling preserves validity")
    }
}

impl fmt::Display for SubsetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SubsetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}@{}", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(elements: &[u32], n: u8) -> SubsetId {
        SubsetId::from_elements(elements, n).unwrap()
    }

    #[test]
    fn nonempty_subsets_counts() {
        for n in 1..=8 {
            let subsets = nonempty_subsets(n).unwrap();
            assert_eq!(subsets.len(), (1usize << n) - 1);
        }
    }

    #[test]
    fn nonempty_subsets_small_cases() {
        assert_eq!(nonempty_subsets(1).unwrap(), vec![s(&[1], 1)]);
        assert_eq!(
            nonempty_subsets(2).unwrap(),
            vec![s(&[1], 2), s(&[2], 2), s(&[1, 2], 2)]
        );
        let order3 = nonempty_subsets(3).unwrap();
        assert_eq!(order3.len(), 7);
        assert_eq!(&order3[..3], &[s(&[1], 3), s(&[2], 3), s(&[1, 2], 3)]);
    }

    #[test]
    fn recursive_order_is_ascending_mask_order() {
        for n in 1..=10 {
            let subsets = nonempty_subsets(n).unwrap();
            for (i, sub) in subsets.iter().enumerate() {
                assert_eq!(sub.mask() as usize, i + 1, "n={n} position {i}");
            }
        }
    }

    #[test]
    fn ground_size_bounds() {
        assert!(matches!(
            nonempty_subsets(0),
            Err(Error::GroundSetSize { got: 0 })
        ));
        assert!(matches!(
            nonempty_subsets(17),
            Err(Error::GroundSetSize { got: 17 })
        ));
        assert!(SubsetId::new(0b100, 2).is_err());
    }

    #[test]
    fn interval_examples() {
        let n = 2;
        assert_eq!(
            interval_subsets(s(&[1], n), s(&[1, 2], n)).unwrap(),
            vec![s(&[1], n), s(&[1, 2], n)]
        );
        assert_eq!(
            interval_subsets(s(&[], n), s(&[1, 2], n)).unwrap(),
            vec![s(&[], n), s(&[1], n), s(&[2], n), s(&[1, 2], n)]
        );
        assert_eq!(
            interval_subsets(s(&[2], n), s(&[2], n)).unwrap(),
            vec![s(&[2], n)]
        );
        assert!(matches!(
            interval_subsets(s(&[1], n), s(&[2], n)),
            Err(Error::NotASubset { .. })
        ));
    }

    #[test]
    fn interval_cardinality() {
        for n in 1..=6u8 {
            for hi_mask in 0..(1u32 << n) {
                let hi = SubsetId::new(hi_mask, n).unwrap();
                for lo_mask in submasks(hi_mask as u16) {
                    let lo = SubsetId::new(lo_mask as u32, n).unwrap();
                    let interval = interval_subsets(lo, hi).unwrap();
                    assert_eq!(interval.len(), 1usize << (hi.len() - lo.len()));
                    let mut seen = interval.clone();
                    seen.dedup();
                    assert_eq!(seen.len(), interval.len(), "duplicates in interval");
                }
            }
        }
    }

    #[test]
    fn parity_sign_examples() {
        assert_eq!(parity_sign(s(&[1], 2), s(&[1, 2], 2), 2), 1);
        assert_eq!(parity_sign(s(&[], 2), s(&[], 2), 2), -1);
        assert_eq!(parity_sign(s(&[1, 2, 3], 3), s(&[2], 3), 3), 1);
    }

    #[test]
    fn compact_expand_roundtrip() {
        let within = s(&[1, 3, 4], 4);
        let sub = s(&[1, 4], 4);
        let compact = sub.compact_within(within);
        assert_eq!(compact, s(&[1, 3], 3));
        assert_eq!(compact.expand_within(within), sub);
    }

    #[test]
    fn family_basics() {
        let fam = SubsetFamily::new(2, [s(&[1], 2), s(&[2], 2), s(&[1], 2)]).unwrap();
        assert_eq!(fam.len(), 2);
        assert!(fam.contains(s(&[1], 2)));
        assert!(!fam.contains(s(&[1, 2], 2)));
        assert_eq!(fam.index_of(s(&[2], 2)), Some(1));
        assert_eq!(fam.union_support(), s(&[1, 2], 2));
        assert!(SubsetFamily::new(2, [s(&[], 2)]).is_err());

        let all3 = SubsetFamily::all_nonempty(3).unwrap();
        assert_eq!(all3.len(), 7);
        let abt = SubsetFamily::all_but_top(3).unwrap();
        assert_eq!(abt.len(), 6);
        assert!(!abt.contains(s(&[1, 2, 3], 3)));
    }

    #[test]
    fn members_within_mask() {
        let fam = SubsetFamily::all_nonempty(2).unwrap();
        // members in canonical order: {1}, {2}, {1,2}
        assert_eq!(fam.members_within(s(&[1], 2)), 0b001);
        assert_eq!(fam.members_within(s(&[2], 2)), 0b010);
        assert_eq!(fam.members_within(s(&[1, 2], 2)), 0b111);
    }

    #[test]
    fn relabel_family() {
        let fam = SubsetFamily::new(3, [s(&[1], 3), s(&[1, 2], 3)]).unwrap();
        let relabeled = fam.relabel(&[3, 1, 2]);
        assert!(relabeled.contains(s(&[3], 3)));
        assert!(relabeled.contains(s(&[1, 3], 3)));
    }
}
