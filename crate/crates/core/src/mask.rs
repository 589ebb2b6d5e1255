//! Bitmask subsets of a ground set `{0, …, n-1}`.
//!
//! Masks up to 128 elements live inline; wider ground sets spill to the heap.
//! Trailing zero words are always trimmed, so equal sets have equal
//! representations and the derived `Hash` is consistent with `Eq`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

type Words = SmallVec<[u64; 2]>;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    words: Words,
}

impl SubsetMask {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(element: usize) -> Self {
        let mut m = Self::empty();
        m.insert(element);
        m
    }

    /// The set `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        let mut words: Words = SmallVec::from_elem(u64::MAX, n / 64);
        if !n.is_multiple_of(64) {
            words.push((1u64 << (n % 64)) - 1);
        }
        Self { words }
    }

    pub fn from_elems<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        let mut m = Self::empty();
        for e in elems {
            m.insert(e);
        }
        m
    }

    /// Builds a mask from 1-based element labels. Label 0 is rejected.
    pub fn from_one_based(elems: &[usize]) -> Option<Self> {
        let mut m = Self::empty();
        for &e in elems {
            m.insert(e.checked_sub(1)?);
        }
        Some(m)
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, element: usize) {
        let (w, b) = (element / 64, element % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1u64 << b;
    }

    pub fn remove(&mut self, element: usize) {
        let (w, b) = (element / 64, element % 64);
        if w < self.words.len() {
            self.words[w] &= !(1u64 << b);
            self.trim();
        }
    }

    pub fn with(&self, element: usize) -> Self {
        let mut m = self.clone();
        m.insert(element);
        m
    }

    pub fn without(&self, element: usize) -> Self {
        let mut m = self.clone();
        m.remove(element);
        m
    }

    #[inline]
    pub fn contains(&self, element: usize) -> bool {
        let (w, b) = (element / 64, element % 64);
        self.words.get(w).is_some_and(|x| x >> b & 1 == 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// One past the largest element, i.e. the minimum ground-set size that
    /// can hold this mask.
    pub fn span(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(&top) => (self.words.len() - 1) * 64 + (64 - top.leading_zeros() as usize),
        }
    }

    #[inline]
    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.len() <= other.words.len()
            && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    #[inline]
    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    #[inline]
    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut words: Words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        while words.last() == Some(&0) {
            words.pop();
        }
        Self { words }
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w |= s;
        }
        Self { words }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut words = self.words.clone();
        for (w, o) in words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
        let mut m = Self { words };
        m.trim();
        m
    }

    pub fn union_len(&self, other: &Self) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }

    /// Elements in increasing order.
    pub fn iter(&self) -> Elements<'_> {
        Elements {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|e| e + 1).collect()
    }

    /// The `count` smallest elements, or `None` if the set is too small.
    pub fn first_elements(&self, count: usize) -> Option<Self> {
        let taken: Vec<usize> = self.iter().take(count).collect();
        (taken.len() == count).then(|| Self::from_elems(taken))
    }

    /// Lexicographic order on the increasing element sequences, so that
    /// `{1} < {1,2} < {1,3} < {2}`.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }

    /// Calls `f` on every subset of `self` with at most `cap` elements.
    pub fn for_each_subset<F: FnMut(&SubsetMask)>(&self, cap: usize, mut f: F) {
        let elems = self.to_vec();
        let mut cur = SubsetMask::empty();
        fn rec<F: FnMut(&SubsetMask)>(
            elems: &[usize],
            cap: usize,
            cur: &mut SubsetMask,
            size: usize,
            f: &mut F,
        ) {
            match elems.split_first() {
                None => f(cur),
                Some((&e, rest)) => {
                    rec(rest, cap, cur, size, f);
                    if size < cap {
                        cur.insert(e);
                        rec(rest, cap, cur, size + 1, f);
                        cur.remove(e);
                    }
                }
            }
        }
        rec(&elems, cap, &mut cur, 0, &mut f);
    }

    /// Calls `f` on every subset of `self` with exactly `size` elements.
    pub fn for_each_subset_of_size<F: FnMut(&SubsetMask)>(&self, size: usize, mut f: F) {
        let elems = self.to_vec();
        if size > elems.len() {
            return;
        }
        for_each_combination(&elems, size, |c| f(&SubsetMask::from_elems(c.iter().copied())));
    }
}

/// Visits all `size`-combinations of `items` in lexicographic order.
pub fn for_each_combination<F: FnMut(&[usize])>(items: &[usize], size: usize, mut f: F) {
    let n = items.len();
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut buf: Vec<usize> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
        for j in i..size {
            buf[j] = items[idx[j]];
        }
    }
}

pub struct Elements<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Elements<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let b = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + b);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}

/// Orders masks by their value as unsigned integers.
impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e + 1)?;
        }
        write!(f, "}}")
    }
}

/// Serialized as the sorted list of 1-based elements.
impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|e| e + 1))
    }
}

impl<'de> Deserialize<'de> for SubsetMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let elems = Vec::<usize>::deserialize(d)?;
        SubsetMask::from_one_based(&elems)
            .ok_or_else(|| serde::de::Error::custom("elements are 1-based; found 0"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_span() {
        assert_eq!(SubsetMask::full(0), SubsetMask::empty());
        assert_eq!(SubsetMask::full(64).len(), 64);
        assert_eq!(SubsetMask::full(130).len(), 130);
        assert_eq!(SubsetMask::full(130).span(), 130);
        assert_eq!(SubsetMask::singleton(200).span(), 201);
    }

    #[test]
    fn remove_trims_words() {
        let a = SubsetMask::from_elems([3, 140]).without(140);
        assert_eq!(a, SubsetMask::singleton(3));
        assert!(SubsetMask::singleton(3) < SubsetMask::singleton(140));
    }

    #[test]
    fn lex_order() {
        let s = |v: &[usize]| SubsetMask::from_one_based(v).unwrap();
        assert_eq!(s(&[1]).lex_cmp(&s(&[1, 2])), Ordering::Less);
        assert_eq!(s(&[1, 3]).lex_cmp(&s(&[2])), Ordering::Less);
        assert_eq!(s(&[]).lex_cmp(&s(&[1])), Ordering::Less);
    }

    #[test]
    fn subsets_enumeration_counts() {
        let m = SubsetMask::from_elems([0, 5, 70, 100]);
        let mut count = 0;
        m.for_each_subset(4, |_| count += 1);
        assert_eq!(count, 16);
        let mut capped = 0;
        m.for_each_subset(2, |s| {
            assert!(s.len() <= 2 && s.is_subset(&m));
            capped += 1
        });
        assert_eq!(capped, 1 + 4 + 6);
        let mut exact = Vec::new();
        m.for_each_subset_of_size(3, |s| exact.push(s.clone()));
        assert_eq!(exact.len(), 4);
    }

    #[test]
    fn combinations_lexicographic() {
        let mut out = Vec::new();
        for_each_combination(&[1, 2, 3, 4], 2, |c| out.push(c.to_vec()));
        assert_eq!(out, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        let mut empty = 0;
        for_each_combination(&[1, 2], 0, |c| {
            assert!(c.is_empty());
            empty += 1
        });
        assert_eq!(empty, 1);
    }

    proptest! {
        #[test]
        fn set_algebra_matches_btreeset(a in proptest::collection::btree_set(0usize..200, 0..20),
                                        b in proptest::collection::btree_set(0usize..200, 0..20)) {
            let ma = SubsetMask::from_elems(a.iter().copied());
            let mb = SubsetMask::from_elems(b.iter().copied());
            let inter: Vec<_> = a.intersection(&b).copied().collect();
            let uni: Vec<_> = a.union(&b).copied().collect();
            let diff: Vec<_> = a.difference(&b).copied().collect();
            prop_assert_eq!(ma.intersection(&mb).to_vec(), inter.clone());
            prop_assert_eq!(ma.union(&mb).to_vec(), uni);
            prop_assert_eq!(ma.difference(&mb).to_vec(), diff);
            prop_assert_eq!(ma.intersection_len(&mb), inter.len());
            prop_assert_eq!(ma.is_subset(&mb), a.is_subset(&b));
            prop_assert_eq!(ma.is_disjoint(&mb), a.is_disjoint(&b));
            prop_assert_eq!(ma.lex_cmp(&mb), a.iter().cmp(b.iter()));
            prop_assert_eq!(ma == mb, a == b);
        }
    }
}
