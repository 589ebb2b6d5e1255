//! Set families over a finite ground set, with the link, restriction and
//! shadow operators everything else is built from.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{for_each_combination, SubsetMask};

/// The ground set `[n]`. Elements are `0..n` internally and `1..=n` in files.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundSet {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("ground set must be nonempty".into()));
        }
        Ok(Self { n, labels: None })
    }

    pub fn with_labels(n: usize, labels: Vec<String>) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} labels for a ground set of size {n}",
                labels.len()
            )));
        }
        Ok(Self {
            n,
            labels: Some(labels),
        })
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }

    pub fn check(&self, mask: &SubsetMask) -> Result<()> {
        if mask.span() > self.n {
            return Err(Error::ElementOutOfRange {
                element: mask.span(),
                n: self.n,
            });
        }
        Ok(())
    }
}

/// A finite family of distinct subsets of a ground set.
///
/// Members are kept sorted by mask value and deduplicated, so two families
/// with the same sets compare equal regardless of construction order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetFamily {
    ground: GroundSet,
    members: Vec<SubsetMask>,
    uniform_k: Option<usize>,
}

impl SetFamily {
    pub fn new(ground: GroundSet, members: impl IntoIterator<Item = SubsetMask>) -> Result<Self> {
        let mut members: Vec<SubsetMask> = members.into_iter().collect();
        for m in &members {
            ground.check(m)?;
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self::from_canonical(ground, members))
    }

    /// Members must already be sorted, distinct and inside the ground set.
    fn from_canonical(ground: GroundSet, members: Vec<SubsetMask>) -> Self {
        let uniform_k = match members.split_first() {
            None => None,
            Some((first, rest)) => {
                let k = first.len();
                rest.iter().all(|m| m.len() == k).then_some(k)
            }
        };
        Self {
            ground,
            members,
            uniform_k,
        }
    }

    fn derived(&self, members: Vec<SubsetMask>) -> Self {
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        Self::from_canonical(self.ground.clone(), members)
    }

    /// Filtering a canonical member list keeps it canonical.
    fn filtered<P: FnMut(&SubsetMask) -> bool>(&self, mut keep: P) -> Self {
        let members = self.members.iter().filter(|m| keep(m)).cloned().collect();
        Self::from_canonical(self.ground.clone(), members)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Ok(Self::from_canonical(GroundSet::new(n)?, Vec::new()))
    }

    /// Convenience constructor from 1-based element lists.
    pub fn from_one_based<S: AsRef<[usize]>>(n: usize, sets: &[S]) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let masks = sets
            .iter()
            .map(|s| {
                SubsetMask::from_one_based(s.as_ref()).ok_or(Error::ElementOutOfRange { element: 0, n })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ground, masks)
    }

    /// All `k`-subsets of `[n]`.
    pub fn all_k_subsets(n: usize, k: usize) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let items: Vec<usize> = (0..n).collect();
        let mut members = Vec::new();
        for_each_combination(&items, k, |c| members.push(SubsetMask::from_elems(c.iter().copied())));
        Self::new(ground, members)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.n
    }

    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn uniform_k(&self) -> Option<usize> {
        self.uniform_k
    }

    pub fn max_member_size(&self) -> usize {
        self.members.iter().map(SubsetMask::len).max().unwrap_or(0)
    }

    /// Mean member cardinality; zero for the empty family.
    pub fn mean_member_size(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(|m| m.len() as f64).sum::<f64>() / self.members.len() as f64
    }

    pub fn contains(&self, set: &SubsetMask) -> bool {
        self.members.binary_search(set).is_ok()
    }

    pub fn position(&self, set: &SubsetMask) -> Option<usize> {
        self.members.binary_search(set).ok()
    }

    pub fn is_subfamily_of(&self, other: &SetFamily) -> bool {
        self.n() == other.n() && self.members.iter().all(|m| other.contains(m))
    }

    pub fn same_ground(&self, other: &SetFamily) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::GroundMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// Members not in `other`.
    pub fn minus(&self, other: &SetFamily) -> SetFamily {
        self.filtered(|m| !other.contains(m))
    }

    pub fn union(&self, other: &SetFamily) -> Result<SetFamily> {
        self.same_ground(other)?;
        Ok(self.derived(self.members.iter().chain(&other.members).cloned().collect()))
    }

    /// Keeps the members selected by `keep`.
    pub fn retain<P: FnMut(&SubsetMask) -> bool>(&self, keep: P) -> SetFamily {
        self.filtered(keep)
    }

    /// The link `F(S) = {A \ S : A ∈ F, S ⊆ A}`.
    pub fn link(&self, s: &SubsetMask) -> SetFamily {
        self.derived(
            self.members
                .iter()
                .filter(|a| s.is_subset(a))
                .map(|a| a.difference(s))
                .collect(),
        )
    }

    /// Number of members containing `s`, i.e. `|F(S)|`.
    pub fn link_size(&self, s: &SubsetMask) -> usize {
        self.members.iter().filter(|a| s.is_subset(a)).count()
    }

    /// Members disjoint from `x`.
    pub fn avoid(&self, x: &SubsetMask) -> SetFamily {
        self.filtered(|a| a.is_disjoint(x))
    }

    /// `F(X, Y) = {A \ X : A ∈ F, A ∩ Y = X}`; requires `X ⊆ Y`.
    pub fn slice(&self, x: &SubsetMask, y: &SubsetMask) -> Result<SetFamily> {
        if !x.is_subset(y) {
            return Err(Error::SliceNotNested);
        }
        Ok(self.derived(
            self.members
                .iter()
                .filter(|a| a.intersection(y) == *x)
                .map(|a| a.difference(x))
                .collect(),
        ))
    }

    /// Members containing at least one set of `s`.
    pub fn contains_some(&self, s: &SetFamily) -> SetFamily {
        self.filtered(|a| s.members.iter().any(|b| b.is_subset(a)))
    }

    /// All `l`-subsets of members.
    pub fn lower_shadow(&self, l: usize) -> SetFamily {
        let mut out = BTreeSet::new();
        for m in &self.members {
            m.for_each_subset_of_size(l, |s| {
                out.insert(s.clone());
            });
        }
        Self::from_canonical(self.ground.clone(), out.into_iter().collect())
    }

    /// All `l`-subsets of `[n]` containing some member.
    pub fn upper_shadow(&self, l: usize) -> Result<SetFamily> {
        let n = self.n();
        if l > n {
            return Err(Error::InvalidArgument(format!(
                "upper shadow level {l} exceeds ground set size {n}"
            )));
        }
        let mut out = BTreeSet::new();
        for m in self.members.iter().filter(|m| m.len() <= l) {
            let free: Vec<usize> = (0..n).filter(|&e| !m.contains(e)).collect();
            for_each_combination(&free, l - m.len(), |c| {
                let mut s = m.clone();
                for &e in c {
                    s.insert(e);
                }
                out.insert(s);
            });
        }
        Ok(Self::from_canonical(self.ground.clone(), out.into_iter().collect()))
    }

    /// Every pair, including a member with itself, meets in at least `t`
    /// elements.
    pub fn is_t_intersecting(&self, t: usize) -> bool {
        self.t_intersection_violation(t).is_none()
    }

    /// First pair (possibly a member with itself) meeting in fewer than `t`
    /// elements.
    pub fn t_intersection_violation(&self, t: usize) -> Option<(usize, usize)> {
        for (i, a) in self.members.iter().enumerate() {
            for (j, b) in self.members.iter().enumerate().skip(i) {
                if a.intersection_len(b) < t {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// No two distinct members meet in exactly `s` elements.
    pub fn avoids_intersection(&self, s: usize) -> bool {
        self.members.iter().enumerate().all(|(i, a)| {
            self.members[i + 1..]
                .iter()
                .all(|b| a.intersection_len(b) != s)
        })
    }

    /// Degree of every ground element.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for m in &self.members {
            for e in m.iter() {
                deg[e] += 1;
            }
        }
        deg
    }

    pub fn is_regular(&self) -> bool {
        let deg = self.degrees();
        deg.iter().all(|&d| d == deg[0])
    }

    /// Intersection of all members; the whole ground set for the empty family.
    pub fn common_intersection(&self) -> SubsetMask {
        self.members
            .iter()
            .fold(self.ground.full_mask(), |acc, m| acc.intersection(m))
    }

    /// Exact cover number: the fewest elements meeting every member.
    pub fn cover_number(&self) -> Result<usize> {
        if self.members.iter().any(SubsetMask::is_empty) {
            return Err(Error::EmptyMember);
        }
        let mut best = self.n();
        let mut chosen = Vec::new();
        cover_search(&self.members, &mut chosen, &mut best);
        Ok(best)
    }
}

fn cover_search(uncovered: &[SubsetMask], chosen: &mut Vec<usize>, best: &mut usize) {
    if uncovered.is_empty() {
        *best = (*best).min(chosen.len());
        return;
    }
    // Pairwise disjoint members each need their own cover element.
    let mut packing: Vec<&SubsetMask> = Vec::new();
    for m in uncovered {
        if packing.iter().all(|p| p.is_disjoint(m)) {
            packing.push(m);
        }
    }
    if chosen.len() + packing.len() >= *best {
        return;
    }
    let pivot = uncovered.iter().min_by_key(|m| m.len()).expect("nonempty");
    for e in pivot.iter() {
        let rest: Vec<SubsetMask> = uncovered.iter().filter(|m| !m.contains(e)).cloned().collect();
        chosen.push(e);
        cover_search(&rest, chosen, best);
        chosen.pop();
    }
}

/// Every transversal `A_1 ∈ F_1, …, A_s ∈ F_s` satisfies
/// `|A_1 ∪ … ∪ A_s| ≤ Σ|A_i| − t`.
pub fn is_t_cross_dependent(families: &[SetFamily], t: usize) -> bool {
    fn rec(families: &[SetFamily], union: &SubsetMask, sum: usize, t: usize) -> bool {
        match families.split_first() {
            None => union.len() + t <= sum,
            Some((f, rest)) => f
                .members()
                .iter()
                .all(|a| rec(rest, &union.union(a), sum + a.len(), t)),
        }
    }
    rec(families, &SubsetMask::empty(), 0, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_one_based(n, sets).unwrap()
    }

    fn set(v: &[usize]) -> SubsetMask {
        SubsetMask::from_one_based(v).unwrap()
    }

    #[test]
    fn canonical_order_and_dedup() {
        let a = fam(4, &[&[3, 4], &[1, 2], &[1, 2]]);
        let b = fam(4, &[&[1, 2], &[3, 4]]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a.uniform_k(), Some(2));
        assert_eq!(fam(4, &[&[1], &[1, 2]]).uniform_k(), None);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            SetFamily::from_one_based(3, &[vec![1, 4]]),
            Err(Error::ElementOutOfRange { .. })
        ));
        assert!(SetFamily::from_one_based(3, &[vec![0]]).is_err());
        assert!(GroundSet::new(0).is_err());
    }

    #[test]
    fn link_examples() {
        let f = fam(3, &[&[1, 2], &[1, 3], &[2, 3]]);
        assert_eq!(f.link(&set(&[1])), fam(3, &[&[2], &[3]]));
        assert_eq!(f.link(&SubsetMask::empty()), f);
    }

    #[test]
    fn avoid_examples() {
        let f = fam(4, &[&[1, 2], &[3, 4]]);
        assert_eq!(f.avoid(&set(&[1])), fam(4, &[&[3, 4]]));
        assert_eq!(f.avoid(&SubsetMask::empty()), f);
        let g = fam(3, &[&[1, 2], &[1, 3], &[2, 3]]);
        assert!(g.avoid(&set(&[1, 2])).is_empty());
    }

    #[test]
    fn slice_examples() {
        let f = fam(3, &[&[1, 2], &[1, 3], &[2, 3]]);
        assert_eq!(f.slice(&set(&[1]), &set(&[1, 2])).unwrap(), fam(3, &[&[3]]));
        assert_eq!(f.slice(&SubsetMask::empty(), &SubsetMask::empty()).unwrap(), f);
        let g = fam(4, &[&[1, 2], &[3, 4]]);
        assert_eq!(g.slice(&SubsetMask::empty(), &set(&[1])).unwrap(), fam(4, &[&[3, 4]]));
        assert!(matches!(f.slice(&set(&[1]), &set(&[2])), Err(Error::SliceNotNested)));
    }

    #[test]
    fn contains_some_examples() {
        let a = SetFamily::all_k_subsets(3, 2).unwrap();
        assert_eq!(a.contains_some(&fam(3, &[&[1]])), fam(3, &[&[1, 2], &[1, 3]]));
        assert!(a.contains_some(&SetFamily::empty(3).unwrap()).is_empty());
    }

    #[test]
    fn shadows() {
        let f = fam(3, &[&[1, 2], &[2, 3]]);
        assert_eq!(f.lower_shadow(1), fam(3, &[&[1], &[2], &[3]]));
        assert_eq!(f.lower_shadow(0), SetFamily::new(f.ground().clone(), [SubsetMask::empty()]).unwrap());
        let k3 = SetFamily::all_k_subsets(4, 3).unwrap();
        assert_eq!(k3.lower_shadow(2), SetFamily::all_k_subsets(4, 2).unwrap());

        assert_eq!(fam(3, &[&[1]]).upper_shadow(2).unwrap(), fam(3, &[&[1, 2], &[1, 3]]));
        assert_eq!(fam(3, &[&[1]]).upper_shadow(3).unwrap(), fam(3, &[&[1, 2, 3]]));
        assert_eq!(
            fam(4, &[&[1, 2], &[3, 4]]).upper_shadow(3).unwrap(),
            SetFamily::all_k_subsets(4, 3).unwrap()
        );
        assert!(fam(3, &[&[1]]).upper_shadow(4).is_err());
    }

    #[test]
    fn intersection_predicates() {
        assert!(fam(4, &[&[1, 2], &[1, 3], &[1, 4]]).is_t_intersecting(1));
        assert!(!fam(5, &[&[1, 2, 3], &[1, 4, 5]]).is_t_intersecting(2));
        assert!(!fam(3, &[&[1, 2]]).is_t_intersecting(3));
        assert!(fam(3, &[&[1, 2], &[1, 3]]).avoids_intersection(0));
        assert!(!fam(4, &[&[1, 2], &[3, 4]]).avoids_intersection(0));
        // |A ∩ A| = k never counts against avoidance.
        assert!(fam(3, &[&[1, 2]]).avoids_intersection(2));
    }

    #[test]
    fn cross_dependence() {
        let f1 = fam(4, &[&[1, 2]]);
        assert!(is_t_cross_dependent(&[f1.clone(), fam(4, &[&[1, 3]])], 1));
        assert!(!is_t_cross_dependent(&[f1.clone(), fam(4, &[&[3, 4]])], 1));
        let g = fam(3, &[&[1, 2], &[1, 3]]);
        assert!(is_t_cross_dependent(&[g.clone(), g], 1));
        // A single family with t ≥ 1 fails literally: |A| ≤ |A| − t.
        assert!(!is_t_cross_dependent(std::slice::from_ref(&f1), 1));
        assert!(is_t_cross_dependent(&[f1], 0));
    }

    #[test]
    fn cover_numbers() {
        assert_eq!(fam(3, &[&[1, 2], &[2, 3]]).cover_number().unwrap(), 1);
        assert_eq!(fam(4, &[&[1, 2], &[3, 4]]).cover_number().unwrap(), 2);
        assert_eq!(SetFamily::all_k_subsets(4, 2).unwrap().cover_number().unwrap(), 3);
        assert!(matches!(
            SetFamily::new(GroundSet::new(2).unwrap(), [SubsetMask::empty()]).unwrap().cover_number(),
            Err(Error::EmptyMember)
        ));
    }

    #[test]
    fn cover_number_matches_brute_force() {
        // Oracle: smallest subset of [n] meeting every member.
        let f = fam(6, &[&[1, 2, 3], &[3, 4], &[4, 5, 6], &[1, 6], &[2, 5]]);
        let brute = (0u32..1 << 6)
            .filter(|bits| {
                f.members()
                    .iter()
                    .all(|m| m.iter().any(|e| bits >> e & 1 == 1))
            })
            .map(|bits| bits.count_ones() as usize)
            .min()
            .unwrap();
        assert_eq!(f.cover_number().unwrap(), brute);
    }

    #[test]
    fn regularity() {
        assert!(SetFamily::all_k_subsets(4, 2).unwrap().is_regular());
        assert!(!fam(3, &[&[1, 2]]).is_regular());
    }

    #[test]
    fn link_size_of_k_subsets() {
        let a = SetFamily::all_k_subsets(7, 3).unwrap();
        for x in [set(&[]), set(&[2]), set(&[1, 5]), set(&[2, 3, 7])] {
            let expected = binom(7 - x.len(), 3 - x.len());
            assert_eq!(a.link(&x).len(), expected);
        }
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}
