//! Permutations of `[n]` viewed as `n`-subsets of the grid `[n] × [n]`.
//!
//! Cell `(x, y)` (1-based) is stored at index `(x−1)·n + (y−1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{GroundSet, SetFamily};
use crate::mask::SubsetMask;

/// Largest `n` whose grid fits the bitmask kernels comfortably.
pub const MAX_GRID_N: usize = 11;

#[inline]
pub fn grid_cell(n: usize, x: usize, y: usize) -> usize {
    x * n + y
}

/// A permutation in one-line notation, 0-based: `image[x]` is the image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &y in &image {
            if y >= n || std::mem::replace(&mut seen[y], true) {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection of 0..{n}")));
            }
        }
        Ok(Self { image })
    }

    /// From 1-based one-line notation, e.g. `[2, 1, 3, 4]`.
    pub fn from_one_line(one_based: &[usize]) -> Result<Self> {
        let image = one_based
            .iter()
            .map(|&y| {
                y.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("images are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(image)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn to_one_line(&self) -> Vec<usize> {
        self.image.iter().map(|y| y + 1).collect()
    }

    /// Number of shared graph cells, `|σ ∩ π|`.
    pub fn agreement(&self, other: &Permutation) -> usize {
        self.image
            .iter()
            .zip(&other.image)
            .filter(|(a, b)| a == b)
            .count()
    }

    pub fn fixed_points(&self) -> usize {
        self.image.iter().enumerate().filter(|(x, y)| x == *y).count()
    }

    pub fn to_grid_mask(&self) -> SubsetMask {
        let n = self.n();
        SubsetMask::from_elems(self.image.iter().enumerate().map(|(x, &y)| grid_cell(n, x, y)))
    }

    pub fn contains_pairs(&self, partial: &PartialPermutation) -> bool {
        partial.pairs.iter().all(|&(x, y)| self.image.get(x) == Some(&y))
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        for_each_permutation(n, |p| out.push(Permutation { image: p.to_vec() }));
        out
    }
}

/// Visits every arrangement of `0..n` in lexicographic order.
pub fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        f(&p);
        if !next_permutation(&mut p) {
            return;
        }
    }
}

pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A set of grid cells with no repeated row or column, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialPermutation {
    pairs: Vec<(usize, usize)>,
}

impl PartialPermutation {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        for (i, a) in pairs.iter().enumerate() {
            for b in &pairs[i + 1..] {
                if a.0 == b.0 || a.1 == b.1 {
                    return Err(Error::InvalidPermutation(format!(
                        "cells {a:?} and {b:?} share a coordinate"
                    )));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_mask(&self, n: usize) -> SubsetMask {
        SubsetMask::from_elems(self.pairs.iter().map(|&(x, y)| grid_cell(n, x, y)))
    }

    /// Decodes grid cells; `None` when two cells share a row or column.
    pub fn from_mask(mask: &SubsetMask, n: usize) -> Option<Self> {
        let pairs = mask.iter().map(|c| (c / n, c % n)).collect();
        Self::new(pairs).ok()
    }

    /// The partial identity `{(0,0), …, (t−1,t−1)}`.
    pub fn identity_prefix(t: usize) -> Self {
        Self {
            pairs: (0..t).map(|i| (i, i)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationFamily {
    n: usize,
    members: Vec<Permutation>,
}

impl PermutationFamily {
    pub fn new(n: usize, mut members: Vec<Permutation>) -> Result<Self> {
        if let Some(bad) = members.iter().find(|p| p.n() != n) {
            return Err(Error::InvalidPermutation(format!(
                "{:?} does not act on [{n}]",
                bad.to_one_line()
            )));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { n, members })
    }

    /// The full symmetric group `Σ_n`.
    pub fn symmetric_group(n: usize) -> Self {
        Self {
            n,
            members: Permutation::all(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[Permutation] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Grid encoding as an `n`-uniform family over `n²` cells.
    pub fn to_set_family(&self) -> Result<SetFamily> {
        if self.n > MAX_GRID_N {
            return Err(Error::InvalidArgument(format!(
                "grid encoding supports n ≤ {MAX_GRID_N}, got {}",
                self.n
            )));
        }
        SetFamily::new(
            GroundSet::new((self.n * self.n).max(1))?,
            self.members.iter().map(Permutation::to_grid_mask),
        )
    }

    /// Decodes a grid family; every member must be a total permutation.
    pub fn from_set_family(family: &SetFamily, n: usize) -> Result<Self> {
        if family.n() != n * n {
            return Err(Error::InvalidArgument(format!(
                "ground set of size {} is not an {n}×{n} grid",
                family.n()
            )));
        }
        let members = family
            .members()
            .iter()
            .map(|m| {
                let mut image = vec![usize::MAX; n];
                for c in m.iter() {
                    image[c / n] = c % n;
                }
                Permutation::new(image)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, members)
    }

    pub fn is_t_intersecting(&self, t: usize) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(i, a)| self.members[i..].iter().all(|b| a.agreement(b) >= t))
    }

    pub fn avoids_intersection(&self, s: usize) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(i, a)| self.members[i + 1..].iter().all(|b| a.agreement(b) != s))
    }
}

/// Serialized as `{"n": 4, "perms": [[2,1,3,4], …]}` with 1-based images.
#[derive(Serialize, Deserialize)]
pub(crate) struct PermRepr {
    pub n: usize,
    pub perms: Vec<Vec<usize>>,
}

impl From<&PermutationFamily> for PermRepr {
    fn from(f: &PermutationFamily) -> Self {
        Self {
            n: f.n,
            perms: f.members.iter().map(Permutation::to_one_line).collect(),
        }
    }
}
