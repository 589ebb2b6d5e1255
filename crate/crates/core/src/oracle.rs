//! Exact desk-scale oracles for extremal questions about intersecting
//! families of sets and permutations.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::clique::Graph;
use crate::error::{Error, Result};
use crate::exact::{binomial, factorial};
use crate::family::{GroundSet, SetFamily};
use crate::mask::SubsetMask;
use crate::perm::{for_each_permutation, Permutation, PermutationFamily};

pub const DEFAULT_BUDGET: u64 = 200_000_000;

/// Largest `n` the permutation oracles accept without an override.
pub const DEFAULT_MAX_PERM_N: usize = 5;

fn members_only<S: Serializer>(f: &SetFamily, s: S) -> std::result::Result<S::Ok, S::Error> {
    f.members().serialize(s)
}

fn as_decimal<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalResult {
    pub optimum: usize,
    #[serde(serialize_with = "members_only")]
    pub witness: SetFamily,
    /// Approximate when the search ran on several threads.
    pub nodes_explored: u64,
    /// False only when the budget ran out; `optimum` is then a lower bound.
    pub proved_optimal: bool,
}

fn clique_subfamily(candidates: &[SubsetMask], ground: &GroundSet, graph: &Graph, budget: u64) -> Result<ExtremalResult> {
    let res = graph.max_clique(budget);
    let witness = SetFamily::new(ground.clone(), res.clique.iter().map(|&i| candidates[i].clone()))?;
    Ok(ExtremalResult {
        optimum: witness.len(),
        witness,
        nodes_explored: res.nodes,
        proved_optimal: res.complete,
    })
}

/// Largest `t`-intersecting subfamily of `a`.
pub fn max_t_intersecting(a: &SetFamily, t: usize, budget: u64) -> Result<ExtremalResult> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    // Members smaller than t fail the diagonal condition on their own.
    let candidates: Vec<SubsetMask> = a.members().iter().filter(|m| m.len() >= t).cloned().collect();
    let graph = Graph::from_fn(candidates.len(), |i, j| candidates[i].intersection_len(&candidates[j]) >= t);
    clique_subfamily(&candidates, a.ground(), &graph, budget)
}

/// Largest subfamily of `a` with no two distinct members meeting in exactly
/// `t − 1` elements.
pub fn max_avoiding(a: &SetFamily, t: usize, budget: u64) -> Result<ExtremalResult> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let candidates = a.members();
    let graph = Graph::from_fn(candidates.len(), |i, j| candidates[i].intersection_len(&candidates[j]) != t - 1);
    clique_subfamily(candidates, a.ground(), &graph, budget)
}

/// A `t`-subset of the common intersection if the family is trivial, the
/// lexicographically least one.
pub fn is_trivial_t_intersecting(f: &SetFamily, t: usize) -> Result<Option<SubsetMask>> {
    if !f.is_t_intersecting(t) {
        return Err(Error::NotTIntersecting { t });
    }
    Ok(f.common_intersection().first_elements(t))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HiltonMilner {
    pub n: usize,
    pub t: usize,
    /// `σ = (1 2 … t)`, 1-based one-line notation.
    pub sigma: Vec<usize>,
    #[serde(skip)]
    pub family: PermutationFamily,
    pub size: usize,
    /// Fewer than `t` pairs are common to all members.
    pub nontrivial: bool,
    /// No two distinct members agree in exactly `t − 1` places.
    pub avoids: bool,
}

/// `P′ ∪ {σ}` where `P′` holds the permutations fixing `[t]` pointwise whose
/// agreement with `σ = (1 2 … t)` is not `t − 1`.
///
/// For `t = 1`, `σ` is the identity and the family is the full star, which
/// is trivial; the flags report this.
pub fn hilton_milner_perm_family(n: usize, t: usize) -> Result<HiltonMilner> {
    if t == 0 || t >= n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ t < n, got n={n}, t={t}")));
    }
    let mut image: Vec<usize> = (0..n).collect();
    image[..t].rotate_left(1);
    let sigma = Permutation::new(image)?;

    let mut members = vec![sigma.clone()];
    for_each_permutation(n - t, |tail| {
        let mut image: Vec<usize> = (0..t).collect();
        image.extend(tail.iter().map(|y| y + t));
        let pi = Permutation::new(image).expect("extension of the identity is a permutation");
        if pi.agreement(&sigma) + 1 != t {
            members.push(pi);
        }
    });
    let family = PermutationFamily::new(n, members)?;

    let common = (0..n)
        .filter(|&x| family.members().iter().all(|p| p.apply(x) == family.members()[0].apply(x)))
        .count();
    Ok(HiltonMilner {
        n,
        t,
        sigma: sigma.to_one_line(),
        size: family.len(),
        nontrivial: common < t,
        avoids: family.avoids_intersection(t - 1),
        family,
    })
}

/// Number of derangements of an `m`-set.
pub fn derangement_count(m: usize) -> BigUint {
    let (mut prev, mut cur) = (BigUint::from(1u32), BigUint::from(0u32));
    if m == 0 {
        return prev;
    }
    for i in 2..=m {
        let next = BigUint::from(i - 1) * (&cur + &prev);
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionClasses {
    pub n: usize,
    pub t: usize,
    /// 1-based one-line notation.
    pub pi: Vec<usize>,
    /// `i ↦ |{σ ⊇ Id_[t] : |σ ∩ π| = i}|` for `i = 0..=n`.
    pub counts: BTreeMap<usize, u64>,
    #[serde(serialize_with = "as_decimal")]
    pub total: BigUint,
    /// `¼·t^{−t}·(n−t)!`.
    pub bound: f64,
    /// `|G_{t−1}| ≥ bound`.
    pub bound_holds: bool,
    /// `1 ≤ t ≤ n/4` and `n ≥ 10`, the range the bound is claimed for.
    pub bound_in_range: bool,
}

/// Whether the intersection-class bound is claimed at `(n, t)`.
pub fn bound_claimed(n: usize, t: usize) -> bool {
    t >= 1 && 4 * t <= n && n >= 10
}

/// Tallies the extensions of the partial identity on `[t]` by their
/// agreement with `pi`.
pub fn count_intersection_classes(n: usize, t: usize, pi: &Permutation) -> Result<IntersectionClasses> {
    if pi.n() != n {
        return Err(Error::InvalidPermutation(format!("expected a permutation of [{n}]")));
    }
    if t == 0 || t > n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ t ≤ n, got t={t}")));
    }
    if (0..t).all(|x| pi.apply(x) == x) {
        return Err(Error::InvalidArgument(format!("pi contains the identity on [{t}]")));
    }
    let base = (0..t).filter(|&x| pi.apply(x) == x).count();
    let mut counts: BTreeMap<usize, u64> = (0..=n).map(|i| (i, 0)).collect();
    for_each_permutation(n - t, |tail| {
        let agree = tail.iter().enumerate().filter(|&(x, &y)| pi.apply(x + t) == y + t).count();
        *counts.get_mut(&(base + agree)).expect("agreement ≤ n") += 1;
    });
    let total = factorial(n - t);
    let bound = 0.25 * (t as f64).powi(-(t as i32)) * total.to_f64().unwrap_or(f64::INFINITY);
    let g = counts[&(t - 1)];
    Ok(IntersectionClasses {
        n,
        t,
        pi: pi.to_one_line(),
        bound_holds: g as f64 >= bound,
        bound_in_range: bound_claimed(n, t),
        counts,
        total,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Infeasible,
    Unknown,
}

/// No regular intersecting family of `k`-sets exists once `n > k²`.
pub fn regular_feasibility(n: usize, k: usize) -> Feasibility {
    if n > k * k {
        Feasibility::Infeasible
    } else {
        Feasibility::Unknown
    }
}

struct RegularSearch {
    n: usize,
    k: usize,
    d: usize,
    /// `by_min[e]`: all `k`-sets with least element `e`.
    by_min: Vec<Vec<SubsetMask>>,
    degree: Vec<usize>,
    chosen: Vec<SubsetMask>,
    nodes: u64,
    budget: u64,
}

impl RegularSearch {
    fn fits(&self, s: &SubsetMask) -> bool {
        s.iter().all(|x| self.degree[x] < self.d) && self.chosen.iter().all(|c| !c.is_disjoint(s))
    }

    fn push(&mut self, s: SubsetMask) {
        for x in s.iter() {
            self.degree[x] += 1;
        }
        self.chosen.push(s);
    }

    fn pop(&mut self) {
        let s = self.chosen.pop().expect("nonempty");
        for x in s.iter() {
            self.degree[x] -= 1;
        }
    }

    /// Saturates elements from `e` on. Elements below `e` already have
    /// degree `d`, so new sets at `e` have least element `e`.
    fn element(&mut self, e: usize) -> Result<bool> {
        if e == self.n {
            return Ok(true);
        }
        let need = self.d - self.degree[e];
        if need == 0 {
            return self.element(e + 1);
        }
        if self.n - e < self.k {
            return Ok(false);
        }
        let candidates: Vec<SubsetMask> = self.by_min[e].iter().filter(|s| self.fits(s)).cloned().collect();
        self.pick(e, &candidates, 0, need)
    }

    fn pick(&mut self, e: usize, candidates: &[SubsetMask], from: usize, need: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                what: "regular family search",
                budget: self.budget,
            });
        }
        if need == 0 {
            return self.element(e + 1);
        }
        for i in from..candidates.len() {
            if candidates.len() - i < need {
                break;
            }
            let s = &candidates[i];
            if self.fits(s) {
                self.push(s.clone());
                if self.pick(e, candidates, i + 1, need - 1)? {
                    return Ok(true);
                }
                self.pop();
            }
        }
        Ok(false)
    }
}

/// Largest regular intersecting family of `k`-subsets of `[n]`.
///
/// Tries each feasible common degree `d` from the top. For fixed `d` the
/// search saturates elements in order, and by symmetry the first set is
/// `{1, …, k}`.
pub fn max_regular_intersecting(n: usize, k: usize, budget: u64) -> Result<ExtremalResult> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ k ≤ n, got n={n}, k={k}")));
    }
    let ground = GroundSet::new(n)?;
    let empty = SetFamily::empty(n)?;
    if regular_feasibility(n, k) == Feasibility::Infeasible {
        return Ok(ExtremalResult {
            optimum: 0,
            witness: empty,
            nodes_explored: 0,
            proved_optimal: true,
        });
    }
    // Largest intersecting family: a star, or everything when n < 2k.
    let cap = if n >= 2 * k { binomial(n - 1, k - 1) } else { binomial(n, k) };
    let cap: usize = cap.try_into().map_err(|_| Error::InvalidArgument("family too large".into()))?;
    let d_max = cap * k / n;

    let mut by_min: Vec<Vec<SubsetMask>> = vec![Vec::new(); n];
    for s in SetFamily::all_k_subsets(n, k)?.members() {
        by_min[s.iter().next().expect("k ≥ 1")].push(s.clone());
    }
    by_min.iter_mut().for_each(|v| v.sort_by(|a, b| a.lex_cmp(b)));

    let mut nodes = 0;
    let mut proved = true;
    for d in (1..=d_max).rev() {
        if !(n * d).is_multiple_of(k) {
            continue;
        }
        let mut search = RegularSearch {
            n,
            k,
            d,
            by_min: by_min.clone(),
            degree: vec![0; n],
            chosen: Vec::new(),
            nodes: 0,
            budget: budget.saturating_sub(nodes),
        };
        search.push(SubsetMask::from_elems(0..k));
        let found = search.element(0);
        nodes += search.nodes;
        match found {
            Ok(true) => {
                let witness = SetFamily::new(ground, search.chosen)?;
                return Ok(ExtremalResult {
                    optimum: witness.len(),
                    witness,
                    nodes_explored: nodes,
                    proved_optimal: proved,
                });
            }
            Ok(false) => {}
            Err(Error::BudgetExceeded { .. }) => proved = false,
            Err(e) => return Err(e),
        }
    }
    Ok(ExtremalResult {
        optimum: 0,
        witness: empty,
        nodes_explored: nodes,
        proved_optimal: proved,
    })
}

/// The Fano plane on `[7]`.
pub fn fano_plane() -> SetFamily {
    SetFamily::from_one_based(
        7,
        &[[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6], [2, 5, 7], [3, 4, 7], [3, 5, 6]],
    )
    .expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_one_based(n, sets).unwrap()
    }

    fn grid(n: usize) -> SetFamily {
        PermutationFamily::symmetric_group(n).to_set_family().unwrap()
    }

    /// Largest subfamily (by exhaustive subset scan) satisfying `ok`.
    fn brute_max<P: Fn(&SetFamily) -> bool>(a: &SetFamily, ok: P) -> usize {
        let m = a.len();
        (0u64..1 << m)
            .filter(|&s| {
                let mut i = 0;
                let sub = a.retain(|_| {
                    i += 1;
                    s >> (i - 1) & 1 == 1
                });
                ok(&sub)
            })
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn ekr_values() {
        for (n, k, want) in [(5, 2, 4), (6, 2, 5), (7, 3, 15)] {
            let a = SetFamily::all_k_subsets(n, k).unwrap();
            let r = max_t_intersecting(&a, 1, DEFAULT_BUDGET).unwrap();
            assert_eq!(r.optimum, want, "n={n} k={k}");
            assert!(r.proved_optimal && r.witness.is_t_intersecting(1));
        }
    }

    #[test]
    fn permutation_values() {
        assert_eq!(max_t_intersecting(&grid(3), 1, DEFAULT_BUDGET).unwrap().optimum, 2);
        let r = max_t_intersecting(&grid(4), 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 6);
        assert!(r.witness.is_t_intersecting(1));
        let r = max_avoiding(&grid(3), 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 2);
        assert_eq!(r.optimum, brute_max(&grid(3), |f| f.avoids_intersection(0)));
    }

    #[test]
    fn avoiding_on_pairs_matches_brute_force() {
        let a = SetFamily::all_k_subsets(4, 2).unwrap();
        let r = max_avoiding(&a, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, brute_max(&a, |f| f.avoids_intersection(1)));
        assert!(r.witness.avoids_intersection(1));
        let one = fam(3, &[&[1, 2]]);
        assert_eq!(max_avoiding(&one, 5, DEFAULT_BUDGET).unwrap().optimum, 1);
    }

    #[test]
    fn intersecting_matches_brute_force_on_small_families() {
        let a = fam(5, &[&[1, 2], &[2, 3], &[3, 4], &[1, 3], &[2, 4, 5], &[1], &[5], &[1, 5]]);
        for t in 1..=2 {
            let r = max_t_intersecting(&a, t, DEFAULT_BUDGET).unwrap();
            assert_eq!(r.optimum, brute_max(&a, |f| f.is_t_intersecting(t)), "t={t}");
        }
    }

    #[test]
    fn triviality() {
        assert_eq!(
            is_trivial_t_intersecting(&fam(3, &[&[1, 2], &[1, 3]]), 1).unwrap(),
            Some(SubsetMask::singleton(0))
        );
        assert_eq!(is_trivial_t_intersecting(&fam(3, &[&[1, 2], &[1, 3], &[2, 3]]), 1).unwrap(), None);
        let star = grid(3).retain(|m| m.contains(0));
        assert_eq!(is_trivial_t_intersecting(&star, 1).unwrap(), Some(SubsetMask::singleton(0)));
        assert!(is_trivial_t_intersecting(&fam(4, &[&[1, 2], &[3, 4]]), 1).is_err());
    }

    #[test]
    fn hilton_milner() {
        let hm = hilton_milner_perm_family(4, 2).unwrap();
        assert_eq!(hm.sigma, vec![2, 1, 3, 4]);
        assert!(hm.avoids && hm.nontrivial);
        let grid = hm.family.to_set_family().unwrap();
        assert!(grid.avoids_intersection(1));
        assert!(is_trivial_t_intersecting(&grid, 2).is_err());

        let hm = hilton_milner_perm_family(3, 1).unwrap();
        assert_eq!(hm.sigma, vec![1, 2, 3]);
        assert!(hm.avoids && !hm.nontrivial);

        let sizes: Vec<usize> = (4..=8).map(|n| hilton_milner_perm_family(n, 2).unwrap().size).collect();
        assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{sizes:?}");
        for (n, s) in (4..=8).zip(&sizes) {
            assert!(BigUint::from(*s) <= factorial(n - 2) + 1u32);
        }
    }

    #[test]
    fn derangements() {
        let want = [1u32, 0, 1, 2, 9, 44, 265, 1854];
        for (m, w) in want.iter().enumerate() {
            assert_eq!(derangement_count(m), BigUint::from(*w));
        }
        // Exact in f64 up to 18!.
        for m in 1..=18 {
            let d = derangement_count(m).to_f64().unwrap();
            let f = factorial(m).to_f64().unwrap();
            assert!(d >= f / std::f64::consts::E - 1.0);
        }
    }

    #[test]
    fn intersection_classes() {
        let pi = Permutation::from_one_line(&[2, 1, 3, 4]).unwrap();
        let c = count_intersection_classes(4, 1, &pi).unwrap();
        assert_eq!(c.counts[&0], 3);
        assert_eq!(c.bound, 1.5);
        assert!(c.bound_holds);

        let pi = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        let c = count_intersection_classes(3, 1, &pi).unwrap();
        assert_eq!(c.counts.values().sum::<u64>(), 2);

        let pi = Permutation::from_one_line(&[2, 1, 3, 4, 5]).unwrap();
        let c = count_intersection_classes(5, 2, &pi).unwrap();
        assert!(c.counts[&1] >= 1);

        let id = Permutation::identity(4);
        assert!(count_intersection_classes(4, 2, &id).is_err());
    }

    #[test]
    fn regular_families() {
        assert_eq!(regular_feasibility(10, 3), Feasibility::Infeasible);
        assert_eq!(regular_feasibility(9, 3), Feasibility::Unknown);
        assert_eq!(regular_feasibility(7, 3), Feasibility::Unknown);
        let fano = fano_plane();
        assert!(fano.is_regular() && fano.is_t_intersecting(1));

        let r = max_regular_intersecting(7, 3, DEFAULT_BUDGET).unwrap();
        assert!(r.optimum >= 7 && r.proved_optimal);
        assert!(r.witness.is_regular() && r.witness.is_t_intersecting(1));

        let r = max_regular_intersecting(10, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!((r.optimum, r.proved_optimal), (0, true));

        let r = max_regular_intersecting(3, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 0);

        // Every 3-set of [5] meets every other, so the whole layer is regular.
        let r = max_regular_intersecting(5, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.optimum, 10);
    }

    #[test]
    fn regular_search_matches_brute_force() {
        for (n, k) in [(4, 2), (5, 2), (6, 3)] {
            let a = SetFamily::all_k_subsets(n, k).unwrap();
            let brute = brute_max(&a, |f| {
                f.is_t_intersecting(1) && f.degrees().iter().all(|&d| d == f.degrees()[0])
            });
            let r = max_regular_intersecting(n, k, DEFAULT_BUDGET).unwrap();
            assert_eq!(r.optimum, brute, "n={n} k={k}");
        }
    }
}
