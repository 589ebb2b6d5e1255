//! The iterative spread-approximation procedure, independent re-checking of
//! its guarantees, and the minimal-reduction chain.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact, int, PowerTable};
use crate::family::SetFamily;
use crate::mask::SubsetMask;
use crate::metrics::{counts_on_keys, is_rel_homogeneous, subset_counts, Counts};
use crate::probabilistic::{find_sunflower, DEFAULT_SUNFLOWER_BUDGET};

/// The constant in the `|W_i|` bound.
pub const C0: f64 = 32768.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub key: SubsetMask,
    /// Indices into the input family of the members removed at this step.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub family_size: usize,
    pub chosen: SubsetMask,
    pub link_size: usize,
    /// `τ^{|S|}·|A(S)|/|A|·|F^i|`.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    /// `F^m = ∅`.
    Exhausted,
    /// The selected set had more than `q` elements.
    Oversized { selector: SubsetMask },
    /// Only `∅` qualified; the current family became the remainder.
    EmptySelector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationResult {
    pub selectors: Vec<SubsetMask>,
    #[serde(skip)]
    pub remainder: SetFamily,
    /// Indices into the input family of the remainder.
    pub remainder_members: Vec<usize>,
    pub pieces: Vec<Piece>,
    pub trace: Vec<TraceStep>,
    pub stop: StopReason,
}

impl ApproximationResult {
    /// `F_B` for the piece keyed by `key`, as a subfamily of `f`.
    pub fn piece_family(&self, f: &SetFamily, piece: &Piece) -> SetFamily {
        let members: FxHashSet<usize> = piece.members.iter().copied().collect();
        let mut i = 0;
        f.retain(|_| {
            i += 1;
            members.contains(&(i - 1))
        })
    }
}

fn check_tau_above_one(tau: f64) -> Result<BigRational> {
    if !(tau > 1.0) {
        return Err(Error::InvalidArgument(format!("tau must exceed 1, got {tau}")));
    }
    exact(tau)
}

fn big(x: usize) -> BigUint {
    BigUint::from(x)
}

/// Among the qualifying sets, the lexicographically least inclusion-maximal
/// one.
fn lex_least_maximal(mut qualifying: Vec<&SubsetMask>) -> Option<SubsetMask> {
    qualifying.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.lex_cmp(b)));
    // A set is maximal iff it is not a proper subset of a maximal set, and
    // every maximal set strictly above it is longer, so already known.
    let mut maximal: Vec<&SubsetMask> = Vec::new();
    for x in qualifying {
        if !maximal.iter().any(|m| m.len() > x.len() && x.is_subset(m)) {
            maximal.push(x);
        }
    }
    maximal.into_iter().min_by(|a, b| a.lex_cmp(b)).cloned()
}

/// Runs the peeling loop: repeatedly pick an inclusion-maximal `S` with
/// `|F^i(S)| ≥ τ^{|S|}·|A(S)|/|A|·|F^i|`, stop if `|S| > q`, else remove
/// `F^i(S)`.
///
/// Only sets below some member of `F^i` are candidates; any other set has
/// an empty link and qualifies only when `A(S) = ∅`, which says nothing
/// about `F`.
pub fn spread_approximate(a: &SetFamily, f: &SetFamily, tau: f64, q: usize) -> Result<ApproximationResult> {
    let tau = check_tau_above_one(tau)?;
    f.same_ground(a)?;
    if !f.is_subfamily_of(a) {
        return Err(Error::NotSubfamily);
    }
    let cap = f.max_member_size();
    let powers = PowerTable::new(&tau, cap);
    let tau_f = tau.to_f64().unwrap_or(f64::NAN);
    let mut f_counts: Counts = subset_counts(f.members(), cap);
    let a_counts = counts_on_keys(a.members(), &f_counts);
    let a_size = big(a.len());

    let mut alive: Vec<bool> = vec![true; f.len()];
    let mut alive_count = f.len();
    let mut selectors = Vec::new();
    let mut pieces = Vec::new();
    let mut trace = Vec::new();

    let stop = loop {
        if alive_count == 0 {
            break StopReason::Exhausted;
        }
        let current = big(alive_count);
        let qualifying: Vec<&SubsetMask> = f_counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .filter(|(s, &c)| {
                let lhs = BigUint::from(c) * &a_size;
                powers.ge_scaled(&lhs, s.len(), &(BigUint::from(a_counts[*s]) * &current))
            })
            .map(|(s, _)| s)
            .collect();
        let chosen = lex_least_maximal(qualifying).expect("the empty set always qualifies");
        let link_size = f_counts[&chosen] as usize;
        trace.push(TraceStep {
            step: trace.len() + 1,
            family_size: alive_count,
            link_size,
            threshold: tau_f.powi(chosen.len() as i32) * a_counts[&chosen] as f64 / a.len() as f64
                * alive_count as f64,
            chosen: chosen.clone(),
        });
        if chosen.len() > q {
            break StopReason::Oversized { selector: chosen };
        }
        if chosen.is_empty() {
            break StopReason::EmptySelector;
        }

        let mut removed = Vec::with_capacity(link_size);
        for (i, m) in f.members().iter().enumerate() {
            if alive[i] && chosen.is_subset(m) {
                alive[i] = false;
                removed.push(i);
                m.for_each_subset(cap, |s| {
                    if let Some(c) = f_counts.get_mut(s) {
                        *c -= 1;
                    }
                });
            }
        }
        alive_count -= removed.len();
        selectors.push(chosen.clone());
        pieces.push(Piece {
            key: chosen,
            members: removed,
        });
    };

    let remainder_members: Vec<usize> = (0..f.len()).filter(|&i| alive[i]).collect();
    let mut i = 0;
    let remainder = f.retain(|_| {
        i += 1;
        alive[i - 1]
    });
    Ok(ApproximationResult {
        selectors,
        remainder,
        remainder_members,
        pieces,
        trace,
        stop,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    /// A search budget ran out before a verdict.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<SubsetMask>,
}

impl Verdict {
    pub fn pass() -> Self {
        Self {
            status: Status::Pass,
            detail: None,
            witness: Vec::new(),
        }
    }

    pub fn fail(detail: impl Into<String>, witness: Vec<SubsetMask>) -> Self {
        Self {
            status: Status::Fail,
            detail: Some(detail.into()),
            witness,
        }
    }

    pub fn with_status(status: Status, detail: impl Into<String>) -> Self {
        Self {
            status,
            detail: Some(detail.into()),
            witness: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Pass, or not applicable.
    pub fn acceptable(&self) -> bool {
        matches!(self.status, Status::Pass | Status::NotApplicable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationVerdicts {
    /// `F ∖ F′ ⊆ A(S)`.
    pub coverage: Verdict,
    /// Pieces and remainder partition `F`, and each piece lies above its key.
    pub partition: Verdict,
    /// Each `F_B(B)` is `(A(B), τ)`-homogeneous.
    pub homogeneity: Verdict,
    /// Every selector has at most `q` elements.
    pub selector_sizes: Verdict,
    /// `|F′| ≤ τ^{−q−1}|A|`.
    pub remainder_bound: Verdict,
}

impl ApproximationVerdicts {
    pub fn all_acceptable(&self) -> bool {
        [
            &self.coverage,
            &self.partition,
            &self.homogeneity,
            &self.selector_sizes,
            &self.remainder_bound,
        ]
        .iter()
        .all(|v| v.acceptable())
    }
}

/// Re-derives every guarantee of an approximation from scratch.
pub fn verify_approximation(
    res: &ApproximationResult,
    a: &SetFamily,
    f: &SetFamily,
    tau: f64,
    q: usize,
) -> Result<ApproximationVerdicts> {
    let tau_exact = check_tau_above_one(tau)?;

    let coverage = match f
        .members()
        .iter()
        .filter(|m| !res.remainder.contains(m))
        .find(|m| !res.selectors.iter().any(|s| s.is_subset(m)))
    {
        None => Verdict::pass(),
        Some(m) => Verdict::fail("member outside the remainder contains no selector", vec![m.clone()]),
    };

    let partition = 'p: {
        let mut seen = vec![0u32; f.len()];
        for piece in &res.pieces {
            for &i in &piece.members {
                let Some(m) = f.members().get(i) else {
                    break 'p Verdict::fail(format!("piece index {i} out of range"), vec![piece.key.clone()]);
                };
                if !piece.key.is_subset(m) {
                    break 'p Verdict::fail("piece member does not contain its key", vec![piece.key.clone(), m.clone()]);
                }
                seen[i] += 1;
            }
        }
        for r in res.remainder.members() {
            match f.position(r) {
                Some(i) => seen[i] += 1,
                None => break 'p Verdict::fail("remainder member not in the family", vec![r.clone()]),
            }
        }
        match seen.iter().position(|&c| c != 1) {
            None => Verdict::pass(),
            Some(i) => Verdict::fail(
                format!("member covered {} times", seen[i]),
                vec![f.members()[i].clone()],
            ),
        }
    };

    let homogeneity = 'h: {
        for piece in &res.pieces {
            let fb = res.piece_family(f, piece).link(&piece.key);
            let ab = a.link(&piece.key);
            if fb.is_empty() {
                continue;
            }
            if !fb.is_subfamily_of(&ab) {
                break 'h Verdict::fail("piece link is not inside the ambient link", vec![piece.key.clone()]);
            }
            let v = is_rel_homogeneous(&fb, &ab, tau)?;
            if !v.holds {
                let mut w = vec![piece.key.clone()];
                w.extend(v.witness);
                break 'h Verdict::fail("piece link is not homogeneous relative to the ambient link", w);
            }
        }
        Verdict::pass()
    };

    let selector_sizes = match res.selectors.iter().find(|s| s.len() > q) {
        None => Verdict::pass(),
        Some(s) => Verdict::fail(format!("selector has more than {q} elements"), vec![s.clone()]),
    };

    let remainder_bound = if res.stop == StopReason::EmptySelector {
        Verdict::with_status(Status::NotApplicable, "stopped on the empty selector")
    } else {
        let lhs = int(res.remainder.len() as u64) * crate::exact::pow(&tau_exact, q + 1);
        if lhs <= int(a.len() as u64) {
            Verdict::pass()
        } else {
            Verdict::fail(
                format!(
                    "|F'| = {} exceeds tau^-(q+1)·|A| = {:.6}",
                    res.remainder.len(),
                    a.len() as f64 / tau.powi(q as i32 + 1)
                ),
                Vec::new(),
            )
        }
    };

    Ok(ApproximationVerdicts {
        coverage,
        partition,
        homogeneity,
        selector_sizes,
        remainder_bound,
    })
}

/// A pair `(S, S′)` of selectors, possibly equal, with `|S ∩ S′| < t`.
pub fn check_s_t_intersecting(selectors: &[SubsetMask], t: usize) -> Option<(SubsetMask, SubsetMask)> {
    for (i, a) in selectors.iter().enumerate() {
        for b in &selectors[i..] {
            if a.intersection_len(b) < t {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

fn t_intersects_all(x: &SubsetMask, others: &[SubsetMask], skip: usize, t: usize) -> bool {
    x.len() >= t
        && others
            .iter()
            .enumerate()
            .all(|(j, o)| j == skip || x.intersection_len(o) >= t)
}

/// Shrinks a `t`-intersecting family to one whose members are minimal:
/// every proper subset of a member meets some member in fewer than `t`
/// elements. Every output member lies inside an input member.
///
/// Members are processed by decreasing size, then lexicographically; each
/// has single elements deleted while the family stays `t`-intersecting.
/// Duplicates and members strictly containing another member are dropped.
pub fn reduce_to_minimal(s: &SetFamily, t: usize) -> Result<SetFamily> {
    if !s.is_t_intersecting(t) {
        return Err(Error::NotTIntersecting { t });
    }
    let mut work: Vec<SubsetMask> = s.members().to_vec();
    work.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.lex_cmp(b)));
    loop {
        let mut changed = false;
        for i in 0..work.len() {
            'shrink: loop {
                for e in work[i].to_vec() {
                    let smaller = work[i].without(e);
                    if t_intersects_all(&smaller, &work, i, t) {
                        work[i] = smaller;
                        changed = true;
                        continue 'shrink;
                    }
                }
                break;
            }
        }
        if !changed {
            break;
        }
    }
    let dedup: FxHashSet<SubsetMask> = work.iter().cloned().collect();
    let kept: Vec<SubsetMask> = dedup
        .iter()
        .filter(|x| !dedup.iter().any(|y| y.len() < x.len() && y.is_subset(x)))
        .cloned()
        .collect();
    SetFamily::new(s.ground().clone(), kept)
}

/// A member `T` and a proper subset of it that still meets every member in
/// at least `t` elements, if the minimality property fails.
pub fn minimality_violation(tf: &SetFamily, t: usize) -> Option<(SubsetMask, SubsetMask)> {
    for m in tf.members() {
        let mut found = None;
        m.for_each_subset(m.len().saturating_sub(1), |x| {
            if found.is_none() && tf.members().iter().all(|o| x.intersection_len(o) >= t) {
                found = Some(x.clone());
            }
        });
        if let Some(x) = found {
            return Some((m.clone(), x));
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLevel {
    pub index: usize,
    #[serde(serialize_with = "members_only")]
    pub t_family: SetFamily,
    #[serde(serialize_with = "members_only")]
    pub w_family: SetFamily,
    /// `|A(T_i)|` for the ambient family given at build time.
    pub ambient_t: usize,
    /// `|A(W_i)|`.
    pub ambient_w: usize,
}

fn members_only<S: serde::Serializer>(f: &SetFamily, s: S) -> std::result::Result<S::Ok, S::Error> {
    f.members().serialize(s)
}

/// `T_0, W_0, T_1, W_1, …` and the final `T` after the last level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionChain {
    pub t: usize,
    pub q: usize,
    pub levels: Vec<ChainLevel>,
    #[serde(serialize_with = "members_only")]
    pub last: SetFamily,
}

impl ReductionChain {
    /// `T_i` for `i = 0, …, levels.len()`.
    pub fn t_family(&self, i: usize) -> &SetFamily {
        self.levels.get(i).map_or(&self.last, |l| &l.t_family)
    }

    pub fn t_count(&self) -> usize {
        self.levels.len() + 1
    }
}

/// `T_0` is the minimal reduction of `S`; `W_i` collects the members of
/// `T_i` of size `q − i`, and `T_{i+1}` reduces `T_i ∖ W_i`. Stops after
/// `i = q − t` or once `T_i` is empty.
pub fn build_chain(s: &SetFamily, a: &SetFamily, t: usize, q: usize) -> Result<ReductionChain> {
    s.same_ground(a)?;
    if let Some(m) = s.members().iter().find(|m| m.len() > q) {
        return Err(Error::InvalidArgument(format!("member {m:?} has more than q = {q} elements")));
    }
    let mut current = reduce_to_minimal(s, t)?;
    let mut levels = Vec::new();
    let mut i = 0;
    while t + i <= q && !current.is_empty() {
        let w = current.retain(|m| m.len() == q - i);
        let rest = current.minus(&w);
        let next = reduce_to_minimal(&rest, t)?;
        levels.push(ChainLevel {
            index: i,
            ambient_t: a.contains_some(&current).len(),
            ambient_w: a.contains_some(&w).len(),
            t_family: current,
            w_family: w,
        });
        current = next;
        i += 1;
    }
    Ok(ReductionChain {
        t,
        q,
        levels,
        last: current,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainVerdicts {
    /// Members of `T_i` have at most `q − i` elements.
    pub sizes: Verdict,
    /// `A(T_{i−1}) ⊆ A(T_i) ∪ A(W_{i−1})`.
    pub coverage: Verdict,
    /// `T_i` has no sunflower with `q − i − t + 2` petals.
    pub sunflower_free: Verdict,
    /// `|W_i| ≤ (C0·q·log₂q)^{q−i−t}`.
    pub w_bound: Verdict,
    /// At the first collapse to a single `t`-set `X`:
    /// `|A(T_{i−1} ∖ W_{i−1})| ≤ (q/r)|A(X)|`.
    pub collapse_bound: Verdict,
}

impl ChainVerdicts {
    pub fn all_acceptable(&self) -> bool {
        [
            &self.sizes,
            &self.coverage,
            &self.sunflower_free,
            &self.w_bound,
            &self.collapse_bound,
        ]
        .iter()
        .all(|v| v.acceptable())
    }
}

/// Checks the five chain properties over `a`; `r` is the spreadness used
/// in the collapse bound.
pub fn check_chain_properties(chain: &ReductionChain, a: &SetFamily, r: Option<f64>) -> Result<ChainVerdicts> {
    let (t, q) = (chain.t, chain.q);
    let count = chain.t_count();

    let sizes = 'v: {
        for i in 0..count {
            if let Some(m) = chain.t_family(i).members().iter().find(|m| m.len() + i > q) {
                break 'v Verdict::fail(format!("T_{i} has a member with more than q - {i} elements"), vec![m.clone()]);
            }
        }
        Verdict::pass()
    };

    let coverage = 'v: {
        for i in 1..count {
            let prev = a.contains_some(chain.t_family(i - 1));
            let cur = a.contains_some(chain.t_family(i));
            let w = a.contains_some(&chain.levels[i - 1].w_family);
            if let Some(m) = prev.members().iter().find(|m| !cur.contains(m) && !w.contains(m)) {
                break 'v Verdict::fail(format!("A(T_{}) not covered at level {i}", i - 1), vec![m.clone()]);
            }
        }
        Verdict::pass()
    };

    let sunflower_free = 'v: {
        let mut inconclusive = None;
        for i in (0..count).take_while(|i| t + i <= q) {
            let petals = q - i - t + 2;
            match find_sunflower(chain.t_family(i), petals, DEFAULT_SUNFLOWER_BUDGET) {
                Ok(None) => {}
                Ok(Some(sf)) => {
                    let fam = chain.t_family(i);
                    let w = sf.petals.iter().map(|&j| fam.members()[j].clone()).collect();
                    break 'v Verdict::fail(format!("T_{i} has a sunflower with {petals} petals"), w);
                }
                Err(Error::BudgetExceeded { .. }) => {
                    inconclusive.get_or_insert(i);
                }
                Err(e) => return Err(e),
            }
        }
        match inconclusive {
            None => Verdict::pass(),
            Some(i) => Verdict::with_status(Status::Inconclusive, format!("sunflower search budget exhausted at T_{i}")),
        }
    };

    let w_bound = 'v: {
        let base = C0 * q as f64 * (q as f64).log2();
        for level in &chain.levels {
            let exp = (q - level.index).saturating_sub(t);
            let bound = if exp == 0 { 1.0 } else { base.powi(exp as i32) };
            if level.w_family.len() as f64 > bound {
                break 'v Verdict::fail(
                    format!("|W_{}| = {} exceeds {bound}", level.index, level.w_family.len()),
                    Vec::new(),
                );
            }
        }
        Verdict::pass()
    };

    let collapse_bound = 'v: {
        let collapsed = |i: usize| {
            let f = chain.t_family(i);
            f.len() == 1 && f.members()[0].len() == t
        };
        let Some(i) = (1..count).find(|&i| collapsed(i) && !collapsed(i - 1)) else {
            break 'v Verdict::with_status(Status::NotApplicable, "no level collapses to a single t-set");
        };
        let Some(r) = r else {
            break 'v Verdict::with_status(Status::NotApplicable, "no spreadness r supplied");
        };
        let x = chain.t_family(i).members()[0].clone();
        let rest = chain.t_family(i - 1).minus(&chain.levels[i - 1].w_family);
        let lhs = a.contains_some(&rest).len() as u64;
        let ax = a.link_size(&x) as u64;
        if int(lhs) * exact(r)? <= int(q as u64) * int(ax) {
            Verdict::pass()
        } else {
            Verdict::fail(
                format!("|A(T_{} \\ W_{})| = {lhs} exceeds (q/r)·|A(X)| = {}", i - 1, i - 1, q as f64 / r * ax as f64),
                vec![x],
            )
        }
    };

    Ok(ChainVerdicts {
        sizes,
        coverage,
        sunflower_free,
        w_bound,
        collapse_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_one_based(n, sets).unwrap()
    }

    fn set(elems: &[usize]) -> SubsetMask {
        SubsetMask::from_one_based(elems).unwrap()
    }

    fn star(n: usize, k: usize) -> (SetFamily, SetFamily) {
        let a = SetFamily::all_k_subsets(n, k).unwrap();
        let f = a.retain(|m| m.contains(0));
        (a, f)
    }

    /// The peeling loop over the whole power set of `[n]`, with rational
    /// arithmetic throughout.
    fn brute_approximate(a: &SetFamily, f: &SetFamily, tau: f64, q: usize) -> (Vec<SubsetMask>, SetFamily, bool) {
        let n = a.n();
        let tau = exact(tau).unwrap();
        let all: Vec<SubsetMask> = (0u64..1 << n)
            .map(|b| SubsetMask::from_elems((0..n).filter(|i| b >> i & 1 == 1)))
            .collect();
        let mut cur = f.clone();
        let mut selectors = Vec::new();
        loop {
            if cur.is_empty() {
                return (selectors, cur, false);
            }
            let qualifies = |x: &SubsetMask| {
                let fx = cur.link_size(x);
                fx > 0
                    && int(fx as u64) * int(a.len() as u64)
                        >= crate::exact::pow(&tau, x.len()) * int(a.link_size(x) as u64) * int(cur.len() as u64)
            };
            let qual: Vec<&SubsetMask> = all.iter().filter(|x| qualifies(x)).collect();
            let chosen = qual
                .iter()
                .filter(|x| !qual.iter().any(|y| y.len() > x.len() && x.is_subset(y)))
                .min_by(|x, y| x.lex_cmp(y))
                .map(|x| (*x).clone())
                .unwrap();
            if chosen.len() > q || chosen.is_empty() {
                return (selectors, cur, chosen.is_empty());
            }
            cur = cur.retain(|m| !chosen.is_subset(m));
            selectors.push(chosen);
        }
    }

    #[test]
    fn star_with_wide_margin_is_one_selector() {
        let (a, f) = star(12, 3);
        let res = spread_approximate(&a, &f, 2.5, 3).unwrap();
        assert_eq!(res.selectors, vec![set(&[1])]);
        assert!(res.remainder.is_empty());
        assert_eq!(res.stop, StopReason::Exhausted);
        assert_eq!(res.pieces[0].members.len(), 55);
        let v = verify_approximation(&res, &a, &f, 2.5, 3).unwrap();
        assert!(v.coverage.passed() && v.homogeneity.passed() && v.remainder_bound.passed());
    }

    #[test]
    fn star_at_tau_two_selects_pairs_on_equality() {
        // {1,x} meets the threshold with equality: 10·220 = 2²·10·55.
        let (a, f) = star(12, 3);
        let res = spread_approximate(&a, &f, 2.0, 3).unwrap();
        assert_eq!(res.selectors[0], set(&[1, 2]));
        assert_eq!(res.pieces[0].members.len(), 10);
        assert!(verify_approximation(&res, &a, &f, 2.0, 3).unwrap().all_acceptable());
        let (sel, rem, _) = brute_approximate(&a, &f, 2.0, 3);
        assert_eq!(res.selectors, sel);
        assert_eq!(res.remainder, rem);
    }

    #[test]
    fn empty_family() {
        let a = SetFamily::all_k_subsets(5, 2).unwrap();
        let f = SetFamily::empty(5).unwrap();
        let res = spread_approximate(&a, &f, 2.0, 2).unwrap();
        assert!(res.selectors.is_empty() && res.remainder.is_empty());
        let v = verify_approximation(&res, &a, &f, 2.0, 2).unwrap();
        assert!(v.coverage.passed() && v.partition.passed() && v.remainder_bound.passed());
    }

    #[test]
    fn empty_selector_convention() {
        let a = SetFamily::all_k_subsets(8, 2).unwrap();
        let res = spread_approximate(&a, &a, 2.0, 1).unwrap();
        assert_eq!(res.stop, StopReason::EmptySelector);
        assert!(res.selectors.is_empty());
        assert_eq!(res.remainder, a);
        let v = verify_approximation(&res, &a, &a, 2.0, 1).unwrap();
        assert_eq!(v.remainder_bound.status, Status::NotApplicable);
        assert!(v.all_acceptable());
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = SetFamily::all_k_subsets(5, 2).unwrap();
        let f = fam(5, &[&[1, 2, 3]]);
        assert!(matches!(spread_approximate(&a, &f, 2.0, 2), Err(Error::NotSubfamily)));
        assert!(spread_approximate(&a, &a, 1.0, 2).is_err());
        assert!(spread_approximate(&a, &a, 0.5, 2).is_err());
    }

    #[test]
    fn tampering_is_detected() {
        let (a, f) = star(12, 3);
        let res = spread_approximate(&a, &f, 2.5, 3).unwrap();

        let mut dropped = res.clone();
        dropped.selectors.clear();
        let v = verify_approximation(&dropped, &a, &f, 2.5, 3).unwrap();
        assert_eq!(v.coverage.status, Status::Fail);
        assert_eq!(v.coverage.witness.len(), 1);

        let mut moved = res.clone();
        let i = moved.pieces[0].members.pop().unwrap();
        moved.remainder_members.push(i);
        moved.remainder = f.retain(|m| *m == f.members()[i]);
        let v = verify_approximation(&moved, &a, &f, 2.5, 3).unwrap();
        assert!(v.coverage.passed() && v.partition.passed());
        // One set against 220/2.5^4 ≈ 5.6.
        assert!(v.remainder_bound.passed());

        let mut doubled = res.clone();
        doubled.remainder = f.retain(|m| *m == f.members()[0]);
        let v = verify_approximation(&doubled, &a, &f, 2.5, 3).unwrap();
        assert_eq!(v.partition.status, Status::Fail);
    }

    #[test]
    fn selector_intersection_checks() {
        assert_eq!(check_s_t_intersecting(&[set(&[1])], 1), None);
        assert!(check_s_t_intersecting(&[set(&[1, 2]), set(&[3, 4])], 1).is_some());
        assert_eq!(
            check_s_t_intersecting(&[set(&[1, 2])], 3),
            Some((set(&[1, 2]), set(&[1, 2])))
        );
    }

    #[test]
    fn reduction_examples() {
        let one = fam(3, &[&[1]]);
        assert_eq!(reduce_to_minimal(&one, 1).unwrap(), one);
        let two = fam(3, &[&[1, 2], &[1, 3]]);
        assert_eq!(reduce_to_minimal(&two, 1).unwrap(), one);
        let tri = fam(3, &[&[1, 2], &[1, 3], &[2, 3]]);
        assert_eq!(reduce_to_minimal(&tri, 1).unwrap(), tri);
        assert!(matches!(
            reduce_to_minimal(&fam(4, &[&[1, 2], &[3, 4]]), 1),
            Err(Error::NotTIntersecting { t: 1 })
        ));
    }

    #[test]
    fn chain_examples() {
        let a = SetFamily::all_k_subsets(6, 3).unwrap();
        let s = fam(6, &[&[1, 2]]);
        let chain = build_chain(&s, &a, 2, 2).unwrap();
        assert_eq!(chain.levels.len(), 1);
        assert_eq!(chain.levels[0].t_family, s);
        assert_eq!(chain.levels[0].w_family, s);
        assert!(chain.last.is_empty());
        let v = check_chain_properties(&chain, &a, Some(2.0)).unwrap();
        assert!(v.sizes.passed() && v.coverage.passed() && v.sunflower_free.passed() && v.w_bound.passed());
        assert!(v.all_acceptable());

        let s = fam(3, &[&[1]]);
        let chain = build_chain(&s, &SetFamily::all_k_subsets(3, 2).unwrap(), 1, 1).unwrap();
        assert_eq!(chain.levels[0].w_family, s);
        assert!(chain.last.is_empty());

        let tri = fam(3, &[&[1, 2], &[1, 3], &[2, 3]]);
        let chain = build_chain(&tri, &SetFamily::all_k_subsets(3, 2).unwrap(), 1, 2).unwrap();
        assert_eq!(chain.levels[0].t_family, tri);
        assert_eq!(chain.levels[0].w_family, tri);
        assert!(chain.last.is_empty());
    }

    #[test]
    fn invalid_chain_has_sunflower() {
        let a = SetFamily::all_k_subsets(6, 3).unwrap();
        let bad = fam(6, &[&[1, 2], &[3, 4], &[5, 6]]);
        let chain = ReductionChain {
            t: 1,
            q: 2,
            levels: vec![ChainLevel {
                index: 0,
                t_family: bad.clone(),
                w_family: bad,
                ambient_t: 0,
                ambient_w: 0,
            }],
            last: SetFamily::empty(6).unwrap(),
        };
        let v = check_chain_properties(&chain, &a, None).unwrap();
        assert_eq!(v.sunflower_free.status, Status::Fail);
        assert_eq!(v.sunflower_free.witness.len(), 3);
    }

    #[test]
    fn empty_chain_is_vacuous() {
        let a = SetFamily::all_k_subsets(5, 2).unwrap();
        let chain = build_chain(&SetFamily::empty(5).unwrap(), &a, 1, 2).unwrap();
        assert!(chain.levels.is_empty());
        assert!(check_chain_properties(&chain, &a, None).unwrap().all_acceptable());
    }

    #[test]
    fn collapse_bound_at_single_t_set() {
        // T_0 = {{1,2},{1,3}} → W_0 = T_0 at q = 2, so collapse needs q = 3.
        let a = SetFamily::all_k_subsets(8, 4).unwrap();
        let s = fam(8, &[&[1, 2, 3], &[1, 4, 5], &[1, 2]]);
        let chain = build_chain(&s, &a, 1, 3).unwrap();
        let v = check_chain_properties(&chain, &a, Some(2.0)).unwrap();
        assert!(v.sizes.passed() && v.coverage.passed(), "{v:?}");
    }

    fn random_t_intersecting(seed: u64, n: usize, t: usize, q: usize) -> SetFamily {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut sets: Vec<SubsetMask> = Vec::new();
        for _ in 0..40 {
            let size = rng.random_range(t..=q);
            let mut elems: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng.random_range(i..n);
                elems.swap(i, j);
            }
            let m = SubsetMask::from_elems(elems[..size].iter().copied());
            if sets.iter().all(|s| s.intersection_len(&m) >= t) {
                sets.push(m);
            }
        }
        SetFamily::new(crate::family::GroundSet::new(n).unwrap(), sets).unwrap()
    }

    #[test]
    fn chain_properties_on_random_families() {
        for seed in 0..100u64 {
            let n = 6 + (seed % 7) as usize;
            let t = 1 + (seed % 2) as usize;
            let q = t + 1 + (seed % 3) as usize;
            let s = random_t_intersecting(seed, n, t, q);
            let a = SetFamily::all_k_subsets(n, q.min(n)).unwrap();
            let chain = build_chain(&s, &a, t, q).unwrap();
            let v = check_chain_properties(&chain, &a, None).unwrap();
            assert!(v.sunflower_free.passed(), "seed {seed}: {v:?}");
            assert!(v.sizes.passed() && v.coverage.passed() && v.w_bound.passed(), "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_power_set_oracle(
            seed in any::<u64>(),
            n in 5usize..=9,
            k in 2usize..=3,
            tau in prop::sample::select(vec![1.5, 2.0, 3.0]),
            q in 1usize..=3,
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = SetFamily::all_k_subsets(n, k).unwrap();
            let density: f64 = rng.random_range(0.05..0.8);
            let f = a.retain(|_| rng.random_bool(density));
            let res = spread_approximate(&a, &f, tau, q).unwrap();
            let (sel, rem, empty_sel) = brute_approximate(&a, &f, tau, q);
            prop_assert_eq!(&res.selectors, &sel);
            prop_assert_eq!(&res.remainder, &rem);
            prop_assert_eq!(res.stop == StopReason::EmptySelector, empty_sel);
            let v = verify_approximation(&res, &a, &f, tau, q).unwrap();
            prop_assert!(v.all_acceptable(), "{:?}", v);
        }

        #[test]
        fn reduction_is_sound_and_minimal(seed in any::<u64>(), n in 4usize..=10, t in 1usize..=2) {
            let s = random_t_intersecting(seed, n, t, t + 2);
            let r = reduce_to_minimal(&s, t).unwrap();
            prop_assert!(r.is_t_intersecting(t));
            for m in r.members() {
                prop_assert!(s.members().iter().any(|x| m.is_subset(x)));
            }
            prop_assert_eq!(minimality_violation(&r, t), None);
            let a = SetFamily::all_k_subsets(n, (t + 2).min(n)).unwrap();
            prop_assert!(a.contains_some(&s).is_subfamily_of(&a.contains_some(&r)));
        }
    }
}
