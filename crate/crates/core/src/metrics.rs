//! Spreadness, homogeneity (absolute and relative), `(r,q)`-spreadness and
//! `(t,q,ε,θ)`-regularity, all computed exactly.
//!
//! Every quantity here is a statement about link sizes `|F(X)|`. Sets `X`
//! that are not contained in any member have empty links and never violate
//! an upper bound, so each check only visits subsets of members, tallied
//! once into a [`Counts`] table.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, exact, int, powers};
use crate::family::SetFamily;
use crate::mask::SubsetMask;

/// `X ↦ |F(X)|` for every `X` below some member.
pub type Counts = FxHashMap<SubsetMask, u64>;

/// Tallies `|F(X)|` for all subsets `X` of members with `|X| ≤ cap`.
pub fn subset_counts(members: &[SubsetMask], cap: usize) -> Counts {
    let mut counts = Counts::default();
    for m in members {
        m.for_each_subset(cap, |s| match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => {
                counts.insert(s.clone(), 1);
            }
        });
    }
    counts
}

/// Tallies `|A(X)|` for the keys already present in `keys` only.
pub fn counts_on_keys(members: &[SubsetMask], keys: &Counts) -> Counts {
    let cap = keys.keys().map(SubsetMask::len).max().unwrap_or(0);
    let mut counts: Counts = keys.keys().map(|k| (k.clone(), 0)).collect();
    for m in members {
        m.for_each_subset(cap, |s| {
            if let Some(c) = counts.get_mut(s) {
                *c += 1;
            }
        });
    }
    counts
}

fn lex_least<'a, I: IntoIterator<Item = &'a SubsetMask>>(sets: I) -> Option<SubsetMask> {
    sets.into_iter().min_by(|a, b| a.lex_cmp(b)).cloned()
}

/// An exact spread radius `(num/den)^(1/root)`.
///
/// Ordering and equality compare the real values, so `(4/1)^(1/2)` equals
/// `(2/1)^(1/1)`.
#[derive(Clone, Debug, Serialize)]
pub struct SpreadRadius {
    pub num: u64,
    pub den: u64,
    pub root: u32,
    /// Human-readable rendering; not used in comparisons.
    pub decimal: String,
}

impl SpreadRadius {
    /// The radius attaining `|F| / |F(X)| = radius^|X|`.
    pub fn new(family_size: u64, link_size: u64, root: u32) -> Self {
        assert!(link_size > 0 && root > 0);
        let g = family_size.gcd(&link_size);
        let (num, den) = (family_size / g, link_size / g);
        let value = (num as f64 / den as f64).powf(1.0 / f64::from(root));
        Self {
            num,
            den,
            root,
            decimal: format!("{value:.6}"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        (self.num as f64 / self.den as f64).powf(1.0 / f64::from(self.root))
    }

    /// `radius ≥ r`, decided exactly.
    pub fn at_least(&self, r: &BigRational) -> bool {
        if r.is_negative() {
            return true;
        }
        let lhs = BigRational::new(BigInt::from(self.num), BigInt::from(self.den));
        lhs >= crate::exact::pow(r, self.root as usize)
    }
}

impl Ord for SpreadRadius {
    fn cmp(&self, other: &Self) -> Ordering {
        let pow = |b: u64, e: u32| BigUint::from(b).pow(e);
        let lhs = pow(self.num, other.root) * pow(other.den, self.root);
        let rhs = pow(other.num, self.root) * pow(self.den, other.root);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for SpreadRadius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for SpreadRadius {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SpreadRadius {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeMinimum {
    pub radius: SpreadRadius,
    pub witness: SubsetMask,
    pub link_size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadReport {
    /// Largest `r` such that the family is `r`-spread; `None` when no
    /// nonempty set lies below a member (the family `{∅}`), i.e. unbounded.
    pub radius: Option<SpreadRadius>,
    /// Lexicographically least `X` attaining the radius.
    pub witness: Option<SubsetMask>,
    pub per_size_min: BTreeMap<usize, SizeMinimum>,
    pub family_size: u64,
    /// Largest `|X|` scanned.
    pub size_cap: usize,
    /// True when the cap is below the largest member size, so the radius is
    /// an upper bound on the true radius.
    pub truncated: bool,
}

/// Exact spread radius scanning every `X` up to the largest member size.
pub fn spread_radius(f: &SetFamily) -> Result<SpreadReport> {
    spread_radius_capped(f, f.max_member_size())
}

pub fn spread_radius_capped(f: &SetFamily, cap: usize) -> Result<SpreadReport> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let total = f.len() as u64;
    let counts = subset_counts(f.members(), cap);

    // Per size: the largest link, lexicographically least witness on ties.
    let mut best: BTreeMap<usize, (u64, SubsetMask)> = BTreeMap::new();
    for (x, &c) in &counts {
        if x.is_empty() {
            continue;
        }
        let entry = best.entry(x.len()).or_insert_with(|| (c, x.clone()));
        if c > entry.0 || (c == entry.0 && x.lex_cmp(&entry.1) == Ordering::Less) {
            *entry = (c, x.clone());
        }
    }

    let per_size_min: BTreeMap<usize, SizeMinimum> = best
        .into_iter()
        .map(|(size, (c, x))| {
            let m = SizeMinimum {
                radius: SpreadRadius::new(total, c, size as u32),
                witness: x,
                link_size: c,
            };
            (size, m)
        })
        .collect();

    let overall = per_size_min.values().min_by(|a, b| {
        a.radius
            .cmp(&b.radius)
            .then_with(|| a.witness.lex_cmp(&b.witness))
    });

    Ok(SpreadReport {
        radius: overall.map(|m| m.radius.clone()),
        witness: overall.map(|m| m.witness.clone()),
        per_size_min,
        family_size: total,
        size_cap: cap,
        truncated: cap < f.max_member_size(),
    })
}

/// `μ_F({F : X ⊆ F}) ≤ r^{−|X|}` for every `X`, with the non-strict boundary.
pub fn is_r_spread(f: &SetFamily, r: f64) -> Result<bool> {
    let r = exact(r)?;
    let report = spread_radius(f)?;
    Ok(report.radius.is_none_or(|rad| rad.at_least(&r)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomogeneityVerdict {
    pub holds: bool,
    /// Lexicographically least violating set.
    pub witness: Option<SubsetMask>,
}

impl HomogeneityVerdict {
    fn from_violators<'a, I: IntoIterator<Item = &'a SubsetMask>>(violators: I) -> Self {
        let witness = lex_least(violators);
        Self {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn check_tau(tau: f64) -> Result<BigRational> {
    if !(tau >= 1.0) {
        return Err(Error::InvalidArgument(format!("tau must be at least 1, got {tau}")));
    }
    exact(tau)
}

fn floor_u64(r: &BigRational) -> u64 {
    r.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// `|F(A)| ≤ τ^a · C(n−a, k−a)/C(n, k) · |F|` for every `A` with `|A| = a ≤ k`.
pub fn is_tau_homogeneous(f: &SetFamily, tau: f64) -> Result<HomogeneityVerdict> {
    let tau = check_tau(tau)?;
    if f.is_empty() {
        return Ok(HomogeneityVerdict::from_violators(None));
    }
    let k = f.uniform_k().ok_or(Error::NotUniform)?;
    let n = f.n();
    let size = BigInt::from(f.len());
    let all = BigInt::from(binomial(n, k));
    let tau_pow = powers(&tau, k);
    let bound: Vec<u64> = (0..=k)
        .map(|a| {
            let rhs = &tau_pow[a] * BigRational::new(BigInt::from(binomial(n - a, k - a)) * &size, all.clone());
            floor_u64(&rhs)
        })
        .collect();
    let counts = subset_counts(f.members(), k);
    let violators = counts.iter().filter(|(x, &c)| c > bound[x.len()]).map(|(x, _)| x);
    Ok(HomogeneityVerdict::from_violators(violators))
}

/// `|F(S)|/|F| ≤ τ^{|S|} · |A(S)|/|A|` for every `S`.
pub fn is_rel_homogeneous(f: &SetFamily, ambient: &SetFamily, tau: f64) -> Result<HomogeneityVerdict> {
    let tau = check_tau(tau)?;
    f.same_ground(ambient)?;
    if !f.is_subfamily_of(ambient) {
        return Err(Error::NotSubfamily);
    }
    if f.is_empty() {
        return Ok(HomogeneityVerdict::from_violators(None));
    }
    let fc = subset_counts(f.members(), f.max_member_size());
    let ac = counts_on_keys(ambient.members(), &fc);
    let tau_pow = powers(&tau, f.max_member_size());
    let (f_size, a_size) = (int(f.len() as u64), int(ambient.len() as u64));
    let violators = fc.iter().filter_map(|(s, &c)| {
        let lhs = int(c) * &a_size;
        let rhs = &tau_pow[s.len()] * int(ac[s]) * &f_size;
        (lhs > rhs).then_some(s)
    });
    Ok(HomogeneityVerdict::from_violators(violators))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RqVerdict {
    pub holds: bool,
    /// The link base `S` of the first violation.
    pub base: Option<SubsetMask>,
    /// The set `X`, disjoint from `S`, whose link within `A(S)` is too large.
    pub extension: Option<SubsetMask>,
}

/// Every link `A(S)` with `|S| ≤ q` is `r`-spread.
pub fn is_rq_spread(a: &SetFamily, r: f64, q: usize) -> Result<RqVerdict> {
    if !(r >= 1.0) {
        return Err(Error::InvalidArgument(format!("r must be at least 1, got {r}")));
    }
    let r = exact(r)?;
    let counts = subset_counts(a.members(), a.max_member_size());

    // (S, |X|) ↦ largest |A(S ∪ X)| and the lexicographically least S ∪ X.
    let mut best: FxHashMap<(SubsetMask, usize), (u64, SubsetMask)> = FxHashMap::default();
    for (y, &cy) in &counts {
        y.for_each_subset(q, |s| {
            if s.len() == y.len() {
                return;
            }
            let key = (s.clone(), y.len() - s.len());
            match best.get_mut(&key) {
                Some(e) => {
                    if cy > e.0 || (cy == e.0 && y.lex_cmp(&e.1) == Ordering::Less) {
                        *e = (cy, y.clone());
                    }
                }
                None => {
                    best.insert(key, (cy, y.clone()));
                }
            }
        });
    }

    let r_pow = powers(&r, a.max_member_size());
    let mut violation: Option<(SubsetMask, usize, SubsetMask)> = None;
    for ((s, x), (cy, y)) in &best {
        if int(counts[s]) < &r_pow[*x] * int(*cy) {
            let better = match &violation {
                None => true,
                Some((vs, vx, _)) => s.lex_cmp(vs).then(x.cmp(vx)) == Ordering::Less,
            };
            if better {
                violation = Some((s.clone(), *x, y.clone()));
            }
        }
    }
    Ok(match violation {
        None => RqVerdict {
            holds: true,
            base: None,
            extension: None,
        },
        Some((s, _, y)) => RqVerdict {
            holds: false,
            extension: Some(y.difference(&s)),
            base: Some(s),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegularityParams {
    pub t: usize,
    pub q: usize,
    pub eps: f64,
    pub theta: f64,
    /// Maximum number of `(S, H)` pairs to enumerate.
    pub budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityFailure {
    ShadowDeficit,
    Concentration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Both conditions verified for every `l ≤ t` and `S ∈ ∂_{≤q}A`.
    pub ok: bool,
    /// False when the budget ran out before the enumeration finished; no
    /// verdict is given then.
    pub complete: bool,
    pub failing_condition: Option<RegularityFailure>,
    pub failing_s: Option<SubsetMask>,
    pub failing_l: Option<usize>,
    /// Smallest ε for which both conditions would hold at the given θ.
    pub measured_epsilon: f64,
    /// Largest θ (capped at 1) for which condition (ii) would hold at the
    /// given ε.
    pub measured_theta: f64,
    /// Expected size of a uniformly random member.
    pub mean_set_size: f64,
    pub evaluations: u64,
}

/// Exact `(t, q, ε, θ)`-regularity check by enumeration.
///
/// For each `l ≤ t` and each `S` below a member with `|S| ≤ q`:
/// (i) `|∂_l(A(S))| ≥ (1−ε)|∂_l(A)|`, and
/// (ii) for `H` uniform on `∂_l(A(S))`,
/// `P(|A(S∪H)| ≥ θ·E|A(S∪H)|) ≥ 1−ε`.
pub fn regularity_check(a: &SetFamily, p: RegularityParams) -> Result<RegularityReport> {
    if !(p.eps > 0.0 && p.eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {}", p.eps)));
    }
    if !(p.theta > 0.0 && p.theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {}", p.theta)));
    }
    if a.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let k = a.uniform_k().ok_or(Error::NotUniform)?;
    let eps = exact(p.eps)?;
    let theta = exact(p.theta)?;
    let keep = BigRational::one() - &eps;

    let counts = subset_counts(a.members(), (p.q + p.t).min(k));

    // (S, l) ↦ the values |A(S ∪ H)| over H ∈ ∂_l(A(S)).
    let mut buckets: FxHashMap<(SubsetMask, usize), Vec<u64>> = FxHashMap::default();
    let mut evaluations = 0u64;
    let mut complete = true;
    'outer: for (y, &cy) in &counts {
        let mut over = false;
        y.for_each_subset(p.q, |s| {
            if over || y.len() - s.len() > p.t {
                return;
            }
            evaluations += 1;
            if evaluations > p.budget {
                over = true;
                return;
            }
            buckets
                .entry((s.clone(), y.len() - s.len()))
                .or_default()
                .push(cy);
        });
        if over {
            complete = false;
            evaluations = p.budget;
            break 'outer;
        }
    }

    let mut report = RegularityReport {
        ok: false,
        complete,
        failing_condition: None,
        failing_s: None,
        failing_l: None,
        measured_epsilon: 0.0,
        measured_theta: 1.0,
        mean_set_size: a.mean_member_size(),
        evaluations,
    };
    if !complete {
        return Ok(report);
    }

    let mut bases: Vec<&SubsetMask> = counts.keys().filter(|s| s.len() <= p.q).collect();
    bases.sort_by(|x, y| x.lex_cmp(y));
    let empty = Vec::new();
    let bucket = |s: &SubsetMask, l: usize| -> &Vec<u64> {
        buckets.get(&(s.clone(), l)).unwrap_or(&empty)
    };

    let fail = |report: &mut RegularityReport, cond, s: &SubsetMask, l| {
        if report.failing_condition.is_none() {
            report.failing_condition = Some(cond);
            report.failing_s = Some(s.clone());
            report.failing_l = Some(l);
        }
    };

    for l in 0..=p.t {
        let shadow = bucket(&SubsetMask::empty(), l).len() as u64;
        for s in &bases {
            let vals = bucket(s, l);
            let m = vals.len() as u64;

            if int(m) < &keep * int(shadow) {
                fail(&mut report, RegularityFailure::ShadowDeficit, s, l);
            }
            if shadow > 0 {
                let deficit = 1.0 - m as f64 / shadow as f64;
                report.measured_epsilon = report.measured_epsilon.max(deficit);
            }
            if m == 0 {
                continue;
            }

            let sum: u64 = vals.iter().sum();
            // v ≥ θ·E  ⇔  v ≥ ⌈θ·sum/m⌉ for integer v.
            let threshold = (&theta * int(sum) / int(m)).ceil().to_integer();
            let passing = vals.iter().filter(|&&v| BigInt::from(v) >= threshold).count() as u64;
            if int(passing) < &keep * int(m) {
                fail(&mut report, RegularityFailure::Concentration, s, l);
            }
            report.measured_epsilon = report.measured_epsilon.max((m - passing) as f64 / m as f64);

            let mut sorted = vals.clone();
            sorted.sort_unstable();
            let allowed = floor_u64(&(&eps * int(m))) as usize;
            if allowed < sorted.len() {
                let mean = sum as f64 / m as f64;
                let theta_star = sorted[allowed] as f64 / mean;
                report.measured_theta = report.measured_theta.min(theta_star);
            }
        }
    }
    report.ok = report.failing_condition.is_none();
    Ok(report)
}

/// `radius ≥ n/(τk)` comparison used by the homogeneity-implies-spread
/// property, exact in all parameters.
pub fn radius_at_least_ratio(radius: &SpreadRadius, n: usize, tau: f64, k: usize) -> Result<bool> {
    if k == 0 {
        return Ok(true);
    }
    let bound = int(n as u64) / (exact(tau)? * int(k as u64));
    Ok(radius.at_least(&bound))
}
