//! Random subsets, Monte Carlo checks of the spread lemma, the random
//! 2-colouring pair search, and exact sunflower detection.
//!
//! Every random experiment is driven by an explicit [`RngSpec`]. Trials run
//! in fixed-size batches and batch `b` draws from ChaCha8 stream `b`, so the
//! result does not depend on how many threads process the batches.

use num_bigint::BigUint;
use rand::distr::{Bernoulli, Distribution};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::factorial;
use crate::family::{GroundSet, SetFamily};
use crate::mask::SubsetMask;
use crate::metrics::{spread_radius, SpreadRadius};

pub const RNG_ALGORITHM: &str = "chacha8";

/// Trials per independently seeded batch.
pub const BATCH: u64 = 4096;

pub const DEFAULT_SUNFLOWER_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub algorithm: &'static str,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            algorithm: RNG_ALGORITHM,
        }
    }

    /// The generator for substream `stream`.
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn bernoulli(p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|_| Error::InvalidArgument(format!("probability must lie in [0, 1], got {p}")))
}

fn sample_with<R: RngCore>(n: usize, coin: &Bernoulli, rng: &mut R) -> SubsetMask {
    SubsetMask::from_elems((0..n).filter(|_| coin.sample(rng)))
}

/// Fair coin per element of `[n]`, 64 at a time.
fn fair_subset<R: RngCore>(n: usize, rng: &mut R) -> SubsetMask {
    let mut elems = Vec::new();
    let mut base = 0;
    while base < n {
        let word = rng.next_u64();
        let width = (n - base).min(64);
        elems.extend((0..width).filter(|i| word >> i & 1 == 1).map(|i| base + i));
        base += 64;
    }
    SubsetMask::from_elems(elems)
}

/// A `p`-random subset of the ground set.
pub fn sample_p_random(ground: &GroundSet, p: f64, rng: RngSpec) -> Result<SubsetMask> {
    let coin = bernoulli(p)?;
    Ok(sample_with(ground.n, &coin, &mut rng.stream(0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub trials: u64,
}

impl McEstimate {
    fn new(hits: u64, trials: u64) -> Self {
        let estimate = hits as f64 / trials as f64;
        Self {
            estimate,
            stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            hits,
            trials,
        }
    }
}

/// Estimates `P(some member ⊆ W)` for a `p`-random `W`.
pub fn containment_probability(f: &SetFamily, p: f64, trials: u64, rng: RngSpec) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let coin = bernoulli(p)?;
    let n = f.n();
    let batches = trials.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng.stream(b);
            let len = BATCH.min(trials - b * BATCH);
            (0..len)
                .filter(|_| {
                    let w = sample_with(n, &coin, &mut stream);
                    f.members().iter().any(|m| m.is_subset(&w))
                })
                .count() as u64
        })
        .sum();
    Ok(McEstimate::new(hits, trials))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditVerdict {
    Pass,
    Fail,
    /// The bound is not a positive probability, so there is nothing to test.
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadLemmaAudit {
    /// `None` when no nonempty set lies below a member.
    pub radius: Option<SpreadRadius>,
    pub r: f64,
    pub mean_set_size: f64,
    pub m: u32,
    pub delta: f64,
    pub p: f64,
    /// `1 − (5/log₂(rδ))^m·|μ|`; `None` when `log₂(rδ) ≤ 0`.
    pub bound: Option<f64>,
    pub mc: McEstimate,
    pub verdict: AuditVerdict,
}

/// Compares a Monte Carlo estimate at `p = mδ` with the spread-lemma lower
/// bound, one-sided at three standard errors.
pub fn spread_lemma_audit(f: &SetFamily, m: u32, delta: f64, trials: u64, rng: RngSpec) -> Result<SpreadLemmaAudit> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let p = f64::from(m) * delta;
    if m == 0 || !(delta > 0.0) || p > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need m ≥ 1, δ > 0 and mδ ≤ 1, got m={m}, δ={delta}"
        )));
    }
    let report = spread_radius(f)?;
    let r = report.radius.as_ref().map_or(f64::INFINITY, SpreadRadius::to_f64);
    let mean = f.mean_member_size();
    let log = (r * delta).log2();
    let bound = (log > 0.0).then(|| 1.0 - (5.0 / log).powi(m as i32) * mean);
    let mc = containment_probability(f, p, trials, rng)?;
    let verdict = match bound {
        Some(b) if b > 0.0 => {
            if mc.estimate + 3.0 * mc.stderr >= b {
                AuditVerdict::Pass
            } else {
                AuditVerdict::Fail
            }
        }
        _ => AuditVerdict::Vacuous,
    };
    Ok(SpreadLemmaAudit {
        radius: report.radius,
        r,
        mean_set_size: mean,
        m,
        delta,
        p,
        bound,
        mc,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisjointPair {
    /// Index into the first family.
    pub first: usize,
    /// Index into the second family.
    pub second: usize,
    pub sets: (SubsetMask, SubsetMask),
    /// 1-based trial on which the pair was found.
    pub trial: u64,
}

/// Splits the ground set by fair coins into `U₁ ⊔ U₂` up to `trials` times
/// and returns the first `(G₁ ∈ 𝒢₁, G₂ ∈ 𝒢₂)` with `G₁ ⊆ U₁`, `G₂ ⊆ U₂`.
pub fn find_disjoint_pair_by_coloring(
    g1: &SetFamily,
    g2: &SetFamily,
    trials: u64,
    rng: RngSpec,
) -> Result<Option<DisjointPair>> {
    g1.same_ground(g2)?;
    let n = g1.n();
    let full = SubsetMask::full(n);
    let mut stream = rng.stream(0);
    for trial in 1..=trials {
        let u1 = fair_subset(n, &mut stream);
        let u2 = full.difference(&u1);
        let a = g1.members().iter().position(|m| m.is_subset(&u1));
        let b = g2.members().iter().position(|m| m.is_subset(&u2));
        if let (Some(a), Some(b)) = (a, b) {
            let sets = (g1.members()[a].clone(), g2.members()[b].clone());
            debug_assert!(sets.0.is_disjoint(&sets.1));
            return Ok(Some(DisjointPair {
                first: a,
                second: b,
                sets,
                trial,
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sunflower {
    /// Member indices, ascending.
    pub petals: Vec<usize>,
    pub core: SubsetMask,
}

impl Sunflower {
    /// Every pairwise intersection of the referenced members equals the core.
    pub fn is_valid_in(&self, f: &SetFamily) -> bool {
        let sets: Option<Vec<&SubsetMask>> = self.petals.iter().map(|&i| f.members().get(i)).collect();
        let Some(sets) = sets else { return false };
        let distinct = self.petals.windows(2).all(|w| w[0] < w[1]);
        distinct
            && sets.iter().enumerate().all(|(i, a)| {
                sets[i + 1..].iter().all(|b| a.intersection(b) == self.core)
            })
    }
}

struct Packing<'a> {
    petals: &'a [(usize, SubsetMask)],
    need: usize,
    nodes: u64,
    budget: u64,
}

impl Packing<'_> {
    fn search(&mut self, start: usize, used: &SubsetMask, chosen: &mut Vec<usize>) -> Result<bool> {
        if chosen.len() == self.need {
            return Ok(true);
        }
        for i in start..self.petals.len() {
            if self.petals.len() - i < self.need - chosen.len() {
                break;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::BudgetExceeded {
                    what: "sunflower search",
                    budget: self.budget,
                });
            }
            let (idx, p) = &self.petals[i];
            if p.is_disjoint(used) {
                chosen.push(*idx);
                if self.search(i + 1, &used.union(p), chosen)? {
                    return Ok(true);
                }
                chosen.pop();
            }
        }
        Ok(false)
    }
}

/// Exact search for an `l`-sunflower.
///
/// The core of any sunflower with at least two petals is the intersection
/// of two of them, so only pairwise intersections are tried as cores. For
/// a core `Y` the petals are the members above `Y`, and a sunflower is `l`
/// members whose parts outside `Y` are pairwise disjoint. Cores are tried
/// by size, then by value.
pub fn find_sunflower(f: &SetFamily, l: usize, budget: u64) -> Result<Option<Sunflower>> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("a sunflower needs at least 2 petals, got {l}")));
    }
    let members = f.members();
    if members.len() < l {
        return Ok(None);
    }
    let mut cores: FxHashSet<SubsetMask> = FxHashSet::default();
    cores.insert(SubsetMask::empty());
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            cores.insert(a.intersection(b));
        }
    }
    let mut cores: Vec<SubsetMask> = cores.into_iter().collect();
    cores.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut nodes = 0;
    for core in cores {
        let mut petals: Vec<(usize, SubsetMask)> = members
            .iter()
            .enumerate()
            .filter(|(_, m)| core.is_subset(m))
            .map(|(i, m)| (i, m.difference(&core)))
            .collect();
        if petals.len() < l {
            continue;
        }
        // Small petals first: they block the fewest others.
        petals.sort_by_key(|(i, p)| (p.len(), *i));
        let mut packing = Packing {
            petals: &petals,
            need: l,
            nodes,
            budget,
        };
        let mut chosen = Vec::with_capacity(l);
        let found = packing.search(0, &SubsetMask::empty(), &mut chosen)?;
        nodes = packing.nodes;
        if found {
            chosen.sort_unstable();
            return Ok(Some(Sunflower { petals: chosen, core }));
        }
    }
    Ok(None)
}

fn as_decimal<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SunflowerThresholds {
    pub k: usize,
    pub l: usize,
    /// `k!(l−1)^k`: more members than this forces an `l`-sunflower.
    #[serde(serialize_with = "as_decimal")]
    pub erdos_rado: BigUint,
    /// `(C·l·log₂(kl))^l` with `C = 2^10`.
    pub alwz: f64,
}

pub fn sunflower_thresholds(k: usize, l: usize) -> Result<SunflowerThresholds> {
    if k == 0 || l < 2 {
        return Err(Error::InvalidArgument(format!("need k ≥ 1 and l ≥ 2, got k={k}, l={l}")));
    }
    let erdos_rado = factorial(k) * BigUint::from(l - 1).pow(k as u32);
    let lf = l as f64;
    let alwz = (1024.0 * lf * ((k * l) as f64).log2()).powf(lf);
    Ok(SunflowerThresholds {
        k,
        l,
        erdos_rado,
        alwz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fam(n: usize, sets: &[&[usize]]) -> SetFamily {
        SetFamily::from_one_based(n, sets).unwrap()
    }

    #[test]
    fn extreme_probabilities() {
        let g = GroundSet::new(50).unwrap();
        assert!(sample_p_random(&g, 0.0, RngSpec::new(1)).unwrap().is_empty());
        assert_eq!(sample_p_random(&g, 1.0, RngSpec::new(1)).unwrap(), g.full_mask());
        assert!(sample_p_random(&g, 1.5, RngSpec::new(1)).is_err());
    }

    #[test]
    fn half_random_subset_is_concentrated() {
        let n = 10_000;
        let g = GroundSet::new(n).unwrap();
        let w = sample_p_random(&g, 0.5, RngSpec::new(7)).unwrap();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((w.len() as f64 - n as f64 / 2.0).abs() <= 3.0 * sigma);
        assert_eq!(w, sample_p_random(&g, 0.5, RngSpec::new(7)).unwrap());
    }

    #[test]
    fn containment_of_two_singletons() {
        let f = fam(2, &[&[1], &[2]]);
        let est = containment_probability(&f, 0.5, 20_000, RngSpec::new(3)).unwrap();
        assert!((est.estimate - 0.75).abs() <= 3.0 * est.stderr, "{est:?}");
        let one = fam(1, &[&[1]]);
        let est = containment_probability(&one, 0.5, 10_000, RngSpec::new(3)).unwrap();
        assert!((est.estimate - 0.5).abs() <= 3.0 * est.stderr);
    }

    #[test]
    fn batches_are_independent_of_thread_count() {
        let f = SetFamily::all_k_subsets(10, 2).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| containment_probability(&f, 0.2, 3 * BATCH + 17, RngSpec::new(11)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn audit_on_singletons() {
        let rows: Vec<Vec<usize>> = (1..=1024).map(|i| vec![i]).collect();
        let f = SetFamily::from_one_based(1024, &rows).unwrap();
        let audit = spread_lemma_audit(&f, 2, 0.25, 2_000, RngSpec::new(5)).unwrap();
        assert_eq!(audit.bound, Some(0.609375));
        assert_eq!(audit.verdict, AuditVerdict::Pass);
        assert_eq!(audit.r, 1024.0);

        let single = fam(4, &[&[1, 2, 3]]);
        let audit = spread_lemma_audit(&single, 2, 0.25, 100, RngSpec::new(5)).unwrap();
        assert_eq!(audit.bound, None);
        assert_eq!(audit.verdict, AuditVerdict::Vacuous);
        assert!(spread_lemma_audit(&single, 3, 0.5, 100, RngSpec::new(5)).is_err());
    }

    #[test]
    fn coloring_pairs() {
        let g1 = fam(4, &[&[1]]);
        let g2 = fam(4, &[&[2]]);
        let pair = find_disjoint_pair_by_coloring(&g1, &g2, 100, RngSpec::new(1)).unwrap().unwrap();
        assert_eq!(pair.sets, (g1.members()[0].clone(), g2.members()[0].clone()));

        let g = fam(4, &[&[1, 2]]);
        assert_eq!(find_disjoint_pair_by_coloring(&g, &g, 1_000, RngSpec::new(1)).unwrap(), None);

        let all = SetFamily::all_k_subsets(8, 2).unwrap();
        let pair = find_disjoint_pair_by_coloring(&all, &all, 100, RngSpec::new(2)).unwrap().unwrap();
        assert!(pair.sets.0.is_disjoint(&pair.sets.1));
    }

    #[test]
    fn sunflower_examples() {
        let f = fam(6, &[&[1, 2], &[3, 4], &[5, 6]]);
        let s = find_sunflower(&f, 3, DEFAULT_SUNFLOWER_BUDGET).unwrap().unwrap();
        assert!(s.core.is_empty() && s.is_valid_in(&f));

        let f = fam(4, &[&[1, 2], &[1, 3], &[1, 4]]);
        let s = find_sunflower(&f, 3, DEFAULT_SUNFLOWER_BUDGET).unwrap().unwrap();
        assert_eq!(s.core, SubsetMask::singleton(0));

        let f = SetFamily::all_k_subsets(4, 2).unwrap();
        let s = find_sunflower(&f, 3, DEFAULT_SUNFLOWER_BUDGET).unwrap().unwrap();
        assert_eq!(s.core.len(), 1);
        assert!(s.is_valid_in(&f));
        assert_eq!(find_sunflower(&f, 4, DEFAULT_SUNFLOWER_BUDGET).unwrap(), None);
        assert!(find_sunflower(&f, 1, DEFAULT_SUNFLOWER_BUDGET).is_err());
    }

    #[test]
    fn sunflower_budget_is_reported() {
        let f = SetFamily::all_k_subsets(9, 3).unwrap();
        let err = find_sunflower(&f, 5, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn thresholds() {
        assert_eq!(sunflower_thresholds(2, 3).unwrap().erdos_rado, BigUint::from(8u32));
        assert_eq!(sunflower_thresholds(1, 2).unwrap().erdos_rado, BigUint::from(1u32));
        assert_eq!(sunflower_thresholds(3, 2).unwrap().erdos_rado, BigUint::from(6u32));
        let t = sunflower_thresholds(2, 2).unwrap();
        assert!((t.alwz - (1024.0f64 * 2.0 * 2.0).powi(2)).abs() < 1e-6);
    }

    /// Brute force over all `l`-subsets of members.
    fn brute_has_sunflower(f: &SetFamily, l: usize) -> bool {
        let idx: Vec<usize> = (0..f.len()).collect();
        let mut found = false;
        crate::mask::for_each_combination(&idx, l, |c| {
            if found {
                return;
            }
            let sets: Vec<&SubsetMask> = c.iter().map(|&i| &f.members()[i]).collect();
            let core = sets.iter().skip(1).fold(sets[0].clone(), |acc, s| acc.intersection(s));
            found = sets
                .iter()
                .enumerate()
                .all(|(i, a)| sets[i + 1..].iter().all(|b| a.intersection(b) == core));
        });
        found
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn nine_pairs_always_contain_three_sunflower(
            pairs in proptest::collection::btree_set((1usize..=12, 1usize..=12)
                .prop_filter("distinct", |(a, b)| a < b), 9..=9)) {
            let rows: Vec<Vec<usize>> = pairs.iter().map(|&(a, b)| vec![a, b]).collect();
            let f = SetFamily::from_one_based(12, &rows).unwrap();
            let s = find_sunflower(&f, 3, DEFAULT_SUNFLOWER_BUDGET).unwrap();
            prop_assert!(s.is_some_and(|s| s.is_valid_in(&f)));
        }

        #[test]
        fn finder_agrees_with_brute_force(
            sets in proptest::collection::btree_set(proptest::collection::btree_set(1usize..=7, 0..4), 1..10),
            l in 2usize..=4,
        ) {
            let rows: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
            let f = SetFamily::from_one_based(7, &rows).unwrap();
            let found = find_sunflower(&f, l, DEFAULT_SUNFLOWER_BUDGET).unwrap();
            if let Some(s) = &found {
                prop_assert!(s.is_valid_in(&f));
                prop_assert_eq!(s.petals.len(), l);
            }
            prop_assert_eq!(found.is_some(), brute_has_sunflower(&f, l));
        }

        #[test]
        fn coloring_pairs_are_disjoint(seed in any::<u64>()) {
            let a = SetFamily::all_k_subsets(7, 3).unwrap();
            if let Some(p) = find_disjoint_pair_by_coloring(&a, &a, 50, RngSpec::new(seed)).unwrap() {
                prop_assert!(p.sets.0.is_disjoint(&p.sets.1));
            }
        }
    }
}
