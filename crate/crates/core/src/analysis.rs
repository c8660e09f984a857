//! Closed-form expected shared-link load for a given placement.
//!
//! The load decomposes as `r = r1 + r2`:
//!
//! - `r1`: coded delivery. Per slot each SBS holds a queue of its distinct
//!   coded requests; step `i` multicasts to every size-`T+1` subset containing
//!   at least one SBS whose queue still has an `i`-th entry. The expected step
//!   cost follows from two distributions computed here by dynamic programming:
//!   the per-SBS distinct-request count `l_c` (growth chain over `Z_c` draws)
//!   and the number of non-empty queues `Q_i` (independent-indicator
//!   convolution over SBSs).
//! - `r2`: uncached contents, broadcast once per distinct request:
//!   `sum_n 1 - (1 - p_n)^(total users)` in the homogeneous case, with a
//!   per-SBS coverage product in the heterogeneous case.
//!
//! The distinct-request chain uses the rank-decay approximation
//! `q_j = (1 - (j-1)/D) * S` for the probability that a draw hits a new coded
//! content given `j-1` distinct ones were seen (`D` coded contents of total
//! mass `S`). It is exact when popularity is uniform over the coded band and
//! slightly overestimates `r1` for very skewed bands; the Monte Carlo
//! simulator, not this formula, is the ground truth in the acceptance suite.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::math::{step_ratio_table, step_transmission_ratio};
use crate::model::{
    validate, GroupLoad, HeteroPlacement, HybridPlacement, LoadReport, ModelError, Placement,
    PopularityMatrix, SortedPopularity, SystemConfig,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("distinct-request rank j must be >= 1")]
    RankOutOfRange,
    #[error("SBS {sbs} is not a member of group {group}")]
    NotGroupMember { sbs: usize, group: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
}

fn require_valid(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
) -> Result<(), AnalysisError> {
    let violations = validate(config, pop, placement);
    if violations.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        Err(AnalysisError::InvalidPlacement(msgs.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

/// Distribution of one SBS's distinct coded-request count `l` after all its
/// draws, plus the tail sums `P_i = Pr{l >= i}` consumed by the queue model.
#[derive(Debug, Clone)]
pub struct DistinctRequestDistribution {
    pmf: Vec<f64>,
    tail: Vec<f64>,
}

impl DistinctRequestDistribution {
    /// `Pr{l = j}` for `j = 0..=Z`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `Pr{l >= i}`; zero beyond the draw count.
    pub fn at_least(&self, i: usize) -> f64 {
        self.tail.get(i).copied().unwrap_or(0.0)
    }
}

/// Distribution of the number of non-empty coded queues at one delivery step.
#[derive(Debug, Clone)]
pub struct QueueOccupancyDistribution {
    pmf: Vec<f64>,
}

impl QueueOccupancyDistribution {
    /// `Pr{Q = k}` for `k = 0..=K`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }
}

/// Distribution of the distinct count after `z` draws, where draw outcomes
/// follow the growth chain: with `j` distinct contents already seen, the next
/// draw is a new coded content with probability `q(j+1)`.
///
/// `q` is 1-based: `q(1)` is the chance the very first draw is coded.
pub fn distinct_distribution(
    q: impl Fn(usize) -> f64,
    z: usize,
) -> DistinctRequestDistribution {
    let qs: Vec<f64> = (1..=z + 1).map(&q).collect();
    let mut pmf = vec![0.0; z + 1];
    pmf[0] = 1.0;
    for step in 1..=z {
        // Descending j so pmf[j-1] is still the previous draw's value.
        for j in (0..=step).rev() {
            let stay = pmf[j] * (1.0 - qs[j]);
            let grow = if j > 0 { pmf[j - 1] * qs[j - 1] } else { 0.0 };
            pmf[j] = stay + grow;
        }
    }
    let mut tail = vec![0.0; z + 1];
    let mut acc = 0.0;
    for j in (0..=z).rev() {
        acc += pmf[j];
        tail[j] = acc;
    }
    DistinctRequestDistribution { pmf, tail }
}

/// Distribution of how many of the per-SBS indicator events fire, given each
/// SBS's probability for the step under consideration (`occupied[c] = P_{c,i}`).
/// This convolution is exact given the marginals.
pub fn queue_distribution(occupied: &[f64]) -> QueueOccupancyDistribution {
    let k = occupied.len();
    let mut pmf = vec![0.0; k + 1];
    pmf[0] = 1.0;
    for (c, &p) in occupied.iter().enumerate() {
        for j in (0..=c + 1).rev() {
            let stay = pmf[j] * (1.0 - p);
            let grow = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + grow;
        }
    }
    QueueOccupancyDistribution { pmf }
}

// ---------------------------------------------------------------------------
// Per-rank request probabilities
// ---------------------------------------------------------------------------

/// Probability that the `j`-th distinct coded content is requested next at
/// SBS `c` under a homogeneous hybrid placement (rank-decay form over the
/// coded band `M1..N1` of the sorted view).
pub fn q_coded(
    pop: &PopularityMatrix,
    placement: &HybridPlacement,
    c: usize,
    j: usize,
) -> Result<f64, AnalysisError> {
    if j < 1 {
        return Err(AnalysisError::RankOutOfRange);
    }
    if c >= pop.sbs_count() {
        return Err(AnalysisError::IndexOutOfRange(format!("SBS {c}")));
    }
    let sorted = pop.sorted_view()?;
    let d = placement.n1 - placement.m1;
    if j > d {
        return Ok(0.0);
    }
    let mass: f64 = sorted.probs()[placement.m1..placement.n1].iter().sum();
    Ok((1.0 - (j - 1) as f64 / d as f64) * mass)
}

/// Heterogeneous twin of [`q_coded`]: rank-decay over group `g`'s coded
/// contents, weighted by SBS `c`'s own popularity column.
pub fn q_coded_group(
    pop: &PopularityMatrix,
    placement: &HeteroPlacement,
    c: usize,
    g: usize,
    j: usize,
) -> Result<f64, AnalysisError> {
    if j < 1 {
        return Err(AnalysisError::RankOutOfRange);
    }
    let group = placement
        .groups
        .get(g)
        .ok_or_else(|| AnalysisError::IndexOutOfRange(format!("group {g}")))?;
    if !group.has_member(c) {
        return Err(AnalysisError::NotGroupMember { sbs: c, group: g });
    }
    let ng = group.content_count();
    if j > ng {
        return Ok(0.0);
    }
    let mass: f64 = group.contents.iter().map(|&x| pop.prob(x, c)).sum();
    Ok((1.0 - (j - 1) as f64 / ng as f64) * mass)
}

// ---------------------------------------------------------------------------
// Step load and expected loads
// ---------------------------------------------------------------------------

/// Expected link cost of one coded step with `occupied` non-empty queues,
/// clamped by the broadcast fallback `N1 - M` (`N_g - M_g` per group in the
/// heterogeneous case, passing that group's parameters).
pub fn coded_step_load(k: usize, t: usize, occupied: usize, n1: usize, m: usize) -> f64 {
    let clamp = n1.saturating_sub(m) as f64;
    step_transmission_ratio(k, t, occupied).min(clamp)
}

/// Expected coded load `r1` and its per-step breakdown.
pub fn expected_coded_load(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
) -> Result<(f64, Vec<f64>), AnalysisError> {
    let report = total_load(config, pop, placement)?;
    Ok((report.r1, report.per_step))
}

/// Expected uncoded load `r2` (deduplicated broadcasts of uncached contents).
pub fn expected_uncoded_load(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
) -> Result<f64, AnalysisError> {
    Ok(total_load(config, pop, placement)?.r2)
}

/// Full expected-load report `r = r1 + r2` for either placement family.
pub fn total_load(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
) -> Result<LoadReport, AnalysisError> {
    require_valid(config, pop, placement)?;
    match placement {
        Placement::Hybrid(p) => {
            let eval = HybridEvaluator::new(config, pop)?;
            Ok(eval.eval(p.m1, p.n1))
        }
        Placement::Hetero(p) => Ok(eval_hetero(config, pop, p)),
    }
}

fn miss_probability(p: f64, users: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    match i32::try_from(users) {
        Ok(e) => 1.0 - (1.0 - p).powi(e),
        Err(_) => 1.0 - (1.0 - p).powf(users as f64),
    }
}

/// Shared state for evaluating many `(M1, N1)` candidates against one
/// configuration: sorted popularity prefix sums, suffix sums of per-content
/// broadcast probabilities (so `r2` is O(1) per candidate), and transmission
/// ratio tables per replication degree.
pub(crate) struct HybridEvaluator {
    k: usize,
    m: usize,
    z: Vec<usize>,
    z_max: usize,
    prefix: Vec<f64>,
    uncached_suffix: Vec<f64>,
    ratio_tables: Vec<Vec<f64>>,
}

impl HybridEvaluator {
    pub fn new(config: &SystemConfig, pop: &PopularityMatrix) -> Result<Self, AnalysisError> {
        let sorted: SortedPopularity = pop.sorted_view()?;
        let n = config.library_size();
        let mut prefix = vec![0.0; n + 1];
        for (i, &p) in sorted.probs().iter().enumerate() {
            prefix[i + 1] = prefix[i] + p;
        }
        let total_users = config.total_users();
        let mut uncached_suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            uncached_suffix[i] = uncached_suffix[i + 1] + miss_probability(sorted.probs()[i], total_users);
        }
        let k = config.sbs_count();
        let ratio_tables = (0..=k).map(|t| step_ratio_table(k, t)).collect();
        Ok(Self {
            k,
            m: config.cache_capacity(),
            z: config.users().to_vec(),
            z_max: config.z_max(),
            prefix,
            uncached_suffix,
            ratio_tables,
        })
    }

    /// Expected load of a feasible `(m1, n1)` candidate.
    pub fn eval(&self, m1: usize, n1: usize) -> LoadReport {
        let r2 = self.uncached_suffix[n1];
        if n1 == self.m {
            return LoadReport::new(0.0, r2, vec![0.0; self.z_max], None);
        }
        let d = n1 - m1;
        let num = self.k * (self.m - m1);
        debug_assert!(num.is_multiple_of(d), "caller must supply integer replication degree");
        let t = num / d;
        let mass = self.prefix[n1] - self.prefix[m1];
        let clamp = (n1 - self.m) as f64;
        let table = &self.ratio_tables[t];

        // One distinct-count DP per distinct Z value, shared across SBSs.
        let mut tails: BTreeMap<usize, DistinctRequestDistribution> = BTreeMap::new();
        for &zc in &self.z {
            tails.entry(zc).or_insert_with(|| {
                distinct_distribution(
                    |j| {
                        if j > d {
                            0.0
                        } else {
                            (1.0 - (j - 1) as f64 / d as f64) * mass
                        }
                    },
                    zc,
                )
            });
        }

        let mut per_step = Vec::with_capacity(self.z_max);
        let mut r1 = 0.0;
        let mut occupied = vec![0.0; self.k];
        for i in 1..=self.z_max {
            for (c, &zc) in self.z.iter().enumerate() {
                occupied[c] = tails[&zc].at_least(i);
            }
            let queues = queue_distribution(&occupied);
            let load: f64 = queues
                .pmf()
                .iter()
                .enumerate()
                .map(|(kk, &pr)| pr * table[kk].min(clamp))
                .sum();
            per_step.push(load);
            r1 += load;
        }
        LoadReport::new(r1, r2, per_step, None)
    }
}

/// Expected coded load contributed by one SBS group, with its per-step
/// breakdown over the global step horizon `Z_max`.
pub(crate) fn group_coded_load(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    group: &crate::model::SbsGroup,
) -> (f64, Vec<f64>) {
    let z_max = config.z_max();
    let kg = group.sbs_count();
    let ng = group.content_count();
    let mg = group.coded_capacity;
    let mut per_step = vec![0.0; z_max];
    if ng > mg {
        let tg = group
            .replication_degree()
            .expect("caller must supply integer group replication degree");
        let table = step_ratio_table(kg, tg);
        let clamp = (ng - mg) as f64;
        let tails: Vec<DistinctRequestDistribution> = group
            .members
            .iter()
            .map(|&c| {
                let mass: f64 = group.contents.iter().map(|&x| pop.prob(x, c)).sum();
                distinct_distribution(
                    |j| {
                        if j > ng {
                            0.0
                        } else {
                            (1.0 - (j - 1) as f64 / ng as f64) * mass
                        }
                    },
                    config.users()[c],
                )
            })
            .collect();
        let mut occupied = vec![0.0; kg];
        for i in 1..=z_max {
            for (slot, tail) in tails.iter().enumerate() {
                occupied[slot] = tail.at_least(i);
            }
            let queues = queue_distribution(&occupied);
            let load: f64 = queues
                .pmf()
                .iter()
                .enumerate()
                .map(|(kk, &pr)| pr * table[kk].min(clamp))
                .sum();
            per_step[i - 1] = load;
        }
    }
    (per_step.iter().sum(), per_step)
}

/// Heterogeneous expected load: per-group coded sums plus the coverage-product
/// uncoded term.
pub(crate) fn eval_hetero(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &HeteroPlacement,
) -> LoadReport {
    let z_max = config.z_max();
    let mut per_step_total = vec![0.0; z_max];
    let mut groups_out = Vec::with_capacity(placement.groups.len());
    let mut r1 = 0.0;

    for (gi, group) in placement.groups.iter().enumerate() {
        let (r1_g, per_step) = group_coded_load(config, pop, group);
        r1 += r1_g;
        for (acc, v) in per_step_total.iter_mut().zip(&per_step) {
            *acc += v;
        }
        groups_out.push(GroupLoad { group: gi, r1: r1_g, per_step });
    }

    let r2 = hetero_uncoded_load(config, pop, placement);
    LoadReport::new(r1, r2, per_step_total, Some(groups_out))
}

/// `r2` for a heterogeneous placement: a content costs one broadcast iff at
/// least one user requests it at an SBS where it is neither uncoded-cached
/// nor decodable through any of that SBS's groups.
pub(crate) fn hetero_uncoded_load(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &HeteroPlacement,
) -> f64 {
    let k = config.sbs_count();
    let n = config.library_size();
    let mut covered = vec![false; n * k];
    for group in &placement.groups {
        for &c in &group.members {
            for &x in &group.contents {
                covered[x * k + c] = true;
            }
        }
    }
    for (c, list) in placement.uncoded.iter().enumerate() {
        for &x in list {
            covered[x * k + c] = true;
        }
    }
    let mut r2 = 0.0;
    for content in 0..n {
        let mut none_requested = 1.0;
        for c in 0..k {
            let p = if covered[content * k + c] { 0.0 } else { pop.prob(content, c) };
            none_requested *= match i32::try_from(config.users()[c]) {
                Ok(e) => (1.0 - p).powi(e),
                Err(_) => (1.0 - p).powf(config.users()[c] as f64),
            };
        }
        r2 += 1.0 - none_requested;
    }
    r2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{zipf_popularity, SbsGroup};

    fn table_popularity() -> PopularityMatrix {
        // 4 contents x 4 SBSs; columns are per-SBS distributions.
        PopularityMatrix::from_rows(&[
            vec![0.3, 0.2, 0.3, 0.2],
            vec![0.2, 0.3, 0.2, 0.3],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
        ])
        .unwrap()
    }

    #[test]
    fn q_coded_first_rank_is_band_mass() {
        let pop = zipf_popularity(10, 1.2, 2).unwrap();
        let sorted = pop.sorted_view().unwrap();
        let placement = HybridPlacement::new(2, 8);
        let want: f64 = sorted.probs()[2..8].iter().sum();
        let got = q_coded(&pop, &placement, 0, 1).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn q_coded_uniform_all_coded() {
        // Uniform over N=10, all-coded (M1=0, N1=10), j=5: (1 - 4/10) * 1.
        let pop = zipf_popularity(10, 0.0, 3).unwrap();
        let placement = HybridPlacement::new(0, 10);
        let got = q_coded(&pop, &placement, 1, 5).unwrap();
        assert!((got - 0.6).abs() < 1e-12);
    }

    #[test]
    fn q_coded_past_band_is_zero_and_rank_zero_errors() {
        let pop = zipf_popularity(10, 1.0, 1).unwrap();
        let placement = HybridPlacement::new(2, 8);
        assert_eq!(q_coded(&pop, &placement, 0, 7).unwrap(), 0.0);
        assert!(matches!(
            q_coded(&pop, &placement, 0, 0),
            Err(AnalysisError::RankOutOfRange)
        ));
    }

    #[test]
    fn q_coded_group_examples() {
        let pop = table_popularity();
        let placement = HeteroPlacement {
            groups: vec![SbsGroup {
                members: vec![0, 1, 2, 3],
                coded_capacity: 1,
                contents: vec![0, 1],
            }],
            uncoded: vec![vec![2], vec![2], vec![3], vec![3]],
        };
        // First rank at SBS 0: p_{W1} + p_{W2} = 0.3 + 0.2.
        let got = q_coded_group(&pop, &placement, 0, 0, 1).unwrap();
        assert!((got - 0.5).abs() < 1e-15);
        // Past the group library: zero.
        assert_eq!(q_coded_group(&pop, &placement, 0, 0, 3).unwrap(), 0.0);
        // Non-member errors.
        let placement2 = HeteroPlacement {
            groups: vec![SbsGroup { members: vec![0, 1], coded_capacity: 1, contents: vec![0, 1] }],
            uncoded: vec![vec![], vec![], vec![], vec![]],
        };
        assert!(matches!(
            q_coded_group(&pop, &placement2, 2, 0, 1),
            Err(AnalysisError::NotGroupMember { sbs: 2, group: 0 })
        ));
    }

    #[test]
    fn distinct_distribution_no_draws() {
        let d = distinct_distribution(|_| 0.7, 0);
        assert_eq!(d.pmf(), &[1.0]);
        assert_eq!(d.at_least(1), 0.0);
    }

    #[test]
    fn distinct_distribution_two_uniform_contents() {
        // Two coded contents with full mass: q(1)=1, q(2)=0.5. Exhaustive
        // enumeration of the 4 equiprobable pairs gives {1: 1/2, 2: 1/2}.
        let d = distinct_distribution(|j| if j == 1 { 1.0 } else if j == 2 { 0.5 } else { 0.0 }, 2);
        assert!((d.pmf()[0] - 0.0).abs() < 1e-15);
        assert!((d.pmf()[1] - 0.5).abs() < 1e-15);
        assert!((d.pmf()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distinct_distribution_no_coded_mass() {
        let d = distinct_distribution(|_| 0.0, 5);
        assert_eq!(d.pmf()[0], 1.0);
        assert_eq!(d.at_least(1), 0.0);
    }

    #[test]
    fn distinct_tail_is_monotone_and_normalized() {
        let d = distinct_distribution(|j| 0.8 / j as f64, 6);
        let sum: f64 = d.pmf().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for i in 0..=6 {
            assert!(d.at_least(i) >= d.at_least(i + 1) - 1e-15);
        }
    }

    #[test]
    fn queue_distribution_single_bernoulli() {
        let q = queue_distribution(&[0.3]);
        assert!((q.pmf()[0] - 0.7).abs() < 1e-15);
        assert!((q.pmf()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn queue_distribution_binomial_case() {
        let q = queue_distribution(&[0.5, 0.5, 0.5]);
        for (k, want) in [(0, 1.0 / 8.0), (1, 3.0 / 8.0), (2, 3.0 / 8.0), (3, 1.0 / 8.0)] {
            assert!((q.pmf()[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn queue_distribution_all_certain() {
        let q = queue_distribution(&[1.0; 5]);
        assert_eq!(q.pmf()[5], 1.0);
        assert!(q.pmf()[..5].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn coded_step_load_examples() {
        // K=3, T=1, k=1 occupied: (C(3,2)-C(2,2))/C(3,1) = 2/3.
        assert!((coded_step_load(3, 1, 1, 100, 5) - 2.0 / 3.0).abs() < 1e-15);
        // Full occupancy hits the global-gain form (K-T)/(T+1).
        assert!((coded_step_load(3, 1, 3, 100, 5) - 1.0).abs() < 1e-15);
        // No occupied queues: nothing to send.
        assert_eq!(coded_step_load(3, 1, 0, 100, 5), 0.0);
        // Clamped by the broadcast fallback N1 - M.
        assert_eq!(coded_step_load(4, 1, 4, 6, 5), 1.0);
    }

    #[test]
    fn pure_uncoded_has_zero_coded_load() {
        let config = SystemConfig::uniform(4, 20, 5, 3, 1.0).unwrap();
        let pop = zipf_popularity(20, 1.0, 4).unwrap();
        let placement = Placement::Hybrid(HybridPlacement::new(5, 5));
        let (r1, per_step) = expected_coded_load(&config, &pop, &placement).unwrap();
        assert_eq!(r1, 0.0);
        assert!(per_step.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_request_all_coded_uniform_recovers_global_gain() {
        // K SBSs, one request each, uniform popularity, everything coded:
        // every queue is occupied, so r1 = (K-T)/(T+1).
        let k = 4;
        let config = SystemConfig::uniform(k, 8, 2, 1, 1.0).unwrap();
        let pop = zipf_popularity(8, 0.0, k).unwrap();
        let placement = Placement::Hybrid(HybridPlacement::new(0, 8));
        // T = 4*2/8 = 1.
        let (r1, per_step) = expected_coded_load(&config, &pop, &placement).unwrap();
        assert!((r1 - (k - 1) as f64 / 2.0).abs() < 1e-12);
        assert_eq!(per_step.len(), 1);
    }

    #[test]
    fn uncoded_load_examples() {
        // Everything cached: r2 = 0.
        let config = SystemConfig::uniform(2, 4, 4, 1, 1.0).unwrap();
        let pop = zipf_popularity(4, 1.0, 2).unwrap();
        let all = Placement::Hybrid(HybridPlacement::new(4, 4));
        assert_eq!(expected_uncoded_load(&config, &pop, &all).unwrap(), 0.0);
        let report = total_load(&config, &pop, &all).unwrap();
        assert_eq!(report.r, 0.0);

        // One uncached content with p = 0.5 and two users total:
        // r2 = 1 - 0.25 = 0.75.
        let config = SystemConfig::uniform(2, 2, 1, 1, 1.0).unwrap();
        let pop = zipf_popularity(2, 0.0, 2).unwrap();
        let placement = Placement::Hybrid(HybridPlacement::new(1, 1));
        let r2 = expected_uncoded_load(&config, &pop, &placement).unwrap();
        assert!((r2 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn hetero_uncoded_cover_kills_term() {
        let config = SystemConfig::uniform(4, 4, 1, 1, 1.0).unwrap();
        let pop = table_popularity();
        let bare = HeteroPlacement { groups: vec![], uncoded: vec![vec![]; 4] };
        // Caching W3 uncoded at every SBS removes exactly W3's broadcast term,
        // 1 - (1-0.5)^2 = 0.75 (it is requested only at SBS 1 and 2).
        let covered = HeteroPlacement { groups: vec![], uncoded: vec![vec![2]; 4] };
        let diff =
            hetero_uncoded_load(&config, &pop, &bare) - hetero_uncoded_load(&config, &pop, &covered);
        assert!((diff - 0.75).abs() < 1e-12);
    }

    #[test]
    fn hetero_single_group_matches_homogeneous_path() {
        // Homogeneous matrix evaluated through the heterogeneous machinery
        // with one all-SBS group must reproduce the homogeneous report.
        let k = 3;
        let n = 6;
        let m = 2;
        let config = SystemConfig::new(k, n, m, vec![2, 3, 1], 1.0).unwrap();
        let pop = zipf_popularity(n, 0.9, k).unwrap();
        let (m1, n1) = (1, 4); // T = 3*1/3 = 1
        let hybrid = Placement::Hybrid(HybridPlacement::new(m1, n1));
        let homog = total_load(&config, &pop, &hybrid).unwrap();

        let hetero = HeteroPlacement {
            groups: vec![SbsGroup {
                members: (0..k).collect(),
                coded_capacity: m - m1,
                contents: (m1..n1).collect(),
            }],
            uncoded: vec![(0..m1).collect(); k],
        };
        let het = total_load(&config, &pop, &Placement::Hetero(hetero)).unwrap();
        assert!((homog.r1 - het.r1).abs() < 1e-12, "{} vs {}", homog.r1, het.r1);
        assert!((homog.r2 - het.r2).abs() < 1e-12, "{} vs {}", homog.r2, het.r2);
        assert!((homog.r - het.r).abs() < 1e-12);
    }

    #[test]
    fn per_step_loads_are_non_increasing() {
        let config = SystemConfig::new(5, 50, 10, vec![1, 2, 3, 4, 8], 1.0).unwrap();
        let pop = zipf_popularity(50, 1.3, 5).unwrap();
        let placement = Placement::Hybrid(HybridPlacement::new(5, 30)); // T = 5*5/25 = 1
        let (_, per_step) = expected_coded_load(&config, &pop, &placement).unwrap();
        for w in per_step.windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "per-step loads should not increase: {per_step:?}");
        }
    }

    #[test]
    fn invalid_placement_is_rejected() {
        let config = SystemConfig::uniform(3, 10, 2, 1, 1.0).unwrap();
        let pop = zipf_popularity(10, 1.0, 3).unwrap();
        let placement = Placement::Hybrid(HybridPlacement::new(0, 4)); // T = 1.5
        assert!(matches!(
            total_load(&config, &pop, &placement),
            Err(AnalysisError::InvalidPlacement(_))
        ));
    }
}
