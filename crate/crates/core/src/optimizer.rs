//! Placement searches: the homogeneous `(N1, M1)` partition search, the
//! pure-coded and pure-uncoded baselines, and the exhaustive small-scale
//! grouped search for SBS-dependent popularity.
//!
//! All searches are deterministic: candidates are enumerated in a fixed
//! order, parallel evaluation reduces in that order, and equal-load ties
//! break toward the smallest `(N1, M1)` (homogeneous) or the
//! lexicographically smallest placement encoding (heterogeneous).

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{self, AnalysisError, HybridEvaluator};
use crate::model::{
    HeteroPlacement, HybridPlacement, LoadReport, ModelError, Placement, PopularityMatrix,
    SbsGroup, SystemConfig,
};
use crate::simulator::{self, SimulatorError};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("search requires a homogeneous popularity profile")]
    RequiresHomogeneous,
    #[error("instance too large for exact search: {0}")]
    InstanceTooLarge(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Analysis(AnalysisError),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
}

impl From<AnalysisError> for OptimizeError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(ModelError::RequiresHomogeneous) => {
                OptimizeError::RequiresHomogeneous
            }
            other => OptimizeError::Analysis(other),
        }
    }
}

/// One evaluated candidate, kept when a search is asked to log.
#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub placement: Placement,
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
}

/// Outcome of a search: the best placement found, its load report, and how
/// many candidates were evaluated.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub placement: Placement,
    pub report: LoadReport,
    pub candidates: u64,
    /// True when an opt-in pruning heuristic restricted the candidate set.
    pub pruned: bool,
    pub log: Option<Vec<CandidateRecord>>,
}

impl SearchResult {
    pub fn hybrid_placement(&self) -> Option<HybridPlacement> {
        match &self.placement {
            Placement::Hybrid(p) => Some(*p),
            Placement::Hetero(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Homogeneous searches
// ---------------------------------------------------------------------------

/// Feasible `(M1, N1)` pairs in search order: the pure-uncoded corner first,
/// then ascending `N1`, ascending `M1`, keeping only integer replication
/// degrees.
pub(crate) fn hybrid_candidates(config: &SystemConfig) -> Vec<HybridPlacement> {
    let (k, n, m) = (config.sbs_count(), config.library_size(), config.cache_capacity());
    let mut out = vec![HybridPlacement::new(m, m)];
    for n1 in m + 1..=n {
        for m1 in 0..m {
            let d = n1 - m1;
            if (k * (m - m1)) % d == 0 {
                out.push(HybridPlacement::new(m1, n1));
            }
        }
    }
    out
}

fn argmin_first<'a, I: Iterator<Item = &'a LoadReport>>(reports: I) -> usize {
    let mut best = 0;
    let mut best_r = f64::INFINITY;
    for (i, rep) in reports.enumerate() {
        if rep.r < best_r {
            best_r = rep.r;
            best = i;
        }
    }
    best
}

fn search_hybrid_set(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    candidates: Vec<HybridPlacement>,
    keep_log: bool,
) -> Result<SearchResult, OptimizeError> {
    let eval = HybridEvaluator::new(config, pop)?;
    let reports: Vec<LoadReport> =
        candidates.par_iter().map(|p| eval.eval(p.m1, p.n1)).collect();
    let best = argmin_first(reports.iter());
    let log = keep_log.then(|| {
        candidates
            .iter()
            .zip(&reports)
            .map(|(p, rep)| CandidateRecord {
                placement: Placement::Hybrid(*p),
                r1: rep.r1,
                r2: rep.r2,
                r: rep.r,
            })
            .collect()
    });
    Ok(SearchResult {
        placement: Placement::Hybrid(candidates[best]),
        report: reports[best].clone(),
        candidates: candidates.len() as u64,
        pruned: false,
        log,
    })
}

/// Exhaustive search over every feasible three-group partition `(M1, N1)`.
pub fn optimize_hybrid(
    config: &SystemConfig,
    pop: &PopularityMatrix,
) -> Result<SearchResult, OptimizeError> {
    optimize_hybrid_with(config, pop, false)
}

/// [`optimize_hybrid`] with an optional per-candidate log.
pub fn optimize_hybrid_with(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    keep_log: bool,
) -> Result<SearchResult, OptimizeError> {
    search_hybrid_set(config, pop, hybrid_candidates(config), keep_log)
}

/// How the pure-coded search scores its candidates.
#[derive(Debug, Clone, Copy)]
pub enum CodedEval {
    /// Closed-form expected load. The distinct-request approximation can
    /// overestimate coded load under very skewed popularity with no fully
    /// cached head, so a refined mode exists.
    Analytic,
    /// Score candidates by Monte Carlo mean load with common random numbers.
    SimulationRefined { slots: usize, seed: u64 },
}

fn pure_coded_candidates(config: &SystemConfig) -> Vec<HybridPlacement> {
    let (k, n, m) = (config.sbs_count(), config.library_size(), config.cache_capacity());
    let mut out: Vec<HybridPlacement> = (m + 1..=n)
        .filter(|&n1| (k * m) % n1 == 0 && (k * m) / n1 >= 1)
        .map(|n1| HybridPlacement::new(0, n1))
        .collect();
    if out.is_empty() {
        // No coded partition admits an integer replication degree (for
        // instance M = 0); the empty-coded-band corner is all that is left.
        out.push(HybridPlacement::new(m, m));
    }
    out
}

/// Two-group baseline: nothing cached fully (`M1 = 0`), the `N1` most popular
/// contents coded, the rest uncached.
pub fn optimize_pure_coded(
    config: &SystemConfig,
    pop: &PopularityMatrix,
) -> Result<SearchResult, OptimizeError> {
    optimize_pure_coded_with(config, pop, CodedEval::Analytic)
}

/// [`optimize_pure_coded`] with a selectable candidate-scoring mode.
pub fn optimize_pure_coded_with(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    eval_mode: CodedEval,
) -> Result<SearchResult, OptimizeError> {
    let candidates = pure_coded_candidates(config);
    match eval_mode {
        CodedEval::Analytic => search_hybrid_set(config, pop, candidates, false),
        CodedEval::SimulationRefined { slots, seed } => {
            if !pop.is_homogeneous() {
                return Err(OptimizeError::RequiresHomogeneous);
            }
            let eval = HybridEvaluator::new(config, pop)?;
            // Same seed per candidate: common random numbers make the
            // comparison a paired one and keep the pick deterministic.
            let scores: Vec<f64> = candidates
                .par_iter()
                .map(|p| {
                    let placement = Placement::Hybrid(*p);
                    simulator::simulate(config, pop, &placement, slots, seed)
                        .map(|rep| rep.mean_r)
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            let mut best = 0;
            let mut best_score = f64::INFINITY;
            for (i, &s) in scores.iter().enumerate() {
                if s < best_score {
                    best_score = s;
                    best = i;
                }
            }
            Ok(SearchResult {
                placement: Placement::Hybrid(candidates[best]),
                report: eval.eval(candidates[best].m1, candidates[best].n1),
                candidates: candidates.len() as u64,
                pruned: false,
                log: None,
            })
        }
    }
}

/// Pure uncoded baseline. Homogeneous profiles cache the `M` most popular
/// contents everywhere; SBS-dependent profiles get an exact multicast-aware
/// assignment of per-SBS uncoded lists (tiny instances only).
pub fn optimize_pure_uncoded(
    config: &SystemConfig,
    pop: &PopularityMatrix,
) -> Result<SearchResult, OptimizeError> {
    if pop.is_homogeneous() {
        let m = config.cache_capacity();
        let eval = HybridEvaluator::new(config, pop)?;
        return Ok(SearchResult {
            placement: Placement::Hybrid(HybridPlacement::new(m, m)),
            report: eval.eval(m, m),
            candidates: 1,
            pruned: false,
            log: None,
        });
    }
    let (k, n, m) = (config.sbs_count(), config.library_size(), config.cache_capacity());
    if n > 12 {
        return Err(OptimizeError::InstanceTooLarge(format!(
            "exact per-SBS uncoded search supports N <= 12, got N = {n}"
        )));
    }
    if k > 5 {
        return Err(OptimizeError::InstanceTooLarge(format!(
            "exact per-SBS uncoded search supports K <= 5, got K = {k}"
        )));
    }
    let covered = vec![false; n * k];
    let (_, uncoded) = optimal_uncoded_lists(config, pop, &covered, &vec![m; k])
        .ok_or_else(|| OptimizeError::Invalid("uncoded budgets are infeasible".into()))?;
    let placement = HeteroPlacement { groups: vec![], uncoded };
    let report = analysis::total_load(config, pop, &Placement::Hetero(placement.clone()))?;
    Ok(SearchResult {
        placement: Placement::Hetero(placement),
        report,
        candidates: 1,
        pruned: false,
        log: None,
    })
}

// ---------------------------------------------------------------------------
// Exact per-SBS uncoded assignment
// ---------------------------------------------------------------------------

/// Exact minimizer of the uncoded broadcast load over all per-SBS uncoded
/// lists `Y` with fixed budgets (`sum_n Y[n][c] = budgets[c]`), given which
/// `(content, SBS)` pairs the coded groups already cover.
///
/// Contents contribute independent cost terms coupled only through the
/// budgets, so a dynamic program over contents with a remaining-budget-vector
/// state is an exact, lossless reorganization of the full enumeration. The
/// backtracking pass picks the lexicographically smallest minimizer (contents
/// in ascending order, each choosing the smallest SBS bitmask).
///
/// Returns `(uncoded load, per-SBS sorted content lists)`.
fn optimal_uncoded_lists(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    coded_covered: &[bool],
    budgets: &[usize],
) -> Option<(f64, Vec<Vec<usize>>)> {
    let k = config.sbs_count();
    let n = config.library_size();
    debug_assert_eq!(coded_covered.len(), n * k);
    if budgets.iter().any(|&b| b > n) {
        return None;
    }

    // Mixed-radix state over remaining budgets.
    let mut stride = vec![1usize; k];
    let mut states = 1usize;
    for c in 0..k {
        stride[c] = states;
        states *= budgets[c] + 1;
    }
    let start: usize = (0..k).map(|c| budgets[c] * stride[c]).sum();

    // cost[n][mask]: broadcast probability of content n if `mask` SBSs cache
    // it uncoded (on top of the fixed coded coverage).
    let masks = 1usize << k;
    let mut cost = vec![0.0f64; n * masks];
    for content in 0..n {
        for mask in 0..masks {
            let mut none = 1.0;
            for c in 0..k {
                let covered = coded_covered[content * k + c] || mask >> c & 1 == 1;
                let p = if covered { 0.0 } else { pop.prob(content, c) };
                none *= (1.0 - p).powi(config.users()[c] as i32);
            }
            cost[content * masks + mask] = 1.0 - none;
        }
    }

    // dp[layer][state]: minimal load from content `layer` on, with `state`
    // budget left to spend exactly.
    let mut dp = vec![vec![f64::INFINITY; states]; n + 1];
    dp[n][0] = 0.0;
    for content in (0..n).rev() {
        for s in 0..states {
            let mut best = f64::INFINITY;
            'mask: for mask in 0..masks {
                let mut next = s;
                for c in 0..k {
                    if mask >> c & 1 == 1 {
                        if (next / stride[c]).is_multiple_of(budgets[c] + 1) {
                            continue 'mask;
                        }
                        next -= stride[c];
                    }
                }
                let v = cost[content * masks + mask] + dp[content + 1][next];
                if v < best {
                    best = v;
                }
            }
            dp[content][s] = best;
        }
    }
    if !dp[0][start].is_finite() {
        return None;
    }

    let mut lists = vec![Vec::new(); k];
    let mut s = start;
    for content in 0..n {
        'pick: for mask in 0..masks {
            let mut next = s;
            for c in 0..k {
                if mask >> c & 1 == 1 {
                    if (next / stride[c]).is_multiple_of(budgets[c] + 1) {
                        continue 'pick;
                    }
                    next -= stride[c];
                }
            }
            if cost[content * masks + mask] + dp[content + 1][next] == dp[content][s] {
                for (c, list) in lists.iter_mut().enumerate() {
                    if mask >> c & 1 == 1 {
                        list.push(content);
                    }
                }
                s = next;
                break;
            }
        }
    }
    Some((dp[0][start], lists))
}

// ---------------------------------------------------------------------------
// Cover enumeration
// ---------------------------------------------------------------------------

/// All SBS subsets of size at least 2, as bitmasks in ascending order; the
/// building blocks of covers. There are `2^K - K - 1` of them.
pub fn candidate_groups(k: usize) -> Vec<u32> {
    (0u32..1 << k).filter(|m| m.count_ones() >= 2).collect()
}

/// Every cover assembled from at most `max_groups` candidate groups: distinct
/// groups of size >= 2 whose union is all `K` SBSs. Exact only at small `K`.
pub fn enumerate_covers(k: usize, max_groups: usize) -> Result<Vec<Vec<u32>>, OptimizeError> {
    if k > 6 {
        return Err(OptimizeError::InstanceTooLarge(format!(
            "cover enumeration is exact only for K <= 6, got K = {k}"
        )));
    }
    if k < 2 {
        return Err(OptimizeError::Invalid(
            "covers need at least 2 SBSs to form a group".into(),
        ));
    }
    let full: u32 = (1 << k) - 1;
    let groups = candidate_groups(k);
    let mut covers = Vec::new();
    let mut chosen = Vec::new();
    fn rec(
        groups: &[u32],
        start: usize,
        chosen: &mut Vec<u32>,
        union: u32,
        full: u32,
        left: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        if union == full && !chosen.is_empty() {
            out.push(chosen.clone());
        }
        if left == 0 {
            return;
        }
        for i in start..groups.len() {
            chosen.push(groups[i]);
            rec(groups, i + 1, chosen, union | groups[i], full, left - 1, out);
            chosen.pop();
        }
    }
    rec(&groups, 0, &mut chosen, 0, full, max_groups, &mut covers);
    Ok(covers)
}

// ---------------------------------------------------------------------------
// Heterogeneous search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct HeteroSearchOptions {
    /// Cap on groups per cover. Defaults to `min(3, max(1, K*M/2))`; the
    /// budget constraint alone caps useful covers at `K*M/2` groups.
    pub max_groups: Option<usize>,
    /// Restrict the cover to the single all-SBS group.
    pub single_group: bool,
    /// Opt-in pruning: per group, only the `N_g` contents with the largest
    /// group-aggregated popularity `sum_c Z_c * p[n][c]` are considered,
    /// instead of all `C(N, N_g)` subsets. Flagged in the result.
    pub prune_group_contents: bool,
    pub keep_log: bool,
}


/// Exhaustive grouped search with default options.
pub fn optimize_hetero(
    config: &SystemConfig,
    pop: &PopularityMatrix,
) -> Result<SearchResult, OptimizeError> {
    optimize_hetero_with(config, pop, &HeteroSearchOptions::default())
}

/// Exhaustive search over covers, per-group capacities and coded content
/// sets, and per-SBS uncoded lists. Refuses instances past the exact-mode
/// bounds `K <= 5, N <= 8, M <= 4`.
pub fn optimize_hetero_with(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    opts: &HeteroSearchOptions,
) -> Result<SearchResult, OptimizeError> {
    hetero_search(config, pop, opts, false)
}

/// Pure-coded baseline for SBS-dependent popularity: the same grouped search
/// with every per-SBS uncoded budget pinned to zero.
pub fn optimize_pure_coded_hetero(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    opts: &HeteroSearchOptions,
) -> Result<SearchResult, OptimizeError> {
    hetero_search(config, pop, opts, true)
}

fn hetero_bounds_check(config: &SystemConfig) -> Result<(), OptimizeError> {
    let (k, n, m) = (config.sbs_count(), config.library_size(), config.cache_capacity());
    if k > 5 {
        return Err(OptimizeError::InstanceTooLarge(format!(
            "grouped search supports K <= 5, got K = {k}"
        )));
    }
    if n > 8 {
        return Err(OptimizeError::InstanceTooLarge(format!(
            "grouped search supports N <= 8, got N = {n}"
        )));
    }
    if m > 4 {
        return Err(OptimizeError::InstanceTooLarge(format!(
            "grouped search supports M <= 4, got M = {m}"
        )));
    }
    Ok(())
}

/// Canonical integer encoding used for deterministic tie-breaking.
fn encode_placement(p: &HeteroPlacement, k: usize) -> Vec<u64> {
    let mut code = vec![p.groups.len() as u64];
    for g in &p.groups {
        let members: u64 = g.members.iter().fold(0, |m, &c| m | 1 << c);
        let contents: u64 = g.contents.iter().fold(0, |m, &x| m | 1 << x);
        code.push(members);
        code.push(g.coded_capacity as u64);
        code.push(contents);
    }
    for c in 0..k {
        code.push(p.uncoded[c].iter().fold(0, |m, &x| m | 1 << x));
    }
    code
}

struct HeteroBest {
    r: f64,
    placement: HeteroPlacement,
    code: Vec<u64>,
}

fn consider(
    best: &mut Option<HeteroBest>,
    r: f64,
    placement: HeteroPlacement,
    k: usize,
    log: &mut Option<Vec<CandidateRecord>>,
    r1: f64,
    r2: f64,
) {
    if let Some(log) = log {
        log.push(CandidateRecord {
            placement: Placement::Hetero(placement.clone()),
            r1,
            r2,
            r,
        });
    }
    let better = match best {
        None => true,
        Some(b) => r < b.r || (r == b.r && encode_placement(&placement, k) < b.code),
    };
    if better {
        let code = encode_placement(&placement, k);
        *best = Some(HeteroBest { r, placement, code });
    }
}

fn hetero_search(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    opts: &HeteroSearchOptions,
    forbid_uncoded: bool,
) -> Result<SearchResult, OptimizeError> {
    hetero_bounds_check(config)?;
    let (k, n, m) = (config.sbs_count(), config.library_size(), config.cache_capacity());
    if k < 2 {
        return Err(OptimizeError::Invalid("grouped search needs K >= 2".into()));
    }
    let max_groups = opts
        .max_groups
        .unwrap_or_else(|| 3.min((k * m / 2).max(1)));
    let covers = if opts.single_group {
        vec![vec![(1u32 << k) - 1]]
    } else {
        enumerate_covers(k, max_groups)?
    };

    let mut best: Option<HeteroBest> = None;
    let mut log = opts.keep_log.then(Vec::new);
    let mut candidates = 0u64;
    let mut group_load_memo: HashMap<(u32, usize, u32), f64> = HashMap::new();

    // The groupless corner: the whole budget cached uncoded, exactly like the
    // homogeneous N1 = M corner of the partition search.
    if !forbid_uncoded {
        let covered = vec![false; n * k];
        if let Some((r2, uncoded)) = optimal_uncoded_lists(config, pop, &covered, &vec![m; k]) {
            candidates += 1;
            consider(
                &mut best,
                r2,
                HeteroPlacement { groups: vec![], uncoded },
                k,
                &mut log,
                0.0,
                r2,
            );
        }
    }

    for cover in &covers {
        // Each group costs its members at least one content of cache.
        let mut memberships = vec![0usize; k];
        for &gmask in cover {
            for (c, slot) in memberships.iter_mut().enumerate() {
                if gmask >> c & 1 == 1 {
                    *slot += 1;
                }
            }
        }
        if memberships.iter().any(|&cnt| cnt > m) {
            continue;
        }

        let member_lists: Vec<Vec<usize>> = cover
            .iter()
            .map(|&gmask| (0..k).filter(|&c| gmask >> c & 1 == 1).collect())
            .collect();

        // Odometer over per-group capacities, each in 1..=M.
        let mut mg = vec![1usize; cover.len()];
        'capacities: loop {
            let mut spent = vec![0usize; k];
            for (gi, &gmask) in cover.iter().enumerate() {
                for (c, slot) in spent.iter_mut().enumerate() {
                    if gmask >> c & 1 == 1 {
                        *slot += mg[gi];
                    }
                }
            }
            let feasible = spent.iter().all(|&s| s <= m)
                && (!forbid_uncoded || spent.iter().all(|&s| s == m));
            if feasible {
                let budgets: Vec<usize> = spent.iter().map(|&s| m - s).collect();
                // Per group: feasible (contents mask) choices.
                let group_options: Vec<Vec<u32>> = cover
                    .iter()
                    .enumerate()
                    .map(|(gi, _)| {
                        group_content_options(
                            n,
                            member_lists[gi].len(),
                            mg[gi],
                            &member_lists[gi],
                            config,
                            pop,
                            opts.prune_group_contents,
                        )
                    })
                    .collect();
                if group_options.iter().all(|o| !o.is_empty()) {
                    let mut pick = vec![0usize; cover.len()];
                    'contents: loop {
                        let groups: Vec<SbsGroup> = (0..cover.len())
                            .map(|gi| SbsGroup {
                                members: member_lists[gi].clone(),
                                coded_capacity: mg[gi],
                                contents: mask_to_list(group_options[gi][pick[gi]]),
                            })
                            .collect();
                        let mut r1 = 0.0;
                        for (gi, group) in groups.iter().enumerate() {
                            let key = (cover[gi], mg[gi], group_options[gi][pick[gi]]);
                            let load = *group_load_memo.entry(key).or_insert_with(|| {
                                analysis::group_coded_load(config, pop, group).0
                            });
                            r1 += load;
                        }
                        let mut covered = vec![false; n * k];
                        for group in &groups {
                            for &c in &group.members {
                                for &x in &group.contents {
                                    covered[x * k + c] = true;
                                }
                            }
                        }
                        if let Some((r2, uncoded)) =
                            optimal_uncoded_lists(config, pop, &covered, &budgets)
                        {
                            candidates += 1;
                            consider(
                                &mut best,
                                r1 + r2,
                                HeteroPlacement { groups, uncoded },
                                k,
                                &mut log,
                                r1,
                                r2,
                            );
                        }

                        // Advance the content-choice odometer.
                        let mut pos = 0;
                        loop {
                            if pos == cover.len() {
                                break 'contents;
                            }
                            pick[pos] += 1;
                            if pick[pos] < group_options[pos].len() {
                                break;
                            }
                            pick[pos] = 0;
                            pos += 1;
                        }
                    }
                }
            }

            // Advance the capacity odometer.
            let mut pos = 0;
            loop {
                if pos == cover.len() {
                    break 'capacities;
                }
                mg[pos] += 1;
                if mg[pos] <= m {
                    break;
                }
                mg[pos] = 1;
                pos += 1;
            }
        }
    }

    let best = best.ok_or_else(|| {
        OptimizeError::Invalid("no feasible grouped placement for this instance".into())
    })?;
    let placement = Placement::Hetero(best.placement);
    let report = analysis::total_load(config, pop, &placement)?;
    Ok(SearchResult {
        placement,
        report,
        candidates,
        pruned: opts.prune_group_contents,
        log,
    })
}

fn mask_to_list(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Content subsets a group may code over: sizes with an integer replication
/// degree, either all `C(N, N_g)` subsets or (opt-in) the top contents by
/// group-aggregated popularity.
fn group_content_options(
    n: usize,
    kg: usize,
    mg: usize,
    members: &[usize],
    config: &SystemConfig,
    pop: &PopularityMatrix,
    prune: bool,
) -> Vec<u32> {
    let mut out = Vec::new();
    for ng in mg + 1..=n.min(kg * mg) {
        if !(kg * mg).is_multiple_of(ng) {
            continue;
        }
        if prune {
            let mut scored: Vec<(f64, usize)> = (0..n)
                .map(|content| {
                    let w: f64 = members
                        .iter()
                        .map(|&c| config.users()[c] as f64 * pop.prob(content, c))
                        .sum();
                    (w, content)
                })
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let mask = scored[..ng].iter().fold(0u32, |m, &(_, c)| m | 1 << c);
            out.push(mask);
        } else {
            subset_masks(n, ng, &mut out);
        }
    }
    out
}

/// Append every size-`size` subset of `0..n` as a bitmask, ascending.
fn subset_masks(n: usize, size: usize, out: &mut Vec<u32>) {
    if size > n {
        return;
    }
    let mut mask: u32 = (1 << size) - 1;
    let limit: u32 = 1 << n;
    while mask < limit {
        out.push(mask);
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r >= limit || r == 0 {
            break;
        }
        mask = r | (((mask ^ r) / c) >> 2);
    }
}
