//! Monte Carlo delivery-phase simulation.
//!
//! Each slot samples one demand matrix, classifies every request as a local
//! hit, a coded-queue entry (deduplicated per SBS, per group), or an uncoded
//! request (deduplicated globally), then counts what the shared link carries:
//! coded steps pay the subset-transmission ratio for their occupancy, uncoded
//! contents pay one broadcast each. Loads are counted in units of content
//! size (one coded message is `1/C(K,T)` of a content); bits are only
//! materialized inside [`codec_verify`], which runs the actual subfile-XOR
//! scheme on synthetic payloads at tiny scale.
//!
//! Randomness: slot `i` draws from `ChaCha8` seeded with a per-slot SplitMix
//! substream of the run seed, so growing the slot count never reshuffles
//! earlier slots and parallel slot execution reproduces the serial report
//! bit-for-bit.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::math::{choose, step_ratio_table};
use crate::model::{
    validate, DemandMatrix, ModelError, Placement, PopularityMatrix, SystemConfig,
};

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("malformed demand: {0}")]
    MalformedDemand(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// Delivery plan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Route {
    Local,
    Coded(usize),
    Uncoded,
}

struct PlanGroup {
    /// `member_slot[c] = Some(slot)` if SBS `c` is this group's `slot`-th member.
    member_slot: Vec<Option<usize>>,
    member_count: usize,
    ratio: Vec<f64>,
    clamp: f64,
}

enum PlanKind {
    Hybrid {
        /// Popularity rank of each content (0 = most popular).
        rank: Vec<usize>,
        m1: usize,
        n1: usize,
        coded: Option<(Vec<f64>, f64)>, // (ratio table, clamp)
    },
    Hetero {
        /// Routing decision per `(content, sbs)`, row-major by content.
        route: Vec<Route>,
        groups: Vec<PlanGroup>,
    },
}

/// A placement compiled against a configuration for fast per-slot execution:
/// routing decisions per content, plus transmission-ratio tables per group.
pub struct DeliveryPlan {
    k: usize,
    kind: PlanKind,
}

impl DeliveryPlan {
    pub fn new(
        config: &SystemConfig,
        pop: &PopularityMatrix,
        placement: &Placement,
    ) -> Result<Self, SimulatorError> {
        let violations = validate(config, pop, placement);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(SimulatorError::InvalidPlacement(msgs.join("; ")));
        }
        let k = config.sbs_count();
        let kind = match placement {
            Placement::Hybrid(p) => {
                let sorted = pop.sorted_view()?;
                let rank = (0..config.library_size()).map(|c| sorted.rank_of(c)).collect();
                let coded = p.replication_degree(config).map(|t| {
                    (step_ratio_table(k, t), (p.n1 - config.cache_capacity()) as f64)
                });
                PlanKind::Hybrid { rank, m1: p.m1, n1: p.n1, coded }
            }
            Placement::Hetero(p) => {
                let n = config.library_size();
                let mut route = vec![Route::Uncoded; n * k];
                for content in 0..n {
                    for c in 0..k {
                        route[content * k + c] = if p.is_uncoded_cached(content, c) {
                            Route::Local
                        } else if let Some(g) = p.coded_group_for(content, c) {
                            Route::Coded(g)
                        } else {
                            Route::Uncoded
                        };
                    }
                }
                let groups = p
                    .groups
                    .iter()
                    .map(|g| {
                        let mut member_slot = vec![None; k];
                        for (slot, &c) in g.members.iter().enumerate() {
                            member_slot[c] = Some(slot);
                        }
                        let tg = g.replication_degree().expect("validated placement");
                        PlanGroup {
                            member_slot,
                            member_count: g.sbs_count(),
                            ratio: step_ratio_table(g.sbs_count(), tg),
                            clamp: (g.content_count() - g.coded_capacity) as f64,
                        }
                    })
                    .collect();
                PlanKind::Hetero { route, groups }
            }
        };
        Ok(Self { k, kind })
    }
}

// ---------------------------------------------------------------------------
// Slot execution
// ---------------------------------------------------------------------------

/// What one simulated slot did.
#[derive(Debug, Clone)]
pub struct SlotOutcome {
    pub demands: DemandMatrix,
    /// Distinct coded-request counts: one inner vector per group (a single
    /// pseudo-group for hybrid placements), indexed by group member order.
    pub queue_lengths: Vec<Vec<usize>>,
    pub coded_steps: usize,
    /// Coded load in units of content size.
    pub coded_load: f64,
    pub uncoded_broadcasts: usize,
    pub local_hits: usize,
}

impl SlotOutcome {
    pub fn total_load(&self) -> f64 {
        self.coded_load + self.uncoded_broadcasts as f64
    }
}

/// Classify one slot's demands and count the shared-link load they cause.
pub fn run_slot(demands: DemandMatrix, plan: &DeliveryPlan) -> SlotOutcome {
    match &plan.kind {
        PlanKind::Hybrid { rank, m1, n1, coded } => {
            let mut queues: Vec<Vec<usize>> = vec![Vec::new(); plan.k];
            let mut uncoded: Vec<usize> = Vec::new();
            let mut local_hits = 0usize;
            for (c, dvec) in demands.per_sbs.iter().enumerate() {
                for &d in dvec {
                    let r = rank[d];
                    if r < *m1 {
                        local_hits += 1;
                    } else if r < *n1 {
                        if !queues[c].contains(&d) {
                            queues[c].push(d);
                        }
                    } else if !uncoded.contains(&d) {
                        uncoded.push(d);
                    }
                }
            }
            let lengths: Vec<usize> = queues.iter().map(Vec::len).collect();
            let (coded_load, coded_steps) =
                drain_queues(&lengths, coded.as_ref().map(|(r, c)| (r.as_slice(), *c)));
            SlotOutcome {
                demands,
                queue_lengths: vec![lengths],
                coded_steps,
                coded_load,
                uncoded_broadcasts: uncoded.len(),
                local_hits,
            }
        }
        PlanKind::Hetero { route, groups } => {
            let mut queues: Vec<Vec<Vec<usize>>> = groups
                .iter()
                .map(|g| vec![Vec::new(); g.member_count])
                .collect();
            let mut uncoded: Vec<usize> = Vec::new();
            let mut local_hits = 0usize;
            for (c, dvec) in demands.per_sbs.iter().enumerate() {
                for &d in dvec {
                    match route[d * plan.k + c] {
                        Route::Local => local_hits += 1,
                        Route::Coded(g) => {
                            let slot = groups[g].member_slot[c].expect("routed to non-member");
                            if !queues[g][slot].contains(&d) {
                                queues[g][slot].push(d);
                            }
                        }
                        Route::Uncoded => {
                            if !uncoded.contains(&d) {
                                uncoded.push(d);
                            }
                        }
                    }
                }
            }
            let mut coded_load = 0.0;
            let mut coded_steps = 0usize;
            let mut queue_lengths = Vec::with_capacity(groups.len());
            for (g, group) in groups.iter().enumerate() {
                let lengths: Vec<usize> = queues[g].iter().map(Vec::len).collect();
                let (load, steps) =
                    drain_queues(&lengths, Some((group.ratio.as_slice(), group.clamp)));
                coded_load += load;
                coded_steps = coded_steps.max(steps);
                queue_lengths.push(lengths);
            }
            SlotOutcome {
                demands,
                queue_lengths,
                coded_steps,
                coded_load,
                uncoded_broadcasts: uncoded.len(),
                local_hits,
            }
        }
    }
}

fn drain_queues(lengths: &[usize], coded: Option<(&[f64], f64)>) -> (f64, usize) {
    let steps = lengths.iter().copied().max().unwrap_or(0);
    let Some((ratio, clamp)) = coded else {
        debug_assert_eq!(steps, 0, "demands routed to a placement without a coded band");
        return (0.0, 0);
    };
    let mut load = 0.0;
    for i in 1..=steps {
        let occupied = lengths.iter().filter(|&&l| l >= i).count();
        load += ratio[occupied].min(clamp);
    }
    (load, steps)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct Sampler {
    /// Per SBS, the inclusive cumulative distribution over contents.
    cum: Vec<Vec<f64>>,
}

impl Sampler {
    fn new(pop: &PopularityMatrix) -> Self {
        let cum = (0..pop.sbs_count())
            .map(|c| {
                let mut acc = 0.0;
                pop.column(c)
                    .iter()
                    .map(|&p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Self { cum }
    }

    fn sample(&self, config: &SystemConfig, rng: &mut ChaCha8Rng) -> DemandMatrix {
        let per_sbs = config
            .users()
            .iter()
            .enumerate()
            .map(|(c, &zc)| {
                let cum = &self.cum[c];
                (0..zc)
                    .map(|_| {
                        let u: f64 = rng.gen();
                        cum.partition_point(|&x| x <= u).min(cum.len() - 1)
                    })
                    .collect()
            })
            .collect();
        DemandMatrix { per_sbs }
    }
}

/// Per-slot substream seed: depends only on `(seed, slot)`, so extending a
/// run re-draws nothing.
pub fn substream_seed(seed: u64, slot: u64) -> u64 {
    let mut x = seed ^ slot.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Draw one slot's demands: `Z_c` i.i.d. content indices per SBS, from that
/// SBS's popularity column. Identical seeds reproduce identical demands.
pub fn sample_demands(pop: &PopularityMatrix, config: &SystemConfig, seed: u64) -> DemandMatrix {
    let sampler = Sampler::new(pop);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampler.sample(config, &mut rng)
}

// ---------------------------------------------------------------------------
// Simulation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub slot: usize,
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
    pub steps: usize,
    pub local_hits: usize,
}

/// Slot-averaged loads with standard errors, in units of content size.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub slots: usize,
    pub mean_r1: f64,
    pub se_r1: f64,
    pub mean_r2: f64,
    pub se_r2: f64,
    pub mean_r: f64,
    pub se_r: f64,
    pub trace: Option<Vec<TraceRow>>,
}

impl SimulationReport {
    /// One CSV row per slot: `slot,r1,r2,r,steps,local_hits`.
    pub fn write_trace_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "slot,r1,r2,r,steps,local_hits")?;
        if let Some(rows) = &self.trace {
            for row in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    row.slot, row.r1, row.r2, row.r, row.steps, row.local_hits
                )?;
            }
        }
        Ok(())
    }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Average [`run_slot`] over `slots` independent slots. Slot outcomes are
/// computed in parallel but reduced in slot order, so the report is identical
/// under any thread count.
pub fn simulate(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
    slots: usize,
    seed: u64,
) -> Result<SimulationReport, SimulatorError> {
    simulate_opts(config, pop, placement, slots, seed, false)
}

/// [`simulate`] with a per-slot trace retained for CSV export.
pub fn simulate_traced(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
    slots: usize,
    seed: u64,
) -> Result<SimulationReport, SimulatorError> {
    simulate_opts(config, pop, placement, slots, seed, true)
}

fn simulate_opts(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
    slots: usize,
    seed: u64,
    keep_trace: bool,
) -> Result<SimulationReport, SimulatorError> {
    if slots < 1 {
        return Err(SimulatorError::Invalid("slot count must be at least 1".into()));
    }
    let plan = DeliveryPlan::new(config, pop, placement)?;
    let sampler = Sampler::new(pop);
    let rows: Vec<TraceRow> = (0..slots)
        .into_par_iter()
        .map(|slot| {
            let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, slot as u64));
            let demands = sampler.sample(config, &mut rng);
            let outcome = run_slot(demands, &plan);
            TraceRow {
                slot,
                r1: outcome.coded_load,
                r2: outcome.uncoded_broadcasts as f64,
                r: outcome.total_load(),
                steps: outcome.coded_steps,
                local_hits: outcome.local_hits,
            }
        })
        .collect();

    let r1s: Vec<f64> = rows.iter().map(|r| r.r1).collect();
    let r2s: Vec<f64> = rows.iter().map(|r| r.r2).collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.r).collect();
    let (mean_r1, se_r1) = mean_se(&r1s);
    let (mean_r2, se_r2) = mean_se(&r2s);
    let (mean_r, se_r) = mean_se(&rs);
    Ok(SimulationReport {
        slots,
        mean_r1,
        se_r1,
        mean_r2,
        se_r2,
        mean_r,
        se_r,
        trace: keep_trace.then_some(rows),
    })
}

// ---------------------------------------------------------------------------
// Subfile-XOR codec check
// ---------------------------------------------------------------------------

/// Result of one codec run: whether every requester reconstructed its content
/// bit-exactly, and the multicast message count against the subset-counting
/// prediction.
#[derive(Debug, Clone, Copy)]
pub struct CodecOutcome {
    pub decoded_ok: bool,
    pub messages: u64,
    pub expected_messages: u64,
}

impl CodecOutcome {
    pub fn passed(&self) -> bool {
        self.decoded_ok && self.messages == self.expected_messages
    }
}

fn subfile_payload(content: u32, subfile: usize) -> u64 {
    // Deterministic synthetic bits, distinct across (content, subfile) pairs.
    let mut x = ((content as u64) << 32) ^ subfile as u64 ^ 0xA076_1D64_78BD_642F;
    x = (x ^ (x >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    x = (x ^ (x >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    x ^ (x >> 33)
}

/// Run the subfile-XOR delivery scheme end to end on synthetic contents.
///
/// Each content splits into `C(K,T)` subfiles indexed by size-`T` SBS
/// subsets; a subfile is cached at exactly its subset's members. One XOR
/// message goes to every size-`T+1` subset containing at least one requester.
/// `demands[c]` lists SBS `c`'s requests; repeats are allowed but a coded
/// queue holding two distinct contents is malformed here (the delivery steps
/// serve queues one distinct content at a time).
pub fn codec_verify(
    k: usize,
    t: usize,
    demands: &[Vec<u32>],
) -> Result<CodecOutcome, SimulatorError> {
    if k > 8 {
        return Err(SimulatorError::InstanceTooLarge(format!(
            "codec check materializes bits; K = {k} > 8"
        )));
    }
    if t < 1 || t > k {
        return Err(SimulatorError::Invalid(format!(
            "replication degree T = {t} must be in 1..=K = {k}"
        )));
    }
    if demands.len() != k {
        return Err(SimulatorError::MalformedDemand(format!(
            "{} demand lists for K = {k} SBSs",
            demands.len()
        )));
    }
    let mut wanted: Vec<Option<u32>> = Vec::with_capacity(k);
    for (c, list) in demands.iter().enumerate() {
        let mut distinct: Vec<u32> = list.clone();
        distinct.sort_unstable();
        distinct.dedup();
        match distinct.len() {
            0 => wanted.push(None),
            1 => wanted.push(Some(distinct[0])),
            _ => {
                return Err(SimulatorError::MalformedDemand(format!(
                    "SBS {c} holds {} distinct coded contents in one step",
                    distinct.len()
                )))
            }
        }
    }

    // Size-T subsets in ascending mask order define the subfile indexing.
    let t_subsets: Vec<u32> =
        (0u32..1 << k).filter(|m| m.count_ones() as usize == t).collect();
    let subfile_index: HashMap<u32, usize> =
        t_subsets.iter().enumerate().map(|(i, &m)| (m, i)).collect();

    let requesters: Vec<usize> = (0..k).filter(|&c| wanted[c].is_some()).collect();
    let req_mask: u32 = requesters.iter().fold(0, |m, &c| m | 1 << c);

    let mut messages: Vec<(u32, u64)> = Vec::new();
    for a in 0u32..1 << k {
        if a.count_ones() as usize != t + 1 || a & req_mask == 0 {
            continue;
        }
        let mut payload = 0u64;
        for c in 0..k {
            if a >> c & 1 == 1 {
                if let Some(content) = wanted[c] {
                    payload ^= subfile_payload(content, subfile_index[&(a ^ (1 << c))]);
                }
            }
        }
        messages.push((a, payload));
    }

    let mut decoded_ok = true;
    for &c in &requesters {
        let content = wanted[c].unwrap();
        let mut recovered: HashMap<u32, u64> = HashMap::new();
        for &(a, payload) in &messages {
            if a >> c & 1 == 0 {
                continue;
            }
            // Peel off every other requester's subfile; all of those subsets
            // contain c and are therefore in c's cache.
            let mut value = payload;
            for other in 0..k {
                if other != c && a >> other & 1 == 1 {
                    if let Some(their_content) = wanted[other] {
                        value ^= subfile_payload(their_content, subfile_index[&(a ^ (1 << other))]);
                    }
                }
            }
            recovered.insert(a ^ (1 << c), value);
        }
        for &s in &t_subsets {
            let expected = subfile_payload(content, subfile_index[&s]);
            let got = if s >> c & 1 == 1 {
                // Cached locally.
                expected
            } else {
                match recovered.get(&s) {
                    Some(&v) => v,
                    None => {
                        decoded_ok = false;
                        continue;
                    }
                }
            };
            if got != expected {
                decoded_ok = false;
            }
        }
    }

    let expected_messages = choose(k as u64, t as u64 + 1)
        - choose((k - requesters.len()) as u64, t as u64 + 1);
    Ok(CodecOutcome { decoded_ok, messages: messages.len() as u64, expected_messages })
}
