//! Brute-force reference computations for small instances.
//!
//! Everything here enumerates outcome spaces directly instead of reusing the
//! recursions in [`crate::analysis`], so the two routes can be checked against
//! each other in tests. Enumeration blows up exponentially; each operation
//! refuses instances past a fixed size rather than grind forever.

use thiserror::Error;

use crate::model::{DemandMatrix, Placement, PopularityMatrix, SystemConfig};
use crate::simulator::{self, DeliveryPlan};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A distribution obtained by exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pmf: Vec<f64>,
}

impl ExactDistribution {
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, value: usize) -> f64 {
        self.pmf.get(value).copied().unwrap_or(0.0)
    }
}

/// Exact distribution of the distinct-coded-request count after `z` draws.
///
/// `p_coded[i]` is the probability one draw requests coded content `i`; the
/// remaining mass `1 - sum(p_coded)` is anything non-coded. Enumerates all
/// `(len+1)^z` outcome sequences, so it refuses when that exceeds 10^7.
pub fn exact_distinct_distribution(
    p_coded: &[f64],
    z: usize,
) -> Result<ExactDistribution, OracleError> {
    let d = p_coded.len();
    let space = ((d + 1) as f64).powi(z as i32);
    if space > 1e7 {
        return Err(OracleError::InstanceTooLarge(format!(
            "({})^{z} sequences exceed 10^7",
            d + 1
        )));
    }
    let coded_mass: f64 = p_coded.iter().sum();
    if coded_mass > 1.0 + 1e-9 {
        return Err(OracleError::Invalid(format!("coded mass {coded_mass} exceeds 1")));
    }
    let other = (1.0 - coded_mass).max(0.0);
    let mut pmf = vec![0.0; z + 1];
    // Outcome alphabet: 0 = non-coded draw, 1..=d = coded content index + 1.
    let mut seq = vec![0usize; z];
    loop {
        let mut weight = 1.0;
        let mut seen = vec![false; d];
        for &s in &seq {
            weight *= if s == 0 { other } else { p_coded[s - 1] };
        }
        if weight > 0.0 {
            let mut distinct = 0;
            for &s in &seq {
                if s > 0 && !seen[s - 1] {
                    seen[s - 1] = true;
                    distinct += 1;
                }
            }
            pmf[distinct] += weight;
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == z {
                return Ok(ExactDistribution { pmf });
            }
            seq[pos] += 1;
            if seq[pos] <= d {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact distribution of how many independent indicators fire, by summing the
/// probability of every occupancy pattern (`2^K` of them; refuses `K > 20`).
pub fn exact_queue_distribution(p: &[f64]) -> Result<ExactDistribution, OracleError> {
    let k = p.len();
    if k > 20 {
        return Err(OracleError::InstanceTooLarge(format!("K = {k} > 20")));
    }
    let mut pmf = vec![0.0; k + 1];
    for pattern in 0u32..(1u32 << k) {
        let mut weight = 1.0;
        let mut count = 0;
        for (c, &pc) in p.iter().enumerate() {
            if pattern >> c & 1 == 1 {
                weight *= pc;
                count += 1;
            } else {
                weight *= 1.0 - pc;
            }
        }
        pmf[count] += weight;
    }
    Ok(ExactDistribution { pmf })
}

/// Exact expected per-slot load of a placement: enumerate every joint demand
/// matrix, weight it by its probability, and run the delivery rules on it.
/// Refuses when the joint demand space exceeds 10^6 outcomes.
pub fn exact_expected_load(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
) -> Result<f64, OracleError> {
    let n = config.library_size();
    let mut space = 1.0f64;
    for &zc in config.users() {
        space *= (n as f64).powi(zc as i32);
        if space > 1e6 {
            return Err(OracleError::InstanceTooLarge(format!(
                "joint demand space exceeds 10^6 outcomes (N = {n}, Z = {:?})",
                config.users()
            )));
        }
    }
    let plan = DeliveryPlan::new(config, pop, placement)
        .map_err(|e| OracleError::Invalid(e.to_string()))?;

    // Flatten all request slots into one odometer over contents.
    let total: usize = config.users().iter().sum();
    let mut flat = vec![0usize; total];
    let mut bounds = Vec::with_capacity(total);
    for (c, &zc) in config.users().iter().enumerate() {
        for _ in 0..zc {
            bounds.push(c);
        }
    }
    let mut expected = 0.0;
    loop {
        let mut weight = 1.0;
        for (slot, &content) in flat.iter().enumerate() {
            weight *= pop.prob(content, bounds[slot]);
        }
        if weight > 0.0 {
            let mut per_sbs: Vec<Vec<usize>> = Vec::with_capacity(config.sbs_count());
            let mut at = 0;
            for &zc in config.users() {
                per_sbs.push(flat[at..at + zc].to_vec());
                at += zc;
            }
            let outcome = simulator::run_slot(DemandMatrix { per_sbs }, &plan);
            expected += weight * outcome.total_load();
        }
        let mut pos = 0;
        loop {
            if pos == total {
                return Ok(expected);
            }
            flat[pos] += 1;
            if flat[pos] < n {
                break;
            }
            flat[pos] = 0;
            pos += 1;
        }
    }
}
