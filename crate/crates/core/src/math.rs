//! Small combinatorial helpers shared by the analysis, simulator, and oracle
//! layers.
//!
//! The delivery-load formulas are ratios of binomial coefficients such as
//! `(C(K,T+1) - C(K-k,T+1)) / C(K,T)`. The coefficients themselves overflow
//! 64-bit integers near `K = 60`, so ratios are evaluated as products of
//! factors `<= 1` instead of as quotients of huge integers:
//!
//! ```text
//! C(K,T+1) / C(K,T)   = (K-T) / (T+1)
//! C(K-k,T+1) / C(K,T+1) = prod_{j=0..T} (K-k-j) / (K-j)
//! ```

/// Exact binomial coefficient for small arguments. Returns 0 when `k > n`.
///
/// Intermediate products are held in `u128`; callers stay well below the
/// point where that overflows (the codec and cover enumeration use `n <= 64`).
pub fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc as u64
}

/// `C(K-occupied, T+1) / C(K, T+1)` as a stable product of per-factor ratios.
///
/// This is the fraction of size-`T+1` SBS subsets that contain no occupied
/// queue. Zero when fewer than `T+1` SBSs remain unoccupied.
pub fn empty_subset_fraction(k: usize, t: usize, occupied: usize) -> f64 {
    debug_assert!(occupied <= k);
    if k - occupied < t + 1 {
        return 0.0;
    }
    let mut frac = 1.0;
    for j in 0..=t {
        frac *= (k - occupied - j) as f64 / (k - j) as f64;
    }
    frac
}

/// `(C(K,T+1) - C(K-occupied,T+1)) / C(K,T)`: transmissions actually needed
/// at one coded step with `occupied` non-empty queues, in units of content
/// size. Monotone non-decreasing in `occupied`; `(K-T)/(T+1)` at full
/// occupancy.
pub fn step_transmission_ratio(k: usize, t: usize, occupied: usize) -> f64 {
    debug_assert!(t <= k, "replication degree cannot exceed the SBS count");
    if t >= k {
        // Every subfile is replicated everywhere; nothing needs the link.
        return 0.0;
    }
    let base = (k - t) as f64 / (t + 1) as f64;
    base * (1.0 - empty_subset_fraction(k, t, occupied))
}

/// Transmission ratios for every occupancy `0..=K`, for reuse across delivery
/// steps and placement candidates that share the same `(K, T)`.
pub fn step_ratio_table(k: usize, t: usize) -> Vec<f64> {
    (0..=k).map(|occ| step_transmission_ratio(k, t, occ)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_basics() {
        assert_eq!(choose(0, 0), 1);
        assert_eq!(choose(5, 0), 1);
        assert_eq!(choose(5, 5), 1);
        assert_eq!(choose(5, 2), 10);
        assert_eq!(choose(10, 3), 120);
        assert_eq!(choose(3, 4), 0);
        assert_eq!(choose(60, 30), 118264581564861424);
    }

    #[test]
    fn ratio_matches_exact_coefficients_for_small_k() {
        for k in 1..=12usize {
            for t in 0..=k {
                for occ in 0..=k {
                    let exact = if t >= k {
                        0.0
                    } else {
                        (choose(k as u64, t as u64 + 1) - choose((k - occ) as u64, t as u64 + 1))
                            as f64
                            / choose(k as u64, t as u64) as f64
                    };
                    let got = step_transmission_ratio(k, t, occ);
                    assert!(
                        (got - exact).abs() < 1e-12,
                        "K={k} T={t} occ={occ}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn ratio_is_stable_for_large_k() {
        // C(200,101) overflows u64 by ~40 orders of magnitude; the product
        // form must still give a finite, sane value.
        let v = step_transmission_ratio(200, 100, 37);
        assert!(v.is_finite() && v > 0.0 && v < 200.0);
    }

    #[test]
    fn full_occupancy_reaches_global_gain() {
        for (k, t) in [(3usize, 1usize), (10, 2), (8, 4), (25, 5)] {
            let want = (k - t) as f64 / (t + 1) as f64;
            assert!((step_transmission_ratio(k, t, k) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_occupancy_sends_nothing() {
        for (k, t) in [(3usize, 1usize), (10, 2), (60, 29)] {
            assert_eq!(step_transmission_ratio(k, t, 0), 0.0);
        }
    }
}
