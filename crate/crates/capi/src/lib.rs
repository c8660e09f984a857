//! C ABI for the hybridcache library.
//!
//! Handles are opaque pointers created and destroyed by this crate; every
//! fallible call returns an [`HcStatus`] and reports details through
//! [`hc_last_error`] (thread-local). Scenario-level features (heterogeneous
//! placements, sweeps) are reachable through [`hc_run_scenario`], which takes
//! the same JSON documents as the CLI and hands back the results CSV.
//!
//! The C header is generated into `include/hybridcache.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hybridcache::model::{
    zipf_popularity, HybridPlacement, Placement, PopularityMatrix, SystemConfig,
};
use hybridcache::scenario::{run_scenario, Mode, RunOverrides, Scenario, ScenarioError};
use hybridcache::{analysis, optimizer, simulator};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    HcOk = 0,
    /// A required pointer argument was null.
    HcNullArgument = 1,
    /// Malformed input (bad JSON, bad mode string, non-UTF-8).
    HcParse = 2,
    /// Inputs parsed but violate a model constraint.
    HcValidation = 3,
    /// Instance exceeds an exact-search bound.
    HcTooLarge = 4,
    /// Internal failure (a bug; details in `hc_last_error`).
    HcInternal = 5,
}

/// Expected shared-link loads in units of content size.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HcLoadReport {
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
}

/// Opaque system configuration handle.
pub struct HcSystem(SystemConfig);
/// Opaque popularity-profile handle.
pub struct HcPopularity(PopularityMatrix);
/// Opaque placement handle.
pub struct HcPlacement(Placement);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn fail(status: HcStatus, msg: &str) -> HcStatus {
    set_error(msg);
    status
}

fn scenario_status(e: &ScenarioError) -> HcStatus {
    match e {
        ScenarioError::Parse(_) => HcStatus::HcParse,
        ScenarioError::Validation(_) => HcStatus::HcValidation,
        ScenarioError::TooLarge(_) => HcStatus::HcTooLarge,
        ScenarioError::Io(_) => HcStatus::HcInternal,
    }
}

fn optimize_status(e: &optimizer::OptimizeError) -> HcStatus {
    match e {
        optimizer::OptimizeError::InstanceTooLarge(_) => HcStatus::HcTooLarge,
        _ => HcStatus::HcValidation,
    }
}

fn guarded(f: impl FnOnce() -> HcStatus) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(HcStatus::HcInternal, "internal panic"),
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// Handles
// ---------------------------------------------------------------------------

/// Build a system configuration: `K` SBSs, `N` contents, per-SBS cache
/// capacity `M`, per-SBS user counts `z[0..z_len]`, content size `f` bits.
///
/// # Safety
/// `z` must point to `z_len` readable entries; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_system_new(
    k: usize,
    n: usize,
    m: usize,
    z: *const usize,
    z_len: usize,
    f: f64,
    out: *mut *mut HcSystem,
) -> HcStatus {
    guarded(|| {
        if out.is_null() || (z.is_null() && z_len > 0) {
            return fail(HcStatus::HcNullArgument, "null argument to hc_system_new");
        }
        let z = unsafe { std::slice::from_raw_parts(z, z_len) }.to_vec();
        match SystemConfig::new(k, n, m, z, f) {
            Ok(config) => {
                unsafe { *out = Box::into_raw(Box::new(HcSystem(config))) };
                HcStatus::HcOk
            }
            Err(e) => fail(HcStatus::HcValidation, &e.to_string()),
        }
    })
}

/// # Safety
/// `system` must come from `hc_system_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hc_system_free(system: *mut HcSystem) {
    if !system.is_null() {
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Homogeneous Zipf(`alpha`) popularity over `n` contents for `k` SBSs.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_popularity_zipf(
    n: usize,
    alpha: f64,
    k: usize,
    out: *mut *mut HcPopularity,
) -> HcStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HcStatus::HcNullArgument, "null out pointer");
        }
        match zipf_popularity(n, alpha, k) {
            Ok(p) => {
                unsafe { *out = Box::into_raw(Box::new(HcPopularity(p))) };
                HcStatus::HcOk
            }
            Err(e) => fail(HcStatus::HcValidation, &e.to_string()),
        }
    })
}

/// Popularity from a row-major `n x k` matrix: `rows[content * k + sbs]`.
///
/// # Safety
/// `rows` must point to `n * k` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_popularity_matrix(
    rows: *const f64,
    n: usize,
    k: usize,
    out: *mut *mut HcPopularity,
) -> HcStatus {
    guarded(|| {
        if out.is_null() || rows.is_null() {
            return fail(HcStatus::HcNullArgument, "null argument to hc_popularity_matrix");
        }
        let flat = unsafe { std::slice::from_raw_parts(rows, n * k) };
        let rows: Vec<Vec<f64>> = (0..n).map(|i| flat[i * k..(i + 1) * k].to_vec()).collect();
        match PopularityMatrix::from_rows(&rows) {
            Ok(p) => {
                unsafe { *out = Box::into_raw(Box::new(HcPopularity(p))) };
                HcStatus::HcOk
            }
            Err(e) => fail(HcStatus::HcValidation, &e.to_string()),
        }
    })
}

/// # Safety
/// `pop` must come from a `hc_popularity_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn hc_popularity_free(pop: *mut HcPopularity) {
    if !pop.is_null() {
        drop(unsafe { Box::from_raw(pop) });
    }
}

/// Three-group partition placement: `m1` contents fully cached, ranks
/// `m1..n1` coded, the rest uncached.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_placement_hybrid(
    m1: usize,
    n1: usize,
    out: *mut *mut HcPlacement,
) -> HcStatus {
    guarded(|| {
        if out.is_null() {
            return fail(HcStatus::HcNullArgument, "null out pointer");
        }
        let placement = Placement::Hybrid(HybridPlacement::new(m1, n1));
        unsafe { *out = Box::into_raw(Box::new(HcPlacement(placement))) };
        HcStatus::HcOk
    })
}

/// # Safety
/// `placement` must come from a `hc_placement_*` constructor, freed once.
#[no_mangle]
pub unsafe extern "C" fn hc_placement_free(placement: *mut HcPlacement) {
    if !placement.is_null() {
        drop(unsafe { Box::from_raw(placement) });
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

unsafe fn three<'a>(
    system: *const HcSystem,
    pop: *const HcPopularity,
    placement: *const HcPlacement,
) -> Option<(&'a SystemConfig, &'a PopularityMatrix, &'a Placement)> {
    if system.is_null() || pop.is_null() || placement.is_null() {
        return None;
    }
    unsafe { Some((&(*system).0, &(*pop).0, &(*placement).0)) }
}

/// Closed-form expected load of a placement.
///
/// # Safety
/// All handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_analyze(
    system: *const HcSystem,
    pop: *const HcPopularity,
    placement: *const HcPlacement,
    out: *mut HcLoadReport,
) -> HcStatus {
    guarded(|| {
        let Some((config, pop, placement)) = (unsafe { three(system, pop, placement) }) else {
            return fail(HcStatus::HcNullArgument, "null handle passed to hc_analyze");
        };
        if out.is_null() {
            return fail(HcStatus::HcNullArgument, "null out pointer");
        }
        match analysis::total_load(config, pop, placement) {
            Ok(report) => {
                unsafe { *out = HcLoadReport { r1: report.r1, r2: report.r2, r: report.r } };
                HcStatus::HcOk
            }
            Err(e) => fail(HcStatus::HcValidation, &e.to_string()),
        }
    })
}

/// Monte Carlo mean load (and standard errors) over `slots` delivery slots.
///
/// # Safety
/// All handles must be live; `out_mean` and `out_stderr` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_simulate(
    system: *const HcSystem,
    pop: *const HcPopularity,
    placement: *const HcPlacement,
    slots: usize,
    seed: u64,
    out_mean: *mut HcLoadReport,
    out_stderr: *mut HcLoadReport,
) -> HcStatus {
    guarded(|| {
        let Some((config, pop, placement)) = (unsafe { three(system, pop, placement) }) else {
            return fail(HcStatus::HcNullArgument, "null handle passed to hc_simulate");
        };
        if out_mean.is_null() || out_stderr.is_null() {
            return fail(HcStatus::HcNullArgument, "null out pointer");
        }
        match simulator::simulate(config, pop, placement, slots, seed) {
            Ok(rep) => {
                unsafe {
                    *out_mean = HcLoadReport { r1: rep.mean_r1, r2: rep.mean_r2, r: rep.mean_r };
                    *out_stderr = HcLoadReport { r1: rep.se_r1, r2: rep.se_r2, r: rep.se_r };
                }
                HcStatus::HcOk
            }
            Err(e) => fail(HcStatus::HcValidation, &e.to_string()),
        }
    })
}

type HomogeneousSearch =
    fn(&SystemConfig, &PopularityMatrix) -> Result<optimizer::SearchResult, optimizer::OptimizeError>;

unsafe fn run_search(
    search: HomogeneousSearch,
    system: *const HcSystem,
    pop: *const HcPopularity,
    out_m1: *mut usize,
    out_n1: *mut usize,
    out: *mut HcLoadReport,
) -> HcStatus {
    if system.is_null() || pop.is_null() || out_m1.is_null() || out_n1.is_null() || out.is_null() {
        return fail(HcStatus::HcNullArgument, "null argument to optimize call");
    }
    let (config, pop) = unsafe { (&(*system).0, &(*pop).0) };
    match search(config, pop) {
        Ok(res) => match res.hybrid_placement() {
            Some(p) => {
                unsafe {
                    *out_m1 = p.m1;
                    *out_n1 = p.n1;
                    *out = HcLoadReport { r1: res.report.r1, r2: res.report.r2, r: res.report.r };
                }
                HcStatus::HcOk
            }
            None => fail(HcStatus::HcInternal, "search returned a non-partition placement"),
        },
        Err(e) => fail(optimize_status(&e), &e.to_string()),
    }
}

/// Best three-group partition `(M1, N1)` for a homogeneous profile.
///
/// # Safety
/// Handles must be live; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_optimize_hybrid(
    system: *const HcSystem,
    pop: *const HcPopularity,
    out_m1: *mut usize,
    out_n1: *mut usize,
    out: *mut HcLoadReport,
) -> HcStatus {
    guarded(|| unsafe { run_search(optimizer::optimize_hybrid, system, pop, out_m1, out_n1, out) })
}

/// Best two-group pure-coded partition (`M1` pinned to 0).
///
/// # Safety
/// Handles must be live; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_optimize_pure_coded(
    system: *const HcSystem,
    pop: *const HcPopularity,
    out_m1: *mut usize,
    out_n1: *mut usize,
    out: *mut HcLoadReport,
) -> HcStatus {
    guarded(|| unsafe {
        run_search(optimizer::optimize_pure_coded, system, pop, out_m1, out_n1, out)
    })
}

/// Pure uncoded baseline for a homogeneous profile (caches the `M` most
/// popular contents everywhere).
///
/// # Safety
/// Handles must be live; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hc_optimize_pure_uncoded(
    system: *const HcSystem,
    pop: *const HcPopularity,
    out_m1: *mut usize,
    out_n1: *mut usize,
    out: *mut HcLoadReport,
) -> HcStatus {
    guarded(|| unsafe {
        run_search(optimizer::optimize_pure_uncoded, system, pop, out_m1, out_n1, out)
    })
}

// ---------------------------------------------------------------------------
// Scenario interface
// ---------------------------------------------------------------------------

fn mode_from(mode: &str) -> Option<Mode> {
    match mode {
        "analyze" => Some(Mode::Analyze),
        "simulate" => Some(Mode::Simulate),
        "optimize" => Some(Mode::Optimize),
        "sweep" => Some(Mode::Sweep),
        _ => None,
    }
}

/// Run a JSON scenario (same schema as the CLI) and return the results CSV
/// through `out_csv`. Free the string with [`hc_string_free`].
///
/// # Safety
/// `mode` and `scenario_json` must be NUL-terminated strings; `out_csv` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hc_run_scenario(
    mode: *const c_char,
    scenario_json: *const c_char,
    out_csv: *mut *mut c_char,
) -> HcStatus {
    guarded(|| {
        if mode.is_null() || scenario_json.is_null() || out_csv.is_null() {
            return fail(HcStatus::HcNullArgument, "null argument to hc_run_scenario");
        }
        let Ok(mode_str) = (unsafe { CStr::from_ptr(mode) }).to_str() else {
            return fail(HcStatus::HcParse, "mode is not valid UTF-8");
        };
        let Some(mode) = mode_from(mode_str) else {
            return fail(
                HcStatus::HcParse,
                "mode must be one of analyze, simulate, optimize, sweep",
            );
        };
        let Ok(json) = (unsafe { CStr::from_ptr(scenario_json) }).to_str() else {
            return fail(HcStatus::HcParse, "scenario is not valid UTF-8");
        };
        let scenario = match Scenario::from_json(json) {
            Ok(s) => s,
            Err(e) => return fail(scenario_status(&e), &e.to_string()),
        };
        match run_scenario(mode, &scenario, &RunOverrides::default()) {
            Ok(output) => {
                let cstr = CString::new(output.csv).unwrap_or_default();
                unsafe { *out_csv = cstr.into_raw() };
                HcStatus::HcOk
            }
            Err(e) => fail(scenario_status(&e), &e.to_string()),
        }
    })
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn handle_lifecycle_and_analyze() {
        unsafe {
            let mut system: *mut HcSystem = ptr::null_mut();
            let z = [2usize, 3, 1];
            assert_eq!(
                hc_system_new(3, 20, 4, z.as_ptr(), z.len(), 1.0, &mut system),
                HcStatus::HcOk
            );
            let mut pop: *mut HcPopularity = ptr::null_mut();
            assert_eq!(hc_popularity_zipf(20, 1.0, 3, &mut pop), HcStatus::HcOk);
            let mut placement: *mut HcPlacement = ptr::null_mut();
            assert_eq!(hc_placement_hybrid(1, 10, &mut placement), HcStatus::HcOk);

            let mut report = HcLoadReport::default();
            assert_eq!(hc_analyze(system, pop, placement, &mut report), HcStatus::HcOk);
            let config = SystemConfig::new(3, 20, 4, z.to_vec(), 1.0).unwrap();
            let p = zipf_popularity(20, 1.0, 3).unwrap();
            let want = analysis::total_load(
                &config,
                &p,
                &Placement::Hybrid(HybridPlacement::new(1, 10)),
            )
            .unwrap();
            assert_eq!(report.r, want.r);
            assert_eq!(report.r1 + report.r2, report.r);

            hc_placement_free(placement);
            hc_popularity_free(pop);
            hc_system_free(system);
        }
    }

    #[test]
    fn invalid_placement_reports_validation() {
        unsafe {
            let mut system: *mut HcSystem = ptr::null_mut();
            let z = [1usize; 3];
            assert_eq!(
                hc_system_new(3, 10, 2, z.as_ptr(), z.len(), 1.0, &mut system),
                HcStatus::HcOk
            );
            let mut pop: *mut HcPopularity = ptr::null_mut();
            assert_eq!(hc_popularity_zipf(10, 1.0, 3, &mut pop), HcStatus::HcOk);
            let mut placement: *mut HcPlacement = ptr::null_mut();
            // T = 3*2/4 is fractional.
            assert_eq!(hc_placement_hybrid(0, 4, &mut placement), HcStatus::HcOk);
            let mut report = HcLoadReport::default();
            assert_eq!(
                hc_analyze(system, pop, placement, &mut report),
                HcStatus::HcValidation
            );
            let msg = CStr::from_ptr(hc_last_error()).to_str().unwrap();
            assert!(msg.contains("replication"), "{msg}");
            hc_placement_free(placement);
            hc_popularity_free(pop);
            hc_system_free(system);
        }
    }

    #[test]
    fn optimize_and_simulate_roundtrip() {
        unsafe {
            let mut system: *mut HcSystem = ptr::null_mut();
            let z = [2usize; 4];
            assert_eq!(
                hc_system_new(4, 24, 6, z.as_ptr(), z.len(), 1.0, &mut system),
                HcStatus::HcOk
            );
            let mut pop: *mut HcPopularity = ptr::null_mut();
            assert_eq!(hc_popularity_zipf(24, 1.0, 4, &mut pop), HcStatus::HcOk);

            let (mut m1, mut n1) = (0usize, 0usize);
            let mut report = HcLoadReport::default();
            assert_eq!(
                hc_optimize_hybrid(system, pop, &mut m1, &mut n1, &mut report),
                HcStatus::HcOk
            );
            assert!(m1 <= 6 && (6..=24).contains(&n1));
            assert!(report.r > 0.0);

            let mut placement: *mut HcPlacement = ptr::null_mut();
            assert_eq!(hc_placement_hybrid(m1, n1, &mut placement), HcStatus::HcOk);
            let mut mean = HcLoadReport::default();
            let mut se = HcLoadReport::default();
            assert_eq!(
                hc_simulate(system, pop, placement, 500, 7, &mut mean, &mut se),
                HcStatus::HcOk
            );
            assert!(mean.r > 0.0 && se.r >= 0.0);

            hc_placement_free(placement);
            hc_popularity_free(pop);
            hc_system_free(system);
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut out: *mut HcSystem = ptr::null_mut();
            assert_eq!(
                hc_system_new(2, 4, 1, ptr::null(), 2, 1.0, &mut out),
                HcStatus::HcNullArgument
            );
            let mut report = HcLoadReport::default();
            assert_eq!(
                hc_analyze(ptr::null(), ptr::null(), ptr::null(), &mut report),
                HcStatus::HcNullArgument
            );
        }
    }

    #[test]
    fn scenario_json_roundtrip() {
        unsafe {
            let mode = CString::new("optimize").unwrap();
            let scenario = CString::new(
                r#"{"K": 3, "N": 30, "M": 6, "Z": [2,2,2], "popularity": {"zipf": 1.0}}"#,
            )
            .unwrap();
            let mut csv: *mut c_char = ptr::null_mut();
            assert_eq!(
                hc_run_scenario(mode.as_ptr(), scenario.as_ptr(), &mut csv),
                HcStatus::HcOk
            );
            let text = CStr::from_ptr(csv).to_str().unwrap().to_string();
            hc_string_free(csv);
            assert!(text.starts_with("mode,scheme,K,N,M,Z,"), "{text}");
            assert!(text.lines().count() == 2);

            let bad_mode = CString::new("frobnicate").unwrap();
            let mut csv2: *mut c_char = ptr::null_mut();
            assert_eq!(
                hc_run_scenario(bad_mode.as_ptr(), scenario.as_ptr(), &mut csv2),
                HcStatus::HcParse
            );
        }
    }

    #[test]
    fn version_is_nul_terminated_semver() {
        let v = unsafe { CStr::from_ptr(hc_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn generated_header_has_core_declarations() {
        let header = include_str!("../include/hybridcache.h");
        for needle in [
            "typedef struct HcSystem HcSystem;",
            "typedef struct HcPopularity HcPopularity;",
            "typedef struct HcPlacement HcPlacement;",
            "HcStatus hc_analyze(",
            "HcStatus hc_optimize_hybrid(",
            "HcStatus hc_run_scenario(",
            "void hc_string_free(",
        ] {
            assert!(header.contains(needle), "header is missing {needle:?}");
        }
    }
}
