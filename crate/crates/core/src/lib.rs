//! Hybrid coded-uncoded cache placement for shared-medium networks.
//!
//! One macro base station (MBS) serves `K` cache-equipped small base stations
//! (SBSs) over a shared multicast link. Each SBS `c` collects `Z_c` content
//! requests per time slot from the users in its range. A placement splits the
//! `N`-content library into three groups: the most popular contents cached
//! fully at every SBS, a middle band cached with the subfile-XOR coded scheme,
//! and a tail left uncached. The crate answers three questions about such
//! placements:
//!
//! - **analysis**: expected shared-link load `r = r1 + r2` in closed form
//!   (coded steps plus deduplicated uncoded broadcasts), for SBS-independent
//!   and SBS-dependent popularity profiles.
//! - **optimizer**: exhaustive searches for the load-minimizing placement:
//!   the homogeneous `(N1, M1)` partition, pure-coded and pure-uncoded
//!   baselines, and the small-scale grouped search for per-SBS preferences.
//! - **simulator**: a seeded Monte Carlo delivery-phase simulator and a
//!   bit-exact subfile-XOR codec check that cross-validate the formulas.
//!
//! [`oracle`] holds brute-force enumeration references used to pin expected
//! values in tests and to certify small instances exactly. [`scenario`] is the
//! JSON-scenario / CSV-results layer behind the `hybridcache` CLI.

pub mod analysis;
pub mod math;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod scenario;
pub mod simulator;

pub use model::{
    validate, zipf_popularity, DemandMatrix, HeteroPlacement, HybridPlacement, LoadReport,
    Placement, PopularityMatrix, SbsGroup, SystemConfig, Violation,
};
