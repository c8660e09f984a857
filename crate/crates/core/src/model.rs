//! Domain types shared by every other module: network topology, popularity
//! profiles, placements, demand matrices, load reports, and the constraint
//! checker that turns an invalid placement into a list of named violations.
//!
//! All types are immutable after construction and safe to share across
//! threads. Content and SBS indices are 0-based throughout the library; the
//! scenario layer converts from the 1-based indices used in scenario files.

use thiserror::Error;

/// Absolute tolerance for "this probability column sums to one" checks.
pub const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid system configuration: {0}")]
    Config(String),
    #[error("invalid popularity matrix: {0}")]
    Popularity(String),
    #[error("operation requires a homogeneous popularity profile")]
    RequiresHomogeneous,
    #[error("invalid demand matrix: {0}")]
    Demands(String),
}

// ---------------------------------------------------------------------------
// System configuration
// ---------------------------------------------------------------------------

/// Network topology and capacities: `K` SBSs backed by one MBS, a library of
/// `N` equal-size contents, per-SBS cache capacity `M` (whole contents),
/// per-SBS user counts `Z_c`, and the content size `F` in bits.
///
/// Loads everywhere in this crate are expressed in units of `F`; the field
/// only scales bit counts reported by external layers.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    k: usize,
    n: usize,
    m: usize,
    z: Vec<usize>,
    f: f64,
}

impl SystemConfig {
    pub fn new(k: usize, n: usize, m: usize, z: Vec<usize>, f: f64) -> Result<Self, ModelError> {
        if k < 1 {
            return Err(ModelError::Config("K must be at least 1".into()));
        }
        if n < 1 {
            return Err(ModelError::Config("N must be at least 1".into()));
        }
        if m > n {
            return Err(ModelError::Config(format!("M = {m} exceeds library size N = {n}")));
        }
        if z.len() != k {
            return Err(ModelError::Config(format!(
                "Z has {} entries but K = {k}",
                z.len()
            )));
        }
        if f.is_nan() || f <= 0.0 {
            return Err(ModelError::Config(format!("content size F = {f} must be positive")));
        }
        Ok(Self { k, n, m, z, f })
    }

    /// Uniform user counts: every SBS serves `z` users.
    pub fn uniform(k: usize, n: usize, m: usize, z: usize, f: f64) -> Result<Self, ModelError> {
        Self::new(k, n, m, vec![z; k], f)
    }

    pub fn sbs_count(&self) -> usize {
        self.k
    }

    pub fn library_size(&self) -> usize {
        self.n
    }

    pub fn cache_capacity(&self) -> usize {
        self.m
    }

    pub fn users(&self) -> &[usize] {
        &self.z
    }

    pub fn content_bits(&self) -> f64 {
        self.f
    }

    /// Maximum number of coded-delivery steps in any slot.
    pub fn z_max(&self) -> usize {
        self.z.iter().copied().max().unwrap_or(0)
    }

    pub fn total_users(&self) -> usize {
        self.z.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Popularity
// ---------------------------------------------------------------------------

/// Per-SBS request probabilities `p[n][c]`: the chance that one request
/// arriving at SBS `c` asks for content `n`. Homogeneous profiles (identical
/// columns) additionally expose a popularity-sorted view.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityMatrix {
    n: usize,
    k: usize,
    /// Column-major: `cols[c][n]`.
    cols: Vec<Vec<f64>>,
    homogeneous: bool,
}

impl PopularityMatrix {
    /// Build from `N` rows of `K` per-SBS probabilities.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = rows.len();
        if n == 0 {
            return Err(ModelError::Popularity("matrix has no rows".into()));
        }
        let k = rows[0].len();
        if k == 0 {
            return Err(ModelError::Popularity("matrix has no columns".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(ModelError::Popularity(format!(
                "row {bad} has {} entries, expected K = {k}",
                rows[bad].len()
            )));
        }
        let mut cols = vec![vec![0.0; n]; k];
        for (i, row) in rows.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                cols[c][i] = p;
            }
        }
        Self::from_columns(cols)
    }

    fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let k = cols.len();
        let n = cols[0].len();
        for (c, col) in cols.iter().enumerate() {
            if let Some(i) = col.iter().position(|p| !(0.0..=1.0).contains(p)) {
                return Err(ModelError::Popularity(format!(
                    "p[{i}][{c}] = {} is outside [0, 1]",
                    col[i]
                )));
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(ModelError::Popularity(format!(
                    "column {c} sums to {sum}, expected 1 within {PROB_SUM_TOL:e}"
                )));
            }
        }
        let homogeneous = cols.iter().all(|col| col == &cols[0]);
        Ok(Self { n, k, cols, homogeneous })
    }

    pub fn contents(&self) -> usize {
        self.n
    }

    pub fn sbs_count(&self) -> usize {
        self.k
    }

    pub fn prob(&self, content: usize, sbs: usize) -> f64 {
        self.cols[sbs][content]
    }

    /// One SBS's request distribution over the whole library.
    pub fn column(&self, sbs: usize) -> &[f64] {
        &self.cols[sbs]
    }

    /// True iff every SBS has exactly the same request distribution.
    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// Popularity-sorted view of a homogeneous profile.
    pub fn sorted_view(&self) -> Result<SortedPopularity, ModelError> {
        if !self.homogeneous {
            return Err(ModelError::RequiresHomogeneous);
        }
        Ok(SortedPopularity::new(&self.cols[0]))
    }
}

/// Construct a homogeneous Zipf(`alpha`) profile over `n` contents shared by
/// `k` SBSs: `p_i` proportional to `(1/i)^alpha` for the 1-based index `i`.
pub fn zipf_popularity(n: usize, alpha: f64, k: usize) -> Result<PopularityMatrix, ModelError> {
    if n < 1 || k < 1 {
        return Err(ModelError::Popularity("Zipf profile needs N >= 1 and K >= 1".into()));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(ModelError::Popularity(format!("Zipf parameter {alpha} must be >= 0")));
    }
    let weights: Vec<f64> = (1..=n).map(|i| (1.0 / i as f64).powf(alpha)).collect();
    let norm: f64 = weights.iter().sum();
    let col: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    PopularityMatrix::from_columns(vec![col; k])
}

/// Homogeneous popularity sorted non-increasing, ties broken by ascending
/// content index. Rank 0 is the most popular content.
#[derive(Debug, Clone)]
pub struct SortedPopularity {
    probs: Vec<f64>,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl SortedPopularity {
    fn new(col: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..col.len()).collect();
        // Stable sort keeps ascending-index order among equal probabilities.
        order.sort_by(|&a, &b| col[b].partial_cmp(&col[a]).unwrap());
        let probs: Vec<f64> = order.iter().map(|&i| col[i]).collect();
        let mut rank = vec![0usize; col.len()];
        for (r, &content) in order.iter().enumerate() {
            rank[content] = r;
        }
        Self { probs, order, rank }
    }

    /// Probabilities in non-increasing order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `order()[rank]` is the content holding that popularity rank.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `rank_of(content)` is the content's 0-based popularity rank.
    pub fn rank_of(&self, content: usize) -> usize {
        self.rank[content]
    }
}

// ---------------------------------------------------------------------------
// Placements
// ---------------------------------------------------------------------------

/// Homogeneous three-group placement in popularity-rank space: the `M1` most
/// popular contents cached fully at every SBS, ranks `M1..N1` cached with the
/// coded scheme, ranks `>= N1` uncached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HybridPlacement {
    pub m1: usize,
    pub n1: usize,
}

impl HybridPlacement {
    pub fn new(m1: usize, n1: usize) -> Self {
        Self { m1, n1 }
    }

    /// Subfile replication degree `T = K(M - M1) / (N1 - M1)`.
    ///
    /// `None` when the coded band is empty or `T` is not a positive integer
    /// (such placements are rejected by [`validate`]).
    pub fn replication_degree(&self, config: &SystemConfig) -> Option<usize> {
        if self.n1 <= self.m1 || self.m1 > config.cache_capacity() {
            return None;
        }
        let num = config.sbs_count() * (config.cache_capacity() - self.m1);
        let den = self.n1 - self.m1;
        (num.is_multiple_of(den) && num / den >= 1).then(|| num / den)
    }

    /// True for the pure-uncoded corner `N1 = M1 = M` (no coded band).
    pub fn is_pure_uncoded(&self, config: &SystemConfig) -> bool {
        self.n1 == config.cache_capacity() && self.m1 == self.n1
    }
}

/// One coded-delivery group of a heterogeneous placement: its member SBSs,
/// the per-member cache capacity `M_g` dedicated to the group, and the
/// contents participating in the group's coded scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SbsGroup {
    /// Sorted, distinct SBS indices; at least two.
    pub members: Vec<usize>,
    /// Cache capacity each member dedicates to this group.
    pub coded_capacity: usize,
    /// Sorted, distinct content indices in the group's coded scheme.
    pub contents: Vec<usize>,
}

impl SbsGroup {
    pub fn sbs_count(&self) -> usize {
        self.members.len()
    }

    pub fn content_count(&self) -> usize {
        self.contents.len()
    }

    /// `T_g = K_g * M_g / N_g` when it is a positive integer.
    pub fn replication_degree(&self) -> Option<usize> {
        let num = self.sbs_count() * self.coded_capacity;
        let den = self.content_count();
        if den == 0 {
            return None;
        }
        (num.is_multiple_of(den) && num / den >= 1).then(|| num / den)
    }

    pub fn has_member(&self, sbs: usize) -> bool {
        self.members.binary_search(&sbs).is_ok()
    }

    pub fn has_content(&self, content: usize) -> bool {
        self.contents.binary_search(&content).is_ok()
    }
}

/// Heterogeneous placement: overlapping SBS groups each running their own
/// coded scheme, plus per-SBS uncoded cache lists.
///
/// `groups` may be empty; that is the pure-uncoded corner where the whole
/// cache budget `M` goes to `uncoded` at every SBS (mirroring the homogeneous
/// `N1 = M` corner). Non-empty group lists must cover every SBS.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeteroPlacement {
    pub groups: Vec<SbsGroup>,
    /// Per SBS: sorted, distinct contents cached uncoded (`M_1c` each).
    pub uncoded: Vec<Vec<usize>>,
}

impl HeteroPlacement {
    pub fn uncoded_capacity(&self, sbs: usize) -> usize {
        self.uncoded[sbs].len()
    }

    /// Total cache spent at `sbs`: uncoded entries plus `M_g` for every group
    /// the SBS participates in.
    pub fn cache_spent(&self, sbs: usize) -> usize {
        self.uncoded_capacity(sbs)
            + self
                .groups
                .iter()
                .filter(|g| g.has_member(sbs))
                .map(|g| g.coded_capacity)
                .sum::<usize>()
    }

    /// True iff `content` is cached uncoded at `sbs`.
    pub fn is_uncoded_cached(&self, content: usize, sbs: usize) -> bool {
        self.uncoded[sbs].binary_search(&content).is_ok()
    }

    /// First group (lowest index) through which `sbs` can decode `content`.
    pub fn coded_group_for(&self, content: usize, sbs: usize) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.has_member(sbs) && g.has_content(content))
    }
}

/// Either placement family, for operations that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    Hybrid(HybridPlacement),
    Hetero(HeteroPlacement),
}

impl From<HybridPlacement> for Placement {
    fn from(p: HybridPlacement) -> Self {
        Placement::Hybrid(p)
    }
}

impl From<HeteroPlacement> for Placement {
    fn from(p: HeteroPlacement) -> Self {
        Placement::Hetero(p)
    }
}

// ---------------------------------------------------------------------------
// Demands and reports
// ---------------------------------------------------------------------------

/// One slot's sampled requests: for each SBS `c`, the `Z_c` requested content
/// indices (duplicates allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandMatrix {
    pub per_sbs: Vec<Vec<usize>>,
}

impl DemandMatrix {
    pub fn check(&self, config: &SystemConfig) -> Result<(), ModelError> {
        if self.per_sbs.len() != config.sbs_count() {
            return Err(ModelError::Demands(format!(
                "{} demand vectors for K = {} SBSs",
                self.per_sbs.len(),
                config.sbs_count()
            )));
        }
        for (c, d) in self.per_sbs.iter().enumerate() {
            if d.len() != config.users()[c] {
                return Err(ModelError::Demands(format!(
                    "SBS {c} has {} demands, expected Z_{c} = {}",
                    d.len(),
                    config.users()[c]
                )));
            }
            if let Some(&bad) = d.iter().find(|&&n| n >= config.library_size()) {
                return Err(ModelError::Demands(format!(
                    "SBS {c} requests content {bad} outside the library"
                )));
            }
        }
        Ok(())
    }
}

/// Per-group share of the expected coded load.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLoad {
    pub group: usize,
    pub r1: f64,
    pub per_step: Vec<f64>,
}

/// Expected shared-link load in units of content size: `r1` from coded
/// delivery steps, `r2` from deduplicated uncoded broadcasts, `r = r1 + r2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub r1: f64,
    pub r2: f64,
    pub r: f64,
    /// Expected coded load of step `i` (1-based step `i` at index `i-1`).
    pub per_step: Vec<f64>,
    /// Per-group breakdown, present for heterogeneous placements.
    pub per_group: Option<Vec<GroupLoad>>,
}

impl LoadReport {
    pub fn new(r1: f64, r2: f64, per_step: Vec<f64>, per_group: Option<Vec<GroupLoad>>) -> Self {
        Self { r1, r2, r: r1 + r2, per_step, per_group }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// One failed constraint, named so callers can match on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.constraint, self.detail)
    }
}

fn violation(constraint: &'static str, detail: impl Into<String>) -> Violation {
    Violation { constraint, detail: detail.into() }
}

/// Check every placement constraint against a configuration and popularity
/// profile. Returns an empty list iff the placement is feasible; violations
/// are data, not errors, so callers can report all of them at once.
pub fn validate(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    placement: &Placement,
) -> Vec<Violation> {
    let mut v = Vec::new();
    if pop.contents() != config.library_size() || pop.sbs_count() != config.sbs_count() {
        v.push(violation(
            "popularity shape",
            format!(
                "popularity is {}x{}, config expects {}x{}",
                pop.contents(),
                pop.sbs_count(),
                config.library_size(),
                config.sbs_count()
            ),
        ));
        return v;
    }
    match placement {
        Placement::Hybrid(p) => validate_hybrid(config, pop, p, &mut v),
        Placement::Hetero(p) => validate_hetero(config, p, &mut v),
    }
    v
}

fn validate_hybrid(
    config: &SystemConfig,
    pop: &PopularityMatrix,
    p: &HybridPlacement,
    v: &mut Vec<Violation>,
) {
    if !pop.is_homogeneous() {
        v.push(violation(
            "homogeneous popularity",
            "hybrid (M1, N1) placements require identical popularity columns",
        ));
    }
    let (m, n) = (config.cache_capacity(), config.library_size());
    if !(p.m1 <= m && m <= p.n1 && p.n1 <= n) {
        v.push(violation(
            "partition bounds",
            format!("need M1 <= M <= N1 <= N, got M1={}, M={m}, N1={}, N={n}", p.m1, p.n1),
        ));
        return;
    }
    if p.n1 == m {
        if p.m1 != m {
            v.push(violation(
                "N1=M requires M1=M",
                format!("empty coded band must cache fully: M1={}, M={m}", p.m1),
            ));
        }
    } else if p.replication_degree(config).is_none() {
        let num = config.sbs_count() * (m - p.m1);
        let den = p.n1 - p.m1;
        v.push(violation(
            "integer replication degree",
            format!("T = {num}/{den} is not a positive integer"),
        ));
    }
}

fn validate_hetero(config: &SystemConfig, p: &HeteroPlacement, v: &mut Vec<Violation>) {
    let (k, n, m) = (config.sbs_count(), config.library_size(), config.cache_capacity());
    if p.uncoded.len() != k {
        v.push(violation(
            "uncoded shape",
            format!("{} uncoded lists for K = {k} SBSs", p.uncoded.len()),
        ));
        return;
    }
    let mut covered = vec![false; k];
    for (gi, g) in p.groups.iter().enumerate() {
        if g.members.len() < 2 {
            v.push(violation("group size", format!("group {gi} has fewer than 2 SBSs")));
        }
        if !is_sorted_distinct(&g.members) || g.members.iter().any(|&c| c >= k) {
            v.push(violation(
                "group members",
                format!("group {gi} members must be sorted, distinct SBS indices below K"),
            ));
            continue;
        }
        for &c in &g.members {
            covered[c] = true;
        }
        if !is_sorted_distinct(&g.contents) || g.contents.iter().any(|&x| x >= n) {
            v.push(violation(
                "group contents",
                format!("group {gi} contents must be sorted, distinct indices below N"),
            ));
            continue;
        }
        let (mg, ng) = (g.coded_capacity, g.content_count());
        if !(1 <= mg && mg <= m) {
            v.push(violation(
                "group capacity",
                format!("group {gi} needs 1 <= M_g <= M, got M_g={mg}, M={m}"),
            ));
        }
        if !(mg < ng && ng <= n) {
            v.push(violation(
                "group library",
                format!("group {gi} needs M_g < N_g <= N, got M_g={mg}, N_g={ng}"),
            ));
        } else if g.replication_degree().is_none() {
            v.push(violation(
                "integer replication degree",
                format!(
                    "group {gi}: T_g = {}*{mg}/{ng} is not a positive integer",
                    g.sbs_count()
                ),
            ));
        }
    }
    if !p.groups.is_empty() {
        if let Some(c) = covered.iter().position(|&x| !x) {
            v.push(violation("cover", format!("SBS {c} belongs to no group")));
        }
    }
    for c in 0..k {
        if !is_sorted_distinct(&p.uncoded[c]) || p.uncoded[c].iter().any(|&x| x >= n) {
            v.push(violation(
                "uncoded contents",
                format!("SBS {c} uncoded list must be sorted, distinct indices below N"),
            ));
            continue;
        }
        let spent = p.cache_spent(c);
        if spent != m {
            v.push(violation(
                "cache budget",
                format!("SBS {c} spends {spent} of M = {m} (M_1c plus its groups' M_g must equal M)"),
            ));
        }
    }
}

fn is_sorted_distinct(xs: &[usize]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}
