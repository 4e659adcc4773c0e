//! Sites, network states, variant tags and the model specification.
//!
//! A state is a pair `(y, n)`: `y[s]` counts distinguished customers (DCs)
//! parked at site `s`, `n[s]` is the task queue length there. Single-DC
//! models use an occupancy vector with exactly one unit entry, so all twelve
//! variants share one state type and one generator engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::RateFamilies;
use crate::scalar::Scalar;

/// The finite site set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteGraph {
    labels: Vec<String>,
}

impl SiteGraph {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpec("a network needs at least one site".into()));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::InvalidSpec(format!("duplicate site label `{label}`")));
            }
        }
        Ok(Self { labels })
    }

    /// Sites labelled `0..count`.
    pub fn with_count(count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| i.to_string()).collect())
    }

    pub fn site_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Occupancy `y` and task vector `n` over the sites.
///
/// Field order makes the derived ordering sort by occupancy first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetworkState {
    pub occupancy: Vec<u32>,
    pub tasks: Vec<u32>,
}

impl NetworkState {
    pub fn new(occupancy: Vec<u32>, tasks: Vec<u32>) -> Self {
        Self { occupancy, tasks }
    }

    /// All-zero state on `sites` sites.
    pub fn empty(sites: usize) -> Self {
        Self::new(vec![0; sites], vec![0; sites])
    }

    /// Single DC at `site` with the given tasks.
    pub fn with_dc_at(site: usize, tasks: Vec<u32>) -> Self {
        let mut occupancy = vec![0; tasks.len()];
        occupancy[site] = 1;
        Self::new(occupancy, tasks)
    }

    pub fn site_count(&self) -> usize {
        self.tasks.len()
    }

    /// `|n|`
    pub fn total_tasks(&self) -> u64 {
        self.tasks.iter().map(|&v| u64::from(v)).sum()
    }

    /// `|y|`
    pub fn total_dcs(&self) -> u64 {
        self.occupancy.iter().map(|&v| u64::from(v)).sum()
    }

    pub fn is_loaded(&self, site: usize) -> bool {
        self.occupancy[site] > 0
    }

    /// Apply a unit-vector edit. `exclusive` enforces `y_s <= 1`.
    pub fn apply(&self, edit: Edit, exclusive: bool) -> Result<NetworkState> {
        let mut next = self.clone();
        next.apply_in_place(edit, exclusive)?;
        Ok(next)
    }

    pub(crate) fn apply_in_place(&mut self, edit: Edit, exclusive: bool) -> Result<()> {
        fn dec(v: &mut [u32], site: usize) -> Result<()> {
            match v[site].checked_sub(1) {
                Some(x) => {
                    v[site] = x;
                    Ok(())
                }
                None => Err(Error::NegativeCount { site }),
            }
        }
        fn inc(v: &mut [u32], site: usize, exclusive: bool) -> Result<()> {
            if exclusive && v[site] >= 1 {
                return Err(Error::ExclusionViolated { site });
            }
            v[site] += 1;
            Ok(())
        }
        let sites = self.site_count();
        let check = |s: usize| -> Result<()> {
            if s >= sites {
                Err(Error::InvalidSpec(format!("site {s} out of range")))
            } else {
                Ok(())
            }
        };
        match edit {
            Edit::TaskArrival(p) => {
                check(p)?;
                self.tasks[p] += 1;
            }
            Edit::TaskExit(p) => {
                check(p)?;
                dec(&mut self.tasks, p)?;
            }
            Edit::TaskMove { from, to } => {
                check(from)?;
                check(to)?;
                dec(&mut self.tasks, from)?;
                self.tasks[to] += 1;
            }
            Edit::DcMove { from, to } => {
                check(from)?;
                check(to)?;
                dec(&mut self.occupancy, from)?;
                if let Err(e) = inc(&mut self.occupancy, to, exclusive) {
                    self.occupancy[from] += 1;
                    return Err(e);
                }
            }
            Edit::DcArrival(k) => {
                check(k)?;
                inc(&mut self.occupancy, k, exclusive)?;
            }
            Edit::DcExit(i) => {
                check(i)?;
                dec(&mut self.occupancy, i)?;
            }
        }
        Ok(())
    }

    pub(crate) fn joined(v: &[u32]) -> String {
        v.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "y={}|n={}",
            Self::joined(&self.occupancy),
            Self::joined(&self.tasks)
        )
    }
}

impl FromStr for NetworkState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse state `{s}`"));
        let (y, n) = s.split_once('|').ok_or_else(bad)?;
        let parse = |part: &str, prefix: &str| -> Result<Vec<u32>> {
            let body = part.trim().strip_prefix(prefix).ok_or_else(bad)?;
            if body.is_empty() {
                return Ok(Vec::new());
            }
            body.split(';')
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect()
        };
        let occupancy = parse(y, "y=")?;
        let tasks = parse(n, "n=")?;
        if occupancy.len() != tasks.len() {
            return Err(bad());
        }
        Ok(Self { occupancy, tasks })
    }
}

/// Unit-vector edits of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edit {
    /// `n + e^p`
    TaskArrival(usize),
    /// `n - e^p`
    TaskExit(usize),
    /// `n + e^{from -> to}`
    TaskMove { from: usize, to: usize },
    /// `y + e^{from -> to}`
    DcMove { from: usize, to: usize },
    /// `y + e^k`
    DcArrival(usize),
    /// `y - e^i`
    DcExit(usize),
}

impl Edit {
    pub fn inverse(self) -> Edit {
        match self {
            Edit::TaskArrival(p) => Edit::TaskExit(p),
            Edit::TaskExit(p) => Edit::TaskArrival(p),
            Edit::TaskMove { from, to } => Edit::TaskMove { from: to, to: from },
            Edit::DcMove { from, to } => Edit::DcMove { from: to, to: from },
            Edit::DcArrival(k) => Edit::DcExit(k),
            Edit::DcExit(i) => Edit::DcArrival(i),
        }
    }
}

/// Apply `edit` to `state` under the exclusion rule of `kind`.
pub fn apply_edit(state: &NetworkState, edit: Edit, kind: ParticleKind) -> Result<NetworkState> {
    state.apply(edit, kind.is_exclusive())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticleKind {
    None,
    SingleDc,
    Exclusion,
    ZeroRange,
}

impl ParticleKind {
    /// At most one DC per site.
    pub fn is_exclusive(self) -> bool {
        matches!(self, ParticleKind::SingleDc | ParticleKind::Exclusion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Open,
    Closed,
}

/// The twelve model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// Plain symmetric Jackson network.
    V1,
    /// Basic single-DC model: constant rates, exponential gauge `e^phi`.
    V2,
    /// Single DC, open tasks, general rate families.
    V3,
    /// Single DC, closed tasks.
    V4,
    /// Exclusion, closed DCs, open tasks.
    V5,
    /// Exclusion, open DCs, open tasks.
    V6,
    /// Exclusion, closed DCs, closed tasks.
    V7,
    /// Exclusion, open DCs, closed tasks.
    V8,
    /// Zero-range, closed DCs, open tasks.
    V9,
    /// Zero-range, open DCs, open tasks.
    V10,
    /// Zero-range, closed DCs, closed tasks.
    V11,
    /// Zero-range, open DCs, closed tasks.
    V12,
}

impl Variant {
    pub const ALL: [Variant; 12] = [
        Variant::V1,
        Variant::V2,
        Variant::V3,
        Variant::V4,
        Variant::V5,
        Variant::V6,
        Variant::V7,
        Variant::V8,
        Variant::V9,
        Variant::V10,
        Variant::V11,
        Variant::V12,
    ];

    pub fn particle_kind(self) -> ParticleKind {
        use Variant::*;
        match self {
            V1 => ParticleKind::None,
            V2 | V3 | V4 => ParticleKind::SingleDc,
            V5 | V6 | V7 | V8 => ParticleKind::Exclusion,
            V9 | V10 | V11 | V12 => ParticleKind::ZeroRange,
        }
    }

    pub fn task_boundary(self) -> Boundary {
        use Variant::*;
        match self {
            V4 | V7 | V8 | V11 | V12 => Boundary::Closed,
            _ => Boundary::Open,
        }
    }

    /// DC boundary; V1 has no DCs and reports `Closed` (with no count).
    pub fn dc_boundary(self) -> Boundary {
        use Variant::*;
        match self {
            V6 | V8 | V10 | V12 => Boundary::Open,
            _ => Boundary::Closed,
        }
    }

    pub fn open_tasks(self) -> bool {
        self.task_boundary() == Boundary::Open
    }

    pub fn open_dcs(self) -> bool {
        self.dc_boundary() == Boundary::Open
    }

    /// Variant for a tag combination. Single-DC with open tasks maps to the
    /// general model V3; V2 is a restriction of it chosen explicitly.
    pub fn from_parts(kind: ParticleKind, tasks: Boundary, dcs: Boundary) -> Option<Variant> {
        use Boundary::*;
        use ParticleKind as K;
        Some(match (kind, tasks, dcs) {
            (K::None, Open, _) => Variant::V1,
            (K::SingleDc, Open, Closed) => Variant::V3,
            (K::SingleDc, Closed, Closed) => Variant::V4,
            (K::Exclusion, Open, Closed) => Variant::V5,
            (K::Exclusion, Open, Open) => Variant::V6,
            (K::Exclusion, Closed, Closed) => Variant::V7,
            (K::Exclusion, Closed, Open) => Variant::V8,
            (K::ZeroRange, Open, Closed) => Variant::V9,
            (K::ZeroRange, Open, Open) => Variant::V10,
            (K::ZeroRange, Closed, Closed) => Variant::V11,
            (K::ZeroRange, Closed, Open) => Variant::V12,
            _ => return None,
        })
    }

    /// Whether the (untruncated) state space is finite.
    pub fn is_finite(self) -> bool {
        matches!(self, Variant::V4 | Variant::V7 | Variant::V8 | Variant::V11)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown variant `{s}`")))
    }
}

/// Variant plus its conserved quantities: `M` DCs, `N` tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantTag {
    variant: Variant,
    dcs: Option<u32>,
    tasks: Option<u32>,
}

impl VariantTag {
    pub fn new(variant: Variant, dcs: Option<u32>, tasks: Option<u32>) -> Result<Self> {
        let kind = variant.particle_kind();
        match (kind, variant.dc_boundary(), dcs) {
            (ParticleKind::None, _, Some(_)) => {
                return Err(Error::InvalidSpec(format!(
                    "{variant} has no distinguished customers; M must be absent"
                )))
            }
            (ParticleKind::SingleDc, _, m) if m != Some(1) => {
                return Err(Error::InvalidSpec(format!("{variant} needs M = 1")))
            }
            (ParticleKind::Exclusion | ParticleKind::ZeroRange, Boundary::Closed, None) => {
                return Err(Error::InvalidSpec(format!("{variant} needs the DC count M")))
            }
            (ParticleKind::Exclusion | ParticleKind::ZeroRange, Boundary::Open, Some(_)) => {
                return Err(Error::InvalidSpec(format!(
                    "{variant} has an open DC boundary; M must be absent"
                )))
            }
            _ => {}
        }
        match (variant.task_boundary(), tasks) {
            (Boundary::Closed, None) => {
                return Err(Error::InvalidSpec(format!("{variant} needs the task count N")))
            }
            (Boundary::Open, Some(_)) => {
                return Err(Error::InvalidSpec(format!(
                    "{variant} has an open task boundary; N must be absent"
                )))
            }
            _ => {}
        }
        Ok(Self { variant, dcs, tasks })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn particle_kind(&self) -> ParticleKind {
        self.variant.particle_kind()
    }

    pub fn task_boundary(&self) -> Boundary {
        self.variant.task_boundary()
    }

    pub fn dc_boundary(&self) -> Boundary {
        self.variant.dc_boundary()
    }

    /// Conserved DC count `M`.
    pub fn dcs(&self) -> Option<u32> {
        self.dcs
    }

    /// Conserved task count `N`.
    pub fn tasks(&self) -> Option<u32> {
        self.tasks
    }
}

/// Per-site caps bounding enumeration and the occupation map domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Truncation {
    /// `n_max`, required for open-task variants.
    pub task_cap: Option<u32>,
    /// `y_max`, required for open-DC zero-range variants.
    pub dc_cap: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Symmetry-condition validators.
    pub validation: T,
    /// Relative tail for series truncation.
    pub series: T,
    /// Detailed-balance residual.
    pub balance: T,
    /// Per-state absolute agreement between oracle and product form.
    pub oracle: T,
    /// Consecutive term ratios `>= 1` that declare a series divergent.
    pub divergence_window: usize,
    /// Hard cap on series terms.
    pub max_series_terms: usize,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            validation: T::lit(1e-12),
            series: T::lit(1e-14),
            balance: T::lit(1e-12),
            oracle: T::lit(1e-10),
            divergence_window: 10_000,
            max_series_terms: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Cap for breadth-first reachability and state enumeration.
    pub states: usize,
    /// Largest space handed to the linear-solve oracle.
    pub oracle_states: usize,
    /// Cap on pointwise evaluations per validator.
    pub validation_points: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            states: 200_000,
            oracle_states: 20_000,
            validation_points: 2_000_000,
        }
    }
}

/// A fully specified model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub graph: SiteGraph,
    pub tag: VariantTag,
    pub rates: RateFamilies<T>,
    pub truncation: Truncation,
    pub tolerances: Tolerances<T>,
    pub limits: Limits,
}

impl<T: Scalar> ModelSpec<T> {
    /// Build a spec, checking every structural invariant and the rate families.
    pub fn new(
        graph: SiteGraph,
        tag: VariantTag,
        rates: RateFamilies<T>,
        truncation: Truncation,
    ) -> Result<Self> {
        let spec = Self {
            graph,
            tag,
            rates,
            truncation,
            tolerances: Tolerances::default(),
            limits: Limits::default(),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances<T>) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn variant(&self) -> Variant {
        self.tag.variant()
    }

    pub fn kind(&self) -> ParticleKind {
        self.tag.particle_kind()
    }

    pub fn site_count(&self) -> usize {
        self.graph.site_count()
    }

    /// Re-check invariants (useful after editing public fields).
    pub fn check(&self) -> Result<()> {
        let v = self.variant();
        if v.open_tasks() {
            match self.truncation.task_cap {
                Some(c) if c >= 1 => {}
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "{v} has open tasks and needs a task cap n_max >= 1"
                    )))
                }
            }
        }
        if v.open_dcs() && self.kind() == ParticleKind::ZeroRange {
            match self.truncation.dc_cap {
                Some(c) if c >= 1 => {}
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "{v} has open zero-range DCs and needs an occupancy cap y_max >= 1"
                    )))
                }
            }
        }
        if self.kind() == ParticleKind::Exclusion {
            if let Some(m) = self.tag.dcs() {
                if m as usize > self.site_count() {
                    return Err(Error::InvalidSpec(format!(
                        "exclusion allows at most {} DCs, got M = {m}",
                        self.site_count()
                    )));
                }
            }
        }
        self.rates.check(self)
    }

    /// Shape checks: vector lengths, exclusion bounds, no DCs in V1.
    pub fn check_structure(&self, state: &NetworkState) -> Result<()> {
        let sites = self.site_count();
        let bad = |reason: String| Error::InadmissibleState {
            state: state.to_string(),
            reason,
        };
        if state.tasks.len() != sites || state.occupancy.len() != sites {
            return Err(bad(format!("expected vectors of length {sites}")));
        }
        match self.kind() {
            ParticleKind::None => {
                if state.total_dcs() != 0 {
                    return Err(bad("this variant has no DCs".into()));
                }
            }
            ParticleKind::SingleDc | ParticleKind::Exclusion => {
                if let Some(s) = state.occupancy.iter().position(|&y| y > 1) {
                    return Err(bad(format!("site {s} holds more than one DC")));
                }
            }
            ParticleKind::ZeroRange => {}
        }
        Ok(())
    }

    /// Whether the conserved sums hold.
    pub fn on_manifold(&self, state: &NetworkState) -> bool {
        if let Some(m) = self.tag.dcs() {
            if state.total_dcs() != u64::from(m) {
                return false;
            }
        }
        if let Some(n) = self.tag.tasks() {
            if state.total_tasks() != u64::from(n) {
                return false;
            }
        }
        true
    }

    /// Structure plus conserved sums.
    pub fn check_state(&self, state: &NetworkState) -> Result<()> {
        self.check_structure(state)?;
        if !self.on_manifold(state) {
            return Err(Error::InadmissibleState {
                state: state.to_string(),
                reason: format!(
                    "conserved totals violated (M = {:?}, N = {:?})",
                    self.tag.dcs(),
                    self.tag.tasks()
                ),
            });
        }
        Ok(())
    }

    /// Inside the truncation box (closed species are never capped).
    pub fn in_box(&self, state: &NetworkState) -> bool {
        if self.variant().open_tasks() {
            if let Some(cap) = self.truncation.task_cap {
                if state.tasks.iter().any(|&n| n > cap) {
                    return false;
                }
            }
        }
        if self.variant().open_dcs() && self.kind() == ParticleKind::ZeroRange {
            if let Some(cap) = self.truncation.dc_cap {
                if state.occupancy.iter().any(|&y| y > cap) {
                    return false;
                }
            }
        }
        true
    }

    /// Canonical start: empty network, or the first `M` sites occupied
    /// (wrapping onto site 0 for zero-range) with all `N` tasks at site 0.
    pub fn default_state(&self) -> NetworkState {
        let sites = self.site_count();
        let mut state = NetworkState::empty(sites);
        if let Some(m) = self.tag.dcs() {
            for k in 0..m as usize {
                state.occupancy[k % sites] += 1;
            }
        }
        if let Some(n) = self.tag.tasks() {
            state.tasks[0] = n;
        }
        state
    }
}

/// Size of the (exact or truncated) state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimension {
    pub states: u128,
    /// `true` when the count is the untruncated space.
    pub exact: bool,
}

/// `C(n, k)` with saturation.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(u128::from(n - i)) / u128::from(i + 1);
    }
    acc
}

/// Number of states in the constrained (and, where open, truncated) space.
pub fn state_dimension<T: Scalar>(spec: &ModelSpec<T>) -> Dimension {
    let sites = spec.site_count() as u64;
    let v = spec.variant();
    let task_count = match spec.tag.tasks() {
        Some(n) => binomial(u64::from(n) + sites - 1, sites - 1),
        None => {
            let cap = u128::from(spec.truncation.task_cap.unwrap_or(0)) + 1;
            (0..sites).fold(1u128, |acc, _| acc.saturating_mul(cap))
        }
    };
    let dc_count = match spec.kind() {
        ParticleKind::None => 1,
        ParticleKind::SingleDc => u128::from(sites),
        ParticleKind::Exclusion => match spec.tag.dcs() {
            Some(m) => binomial(sites, u64::from(m)),
            None => 1u128 << sites.min(127),
        },
        ParticleKind::ZeroRange => match spec.tag.dcs() {
            Some(m) => binomial(u64::from(m) + sites - 1, sites - 1),
            None => {
                let cap = u128::from(spec.truncation.dc_cap.unwrap_or(0)) + 1;
                (0..sites).fold(1u128, |acc, _| acc.saturating_mul(cap))
            }
        },
    };
    Dimension {
        states: task_count.saturating_mul(dc_count),
        exact: v.is_finite(),
    }
}
