//! Pointwise checks of the symmetry conditions behind the product form.

use std::fmt;

use serde::Serialize;

use crate::enumerate::{occupancy_configs, task_configs};
use crate::error::Result;
use crate::model::{ModelSpec, ParticleKind};
use crate::scalar::{floored_relative_error, Scalar};

use super::cumulative::log_task_weight;
use super::families::ArrayName;
use super::RateFamilies;

/// Violations kept verbatim in a report; the rest are only counted.
pub const MAX_LISTED_VIOLATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// Task jumps between unloaded sites (`beta`).
    UnloadedJump,
    /// Task jumps between a loaded and an unloaded site (`theta`).
    MixedJump,
    /// Task jumps between loaded sites (`epsilon`).
    LoadedJump,
    /// DC leaps (`tau`).
    DcLeap,
    /// Task weight `V(n; y)` must not depend on `y` when DCs enter and leave.
    EnvironmentIndependence,
}

impl Condition {
    pub fn array(self) -> Option<ArrayName> {
        match self {
            Condition::UnloadedJump => Some(ArrayName::Beta),
            Condition::MixedJump => Some(ArrayName::Theta),
            Condition::LoadedJump => Some(ArrayName::Epsilon),
            Condition::DcLeap => Some(ArrayName::Tau),
            Condition::EnvironmentIndependence => None,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Condition::UnloadedJump => "unloaded task-jump symmetry (beta)",
            Condition::MixedJump => "loaded/unloaded task-jump symmetry (theta)",
            Condition::LoadedJump => "gauge-weighted loaded task-jump symmetry (epsilon)",
            Condition::DcLeap => "dc-leap symmetry (tau)",
            Condition::EnvironmentIndependence => "task weight independent of DC configuration",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

/// One point where the two sides of a condition disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation<T> {
    /// Ordered site pair (empty for environment independence).
    pub sites: Vec<usize>,
    /// Task counts at the pair, or the full task vector for leap and
    /// environment checks.
    pub counts: Vec<u32>,
    pub occupancy: Vec<u32>,
    pub lhs: T,
    pub rhs: T,
    pub relative_error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport<T> {
    pub condition: Condition,
    /// `false` when the variant has no such transitions; such reports pass.
    pub applicable: bool,
    pub tolerance: T,
    pub checked: usize,
    pub violation_count: usize,
    /// First [`MAX_LISTED_VIOLATIONS`] violations in enumeration order.
    pub violations: Vec<Violation<T>>,
    pub max_error: T,
    pub pass: bool,
    /// The point budget ran out before the domain was covered.
    pub budget_exhausted: bool,
}

struct Collector<T> {
    report: ValidationReport<T>,
    budget: usize,
}

impl<T: Scalar> Collector<T> {
    fn new(condition: Condition, spec: &ModelSpec<T>) -> Self {
        Self {
            report: ValidationReport {
                condition,
                applicable: true,
                tolerance: spec.tolerances.validation,
                checked: 0,
                violation_count: 0,
                violations: Vec::new(),
                max_error: T::zero(),
                pass: true,
                budget_exhausted: false,
            },
            budget: spec.limits.validation_points,
        }
    }

    /// Returns `false` once the budget is spent.
    fn record(&mut self, sites: &[usize], counts: &[u32], occupancy: &[u32], lhs: T, rhs: T) -> bool {
        if self.report.checked >= self.budget {
            self.report.budget_exhausted = true;
            return false;
        }
        self.report.checked += 1;
        let err = if lhs.is_finite() && rhs.is_finite() {
            floored_relative_error(lhs, rhs)
        } else if lhs == rhs {
            T::zero()
        } else {
            T::infinity()
        };
        if err > self.report.max_error || err.is_nan() {
            self.report.max_error = err;
        }
        if err.is_nan() || err > self.report.tolerance {
            self.report.violation_count += 1;
            if self.report.violations.len() < MAX_LISTED_VIOLATIONS {
                self.report.violations.push(Violation {
                    sites: sites.to_vec(),
                    counts: counts.to_vec(),
                    occupancy: occupancy.to_vec(),
                    lhs,
                    rhs,
                    relative_error: err,
                });
            }
        }
        true
    }

    fn finish(mut self) -> ValidationReport<T> {
        self.report.pass = self.report.violation_count == 0;
        self.report
    }

    fn not_applicable(mut self) -> ValidationReport<T> {
        self.report.applicable = false;
        self.finish()
    }
}

/// `(a, b)` count pairs at the two ends of a jump: `a >= 1` tasks at the
/// source and `b` at the target, with the reverse jump also in range.
fn count_pairs<T: Scalar>(spec: &ModelSpec<T>) -> Vec<(u32, u32)> {
    match spec.tag.tasks() {
        Some(total) => (1..=total)
            .flat_map(|a| (0..=total - a).map(move |b| (a, b)))
            .collect(),
        None => {
            let cap = spec.truncation.task_cap.unwrap_or(1);
            (1..=cap).flat_map(|a| (0..cap).map(move |b| (a, b))).collect()
        }
    }
}

#[derive(Clone, Copy)]
enum PairKind {
    Unloaded,
    Mixed,
    Loaded,
}

fn jump_rate<T: Scalar>(kind: PairKind, r: &RateFamilies<T>, k: usize, l: usize, a: u32, b: u32, y: &[u32]) -> T {
    match kind {
        PairKind::Unloaded => r.beta(k, l, a, b, y),
        PairKind::Mixed => r.theta(k, l, a, b, y),
        PairKind::Loaded => r.epsilon(k, l, a, b, y),
    }
}

fn validate_pairs<T: Scalar>(spec: &ModelSpec<T>, kind: PairKind) -> Result<ValidationReport<T>> {
    let condition = match kind {
        PairKind::Unloaded => Condition::UnloadedJump,
        PairKind::Mixed => Condition::MixedJump,
        PairKind::Loaded => Condition::LoadedJump,
    };
    let mut out = Collector::new(condition, spec);
    let has_dcs = spec.kind() != ParticleKind::None;
    let applicable = match kind {
        PairKind::Unloaded => true,
        PairKind::Mixed => has_dcs,
        PairKind::Loaded => matches!(spec.kind(), ParticleKind::Exclusion | ParticleKind::ZeroRange),
    };
    if !applicable {
        return Ok(out.not_applicable());
    }
    let r = &spec.rates;
    let open = spec.variant().open_tasks();
    let pairs = count_pairs(spec);
    let sites = spec.site_count();
    let ratio = |s: usize, m: u32, y: &[u32]| -> T {
        let lam = r.lambda(s, m, y);
        if lam == T::zero() {
            T::zero()
        } else {
            lam / r.mu(s, m + 1, y)
        }
    };
    'outer: for y in occupancy_configs(spec)? {
        for k in 0..sites {
            for l in 0..sites {
                if k == l {
                    continue;
                }
                let selected = match kind {
                    PairKind::Unloaded => y[k] == 0 && y[l] == 0,
                    PairKind::Mixed => y[k] > 0 && y[l] == 0,
                    PairKind::Loaded => y[k] > 0 && y[l] > 0,
                };
                if !selected {
                    continue;
                }
                for &(a, b) in &pairs {
                    let mut lhs = jump_rate(kind, r, k, l, a, b, &y);
                    let mut rhs = jump_rate(kind, r, l, k, b + 1, a - 1, &y);
                    if open {
                        lhs = lhs * ratio(k, a - 1, &y);
                        rhs = rhs * ratio(l, b, &y);
                    }
                    if let PairKind::Loaded = kind {
                        lhs = lhs * r.gauge_power(k, a - 1, &y);
                        rhs = rhs * r.gauge_power(l, b, &y);
                    }
                    if !out.record(&[k, l], &[a, b], &y, lhs, rhs) {
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(out.finish())
}

/// Unloaded task-jump symmetry.
pub fn validate_beta<T: Scalar>(spec: &ModelSpec<T>) -> Result<ValidationReport<T>> {
    validate_pairs(spec, PairKind::Unloaded)
}

/// Loaded/unloaded task-jump symmetry.
pub fn validate_theta<T: Scalar>(spec: &ModelSpec<T>) -> Result<ValidationReport<T>> {
    validate_pairs(spec, PairKind::Mixed)
}

/// Gauge-weighted symmetry of jumps between loaded sites.
pub fn validate_epsilon<T: Scalar>(spec: &ModelSpec<T>) -> Result<ValidationReport<T>> {
    validate_pairs(spec, PairKind::Loaded)
}

/// DC-leap balance: `V(n;y) a_j tau_{jj'}(n;y) = V(n;y') a_{j'} tau_{j'j}(n;y')`,
/// where `V` is the task weight (open tasks only) and `a = xi/eta` (open DCs only).
pub fn validate_tau<T: Scalar>(spec: &ModelSpec<T>) -> Result<ValidationReport<T>> {
    let mut out = Collector::new(Condition::DcLeap, spec);
    if spec.kind() == ParticleKind::None {
        return Ok(out.not_applicable());
    }
    let r = &spec.rates;
    let open_tasks = spec.variant().open_tasks();
    let open_dcs = spec.variant().open_dcs();
    if open_dcs && (r.xi.is_none() || r.eta.is_none()) {
        return Err(crate::error::Error::MissingXiEta {
            variant: spec.variant().to_string(),
        });
    }
    let exclusive = spec.kind().is_exclusive();
    let sites = spec.site_count();
    let ns = task_configs(spec)?;
    let activity = |s: usize| if open_dcs { r.activity(s) } else { T::one() };
    'outer: for y in occupancy_configs(spec)? {
        for j in 0..sites {
            if y[j] == 0 {
                continue;
            }
            for k in 0..sites {
                if k == j || (exclusive && y[k] > 0) {
                    continue;
                }
                let mut after = y.clone();
                after[j] -= 1;
                after[k] += 1;
                for n in &ns {
                    let mut lhs = activity(j) * r.tau(j, k, n, &y, open_tasks);
                    let mut rhs = activity(k) * r.tau(k, j, n, &after, open_tasks);
                    if open_tasks {
                        lhs = lhs * log_task_weight(r, n, &y).exp();
                        rhs = rhs * log_task_weight(r, n, &after).exp();
                    }
                    if !out.record(&[j, k], n, &y, lhs, rhs) {
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(out.finish())
}

/// Spread of `V(n; y)` across DC configurations, per task vector.
pub fn validate_environment_independence<T: Scalar>(
    spec: &ModelSpec<T>,
) -> Result<ValidationReport<T>> {
    let mut out = Collector::new(Condition::EnvironmentIndependence, spec);
    if !spec.variant().open_dcs() || spec.kind() == ParticleKind::None {
        return Ok(out.not_applicable());
    }
    let r = &spec.rates;
    let ys = occupancy_configs(spec)?;
    let open_tasks = spec.variant().open_tasks();
    'outer: for n in task_configs(spec)? {
        let reference = if open_tasks {
            log_task_weight(r, &n, &ys[0]).exp()
        } else {
            T::one()
        };
        for y in ys.iter().skip(1) {
            let v = if open_tasks {
                log_task_weight(r, &n, y).exp()
            } else {
                T::one()
            };
            if !out.record(&[], &n, y, reference, v) {
                break 'outer;
            }
        }
    }
    Ok(out.finish())
}

/// Every condition the variant requires, in a fixed order.
pub fn validate_all<T: Scalar>(spec: &ModelSpec<T>) -> Result<Vec<ValidationReport<T>>> {
    Ok(vec![
        validate_beta(spec)?,
        validate_theta(spec)?,
        validate_epsilon(spec)?,
        validate_environment_independence(spec)?,
        validate_tau(spec)?,
    ])
}
