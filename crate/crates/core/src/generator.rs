//! Outgoing transitions of a state under any variant.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Edit, ModelSpec, NetworkState, ParticleKind};
use crate::rates::cumulative::log_gauge_bar;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    TaskArrival,
    TaskExit,
    TaskJumpUnloaded,
    TaskJumpFromLoaded,
    TaskJumpToLoaded,
    TaskJumpLoadedLoaded,
    DcLeap,
    DcArrival,
    DcExit,
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::TaskArrival => "task-arrival",
            Self::TaskExit => "task-exit",
            Self::TaskJumpUnloaded => "task-jump-unloaded",
            Self::TaskJumpFromLoaded => "task-jump-from-loaded",
            Self::TaskJumpToLoaded => "task-jump-to-loaded",
            Self::TaskJumpLoadedLoaded => "task-jump-loaded-loaded",
            Self::DcLeap => "dc-leap",
            Self::DcArrival => "dc-arrival",
            Self::DcExit => "dc-exit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub kind: TransitionKind,
    pub edit: Edit,
    pub target: NetworkState,
    pub rate: T,
}

/// All positive-rate transitions out of `source`, ordered by kind then sites.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSet<T> {
    pub source: NetworkState,
    pub transitions: Vec<Transition<T>>,
    /// Some exact-model transition was dropped because its target left the box.
    pub clipped: bool,
}

impl<T: Scalar> TransitionSet<T> {
    pub fn total_rate(&self) -> T {
        self.transitions.iter().map(|t| t.rate).sum()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition<T>> {
        self.transitions.iter()
    }
}

/// Exact model, or the box-truncated chain with out-of-box moves dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Exact,
    Truncated,
}

fn checked<T: Scalar>(what: impl FnOnce() -> String, rate: T) -> Result<T> {
    if rate.is_finite() && rate >= T::zero() {
        Ok(rate)
    } else {
        Err(Error::InvalidRate {
            what: what(),
            value: rate.as_f64(),
        })
    }
}

/// Kind and rate of `edit` applied at `state`, or `None` when the variant
/// has no such move from there. The state is assumed admissible.
pub fn edit_rate<T: Scalar>(
    spec: &ModelSpec<T>,
    state: &NetworkState,
    edit: Edit,
) -> Result<Option<(TransitionKind, T)>> {
    let r = &spec.rates;
    let v = spec.variant();
    let y = &state.occupancy[..];
    let n = &state.tasks[..];
    let sites = spec.site_count();
    let kind = spec.kind();
    let has_dcs = kind != ParticleKind::None;
    let exclusive = kind.is_exclusive();
    let in_range = |s: usize| s < sites;
    let what = || format!("{edit:?} at {state}");
    let out = match edit {
        Edit::TaskArrival(p) => {
            if !v.open_tasks() || !in_range(p) {
                return Ok(None);
            }
            let lam = r.lambda(p, n[p], y);
            let rate = if lam == T::zero() {
                T::zero()
            } else {
                lam * r.gauge_power(p, n[p], y)
            };
            (TransitionKind::TaskArrival, rate)
        }
        Edit::TaskExit(p) => {
            if !v.open_tasks() || !in_range(p) || n[p] == 0 {
                return Ok(None);
            }
            (TransitionKind::TaskExit, r.mu(p, n[p], y))
        }
        Edit::TaskMove { from: k, to: l } => {
            if k == l || !in_range(k) || !in_range(l) || n[k] == 0 {
                return Ok(None);
            }
            match (y[k] > 0, y[l] > 0) {
                (false, false) => (TransitionKind::TaskJumpUnloaded, r.beta(k, l, n[k], n[l], y)),
                (true, false) => (TransitionKind::TaskJumpFromLoaded, r.theta(k, l, n[k], n[l], y)),
                (false, true) => {
                    let base = r.theta(k, l, n[k], n[l], y);
                    let rate = if base == T::zero() {
                        base
                    } else {
                        base * r.gauge_power(l, n[l], y)
                    };
                    (TransitionKind::TaskJumpToLoaded, rate)
                }
                (true, true) => (
                    TransitionKind::TaskJumpLoadedLoaded,
                    r.epsilon(k, l, n[k], n[l], y),
                ),
            }
        }
        Edit::DcMove { from: j, to: k } => {
            if !has_dcs || j == k || !in_range(j) || !in_range(k) || y[j] == 0 {
                return Ok(None);
            }
            if exclusive && y[k] > 0 {
                return Ok(None);
            }
            let tau = r.tau(j, k, n, y, v.open_tasks());
            let rate = if tau == T::zero() {
                tau
            } else {
                let log_gauge = T::from_count(y[j]) * log_gauge_bar(r, j, n[j])
                    + if y[k] > 0 {
                        T::from_count(y[k]) * log_gauge_bar(r, k, n[k])
                    } else {
                        T::zero()
                    };
                tau * (-log_gauge).exp()
            };
            (TransitionKind::DcLeap, rate)
        }
        Edit::DcArrival(k) => {
            if !has_dcs || !v.open_dcs() || !in_range(k) || (exclusive && y[k] > 0) {
                return Ok(None);
            }
            let xi = r.xi.as_ref().map_or(T::zero(), |x| x[k]);
            let rate = if xi == T::zero() {
                xi
            } else {
                xi * log_gauge_bar(r, k, n[k]).exp()
            };
            (TransitionKind::DcArrival, rate)
        }
        Edit::DcExit(i) => {
            if !has_dcs || !v.open_dcs() || !in_range(i) || y[i] == 0 {
                return Ok(None);
            }
            let eta = r.eta.as_ref().map_or(T::zero(), |e| e[i]);
            (TransitionKind::DcExit, eta)
        }
    };
    Ok(Some((out.0, checked(what, out.1)?)))
}

/// Positive-rate moves `(kind, edit, rate)` out of `state` in canonical order.
/// Returns whether a move was dropped by truncation.
pub(crate) fn outgoing<T: Scalar>(
    spec: &ModelSpec<T>,
    state: &NetworkState,
    view: View,
    buf: &mut Vec<(TransitionKind, Edit, T)>,
) -> Result<bool> {
    buf.clear();
    let sites = spec.site_count();
    let exclusive = spec.kind().is_exclusive();
    let mut clipped = false;
    let mut scratch = state.clone();
    let mut push = |edit: Edit, buf: &mut Vec<(TransitionKind, Edit, T)>| -> Result<()> {
        if let Some((kind, rate)) = edit_rate(spec, state, edit)? {
            if rate > T::zero() {
                if view == View::Truncated {
                    scratch.clone_from(state);
                    scratch.apply_in_place(edit, exclusive)?;
                    if !spec.in_box(&scratch) {
                        clipped = true;
                        return Ok(());
                    }
                }
                buf.push((kind, edit, rate));
            }
        }
        Ok(())
    };
    for p in 0..sites {
        push(Edit::TaskArrival(p), buf)?;
    }
    for p in 0..sites {
        push(Edit::TaskExit(p), buf)?;
    }
    for k in 0..sites {
        for l in 0..sites {
            push(Edit::TaskMove { from: k, to: l }, buf)?;
        }
    }
    for j in 0..sites {
        for k in 0..sites {
            push(Edit::DcMove { from: j, to: k }, buf)?;
        }
    }
    for k in 0..sites {
        push(Edit::DcArrival(k), buf)?;
    }
    for i in 0..sites {
        push(Edit::DcExit(i), buf)?;
    }
    // stable: sites stay in order within a kind
    buf.sort_by_key(|(kind, _, _)| *kind);
    Ok(clipped)
}

fn build<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState, view: View) -> Result<TransitionSet<T>> {
    spec.check_state(state)?;
    let mut buf = Vec::new();
    let clipped = outgoing(spec, state, view, &mut buf)?;
    let exclusive = spec.kind().is_exclusive();
    let transitions = buf
        .into_iter()
        .map(|(kind, edit, rate)| {
            Ok(Transition {
                kind,
                edit,
                target: state.apply(edit, exclusive)?,
                rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionSet {
        source: state.clone(),
        transitions,
        clipped,
    })
}

/// Every positive-rate transition of the exact model.
pub fn transitions<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState) -> Result<TransitionSet<T>> {
    build(spec, state, View::Exact)
}

/// Transitions restricted to the truncation box.
pub fn truncated_transitions<T: Scalar>(
    spec: &ModelSpec<T>,
    state: &NetworkState,
) -> Result<TransitionSet<T>> {
    build(spec, state, View::Truncated)
}

/// Sum of all exact-model rates out of `state`.
pub fn total_rate<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState) -> Result<T> {
    spec.check_state(state)?;
    let mut buf = Vec::new();
    outgoing(spec, state, View::Exact, &mut buf)?;
    Ok(buf.iter().map(|t| t.2).sum())
}

/// Rate of the single move `edit` from `state` (zero when absent).
pub fn rate_of<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState, edit: Edit) -> Result<T> {
    Ok(edit_rate(spec, state, edit)?.map_or(T::zero(), |(_, r)| r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reachable {
    /// Sorted.
    pub states: Vec<NetworkState>,
    /// Some exact-model transition out of the set was dropped by truncation.
    pub boundary: bool,
}

/// Breadth-first closure of `seed` under truncated transitions.
pub fn reachable_states<T: Scalar>(spec: &ModelSpec<T>, seed: &NetworkState) -> Result<Reachable> {
    spec.check_state(seed)?;
    if !spec.in_box(seed) {
        return Err(Error::InadmissibleState {
            state: seed.to_string(),
            reason: "outside the truncation box".into(),
        });
    }
    let budget = spec.limits.states;
    let exclusive = spec.kind().is_exclusive();
    let mut seen: HashSet<NetworkState> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut boundary = false;
    let mut buf = Vec::new();
    seen.insert(seed.clone());
    queue.push_back(seed.clone());
    while let Some(state) = queue.pop_front() {
        boundary |= outgoing(spec, &state, View::Truncated, &mut buf)?;
        for &(_, edit, _) in &buf {
            let next = state.apply(edit, exclusive)?;
            if !seen.contains(&next) {
                if seen.len() >= budget {
                    return Err(Error::BudgetExceeded { budget });
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    let states: BTreeSet<_> = seen.into_iter().collect();
    Ok(Reachable {
        states: states.into_iter().collect(),
        boundary,
    })
}
