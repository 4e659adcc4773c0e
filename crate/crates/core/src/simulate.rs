//! Exact-clock simulation with time-weighted occupation measures.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{outgoing, TransitionKind, View};
use crate::model::{Edit, ModelSpec, NetworkState};
use crate::scalar::Scalar;

/// Generator for replica `replica` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Stopping rule for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Events(u64),
    Time(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub holding: f64,
    pub kind: TransitionKind,
    pub target: NetworkState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial: NetworkState,
    /// Full event log, when requested.
    pub events: Option<Vec<Event>>,
    /// Residence time per state inside the truncation box.
    pub occupation: BTreeMap<NetworkState, f64>,
    /// Residence time outside the box.
    pub overflow_time: f64,
    pub total_time: f64,
    pub event_count: u64,
    pub kind_counts: BTreeMap<TransitionKind, u64>,
    pub seed: u64,
    pub replica: u64,
}

/// One exact-clock step: exponential holding time, then a transition drawn
/// in proportion to its rate.
pub fn step<T: Scalar, R: Rng>(
    spec: &ModelSpec<T>,
    state: &NetworkState,
    rng: &mut R,
) -> Result<(T, NetworkState)> {
    spec.check_state(state)?;
    let mut buf = Vec::new();
    let (holding, _, edit) = draw(spec, state, rng, &mut buf)?;
    Ok((T::lit(holding), state.apply(edit, spec.kind().is_exclusive())?))
}

fn draw<T: Scalar, R: Rng>(
    spec: &ModelSpec<T>,
    state: &NetworkState,
    rng: &mut R,
    buf: &mut Vec<(TransitionKind, Edit, T)>,
) -> Result<(f64, TransitionKind, Edit)> {
    outgoing(spec, state, View::Exact, buf)?;
    let total: f64 = buf.iter().map(|t| t.2.as_f64()).sum();
    if buf.is_empty() || total <= 0.0 {
        return Err(Error::AbsorbingState {
            state: state.to_string(),
        });
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let holding = -u.ln() / total;
    let mut pick = rng.random::<f64>() * total;
    let mut chosen = buf[buf.len() - 1];
    for &t in buf.iter() {
        let r = t.2.as_f64();
        if pick < r {
            chosen = t;
            break;
        }
        pick -= r;
    }
    Ok((holding, chosen.0, chosen.1))
}

/// A running simulation that can be advanced in chunks.
pub struct Simulation<'a, T> {
    spec: &'a ModelSpec<T>,
    state: NetworkState,
    initial: NetworkState,
    rng: ChaCha8Rng,
    buf: Vec<(TransitionKind, Edit, T)>,
    occupation: HashMap<NetworkState, f64>,
    overflow_time: f64,
    total_time: f64,
    event_count: u64,
    kind_counts: BTreeMap<TransitionKind, u64>,
    log: Option<Vec<Event>>,
    seed: u64,
    replica: u64,
}

impl<'a, T: Scalar> Simulation<'a, T> {
    pub fn new(
        spec: &'a ModelSpec<T>,
        initial: NetworkState,
        seed: u64,
        replica: u64,
        record_events: bool,
    ) -> Result<Self> {
        spec.check_state(&initial)?;
        Ok(Self {
            spec,
            state: initial.clone(),
            initial,
            rng: replica_rng(seed, replica),
            buf: Vec::new(),
            occupation: HashMap::new(),
            overflow_time: 0.0,
            total_time: 0.0,
            event_count: 0,
            kind_counts: BTreeMap::new(),
            log: record_events.then(Vec::new),
            seed,
            replica,
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    fn credit(&mut self, dt: f64) {
        if self.spec.in_box(&self.state) {
            match self.occupation.get_mut(&self.state) {
                Some(t) => *t += dt,
                None => {
                    self.occupation.insert(self.state.clone(), dt);
                }
            }
        } else {
            self.overflow_time += dt;
        }
        self.total_time += dt;
    }

    /// Run `events` more steps.
    pub fn advance(&mut self, events: u64) -> Result<()> {
        let exclusive = self.spec.kind().is_exclusive();
        for _ in 0..events {
            let (dt, kind, edit) = draw(self.spec, &self.state, &mut self.rng, &mut self.buf)?;
            self.credit(dt);
            self.state.apply_in_place(edit, exclusive)?;
            self.event_count += 1;
            *self.kind_counts.entry(kind).or_insert(0) += 1;
            if let Some(log) = self.log.as_mut() {
                log.push(Event {
                    holding: dt,
                    kind,
                    target: self.state.clone(),
                });
            }
        }
        Ok(())
    }

    /// Run until total simulated time reaches `horizon`; the last holding
    /// period is cut at the horizon.
    pub fn advance_to(&mut self, horizon: f64) -> Result<()> {
        let exclusive = self.spec.kind().is_exclusive();
        while self.total_time < horizon {
            let (dt, kind, edit) = draw(self.spec, &self.state, &mut self.rng, &mut self.buf)?;
            if self.total_time + dt >= horizon {
                let rest = horizon - self.total_time;
                self.credit(rest);
                self.total_time = horizon;
                break;
            }
            self.credit(dt);
            self.state.apply_in_place(edit, exclusive)?;
            self.event_count += 1;
            *self.kind_counts.entry(kind).or_insert(0) += 1;
            if let Some(log) = self.log.as_mut() {
                log.push(Event {
                    holding: dt,
                    kind,
                    target: self.state.clone(),
                });
            }
        }
        Ok(())
    }

    /// Snapshot of the occupation measure so far.
    pub fn empirical(&self) -> Result<Empirical> {
        empirical_from(&self.occupation, self.overflow_time, self.total_time)
    }

    pub fn into_trajectory(self) -> Trajectory {
        Trajectory {
            initial: self.initial,
            events: self.log,
            occupation: self.occupation.into_iter().collect(),
            overflow_time: self.overflow_time,
            total_time: self.total_time,
            event_count: self.event_count,
            kind_counts: self.kind_counts,
            seed: self.seed,
            replica: self.replica,
        }
    }
}

/// Simulate one replica under `budget`.
pub fn run<T: Scalar>(
    spec: &ModelSpec<T>,
    initial: NetworkState,
    budget: Budget,
    seed: u64,
    replica: u64,
) -> Result<Trajectory> {
    let mut sim = Simulation::new(spec, initial, seed, replica, false)?;
    match budget {
        Budget::Events(n) => sim.advance(n)?,
        Budget::Time(t) => sim.advance_to(t)?,
    }
    Ok(sim.into_trajectory())
}

/// Independent replicas `0..replicas` in parallel.
pub fn run_replicas<T: Scalar>(
    spec: &ModelSpec<T>,
    initial: &NetworkState,
    budget: Budget,
    seed: u64,
    replicas: u64,
) -> Result<Vec<Trajectory>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| run(spec, initial.clone(), budget, seed, r))
        .collect()
}

/// Time-weighted state frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Empirical {
    pub probabilities: BTreeMap<NetworkState, f64>,
    /// Fraction of time spent outside the truncation box.
    pub overflow: f64,
    pub total_time: f64,
}

fn empirical_from<'s>(
    occupation: impl IntoIterator<Item = (&'s NetworkState, &'s f64)>,
    overflow_time: f64,
    total_time: f64,
) -> Result<Empirical> {
    if total_time <= 0.0 {
        return Err(Error::EmptyTrajectory);
    }
    Ok(Empirical {
        probabilities: occupation
            .into_iter()
            .map(|(s, &t)| (s.clone(), t / total_time))
            .collect(),
        overflow: overflow_time / total_time,
        total_time,
    })
}

pub fn empirical_distribution(trajectory: &Trajectory) -> Result<Empirical> {
    empirical_from(
        &trajectory.occupation,
        trajectory.overflow_time,
        trajectory.total_time,
    )
}

/// Pool residence times of several trajectories.
pub fn merge(trajectories: &[Trajectory]) -> Result<Empirical> {
    let mut occupation: BTreeMap<NetworkState, f64> = BTreeMap::new();
    let mut overflow = 0.0;
    let mut total = 0.0;
    for t in trajectories {
        for (s, &dt) in &t.occupation {
            *occupation.entry(s.clone()).or_insert(0.0) += dt;
        }
        overflow += t.overflow_time;
        total += t.total_time;
    }
    empirical_from(&occupation, overflow, total)
}
