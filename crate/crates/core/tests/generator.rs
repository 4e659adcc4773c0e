mod common;

use common::{rates, spec, state, sym3};
use dcj::{
    reachable_states, total_rate, transitions, truncated_transitions, Edit, JumpArray, LeapArray, TransitionKind,
    Variant,
};

#[test]
fn jackson_transitions_are_read_off_the_rates() {
    let mut r = rates(2, 1.0, 2.0);
    r.beta = JumpArray::Constant(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    let s = spec(Variant::V1, None, None, r, Some(3), None);
    let set = transitions(&s, &state("y=0;0|n=1;0")).unwrap();
    let mut got: Vec<(TransitionKind, Edit, f64)> = set.iter().map(|t| (t.kind, t.edit, t.rate)).collect();
    got.sort_by_key(|t| t.1);
    assert_eq!(
        got,
        vec![
            (TransitionKind::TaskArrival, Edit::TaskArrival(0), 1.0),
            (TransitionKind::TaskArrival, Edit::TaskArrival(1), 1.0),
            (TransitionKind::TaskExit, Edit::TaskExit(0), 2.0),
            (TransitionKind::TaskJumpUnloaded, Edit::TaskMove { from: 0, to: 1 }, 1.0),
        ]
    );
    assert_eq!(set.total_rate(), 5.0);
    assert_eq!(total_rate(&s, &state("y=0;0|n=1;0")).unwrap(), 5.0);
}

#[test]
fn empty_queues_leave_only_arrivals_and_leaps() {
    let phi = 0.4;
    let mut r = rates(2, 1.0, 2.0);
    r.gamma = vec![dcj::Gauge::Exponential { phi }; 2];
    r.beta = JumpArray::uniform(2, 1.0);
    r.theta = JumpArray::uniform(2, 1.0);
    r.tau = LeapArray::Constant(vec![vec![0.0, 0.7], vec![0.7, 0.0]]);
    let s = spec(Variant::V2, Some(1), None, r, Some(3), None);
    let set = transitions(&s, &state("y=1;0|n=0;0")).unwrap();
    assert!(set.iter().all(|t| matches!(t.kind, TransitionKind::TaskArrival | TransitionKind::DcLeap)));
    let leap = set.iter().find(|t| t.kind == TransitionKind::DcLeap).unwrap();
    assert_eq!(leap.rate, 0.7);
    assert_eq!(leap.target, state("y=0;1|n=0;0"));
}

#[test]
fn leap_rate_carries_inverse_gauge_of_the_source_queue() {
    let phi = -0.3;
    let mut r = rates(2, 1.0, 2.0);
    r.gamma = vec![dcj::Gauge::Exponential { phi }; 2];
    r.tau = LeapArray::Constant(vec![vec![0.0, 0.7], vec![0.7, 0.0]]);
    let s = spec(Variant::V2, Some(1), None, r, Some(6), None);
    for n in 0..=6u32 {
        let from = dcj::NetworkState::new(vec![1, 0], vec![n, 0]);
        let rate = dcj::rate_of(&s, &from, Edit::DcMove { from: 0, to: 1 }).unwrap();
        assert!(common::close(rate, 0.7 * (-phi * f64::from(n)).exp(), 1e-15));
    }
}

#[test]
fn exclusion_never_stacks_walkers() {
    let mut r = rates(3, 1.0, 2.0);
    r.beta = JumpArray::Constant(sym3(0.7, 1.3, 0.9));
    r.theta = JumpArray::Constant(sym3(1.1, 0.6, 1.4));
    r.epsilon = JumpArray::Constant(sym3(0.8, 1.2, 0.5));
    r.tau = LeapArray::Constant(sym3(0.9, 0.4, 1.6));
    let s = spec(Variant::V5, Some(1), None, r, Some(3), None);
    let set = transitions(&s, &state("y=1;0;0|n=1;2;0")).unwrap();
    assert!(!set.is_empty());
    assert!(set.iter().all(|t| t.target.occupancy.iter().all(|&y| y <= 1)));
}

#[test]
fn single_loaded_loaded_clock_sets_the_total_rate() {
    let mut r = rates(2, 1.0, 1.0);
    r.epsilon = JumpArray::Constant(vec![vec![0.0, 0.65], vec![0.0, 0.0]]);
    let s = spec(Variant::V11, Some(2), Some(1), r, None, None);
    assert_eq!(total_rate(&s, &state("y=1;1|n=1;0")).unwrap(), 0.65);
}

#[test]
fn empty_closed_network_has_no_clocks() {
    let mut r = rates(2, 1.0, 1.0);
    r.beta = JumpArray::uniform(2, 1.0);
    r.tau = LeapArray::uniform(2, 1.0);
    let s = spec(Variant::V11, Some(0), Some(0), r, None, None);
    assert_eq!(total_rate(&s, &state("y=0;0|n=0;0")).unwrap(), 0.0);
}

#[test]
fn closed_space_is_reached_without_clipping() {
    let mut r = rates(2, 1.0, 1.0);
    r.beta = JumpArray::uniform(2, 1.0);
    r.theta = JumpArray::uniform(2, 1.0);
    r.epsilon = JumpArray::uniform(2, 1.0);
    r.tau = LeapArray::uniform(2, 1.0);
    let s = spec(Variant::V11, Some(1), Some(1), r, None, None);
    let reach = reachable_states(&s, &state("y=1;0|n=1;0")).unwrap();
    assert_eq!(reach.states.len(), 4);
    assert!(!reach.boundary);
}

#[test]
fn truncated_single_queue_is_clipped_at_the_cap() {
    let s = spec(Variant::V1, None, None, rates(1, 1.0, 2.0), Some(3), None);
    let reach = reachable_states(&s, &state("y=0|n=0")).unwrap();
    assert_eq!(reach.states.len(), 4);
    assert!(reach.boundary);
    let top = truncated_transitions(&s, &state("y=0|n=3")).unwrap();
    assert!(top.clipped);
    assert_eq!(top.len(), 1);
}

#[test]
fn frozen_walker_keeps_its_site() {
    let mut r = rates(3, 1.0, 2.0);
    r.beta = JumpArray::Constant(sym3(0.7, 1.3, 0.9));
    r.theta = JumpArray::Constant(sym3(1.1, 0.6, 1.4));
    let s = spec(Variant::V3, Some(1), None, r, Some(2), None);
    let reach = reachable_states(&s, &state("y=0;1;0|n=0;0;0")).unwrap();
    assert!(reach.states.len() > 1);
    assert!(reach.states.iter().all(|t| t.occupancy == vec![0, 1, 0]));
}

#[test]
fn reachability_respects_the_state_budget() {
    let mut r = rates(3, 1.0, 2.0);
    r.beta = JumpArray::Constant(sym3(0.7, 1.3, 0.9));
    let s = spec(Variant::V1, None, None, r, Some(9), None).with_limits(dcj::Limits {
        states: 50,
        ..Default::default()
    });
    let err = reachable_states(&s, &state("y=0;0;0|n=0;0;0")).unwrap_err();
    assert_eq!(err, dcj::Error::BudgetExceeded { budget: 50 });
}
