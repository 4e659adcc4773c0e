mod common;

use common::{rates, spec, state};
use dcj::model::Boundary;
use dcj::{apply_edit, state_dimension, Edit, Error, NetworkState, ParticleKind, SiteGraph, Variant, VariantTag};

#[test]
fn dimension_of_closed_zero_range_counts_positions_times_placements() {
    let s = spec(Variant::V11, Some(1), Some(1), rates(2, 1.0, 1.0), None, None);
    let d = state_dimension(&s);
    assert_eq!(d.states, 4);
    assert!(d.exact);
}

#[test]
fn dimension_of_closed_exclusion_without_tasks() {
    let s = spec(Variant::V7, Some(2), Some(0), rates(3, 1.0, 1.0), None, None);
    assert_eq!(state_dimension(&s).states, 3);
}

#[test]
fn dimension_of_truncated_jackson_grid() {
    let s = spec(Variant::V1, None, None, rates(2, 1.0, 2.0), Some(3), None);
    let d = state_dimension(&s);
    assert_eq!(d.states, 16);
    assert!(!d.exact);
}

#[test]
fn task_move_shifts_one_task() {
    let s = state("y=0;0|n=2;0");
    let t = apply_edit(&s, Edit::TaskMove { from: 0, to: 1 }, ParticleKind::None).unwrap();
    assert_eq!(t.tasks, vec![1, 1]);
}

#[test]
fn exit_from_empty_queue_is_rejected() {
    let s = state("y=0;0|n=0;0");
    let err = apply_edit(&s, Edit::TaskExit(0), ParticleKind::None).unwrap_err();
    assert_eq!(err, Error::NegativeCount { site: 0 });
}

#[test]
fn exclusion_rejects_a_second_walker() {
    let s = state("y=1;0|n=0;0");
    let err = apply_edit(&s, Edit::DcArrival(0), ParticleKind::Exclusion).unwrap_err();
    assert_eq!(err, Error::ExclusionViolated { site: 0 });
    let ok = apply_edit(&s, Edit::DcArrival(0), ParticleKind::ZeroRange).unwrap();
    assert_eq!(ok.occupancy, vec![2, 0]);
}

#[test]
fn every_edit_is_undone_by_its_inverse() {
    let s = state("y=1;0;2|n=3;1;0");
    let edits = [
        Edit::TaskArrival(1),
        Edit::TaskExit(0),
        Edit::TaskMove { from: 0, to: 2 },
        Edit::DcMove { from: 2, to: 1 },
        Edit::DcArrival(1),
        Edit::DcExit(0),
    ];
    for e in edits {
        let t = apply_edit(&s, e, ParticleKind::ZeroRange).unwrap();
        assert_eq!(apply_edit(&t, e.inverse(), ParticleKind::ZeroRange).unwrap(), s, "{e:?}");
    }
}

#[test]
fn state_text_round_trips() {
    let s = NetworkState::new(vec![0, 1, 0], vec![4, 0, 12]);
    assert_eq!(s.to_string(), "y=0;1;0|n=4;0;12");
    assert_eq!(s.to_string().parse::<NetworkState>().unwrap(), s);
    assert!("y=1;0|n=0".parse::<NetworkState>().is_err());
    assert!("n=1;0|y=0;0".parse::<NetworkState>().is_err());
}

#[test]
fn tags_enforce_conserved_counts() {
    assert!(VariantTag::new(Variant::V1, Some(1), None).is_err());
    assert!(VariantTag::new(Variant::V4, Some(1), None).is_err());
    assert!(VariantTag::new(Variant::V4, Some(2), Some(3)).is_err());
    assert!(VariantTag::new(Variant::V7, None, Some(3)).is_err());
    assert!(VariantTag::new(Variant::V6, Some(1), None).is_err());
    assert!(VariantTag::new(Variant::V11, Some(2), Some(3)).is_ok());
    assert_eq!(VariantTag::new(Variant::V3, Some(1), None).unwrap().dcs(), Some(1));
}

#[test]
fn twelve_combinations_map_one_to_one() {
    let mut seen = Vec::new();
    for kind in [ParticleKind::SingleDc, ParticleKind::Exclusion, ParticleKind::ZeroRange] {
        for tasks in [Boundary::Open, Boundary::Closed] {
            for dcs in [Boundary::Open, Boundary::Closed] {
                if let Some(v) = Variant::from_parts(kind, tasks, dcs) {
                    assert_eq!(v.particle_kind(), kind);
                    assert_eq!(v.task_boundary(), tasks);
                    assert_eq!(v.dc_boundary(), dcs);
                    seen.push(v);
                }
            }
        }
    }
    seen.push(Variant::V1);
    seen.push(Variant::V2);
    seen.sort();
    seen.dedup();
    assert_eq!(seen, Variant::ALL.to_vec());
}

#[test]
fn labels_must_be_unique() {
    assert!(SiteGraph::new(vec!["a".into(), "a".into()]).is_err());
    assert!(SiteGraph::new(Vec::new()).is_err());
    let g = SiteGraph::new(vec!["a".into(), "b".into()]).unwrap();
    assert_eq!(g.index_of("b"), Some(1));
}

#[test]
fn single_dc_states_hold_exactly_one_walker() {
    let s = spec(Variant::V4, Some(1), Some(2), rates(3, 1.0, 1.0), None, None);
    assert!(s.check_state(&state("y=0;1;0|n=1;0;1")).is_ok());
    assert!(s.check_state(&state("y=1;1;0|n=1;0;1")).is_err());
    assert!(s.check_state(&state("y=0;1;0|n=1;0;0")).is_err());
    assert!(s.check_state(&state("y=0;1|n=1;1")).is_err());
}

#[test]
fn default_state_packs_walkers_then_tasks() {
    let s = spec(Variant::V11, Some(2), Some(3), rates(3, 1.0, 1.0), None, None);
    assert_eq!(s.default_state(), state("y=1;1;0|n=3;0;0"));
    let s = spec(Variant::V1, None, None, rates(2, 1.0, 2.0), Some(3), None);
    assert_eq!(s.default_state(), state("y=0;0|n=0;0"));
}
