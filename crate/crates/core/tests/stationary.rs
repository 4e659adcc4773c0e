mod common;

use common::{basic, close, rates, spec, state, sym3};
use dcj::stationary::{
    box_distribution, box_partition, check_subcriticality, closed_states, log_weight, partition_function,
    probability, series_c, series_l, series_u, sum_series, weight,
};
use dcj::{Error, Gauge, JumpArray, LeapArray, NetworkState, Variant};

#[test]
fn basic_model_empty_network_has_probability_one_eighth() {
    let s = basic(2, 1.0, 2.0, 0.0, 4);
    let p = probability(&s, &state("y=1;0|n=0;0")).unwrap();
    assert!(close(p, 0.125, 1e-13), "{p}");
}

#[test]
fn flat_gauge_gives_uniform_walker_times_jackson() {
    let (lambda, mu) = (1.0, 2.0);
    let rho: f64 = lambda / mu;
    let s = basic(3, lambda, mu, 0.0, 4);
    for st in dcj::enumerate::box_states(&s).unwrap() {
        let jackson: f64 = st.tasks.iter().map(|&n| (1.0 - rho) * rho.powi(n as i32)).product();
        let p = probability(&s, &st).unwrap();
        assert!(close(p, jackson / 3.0, 1e-12), "{st}: {p}");
    }
}

#[test]
fn unit_gauge_zero_range_weights_are_flat() {
    let mut r = rates(3, 1.0, 1.0);
    r.tau = LeapArray::uniform(3, 1.0);
    let s = spec(Variant::V11, Some(1), Some(2), r, None, None);
    let states = closed_states(&s).unwrap();
    assert_eq!(states.len(), 18);
    for st in &states {
        assert_eq!(log_weight(&s, st).unwrap(), 0.0);
    }
    let xi = partition_function(&s).unwrap();
    assert!(close(xi.value, 18.0, 1e-14));
    assert_eq!(xi.tail_bound, 0.0);
}

#[test]
fn geometric_series_sums_to_two() {
    let s = basic(2, 1.0, 2.0, 0.0, 4);
    let u = series_u(&s, 1, &[1, 0]).unwrap();
    assert!(close(u.value, 2.0, 1e-13), "{}", u.value);
    assert!(u.converged);
    assert!(u.tail_bound <= 1e-12);
    assert!(u.value <= 2.0 && u.value + u.tail_bound >= 2.0 * (1.0 - 1e-15));
    let l = series_l(&s, 0, &[1, 0]).unwrap();
    assert!(close(l.value, u.value, 1e-15));
}

#[test]
fn supercritical_series_diverges() {
    let s = basic(2, 2.0, 1.0, 0.0, 4);
    let err = series_u(&s, 1, &[1, 0]).unwrap_err();
    assert!(matches!(err, Error::Diverged { ratio, .. } if ratio >= 1.0));
}

#[test]
fn zero_range_series_uses_pile_gauge() {
    let mut r = rates(2, 1.0, 2.0);
    r.gamma = vec![Gauge::Exponential { phi: -0.5 }; 2];
    r.tau = LeapArray::uniform(2, 1.0);
    let s = spec(Variant::V9, Some(2), None, r, Some(4), None);
    let c = series_c(&s, 0, &[2, 0]).unwrap();
    // ratio (1/2) e^{2 phi}
    let q = 0.5 * (-1.0f64).exp();
    assert!(close(c.value, 1.0 / (1.0 - q), 1e-13));
}

#[test]
fn single_walker_partition_function_has_closed_form() {
    for phi in [-0.5, 0.0, 0.3] {
        let (lambda, mu, sites) = (1.0, 2.0, 3.0);
        let s = basic(3, lambda, mu, phi, 4);
        let xi = partition_function(&s).unwrap();
        let expect = sites / (1.0 - lambda * f64::exp(phi) / mu) / (1.0 - lambda / mu).powf(sites - 1.0);
        assert!(close(xi.value, expect, 1e-12), "phi={phi}: {} vs {expect}", xi.value);
        assert!(xi.value <= expect * (1.0 + 1e-15));
        assert!(xi.value + xi.tail_bound >= expect * (1.0 - 1e-13));
    }
}

#[test]
fn full_exclusion_has_one_occupancy() {
    let mut r = rates(3, 1.0, 1.0);
    r.gamma = vec![
        Gauge::LinearCount { phi: 0.1 },
        Gauge::LinearCount { phi: -0.2 },
        Gauge::LinearCount { phi: 0.3 },
    ];
    r.epsilon = JumpArray::TargetGauge(sym3(0.8, 1.2, 0.5));
    let s = spec(Variant::V7, Some(3), Some(3), r, None, None);
    assert_eq!(dcj::enumerate::occupancy_configs(&s).unwrap(), vec![vec![1, 1, 1]]);
    let direct: f64 = closed_states(&s)
        .unwrap()
        .iter()
        .map(|st| weight(&s, st).unwrap().value())
        .sum();
    assert!(close(partition_function(&s).unwrap().value, direct, 1e-13));
}

#[test]
fn closed_probabilities_sum_to_one() {
    for name in ["v04", "v07", "v08", "v11"] {
        let s = common::load(name);
        let total: f64 = closed_states(&s)
            .unwrap()
            .iter()
            .map(|st| probability(&s, st).unwrap())
            .sum();
        assert!((total - 1.0).abs() <= 1e-12, "{name}: {total}");
    }
}

#[test]
fn off_manifold_states_have_zero_weight() {
    let s = common::load("v11");
    let off = NetworkState::new(vec![1, 0, 0], vec![3, 0, 0]);
    assert_eq!(log_weight(&s, &off).unwrap(), f64::NEG_INFINITY);
    assert_eq!(probability(&s, &off).unwrap(), 0.0);
}

#[test]
fn subcriticality_gate_follows_the_load_factor() {
    let hot = basic(2, 1.0, 2.0, 3f64.ln(), 4);
    let rep = check_subcriticality(&hot).unwrap();
    assert!(!rep.pass);
    let f: Vec<_> = rep.failures().collect();
    assert!(!f.is_empty());
    assert!(f.iter().all(|v| v.divergent_ratio.is_some_and(|r| r >= 1.0)));
    assert!(f.iter().any(|v| v.divergent_ratio.is_some_and(|r| close(r, 1.5, 1e-12))));

    let cool = basic(2, 1.0, 2.0, 0.0, 4);
    assert!(check_subcriticality(&cool).unwrap().pass);
}

#[test]
fn closed_variants_need_no_series() {
    let s = common::load("v07");
    let rep = check_subcriticality(&s).unwrap();
    assert!(rep.pass && rep.series.is_empty());
}

#[test]
fn box_mass_is_below_the_partition_function() {
    let s = basic(3, 1.0, 2.0, -0.5, 6);
    let inside = box_partition(&s).unwrap().exp();
    let xi = partition_function(&s).unwrap();
    assert!(inside < xi.value);
    let dist = box_distribution(&s).unwrap();
    assert!((dist.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-13);
}

#[test]
fn series_engine_bounds_geometric_tails() {
    for q in [0.1f64, 0.5, 0.9, 0.99] {
        let s = sum_series("g", |m| Ok(f64::from(m) * q.ln()), 1e-14, 10, 1_000_000).unwrap();
        let exact = 1.0 / (1.0 - q);
        assert!(s.value <= exact);
        // The bound covers the omitted terms; rounding over thousands of
        // log-space additions adds about 1e-13.
        assert!(s.value + s.tail_bound >= exact * (1.0 - 1e-12), "q={q}");
        assert!(s.relative_tail <= 1e-14);
    }
}

#[test]
fn series_engine_ends_on_a_zero_term() {
    let s = sum_series("finite", |m| Ok(if m < 4 { 0.0 } else { f64::NEG_INFINITY }), 1e-14, 10, 100).unwrap();
    assert_eq!(s.value, 4.0);
    assert_eq!(s.tail_bound, 0.0);
}

#[test]
fn series_engine_reports_divergence() {
    let err = sum_series::<f64>("grow", |m| Ok(f64::from(m) * 0.01), 1e-14, 10, 1_000).unwrap_err();
    assert!(matches!(err, Error::Diverged { .. }));
}

#[test]
fn open_zero_range_partition_function_factorizes() {
    let s = common::load("v10");
    let xi = partition_function(&s).unwrap();
    assert!(xi.converged);
    // Raising the DC cap makes the box mass approach the factorized constant.
    let big = dcj::Limits { states: 2_000_000, ..Default::default() };
    let mut wide = s.clone().with_limits(big);
    wide.truncation.dc_cap = Some(9);
    wide.truncation.task_cap = Some(9);
    let inside = box_partition(&wide).unwrap().exp();
    assert!(inside <= xi.value * (1.0 + 1e-12));
    assert!(inside > xi.value * 0.99, "{inside} vs {}", xi.value);
}

#[test]
fn open_exclusion_partition_function_matches_enumeration() {
    // V8: closed tasks, open exclusion DCs, finite space.
    let s = common::load("v08");
    let direct = box_partition(&s).unwrap();
    assert!(close(partition_function(&s).unwrap().log_value, direct, 1e-13));
}

#[test]
fn pile_sums_with_closed_tasks_match_a_wide_box() {
    let s = common::load("v12");
    let xi = partition_function(&s).unwrap();
    let big = dcj::Limits { states: 2_000_000, ..Default::default() };
    let mut wide = s.clone().with_limits(big);
    wide.truncation.dc_cap = Some(30);
    let inside = box_partition(&wide).unwrap().exp();
    assert!(close(inside, xi.value, 1e-9), "{inside} vs {}", xi.value);
}
