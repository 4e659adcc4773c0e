//! Builders shared by the integration tests.
#![allow(dead_code)]

use dcj::rates::Matrix;
use dcj::{
    Gauge, Intensity, JumpArray, LeapArray, NetworkState, Rates, SiteGraph, Spec, Truncation, Variant,
    VariantTag,
};

/// Symmetric 3x3 matrix with off-diagonal entries `(a, b, c)` for pairs
/// `(0,1), (0,2), (1,2)`.
pub fn sym3(a: f64, b: f64, c: f64) -> Matrix<f64> {
    vec![vec![0.0, a, b], vec![a, 0.0, c], vec![b, c, 0.0]]
}

/// Generic positive symmetric matrix on `sites` sites.
pub fn sym(sites: usize, seed: f64) -> Matrix<f64> {
    (0..sites)
        .map(|k| {
            (0..sites)
                .map(|l| {
                    if k == l {
                        0.0
                    } else {
                        let (a, b) = (k.min(l) as f64, k.max(l) as f64);
                        0.5 + ((a * 1.7 + b * 0.9 + seed) * 1.3).sin().abs()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn constant(rate: f64) -> Intensity<f64> {
    Intensity::Constant(rate)
}

/// Constant arrivals and services at every site.
pub fn rates(sites: usize, lambda: f64, mu: f64) -> Rates {
    let mut r = Rates::new(sites);
    r.lambda = vec![constant(lambda); sites];
    r.mu = vec![constant(mu); sites];
    r
}

pub fn spec(
    variant: Variant,
    dcs: Option<u32>,
    tasks: Option<u32>,
    rates: Rates,
    task_cap: Option<u32>,
    dc_cap: Option<u32>,
) -> Spec {
    let sites = rates.gamma.len();
    Spec::new(
        SiteGraph::with_count(sites).unwrap(),
        VariantTag::new(variant, dcs, tasks).unwrap(),
        rates,
        Truncation { task_cap, dc_cap },
    )
    .unwrap()
}

/// V2 on `sites` sites with constant `lambda`, `mu`, gauge `e^phi` and
/// generic symmetric beta, theta, tau.
pub fn basic(sites: usize, lambda: f64, mu: f64, phi: f64, task_cap: u32) -> Spec {
    let mut r = rates(sites, lambda, mu);
    r.gamma = vec![Gauge::Exponential { phi }; sites];
    r.beta = JumpArray::Constant(sym(sites, 0.1));
    r.theta = JumpArray::Constant(sym(sites, 0.2));
    r.tau = LeapArray::Constant(sym(sites, 0.3));
    spec(Variant::V2, Some(1), None, r, Some(task_cap), None)
}

pub fn state(s: &str) -> NetworkState {
    s.parse().unwrap()
}

pub fn load(name: &str) -> Spec {
    let path = format!("{}/../../configs/golden/{name}.json", env!("CARGO_MANIFEST_DIR"));
    dcj::config::load_model(path).unwrap()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
