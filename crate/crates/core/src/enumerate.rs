//! Enumeration of occupancy and task configurations.

use crate::error::{Error, Result};
use crate::model::{binomial, ModelSpec, NetworkState, ParticleKind};
use crate::scalar::Scalar;

/// All vectors of `parts` non-negative entries summing to `total`,
/// in lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0u32; parts];
    fn fill(pos: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == current.len() {
            current[pos] = left;
            out.push(current.clone());
            return;
        }
        for v in 0..=left {
            current[pos] = v;
            fill(pos + 1, left - v, current, out);
        }
    }
    fill(0, total, &mut current, &mut out);
    out
}

/// All 0/1 vectors of length `parts`, restricted to `size` ones when given.
pub fn subsets(parts: usize, size: Option<u32>) -> Vec<Vec<u32>> {
    grid(parts, 1)
        .into_iter()
        .filter(|v| size.is_none_or(|m| v.iter().sum::<u32>() == m))
        .collect()
}

/// All vectors of length `parts` with entries in `0..=cap`.
pub fn grid(parts: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; parts];
    loop {
        out.push(current.clone());
        let mut pos = parts;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < cap {
                current[pos] += 1;
                for v in current.iter_mut().skip(pos + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

fn power(base: u64, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(u128::from(base)))
}

fn within(count: u128, budget: usize) -> Result<()> {
    if count > budget as u128 {
        Err(Error::BudgetExceeded { budget })
    } else {
        Ok(())
    }
}

/// Admissible occupancy vectors (capped at `y_max` for open zero-range).
pub fn occupancy_configs<T: Scalar>(spec: &ModelSpec<T>) -> Result<Vec<Vec<u32>>> {
    let sites = spec.site_count();
    let budget = spec.limits.states;
    Ok(match (spec.kind(), spec.tag.dcs()) {
        (ParticleKind::None, _) => vec![vec![0; sites]],
        (ParticleKind::SingleDc | ParticleKind::Exclusion, Some(m)) => {
            within(binomial(sites as u64, u64::from(m)), budget)?;
            subsets(sites, Some(m))
        }
        (ParticleKind::Exclusion, None) => {
            within(power(2, sites), budget)?;
            subsets(sites, None)
        }
        (ParticleKind::ZeroRange, Some(m)) => {
            within(binomial(u64::from(m) + sites as u64 - 1, sites as u64 - 1), budget)?;
            compositions(m, sites)
        }
        (ParticleKind::ZeroRange, None) => {
            let cap = spec.truncation.dc_cap.unwrap_or(0);
            within(power(u64::from(cap) + 1, sites), budget)?;
            grid(sites, cap)
        }
        (ParticleKind::SingleDc, None) => unreachable!("single-DC tags carry M = 1"),
    })
}

/// Task vectors: compositions of `N`, or the `n_max` box.
pub fn task_configs<T: Scalar>(spec: &ModelSpec<T>) -> Result<Vec<Vec<u32>>> {
    let sites = spec.site_count();
    let budget = spec.limits.states;
    match spec.tag.tasks() {
        Some(n) => {
            within(binomial(u64::from(n) + sites as u64 - 1, sites as u64 - 1), budget)?;
            Ok(compositions(n, sites))
        }
        None => {
            let cap = spec.truncation.task_cap.unwrap_or(0);
            within(power(u64::from(cap) + 1, sites), budget)?;
            Ok(grid(sites, cap))
        }
    }
}

/// Every admissible state of the (truncated) space, sorted.
pub fn box_states<T: Scalar>(spec: &ModelSpec<T>) -> Result<Vec<NetworkState>> {
    let ys = occupancy_configs(spec)?;
    let ns = task_configs(spec)?;
    within((ys.len() as u128).saturating_mul(ns.len() as u128), spec.limits.states)?;
    let mut out = Vec::with_capacity(ys.len() * ns.len());
    for y in &ys {
        for n in &ns {
            out.push(NetworkState::new(y.clone(), n.clone()));
        }
    }
    out.sort();
    Ok(out)
}
