//! Detailed-balance residuals, irreducibility, and a linear-solve oracle.

use std::collections::{BTreeMap, HashMap, VecDeque};

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::box_states;
use crate::error::{Error, Result};
use crate::generator::{outgoing, rate_of, TransitionKind, View};
use crate::model::{ModelSpec, NetworkState};
use crate::scalar::Scalar;
use crate::stationary::{box_distribution, log_weight};

/// Largest space solved with a dense LU factorization.
pub const DENSE_LIMIT: usize = 2_500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceOffender {
    pub state: String,
    pub target: String,
    pub kind: TransitionKind,
    /// `ln(w(state) * rate(state -> target))`
    pub log_lhs: f64,
    /// `ln(w(target) * rate(target -> state))`
    pub log_rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub checked: usize,
    /// `|L - R| / max(L, R)` over all checked pairs.
    pub max_residual: f64,
    pub worst: Option<BalanceOffender>,
    pub tolerance: f64,
    pub pass: bool,
}

fn residual(log_lhs: f64, log_rhs: f64) -> f64 {
    if log_lhs == f64::NEG_INFINITY && log_rhs == f64::NEG_INFINITY {
        return 0.0;
    }
    let gap = (log_lhs - log_rhs).abs();
    if gap.is_nan() {
        return f64::INFINITY;
    }
    -(-gap).exp_m1()
}

/// Check `w(s) r(s -> s') = w(s') r(s' -> s)` for every transition out of
/// `states` whose target stays in the truncation box.
pub fn check_detailed_balance<T: Scalar>(
    spec: &ModelSpec<T>,
    states: &[NetworkState],
    tol: T,
) -> Result<BalanceReport> {
    let exclusive = spec.kind().is_exclusive();
    let per_state: Vec<(usize, Option<BalanceOffender>)> = states
        .par_iter()
        .map(|s| -> Result<(usize, Option<BalanceOffender>)> {
            spec.check_state(s)?;
            let mut buf = Vec::new();
            outgoing(spec, s, View::Exact, &mut buf)?;
            let lw = log_weight(spec, s)?.as_f64();
            let mut checked = 0;
            let mut worst: Option<BalanceOffender> = None;
            for &(kind, edit, rate) in &buf {
                let target = s.apply(edit, exclusive)?;
                if !spec.in_box(&target) {
                    continue;
                }
                let back = rate_of(spec, &target, edit.inverse())?;
                if back == T::zero() {
                    return Err(Error::MissingReverse {
                        from: s.to_string(),
                        to: target.to_string(),
                        rate: rate.as_f64(),
                    });
                }
                let lhs = lw + rate.as_f64().ln();
                let rhs = log_weight(spec, &target)?.as_f64() + back.as_f64().ln();
                let res = residual(lhs, rhs);
                checked += 1;
                if worst.as_ref().is_none_or(|w| res > w.residual) {
                    worst = Some(BalanceOffender {
                        state: s.to_string(),
                        target: target.to_string(),
                        kind,
                        log_lhs: lhs,
                        log_rhs: rhs,
                        residual: res,
                    });
                }
            }
            Ok((checked, worst))
        })
        .collect::<Result<_>>()?;
    let mut checked = 0;
    let mut worst: Option<BalanceOffender> = None;
    for (c, w) in per_state {
        checked += c;
        if let Some(w) = w {
            if worst.as_ref().is_none_or(|cur| w.residual > cur.residual) {
                worst = Some(w);
            }
        }
    }
    let max_residual = worst.as_ref().map_or(0.0, |w| w.residual);
    let tolerance = tol.as_f64();
    Ok(BalanceReport {
        checked,
        max_residual,
        worst,
        tolerance,
        pass: max_residual <= tolerance,
    })
}

/// Detailed balance over the whole truncation box at the spec's tolerance.
pub fn check_box_balance<T: Scalar>(spec: &ModelSpec<T>) -> Result<BalanceReport> {
    let states = box_states(spec)?;
    check_detailed_balance(spec, &states, spec.tolerances.balance)
}

/// Truncated generator on the box as sparse rows.
struct Chain {
    states: Vec<NetworkState>,
    /// `(target index, rate)` per source.
    rows: Vec<Vec<(usize, f64)>>,
}

fn build_chain<T: Scalar>(spec: &ModelSpec<T>, budget: usize) -> Result<Chain> {
    let states = box_states(spec)?;
    if states.len() > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let index: HashMap<&NetworkState, usize> =
        states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let exclusive = spec.kind().is_exclusive();
    let rows = states
        .par_iter()
        .map(|s| -> Result<Vec<(usize, f64)>> {
            let mut buf = Vec::new();
            outgoing(spec, s, View::Truncated, &mut buf)?;
            buf.iter()
                .map(|&(_, edit, rate)| {
                    let t = s.apply(edit, exclusive)?;
                    Ok((index[&t], rate.as_f64()))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Chain { states, rows })
}

fn bfs(adjacency: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &adjacency[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Irreducibility {
    pub states: usize,
    pub irreducible: bool,
    /// `(from, to)` with `to` unreachable from `from`.
    pub witness: Option<(String, String)>,
}

fn connectivity(chain: &Chain) -> Irreducibility {
    let n = chain.states.len();
    let forward: Vec<Vec<usize>> = chain
        .rows
        .iter()
        .map(|r| r.iter().map(|&(j, _)| j).collect())
        .collect();
    let mut backward = vec![Vec::new(); n];
    for (i, row) in forward.iter().enumerate() {
        for &j in row {
            backward[j].push(i);
        }
    }
    let out = bfs(&forward, 0);
    let back = bfs(&backward, 0);
    let first = &chain.states[0];
    let witness = if let Some(j) = out.iter().position(|&b| !b) {
        Some((first.to_string(), chain.states[j].to_string()))
    } else {
        back.iter()
            .position(|&b| !b)
            .map(|j| (chain.states[j].to_string(), first.to_string()))
    };
    Irreducibility {
        states: n,
        irreducible: witness.is_none(),
        witness,
    }
}

/// Strong connectivity of the truncated chain on every admissible box state.
pub fn check_irreducibility<T: Scalar>(spec: &ModelSpec<T>) -> Result<Irreducibility> {
    let chain = build_chain(spec, spec.limits.states)?;
    Ok(connectivity(&chain))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    DenseLu,
    SparseLu,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    pub states: Vec<NetworkState>,
    pub probabilities: Vec<f64>,
    pub method: SolveMethod,
    /// `max_j |(pi Q)_j| / max |Q|`
    pub relative_residual: f64,
}

fn scaled_residual(chain: &Chain, pi: &[f64]) -> f64 {
    let n = pi.len();
    let mut flow = vec![0.0; n];
    let mut max_q: f64 = 0.0;
    for (i, row) in chain.rows.iter().enumerate() {
        let out: f64 = row.iter().map(|r| r.1).sum();
        max_q = max_q.max(out);
        flow[i] -= pi[i] * out;
        for &(j, r) in row {
            flow[j] += pi[i] * r;
            max_q = max_q.max(r);
        }
    }
    let worst = flow.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if max_q == 0.0 {
        worst
    } else {
        worst / max_q
    }
}

fn normalize(mut pi: Vec<f64>) -> Vec<f64> {
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    pi
}

fn solve_dense(chain: &Chain) -> Option<Vec<f64>> {
    let n = chain.states.len();
    let mut a = Mat::<f64>::zeros(n, n);
    for (i, row) in chain.rows.iter().enumerate() {
        let out: f64 = row.iter().map(|r| r.1).sum();
        a[(i, i)] -= out;
        for &(j, r) in row {
            a[(j, i)] += r;
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let b = Col::from_fn(n, |i| if i == n - 1 { 1.0 } else { 0.0 });
    let x = a.partial_piv_lu().solve(&b);
    let x: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(normalize(x))
}

fn incoming(chain: &Chain) -> (Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let n = chain.states.len();
    let mut inc = vec![Vec::new(); n];
    let mut out = vec![0.0; n];
    for (i, row) in chain.rows.iter().enumerate() {
        for &(j, r) in row {
            inc[j].push((i, r));
            out[i] += r;
        }
    }
    (inc, out)
}

fn solve_sparse(chain: &Chain) -> Option<Vec<f64>> {
    let n = chain.states.len();
    let mut entries = Vec::new();
    for (i, row) in chain.rows.iter().enumerate() {
        let out: f64 = row.iter().map(|r| r.1).sum();
        if i != n - 1 {
            entries.push(Triplet::new(i, i, -out));
        }
        for &(j, r) in row {
            if j != n - 1 {
                entries.push(Triplet::new(j, i, r));
            }
        }
    }
    for j in 0..n {
        entries.push(Triplet::new(n - 1, j, 1.0));
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries).ok()?;
    let b = Col::from_fn(n, |i| if i == n - 1 { 1.0 } else { 0.0 });
    let x = a.sp_lu().ok()?.solve(&b);
    let x: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(normalize(x))
}

fn solve_power(chain: &Chain, target: f64) -> Vec<f64> {
    let n = chain.states.len();
    let (inc, out) = incoming(chain);
    let lambda = 1.01 * out.iter().fold(0.0f64, |a, &b| a.max(b)).max(f64::MIN_POSITIVE);
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let next: Vec<f64> = (0..n)
            .map(|j| {
                pi[j] * (1.0 - out[j] / lambda)
                    + inc[j].iter().map(|&(i, r)| pi[i] * r / lambda).sum::<f64>()
            })
            .collect();
        pi = normalize(next);
        if scaled_residual(chain, &pi) <= target {
            break;
        }
    }
    pi
}

/// Stationary law of the truncated chain by solving the global balance
/// equations directly.
pub fn oracle_stationary<T: Scalar>(spec: &ModelSpec<T>) -> Result<OracleSolution> {
    let chain = build_chain(spec, spec.limits.oracle_states)?;
    let verdict = connectivity(&chain);
    if let Some((from, to)) = verdict.witness {
        return Err(Error::Reducible { from, to });
    }
    let target = 1e-10;
    let mut attempts: Vec<(SolveMethod, Vec<f64>)> = Vec::new();
    if chain.states.len() <= DENSE_LIMIT {
        if let Some(pi) = solve_dense(&chain) {
            attempts.push((SolveMethod::DenseLu, pi));
        }
    } else {
        if let Some(pi) = solve_sparse(&chain) {
            attempts.push((SolveMethod::SparseLu, pi));
        }
    }
    let good = attempts
        .iter()
        .any(|(_, pi)| scaled_residual(&chain, pi) <= target);
    if !good {
        attempts.push((SolveMethod::PowerIteration, solve_power(&chain, target)));
    }
    let (method, probabilities) = attempts
        .into_iter()
        .min_by(|a, b| {
            scaled_residual(&chain, &a.1).total_cmp(&scaled_residual(&chain, &b.1))
        })
        .expect("at least one attempt");
    let relative_residual = scaled_residual(&chain, &probabilities);
    if !relative_residual.is_finite() {
        return Err(Error::SolveFailed("no finite solution".into()));
    }
    Ok(OracleSolution {
        states: chain.states,
        probabilities,
        method,
        relative_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub states: usize,
    pub max_abs_difference: f64,
    pub total_variation: f64,
    pub method: SolveMethod,
    pub relative_residual: f64,
}

/// Oracle against the product form renormalized on the same box.
pub fn compare_with_oracle<T: Scalar>(spec: &ModelSpec<T>) -> Result<OracleComparison> {
    let oracle = oracle_stationary(spec)?;
    let exact = box_distribution(spec)?;
    debug_assert_eq!(oracle.states, exact.states);
    let theory: Vec<f64> = exact.probabilities.iter().map(|p| p.as_f64()).collect();
    let max_abs_difference = oracle
        .probabilities
        .iter()
        .zip(&theory)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(OracleComparison {
        states: oracle.states.len(),
        max_abs_difference,
        total_variation: total_variation(&oracle.probabilities, &theory)?,
        method: oracle.method,
        relative_residual: oracle.relative_residual,
    })
}

/// `(1/2) sum |p - q|` over a common index set.
pub fn total_variation<T: Scalar>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::DomainMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let sum: T = p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum();
    Ok(sum / T::lit(2.0))
}

/// Total variation between distributions keyed by state; missing keys
/// carry mass zero.
pub fn total_variation_maps(
    p: &BTreeMap<NetworkState, f64>,
    q: &BTreeMap<NetworkState, f64>,
) -> f64 {
    let mut sum = 0.0;
    for (s, &a) in p {
        sum += (a - q.get(s).copied().unwrap_or(0.0)).abs();
    }
    for (s, &b) in q {
        if !p.contains_key(s) {
            sum += b.abs();
        }
    }
    sum / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(total_variation(&[0.5, 0.5], &[0.75, 0.25]).unwrap(), 0.25);
        assert!(matches!(
            total_variation(&[1.0], &[0.5, 0.5]),
            Err(Error::DomainMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn residual_is_relative() {
        assert_eq!(residual(0.0, 0.0), 0.0);
        let r = residual(1.1f64.ln(), 0.0);
        assert!((r - 0.1 / 1.1).abs() < 1e-15);
        assert_eq!(residual(f64::NEG_INFINITY, 0.0), 1.0);
    }

    #[test]
    fn map_variation_handles_missing_keys() {
        let a: NetworkState = "y=0|n=0".parse().unwrap();
        let b: NetworkState = "y=0|n=1".parse().unwrap();
        let p = BTreeMap::from([(a.clone(), 1.0)]);
        let q = BTreeMap::from([(a, 0.5), (b, 0.5)]);
        assert_eq!(total_variation_maps(&p, &q), 0.5);
    }
}
