//! Product-form weights, per-site series and partition functions.
//!
//! Everything is computed in log space. Unnormalized weights:
//!
//! ```text
//! ln w(y, n) = [open tasks] sum_q ln(lam_bar_q(n_q; y) / mu_bar_q(n_q; y))
//!            + sum_q y_q ln gam_bar_q(n_q)
//!            + [open DCs]  sum_q y_q ln(xi_q / eta_q)
//! ```
//!
//! and `-inf` off the conserved manifold.

use serde::Serialize;

use crate::enumerate::{box_states, compositions, occupancy_configs};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, NetworkState, ParticleKind};
use crate::rates::cumulative::{log_gauge_bar, log_task_ratio};
use crate::scalar::{log_add_exp, log_sum_exp, Scalar};

/// Natural log of an unnormalized stationary weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightValue<T> {
    /// `-inf` encodes weight zero.
    pub log_weight: T,
}

impl<T: Scalar> WeightValue<T> {
    pub fn value(self) -> T {
        self.log_weight.exp()
    }
}

/// A positive series truncated with a certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue<T> {
    /// Partial sum (a lower bound).
    pub value: T,
    pub log_value: T,
    /// Index of the last summed term.
    pub truncation_index: usize,
    /// Upper bound on the omitted tail.
    pub tail_bound: T,
    /// `tail_bound / value`.
    pub relative_tail: T,
    pub converged: bool,
}

impl<T: Scalar> SeriesValue<T> {
    fn exact(log_value: T, terms: usize) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
            truncation_index: terms,
            tail_bound: T::zero(),
            relative_tail: T::zero(),
            converged: true,
        }
    }
}

/// Sum `exp(log_term(m))` for `m = 0, 1, ...`.
///
/// Stops once the geometric bound `t_m r_m / (1 - r_m)` on the tail falls
/// below `tol` times the running sum, where `r_m = t_m / t_{m-1}` is below 1
/// and not larger than the previous ratio. A zero term ends the series
/// exactly. `window` consecutive ratios `>= 1` report divergence.
pub fn sum_series<T: Scalar>(
    name: &str,
    mut log_term: impl FnMut(u32) -> Result<T>,
    tol: T,
    window: usize,
    max_terms: usize,
) -> Result<SeriesValue<T>> {
    let slack = T::one() + T::lit(64.0) * T::epsilon();
    let mut log_sum = log_term(0)?;
    if log_sum == T::neg_infinity() {
        return Ok(SeriesValue::exact(log_sum, 0));
    }
    let mut prev_log = log_sum;
    let mut prev_ratio = T::infinity();
    let mut rising = 0usize;
    let log_tol = tol.ln();
    for m in 1..max_terms {
        let l = log_term(m as u32)?;
        if l.is_nan() {
            return Err(Error::InvalidRate {
                what: format!("term {m} of series {name}"),
                value: f64::NAN,
            });
        }
        if l == T::neg_infinity() {
            return Ok(SeriesValue::exact(log_sum, m - 1));
        }
        log_sum = log_add_exp(log_sum, l);
        let log_ratio = l - prev_log;
        let ratio = log_ratio.exp();
        prev_log = l;
        if ratio >= T::one() {
            rising += 1;
            if rising >= window {
                return Err(Error::Diverged {
                    series: name.to_string(),
                    ratio: ratio.as_f64(),
                });
            }
            prev_ratio = ratio;
            continue;
        }
        rising = 0;
        let bound_ratio = ratio.max(prev_ratio.min(ratio * slack));
        if ratio <= prev_ratio * slack && bound_ratio < T::one() {
            let log_tail = l + bound_ratio.ln() - (T::one() - bound_ratio).ln();
            if log_tail <= log_tol + log_sum {
                let value = log_sum.exp();
                let tail = log_tail.exp();
                return Ok(SeriesValue {
                    value,
                    log_value: log_sum,
                    truncation_index: m,
                    tail_bound: tail,
                    relative_tail: (log_tail - log_sum).exp(),
                    converged: true,
                });
            }
        }
        prev_ratio = ratio;
    }
    Ok(SeriesValue {
        value: log_sum.exp(),
        log_value: log_sum,
        truncation_index: max_terms.saturating_sub(1),
        tail_bound: T::infinity(),
        relative_tail: T::infinity(),
        converged: false,
    })
}

/// `ln w(state)`; `-inf` off the conserved manifold or where a factor vanishes.
pub fn log_weight<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState) -> Result<T> {
    spec.check_structure(state)?;
    if !spec.on_manifold(state) {
        return Ok(T::neg_infinity());
    }
    let r = &spec.rates;
    let y = &state.occupancy;
    let n = &state.tasks;
    let mut acc = T::zero();
    if spec.variant().open_tasks() {
        for (q, &nq) in n.iter().enumerate() {
            acc = acc + log_task_ratio(r, q, nq, y);
        }
    }
    for (q, &yq) in y.iter().enumerate() {
        if yq > 0 {
            acc = acc + T::from_count(yq) * log_gauge_bar(r, q, n[q]);
            if spec.variant().open_dcs() {
                acc = acc + T::from_count(yq) * r.activity(q).ln();
            }
        }
    }
    if acc.is_nan() {
        acc = T::neg_infinity();
    }
    Ok(acc)
}

pub fn weight<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState) -> Result<WeightValue<T>> {
    Ok(WeightValue {
        log_weight: log_weight(spec, state)?,
    })
}

fn series_name(letter: &str, site: usize, y: &[u32]) -> String {
    format!("{letter}[site {site}; y={}]", NetworkState::joined(y))
}

/// `sum_n lam_bar/mu_bar * gam_bar^e` at `site` in context `y`.
fn site_series<T: Scalar>(
    spec: &ModelSpec<T>,
    letter: &str,
    site: usize,
    y: &[u32],
    exponent: u32,
) -> Result<SeriesValue<T>> {
    let r = &spec.rates;
    let tol = &spec.tolerances;
    let e = T::from_count(exponent);
    let mut log_ratio = T::zero();
    let mut log_gauge = T::zero();
    sum_series(
        &series_name(letter, site, y),
        |m| {
            if m > 0 {
                let lam = r.lambda(site, m - 1, y);
                log_ratio = if lam > T::zero() {
                    log_ratio + lam.ln() - r.mu(site, m, y).ln()
                } else {
                    T::neg_infinity()
                };
                if exponent > 0 {
                    log_gauge = log_gauge + r.gamma(site, m - 1).ln();
                }
            }
            if log_ratio == T::neg_infinity() {
                return Ok(log_ratio);
            }
            Ok(if exponent > 0 { log_ratio + e * log_gauge } else { log_ratio })
        },
        tol.series,
        tol.divergence_window,
        tol.max_series_terms,
    )
}

/// `U_l(y) = sum_n lam_bar_l(n; y) / mu_bar_l(n; y)`.
pub fn series_u<T: Scalar>(spec: &ModelSpec<T>, site: usize, y: &[u32]) -> Result<SeriesValue<T>> {
    site_series(spec, "U", site, y, 0)
}

/// `L_r(y) = sum_n lam_bar_r gam_bar_r / mu_bar_r`.
pub fn series_l<T: Scalar>(spec: &ModelSpec<T>, site: usize, y: &[u32]) -> Result<SeriesValue<T>> {
    site_series(spec, "L", site, y, 1)
}

/// `C_r(y) = sum_n (lam_bar_r / mu_bar_r) gam_bar_r^{y_r}`.
pub fn series_c<T: Scalar>(spec: &ModelSpec<T>, site: usize, y: &[u32]) -> Result<SeriesValue<T>> {
    site_series(spec, "C", site, y, y[site])
}

/// The per-site series the variant's product form uses at `(site, y)`.
fn variant_series<T: Scalar>(spec: &ModelSpec<T>, site: usize, y: &[u32]) -> Result<SeriesValue<T>> {
    match (spec.kind(), y[site]) {
        (ParticleKind::ZeroRange, _) => series_c(spec, site, y),
        (_, 0) => series_u(spec, site, y),
        _ => series_l(spec, site, y),
    }
}

/// `ln(1 / (1 - a_q gam_bar_q(m)))`, the geometric sum over a zero-range
/// pile at site `q` with `m` tasks.
fn log_pile_sum<T: Scalar>(spec: &ModelSpec<T>, q: usize, m: u32) -> Result<T> {
    let a = spec.rates.activity(q) * log_gauge_bar(&spec.rates, q, m).exp();
    if a >= T::one() {
        return Err(Error::Diverged {
            series: format!("DC pile[site {q}; n={m}]"),
            ratio: a.as_f64(),
        });
    }
    Ok(-(-a).ln_1p())
}

/// `ln sum_{|n| = total} prod_q exp(h(q, n_q))` by convolution over sites.
fn log_convolve<T: Scalar>(
    sites: usize,
    total: u32,
    mut h: impl FnMut(usize, u32) -> Result<T>,
) -> Result<T> {
    let total = total as usize;
    let mut acc: Vec<T> = (0..=total).map(|m| h(0, m as u32)).collect::<Result<_>>()?;
    for q in 1..sites {
        let site: Vec<T> = (0..=total).map(|m| h(q, m as u32)).collect::<Result<_>>()?;
        let mut next = vec![T::neg_infinity(); total + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            *slot = log_sum_exp((0..=m).map(|i| acc[m - i] + site[i]));
        }
        acc = next;
    }
    Ok(acc[total])
}

/// Normalizing constant of the product form.
///
/// Closed-task variants are summed exactly. Open-task variants multiply
/// per-site series; the tail bound propagates from the series bounds. For
/// open zero-range DCs the DC sum is geometric per site, which requires
/// the task weight not to depend on the DC configuration.
pub fn partition_function<T: Scalar>(spec: &ModelSpec<T>) -> Result<SeriesValue<T>> {
    let sites = spec.site_count();
    let v = spec.variant();
    let r = &spec.rates;
    let zero_range_open = spec.kind() == ParticleKind::ZeroRange && v.open_dcs();

    if let Some(total) = spec.tag.tasks() {
        let log_xi = if zero_range_open {
            log_convolve(sites, total, |q, m| log_pile_sum(spec, q, m))?
        } else {
            let parts = occupancy_configs(spec)?
                .into_iter()
                .map(|y| {
                    let log_activity = if v.open_dcs() {
                        y.iter()
                            .enumerate()
                            .filter(|(_, &yq)| yq > 0)
                            .map(|(q, &yq)| T::from_count(yq) * r.activity(q).ln())
                            .sum()
                    } else {
                        T::zero()
                    };
                    let conv = log_convolve(sites, total, |q, m| {
                        Ok(if y[q] == 0 {
                            T::zero()
                        } else {
                            T::from_count(y[q]) * log_gauge_bar(r, q, m)
                        })
                    })?;
                    Ok(log_activity + conv)
                })
                .collect::<Result<Vec<T>>>()?;
            log_sum_exp(parts)
        };
        return Ok(SeriesValue::exact(log_xi, 0));
    }

    if zero_range_open {
        let zeros = vec![0u32; sites];
        let mut log_xi = T::zero();
        let mut growth = T::one();
        let mut index = 0;
        let mut converged = true;
        for q in 0..sites {
            let s = sum_series(
                &format!("pile-weighted U[site {q}]"),
                |m| {
                    let f = log_task_ratio(r, q, m, &zeros);
                    if f == T::neg_infinity() {
                        return Ok(f);
                    }
                    Ok(f + log_pile_sum(spec, q, m)?)
                },
                spec.tolerances.series,
                spec.tolerances.divergence_window,
                spec.tolerances.max_series_terms,
            )?;
            log_xi = log_xi + s.log_value;
            growth = growth * (T::one() + s.relative_tail);
            index = index.max(s.truncation_index);
            converged &= s.converged;
        }
        return Ok(combine(log_xi, growth - T::one(), index, converged));
    }

    let mut parts = Vec::new();
    let mut index = 0;
    let mut converged = true;
    for y in occupancy_configs(spec)? {
        let mut log_part = T::zero();
        let mut growth = T::one();
        for q in 0..sites {
            let s = variant_series(spec, q, &y)?;
            log_part = log_part + s.log_value;
            growth = growth * (T::one() + s.relative_tail);
            index = index.max(s.truncation_index);
            converged &= s.converged;
            if v.open_dcs() && y[q] > 0 {
                log_part = log_part + T::from_count(y[q]) * r.activity(q).ln();
            }
        }
        parts.push((log_part, growth - T::one()));
    }
    let log_xi = log_sum_exp(parts.iter().map(|p| p.0));
    let relative: T = parts
        .iter()
        .filter(|p| p.0 > T::neg_infinity())
        .map(|p| (p.0 - log_xi).exp() * p.1)
        .sum();
    Ok(combine(log_xi, relative, index, converged))
}

fn combine<T: Scalar>(log_value: T, relative_tail: T, index: usize, converged: bool) -> SeriesValue<T> {
    let value = log_value.exp();
    SeriesValue {
        value,
        log_value,
        truncation_index: index,
        tail_bound: if converged { value * relative_tail } else { T::infinity() },
        relative_tail: if converged { relative_tail } else { T::infinity() },
        converged,
    }
}

/// `pi(state) = w(state) / Xi`.
pub fn probability<T: Scalar>(spec: &ModelSpec<T>, state: &NetworkState) -> Result<T> {
    let lw = log_weight(spec, state)?;
    if lw == T::neg_infinity() {
        return Ok(T::zero());
    }
    let xi = partition_function(spec)?;
    Ok((lw - xi.log_value).exp())
}

/// Product form restricted to the truncation box and renormalized there.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDistribution<T> {
    pub states: Vec<NetworkState>,
    pub log_weights: Vec<T>,
    pub probabilities: Vec<T>,
    /// `ln` of the summed weights over the box.
    pub log_mass: T,
}

/// Enumerate the box and normalize the product form over it. For fully
/// closed variants this is the exact stationary law.
pub fn box_distribution<T: Scalar>(spec: &ModelSpec<T>) -> Result<BoxDistribution<T>> {
    let states = box_states(spec)?;
    let log_weights = states
        .iter()
        .map(|s| log_weight(spec, s))
        .collect::<Result<Vec<T>>>()?;
    let log_mass = log_sum_exp(log_weights.iter().copied());
    let probabilities = log_weights.iter().map(|&l| (l - log_mass).exp()).collect();
    Ok(BoxDistribution {
        states,
        log_weights,
        probabilities,
        log_mass,
    })
}

/// `ln` of the summed weights over the truncation box.
pub fn box_partition<T: Scalar>(spec: &ModelSpec<T>) -> Result<T> {
    let states = box_states(spec)?;
    let logs = states
        .iter()
        .map(|s| log_weight(spec, s))
        .collect::<Result<Vec<T>>>()?;
    Ok(log_sum_exp(logs))
}

/// Verdict for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesVerdict {
    pub series: String,
    pub converged: bool,
    /// Term ratio at which divergence was declared.
    pub divergent_ratio: Option<f64>,
    pub value: Option<f64>,
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcriticalityReport {
    pub pass: bool,
    /// Empty for variants on a finite space.
    pub series: Vec<SeriesVerdict>,
}

impl SubcriticalityReport {
    pub fn failures(&self) -> impl Iterator<Item = &SeriesVerdict> {
        self.series.iter().filter(|s| !s.converged)
    }
}

fn verdict<T: Scalar>(name: String, result: Result<SeriesValue<T>>) -> Result<SeriesVerdict> {
    match result {
        Ok(s) => Ok(SeriesVerdict {
            series: name,
            converged: s.converged,
            divergent_ratio: None,
            value: Some(s.value.as_f64()),
            tail_bound: Some(s.tail_bound.as_f64()),
        }),
        Err(Error::Diverged { series, ratio }) => Ok(SeriesVerdict {
            series,
            converged: false,
            divergent_ratio: Some(ratio),
            value: None,
            tail_bound: None,
        }),
        Err(e) => Err(e),
    }
}

/// Convergence of every series the partition function needs.
pub fn check_subcriticality<T: Scalar>(spec: &ModelSpec<T>) -> Result<SubcriticalityReport> {
    let v = spec.variant();
    let sites = spec.site_count();
    let mut series = Vec::new();
    let zero_range_open = spec.kind() == ParticleKind::ZeroRange && v.open_dcs();
    if zero_range_open {
        let bound = spec.tag.tasks();
        for q in 0..sites {
            match bound {
                Some(total) => {
                    let worst = (0..=total)
                        .map(|m| spec.rates.activity(q) * log_gauge_bar(&spec.rates, q, m).exp())
                        .fold(T::zero(), |a, b| a.max(b));
                    let ok = worst < T::one();
                    series.push(SeriesVerdict {
                        series: format!("DC pile[site {q}]"),
                        converged: ok,
                        divergent_ratio: (!ok).then(|| worst.as_f64()),
                        value: None,
                        tail_bound: None,
                    });
                }
                None => {
                    let zeros = vec![0u32; sites];
                    let name = format!("pile-weighted U[site {q}]");
                    let result = sum_series(
                        &name,
                        |m| {
                            let f = log_task_ratio(&spec.rates, q, m, &zeros);
                            if f == T::neg_infinity() {
                                return Ok(f);
                            }
                            Ok(f + log_pile_sum(spec, q, m)?)
                        },
                        spec.tolerances.series,
                        spec.tolerances.divergence_window,
                        spec.tolerances.max_series_terms,
                    );
                    series.push(verdict(name, result)?);
                }
            }
        }
    } else if v.open_tasks() {
        for y in occupancy_configs(spec)? {
            for q in 0..sites {
                let result = variant_series(spec, q, &y);
                let name = match spec.kind() {
                    ParticleKind::ZeroRange => series_name("C", q, &y),
                    _ if y[q] == 0 => series_name("U", q, &y),
                    _ => series_name("L", q, &y),
                };
                series.push(verdict(name, result)?);
            }
        }
    }
    let pass = series.iter().all(|s| s.converged);
    Ok(SubcriticalityReport { pass, series })
}

/// Every admissible state on the conserved manifold for fully closed
/// variants, by compositions rather than filtering.
pub fn closed_states<T: Scalar>(spec: &ModelSpec<T>) -> Result<Vec<NetworkState>> {
    let total = spec.tag.tasks().ok_or_else(|| {
        Error::InvalidSpec(format!("{} does not conserve tasks", spec.variant()))
    })?;
    let ys = occupancy_configs(spec)?;
    let ns = compositions(total, spec.site_count());
    let mut out: Vec<_> = ys
        .iter()
        .flat_map(|y| ns.iter().map(move |n| NetworkState::new(y.clone(), n.clone())))
        .collect();
    out.sort();
    Ok(out)
}
