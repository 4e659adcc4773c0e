//! The five commands. Each writes its files atomically and returns a JSON
//! report plus human-readable summary lines.

use std::collections::BTreeMap;
use std::path::PathBuf;

use dcj::rates::validate_all;
use dcj::simulate::{Budget, Empirical, Simulation};
use dcj::stationary::{box_distribution, check_subcriticality, partition_function, SubcriticalityReport};
use dcj::verify::{check_box_balance, compare_with_oracle};
use dcj::{state_dimension, NetworkState, Spec, TransitionKind};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{num, write_json, Csv, Provenance};
use crate::{load, out_path, CliError, CliResult, Loaded, Options};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: Vec<String>,
    pub report: Value,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            crate::EXIT_OK
        } else {
            crate::EXIT_FAILED
        }
    }
}

fn divergent_lines(sub: &SubcriticalityReport) -> Vec<String> {
    sub.failures()
        .map(|s| match s.divergent_ratio {
            Some(r) => format!("divergent series {} (term ratio {r:.6} >= 1)", s.series),
            None => format!("series {} did not converge within the term budget", s.series),
        })
        .collect()
}

/// Every symmetry condition the variant requires, plus subcriticality.
pub fn cmd_validate(opts: &Options) -> CliResult<Outcome> {
    let Loaded { spec, provenance, .. } = load(opts)?;
    let reports = validate_all(&spec)?;
    let sub = check_subcriticality(&spec)?;
    let mut summary = Vec::new();
    for r in &reports {
        summary.push(format!(
            "{} {}: max error {:.3e} over {} points{}",
            if r.pass { "PASS" } else { "FAIL" },
            r.condition.describe(),
            r.max_error,
            r.checked,
            if r.applicable { "" } else { " (not applicable)" },
        ));
    }
    summary.push(format!(
        "{} subcriticality ({} series)",
        if sub.pass { "PASS" } else { "FAIL" },
        sub.series.len()
    ));
    summary.extend(divergent_lines(&sub));
    let pass = reports.iter().all(|r| r.pass) && sub.pass;
    let conditions: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "condition": r.condition,
                "description": r.condition.describe(),
                "applicable": r.applicable,
                "pass": r.pass,
                "checked": r.checked,
                "max_error": r.max_error,
                "tolerance": r.tolerance,
                "violation_count": r.violation_count,
                "violations": r.violations,
                "budget_exhausted": r.budget_exhausted,
            })
        })
        .collect();
    let report = json!({
        "provenance": provenance,
        "command": "validate",
        "variant": spec.variant(),
        "tolerances": tolerances(&spec),
        "conditions": conditions,
        "subcriticality": sub,
        "pass": pass,
    });
    let path = out_path(opts, "validate.json");
    write_json(&path, &report)?;
    Ok(Outcome {
        pass,
        summary,
        report,
        files: vec![path],
    })
}

fn tolerances(spec: &Spec) -> Value {
    let t = &spec.tolerances;
    json!({
        "validation": t.validation,
        "series": t.series,
        "balance": t.balance,
        "oracle": t.oracle,
        "divergence_window": t.divergence_window,
        "max_series_terms": t.max_series_terms,
    })
}

/// Product-form weights and probabilities over the enumerated space.
pub fn cmd_stationary(opts: &Options) -> CliResult<Outcome> {
    let Loaded { spec, provenance, .. } = load(opts)?;
    let sub = check_subcriticality(&spec)?;
    if !sub.pass {
        let lines = divergent_lines(&sub);
        return Err(CliError::failed(anyhow::anyhow!(
            "no stationary law: {}",
            lines.join("; ")
        )));
    }
    let xi = partition_function(&spec)?;
    let dist = box_distribution(&spec)?;
    let exact = spec.variant().is_finite();
    let probabilities: Vec<f64> = dist
        .log_weights
        .iter()
        .map(|&lw| (lw - xi.log_value).exp())
        .collect();
    let box_mass: f64 = probabilities.iter().sum();
    let mut csv = Csv::new(
        &provenance,
        &[
            ("variant", spec.variant().to_string()),
            ("states", dist.states.len().to_string()),
            ("partition_function", num(xi.value)),
            ("log_partition_function", num(xi.log_value)),
            ("partition_tail_bound", num(xi.tail_bound)),
            ("series_terms", xi.truncation_index.to_string()),
            ("space", if exact { "full".into() } else { "truncated".into() }),
        ],
        &["state", "log_weight", "probability"],
    );
    for ((s, &lw), &p) in dist.states.iter().zip(&dist.log_weights).zip(&probabilities) {
        csv.row(&[s.to_string(), num(lw), num(p)]);
    }
    csv.trailer("box_mass", num(box_mass));
    if !exact {
        csv.trailer("omitted_mass", num((1.0 - box_mass).max(0.0)));
    }
    let path = out_path(opts, "stationary.csv");
    csv.write(&path)?;
    let summary = vec![
        format!("partition function {:.12e} (tail bound {:.3e})", xi.value, xi.tail_bound),
        format!("{} states, probability mass {:.15}", dist.states.len(), box_mass),
    ];
    let report = json!({
        "provenance": provenance,
        "command": "stationary",
        "variant": spec.variant(),
        "tolerances": tolerances(&spec),
        "partition_function": xi,
        "states": dist.states.len(),
        "box_mass": box_mass,
        "full_space": exact,
        "subcriticality": sub,
    });
    Ok(Outcome {
        pass: true,
        summary,
        report,
        files: vec![path],
    })
}

/// Detailed balance on the box, then the linear-solve oracle when the box
/// is small enough.
pub fn cmd_verify(opts: &Options) -> CliResult<Outcome> {
    let Loaded { spec, provenance, .. } = load(opts)?;
    let balance = check_box_balance(&spec)?;
    let mut summary = vec![format!(
        "{} detailed balance: max residual {:.3e} over {} transitions (tolerance {:.1e})",
        if balance.pass { "PASS" } else { "FAIL" },
        balance.max_residual,
        balance.checked,
        balance.tolerance
    )];
    if let Some(w) = balance.worst.as_ref().filter(|_| !balance.pass) {
        summary.push(format!(
            "worst offender: {} {} -> {} (residual {:.6})",
            w.kind, w.state, w.target, w.residual
        ));
    }
    let size = state_dimension(&spec).states;
    let oracle_limit = spec.limits.oracle_states;
    let (oracle, oracle_pass) = if size > oracle_limit as u128 {
        summary.push(format!(
            "oracle skipped: {size} states exceed the oracle limit of {oracle_limit}"
        ));
        (json!({ "skipped": true, "states": size, "limit": oracle_limit }), true)
    } else {
        let c = compare_with_oracle(&spec)?;
        let ok = c.max_abs_difference <= spec.tolerances.oracle;
        summary.push(format!(
            "{} oracle: max |diff| {:.3e}, total variation {:.3e} over {} states ({:?})",
            if ok { "PASS" } else { "FAIL" },
            c.max_abs_difference,
            c.total_variation,
            c.states,
            c.method
        ));
        let mut v = serde_json::to_value(&c).map_err(anyhow::Error::from)?;
        v["skipped"] = json!(false);
        v["pass"] = json!(ok);
        (v, ok)
    };
    let pass = balance.pass && oracle_pass;
    let report = json!({
        "provenance": provenance,
        "command": "verify",
        "variant": spec.variant(),
        "tolerances": tolerances(&spec),
        "balance": balance,
        "oracle": oracle,
        "pass": pass,
    });
    let path = out_path(opts, "verify.json");
    write_json(&path, &report)?;
    Ok(Outcome {
        pass,
        summary,
        report,
        files: vec![path],
    })
}

/// Reference law for simulation: product-form probabilities on the box and
/// the mass outside it.
struct Reference {
    inside: BTreeMap<NetworkState, f64>,
    outside: f64,
}

fn reference(spec: &Spec) -> Option<Reference> {
    if !check_subcriticality(spec).ok()?.pass {
        return None;
    }
    let xi = partition_function(spec).ok()?;
    let dist = box_distribution(spec).ok()?;
    let inside: BTreeMap<NetworkState, f64> = dist
        .states
        .into_iter()
        .zip(dist.log_weights)
        .map(|(s, lw)| (s, (lw - xi.log_value).exp()))
        .collect();
    let outside = (1.0 - inside.values().sum::<f64>()).max(0.0);
    Some(Reference { inside, outside })
}

/// Total variation with the out-of-box mass as one extra atom.
fn distance(e: &Empirical, r: &Reference) -> f64 {
    dcj::verify::total_variation_maps(&e.probabilities, &r.inside) + (e.overflow - r.outside).abs() / 2.0
}

/// Pool snapshots weighting each by its simulated time.
fn pool(parts: &[&Empirical]) -> Option<Empirical> {
    let total: f64 = parts.iter().map(|e| e.total_time).sum();
    if total <= 0.0 {
        return None;
    }
    let mut probabilities = BTreeMap::new();
    let mut overflow = 0.0;
    for e in parts {
        let w = e.total_time / total;
        for (s, p) in &e.probabilities {
            *probabilities.entry(s.clone()).or_insert(0.0) += p * w;
        }
        overflow += e.overflow * w;
    }
    Some(Empirical {
        probabilities,
        overflow,
        total_time: total,
    })
}

fn checkpoints(budget: Budget) -> Vec<Budget> {
    match budget {
        Budget::Events(n) => {
            let mut out = Vec::new();
            let mut c = 10u64;
            while c < n {
                out.push(Budget::Events(c));
                c = c.saturating_mul(10);
            }
            out.push(Budget::Events(n));
            out
        }
        Budget::Time(t) => (0..4)
            .rev()
            .map(|k| Budget::Time(t / 10f64.powi(k)))
            .collect(),
    }
}

fn budget_label(b: Budget) -> String {
    match b {
        Budget::Events(n) => format!("events:{n}"),
        Budget::Time(t) => format!("time:{}", num(t)),
    }
}

fn budget_value(b: Budget) -> String {
    match b {
        Budget::Events(n) => n.to_string(),
        Budget::Time(t) => num(t),
    }
}

#[derive(Debug, Clone, Serialize)]
struct ReplicaSummary {
    replica: u64,
    events: u64,
    total_time: f64,
    overflow_fraction: f64,
    final_state: String,
    kind_counts: BTreeMap<TransitionKind, u64>,
}

struct ReplicaRun {
    summary: ReplicaSummary,
    snapshots: Vec<Option<Empirical>>,
    occupation: BTreeMap<NetworkState, f64>,
}

fn run_replica(spec: &Spec, init: &NetworkState, plan: &[Budget], seed: u64, replica: u64) -> dcj::Result<ReplicaRun> {
    let mut sim = Simulation::new(spec, init.clone(), seed, replica, false)?;
    let mut snapshots = Vec::with_capacity(plan.len());
    for &b in plan {
        match b {
            Budget::Events(n) => sim.advance(n - sim.event_count())?,
            Budget::Time(t) => sim.advance_to(t)?,
        }
        snapshots.push(sim.empirical().ok());
    }
    let final_state = sim.state().to_string();
    let t = sim.into_trajectory();
    Ok(ReplicaRun {
        summary: ReplicaSummary {
            replica,
            events: t.event_count,
            total_time: t.total_time,
            overflow_fraction: if t.total_time > 0.0 { t.overflow_time / t.total_time } else { 0.0 },
            final_state,
            kind_counts: t.kind_counts,
        },
        snapshots,
        occupation: t.occupation,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn occupation_csv(provenance: &Provenance, comments: &[(&str, String)], occupation: &BTreeMap<NetworkState, f64>, total: f64) -> Csv {
    let mut csv = Csv::new(provenance, comments, &["state", "time", "fraction"]);
    for (s, &t) in occupation {
        csv.row(&[s.to_string(), num(t), num(t / total)]);
    }
    csv
}

/// Independent exact-clock replicas, their occupation measures, and the
/// distance to the product form as the budget grows.
pub fn cmd_simulate(opts: &Options) -> CliResult<Outcome> {
    let Loaded {
        config,
        spec,
        provenance,
    } = load(opts)?;
    let budget = match (opts.events, opts.time) {
        (Some(_), Some(_)) => {
            return Err(CliError::input(anyhow::anyhow!("give at most one of --events and --time")))
        }
        (_, Some(t)) if !(t.is_finite() && t >= 0.0) => {
            return Err(CliError::input(anyhow::anyhow!("--time must be finite and non-negative")))
        }
        (_, Some(t)) => Budget::Time(t),
        (Some(n), None) => Budget::Events(n),
        (None, None) => Budget::Events(100_000),
    };
    let replicas = opts.replicas.unwrap_or(1);
    if replicas == 0 {
        return Err(CliError::input(anyhow::anyhow!("--replicas must be at least 1")));
    }
    let init = config.initial_state(&spec)?;
    spec.check_state(&init)?;
    let seed = provenance.seed;
    let plan = checkpoints(budget);
    let runs: Vec<ReplicaRun> = (0..replicas)
        .into_par_iter()
        .map(|r| run_replica(&spec, &init, &plan, seed, r))
        .collect::<dcj::Result<_>>()?;
    let exact = reference(&spec);

    let mut files = Vec::new();
    let comments = |extra: Vec<(&'static str, String)>| {
        let mut c = vec![
            ("variant", spec.variant().to_string()),
            ("initial", init.to_string()),
            ("budget", budget_label(budget)),
        ];
        c.extend(extra);
        c
    };
    for run in &runs {
        let s = &run.summary;
        let csv = occupation_csv(
            &provenance,
            &comments(vec![
                ("replica", s.replica.to_string()),
                ("events", s.events.to_string()),
                ("total_time", num(s.total_time)),
                ("overflow_fraction", num(s.overflow_fraction)),
            ]),
            &run.occupation,
            s.total_time,
        );
        let path = out_path(opts, &format!("occupation_replica{}.csv", s.replica));
        csv.write(&path)?;
        files.push(path);
    }

    let finals: Vec<&Empirical> = runs.iter().filter_map(|r| r.snapshots.last()?.as_ref()).collect();
    let merged = pool(&finals);
    let mut merged_csv = Csv::new(
        &provenance,
        &comments(vec![
            ("replicas", replicas.to_string()),
            ("total_time", num(merged.as_ref().map_or(0.0, |m| m.total_time))),
            ("overflow_fraction", num(merged.as_ref().map_or(0.0, |m| m.overflow))),
        ]),
        &["state", "fraction", "exact"],
    );
    if let Some(m) = &merged {
        let mut states: Vec<&NetworkState> = m.probabilities.keys().collect();
        if let Some(r) = &exact {
            states.extend(r.inside.keys());
            states.sort();
            states.dedup();
        }
        for s in states {
            let p = m.probabilities.get(s).copied().unwrap_or(0.0);
            let e = exact
                .as_ref()
                .map_or(String::new(), |r| num(r.inside.get(s).copied().unwrap_or(0.0)));
            merged_csv.row(&[s.to_string(), num(p), e]);
        }
    }
    let path = out_path(opts, "occupation.csv");
    merged_csv.write(&path)?;
    files.push(path);

    let mut table = Vec::new();
    if let Some(r) = &exact {
        let mut csv = Csv::new(
            &provenance,
            &comments(vec![("replicas", replicas.to_string())]),
            &["budget", "merged_tv", "median_replica_tv", "min_replica_tv", "max_replica_tv"],
        );
        for (i, &b) in plan.iter().enumerate() {
            let snaps: Vec<&Empirical> = runs.iter().filter_map(|run| run.snapshots[i].as_ref()).collect();
            let Some(m) = pool(&snaps) else { continue };
            let per: Vec<f64> = snaps.iter().map(|e| distance(e, r)).collect();
            let merged_tv = distance(&m, r);
            let med = median(per.clone());
            let lo = per.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = per.iter().copied().fold(0.0, f64::max);
            csv.row(&[budget_value(b), num(merged_tv), num(med), num(lo), num(hi)]);
            table.push(json!({
                "budget": b,
                "merged_tv": merged_tv,
                "median_replica_tv": med,
                "replica_tv": per,
            }));
        }
        let path = out_path(opts, "convergence.csv");
        csv.write(&path)?;
        files.push(path);
    }

    let merged_tv = match (&merged, &exact) {
        (Some(m), Some(r)) => Some(distance(m, r)),
        _ => None,
    };
    let mut summary = vec![format!(
        "{replicas} replica(s), {} events in total, seed {seed}",
        runs.iter().map(|r| r.summary.events).sum::<u64>()
    )];
    match merged_tv {
        Some(tv) => summary.push(format!("merged total variation to the product form: {tv:.4e}")),
        None if merged.is_none() => summary.push("empty budget: no time was simulated".into()),
        None => summary.push("product form not computable here; distances skipped".into()),
    }
    let report = json!({
        "provenance": provenance,
        "command": "simulate",
        "variant": spec.variant(),
        "initial": init.to_string(),
        "budget": budget,
        "replicas": runs.iter().map(|r| &r.summary).collect::<Vec<_>>(),
        "merged_total_time": merged.as_ref().map(|m| m.total_time),
        "merged_overflow": merged.as_ref().map(|m| m.overflow),
        "merged_tv": merged_tv,
        "convergence": table,
    });
    let path = out_path(opts, "simulate.json");
    write_json(&path, &report)?;
    files.push(path);
    Ok(Outcome {
        pass: true,
        summary,
        report,
        files,
    })
}

/// `validate`, `stationary` and `verify` in one run, combined into
/// `report.json`.
pub fn cmd_report(opts: &Options) -> CliResult<Outcome> {
    let Loaded { spec, provenance, .. } = load(opts)?;
    let mut sections = serde_json::Map::new();
    let mut summary = Vec::new();
    let mut files = Vec::new();
    let mut pass = true;
    type Command = fn(&Options) -> CliResult<Outcome>;
    let steps: [(&str, Command); 3] = [
        ("validate", cmd_validate),
        ("stationary", cmd_stationary),
        ("verify", cmd_verify),
    ];
    for (name, command) in steps {
        match command(opts) {
            Ok(o) => {
                pass &= o.pass;
                summary.extend(o.summary.iter().map(|l| format!("[{name}] {l}")));
                files.extend(o.files);
                sections.insert(name.into(), o.report);
            }
            Err(e) if e.kind == crate::ErrorKind::Failed => {
                pass = false;
                summary.push(format!("[{name}] FAIL {e}"));
                sections.insert(name.into(), json!({ "error": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let report = json!({
        "provenance": provenance,
        "command": "report",
        "variant": spec.variant(),
        "tolerances": tolerances(&spec),
        "sections": sections,
        "pass": pass,
    });
    let path = out_path(opts, "report.json");
    write_json(&path, &report)?;
    files.push(path);
    Ok(Outcome {
        pass,
        summary,
        report,
        files,
    })
}
