//! JSON model configuration.
//!
//! Families are `{"kind": ..., "params": {...}}` objects; per-site families
//! and vectors accept either one value for every site or a list.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Limits, ModelSpec, NetworkState, SiteGraph, Tolerances, Truncation, Variant, VariantTag};
use crate::rates::{Gauge, Intensity, JumpArray, LeapArray, Matrix, RateFamilies};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: String, message: String },
    /// Malformed JSON.
    Parse { line: usize, column: usize, message: String },
    /// Well-formed JSON that does not fit the schema; `path` is the field.
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// A field fits the schema but its value is not allowed.
    BadParameter { path: String, message: String },
    /// Structurally valid config describing an invalid model.
    Model(Error),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            Self::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            Self::Schema { path, line, column, message } => {
                if *line > 0 {
                    write!(f, "schema error at `{path}` (line {line}, column {column}): {message}")
                } else {
                    write!(f, "schema error at `{path}`: {message}")
                }
            }
            Self::BadParameter { path, message } => write!(f, "bad parameter `{path}`: {message}"),
            Self::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        match e {
            Error::BadParameter { name, reason } => Self::BadParameter {
                path: name,
                message: reason,
            },
            other => Self::Model(other),
        }
    }
}

fn schema(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        path: path.to_string(),
        line: 0,
        column: 0,
        message: message.into(),
    }
}

fn bad_param(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadParameter {
        path: path.to_string(),
        message: message.into(),
    }
}

/// One value shared by all sites, or one per site.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PerSite<V> {
    Each(Vec<V>),
    All(V),
}

/// Dispatches on the JSON shape instead of buffering like `untagged`, so
/// schema errors keep the full field path.
impl<'de, V: Deserialize<'de>> Deserialize<'de> for PerSite<V> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::{self, value, IntoDeserializer};
        use std::marker::PhantomData;

        struct Shape<V>(PhantomData<V>);

        impl<'de, V: Deserialize<'de>> de::Visitor<'de> for Shape<V> {
            type Value = PerSite<V>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("one value for every site or a per-site list")
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, seq: A) -> Result<Self::Value, A::Error> {
                Vec::deserialize(value::SeqAccessDeserializer::new(seq)).map(PerSite::Each)
            }

            fn visit_map<A: de::MapAccess<'de>>(self, map: A) -> Result<Self::Value, A::Error> {
                V::deserialize(value::MapAccessDeserializer::new(map)).map(PerSite::All)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                V::deserialize(v.into_deserializer()).map(PerSite::All)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                V::deserialize(v.into_deserializer()).map(PerSite::All)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                V::deserialize(v.into_deserializer()).map(PerSite::All)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                V::deserialize(v.into_deserializer()).map(PerSite::All)
            }
        }

        d.deserialize_any(Shape(PhantomData))
    }
}

impl<V: Clone> PerSite<V> {
    fn expand(&self, path: &str, sites: usize) -> Result<Vec<V>, ConfigError> {
        match self {
            Self::All(v) => Ok(vec![v.clone(); sites]),
            Self::Each(list) if list.len() == sites => Ok(list.clone()),
            Self::Each(list) => Err(schema(
                path,
                format!("expected {sites} per-site entries, got {}", list.len()),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IntensityConfig {
    Constant { rate: f64 },
    Blocked { rate: f64, capacity: f64 },
    Servers { rate: f64, servers: f64 },
    Loaded {
        unloaded: Box<IntensityConfig>,
        loaded: Box<IntensityConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GaugeConfig {
    Unit,
    Exponential { phi: f64 },
    InverseCount { phi: f64 },
    LinearCount { phi: f64 },
}

/// Either a uniform off-diagonal value or a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JumpConfig {
    Zero,
    Constant(ArrayParams),
    TargetRatio(ArrayParams),
    TargetGauge(ArrayParams),
    TargetRatioGauge(ArrayParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LeapConfig {
    Zero,
    Constant(ArrayParams),
    TargetWeight(ArrayParams),
    TargetActivity(ArrayParams),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<PerSite<IntensityConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<PerSite<IntensityConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<PerSite<GaugeConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<JumpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<JumpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<JumpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<LeapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<PerSite<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<PerSite<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dc_cap: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_series_terms: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_points: Option<usize>,
}

/// The configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    /// Number of sites.
    pub sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Conserved DC count `M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dcs: Option<u32>,
    /// Conserved task count `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<u32>,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Initial state for simulation, as `y=..|n=..`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

fn intensity<T: Scalar>(c: &IntensityConfig, path: &str, service: bool) -> Result<Intensity<T>, ConfigError> {
    let positive = |x: f64, field: &str| -> Result<T, ConfigError> {
        if x.is_finite() && x > 0.0 {
            Ok(T::lit(x))
        } else if service {
            Err(bad_param(
                &format!("{path}.{field}"),
                format!("service intensity must be positive for every n >= 1, got {x}"),
            ))
        } else {
            Err(bad_param(&format!("{path}.{field}"), format!("must be positive, got {x}")))
        }
    };
    let rename = |e: Error, field: &str| match e {
        Error::BadParameter { reason, .. } => bad_param(&format!("{path}.{field}"), reason),
        other => ConfigError::Model(other),
    };
    Ok(match c {
        IntensityConfig::Constant { rate } => Intensity::Constant(positive(*rate, "rate")?),
        IntensityConfig::Blocked { rate, capacity } => {
            if service {
                return Err(bad_param(
                    path,
                    "a blocked family vanishes at large n; service must stay positive",
                ));
            }
            Intensity::blocked(positive(*rate, "rate")?, *capacity).map_err(|e| rename(e, "capacity"))?
        }
        IntensityConfig::Servers { rate, servers } => {
            Intensity::servers(positive(*rate, "rate")?, *servers).map_err(|e| rename(e, "servers"))?
        }
        IntensityConfig::Loaded { unloaded, loaded } => Intensity::loaded(
            intensity(unloaded, &format!("{path}.unloaded"), service)?,
            intensity(loaded, &format!("{path}.loaded"), service)?,
        ),
    })
}

fn gauge<T: Scalar>(c: &GaugeConfig) -> Gauge<T> {
    match c {
        GaugeConfig::Unit => Gauge::Unit,
        GaugeConfig::Exponential { phi } => Gauge::Exponential { phi: T::lit(*phi) },
        GaugeConfig::InverseCount { phi } => Gauge::InverseCount { phi: T::lit(*phi) },
        GaugeConfig::LinearCount { phi } => Gauge::LinearCount { phi: T::lit(*phi) },
    }
}

fn matrix<T: Scalar>(p: &ArrayParams, path: &str, sites: usize) -> Result<Matrix<T>, ConfigError> {
    match (p.value, &p.matrix) {
        (Some(v), None) => Ok((0..sites)
            .map(|k| {
                (0..sites)
                    .map(|l| if k == l { T::zero() } else { T::lit(v) })
                    .collect()
            })
            .collect()),
        (None, Some(m)) => {
            if m.len() != sites || m.iter().any(|r| r.len() != sites) {
                return Err(schema(
                    &format!("{path}.params.matrix"),
                    format!("expected a {sites}x{sites} matrix"),
                ));
            }
            Ok(m.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect())
        }
        _ => Err(schema(
            &format!("{path}.params"),
            "give exactly one of `value` or `matrix`",
        )),
    }
}

fn jump<T: Scalar>(c: &Option<JumpConfig>, path: &str, sites: usize) -> Result<JumpArray<T>, ConfigError> {
    Ok(match c {
        None | Some(JumpConfig::Zero) => JumpArray::Zero,
        Some(JumpConfig::Constant(p)) => JumpArray::Constant(matrix(p, path, sites)?),
        Some(JumpConfig::TargetRatio(p)) => JumpArray::TargetRatio(matrix(p, path, sites)?),
        Some(JumpConfig::TargetGauge(p)) => JumpArray::TargetGauge(matrix(p, path, sites)?),
        Some(JumpConfig::TargetRatioGauge(p)) => JumpArray::TargetRatioGauge(matrix(p, path, sites)?),
    })
}

fn leap<T: Scalar>(c: &Option<LeapConfig>, path: &str, sites: usize) -> Result<LeapArray<T>, ConfigError> {
    Ok(match c {
        None | Some(LeapConfig::Zero) => LeapArray::Zero,
        Some(LeapConfig::Constant(p)) => LeapArray::Constant(matrix(p, path, sites)?),
        Some(LeapConfig::TargetWeight(p)) => LeapArray::TargetWeight(matrix(p, path, sites)?),
        Some(LeapConfig::TargetActivity(p)) => LeapArray::TargetActivity(matrix(p, path, sites)?),
    })
}

impl ModelConfig {
    /// Parse a JSON document, reporting the field path of schema errors.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let parsed: Result<Self, _> = serde_path_to_error::deserialize(&mut de);
        let config = parsed.map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            match inner.classify() {
                serde_json::error::Category::Data => ConfigError::Schema {
                    path,
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                },
                _ => ConfigError::Parse {
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                },
            }
        })?;
        de.end().map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Build the model, enforcing variant-required fields and family invariants.
    pub fn to_spec<T: Scalar>(&self) -> Result<ModelSpec<T>, ConfigError> {
        let v = self.variant;
        let sites = self.sites;
        if sites == 0 {
            return Err(schema("sites", "must be at least 1"));
        }
        let graph = match &self.labels {
            Some(labels) => {
                if labels.len() != sites {
                    return Err(schema("labels", format!("expected {sites} labels")));
                }
                SiteGraph::new(labels.clone())?
            }
            None => SiteGraph::with_count(sites)?,
        };

        let kind = v.particle_kind();
        let closed_dcs = kind != crate::model::ParticleKind::None && !v.open_dcs();
        match (closed_dcs, self.dcs) {
            (true, None) if kind == crate::model::ParticleKind::SingleDc => {}
            (true, None) => return Err(schema("dcs", format!("required for {v} (conserved DC count M)"))),
            (false, Some(_)) => return Err(schema("dcs", format!("not allowed for {v}"))),
            _ => {}
        }
        match (v.open_tasks(), self.tasks) {
            (false, None) => return Err(schema("tasks", format!("required for {v} (conserved task count N)"))),
            (true, Some(_)) => return Err(schema("tasks", format!("not allowed for {v}"))),
            _ => {}
        }
        let dcs = if kind == crate::model::ParticleKind::SingleDc {
            Some(self.dcs.unwrap_or(1))
        } else {
            self.dcs
        };
        let tag = VariantTag::new(v, dcs, self.tasks)?;

        let rc = &self.rates;
        if v.open_tasks() {
            if rc.lambda.is_none() {
                return Err(schema("rates.lambda", format!("required for {v} (open tasks)")));
            }
            if rc.mu.is_none() {
                return Err(schema("rates.mu", format!("required for {v} (open tasks)")));
            }
            if self.truncation.task_cap.is_none() {
                return Err(schema("truncation.task_cap", format!("required for {v} (open tasks)")));
            }
        }
        if v.open_dcs() {
            if rc.xi.is_none() {
                return Err(schema("rates.xi", format!("required for {v} (open DC boundary)")));
            }
            if rc.eta.is_none() {
                return Err(schema("rates.eta", format!("required for {v} (open DC boundary)")));
            }
            if kind == crate::model::ParticleKind::ZeroRange && self.truncation.dc_cap.is_none() {
                return Err(schema("truncation.dc_cap", format!("required for {v} (open zero-range DCs)")));
            }
        }

        let mut rates = RateFamilies::<T>::new(sites);
        if let Some(l) = &rc.lambda {
            rates.lambda = l
                .expand("rates.lambda", sites)?
                .iter()
                .enumerate()
                .map(|(i, c)| intensity(c, &format!("rates.lambda[{i}]"), false))
                .collect::<Result<_, _>>()?;
        }
        if let Some(m) = &rc.mu {
            rates.mu = m
                .expand("rates.mu", sites)?
                .iter()
                .enumerate()
                .map(|(i, c)| intensity(c, &format!("rates.mu[{i}]"), true))
                .collect::<Result<_, _>>()?;
        }
        if let Some(g) = &rc.gamma {
            rates.gamma = g.expand("rates.gamma", sites)?.iter().map(gauge).collect();
        }
        rates.beta = jump(&rc.beta, "rates.beta", sites)?;
        rates.theta = jump(&rc.theta, "rates.theta", sites)?;
        rates.epsilon = jump(&rc.epsilon, "rates.epsilon", sites)?;
        rates.tau = leap(&rc.tau, "rates.tau", sites)?;
        if let Some(xi) = &rc.xi {
            rates.xi = Some(xi.expand("rates.xi", sites)?.into_iter().map(T::lit).collect());
        }
        if let Some(eta) = &rc.eta {
            rates.eta = Some(eta.expand("rates.eta", sites)?.into_iter().map(T::lit).collect());
        }

        let truncation = Truncation {
            task_cap: self.truncation.task_cap,
            dc_cap: self.truncation.dc_cap,
        };
        let d = Tolerances::<T>::default();
        let t = &self.tolerances;
        let tolerances = Tolerances {
            validation: t.validation.map_or(d.validation, T::lit),
            series: t.series.map_or(d.series, T::lit),
            balance: t.balance.map_or(d.balance, T::lit),
            oracle: t.oracle.map_or(d.oracle, T::lit),
            divergence_window: t.divergence_window.unwrap_or(d.divergence_window),
            max_series_terms: t.max_series_terms.unwrap_or(d.max_series_terms),
        };
        for (name, x) in [
            ("tolerances.validation", tolerances.validation),
            ("tolerances.series", tolerances.series),
            ("tolerances.balance", tolerances.balance),
            ("tolerances.oracle", tolerances.oracle),
        ] {
            if !(x.is_finite() && x > T::zero()) {
                return Err(bad_param(name, format!("must be positive, got {x}")));
            }
        }
        let dl = Limits::default();
        let limits = Limits {
            states: self.limits.states.unwrap_or(dl.states),
            oracle_states: self.limits.oracle_states.unwrap_or(dl.oracle_states),
            validation_points: self.limits.validation_points.unwrap_or(dl.validation_points),
        };
        let spec = ModelSpec::new(graph, tag, rates, truncation)?
            .with_tolerances(tolerances)
            .with_limits(limits);
        if let Some(init) = &self.initial {
            let state: NetworkState = init
                .parse()
                .map_err(|_| schema("initial", format!("cannot parse state `{init}`")))?;
            spec.check_state(&state)
                .map_err(|e| bad_param("initial", e.to_string()))?;
        }
        Ok(spec)
    }

    /// Initial simulation state: the configured one or the canonical default.
    pub fn initial_state<T: Scalar>(&self, spec: &ModelSpec<T>) -> Result<NetworkState, ConfigError> {
        match &self.initial {
            Some(s) => s
                .parse()
                .map_err(|_| schema("initial", format!("cannot parse state `{s}`"))),
            None => Ok(spec.default_state()),
        }
    }

    /// Canonical config describing `spec`; fails for custom closures.
    pub fn from_spec(spec: &ModelSpec<f64>) -> Result<Self, ConfigError> {
        fn intensity_back(f: &Intensity<f64>, path: &str) -> Result<IntensityConfig, ConfigError> {
            Ok(match f {
                Intensity::Constant(r) => IntensityConfig::Constant { rate: *r },
                Intensity::Blocked { rate, capacity } => IntensityConfig::Blocked {
                    rate: *rate,
                    capacity: f64::from(*capacity),
                },
                Intensity::Servers { rate, servers } => IntensityConfig::Servers {
                    rate: *rate,
                    servers: f64::from(*servers),
                },
                Intensity::Loaded { unloaded, loaded } => IntensityConfig::Loaded {
                    unloaded: Box::new(intensity_back(unloaded, path)?),
                    loaded: Box::new(intensity_back(loaded, path)?),
                },
                Intensity::Custom(_) => return Err(schema(path, "custom families cannot be serialized")),
            })
        }
        fn gauge_back(g: &Gauge<f64>) -> Result<GaugeConfig, ConfigError> {
            Ok(match g {
                Gauge::Unit => GaugeConfig::Unit,
                Gauge::Exponential { phi } => GaugeConfig::Exponential { phi: *phi },
                Gauge::InverseCount { phi } => GaugeConfig::InverseCount { phi: *phi },
                Gauge::LinearCount { phi } => GaugeConfig::LinearCount { phi: *phi },
                Gauge::Custom(_) => return Err(schema("rates.gamma", "custom gauges cannot be serialized")),
            })
        }
        fn params(m: &Matrix<f64>) -> ArrayParams {
            ArrayParams {
                value: None,
                matrix: Some(m.clone()),
            }
        }
        fn jump_back(a: &JumpArray<f64>, path: &str) -> Result<JumpConfig, ConfigError> {
            Ok(match a {
                JumpArray::Zero => JumpConfig::Zero,
                JumpArray::Constant(m) => JumpConfig::Constant(params(m)),
                JumpArray::TargetRatio(m) => JumpConfig::TargetRatio(params(m)),
                JumpArray::TargetGauge(m) => JumpConfig::TargetGauge(params(m)),
                JumpArray::TargetRatioGauge(m) => JumpConfig::TargetRatioGauge(params(m)),
                JumpArray::Custom(_) => return Err(schema(path, "custom arrays cannot be serialized")),
            })
        }
        let r = &spec.rates;
        let tau = match &r.tau {
            LeapArray::Zero => LeapConfig::Zero,
            LeapArray::Constant(m) => LeapConfig::Constant(params(m)),
            LeapArray::TargetWeight(m) => LeapConfig::TargetWeight(params(m)),
            LeapArray::TargetActivity(m) => LeapConfig::TargetActivity(params(m)),
            LeapArray::Custom(_) => return Err(schema("rates.tau", "custom arrays cannot be serialized")),
        };
        let v = spec.variant();
        let t = &spec.tolerances;
        let l = &spec.limits;
        Ok(Self {
            variant: v,
            sites: spec.site_count(),
            labels: Some(spec.graph.labels().to_vec()),
            dcs: if v.open_dcs() { None } else { spec.tag.dcs() },
            tasks: spec.tag.tasks(),
            rates: RatesConfig {
                lambda: Some(PerSite::Each(
                    r.lambda
                        .iter()
                        .enumerate()
                        .map(|(i, f)| intensity_back(f, &format!("rates.lambda[{i}]")))
                        .collect::<Result<_, _>>()?,
                )),
                mu: Some(PerSite::Each(
                    r.mu.iter()
                        .enumerate()
                        .map(|(i, f)| intensity_back(f, &format!("rates.mu[{i}]")))
                        .collect::<Result<_, _>>()?,
                )),
                gamma: Some(PerSite::Each(r.gamma.iter().map(gauge_back).collect::<Result<_, _>>()?)),
                beta: Some(jump_back(&r.beta, "rates.beta")?),
                theta: Some(jump_back(&r.theta, "rates.theta")?),
                epsilon: Some(jump_back(&r.epsilon, "rates.epsilon")?),
                tau: Some(tau),
                xi: r.xi.clone().map(PerSite::Each),
                eta: r.eta.clone().map(PerSite::Each),
            },
            truncation: TruncationConfig {
                task_cap: spec.truncation.task_cap,
                dc_cap: spec.truncation.dc_cap,
            },
            tolerances: TolerancesConfig {
                validation: Some(t.validation),
                series: Some(t.series),
                balance: Some(t.balance),
                oracle: Some(t.oracle),
                divergence_window: Some(t.divergence_window),
                max_series_terms: Some(t.max_series_terms),
            },
            limits: LimitsConfig {
                states: Some(l.states),
                oracle_states: Some(l.oracle_states),
                validation_points: Some(l.validation_points),
            },
            seed: None,
            initial: None,
        })
    }
}

/// Read and parse a config file.
pub fn read_config(path: impl AsRef<Path>) -> Result<ModelConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ModelConfig::from_json(&text)
}

/// Read a config file and build the `f64` model.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelSpec<f64>, ConfigError> {
    read_config(path)?.to_spec()
}
