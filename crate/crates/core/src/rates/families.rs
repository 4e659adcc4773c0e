//! Built-in rate families and the container holding all of them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ParticleKind, Variant};
use crate::scalar::Scalar;

/// `(site, count, occupancy) -> rate`
pub type IntensityFn<T> = Arc<dyn Fn(usize, u32, &[u32]) -> T + Send + Sync>;
/// `count -> factor`
pub type GaugeFn<T> = Arc<dyn Fn(u32) -> T + Send + Sync>;
/// `(source, target, source count, target count, occupancy) -> rate`
pub type JumpFn<T> = Arc<dyn Fn(usize, usize, u32, u32, &[u32]) -> T + Send + Sync>;
/// `(from, to, tasks, occupancy) -> rate`
pub type LeapFn<T> = Arc<dyn Fn(usize, usize, &[u32], &[u32]) -> T + Send + Sync>;

/// Square site-indexed matrix of constants.
pub type Matrix<T> = Vec<Vec<T>>;

fn bad(name: &str, reason: impl Into<String>) -> Error {
    Error::BadParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn positive<T: Scalar>(name: &str, x: T) -> Result<T> {
    if x.is_finite() && x > T::zero() {
        Ok(x)
    } else {
        Err(bad(name, format!("must be positive and finite, got {x}")))
    }
}

fn whole(name: &str, x: f64) -> Result<u32> {
    if x.is_finite() && x >= 1.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) {
        Ok(x as u32)
    } else {
        Err(bad(name, format!("must be an integer >= 1, got {x}")))
    }
}

/// Arrival or service intensity at one site.
#[derive(Clone)]
pub enum Intensity<T> {
    Constant(T),
    /// `rate * 1(n < capacity)`
    Blocked { rate: T, capacity: u32 },
    /// `rate * min(n, servers)`
    Servers { rate: T, servers: u32 },
    /// One family at unloaded sites, another where the site holds a DC.
    Loaded {
        unloaded: Box<Intensity<T>>,
        loaded: Box<Intensity<T>>,
    },
    Custom(IntensityFn<T>),
}

impl<T: Scalar> Intensity<T> {
    pub fn constant(rate: T) -> Result<Self> {
        Ok(Self::Constant(positive("rate", rate)?))
    }

    pub fn blocked(rate: T, capacity: f64) -> Result<Self> {
        Ok(Self::Blocked {
            rate: positive("rate", rate)?,
            capacity: whole("capacity", capacity)?,
        })
    }

    pub fn servers(rate: T, servers: f64) -> Result<Self> {
        Ok(Self::Servers {
            rate: positive("rate", rate)?,
            servers: whole("servers", servers)?,
        })
    }

    pub fn loaded(unloaded: Intensity<T>, loaded: Intensity<T>) -> Self {
        Self::Loaded {
            unloaded: Box::new(unloaded),
            loaded: Box::new(loaded),
        }
    }

    pub fn custom(f: impl Fn(usize, u32, &[u32]) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn rate(&self, site: usize, n: u32, y: &[u32]) -> T {
        match self {
            Self::Constant(r) => *r,
            Self::Blocked { rate, capacity } => {
                if n < *capacity {
                    *rate
                } else {
                    T::zero()
                }
            }
            Self::Servers { rate, servers } => *rate * T::from_count(n.min(*servers)),
            Self::Loaded { unloaded, loaded } => {
                if y.get(site).copied().unwrap_or(0) > 0 {
                    loaded.rate(site, n, y)
                } else {
                    unloaded.rate(site, n, y)
                }
            }
            Self::Custom(f) => f(site, n, y),
        }
    }

    /// `Some(true)` when the family is provably positive for every `n >= 1`.
    fn positive_for_counts(&self) -> Option<bool> {
        match self {
            Self::Constant(r) => Some(*r > T::zero()),
            Self::Blocked { .. } => Some(false),
            Self::Servers { rate, .. } => Some(*rate > T::zero()),
            Self::Loaded { unloaded, loaded } => {
                match (unloaded.positive_for_counts(), loaded.positive_for_counts()) {
                    (Some(a), Some(b)) => Some(a && b),
                    _ => None,
                }
            }
            Self::Custom(_) => None,
        }
    }

    fn check_params(&self, name: &str) -> Result<()> {
        match self {
            Self::Constant(r) => {
                if !(r.is_finite() && *r >= T::zero()) {
                    return Err(bad(name, format!("must be non-negative and finite, got {r}")));
                }
            }
            Self::Blocked { rate, capacity } | Self::Servers { rate, servers: capacity } => {
                positive(name, *rate)?;
                if *capacity == 0 {
                    return Err(bad(name, "capacity and server count must be >= 1"));
                }
            }
            Self::Loaded { unloaded, loaded } => {
                unloaded.check_params(name)?;
                loaded.check_params(name)?;
            }
            Self::Custom(_) => {}
        }
        Ok(())
    }

    fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

/// Gauge `gamma(n)` modulating arrivals and jumps into a loaded site.
#[derive(Clone)]
pub enum Gauge<T> {
    Unit,
    /// `e^phi` for every `n`, including `n = 0`.
    Exponential { phi: T },
    /// `1` at `n = 0`, `e^phi / n` after.
    InverseCount { phi: T },
    /// `1` at `n = 0`, `n e^phi` after.
    LinearCount { phi: T },
    Custom(GaugeFn<T>),
}

impl<T: Scalar> Gauge<T> {
    pub fn custom(f: impl Fn(u32) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn value(&self, n: u32) -> T {
        match self {
            Self::Unit => T::one(),
            Self::Exponential { phi } => phi.exp(),
            Self::InverseCount { phi } => {
                if n == 0 {
                    T::one()
                } else {
                    phi.exp() / T::from_count(n)
                }
            }
            Self::LinearCount { phi } => {
                if n == 0 {
                    T::one()
                } else {
                    T::from_count(n) * phi.exp()
                }
            }
            Self::Custom(f) => f(n),
        }
    }

    /// The per-site real parameter, if the family has one.
    pub fn phi(&self) -> Option<T> {
        match self {
            Self::Exponential { phi } | Self::InverseCount { phi } | Self::LinearCount { phi } => {
                Some(*phi)
            }
            _ => None,
        }
    }

    fn check_params(&self, name: &str) -> Result<()> {
        if let Some(phi) = self.phi() {
            if !phi.is_finite() {
                return Err(bad(name, format!("phi must be finite, got {phi}")));
            }
        }
        Ok(())
    }
}

/// Task jump array (`beta`, `theta` or `epsilon`).
///
/// The matrix forms take a symmetric constant `c` and attach the factor that
/// makes the pair identity hold for any intensity and gauge families.
#[derive(Clone)]
pub enum JumpArray<T> {
    Zero,
    /// `c[k][l]`
    Constant(Matrix<T>),
    /// `c[k][l] * lambda_l(n_l) / mu_l(n_l + 1)`
    TargetRatio(Matrix<T>),
    /// `c[k][l] * gamma_l(n_l)^{y_l}`
    TargetGauge(Matrix<T>),
    /// `c[k][l] * lambda_l(n_l) gamma_l(n_l)^{y_l} / mu_l(n_l + 1)`
    TargetRatioGauge(Matrix<T>),
    Custom(JumpFn<T>),
}

impl<T: Scalar> JumpArray<T> {
    pub fn custom(f: impl Fn(usize, usize, u32, u32, &[u32]) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    /// Constant array with every off-diagonal entry equal to `c`.
    pub fn uniform(sites: usize, c: T) -> Self {
        Self::Constant(off_diagonal(sites, c))
    }

    fn matrix(&self) -> Option<&Matrix<T>> {
        match self {
            Self::Constant(m)
            | Self::TargetRatio(m)
            | Self::TargetGauge(m)
            | Self::TargetRatioGauge(m) => Some(m),
            _ => None,
        }
    }

    fn map_matrix(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let apply = |m: &Matrix<T>| -> Matrix<T> {
            m.iter()
                .enumerate()
                .map(|(k, row)| row.iter().enumerate().map(|(l, &c)| f(k, l, c)).collect())
                .collect()
        };
        match self {
            Self::Zero => Self::Zero,
            Self::Constant(m) => Self::Constant(apply(m)),
            Self::TargetRatio(m) => Self::TargetRatio(apply(m)),
            Self::TargetGauge(m) => Self::TargetGauge(apply(m)),
            Self::TargetRatioGauge(m) => Self::TargetRatioGauge(apply(m)),
            Self::Custom(_) => unreachable!("custom arrays have no matrix"),
        }
    }

    /// Every rate multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        match self {
            Self::Custom(f) => {
                let f = f.clone();
                Self::custom(move |k, l, a, b, y| factor * f(k, l, a, b, y))
            }
            _ => self.map_matrix(|_, _, c| c * factor),
        }
    }

    /// Rates from `from` to `to` multiplied by `factor`; all others unchanged.
    pub fn perturbed(&self, from: usize, to: usize, factor: T) -> Self {
        match self {
            Self::Custom(f) => {
                let f = f.clone();
                Self::custom(move |k, l, a, b, y| {
                    let r = f(k, l, a, b, y);
                    if k == from && l == to {
                        r * factor
                    } else {
                        r
                    }
                })
            }
            _ => self.map_matrix(|k, l, c| if k == from && l == to { c * factor } else { c }),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    fn check_params(&self, name: &str, sites: usize) -> Result<()> {
        if let Some(m) = self.matrix() {
            check_matrix(name, m, sites)?;
        }
        Ok(())
    }
}

/// DC leap array `tau`.
#[derive(Clone)]
pub enum LeapArray<T> {
    Zero,
    /// `c[j][j']`
    Constant(Matrix<T>),
    /// `c[j][j'] * V(n; y')`, `y'` the post-leap occupancy and `V` the
    /// task weight `prod_q lam_bar_q / mu_bar_q`.
    TargetWeight(Matrix<T>),
    /// `c[j][j'] * xi_{j'} / eta_{j'}`
    TargetActivity(Matrix<T>),
    Custom(LeapFn<T>),
}

impl<T: Scalar> LeapArray<T> {
    pub fn custom(f: impl Fn(usize, usize, &[u32], &[u32]) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn uniform(sites: usize, c: T) -> Self {
        Self::Constant(off_diagonal(sites, c))
    }

    fn matrix(&self) -> Option<&Matrix<T>> {
        match self {
            Self::Constant(m) | Self::TargetWeight(m) | Self::TargetActivity(m) => Some(m),
            _ => None,
        }
    }

    fn map_matrix(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let apply = |m: &Matrix<T>| -> Matrix<T> {
            m.iter()
                .enumerate()
                .map(|(k, row)| row.iter().enumerate().map(|(l, &c)| f(k, l, c)).collect())
                .collect()
        };
        match self {
            Self::Zero => Self::Zero,
            Self::Constant(m) => Self::Constant(apply(m)),
            Self::TargetWeight(m) => Self::TargetWeight(apply(m)),
            Self::TargetActivity(m) => Self::TargetActivity(apply(m)),
            Self::Custom(_) => unreachable!("custom arrays have no matrix"),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        match self {
            Self::Custom(f) => {
                let f = f.clone();
                Self::custom(move |j, k, n, y| factor * f(j, k, n, y))
            }
            _ => self.map_matrix(|_, _, c| c * factor),
        }
    }

    pub fn perturbed(&self, from: usize, to: usize, factor: T) -> Self {
        match self {
            Self::Custom(f) => {
                let f = f.clone();
                Self::custom(move |j, k, n, y| {
                    let r = f(j, k, n, y);
                    if j == from && k == to {
                        r * factor
                    } else {
                        r
                    }
                })
            }
            _ => self.map_matrix(|j, k, c| if j == from && k == to { c * factor } else { c }),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    fn check_params(&self, name: &str, sites: usize) -> Result<()> {
        if let Some(m) = self.matrix() {
            check_matrix(name, m, sites)?;
        }
        Ok(())
    }
}

fn off_diagonal<T: Scalar>(sites: usize, c: T) -> Matrix<T> {
    (0..sites)
        .map(|k| (0..sites).map(|l| if k == l { T::zero() } else { c }).collect())
        .collect()
}

fn check_matrix<T: Scalar>(name: &str, m: &Matrix<T>, sites: usize) -> Result<()> {
    if m.len() != sites || m.iter().any(|row| row.len() != sites) {
        return Err(bad(name, format!("expected a {sites}x{sites} matrix")));
    }
    for (k, row) in m.iter().enumerate() {
        for (l, &c) in row.iter().enumerate() {
            if !(c.is_finite() && c >= T::zero()) {
                return Err(bad(
                    &format!("{name}[{k}][{l}]"),
                    format!("must be non-negative and finite, got {c}"),
                ));
            }
            if k == l && c != T::zero() {
                return Err(bad(&format!("{name}[{k}][{k}]"), "diagonal entries must be 0"));
            }
        }
    }
    Ok(())
}

/// All intensity, gauge and jump families of a model.
#[derive(Clone)]
pub struct RateFamilies<T> {
    /// Exogenous arrival intensity per site.
    pub lambda: Vec<Intensity<T>>,
    /// Exit intensity per site.
    pub mu: Vec<Intensity<T>>,
    pub gamma: Vec<Gauge<T>>,
    /// Jumps between unloaded sites.
    pub beta: JumpArray<T>,
    /// Jumps between a loaded and an unloaded site.
    pub theta: JumpArray<T>,
    /// Jumps between loaded sites.
    pub epsilon: JumpArray<T>,
    pub tau: LeapArray<T>,
    /// DC arrival rate per site.
    pub xi: Option<Vec<T>>,
    /// DC exit rate per site.
    pub eta: Option<Vec<T>>,
}

impl<T: Scalar> RateFamilies<T> {
    /// Unit intensities, unit gauge, all arrays zero, no DC boundary rates.
    pub fn new(sites: usize) -> Self {
        Self {
            lambda: vec![Intensity::Constant(T::one()); sites],
            mu: vec![Intensity::Constant(T::one()); sites],
            gamma: vec![Gauge::Unit; sites],
            beta: JumpArray::Zero,
            theta: JumpArray::Zero,
            epsilon: JumpArray::Zero,
            tau: LeapArray::Zero,
            xi: None,
            eta: None,
        }
    }

    pub fn lambda(&self, site: usize, n: u32, y: &[u32]) -> T {
        self.lambda[site].rate(site, n, y)
    }

    pub fn mu(&self, site: usize, n: u32, y: &[u32]) -> T {
        self.mu[site].rate(site, n, y)
    }

    pub fn gamma(&self, site: usize, n: u32) -> T {
        self.gamma[site].value(n)
    }

    /// `gamma_l(n)^{y_l}`
    pub fn gauge_power(&self, site: usize, n: u32, y: &[u32]) -> T {
        let e = y[site];
        if e == 0 {
            T::one()
        } else {
            self.gamma(site, n).powi(e as i32)
        }
    }

    /// `lambda_l(n) / mu_l(n + 1)`
    fn target_ratio(&self, l: usize, nl: u32, y: &[u32]) -> T {
        let lam = self.lambda(l, nl, y);
        if lam == T::zero() {
            return T::zero();
        }
        lam / self.mu(l, nl + 1, y)
    }

    fn jump(&self, array: &JumpArray<T>, k: usize, l: usize, nk: u32, nl: u32, y: &[u32]) -> T {
        if k == l {
            return T::zero();
        }
        match array {
            JumpArray::Zero => T::zero(),
            JumpArray::Constant(c) => c[k][l],
            JumpArray::TargetRatio(c) => c[k][l] * self.target_ratio(l, nl, y),
            JumpArray::TargetGauge(c) => c[k][l] * self.gauge_power(l, nl, y),
            JumpArray::TargetRatioGauge(c) => {
                c[k][l] * self.target_ratio(l, nl, y) * self.gauge_power(l, nl, y)
            }
            JumpArray::Custom(f) => f(k, l, nk, nl, y),
        }
    }

    pub fn beta(&self, k: usize, l: usize, nk: u32, nl: u32, y: &[u32]) -> T {
        self.jump(&self.beta, k, l, nk, nl, y)
    }

    pub fn theta(&self, k: usize, l: usize, nk: u32, nl: u32, y: &[u32]) -> T {
        self.jump(&self.theta, k, l, nk, nl, y)
    }

    pub fn epsilon(&self, k: usize, l: usize, nk: u32, nl: u32, y: &[u32]) -> T {
        self.jump(&self.epsilon, k, l, nk, nl, y)
    }

    /// `xi_k / eta_k`, or 1 without DC boundary rates.
    pub fn activity(&self, k: usize) -> T {
        match (&self.xi, &self.eta) {
            (Some(xi), Some(eta)) => xi[k] / eta[k],
            _ => T::one(),
        }
    }

    /// `tau_{j j'}(n; y)`; `open_tasks` says whether the task weight `V`
    /// is in play for `TargetWeight`.
    pub fn tau(&self, j: usize, k: usize, n: &[u32], y: &[u32], open_tasks: bool) -> T {
        if j == k {
            return T::zero();
        }
        match &self.tau {
            LeapArray::Zero => T::zero(),
            LeapArray::Constant(c) => c[j][k],
            LeapArray::TargetWeight(c) => {
                if !open_tasks || c[j][k] == T::zero() {
                    return c[j][k];
                }
                let mut after = y.to_vec();
                after[j] -= 1;
                after[k] += 1;
                c[j][k] * super::cumulative::log_task_weight(self, n, &after).exp()
            }
            LeapArray::TargetActivity(c) => c[j][k] * self.activity(k),
            LeapArray::Custom(f) => f(j, k, n, y),
        }
    }

    /// Structural checks against a spec: lengths, parameters, positivity of
    /// service, DC boundary rates, and the restricted families of V2.
    pub fn check(&self, spec: &ModelSpec<T>) -> Result<()> {
        let sites = spec.site_count();
        let variant = spec.variant();
        for (name, len) in [
            ("lambda", self.lambda.len()),
            ("mu", self.mu.len()),
            ("gamma", self.gamma.len()),
        ] {
            if len != sites {
                return Err(bad(name, format!("expected {sites} per-site entries, got {len}")));
            }
        }
        for (i, f) in self.lambda.iter().enumerate() {
            f.check_params(&format!("lambda[{i}]"))?;
        }
        for (i, f) in self.mu.iter().enumerate() {
            f.check_params(&format!("mu[{i}]"))?;
        }
        for (i, g) in self.gamma.iter().enumerate() {
            g.check_params(&format!("gamma[{i}]"))?;
        }
        self.beta.check_params("beta", sites)?;
        self.theta.check_params("theta", sites)?;
        self.epsilon.check_params("epsilon", sites)?;
        self.tau.check_params("tau", sites)?;

        if variant.open_tasks() {
            self.check_service(spec)?;
        }

        let needs_boundary = variant.open_dcs() && spec.kind() != ParticleKind::None;
        let uses_activity = matches!(self.tau, LeapArray::TargetActivity(_));
        if needs_boundary || uses_activity {
            let (xi, eta) = match (&self.xi, &self.eta) {
                (Some(xi), Some(eta)) => (xi, eta),
                _ => {
                    return Err(Error::MissingXiEta {
                        variant: variant.to_string(),
                    })
                }
            };
            for (name, v) in [("xi", xi), ("eta", eta)] {
                if v.len() != sites {
                    return Err(bad(name, format!("expected {sites} per-site entries")));
                }
            }
            for (i, &x) in xi.iter().enumerate() {
                if !(x.is_finite() && x >= T::zero()) {
                    return Err(bad(&format!("xi[{i}]"), format!("must be non-negative, got {x}")));
                }
            }
            for (i, &e) in eta.iter().enumerate() {
                positive(&format!("eta[{i}]"), e)?;
            }
        }

        if variant == Variant::V2 {
            let constant = self.lambda.iter().chain(&self.mu).all(Intensity::is_constant);
            let gauges = self
                .gamma
                .iter()
                .all(|g| matches!(g, Gauge::Unit | Gauge::Exponential { .. }));
            let arrays = [&self.beta, &self.theta]
                .iter()
                .all(|a| matches!(a, JumpArray::Zero | JumpArray::Constant(_)))
                && matches!(self.tau, LeapArray::Zero | LeapArray::Constant(_));
            if !(constant && gauges && arrays) {
                return Err(Error::InvalidSpec(
                    "V2 takes constant intensities, an exponential gauge and constant arrays; \
                     use V3 for general families"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Service must be positive for every `n >= 1` (sampled for custom families).
    fn check_service(&self, spec: &ModelSpec<T>) -> Result<()> {
        let cap = spec.truncation.task_cap.unwrap_or(1).max(1);
        let contexts = [
            vec![0; spec.site_count()],
            spec.default_state().occupancy,
        ];
        for (i, f) in self.mu.iter().enumerate() {
            let name = format!("mu[{i}]");
            match f.positive_for_counts() {
                Some(true) => {}
                Some(false) => {
                    return Err(bad(&name, "service must stay positive for every n >= 1"));
                }
                None => {
                    for y in &contexts {
                        for n in 1..=cap + 1 {
                            let r = f.rate(i, n, y);
                            if !(r.is_finite() && r > T::zero()) {
                                return Err(bad(
                                    &name,
                                    format!("service must stay positive for n >= 1, got {r} at n = {n}"),
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with `beta`, `theta`, `tau` (and `epsilon`) all scaled.
    pub fn with_arrays_scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.beta = self.beta.scaled(factor);
        out.theta = self.theta.scaled(factor);
        out.epsilon = self.epsilon.scaled(factor);
        out.tau = self.tau.scaled(factor);
        out
    }
}

/// Which jump array a perturbation or report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayName {
    Beta,
    Theta,
    Epsilon,
    Tau,
}

impl ArrayName {
    pub const ALL: [ArrayName; 4] = [
        ArrayName::Beta,
        ArrayName::Theta,
        ArrayName::Epsilon,
        ArrayName::Tau,
    ];
}

impl fmt::Display for ArrayName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ArrayName::Beta => "beta",
            ArrayName::Theta => "theta",
            ArrayName::Epsilon => "epsilon",
            ArrayName::Tau => "tau",
        };
        f.write_str(s)
    }
}

impl<T: Scalar> RateFamilies<T> {
    /// Copy with one `from -> to` entry of the named array multiplied by `factor`.
    pub fn with_perturbation(&self, array: ArrayName, from: usize, to: usize, factor: T) -> Self {
        let mut out = self.clone();
        match array {
            ArrayName::Beta => out.beta = self.beta.perturbed(from, to, factor),
            ArrayName::Theta => out.theta = self.theta.perturbed(from, to, factor),
            ArrayName::Epsilon => out.epsilon = self.epsilon.perturbed(from, to, factor),
            ArrayName::Tau => out.tau = self.tau.perturbed(from, to, factor),
        }
        out
    }
}

// Custom closures compare by identity.

impl<T: PartialEq> PartialEq for Intensity<T> {
    fn eq(&self, other: &Self) -> bool {
        use Intensity::*;
        match (self, other) {
            (Constant(a), Constant(b)) => a == b,
            (Blocked { rate: a, capacity: c }, Blocked { rate: b, capacity: d }) => a == b && c == d,
            (Servers { rate: a, servers: c }, Servers { rate: b, servers: d }) => a == b && c == d,
            (Loaded { unloaded: a, loaded: c }, Loaded { unloaded: b, loaded: d }) => a == b && c == d,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl<T: PartialEq> PartialEq for Gauge<T> {
    fn eq(&self, other: &Self) -> bool {
        use Gauge::*;
        match (self, other) {
            (Unit, Unit) => true,
            (Exponential { phi: a }, Exponential { phi: b })
            | (InverseCount { phi: a }, InverseCount { phi: b })
            | (LinearCount { phi: a }, LinearCount { phi: b }) => a == b,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl<T: PartialEq> PartialEq for JumpArray<T> {
    fn eq(&self, other: &Self) -> bool {
        use JumpArray::*;
        match (self, other) {
            (Zero, Zero) => true,
            (Constant(a), Constant(b))
            | (TargetRatio(a), TargetRatio(b))
            | (TargetGauge(a), TargetGauge(b))
            | (TargetRatioGauge(a), TargetRatioGauge(b)) => a == b,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl<T: PartialEq> PartialEq for LeapArray<T> {
    fn eq(&self, other: &Self) -> bool {
        use LeapArray::*;
        match (self, other) {
            (Zero, Zero) => true,
            (Constant(a), Constant(b))
            | (TargetWeight(a), TargetWeight(b))
            | (TargetActivity(a), TargetActivity(b)) => a == b,
            (Custom(a), Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl<T: PartialEq> PartialEq for RateFamilies<T> {
    fn eq(&self, other: &Self) -> bool {
        self.lambda == other.lambda
            && self.mu == other.mu
            && self.gamma == other.gamma
            && self.beta == other.beta
            && self.theta == other.theta
            && self.epsilon == other.epsilon
            && self.tau == other.tau
            && self.xi == other.xi
            && self.eta == other.eta
    }
}

impl<T: fmt::Debug> fmt::Debug for Intensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(r) => f.debug_tuple("Constant").field(r).finish(),
            Self::Blocked { rate, capacity } => f
                .debug_struct("Blocked")
                .field("rate", rate)
                .field("capacity", capacity)
                .finish(),
            Self::Servers { rate, servers } => f
                .debug_struct("Servers")
                .field("rate", rate)
                .field("servers", servers)
                .finish(),
            Self::Loaded { unloaded, loaded } => f
                .debug_struct("Loaded")
                .field("unloaded", unloaded)
                .field("loaded", loaded)
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Gauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unit => f.write_str("Unit"),
            Self::Exponential { phi } => write!(f, "Exponential {{ phi: {phi:?} }}"),
            Self::InverseCount { phi } => write!(f, "InverseCount {{ phi: {phi:?} }}"),
            Self::LinearCount { phi } => write!(f, "LinearCount {{ phi: {phi:?} }}"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for JumpArray<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("Zero"),
            Self::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Self::TargetRatio(m) => f.debug_tuple("TargetRatio").field(m).finish(),
            Self::TargetGauge(m) => f.debug_tuple("TargetGauge").field(m).finish(),
            Self::TargetRatioGauge(m) => f.debug_tuple("TargetRatioGauge").field(m).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for LeapArray<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("Zero"),
            Self::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Self::TargetWeight(m) => f.debug_tuple("TargetWeight").field(m).finish(),
            Self::TargetActivity(m) => f.debug_tuple("TargetActivity").field(m).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for RateFamilies<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateFamilies")
            .field("lambda", &self.lambda)
            .field("mu", &self.mu)
            .field("gamma", &self.gamma)
            .field("beta", &self.beta)
            .field("theta", &self.theta)
            .field("epsilon", &self.epsilon)
            .field("tau", &self.tau)
            .field("xi", &self.xi)
            .field("eta", &self.eta)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocked_arrivals_stop_at_capacity() {
        let f = Intensity::blocked(2.0, 3.0).unwrap();
        assert_eq!(f.rate(0, 2, &[0]), 2.0);
        assert_eq!(f.rate(0, 3, &[0]), 0.0);
    }

    #[test]
    fn multi_server_service() {
        let f = Intensity::servers(2.0, 3.0).unwrap();
        assert_eq!(f.rate(0, 5, &[0]), 6.0);
        assert_eq!(f.rate(0, 2, &[0]), 4.0);
    }

    #[test]
    fn builtin_parameters_are_checked() {
        assert!(matches!(Intensity::constant(0.0), Err(Error::BadParameter { .. })));
        assert!(matches!(Intensity::constant(-1.0), Err(Error::BadParameter { .. })));
        assert!(matches!(Intensity::blocked(1.0, 2.5), Err(Error::BadParameter { .. })));
        assert!(matches!(Intensity::servers(1.0, 0.0), Err(Error::BadParameter { .. })));
    }

    #[test]
    fn loaded_family_switches_on_occupancy() {
        let f = Intensity::loaded(Intensity::Constant(1.0), Intensity::Constant(4.0));
        assert_eq!(f.rate(1, 0, &[0, 1]), 4.0);
        assert_eq!(f.rate(0, 0, &[0, 1]), 1.0);
    }

    #[test]
    fn gauges_start_at_one() {
        let g: Gauge<f64> = Gauge::InverseCount { phi: 0.4 };
        assert_eq!(g.value(0), 1.0);
        assert!((g.value(2) - 0.4f64.exp() / 2.0).abs() < 1e-15);
        let g: Gauge<f64> = Gauge::LinearCount { phi: -0.2 };
        assert_eq!(g.value(0), 1.0);
        assert!((g.value(3) - 3.0 * (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn perturbation_touches_one_entry() {
        let a = JumpArray::uniform(3, 1.0f64);
        let p = a.perturbed(0, 1, 1.1);
        let r = RateFamilies::<f64> {
            beta: p,
            ..RateFamilies::new(3)
        };
        let y = [0, 0, 0];
        assert_eq!(r.beta(0, 1, 1, 0, &y), 1.1);
        assert_eq!(r.beta(1, 0, 1, 0, &y), 1.0);
        assert_eq!(r.beta(1, 1, 1, 0, &y), 0.0);
    }

    #[test]
    fn diagonal_entries_rejected() {
        let m = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        assert!(check_matrix("beta", &m, 2).is_err());
        let m = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        assert!(check_matrix("beta", &m, 2).is_err());
    }
}
