//! Run configuration: a single JSON document, validated into [`RunConfig`].

use std::fmt;

use serde::{Deserialize, Serialize};
use vacdrag_core::force::DEFAULT_ETA;
use vacdrag_core::instability::threshold_velocity;
use vacdrag_core::{
    ForceMethod, GapCoupling, Grid, Medium, MovingBody, Polarization, Scenario, SheetMedium,
    SlabMedium, Units,
};

/// A configuration error, with the path of the offending field when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(path: &str, message: impl Into<String>) -> Self {
        Self {
            path: Some(path.to_string()),
            message: message.into(),
        }
    }

    fn rule(message: impl Into<String>) -> Self {
        Self {
            path: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Modes,
    Hybrid,
    ForceSweep,
    Pendry,
    Evolve,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Hybrid => "hybrid",
            Command::ForceSweep => "force-sweep",
            Command::Pendry => "pendry",
            Command::Evolve => "evolve",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Abscissa of a velocity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepQuantity {
    /// `|v₂ − v₁|` divided by the threshold `1/n₁ + 1/n₂`; `|v₂ − v₁|n/2c` for
    /// identical slabs.
    #[serde(rename = "dv_nd_over_2c")]
    DvNdOver2c,
    /// `|v₂ − v₁|/c`.
    Dv,
}

/// Evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = self.steps - 1;
        (0..=n)
            .map(|i| match i {
                0 => self.start,
                i if i == n => self.stop,
                i => (self.start * (n - i) as f64 + self.stop * i as f64) / n as f64,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub quantity: SweepQuantity,
    #[serde(flatten)]
    pub range: Range,
}

/// A validated run configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub units: Units,
    pub polarizations: Vec<Polarization>,
    pub command: Command,
    pub grid: Grid,
    pub sweep: Option<Sweep>,
    /// Largest contour offset; the sequence is `eta, eta/2, eta/4`.
    pub eta: f64,
    pub methods: Vec<ForceMethod>,
    pub k_grid: Option<Range>,
    pub ky: f64,
    pub times: Option<Range>,
    #[serde(skip)]
    pub output: Option<String>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawBody {
    Slab { n: f64, h: f64, v: f64 },
    Sheet { omega_sp: f64, v: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: Option<f64>,
    stop: Option<f64>,
    steps: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    quantity: Option<SweepQuantity>,
    start: Option<f64>,
    stop: Option<f64>,
    steps: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    kx_max: Option<f64>,
    ky_max: Option<f64>,
    nx: Option<usize>,
    ny: Option<usize>,
    rel_tol: Option<f64>,
    ridge_tol: Option<f64>,
    certify: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    bodies: Vec<RawBody>,
    gap: f64,
    gap_coupling: Option<GapCoupling>,
    h_s_meters: Option<f64>,
    pol: Option<Vec<Polarization>>,
    command: Command,
    sweep: Option<RawSweep>,
    grid: Option<RawGrid>,
    eta_sequence: Option<Vec<f64>>,
    methods: Option<Vec<ForceMethod>>,
    k_grid: Option<RawRange>,
    ky: Option<f64>,
    times: Option<RawRange>,
    output: Option<String>,
}

fn required<T>(value: Option<T>, path: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| ConfigError::at(path, "missing field"))
}

fn range(raw: RawRange, path: &str) -> Result<Range, ConfigError> {
    let r = Range {
        start: required(raw.start, &format!("{path}.start"))?,
        stop: required(raw.stop, &format!("{path}.stop"))?,
        steps: required(raw.steps, &format!("{path}.steps"))?,
    };
    check_range(&r, path)?;
    Ok(r)
}

fn check_range(r: &Range, path: &str) -> Result<(), ConfigError> {
    if !(r.start.is_finite() && r.stop.is_finite()) {
        return Err(ConfigError::at(path, "bounds must be finite"));
    }
    if r.steps < 2 {
        return Err(ConfigError::at(
            &format!("{path}.steps"),
            format!("must be at least 2, got {}", r.steps),
        ));
    }
    Ok(())
}

fn body(raw: &RawBody, i: usize) -> Result<MovingBody, ConfigError> {
    let path = format!("bodies[{i}]");
    let (medium, v) = match *raw {
        RawBody::Slab { n, h, v } => (SlabMedium::new(n, h).map(Medium::Slab), v),
        RawBody::Sheet { omega_sp, v } => (SheetMedium::new(omega_sp).map(Medium::Sheet), v),
    };
    let medium = medium.map_err(|e| ConfigError::at(&path, e.to_string()))?;
    MovingBody::new(medium, v).map_err(|e| ConfigError::at(&format!("{path}.v"), e.to_string()))
}

/// Threshold relative velocity for two slabs, the unit of `dv_nd_over_2c`.
pub fn threshold(scenario: &Scenario) -> Option<f64> {
    match (&scenario.body1.medium, &scenario.body2.medium) {
        (Medium::Slab(a), Medium::Slab(b)) => Some(threshold_velocity(a.n_d, b.n_d)),
        _ => None,
    }
}

impl RunConfig {
    /// Value of the sweep abscissa for the configured velocities.
    pub fn abscissa(&self, scenario: &Scenario) -> f64 {
        let dv = scenario.relative_velocity().abs();
        match self.quantity() {
            SweepQuantity::DvNdOver2c => dv / threshold(scenario).expect("checked at parse time"),
            SweepQuantity::Dv => dv,
        }
    }

    pub fn quantity(&self) -> SweepQuantity {
        match self.sweep {
            Some(s) => s.quantity,
            None if self.scenario.is_slabs() => SweepQuantity::DvNdOver2c,
            None => SweepQuantity::Dv,
        }
    }

    /// The scenario at sweep value `x`: the mean velocity and the sign of
    /// `v₂ − v₁` are kept, the magnitude of `v₂ − v₁` is set by `x`.
    pub fn scenario_at(&self, x: f64) -> vacdrag_core::Result<Scenario> {
        let s = &self.scenario;
        let dv = match self.quantity() {
            SweepQuantity::DvNdOver2c => x * threshold(s).expect("checked at parse time"),
            SweepQuantity::Dv => x,
        };
        let sign = if s.relative_velocity() < 0.0 {
            -1.0
        } else {
            1.0
        };
        let mean = 0.5 * (s.body1.v + s.body2.v);
        let b1 = MovingBody::new(s.body1.medium, mean - 0.5 * sign * dv)?;
        let b2 = MovingBody::new(s.body2.medium, mean + 0.5 * sign * dv)?;
        Ok(Scenario {
            body1: b1,
            body2: b2,
            ..*s
        })
    }

    /// Sweep points, or the configured velocities alone.
    pub fn points(&self) -> vacdrag_core::Result<Vec<(f64, Scenario)>> {
        match &self.sweep {
            Some(sw) => sw
                .range
                .values()
                .into_iter()
                .map(|x| Ok((x, self.scenario_at(x)?)))
                .collect(),
            None => Ok(vec![(self.abscissa(&self.scenario), self.scenario)]),
        }
    }

    /// Canonical JSON of the configuration, excluding the output path.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        ConfigError {
            path: (path != ".").then_some(path),
            message,
        }
    })?;

    if raw.bodies.len() != 2 {
        return Err(ConfigError::at(
            "bodies",
            format!("expected 2 bodies, got {}", raw.bodies.len()),
        ));
    }
    let b1 = body(&raw.bodies[0], 0)?;
    let b2 = body(&raw.bodies[1], 1)?;
    let mut scenario = Scenario::new(b1, b2, raw.gap).map_err(|e| {
        let path = if raw.gap.is_finite() && raw.gap > 0.0 {
            "bodies"
        } else {
            "gap"
        };
        ConfigError::at(path, e.to_string())
    })?;
    if let Some(g) = raw.gap_coupling {
        scenario = scenario.with_gap(g);
    }
    let units = Units::new(raw.h_s_meters.unwrap_or(1e-6))
        .map_err(|e| ConfigError::at("h_s_meters", e.to_string()))?;

    let mut polarizations = raw.pol.unwrap_or_else(|| Polarization::ALL.to_vec());
    if polarizations.is_empty() {
        return Err(ConfigError::at(
            "pol",
            "at least one polarization is required",
        ));
    }
    polarizations.sort();
    polarizations.dedup();

    let mut grid = Grid::default();
    if let Some(g) = raw.grid {
        grid.kx_max = g.kx_max.unwrap_or(grid.kx_max);
        grid.ky_max = g.ky_max.unwrap_or(grid.ky_max);
        grid.nx = g.nx.unwrap_or(grid.nx);
        grid.ny = g.ny.unwrap_or(grid.ny);
        grid.rel_tol = g.rel_tol.unwrap_or(grid.rel_tol);
        grid.ridge_tol = g.ridge_tol.unwrap_or(grid.ridge_tol);
        grid.certify = g.certify.unwrap_or(grid.certify);
    }
    grid.validate()
        .map_err(|e| ConfigError::at("grid", e.to_string()))?;

    let sweep = match raw.sweep {
        Some(s) => {
            let quantity = s.quantity.unwrap_or(SweepQuantity::DvNdOver2c);
            let r = Range {
                start: required(s.start, "sweep.start")?,
                stop: required(s.stop, "sweep.stop")?,
                steps: required(s.steps, "sweep.steps")?,
            };
            check_range(&r, "sweep")?;
            if r.start < 0.0 || r.stop < 0.0 {
                return Err(ConfigError::at(
                    "sweep",
                    "velocity values must be non-negative",
                ));
            }
            if quantity == SweepQuantity::DvNdOver2c && !scenario.is_slabs() {
                return Err(ConfigError::at(
                    "sweep.quantity",
                    "dv_nd_over_2c requires slab media; use dv",
                ));
            }
            Some(Sweep { quantity, range: r })
        }
        None => None,
    };

    let eta = match raw.eta_sequence {
        None => DEFAULT_ETA,
        Some(seq) => {
            let ok = seq.len() == 3
                && seq[0] > 0.0
                && seq[0] <= 0.5
                && seq
                    .windows(2)
                    .all(|w| (w[1] - 0.5 * w[0]).abs() <= 1e-12 * w[0]);
            if !ok {
                return Err(ConfigError::at(
                    "eta_sequence",
                    "expected three offsets in (0, 0.5], each half the previous",
                ));
            }
            seq[0]
        }
    };

    let mut methods = raw.methods.unwrap_or_else(|| ForceMethod::ALL.to_vec());
    if methods.is_empty() {
        return Err(ConfigError::at(
            "methods",
            "at least one method is required",
        ));
    }
    let mut seen = Vec::new();
    methods.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });

    let k_grid = raw.k_grid.map(|r| range(r, "k_grid")).transpose()?;
    if let Some(k) = &k_grid {
        if k.start <= 0.0 || k.stop <= k.start {
            return Err(ConfigError::at("k_grid", "need 0 < start < stop"));
        }
    }
    let times = raw.times.map(|r| range(r, "times")).transpose()?;
    if let Some(t) = &times {
        if t.start < 0.0 || t.stop < t.start {
            return Err(ConfigError::at("times", "need 0 <= start <= stop"));
        }
    }
    let ky = raw.ky.unwrap_or(0.0);
    if !(ky.is_finite() && ky >= 0.0) {
        return Err(ConfigError::at("ky", "must be non-negative"));
    }

    let config = RunConfig {
        scenario,
        units,
        polarizations,
        command: raw.command,
        grid,
        sweep,
        eta,
        methods,
        k_grid,
        ky,
        times,
        output: raw.output,
    };
    config.check_command()?;
    Ok(config)
}

impl RunConfig {
    /// Rules that depend on the command; rerun after overriding it.
    pub fn check_command(&self) -> Result<(), ConfigError> {
        match self.command {
            Command::Modes if !self.scenario.is_slabs() => {
                Err(ConfigError::rule("modes requires slab media"))
            }
            Command::ForceSweep if self.sweep.is_none() => {
                Err(ConfigError::at("sweep", "force-sweep requires a sweep"))
            }
            _ => Ok(()),
        }
    }
}
