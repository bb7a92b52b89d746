//! Experiment configuration files.
//!
//! A file holds either one experiment object or `{"experiments": [...]}`.
//! Every experiment names its `kind`; the kind-specific knobs live under
//! `scenario` and all of them have defaults.
//!
//! ```json
//! {
//!   "name": "dichotomy",
//!   "kind": "dichotomy_dipole",
//!   "seed": 7,
//!   "params": { "psi": "quadratic", "f": "linear", "w": "quadratic_well" },
//!   "schedule": { "epsilon_list": [0.1, 0.05, 0.025, 0.0125] },
//!   "scenario": { "distance": 0.5 }
//! }
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use s1phase_core::minimizer::Schedule;
use s1phase_core::{EnergyParams, GridSpec, JumpMetric, Mode};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GTable,
    #[serde(rename = "gamma_1d_step")]
    Gamma1dStep,
    MmProfile,
    DichotomyDipole,
    MgSolve,
    TransportCompare,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::GTable,
        Kind::Gamma1dStep,
        Kind::MmProfile,
        Kind::DichotomyDipole,
        Kind::MgSolve,
        Kind::TransportCompare,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Kind::GTable => "g_table",
            Kind::Gamma1dStep => "gamma_1d_step",
            Kind::MmProfile => "mm_profile",
            Kind::DichotomyDipole => "dichotomy_dipole",
            Kind::MgSolve => "mg_solve",
            Kind::TransportCompare => "transport_compare",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Kind::GTable => "tabulate the effective jump cost g(z) and its minimizing level t*(z)",
            Kind::Gamma1dStep => "minimize a 1-D step over the epsilon schedule and extrapolate to g(delta)",
            Kind::MmProfile => "optimal 1-D transition profile pinned at t_anchor and its cost",
            Kind::DichotomyDipole => "direct vs lifting minimization of a vortex dipole, their gap and the lifting cost",
            Kind::MgSolve => "minimal lifting of a circle map over integer shift fields",
            Kind::TransportCompare => "minimal lifting cost of dipoles against the straight-cut transport estimate",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Explicit grid, used where a scenario accepts one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extents: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        Ok(GridSpec::from_parts(&self.extents, &self.resolution)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output subdirectory; defaults to the kind tag.
    #[serde(default)]
    pub name: Option<String>,
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: EnergyParams,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub scenario: serde_json::Value,
}

impl ExperimentConfig {
    pub fn new(kind: Kind) -> Self {
        Self {
            name: None,
            kind,
            seed: 0,
            params: EnergyParams::default(),
            schedule: Schedule::default(),
            grid: None,
            scenario: serde_json::Value::Null,
        }
    }

    pub fn with_scenario<T: Serialize>(mut self, scenario: &T) -> Self {
        self.scenario = serde_json::to_value(scenario).expect("scenarios serialize to JSON");
        self
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.tag().to_string())
    }

    /// Decodes `scenario` into the kind-specific struct; `null` means defaults.
    pub fn scenario<T: DeserializeOwned + Default>(&self) -> Result<T> {
        if self.scenario.is_null() {
            return Ok(T::default());
        }
        serde_path_to_error::deserialize(&self.scenario)
            .map_err(|e| CliError::Config(format!("scenario.{}: {}", e.path(), e.inner())))
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.schedule.validate()?;
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(CliError::Config(format!("name {name:?} is not a plain directory name")));
            }
        }
        match self.kind {
            Kind::GTable => self.scenario::<GTableScenario>()?.validate(),
            Kind::Gamma1dStep => self.scenario::<Gamma1dScenario>()?.validate(),
            Kind::MmProfile => self.scenario::<MmScenario>()?.validate(),
            Kind::DichotomyDipole => self.scenario::<DichotomyScenario>()?.validate(),
            Kind::MgSolve => self.scenario::<MgScenario>()?.validate(),
            Kind::TransportCompare => self.scenario::<TransportScenario>()?.validate(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchFile {
    experiments: Vec<ExperimentConfig>,
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        CliError::Config(format!(
            "line {}, column {}, field {}: {inner}",
            inner.line(),
            inner.column(),
            e.path()
        ))
    })
}

/// Parses a single experiment or a batch and validates every entry.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let probe: serde_json::Value = parse_json(text)?;
    let configs = if probe.get("experiments").is_some() {
        parse_json::<BatchFile>(text)?.experiments
    } else {
        vec![parse_json::<ExperimentConfig>(text)?]
    };
    if configs.is_empty() {
        return Err(CliError::Config("the experiments list is empty".into()));
    }
    let mut names: Vec<String> = configs.iter().map(|c| c.display_name()).collect();
    for c in &configs {
        c.validate().map_err(|e| match e {
            CliError::Core(core) => CliError::Config(format!("{}: {core}", c.display_name())),
            other => other.in_experiment(&c.display_name()),
        })?;
    }
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!(
            "two experiments write to {:?}; give them distinct names",
            w[0]
        )));
    }
    Ok(configs)
}

pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GTableScenario {
    pub z_max: f64,
    pub points: usize,
}

impl Default for GTableScenario {
    fn default() -> Self {
        Self {
            z_max: 10.0,
            points: 201,
        }
    }
}

impl GTableScenario {
    fn validate(&self) -> Result<()> {
        require(self.z_max > 0.0 && self.z_max.is_finite(), || {
            format!("scenario.z_max must be positive, got {}", self.z_max)
        })?;
        require(self.points >= 2, || "scenario.points must be at least 2".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gamma1dScenario {
    /// Step height in `(0, pi]`.
    pub delta: f64,
    pub mode: Mode,
    pub length: f64,
    /// Grid cells per smallest `epsilon` (ignored when `grid` is given).
    pub cells_per_epsilon: f64,
    /// Random nodes probed by the gradient check.
    pub gradient_nodes: usize,
}

impl Default for Gamma1dScenario {
    fn default() -> Self {
        Self {
            delta: FRAC_PI_2,
            mode: Mode::Lifting,
            length: 1.0,
            cells_per_epsilon: 64.0,
            gradient_nodes: 10,
        }
    }
}

impl Gamma1dScenario {
    fn validate(&self) -> Result<()> {
        require(self.delta > 0.0 && self.delta <= PI, || {
            format!("scenario.delta must lie in (0, pi], got {}", self.delta)
        })?;
        require(self.length > 0.0, || "scenario.length must be positive".into())?;
        require(self.cells_per_epsilon >= 4.0, || {
            format!(
                "scenario.cells_per_epsilon must be at least 4 to resolve the layer, got {}",
                self.cells_per_epsilon
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmScenario {
    pub t_anchor: f64,
    pub interval: [f64; 2],
}

impl Default for MmScenario {
    fn default() -> Self {
        Self {
            t_anchor: 0.0,
            interval: [-1.0, 1.0],
        }
    }
}

impl MmScenario {
    fn validate(&self) -> Result<()> {
        require((0.0..=1.0).contains(&self.t_anchor), || {
            format!("scenario.t_anchor must lie in [0, 1], got {}", self.t_anchor)
        })?;
        require(self.interval[1] > self.interval[0], || "scenario.interval is empty".into())
    }
}

/// Test field for the two-mode comparison and the lifting solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// `+1` and `-1` vortices a distance `distance` apart.
    Dipole,
    /// A smooth map of zero degree.
    Smooth,
    /// A straight step of height `delta` across a strip.
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyScenario {
    pub field: FieldKind,
    pub distance: f64,
    /// Gap between the vortices (or the step) and the domain boundary.
    pub margin: f64,
    /// Nodes farther than `band * epsilon` from the vortex segment keep their
    /// initial values; `0` frees every interior node.
    pub band: f64,
    /// Each `epsilon` is run on its own grid with `h = epsilon / cells_per_epsilon`.
    pub cells_per_epsilon: f64,
    pub delta: f64,
    /// Jump size used for the sharp direct-mode reference of a step.
    pub metric: JumpMetric,
    /// Threshold separating cut edges from bulk edges in the lifting cost.
    pub sigma: f64,
    /// Lifting solver resolution: cells per unit length.
    pub mg_cells_per_unit: f64,
    pub label_bound: i64,
    pub restarts: usize,
    pub gradient_nodes: usize,
}

impl Default for DichotomyScenario {
    fn default() -> Self {
        Self {
            field: FieldKind::Dipole,
            distance: 0.5,
            margin: 0.25,
            band: 2.0,
            cells_per_epsilon: 4.0,
            delta: PI,
            metric: JumpMetric::Chord,
            sigma: PI,
            mg_cells_per_unit: 32.0,
            label_bound: 2,
            restarts: 4,
            gradient_nodes: 10,
        }
    }
}

impl DichotomyScenario {
    fn validate(&self) -> Result<()> {
        require(self.distance > 0.0 && self.margin > 0.0, || {
            "scenario.distance and scenario.margin must be positive".into()
        })?;
        require(self.band >= 0.0, || "scenario.band must be nonnegative".into())?;
        require(self.cells_per_epsilon >= 4.0, || {
            format!(
                "scenario.cells_per_epsilon must be at least 4 to resolve the layer, got {}",
                self.cells_per_epsilon
            )
        })?;
        require(self.delta > 0.0 && self.delta <= PI, || {
            format!("scenario.delta must lie in (0, pi], got {}", self.delta)
        })?;
        require(self.sigma > 0.0, || "scenario.sigma must be positive".into())?;
        require(self.mg_cells_per_unit >= 2.0, || "scenario.mg_cells_per_unit must be at least 2".into())?;
        require(self.label_bound >= 1, || "scenario.label_bound must be at least 1".into())?;
        require(self.restarts >= 1, || "scenario.restarts must be at least 1".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MgMethod {
    /// Exhaustive when the search space allows it, local search otherwise.
    Auto,
    Bruteforce,
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgScenario {
    pub field: FieldKind,
    pub distance: f64,
    pub margin: f64,
    pub cells_per_unit: f64,
    pub delta: f64,
    pub label_bound: i64,
    pub method: MgMethod,
    pub restarts: usize,
    pub sigma: f64,
}

impl Default for MgScenario {
    fn default() -> Self {
        Self {
            field: FieldKind::Dipole,
            distance: 0.5,
            margin: 0.25,
            cells_per_unit: 32.0,
            delta: FRAC_PI_2,
            label_bound: 2,
            method: MgMethod::Auto,
            restarts: 8,
            sigma: PI,
        }
    }
}

impl MgScenario {
    fn validate(&self) -> Result<()> {
        require(self.distance > 0.0 && self.margin > 0.0, || {
            "scenario.distance and scenario.margin must be positive".into()
        })?;
        require(self.cells_per_unit >= 2.0, || "scenario.cells_per_unit must be at least 2".into())?;
        require(self.delta > 0.0 && self.delta <= PI, || {
            format!("scenario.delta must lie in (0, pi], got {}", self.delta)
        })?;
        require(self.label_bound >= 1, || "scenario.label_bound must be at least 1".into())?;
        require(self.restarts >= 1, || "scenario.restarts must be at least 1".into())?;
        require(self.sigma > 0.0, || "scenario.sigma must be positive".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportScenario {
    pub distances: Vec<f64>,
    pub cells_per_unit: Vec<f64>,
    pub margin: f64,
    pub label_bound: i64,
    pub restarts: usize,
    pub sigma: f64,
}

impl Default for TransportScenario {
    fn default() -> Self {
        Self {
            distances: vec![0.5, 0.25],
            cells_per_unit: vec![8.0, 16.0, 32.0],
            margin: 0.25,
            label_bound: 2,
            restarts: 4,
            sigma: PI,
        }
    }
}

impl TransportScenario {
    fn validate(&self) -> Result<()> {
        require(!self.distances.is_empty() && self.distances.iter().all(|d| *d > 0.0), || {
            "scenario.distances must be a nonempty list of positive values".into()
        })?;
        require(
            !self.cells_per_unit.is_empty() && self.cells_per_unit.iter().all(|c| *c >= 2.0),
            || "scenario.cells_per_unit must be a nonempty list of values >= 2".into(),
        )?;
        require(self.margin > 0.0, || "scenario.margin must be positive".into())?;
        require(self.label_bound >= 1, || "scenario.label_bound must be at least 1".into())?;
        require(self.restarts >= 1, || "scenario.restarts must be at least 1".into())?;
        require(self.sigma > 0.0, || "scenario.sigma must be positive".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_experiment_with_defaults() {
        let cfgs = parse_config(r#"{"kind": "g_table"}"#).unwrap();
        assert_eq!(cfgs.len(), 1);
        assert_eq!(cfgs[0].params, EnergyParams::default());
        assert_eq!(cfgs[0].scenario::<GTableScenario>().unwrap(), GTableScenario::default());
    }

    #[test]
    fn batch_with_scenarios() {
        let text = r#"{"experiments": [
            {"kind": "mm_profile", "name": "a", "scenario": {"t_anchor": 0.5}},
            {"kind": "gamma_1d_step", "name": "b", "scenario": {"mode": "direct"}}
        ]}"#;
        let cfgs = parse_config(text).unwrap();
        assert_eq!(cfgs[0].scenario::<MmScenario>().unwrap().t_anchor, 0.5);
        assert_eq!(cfgs[1].scenario::<Gamma1dScenario>().unwrap().mode, Mode::Direct);
    }

    #[test]
    fn errors_name_line_and_field() {
        let err = parse_config("{\n  \"kind\": \"g_table\",\n  \"params\": {\"epsilon\": \"x\"}\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("params.epsilon"), "{msg}");
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);

        let err = parse_config(r#"{"kind": "mm_profile", "scenario": {"t_anchor": 2.0}}"#).unwrap_err();
        assert!(err.to_string().contains("t_anchor"), "{err}");
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);

        let err = parse_config(r#"{"kind": "mm_profile", "scenario": {"anchor": 0.0}}"#).unwrap_err();
        assert!(err.to_string().contains("anchor"), "{err}");
    }

    #[test]
    fn unknown_kind_and_duplicate_names() {
        assert!(parse_config(r#"{"kind": "nope"}"#).is_err());
        let dup = r#"{"experiments": [{"kind": "g_table"}, {"kind": "g_table"}]}"#;
        assert!(parse_config(dup).unwrap_err().to_string().contains("distinct"));
    }

    #[test]
    fn invalid_params_are_config_errors() {
        let err = parse_config(r#"{"kind": "g_table", "params": {"epsilon": -1.0}}"#).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
        let err = parse_config(r#"{"kind": "g_table", "schedule": {"epsilon_list": [0.1, 0.2]}}"#).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
    }
}
