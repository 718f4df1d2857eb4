//! TOML experiment configuration: a `[model]` block selecting and
//! parametrising the physical model, and a `[run]` block describing what to
//! compute. Parsing is strict (`deny_unknown_fields`) so typos surface as
//! configuration errors with field names, and the resolved configuration
//! round-trips through TOML for the CSV metadata echo.
//!
//! All frequencies, couplings, and rates are plain numbers in a common
//! frequency unit the file declares via `model.unit` (a label only — the
//! code never rescales). Temperature enters either as `beta` (inverse
//! temperature, 1/unit) or `k_t` (k·T in the unit); exactly one of the two
//! must be given.

use serde::{Deserialize, Serialize};

use repint::model::{
    build_composite_model, build_measurement_model, build_single_spin_model, SystemSpec,
};
use repint::states::plus_ket;
use repint::{DensityMatrix, JumpKind, RepeatedInteractionModel};

use crate::Failure;

/// Run modes, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Evolve,
    Steady,
    Sweep,
    Montecarlo,
    Compare,
}

impl Mode {
    /// The name used in `run.mode` and as the subcommand.
    pub fn name(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Steady => "steady",
            Mode::Sweep => "sweep",
            Mode::Montecarlo => "montecarlo",
            Mode::Compare => "compare",
        }
    }
}

/// Top-level configuration file.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    /// Parse a TOML document, reporting syntax and unknown-field problems
    /// (with line/column diagnostics from the parser) as config failures.
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))
    }

    /// Serialize the resolved configuration for the CSV metadata echo.
    pub fn echo(&self) -> Result<String, Failure> {
        toml::to_string(self).map_err(|e| Failure::Config(format!("cannot echo config: {e}")))
    }
}

/// The `[model]` block. Only the fields relevant to the chosen `kind` may
/// be set; anything else is rejected so a file cannot silently carry dead
/// parameters.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Model family: "single-spin", "two-spin", or "monitored-qubit".
    pub kind: String,
    /// Label of the frequency unit the numbers are expressed in
    /// (documentation only, echoed into output metadata).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,

    // --- single spin ---------------------------------------------------
    /// System spin quantum number (single-spin).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    /// System level splitting ω_s (single-spin, monitored-qubit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    /// Linear couplings g_k J_k⊗J_k (single-spin, two-spin probe).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_z: Option<f64>,

    // --- two spin -------------------------------------------------------
    /// Spins and splittings of the two system parts (two-spin).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_2: Option<f64>,
    /// Internal couplings G_k J_k⁽¹⁾J_k⁽²⁾ (two-spin).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_g_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_g_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_g_z: Option<f64>,

    // --- monitored qubit -------------------------------------------------
    /// Measurement coupling strength (monitored-qubit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    /// Measurement axis angle θ from the z axis (monitored-qubit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,

    // --- probe stream ----------------------------------------------------
    /// Probe spin quantum number (default 1/2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_j: Option<f64>,
    /// Probe level splitting ω_p.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_p: Option<f64>,
    /// Probe inverse temperature (exclusive with `k_t`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Probe temperature k·T in the declared unit (exclusive with `beta`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_t: Option<f64>,

    /// Interaction duration τ of each collision window.
    pub tau: f64,
    /// Poisson arrival rate γ of the probe stream.
    pub gamma: f64,
}

/// Parameters a sweep axis may vary. Restricting the set keeps the axis →
/// model mapping explicit; unknown names fail with the full list.
const SWEEPABLE: &[&str] = &[
    "tau", "gamma", "g_x", "g_y", "g_z", "omega_s", "omega_p", "beta", "g", "theta", "omega_1",
    "omega_2",
];

impl ModelConfig {
    fn req(&self, field: Option<f64>, name: &str) -> Result<f64, Failure> {
        field.ok_or_else(|| {
            Failure::Config(format!(
                "model.{name} is required for kind = \"{}\"",
                self.kind
            ))
        })
    }

    fn forbid(&self, field: Option<f64>, name: &str) -> Result<(), Failure> {
        if field.is_some() {
            return Err(Failure::Config(format!(
                "model.{name} does not apply to kind = \"{}\"",
                self.kind
            )));
        }
        Ok(())
    }

    /// Resolve the probe inverse temperature from `beta` xor `k_t`.
    fn resolved_beta(&self) -> Result<f64, Failure> {
        match (self.beta, self.k_t) {
            (Some(b), None) => Ok(b),
            (None, Some(t)) if t > 0.0 => Ok(1.0 / t),
            (None, Some(t)) => Err(Failure::Config(format!(
                "model.k_t must be positive, got {t}; use beta for the zero-temperature limit"
            ))),
            (Some(_), Some(_)) => Err(Failure::Config(
                "model.beta and model.k_t are exclusive; set one".into(),
            )),
            (None, None) => Err(Failure::Config(
                "probe temperature missing: set model.beta or model.k_t".into(),
            )),
        }
    }

    /// Build the library model this block describes.
    pub fn build(&self) -> Result<RepeatedInteractionModel, Failure> {
        match self.kind.as_str() {
            "single-spin" => {
                self.forbid(self.g, "g")?;
                self.forbid(self.theta, "theta")?;
                self.forbid(self.j1, "j1")?;
                let beta = self.resolved_beta()?;
                build_single_spin_model(
                    self.req(self.j, "j")?,
                    self.req(self.omega_s, "omega_s")?,
                    self.probe_j.unwrap_or(0.5),
                    self.req(self.omega_p, "omega_p")?,
                    beta,
                    self.g_x.unwrap_or(0.0),
                    self.g_y.unwrap_or(0.0),
                    self.g_z.unwrap_or(0.0),
                    self.tau,
                    self.gamma,
                )
                .map_err(Failure::from_lib)
            }
            "two-spin" => {
                self.forbid(self.g, "g")?;
                self.forbid(self.theta, "theta")?;
                self.forbid(self.j, "j")?;
                self.forbid(self.omega_s, "omega_s")?;
                let beta = self.resolved_beta()?;
                let system = SystemSpec::TwoSpin {
                    j1: self.req(self.j1, "j1")?,
                    j2: self.req(self.j2, "j2")?,
                    omega_1: self.req(self.omega_1, "omega_1")?,
                    omega_2: self.req(self.omega_2, "omega_2")?,
                    g_x: self.pair_g_x.unwrap_or(0.0),
                    g_y: self.pair_g_y.unwrap_or(0.0),
                    g_z: self.pair_g_z.unwrap_or(0.0),
                };
                build_composite_model(
                    &system,
                    self.probe_j.unwrap_or(0.5),
                    self.req(self.omega_p, "omega_p")?,
                    beta,
                    self.g_x.unwrap_or(0.0),
                    self.g_y.unwrap_or(0.0),
                    self.g_z.unwrap_or(0.0),
                    self.tau,
                    self.gamma,
                )
                .map_err(Failure::from_lib)
            }
            "monitored-qubit" => {
                // The probe is a qubit prepared in its ground state by
                // construction; thermal fields would silently do nothing.
                self.forbid(self.beta, "beta")?;
                self.forbid(self.k_t, "k_t")?;
                self.forbid(self.probe_j, "probe_j")?;
                self.forbid(self.j, "j")?;
                self.forbid(self.g_x, "g_x")?;
                self.forbid(self.g_y, "g_y")?;
                self.forbid(self.g_z, "g_z")?;
                build_measurement_model(
                    self.req(self.omega_s, "omega_s")?,
                    self.omega_p.unwrap_or(0.0),
                    self.req(self.g, "g")?,
                    self.req(self.theta, "theta")?,
                    self.tau,
                    self.gamma,
                )
                .map_err(Failure::from_lib)
            }
            other => Err(Failure::Config(format!(
                "model.kind \"{other}\" is not one of single-spin, two-spin, monitored-qubit"
            ))),
        }
    }

    /// Copy of this block with one sweepable parameter replaced.
    pub fn with_param(&self, param: &str, value: f64) -> Result<Self, Failure> {
        let mut next = self.clone();
        match param {
            "tau" => next.tau = value,
            "gamma" => next.gamma = value,
            "g_x" => next.g_x = Some(value),
            "g_y" => next.g_y = Some(value),
            "g_z" => next.g_z = Some(value),
            "omega_s" => next.omega_s = Some(value),
            "omega_p" => next.omega_p = Some(value),
            "beta" => {
                next.beta = Some(value);
                next.k_t = None;
            }
            "g" => next.g = Some(value),
            "theta" => next.theta = Some(value),
            "omega_1" => next.omega_1 = Some(value),
            "omega_2" => next.omega_2 = Some(value),
            other => {
                return Err(Failure::Config(format!(
                    "sweep parameter \"{other}\" is not supported; choose from {}",
                    SWEEPABLE.join(", ")
                )))
            }
        }
        Ok(next)
    }

    /// Initial state named in the run block, sized for this model.
    pub fn initial_state(&self, name: &str, d: usize) -> Result<DensityMatrix, Failure> {
        // Basis index 0 is the highest J_z eigenvalue, d−1 the lowest, so
        // for positive splittings the last index is the ground state.
        match name {
            "ground" => Ok(DensityMatrix::basis_state(d, d - 1)),
            "excited" => Ok(DensityMatrix::basis_state(d, 0)),
            "mixed" => Ok(DensityMatrix::maximally_mixed(d)),
            "plus" => {
                if d != 2 {
                    return Err(Failure::Config(format!(
                        "run.initial = \"plus\" needs a qubit system, model dimension is {d}"
                    )));
                }
                DensityMatrix::pure(&plus_ket()).map_err(Failure::from_lib)
            }
            other => Err(Failure::Config(format!(
                "run.initial \"{other}\" is not one of ground, excited, mixed, plus"
            ))),
        }
    }
}

fn default_kind() -> String {
    "scattering".into()
}

fn default_initial() -> String {
    "ground".into()
}

fn default_points() -> usize {
    200
}

fn default_seed() -> u64 {
    1
}

fn default_method() -> String {
    "exact".into()
}

fn default_scale() -> String {
    "linear".into()
}

/// The `[run]` block. Sweep axes come last so the resolved configuration
/// serializes back to valid TOML (scalars before array-of-table entries).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional mode check: if set it must match the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Jump-operator convention: "scattering" (default), "bare", "eikonal".
    #[serde(default = "default_kind")]
    pub kind: String,
    /// Initial system state for time evolution: "ground" (default),
    /// "excited", "mixed", or "plus" (qubit only).
    #[serde(default = "default_initial")]
    pub initial: String,
    /// Horizon for time-series modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Number of grid points (time series) — default 200.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Trajectory count for montecarlo/compare.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<usize>,
    /// Base RNG seed (default 1); `--seed` overrides.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output path; `--out` overrides, stdout if neither is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Propagator for master-equation series: "exact" (default) or "rk4".
    #[serde(default = "default_method")]
    pub method: String,
    /// Parameter axes: up to two for `sweep`, up to one for `evolve`
    /// (one block of rows per value), none elsewhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

impl RunConfig {
    /// Parse the jump-operator convention.
    pub fn jump_kind(&self) -> Result<JumpKind, Failure> {
        match self.kind.as_str() {
            "scattering" => Ok(JumpKind::Scattering),
            "bare" => Ok(JumpKind::BareUnitary),
            "eikonal" => Ok(JumpKind::Eikonal),
            other => Err(Failure::Config(format!(
                "run.kind \"{other}\" is not one of scattering, bare, eikonal"
            ))),
        }
    }

    /// Time grid including t = 0 (for evolution with work bookkeeping).
    pub fn time_grid_from_zero(&self) -> Result<Vec<f64>, Failure> {
        let t_max = self.horizon()?;
        if self.points < 2 {
            return Err(Failure::Config(format!(
                "run.points must be at least 2, got {}",
                self.points
            )));
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| t_max * i as f64 / (n - 1) as f64)
            .collect())
    }

    /// Time grid excluding t = 0 (stochastic averages have zero variance
    /// at the start, which would break z-score normalisation).
    pub fn time_grid_after_zero(&self) -> Result<Vec<f64>, Failure> {
        let t_max = self.horizon()?;
        let n = self.points;
        if n == 0 {
            return Err(Failure::Config("run.points must be positive".into()));
        }
        Ok((1..=n).map(|i| t_max * i as f64 / n as f64).collect())
    }

    fn horizon(&self) -> Result<f64, Failure> {
        match self.t_max {
            Some(t) if t > 0.0 => Ok(t),
            Some(t) => Err(Failure::Config(format!(
                "run.t_max must be positive, got {t}"
            ))),
            None => Err(Failure::Config(
                "run.t_max is required for time-series modes".into(),
            )),
        }
    }

    /// Trajectory count, required for the stochastic modes.
    pub fn trajectory_count(&self) -> Result<usize, Failure> {
        match self.trajectories {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(Failure::Config("run.trajectories must be positive".into())),
            None => Err(Failure::Config(
                "run.trajectories is required for stochastic modes".into(),
            )),
        }
    }

    /// Check the axis count allowed for a mode.
    pub fn check_axes(&self, mode: Mode) -> Result<(), Failure> {
        let (max, hint) = match mode {
            Mode::Sweep => (2, "sweep takes one or two [[run.sweep]] axes"),
            Mode::Evolve => (1, "evolve takes at most one [[run.sweep]] axis"),
            Mode::Steady | Mode::Montecarlo | Mode::Compare => {
                (0, "this mode takes no [[run.sweep]] axes")
            }
        };
        if self.sweep.len() > max {
            return Err(Failure::Config(format!(
                "{} [[run.sweep]] axes given; {hint}",
                self.sweep.len()
            )));
        }
        if mode == Mode::Sweep && self.sweep.is_empty() {
            return Err(Failure::Config(
                "sweep needs at least one [[run.sweep]] axis; use `steady` for a single point"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// One sweep axis: either an explicit `values` list or a `min`/`max`/
/// `points` range with linear (default) or log spacing.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Which model parameter to vary.
    pub param: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// "linear" (default) or "log" spacing for the range form.
    #[serde(default = "default_scale")]
    pub scale: String,
    /// Explicit grid; exclusive with the range fields.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Materialise the grid this axis describes.
    pub fn grid(&self) -> Result<Vec<f64>, Failure> {
        let range_given = self.min.is_some() || self.max.is_some() || self.points.is_some();
        if !self.values.is_empty() {
            if range_given {
                return Err(Failure::Config(format!(
                    "sweep axis \"{}\": values and min/max/points are exclusive",
                    self.param
                )));
            }
            return Ok(self.values.clone());
        }
        let (min, max, points) = match (self.min, self.max, self.points) {
            (Some(a), Some(b), Some(n)) => (a, b, n),
            _ => {
                return Err(Failure::Config(format!(
                    "sweep axis \"{}\" needs either values or all of min, max, points",
                    self.param
                )))
            }
        };
        if points < 2 {
            return Err(Failure::Config(format!(
                "sweep axis \"{}\": points must be at least 2",
                self.param
            )));
        }
        if !(max > min) {
            return Err(Failure::Config(format!(
                "sweep axis \"{}\": max must exceed min",
                self.param
            )));
        }
        match self.scale.as_str() {
            "linear" => Ok((0..points)
                .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
                .collect()),
            "log" => {
                if min <= 0.0 {
                    return Err(Failure::Config(format!(
                        "sweep axis \"{}\": log scale needs min > 0",
                        self.param
                    )));
                }
                let ratio = max / min;
                Ok((0..points)
                    .map(|i| min * ratio.powf(i as f64 / (points - 1) as f64))
                    .collect())
            }
            other => Err(Failure::Config(format!(
                "sweep axis \"{}\": scale \"{other}\" is not linear or log",
                self.param
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [model]
        kind = "single-spin"
        j = 0.5
        omega_s = 1.0
        omega_p = 1.0
        g_x = 0.4
        beta = 0.9
        tau = 1.0
        gamma = 0.01

        [run]
        mode = "steady"
    "#;

    #[test]
    fn minimal_config_parses_and_builds() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let model = cfg.model.build().unwrap();
        assert_eq!(model.system_dim(), 2);
        assert_eq!(cfg.run.seed, 1);
        assert_eq!(cfg.run.kind, "scattering");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("g_x = 0.4", "g_x = 0.4\n        gx = 0.4");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        match err {
            Failure::Config(msg) => assert!(msg.contains("gx"), "{msg}"),
            other => panic!("wrong class: {other:?}"),
        }
    }

    #[test]
    fn temperature_must_be_set_exactly_once() {
        let both = MINIMAL.replace("beta = 0.9", "beta = 0.9\n        k_t = 1.0");
        assert!(ExperimentConfig::parse(&both)
            .unwrap()
            .model
            .build()
            .is_err());
        let neither = MINIMAL.replace("beta = 0.9", "");
        assert!(ExperimentConfig::parse(&neither)
            .unwrap()
            .model
            .build()
            .is_err());
        let kt = MINIMAL.replace("beta = 0.9", "k_t = 2.0");
        assert!(ExperimentConfig::parse(&kt).unwrap().model.build().is_ok());
    }

    #[test]
    fn monitored_qubit_rejects_thermal_fields() {
        let text = r#"
            [model]
            kind = "monitored-qubit"
            omega_s = 5.0
            g = 1.0
            theta = 1.57
            beta = 1.0
            tau = 0.1
            gamma = 1e-3

            [run]
        "#;
        let err = ExperimentConfig::parse(text).unwrap().model.build();
        assert!(matches!(err, Err(Failure::Config(_))));
    }

    #[test]
    fn sweep_axis_grids() {
        let lin = SweepAxis {
            param: "tau".into(),
            min: Some(1.0),
            max: Some(3.0),
            points: Some(5),
            scale: "linear".into(),
            values: vec![],
        };
        assert_eq!(lin.grid().unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);

        let log = SweepAxis {
            param: "tau".into(),
            min: Some(0.1),
            max: Some(10.0),
            points: Some(3),
            scale: "log".into(),
            values: vec![],
        };
        let g = log.grid().unwrap();
        assert!((g[1] - 1.0).abs() < 1e-12, "log midpoint: {}", g[1]);

        let explicit = SweepAxis {
            param: "omega_s".into(),
            min: None,
            max: None,
            points: None,
            scale: "linear".into(),
            values: vec![0.8, 0.9, 1.1, 1.2],
        };
        assert_eq!(explicit.grid().unwrap().len(), 4);
    }

    #[test]
    fn sweep_axis_rejects_mixed_forms() {
        let bad = SweepAxis {
            param: "tau".into(),
            min: Some(1.0),
            max: None,
            points: None,
            scale: "linear".into(),
            values: vec![1.0, 2.0],
        };
        assert!(bad.grid().is_err());
    }

    #[test]
    fn unknown_sweep_parameter_lists_choices() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let err = cfg.model.with_param("coupling", 1.0).unwrap_err();
        match err {
            Failure::Config(msg) => assert!(msg.contains("tau, gamma"), "{msg}"),
            other => panic!("wrong class: {other:?}"),
        }
    }

    #[test]
    fn resolved_config_echo_round_trips() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let echo = cfg.echo().unwrap();
        let back = ExperimentConfig::parse(&echo).unwrap();
        assert_eq!(back.model.tau, cfg.model.tau);
        assert_eq!(back.run.seed, cfg.run.seed);
    }

    #[test]
    fn initial_state_names() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let ground = cfg.model.initial_state("ground", 3).unwrap();
        assert!((ground.population(2) - 1.0).abs() < 1e-15);
        let excited = cfg.model.initial_state("excited", 3).unwrap();
        assert!((excited.population(0) - 1.0).abs() < 1e-15);
        assert!(cfg.model.initial_state("plus", 3).is_err());
        assert!(cfg.model.initial_state("plus", 2).is_ok());
        assert!(cfg.model.initial_state("sideways", 2).is_err());
    }
}
