//! Scenario configuration documents.
//!
//! A config is a single JSON object with units spelled out in the field
//! names (`dt_seconds`, `sound_speed_mps`, ...). Parsing resolves every
//! optional field to its default and records which defaults were applied;
//! the resolved document is what lands in `manifest.json`, so re-running
//! from a manifest reproduces the run exactly. A manifest file itself is
//! accepted wherever a config is expected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use hydrotrack_core::acoustic::{AcousticConfig, BuoyArray, DEFAULT_SOUND_SPEED};
use hydrotrack_core::kalman::{build_model, DEFAULT_POSITION_VAR, DEFAULT_VELOCITY_VAR};
use hydrotrack_core::linalg::{Matrix, Vec3};
use hydrotrack_core::search::{Scenario, DEFAULT_TOLERANCE_FACTOR};
use hydrotrack_core::sim::{GridSpec, InitialStateSpec, ScenarioConfig, TrajectorySpec};
use hydrotrack_core::tdoa::SolverOrder;

use crate::CliError;

/// Noise covariance: a diagonal or a full row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum NoiseDoc {
    Diag { diag: Vec<f64> },
    Full { full: Vec<Vec<f64>> },
}

impl NoiseDoc {
    fn to_matrix(&self, dim: usize, field: &str) -> Result<Matrix, CliError> {
        match self {
            NoiseDoc::Diag { diag } => {
                if diag.len() != dim {
                    return Err(validation(
                        field,
                        format!("diagonal must have {dim} entries, got {}", diag.len()),
                    ));
                }
                Ok(Matrix::diagonal(diag))
            }
            NoiseDoc::Full { full } => {
                if full.len() != dim || full.iter().any(|r| r.len() != dim) {
                    return Err(validation(
                        field,
                        format!("full matrix must be {dim}x{dim}"),
                    ));
                }
                Ok(Matrix::from_rows(full))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuoysDoc {
    pub reference: [f64; 3],
    pub auxiliaries: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub origin_m: [f64; 3],
    pub spacing_m: [f64; 3],
    pub counts: [usize; 3],
    pub descend_z: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDoc {
    pub initial_position_m: [f64; 3],
    pub initial_velocity_mps: [f64; 3],
    pub accelerations_mps2: Vec<[f64; 3]>,
    pub truth_process_noise: Option<bool>,
}

/// The configuration document as written by users (all fields optional) and
/// as resolved into manifests (defaults filled in).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub seed: Option<u64>,
    pub sound_speed_mps: Option<f64>,
    pub timing_noise_std_s: Option<f64>,
    pub buoys_m: Option<BuoysDoc>,
    pub dt_seconds: Option<f64>,
    pub process_noise: Option<NoiseDoc>,
    pub measurement_noise: Option<NoiseDoc>,
    pub initial_position_var_m2: Option<f64>,
    pub initial_velocity_var_m2s2: Option<f64>,
    pub grid: Option<GridDoc>,
    pub trajectory: Option<TrajectoryDoc>,
    pub num_steps: Option<usize>,
    pub dropout_steps: Option<Vec<usize>>,
    pub disconnect_time_s: Option<f64>,
    pub scenario: Option<String>,
    pub monte_carlo_runs: Option<usize>,
    pub cdf_thresholds_m: Option<Vec<f64>>,
    pub confidence: Option<f64>,
    pub radius_scale: Option<f64>,
    pub disconnect_tolerance_factor: Option<f64>,
    pub solver_order: Option<String>,
}

/// Result of [`parse_config`]: the resolved document (manifest content), the
/// names of defaulted fields (provenance log), and the runnable scenario.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub resolved: ConfigDoc,
    pub defaults_applied: Vec<String>,
    pub scenario: ScenarioConfig,
}

fn validation(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

fn require<T: Clone>(opt: &Option<T>, field: &str) -> Result<T, CliError> {
    opt.clone()
        .ok_or_else(|| validation(field, "required field is missing"))
}

/// Parse and validate a configuration file (or a manifest wrapping one).
pub fn parse_config(path: &Path) -> Result<ParsedConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    // A manifest carries the resolved config under "config".
    let config_value = match &value {
        serde_json::Value::Object(map)
            if map.contains_key("tool") && map.contains_key("config") =>
        {
            map["config"].clone()
        }
        _ => value,
    };
    let doc: ConfigDoc = serde_json::from_value(config_value)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    resolve(doc)
}

/// Apply defaults and build the core scenario, recording defaulted fields.
pub fn resolve(doc: ConfigDoc) -> Result<ParsedConfig, CliError> {
    let mut defaults = Vec::new();
    let mut default_f64 = |opt: Option<f64>, value: f64, field: &str| -> f64 {
        match opt {
            Some(v) => v,
            None => {
                defaults.push(field.to_string());
                value
            }
        }
    };

    let sound_speed = default_f64(doc.sound_speed_mps, DEFAULT_SOUND_SPEED, "sound_speed_mps");
    let timing_noise = default_f64(doc.timing_noise_std_s, 0.0, "timing_noise_std_s");
    let position_var = default_f64(
        doc.initial_position_var_m2,
        DEFAULT_POSITION_VAR,
        "initial_position_var_m2",
    );
    let velocity_var = default_f64(
        doc.initial_velocity_var_m2s2,
        DEFAULT_VELOCITY_VAR,
        "initial_velocity_var_m2s2",
    );
    let confidence = default_f64(doc.confidence, 0.95, "confidence");
    let radius_scale = default_f64(doc.radius_scale, 1.0, "radius_scale");
    let tolerance_factor = default_f64(
        doc.disconnect_tolerance_factor,
        DEFAULT_TOLERANCE_FACTOR,
        "disconnect_tolerance_factor",
    );

    let seed = require(&doc.seed, "seed")?;
    let buoys_doc = require(&doc.buoys_m, "buoys_m")?;
    let dt = require(&doc.dt_seconds, "dt_seconds")?;
    let q_doc = require(&doc.process_noise, "process_noise")?;
    let r_doc = require(&doc.measurement_noise, "measurement_noise")?;

    if !(dt > 0.0) || !dt.is_finite() {
        return Err(validation("dt_seconds", format!("must be > 0, got {dt}")));
    }
    if buoys_doc.auxiliaries.len() < 4 {
        return Err(validation(
            "buoys_m",
            format!(
                "need at least 5 buoys (reference + 4 auxiliaries) for the closed-form path, got {}",
                1 + buoys_doc.auxiliaries.len()
            ),
        ));
    }
    let buoys = BuoyArray::new(
        Vec3::from_array(buoys_doc.reference),
        buoys_doc
            .auxiliaries
            .iter()
            .map(|&a| Vec3::from_array(a))
            .collect(),
    )
    .map_err(|e| validation("buoys_m", e.to_string()))?;
    let acoustic = AcousticConfig::new(sound_speed, timing_noise)
        .map_err(|e| validation("sound_speed_mps", e.to_string()))?;
    let q = q_doc.to_matrix(6, "process_noise")?;
    let r = r_doc.to_matrix(3, "measurement_noise")?;
    // Eigenvalue checks (Q PSD, R PD) happen in the model builder.
    build_model(dt, q.clone(), r.clone()).map_err(|e| match e {
        hydrotrack_core::kalman::ModelError::InvalidNoise { which, reason } => {
            validation(which, reason)
        }
        other => validation("dt_seconds", other.to_string()),
    })?;

    let monte_carlo_runs = match doc.monte_carlo_runs {
        Some(0) => return Err(validation("monte_carlo_runs", "must be >= 1")),
        Some(n) => n,
        None => {
            defaults.push("monte_carlo_runs".to_string());
            1
        }
    };
    let cdf_thresholds = match &doc.cdf_thresholds_m {
        Some(t) => {
            if !t.windows(2).all(|w| w[0] <= w[1]) {
                return Err(validation("cdf_thresholds_m", "must be sorted ascending"));
            }
            t.clone()
        }
        None => {
            defaults.push("cdf_thresholds_m".to_string());
            (1..=16).map(|i| 0.5 * i as f64).collect()
        }
    };
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(validation(
            "confidence",
            format!("must be in (0,1), got {confidence}"),
        ));
    }
    if tolerance_factor < 1.0 {
        return Err(validation("disconnect_tolerance_factor", "must be >= 1"));
    }

    let grid = match &doc.grid {
        Some(g) => {
            if g.counts.iter().any(|&c| c == 0) {
                return Err(validation("grid", "counts must be >= 1 per axis"));
            }
            Some(GridSpec {
                origin: Vec3::from_array(g.origin_m),
                spacing: Vec3::from_array(g.spacing_m),
                counts: (g.counts[0], g.counts[1], g.counts[2]),
                descend_z: g.descend_z.unwrap_or(true),
            })
        }
        None => None,
    };

    let trajectory = doc.trajectory.as_ref().map(|t| TrajectorySpec {
        initial_position: Vec3::from_array(t.initial_position_m),
        initial_velocity: Vec3::from_array(t.initial_velocity_mps),
        accelerations: t
            .accelerations_mps2
            .iter()
            .map(|&a| Vec3::from_array(a))
            .collect(),
        truth_process_noise: t.truth_process_noise.unwrap_or(false),
    });

    let num_steps = match doc.num_steps {
        Some(n) => n,
        None => {
            let n = trajectory
                .as_ref()
                .map(|t| t.accelerations.len())
                .unwrap_or(0);
            if doc.trajectory.is_some() {
                defaults.push("num_steps".to_string());
            }
            n
        }
    };
    if let Some(t) = &trajectory {
        if t.accelerations.len() < num_steps {
            return Err(validation(
                "num_steps",
                format!(
                    "{} exceeds the {} planned accelerations",
                    num_steps,
                    t.accelerations.len()
                ),
            ));
        }
    }
    let dropout_steps = match &doc.dropout_steps {
        Some(d) => {
            if d.contains(&0) {
                return Err(validation(
                    "dropout_steps",
                    "step 0 initializes the filter and cannot drop",
                ));
            }
            d.clone()
        }
        None => Vec::new(),
    };
    if let Some(td) = doc.disconnect_time_s {
        if !(td > 0.0) {
            return Err(validation(
                "disconnect_time_s",
                format!("must be > 0, got {td}"),
            ));
        }
    }
    let scenario = match doc.scenario.as_deref() {
        None => None,
        Some("continued_navigation") => Some(Scenario::ContinuedNavigation),
        Some("propulsion_failure") => Some(Scenario::PropulsionFailure),
        Some(other) => return Err(validation(
            "scenario",
            format!(
                "unknown scenario `{other}` (expected continued_navigation or propulsion_failure)"
            ),
        )),
    };
    let solver_order = match doc.solver_order.as_deref() {
        None => {
            defaults.push("solver_order".to_string());
            SolverOrder::ChanFirst
        }
        Some("chan_first") => SolverOrder::ChanFirst,
        Some("linearized_first") => SolverOrder::LinearizedFirst,
        Some(other) => {
            return Err(validation(
                "solver_order",
                format!("unknown solver order `{other}` (expected chan_first or linearized_first)"),
            ))
        }
    };

    let mut scenario_cfg = ScenarioConfig::new(buoys, acoustic, dt, q, r, seed);
    scenario_cfg.initial_state = InitialStateSpec {
        position_var,
        velocity_var,
    };
    scenario_cfg.grid = grid;
    scenario_cfg.trajectory = trajectory;
    scenario_cfg.num_steps = num_steps;
    scenario_cfg.dropout_steps = dropout_steps;
    scenario_cfg.disconnect_time = doc.disconnect_time_s;
    scenario_cfg.scenario = scenario;
    scenario_cfg.monte_carlo_runs = monte_carlo_runs;
    scenario_cfg.cdf_thresholds = cdf_thresholds.clone();
    scenario_cfg.confidence = confidence;
    scenario_cfg.radius_scale = radius_scale;
    scenario_cfg.disconnect_tolerance_factor = tolerance_factor;
    scenario_cfg.solver_order = solver_order;

    let resolved = ConfigDoc {
        seed: Some(seed),
        sound_speed_mps: Some(sound_speed),
        timing_noise_std_s: Some(timing_noise),
        buoys_m: Some(buoys_doc),
        dt_seconds: Some(dt),
        process_noise: Some(q_doc),
        measurement_noise: Some(r_doc),
        initial_position_var_m2: Some(position_var),
        initial_velocity_var_m2s2: Some(velocity_var),
        grid: doc.grid.clone().map(|mut g| {
            g.descend_z = Some(g.descend_z.unwrap_or(true));
            g
        }),
        trajectory: doc.trajectory.clone().map(|mut t| {
            t.truth_process_noise = Some(t.truth_process_noise.unwrap_or(false));
            t
        }),
        num_steps: Some(num_steps),
        dropout_steps: Some(scenario_cfg.dropout_steps.clone()),
        disconnect_time_s: doc.disconnect_time_s,
        scenario: doc.scenario.clone(),
        monte_carlo_runs: Some(monte_carlo_runs),
        cdf_thresholds_m: Some(cdf_thresholds),
        confidence: Some(confidence),
        radius_scale: Some(radius_scale),
        disconnect_tolerance_factor: Some(tolerance_factor),
        solver_order: Some(
            match solver_order {
                SolverOrder::ChanFirst => "chan_first",
                SolverOrder::LinearizedFirst => "linearized_first",
            }
            .to_string(),
        ),
    };

    Ok(ParsedConfig {
        resolved,
        defaults_applied: defaults,
        scenario: scenario_cfg,
    })
}

/// Experiment-specific requirements, checked before running.
pub fn validate_for_command(parsed: &ParsedConfig, command: &str) -> Result<(), CliError> {
    match command {
        "localize" | "grid" => {
            if parsed.scenario.grid.is_none() {
                return Err(validation(
                    "grid",
                    format!("the `{command}` command needs a grid section"),
                ));
            }
        }
        "track" => {
            if parsed.scenario.trajectory.is_none() {
                return Err(validation(
                    "trajectory",
                    "the `track` command needs a trajectory section",
                ));
            }
            if parsed.scenario.num_steps == 0 {
                return Err(validation(
                    "num_steps",
                    "the `track` command needs num_steps >= 1",
                ));
            }
        }
        "search" => {
            if parsed.scenario.trajectory.is_none() {
                return Err(validation(
                    "trajectory",
                    "the `search` command needs a trajectory section",
                ));
            }
            if parsed.scenario.disconnect_time.is_none() {
                return Err(validation(
                    "disconnect_time_s",
                    "the `search` command needs a disconnect time",
                ));
            }
            if parsed.scenario.scenario.is_none() {
                return Err(validation(
                    "scenario",
                    "the `search` command needs a scenario",
                ));
            }
        }
        other => unreachable!("unknown command {other}"),
    }
    Ok(())
}
