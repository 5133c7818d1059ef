//! Experiment harness: grid localization, tracked trajectories with the
//! full observe → solve → filter pipeline, disconnection scenarios, and
//! summary metrics (MAE, per-step MSE series, error CDF).
//!
//! # Reproducibility
//!
//! Every random draw descends from `ScenarioConfig::seed` through
//! [`derive_seed`]: unit `i` of an experiment (grid point, Monte Carlo run)
//! uses `derive_seed(seed, i)`, and within a tracking run the observation
//! stream is seeded with `derive_seed(run_seed, 1)` and the truth process
//! stream with `derive_seed(run_seed, 2)`. Identical configs therefore
//! produce identical [`RunRecord`]s regardless of evaluation order.

use std::fmt;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::acoustic::{make_observation, AcousticConfig, AcousticError, BuoyArray};
use crate::kalman::{
    build_model, predict, update, ControlInput, GaussianState, KalmanModel, ModelError,
    SingularInnovation, DEFAULT_POSITION_VAR, DEFAULT_VELOCITY_VAR,
};
use crate::linalg::{Matrix, Vec3};
use crate::search::{
    detect_disconnection, propagate_continued, propagate_drift, psd_factor, search_region,
    DisconnectionEvent, NavigationPlan, Scenario, SearchError, SearchRegion,
    DEFAULT_TOLERANCE_FACTOR,
};
use crate::tdoa::{solve, solve_chan, PositionFix, SolveError, SolverOrder};

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    MissingGrid,
    MissingTrajectory,
    MissingDisconnect,
    EmptyInput,
    ThresholdsNotSorted,
    InvalidConfig(String),
    Acoustic(AcousticError),
    Solve(SolveError),
    Model(ModelError),
    Update(SingularInnovation),
    Search(SearchError),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::MissingGrid => write!(f, "experiment needs a grid specification"),
            SimError::MissingTrajectory => write!(f, "experiment needs a trajectory plan"),
            SimError::MissingDisconnect => {
                write!(f, "experiment needs disconnect_time and scenario")
            }
            SimError::EmptyInput => write!(f, "empty input"),
            SimError::ThresholdsNotSorted => write!(f, "CDF thresholds must be sorted ascending"),
            SimError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            SimError::Acoustic(e) => write!(f, "acoustic model: {e}"),
            SimError::Solve(e) => write!(f, "TDOA solver: {e}"),
            SimError::Model(e) => write!(f, "filter model: {e}"),
            SimError::Update(e) => write!(f, "filter update: {e}"),
            SimError::Search(e) => write!(f, "search planner: {e}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<AcousticError> for SimError {
    fn from(e: AcousticError) -> Self {
        SimError::Acoustic(e)
    }
}
impl From<SolveError> for SimError {
    fn from(e: SolveError) -> Self {
        SimError::Solve(e)
    }
}
impl From<ModelError> for SimError {
    fn from(e: ModelError) -> Self {
        SimError::Model(e)
    }
}
impl From<SingularInnovation> for SimError {
    fn from(e: SingularInnovation) -> Self {
        SimError::Update(e)
    }
}
impl From<SearchError> for SimError {
    fn from(e: SearchError) -> Self {
        SimError::Search(e)
    }
}

/// Regular 3-D lattice of test points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin: Vec3,
    /// Step sizes per axis, meters. The z step is applied downward by
    /// default (deeper water).
    pub spacing: Vec3,
    pub counts: (usize, usize, usize),
    /// Step z downward (`origin.z − k·|spacing.z|`) when true.
    pub descend_z: bool,
}

/// Truth trajectory definition for tracking/search experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub initial_position: Vec3,
    pub initial_velocity: Vec3,
    /// Planned acceleration for each step transition, one entry per step.
    pub accelerations: Vec<Vec3>,
    /// Sample `w ~ N(0, Q)` onto the truth at every step when true.
    pub truth_process_noise: bool,
}

/// Initial filter covariance specification (diagonal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStateSpec {
    pub position_var: f64,
    pub velocity_var: f64,
}

impl Default for InitialStateSpec {
    fn default() -> Self {
        InitialStateSpec {
            position_var: DEFAULT_POSITION_VAR,
            velocity_var: DEFAULT_VELOCITY_VAR,
        }
    }
}

/// Everything a run needs; fixed `seed` makes the run fully reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub buoys: BuoyArray,
    pub acoustic: AcousticConfig,
    /// Sampling interval, seconds.
    pub dt: f64,
    /// Process noise Q, 6×6 PSD.
    pub process_noise: Matrix,
    /// Measurement noise R, 3×3 PD (position covariance of the TDOA fix).
    pub measurement_noise: Matrix,
    pub initial_state: InitialStateSpec,
    pub grid: Option<GridSpec>,
    pub trajectory: Option<TrajectorySpec>,
    /// Number of filter steps after initialization.
    pub num_steps: usize,
    /// Step indices with no acoustic packet (index 0 must stay clear).
    pub dropout_steps: Vec<usize>,
    pub disconnect_time: Option<f64>,
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub monte_carlo_runs: usize,
    /// Ascending thresholds for the error CDF, meters.
    pub cdf_thresholds: Vec<f64>,
    pub confidence: f64,
    pub radius_scale: f64,
    pub disconnect_tolerance_factor: f64,
    pub solver_order: SolverOrder,
}

impl ScenarioConfig {
    /// A config with the common defaults; experiment-specific parts (grid,
    /// trajectory, disconnect) start empty.
    pub fn new(
        buoys: BuoyArray,
        acoustic: AcousticConfig,
        dt: f64,
        process_noise: Matrix,
        measurement_noise: Matrix,
        seed: u64,
    ) -> Self {
        ScenarioConfig {
            buoys,
            acoustic,
            dt,
            process_noise,
            measurement_noise,
            initial_state: InitialStateSpec::default(),
            grid: None,
            trajectory: None,
            num_steps: 0,
            dropout_steps: Vec::new(),
            disconnect_time: None,
            scenario: None,
            seed,
            monte_carlo_runs: 1,
            cdf_thresholds: (1..=16).map(|i| 0.5 * i as f64).collect(),
            confidence: 0.95,
            radius_scale: 1.0,
            disconnect_tolerance_factor: DEFAULT_TOLERANCE_FACTOR,
            solver_order: SolverOrder::ChanFirst,
        }
    }

    fn validate_common(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if self.monte_carlo_runs == 0 {
            return Err(SimError::InvalidConfig(
                "monte_carlo_runs must be >= 1".into(),
            ));
        }
        if !self.cdf_thresholds.windows(2).all(|w| w[0] <= w[1]) {
            return Err(SimError::ThresholdsNotSorted);
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "confidence must be in (0,1), got {}",
                self.confidence
            )));
        }
        if self.disconnect_tolerance_factor < 1.0 {
            return Err(SimError::InvalidConfig(
                "disconnect_tolerance_factor must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One pipeline step as recorded by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    pub true_position: Vec3,
    pub true_velocity: Vec3,
    /// Raw TDOA fix; absent on dropped packets and solver failures.
    pub tdoa: Option<PositionFix>,
    /// Filter state after the prediction step.
    pub prior: Option<GaussianState>,
    /// Filter state after the update (equals `prior` when no packet arrived).
    pub posterior: Option<GaussianState>,
    /// Search region, present after a detected disconnection.
    pub region: Option<SearchRegion>,
}

/// Summary metrics of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Mean over units (grid points or steps) of the per-unit MAE, where the
    /// per-unit MAE is the mean of the three component-wise absolute errors.
    pub mae: f64,
    /// Mean Euclidean error, for completeness.
    pub mae_euclidean: f64,
    /// Per-step squared Euclidean error of the raw TDOA fix (Monte Carlo
    /// mean when multiple runs are configured).
    pub mse_tdoa: Vec<f64>,
    /// Per-step squared Euclidean error of the pipeline estimate.
    pub mse_filtered: Vec<f64>,
    /// `(threshold, fraction of errors ≤ threshold)` pairs.
    pub cdf: Vec<(f64, f64)>,
    pub solver_failures: usize,
}

/// Full record of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub steps: Vec<StepRecord>,
    pub metrics: Metrics,
}

/// SplitMix64-style stream derivation: decorrelated child seed for unit
/// `index` of a parent seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Lattice points `origin + (i·sx, j·sy, −k·|sz|)` in lexicographic order
/// with k fastest.
pub fn generate_grid(origin: Vec3, spacing: Vec3, counts: (usize, usize, usize)) -> Vec<Vec3> {
    generate_grid_with(origin, spacing, counts, true)
}

/// As [`generate_grid`], with the z direction configurable.
pub fn generate_grid_with(
    origin: Vec3,
    spacing: Vec3,
    counts: (usize, usize, usize),
    descend_z: bool,
) -> Vec<Vec3> {
    let (nx, ny, nz) = counts;
    let z_step = if descend_z {
        -spacing.z.abs()
    } else {
        spacing.z.abs()
    };
    let mut points = Vec::with_capacity(nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                points.push(Vec3::new(
                    origin.x + i as f64 * spacing.x,
                    origin.y + j as f64 * spacing.y,
                    origin.z + k as f64 * z_step,
                ));
            }
        }
    }
    points
}

/// Empirical CDF of `errors` at the given ascending `thresholds`.
pub fn compute_cdf(errors: &[f64], thresholds: &[f64]) -> Result<Vec<(f64, f64)>, SimError> {
    if errors.is_empty() {
        return Err(SimError::EmptyInput);
    }
    if !thresholds.windows(2).all(|w| w[0] <= w[1]) {
        return Err(SimError::ThresholdsNotSorted);
    }
    let n = errors.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| (t, errors.iter().filter(|&&e| e <= t).count() as f64 / n))
        .collect())
}

fn mae_components(estimate: Vec3, truth: Vec3) -> f64 {
    ((estimate.x - truth.x).abs() + (estimate.y - truth.y).abs() + (estimate.z - truth.z).abs())
        / 3.0
}

/// Grid localization: forward model → closed-form solve at every lattice
/// point, with per-point MAE and its CDF. Uses the pure closed form (no
/// linearized fallback) so per-point failures measure the solver itself.
pub fn run_localization_experiment(cfg: &ScenarioConfig) -> Result<RunRecord, SimError> {
    cfg.validate_common()?;
    let grid = cfg.grid.as_ref().ok_or(SimError::MissingGrid)?;
    let (nx, ny, nz) = grid.counts;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(SimError::InvalidConfig("grid counts must be >= 1".into()));
    }
    let points = generate_grid_with(grid.origin, grid.spacing, grid.counts, grid.descend_z);

    let mut steps = Vec::with_capacity(points.len());
    let mut maes = Vec::with_capacity(points.len());
    let mut euclids = Vec::with_capacity(points.len());
    let mut mse_tdoa = Vec::with_capacity(points.len());
    let mut failures = 0;
    for (i, &p) in points.iter().enumerate() {
        let mut rng = StdRng::seed_from_u64(derive_seed(cfg.seed, i as u64));
        let time = i as f64 * cfg.dt;
        let obs = make_observation(p, time, &cfg.buoys, &cfg.acoustic, &mut rng);
        let tdoa = match solve_chan(&obs, &cfg.buoys, &cfg.acoustic) {
            Ok(fix) => {
                maes.push(mae_components(fix.position, p));
                let err = fix.position.distance(p);
                euclids.push(err);
                mse_tdoa.push(err * err);
                Some(fix)
            }
            Err(_) => {
                failures += 1;
                None
            }
        };
        steps.push(StepRecord {
            time,
            true_position: p,
            true_velocity: Vec3::ZERO,
            tdoa,
            prior: None,
            posterior: None,
            region: None,
        });
    }
    if maes.is_empty() {
        return Err(SimError::EmptyInput);
    }
    let cdf = compute_cdf(&maes, &cfg.cdf_thresholds)?;
    let metrics = Metrics {
        mae: maes.iter().sum::<f64>() / maes.len() as f64,
        mae_euclidean: euclids.iter().sum::<f64>() / euclids.len() as f64,
        mse_tdoa,
        mse_filtered: Vec::new(),
        cdf,
        solver_failures: failures,
    };
    Ok(RunRecord { steps, metrics })
}

struct RunOutput {
    steps: Vec<StepRecord>,
    failures: usize,
}

/// One pipeline run; `disconnect` carries `(time, scenario)` for search mode.
fn simulate_run(
    cfg: &ScenarioConfig,
    model: &KalmanModel,
    traj: &TrajectorySpec,
    run_seed: u64,
    disconnect: Option<(f64, Scenario)>,
) -> Result<RunOutput, SimError> {
    let dt = cfg.dt;
    let plan = NavigationPlan::from_accels(0.0, dt, traj.accelerations.clone());
    let mut rng_obs = StdRng::seed_from_u64(derive_seed(run_seed, 1));
    let mut rng_truth = StdRng::seed_from_u64(derive_seed(run_seed, 2));
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let noise_factor = if traj.truth_process_noise
        || disconnect.is_some_and(|(_, s)| s == Scenario::PropulsionFailure)
    {
        Some(psd_factor(&model.q)?)
    } else {
        None
    };
    let sample_w = |rng: &mut StdRng, l: &Matrix| -> [f64; 6] {
        let xi: Vec<f64> = (0..6).map(|_| normal.sample(rng)).collect();
        let w = l.mul_vec(&xi);
        [w[0], w[1], w[2], w[3], w[4], w[5]]
    };

    if cfg.dropout_steps.contains(&0) {
        return Err(SimError::InvalidConfig(
            "step 0 cannot be a dropout; the filter initializes from the first fix".into(),
        ));
    }
    if traj.accelerations.len() < cfg.num_steps {
        return Err(SimError::InvalidConfig(format!(
            "trajectory provides {} accelerations but num_steps is {}",
            traj.accelerations.len(),
            cfg.num_steps
        )));
    }

    let p0 = traj.initial_position;
    let v0 = traj.initial_velocity;
    let mut truth = [p0.x, p0.y, p0.z, v0.x, v0.y, v0.z];
    let mut failures = 0;
    let mut steps: Vec<StepRecord> = Vec::with_capacity(cfg.num_steps + 1);

    // Initialization: first fix seeds the state with zero velocity.
    let obs0 = make_observation(p0, 0.0, &cfg.buoys, &cfg.acoustic, &mut rng_obs);
    let fix0 = solve(&obs0, &cfg.buoys, &cfg.acoustic, cfg.solver_order, None)?;
    let state0 = GaussianState::from_position_fix(
        fix0.position,
        0.0,
        cfg.initial_state.position_var,
        cfg.initial_state.velocity_var,
    );
    steps.push(StepRecord {
        time: 0.0,
        true_position: p0,
        true_velocity: v0,
        tdoa: Some(fix0),
        prior: Some(state0.clone()),
        posterior: Some(state0.clone()),
        region: None,
    });

    let mut posterior = state0;
    let mut last_packet_time = 0.0;
    let mut posterior_at_last_packet_time = posterior.clone();
    let mut event: Option<DisconnectionEvent> = None;
    let mut propagated: Option<Vec<GaussianState>> = None;

    for k in 1..=cfg.num_steps {
        let t = k as f64 * dt;
        let t_prev = t - dt;

        // Truth propagation: drift dynamics once propulsion is gone,
        // otherwise plan-following with optional process noise.
        let drifting =
            matches!(disconnect, Some((td, Scenario::PropulsionFailure)) if t_prev >= td);
        let fx = model.f.mul_vec(&truth);
        if drifting {
            truth.copy_from_slice(&fx);
            if let Some(l) = &noise_factor {
                let w = sample_w(&mut rng_truth, l);
                for i in 0..6 {
                    truth[i] += w[i];
                }
            }
        } else {
            let accel = plan
                .accel_at(t_prev, dt)
                .ok_or(SearchError::PlanExhausted {
                    needed_time: t_prev,
                })?;
            let gu = model.g.mul_vec(&accel.to_array());
            for i in 0..6 {
                truth[i] = fx[i] + gu[i];
            }
            if traj.truth_process_noise {
                if let Some(l) = &noise_factor {
                    let w = sample_w(&mut rng_truth, l);
                    for i in 0..6 {
                        truth[i] += w[i];
                    }
                }
            }
        }
        let true_position = Vec3::new(truth[0], truth[1], truth[2]);
        let true_velocity = Vec3::new(truth[3], truth[4], truth[5]);

        // After a detected disconnection the recorded estimate comes from
        // the scenario propagation, with a search region per horizon.
        if let (Some(ev), Some(props)) = (&event, &propagated) {
            let idx = ((t - ev.time()) / dt).round() as usize;
            let state = props[idx].clone();
            let horizon = t - ev.time();
            let region = search_region(&state, horizon, cfg.confidence, cfg.radius_scale)?;
            steps.push(StepRecord {
                time: t,
                true_position,
                true_velocity,
                tdoa: None,
                prior: Some(state.clone()),
                posterior: Some(state),
                region: Some(region),
            });
            continue;
        }

        // Algorithm pipeline: predict with the planned input, then update
        // when a packet arrived.
        let accel = plan
            .accel_at(t_prev, dt)
            .ok_or(SearchError::PlanExhausted {
                needed_time: t_prev,
            })?;
        let prior = predict(&posterior, model, &ControlInput::new(accel));
        let packet_due = disconnect.is_none_or(|(td, _)| t < td) && !cfg.dropout_steps.contains(&k);
        let mut tdoa = None;
        if packet_due {
            let obs = make_observation(true_position, t, &cfg.buoys, &cfg.acoustic, &mut rng_obs);
            match solve(
                &obs,
                &cfg.buoys,
                &cfg.acoustic,
                cfg.solver_order,
                Some(prior.position()),
            ) {
                Ok(fix) => {
                    posterior = update(&prior, model, fix.position)?;
                    tdoa = Some(fix);
                    last_packet_time = t;
                    posterior_at_last_packet_time = posterior.clone();
                }
                Err(_) => {
                    failures += 1;
                    posterior = prior.clone();
                }
            }
        } else {
            // No update — the prior becomes the posterior unchanged.
            posterior = prior.clone();
        }

        let mut region = None;
        if let Some((td, scenario)) = disconnect {
            // Ordinary dropouts must not arm the search model: the switch
            // needs the detector firing after the configured outage began.
            if event.is_none()
                && t >= td
                && detect_disconnection(last_packet_time, t, dt, cfg.disconnect_tolerance_factor)
            {
                let ev = DisconnectionEvent::new(posterior_at_last_packet_time.clone(), scenario);
                let remaining = cfg.num_steps - (ev.time() / dt).round() as usize;
                let props = match scenario {
                    Scenario::ContinuedNavigation => {
                        propagate_continued(&ev, model, &plan, remaining)?
                    }
                    Scenario::PropulsionFailure => propagate_drift(&ev, model, remaining)?,
                };
                // This step's estimate switches to the propagation.
                let idx = ((t - ev.time()) / dt).round() as usize;
                let state = props[idx].clone();
                let horizon = t - ev.time();
                region = Some(search_region(
                    &state,
                    horizon,
                    cfg.confidence,
                    cfg.radius_scale,
                )?);
                posterior = state;
                event = Some(ev);
                propagated = Some(props);
            }
        }

        steps.push(StepRecord {
            time: t,
            true_position,
            true_velocity,
            tdoa,
            prior: Some(prior),
            posterior: Some(posterior.clone()),
            region,
        });
    }

    Ok(RunOutput { steps, failures })
}

fn metrics_from_runs(cfg: &ScenarioConfig, runs: &[RunOutput]) -> Result<Metrics, SimError> {
    let n_steps = runs[0].steps.len();
    let mut mse_tdoa = vec![0.0; n_steps];
    let mut tdoa_counts = vec![0usize; n_steps];
    let mut mse_filtered = vec![0.0; n_steps];
    let mut filtered_counts = vec![0usize; n_steps];
    let mut maes = Vec::new();
    let mut euclids = Vec::new();
    let mut failures = 0;
    for run in runs {
        failures += run.failures;
        for (k, step) in run.steps.iter().enumerate() {
            if let Some(fix) = &step.tdoa {
                let err = fix.position.distance(step.true_position);
                mse_tdoa[k] += err * err;
                tdoa_counts[k] += 1;
            }
            if let Some(post) = &step.posterior {
                let err = post.position().distance(step.true_position);
                mse_filtered[k] += err * err;
                filtered_counts[k] += 1;
                maes.push(mae_components(post.position(), step.true_position));
                euclids.push(err);
            }
        }
    }
    for k in 0..n_steps {
        if tdoa_counts[k] > 0 {
            mse_tdoa[k] /= tdoa_counts[k] as f64;
        }
        if filtered_counts[k] > 0 {
            mse_filtered[k] /= filtered_counts[k] as f64;
        }
    }
    if maes.is_empty() {
        return Err(SimError::EmptyInput);
    }
    let cdf = compute_cdf(&maes, &cfg.cdf_thresholds)?;
    Ok(Metrics {
        mae: maes.iter().sum::<f64>() / maes.len() as f64,
        mae_euclidean: euclids.iter().sum::<f64>() / euclids.len() as f64,
        mse_tdoa,
        mse_filtered,
        cdf,
        solver_failures: failures,
    })
}

/// Tracked-trajectory experiment: the full observe → solve → predict/update
/// pipeline over `num_steps` steps, averaged over `monte_carlo_runs` runs.
/// The recorded per-step trajectory is run 0.
pub fn run_tracking_experiment(cfg: &ScenarioConfig) -> Result<RunRecord, SimError> {
    cfg.validate_common()?;
    let traj = cfg.trajectory.as_ref().ok_or(SimError::MissingTrajectory)?;
    let model = build_model(
        cfg.dt,
        cfg.process_noise.clone(),
        cfg.measurement_noise.clone(),
    )?;
    let mut runs = Vec::with_capacity(cfg.monte_carlo_runs);
    for run_index in 0..cfg.monte_carlo_runs {
        runs.push(simulate_run(
            cfg,
            &model,
            traj,
            derive_seed(cfg.seed, run_index as u64),
            None,
        )?);
    }
    let metrics = metrics_from_runs(cfg, &runs)?;
    let steps = runs.into_iter().next().unwrap().steps;
    Ok(RunRecord { steps, metrics })
}

/// Disconnection experiment: tracking until `disconnect_time`, then scenario
/// propagation with search regions per horizon; ground truth continues per
/// the chosen truth process.
pub fn run_search_experiment(cfg: &ScenarioConfig) -> Result<RunRecord, SimError> {
    cfg.validate_common()?;
    let traj = cfg.trajectory.as_ref().ok_or(SimError::MissingTrajectory)?;
    let (td, scenario) = match (cfg.disconnect_time, cfg.scenario) {
        (Some(td), Some(s)) => (td, s),
        _ => return Err(SimError::MissingDisconnect),
    };
    if !(td > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "disconnect_time must be > 0, got {td}"
        )));
    }
    let model = build_model(
        cfg.dt,
        cfg.process_noise.clone(),
        cfg.measurement_noise.clone(),
    )?;
    let mut runs = Vec::with_capacity(cfg.monte_carlo_runs);
    for run_index in 0..cfg.monte_carlo_runs {
        runs.push(simulate_run(
            cfg,
            &model,
            traj,
            derive_seed(cfg.seed, run_index as u64),
            Some((td, scenario)),
        )?);
    }
    let metrics = metrics_from_runs(cfg, &runs)?;
    let steps = runs.into_iter().next().unwrap().steps;
    Ok(RunRecord { steps, metrics })
}

/// Monte Carlo calibration of the measurement covariance: sample solver
/// errors at `point` under the configured timing noise and return their
/// 3×3 sample covariance. A helper for choosing R; not a physical model.
pub fn calibrate_measurement_noise(
    buoys: &BuoyArray,
    acoustic: &AcousticConfig,
    point: Vec3,
    samples: usize,
    seed: u64,
) -> Result<Matrix, SimError> {
    if samples < 2 {
        return Err(SimError::InvalidConfig(
            "need at least 2 calibration samples".into(),
        ));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut errors: Vec<[f64; 3]> = Vec::with_capacity(samples);
    for i in 0..samples {
        let obs = make_observation(point, i as f64, buoys, acoustic, &mut rng);
        if let Ok(fix) = solve(&obs, buoys, acoustic, SolverOrder::ChanFirst, None) {
            let d = fix.position - point;
            errors.push([d.x, d.y, d.z]);
        }
    }
    if errors.len() < 2 {
        return Err(SimError::EmptyInput);
    }
    let n = errors.len() as f64;
    let mut mean = [0.0; 3];
    for e in &errors {
        for i in 0..3 {
            mean[i] += e[i] / n;
        }
    }
    let mut cov = Matrix::zeros(3, 3);
    for e in &errors {
        for i in 0..3 {
            for j in 0..3 {
                cov[(i, j)] += (e[i] - mean[i]) * (e[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    Ok(cov)
}
