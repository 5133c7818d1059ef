//! Post-disconnection prediction and search-region construction.
//!
//! When the acoustic link drops, the last filtered state is frozen and
//! propagated forward under one of two motion hypotheses:
//!
//! - continued navigation — the vehicle keeps executing its predetermined
//!   plan, so the mean follows `x' = F·x + G·u` with the planned inputs;
//! - propulsion failure — passive drift, `x' = F·x + w` with `w ~ N(0, Q)`.
//!
//! In both cases the covariance grows by `P' = F·P·Fᵀ + Q` each step (no
//! updates arrive), and each horizon yields a [`SearchRegion`]: a scalar
//! radius proportional to `√tr(P)` plus a chi-square-scaled confidence
//! ellipsoid from the position block of `P`.

use std::fmt;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::kalman::{predict, ControlInput, GaussianState, KalmanModel};
use crate::linalg::{sym_eigen, Matrix, Vec3};
use crate::stats::chi_square_quantile;

/// Default slack factor on the sampling period before a missing packet
/// counts as a disconnection.
pub const DEFAULT_TOLERANCE_FACTOR: f64 = 1.5;

/// Post-disconnection motion hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// No mechanical failure: the vehicle keeps following its plan.
    ContinuedNavigation,
    /// Propulsion lost at disconnection: passive drift.
    PropulsionFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    /// The navigation plan does not cover the requested horizon.
    PlanExhausted { needed_time: f64 },
    /// Operation called with an event of the wrong scenario.
    ScenarioMismatch { expected: Scenario, got: Scenario },
    /// Process noise matrix is not positive semidefinite.
    QNotPsd,
    /// Confidence level outside (0, 1).
    InvalidConfidence(f64),
    /// Plan input times are not strictly increasing with the model spacing.
    InvalidPlanSpacing { index: usize },
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::PlanExhausted { needed_time } => {
                write!(f, "navigation plan has no input for time {needed_time}")
            }
            SearchError::ScenarioMismatch { expected, got } => {
                write!(f, "event scenario is {got:?}, operation needs {expected:?}")
            }
            SearchError::QNotPsd => write!(f, "process noise is not positive semidefinite"),
            SearchError::InvalidConfidence(c) => write!(f, "confidence must be in (0,1), got {c}"),
            SearchError::InvalidPlanSpacing { index } => {
                write!(
                    f,
                    "plan input times must step by the sampling interval (entry {index})"
                )
            }
        }
    }
}

impl std::error::Error for SearchError {}

/// The frozen initial condition for autonomous prediction: the last filtered
/// state before the link dropped, plus the assumed scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DisconnectionEvent {
    time: f64,
    last_state: GaussianState,
    scenario: Scenario,
}

impl DisconnectionEvent {
    /// The event time is taken from the state itself, keeping the
    /// `time == last_state.time` invariant by construction.
    pub fn new(last_state: GaussianState, scenario: Scenario) -> Self {
        DisconnectionEvent {
            time: last_state.time,
            last_state,
            scenario,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn last_state(&self) -> &GaussianState {
        &self.last_state
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }
}

/// A predetermined per-step control schedule: `(time, acceleration)` pairs
/// spaced by the model sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NavigationPlan {
    inputs: Vec<(f64, Vec3)>,
}

impl NavigationPlan {
    /// Validates strictly increasing times with spacing `dt`.
    pub fn new(inputs: Vec<(f64, Vec3)>, dt: f64) -> Result<Self, SearchError> {
        for i in 1..inputs.len() {
            let gap = inputs[i].0 - inputs[i - 1].0;
            if !(gap > 0.0) || (gap - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(SearchError::InvalidPlanSpacing { index: i });
            }
        }
        Ok(NavigationPlan { inputs })
    }

    /// Evenly spaced plan starting at `start_time`.
    pub fn from_accels(start_time: f64, dt: f64, accels: Vec<Vec3>) -> Self {
        let inputs = accels
            .into_iter()
            .enumerate()
            .map(|(k, a)| (start_time + k as f64 * dt, a))
            .collect();
        NavigationPlan { inputs }
    }

    pub fn inputs(&self) -> &[(f64, Vec3)] {
        &self.inputs
    }

    /// Planned acceleration at `time`, matched within a small fraction of `dt`.
    pub fn accel_at(&self, time: f64, dt: f64) -> Option<Vec3> {
        let tol = 1e-6 * dt.max(1.0);
        self.inputs
            .iter()
            .find(|(t, _)| (t - time).abs() <= tol)
            .map(|(_, a)| *a)
    }
}

/// An ellipsoid semi-axis: unit direction and semi-length in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidAxis {
    pub direction: Vec3,
    pub semi_length: f64,
}

/// Search region at one prediction horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRegion {
    /// Seconds since disconnection.
    pub horizon: f64,
    /// Predicted mean position.
    pub center: Vec3,
    /// 3×3 position block of the propagated covariance.
    pub cov_pos: Matrix,
    /// Scalar radius `radius_scale·√tr(P)` over the full 6×6 covariance.
    pub radius: f64,
    /// Confidence-ellipsoid semi-axes, semi-lengths descending.
    pub axes: [EllipsoidAxis; 3],
    pub confidence: f64,
}

impl SearchRegion {
    /// Whether `p` lies inside (or on) the confidence ellipsoid.
    pub fn contains(&self, p: Vec3) -> bool {
        let d = p - self.center;
        let mut acc = 0.0;
        for axis in &self.axes {
            let proj = axis.direction.dot(d);
            if axis.semi_length <= 0.0 {
                if proj.abs() > 1e-9 {
                    return false;
                }
            } else {
                acc += (proj / axis.semi_length).powi(2);
            }
        }
        acc <= 1.0 + 1e-12
    }
}

/// True when the gap since the last packet exceeds `tolerance_factor`
/// sampling periods (strictly).
pub fn detect_disconnection(
    last_packet_time: f64,
    now: f64,
    dt: f64,
    tolerance_factor: f64,
) -> bool {
    debug_assert!(dt > 0.0 && tolerance_factor >= 1.0);
    (now - last_packet_time) > tolerance_factor * dt
}

/// Scenario-1 propagation: deterministic plan-following dynamics with
/// covariance growth. Element 0 of the result is the event state itself;
/// element `k` is the prediction `k` steps past the event.
pub fn propagate_continued(
    event: &DisconnectionEvent,
    model: &KalmanModel,
    plan: &NavigationPlan,
    steps: usize,
) -> Result<Vec<GaussianState>, SearchError> {
    if event.scenario != Scenario::ContinuedNavigation {
        return Err(SearchError::ScenarioMismatch {
            expected: Scenario::ContinuedNavigation,
            got: event.scenario,
        });
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(event.last_state.clone());
    for _ in 0..steps {
        let prev = out.last().unwrap();
        let accel = plan
            .accel_at(prev.time, model.dt)
            .ok_or(SearchError::PlanExhausted {
                needed_time: prev.time,
            })?;
        out.push(predict(prev, model, &ControlInput::new(accel)));
    }
    Ok(out)
}

/// Scenario-2 propagation: input-free drift of the mean with the same
/// covariance recursion. Distribution propagation only; see
/// [`sample_drift_trajectory`] for realizations.
pub fn propagate_drift(
    event: &DisconnectionEvent,
    model: &KalmanModel,
    steps: usize,
) -> Result<Vec<GaussianState>, SearchError> {
    if event.scenario != Scenario::PropulsionFailure {
        return Err(SearchError::ScenarioMismatch {
            expected: Scenario::PropulsionFailure,
            got: event.scenario,
        });
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(event.last_state.clone());
    for _ in 0..steps {
        let prev = out.last().unwrap();
        out.push(predict(prev, model, &ControlInput::ZERO));
    }
    Ok(out)
}

/// Factor L with L·Lᵀ = M for a PSD matrix, via eigendecomposition.
pub(crate) fn psd_factor(m: &Matrix) -> Result<Matrix, SearchError> {
    let eig = sym_eigen(m).map_err(|_| SearchError::QNotPsd)?;
    let max = eig.values[0].max(0.0);
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.values[k];
        if lam < -1e-9 * max.max(1.0) {
            return Err(SearchError::QNotPsd);
        }
        let s = lam.max(0.0).sqrt();
        for i in 0..n {
            l[(i, k)] = eig.vectors[(i, k)] * s;
        }
    }
    Ok(l)
}

/// One Monte Carlo drift realization: positions of `x' = F·x + w`,
/// `w ~ N(0, Q)`, starting from the event mean. Deterministic per seed.
pub fn sample_drift_trajectory(
    event: &DisconnectionEvent,
    model: &KalmanModel,
    steps: usize,
    seed: u64,
) -> Result<Vec<Vec3>, SearchError> {
    if event.scenario != Scenario::PropulsionFailure {
        return Err(SearchError::ScenarioMismatch {
            expected: Scenario::PropulsionFailure,
            got: event.scenario,
        });
    }
    let l = psd_factor(&model.q)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = event.last_state.mean;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(Vec3::new(x[0], x[1], x[2]));
    let q_is_zero = model.q.max_abs() == 0.0;
    for _ in 0..steps {
        let fx = model.f.mul_vec(&x);
        if q_is_zero {
            x.copy_from_slice(&fx);
        } else {
            let xi: Vec<f64> = (0..6).map(|_| normal.sample(&mut rng)).collect();
            let w = l.mul_vec(&xi);
            for i in 0..6 {
                x[i] = fx[i] + w[i];
            }
        }
        out.push(Vec3::new(x[0], x[1], x[2]));
    }
    Ok(out)
}

/// Build the search region for a propagated state.
///
/// The scalar radius follows `radius_scale·√tr(P)` over the full-state
/// covariance; the confidence ellipsoid uses only the position block, with
/// semi-lengths `√(χ²₃(confidence)·λᵢ)` along the eigenvector directions.
pub fn search_region(
    state: &GaussianState,
    horizon: f64,
    confidence: f64,
    radius_scale: f64,
) -> Result<SearchRegion, SearchError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(SearchError::InvalidConfidence(confidence));
    }
    let radius = radius_scale * state.cov.trace().max(0.0).sqrt();
    let cov_pos = state.cov.block(0, 0, 3, 3).symmetrized();
    let eig = sym_eigen(&cov_pos).map_err(|_| SearchError::QNotPsd)?;
    let chi2 = chi_square_quantile(3.0, confidence);
    let mut axes = [EllipsoidAxis {
        direction: Vec3::ZERO,
        semi_length: 0.0,
    }; 3];
    for k in 0..3 {
        axes[k] = EllipsoidAxis {
            direction: Vec3::new(
                eig.vectors[(0, k)],
                eig.vectors[(1, k)],
                eig.vectors[(2, k)],
            ),
            semi_length: (chi2 * eig.values[k].max(0.0)).sqrt(),
        };
    }
    Ok(SearchRegion {
        horizon,
        center: state.position(),
        cov_pos,
        radius,
        axes,
        confidence,
    })
}
