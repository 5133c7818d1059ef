//! Discrete-time linear Kalman filter over the 6-D position/velocity state
//! with acceleration input.
//!
//! Model:
//!
//! ```text
//! x_{t+1} = F·x_t + G·u_t + w_t,   z_t = H·x_t + v_t
//!
//!     ┌ I₃  T·I₃ ┐       ┌ ½T²·I₃ ┐
//! F = │          │,  G = │        │,  H = [I₃ 0₃]
//!     └ 0₃   I₃  ┘       └  T·I₃  ┘
//! ```
//!
//! `Predict` propagates mean and covariance through the dynamics; `Update`
//! folds in a position observation through the Kalman gain. Both are pure
//! functions: a filter instance is just a [`GaussianState`] value.

use std::fmt;

use crate::linalg::{sym_eigen, Matrix, Vec3};

/// Default initial position variance (m²) when a filter is seeded from a
/// TDOA fix.
pub const DEFAULT_POSITION_VAR: f64 = 100.0;
/// Default initial velocity variance ((m/s)²); large because the first fix
/// carries no velocity information.
pub const DEFAULT_VELOCITY_VAR: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    InvalidDt(f64),
    /// `which` is "process_noise" or "measurement_noise".
    InvalidNoise {
        which: &'static str,
        reason: String,
    },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidDt(dt) => write!(f, "sampling interval must be > 0, got {dt}"),
            ModelError::InvalidNoise { which, reason } => write!(f, "invalid {which}: {reason}"),
        }
    }
}

impl std::error::Error for ModelError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularInnovation;

impl fmt::Display for SingularInnovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "innovation covariance H·P·Hᵀ + R is singular")
    }
}

impl std::error::Error for SingularInnovation {}

/// The fixed model matrices of the filter.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanModel {
    /// 6×6 state transition.
    pub f: Matrix,
    /// 6×3 input map.
    pub g: Matrix,
    /// 3×6 observation map `[I₃ 0₃]`.
    pub h: Matrix,
    /// 6×6 process noise covariance (PSD).
    pub q: Matrix,
    /// 3×3 measurement noise covariance (PD).
    pub r: Matrix,
    /// Sampling interval, seconds.
    pub dt: f64,
}

/// Gaussian belief over `[x, y, z, vx, vy, vz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: [f64; 6],
    /// 6×6 covariance, kept symmetric.
    pub cov: Matrix,
    /// Time of validity, seconds.
    pub time: f64,
}

impl GaussianState {
    pub fn new(mean: [f64; 6], cov: Matrix, time: f64) -> Self {
        assert_eq!(
            (cov.rows(), cov.cols()),
            (6, 6),
            "state covariance must be 6x6"
        );
        GaussianState {
            mean,
            cov: cov.symmetrized(),
            time,
        }
    }

    /// Seed a filter from a position fix: zero velocity, diagonal covariance.
    pub fn from_position_fix(
        position: Vec3,
        time: f64,
        position_var: f64,
        velocity_var: f64,
    ) -> Self {
        let mean = [position.x, position.y, position.z, 0.0, 0.0, 0.0];
        let cov = Matrix::diagonal(&[
            position_var,
            position_var,
            position_var,
            velocity_var,
            velocity_var,
            velocity_var,
        ]);
        GaussianState { mean, cov, time }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.mean[0], self.mean[1], self.mean[2])
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(self.mean[3], self.mean[4], self.mean[5])
    }
}

/// Acceleration command (engine plus known current), m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub accel: Vec3,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput { accel: Vec3::ZERO };

    pub fn new(accel: Vec3) -> Self {
        ControlInput { accel }
    }
}

fn check_psd(m: &Matrix, which: &'static str, strict: bool) -> Result<(), ModelError> {
    let dim = if which == "process_noise" { 6 } else { 3 };
    if (m.rows(), m.cols()) != (dim, dim) {
        return Err(ModelError::InvalidNoise {
            which,
            reason: format!("must be {dim}x{dim}, got {}x{}", m.rows(), m.cols()),
        });
    }
    let eig = sym_eigen(m).map_err(|e| ModelError::InvalidNoise {
        which,
        reason: e.to_string(),
    })?;
    let max = eig.values[0].max(0.0);
    let min = *eig.values.last().unwrap();
    if strict {
        if min <= 0.0 || min <= 1e-12 * max {
            return Err(ModelError::InvalidNoise {
                which,
                reason: format!("must be positive definite; smallest eigenvalue {min:e}"),
            });
        }
    } else if min < -1e-9 * max.max(1.0) {
        return Err(ModelError::InvalidNoise {
            which,
            reason: format!("must be positive semidefinite; smallest eigenvalue {min:e}"),
        });
    }
    Ok(())
}

/// Assemble the model matrices for sampling interval `dt`, validating that
/// `q` is PSD and `r` is PD.
pub fn build_model(dt: f64, q: Matrix, r: Matrix) -> Result<KalmanModel, ModelError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ModelError::InvalidDt(dt));
    }
    check_psd(&q, "process_noise", false)?;
    check_psd(&r, "measurement_noise", true)?;

    let mut f = Matrix::identity(6);
    for i in 0..3 {
        f[(i, i + 3)] = dt;
    }
    let mut g = Matrix::zeros(6, 3);
    for i in 0..3 {
        g[(i, i)] = 0.5 * dt * dt;
        g[(i + 3, i)] = dt;
    }
    let mut h = Matrix::zeros(3, 6);
    for i in 0..3 {
        h[(i, i)] = 1.0;
    }
    Ok(KalmanModel {
        f,
        g,
        h,
        q: q.symmetrized(),
        r: r.symmetrized(),
        dt,
    })
}

/// Prediction step: `mean' = F·mean + G·u`, `P' = F·P·Fᵀ + Q`.
pub fn predict(state: &GaussianState, model: &KalmanModel, u: &ControlInput) -> GaussianState {
    let fx = model.f.mul_vec(&state.mean);
    let gu = model.g.mul_vec(&u.accel.to_array());
    let mut mean = [0.0; 6];
    for i in 0..6 {
        mean[i] = fx[i] + gu[i];
    }
    let cov = model
        .f
        .matmul(&state.cov)
        .matmul(&model.f.transpose())
        .add_mat(&model.q)
        .symmetrized();
    GaussianState {
        mean,
        cov,
        time: state.time + model.dt,
    }
}

/// Update step with a position observation `z`:
/// `K = P·Hᵀ·(H·P·Hᵀ + R)⁻¹`, `mean' = mean + K·(z − H·mean)`,
/// `P' = (I − K·H)·P`.
pub fn update(
    state: &GaussianState,
    model: &KalmanModel,
    z: Vec3,
) -> Result<GaussianState, SingularInnovation> {
    let ph_t = state.cov.matmul(&model.h.transpose()); // 6×3
    let s = model.h.matmul(&ph_t).add_mat(&model.r).symmetrized(); // 3×3
                                                                   // K = P·Hᵀ·S⁻¹ via S·Kᵀ = (P·Hᵀ)ᵀ, using S = Sᵀ.
    let k_t = s.solve(&ph_t.transpose()).map_err(|_| SingularInnovation)?;
    let k = k_t.transpose(); // 6×3

    let hx = model.h.mul_vec(&state.mean);
    let resid = [z.x - hx[0], z.y - hx[1], z.z - hx[2]];
    let correction = k.mul_vec(&resid);
    let mut mean = state.mean;
    for i in 0..6 {
        mean[i] += correction[i];
    }
    let i_kh = Matrix::identity(6).sub_mat(&k.matmul(&model.h));
    let cov = i_kh.matmul(&state.cov).symmetrized();
    Ok(GaussianState {
        mean,
        cov,
        time: state.time,
    })
}

/// Measurement residual `z − H·mean` and its covariance `S = H·P·Hᵀ + R`,
/// for consistency (NEES/NIS) monitoring.
pub fn innovation(state: &GaussianState, model: &KalmanModel, z: Vec3) -> (Vec3, Matrix) {
    let hx = model.h.mul_vec(&state.mean);
    let resid = Vec3::new(z.x - hx[0], z.y - hx[1], z.z - hx[2]);
    let s = model
        .h
        .matmul(&state.cov.matmul(&model.h.transpose()))
        .add_mat(&model.r)
        .symmetrized();
    (resid, s)
}
