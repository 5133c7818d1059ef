//! Position estimation from TDOA observations.
//!
//! Three solvers share the range-difference measurement model
//! `c·Δtᵢ = ‖p−sᵢ‖ − ‖p−s₀‖`:
//!
//! - [`solve_chan`] — closed-form multilateration. Squaring the model and
//!   collecting terms gives the linear system `A·p = r₀·C + D` with
//!   `Cᵢ = −c·Δtᵢ` and `Dᵢ = ½(kᵢ − k₀ − c²Δtᵢ²)`; writing `p = a·r₀ + b`
//!   with `a = A†C`, `b = A†D` and substituting into `r₀ = ‖p − s₀‖` leaves
//!   a scalar quadratic `(‖a‖²−1)·r₀² + 2aᵀ(b−s₀)·r₀ + ‖b−s₀‖² = 0`.
//! - [`solve_linearized`] — one Gauss–Newton step of the unsquared model
//!   around a nominal point; used as initializer and as fallback when the
//!   closed form degenerates.
//! - [`solve_overdetermined`] — the same linear system over five or more
//!   auxiliaries with `(p, r₀)` solved jointly by least squares, then one
//!   Gauss–Newton polish.

use std::fmt;

use crate::acoustic::{AcousticConfig, BuoyArray, TdoaObservation};
use crate::linalg::{solve_least_squares, LinalgError, Matrix, Vec3};

/// Which estimator produced a fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Chan,
    Linearized,
    OverdeterminedLs,
}

/// A position estimate with its reference range and measurement residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionFix {
    pub position: Vec3,
    /// Estimated range to the reference buoy, meters (≥ 0).
    pub r0: f64,
    /// RMS of the range-difference residuals over all auxiliaries, meters.
    pub residual_rms: f64,
    pub method: SolveMethod,
}

/// Ordering of the closed-form and linearized paths in [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverOrder {
    /// Chan closed form first; linearized step only as fallback.
    #[default]
    ChanFirst,
    /// Linearized estimate from the nominal first, then the closed form;
    /// the linearized fix is kept if the closed form degenerates.
    LinearizedFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// Buoy geometry is degenerate (e.g. coplanar buoys).
    RankDeficient,
    /// The r₀ quadratic has no real root beyond round-off tolerance.
    NoRealRoot { discriminant: f64 },
    /// Both quadratic roots are negative.
    NoPositiveRoot,
    /// The nominal point coincides with a buoy, so the gradient is singular.
    SingularGradient,
    /// Operation needs more auxiliary buoys than the observation carries.
    NotEnoughAuxiliaries { need: usize, have: usize },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::RankDeficient => write!(f, "buoy geometry is rank-deficient"),
            SolveError::NoRealRoot { discriminant } => {
                write!(
                    f,
                    "range quadratic has no real root (discriminant {discriminant:e})"
                )
            }
            SolveError::NoPositiveRoot => write!(f, "range quadratic has no non-negative root"),
            SolveError::SingularGradient => write!(f, "nominal point coincides with a buoy"),
            SolveError::NotEnoughAuxiliaries { need, have } => {
                write!(f, "need at least {need} auxiliary buoys, have {have}")
            }
        }
    }
}

impl std::error::Error for SolveError {}

impl From<LinalgError> for SolveError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient | LinalgError::Singular => SolveError::RankDeficient,
            other => panic!("unexpected linear-algebra error in solver: {other}"),
        }
    }
}

/// The linear system `A·p = r₀·C + D` of the closed-form path, built from
/// exactly four auxiliary buoys.
#[derive(Debug, Clone, PartialEq)]
pub struct ChanSystem {
    /// 4×3 geometry matrix; row i is `(sᵢ − s₀)ᵀ`.
    pub a_mat: Matrix,
    /// Length-4 range-difference column, entry i `= −c·Δtᵢ`.
    pub c_vec: Vec<f64>,
    /// Length-4 constant column, entry i `= ½(kᵢ − k₀ − c²Δtᵢ²)`.
    pub d_vec: Vec<f64>,
    /// Reference buoy `s₀`.
    pub reference: Vec3,
}

/// Number of auxiliaries consumed by the exact closed-form path.
const CHAN_AUXILIARIES: usize = 4;

/// Build the closed-form linear system from the first four auxiliaries.
pub fn build_chan_system(
    obs: &TdoaObservation,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
) -> Result<ChanSystem, SolveError> {
    let aux = buoys.auxiliaries();
    if aux.len() < CHAN_AUXILIARIES || obs.deltas.len() < CHAN_AUXILIARIES {
        return Err(SolveError::NotEnoughAuxiliaries {
            need: CHAN_AUXILIARIES,
            have: aux.len().min(obs.deltas.len()),
        });
    }
    let s0 = buoys.reference();
    let k0 = s0.norm_squared();
    let c = cfg.sound_speed;
    let mut rows = Vec::with_capacity(CHAN_AUXILIARIES);
    let mut c_vec = Vec::with_capacity(CHAN_AUXILIARIES);
    let mut d_vec = Vec::with_capacity(CHAN_AUXILIARIES);
    for i in 0..CHAN_AUXILIARIES {
        let si = aux[i];
        let diff = si - s0;
        rows.push(vec![diff.x, diff.y, diff.z]);
        let range_diff = c * obs.deltas[i];
        c_vec.push(-range_diff);
        d_vec.push(0.5 * (si.norm_squared() - k0 - range_diff * range_diff));
    }
    let a_mat = Matrix::from_rows(&rows);
    // Rank check: coplanar-buoy geometry fails at construction.
    a_mat.pseudoinverse().map_err(SolveError::from)?;
    Ok(ChanSystem {
        a_mat,
        c_vec,
        d_vec,
        reference: s0,
    })
}

/// RMS of the range-difference residuals of `p` against an observation,
/// in meters, over every auxiliary present.
pub fn residual_rms(
    p: Vec3,
    obs: &TdoaObservation,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
) -> f64 {
    let r0 = p.distance(buoys.reference());
    let mut acc = 0.0;
    let n = obs.deltas.len().min(buoys.auxiliaries().len());
    for i in 0..n {
        let resid = cfg.sound_speed * obs.deltas[i] - (p.distance(buoys.auxiliaries()[i]) - r0);
        acc += resid * resid;
    }
    (acc / n as f64).sqrt()
}

/// Closed-form multilateration from four auxiliaries.
pub fn solve_chan(
    obs: &TdoaObservation,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
) -> Result<PositionFix, SolveError> {
    let sys = build_chan_system(obs, buoys, cfg)?;
    let pinv = sys.a_mat.pseudoinverse()?;
    let a = Vec3::from_array(pinv.mul_vec(&sys.c_vec).try_into().expect("3 components"));
    let b = Vec3::from_array(pinv.mul_vec(&sys.d_vec).try_into().expect("3 components"));
    let b_rel = b - sys.reference;

    let qa = a.norm_squared() - 1.0;
    let qb = 2.0 * a.dot(b_rel);
    let qc = b_rel.norm_squared();

    let mut candidates: Vec<f64> = Vec::with_capacity(2);
    if qa.abs() < 1e-12 {
        // Degenerate to the linear equation B̃·r₀ + C̃ = 0.
        if qb.abs() < 1e-12 {
            if qc.abs() < 1e-9 {
                candidates.push(0.0);
            } else {
                return Err(SolveError::NoRealRoot {
                    discriminant: f64::NEG_INFINITY,
                });
            }
        } else {
            candidates.push(-qc / qb);
        }
    } else {
        let mut disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            // Tangency under round-off: clamp when the deficit is small
            // against the cancellation scale of B̃² − 4ÃC̃. The absolute
            // floor (1e-12 m²) covers r₀ ≈ 0, where both terms are
            // themselves round-off-sized.
            let scale = (qb * qb).max((4.0 * qa * qc).abs());
            if disc >= -(1e-9 * scale).max(1e-12) {
                disc = 0.0;
            } else {
                return Err(SolveError::NoRealRoot { discriminant: disc });
            }
        }
        let sq = disc.sqrt();
        candidates.push((-qb + sq) / (2.0 * qa));
        candidates.push((-qb - sq) / (2.0 * qa));
    }

    // Keep non-negative ranges (tolerating round-off at r₀ = 0) and pick the
    // root whose reconstructed position best explains the measurements.
    let mut best: Option<(f64, Vec3, f64)> = None;
    for &root in &candidates {
        if root < -1e-6 {
            continue;
        }
        let r0 = root.max(0.0);
        let p = a * r0 + b;
        let rms = residual_rms(p, obs, buoys, cfg);
        if best.as_ref().is_none_or(|(_, _, best_rms)| rms < *best_rms) {
            best = Some((r0, p, rms));
        }
    }
    match best {
        Some((r0, position, rms)) => Ok(PositionFix {
            position,
            r0,
            residual_rms: rms,
            method: SolveMethod::Chan,
        }),
        None => Err(SolveError::NoPositiveRoot),
    }
}

/// One Gauss–Newton step of the unsquared range-difference model around
/// `nominal`. Needs at least three auxiliaries.
pub fn solve_linearized(
    obs: &TdoaObservation,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
    nominal: Vec3,
) -> Result<PositionFix, SolveError> {
    let aux = buoys.auxiliaries();
    let n = aux.len().min(obs.deltas.len());
    if n < 3 {
        return Err(SolveError::NotEnoughAuxiliaries { need: 3, have: n });
    }
    let s0 = buoys.reference();
    let grad_ref = (nominal - s0).unit().ok_or(SolveError::SingularGradient)?;
    let range_ref = nominal.distance(s0);

    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let si = aux[i];
        let grad_i = (nominal - si).unit().ok_or(SolveError::SingularGradient)?;
        let row = grad_i - grad_ref;
        let predicted = nominal.distance(si) - range_ref;
        rows.push(vec![row.x, row.y, row.z]);
        rhs.push(cfg.sound_speed * obs.deltas[i] - predicted + row.dot(nominal));
    }
    let a = Matrix::from_rows(&rows);
    let x = solve_least_squares(&a, &rhs)?;
    let position = Vec3::new(x[0], x[1], x[2]);
    Ok(PositionFix {
        position,
        r0: position.distance(s0),
        residual_rms: residual_rms(position, obs, buoys, cfg),
        method: SolveMethod::Linearized,
    })
}

/// Joint least squares over all auxiliaries for `(p, r₀)`, followed by one
/// Gauss–Newton polish. Needs at least five auxiliaries.
pub fn solve_overdetermined(
    obs: &TdoaObservation,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
) -> Result<PositionFix, SolveError> {
    let aux = buoys.auxiliaries();
    let n = aux.len().min(obs.deltas.len());
    if n < 5 {
        return Err(SolveError::NotEnoughAuxiliaries { need: 5, have: n });
    }
    let s0 = buoys.reference();
    let k0 = s0.norm_squared();
    let c = cfg.sound_speed;
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let si = aux[i];
        let diff = si - s0;
        let range_diff = c * obs.deltas[i];
        // (sᵢ−s₀)ᵀp + (c·Δtᵢ)·r₀ = ½(kᵢ − k₀ − c²Δtᵢ²)
        rows.push(vec![diff.x, diff.y, diff.z, range_diff]);
        rhs.push(0.5 * (si.norm_squared() - k0 - range_diff * range_diff));
    }
    let a = Matrix::from_rows(&rows);
    let x = solve_least_squares(&a, &rhs)?;
    let ls_position = Vec3::new(x[0], x[1], x[2]);
    let polished = solve_linearized(obs, buoys, cfg, ls_position)?;
    Ok(PositionFix {
        method: SolveMethod::OverdeterminedLs,
        ..polished
    })
}

/// Full solving strategy used by the pipeline.
///
/// `nominal` seeds the linearized path; the buoy centroid is used when it is
/// absent (e.g. no previous estimate is available).
pub fn solve(
    obs: &TdoaObservation,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
    order: SolverOrder,
    nominal: Option<Vec3>,
) -> Result<PositionFix, SolveError> {
    let nominal = nominal.unwrap_or_else(|| buoys.centroid());
    match order {
        SolverOrder::ChanFirst => match solve_chan(obs, buoys, cfg) {
            Ok(fix) => Ok(fix),
            Err(SolveError::RankDeficient) => Err(SolveError::RankDeficient),
            Err(_) => solve_linearized(obs, buoys, cfg, nominal),
        },
        SolverOrder::LinearizedFirst => {
            let initial = solve_linearized(obs, buoys, cfg, nominal)?;
            match solve_chan(obs, buoys, cfg) {
                Ok(fix) => Ok(fix),
                Err(SolveError::RankDeficient) => Err(SolveError::RankDeficient),
                Err(_) => Ok(initial),
            }
        }
    }
}
