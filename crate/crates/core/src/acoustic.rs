//! Forward acoustic model: buoy geometry, travel times, and TDOA
//! observations with configurable Gaussian timing noise.
//!
//! A vehicle at `p` pings; buoy `i` hears it after `‖p − sᵢ‖ / c`. The
//! observation is the vector of arrival-time differences against the
//! reference buoy, `Δtᵢ = tᵢ − t₀`, optionally perturbed by i.i.d. Gaussian
//! timing noise. This module is both the simulation input generator and the
//! round-trip oracle for the solvers.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::linalg::Vec3;

/// Minimum separation between any two buoys (meters).
const MIN_BUOY_SEPARATION: f64 = 1e-6;

/// Standard seawater sound speed used when a config does not specify one
/// (m/s). Not a measured value for any particular deployment.
pub const DEFAULT_SOUND_SPEED: f64 = 1500.0;

#[derive(Debug, Clone, PartialEq)]
pub enum AcousticError {
    /// A buoy array needs a reference plus at least one auxiliary.
    NoAuxiliaries,
    /// Two buoys (indices into reference-first ordering) coincide.
    CoincidentBuoys(usize, usize),
    /// A coordinate or parameter is NaN/infinite.
    NonFinite(&'static str),
    InvalidSoundSpeed(f64),
    InvalidNoiseStd(f64),
}

impl fmt::Display for AcousticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcousticError::NoAuxiliaries => {
                write!(f, "buoy array needs at least one auxiliary buoy")
            }
            AcousticError::CoincidentBuoys(i, j) => write!(f, "buoys {i} and {j} coincide"),
            AcousticError::NonFinite(what) => write!(f, "{what} must be finite"),
            AcousticError::InvalidSoundSpeed(c) => write!(f, "sound speed must be > 0, got {c}"),
            AcousticError::InvalidNoiseStd(s) => {
                write!(f, "timing noise std must be >= 0, got {s}")
            }
        }
    }
}

impl std::error::Error for AcousticError {}

/// One reference buoy plus the ordered auxiliary buoys, all at fixed known
/// coordinates in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct BuoyArray {
    reference: Vec3,
    auxiliaries: Vec<Vec3>,
}

impl BuoyArray {
    /// Validates that coordinates are finite and no two buoys coincide.
    /// Coplanarity (degenerate geometry for solving) is detected later via
    /// the rank check in the solver.
    pub fn new(reference: Vec3, auxiliaries: Vec<Vec3>) -> Result<Self, AcousticError> {
        if auxiliaries.is_empty() {
            return Err(AcousticError::NoAuxiliaries);
        }
        if !reference.is_finite() || auxiliaries.iter().any(|b| !b.is_finite()) {
            return Err(AcousticError::NonFinite("buoy coordinates"));
        }
        let all: Vec<Vec3> = std::iter::once(reference)
            .chain(auxiliaries.iter().copied())
            .collect();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                if all[i].distance(all[j]) < MIN_BUOY_SEPARATION {
                    return Err(AcousticError::CoincidentBuoys(i, j));
                }
            }
        }
        Ok(BuoyArray {
            reference,
            auxiliaries,
        })
    }

    pub fn reference(&self) -> Vec3 {
        self.reference
    }

    pub fn auxiliaries(&self) -> &[Vec3] {
        &self.auxiliaries
    }

    /// Total number of buoys including the reference.
    pub fn len(&self) -> usize {
        1 + self.auxiliaries.len()
    }

    /// Always false: a valid array has a reference and at least one auxiliary.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Centroid of all buoys; the default nominal point for linearization.
    pub fn centroid(&self) -> Vec3 {
        let mut acc = self.reference;
        for b in &self.auxiliaries {
            acc = acc + *b;
        }
        acc * (1.0 / self.len() as f64)
    }

    /// A copy with reference and auxiliary `aux_index` swapped.
    pub fn with_reference_swapped(&self, aux_index: usize) -> BuoyArray {
        let mut auxiliaries = self.auxiliaries.clone();
        let new_ref = auxiliaries[aux_index];
        auxiliaries[aux_index] = self.reference;
        BuoyArray {
            reference: new_ref,
            auxiliaries,
        }
    }
}

/// Propagation and noise parameters of the acoustic channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticConfig {
    /// Speed of sound `c` in m/s.
    pub sound_speed: f64,
    /// Standard deviation of the Gaussian noise added to each Δtᵢ, seconds.
    pub timing_noise_std: f64,
}

impl AcousticConfig {
    pub fn new(sound_speed: f64, timing_noise_std: f64) -> Result<Self, AcousticError> {
        if !sound_speed.is_finite() {
            return Err(AcousticError::NonFinite("sound speed"));
        }
        if sound_speed <= 0.0 {
            return Err(AcousticError::InvalidSoundSpeed(sound_speed));
        }
        if !timing_noise_std.is_finite() {
            return Err(AcousticError::NonFinite("timing noise std"));
        }
        if timing_noise_std < 0.0 {
            return Err(AcousticError::InvalidNoiseStd(timing_noise_std));
        }
        Ok(AcousticConfig {
            sound_speed,
            timing_noise_std,
        })
    }

    /// Noiseless channel at the default sound speed.
    pub fn noiseless() -> Self {
        AcousticConfig {
            sound_speed: DEFAULT_SOUND_SPEED,
            timing_noise_std: 0.0,
        }
    }
}

impl Default for AcousticConfig {
    fn default() -> Self {
        AcousticConfig::noiseless()
    }
}

/// Arrival-time differences for one ping: `deltas[i] = t_{i+1} − t₀` in
/// seconds, one entry per auxiliary buoy.
#[derive(Debug, Clone, PartialEq)]
pub struct TdoaObservation {
    /// Emission epoch, seconds.
    pub time: f64,
    pub deltas: Vec<f64>,
}

/// Noise-free travel time `‖p − s‖ / c` in seconds.
pub fn travel_time(p: Vec3, s: Vec3, cfg: &AcousticConfig) -> f64 {
    p.distance(s) / cfg.sound_speed
}

/// Generate a TDOA observation for a vehicle at `p`.
///
/// `deltas[i] = (‖p−sᵢ₊₁‖ − ‖p−s₀‖)/c + ηᵢ` with `ηᵢ ~ N(0, timing_noise_std²)`,
/// independent across buoys and calls. With a zero noise std the geometric
/// values are returned exactly and the stream is not consumed.
pub fn make_observation(
    p: Vec3,
    time: f64,
    buoys: &BuoyArray,
    cfg: &AcousticConfig,
    rng: &mut impl Rng,
) -> TdoaObservation {
    let t0 = travel_time(p, buoys.reference(), cfg);
    let mut deltas = Vec::with_capacity(buoys.auxiliaries().len());
    if cfg.timing_noise_std > 0.0 {
        let noise = Normal::new(0.0, cfg.timing_noise_std).expect("finite noise std");
        for &s in buoys.auxiliaries() {
            deltas.push(travel_time(p, s, cfg) - t0 + noise.sample(rng));
        }
    } else {
        for &s in buoys.auxiliaries() {
            deltas.push(travel_time(p, s, cfg) - t0);
        }
    }
    TdoaObservation { time, deltas }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn reference_buoys() -> BuoyArray {
        BuoyArray::new(
            Vec3::new(-800.0, -200.0, 3.0),
            vec![
                Vec3::new(-200.0, -800.0, 0.0),
                Vec3::new(-800.0, -1000.0, 0.0),
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(-500.0, -500.0, -500.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn travel_time_zero_distance() {
        let cfg = AcousticConfig::noiseless();
        let p = Vec3::new(10.0, -3.0, 2.0);
        assert_eq!(travel_time(p, p, &cfg), 0.0);
    }

    #[test]
    fn travel_time_unit() {
        let cfg = AcousticConfig::noiseless();
        assert!((travel_time(Vec3::new(1500.0, 0.0, 0.0), Vec3::ZERO, &cfg) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn travel_time_direct_evaluation() {
        // ‖(−100,−100,−50)‖ = √22500 = 150 → 0.1 s at c = 1500.
        let cfg = AcousticConfig::noiseless();
        let t = travel_time(Vec3::new(-100.0, -100.0, -50.0), Vec3::ZERO, &cfg);
        assert!((t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn equidistant_point_gives_zero_deltas() {
        let buoys = BuoyArray::new(
            Vec3::new(100.0, 0.0, 0.0),
            vec![
                Vec3::new(-100.0, 0.0, 0.0),
                Vec3::new(0.0, 100.0, 0.0),
                Vec3::new(0.0, -100.0, 0.0),
                Vec3::new(0.0, 0.0, 100.0),
            ],
        )
        .unwrap();
        let cfg = AcousticConfig::noiseless();
        let mut rng = StdRng::seed_from_u64(0);
        let obs = make_observation(Vec3::ZERO, 0.0, &buoys, &cfg, &mut rng);
        for d in obs.deltas {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn noise_free_deltas_match_travel_time_differences() {
        let buoys = reference_buoys();
        let cfg = AcousticConfig::noiseless();
        let p = Vec3::new(-100.0, -100.0, -50.0);
        let mut rng = StdRng::seed_from_u64(0);
        let obs = make_observation(p, 0.0, &buoys, &cfg, &mut rng);
        let t0 = travel_time(p, buoys.reference(), &cfg);
        for (i, &s) in buoys.auxiliaries().iter().enumerate() {
            let expect = travel_time(p, s, &cfg) - t0;
            assert!((obs.deltas[i] - expect).abs() < 1e-18);
            // Hyperbolic constraint of the range-difference equation, in
            // range units.
            let resid =
                cfg.sound_speed * obs.deltas[i] - (p.distance(s) - p.distance(buoys.reference()));
            assert!(resid.abs() < 1e-12);
        }
    }

    #[test]
    fn reference_swap_negates_delta() {
        let buoys = reference_buoys();
        let cfg = AcousticConfig::noiseless();
        let p = Vec3::new(-50.0, -250.0, -120.0);
        let mut rng = StdRng::seed_from_u64(0);
        let obs = make_observation(p, 0.0, &buoys, &cfg, &mut rng);
        let swapped = buoys.with_reference_swapped(2);
        let obs2 = make_observation(p, 0.0, &swapped, &cfg, &mut rng);
        // Auxiliary 2 of the swapped array is the old reference.
        assert!((obs2.deltas[2] + obs.deltas[2]).abs() < 1e-15);
    }

    #[test]
    fn deltas_respect_triangle_inequality_with_slack() {
        // |c·Δtᵢ| ≤ ‖sᵢ − s₀‖ + 3·c·σ for any source position.
        let buoys = reference_buoys();
        let sigma = 2e-4;
        let cfg = AcousticConfig::new(1500.0, sigma).unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        for trial in 0..2000 {
            let p = Vec3::new(
                -1000.0 + 7.0 * (trial % 300) as f64,
                -1200.0 + 11.0 * (trial % 200) as f64,
                -400.0 + 3.0 * (trial % 100) as f64,
            );
            let obs = make_observation(p, 0.0, &buoys, &cfg, &mut rng);
            for (i, &d) in obs.deltas.iter().enumerate() {
                let baseline = buoys.auxiliaries()[i].distance(buoys.reference());
                let slack = 3.0 * cfg.sound_speed * sigma;
                assert!(
                    (cfg.sound_speed * d).abs() <= baseline + slack,
                    "trial {trial} buoy {i}: |cΔt| = {} exceeds {baseline} + {slack}",
                    (cfg.sound_speed * d).abs()
                );
            }
        }
    }

    #[test]
    fn noise_std_matches_monte_carlo() {
        let buoys = reference_buoys();
        let sigma = 1e-4;
        let cfg = AcousticConfig::new(1500.0, sigma).unwrap();
        let p = Vec3::new(-100.0, -100.0, -50.0);
        let mut rng = StdRng::seed_from_u64(7);
        let n = 100_000;
        let n_aux = buoys.auxiliaries().len();
        let mut sums = vec![0.0; n_aux];
        let mut sq_sums = vec![0.0; n_aux];
        for _ in 0..n {
            let obs = make_observation(p, 0.0, &buoys, &cfg, &mut rng);
            for (k, d) in obs.deltas.iter().enumerate() {
                sums[k] += d;
                sq_sums[k] += d * d;
            }
        }
        for k in 0..n_aux {
            let mean = sums[k] / n as f64;
            let var = sq_sums[k] / n as f64 - mean * mean;
            let std = var.sqrt();
            assert!(
                (std - sigma).abs() < 0.03 * sigma,
                "buoy {k}: sample std {std} vs {sigma}"
            );
        }
    }

    #[test]
    fn seed_determinism() {
        let buoys = reference_buoys();
        let cfg = AcousticConfig::new(1500.0, 1e-4).unwrap();
        let p = Vec3::new(10.0, 20.0, -30.0);
        let run = |seed: u64| -> Vec<TdoaObservation> {
            let mut rng = StdRng::seed_from_u64(seed);
            (0..50)
                .map(|k| make_observation(p, k as f64, &buoys, &cfg, &mut rng))
                .collect()
        };
        assert_eq!(run(99), run(99));
        assert_ne!(run(99), run(100));
    }

    #[test]
    fn array_validation() {
        assert_eq!(
            BuoyArray::new(Vec3::ZERO, vec![]).unwrap_err(),
            AcousticError::NoAuxiliaries
        );
        let dup = BuoyArray::new(Vec3::ZERO, vec![Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO]);
        assert_eq!(dup.unwrap_err(), AcousticError::CoincidentBuoys(0, 2));
        assert!(AcousticConfig::new(0.0, 0.0).is_err());
        assert!(AcousticConfig::new(1500.0, -1.0).is_err());
    }
}
