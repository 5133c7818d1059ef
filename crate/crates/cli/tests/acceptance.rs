//! Acceptance suite: one test per validated claim, each printing a
//! `acceptance NN [PASS|FAIL]` line (run with `-- --nocapture` to see them).
//!
//! Every tolerance is pinned here, not calibrated after the fact. Criterion
//! 03a is a known-red measurement: see its comment for the dilution-of-
//! precision analysis that makes the target unreachable at that noise level.

use std::process::Command;
use std::time::Instant;

use hydrotrack_core::acoustic::{make_observation, AcousticConfig, BuoyArray};
use hydrotrack_core::kalman::{
    build_model, innovation, predict, update, ControlInput, GaussianState,
};
use hydrotrack_core::linalg::{sym_eigen, Matrix, Vec3};
use hydrotrack_core::search::{
    propagate_continued, propagate_drift, sample_drift_trajectory, search_region,
    DisconnectionEvent, NavigationPlan, Scenario,
};
use hydrotrack_core::sim::{
    calibrate_measurement_noise, derive_seed, generate_grid, run_localization_experiment,
    run_tracking_experiment, GridSpec, ScenarioConfig, TrajectorySpec,
};
use hydrotrack_core::tdoa::solve_chan;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

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

fn reference_grid() -> Vec<Vec3> {
    generate_grid(
        Vec3::new(-100.0, -100.0, -50.0),
        Vec3::new(60.0, 60.0, 30.0),
        (10, 10, 10),
    )
}

fn report(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "acceptance {id} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn mae_axes(estimate: Vec3, truth: Vec3) -> f64 {
    ((estimate.x - truth.x).abs() + (estimate.y - truth.y).abs() + (estimate.z - truth.z).abs())
        / 3.0
}

// ── 01: noise-free closed-form round trip over the full grid ──────────────

#[test]
fn acceptance_01_noise_free_grid_round_trip() {
    let buoys = reference_buoys();
    let cfg = AcousticConfig::noiseless();
    let start = Instant::now();
    let mut max_err: f64 = 0.0;
    let mut rng = StdRng::seed_from_u64(0);
    for p in reference_grid() {
        let obs = make_observation(p, 0.0, &buoys, &cfg, &mut rng);
        let fix = solve_chan(&obs, &buoys, &cfg).expect("noise-free solve");
        max_err = max_err.max(fix.position.distance(p));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = max_err < 1e-6 && elapsed < 2.0;
    assert!(report(
        "01",
        "noise-free grid round trip",
        pass,
        &format!("max error {max_err:.3e} m over 1000 points in {elapsed:.2} s")
    ));
}

// ── 02: quadratic-coefficient validation ──────────────────────────────────

fn chan_geometry_condition(buoys: &BuoyArray) -> f64 {
    let s0 = buoys.reference();
    let rows: Vec<Vec<f64>> = buoys
        .auxiliaries()
        .iter()
        .map(|&s| {
            let d = s - s0;
            vec![d.x, d.y, d.z]
        })
        .collect();
    let a = Matrix::from_rows(&rows);
    let eig = sym_eigen(&a.transpose().matmul(&a).symmetrized()).unwrap();
    let max = eig.values[0].max(0.0).sqrt();
    let min = eig.values[2].max(0.0).sqrt();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[test]
fn acceptance_02_quadratic_coefficient_validation() {
    // Part 1: the ‖a‖²−1 coefficient recovers 10⁴ random non-degenerate
    // geometries exactly.
    let mut rng = StdRng::seed_from_u64(271828);
    let noise_free = AcousticConfig::noiseless();
    let mut tested = 0;
    let mut worst: f64 = 0.0;
    while tested < 10_000 {
        let rand_point = |rng: &mut StdRng, scale: f64| {
            Vec3::new(
                (rng.random::<f64>() - 0.5) * scale,
                (rng.random::<f64>() - 0.5) * scale,
                (rng.random::<f64>() - 0.5) * scale,
            )
        };
        let buoys = match BuoyArray::new(
            rand_point(&mut rng, 2000.0),
            (0..4).map(|_| rand_point(&mut rng, 2000.0)).collect(),
        ) {
            Ok(b) => b,
            Err(_) => continue,
        };
        if chan_geometry_condition(&buoys) > 1e3 {
            continue;
        }
        let truth = rand_point(&mut rng, 1000.0);
        let obs = make_observation(truth, 0.0, &buoys, &noise_free, &mut rng);
        let fix = solve_chan(&obs, &buoys, &noise_free).expect("non-degenerate geometry");
        worst = worst.max(fix.position.distance(truth));
        tested += 1;
    }
    let part1 = worst < 1e-5;

    // Part 2: regression for the coefficient without the −1 term. On the
    // reference geometry and truth (−100, −100, −50) it must fail to
    // recover the position (the root it selects reconstructs a point far
    // from the truth, or no real root exists at all).
    let buoys = reference_buoys();
    let truth = Vec3::new(-100.0, -100.0, -50.0);
    let mut rng2 = StdRng::seed_from_u64(0);
    let obs = make_observation(truth, 0.0, &buoys, &noise_free, &mut rng2);
    let sys = hydrotrack_core::tdoa::build_chan_system(&obs, &buoys, &noise_free).unwrap();
    let pinv = sys.a_mat.pseudoinverse().unwrap();
    let a = Vec3::from_array(pinv.mul_vec(&sys.c_vec).try_into().unwrap());
    let b = Vec3::from_array(pinv.mul_vec(&sys.d_vec).try_into().unwrap());
    let b_rel = b - sys.reference;
    let qa_wrong = a.norm_squared(); // missing the −1
    let qb = 2.0 * a.dot(b_rel);
    let qc = b_rel.norm_squared();
    let disc = qb * qb - 4.0 * qa_wrong * qc;
    let wrong_err = if disc < 0.0 {
        f64::INFINITY // no real root at all under the wrong coefficient
    } else {
        let r0 = (-qb + disc.sqrt()) / (2.0 * qa_wrong);
        (a * r0 + b).distance(truth)
    };
    let part2 = !(wrong_err < 1e-3);

    let pass = part1 && part2;
    assert!(report(
        "02",
        "quadratic coefficient validation",
        pass,
        &format!("oracle form worst error {worst:.3e} m over 10^4 geometries; drop-the-minus-one form error {wrong_err:.3e} m")
    ));
}

// ── 03: localization CDF under calibrated noise ───────────────────────────

fn grid_run_maes(sigma_range_m: f64, seed: u64) -> Vec<f64> {
    let buoys = reference_buoys();
    let mut cfg = ScenarioConfig::new(
        buoys,
        AcousticConfig::new(1500.0, sigma_range_m / 1500.0).unwrap(),
        10.0,
        Matrix::zeros(6, 6),
        Matrix::identity(3),
        seed,
    );
    cfg.grid = Some(GridSpec {
        origin: Vec3::new(-100.0, -100.0, -50.0),
        spacing: Vec3::new(60.0, 60.0, 30.0),
        counts: (10, 10, 10),
        descend_z: true,
    });
    let record = run_localization_experiment(&cfg).unwrap();
    record
        .steps
        .iter()
        .filter_map(|s| {
            s.tdoa
                .as_ref()
                .map(|f| mae_axes(f.position, s.true_position))
        })
        .collect()
}

/// KNOWN RED. At 1 m of range-difference noise, the buoy geometry dilutes
/// precision so strongly over this grid (most points lie far outside the
/// array's hull) that the Cramér–Rao bound already puts the *expected*
/// per-point MAE at ≥ 4 m for ~49% of the 1000 points (median bound 3.9 m,
/// p90 8.2 m). Measured: plain closed form reaches 55.7–57.0% under 4 m
/// across seeds; even a converged Gauss–Newton refinement only reaches
/// 60.6–63.7%. No single-ping estimator meets 85% here; the target is only
/// reachable at noise ≤ ~0.25 m (93–96%).
#[test]
fn acceptance_03a_grid_cdf_fraction_under_4m() {
    let maes = grid_run_maes(1.0, 42);
    let frac = maes.iter().filter(|&&m| m < 4.0).count() as f64 / maes.len() as f64;
    let pass = frac >= 0.85; // 90% target with the ±5-point seed tolerance
    assert!(
        report(
            "03a",
            "grid CDF fraction under 4 m at 1 m range noise",
            pass,
            &format!("fraction {frac:.3} (target ≥ 0.85)")
        ),
        "measured fraction {frac:.3} < 0.85; see test comment for the geometry analysis"
    );
}

#[test]
fn acceptance_03b_median_mae_decreases_as_noise_halves() {
    let mut medians = Vec::new();
    for &sigma in &[1.0, 0.5, 0.25] {
        let mut maes = grid_run_maes(sigma, 42);
        maes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(maes[maes.len() / 2]);
    }
    let pass = medians[0] > medians[1] && medians[1] > medians[2];
    assert!(report(
        "03b",
        "median MAE strictly decreases as noise halves",
        pass,
        &format!(
            "medians {:.3} / {:.3} / {:.3} m at 1 / 0.5 / 0.25 m range noise",
            medians[0], medians[1], medians[2]
        )
    ));
}

// ── 04: filter equivalence against a brute-force recursion ────────────────

mod brute {
    //! Direct implementation of the predict/update recursion on plain
    //! arrays with a cofactor 3×3 inverse; no shared code with the library.
    pub type M6 = [[f64; 6]; 6];
    pub type M3 = [[f64; 3]; 3];

    pub fn m6_mul(a: &M6, b: &M6) -> M6 {
        let mut c = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    pub fn m3_inv(a: &M3) -> M3 {
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        let d = 1.0 / det;
        [
            [
                (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * d,
                (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * d,
                (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * d,
            ],
            [
                (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * d,
                (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * d,
                (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * d,
            ],
            [
                (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * d,
                (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * d,
                (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * d,
            ],
        ]
    }

    pub struct Filter {
        pub x: [f64; 6],
        pub p: M6,
        pub f: M6,
        pub g: [[f64; 3]; 6],
        pub q: M6,
        pub r: M3,
    }

    impl Filter {
        pub fn predict(&mut self, u: [f64; 3]) {
            let mut x = [0.0; 6];
            for i in 0..6 {
                for j in 0..6 {
                    x[i] += self.f[i][j] * self.x[j];
                }
                for j in 0..3 {
                    x[i] += self.g[i][j] * u[j];
                }
            }
            self.x = x;
            let mut ft = [[0.0; 6]; 6];
            for i in 0..6 {
                for j in 0..6 {
                    ft[j][i] = self.f[i][j];
                }
            }
            let fp = m6_mul(&self.f, &self.p);
            let mut p = m6_mul(&fp, &ft);
            for i in 0..6 {
                for j in 0..6 {
                    p[i][j] += self.q[i][j];
                }
            }
            self.p = p;
        }

        pub fn update(&mut self, z: [f64; 3]) {
            let mut s = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    s[i][j] = self.p[i][j] + self.r[i][j];
                }
            }
            let s_inv = m3_inv(&s);
            let mut k = [[0.0; 3]; 6];
            for i in 0..6 {
                for j in 0..3 {
                    for l in 0..3 {
                        k[i][j] += self.p[i][l] * s_inv[l][j];
                    }
                }
            }
            let resid = [z[0] - self.x[0], z[1] - self.x[1], z[2] - self.x[2]];
            for i in 0..6 {
                for j in 0..3 {
                    self.x[i] += k[i][j] * resid[j];
                }
            }
            let mut i_kh = [[0.0; 6]; 6];
            for i in 0..6 {
                i_kh[i][i] = 1.0;
            }
            for i in 0..6 {
                for j in 0..3 {
                    i_kh[i][j] -= k[i][j];
                }
            }
            self.p = m6_mul(&i_kh, &self.p);
        }
    }
}

#[test]
fn acceptance_04_kalman_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(31415);
    let dt = 10.0;
    // Random PSD Q and PD R via L·Lᵀ.
    let l6 = Matrix::from_fn(6, 6, |_, _| (rng.random::<f64>() - 0.5) * 0.5);
    let q = l6.matmul(&l6.transpose()).symmetrized();
    let l3 = Matrix::from_fn(3, 3, |_, _| rng.random::<f64>() - 0.5);
    let r = l3
        .matmul(&l3.transpose())
        .add_mat(&Matrix::identity(3))
        .symmetrized();
    let model = build_model(dt, q.clone(), r.clone()).unwrap();

    let x0 = [10.0, -20.0, -100.0, 1.0, 0.5, -0.2];
    let mut state = GaussianState::new(x0, Matrix::diagonal(&[100.0; 6]), 0.0);
    let mut oracle = brute::Filter {
        x: x0,
        p: {
            let mut p = [[0.0; 6]; 6];
            for i in 0..6 {
                p[i][i] = 100.0;
            }
            p
        },
        f: {
            let mut f = [[0.0; 6]; 6];
            for i in 0..6 {
                f[i][i] = 1.0;
            }
            for i in 0..3 {
                f[i][i + 3] = dt;
            }
            f
        },
        g: {
            let mut g = [[0.0; 3]; 6];
            for i in 0..3 {
                g[i][i] = 0.5 * dt * dt;
                g[i + 3][i] = dt;
            }
            g
        },
        q: {
            let mut arr = [[0.0; 6]; 6];
            for i in 0..6 {
                for j in 0..6 {
                    arr[i][j] = q[(i, j)];
                }
            }
            arr
        },
        r: {
            let mut arr = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    arr[i][j] = r[(i, j)];
                }
            }
            arr
        },
    };

    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = Vec3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        );
        state = predict(&state, &model, &ControlInput::new(u));
        oracle.predict(u.to_array());
        let z = Vec3::new(
            oracle.x[0] + (rng.random::<f64>() - 0.5) * 10.0,
            oracle.x[1] + (rng.random::<f64>() - 0.5) * 10.0,
            oracle.x[2] + (rng.random::<f64>() - 0.5) * 10.0,
        );
        state = update(&state, &model, z).unwrap();
        oracle.update(z.to_array());
        for i in 0..6 {
            worst = worst.max(rel(state.mean[i], oracle.x[i]));
            for j in 0..6 {
                worst = worst.max(rel(
                    state.cov[(i, j)],
                    0.5 * (oracle.p[i][j] + oracle.p[j][i]),
                ));
            }
        }
    }
    let pass = worst < 1e-10;
    assert!(report(
        "04",
        "filter matches brute-force recursion",
        pass,
        &format!("worst relative deviation {worst:.3e} over 100 steps")
    ));
}

// ── 05: filter beats raw TDOA on MSE ──────────────────────────────────────

#[test]
fn acceptance_05_filter_beats_raw_tdoa() {
    let start = Instant::now();
    let sigma_t = 1.0 / 1500.0;
    let buoys = reference_buoys();
    let acoustic = AcousticConfig::new(1500.0, sigma_t).unwrap();
    let steps = 30;
    let q = Matrix::diagonal(&[0.05, 0.05, 0.05, 0.005, 0.005, 0.005]);
    let r =
        calibrate_measurement_noise(&buoys, &acoustic, Vec3::new(-100.0, -100.0, -50.0), 400, 17)
            .unwrap();
    let mut cfg = ScenarioConfig::new(buoys, acoustic, 10.0, q, r, 2025);
    cfg.num_steps = steps;
    cfg.monte_carlo_runs = 100;
    cfg.trajectory = Some(TrajectorySpec {
        initial_position: Vec3::new(-100.0, -100.0, -50.0),
        initial_velocity: Vec3::new(2.0, 1.0, -0.2),
        accelerations: (0..steps)
            .map(|k| Vec3::new(0.02 * ((k % 5) as f64 - 2.0), 0.03, -0.005))
            .collect(),
        truth_process_noise: true,
    });
    let record = run_tracking_experiment(&cfg).unwrap();
    let burn_in = 5;
    let filtered = &record.metrics.mse_filtered[burn_in..];
    let raw = &record.metrics.mse_tdoa[burn_in..];
    let better = filtered
        .iter()
        .zip(raw.iter())
        .filter(|(f, t)| f < t)
        .count();
    let frac = better as f64 / filtered.len() as f64;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = frac >= 0.9 && elapsed < 30.0;
    assert!(report(
        "05",
        "filter beats raw TDOA after burn-in",
        pass,
        &format!("filtered MSE lower at {frac:.2} of steps (100 runs) in {elapsed:.1} s")
    ));
}

// ── 06: innovation consistency (NEES) ─────────────────────────────────────

#[test]
fn acceptance_06_nees_consistency() {
    let dt = 1.0;
    let q = Matrix::diagonal(&[0.02, 0.02, 0.02, 0.04, 0.04, 0.04]);
    let r = Matrix::diagonal(&[0.8, 0.5, 1.2]);
    let model = build_model(dt, q.clone(), r.clone()).unwrap();
    let mut rng = StdRng::seed_from_u64(606);
    let normal = Normal::new(0.0, 1.0).unwrap();

    let mut truth = [0.0, 0.0, 0.0, 0.5, -0.5, 0.1];
    let mut state = GaussianState::new(truth, Matrix::zeros(6, 6), 0.0);
    let n = 1500;
    let mut nis_acc = 0.0;
    for _ in 0..n {
        let fx = model.f.mul_vec(&truth);
        for i in 0..6 {
            truth[i] = fx[i] + q[(i, i)].sqrt() * normal.sample(&mut rng);
        }
        state = predict(&state, &model, &ControlInput::ZERO);
        let z = Vec3::new(
            truth[0] + r[(0, 0)].sqrt() * normal.sample(&mut rng),
            truth[1] + r[(1, 1)].sqrt() * normal.sample(&mut rng),
            truth[2] + r[(2, 2)].sqrt() * normal.sample(&mut rng),
        );
        let (resid, s) = innovation(&state, &model, z);
        let rhs = Matrix::from_rows(&[vec![resid.x], vec![resid.y], vec![resid.z]]);
        let sol = s.solve(&rhs).unwrap();
        nis_acc += resid.x * sol[(0, 0)] + resid.y * sol[(1, 0)] + resid.z * sol[(2, 0)];
        state = update(&state, &model, z).unwrap();
    }
    let mean_nis = nis_acc / n as f64;
    let pass = (2.7..=3.3).contains(&mean_nis);
    assert!(report(
        "06",
        "NEES consistency",
        pass,
        &format!("mean normalized innovation squared {mean_nis:.3} over {n} updates")
    ));
}

// ── 07: scenario-1 determinism ────────────────────────────────────────────

#[test]
fn acceptance_07_scenario1_deterministic_limit() {
    let dt = 10.0;
    let model = build_model(dt, Matrix::zeros(6, 6), Matrix::identity(3)).unwrap();
    let steps = 100;
    let accels: Vec<Vec3> = (0..steps)
        .map(|k| {
            Vec3::new(
                0.01 * ((k % 9) as f64 - 4.0),
                0.015 * ((k % 4) as f64 - 1.5),
                0.002,
            )
        })
        .collect();
    let x0 = [-100.0, -100.0, -50.0, 2.0, 1.0, -0.25];
    let event = DisconnectionEvent::new(
        GaussianState::new(x0, Matrix::zeros(6, 6), 0.0),
        Scenario::ContinuedNavigation,
    );
    let plan = NavigationPlan::from_accels(0.0, dt, accels.clone());
    let states = propagate_continued(&event, &model, &plan, steps).unwrap();

    // Independent truth: iterate the kinematics on plain arrays.
    let mut pos = [x0[0], x0[1], x0[2]];
    let mut vel = [x0[3], x0[4], x0[5]];
    let mut worst: f64 = 0.0;
    for (k, s) in states.iter().enumerate() {
        let err = ((s.mean[0] - pos[0]).powi(2)
            + (s.mean[1] - pos[1]).powi(2)
            + (s.mean[2] - pos[2]).powi(2))
        .sqrt();
        worst = worst.max(err);
        if k < steps {
            let a = accels[k].to_array();
            for i in 0..3 {
                pos[i] += vel[i] * dt + 0.5 * a[i] * dt * dt;
                vel[i] += a[i] * dt;
            }
        }
    }
    let pass = worst < 1e-9;
    assert!(report(
        "07",
        "scenario-1 deterministic limit",
        pass,
        &format!("max divergence {worst:.3e} m over {steps} horizons")
    ));
}

// ── 08: scenario-2 growth and coverage calibration ────────────────────────

#[test]
fn acceptance_08_scenario2_growth_and_coverage() {
    let dt = 10.0;
    let q = Matrix::diagonal(&[0.5, 0.5, 0.25, 0.02, 0.02, 0.01]);
    let model = build_model(dt, q, Matrix::identity(3)).unwrap();
    let p0_diag = [25.0, 25.0, 16.0, 1.0, 1.0, 0.25];
    let mean = [120.0, -40.0, -90.0, 1.5, -0.5, 0.1];
    let event = DisconnectionEvent::new(
        GaussianState::new(mean, Matrix::diagonal(&p0_diag), 0.0),
        Scenario::PropulsionFailure,
    );

    let horizons = 50;
    let states = propagate_drift(&event, &model, horizons).unwrap();
    let mut monotone = true;
    for k in 1..=horizons {
        if states[k].cov.trace() <= states[k - 1].cov.trace() {
            monotone = false;
        }
    }

    let check_horizons = [5usize, 20, 50];
    let regions: Vec<_> = check_horizons
        .iter()
        .map(|&h| search_region(&states[h], h as f64 * dt, 0.95, 1.0).unwrap())
        .collect();

    let n = 1000;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut hits = [0usize; 3];
    for run in 0..n {
        let mut rng = StdRng::seed_from_u64(derive_seed(808, run));
        let mut x0 = mean;
        for i in 0..6 {
            x0[i] += p0_diag[i].sqrt() * normal.sample(&mut rng);
        }
        let run_event = DisconnectionEvent::new(
            GaussianState::new(x0, Matrix::zeros(6, 6), 0.0),
            Scenario::PropulsionFailure,
        );
        let truth =
            sample_drift_trajectory(&run_event, &model, horizons, derive_seed(909, run)).unwrap();
        for (idx, &h) in check_horizons.iter().enumerate() {
            if regions[idx].contains(truth[h]) {
                hits[idx] += 1;
            }
        }
    }
    let fracs: Vec<f64> = hits.iter().map(|&h| h as f64 / n as f64).collect();
    let coverage_ok = fracs.iter().all(|f| (f - 0.95).abs() <= 0.04);
    let pass = monotone && coverage_ok;
    assert!(report(
        "08",
        "scenario-2 growth and coverage",
        pass,
        &format!(
            "trace strictly increasing over {horizons} horizons: {monotone}; 95% ellipsoid coverage {:.3}/{:.3}/{:.3} at horizons 5/20/50",
            fracs[0], fracs[1], fracs[2]
        )
    ));
}

// ── 09: dropout branch keeps the prior bit-for-bit ────────────────────────

#[test]
fn acceptance_09_dropout_posterior_equals_prior_bitwise() {
    let buoys = reference_buoys();
    let steps = 12;
    let mut cfg = ScenarioConfig::new(
        buoys,
        AcousticConfig::new(1500.0, 2e-4).unwrap(),
        10.0,
        Matrix::diagonal(&[0.05, 0.05, 0.05, 0.005, 0.005, 0.005]),
        Matrix::diagonal(&[4.0, 4.0, 9.0]),
        909,
    );
    cfg.num_steps = steps;
    cfg.dropout_steps = vec![3, 8, 9];
    cfg.trajectory = Some(TrajectorySpec {
        initial_position: Vec3::new(-100.0, -100.0, -50.0),
        initial_velocity: Vec3::new(2.0, 1.0, -0.2),
        accelerations: vec![Vec3::new(0.02, 0.03, -0.005); steps],
        truth_process_noise: false,
    });
    let record = run_tracking_experiment(&cfg).unwrap();
    let mut pass = true;
    for (k, step) in record.steps.iter().enumerate() {
        let prior = step.prior.as_ref().unwrap();
        let posterior = step.posterior.as_ref().unwrap();
        let bit_equal = prior
            .mean
            .iter()
            .zip(posterior.mean.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits())
            && (0..6).all(|i| {
                (0..6).all(|j| prior.cov[(i, j)].to_bits() == posterior.cov[(i, j)].to_bits())
            });
        if cfg.dropout_steps.contains(&k) {
            if !bit_equal || step.tdoa.is_some() {
                pass = false;
            }
        } else if k > 0 && bit_equal {
            // An update happened, so the posterior must differ.
            pass = false;
        }
    }
    assert!(report(
        "09",
        "dropout branch posterior equals prior",
        pass,
        "gapped steps bit-equal, updated steps not"
    ));
}

// ── 10: manifest reruns reproduce every experiment byte-for-byte ──────────

#[test]
fn acceptance_10_manifest_rerun_reproducibility() {
    let configs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let temp = |tag: &str| {
        use std::time::{SystemTime, UNIX_EPOCH};
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap()
            .as_nanos();
        std::env::temp_dir().join(format!("hydrotrack-accept10-{tag}-{nanos}"))
    };
    let mut pass = true;
    let mut detail = String::new();
    for (cmd, cfg_name) in [
        ("localize", "paper_s5.json"),
        ("track", "paper_track.json"),
        ("search", "paper_search_t50.json"),
        ("search", "paper_search_t80.json"),
    ] {
        let out1 = temp(&format!("{cmd}-a"));
        let out2 = temp(&format!("{cmd}-b"));
        let config = configs.join(cfg_name);
        let run = |cfg_path: &std::path::Path, out: &std::path::Path| {
            Command::new(env!("CARGO_BIN_EXE_hydrotrack"))
                .args([
                    cmd,
                    "--config",
                    cfg_path.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                ])
                .status()
                .expect("spawn hydrotrack")
                .success()
        };
        if !run(&config, &out1) || !run(&out1.join("manifest.json"), &out2) {
            pass = false;
            detail.push_str(&format!("{cmd}/{cfg_name}: run failed; "));
            continue;
        }
        for name in ["trajectory.csv", "metrics.csv", "manifest.json"] {
            let a = std::fs::read(out1.join(name)).unwrap();
            let b = std::fs::read(out2.join(name)).unwrap();
            if a != b {
                pass = false;
                detail.push_str(&format!("{cmd}/{cfg_name}: {name} differs; "));
            }
        }
        std::fs::remove_dir_all(&out1).ok();
        std::fs::remove_dir_all(&out2).ok();
    }
    if detail.is_empty() {
        detail =
            "localize, track, and both search runs reproduce byte-identically from their manifests"
                .to_string();
    }
    assert!(report(
        "10",
        "manifest rerun reproducibility",
        pass,
        &detail
    ));
}
