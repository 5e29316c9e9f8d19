//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cheshire_core::duality::{
    alpha_grid, closed_form_weak_values, exact_weak_values, postselection, preselection,
    DualityParams, PathAttributeObservable, WeakValues,
};
use cheshire_core::exec::Execution;
use cheshire_core::fit::weak_value_estimate;
use cheshire_core::ite::{
    exact_curve, normalized_incidence, slope_at_origin, transmission_to_time, AttenuationSchedule,
};
use cheshire_core::optics::{
    bs2_output_state, build_setup, run_circuit, source_state, Detector, NdFilter,
};
use cheshire_core::qstate::inner_product;
use cheshire_core::shots::{
    fit_records, monte_carlo_error, run_trial, run_trials, Acquisition, EstimationConfig, RngSeed,
};
use cheshire_core::tomography::run_tomography;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64, inner: Outcome) -> Outcome {
    let secs = elapsed.as_secs_f64();
    match inner {
        Ok(d) if secs < limit_s => Ok(format!("{d}; {secs:.2}s < {limit_s}s")),
        Ok(d) => Err(format!("{d}; too slow: {secs:.2}s ≥ {limit_s}s")),
        Err(d) => Err(format!("{d}; {secs:.2}s")),
    }
}

fn grid_params(n: usize) -> Vec<DualityParams> {
    alpha_grid(n)
        .into_iter()
        .map(|a| DualityParams::new(a).unwrap())
        .collect()
}

fn closed(p: &DualityParams) -> WeakValues {
    closed_form_weak_values(p.alpha()).unwrap()
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in grid_params(100) {
        let exact = exact_weak_values(&p).unwrap();
        let cf = closed(&p);
        for obs in PathAttributeObservable::ALL {
            worst = worst.max((exact.get(obs) - cf.get(obs)).norm());
        }
    }
    within(
        start.elapsed(),
        1.0,
        check(
            worst < 1e-12,
            format!("max deviation {worst:.2e} over 100 α × 4"),
        ),
    )
}

fn separation() -> Outcome {
    let mut worst = 0.0f64;
    for p in grid_params(100) {
        let w = exact_weak_values(&p).unwrap();
        worst = worst.max(w.particle_left.norm()).max(w.wave_right.norm());
    }
    check(worst < 1e-12, format!("max |w_P^L|, |w_W^R| = {worst:.2e}"))
}

fn half_point() -> Outcome {
    let w = exact_weak_values(&DualityParams::new(45f64.to_radians()).unwrap()).unwrap();
    let half = w.particle_right.re == 0.5 && w.wave_left.re == 0.5;
    let mut worst_sum = 0.0f64;
    for p in grid_params(100) {
        let w = exact_weak_values(&p).unwrap();
        let sum = w.particle_left + w.particle_right + w.wave_left + w.wave_right;
        worst_sum = worst_sum.max((sum - 1.0).norm());
    }
    check(
        half && worst_sum < 1e-12,
        format!(
            "α=45°: w_P^R = {}, w_W^L = {}; max |Σw − 1| = {worst_sum:.2e}",
            w.particle_right.re, w.wave_left.re
        ),
    )
}

fn ite_consistency() -> Outcome {
    let start = Instant::now();
    let schedule = AttenuationSchedule::default();
    let (mut fd_worst, mut fit_worst) = (0.0f64, 0.0f64);
    let psi_f = postselection();
    for p in grid_params(100) {
        let psi_i = preselection(&p);
        let cf = closed(&p);
        for obs in PathAttributeObservable::ALL {
            let w = cf.get(obs);
            let slope = slope_at_origin(&psi_i, &psi_f, &obs.operator()).unwrap();
            fd_worst = fd_worst.max((-slope / 2.0 - w).abs());
            let fit = exact_curve(&p, obs, &schedule).unwrap().fit().unwrap();
            let rel = (weak_value_estimate(&fit).0 - w).abs() / w.max(0.05);
            fit_worst = fit_worst.max(rel);
        }
    }
    within(
        start.elapsed(),
        5.0,
        check(
            fd_worst < 1e-6 && fit_worst <= 0.01,
            format!(
                "slope rule max error {fd_worst:.2e}; five-point fit max relative bias {:.3}%",
                100.0 * fit_worst
            ),
        ),
    )
}

fn layer_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let psi_f = postselection();
    for p in grid_params(20) {
        let psi_i = preselection(&p);
        let n0 = inner_product(&psi_f, &psi_i).unwrap().norm_sqr();
        for obs in PathAttributeObservable::ALL {
            for tr in [1.0, 0.99, 0.95] {
                let t = transmission_to_time(tr).unwrap();
                let abstract_p =
                    n0 * normalized_incidence(&psi_i, &psi_f, &obs.operator(), t).unwrap();
                let nd = NdFilter {
                    target: obs,
                    transmission: tr,
                };
                let c = build_setup(&p, Some(nd)).unwrap();
                let out = run_circuit(&c, &source_state()).unwrap();
                worst = worst.max((out.probability(Detector::D1) - abstract_p).abs());
            }
        }
    }
    within(
        start.elapsed(),
        10.0,
        check(
            worst < 1e-10,
            format!("max |ΔP(D1)| = {worst:.2e} over 20 α × 4 × 3"),
        ),
    )
}

fn shots_sweep() -> Outcome {
    let start = Instant::now();
    let cfg = EstimationConfig::default();
    let seed = RngSeed(2024);
    let mut points = 0;
    let mut inside = 0;
    for (i, deg) in (0..=90).step_by(5).enumerate() {
        let p = DualityParams::new((deg as f64).to_radians()).unwrap();
        let cf = closed(&p);
        for (j, obs) in PathAttributeObservable::ALL.into_iter().enumerate() {
            let s = seed.child((4 * i + j) as u64);
            let fit = &run_trials(&p, obs, &cfg, 1, s, Execution::default()).unwrap()[0];
            points += 1;
            if (fit.w_hat - cf.get(obs)).abs() <= 3.0 * fit.mc_err {
                inside += 1;
            }
        }
    }
    let frac = inside as f64 / points as f64;
    within(
        start.elapsed(),
        60.0,
        check(
            frac >= 0.95,
            format!("{inside}/{points} fitted weak values within 3σ at λ = 1e6"),
        ),
    )
}

fn tomography() -> Outcome {
    let psi = bs2_output_state(&DualityParams::new(FRAC_PI_4 / 2.0).unwrap()).unwrap();
    let exact = run_tomography(
        &psi,
        0.0,
        1e6,
        Acquisition::Exact,
        1,
        RngSeed(0),
        Execution::default(),
    )
    .unwrap();
    let f_exact = exact[0].fidelity.raw;
    let noisy = run_tomography(
        &psi,
        0.00733,
        1e6,
        Acquisition::Shots,
        50,
        RngSeed(7),
        Execution::default(),
    )
    .unwrap();
    let mean = noisy.iter().map(|r| r.fidelity.raw).sum::<f64>() / noisy.len() as f64;
    check(
        (f_exact - 1.0).abs() < 1e-10 && (0.992..=0.997).contains(&mean),
        format!("noiseless F = {f_exact:.12}; p = 0.00733 mean F = {mean:.5} over 50 seeds"),
    )
}

fn error_bars() -> Outcome {
    let p = DualityParams::new(FRAC_PI_4).unwrap();
    let obs: PathAttributeObservable = "PR".parse().unwrap();
    let schedule = AttenuationSchedule::default();
    let fluxes = [1e4, 1e5, 1e6, 1e7];
    let logs: Vec<(f64, f64)> = fluxes
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let r = run_trial(
                &p,
                obs,
                &schedule,
                lambda,
                Acquisition::Shots,
                RngSeed(100 + k as u64),
            )
            .unwrap();
            let err = monte_carlo_error(&r, 2000, RngSeed(200 + k as u64)).unwrap();
            (lambda.ln(), err.ln())
        })
        .collect();
    let exponent = cheshire_core::fit::least_squares_line(&logs).unwrap().slope;

    let cfg = EstimationConfig::default();
    let trials = run_trials(&p, obs, &cfg, 500, RngSeed(300), Execution::default()).unwrap();
    let covered = trials
        .iter()
        .filter(|f| (f.w_hat - 0.5).abs() <= 2.0 * f.mc_err)
        .count();
    let coverage = covered as f64 / 5.0;
    check(
        (exponent + 0.5).abs() <= 0.1 && (93.0..=97.0).contains(&coverage),
        format!("error ∝ λ^{exponent:.3}; 2σ coverage {coverage:.1}% over 500 trials"),
    )
}

fn phase_invariance() -> Outcome {
    let schedule = AttenuationSchedule::default();
    let phases = [0.0, FRAC_PI_4, FRAC_PI_2];
    let cfg = EstimationConfig {
        acquisition: Acquisition::Exact,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for alpha in alpha_grid(10) {
        for obs in PathAttributeObservable::ALL {
            let fitted = |phi1: f64, phi2: f64| {
                let p = DualityParams::with_phases(alpha, phi1, phi2).unwrap();
                let r =
                    run_trial(&p, obs, &schedule, cfg.lambda, cfg.acquisition, RngSeed(0)).unwrap();
                weak_value_estimate(&fit_records(&r, false).unwrap()).0
            };
            let reference = fitted(0.0, 0.0);
            for &phi1 in &phases {
                for &phi2 in &phases {
                    worst = worst.max((fitted(phi1, phi2) - reference).abs());
                }
            }
        }
    }
    check(
        worst < 1e-10,
        format!("max change of fitted w over φ₁, φ₂ = {worst:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "weak value closed form equivalence",
            closed_form_equivalence,
        ),
        ("attribute separation", separation),
        ("α = 45° point and sum rule", half_point),
        ("imaginary-time slope consistency", ite_consistency),
        ("optical/abstract layer equivalence", layer_equivalence),
        ("shot-noise weak value sweep", shots_sweep),
        ("tomography fidelity", tomography),
        ("error-bar scaling and coverage", error_bars),
        ("phase invariance", phase_invariance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {}: PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
