//! The three subcommands. Each returns its output in memory; `main` writes it.

use serde::Serialize;

use cheshire_core::duality::{closed_form_weak_values, exact_weak_values, PathAttributeObservable};
use cheshire_core::exec::Execution;
use cheshire_core::optics::bs2_output_state;
use cheshire_core::shots::{fit_records, fit_weak_value, run_trial, run_trials, RngSeed};
use cheshire_core::tomography::{run_tomography, TomographyReport};
use cheshire_core::Result;

use crate::config::{Mode, RunConfig};
use crate::tables::{IteFooter, IteRow, IteTable, Source, WeakValueRow};

/// Seed of the `(α index, observable)` cell, independent of execution order.
fn cell_seed(cfg: &RunConfig, alpha_index: usize, obs: PathAttributeObservable) -> RngSeed {
    let j = PathAttributeObservable::ALL
        .iter()
        .position(|&o| o == obs)
        .unwrap();
    RngSeed(cfg.seed).child((4 * alpha_index + j) as u64)
}

fn columns(
    cfg: &RunConfig,
    mut f: impl FnMut(PathAttributeObservable) -> Result<f64>,
) -> Result<[Option<f64>; 4]> {
    let mut out = [None; 4];
    for (slot, obs) in out.iter_mut().zip(PathAttributeObservable::ALL) {
        if cfg.observables.contains(&obs) {
            *slot = Some(f(obs)? + 0.0);
        }
    }
    Ok(out)
}

fn indexed_alphas(cfg: &RunConfig) -> Vec<(usize, f64)> {
    cfg.alphas_deg.iter().copied().enumerate().collect()
}

pub fn weak_values(cfg: &RunConfig, exec: Execution) -> Result<Vec<WeakValueRow>> {
    let per_alpha = exec.map(
        indexed_alphas(cfg),
        |(i, deg)| -> Result<Vec<WeakValueRow>> {
            let params = cfg.params(deg);
            let cf = closed_form_weak_values(params.alpha())?;
            let mut rows = vec![WeakValueRow {
                alpha_deg: deg,
                values: columns(cfg, |o| Ok(cf.get(o)))?,
                source: Source::ClosedForm,
                stderr: [None; 4],
            }];
            match cfg.mode {
                Mode::Exact => {
                    let ex = exact_weak_values(&params)?;
                    rows.push(WeakValueRow {
                        alpha_deg: deg,
                        values: columns(cfg, |o| Ok(ex.get(o).re))?,
                        source: Source::Exact,
                        stderr: [None; 4],
                    });
                }
                Mode::Shots => {
                    let est = cfg.estimation();
                    let mut fits = [None; 4];
                    for (slot, obs) in fits.iter_mut().zip(PathAttributeObservable::ALL) {
                        if cfg.observables.contains(&obs) {
                            let seed = cell_seed(cfg, i, obs);
                            *slot = Some(
                                run_trials(&params, obs, &est, 1, seed, Execution::Sequential)?[0],
                            );
                        }
                    }
                    rows.push(WeakValueRow {
                        alpha_deg: deg,
                        values: fits.map(|f| f.map(|f| f.w_hat + 0.0)),
                        source: Source::Fitted,
                        stderr: fits.map(|f| f.map(|f| f.mc_err)),
                    });
                }
            }
            Ok(rows)
        },
    );
    Ok(per_alpha
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

/// One attenuation curve per `(α, observable)`, α-major.
pub fn ite_curves(cfg: &RunConfig, exec: Execution) -> Result<Vec<IteTable>> {
    let est = cfg.estimation();
    let per_alpha = exec.map(indexed_alphas(cfg), |(i, deg)| -> Result<Vec<IteTable>> {
        let params = cfg.params(deg);
        cfg.observables
            .iter()
            .map(|&obs| {
                let seed = cell_seed(cfg, i, obs);
                let records = run_trial(
                    &params,
                    obs,
                    &cfg.schedule,
                    cfg.lambda,
                    est.acquisition,
                    seed.child(0),
                )?;
                let fit = fit_records(&records, cfg.weighted)?;
                let w = fit_weak_value(&records, &est, seed.child(1), Execution::Sequential)?;
                let rows = records
                    .iter()
                    .map(|r| {
                        let n_err = match cfg.mode {
                            Mode::Exact => 0.0,
                            Mode::Shots => r.normalized_variance()?.sqrt(),
                        };
                        Ok(IteRow {
                            transmission: r.transmission,
                            t: r.t(),
                            n: r.normalized()?,
                            n_err,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(IteTable {
                    observable: obs.to_string(),
                    alpha_deg: deg,
                    rows,
                    footer: IteFooter {
                        slope: fit.slope,
                        intercept: fit.intercept,
                        slope_stderr: fit.slope_stderr,
                        weak_value: w.w_hat,
                        weak_value_err: w.mc_err,
                    },
                })
            })
            .collect()
    });
    Ok(per_alpha
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

#[derive(Debug, Serialize)]
pub struct TomographyFile {
    pub mode: &'static str,
    pub lambda: f64,
    pub noise: f64,
    pub seed: u64,
    pub results: Vec<TomographyResult>,
}

#[derive(Debug, Serialize)]
pub struct TomographyResult {
    pub alpha_deg: f64,
    /// Ideal BS2 output, `[re, im]` per amplitude in `L⊗P, L⊗W, R⊗P, R⊗W` order.
    pub target: Vec<[f64; 2]>,
    pub mean_fidelity: f64,
    /// Standard error of the mean over the runs; zero for a single run.
    pub fidelity_stderr: f64,
    pub min_eigenvalue: f64,
    pub all_physical: bool,
    pub runs: Vec<TomographyReport>,
}

pub fn tomography(cfg: &RunConfig, exec: Execution) -> Result<TomographyFile> {
    let repeats = match cfg.mode {
        Mode::Exact => 1,
        Mode::Shots => cfg.repeats,
    };
    let results = exec.map(
        indexed_alphas(cfg),
        |(i, deg)| -> Result<TomographyResult> {
            let target = bs2_output_state(&cfg.params(deg))?;
            let runs = run_tomography(
                &target,
                cfg.noise,
                cfg.lambda,
                cfg.mode.acquisition(),
                repeats,
                RngSeed(cfg.seed).child(i as u64),
                Execution::Sequential,
            )?;
            let f: Vec<f64> = runs.iter().map(|r| r.fidelity.raw).collect();
            let n = f.len() as f64;
            let mean = f.iter().sum::<f64>() / n;
            let stderr = if f.len() > 1 {
                (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            Ok(TomographyResult {
                alpha_deg: deg,
                target: target
                    .amplitudes()
                    .iter()
                    .map(|z| [z.re + 0.0, z.im + 0.0])
                    .collect(),
                mean_fidelity: mean,
                fidelity_stderr: stderr,
                min_eigenvalue: runs
                    .iter()
                    .map(|r| r.eigenvalues[0])
                    .fold(f64::INFINITY, f64::min),
                all_physical: runs.iter().all(|r| r.physical),
                runs,
            })
        },
    );
    Ok(TomographyFile {
        mode: cfg.mode.as_str(),
        lambda: cfg.lambda,
        noise: cfg.noise,
        seed: cfg.seed,
        results: results.into_iter().collect::<Result<_>>()?,
    })
}
