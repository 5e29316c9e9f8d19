//! Photon-counting statistics for attenuation curves.
//!
//! Counts are D1 clicks from the optical model. `λ` is the number of photons
//! sent per acquisition window, so the expected reference count is
//! `λ·|⟨ψ_f|ψᵢ⟩|²` and the disturbed count `λ·N(t)·|⟨ψ_f|ψᵢ⟩|²`. Each
//! transmission gets its own reference acquisition.
//!
//! Randomness is ChaCha8 seeded from a [`RngSeed`]; child seeds are derived
//! with a splitmix64 finalizer, so a record, a resample or a trial draws from
//! a stream fixed by its index alone.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::duality::{DualityParams, PathAttributeObservable};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fit::{least_squares_line, least_squares_line_weighted, weak_value_estimate, FitResult};
use crate::ite::{transmission_to_time, AttenuationSchedule};
use crate::optics::{build_setup, run_circuit, source_state, Detector, NdFilter};

/// Default photons per acquisition window.
pub const DEFAULT_FLUX: f64 = 1e6;

/// Smallest bootstrap size accepted by [`monte_carlo_error`].
pub const MIN_RESAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn child(self, index: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

fn poisson(mean: f64, seed: RngSeed) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(&mut seed.rng())
}

/// One Poisson(`λ·prob`) draw.
pub fn sample_counts(prob: f64, lambda: f64, seed: RngSeed) -> Result<u64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::domain("prob", prob, "[0, 1]"));
    }
    check_flux(lambda)?;
    Ok(poisson(lambda * prob, seed) as u64)
}

fn check_flux(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain("lambda", lambda, "(0, ∞)"));
    }
    Ok(())
}

/// Sampled counts, or expected counts when there is no sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    /// `λ → ∞`: counts are the expected values and carry no noise.
    #[default]
    Exact,
    Shots,
}

/// D1 counts at one filter setting.
///
/// Counts are whole numbers when sampled and expected values in
/// [`Acquisition::Exact`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub observable: PathAttributeObservable,
    pub transmission: f64,
    pub reference_counts: f64,
    pub disturbed_counts: f64,
    pub mean_flux: f64,
}

impl CountRecord {
    pub fn t(&self) -> f64 {
        transmission_to_time(self.transmission).expect("validated transmission")
    }

    /// `N̂ = n/n₀`.
    pub fn normalized(&self) -> Result<f64> {
        if self.reference_counts <= 0.0 {
            return Err(Error::ZeroReference {
                transmission: self.transmission,
            });
        }
        Ok(self.disturbed_counts / self.reference_counts)
    }

    /// Delta-method variance of `N̂` under Poisson counts.
    pub fn normalized_variance(&self) -> Result<f64> {
        let n = self.normalized()?;
        let rel = if self.disturbed_counts > 0.0 {
            self.disturbed_counts.recip()
        } else {
            0.0
        };
        Ok(n * n * (rel + self.reference_counts.recip()))
    }
}

/// D1 probabilities `(p₀, [p(T) for T in schedule])`.
pub fn d1_probabilities(
    params: &DualityParams,
    observable: PathAttributeObservable,
    schedule: &AttenuationSchedule,
) -> Result<(f64, Vec<f64>)> {
    let d1 = |nd| -> Result<f64> {
        let c = build_setup(params, nd)?;
        Ok(run_circuit(&c, &source_state())?.probability(Detector::D1))
    };
    let p0 = d1(None)?;
    let ps = schedule
        .transmissions()
        .iter()
        .map(|&transmission| {
            d1(Some(NdFilter {
                target: observable,
                transmission,
            }))
        })
        .collect::<Result<_>>()?;
    Ok((p0, ps))
}

/// Records for a precomputed probability table; see [`run_trial`].
pub fn sample_records(
    observable: PathAttributeObservable,
    schedule: &AttenuationSchedule,
    probabilities: &(f64, Vec<f64>),
    lambda: f64,
    acquisition: Acquisition,
    seed: RngSeed,
) -> Result<Vec<CountRecord>> {
    check_flux(lambda)?;
    let (p0, ps) = probabilities;
    schedule
        .transmissions()
        .iter()
        .zip(ps)
        .enumerate()
        .map(|(k, (&transmission, &p))| {
            let (n0, n) = match acquisition {
                Acquisition::Exact => (lambda * p0, lambda * p),
                Acquisition::Shots => {
                    let k = k as u64;
                    (
                        poisson(lambda * p0, seed.child(2 * k)),
                        poisson(lambda * p, seed.child(2 * k + 1)),
                    )
                }
            };
            let r = CountRecord {
                observable,
                transmission,
                reference_counts: n0,
                disturbed_counts: n,
                mean_flux: lambda,
            };
            r.normalized()?;
            Ok(r)
        })
        .collect()
}

/// One attenuation curve: a record per transmission, in schedule order.
pub fn run_trial(
    params: &DualityParams,
    observable: PathAttributeObservable,
    schedule: &AttenuationSchedule,
    lambda: f64,
    acquisition: Acquisition,
    seed: RngSeed,
) -> Result<Vec<CountRecord>> {
    let probs = d1_probabilities(params, observable, schedule)?;
    sample_records(observable, schedule, &probs, lambda, acquisition, seed)
}

/// Line through `(t, N̂)`; the weighted variant uses the Poisson variances.
pub fn fit_records(records: &[CountRecord], weighted: bool) -> Result<FitResult> {
    let points = records
        .iter()
        .map(|r| Ok((r.t(), r.normalized()?)))
        .collect::<Result<Vec<_>>>()?;
    if !weighted {
        return least_squares_line(&points);
    }
    let weights = records
        .iter()
        .map(|r| {
            let v = r.normalized_variance()?;
            Ok(if v > 0.0 { v.recip() } else { f64::MAX.sqrt() })
        })
        .collect::<Result<Vec<_>>>()?;
    least_squares_line_weighted(&points, &weights)
}

/// Parametric bootstrap: each count is redrawn as Poisson around its
/// observed value, the line refitted, and the sample standard deviation of
/// `−slope/2` over the resamples returned.
pub fn monte_carlo_error(records: &[CountRecord], resamples: usize, seed: RngSeed) -> Result<f64> {
    monte_carlo_error_with(records, resamples, seed, false, Execution::default())
}

pub fn monte_carlo_error_with(
    records: &[CountRecord],
    resamples: usize,
    seed: RngSeed,
    weighted: bool,
    exec: Execution,
) -> Result<f64> {
    if resamples < MIN_RESAMPLES {
        return Err(Error::TooFewResamples(resamples));
    }
    let estimates = exec.try_map_range(resamples, |r| {
        let s = seed.child(r as u64);
        let resampled: Vec<CountRecord> = records
            .iter()
            .enumerate()
            .map(|(k, rec)| {
                let k = k as u64;
                CountRecord {
                    reference_counts: poisson(rec.reference_counts, s.child(2 * k)),
                    disturbed_counts: poisson(rec.disturbed_counts, s.child(2 * k + 1)),
                    ..*rec
                }
            })
            .collect();
        fit_records(&resampled, weighted).map(|f| weak_value_estimate(&f).0)
    })?;
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Weak value fitted from one curve with both error estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValueFit {
    pub w_hat: f64,
    /// From the OLS slope standard error.
    pub fit_err: f64,
    /// Bootstrap standard deviation; zero in exact acquisition.
    pub mc_err: f64,
}

/// Knobs shared by the fitting pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationConfig {
    pub schedule: AttenuationSchedule,
    pub lambda: f64,
    pub acquisition: Acquisition,
    pub resamples: usize,
    pub weighted: bool,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            schedule: AttenuationSchedule::default(),
            lambda: DEFAULT_FLUX,
            acquisition: Acquisition::Shots,
            resamples: 200,
            weighted: false,
        }
    }
}

pub fn fit_weak_value(
    records: &[CountRecord],
    config: &EstimationConfig,
    seed: RngSeed,
    exec: Execution,
) -> Result<WeakValueFit> {
    let fit = fit_records(records, config.weighted)?;
    let (w_hat, fit_err) = weak_value_estimate(&fit);
    let mc_err = match config.acquisition {
        Acquisition::Exact => 0.0,
        Acquisition::Shots => {
            monte_carlo_error_with(records, config.resamples, seed, config.weighted, exec)?
        }
    };
    Ok(WeakValueFit {
        w_hat,
        fit_err,
        mc_err,
    })
}

/// Runs `n` independent trials; trial `i` uses `seed.child(i)` for its
/// counts and its bootstrap.
pub fn run_trials(
    params: &DualityParams,
    observable: PathAttributeObservable,
    config: &EstimationConfig,
    n: usize,
    seed: RngSeed,
    exec: Execution,
) -> Result<Vec<WeakValueFit>> {
    let probs = d1_probabilities(params, observable, &config.schedule)?;
    exec.try_map_range(n, |i| {
        let s = seed.child(i as u64);
        let records = sample_records(
            observable,
            &config.schedule,
            &probs,
            config.lambda,
            config.acquisition,
            s.child(0),
        )?;
        fit_weak_value(&records, config, s.child(1), Execution::Sequential)
    })
}

pub const CSV_HEADER: [&str; 6] = ["observable", "transmission", "t", "n0", "n", "N"];

pub fn write_records_csv<W: Write>(records: &[CountRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in records {
        w.write_record([
            r.observable.to_string(),
            r.transmission.to_string(),
            r.t().to_string(),
            r.reference_counts.to_string(),
            r.disturbed_counts.to_string(),
            r.normalized()?.to_string(),
        ])
        .map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

/// Inverse of [`write_records_csv`]. The flux is not part of the schema and
/// is supplied by the caller.
pub fn read_records_csv<R: Read>(input: R, mean_flux: f64) -> Result<Vec<CountRecord>> {
    let bad = |e: &dyn std::fmt::Display| Error::Serialization(e.to_string());
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| bad(&e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Serialization(format!(
            "unexpected header {header:?}"
        )));
    }
    rd.records()
        .map(|row| {
            let row = row.map_err(|e| bad(&e))?;
            let num = |i: usize| row[i].parse::<f64>().map_err(|e| bad(&e));
            let transmission = num(1)?;
            transmission_to_time(transmission)?;
            Ok(CountRecord {
                observable: row[0].parse().map_err(|e: String| bad(&e))?,
                transmission,
                reference_counts: num(3)?,
                disturbed_counts: num(4)?,
                mean_flux,
            })
        })
        .collect()
}
