//! Run configuration.
//!
//! Sources, lowest precedence first: built-in defaults, a flat `key = value`
//! file (`#` starts a comment), `CHESHIRE_<KEY>` environment variables, and
//! command-line flags.
//!
//! | key           | value                                          | default                         |
//! |---------------|------------------------------------------------|---------------------------------|
//! | `alpha`       | degrees: list `0,45,90` or range `0:90:5`      | `0:90:5`                        |
//! | `schedule`    | transmissions in (0, 1]                        | `0.988,0.991,0.994,0.997,1`     |
//! | `lambda`      | photons per acquisition window                 | `1e6`                           |
//! | `seed`        | unsigned 64-bit integer                        | `0`                             |
//! | `observables` | subset of `PL,PR,WL,WR`                        | all four                        |
//! | `mode`        | `exact` or `shots`                             | `exact`                         |
//! | `noise`       | depolarizing strength for tomography, [0, 1]   | `0`                             |
//! | `out`         | output directory                               | `./out`                         |
//! | `resamples`   | bootstrap resamples, ≥ 100                     | `200`                           |
//! | `weighted`    | `true` for variance-weighted fits              | `false`                         |
//! | `repeats`     | tomography runs per α in shots mode            | `10`                            |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cheshire_core::duality::{DualityParams, PathAttributeObservable};
use cheshire_core::ite::AttenuationSchedule;
use cheshire_core::shots::{Acquisition, EstimationConfig, MIN_RESAMPLES};

pub const ENV_PREFIX: &str = "CHESHIRE_";

pub const KEYS: [&str; 11] = [
    "alpha",
    "schedule",
    "lambda",
    "seed",
    "observables",
    "mode",
    "noise",
    "out",
    "resamples",
    "weighted",
    "repeats",
];

const DEFAULTS: [(&str, &str); 11] = [
    ("alpha", "0:90:5"),
    ("schedule", "0.988,0.991,0.994,0.997,1"),
    ("lambda", "1e6"),
    ("seed", "0"),
    ("observables", "PL,PR,WL,WR"),
    ("mode", "exact"),
    ("noise", "0"),
    ("out", "./out"),
    ("resamples", "200"),
    ("weighted", "false"),
    ("repeats", "10"),
];

/// Where a value came from, for diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: PathBuf, line: usize },
    Env(String),
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Env(var) => write!(f, "environment variable {var}"),
            Origin::Flag(flag) => write!(f, "flag --{flag}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{origin}: {key}: {message}")]
pub struct ConfigError {
    pub origin: String,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(origin: &Origin, key: &str, message: impl Into<String>) -> Self {
        Self {
            origin: origin.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// Unvalidated key → (value, origin) map; later [`set`](Self::set) calls win.
#[derive(Clone, Debug)]
pub struct RawConfig {
    values: BTreeMap<&'static str, (String, Origin)>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|&(k, v)| (k, (v.to_string(), Origin::Default)))
                .collect(),
        }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let Some(&k) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ConfigError::new(&origin, key, "unknown key"));
        };
        self.values.insert(k, (value.trim().to_string(), origin));
        Ok(())
    }

    pub fn apply_file_text(&mut self, text: &str, path: &Path) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_path_buf(),
                line: i + 1,
            };
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::new(&origin, content, "expected `key = value`"));
            };
            self.set(key.trim(), value, origin)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            origin: path.display().to_string(),
            key: "config".into(),
            message: e.to_string(),
        })?;
        self.apply_file_text(&text, path)
    }

    /// Applies every `CHESHIRE_<KEY>` variable; unknown suffixes are errors.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (name, value) in vars {
            if let Some(suffix) = name.strip_prefix(ENV_PREFIX) {
                self.set(
                    &suffix.to_ascii_lowercase(),
                    &value,
                    Origin::Env(name.clone()),
                )?;
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> (&str, &Origin) {
        let (v, o) = &self.values[key];
        (v, o)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (v, o) = self.get(key);
        v.parse()
            .map_err(|e: T::Err| ConfigError::new(o, key, format!("cannot parse `{v}`: {e}")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (v, o) = self.get(key);
        v.split(',')
            .map(|item| {
                let item = item.trim();
                item.parse().map_err(|e: T::Err| {
                    ConfigError::new(o, key, format!("cannot parse `{item}`: {e}"))
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Shots,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "shots" => Ok(Mode::Shots),
            _ => Err("expected `exact` or `shots`".into()),
        }
    }
}

impl Mode {
    pub fn acquisition(self) -> Acquisition {
        match self {
            Mode::Exact => Acquisition::Exact,
            Mode::Shots => Acquisition::Shots,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Shots => "shots",
        }
    }
}

/// A validated configuration. Angles stay in degrees here; [`RunConfig::params`]
/// converts at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alphas_deg: Vec<f64>,
    pub schedule: AttenuationSchedule,
    pub lambda: f64,
    pub seed: u64,
    pub observables: Vec<PathAttributeObservable>,
    pub mode: Mode,
    pub noise: f64,
    pub out: PathBuf,
    pub resamples: usize,
    pub weighted: bool,
    pub repeats: usize,
}

pub fn degrees_to_radians(deg: f64) -> f64 {
    if deg == 90.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        deg.to_radians()
    }
}

fn parse_alphas(raw: &RawConfig) -> Result<Vec<f64>, ConfigError> {
    let (v, o) = raw.get("alpha");
    let err = |m: String| ConfigError::new(o, "alpha", m);
    let alphas = if v.contains(':') {
        let parts: Vec<f64> = v
            .split(':')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| err(format!("`{p}`: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(err("range must be `start:stop:step`".into()));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(err("range needs step > 0 and stop ≥ start".into()));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| start + k as f64 * step).collect()
    } else {
        raw.list::<f64>("alpha")?
    };
    for &a in &alphas {
        if !(0.0..=90.0).contains(&a) {
            return Err(err(format!("{a}° is outside [0, 90]")));
        }
    }
    Ok(alphas)
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, ConfigError> {
        let origin = |k: &str| raw.get(k).1.clone();
        let schedule = AttenuationSchedule::new(raw.list("schedule")?)
            .map_err(|e| ConfigError::new(&origin("schedule"), "schedule", e.to_string()))?;
        let lambda: f64 = raw.parse("lambda")?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ConfigError::new(
                &origin("lambda"),
                "lambda",
                "must be positive",
            ));
        }
        let noise: f64 = raw.parse("noise")?;
        if !(0.0..=1.0).contains(&noise) {
            return Err(ConfigError::new(
                &origin("noise"),
                "noise",
                "must lie in [0, 1]",
            ));
        }
        let resamples: usize = raw.parse("resamples")?;
        if resamples < MIN_RESAMPLES {
            return Err(ConfigError::new(
                &origin("resamples"),
                "resamples",
                format!("must be at least {MIN_RESAMPLES}"),
            ));
        }
        let repeats: usize = raw.parse("repeats")?;
        if repeats == 0 {
            return Err(ConfigError::new(
                &origin("repeats"),
                "repeats",
                "must be positive",
            ));
        }
        let mut observables: Vec<PathAttributeObservable> = raw.list("observables")?;
        observables.sort_by_key(|o| PathAttributeObservable::ALL.iter().position(|a| a == o));
        observables.dedup();
        Ok(Self {
            alphas_deg: parse_alphas(raw)?,
            schedule,
            lambda,
            seed: raw.parse("seed")?,
            observables,
            mode: raw.parse("mode")?,
            noise,
            out: PathBuf::from(raw.get("out").0),
            resamples,
            weighted: raw.parse("weighted")?,
            repeats,
        })
    }

    pub fn params(&self, alpha_deg: f64) -> DualityParams {
        DualityParams::new(degrees_to_radians(alpha_deg)).expect("validated at load")
    }

    pub fn estimation(&self) -> EstimationConfig {
        EstimationConfig {
            schedule: self.schedule.clone(),
            lambda: self.lambda,
            acquisition: self.mode.acquisition(),
            resamples: self.resamples,
            weighted: self.weighted,
        }
    }
}
