use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::output::Source;
use super::{Command, JobError};
use crate::flow::{EscapeOptions, RiccatiSystem};
use crate::mean_escape::{default_time_step, ChartGrid, Mode, SeriesOptions, SwitchedSystem};
use crate::numerics::Matrix;
use crate::profile::{ProfileOptions, Sampler};

/// Starting angles used by `verify` when the config gives none.
pub const VERIFY_ANGLES: [f64; 5] = [-1.2, -0.6, 0.0, 0.6, 1.2];

/// Initial state: a nested row-major array, or a bare number for scalar
/// equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateInput {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

/// One job, as read from a JSON document. Absent fields take the defaults
/// of the library; the resolved config written into every artifact has
/// all of them filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Generator of the (first) equation, `d × d`, nested rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// Generator of the second equation for switched jobs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<StateInput>,
    /// Starting line angles on the projective line (switched jobs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_tol: Option<f64>,
    /// Also solve the transfer-matrix system.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_seeds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<Sampler>,
}

impl JobConfig {
    /// Parses a JSON job document; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, JobError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            JobError::config(
                if path == "." { "config".into() } else { path },
                e.into_inner().to_string(),
            )
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, JobError> {
        let text = std::fs::read_to_string(path).map_err(|e| JobError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
}

/// A validated job with every parameter resolved.
#[derive(Debug, Clone)]
pub(crate) struct Job {
    pub config: JobConfig,
    pub provenance: BTreeMap<&'static str, Source>,
    pub sys_a: RiccatiSystem,
    pub switched: Option<SwitchedSystem>,
    pub y0: Option<Matrix>,
    pub theta0: Vec<f64>,
    pub z0: Mode,
    pub escape: EscapeOptions,
    pub grid_spacing: f64,
    pub series: SeriesOptions,
    pub transfer: bool,
    pub h: Option<f64>,
    pub seed: u64,
    pub n_trials: usize,
    pub profile: ProfileOptions,
    pub sampler: Sampler,
}

fn matrix_field(field: &'static str, rows: &[Vec<f64>]) -> Result<Matrix, JobError> {
    Matrix::from_rows(rows).map_err(|e| JobError::config(field, e.to_string()))
}

fn require<T: Clone>(field: &'static str, v: &Option<T>, command: Command) -> Result<T, JobError> {
    v.clone()
        .ok_or_else(|| JobError::config(field, format!("required by `{}`", command.name())))
}

fn check(field: &'static str, ok: bool, what: &str) -> Result<(), JobError> {
    if ok {
        Ok(())
    } else {
        Err(JobError::config(field, what.to_string()))
    }
}

struct Resolver {
    provenance: BTreeMap<&'static str, Source>,
}

impl Resolver {
    fn take<T: Clone>(&mut self, field: &'static str, slot: &mut Option<T>, default: T) -> T {
        match slot {
            Some(v) => {
                self.provenance.insert(field, Source::Config);
                v.clone()
            }
            None => {
                self.provenance.insert(field, Source::Default);
                *slot = Some(default.clone());
                default
            }
        }
    }
}

impl Job {
    pub fn resolve(command: Command, mut cfg: JobConfig, overrides: Overrides) -> Result<Self, JobError> {
        if let Some(c) = cfg.command {
            check(
                "command",
                c == command,
                &format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                ),
            )?;
        }
        cfg.command = Some(command);
        let mut r = Resolver {
            provenance: BTreeMap::new(),
        };

        let k = r.take("k", &mut cfg.k, 1);
        let a = matrix_field("a", &require("a", &cfg.a, command)?)?;
        check(
            "a",
            a.is_square() && a.rows() >= 2,
            "must be square with at least 2 rows",
        )?;
        check(
            "k",
            k >= 1 && k < a.rows(),
            &format!("must satisfy 1 <= k < {}", a.rows()),
        )?;
        let sys_a = RiccatiSystem::new(a, k).map_err(|e| JobError::config("a", e.to_string()))?;

        let switched = if command.is_switched() {
            let b = matrix_field("b", &require("b", &cfg.b, command)?)?;
            check(
                "b",
                b.shape() == sys_a.a().shape(),
                "must have the same shape as `a`",
            )?;
            let lambda = require("lambda", &cfg.lambda, command)?;
            check(
                "lambda",
                lambda > 0.0 && lambda.is_finite(),
                "must be positive and finite",
            )?;
            let sys_b = RiccatiSystem::new(b, k).map_err(|e| JobError::config("b", e.to_string()))?;
            let sw = SwitchedSystem::new(sys_a.clone(), sys_b, lambda)
                .map_err(|e| JobError::config("lambda", e.to_string()))?;
            check(
                "a",
                k == 1 && sys_a.dim() == 2,
                "switched jobs need 2x2 generators with k = 1",
            )?;
            Some(sw)
        } else {
            None
        };

        let y0 = match &cfg.y0 {
            Some(input) => {
                let m = match input {
                    StateInput::Scalar(x) => Matrix::scalar(*x),
                    StateInput::Rows(rows) => Matrix::from_rows(rows),
                }
                .map_err(|e| JobError::config("y0", e.to_string()))?;
                check(
                    "y0",
                    m.shape() == sys_a.state_shape(),
                    &format!("must have shape {:?}", sys_a.state_shape()),
                )?;
                Some(m)
            }
            None => None,
        };
        if command == Command::EscapeTime {
            require("y0", &cfg.y0, command)?;
        }

        let theta_default = if command == Command::Verify {
            VERIFY_ANGLES.to_vec()
        } else {
            Vec::new()
        };
        let theta0 = if command.is_switched() {
            r.take("theta0", &mut cfg.theta0, theta_default)
        } else {
            cfg.theta0.clone().unwrap_or_default()
        };
        check(
            "theta0",
            theta0.iter().all(|t| t.abs() < FRAC_PI_2),
            "angles must lie in (-pi/2, pi/2)",
        )?;
        if command == Command::Simulate {
            check(
                "y0",
                y0.is_some() || !theta0.is_empty(),
                "`simulate` needs `y0` or `theta0`",
            )?;
        }
        let z0 = r.take("z0", &mut cfg.z0, Mode::A);

        let defaults = EscapeOptions::default();
        let escape = EscapeOptions {
            tol: r.take("tol", &mut cfg.tol, defaults.tol),
            t_cap: r.take("t_cap", &mut cfg.t_cap, defaults.t_cap),
            n_max: r.take("n_max", &mut cfg.n_max, defaults.n_max),
        };
        check(
            "tol",
            escape.tol > 0.0 && escape.tol.is_finite(),
            "must be positive and finite",
        )?;
        check(
            "t_cap",
            escape.t_cap > 0.0 && escape.t_cap.is_finite(),
            "must be positive and finite",
        )?;
        check("n_max", escape.n_max > 0, "must be positive")?;

        let grid_spacing = r.take("grid_spacing", &mut cfg.grid_spacing, 0.005);
        check(
            "grid_spacing",
            grid_spacing > 0.0 && grid_spacing <= std::f64::consts::PI,
            "must lie in (0, pi]",
        )?;
        let sd = SeriesOptions::default();
        let series = SeriesOptions {
            terms: r.take("terms", &mut cfg.terms, sd.terms),
            tol: r.take("series_tol", &mut cfg.series_tol, sd.tol),
        };
        check("terms", series.terms > 0, "must be positive")?;
        check("series_tol", series.tol >= 0.0, "must be non-negative")?;
        let transfer = r.take("transfer", &mut cfg.transfer, false);

        let h = match (&switched, transfer, cfg.h) {
            (_, _, Some(h)) => {
                check("h", h > 0.0 && h.is_finite(), "must be positive and finite")?;
                r.provenance.insert("h", Source::Config);
                Some(h)
            }
            (Some(sw), true, None) => {
                let grid = ChartGrid::uniform(grid_spacing)
                    .map_err(|e| JobError::config("grid_spacing", e.to_string()))?;
                let h = default_time_step(sw, &grid);
                r.provenance.insert("h", Source::Derived);
                cfg.h = Some(h);
                Some(h)
            }
            _ => None,
        };

        let seed = match overrides.seed {
            Some(s) => {
                r.provenance.insert("seed", Source::Flag);
                cfg.seed = Some(s);
                s
            }
            None => r.take("seed", &mut cfg.seed, 0),
        };
        let n_trials = r.take("n_trials", &mut cfg.n_trials, 10_000);
        check("n_trials", n_trials > 0, "must be positive")?;

        let pd = ProfileOptions::default();
        let profile = ProfileOptions {
            n_seeds: r.take("n_seeds", &mut cfg.n_seeds, pd.n_seeds),
            n_steps: r.take("n_steps", &mut cfg.n_steps, pd.n_steps),
            seed,
            escape,
        };
        let sampler = r.take("sampler", &mut cfg.sampler, Sampler::default());
        if command == Command::Profile {
            let shape = sys_a.state_shape();
            sampler
                .sample(shape, 0, seed)
                .map_err(|e| JobError::config("sampler", e.to_string()))?;
        }

        Ok(Self {
            config: cfg,
            provenance: r.provenance,
            sys_a,
            switched,
            y0,
            theta0,
            z0,
            escape,
            grid_spacing,
            series,
            transfer,
            h,
            seed,
            n_trials,
            profile,
            sampler,
        })
    }
}
