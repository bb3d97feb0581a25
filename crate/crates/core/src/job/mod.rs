//! JSON job configs and the CSV/JSON artifacts written by the binary.
//!
//! Every artifact starts with the resolved config (all defaults filled in)
//! and the provenance of each parameter, so a job can be re-run from its own
//! output. CSV files put that block on a `# ` comment line above the header;
//! JSON reports put it under `"metadata"`.

mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{JobConfig, Overrides, StateInput, VERIFY_ANGLES};
pub use output::{format_sig, read_metadata, round_sig, Metadata, Source, SIG_DIGITS};

use crate::error::Error;
use crate::flow::{escape_time, EscapeOutcome};
use crate::mean_escape::{build_transfer_matrices, solve_power_series, ChartGrid, Mode, SwitchedSystem};
use crate::monte_carlo::{estimate_mean_escape, EstimatorReport};
use crate::numerics::Matrix;
use crate::profile::{escape_profile, rescale_time};
use config::Job;
use output::{write_csv, write_json, Table};

/// `verify` fails a starting angle when series and Monte Carlo differ by
/// more than this many standard errors.
pub const VERIFY_Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EscapeTime,
    Profile,
    MeanEscape,
    Simulate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EscapeTime => "escape-time",
            Command::Profile => "profile",
            Command::MeanEscape => "mean-escape",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
        }
    }

    /// Needs a second generator and a switching rate.
    pub fn is_switched(self) -> bool {
        matches!(self, Command::MeanEscape | Command::Simulate | Command::Verify)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Compute(#[from] Error),

    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl JobError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        JobError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 2 for config errors, 3 when some deterministic escape time is
    /// unbounded, 4 for numerical failures and failed checks, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            JobError::Config { .. } => 2,
            JobError::Compute(Error::UnboundedEscape { .. }) => 3,
            JobError::Compute(_) | JobError::VerifyFailed(_) => 4,
            JobError::Io { .. } => 1,
        }
    }
}

/// What a finished job has to say: a short summary for stdout and the
/// artifacts it wrote.
#[derive(Debug, Clone)]
pub struct Report {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Validates `config` for `command` and writes its artifacts into `out_dir`.
pub fn run(
    command: Command,
    config: JobConfig,
    overrides: Overrides,
    out_dir: &Path,
) -> Result<Report, JobError> {
    let job = Job::resolve(command, config, overrides)?;
    std::fs::create_dir_all(out_dir).map_err(|e| JobError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: job.config.clone(),
        provenance: job.provenance.clone(),
    };
    match command {
        Command::EscapeTime => run_escape_time(&job, &meta, out_dir),
        Command::Profile => run_profile(&job, &meta, out_dir),
        Command::MeanEscape => run_mean_escape(&job, &meta, out_dir),
        Command::Simulate => run_simulate(&job, &meta, out_dir),
        Command::Verify => run_verify(&job, &meta, out_dir),
    }
}

fn num(x: f64) -> Value {
    json!(round_sig(x))
}

fn cell(x: f64) -> String {
    format_sig(x)
}

fn run_escape_time(job: &Job, meta: &Metadata, out: &Path) -> Result<Report, JobError> {
    let y0 = job.y0.as_ref().expect("validated");
    let res = match escape_time(&job.sys_a, y0, &job.escape) {
        Ok(res) => res,
        Err(Error::NoEscapePossibleFromLinearPart) => {
            let result = json!({ "outcome": { "kind": "never" }, "reason": Error::NoEscapePossibleFromLinearPart.to_string() });
            let path = write_json(out, "escape_time.json", meta, result)?;
            return Ok(Report {
                summary: "inf".into(),
                files: vec![path],
            });
        }
        Err(e) => return Err(e.into()),
    };

    let mut table = Table::new(["n", "t_n [time]", "delta [time]", "log_delta [ln time]"]);
    for (n, &t) in res.steps.iter().enumerate() {
        let (delta, log_delta) = match res.deltas.get(n) {
            Some(&d) => (cell(d), cell(d.ln())),
            None => (String::new(), String::new()),
        };
        table.push(vec![n.to_string(), cell(t), delta, log_delta]);
    }
    let csv = write_csv(out, "escape_steps.csv", meta, &table)?;

    let (outcome, summary) = match res.outcome {
        EscapeOutcome::Finite { time } => (json!({ "kind": "finite", "time": num(time) }), cell(time)),
        EscapeOutcome::NotBefore { horizon } => (
            json!({ "kind": "not_before", "horizon": num(horizon) }),
            format!("no escape before {}", cell(horizon)),
        ),
    };
    let result = json!({
        "outcome": outcome,
        "iterations": res.steps.len() - 1,
        "last_iterate": num(*res.steps.last().expect("t_0 present")),
    });
    let report = write_json(out, "escape_time.json", meta, result)?;
    Ok(Report {
        summary,
        files: vec![csv, report],
    })
}

fn state_columns(prefix: &str, shape: (usize, usize)) -> Vec<String> {
    let mut cols = Vec::with_capacity(shape.0 * shape.1);
    for i in 0..shape.0 {
        for j in 0..shape.1 {
            cols.push(format!("{prefix}y_{i}_{j}"));
        }
    }
    cols
}

fn run_profile(job: &Job, meta: &Metadata, out: &Path) -> Result<Report, JobError> {
    let points = escape_profile(&job.sys_a, &job.sampler, &job.profile)?;
    let shape = job.sys_a.state_shape();
    let mut header = vec!["seed_index".to_string()];
    header.extend(state_columns("", shape));
    header.extend(state_columns("atan_", shape).into_iter().map(|c| c + " [rad]"));
    header.push("escape_time [time]".into());
    header.push("atan_escape_time [rad]".into());
    let mut table = Table::new(header);
    for p in &points {
        let mut row = vec![p.seed_index.to_string()];
        row.extend(p.state.as_slice().iter().map(|&x| cell(x)));
        row.extend(p.state.as_slice().iter().map(|&x| cell(x.atan())));
        row.push(cell(p.escape_time));
        row.push(cell(rescale_time(p.escape_time)));
        table.push(row);
    }
    let csv = write_csv(out, "profile.csv", meta, &table)?;
    let plateau = points.iter().filter(|p| p.escape_time.is_infinite()).count();
    Ok(Report {
        summary: format!(
            "{} labelled states from {} seeds ({} never escape before t_cap)",
            points.len(),
            job.profile.n_seeds,
            plateau
        ),
        files: vec![csv],
    })
}

fn switched(job: &Job) -> &SwitchedSystem {
    job.switched.as_ref().expect("validated for switched commands")
}

struct MeanEscape {
    series: ChartGrid,
    transfer: Option<(Vec<f64>, Vec<f64>, Value)>,
    bound: f64,
}

fn mean_escape(job: &Job) -> Result<MeanEscape, JobError> {
    let sw = switched(job);
    let points = ChartGrid::uniform(job.grid_spacing)?.points;
    let grid = ChartGrid::with_escape_times(sw, points, &job.escape)?;
    let series = solve_power_series(sw, &grid, &job.series)?;
    let bound = sw.law().cdf(grid.t0());
    let transfer = match (job.transfer, job.h) {
        (true, Some(h)) => {
            let tm = build_transfer_matrices(sw, &grid, h)?;
            let (ta, tb) = tm.solve()?;
            let (ra, rb) = tm.row_sum_norms();
            let gap = ta
                .iter()
                .zip(&series.mean_a)
                .chain(tb.iter().zip(&series.mean_b))
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            let info = json!({
                "h": num(h),
                "row_sum_a": num(ra),
                "row_sum_b": num(rb),
                "sup_gap_to_series": num(gap),
            });
            Some((ta, tb, info))
        }
        _ => None,
    };
    Ok(MeanEscape {
        series,
        transfer,
        bound,
    })
}

fn run_mean_escape(job: &Job, meta: &Metadata, out: &Path) -> Result<Report, JobError> {
    let me = mean_escape(job)?;
    let g = &me.series;
    let mut header = vec![
        "theta [rad]",
        "t_a [time]",
        "t_b [time]",
        "mean_a [time]",
        "mean_b [time]",
    ];
    if me.transfer.is_some() {
        header.extend(["transfer_a [time]", "transfer_b [time]"]);
    }
    let mut table = Table::new(header);
    for i in 0..g.len() {
        let mut row = vec![
            cell(g.points[i].theta()),
            cell(g.escape_a[i]),
            cell(g.escape_b[i]),
            cell(g.mean_a[i]),
            cell(g.mean_b[i]),
        ];
        if let Some((ta, tb, _)) = &me.transfer {
            row.extend([cell(ta[i]), cell(tb[i])]);
        }
        table.push(row);
    }
    let csv = write_csv(out, "mean_escape.csv", meta, &table)?;

    let at: Vec<Value> = job
        .theta0
        .iter()
        .map(
            |&th| json!({ "theta": num(th), "mean_a": num(g.mean_a_at(th)), "mean_b": num(g.mean_b_at(th)) }),
        )
        .collect();
    let result = json!({
        "grid_points": g.len(),
        "t0": num(g.t0()),
        "contraction_bound": num(me.bound),
        "term_norms": g.term_norms.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "residual": num(g.residual),
        "at_theta0": at,
        "transfer": me.transfer.as_ref().map(|t| t.2.clone()),
    });
    let report = write_json(out, "mean_escape.json", meta, result)?;
    let mid = g.mean_a_at(0.0);
    Ok(Report {
        summary: format!(
            "{} grid angles, T_A(0) = {}, last series term {}",
            g.len(),
            cell(mid),
            cell(g.residual)
        ),
        files: vec![csv, report],
    })
}

/// Starting states of a switched job: `y0` if given, else `tan θ` per angle.
fn starts(job: &Job) -> Result<Vec<(f64, Matrix)>, JobError> {
    if let Some(y0) = &job.y0 {
        return Ok(vec![(y0.as_slice()[0].atan(), y0.clone())]);
    }
    job.theta0
        .iter()
        .map(|&th| Ok((th, Matrix::scalar(th.tan())?)))
        .collect()
}

fn estimate(job: &Job, y0: &Matrix) -> Result<EstimatorReport, JobError> {
    Ok(estimate_mean_escape(
        switched(job),
        y0,
        job.z0,
        job.n_trials,
        job.seed,
        &job.escape,
    )?)
}

fn estimator_json(r: &EstimatorReport) -> Value {
    json!({
        "mean": num(r.mean),
        "stderr": num(r.stderr),
        "n": r.n,
        "n_escaped": r.n_escaped,
        "capped_fraction": num(r.capped_fraction),
    })
}

fn run_simulate(job: &Job, meta: &Metadata, out: &Path) -> Result<Report, JobError> {
    let mut table = Table::new([
        "theta0 [rad]",
        "y0",
        "mean [time]",
        "stderr [time]",
        "n",
        "n_escaped",
        "capped_fraction",
    ]);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (th, y0) in starts(job)? {
        let r = estimate(job, &y0)?;
        table.push(vec![
            cell(th),
            cell(y0.as_slice()[0]),
            cell(r.mean),
            cell(r.stderr),
            r.n.to_string(),
            r.n_escaped.to_string(),
            cell(r.capped_fraction),
        ]);
        let mut v = estimator_json(&r);
        v["theta0"] = num(th);
        rows.push(v);
        summary.push(format!(
            "theta0 = {}: {} ± {}",
            cell(th),
            cell(r.mean),
            cell(r.stderr)
        ));
    }
    let csv = write_csv(out, "simulate.csv", meta, &table)?;
    let report = write_json(out, "simulate.json", meta, json!({ "estimates": rows }))?;
    Ok(Report {
        summary: summary.join("\n"),
        files: vec![csv, report],
    })
}

fn run_verify(job: &Job, meta: &Metadata, out: &Path) -> Result<Report, JobError> {
    let me = mean_escape(job)?;
    let g = &me.series;
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for (th, y0) in starts(job)? {
        let r = estimate(job, &y0)?;
        let series = match job.z0 {
            Mode::A => g.mean_a_at(th),
            Mode::B => g.mean_b_at(th),
        };
        let gap = (series - r.mean).abs();
        let z = if r.stderr > 0.0 {
            gap / r.stderr
        } else if gap < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
        let pass = z <= VERIFY_Z_LIMIT && r.n_escaped > 0;
        if !pass {
            failures.push(format!("theta0 = {}: z = {}", cell(th), cell(z)));
        }
        checks.push(json!({
            "theta0": num(th),
            "series": num(series),
            "monte_carlo": estimator_json(&r),
            "z": num(z),
            "pass": pass,
        }));
    }
    if let Some((_, _, info)) = &me.transfer {
        let (ra, rb) = (
            info["row_sum_a"].as_f64().unwrap_or(f64::NAN),
            info["row_sum_b"].as_f64().unwrap_or(f64::NAN),
        );
        let pass = ra <= me.bound + 1e-8 && rb <= me.bound + 1e-8;
        if !pass {
            failures.push(format!(
                "transfer row sums ({ra}, {rb}) exceed F(t0) = {}",
                me.bound
            ));
        }
    }
    let pass = failures.is_empty();
    let result = json!({
        "pass": pass,
        "z_limit": VERIFY_Z_LIMIT,
        "contraction_bound": num(me.bound),
        "checks": checks,
        "transfer": me.transfer.as_ref().map(|t| t.2.clone()),
    });
    let report = write_json(out, "verify.json", meta, result)?;
    if !pass {
        return Err(JobError::VerifyFailed(failures.join("; ")));
    }
    Ok(Report {
        summary: format!(
            "all {} starting angles agree within {VERIFY_Z_LIMIT} standard errors",
            checks.len()
        ),
        files: vec![report],
    })
}
