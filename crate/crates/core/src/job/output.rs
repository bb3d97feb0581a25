use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Command, JobConfig, JobError};

/// Significant digits of every number written to an artifact.
pub const SIG_DIGITS: usize = 12;

/// `printf("%.12g")`-style rendering: fixed notation for decimal exponents
/// in `[-4, 12)`, scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        let keep = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(keep);
    }
    s
}

/// `x` rounded to [`SIG_DIGITS`] significant digits (non-finite values pass
/// through).
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format_sig(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

/// Where a resolved parameter came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    Config,
    Flag,
    /// Computed from other parameters.
    Derived,
}

/// Header written first in every artifact. It carries the fully resolved
/// config, so re-running that config reproduces the numbers.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: JobConfig,
    pub provenance: BTreeMap<&'static str, Source>,
}

impl Metadata {
    fn json_line(&self) -> String {
        serde_json::to_string(self).expect("metadata serializes")
    }
}

/// A CSV table: header cells carry units, e.g. `t_n [time]`.
pub(crate) struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, meta: &Metadata) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", meta.json_line()).unwrap();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial artifact.
pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<(), JobError> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let io = |e: std::io::Error| JobError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub(crate) fn write_csv(dir: &Path, name: &str, meta: &Metadata, table: &Table) -> Result<PathBuf, JobError> {
    let path = dir.join(name);
    write_atomic(&path, &table.render(meta))?;
    Ok(path)
}

pub(crate) fn write_json(
    dir: &Path,
    name: &str,
    meta: &Metadata,
    result: serde_json::Value,
) -> Result<PathBuf, JobError> {
    let path = dir.join(name);
    let doc = serde_json::json!({ "metadata": meta, "result": result });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    write_atomic(&path, &text)?;
    Ok(path)
}

/// Parses the metadata line of a CSV artifact written by this module.
pub fn read_metadata(csv: &str) -> Option<serde_json::Value> {
    let first = csv.lines().next()?.strip_prefix("# ")?;
    serde_json::from_str(first).ok()
}
