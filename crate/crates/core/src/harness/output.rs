use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::ExperimentSpec;
use crate::baselines::write_atomic;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "experiment,test,param1,param2,n,estimate,se,reps,seed";

/// One line of a result table.
///
/// `param1` is the grid value of the experiment; `param2` is the secondary
/// parameter (ω for belief curves, α otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub test: String,
    pub param1: f64,
    pub param2: f64,
    pub n: usize,
    pub estimate: f64,
    pub se: f64,
    pub reps: usize,
    pub seed: u64,
}

impl ResultRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{}",
            self.experiment, self.test, self.param1, self.param2, self.n, self.estimate, self.se, self.reps, self.seed
        )
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_atomic(path, to_csv(rows).as_bytes())
}

/// Parse a result table; errors carry the 1-based line number.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header `{CSV_HEADER}`") }),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse { line: line_no, msg: format!("expected 9 fields, found {}", f.len()) });
        }
        let float = |k: usize, name: &str| -> Result<f64> {
            f[k].trim()
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("bad {name} `{}`", f[k]) })
        };
        let int = |k: usize, name: &str| -> Result<u64> {
            f[k].trim()
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("bad {name} `{}`", f[k]) })
        };
        rows.push(ResultRow {
            experiment: f[0].to_string(),
            test: f[1].to_string(),
            param1: float(2, "param1")?,
            param2: float(3, "param2")?,
            n: int(4, "n")? as usize,
            estimate: float(5, "estimate")?,
            se: float(6, "se")?,
            reps: int(7, "reps")? as usize,
            seed: int(8, "seed")?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Provenance written next to every result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: ExperimentSpec,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub csv: String,
    pub rows: usize,
    /// `ω*` of every calibration the run used, by `family/n/alpha`.
    #[serde(default)]
    pub calibrations: Vec<CalibrationNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationNote {
    pub family: String,
    pub n: usize,
    pub alpha: f64,
    pub omega_star: f64,
    pub final_phi: f64,
    pub final_phi_se: f64,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
