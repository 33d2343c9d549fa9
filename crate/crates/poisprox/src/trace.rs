//! Trace CSV export/import and the wall clock used by the CLI.

use std::path::Path;
use std::time::Instant;

use poisprox_core::objective::{ExtendedReal, Infeasibility};
use poisprox_core::solvers::{Clock, SolverTrace, TraceRecord};

use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 7] = [
    "iter",
    "objective",
    "fidelity",
    "penalty",
    "pos_violation",
    "mae",
    "elapsed_s",
];

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

fn extended(v: ExtendedReal) -> String {
    // f64 Display renders +∞ as `inf`.
    v.value().to_string()
}

pub fn write_trace(trace: &SolverTrace, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(TRACE_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            extended(r.objective),
            extended(r.fidelity),
            r.penalty.to_string(),
            r.pos_violation.to_string(),
            r.mae.map(|m| m.to_string()).unwrap_or_default(),
            r.elapsed_s.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Trace {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn read_trace(path: &Path) -> Result<SolverTrace> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Trace {
            path: path.to_path_buf(),
            message: format!(
                "unexpected header '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let bad = |field: &str| Error::Trace {
            path: path.to_path_buf(),
            message: format!(
                "data row {}: invalid {field} '{}'",
                i + 1,
                row.get(TRACE_HEADER.iter().position(|h| *h == field).unwrap())
                    .unwrap_or("")
            ),
        };
        let num = |idx: usize| row[idx].parse::<f64>().map_err(|_| bad(TRACE_HEADER[idx]));
        let ext = |idx: usize| -> Result<ExtendedReal> {
            let v = num(idx)?;
            if v.is_nan() || v == f64::NEG_INFINITY {
                Err(bad(TRACE_HEADER[idx]))
            } else if v.is_infinite() {
                Ok(ExtendedReal::Infinite(Infeasibility::Unrecorded))
            } else {
                Ok(ExtendedReal::Finite(v))
            }
        };
        records.push(TraceRecord {
            iter: row[0].parse().map_err(|_| bad("iter"))?,
            objective: ext(1)?,
            fidelity: ext(2)?,
            penalty: num(3)?,
            pos_violation: num(4)?,
            mae: if row[5].is_empty() {
                None
            } else {
                Some(num(5)?)
            },
            elapsed_s: num(6)?,
        });
    }
    if records.is_empty() {
        return Err(Error::Trace {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok(SolverTrace { records })
}
