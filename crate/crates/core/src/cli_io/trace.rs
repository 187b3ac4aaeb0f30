//! Energy trace CSV files.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dynamics::{Observer, RunState, TraceRow};
use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Scalar};

pub const TRACE_HEADER: &str = "step,time,E,P,N,C,Reg,mass_u,mass_v,residual";

/// Number with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Append one row; the header is written first when the file is new or empty.
/// `N` is the unscaled nonlocal term, so `E = P + γN + C + Reg`.
pub fn append_trace<T: Scalar>(
    path: impl AsRef<Path>,
    step: u64,
    time: T,
    energy: &EnergyBreakdown<T>,
    masses: (T, T),
    residual: T,
) -> Result<()> {
    let path = path.as_ref();
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = String::new();
    if fresh {
        line.push_str(TRACE_HEADER);
        line.push('\n');
    }
    let cols = [
        time,
        energy.total,
        energy.perimeter,
        energy.nonlocal,
        energy.constraint,
        energy.v_regularization,
        masses.0,
        masses.1,
        residual,
    ];
    line.push_str(&step.to_string());
    for c in cols {
        line.push(',');
        line.push_str(&fmt17(to_f64(c)));
    }
    line.push('\n');
    f.write_all(line.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn append_trace_row<T: Scalar>(path: impl AsRef<Path>, row: &TraceRow<T>) -> Result<()> {
    append_trace(
        path,
        row.step,
        row.time,
        &row.energy,
        (row.mass_u, row.mass_v),
        row.residual,
    )
}

/// Parsed trace file.
pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        _ => return Err(Error::Config(format!("trace header must be `{TRACE_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Error::Config(format!("malformed trace row {}", i + 2));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 10 {
            return Err(bad());
        }
        let step = cols[0].trim().parse::<u64>().map_err(|_| bad())?;
        let x: Vec<f64> = cols[1..]
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        rows.push(TraceRow {
            step,
            time: x[0],
            energy: EnergyBreakdown {
                total: x[1],
                perimeter: x[2],
                nonlocal: x[3],
                constraint: x[4],
                v_regularization: x[5],
            },
            mass_u: x[6],
            mass_v: x[7],
            residual: x[8],
        });
    }
    Ok(rows)
}

/// Observer writing the trace CSV and numbered checkpoints into a directory.
pub struct RunWriter {
    pub trace_path: PathBuf,
    pub dir: PathBuf,
}

impl RunWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let trace_path = dir.join("trace.csv");
        if trace_path.exists() {
            fs::remove_file(&trace_path)?;
        }
        Ok(Self { trace_path, dir })
    }

    pub fn checkpoint_path(&self, step: u64) -> PathBuf {
        self.dir.join(format!("checkpoint_{step:010}.okpf"))
    }
}

impl<T: Scalar> Observer<T> for RunWriter {
    fn on_trace(&mut self, row: &TraceRow<T>) -> Result<()> {
        append_trace_row(&self.trace_path, row)
    }

    fn on_checkpoint(&mut self, state: &RunState<T>) -> Result<()> {
        super::checkpoint::write_checkpoint(self.checkpoint_path(state.step), state)
    }
}
