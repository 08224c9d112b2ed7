//! CSV and JSON serialization of solver traces.

use crate::error::{Error, Result};
use crate::solvers::{IterationRecord, Method, RunTrace, TerminalStatus};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const TRACE_HEADER: [&str; 7] = [
    "k",
    "f",
    "riem_grad_norm",
    "tau",
    "halvings",
    "matvec_count",
    "wall_nanos",
];

/// One row per record. Reals use shortest round-trip scientific notation.
pub fn write_trace_csv<W: Write>(w: W, trace: &RunTrace) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        wr.write_record([
            r.k.to_string(),
            format!("{:e}", r.f),
            format!("{:e}", r.riem_grad_norm),
            format!("{:e}", r.tau),
            r.halvings.to_string(),
            r.matvec_count.to_string(),
            r.wall_nanos.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<IterationRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected trace header {header:?}")));
    }
    let field = |rec: &csv::StringRecord, i: usize| -> Result<String> {
        rec.get(i)
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("missing column {}", TRACE_HEADER[i])))
    };
    fn num<T: std::str::FromStr>(s: String) -> Result<T> {
        s.parse()
            .map_err(|_| Error::Parse(format!("bad number {s:?}")))
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        out.push(IterationRecord {
            k: num(field(&rec, 0)?)?,
            f: num(field(&rec, 1)?)?,
            riem_grad_norm: num(field(&rec, 2)?)?,
            tau: num(field(&rec, 3)?)?,
            halvings: num(field(&rec, 4)?)?,
            matvec_count: num(field(&rec, 5)?)?,
            wall_nanos: num(field(&rec, 6)?)?,
        });
    }
    Ok(out)
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: Method,
    pub terminal_status: TerminalStatus,
    pub iterations: usize,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub total_matvecs: u64,
    pub restarts: usize,
}

impl From<&RunTrace> for RunSummary {
    fn from(t: &RunTrace) -> Self {
        let last = t.last();
        RunSummary {
            method: t.method,
            terminal_status: t.terminal_status,
            iterations: last.k,
            final_f: last.f,
            final_grad_norm: last.riem_grad_norm,
            total_matvecs: last.matvec_count,
            restarts: t.restarts.len(),
        }
    }
}
