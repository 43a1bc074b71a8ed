//! CSV files written by the harness.
//!
//! | file      | columns |
//! |-----------|---------|
//! | records   | `problem_id,solver_id,rep,seed,start_scale,niter,nf,f_final,status,converged` |
//! | curves    | `solver_id,alpha,pi` |
//! | trace     | `k,theta,lambda,rho,norm_r,norm_grad_model,norm_d,gamma,accepted,nf_cumulative,theta_next,pred,terminal` |
//!
//! Floats use the shortest decimal that round-trips; `rho` is empty when
//! undefined.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::profile::ProfileCurve;
use super::{BenchRecord, SummaryRow};
use crate::error::{Error, Result};
use crate::lm::{IterationRecord, Status};

pub const RECORDS_HEADER: [&str; 10] = [
    "problem_id",
    "solver_id",
    "rep",
    "seed",
    "start_scale",
    "niter",
    "nf",
    "f_final",
    "status",
    "converged",
];

pub const CURVES_HEADER: [&str; 3] = ["solver_id", "alpha", "pi"];

pub const TRACE_HEADER: [&str; 13] = [
    "k",
    "theta",
    "lambda",
    "rho",
    "norm_r",
    "norm_grad_model",
    "norm_d",
    "gamma",
    "accepted",
    "nf_cumulative",
    "theta_next",
    "pred",
    "terminal",
];

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e16)`.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn bad(what: &str, line: usize, value: &str) -> Error {
    Error::Usage(format!("line {line}: cannot parse {what} `{value}`"))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<T> {
    let raw = rec.get(idx).ok_or_else(|| bad(name, line, ""))?;
    raw.parse().map_err(|_| bad(name, line, raw))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Usage(format!(
            "unexpected header `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

pub fn write_records<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.problem_id.clone(),
            r.solver_id.clone(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.start_scale.to_string(),
            r.niter.to_string(),
            r.nf.to_string(),
            fmt_float(r.f_final),
            r.status.as_str().to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &RECORDS_HEADER)?;
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let status_raw = row.get(8).unwrap_or("");
        out.push(BenchRecord {
            problem_id: field(&row, 0, "problem_id", line)?,
            solver_id: field(&row, 1, "solver_id", line)?,
            rep: field(&row, 2, "rep", line)?,
            seed: field(&row, 3, "seed", line)?,
            start_scale: field(&row, 4, "start_scale", line)?,
            niter: field(&row, 5, "niter", line)?,
            nf: field(&row, 6, "nf", line)?,
            f_final: field(&row, 7, "f_final", line)?,
            status: Status::parse(status_raw).ok_or_else(|| bad("status", line, status_raw))?,
            converged: field(&row, 9, "converged", line)?,
            wall_time: 0.0,
        });
    }
    Ok(out)
}

pub fn write_curves<W: Write>(out: W, curves: &[ProfileCurve]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVES_HEADER)?;
    for c in curves {
        for &(alpha, pi) in &c.points {
            w.write_record([c.solver_id.clone(), fmt_float(alpha), fmt_float(pi)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves<R: Read>(input: R) -> Result<Vec<ProfileCurve>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &CURVES_HEADER)?;
    let mut curves: Vec<ProfileCurve> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let id: String = field(&row, 0, "solver_id", line)?;
        let point = (field(&row, 1, "alpha", line)?, field(&row, 2, "pi", line)?);
        match curves.last_mut() {
            Some(c) if c.solver_id == id => c.points.push(point),
            _ => curves.push(ProfileCurve {
                solver_id: id,
                points: vec![point],
            }),
        }
    }
    Ok(curves)
}

pub fn write_trace<W: Write>(out: W, trace: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for t in trace {
        w.write_record([
            t.k.to_string(),
            fmt_float(t.theta),
            fmt_float(t.lambda),
            t.rho.map(fmt_float).unwrap_or_default(),
            fmt_float(t.norm_r),
            fmt_float(t.norm_grad_model),
            fmt_float(t.norm_d),
            fmt_float(t.gamma),
            t.accepted.to_string(),
            t.nf_cumulative.to_string(),
            fmt_float(t.theta_next),
            fmt_float(t.pred),
            t.terminal.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace file. Diagnostics are not stored and come back as `None`.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<IterationRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &TRACE_HEADER)?;
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let rho = match row.get(3).unwrap_or("") {
            "" => None,
            raw => Some(raw.parse().map_err(|_| bad("rho", line, raw))?),
        };
        out.push(IterationRecord {
            k: field(&row, 0, "k", line)?,
            theta: field(&row, 1, "theta", line)?,
            lambda: field(&row, 2, "lambda", line)?,
            rho,
            norm_r: field(&row, 4, "norm_r", line)?,
            norm_grad_model: field(&row, 5, "norm_grad_model", line)?,
            norm_d: field(&row, 6, "norm_d", line)?,
            gamma: field(&row, 7, "gamma", line)?,
            accepted: field(&row, 8, "accepted", line)?,
            nf_cumulative: field(&row, 9, "nf_cumulative", line)?,
            theta_next: field(&row, 10, "theta_next", line)?,
            pred: field(&row, 11, "pred", line)?,
            terminal: field(&row, 12, "terminal", line)?,
            diagnostics: None,
        });
    }
    Ok(out)
}

/// Means to one decimal.
pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "problem_id",
        "solver_id",
        "start_scale",
        "runs",
        "converged",
        "overflow",
        "mean_niter",
        "mean_nf",
    ])?;
    for r in rows {
        w.write_record([
            r.problem_id.clone(),
            r.solver_id.clone(),
            r.start_scale.to_string(),
            r.runs.to_string(),
            r.converged.to_string(),
            r.overflow.to_string(),
            format!("{:.1}", r.mean_niter),
            format!("{:.1}", r.mean_nf),
        ])?;
    }
    w.flush()?;
    Ok(())
}

impl BenchRecord {
    pub fn save_all(path: &Path, records: &[BenchRecord]) -> Result<()> {
        write_records(File::create(path)?, records)
    }

    pub fn load_all(path: &Path) -> Result<Vec<BenchRecord>> {
        read_records(File::open(path)?)
    }
}
