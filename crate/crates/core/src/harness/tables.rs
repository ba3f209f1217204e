//! Comma-separated tables, each preceded by a `# uavic <kind> v1` line.
//!
//! Floats are written with their shortest round-trip representation, so a
//! re-read table reproduces the in-memory values bit for bit.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::point::Point2;
use crate::ra::{DecodingMode, SlotAllocation};
use crate::scenario::Scenario;
use crate::trajectory::Trajectory;

pub const SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const ALLOCATION_FILE: &str = "allocation.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const HOVER_FILE: &str = "hover.csv";

/// Throughput cell for a sweep point with no feasible plan.
pub const INFEASIBLE: &str = "INFEASIBLE";

fn open_writer(path: &Path, kind: &str) -> Result<csv::Writer<File>> {
    let mut f = File::create(path)?;
    writeln!(f, "# uavic {kind} v{SCHEMA_VERSION}")?;
    Ok(csv::Writer::from_writer(f))
}

fn open_reader(path: &Path, expect: &[String]) -> Result<csv::Reader<File>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != expect {
        return Err(Error::config(
            path.display().to_string(),
            format!("expected columns {expect:?}, found {header:?}"),
        ));
    }
    Ok(r)
}

fn owned(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, path: &Path) -> Result<&'a str> {
    rec.get(i).ok_or_else(|| Error::config(path.display().to_string(), format!("row is missing column {i}")))
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = field(rec, i, path)?;
    raw.parse().map_err(|_| {
        let line = rec.position().map_or(0, |p| p.line());
        Error::config(format!("{}:{line}", path.display()), format!("cannot parse '{raw}' in column {i}"))
    })
}

fn trajectory_cols() -> Vec<String> {
    owned(&["slot", "t_s", "x_m", "y_m"])
}

pub fn write_trajectory<F: Real>(path: &Path, traj: &Trajectory<F>, s: &Scenario<F>) -> Result<()> {
    let mut w = open_writer(path, "trajectory")?;
    w.write_record(trajectory_cols())?;
    let dt = s.uav().slot_len();
    for (n, p) in traj.waypoints().iter().enumerate() {
        w.write_record([n.to_string(), (F::of_usize(n) * dt).to_string(), p.x.to_string(), p.y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<F: Real>(path: &Path) -> Result<Trajectory<F>> {
    let mut r = open_reader(path, &trajectory_cols())?;
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let slot: usize = parse(&rec, 0, path)?;
        if slot != pts.len() {
            return Err(Error::config(path.display().to_string(), format!("slot {slot} out of order")));
        }
        pts.push(Point2::new(parse(&rec, 2, path)?, parse(&rec, 3, path)?));
    }
    Ok(Trajectory::new(pts))
}

fn allocation_cols(sites: usize) -> Vec<String> {
    let mut c = owned(&["slot", "tau_bitmask", "p_w"]);
    c.extend((1..=sites).map(|k| format!("q_{k}_w")));
    c.push("r_bpshz".into());
    c
}

/// Rows for slots `1..=N`; bit `k-1` of the mask is `tau_k`.
pub fn write_allocations<F: Real>(path: &Path, allocs: &[SlotAllocation<F>], sites: usize) -> Result<()> {
    let mut w = open_writer(path, "allocation")?;
    w.write_record(allocation_cols(sites))?;
    for (i, a) in allocs.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), a.mode.bitmask().to_string(), a.p.to_string()];
        row.extend(a.q.iter().map(|q| q.to_string()));
        row.push(a.r.to_string());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_allocations<F: Real>(path: &Path, sites: usize) -> Result<Vec<SlotAllocation<F>>> {
    let mut r = open_reader(path, &allocation_cols(sites))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let slot: usize = parse(&rec, 0, path)?;
        if slot != out.len() + 1 {
            return Err(Error::config(path.display().to_string(), format!("slot {slot} out of order")));
        }
        let mode = DecodingMode::new(parse(&rec, 1, path)?, sites)
            .map_err(|e| Error::config(format!("{}:slot {slot}", path.display()), e.to_string()))?;
        let q = (0..sites).map(|k| parse(&rec, 3 + k, path)).collect::<Result<Vec<F>>>()?;
        out.push(SlotAllocation {
            mode,
            q,
            p: parse(&rec, 2, path)?,
            r: parse(&rec, 3 + sites, path)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<F> {
    pub scheme: String,
    /// 1-based outer iteration.
    pub outer_iter: usize,
    pub objective: F,
}

fn trace_cols() -> Vec<String> {
    owned(&["scheme", "outer_iter", "objective_bpshz"])
}

pub fn write_trace<F: Real>(path: &Path, rows: &[TraceRow<F>]) -> Result<()> {
    let mut w = open_writer(path, "trace")?;
    w.write_record(trace_cols())?;
    for r in rows {
        w.write_record([r.scheme.clone(), r.outer_iter.to_string(), r.objective.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<F: Real>(path: &Path) -> Result<Vec<TraceRow<F>>> {
    let mut r = open_reader(path, &trace_cols())?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(TraceRow {
                scheme: field(&rec, 0, path)?.to_owned(),
                outer_iter: parse(&rec, 1, path)?,
                objective: parse(&rec, 2, path)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Infeasible,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Infeasible => "infeasible",
            Status::Error => "error",
        }
    }
}

impl std::str::FromStr for Status {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "ok" => Ok(Status::Ok),
            "infeasible" => Ok(Status::Infeasible),
            "error" => Ok(Status::Error),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow<F> {
    pub scheme: String,
    pub param: String,
    pub value: F,
    /// `None` when the point has no plan (see `status`).
    pub throughput: Option<F>,
    pub iters: usize,
    pub status: Status,
    /// Sweep check against the previous feasible value of the same scheme:
    /// `yes`, `no`, or empty where it does not apply.
    pub monotone: String,
}

fn summary_cols() -> Vec<String> {
    owned(&["scheme", "param", "value", "throughput_bpshz", "iters", "status", "monotone"])
}

pub fn write_summary<F: Real>(path: &Path, rows: &[SummaryRow<F>]) -> Result<()> {
    let mut w = open_writer(path, "summary")?;
    w.write_record(summary_cols())?;
    for r in rows {
        let tp = match (r.throughput, r.status) {
            (Some(t), _) => t.to_string(),
            (None, Status::Infeasible) => INFEASIBLE.to_owned(),
            (None, _) => "NaN".to_owned(),
        };
        w.write_record([
            r.scheme.clone(),
            r.param.clone(),
            r.value.to_string(),
            tp,
            r.iters.to_string(),
            r.status.as_str().to_owned(),
            r.monotone.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<F: Real>(path: &Path) -> Result<Vec<SummaryRow<F>>> {
    let mut r = open_reader(path, &summary_cols())?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            let raw_tp = field(&rec, 3, path)?;
            let throughput = match raw_tp {
                INFEASIBLE | "NaN" => None,
                _ => Some(parse(&rec, 3, path)?),
            };
            Ok(SummaryRow {
                scheme: field(&rec, 0, path)?.to_owned(),
                param: field(&rec, 1, path)?.to_owned(),
                value: parse(&rec, 2, path)?,
                throughput,
                iters: parse(&rec, 4, path)?,
                status: parse(&rec, 5, path)?,
                monotone: field(&rec, 6, path)?.to_owned(),
            })
        })
        .collect()
}

fn hover_cols(sites: usize) -> Vec<String> {
    let mut c = owned(&["x_m", "y_m", "tau_bitmask", "p_w"]);
    c.extend((1..=sites).map(|k| format!("q_{k}_w")));
    c.push("r_bpshz".into());
    c
}

/// Single-row table describing the best hover point.
pub fn write_hover<F: Real>(path: &Path, point: Point2<F>, a: &SlotAllocation<F>) -> Result<()> {
    let mut w = open_writer(path, "hover")?;
    w.write_record(hover_cols(a.q.len()))?;
    let mut row = vec![point.x.to_string(), point.y.to_string(), a.mode.bitmask().to_string(), a.p.to_string()];
    row.extend(a.q.iter().map(|q| q.to_string()));
    row.push(a.r.to_string());
    w.write_record(row)?;
    w.flush()?;
    Ok(())
}

pub fn read_hover<F: Real>(path: &Path, sites: usize) -> Result<(Point2<F>, SlotAllocation<F>)> {
    let mut r = open_reader(path, &hover_cols(sites))?;
    let rec = r
        .records()
        .next()
        .ok_or_else(|| Error::config(path.display().to_string(), "no hover row"))??;
    let mode = DecodingMode::new(parse(&rec, 2, path)?, sites).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    let q = (0..sites).map(|k| parse(&rec, 4 + k, path)).collect::<Result<Vec<F>>>()?;
    let a = SlotAllocation {
        mode,
        q,
        p: parse(&rec, 3, path)?,
        r: parse(&rec, 4 + sites, path)?,
    };
    Ok((Point2::new(parse(&rec, 0, path)?, parse(&rec, 1, path)?), a))
}
