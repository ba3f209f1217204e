use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::tables::{self, Status, SummaryRow, TraceRow};
use super::{in_pool, run_scheme, write_artifacts, RunConfig};
use crate::benchmarks::Scheme;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::scenario::Scenario;

/// Slack allowed when flagging a sweep as monotone.
pub const SWEEP_MONOTONE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Mission duration `T` in seconds (slot count held fixed).
    MissionT,
    /// The same GU requirement at every site, in bps/Hz.
    GammaAll,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::MissionT => "mission_T",
            SweepParam::GammaAll => "gamma_all_sites",
        }
    }

    /// +1 when throughput should grow with the value, -1 when it should shrink.
    fn expected_direction(self) -> i8 {
        match self {
            SweepParam::MissionT => 1,
            SweepParam::GammaAll => -1,
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "mission_t" | "t_s" => Ok(SweepParam::MissionT),
            "gamma" | "gamma_all" | "gamma_all_sites" => Ok(SweepParam::GammaAll),
            _ => Err(Error::config("param", format!("unknown sweep parameter '{s}' (mission_T or gamma_all_sites)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<F> {
    param: SweepParam,
    values: Vec<F>,
    schemes: Vec<Scheme>,
}

impl<F: Real> SweepSpec<F> {
    /// Values are sorted; duplicates, non-finite values and empty sets are rejected.
    pub fn new(param: SweepParam, mut values: Vec<F>, schemes: Vec<Scheme>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("values", "sweep values must be finite"));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("values", "duplicate sweep value"));
        }
        if schemes.is_empty() {
            return Err(Error::config("schemes", "sweep needs at least one scheme"));
        }
        for (i, s) in schemes.iter().enumerate() {
            if schemes[..i].contains(s) {
                return Err(Error::config("schemes", format!("scheme '{s}' listed twice")));
            }
        }
        Ok(Self { param, values, schemes })
    }

    pub fn param(&self) -> SweepParam {
        self.param
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn schemes(&self) -> &[Scheme] {
        &self.schemes
    }
}

pub fn apply_param<F: Real>(s: &Scenario<F>, param: SweepParam, value: F) -> Result<Scenario<F>> {
    match param {
        SweepParam::MissionT => s.with_mission_time(value),
        SweepParam::GammaAll => s.with_gamma_all(value),
    }
}

fn point_dir_name<F: Real>(scheme: Scheme, param: SweepParam, value: F) -> String {
    format!("{}_{}_{}", scheme.name(), param.name(), value)
}

/// Runs every (scheme, value) point, one summary row each, ordered by scheme
/// then value. Infeasible points are recorded rather than aborting the sweep;
/// I/O failures abort it.
pub fn run_sweep<F: Real>(s: &Scenario<F>, spec: &SweepSpec<F>, cfg: &RunConfig<F>, out: Option<&Path>) -> Result<Vec<SummaryRow<F>>> {
    let points: Vec<(Scheme, F)> = spec
        .schemes
        .iter()
        .flat_map(|&sc| spec.values.iter().map(move |&v| (sc, v)))
        .collect();

    let rows = in_pool(cfg.workers, || {
        points
            .par_iter()
            .map(|&(scheme, value)| -> Result<SummaryRow<F>> {
                let mut row = SummaryRow {
                    scheme: scheme.name().to_owned(),
                    param: spec.param.name().to_owned(),
                    value,
                    throughput: None,
                    iters: 0,
                    status: Status::Ok,
                    monotone: String::new(),
                };
                let result = apply_param(s, spec.param, value).and_then(|sc| run_scheme(&sc, scheme, cfg).map(|o| (sc, o)));
                match result {
                    Ok((sc, outcome)) => {
                        row.throughput = Some(outcome.throughput());
                        row.iters = outcome.iterations();
                        if let Some(dir) = out {
                            write_artifacts(&dir.join(point_dir_name(scheme, spec.param, value)), scheme, &sc, &outcome)?;
                        }
                    }
                    Err(e) if e.is_infeasible() => row.status = Status::Infeasible,
                    Err(e @ (Error::Io(_) | Error::Csv(_))) => return Err(e),
                    Err(_) => row.status = Status::Error,
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut rows = rows;
    mark_monotone(&mut rows, spec.param);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        tables::write_summary(&dir.join(tables::SUMMARY_FILE), &rows)?;
    }
    Ok(rows)
}

/// Fills the `monotone` column: each feasible point is compared with the
/// previous feasible point of the same scheme.
fn mark_monotone<F: Real>(rows: &mut [SummaryRow<F>], param: SweepParam) {
    let tol = F::lit(SWEEP_MONOTONE_TOL);
    let mut prev: Option<(String, F)> = None;
    for r in rows.iter_mut() {
        if prev.as_ref().is_some_and(|(sc, _)| *sc != r.scheme) {
            prev = None;
        }
        let Some(t) = r.throughput else { continue };
        if let Some((_, p)) = &prev {
            let ok = match param.expected_direction() {
                1 => t >= *p - tol,
                _ => t <= *p + tol,
            };
            r.monotone = if ok { "yes" } else { "no" }.to_owned();
        }
        prev = Some((r.scheme.clone(), t));
    }
}

/// Outer-iteration objective traces for each scheme, concatenated.
pub fn run_trace<F: Real>(s: &Scenario<F>, schemes: &[Scheme], cfg: &RunConfig<F>, out: Option<&Path>) -> Result<Vec<TraceRow<F>>> {
    let per_scheme = in_pool(cfg.workers, || {
        schemes
            .par_iter()
            .map(|&sc| run_scheme(s, sc, cfg).map(|o| o.trace_rows(sc)))
            .collect::<Result<Vec<_>>>()
    })??;
    let rows: Vec<TraceRow<F>> = per_scheme.into_iter().flatten().collect();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        tables::write_trace(&dir.join(tables::TRACE_FILE), &rows)?;
    }
    Ok(rows)
}
