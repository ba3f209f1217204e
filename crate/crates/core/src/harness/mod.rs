//! Batch runs and their on-disk artifacts.

mod sweep;
pub mod tables;

pub use sweep::{apply_param, run_sweep, run_trace, SweepParam, SweepSpec, SWEEP_MONOTONE_TOL};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::benchmarks::{straight_fly, successive_hover_fly, upper_bound, HoverBound, Scheme, DEFAULT_GRID_STEP_M};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::planner::{self, evaluate_plan, ConvergenceTrace, Plan, PlannerConfig};
use crate::scenario::Scenario;

use tables::{
    Status, SummaryRow, TraceRow, ALLOCATION_FILE, HOVER_FILE, SUMMARY_FILE, TRACE_FILE, TRAJECTORY_FILE,
};

pub const CHECKSUM_FILE: &str = "SHA256SUMS";
/// Re-evaluated throughput must match the stored summary this closely.
pub const ROUND_TRIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig<F> {
    pub planner: PlannerConfig<F>,
    pub grid_step: F,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl<F: Real> Default for RunConfig<F> {
    fn default() -> Self {
        Self {
            planner: PlannerConfig::default(),
            grid_step: F::lit(DEFAULT_GRID_STEP_M),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<F> {
    Plan {
        plan: Plan<F>,
        /// Present for schemes driven by the alternating planner.
        trace: Option<ConvergenceTrace<F>>,
    },
    Hover(HoverBound<F>),
}

impl<F: Real> Outcome<F> {
    pub fn throughput(&self) -> F {
        match self {
            Outcome::Plan { plan, .. } => plan.avg_throughput,
            Outcome::Hover(h) => h.throughput,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            Outcome::Plan { trace: Some(t), .. } => t.iterations,
            _ => 1,
        }
    }

    pub fn plan(&self) -> Option<&Plan<F>> {
        match self {
            Outcome::Plan { plan, .. } => Some(plan),
            Outcome::Hover(_) => None,
        }
    }

    /// Outer objective per iteration; one entry for the one-shot schemes.
    pub fn outer_trace(&self) -> Vec<F> {
        match self {
            Outcome::Plan { trace: Some(t), .. } => t.outer.clone(),
            _ => vec![self.throughput()],
        }
    }

    pub fn trace_rows(&self, scheme: Scheme) -> Vec<TraceRow<F>> {
        self.outer_trace()
            .into_iter()
            .enumerate()
            .map(|(i, objective)| TraceRow {
                scheme: scheme.name().to_owned(),
                outer_iter: i + 1,
                objective,
            })
            .collect()
    }
}

pub fn run_scheme<F: Real>(s: &Scenario<F>, scheme: Scheme, cfg: &RunConfig<F>) -> Result<Outcome<F>> {
    if let Some(mode_constraint) = scheme.mode_constraint() {
        let pc = PlannerConfig {
            mode_constraint,
            ..cfg.planner
        };
        let (plan, trace) = planner::solve(s, &pc)?;
        return Ok(Outcome::Plan {
            plan,
            trace: Some(trace),
        });
    }
    match scheme {
        Scheme::StraightFly => Ok(Outcome::Plan {
            plan: straight_fly(s)?,
            trace: None,
        }),
        Scheme::SuccessiveHoverFly => Ok(Outcome::Plan {
            plan: successive_hover_fly(s)?,
            trace: None,
        }),
        Scheme::UpperBound => Ok(Outcome::Hover(upper_bound(s, cfg.grid_step)?)),
        _ => unreachable!("planner schemes handled above"),
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or inline on the global
/// pool when `workers` is `None`.
pub fn in_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::config("workers", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Files written for one run, relative to `dir`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

pub fn summary_row<F: Real>(scheme: Scheme, s: &Scenario<F>, outcome: &Outcome<F>) -> SummaryRow<F> {
    SummaryRow {
        scheme: scheme.name().to_owned(),
        param: SweepParam::MissionT.name().to_owned(),
        value: s.uav().mission_t,
        throughput: Some(outcome.throughput()),
        iters: outcome.iterations(),
        status: Status::Ok,
        monotone: String::new(),
    }
}

/// Writes the tables for one outcome plus a checksum manifest.
pub fn write_artifacts<F: Real>(dir: &Path, scheme: Scheme, s: &Scenario<F>, outcome: &Outcome<F>) -> Result<RunArtifacts> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match outcome {
        Outcome::Plan { plan, .. } => {
            tables::write_trajectory(&dir.join(TRAJECTORY_FILE), &plan.trajectory, s)?;
            tables::write_allocations(&dir.join(ALLOCATION_FILE), &plan.allocations, s.num_sites())?;
            files.extend([TRAJECTORY_FILE, ALLOCATION_FILE]);
        }
        Outcome::Hover(h) => {
            tables::write_hover(&dir.join(HOVER_FILE), h.point, &h.allocation)?;
            files.push(HOVER_FILE);
        }
    }
    tables::write_trace(&dir.join(TRACE_FILE), &outcome.trace_rows(scheme))?;
    tables::write_summary(&dir.join(SUMMARY_FILE), &[summary_row(scheme, s, outcome)])?;
    files.extend([TRACE_FILE, SUMMARY_FILE]);
    let files: Vec<String> = files.into_iter().map(str::to_owned).collect();
    write_checksums(dir, &files)?;
    Ok(RunArtifacts {
        dir: dir.to_path_buf(),
        files,
    })
}

fn sha256_hex(path: &Path) -> Result<String> {
    let digest = Sha256::digest(fs::read(path)?);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    Ok(out)
}

pub fn write_checksums(dir: &Path, files: &[String]) -> Result<()> {
    let mut text = String::new();
    for f in files {
        let _ = writeln!(text, "{}  {f}", sha256_hex(&dir.join(f))?);
    }
    fs::write(dir.join(CHECKSUM_FILE), text)?;
    Ok(())
}

/// Checks every file listed in the manifest against its recorded digest.
pub fn verify_checksums(dir: &Path) -> Result<()> {
    let manifest = dir.join(CHECKSUM_FILE);
    let text = fs::read_to_string(&manifest)?;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (digest, name) = line
            .split_once("  ")
            .ok_or_else(|| Error::config(format!("{}:{}", manifest.display(), i + 1), "malformed line"))?;
        if sha256_hex(&dir.join(name))? != digest {
            return Err(Error::config(dir.join(name).display().to_string(), "checksum mismatch"));
        }
    }
    Ok(())
}

/// Re-reads a plan directory, re-evaluates it against `s`, and checks it
/// against the stored summary.
pub fn load_plan<F: Real>(dir: &Path, s: &Scenario<F>) -> Result<Plan<F>> {
    verify_checksums(dir)?;
    let summary = tables::read_summary::<F>(&dir.join(SUMMARY_FILE))?;
    let row = summary
        .first()
        .ok_or_else(|| Error::config(dir.join(SUMMARY_FILE).display().to_string(), "empty summary"))?;
    let scheme: Scheme = row.scheme.parse()?;
    if scheme == Scheme::UpperBound {
        return Err(Error::config(dir.display().to_string(), "hover-bound runs carry no plan"));
    }
    let traj = tables::read_trajectory(&dir.join(TRAJECTORY_FILE))?;
    let allocs = tables::read_allocations(&dir.join(ALLOCATION_FILE), s.num_sites())?;
    let plan = Plan::new(scheme, traj, allocs, s)?;
    let report = evaluate_plan(&plan, s)?;
    let stored = row.throughput.unwrap_or(F::nan());
    if !((report.objective - stored).abs() <= F::lit(ROUND_TRIP_TOL)) {
        return Err(Error::Internal(format!(
            "{}: re-evaluated throughput {} differs from summary {}",
            dir.display(),
            report.objective,
            stored
        )));
    }
    Ok(plan)
}

/// Plan or hover run, then artifacts. The one-stop entry behind `plan`.
pub fn run_plan<F: Real>(s: &Scenario<F>, scheme: Scheme, cfg: &RunConfig<F>, out: &Path) -> Result<(Outcome<F>, RunArtifacts)> {
    let outcome = in_pool(cfg.workers, || run_scheme(s, scheme, cfg))??;
    let artifacts = write_artifacts(out, scheme, s, &outcome)?;
    Ok((outcome, artifacts))
}
