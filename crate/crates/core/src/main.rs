use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uavic::harness::tables::Status;
use uavic::harness::{self, RunConfig, SweepParam, SweepSpec};
use uavic::scenario::{check_feasibility, parse_scenario, DEFAULT_SCENARIO_TOML};
use uavic::{Error, Scenario, Scheme};

/// Trajectory and spectrum-sharing planner for a cellular-connected UAV.
#[derive(Parser)]
#[command(name = "uavic", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scheme and write its tables.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "proposed")]
        scheme: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run schemes over a range of mission durations or GU requirements.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `mission_T` or `gamma_all_sites`.
        #[arg(long, default_value = "mission_T")]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "proposed")]
        scheme: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write outer-iteration objective traces for several schemes.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "proposed,egoistic,altruistic")]
        scheme: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report whether the scenario admits a plan.
    Check {
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Print the built-in scenario (or write it to --out).
    DumpDefaultScenario {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file; omit or pass `default` for the built-in one.
    #[arg(long)]
    scenario: Option<String>,
    /// Hover-search grid spacing in meters.
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    outer_max_iters: Option<usize>,
    #[arg(long)]
    inner_max_iters: Option<usize>,
    /// Relative-change stopping tolerance for both loops.
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig<f64>, Error> {
        let mut cfg = RunConfig::default();
        if let Some(g) = self.grid_step {
            cfg.grid_step = g;
        }
        if let Some(n) = self.outer_max_iters {
            if n == 0 {
                return Err(Error::config("outer-max-iters", "must be at least 1"));
            }
            cfg.planner.outer_max_iters = n;
        }
        if let Some(n) = self.inner_max_iters {
            cfg.planner.sca.max_iters = n;
        }
        if let Some(t) = self.rel_tol {
            if !(t > 0.0) {
                return Err(Error::config("rel-tol", "must be positive"));
            }
            cfg.planner.outer_rel_tol = t;
            cfg.planner.sca.rel_tol = t;
        }
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(Error::config("workers", "must be at least 1"));
            }
        }
        cfg.workers = self.workers;
        Ok(cfg)
    }
}

fn load_scenario(arg: Option<&str>) -> Result<Scenario<f64>, Error> {
    match arg {
        None | Some("default") => parse_scenario(DEFAULT_SCENARIO_TOML),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{path}: {e}")))?;
            parse_scenario(&text).map_err(|e| match e {
                Error::Config { path: field, msg } => Error::config(format!("{path}: {field}"), msg),
                other => other,
            })
        }
    }
}

fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>, Error> {
    names.iter().map(|n| n.parse()).collect()
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_infeasible() => 2,
        Error::Io(_) => 3,
        Error::Csv(c) if c.is_io_error() => 3,
        _ => 1,
    }
}

fn run(cmd: Cmd) -> Result<u8, Error> {
    match cmd {
        Cmd::Plan { common, scheme, out } => {
            let s = load_scenario(common.scenario.as_deref())?;
            let cfg = common.config()?;
            let scheme: Scheme = scheme.parse()?;
            let (outcome, art) = harness::run_plan(&s, scheme, &cfg, &out)?;
            println!(
                "scheme={} avg_throughput_bpshz={} iterations={} out={}",
                scheme,
                outcome.throughput(),
                outcome.iterations(),
                art.dir.display()
            );
            Ok(0)
        }
        Cmd::Sweep {
            common,
            param,
            values,
            scheme,
            out,
        } => {
            let s = load_scenario(common.scenario.as_deref())?;
            let cfg = common.config()?;
            let param: SweepParam = param.parse()?;
            let spec = SweepSpec::new(param, values, parse_schemes(&scheme)?)?;
            let rows = harness::run_sweep(&s, &spec, &cfg, Some(&out))?;
            for r in &rows {
                let tp = r.throughput.map_or_else(|| r.status.as_str().to_uppercase(), |t| t.to_string());
                println!("{} {}={} throughput_bpshz={} iters={} monotone={}", r.scheme, r.param, r.value, tp, r.iters, r.monotone);
            }
            Ok(if rows.iter().any(|r| r.status == Status::Error) { 1 } else { 0 })
        }
        Cmd::Trace { common, scheme, out } => {
            let s = load_scenario(common.scenario.as_deref())?;
            let cfg = common.config()?;
            let rows = harness::run_trace(&s, &parse_schemes(&scheme)?, &cfg, Some(&out))?;
            for r in &rows {
                println!("{} {} {}", r.scheme, r.outer_iter, r.objective);
            }
            Ok(0)
        }
        Cmd::Check { scenario } => {
            let s = load_scenario(scenario.as_deref())?;
            let rep = check_feasibility(&s);
            println!("reach_ok={} gamma_max_bpshz={}", rep.reach_ok, rep.gamma_max);
            for (k, r) in rep.ic_rate_at_max.iter().enumerate() {
                println!("site {}: ic_rate_at_Q={} gamma={}", k + 1, r, s.site(k).min_gu_rate);
            }
            match rep.describe_failure(&s) {
                None => {
                    println!("feasible");
                    Ok(0)
                }
                Some(why) => Err(Error::InfeasibleScenario(why)),
            }
        }
        Cmd::DumpDefaultScenario { out } => {
            match out {
                Some(p) => write_file(&p, DEFAULT_SCENARIO_TOML)?,
                None => print!("{DEFAULT_SCENARIO_TOML}"),
            }
            Ok(0)
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(p, text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the generic failure code; 2 means infeasible here
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
