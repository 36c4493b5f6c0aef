//! Command-line harness: schedule tables, experiment runs, figure
//! reproduction, and verification suites. Exit codes: 0 ok, 1 assertion or
//! computation failure, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use halpern::config::{ExperimentConfig, X0Spec};
use halpern::engine;
use halpern::error::{Error, Result};
use halpern::figures::{self, FigureId};
use halpern::schedules::{self, Rho, ScheduleKind};
use halpern::{affine, rng, verify};

#[derive(Parser)]
#[command(name = "halpern", version, about = "minimax-optimal anchored fixed-point schedules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a schedule table (n,beta,bound) as CSV.
    Schedule {
        /// m-opt | flat | bp | affine | fixed:b1,b2,...
        #[arg(long)]
        kind: String,
        #[arg(long)]
        rho: f64,
        #[arg(long = "n-max", default_value_t = 100)]
        n_max: usize,
        /// output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a key=value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "n-max")]
        n_max: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// directory prefixed to relative output paths
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a figure as CSV + SVG.
    Figure {
        /// fig1 | fig2 | fig3-left | fig3-right | fig4-left | fig4-right | all
        #[arg(long)]
        id: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a verification suite; emits JSONL, exit 1 on any failed check.
    Verify {
        /// schedules | transport | affine | analysis | engine | all
        #[arg(long)]
        suite: String,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "n-max", alias = "n")]
        n_max: Option<usize>,
        /// JSONL output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => atomic_write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn schedule_csv(kind: &ScheduleKind, rho: Rho, n_max: usize) -> Result<String> {
    let mut csv = String::from("n,beta,bound\n");
    match kind {
        ScheduleKind::MOpt => {
            for row in schedules::m_opt_schedule(rho, n_max) {
                csv.push_str(&format!("{},{:.16e},{:.16e}\n", row.n, row.beta, row.bound));
            }
        }
        ScheduleKind::FlatOpt => {
            for row in schedules::flat_schedule(rho, n_max) {
                csv.push_str(&format!("{},{:.16e},{:.16e}\n", row.n, row.beta, row.bound));
            }
        }
        ScheduleKind::BanachPicard => {
            let p = rho.get();
            for n in 0..=n_max {
                let beta = if n == 0 { 0.0 } else { 1.0 };
                csv.push_str(&format!("{n},{beta:.16e},{:.16e}\n", p.powi(n as i32)));
            }
        }
        ScheduleKind::FixedSequence(betas) => {
            for row in schedules::halpern_recursive_bounds(rho, betas)? {
                csv.push_str(&format!("{},{:.16e},{:.16e}\n", row.n, row.beta, row.bound));
            }
        }
        ScheduleKind::Affine => {
            let steps = affine::aff_schedule(rho.get(), n_max)?;
            let mut betas: Vec<f64> = Vec::new();
            let mut bound = 1.0 + rho.get();
            for (n, s) in steps.iter().enumerate() {
                match s {
                    affine::AffStep::Beta(b) => {
                        betas.push(*b);
                        bound = affine::affine_residual_bound(rho.get(), &betas, n);
                        csv.push_str(&format!("{n},{b:.16e},{bound:.16e}\n"));
                    }
                    affine::AffStep::Freeze => {
                        // residual is unchanged while frozen
                        csv.push_str(&format!("{n},,{bound:.16e}\n"));
                    }
                }
            }
        }
        ScheduleKind::Ada => {
            return Err(Error::Config(
                "ada is data-driven; use `run` with schedule=ada".into(),
            ))
        }
    }
    Ok(csv)
}

fn resolve(out: &Option<PathBuf>, path: &str) -> PathBuf {
    let p = PathBuf::from(path);
    match out {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn cmd_run(
    config_path: &Path,
    rho: Option<f64>,
    n_max: Option<usize>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let text = fs::read_to_string(config_path).map_err(|source| Error::Io {
        path: config_path.display().to_string(),
        source,
    })?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(v) = rho {
        cfg.rho = v;
    }
    if let Some(v) = n_max {
        cfg.n_max = v;
    }
    if let Some(v) = seed {
        cfg.seed = Some(v);
    }
    let op = cfg.build_operator()?;
    let x0 = cfg.build_x0(&op)?;
    let trace = match &cfg.schedule {
        ScheduleKind::Ada => engine::ada_halpern_run(&op, &x0, cfg.n_max)?,
        kind => {
            let steps = engine::steps_for_kind(kind, op.rho, cfg.n_max)?;
            engine::schedule_run(&op, &x0, &steps, cfg.n_max)?
        }
    };
    let mut header = String::new();
    if cfg.x0 == X0Spec::Random {
        header.push_str(&format!(
            "# rng={} seed={}\n",
            rng::ALGORITHM,
            cfg.seed.expect("seed validated at parse")
        ));
    }
    let trace_csv = format!("{header}{}", trace.to_csv());
    match &cfg.trace_csv {
        Some(path) => atomic_write(&resolve(out, path), &trace_csv)?,
        None => print!("{trace_csv}"),
    }
    if let Some(path) = &cfg.bounds_csv {
        let csv = bounds_csv(&cfg, &op.rho, &trace)?;
        atomic_write(&resolve(out, path), &csv)?;
    }
    if let Some(path) = &cfg.svg {
        let residuals: Vec<f64> = trace.steps.iter().map(|s| s.residual).collect();
        let svg = figures::residual_svg(&cfg.operator, &residuals);
        atomic_write(&resolve(out, path), &svg)?;
    }
    Ok(())
}

/// A-priori residual bounds when a scale is derivable: with a known fixed
/// point, delta0 = ||x0 - x*|| and kappa0 = (1 + rho) delta0 bounds the orbit
/// diameter for rho <= 1.
fn bounds_csv(
    cfg: &ExperimentConfig,
    rho: &Rho,
    trace: &engine::IterationTrace,
) -> Result<String> {
    let p = rho.get();
    let delta0 = trace.delta0.ok_or_else(|| {
        Error::Config("bounds_csv needs an operator with a known fixed point".into())
    })?;
    if p > 1.0 {
        return Err(Error::Config(
            "a-priori scale kappa0 = (1+rho) delta0 requires rho <= 1".into(),
        ));
    }
    let kappa0 = (1.0 + p) * delta0;
    let mut csv = format!("# delta0={delta0:.16e} kappa0=(1+rho)*delta0={kappa0:.16e}\n");
    csv.push_str("n,bound\n");
    match &cfg.schedule {
        ScheduleKind::FlatOpt => {
            let sched = schedules::flat_schedule(*rho, cfg.n_max);
            let rows =
                schedules::flat_general_bounds(*rho, &schedules::betas_of(&sched), delta0)?;
            for row in rows {
                csv.push_str(&format!("{},{:.16e}\n", row.n, delta0 * row.r_flat));
            }
        }
        ScheduleKind::Ada => {
            for s in &trace.steps {
                if let Some(b) = s.bound {
                    csv.push_str(&format!("{},{:.16e}\n", s.n, s.kappa_hat * b));
                }
            }
        }
        ScheduleKind::MOpt => {
            for row in schedules::m_opt_schedule(*rho, cfg.n_max) {
                csv.push_str(&format!("{},{:.16e}\n", row.n, kappa0 * row.bound));
            }
        }
        ScheduleKind::BanachPicard => {
            for n in 0..=cfg.n_max {
                csv.push_str(&format!("{n},{:.16e}\n", kappa0 * p.powi(n as i32)));
            }
        }
        ScheduleKind::FixedSequence(betas) => {
            for row in schedules::halpern_recursive_bounds(*rho, betas)? {
                csv.push_str(&format!("{},{:.16e}\n", row.n, kappa0 * row.bound));
            }
        }
        ScheduleKind::Affine => {
            return Err(Error::Config(
                "bounds_csv is not defined for the affine schedule".into(),
            ))
        }
    }
    Ok(csv)
}

fn cmd_figure(id: &str, out: &Path, jobs: usize) -> Result<()> {
    let ids: Vec<FigureId> = if id == "all" {
        FigureId::ALL.to_vec()
    } else {
        vec![FigureId::parse(id)?]
    };
    let jobs = jobs.max(1);
    let results: Vec<(FigureId, Result<figures::FigureOutput>)> = if jobs == 1 || ids.len() == 1 {
        ids.iter().map(|&i| (i, figures::render(i))).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ids
                .iter()
                .map(|&i| scope.spawn(move || (i, figures::render(i))))
                .collect();
            handles.into_iter().map(|h| h.join().expect("figure job")).collect()
        })
    };
    for (fid, result) in results {
        let rendered = result?;
        atomic_write(&out.join(format!("{}.csv", fid.name())), &rendered.csv)?;
        atomic_write(&out.join(format!("{}.svg", fid.name())), &rendered.svg)?;
    }
    Ok(())
}

fn cmd_verify(
    suite: &str,
    rho: Option<f64>,
    n_max: Option<usize>,
    out: &Option<PathBuf>,
) -> Result<bool> {
    let records = match (suite, rho) {
        ("transport", Some(r)) => verify::transport_at(r, n_max.unwrap_or(10))?,
        _ => verify::run_suite(suite)?,
    };
    emit(out, &verify::to_jsonl(&records))?;
    let failed = records.iter().filter(|r| !r.pass).count();
    eprintln!(
        "verify {suite}: {} checks, {failed} failed",
        records.len()
    );
    Ok(failed == 0)
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidRho(_)
            | Error::RhoOutOfRange { .. }
            | Error::BetaOutOfRange { .. }
            | Error::BetaStartNonZero(_)
            | Error::BetaNotMonotone { .. }
            | Error::BadDimension { .. }
    )
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Schedule {
            kind,
            rho,
            n_max,
            out,
        } => {
            let kind = ScheduleKind::parse(&kind)?;
            let csv = schedule_csv(&kind, Rho::new(rho)?, n_max)?;
            emit(&out, &csv)?;
            Ok(true)
        }
        Cmd::Run {
            config,
            rho,
            n_max,
            seed,
            out,
        } => {
            cmd_run(&config, rho, n_max, seed, &out)?;
            Ok(true)
        }
        Cmd::Figure { id, out, jobs } => {
            cmd_figure(&id, &out, jobs)?;
            Ok(true)
        }
        Cmd::Verify {
            suite,
            rho,
            n_max,
            out,
        } => cmd_verify(&suite, rho, n_max, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
