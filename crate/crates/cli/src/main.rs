mod config;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::{RunSpec, SpecArgs};
use eg_orthant::experiment::ExperimentResult;
use eg_orthant::problems::io::{write_image_csv, write_pgm};
use eg_orthant::problems::{build_tomography, make_phantom, ImageShape};
use eg_orthant::solvers::{default_initial_point, solve};
use eg_orthant::trace::{write_trace_csv, RunSummary};
use eg_orthant::verification::{run_battery, Fault, BATTERY_SIZE};
use eg_orthant::Objective;
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "eg-orthant",
    version,
    about = "Exponentiated-gradient solvers on a Poisson tomography problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Build one instance and run each requested method from a shared start.
    Solve {
        /// Flat key=value file; flags given on the command line win.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Run the oracle battery and print one JSON report per line.
    Verify {
        /// Break one gradient on purpose to exercise the failure path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Write the synthetic phantom as `phantom.pgm` and `phantom.csv`.
    Phantom {
        #[arg(long, default_value_t = 64)]
        n_side: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { config, spec } => {
            let base = match config {
                Some(path) => SpecArgs::from_file(&path),
                None => Ok(SpecArgs::default()),
            };
            base.and_then(|b| spec.over(b).resolve())
                .and_then(|s| cmd_solve(&s))
        }
        Command::Verify { inject_fault } => cmd_verify(inject_fault),
        Command::Phantom { n_side, out } => cmd_phantom(n_side, &out).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Returns `Ok(false)` when a method aborted or failed; every other output
/// is still written.
fn cmd_solve(spec: &RunSpec) -> Result<bool> {
    let e = &spec.experiment;
    std::fs::create_dir_all(&spec.out)
        .with_context(|| format!("creating {}", spec.out.display()))?;
    let (instance, x_true) = build_tomography(&e.problem)?;
    let x0 = default_initial_point(instance.dim(), e.problem.seed);
    let shape = ImageShape::square(e.problem.n_side);
    let scale = x_true.iter().copied().fold(0.0, f64::max);

    let mut traces = Vec::new();
    let mut runs = Vec::new();
    let mut all_ok = true;
    for &method in &e.methods {
        instance.a.reset_counts();
        let cfg = e.solver_config(method, &instance.b)?;
        let start = Instant::now();
        let result = solve(&cfg, &instance, &x0);
        let seconds = start.elapsed().as_secs_f64();
        match result {
            Ok(trace) => {
                let mut w = create(&spec.out.join(format!("trace_{method}.csv")))?;
                write_trace_csv(&mut w, &trace)?;
                w.flush()?;
                let mut w = create(&spec.out.join(format!("recon_{method}.pgm")))?;
                write_pgm(&mut w, shape, trace.final_point.as_slice(), scale)?;
                w.flush()?;
                all_ok &= !trace.terminal_status.is_abort();
                let mut summary = serde_json::to_value(RunSummary::from(&trace))?;
                summary["step"] = serde_json::to_value(cfg.step)?;
                summary["seconds"] = json!(seconds);
                runs.push(summary);
                traces.push(trace);
            }
            Err(err) => {
                all_ok = false;
                eprintln!("{method}: {err}");
                runs.push(
                    json!({ "method": method, "error": err.to_string(), "seconds": seconds }),
                );
            }
        }
    }

    let result = ExperimentResult {
        instance,
        x_true,
        x0,
        traces,
    };
    if !result.traces.is_empty() {
        let mut w = create(&spec.out.join("relative_values.csv"))?;
        result.write_relative_values_csv(&mut w)?;
        w.flush()?;
    }
    let summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
        "rows": result.instance.a.rows(),
        "cols": result.instance.a.cols(),
        "f_best": if result.traces.is_empty() { None } else { Some(result.f_best()) },
        "runs": runs,
    });
    let mut w = create(&spec.out.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;

    for s in &runs {
        eprintln!("{s}");
    }
    Ok(all_ok)
}

fn cmd_verify(inject_fault: bool) -> Result<bool> {
    let fault = if inject_fault {
        Fault::FlipGradientSign
    } else {
        Fault::None
    };
    let reports = run_battery(fault)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for r in &reports {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!("FAIL {}", serde_json::to_string(r)?);
    }
    eprintln!(
        "{} checks ({} documented), {} passed, {} failed",
        reports.len(),
        BATTERY_SIZE,
        reports.len() - failed.len(),
        failed.len()
    );
    Ok(failed.is_empty() && reports.len() == BATTERY_SIZE)
}

fn cmd_phantom(n_side: usize, out: &Path) -> Result<()> {
    let img = make_phantom(n_side)?;
    let shape = ImageShape::square(n_side);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = create(&out.join("phantom.pgm"))?;
    write_pgm(&mut w, shape, &img, 1.0)?;
    w.flush()?;
    let mut w = create(&out.join("phantom.csv"))?;
    write_image_csv(&mut w, shape, &img)?;
    w.flush()?;
    Ok(())
}
