//! `radcomp`: run a scenario file and write `report.json` plus CSV curves.
//!
//! Exit status: 0 on success, 2 when a criterion check is inconclusive,
//! 1 on any error.

mod scenario;
mod tasks;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use radcomp::Verdict;
use serde_json::json;

use scenario::{Command, Scenario, TASK_NAMES};
use tasks::{Settings, TaskContext, TaskOutput, VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "radcomp",
    version,
    about = "Radial-curvature comparison scenarios"
)]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (overrides the scenario's `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance of every ODE solve.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Solve horizon for warping functions and surfaces.
    #[arg(long)]
    horizon: Option<f64>,
    /// Comma-separated subset of tasks to run.
    #[arg(long, value_delimiter = ',')]
    tasks: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(args: &Args) -> Result<u8> {
    if !(1e-14..=1e-3).contains(&args.tol) {
        bail!("--tol must lie in [1e-14, 1e-3] (got {})", args.tol);
    }
    if let Some(h) = args.horizon {
        if !(h > 0.0 && h.is_finite()) {
            bail!("--horizon must be positive (got {h})");
        }
    }
    if let Some(list) = &args.tasks {
        for t in list {
            if !TASK_NAMES.contains(&t.as_str()) {
                bail!(
                    "unknown task `{t}` in --tasks (expected one of {})",
                    TASK_NAMES.join(", ")
                );
            }
        }
    }

    let scenario = Scenario::load(&args.scenario)?;
    let out_dir = output_dir(args, &scenario);
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    let selected: Vec<(usize, &Command)> = scenario
        .commands
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            args.tasks
                .as_ref()
                .is_none_or(|list| list.iter().any(|t| t == c.name()))
        })
        .collect();

    let ctx = TaskContext {
        scenario: &scenario,
        out_dir: &out_dir,
        settings: Settings {
            rel_tol: args.tol,
            horizon: args.horizon,
        },
    };
    // Tasks are independent and write disjoint files.
    let results: Vec<Result<TaskOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&(i, c)| {
                let ctx = &ctx;
                s.spawn(move || ctx.run(i, c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(anyhow::anyhow!("task panicked")))
            })
            .collect()
    });

    let mut entries = Vec::with_capacity(results.len());
    let mut failure = None;
    let mut inconclusive = false;
    for ((i, c), r) in selected.iter().zip(results) {
        match r {
            Ok(out) => {
                inconclusive |= out.verdict == Some(Verdict::Inconclusive);
                entries.push(serde_json::to_value(&out)?);
            }
            Err(e) => {
                let msg = format!("commands[{i}] ({}): {e:#}", c.name());
                entries.push(json!({ "index": i, "task": c.name(), "error": msg }));
                failure.get_or_insert(msg);
            }
        }
    }
    let status = match (&failure, inconclusive) {
        (Some(_), _) => 1,
        (None, true) => 2,
        (None, false) => 0,
    };
    let report = json!({
        "scenario": scenario.name,
        "toolkit": format!("radcomp {VERSION}"),
        "n": scenario.n,
        "tasks": entries,
        "exit_status": status,
    });
    let path = out_dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;

    if let Some(msg) = failure {
        bail!(msg);
    }
    Ok(status)
}

fn output_dir(args: &Args, scenario: &Scenario) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    let base = args.scenario.parent().unwrap_or(Path::new("."));
    match &scenario.output_dir {
        Some(dir) if dir.is_absolute() => dir.clone(),
        Some(dir) => base.join(dir),
        None => base.join("out").join(&scenario.name),
    }
}
