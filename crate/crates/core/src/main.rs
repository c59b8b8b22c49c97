use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use altproj::scenario::{self, Overrides, VerifyOptions};
use altproj::ConvexSet;

/// Alternating projections between two convex sets.
#[derive(Debug, Parser)]
#[command(name = "altproj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file (or a builtin by name) and write its trace and report.
    Run {
        /// Path to a JSON scenario, or the name of a builtin.
        config: String,
        /// Output directory.
        #[arg(long, env = "ALTPROJ_OUT")]
        out: PathBuf,
        /// Seed for a random start point.
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on projection pairs.
        #[arg(long)]
        max_pairs: Option<usize>,
    },
    /// List the builtin scenarios and the result each exercises.
    Catalog {
        /// Also write each builtin as `<name>.json` into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run the property suites and every builtin; exit 0 iff all pass.
    Verify {
        /// Reduced sample counts.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write each builtin's outputs and `verify.report.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            max_pairs,
        } => {
            let overrides = Overrides { seed, max_pairs };
            match scenario::run(&config, &out, overrides) {
                Ok(outcome) => {
                    let r = &outcome.report;
                    println!(
                        "{}: {} after {} pairs ({}), gap {:e} ± {:e}",
                        r.name,
                        scenario::class_name(r.verdict.class),
                        r.pairs,
                        serde_json::to_value(r.stop_reason)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default(),
                        r.gap_limit.value,
                        r.gap_limit.uncertainty,
                    );
                    if let Some(c) = r.first_failure() {
                        eprintln!(
                            "expectation `{}` failed: expected {}, observed {}",
                            c.name, c.expected, c.observed
                        );
                    }
                    eprintln!("wall time {:.3} s", outcome.elapsed.as_secs_f64());
                    ExitCode::from(outcome.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Catalog { export } => {
            for entry in scenario::catalog() {
                println!("{:<22} {}", entry.name, entry.result);
            }
            if let Some(dir) = export {
                if let Err(e) = std::fs::create_dir_all(&dir) {
                    eprintln!("error: {}: {e}", dir.display());
                    return ExitCode::from(1);
                }
                for entry in scenario::catalog() {
                    let path = dir.join(format!("{}.json", entry.name));
                    if let Err(e) = std::fs::write(&path, entry.config().to_json() + "\n") {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::Verify { quick, seed, out } => {
            let start = Instant::now();
            let opts = VerifyOptions { quick, seed };
            let project = |set: &ConvexSet, x: &altproj::Point| set.project(x);
            let report = match scenario::verify(&opts, &project, out.as_deref()) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            print!("{}", report.table());
            if let Some(dir) = &out {
                let path = dir.join("verify.report.json");
                if let Err(e) = std::fs::write(&path, report.to_json() + "\n") {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            if let Some(row) = report.first_failure() {
                eprintln!("first failure: {} / {}: {}", row.result, row.check, {
                    let r = row
                        .residual
                        .map(|r| format!("residual {r:e}"))
                        .unwrap_or_default();
                    format!("{r} {}", row.detail).trim().to_string()
                });
            }
            eprintln!("wall time {:.1} s", start.elapsed().as_secs_f64());
            ExitCode::from(report.exit_code())
        }
    }
}
