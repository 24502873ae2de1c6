//! Command-line driver for clock-model quenches, single-gate timing and the
//! invariant suite.
//!
//! Exit codes: 0 success, 1 validation error, 2 numeric failure, 3 capacity
//! error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod quench;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qrtebd::tebd::Scheme;

use crate::bench::{run_gate_bench, slopes_in_d, write_bench_csv, BenchConfig, DEFAULT_MEMORY_BUDGET};
use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::verify::{run_verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "qrtebd", version, about = "TEBD quenches and gate benchmarks for the quantum clock model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Global quench from the Z = 1 product state.
    Quench(QuenchArgs),
    /// Time a single two-site update over a grid of (d, χ, scheme).
    BenchGate(BenchArgs),
    /// Run the invariant suite and print a JSON summary.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct QuenchArgs {
    /// JSON run configuration; built-in defaults are used without it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Truncation scheme: svd, eig, qr or qr_cbe.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Maximal bond dimension.
    #[arg(long)]
    chi_max: Option<usize>,
    /// Trotter time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of clock states.
    #[arg(long)]
    d: Option<usize>,
    /// Transverse coupling.
    #[arg(long)]
    g: Option<f64>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![5, 8, 11, 14, 17, 20])]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![64])]
    chi: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "svd,qr,qr_cbe")]
    scheme: Vec<Scheme>,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Upper bound on the working set of one gate, in MiB.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET >> 20)]
    memory_budget_mib: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for bench.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Disable renormalization after truncation; the norm-drift check must fail.
    #[arg(long)]
    inject_fault: bool,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: qrtebd::Error| e.to_string())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Quench(a) => quench(a),
        Command::BenchGate(a) => bench_gate(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn quench(a: QuenchArgs) -> CliResult<()> {
    let mut config = match &a.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        scheme: a.scheme,
        chi_max: a.chi_max,
        dt: a.dt,
        t_max: a.t_max,
        d: a.d,
        g: a.g,
        out: a.out,
    });
    config.validate()?;
    let out = quench::run_quench(&config)?;
    println!(
        "{} steps written to {} in {:.2} s",
        out.steps,
        out.dir.display(),
        out.wall_s
    );
    Ok(())
}

fn bench_gate(a: BenchArgs) -> CliResult<()> {
    let cfg = BenchConfig {
        d_list: a.d,
        chi_list: a.chi,
        schemes: a.scheme,
        repetitions: a.repetitions,
        memory_budget: a.memory_budget_mib.saturating_mul(1 << 20),
        seed: a.seed,
    };
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&format!("cannot create {}", a.out.display()), e))?;
    let records = run_gate_bench(&cfg)?;
    for r in &records {
        println!("d={:<3} chi={:<5} {:<7} mean {:.3e} s  std {:.1e} s", r.d, r.chi, r.scheme, r.mean_s, r.std_s);
    }
    for (chi, scheme, slope) in slopes_in_d(&records) {
        println!("slope in d: chi={chi} {scheme}: {slope:.3}");
    }
    write_bench_csv(&a.out.join("bench.csv"), &records)
}

fn verify(a: VerifyArgs) -> CliResult<()> {
    let report = run_verify(VerifyOptions {
        skip_renormalization: a.inject_fault,
    })?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if let Some(path) = &a.out {
        std::fs::write(path, json + "\n").map_err(|e| CliError::io(&path.display().to_string(), e))?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Numeric(format!("verification failed: {}", failed.join(", "))))
    }
}
