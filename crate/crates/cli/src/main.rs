use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use wgn_core::feasible::{cosine_similarity_study, project_to_feasible, FEASIBILITY_TOL};
use wgn_core::io::{read_latent, write_latent};
use wgn_core::timing::measure_scaling;
use wgn_core::toy::{comparison_csv, run_each_mode, ScenarioConfig};
use wgn_core::verify::{run_suite, Suite};
use wgn_core::{BlockLayout, Error};

/// Version of every JSON document this tool prints or writes.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "wgn",
    version,
    about = "Project latents onto the white Gaussian noise feasible set"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a WGNL latent file and report what changed.
    Project {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 16)]
        block_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the JSON report; stdout when omitted.
        #[arg(long, value_name = "FILE")]
        report_path: Option<PathBuf>,
    },
    /// Run invariant suites and print measured values against thresholds.
    Verify {
        /// Suite to run; all suites when omitted.
        #[arg(long, value_parser = parse_suite)]
        suite: Option<Suite>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Cosine similarity between Gaussian samples and their projections.
    SampleStudy {
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 65536)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        block_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-sample cosines as CSV.
        #[arg(long, value_name = "FILE")]
        out_csv: Option<PathBuf>,
    },
    /// Run a spike-reward comparison scenario.
    Optimize {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Time the projection across latent sizes.
    Bench {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "16384,32768,65536,131072"
        )]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        block_size: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit 1 for bad input, 2 for numerical failures.
#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    // clap's own failure code is 2, which is reserved for numerical failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Project {
            input,
            output,
            block_size,
            seed,
            report_path,
        } => project(&input, &output, block_size, seed, report_path.as_deref()),
        Command::Verify { suite, seed, json } => verify(suite, seed, json),
        Command::SampleStudy {
            samples,
            n,
            block_size,
            seed,
            out_csv,
        } => sample_study(samples, n, block_size, seed, out_csv.as_deref()),
        Command::Optimize { scenario, out_dir } => optimize(&scenario, &out_dir),
        Command::Bench {
            n_list,
            block_size,
            repeats,
            seed,
            json,
        } => bench(&n_list, block_size, repeats, seed, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}")?;
    Ok(())
}

fn project(
    input: &Path,
    output: &Path,
    block_size: usize,
    seed: u64,
    report_path: Option<&Path>,
) -> CmdResult {
    let x = read_latent(input)?;
    let layout = BlockLayout::for_len(x.len(), block_size)?;
    let report = project_to_feasible(&x, &layout, seed)?;
    write_latent(output, &report.output)?;

    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "n": x.len(),
        "block_size": block_size,
        "seed": seed,
        "cosine_similarity": report.cosine_similarity,
        "distance": report.distance,
        "spectral_distance_sq": report.spectral_distance_sq,
        "max_block_l1_residual": report.max_block_l1_residual,
        "max_block_l2_residual": report.max_block_l2_residual,
        "blocks_perturbed": report.blocks_perturbed,
        "threshold_indices": report.threshold_indices,
    });
    match report_path {
        Some(path) => fs::write(
            path,
            serde_json::to_string_pretty(&doc).expect("json") + "\n",
        )?,
        None => print_json(&doc)?,
    }

    let cos = report
        .cosine_similarity
        .map_or_else(|| "undefined".to_string(), |c| format!("{c:.6}"));
    eprintln!(
        "projected N={} B={block_size}: distance {:.6e}, cosine {cos}, max residual {:.3e}",
        x.len(),
        report.distance,
        report.max_residual()
    );
    let limit = FEASIBILITY_TOL * block_size as f64;
    if report.max_residual() >= limit {
        return Err(Failure::Numerical(format!(
            "feasibility residual {:e} exceeds {limit:e}",
            report.max_residual()
        )));
    }
    Ok(())
}

fn verify(suite: Option<Suite>, seed: u64, json: bool) -> CmdResult {
    let suites = suite.map_or_else(|| Suite::ALL.to_vec(), |s| vec![s]);
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(run_suite(s, seed)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    if json {
        print_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "seed": seed,
            "passed": passed,
            "checks": checks,
        }))?;
    } else {
        let mut out = std::io::stdout().lock();
        for c in &checks {
            writeln!(out, "{c}")?;
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    eprintln!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} checks failed")));
    }
    Ok(())
}

fn sample_study(
    samples: usize,
    n: usize,
    block_size: usize,
    seed: u64,
    out_csv: Option<&Path>,
) -> CmdResult {
    let layout = BlockLayout::for_len(n, block_size)?;
    let study = cosine_similarity_study(samples, &layout, seed)?;
    if let Some(path) = out_csv {
        let mut csv = String::from("sample,cosine\n");
        for (i, c) in study.cosines.iter().enumerate() {
            csv.push_str(&format!("{i},{c}\n"));
        }
        fs::write(path, csv)?;
    }
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "study": study,
    }))?;
    eprintln!(
        "{} samples: min cosine {:.6}, mean {:.6}",
        study.sample_count, study.min_cos, study.mean_cos
    );
    Ok(())
}

fn optimize(scenario: &Path, out_dir: &Path) -> CmdResult {
    let text = fs::read_to_string(scenario)?;
    let cfg: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("invalid scenario {}: {e}", scenario.display())))?;
    let runs = run_each_mode(&cfg)?;
    fs::create_dir_all(out_dir)?;

    let mut finished = Vec::new();
    let mut failures = Vec::new();
    for (mode, run) in runs {
        let name = mode.name();
        match run {
            Ok(outcome) => {
                fs::write(
                    out_dir.join(format!("trajectory_{name}.csv")),
                    outcome.trajectory.to_csv(),
                )?;
                write_latent(
                    out_dir.join(format!("final_{name}.wgnl")),
                    &outcome.trajectory.final_latent,
                )?;
                eprintln!(
                    "{name}: {:.6} -> {:.6} in {:.3}s",
                    outcome.initial_value,
                    outcome.final_value,
                    outcome.wall_time.as_secs_f64()
                );
                finished.push(outcome);
            }
            Err(Error::Diverged {
                iteration,
                trajectory,
            }) => {
                fs::write(
                    out_dir.join(format!("trajectory_{name}.csv")),
                    trajectory.to_csv(),
                )?;
                write_latent(
                    out_dir.join(format!("final_{name}.wgnl")),
                    &trajectory.final_latent,
                )?;
                failures.push(format!("{name} diverged at iteration {iteration}"));
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    fs::write(out_dir.join("comparison.csv"), comparison_csv(&finished))?;
    if !failures.is_empty() {
        return Err(Failure::Numerical(failures.join("; ")));
    }
    Ok(())
}

fn bench(ns: &[usize], block_size: usize, repeats: usize, seed: u64, json: bool) -> CmdResult {
    let rows = measure_scaling(ns, block_size, repeats, seed)?;
    if json {
        return print_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "block_size": block_size,
            "rows": rows,
        }));
    }
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "n,repeats,median_projection_secs,median_fft_secs,fft_fraction,ratio_to_previous"
    )?;
    for r in &rows {
        let ratio = r
            .ratio_to_previous
            .map(|v| format!("{v:.3}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{:.6e},{:.6e},{:.3},{ratio}",
            r.n, r.repeats, r.median_projection_secs, r.median_fft_secs, r.fft_fraction
        )?;
    }
    Ok(())
}
