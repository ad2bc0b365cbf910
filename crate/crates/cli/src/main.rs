//! Batch front-end: JSON job descriptions in, JSON/CSV/SVG reports out.
//!
//! Exit codes: 0 success, 1 configuration or internal error, 2 hypothesis
//! failure (operator not normal or not globally elliptic).

mod job;
mod output;
mod pipeline;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shubin_spectra::analysis::{classify_decay, ExpansionCoefficients, KernelPolicy};
use shubin_spectra::weights::WeightSequence;

use job::JobConfig;
use pipeline::Pipeline;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Internal(String),
    Hypothesis(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError::Internal(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Internal(_) => 1,
            CliError::Hypothesis(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
            CliError::Hypothesis(m) => write!(f, "hypothesis failure: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "shubin-spectra",
    version,
    about = "Spectral analysis of polynomial-coefficient differential operators in a truncated Hermite basis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a job file.
    Run {
        job: PathBuf,
        /// Override the job's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the weight-sequence conditions only.
    CheckWeights {
        job: Option<PathBuf>,
        /// Standalone weight-sequence JSON (instead of a job file).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Check global ellipticity and normality of the operator only.
    CheckOperator { job: PathBuf },
    /// Assemble, diagonalize, and fit the eigenvalue growth.
    Spectrum {
        job: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify coefficient decay (from a job, or from a coefficient CSV).
    Classify {
        job: Option<PathBuf>,
        /// CSV of expansion coefficients: rows `j,re,im` with j from 1.
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Weight-sequence JSON, required with --coeffs.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Ambient dimension, required with --coeffs.
        #[arg(long)]
        dim: Option<usize>,
        /// Comma-separated lambda grid (defaults to 2^-4 .. 2^4).
        #[arg(long, value_delimiter = ',')]
        lambda_grid: Option<Vec<f64>>,
    },
    /// Compute the iterate and seminorm norm tables for the test function.
    Norms { job: PathBuf },
    /// Solve P u = f by eigen-division and classify both sides.
    Solve {
        job: PathBuf,
        /// Kernel policy: reject | project.
        #[arg(long, default_value = "reject")]
        policy: String,
    },
}

fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("SHUBIN_SPECTRA_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn cmd_run(job_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let job = JobConfig::from_path(job_path)?;
    let out_dir = out
        .or_else(|| job.output_dir.clone().map(PathBuf::from))
        .ok_or_else(|| {
            CliError::config("field `output_dir`: missing (or pass --out)".to_string())
        })?;
    let pipeline = Pipeline::new(job)?;
    let failed = pipeline.run(&out_dir)?;
    if failed {
        return Err(CliError::Hypothesis(format!(
            "see {}/report.json",
            out_dir.display()
        )));
    }
    println!(
        "report written to {}",
        out_dir.join("report.json").display()
    );
    Ok(())
}

fn cmd_check_weights(
    job_path: Option<PathBuf>,
    weights_path: Option<PathBuf>,
) -> Result<(), CliError> {
    let w = match (&job_path, &weights_path) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            WeightSequence::from_json_str(&text)
                .map_err(|e| CliError::config(format!("field `weights`: {e}")))?
        }
        (Some(path), None) => JobConfig::from_path(path)?.weight_sequence()?,
        (None, None) => return Err(CliError::config("pass a job file or --weights".to_string())),
    };
    let rep = shubin_spectra::weights::check_conditions(&w);
    println!("(M.1) {}", if rep.m1_ok { "ok" } else { "violated" });
    if let Some(p) = rep.m1_first_violation {
        println!("  first violation at p = {p}");
    }
    match rep.m2prime {
        Some(wit) if rep.m2prime_ok => {
            println!("(M.2)' ok with A = {:.6}, H = {:.6}", wit.a, wit.h)
        }
        _ => println!("(M.2)' not certified"),
    }
    match rep.m2 {
        Some(wit) if rep.m2_ok => println!("(M.2) ok with A = {:.6}, H = {:.6}", wit.a, wit.h),
        _ => println!("(M.2) not certified"),
    }
    match rep.roumieu {
        Some(wit) if rep.assumption_roumieu => println!(
            "growth assumption (Roumieu) ok with l = {:.6}, C_l = {:.6}",
            wit.l, wit.c_l
        ),
        _ => println!("growth assumption (Roumieu) fails on the computed range"),
    }
    println!(
        "growth assumption (Beurling trend, finite range) {}",
        if rep.assumption_beurling {
            "ok"
        } else {
            "fails"
        }
    );
    let section = report::WeightsSection::from_report(&rep);
    println!(
        "{}",
        serde_json::to_string_pretty(&section).expect("serializable")
    );
    Ok(())
}

fn cmd_check_operator(job_path: &Path) -> Result<(), CliError> {
    let job = JobConfig::from_path(job_path)?;
    let pipeline = Pipeline::new(job)?;
    let mut rep = report::Report {
        schema_version: report::SCHEMA_VERSION,
        seed: pipeline.job.seed,
        job: report::JobEcho {
            operator: pipeline.job.operator.clone(),
            weights: pipeline.job.weights.clone(),
            truncation: pipeline.job.truncation.clone(),
            quad_order: pipeline.job.quad_order(),
            test_function: pipeline.job.test_function.clone(),
            lambda_grid: pipeline.job.lambda_grid.clone(),
            h_grid: pipeline.job.h_grid.clone(),
            caps: pipeline.job.caps.clone(),
            checks: pipeline.job.checks.clone(),
        },
        weights: None,
        ellipticity: None,
        normality: None,
        hypothesis_failure: None,
        spectrum: None,
        weyl: None,
        classify: None,
        norms: None,
        bounds: None,
        solve: None,
        notes: Vec::new(),
    };
    let outcome = pipeline.hypothesis_checks(&mut rep);
    println!(
        "{}",
        serde_json::json!({
            "ellipticity": rep.ellipticity,
            "normality": rep.normality,
        })
    );
    if let Err(which) = outcome {
        return Err(CliError::Hypothesis(which));
    }
    println!("operator hypotheses hold");
    Ok(())
}

fn cmd_spectrum(job_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let job = JobConfig::from_path(job_path)?;
    let out_dir = out.or_else(|| job.output_dir.clone().map(PathBuf::from));
    let pipeline = Pipeline::new(job)?;
    let stage = pipeline.spectrum()?;
    let section = report::SpectrumSection::from_decomposition(&stage.decomposition);
    println!(
        "{}",
        serde_json::json!({
            "spectrum": section,
            "weyl": stage.weyl,
        })
    );
    if let Some(dir) = out_dir {
        output::write_atomic(
            &dir,
            "spectrum.csv",
            &output::spectrum_csv(&stage.decomposition),
        )?;
        println!("spectrum written to {}", dir.join("spectrum.csv").display());
    }
    Ok(())
}

fn cmd_classify(
    job_path: Option<PathBuf>,
    coeffs: Option<PathBuf>,
    weights: Option<PathBuf>,
    dim: Option<usize>,
    lambda_grid: Option<Vec<f64>>,
) -> Result<(), CliError> {
    let fit = if let Some(coeffs_path) = coeffs {
        let weights_path =
            weights.ok_or_else(|| CliError::config("--coeffs requires --weights".to_string()))?;
        let dim = dim.ok_or_else(|| CliError::config("--coeffs requires --dim".to_string()))?;
        let text = std::fs::read_to_string(&weights_path).map_err(|e| {
            CliError::config(format!("cannot read {}: {e}", weights_path.display()))
        })?;
        let w = WeightSequence::from_json_str(&text)
            .map_err(|e| CliError::config(format!("field `weights`: {e}")))?;
        let a = job::read_coefficient_csv(coeffs_path.to_str().unwrap_or_default())?;
        let a = ExpansionCoefficients::new(a, coeffs_path.display().to_string())
            .map_err(CliError::from_core)?;
        let grid = lambda_grid.unwrap_or_else(|| (-4..=4).map(|k| 2f64.powi(k)).collect());
        classify_decay(&a, &w, dim, &grid).map_err(CliError::from_core)?
    } else {
        let path =
            job_path.ok_or_else(|| CliError::config("pass a job file or --coeffs".to_string()))?;
        let job = JobConfig::from_path(&path)?;
        let pipeline = Pipeline::new(job)?;
        let stage = pipeline.spectrum()?;
        let coeffs = pipeline.hermite_coefficients()?;
        let a = shubin_spectra::analysis::expand(&coeffs, &stage.decomposition)
            .map_err(CliError::from_core)?;
        pipeline.classify(&a)?
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&fit).expect("serializable")
    );
    Ok(())
}

fn cmd_norms(job_path: &Path) -> Result<(), CliError> {
    let job = JobConfig::from_path(job_path)?;
    let pipeline = Pipeline::new(job)?;
    let coeffs = pipeline.hermite_coefficients()?;
    let tables = pipeline.norm_tables(&coeffs)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&tables).expect("serializable")
    );
    Ok(())
}

fn cmd_solve(job_path: &Path, policy: &str) -> Result<(), CliError> {
    let policy = match policy {
        "reject" => KernelPolicy::Reject,
        "project" => KernelPolicy::Project,
        other => {
            return Err(CliError::config(format!(
                "field `policy`: expected reject|project, got {other}"
            )))
        }
    };
    let job = JobConfig::from_path(job_path)?;
    let pipeline = Pipeline::new(job)?;
    let section = pipeline.solve(policy)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&section).expect("serializable")
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { job, out } => cmd_run(&job, out),
        Command::CheckWeights { job, weights } => cmd_check_weights(job, weights),
        Command::CheckOperator { job } => cmd_check_operator(&job),
        Command::Spectrum { job, out } => cmd_spectrum(&job, out),
        Command::Classify {
            job,
            coeffs,
            weights,
            dim,
            lambda_grid,
        } => cmd_classify(job, coeffs, weights, dim, lambda_grid),
        Command::Norms { job } => cmd_norms(&job),
        Command::Solve { job, policy } => cmd_solve(&job, &policy),
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
