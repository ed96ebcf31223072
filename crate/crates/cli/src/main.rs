mod chars;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hsstab::harness::{self, ExperimentConfig, VerifyOptions};
use hsstab::linalg::ArgBranch;
use hsstab::presentation::{GroupPresentation, TupleFile, UnitaryTuple};
use hsstab::stabilize::{perturb, sample_exact_rep, stabilize, StabilityRecord, StabilizeOptions};

use crate::output::{read_json, write_csv, write_json, Failure, Outcome};

#[derive(Parser)]
#[command(
    name = "hsstab",
    version,
    about = "Correct almost-representations of one-relator groups"
)]
struct Cli {
    /// Default seed for every randomized command.
    #[arg(long, global = true, env = "HSSTAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correct a tuple read from a JSON file.
    Stabilize(StabilizeArgs),
    /// Draw an exact representation of a preset.
    Sample(SampleArgs),
    /// Multiply each matrix of a tuple by a random unitary at distance eps.
    Perturb(PerturbArgs),
    /// Sample, perturb and correct over a grid of dimensions and sizes.
    Sweep(SweepArgs),
    /// Trace constructions.
    #[command(subcommand)]
    Char(chars::CharCommand),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CorrectorFlags {
    /// Cap on the number of eigenvalues of the central word.
    #[arg(long)]
    max_clusters: Option<usize>,
    /// Merge eigenphases across gaps below this instead of choosing by cost.
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    input_tol: Option<f64>,
    #[arg(long)]
    output_tol: Option<f64>,
}

impl CorrectorFlags {
    fn apply(&self, opts: &mut StabilizeOptions) {
        if self.max_clusters.is_some() {
            opts.max_clusters = self.max_clusters;
        }
        if self.gap_tol.is_some() {
            opts.gap_tol = self.gap_tol;
        }
        if let Some(t) = self.input_tol {
            opts.input_unitarity_tol = t;
        }
        if let Some(t) = self.output_tol {
            opts.output_defect_tol = t;
        }
    }
}

#[derive(Args)]
struct StabilizeArgs {
    /// Tuple file (`{"presentation": …, "matrices": […]}`).
    input: PathBuf,
    /// Preset, when the tuple file does not name one.
    #[arg(long)]
    preset: Option<String>,
    /// Where to write the corrected tuple.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when the correction fails.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    corrector: CorrectorFlags,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    preset: String,
    #[arg(long)]
    dim: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_delimiter = ',')]
    dim: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// JSON-lines records; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-eps summary as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Exit with status 2 if any trial fails.
    #[arg(long)]
    strict: bool,
    /// Leave wall_time_s at zero so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    corrector: CorrectorFlags,
}

#[derive(Args)]
struct VerifyArgs {
    /// Deliberately break one computation to check that the suite notices.
    #[arg(long, value_parser = ["wrong-branch"])]
    inject_fault: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::InvariantFailure) => ExitCode::from(2),
        Err(Failure::Invariant(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let seed = cli.seed;
    match cli.command {
        Command::Stabilize(a) => cmd_stabilize(a, seed),
        Command::Sample(a) => {
            let p = GroupPresentation::parse_preset(&a.preset)?;
            let t = sample_exact_rep(&p, a.dim, seed)?;
            write_json(a.out.as_deref(), &TupleFile::new(Some(&p), &t))?;
            Ok(Outcome::Success)
        }
        Command::Perturb(a) => {
            let file: TupleFile = read_json(&a.input)?;
            let label = file.presentation.clone();
            let t = file.into_tuple(hsstab::linalg::DEFAULT_INPUT_TOL)?;
            let noisy = perturb(&t, a.eps, seed)?;
            let p = label
                .map(|l| GroupPresentation::parse_preset(&l))
                .transpose()?;
            write_json(a.out.as_deref(), &TupleFile::new(p.as_ref(), &noisy))?;
            Ok(Outcome::Success)
        }
        Command::Sweep(a) => cmd_sweep(a, seed),
        Command::Char(c) => chars::run(c),
        Command::Verify(a) => {
            let opts = VerifyOptions {
                seed,
                branch: match a.inject_fault.as_deref() {
                    Some("wrong-branch") => ArgBranch::NonNegative,
                    _ => ArgBranch::Principal,
                },
            };
            let checks = harness::verify(&opts);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 {
                Outcome::Success
            } else {
                Outcome::InvariantFailure
            })
        }
    }
}

fn cmd_stabilize(a: StabilizeArgs, seed: u64) -> Result<Outcome, Failure> {
    let file: TupleFile = read_json(&a.input)?;
    let label = a
        .preset
        .or(file.presentation.clone())
        .ok_or_else(|| Failure::config("no preset given and the tuple file names none"))?;
    let p = GroupPresentation::parse_preset(&label)?;
    let mut opts = StabilizeOptions {
        seed,
        ..Default::default()
    };
    a.corrector.apply(&mut opts);
    opts.validate()?;
    // Unitarity is checked by the corrector so that a bad input yields a record.
    let matrices: Vec<_> = file.matrices.into_iter().map(|m| m.0).collect();
    let dim = matrices.first().map_or(0, |m| m.nrows());
    let t = UnitaryTuple { dim, matrices };
    let record = match stabilize(&p, &t, &opts) {
        Ok((fixed, record)) => {
            if let Some(out) = &a.out {
                write_json(Some(out), &TupleFile::new(Some(&p), &fixed))?;
            }
            record
        }
        Err(e) => StabilityRecord {
            preset: p.label(),
            dim,
            eps: None,
            trial: None,
            seed,
            defect_before: hsstab::presentation::relation_defect(&p, &t).unwrap_or(f64::NAN),
            defect_after: None,
            distance_moved: Vec::new(),
            clusters: 0,
            wall_time_s: 0.0,
            failed: true,
            failure: Some(e.to_string()),
        },
    };
    println!(
        "{}",
        serde_json::to_string(&record).map_err(Failure::config)?
    );
    Ok(if record.failed && a.strict {
        Outcome::InvariantFailure
    } else {
        Outcome::Success
    })
}

fn cmd_sweep(a: SweepArgs, seed: u64) -> Result<Outcome, Failure> {
    let mut config = match &a.config {
        Some(path) => read_json::<ExperimentConfig>(path)?,
        None => ExperimentConfig::new(
            a.preset.as_deref().unwrap_or("chain:2,5:3,7"),
            vec![8],
            vec![1e-2, 1e-3],
            1,
            seed,
        ),
    };
    if a.config.is_some() {
        if let Some(p) = &a.preset {
            config.preset = p.clone();
        }
    }
    if !a.dim.is_empty() {
        config.dims = a.dim.clone();
    }
    if !a.eps.is_empty() {
        config.eps = a.eps.clone();
    }
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if a.no_timing {
        config.timing = false;
    }
    if a.out.is_some() {
        config.out = a.out.clone();
    }
    a.corrector.apply(&mut config.options);
    config.validate()?;

    let report = harness::sweep(&config)?;
    output::write_records(config.out.as_deref(), &report.records)?;
    if let Some(path) = &a.csv {
        write_csv(path, &report.summary)?;
    }
    for row in &report.summary {
        eprintln!(
            "eps {:.1e}: median distance {:.3e}, max defect after {:.3e}, {} of {} failed",
            row.eps, row.median_distance, row.max_defect_after, row.failures, row.trials
        );
    }
    let bad = report.failures();
    Ok(if bad > 0 && a.strict {
        eprintln!("{bad} trials failed");
        Outcome::InvariantFailure
    } else {
        Outcome::Success
    })
}
