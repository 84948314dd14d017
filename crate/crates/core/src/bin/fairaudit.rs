//! Command-line front end: synthetic data generation, attacks, query
//! privatization, sensitivity lookups and full experiment sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairaudit_core::error::Error;
use fairaudit_core::fairness::{metric_batch, Metric, QueryBatch};
use fairaudit_core::harness::{
    auto_query_count, emit_results, gen_synthetic, ingest_csv_with, run_experiment, train_baseline,
    write_dataset_csv, DataSource, ExperimentConfig, IngestOptions, ResultFormat, TabularMode,
};
use fairaudit_core::privacy::{
    conceal_abs_sp, conceal_sp_cauchy, conceal_sp_laplace_smooth, global_sensitivity,
    laplace_global_mechanism, smooth_sensitivity_abs_sp, smooth_sensitivity_sp,
};
use fairaudit_core::reconstruct::{
    partition_abs_sp, plan_compressed_sensing, plan_full_rank, reveal_compressed_sensing_with,
    reveal_full_rank, AttributeGuess, PartitionLabel, ReconstructionReport,
};
use fairaudit_core::solver::{SolverOptions, SparseSolver};
use fairaudit_core::statistical_parity;

#[derive(Parser)]
#[command(
    name = "fairaudit",
    about = "Audit how much group-fairness queries leak about protected attributes, and answer them privately",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Sp,
    AbsSp,
    Eo,
    AbsEo,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Sp => Metric::Sp,
            MetricArg::AbsSp => Metric::AbsSp,
            MetricArg::Eo => Metric::Eo,
            MetricArg::AbsEo => Metric::AbsEo,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MechanismArg {
    LaplaceGlobal,
    CauchySmooth,
    LaplaceSmooth,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AttackArg {
    FullRank,
    CompressedSensing,
    AbsPartition,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Bp,
    Omp,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Scores,
    Features,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV (id,y,a,score).
    Synth(SynthArgs),
    /// Run a reconstruction attack against a dataset file.
    Reveal(RevealArgs),
    /// Privatize a query-batch JSON file.
    Conceal(ConcealArgs),
    /// Run a sweep from a JSON config and write result rows.
    Experiment(ExperimentArgs),
    /// Print a global or smooth sensitivity value.
    Sensitivity(SensitivityArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    n0: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RevealArgs {
    /// Dataset CSV (scores mode: id,y,a,score; features mode: id,y,a,f1..).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Scores)]
    mode: ModeArg,
    #[arg(long, value_enum)]
    attack: AttackArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Bp)]
    solver: SolverArg,
    /// Query count (defaults: n for full-rank, auto for sensing).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Privatize the answers before attacking (demo of the defense).
    #[arg(long, value_enum)]
    mechanism: Option<MechanismArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Value of the protected-attribute column that maps to a=1.
    #[arg(long)]
    a_one: Option<String>,
    /// Value of the label column that maps to y=1.
    #[arg(long)]
    y_one: Option<String>,
    /// Training epochs for the baseline model (features mode).
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    /// Learning rate for the baseline model (features mode).
    #[arg(long, default_value_t = 0.5)]
    lr: f64,
    /// Write the report as JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConcealArgs {
    /// Query batch JSON ({"values": [...], "metric": "sp", ...}).
    #[arg(long)]
    batch: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    n0: usize,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long, value_enum)]
    mechanism: MechanismArg,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the extension of --out (json for .json, else csv).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Optional dataset CSV to sweep over instead of synthetic draws.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long, value_enum)]
    metric: MetricArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    /// Smoothing parameter; when present the smooth sensitivity is printed.
    #[arg(long)]
    beta: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap routes --help/--version through the error path with a
            // success status; genuine usage errors exit 1.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Reveal(a) => reveal(a),
        Command::Conceal(a) => conceal(a),
        Command::Experiment(a) => experiment(a),
        Command::Sensitivity(a) => sensitivity(a),
    }
}

fn synth(a: SynthArgs) -> Result<(), Error> {
    let (ds, scores) = gen_synthetic(a.n, a.n0, a.seed)?;
    write_dataset_csv(&a.out, &ds, &scores)?;
    println!(
        "wrote {} individuals (n0={}, n1={}) to {}",
        ds.n(),
        ds.n0(),
        ds.n1(),
        a.out.display()
    );
    Ok(())
}

fn load_batch(path: &PathBuf) -> Result<QueryBatch, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn save_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<(), Error> {
    let body =
        serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(serde::Serialize)]
struct RevealOutput {
    attack: String,
    n: usize,
    m: usize,
    n0_true: usize,
    n1_true: usize,
    leakage_pct: f64,
    queries_privatized: bool,
    /// Per-individual call: 1 advantaged, 0 disadvantaged, -1 unknown.
    a_hat: Vec<i8>,
}

fn reveal(a: RevealArgs) -> Result<(), Error> {
    let opts = IngestOptions {
        a_one: a.a_one.clone(),
        y_one: a.y_one.clone(),
    };
    let mode = match a.mode {
        ModeArg::Scores => TabularMode::Scores,
        ModeArg::Features => TabularMode::Features,
    };
    let source = ingest_csv_with(&a.data, mode, &opts)?;
    let (ds, scores) = source.into_parts()?;
    let scores = match scores {
        Some(s) => s,
        None => {
            let features = ds.features().ok_or_else(|| {
                Error::InvalidInput("features mode requires feature columns".into())
            })?;
            train_baseline(features, ds.labels(), a.epochs, a.lr, a.seed)?
        }
    };

    let n = ds.n();
    let privatize = |batch: &QueryBatch| -> Result<QueryBatch, Error> {
        let Some(mech) = a.mechanism else {
            return Ok(batch.clone());
        };
        let eps = a
            .epsilon
            .ok_or_else(|| Error::InvalidInput("--mechanism requires --epsilon".into()))?;
        match mech {
            MechanismArg::LaplaceGlobal => laplace_global_mechanism(batch, n, eps, a.seed),
            MechanismArg::CauchySmooth => match batch.metric {
                Metric::AbsSp | Metric::AbsEo => conceal_abs_sp(batch, n, ds.n0(), eps, a.seed),
                _ => conceal_sp_cauchy(batch, n, ds.n0(), ds.n1(), eps, a.seed),
            },
            MechanismArg::LaplaceSmooth => {
                let delta = a.delta.ok_or_else(|| {
                    Error::InvalidInput("laplace_smooth requires --delta".into())
                })?;
                conceal_sp_laplace_smooth(batch, n, ds.n0(), ds.n1(), eps, delta, a.seed)
            }
        }
    };

    let (mut report, m_used, attack_name) = match a.attack {
        AttackArg::FullRank => {
            let base: Vec<f64> = scores.iter().map(|&s| f64::from(s >= 0.5)).collect();
            let plan = plan_full_rank(&base, n)?;
            let clean = metric_batch(&ds, &plan.matrix, Metric::Sp)?;
            let answered = privatize(&clean)?;
            let report = reveal_full_rank(&plan, &answered, ds.n1(), ds.n0())?;
            (report, n, "full_rank")
        }
        AttackArg::CompressedSensing => {
            if ds.n0() > ds.n1() {
                eprintln!(
                    "warning: disadvantaged group ({}) outnumbers advantaged ({}); \
                     the sparse-recovery attack assumes the opposite and may underperform",
                    ds.n0(),
                    ds.n1()
                );
            }
            let m = match a.m {
                Some(m) => m,
                None => auto_query_count(n, ds.n0(), 1.3)?,
            };
            let plan = plan_compressed_sensing(&scores, n, m, a.seed)?;
            let clean = metric_batch(&ds, &plan.matrix, Metric::Sp)?;
            let answered = privatize(&clean)?;
            let solver = match a.solver {
                SolverArg::Bp => SparseSolver::Bp,
                SolverArg::Omp => SparseSolver::Omp,
            };
            let report = reveal_compressed_sensing_with(
                &plan,
                &answered,
                ds.n1(),
                ds.n0(),
                solver,
                &SolverOptions::default(),
            )?;
            (report, m, "compressed_sensing")
        }
        AttackArg::AbsPartition => {
            let mut queries = 0usize;
            let mut answer = |row: &[f64]| -> Result<f64, Error> {
                queries += 1;
                let sp = statistical_parity(&ds, row)?;
                let batch = QueryBatch::clean(vec![sp.abs()], Metric::AbsSp);
                Ok(privatize(&batch)?.values[0])
            };
            let partition = partition_abs_sp(n, &mut answer, 1e-9)?;
            // |SP| answers fix the partition only up to a swap; read the
            // smaller side as the disadvantaged group.
            let alpha_small = partition.size_alpha <= partition.size_beta;
            let a_hat: Vec<_> = partition
                .labels
                .iter()
                .map(|l| {
                    let is_alpha = *l == PartitionLabel::Alpha;
                    AttributeGuess::from_bit(u8::from(is_alpha != alpha_small))
                })
                .collect();
            let report = ReconstructionReport {
                a_hat,
                v: None,
                s: None,
                n1_est: None,
                n0_est: None,
                leakage_pct: None,
            };
            (report, queries, "abs_partition")
        }
    };
    let leakage = report.score(ds.attributes())?;
    let out = RevealOutput {
        attack: attack_name.to_string(),
        n,
        m: m_used,
        n0_true: ds.n0(),
        n1_true: ds.n1(),
        leakage_pct: leakage,
        queries_privatized: a.mechanism.is_some(),
        a_hat: report
            .a_hat
            .iter()
            .map(|g| g.bit().map_or(-1, |b| b as i8))
            .collect(),
    };
    match &a.out {
        Some(path) => save_json(path, &out)?,
        None => println!("{}", serde_json::to_string_pretty(&out).unwrap()),
    }
    Ok(())
}

fn conceal(a: ConcealArgs) -> Result<(), Error> {
    let batch = load_batch(&a.batch)?;
    let n1 = a.n1.unwrap_or(a.n - a.n0);
    let out = match a.mechanism {
        MechanismArg::LaplaceGlobal => laplace_global_mechanism(&batch, a.n, a.epsilon, a.seed)?,
        MechanismArg::CauchySmooth => match batch.metric {
            Metric::AbsSp | Metric::AbsEo => conceal_abs_sp(&batch, a.n, a.n0, a.epsilon, a.seed)?,
            _ => conceal_sp_cauchy(&batch, a.n, a.n0, n1, a.epsilon, a.seed)?,
        },
        MechanismArg::LaplaceSmooth => {
            let delta = a
                .delta
                .ok_or_else(|| Error::InvalidInput("laplace_smooth requires --delta".into()))?;
            conceal_sp_laplace_smooth(&batch, a.n, a.n0, n1, a.epsilon, delta, a.seed)?
        }
    };
    save_json(&a.out, &out)?;
    println!(
        "privatized {} queries with {} at epsilon={}",
        out.values.len(),
        out.mechanism,
        a.epsilon
    );
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&a.config).map_err(|source| Error::Io {
        path: a.config.display().to_string(),
        source,
    })?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let source = match &a.data {
        None => DataSource::Synthetic,
        Some(path) => {
            let parsed = ingest_csv_with(path, TabularMode::Scores, &IngestOptions::default())?;
            let (dataset, scores) = parsed.into_parts()?;
            DataSource::Fixed {
                dataset,
                scores: scores.expect("scores mode always yields scores"),
            }
        }
    };
    let rows = run_experiment(&cfg, &source)?;
    let format = match a.format {
        Some(FormatArg::Json) => ResultFormat::Json,
        Some(FormatArg::Csv) => ResultFormat::Csv,
        None => match a.out.extension().and_then(|e| e.to_str()) {
            Some("json") => ResultFormat::Json,
            _ => ResultFormat::Csv,
        },
    };
    emit_results(&rows, format, &a.out)?;
    println!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(())
}

fn sensitivity(a: SensitivityArgs) -> Result<(), Error> {
    let metric: Metric = a.metric.into();
    let value = match a.beta {
        None => global_sensitivity(metric, a.m, a.n)?.value,
        Some(beta) => {
            let n0 = a
                .n0
                .ok_or_else(|| Error::InvalidInput("smooth sensitivity requires --n0".into()))?;
            match metric {
                Metric::Sp | Metric::Eo => {
                    let n1 = a.n1.unwrap_or(a.n - n0);
                    smooth_sensitivity_sp(a.m, a.n, n0, n1, beta)?.value
                }
                Metric::AbsSp | Metric::AbsEo => smooth_sensitivity_abs_sp(a.m, n0, beta)?.value,
            }
        }
    };
    println!("{value:.6}");
    Ok(())
}
