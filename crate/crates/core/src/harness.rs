//! Experiment harness: synthetic data, CSV ingestion, a logistic-regression
//! baseline, privacy-vs-leakage sweeps and result emission.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fairness::{
    metric_batch, Dataset, MechanismKind, Metric, PredictionKind, PredictionMatrix, QueryBatch,
};
use crate::privacy::{
    abs_cauchy_smooth_spec, cauchy_smooth_spec, conceal_abs_sp, conceal_sp_cauchy,
    conceal_sp_laplace_smooth, laplace_global_mechanism, laplace_global_spec, laplace_smooth_spec,
};
use crate::reconstruct::{
    partition_abs_sp, plan_compressed_sensing, plan_full_rank, random_guess,
    reveal_compressed_sensing_with, reveal_full_rank, AttributeGuess, PartitionLabel,
};
use crate::rng::SplitMix64;
use crate::solver::{SolverOptions, SparseSolver};

/// A privacy budget that may be infinite (infinite means "answer in the
/// clear"). Serialized as the literal token `inf` in CSV and JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon(pub f64);

impl Epsilon {
    pub const INF: Epsilon = Epsilon(f64::INFINITY);

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) if v > 0.0 => Ok(Epsilon(v)),
            Raw::Num(v) => Err(D::Error::custom(format!("epsilon must be positive, got {v}"))),
            Raw::Text(s) if s == "inf" => Ok(Epsilon::INF),
            Raw::Text(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0)
                .map(Epsilon)
                .ok_or_else(|| D::Error::custom(format!("bad epsilon `{s}`"))),
        }
    }
}

/// Which reconstruction strategy a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    FullRank,
    CompressedSensing,
    AbsPartition,
}

fn default_c() -> f64 {
    1.3
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> usize {
    1
}

fn default_metric() -> Metric {
    Metric::Sp
}

fn default_solver() -> SparseSolver {
    SparseSolver::Bp
}

fn default_mechanism() -> MechanismKind {
    MechanismKind::None
}

fn default_epsilons() -> Vec<Epsilon> {
    vec![Epsilon::INF]
}

/// Sweep description. `m` defaults to n for the full-rank attack and to
/// `ceil(c * n0 * ln(n/n0))` otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub n0: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<Epsilon>,
    #[serde(default = "default_mechanism")]
    pub mechanism: MechanismKind,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    pub attack: AttackKind,
    #[serde(default = "default_solver")]
    pub solver: SparseSolver,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub delta: Option<f64>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.n0 == 0 || self.n0 >= self.n {
            return Err(Error::InvalidInput(format!(
                "need 1 <= n0 < n, got n0={} n={}",
                self.n0, self.n
            )));
        }
        if let Some(m) = self.m {
            if self.attack == AttackKind::FullRank && m > self.n {
                return Err(Error::InvalidInput(format!(
                    "full_rank uses at most n queries, got m={m} > n={}",
                    self.n
                )));
            }
            if m == 0 {
                return Err(Error::InvalidInput("m must be >= 1".into()));
            }
        }
        if self.mechanism == MechanismKind::LaplaceSmooth && self.delta.is_none() {
            return Err(Error::InvalidInput(
                "laplace_smooth requires delta".into(),
            ));
        }
        Ok(())
    }

    fn queries(&self) -> Result<usize> {
        match (self.m, self.attack) {
            (Some(m), _) => Ok(m),
            (None, AttackKind::FullRank) => Ok(self.n),
            (None, AttackKind::AbsPartition) => Ok(self.n),
            (None, AttackKind::CompressedSensing) => auto_query_count(self.n, self.n0, self.c),
        }
    }
}

/// One (epsilon, trial) cell of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub trial: usize,
    pub n: usize,
    pub n0: usize,
    pub m: usize,
    pub epsilon: Epsilon,
    pub mechanism: MechanismKind,
    pub avg_sp_err: f64,
    pub leakage_pct: f64,
    pub runtime_ms: f64,
    /// True when the trial's solver failed and leakage was scored against
    /// random guesses. Not serialized; the row itself is still emitted.
    #[serde(skip)]
    pub failed: bool,
}

/// Where a sweep's datasets come from.
pub enum DataSource {
    /// Fresh synthetic draw per trial (seeded by base seed + trial).
    Synthetic,
    /// A fixed dataset with base scores; only query noise varies per trial.
    Fixed { dataset: Dataset, scores: Vec<f64> },
}

/// Synthetic population: exactly `n0` disadvantaged individuals placed
/// uniformly at random, Bernoulli(1/2) labels, and i.i.d. Uniform(0,1) base
/// scores drawn independently of the attributes so the base model itself
/// carries no group signal.
pub fn gen_synthetic(n: usize, n0: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    if n0 == 0 || n0 >= n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= n0 < n, got n0={n0} n={n}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut a = vec![1u8; n];
    for j in rng.sample_indices(n, n0) {
        a[j] = 0;
    }
    let y: Vec<u8> = (0..n).map(|_| u8::from(rng.next_bool())).collect();
    let scores: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    Ok((Dataset::new(y, a, None)?, scores))
}

/// Query-count budget for the sensing attack: `ceil(c * n0 * ln(n / n0))`,
/// floored at n0 + 1 so the system is never narrower than the sparsity.
pub fn auto_query_count(n: usize, n0: usize, c: f64) -> Result<usize> {
    if n0 == 0 || n0 >= n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= n0 < n, got n0={n0} n={n}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
    }
    let raw = (c * n0 as f64 * (n as f64 / n0 as f64).ln()).ceil() as usize;
    Ok(raw.max(n0 + 1))
}

struct TrialOutcome {
    avg_sp_err: f64,
    leakage_pct: f64,
    failed: bool,
}

/// Run the configured sweep. Rows come out in (epsilon, trial) order; trial
/// t uses seed `base_seed + t` throughout, so any cell can be reproduced in
/// isolation. A trial whose solver fails is scored against random guesses
/// rather than dropped.
pub fn run_experiment(cfg: &ExperimentConfig, source: &DataSource) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let m = cfg.queries()?;
    let mut rows = Vec::with_capacity(cfg.epsilons.len() * cfg.trials);
    for (eps_idx, &eps) in cfg.epsilons.iter().enumerate() {
        for trial in 0..cfg.trials {
            let trial_seed = cfg.seed.wrapping_add(trial as u64);
            let started = Instant::now();
            let (dataset, scores) = match source {
                DataSource::Synthetic => gen_synthetic(cfg.n, cfg.n0, trial_seed)?,
                DataSource::Fixed { dataset, scores } => (dataset.clone(), scores.clone()),
            };
            let outcome = run_trial(cfg, m, &dataset, &scores, eps, trial_seed, eps_idx as u64);
            let outcome = match outcome {
                Ok(o) => o,
                Err(_) => {
                    // Failed trial: score a coin-flip reconstruction so the
                    // cell is recorded rather than dropped.
                    let mut rng = SplitMix64::derive(trial_seed, 0xFA11 ^ eps_idx as u64);
                    let guesses = random_guess(dataset.n(), &mut rng);
                    let mut report = crate::reconstruct::ReconstructionReport {
                        a_hat: guesses,
                        v: None,
                        s: None,
                        n1_est: None,
                        n0_est: None,
                        leakage_pct: None,
                    };
                    TrialOutcome {
                        avg_sp_err: 0.0,
                        leakage_pct: report.score(dataset.attributes())?,
                        failed: true,
                    }
                }
            };
            rows.push(ExperimentRow {
                trial,
                n: cfg.n,
                n0: cfg.n0,
                m,
                epsilon: eps,
                mechanism: if eps.is_infinite() {
                    MechanismKind::None
                } else {
                    cfg.mechanism
                },
                avg_sp_err: outcome.avg_sp_err,
                leakage_pct: outcome.leakage_pct,
                runtime_ms: started.elapsed().as_secs_f64() * 1e3,
                failed: outcome.failed,
            });
        }
    }
    Ok(rows)
}

fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Per-coordinate noise scale the configured mechanism will apply to a
/// batch of the given metric, used to widen solver tolerances on privatized
/// answers.
fn mechanism_median_noise(
    mechanism: MechanismKind,
    metric: Metric,
    delta: Option<f64>,
    ds: &Dataset,
    m: usize,
    eps: f64,
) -> Result<f64> {
    let spec = match (mechanism, metric) {
        (MechanismKind::None, _) => return Ok(0.0),
        (MechanismKind::LaplaceGlobal, metric) => laplace_global_spec(metric, m, ds.n(), eps, 0)?,
        (MechanismKind::CauchySmooth, Metric::Sp | Metric::Eo) => {
            cauchy_smooth_spec(m, ds.n(), ds.n0(), ds.n1(), eps, 0)?
        }
        (MechanismKind::CauchySmooth, Metric::AbsSp | Metric::AbsEo) => {
            abs_cauchy_smooth_spec(m, ds.n0(), eps, 0)?
        }
        (MechanismKind::LaplaceSmooth, _) => {
            let delta = delta.expect("validated");
            laplace_smooth_spec(m, ds.n(), ds.n0(), ds.n1(), eps, delta, 0)?
        }
    };
    Ok(spec.median_abs_noise())
}

/// Privatize a batch with the configured mechanism, dispatching on the
/// batch's own metric.
fn apply_mechanism(
    mechanism: MechanismKind,
    delta: Option<f64>,
    ds: &Dataset,
    clean: &QueryBatch,
    eps: Epsilon,
    seed: u64,
) -> Result<QueryBatch> {
    if eps.is_infinite() || mechanism == MechanismKind::None {
        return Ok(clean.clone());
    }
    let eps = eps.0;
    match (mechanism, clean.metric) {
        (MechanismKind::LaplaceGlobal, _) => laplace_global_mechanism(clean, ds.n(), eps, seed),
        (MechanismKind::CauchySmooth, Metric::Sp | Metric::Eo) => {
            conceal_sp_cauchy(clean, ds.n(), ds.n0(), ds.n1(), eps, seed)
        }
        (MechanismKind::CauchySmooth, Metric::AbsSp | Metric::AbsEo) => {
            conceal_abs_sp(clean, ds.n(), ds.n0(), eps, seed)
        }
        (MechanismKind::LaplaceSmooth, _) => {
            let delta = delta.expect("validated");
            conceal_sp_laplace_smooth(clean, ds.n(), ds.n0(), ds.n1(), eps, delta, seed)
        }
        (MechanismKind::None, _) => unreachable!(),
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    m: usize,
    full_ds: &Dataset,
    full_scores: &[f64],
    eps: Epsilon,
    trial_seed: u64,
    eps_salt: u64,
) -> Result<TrialOutcome> {
    let mech_seed = SplitMix64::derive(trial_seed, 0x9E15 ^ eps_salt).next_u64();

    // Equal-opportunity queries carry information about the y=1
    // sub-population only, and they equal statistical parity evaluated
    // there; run the whole trial on the restricted dataset. Leakage is then
    // scored over the positives, everyone else being unknowable from these
    // queries.
    let restricted;
    let restricted_scores;
    let (ds, scores, metric) = match cfg.metric {
        Metric::Eo | Metric::AbsEo => {
            restricted = full_ds.restrict_to_positives()?;
            restricted_scores = full_ds
                .positive_indices()
                .iter()
                .map(|&j| full_scores[j])
                .collect::<Vec<f64>>();
            let metric = if cfg.metric == Metric::Eo {
                Metric::Sp
            } else {
                Metric::AbsSp
            };
            (&restricted, restricted_scores.as_slice(), metric)
        }
        other => (full_ds, full_scores, other),
    };

    match cfg.attack {
        AttackKind::FullRank => {
            let base: Vec<f64> = scores.iter().map(|&s| f64::from(s >= 0.5)).collect();
            let plan = plan_full_rank(&base, ds.n())?;
            let clean = metric_batch(ds, &plan.matrix, metric)?;
            let answered = apply_mechanism(cfg.mechanism, cfg.delta, ds, &clean, eps, mech_seed)?;
            let avg_sp_err = mean_abs_diff(&answered.values, &clean.values);
            let mut report = reveal_full_rank(&plan, &answered, ds.n1(), ds.n0())?;
            let leakage_pct = report.score(ds.attributes())?;
            Ok(TrialOutcome {
                avg_sp_err,
                leakage_pct,
                failed: false,
            })
        }
        AttackKind::CompressedSensing => {
            let plan_seed = SplitMix64::derive(trial_seed, 0xC5).next_u64();
            let plan = plan_compressed_sensing(scores, ds.n(), m, plan_seed)?;
            let clean = metric_batch(ds, &plan.matrix, metric)?;
            let answered = apply_mechanism(cfg.mechanism, cfg.delta, ds, &clean, eps, mech_seed)?;
            let avg_sp_err = mean_abs_diff(&answered.values, &clean.values);
            let opts = if answered.privatized {
                let median = if eps.is_infinite() {
                    0.0
                } else {
                    mechanism_median_noise(cfg.mechanism, metric, cfg.delta, ds, m, eps.0)?
                };
                SolverOptions::with_eq_tol((10.0 * median).max(1e-8))
            } else {
                SolverOptions::default()
            };
            let mut report = reveal_compressed_sensing_with(
                &plan,
                &answered,
                ds.n1(),
                ds.n0(),
                cfg.solver,
                &opts,
            )?;
            let leakage_pct = report.score(ds.attributes())?;
            Ok(TrialOutcome {
                avg_sp_err,
                leakage_pct,
                failed: false,
            })
        }
        AttackKind::AbsPartition => {
            let n = ds.n();
            let mut clean_log = Vec::new();
            let mut answered_log = Vec::new();
            let mut query_idx = 0u64;
            let mut answer = |row: &[f64]| -> Result<f64> {
                let pm = PredictionMatrix::new(vec![row.to_vec()], PredictionKind::Binary)?;
                let clean = metric_batch(ds, &pm, Metric::AbsSp)?;
                let single = QueryBatch::clean(clean.values.clone(), Metric::AbsSp);
                let seed = SplitMix64::derive(mech_seed, query_idx).next_u64();
                query_idx += 1;
                let answered =
                    apply_mechanism(cfg.mechanism, cfg.delta, ds, &single, eps, seed)?;
                clean_log.push(clean.values[0]);
                answered_log.push(answered.values[0]);
                Ok(answered.values[0])
            };
            let partition = partition_abs_sp(n, &mut answer, 1e-9);
            let avg_sp_err = mean_abs_diff(&answered_log, &clean_log);
            let partition = partition?;
            // |SP| answers fix the partition only up to a swap; identify the
            // smaller side with the disadvantaged group, as an attacker
            // reading group sizes would.
            let alpha_is_disadvantaged = partition.size_alpha <= partition.size_beta;
            let a_hat: Vec<AttributeGuess> = partition
                .labels
                .iter()
                .map(|l| {
                    let is_alpha = *l == PartitionLabel::Alpha;
                    AttributeGuess::from_bit(u8::from(is_alpha != alpha_is_disadvantaged))
                })
                .collect();
            let mut report = crate::reconstruct::ReconstructionReport {
                a_hat,
                v: None,
                s: None,
                n1_est: None,
                n0_est: None,
                leakage_pct: None,
            };
            let leakage_pct = report.score(ds.attributes())?;
            Ok(TrialOutcome {
                avg_sp_err,
                leakage_pct,
                failed: false,
            })
        }
    }
}

const RESULT_HEADER: &str = "trial,n,n0,m,epsilon,mechanism,avg_sp_err,leakage_pct,runtime_ms";

/// Render rows as CSV with the fixed header. Floats use the shortest
/// round-trip representation; infinite epsilon is the token `inf`.
pub fn render_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(RESULT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.trial, r.n, r.n0, r.m, r.epsilon, r.mechanism, r.avg_sp_err, r.leakage_pct,
            r.runtime_ms
        ));
    }
    out
}

/// Render rows as a JSON array of objects with the same keys as the CSV
/// columns.
pub fn render_json(rows: &[ExperimentRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Output format for [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultFormat {
    Csv,
    Json,
}

/// Write rows to `path` in the requested format.
pub fn emit_results(rows: &[ExperimentRow], format: ResultFormat, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows to emit".into()));
    }
    let body = match format {
        ResultFormat::Csv => render_csv(rows),
        ResultFormat::Json => render_json(rows)?,
    };
    write_file(path, &body)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(body.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Parse a result CSV produced by [`render_csv`] back into rows (used for
/// round-trip checks and downstream tooling).
pub fn parse_result_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    if header != RESULT_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 9 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 9 fields, got {}", parts.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad {what} `{s}`"),
            })
        };
        let parse_f64 = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad {what} `{s}`"),
            })
        };
        let epsilon = if parts[4] == "inf" {
            Epsilon::INF
        } else {
            Epsilon(parse_f64(parts[4], "epsilon")?)
        };
        let mechanism = match parts[5] {
            "none" => MechanismKind::None,
            "laplace_global" => MechanismKind::LaplaceGlobal,
            "cauchy_smooth" => MechanismKind::CauchySmooth,
            "laplace_smooth" => MechanismKind::LaplaceSmooth,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("bad mechanism `{other}`"),
                })
            }
        };
        rows.push(ExperimentRow {
            trial: parse_usize(parts[0], "trial")?,
            n: parse_usize(parts[1], "n")?,
            n0: parse_usize(parts[2], "n0")?,
            m: parse_usize(parts[3], "m")?,
            epsilon,
            mechanism,
            avg_sp_err: parse_f64(parts[6], "avg_sp_err")?,
            leakage_pct: parse_f64(parts[7], "leakage_pct")?,
            runtime_ms: parse_f64(parts[8], "runtime_ms")?,
            failed: false,
        });
    }
    Ok(rows)
}

/// Mode of a tabular input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TabularMode {
    Scores,
    Features,
}

/// Parsed tabular input (`id,y,a,score` or `id,y,a,f1..fd`).
#[derive(Debug, Clone)]
pub struct TabularSource {
    pub mode: TabularMode,
    pub ids: Vec<String>,
    pub y: Vec<u8>,
    pub a: Vec<u8>,
    pub scores: Option<Vec<f64>>,
    pub features: Option<Vec<Vec<f64>>>,
}

impl TabularSource {
    /// Convert to a dataset plus base scores (scores mode) or feature rows
    /// stored on the dataset (features mode). Files describing a
    /// single-group population are rejected here since no group metric is
    /// defined on them.
    pub fn into_parts(self) -> Result<(Dataset, Option<Vec<f64>>)> {
        let ds = Dataset::new(self.y, self.a, self.features)?;
        if ds.n0() == 0 {
            return Err(Error::EmptyGroup { missing: 0 });
        }
        if ds.n1() == 0 {
            return Err(Error::EmptyGroup { missing: 1 });
        }
        Ok((ds, self.scores))
    }
}

/// How to binarize textual y/a columns: the value listed maps to 1, the
/// single remaining distinct value maps to 0. Columns already 0/1 need no
/// mapping.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub y_one: Option<String>,
    pub a_one: Option<String>,
}

/// Read a dataset CSV. Errors carry the 1-based line number; y and a must
/// be binary-encodable (directly or via [`IngestOptions`]).
pub fn ingest_csv(path: &Path, mode: TabularMode) -> Result<TabularSource> {
    ingest_csv_with(path, mode, &IngestOptions::default())
}

pub fn ingest_csv_with(
    path: &Path,
    mode: TabularMode,
    opts: &IngestOptions,
) -> Result<TabularSource> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_csv_text(&text, mode, opts)
}

fn binarize(
    name: &str,
    raw: &[(usize, String)],
    one: Option<&String>,
) -> Result<Vec<u8>> {
    let direct = raw
        .iter()
        .all(|(_, v)| v == "0" || v == "1");
    if direct {
        return Ok(raw.iter().map(|(_, v)| u8::from(v == "1")).collect());
    }
    let Some(one) = one else {
        let (line, value) = raw
            .iter()
            .find(|(_, v)| v != "0" && v != "1")
            .map(|(l, v)| (*l, v.clone()))
            .unwrap_or((2, String::new()));
        return Err(Error::NonBinaryColumn {
            name: name.into(),
            line,
            value,
        });
    };
    let mut other: Option<&String> = None;
    for (line, v) in raw {
        if v == one {
            continue;
        }
        match other {
            None => other = Some(v),
            Some(o) if o == v => {}
            Some(_) => {
                return Err(Error::NonBinaryColumn {
                    name: name.into(),
                    line: *line,
                    value: v.clone(),
                })
            }
        }
    }
    Ok(raw.iter().map(|(_, v)| u8::from(v == one)).collect())
}

fn ingest_csv_text(text: &str, mode: TabularMode, opts: &IngestOptions) -> Result<TabularSource> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    for (idx, expected) in ["id", "y", "a"].iter().enumerate() {
        if cols.get(idx).copied() != Some(*expected) {
            return Err(Error::MissingColumn {
                name: (*expected).into(),
            });
        }
    }
    let n_cols = match mode {
        TabularMode::Scores => {
            if cols.get(3).copied() != Some("score") {
                return Err(Error::MissingColumn {
                    name: "score".into(),
                });
            }
            4
        }
        TabularMode::Features => {
            if cols.len() < 4 {
                return Err(Error::MissingColumn { name: "f1".into() });
            }
            cols.len()
        }
    };

    let mut ids = Vec::new();
    let mut y_raw = Vec::new();
    let mut a_raw = Vec::new();
    let mut scores = Vec::new();
    let mut features: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != n_cols {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {n_cols} fields, got {}", parts.len()),
            });
        }
        ids.push(parts[0].to_string());
        y_raw.push((lineno, parts[1].to_string()));
        a_raw.push((lineno, parts[2].to_string()));
        match mode {
            TabularMode::Scores => {
                let s: f64 = parts[3].parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad score `{}`", parts[3]),
                })?;
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("score {s} outside [0,1]"),
                    });
                }
                scores.push(s);
            }
            TabularMode::Features => {
                let mut row = Vec::with_capacity(n_cols - 3);
                for p in &parts[3..] {
                    row.push(p.parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad feature `{p}`"),
                    })?);
                }
                features.push(row);
            }
        }
    }
    if ids.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    let y = binarize("y", &y_raw, opts.y_one.as_ref())?;
    let a = binarize("a", &a_raw, opts.a_one.as_ref())?;
    Ok(TabularSource {
        mode,
        ids,
        y,
        a,
        scores: (mode == TabularMode::Scores).then_some(scores),
        features: (mode == TabularMode::Features).then_some(features),
    })
}

/// Write a scores-mode dataset CSV (`id,y,a,score`).
pub fn write_dataset_csv(path: &Path, ds: &Dataset, scores: &[f64]) -> Result<()> {
    let mut body = String::from("id,y,a,score\n");
    for i in 0..ds.n() {
        body.push_str(&format!(
            "{},{},{},{}\n",
            i,
            ds.labels()[i],
            ds.attributes()[i],
            scores[i]
        ));
    }
    write_file(path, &body)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Logistic-regression baseline fit by full-batch gradient descent on
/// standardized features, returning in-sample scores. Zero-initialized, so
/// zero epochs yields 0.5 everywhere; the fit is deterministic and the seed
/// is accepted only for interface stability.
pub fn train_baseline(
    features: &[Vec<f64>],
    y: &[u8],
    epochs: usize,
    lr: f64,
    _seed: u64,
) -> Result<Vec<f64>> {
    let n = features.len();
    if n == 0 || n != y.len() {
        return Err(Error::Dimension(format!(
            "features ({n}) and labels ({}) must be nonempty and matched",
            y.len()
        )));
    }
    let d = features[0].len();
    if features.iter().any(|row| row.len() != d) {
        return Err(Error::Dimension("ragged feature rows".into()));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature".into()));
    }

    // Standardize per feature; constant features stay zero.
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    for j in 0..d {
        let mean = features.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = features.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
        means[j] = mean;
        stds[j] = var.sqrt();
    }
    let x: Vec<Vec<f64>> = features
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    if stds[j] > 1e-12 {
                        (v - means[j]) / stds[j]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for epoch in 0..epochs {
        let mut grad_w = vec![0.0; d];
        let mut grad_b = 0.0;
        let mut loss = 0.0;
        for (row, &yi) in x.iter().zip(y) {
            let p = sigmoid(crate::matrix::dot(row, &w) + b);
            let err = p - f64::from(yi);
            for (gw, xj) in grad_w.iter_mut().zip(row) {
                *gw += err * xj;
            }
            grad_b += err;
            let yi = f64::from(yi);
            loss -= yi * p.max(1e-300).ln() + (1.0 - yi) * (1.0 - p).max(1e-300).ln();
        }
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let scale = lr / n as f64;
        for (wj, gw) in w.iter_mut().zip(&grad_w) {
            *wj -= scale * gw;
        }
        b -= scale * grad_b;
    }
    Ok(x.iter()
        .map(|row| sigmoid(crate::matrix::dot(row, &w) + b))
        .collect())
}
