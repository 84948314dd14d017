//! Python bindings: the dataset/metric types, both reconstruction attacks,
//! the sensitivity calculators and DP mechanisms, and the experiment runner.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fairaudit_core::fairness::{self, Metric, PredictionKind};
use fairaudit_core::harness;
use fairaudit_core::privacy;
use fairaudit_core::reconstruct;
use fairaudit_core::solver::{self, LinearSystem, SolverOptions, SparseSolver};

fn err(e: fairaudit_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_metric(name: &str) -> PyResult<Metric> {
    match name {
        "sp" => Ok(Metric::Sp),
        "abs_sp" => Ok(Metric::AbsSp),
        "eo" => Ok(Metric::Eo),
        "abs_eo" => Ok(Metric::AbsEo),
        other => Err(PyValueError::new_err(format!(
            "unknown metric `{other}` (expected sp, abs_sp, eo, abs_eo)"
        ))),
    }
}

fn parse_solver(name: &str) -> PyResult<SparseSolver> {
    match name {
        "bp" => Ok(SparseSolver::Bp),
        "omp" => Ok(SparseSolver::Omp),
        other => Err(PyValueError::new_err(format!(
            "unknown solver `{other}` (expected bp or omp)"
        ))),
    }
}

/// A labelled test population with binary labels and protected attributes.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Dataset {
    inner: fairness::Dataset,
}

#[pymethods]
impl Dataset {
    #[new]
    #[pyo3(signature = (y, a, features=None))]
    fn new(y: Vec<u8>, a: Vec<u8>, features: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        Ok(Dataset {
            inner: fairness::Dataset::new(y, a, features).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn n0(&self) -> usize {
        self.inner.n0()
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.n1()
    }

    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn attributes(&self) -> Vec<u8> {
        self.inner.attributes().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, n0={}, n1={})",
            self.inner.n(),
            self.inner.n0(),
            self.inner.n1()
        )
    }
}

/// An m x n matrix of model outputs (rows = models, columns = individuals).
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct PredictionMatrix {
    inner: fairness::PredictionMatrix,
}

#[pymethods]
impl PredictionMatrix {
    #[new]
    #[pyo3(signature = (rows, kind="logistic"))]
    fn new(rows: Vec<Vec<f64>>, kind: &str) -> PyResult<Self> {
        let kind = match kind {
            "binary" => PredictionKind::Binary,
            "logistic" => PredictionKind::Logistic,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown prediction kind `{other}`"
                )))
            }
        };
        Ok(PredictionMatrix {
            inner: fairness::PredictionMatrix::new(rows, kind).map_err(err)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.m()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("PredictionMatrix(m={}, n={})", self.inner.m(), self.inner.n())
    }
}

/// Answered fairness queries, clean or privatized.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct QueryBatch {
    inner: fairness::QueryBatch,
}

#[pymethods]
impl QueryBatch {
    #[new]
    fn new(values: Vec<f64>, metric: &str) -> PyResult<Self> {
        Ok(QueryBatch {
            inner: fairness::QueryBatch::clean(values, parse_metric(metric)?),
        })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn metric(&self) -> String {
        self.inner.metric.as_str().to_string()
    }

    #[getter]
    fn privatized(&self) -> bool {
        self.inner.privatized
    }

    #[getter]
    fn mechanism(&self) -> String {
        self.inner.mechanism.as_str().to_string()
    }

    #[getter]
    fn epsilon(&self) -> Option<f64> {
        self.inner.epsilon
    }

    #[getter]
    fn delta(&self) -> Option<f64> {
        self.inner.delta
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "QueryBatch(m={}, metric={}, mechanism={})",
            self.inner.len(),
            self.inner.metric,
            self.inner.mechanism
        )
    }
}

/// A prepared query plan (the models to submit).
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct AttackPlan {
    inner: reconstruct::AttackPlan,
}

#[pymethods]
impl AttackPlan {
    #[getter]
    fn matrix(&self) -> PredictionMatrix {
        PredictionMatrix {
            inner: self.inner.matrix.clone(),
        }
    }

    #[getter]
    fn base_row(&self) -> Vec<f64> {
        self.inner.base_row.clone()
    }
}

/// Outcome of an attack: per-individual guesses (1 advantaged, 0
/// disadvantaged, -1 unknown) plus intermediate vectors.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct ReconstructionReport {
    #[pyo3(get)]
    a_hat: Vec<i8>,
    #[pyo3(get)]
    v: Option<Vec<f64>>,
    #[pyo3(get)]
    s: Option<Vec<f64>>,
    #[pyo3(get)]
    leakage_pct: Option<f64>,
}

impl ReconstructionReport {
    fn from_core(mut report: reconstruct::ReconstructionReport, truth: Option<&[u8]>) -> PyResult<Self> {
        let leakage_pct = match truth {
            Some(a_true) => Some(report.score(a_true).map_err(err)?),
            None => report.leakage_pct,
        };
        Ok(ReconstructionReport {
            a_hat: report
                .a_hat
                .iter()
                .map(|g| g.bit().map_or(-1, |b| b as i8))
                .collect(),
            v: report.v,
            s: report.s,
            leakage_pct,
        })
    }
}

#[pyfunction]
fn statistical_parity(ds: &Dataset, row: Vec<f64>) -> PyResult<f64> {
    fairness::statistical_parity(&ds.inner, &row).map_err(err)
}

#[pyfunction]
fn equal_opportunity(ds: &Dataset, row: Vec<f64>) -> PyResult<f64> {
    fairness::equal_opportunity(&ds.inner, &row).map_err(err)
}

#[pyfunction]
fn metric_batch(ds: &Dataset, preds: &PredictionMatrix, metric: &str) -> PyResult<QueryBatch> {
    Ok(QueryBatch {
        inner: fairness::metric_batch(&ds.inner, &preds.inner, parse_metric(metric)?)
            .map_err(err)?,
    })
}

#[pyfunction]
fn plan_full_rank(base_row: Vec<f64>, n: usize) -> PyResult<AttackPlan> {
    Ok(AttackPlan {
        inner: reconstruct::plan_full_rank(&base_row, n).map_err(err)?,
    })
}

#[pyfunction]
fn plan_compressed_sensing(base_row: Vec<f64>, n: usize, m: usize, seed: u64) -> PyResult<AttackPlan> {
    Ok(AttackPlan {
        inner: reconstruct::plan_compressed_sensing(&base_row, n, m, seed).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (plan, answers, n1, n0, a_true=None))]
fn reveal_full_rank(
    plan: &AttackPlan,
    answers: &QueryBatch,
    n1: usize,
    n0: usize,
    a_true: Option<Vec<u8>>,
) -> PyResult<ReconstructionReport> {
    let report =
        reconstruct::reveal_full_rank(&plan.inner, &answers.inner, n1, n0).map_err(err)?;
    ReconstructionReport::from_core(report, a_true.as_deref())
}

#[pyfunction]
#[pyo3(signature = (plan, answers, n1, n0, solver="bp", eq_tol=None, a_true=None))]
#[allow(clippy::too_many_arguments)]
fn reveal_compressed_sensing(
    plan: &AttackPlan,
    answers: &QueryBatch,
    n1: usize,
    n0: usize,
    solver: &str,
    eq_tol: Option<f64>,
    a_true: Option<Vec<u8>>,
) -> PyResult<ReconstructionReport> {
    let opts = match eq_tol {
        Some(t) => SolverOptions::with_eq_tol(t),
        None => SolverOptions::default(),
    };
    let report = reconstruct::reveal_compressed_sensing_with(
        &plan.inner,
        &answers.inner,
        n1,
        n0,
        parse_solver(solver)?,
        &opts,
    )
    .map_err(err)?;
    ReconstructionReport::from_core(report, a_true.as_deref())
}

#[pyfunction]
#[pyo3(signature = (plan, answers, labels, n1_pos, n0_pos, a_true=None))]
fn reveal_equal_opportunity(
    plan: &AttackPlan,
    answers: &QueryBatch,
    labels: Vec<u8>,
    n1_pos: usize,
    n0_pos: usize,
    a_true: Option<Vec<u8>>,
) -> PyResult<ReconstructionReport> {
    let report = reconstruct::reveal_equal_opportunity(
        &plan.inner,
        &answers.inner,
        &labels,
        n1_pos,
        n0_pos,
    )
    .map_err(err)?;
    ReconstructionReport::from_core(report, a_true.as_deref())
}

#[pyfunction]
fn leakage(a_true: Vec<u8>, a_hat: Vec<u8>) -> PyResult<f64> {
    reconstruct::leakage(&a_true, &a_hat).map_err(err)
}

#[pyfunction]
fn global_sensitivity(metric: &str, m: usize, n: usize) -> PyResult<f64> {
    Ok(privacy::global_sensitivity(parse_metric(metric)?, m, n)
        .map_err(err)?
        .value)
}

#[pyfunction]
fn smooth_sensitivity_sp(m: usize, n: usize, n0: usize, n1: usize, beta: f64) -> PyResult<f64> {
    Ok(privacy::smooth_sensitivity_sp(m, n, n0, n1, beta)
        .map_err(err)?
        .value)
}

#[pyfunction]
fn smooth_sensitivity_abs_sp(m: usize, n0: usize, beta: f64) -> PyResult<f64> {
    Ok(privacy::smooth_sensitivity_abs_sp(m, n0, beta)
        .map_err(err)?
        .value)
}

#[pyfunction]
fn brute_force_global(metric: &str, n: usize) -> PyResult<f64> {
    privacy::brute_force_global(parse_metric(metric)?, n).map_err(err)
}

#[pyfunction]
fn brute_force_smooth(metric: &str, m: usize, n: usize, n0: usize, beta: f64) -> PyResult<f64> {
    privacy::brute_force_smooth(parse_metric(metric)?, m, n, n0, beta).map_err(err)
}

#[pyfunction]
fn laplace_global_mechanism(batch: &QueryBatch, n: usize, epsilon: f64, seed: u64) -> PyResult<QueryBatch> {
    Ok(QueryBatch {
        inner: privacy::laplace_global_mechanism(&batch.inner, n, epsilon, seed).map_err(err)?,
    })
}

#[pyfunction]
fn conceal_sp_cauchy(
    batch: &QueryBatch,
    n: usize,
    n0: usize,
    n1: usize,
    epsilon: f64,
    seed: u64,
) -> PyResult<QueryBatch> {
    Ok(QueryBatch {
        inner: privacy::conceal_sp_cauchy(&batch.inner, n, n0, n1, epsilon, seed).map_err(err)?,
    })
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn conceal_sp_laplace_smooth(
    batch: &QueryBatch,
    n: usize,
    n0: usize,
    n1: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> PyResult<QueryBatch> {
    Ok(QueryBatch {
        inner: privacy::conceal_sp_laplace_smooth(&batch.inner, n, n0, n1, epsilon, delta, seed)
            .map_err(err)?,
    })
}

#[pyfunction]
fn conceal_abs_sp(batch: &QueryBatch, n: usize, n0: usize, epsilon: f64, seed: u64) -> PyResult<QueryBatch> {
    Ok(QueryBatch {
        inner: privacy::conceal_abs_sp(&batch.inner, n, n0, epsilon, seed).map_err(err)?,
    })
}

#[pyfunction]
fn gen_synthetic(n: usize, n0: usize, seed: u64) -> PyResult<(Dataset, Vec<f64>)> {
    let (ds, scores) = harness::gen_synthetic(n, n0, seed).map_err(err)?;
    Ok((Dataset { inner: ds }, scores))
}

#[pyfunction]
fn auto_query_count(n: usize, n0: usize, c: f64) -> PyResult<usize> {
    harness::auto_query_count(n, n0, c).map_err(err)
}

#[pyfunction]
fn train_baseline(
    features: Vec<Vec<f64>>,
    y: Vec<u8>,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    harness::train_baseline(&features, &y, epochs, lr, seed).map_err(err)
}

/// Run a full sweep from a JSON config string; returns the result rows as a
/// JSON array string with the same keys as the CSV columns.
#[pyfunction]
fn run_experiment_json(config_json: &str) -> PyResult<String> {
    let cfg: harness::ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let rows = harness::run_experiment(&cfg, &harness::DataSource::Synthetic).map_err(err)?;
    harness::render_json(&rows).map_err(err)
}

#[pyfunction]
fn solve_full_rank(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> PyResult<Vec<f64>> {
    let sys = LinearSystem::from_rows(rows, rhs).map_err(err)?;
    solver::solve_full_rank(&sys).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (rows, rhs, eq_tol=None))]
fn basis_pursuit(
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    eq_tol: Option<f64>,
) -> PyResult<(Vec<f64>, f64, Vec<usize>)> {
    let sys = LinearSystem::from_rows(rows, rhs).map_err(err)?;
    let opts = match eq_tol {
        Some(t) => SolverOptions::with_eq_tol(t),
        None => SolverOptions::default(),
    };
    let sol = solver::basis_pursuit_with(&sys, &opts).map_err(err)?;
    Ok((sol.s, sol.residual_norm, sol.support))
}

#[pyfunction]
#[pyo3(signature = (rows, rhs, sparsity, eq_tol=None))]
fn omp(
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    sparsity: usize,
    eq_tol: Option<f64>,
) -> PyResult<(Vec<f64>, f64, Vec<usize>)> {
    let sys = LinearSystem::from_rows(rows, rhs).map_err(err)?;
    let opts = match eq_tol {
        Some(t) => SolverOptions::with_eq_tol(t),
        None => SolverOptions::default(),
    };
    let sol = solver::omp_with(&sys, sparsity, &opts).map_err(err)?;
    Ok((sol.s, sol.residual_norm, sol.support))
}

#[pymodule]
fn fairaudit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<PredictionMatrix>()?;
    m.add_class::<QueryBatch>()?;
    m.add_class::<AttackPlan>()?;
    m.add_class::<ReconstructionReport>()?;
    m.add_function(wrap_pyfunction!(statistical_parity, m)?)?;
    m.add_function(wrap_pyfunction!(equal_opportunity, m)?)?;
    m.add_function(wrap_pyfunction!(metric_batch, m)?)?;
    m.add_function(wrap_pyfunction!(plan_full_rank, m)?)?;
    m.add_function(wrap_pyfunction!(plan_compressed_sensing, m)?)?;
    m.add_function(wrap_pyfunction!(reveal_full_rank, m)?)?;
    m.add_function(wrap_pyfunction!(reveal_compressed_sensing, m)?)?;
    m.add_function(wrap_pyfunction!(reveal_equal_opportunity, m)?)?;
    m.add_function(wrap_pyfunction!(leakage, m)?)?;
    m.add_function(wrap_pyfunction!(global_sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_sensitivity_sp, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_sensitivity_abs_sp, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_global, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_smooth, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_global_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(conceal_sp_cauchy, m)?)?;
    m.add_function(wrap_pyfunction!(conceal_sp_laplace_smooth, m)?)?;
    m.add_function(wrap_pyfunction!(conceal_abs_sp, m)?)?;
    m.add_function(wrap_pyfunction!(gen_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(auto_query_count, m)?)?;
    m.add_function(wrap_pyfunction!(train_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_json, m)?)?;
    m.add_function(wrap_pyfunction!(solve_full_rank, m)?)?;
    m.add_function(wrap_pyfunction!(basis_pursuit, m)?)?;
    m.add_function(wrap_pyfunction!(omp, m)?)?;
    Ok(())
}
