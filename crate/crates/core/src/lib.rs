//! Auditing the privacy of group-fairness queries.
//!
//! A compliance team holding protected attributes answers statistical-parity
//! and equal-opportunity queries about models it is shown. This crate
//! implements both sides of that exchange:
//!
//! * **reveal** — query strategies that reconstruct the protected attributes
//!   from answered queries, either exactly (one flipped prediction per
//!   individual, full-rank linear solve) or from far fewer queries via
//!   sparse recovery when one group is small;
//! * **conceal** — differentially private query answering, calibrating
//!   Laplace noise to global sensitivity or Cauchy/Laplace noise to the
//!   dataset-specific smooth sensitivity of the queried metric;
//! * a seeded experiment [`harness`] and CLI that sweep privacy budgets and
//!   report the leakage/query-error trade-off.

pub mod error;
pub mod fairness;
pub mod harness;
pub mod matrix;
pub mod privacy;
pub mod reconstruct;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use fairness::{
    equal_opportunity, group_sums, metric_batch, statistical_parity, Dataset, GroupSums,
    MechanismKind, Metric, PredictionKind, PredictionMatrix, QueryBatch,
};
pub use harness::{
    auto_query_count, emit_results, gen_synthetic, ingest_csv, ingest_csv_with, run_experiment,
    train_baseline, write_dataset_csv, AttackKind, DataSource, Epsilon, ExperimentConfig,
    ExperimentRow, IngestOptions, ResultFormat, TabularMode, TabularSource,
};
pub use privacy::{
    brute_force_global, brute_force_smooth, conceal_abs_sp, conceal_sp_cauchy,
    conceal_sp_laplace_smooth, global_sensitivity, laplace_global_mechanism,
    smooth_sensitivity_abs_sp, smooth_sensitivity_sp, NoiseFamily, NoiseSpec, SensitivityBound,
    SensitivityKind,
};
pub use reconstruct::{
    leakage, partition_abs_sp, plan_compressed_sensing, plan_double_query, plan_full_rank,
    plan_single_query, probe_group_sizes, reveal_compressed_sensing,
    reveal_compressed_sensing_with, reveal_equal_opportunity, reveal_full_rank, AttackPlan,
    AttackStrategy, AttributeGuess, PartitionLabel, PartitionResult, ReconstructionReport,
};
pub use solver::{
    basis_pursuit, basis_pursuit_with, omp, omp_with, solve_full_rank, LinearSystem,
    SolverOptions, SparseSolution, SparseSolver,
};
