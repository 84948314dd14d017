//! Attribute reconstruction from answered fairness queries: query-plan
//! construction, group-size probing, the full-rank and sparse-recovery
//! attacks, the absolute-value partition procedure, and leakage scoring.

use crate::error::{Error, Result};
use crate::fairness::{PredictionKind, PredictionMatrix, QueryBatch};
use crate::rng::SplitMix64;
use crate::solver::{
    basis_pursuit_with, omp_with, solve_full_rank, LinearSystem, SolverOptions, SparseSolver,
};

/// How a query plan was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackStrategy {
    /// n models, each flipping one prediction of the base model.
    FullRank,
    /// m << n models obtained by perturbing the base model with small
    /// uniform noise.
    CompressedSensing,
    /// One model accepting a single individual.
    SingleQuery,
    /// A base model plus the same model with one flipped prediction.
    DoubleQuery,
    /// Sequential single/pair acceptors driving the absolute-value
    /// partition.
    AbsPartition,
}

/// A prepared batch of models to query, together with the base model they
/// were derived from.
#[derive(Debug, Clone)]
pub struct AttackPlan {
    pub strategy: AttackStrategy,
    pub base_row: Vec<f64>,
    pub probe_included: bool,
    pub matrix: PredictionMatrix,
}

fn require_binary_row(row: &[f64]) -> Result<()> {
    if let Some(bad) = row.iter().position(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidInput(format!(
            "base row entry {bad} is not binary"
        )));
    }
    Ok(())
}

fn require_unit_interval_row(row: &[f64]) -> Result<()> {
    if let Some(bad) = row.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidInput(format!(
            "base row entry {bad} outside [0,1]"
        )));
    }
    Ok(())
}

/// n models that agree with the binary base model everywhere except that
/// model i flips prediction i. The resulting matrix is base + diag(1-2*base)
/// and has full rank whenever the base model accepts anything other than
/// exactly one individual.
pub fn plan_full_rank(base_row: &[f64], n: usize) -> Result<AttackPlan> {
    if base_row.len() != n {
        return Err(Error::Dimension(format!(
            "base row length {} does not match n={n}",
            base_row.len()
        )));
    }
    require_binary_row(base_row)?;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = base_row.to_vec();
            row[i] = 1.0 - row[i];
            row
        })
        .collect();
    Ok(AttackPlan {
        strategy: AttackStrategy::FullRank,
        base_row: base_row.to_vec(),
        probe_included: false,
        matrix: PredictionMatrix::new(rows, PredictionKind::Binary)?,
    })
}

/// m models obtained from the base scores by adding i.i.d. Uniform(-0.1,
/// 0.1) noise and clipping into [0, 1]. Deterministic given the seed.
pub fn plan_compressed_sensing(
    base_row: &[f64],
    n: usize,
    m: usize,
    rng_seed: u64,
) -> Result<AttackPlan> {
    if base_row.len() != n {
        return Err(Error::Dimension(format!(
            "base row length {} does not match n={n}",
            base_row.len()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    require_unit_interval_row(base_row)?;
    let mut rng = SplitMix64::new(rng_seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            base_row
                .iter()
                .map(|&b| (b + rng.uniform(-0.1, 0.1)).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    Ok(AttackPlan {
        strategy: AttackStrategy::CompressedSensing,
        base_row: base_row.to_vec(),
        probe_included: false,
        matrix: PredictionMatrix::new(rows, PredictionKind::Logistic)?,
    })
}

/// A single model accepting only individual `target`.
pub fn plan_single_query(target: usize, n: usize) -> Result<AttackPlan> {
    if target >= n {
        return Err(Error::InvalidInput(format!(
            "target {target} outside dataset of size {n}"
        )));
    }
    let mut row = vec![0.0; n];
    row[target] = 1.0;
    Ok(AttackPlan {
        strategy: AttackStrategy::SingleQuery,
        base_row: vec![0.0; n],
        probe_included: false,
        matrix: PredictionMatrix::new(vec![row], PredictionKind::Binary)?,
    })
}

/// A realistic pair: the base model and a copy with prediction `target`
/// flipped. The difference of their gaps isolates the target's attribute.
pub fn plan_double_query(base_row: &[f64], target: usize, n: usize) -> Result<AttackPlan> {
    if base_row.len() != n {
        return Err(Error::Dimension(format!(
            "base row length {} does not match n={n}",
            base_row.len()
        )));
    }
    if target >= n {
        return Err(Error::InvalidInput(format!(
            "target {target} outside dataset of size {n}"
        )));
    }
    require_binary_row(base_row)?;
    let mut flipped = base_row.to_vec();
    flipped[target] = 1.0 - flipped[target];
    Ok(AttackPlan {
        strategy: AttackStrategy::DoubleQuery,
        base_row: base_row.to_vec(),
        probe_included: false,
        matrix: PredictionMatrix::new(vec![base_row.to_vec(), flipped], PredictionKind::Binary)?,
    })
}

/// Per-individual attribute call made by an attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeGuess {
    Disadvantaged,
    Advantaged,
    /// No information (e.g. y=0 individuals under equal-opportunity
    /// queries).
    Unknown,
}

impl AttributeGuess {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 1 {
            AttributeGuess::Advantaged
        } else {
            AttributeGuess::Disadvantaged
        }
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            AttributeGuess::Disadvantaged => Some(0),
            AttributeGuess::Advantaged => Some(1),
            AttributeGuess::Unknown => None,
        }
    }
}

/// Outcome of a reveal operation: per-individual guesses plus the
/// intermediate solution vectors, and a leakage score once ground truth is
/// supplied.
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub a_hat: Vec<AttributeGuess>,
    /// Recovered full-rank solution vector (entries near 1/N1 or -1/N0).
    pub v: Option<Vec<f64>>,
    /// Recovered sparse deviation vector (entries near 0 or 1/N1 + 1/N0).
    pub s: Option<Vec<f64>>,
    pub n1_est: Option<usize>,
    pub n0_est: Option<usize>,
    pub leakage_pct: Option<f64>,
}

impl ReconstructionReport {
    /// Balanced recovery accuracy against the true attributes (x100).
    /// Unknown guesses are excluded from both numerators and denominators.
    /// Stores and returns the score.
    pub fn score(&mut self, a_true: &[u8]) -> Result<f64> {
        let pct = leakage_with_unknowns(a_true, &self.a_hat)?;
        self.leakage_pct = Some(pct);
        Ok(pct)
    }
}

/// Balanced recovery accuracy (x100) between true binary attributes and
/// guessed binary attributes: the mean of the per-group fractions recovered.
/// 100 is perfect recovery, 50 matches random guessing, 0 is the exact
/// complement.
pub fn leakage(a_true: &[u8], a_hat: &[u8]) -> Result<f64> {
    let guesses: Vec<AttributeGuess> = a_hat.iter().map(|&b| AttributeGuess::from_bit(b)).collect();
    leakage_with_unknowns(a_true, &guesses)
}

fn leakage_with_unknowns(a_true: &[u8], a_hat: &[AttributeGuess]) -> Result<f64> {
    if a_true.len() != a_hat.len() {
        return Err(Error::Dimension(format!(
            "a_true ({}) and a_hat ({}) differ in length",
            a_true.len(),
            a_hat.len()
        )));
    }
    let mut n1 = 0usize;
    let mut n0 = 0usize;
    let mut correct1 = 0usize;
    let mut correct0 = 0usize;
    for (&t, &g) in a_true.iter().zip(a_hat) {
        let Some(bit) = g.bit() else {
            continue;
        };
        if t == 1 {
            n1 += 1;
            if bit == 1 {
                correct1 += 1;
            }
        } else {
            n0 += 1;
            if bit == 0 {
                correct0 += 1;
            }
        }
    }
    if n1 == 0 {
        return Err(Error::EmptyGroup { missing: 1 });
    }
    if n0 == 0 {
        return Err(Error::EmptyGroup { missing: 0 });
    }
    Ok(50.0 * (correct1 as f64 / n1 as f64 + correct0 as f64 / n0 as f64))
}

/// Estimate the group sizes from one single-acceptor query. A positive
/// answer `g` means individual 0 is advantaged and N1 = round(1/g); a
/// negative answer mirrors to N0. Large query noise can misestimate; the
/// rounding keeps small perturbations harmless.
pub fn probe_group_sizes(
    n: usize,
    answer: &mut dyn FnMut(&[f64]) -> Result<f64>,
) -> Result<(usize, usize)> {
    let mut row = vec![0.0; n];
    row[0] = 1.0;
    let g = answer(&row)?;
    if g == 0.0 {
        return Err(Error::ZeroResponse);
    }
    let size = |x: f64| -> usize { (1.0 / x).round().max(1.0).min(n as f64) as usize };
    if g > 0.0 {
        let n1 = size(g);
        Ok((n1, n - n1))
    } else {
        let n0 = size(-g);
        Ok((n - n0, n0))
    }
}

/// Full-rank reveal: solve `answers = H v` and call individual j advantaged
/// exactly when v_j > 0.
pub fn reveal_full_rank(
    plan: &AttackPlan,
    answers: &QueryBatch,
    n1: usize,
    n0: usize,
) -> Result<ReconstructionReport> {
    if plan.strategy != AttackStrategy::FullRank {
        return Err(Error::InvalidInput(
            "reveal_full_rank requires a full_rank plan".into(),
        ));
    }
    let n = plan.matrix.n();
    if answers.len() != plan.matrix.m() {
        return Err(Error::Dimension(format!(
            "answer count {} does not match m={}",
            answers.len(),
            plan.matrix.m()
        )));
    }
    let sys = LinearSystem::new(plan.matrix.matrix().clone(), answers.values.clone())?;
    let v = solve_full_rank(&sys)?;
    let a_hat = v
        .iter()
        .map(|&vj| {
            if vj > 0.0 {
                AttributeGuess::Advantaged
            } else {
                AttributeGuess::Disadvantaged
            }
        })
        .collect();
    debug_assert_eq!(v.len(), n);
    Ok(ReconstructionReport {
        a_hat,
        v: Some(v),
        s: None,
        n1_est: Some(n1),
        n0_est: Some(n0),
        leakage_pct: None,
    })
}

/// Sparse reveal with default solver tolerances.
pub fn reveal_compressed_sensing(
    plan: &AttackPlan,
    answers: &QueryBatch,
    n1: usize,
    n0: usize,
    solver: SparseSolver,
) -> Result<ReconstructionReport> {
    reveal_compressed_sensing_with(plan, answers, n1, n0, solver, &SolverOptions::default())
}

/// Sparse reveal. With `r = (1/N1, ..., 1/N1)`, the unknown solution vector
/// decomposes as `v = r - s` where `s` is zero on the advantaged group and
/// `1/N1 + 1/N0` on the disadvantaged group, so the residual measurement
/// `H r - answers` equals `H s` and `s` is N0-sparse. Recover `s` with the
/// chosen solver (OMP runs at sparsity N0) and call individual j
/// disadvantaged when `s_j` exceeds the midpoint `0.5 (1/N1 + 1/N0)`.
///
/// `opts.eq_tol` should be inflated for privatized answers so the noisy
/// residual stays feasible.
pub fn reveal_compressed_sensing_with(
    plan: &AttackPlan,
    answers: &QueryBatch,
    n1: usize,
    n0: usize,
    solver: SparseSolver,
    opts: &SolverOptions,
) -> Result<ReconstructionReport> {
    if plan.strategy != AttackStrategy::CompressedSensing {
        return Err(Error::InvalidInput(
            "reveal_compressed_sensing requires a compressed_sensing plan".into(),
        ));
    }
    let (m, n) = (plan.matrix.m(), plan.matrix.n());
    if answers.len() != m {
        return Err(Error::Dimension(format!(
            "answer count {} does not match m={m}",
            answers.len()
        )));
    }
    if n1 == 0 || n0 == 0 {
        return Err(Error::EmptyGroup {
            missing: if n1 == 0 { 1 } else { 0 },
        });
    }
    // The sparsity assumption wants the disadvantaged group to be the small
    // one; the attack still runs otherwise, just with weaker guarantees.
    let h = plan.matrix.matrix();
    let r = 1.0 / n1 as f64;
    let hr: Vec<f64> = h.iter_rows().map(|row| row.iter().sum::<f64>() * r).collect();
    let eta: Vec<f64> = hr.iter().zip(&answers.values).map(|(a, b)| a - b).collect();
    let sys = LinearSystem::new(h.clone(), eta)?;
    let sol = match solver {
        SparseSolver::Bp => basis_pursuit_with(&sys, opts)?,
        SparseSolver::Omp => omp_with(&sys, n0.min(m.min(n)), opts)?,
    };
    let threshold = 0.5 * (1.0 / n1 as f64 + 1.0 / n0 as f64);
    let a_hat = sol
        .s
        .iter()
        .map(|&sj| {
            if sj > threshold {
                AttributeGuess::Disadvantaged
            } else {
                AttributeGuess::Advantaged
            }
        })
        .collect();
    Ok(ReconstructionReport {
        a_hat,
        v: None,
        s: Some(sol.s),
        n1_est: Some(n1),
        n0_est: Some(n0),
        leakage_pct: None,
    })
}

/// Equal-opportunity reveal: the plan and answers address only the y=1
/// sub-population (plan columns are the positive individuals in ascending
/// index order); everyone with y=0 is reported Unknown.
pub fn reveal_equal_opportunity(
    plan: &AttackPlan,
    answers: &QueryBatch,
    labels: &[u8],
    n1_pos: usize,
    n0_pos: usize,
) -> Result<ReconstructionReport> {
    let positives: Vec<usize> = (0..labels.len()).filter(|&j| labels[j] == 1).collect();
    if positives.is_empty() || n1_pos == 0 || n0_pos == 0 {
        return Err(Error::EmptyPositiveGroup {
            missing: if n1_pos == 0 { 1 } else { 0 },
        });
    }
    if plan.matrix.n() != positives.len() {
        return Err(Error::Dimension(format!(
            "plan covers {} columns but the dataset has {} positives",
            plan.matrix.n(),
            positives.len()
        )));
    }
    let inner = match plan.strategy {
        AttackStrategy::FullRank => reveal_full_rank(plan, answers, n1_pos, n0_pos)?,
        AttackStrategy::CompressedSensing => {
            reveal_compressed_sensing(plan, answers, n1_pos, n0_pos, SparseSolver::Bp)?
        }
        _ => {
            return Err(Error::InvalidInput(
                "equal-opportunity reveal supports full_rank or compressed_sensing plans".into(),
            ))
        }
    };
    let mut a_hat = vec![AttributeGuess::Unknown; labels.len()];
    for (slot, guess) in positives.iter().zip(&inner.a_hat) {
        a_hat[*slot] = *guess;
    }
    Ok(ReconstructionReport {
        a_hat,
        v: inner.v,
        s: inner.s,
        n1_est: Some(n1_pos),
        n0_est: Some(n0_pos),
        leakage_pct: None,
    })
}

/// Two-group labels produced by the absolute-value partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionLabel {
    Alpha,
    Beta,
}

/// A partition of the dataset into the two attribute groups, up to the
/// global label swap that absolute-value queries cannot resolve.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    pub labels: Vec<PartitionLabel>,
    pub size_alpha: usize,
    pub size_beta: usize,
}

/// Partition the population from |SP| answers alone, using at most n+1
/// queries. Individual 0 anchors partition alpha. With unequal group sizes,
/// each further individual is classified by whether its single-acceptor
/// |SP| matches 1/N_alpha or 1/N_beta; with equal sizes, pair queries
/// {0, j} distinguish 2/N_alpha (same group) from 0 (different groups).
pub fn partition_abs_sp(
    n: usize,
    answer: &mut dyn FnMut(&[f64]) -> Result<f64>,
    match_tol: f64,
) -> Result<PartitionResult> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "partition needs at least two individuals".into(),
        ));
    }
    let single = |j: usize| {
        let mut row = vec![0.0; n];
        row[j] = 1.0;
        row
    };

    // Anchor query: |SP| of the acceptor of individual 0 reveals the size of
    // 0's own group.
    let g0 = answer(&single(0))?;
    if g0 <= 0.0 {
        return Err(Error::ZeroResponse);
    }
    let size_alpha = (1.0 / g0).round().max(1.0).min((n - 1) as f64) as usize;
    let size_beta = n - size_alpha;

    let mut labels = vec![PartitionLabel::Alpha; n];
    if size_alpha != size_beta {
        let inv_alpha = 1.0 / size_alpha as f64;
        let inv_beta = 1.0 / size_beta as f64;
        for (j, label) in labels.iter_mut().enumerate().skip(1) {
            let g = answer(&single(j))?;
            if (g - inv_alpha).abs() <= match_tol {
                *label = PartitionLabel::Alpha;
            } else if (g - inv_beta).abs() <= match_tol {
                *label = PartitionLabel::Beta;
            } else {
                return Err(Error::AmbiguousResponse {
                    index: j,
                    value: g,
                    tol: match_tol,
                });
            }
        }
    } else {
        // Equal sizes: single acceptors cannot distinguish the groups, but a
        // pair {0, j} answers 2/N_alpha when j shares 0's group and exactly
        // 0 otherwise.
        let two_alpha = 2.0 / size_alpha as f64;
        for (j, label) in labels.iter_mut().enumerate().skip(1) {
            let mut row = vec![0.0; n];
            row[0] = 1.0;
            row[j] = 1.0;
            let g = answer(&row)?;
            if (g - two_alpha).abs() <= match_tol {
                *label = PartitionLabel::Alpha;
            } else if g.abs() <= match_tol {
                *label = PartitionLabel::Beta;
            } else {
                return Err(Error::AmbiguousResponse {
                    index: j,
                    value: g,
                    tol: match_tol,
                });
            }
        }
    }

    let size_alpha = labels.iter().filter(|l| **l == PartitionLabel::Alpha).count();
    Ok(PartitionResult {
        labels,
        size_alpha,
        size_beta: n - size_alpha,
    })
}

/// The solution vector the full-rank reveal targets: 1/N1 on the advantaged
/// group and -1/N0 on the disadvantaged group.
pub fn target_vector(attributes: &[u8], n1: usize, n0: usize) -> Vec<f64> {
    attributes
        .iter()
        .map(|&aj| {
            if aj == 1 {
                1.0 / n1 as f64
            } else {
                -1.0 / n0 as f64
            }
        })
        .collect()
}

/// The sparse deviation vector the sensing reveal targets: 0 on the
/// advantaged group, 1/N1 + 1/N0 on the disadvantaged group.
pub fn deviation_vector(attributes: &[u8], n1: usize, n0: usize) -> Vec<f64> {
    let bump = 1.0 / n1 as f64 + 1.0 / n0 as f64;
    attributes
        .iter()
        .map(|&aj| if aj == 1 { 0.0 } else { bump })
        .collect()
}

/// Random attribute guesses, used by the harness when a trial's solver
/// fails outright: leakage is then scored against a coin-flip baseline
/// instead of silently dropping the trial.
pub fn random_guess(n: usize, rng: &mut SplitMix64) -> Vec<AttributeGuess> {
    (0..n)
        .map(|_| AttributeGuess::from_bit(u8::from(rng.next_bool())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{metric_batch, statistical_parity, Dataset, Metric};
    use crate::rng::SplitMix64;

    fn synthetic(n: usize, n0: usize, seed: u64) -> Dataset {
        let mut rng = SplitMix64::new(seed);
        let mut a = vec![1u8; n];
        for j in rng.sample_indices(n, n0) {
            a[j] = 0;
        }
        let y = (0..n).map(|_| u8::from(rng.next_bool())).collect();
        Dataset::new(y, a, None).unwrap()
    }

    #[test]
    fn plan_full_rank_zero_base_is_identity() {
        let plan = plan_full_rank(&[0.0, 0.0, 0.0], 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(plan.matrix.matrix().get(i, j), expected);
            }
        }
    }

    #[test]
    fn plan_full_rank_ones_base_is_complement() {
        let plan = plan_full_rank(&[1.0, 1.0, 1.0], 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.0 } else { 1.0 };
                assert_eq!(plan.matrix.matrix().get(i, j), expected);
            }
        }
    }

    #[test]
    fn plan_full_rank_mixed_base() {
        let plan = plan_full_rank(&[1.0, 0.0], 2).unwrap();
        assert_eq!(plan.matrix.row(0), &[0.0, 0.0]);
        assert_eq!(plan.matrix.row(1), &[1.0, 1.0]);
    }

    #[test]
    fn plan_cs_respects_clipping_and_seed() {
        let base = vec![0.02, 0.5, 0.97];
        let p1 = plan_compressed_sensing(&base, 3, 50, 7).unwrap();
        let p2 = plan_compressed_sensing(&base, 3, 50, 7).unwrap();
        for i in 0..50 {
            for j in 0..3 {
                let v = p1.matrix.matrix().get(i, j);
                assert_eq!(v, p2.matrix.matrix().get(i, j), "determinism");
                assert!((0.0..=1.0).contains(&v));
                assert!((v - base[j]).abs() <= 0.1 + 1e-12 || v == 0.0 || v == 1.0);
            }
        }
        let p3 = plan_compressed_sensing(&base, 3, 50, 8).unwrap();
        let differs = (0..50).any(|i| p3.matrix.row(i) != p1.matrix.row(i));
        assert!(differs, "different seeds should differ");
    }

    #[test]
    fn probe_reads_group_sizes_from_one_query() {
        let ds = {
            let mut a = vec![0u8; 10];
            for slot in a.iter_mut().take(4) {
                *slot = 1;
            }
            Dataset::new(vec![1; 10], a, None).unwrap()
        };
        // first individual advantaged: answer 1/4
        let mut answer = |row: &[f64]| statistical_parity(&ds, row);
        let (n1, n0) = probe_group_sizes(10, &mut answer).unwrap();
        assert_eq!((n1, n0), (4, 6));
    }

    #[test]
    fn probe_negative_answer_side() {
        let mut a = vec![1u8; 10];
        for slot in a.iter_mut().take(6) {
            *slot = 0;
        }
        let ds = Dataset::new(vec![1; 10], a, None).unwrap();
        let mut answer = |row: &[f64]| statistical_parity(&ds, row);
        let (n1, n0) = probe_group_sizes(10, &mut answer).unwrap();
        assert_eq!((n1, n0), (4, 6));
    }

    #[test]
    fn probe_rounds_noisy_answers() {
        let mut answer = |_row: &[f64]| Ok(0.27);
        let (n1, n0) = probe_group_sizes(10, &mut answer).unwrap();
        assert_eq!((n1, n0), (4, 6));
    }

    #[test]
    fn probe_zero_answer_is_an_error() {
        let mut answer = |_row: &[f64]| Ok(0.0);
        assert!(matches!(
            probe_group_sizes(10, &mut answer),
            Err(Error::ZeroResponse)
        ));
    }

    #[test]
    fn full_rank_reveal_recovers_everything() {
        for seed in 0..5 {
            let ds = synthetic(40, 7, seed);
            let mut rng = SplitMix64::derive(seed, 1);
            let base: Vec<f64> = (0..40).map(|_| f64::from(u8::from(rng.next_bool()))).collect();
            let plan = plan_full_rank(&base, 40).unwrap();
            let answers = metric_batch(&ds, &plan.matrix, Metric::Sp).unwrap();
            let mut report = reveal_full_rank(&plan, &answers, ds.n1(), ds.n0()).unwrap();
            let pct = report.score(ds.attributes()).unwrap();
            assert_eq!(pct, 100.0, "seed {seed}");
        }
    }

    #[test]
    fn full_rank_sign_rule() {
        // Solve on a 2x2 identity plan with answers equal to v directly.
        let plan = plan_full_rank(&[0.0, 0.0], 2).unwrap();
        let answers = QueryBatch::clean(vec![0.5, -0.5], Metric::Sp);
        let report = reveal_full_rank(&plan, &answers, 1, 1).unwrap();
        assert_eq!(
            report.a_hat,
            vec![AttributeGuess::Advantaged, AttributeGuess::Disadvantaged]
        );
    }

    #[test]
    fn full_rank_under_heavy_noise_is_coin_flipping() {
        // Mean leakage over seeds should sit near 50 when the answers are
        // swamped by noise much larger than 1/N0.
        let mut total = 0.0;
        let trials = 100;
        for seed in 0..trials {
            let ds = synthetic(30, 10, 1000 + seed);
            let base = vec![0.0; 30];
            let plan = plan_full_rank(&base, 30).unwrap();
            let clean = metric_batch(&ds, &plan.matrix, Metric::Sp).unwrap();
            let mut rng = SplitMix64::derive(2000 + seed, 3);
            let noisy: Vec<f64> = clean
                .values
                .iter()
                .map(|v| v + 25.0 * rng.laplace())
                .collect();
            let answers = QueryBatch::clean(noisy, Metric::Sp);
            let mut report = reveal_full_rank(&plan, &answers, ds.n1(), ds.n0()).unwrap();
            total += report.score(ds.attributes()).unwrap();
        }
        let mean = total / trials as f64;
        assert!((45.0..=55.0).contains(&mean), "mean leakage {mean}");
    }

    #[test]
    fn cs_reveal_recovers_sparse_group() {
        let n = 120;
        let n0 = 6;
        let ds = synthetic(n, n0, 77);
        let mut rng = SplitMix64::new(42);
        let base: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let m = 50;
        let plan = plan_compressed_sensing(&base, n, m, 4242).unwrap();
        let answers = metric_batch(&ds, &plan.matrix, Metric::Sp).unwrap();
        for solver in [SparseSolver::Bp, SparseSolver::Omp] {
            let mut report =
                reveal_compressed_sensing(&plan, &answers, ds.n1(), ds.n0(), solver).unwrap();
            let pct = report.score(ds.attributes()).unwrap();
            if solver == SparseSolver::Bp {
                assert_eq!(pct, 100.0);
            } else {
                // OMP needs more measurements on mean-dominated score
                // matrices; it must at least beat coin flipping here.
                assert!(pct >= 50.0, "omp leakage {pct}");
            }
        }
    }

    #[test]
    fn cs_reveal_zero_solution_means_all_advantaged() {
        // With answers equal to H r the residual measurement is zero, the
        // minimum-l1 solution is zero, and nothing crosses the threshold.
        let n = 30;
        let ds = synthetic(n, 5, 3);
        let mut rng = SplitMix64::new(5);
        let base: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let plan = plan_compressed_sensing(&base, n, 12, 99).unwrap();
        let hr: Vec<f64> = plan
            .matrix
            .matrix()
            .iter_rows()
            .map(|row| row.iter().sum::<f64>() / ds.n1() as f64)
            .collect();
        let answers = QueryBatch::clean(hr, Metric::Sp);
        let report =
            reveal_compressed_sensing(&plan, &answers, ds.n1(), ds.n0(), SparseSolver::Bp)
                .unwrap();
        assert!(report
            .a_hat
            .iter()
            .all(|g| *g == AttributeGuess::Advantaged));
    }

    #[test]
    fn deviation_identity_links_v_and_s() {
        // H (r - s) must reproduce H v exactly for every attribute vector.
        let mut rng = SplitMix64::new(11);
        for _ in 0..20 {
            let n = 15;
            let n0 = 1 + rng.next_below(n - 1);
            let mut a = vec![1u8; n];
            for j in rng.sample_indices(n, n0) {
                a[j] = 0;
            }
            let n1 = n - n0;
            let v = target_vector(&a, n1, n0);
            let s = deviation_vector(&a, n1, n0);
            let r = 1.0 / n1 as f64;
            for (vj, sj) in v.iter().zip(&s) {
                assert!((vj - (r - sj)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eo_reveal_marks_negatives_unknown() {
        let y = vec![1, 0, 1, 1, 0, 1, 1, 1];
        let a = vec![1, 0, 0, 1, 1, 1, 0, 1];
        let ds = Dataset::new(y.clone(), a.clone(), None).unwrap();
        let positives = ds.positive_indices();
        let n_pos = positives.len();
        let n1_pos = positives.iter().filter(|&&j| a[j] == 1).count();
        let n0_pos = n_pos - n1_pos;

        let base = vec![0.0; n_pos];
        let plan = plan_full_rank(&base, n_pos).unwrap();
        // Full-length query rows: scatter plan columns onto positive slots.
        let mut values = Vec::new();
        for i in 0..n_pos {
            let mut full = vec![0.0; ds.n()];
            for (k, &j) in positives.iter().enumerate() {
                full[j] = plan.matrix.row(i)[k];
            }
            values.push(crate::fairness::equal_opportunity(&ds, &full).unwrap());
        }
        let answers = QueryBatch::clean(values, Metric::Eo);
        let mut report =
            reveal_equal_opportunity(&plan, &answers, ds.labels(), n1_pos, n0_pos).unwrap();
        for (j, guess) in report.a_hat.iter().enumerate() {
            if y[j] == 0 {
                assert_eq!(*guess, AttributeGuess::Unknown);
            } else {
                assert_eq!(guess.bit(), Some(a[j]));
            }
        }
        let pct = report.score(ds.attributes()).unwrap();
        assert_eq!(pct, 100.0);
    }

    #[test]
    fn partition_unequal_sizes_hand_instance() {
        // n=3, individual 1 alone in its group: labels (alpha, beta, alpha)
        let a = vec![0u8, 1, 0];
        let ds = Dataset::new(vec![1; 3], a, None).unwrap();
        let mut answer =
            |row: &[f64]| statistical_parity(&ds, row).map(f64::abs);
        let part = partition_abs_sp(3, &mut answer, 1e-9).unwrap();
        assert_eq!(part.labels[0], part.labels[2]);
        assert_ne!(part.labels[0], part.labels[1]);
        assert_eq!(part.size_alpha, 2);
        assert_eq!(part.size_beta, 1);
    }

    #[test]
    fn partition_equal_sizes_uses_pair_queries() {
        let a = vec![1u8, 1, 0, 0];
        let ds = Dataset::new(vec![1; 4], a.clone(), None).unwrap();
        let mut queries = 0usize;
        let mut answer = |row: &[f64]| {
            queries += 1;
            statistical_parity(&ds, row).map(f64::abs)
        };
        let part = partition_abs_sp(4, &mut answer, 1e-9).unwrap();
        assert!(queries <= 5);
        // up to label swap: individuals 0,1 together, 2,3 together
        assert_eq!(part.labels[0], part.labels[1]);
        assert_eq!(part.labels[2], part.labels[3]);
        assert_ne!(part.labels[0], part.labels[2]);
    }

    #[test]
    fn partition_matches_truth_up_to_swap_exhaustively() {
        for n in 2..=7usize {
            for mask in 1..(1u32 << n) - 1 {
                let a: Vec<u8> = (0..n).map(|j| ((mask >> j) & 1) as u8).collect();
                let ds = Dataset::new(vec![1; n], a.clone(), None).unwrap();
                let mut count = 0usize;
                let mut answer = |row: &[f64]| {
                    count += 1;
                    statistical_parity(&ds, row).map(f64::abs)
                };
                let part = partition_abs_sp(n, &mut answer, 1e-9).unwrap();
                assert!(count <= n + 1);
                let direct: Vec<bool> = part
                    .labels
                    .iter()
                    .zip(&a)
                    .map(|(l, &t)| (*l == PartitionLabel::Alpha) == (t == a[0]))
                    .collect();
                assert!(
                    direct.iter().all(|&ok| ok),
                    "n={n} mask={mask:b} labels {:?} truth {a:?}",
                    part.labels
                );
            }
        }
    }

    #[test]
    fn leakage_scores() {
        let t = vec![1, 1, 0, 0, 1];
        assert_eq!(leakage(&t, &t).unwrap(), 100.0);
        assert_eq!(leakage(&t, &[1, 1, 1, 1, 1]).unwrap(), 50.0);
        let complement: Vec<u8> = t.iter().map(|v| 1 - v).collect();
        assert_eq!(leakage(&t, &complement).unwrap(), 0.0);
    }

    #[test]
    fn leakage_invariant_under_joint_permutation() {
        let mut rng = SplitMix64::new(9);
        let t: Vec<u8> = (0..20).map(|_| u8::from(rng.next_bool())).collect();
        let g: Vec<u8> = (0..20).map(|_| u8::from(rng.next_bool())).collect();
        let t = {
            // ensure both groups nonempty
            let mut t = t;
            t[0] = 0;
            t[1] = 1;
            t
        };
        let baseline = leakage(&t, &g).unwrap();
        let perm = rng.sample_indices(20, 20);
        let tp: Vec<u8> = perm.iter().map(|&j| t[j]).collect();
        let gp: Vec<u8> = perm.iter().map(|&j| g[j]).collect();
        assert!((leakage(&tp, &gp).unwrap() - baseline).abs() < 1e-12);
    }
}
