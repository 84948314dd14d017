//! Datasets, prediction matrices and the group-fairness metrics every other
//! module queries.
//!
//! Metrics use the exact finite-sample form `lambda/N1 - mu/N0` with a fixed
//! ascending-index summation order, so repeated evaluations are
//! bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A labelled test population: binary true labels `y`, binary protected
/// attributes `a` (1 = advantaged) and optional feature rows.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<u8>,
    a: Vec<u8>,
    features: Option<Vec<Vec<f64>>>,
    n0: usize,
    n1: usize,
}

impl Dataset {
    pub fn new(y: Vec<u8>, a: Vec<u8>, features: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if y.len() != a.len() {
            return Err(Error::Dimension(format!(
                "labels ({}) and attributes ({}) differ in length",
                y.len(),
                a.len()
            )));
        }
        if let Some(bad) = y.iter().position(|v| *v > 1) {
            return Err(Error::InvalidInput(format!(
                "label y[{bad}] is not binary"
            )));
        }
        if let Some(bad) = a.iter().position(|v| *v > 1) {
            return Err(Error::InvalidInput(format!(
                "attribute a[{bad}] is not binary"
            )));
        }
        if let Some(f) = &features {
            if f.len() != y.len() {
                return Err(Error::Dimension(format!(
                    "feature rows ({}) do not match n ({})",
                    f.len(),
                    y.len()
                )));
            }
        }
        let n1 = a.iter().filter(|v| **v == 1).count();
        let n0 = a.len() - n1;
        Ok(Dataset { y, a, features, n0, n1 })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Size of the disadvantaged group (a=0).
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Size of the advantaged group (a=1).
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn attributes(&self) -> &[u8] {
        &self.a
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }

    /// Indices with y=1, ascending.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.y[j] == 1).collect()
    }

    /// Sub-dataset restricted to individuals with y=1 (used by
    /// equal-opportunity pipelines). Features are dropped.
    pub fn restrict_to_positives(&self) -> Result<Dataset> {
        let idx = self.positive_indices();
        let y = idx.iter().map(|&j| self.y[j]).collect();
        let a = idx.iter().map(|&j| self.a[j]).collect();
        Dataset::new(y, a, None)
    }

    fn require_both_groups(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::EmptyGroup { missing: 0 });
        }
        if self.n1 == 0 {
            return Err(Error::EmptyGroup { missing: 1 });
        }
        Ok(())
    }
}

/// Whether a model's outputs are hard 0/1 decisions or scores in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    Binary,
    Logistic,
}

/// An m x n matrix of model outputs: one row per model, one column per
/// individual.
#[derive(Debug, Clone)]
pub struct PredictionMatrix {
    h: Matrix,
    kind: PredictionKind,
}

impl PredictionMatrix {
    pub fn new(rows: Vec<Vec<f64>>, kind: PredictionKind) -> Result<Self> {
        let h = Matrix::from_rows(rows)?;
        for (i, row) in h.iter_rows().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "prediction ({i},{j})={v} outside [0,1]"
                    )));
                }
                if kind == PredictionKind::Binary && v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "prediction ({i},{j})={v} is not binary"
                    )));
                }
            }
        }
        Ok(PredictionMatrix { h, kind })
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn kind(&self) -> PredictionKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.h.row(i)
    }
}

/// Per-group prediction mass: `lambda` over the advantaged group, `mu` over
/// the disadvantaged group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSums {
    pub lambda: f64,
    pub mu: f64,
}

/// Group prediction sums in ascending index order.
pub fn group_sums(ds: &Dataset, row: &[f64]) -> Result<GroupSums> {
    if row.len() != ds.n() {
        return Err(Error::Dimension(format!(
            "prediction row length {} does not match n={}",
            row.len(),
            ds.n()
        )));
    }
    let mut lambda = 0.0;
    let mut mu = 0.0;
    for (aj, hj) in ds.attributes().iter().zip(row) {
        if *aj == 1 {
            lambda += hj;
        } else {
            mu += hj;
        }
    }
    Ok(GroupSums { lambda, mu })
}

/// Statistical parity gap: mean output over the advantaged group minus mean
/// output over the disadvantaged group, `lambda/N1 - mu/N0`. Always in
/// [-1, 1] for outputs in [0, 1].
pub fn statistical_parity(ds: &Dataset, row: &[f64]) -> Result<f64> {
    ds.require_both_groups()?;
    let s = group_sums(ds, row)?;
    Ok(s.lambda / ds.n1() as f64 - s.mu / ds.n0() as f64)
}

/// Equal opportunity gap: the statistical parity gap restricted to the
/// sub-population with true label y=1.
pub fn equal_opportunity(ds: &Dataset, row: &[f64]) -> Result<f64> {
    if row.len() != ds.n() {
        return Err(Error::Dimension(format!(
            "prediction row length {} does not match n={}",
            row.len(),
            ds.n()
        )));
    }
    let mut lambda = 0.0;
    let mut mu = 0.0;
    let mut n1_pos = 0usize;
    let mut n0_pos = 0usize;
    for ((yj, aj), hj) in ds.labels().iter().zip(ds.attributes()).zip(row) {
        if *yj != 1 {
            continue;
        }
        if *aj == 1 {
            lambda += hj;
            n1_pos += 1;
        } else {
            mu += hj;
            n0_pos += 1;
        }
    }
    if n1_pos == 0 {
        return Err(Error::EmptyPositiveGroup { missing: 1 });
    }
    if n0_pos == 0 {
        return Err(Error::EmptyPositiveGroup { missing: 0 });
    }
    Ok(lambda / n1_pos as f64 - mu / n0_pos as f64)
}

/// The fairness metrics a query batch can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sp,
    AbsSp,
    Eo,
    AbsEo,
}

impl Metric {
    pub fn is_absolute(self) -> bool {
        matches!(self, Metric::AbsSp | Metric::AbsEo)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Sp => "sp",
            Metric::AbsSp => "abs_sp",
            Metric::Eo => "eo",
            Metric::AbsEo => "abs_eo",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Additive mechanism used to privatize a batch, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    #[default]
    None,
    LaplaceGlobal,
    CauchySmooth,
    LaplaceSmooth,
}

impl MechanismKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MechanismKind::None => "none",
            MechanismKind::LaplaceGlobal => "laplace_global",
            MechanismKind::CauchySmooth => "cauchy_smooth",
            MechanismKind::LaplaceSmooth => "laplace_smooth",
        }
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A batch of answered fairness queries, clean or privatized. Clean SP values
/// lie in [-1, 1] and clean absolute values in [0, 1]; privatized values are
/// released raw and unbounded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryBatch {
    pub values: Vec<f64>,
    pub metric: Metric,
    pub privatized: bool,
    pub mechanism: MechanismKind,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

impl QueryBatch {
    pub fn clean(values: Vec<f64>, metric: Metric) -> Self {
        QueryBatch {
            values,
            metric,
            privatized: false,
            mechanism: MechanismKind::None,
            epsilon: None,
            delta: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluate a metric over every row of a prediction matrix. Absolute
/// variants apply |.| per row. Row failures are reported with the offending
/// row index.
pub fn metric_batch(ds: &Dataset, preds: &PredictionMatrix, metric: Metric) -> Result<QueryBatch> {
    if preds.n() != ds.n() {
        return Err(Error::Dimension(format!(
            "prediction matrix has {} columns, dataset has n={}",
            preds.n(),
            ds.n()
        )));
    }
    let mut values = Vec::with_capacity(preds.m());
    for (i, row) in preds.matrix().iter_rows().enumerate() {
        let raw = match metric {
            Metric::Sp | Metric::AbsSp => statistical_parity(ds, row),
            Metric::Eo | Metric::AbsEo => equal_opportunity(ds, row),
        }
        .map_err(|e| e.at_row(i))?;
        values.push(if metric.is_absolute() { raw.abs() } else { raw });
    }
    Ok(QueryBatch::clean(values, metric))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds_10_4() -> Dataset {
        // N1 = 4 (first four advantaged), N0 = 6.
        let a = vec![1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let y = vec![1; 10];
        Dataset::new(y, a, None).unwrap()
    }

    #[test]
    fn sp_identical_means_is_zero() {
        let ds = ds_10_4();
        let row = vec![1.0; 10];
        assert_eq!(statistical_parity(&ds, &row).unwrap(), 0.0);
    }

    #[test]
    fn sp_single_advantaged_acceptor() {
        let ds = ds_10_4();
        let mut row = vec![0.0; 10];
        row[0] = 1.0; // advantaged individual
        assert!((statistical_parity(&ds, &row).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sp_single_disadvantaged_acceptor() {
        let ds = ds_10_4();
        let mut row = vec![0.0; 10];
        row[5] = 1.0; // disadvantaged individual
        let got = statistical_parity(&ds, &row).unwrap();
        assert!((got + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn sp_requires_both_groups() {
        let ds = Dataset::new(vec![1, 1], vec![1, 1], None).unwrap();
        match statistical_parity(&ds, &[1.0, 0.0]) {
            Err(Error::EmptyGroup { missing: 0 }) => {}
            other => panic!("expected empty-group error, got {other:?}"),
        }
    }

    #[test]
    fn eo_equals_sp_when_all_positive() {
        let ds = ds_10_4();
        let mut row = vec![0.3; 10];
        row[2] = 0.9;
        let sp = statistical_parity(&ds, &row).unwrap();
        let eo = equal_opportunity(&ds, &row).unwrap();
        assert!((sp - eo).abs() < 1e-15);
    }

    #[test]
    fn eo_zero_when_only_negatives_accepted() {
        let y = vec![1, 0, 1, 0, 1, 0];
        let a = vec![1, 1, 1, 0, 0, 0];
        let ds = Dataset::new(y, a, None).unwrap();
        // accept only y=0 individuals
        let row = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        assert_eq!(equal_opportunity(&ds, &row).unwrap(), 0.0);
    }

    #[test]
    fn eo_on_positive_subset() {
        // n=6: positives are 2 advantaged (0,1) + 2 disadvantaged (3,4);
        // accepting exactly one advantaged positive gives 1/2.
        let y = vec![1, 1, 0, 1, 1, 0];
        let a = vec![1, 1, 1, 0, 0, 0];
        let ds = Dataset::new(y, a, None).unwrap();
        let mut row = vec![0.0; 6];
        row[0] = 1.0;
        assert!((equal_opportunity(&ds, &row).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eo_empty_positive_group_error() {
        let y = vec![1, 0, 1];
        let a = vec![1, 0, 1]; // no disadvantaged positive
        let ds = Dataset::new(y, a, None).unwrap();
        match equal_opportunity(&ds, &[1.0, 1.0, 1.0]) {
            Err(Error::EmptyPositiveGroup { missing: 0 }) => {}
            other => panic!("expected empty-positive-group, got {other:?}"),
        }
    }

    #[test]
    fn batch_singleton_matches_scalar() {
        let ds = ds_10_4();
        let mut row = vec![0.0; 10];
        row[0] = 1.0;
        let pm = PredictionMatrix::new(vec![row.clone()], PredictionKind::Binary).unwrap();
        let batch = metric_batch(&ds, &pm, Metric::Sp).unwrap();
        assert_eq!(batch.values.len(), 1);
        assert_eq!(batch.values[0], statistical_parity(&ds, &row).unwrap());
        assert!(!batch.privatized);
    }

    #[test]
    fn batch_abs_sp_drops_signs() {
        let ds = ds_10_4();
        let mut acceptor = vec![0.0; 10];
        acceptor[0] = 1.0;
        let mut rejector = vec![0.0; 10];
        rejector[5] = 1.0;
        let pm =
            PredictionMatrix::new(vec![acceptor, rejector], PredictionKind::Binary).unwrap();
        let batch = metric_batch(&ds, &pm, Metric::AbsSp).unwrap();
        assert!((batch.values[0] - 0.25).abs() < 1e-15);
        assert!((batch.values[1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn batch_empty_is_ok() {
        let ds = ds_10_4();
        let pm = PredictionMatrix {
            h: Matrix::zeros(0, 10),
            kind: PredictionKind::Binary,
        };
        let batch = metric_batch(&ds, &pm, Metric::Sp).unwrap();
        assert!(batch.is_empty());
    }

    #[test]
    fn batch_error_carries_row_index() {
        let ds = Dataset::new(vec![1, 1], vec![1, 1], None).unwrap();
        let pm = PredictionMatrix::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            PredictionKind::Binary,
        )
        .unwrap();
        match metric_batch(&ds, &pm, Metric::Sp) {
            Err(Error::BatchRow { row: 0, .. }) => {}
            other => panic!("expected row-tagged error, got {other:?}"),
        }
    }

    #[test]
    fn binary_kind_rejects_fractions() {
        assert!(PredictionMatrix::new(vec![vec![0.5]], PredictionKind::Binary).is_err());
        assert!(PredictionMatrix::new(vec![vec![0.5]], PredictionKind::Logistic).is_ok());
        assert!(PredictionMatrix::new(vec![vec![1.2]], PredictionKind::Logistic).is_err());
    }

    #[test]
    fn group_sums_route_matches_direct_conditional_means() {
        // Independent route: average the accepted indicator per group by
        // explicit iteration over each group's members.
        let mut rng = crate::rng::SplitMix64::new(321);
        for _ in 0..50 {
            let n = 20;
            let mut a = vec![1u8; n];
            let n0 = 1 + rng.next_below(n - 1);
            for j in rng.sample_indices(n, n0) {
                a[j] = 0;
            }
            let row: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.next_bool()))).collect();
            let ds = Dataset::new(vec![1; n], a.clone(), None).unwrap();
            let via_sums = statistical_parity(&ds, &row).unwrap();
            let mean = |group: u8| {
                let members: Vec<f64> = a
                    .iter()
                    .zip(&row)
                    .filter(|(aj, _)| **aj == group)
                    .map(|(_, h)| *h)
                    .collect();
                members.iter().sum::<f64>() / members.len() as f64
            };
            let direct = mean(1) - mean(0);
            assert!((via_sums - direct).abs() <= 1e-12);
        }
    }
}
