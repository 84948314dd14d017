//! Property tests for the structural invariants: metric symmetries, the
//! flip identity that powers the attacks, solver optimality against the
//! enumeration oracle, and mechanism noise independence.

use proptest::prelude::*;

use fairaudit_core::fairness::{Metric, QueryBatch};
use fairaudit_core::matrix::Matrix;
use fairaudit_core::privacy::{
    conceal_sp_cauchy, global_sensitivity, laplace_global_mechanism, smooth_sensitivity_abs_sp,
    smooth_sensitivity_sp,
};
use fairaudit_core::reconstruct::leakage;
use fairaudit_core::solver::{basis_pursuit, min_l1_by_enumeration, LinearSystem};
use fairaudit_core::{statistical_parity, Dataset};

fn dataset_with_both_groups(n: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..=1, n).prop_filter("both groups nonempty", |a| {
        a.contains(&0) && a.contains(&1)
    })
}

fn scores(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, n)
}

proptest! {
    #[test]
    fn sp_invariant_under_joint_permutation(
        a in dataset_with_both_groups(12),
        row in scores(12),
        perm_seed in any::<u64>(),
    ) {
        let ds = Dataset::new(vec![1; 12], a.clone(), None).unwrap();
        let base = statistical_parity(&ds, &row).unwrap();
        let mut rng = fairaudit_core::rng::SplitMix64::new(perm_seed);
        let perm = rng.sample_indices(12, 12);
        let ap: Vec<u8> = perm.iter().map(|&j| a[j]).collect();
        let rowp: Vec<f64> = perm.iter().map(|&j| row[j]).collect();
        let dsp = Dataset::new(vec![1; 12], ap, None).unwrap();
        let permuted = statistical_parity(&dsp, &rowp).unwrap();
        prop_assert!((base - permuted).abs() < 1e-12);
    }

    #[test]
    fn sp_flip_identity(
        a in dataset_with_both_groups(10),
        row in scores(10),
        j in 0usize..10,
        delta in -1.0f64..=1.0,
    ) {
        // Changing prediction j by delta moves SP by exactly +delta/N1 or
        // -delta/N0 depending on the individual's group.
        let ds = Dataset::new(vec![1; 10], a.clone(), None).unwrap();
        let mut shifted = row.clone();
        shifted[j] = (shifted[j] + delta).clamp(0.0, 1.0);
        let applied = shifted[j] - row[j];
        let before = statistical_parity(&ds, &row).unwrap();
        let after = statistical_parity(&ds, &shifted).unwrap();
        let expected = if a[j] == 1 {
            applied / ds.n1() as f64
        } else {
            -applied / ds.n0() as f64
        };
        prop_assert!((after - before - expected).abs() < 1e-12);
    }

    #[test]
    fn sp_bounded_by_one(a in dataset_with_both_groups(9), row in scores(9)) {
        let ds = Dataset::new(vec![1; 9], a, None).unwrap();
        let sp = statistical_parity(&ds, &row).unwrap();
        prop_assert!(sp.abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn leakage_invariant_under_joint_permutation(
        a in dataset_with_both_groups(14),
        guess in proptest::collection::vec(0u8..=1, 14),
        perm_seed in any::<u64>(),
    ) {
        let base = leakage(&a, &guess).unwrap();
        let mut rng = fairaudit_core::rng::SplitMix64::new(perm_seed);
        let perm = rng.sample_indices(14, 14);
        let ap: Vec<u8> = perm.iter().map(|&j| a[j]).collect();
        let gp: Vec<u8> = perm.iter().map(|&j| guess[j]).collect();
        prop_assert!((leakage(&ap, &gp).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn smooth_sensitivity_never_exceeds_global(
        n in 5usize..400,
        n0_frac in 0.0f64..=1.0,
        m in 1usize..50,
        beta_exp in -4.0f64..1.0,
    ) {
        let n0 = 2 + ((n / 2 - 2) as f64 * n0_frac) as usize;
        let n1 = n - n0;
        let beta = 10f64.powf(beta_exp);
        let smooth = smooth_sensitivity_sp(m, n, n0, n1, beta).unwrap().value;
        let global = global_sensitivity(Metric::Sp, m, n).unwrap().value;
        prop_assert!(smooth <= global + 1e-12);
        let s_abs = smooth_sensitivity_abs_sp(m, n0, beta).unwrap().value;
        let g_abs = global_sensitivity(Metric::AbsSp, m, n).unwrap().value;
        prop_assert!(s_abs <= g_abs + 1e-12);
    }

    #[test]
    fn mechanisms_commute_with_constant_shifts(
        values in proptest::collection::vec(-0.5f64..=0.5, 1..12),
        shift in -0.9f64..=0.9,
        seed in any::<u64>(),
    ) {
        // Additive noise must not depend on the query values.
        let base = QueryBatch::clean(values.clone(), Metric::Sp);
        let shifted = QueryBatch::clean(
            values.iter().map(|v| v + shift).collect(),
            Metric::Sp,
        );
        let a = laplace_global_mechanism(&base, 30, 2.0, seed).unwrap();
        let b = laplace_global_mechanism(&shifted, 30, 2.0, seed).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((y - x - shift).abs() < 1e-9);
        }
        let c = conceal_sp_cauchy(&base, 30, 5, 25, 4.0, seed).unwrap();
        let d = conceal_sp_cauchy(&shifted, 30, 5, 25, 4.0, seed).unwrap();
        for (x, y) in c.values.iter().zip(&d.values) {
            prop_assert!((y - x - shift).abs() < 1e-9);
        }
    }
}

proptest! {
    // LP solves are heavier; keep the case count modest.
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bp_never_beaten_by_sparse_enumeration(
        entries in proptest::collection::vec(-1.0f64..=1.0, 5 * 9),
        support_bits in proptest::collection::vec(0u8..=1, 9),
        coefs in proptest::collection::vec(0.3f64..=1.5, 9),
    ) {
        let rows: Vec<Vec<f64>> = entries.chunks(9).map(|c| c.to_vec()).collect();
        let matrix = Matrix::from_rows(rows).unwrap();
        let planted: Vec<f64> = support_bits
            .iter()
            .zip(&coefs)
            .enumerate()
            .map(|(j, (&b, &c))| if b == 1 && j < 2 { c } else { 0.0 })
            .collect();
        let rhs = matrix.matvec(&planted);
        let sys = LinearSystem::new(matrix, rhs).unwrap();
        let Ok(sol) = basis_pursuit(&sys) else {
            // Degenerate random instances (e.g. near-zero rows) may be
            // legitimately unsolvable at the default tolerance.
            return Ok(());
        };
        let l1: f64 = sol.s.iter().map(|v| v.abs()).sum();
        if let Some(oracle) = min_l1_by_enumeration(&sys, 2, 1e-8) {
            let ol1: f64 = oracle.iter().map(|v| v.abs()).sum();
            prop_assert!(l1 <= ol1 + 1e-8, "bp {l1} worse than oracle {ol1}");
        }
    }
}
