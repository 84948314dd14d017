#!/usr/bin/env python3
"""Smoke test for the fairaudit Python bindings.

Builds nothing itself: run `cargo build -p fairaudit-py` (or --release)
first. The script locates the produced cdylib, imports it as `fairaudit`,
and exercises the metric, attack, sensitivity and mechanism surfaces.
"""
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libfairaudit.so", "libfairaudit.dylib", "fairaudit.dll")
    ]
    for cand in candidates:
        if cand.exists():
            return cand
    sys.exit("bindings not built; run `cargo build -p fairaudit-py` first")


def import_module():
    lib = locate_cdylib()
    stage = Path(tempfile.mkdtemp(prefix="fairaudit_py_"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, stage / f"fairaudit{suffix}")
    sys.path.insert(0, str(stage))
    import fairaudit

    return fairaudit


checks = 0


def check(name: str, cond: bool, detail: str = ""):
    global checks
    checks += 1
    if not cond:
        sys.exit(f"FAILED: {name} {detail}")
    print(f"  ok: {name}")


def main():
    fa = import_module()
    print(f"imported fairaudit from {fa.__file__}")

    # metric values on the single-acceptor examples
    ds = fa.Dataset([1] * 10, [1, 1, 1, 1, 0, 0, 0, 0, 0, 0])
    row = [0.0] * 10
    row[0] = 1.0
    check("sp single advantaged acceptor", abs(fa.statistical_parity(ds, row) - 0.25) < 1e-12)
    row = [0.0] * 10
    row[5] = 1.0
    check(
        "sp single disadvantaged acceptor",
        abs(fa.statistical_parity(ds, row) + 1.0 / 6.0) < 1e-12,
    )

    # full-rank attack on clean answers leaks everything
    ds, scores = fa.gen_synthetic(100, 10, 42)
    base = [1.0 if s >= 0.5 else 0.0 for s in scores]
    plan = fa.plan_full_rank(base, ds.n)
    answers = fa.metric_batch(ds, plan.matrix, "sp")
    report = fa.reveal_full_rank(plan, answers, ds.n1, ds.n0, a_true=ds.attributes)
    check("full-rank attack leaks 100%", report.leakage_pct == 100.0)

    # sensing attack with far fewer queries
    m = fa.auto_query_count(ds.n, ds.n0, 1.74)
    plan = fa.plan_compressed_sensing(scores, ds.n, m, 7)
    answers = fa.metric_batch(ds, plan.matrix, "sp")
    report = fa.reveal_compressed_sensing(
        plan, answers, ds.n1, ds.n0, solver="bp", a_true=ds.attributes
    )
    check(f"sensing attack with m={m} queries leaks 100%", report.leakage_pct == 100.0)

    # sensitivity calculators match their oracles
    check(
        "smooth sensitivity example value",
        abs(fa.smooth_sensitivity_sp(1, 12, 3, 9, 0.5) - (0.1 + 1 / 3)) < 1e-12,
    )
    check(
        "smooth closed form equals sweep",
        abs(
            fa.smooth_sensitivity_sp(3, 200, 40, 160, 0.02)
            - fa.brute_force_smooth("sp", 3, 200, 40, 0.02)
        )
        < 1e-12,
    )
    check("global sensitivity formula", abs(fa.global_sensitivity("sp", 1, 4) - 5 / 6) < 1e-12)
    check("enumerated sp sensitivity", abs(fa.brute_force_global("sp", 4) - 5 / 6) < 1e-12)

    # mechanisms: deterministic under a seed, noisy, never clipped
    batch = fa.metric_batch(ds, plan.matrix, "sp")
    sealed_a = fa.conceal_sp_cauchy(batch, ds.n, ds.n0, ds.n1, 10.0, 99)
    sealed_b = fa.conceal_sp_cauchy(batch, ds.n, ds.n0, ds.n1, 10.0, 99)
    check("cauchy mechanism deterministic", sealed_a.values == sealed_b.values)
    check("cauchy mechanism flagged", sealed_a.privatized and sealed_a.mechanism == "cauchy_smooth")
    check(
        "cauchy mechanism perturbs",
        any(abs(x - y) > 1e-9 for x, y in zip(sealed_a.values, batch.values)),
    )
    lap = fa.laplace_global_mechanism(batch, ds.n, 5.0, 3)
    check("laplace mechanism flagged", lap.privatized and lap.mechanism == "laplace_global")

    # attacking privatized answers degrades leakage toward coin flipping
    noisy_report = fa.reveal_compressed_sensing(
        plan, sealed_a, ds.n1, ds.n0, solver="bp", eq_tol=1.0, a_true=ds.attributes
    )
    check("defense degrades the attack", noisy_report.leakage_pct < 100.0)

    # solvers
    v = fa.solve_full_rank([[1.0, 1.0], [1.0, 0.0]], [3.0, 1.0])
    check("full-rank solve", abs(v[0] - 1.0) < 1e-9 and abs(v[1] - 2.0) < 1e-9)
    s, resid, support = fa.basis_pursuit([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]], [2.0, 2.0])
    check("basis pursuit picks the sparse certificate", support == [2] and abs(s[2] - 2.0) < 1e-6)
    s, resid, support = fa.omp([[1.0, 0.0], [0.0, 1.0]], [0.0, 3.0], 1)
    check("omp picks the active column", support == [1] and abs(s[1] - 3.0) < 1e-9)

    # experiment runner round-trips through JSON
    rows = json.loads(
        fa.run_experiment_json(
            json.dumps(
                {
                    "n": 40,
                    "n0": 8,
                    "attack": "full_rank",
                    "epsilons": ["inf"],
                    "trials": 3,
                    "seed": 1,
                }
            )
        )
    )
    check(
        "experiment sweep clean full-rank rows",
        len(rows) == 3 and all(r["leakage_pct"] == 100.0 and r["avg_sp_err"] == 0.0 for r in rows),
    )

    # baseline trainer separates a toy problem
    feats = [[-2.0, 0.0], [-1.5, 0.5], [1.5, -0.5], [2.0, 0.0]]
    scores = fa.train_baseline(feats, [0, 0, 1, 1], 400, 0.5, 0)
    check(
        "baseline separates toy data",
        all((s >= 0.5) == (y == 1) for s, y in zip(scores, [0, 0, 1, 1])),
    )
    check("leakage scoring", fa.leakage([1, 0, 1, 0], [1, 0, 1, 0]) == 100.0)
    check(
        "leakage of constant guess",
        abs(fa.leakage([1, 0, 1, 0], [1, 1, 1, 1]) - 50.0) < 1e-12,
    )
    check("cauchy quartile sanity", math.isfinite(sealed_a.values[0]))

    print(f"smoke test passed ({checks} checks)")


if __name__ == "__main__":
    main()
