"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--json]

Reports the best-of-N wall time for each kernel on representative inputs
plus a full DecisionTree / RandomForest / RbfSVM fit on the bundled
training fixture, and checks that both backends return identical bytes.
"""

from __future__ import annotations

import argparse
import json
import time
from importlib import resources

import numpy as np

from aptattrib import kernels
from aptattrib.classifiers import Hyperparams, fit
from aptattrib.dataset import build_encoder, load_training_csv


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _digest(value) -> bytes:
    if isinstance(value, tuple):
        return b"".join(np.float64(v).tobytes() for v in value)
    return np.asarray(value).tobytes()


def kernel_cases():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 3, size=(500, 267)).astype(np.float64)
    y = rng.integers(0, 10, size=500).astype(np.intp)
    w = np.full(500, 1.0 / 500)
    idx = np.arange(500, dtype=np.intp)
    feats = np.arange(267, dtype=np.intp)
    A = rng.normal(size=(500, 8))
    K = np.exp(-0.1 * ((A[:, None, :] - A[None, :, :]) ** 2).sum(-1)) + 1.0
    ys = np.where(rng.random(500) < 0.5, -1.0, 1.0)
    return {
        "best_split[500x267, 10 classes]": lambda m: m.best_split(X, y, w, idx, feats, 10),
        "svm_dual_cd[500, 20 passes]": lambda m: m.svm_dual_cd(K, ys, 1.0, 20),
    }


def model_cases():
    path = resources.files("aptattrib.fixtures").joinpath("russian_apt_training.csv")
    train = load_training_csv(str(path))
    X = build_encoder(train).encode_rows(train.rows)
    labels = train.labels()
    hp = Hyperparams(forest_trees=20)
    cases = {
        f"fit DecisionTree [{X.shape[0]} rows]": "DecisionTree",
        f"fit RandomForest x20 [{X.shape[0]} rows]": "RandomForest",
        f"fit RbfSVM [{X.shape[0]} rows]": "RbfSVM",
    }
    return {name: (lambda kind=kind: fit(kind, X, labels, hp, 42)) for name, kind in cases.items()}, X


def _swap(module):
    """Point the classifier code at ``module`` for a model-level timing."""
    kernels.best_split = module.best_split
    kernels.svm_dual_cd = module.svm_dual_cd


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="emit machine-readable results")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy fallback is available")
    original = (kernels.best_split, kernels.svm_dual_cd)
    rows = []
    for name, call in kernel_cases().items():
        res = {}
        for bname, mod in backends.items():
            secs, out = best_of(lambda: call(mod), args.repeat)
            res[bname] = (secs, _digest(out))
        rows.append((name, res))
    calls, X = model_cases()
    for name, call in calls.items():
        res = {}
        for bname, mod in backends.items():
            _swap(mod)
            secs, model = best_of(call, args.repeat)
            res[bname] = (secs, model.predict_proba_matrix(X).tobytes())
        rows.append((name, res))
    kernels.best_split, kernels.svm_dual_cd = original

    report = []
    for name, res in rows:
        py = res["python"][0]
        cy = res.get("cython", (None, None))[0]
        same = len({v[1] for v in res.values()}) == 1
        report.append({"case": name, "python_s": py, "cython_s": cy, "speedup": (py / cy) if cy else None, "identical": same})
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"{'case':42s} {'python':>10s} {'cython':>10s} {'speedup':>8s}  identical")
        for r in report:
            cy = f"{r['cython_s']:.4f}s" if r["cython_s"] is not None else "-"
            sp = f"{r['speedup']:.1f}x" if r["speedup"] else "-"
            print(f"{r['case']:42s} {r['python_s']:.4f}s {cy:>10s} {sp:>8s}  {r['identical']}")
    return 0 if all(r["identical"] for r in report) else 1


if __name__ == "__main__":
    raise SystemExit(main())
