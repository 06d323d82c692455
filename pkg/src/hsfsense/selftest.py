"""Fast oracle checks against the ideal linear backend (used by ``hsfsense selftest``)."""
from __future__ import annotations

import numpy as np

from .cs import generate_sampling_matrix
from .decomposition import decompose, recompose
from .geometry import make_mask
from .pipeline import IdealLinearBackend, estimate_X, run_joint_sensing


def sparse_nonnegative(N: int, k: int, rng) -> np.ndarray:
    x = np.zeros(N)
    x[rng.choice(N, size=k, replace=False)] = rng.uniform(0.5, 1.5, size=k)
    return x


def run_selftest(n: int = 16, K: int = 48, k: int = 4, trials: int = 5, print_fn=print) -> list[str]:
    failures = []
    m = n // 2
    N = m * m
    mask = make_mask(n)
    rng = np.random.default_rng(12345)

    def check(name, ok, detail=""):
        print_fn(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
        if not ok:
            failures.append(name)

    v = rng.standard_normal((200, N))
    worst = max(
        float(np.max(np.abs(row - recompose(r))) / (0.5 * r.D * 1e-2))
        for row in v for r in [decompose(row, 2, 0.0)]
    )
    check("decomposition-rounding-bound", worst <= 1.0 + 1e-9, f"(worst/bound={worst:.3f})")

    x = sparse_nonnegative(N, k, rng)
    X = estimate_X(IdealLinearBackend(x, mask), mask)
    check("mask-measurement-equals-sum", np.isclose(X, x.sum(), rtol=0, atol=1e-12), f"(X={X:.6g})")

    for t in range(trials):
        A = generate_sampling_matrix(K, N, "gaussian", seed=t)
        x = sparse_nonnegative(N, k, rng)
        c_f = rng.integers(0, 2, size=(n, n))
        W, man = run_joint_sensing(IdealLinearBackend(x, mask), c_f, A, 2, 0.0)
        o = np.asarray(man.observations)
        bound = np.array([0.5e-2 * decompose(a, 2, 0.0).D * x.sum() for a in A.entries]) + 1e-12
        exact = bool(np.all(np.abs(o - A.entries @ x) <= bound))
        err = float(np.linalg.norm(W.ravel() - x) / np.linalg.norm(x))
        check(f"trial-{t}-observation-bound", exact)
        check(f"trial-{t}-reconstruction", err < 0.05, f"(rel_err={err:.2e})")
    return failures
