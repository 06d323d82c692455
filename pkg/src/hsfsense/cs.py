"""Sampling matrices and sparse reconstruction for ``o = A x``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.fft import idctn

MATRIX_KINDS = ("gaussian", "uniform01", "bernoulli")
SOLVERS = ("greedy-pursuit", "iterative-shrinkage")
BASES = ("identity", "dct2d")


@dataclass(frozen=True)
class SamplingMatrix:
    entries: np.ndarray
    kind: str = "gaussian"
    seed: int = 0

    @property
    def K(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def to_csv(self) -> str:
        return "".join(",".join(repr(float(a)) for a in row) + "\n" for row in self.entries)

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="\n")

    @classmethod
    def from_csv(cls, text: str, kind: str = "gaussian", seed: int = 0) -> "SamplingMatrix":
        rows = [[float(tok) for tok in line.split(",")] for line in text.splitlines() if line.strip()]
        return cls(np.array(rows, dtype=float), kind, seed)

    @classmethod
    def read_csv(cls, path, kind: str = "gaussian", seed: int = 0) -> "SamplingMatrix":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"), kind, seed)


def generate_sampling_matrix(K: int, N: int, kind: str = "gaussian", seed: int = 0) -> SamplingMatrix:
    """Draw a ``K x N`` matrix; gaussian columns are normalized to unit L2 norm."""
    if K < 1 or N < 1:
        raise ValueError(f"K and N must be >= 1, got K={K}, N={N}")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        a = rng.standard_normal((K, N))
        a /= np.linalg.norm(a, axis=0, keepdims=True)
    elif kind == "uniform01":
        a = rng.random((K, N))
    elif kind == "bernoulli":
        a = rng.integers(0, 2, size=(K, N)).astype(float)
    else:
        raise ValueError(f"unknown matrix kind {kind!r}; choose from {MATRIX_KINDS}")
    return SamplingMatrix(a, kind, seed)


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, SamplingMatrix) else np.asarray(A, dtype=float)


def initial_estimate(A, o) -> np.ndarray:
    """Back-projection ``A^T o``."""
    a = _entries(A)
    o = np.asarray(o, dtype=float)
    if o.shape != (a.shape[0],):
        raise ValueError(f"observation length {o.shape} does not match K={a.shape[0]}")
    return a.T @ o


def l1_norm(x) -> float:
    return float(np.sum(np.abs(np.asarray(x, dtype=float))))


@dataclass(frozen=True)
class ReconstructionOptions:
    solver: str = "greedy-pursuit"
    max_iterations: int | None = None  # None: K for greedy pursuit, 5000 for shrinkage
    residual_tolerance: float = 1e-9  # relative to ||o||
    nonnegative: bool = True
    basis: str = "identity"

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}; choose from {BASES}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.residual_tolerance >= 0:
            raise ValueError("residual_tolerance must be >= 0")


@dataclass
class Reconstruction:
    x: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    residual_history: list[float] = field(default_factory=list)


def dct2d_synthesis(m: int) -> np.ndarray:
    """``N x N`` matrix whose columns are orthonormal 2-D DCT atoms on an ``m x m`` image."""
    N = m * m
    eye = np.eye(N).reshape(N, m, m)
    return idctn(eye, axes=(1, 2), norm="ortho").reshape(N, N).T


def _nnls_gram(G, b, x0, max_iter=None):
    """Lawson-Hanson NNLS in normal-equation form, warm-started from a feasible ``x0``.

    Minimizes ``0.5 x^T G x - b^T x`` over ``x >= 0``.
    """
    k = b.size
    x = np.maximum(x0, 0.0)
    passive = x > 0
    tol = 1e-12 * max(1.0, float(np.max(np.abs(b))))
    max_iter = max_iter or 3 * k + 10
    for _ in range(max_iter):
        w = b - G @ x
        cand = np.where(~passive & (w > tol))[0]
        if cand.size == 0:
            break
        passive[cand[np.argmax(w[cand])]] = True
        while True:
            idx = np.where(passive)[0]
            z = np.zeros(k)
            z[idx] = np.linalg.solve(G[np.ix_(idx, idx)], b[idx])
            if np.all(z[idx] > 0):
                x = z
                break
            neg = idx[z[idx] <= 0]
            alpha = np.min(x[neg] / (x[neg] - z[neg]))
            x = x + alpha * (z - x)
            passive &= x > tol
            x[~passive] = 0.0
    return x


def _greedy_pursuit(a, o, max_iter, tol, nonnegative):
    K, N = a.shape
    x = np.zeros(N)
    onorm = float(np.linalg.norm(o))
    r = o.copy()
    history = [onorm]
    if onorm == 0:
        return x, True, 0, 0.0, history
    col_norms = np.linalg.norm(a, axis=0)
    col_norms[col_norms == 0] = np.inf
    gram = a.T @ a
    rhs = a.T @ o
    active: list[int] = []
    coef = np.zeros(0)
    it = 0
    while it < max_iter:
        if history[-1] <= tol * onorm:
            break
        corr = (a.T @ r) / col_norms
        if not nonnegative:
            corr = np.abs(corr)
        if active:
            corr[active] = -np.inf
        j = int(np.argmax(corr))
        if corr[j] <= 0 or len(active) >= min(K, N):
            break
        active.append(j)
        it += 1
        g = gram[np.ix_(active, active)]
        try:
            ls = np.linalg.solve(g, rhs[active])
        except np.linalg.LinAlgError:
            ls = np.linalg.lstsq(a[:, active], o, rcond=None)[0]
        if nonnegative and ls.min() < 0:
            coef = _nnls_gram(g, rhs[active], np.append(coef, 0.0))
        else:
            coef = ls
        x = np.zeros(N)
        x[active] = coef
        r = o - a @ x
        history.append(float(np.linalg.norm(r)))
    converged = history[-1] <= tol * onorm
    return x, converged, it, history[-1], history


def _soft(z, t, nonnegative):
    if nonnegative:
        return np.maximum(z - t, 0.0)
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _shrinkage(a, o, max_iter, tol, nonnegative):
    """Accelerated proximal gradient on ``0.5||Ax-o||^2 + lam ||x||_1`` with lam annealed to ~0."""
    N = a.shape[1]
    onorm = float(np.linalg.norm(o))
    x = np.zeros(N)
    history = [onorm]
    if onorm == 0:
        return x, True, 0, 0.0, history
    L = float(np.linalg.norm(a, 2)) ** 2
    lam = 0.5 * float(np.max(np.abs(a.T @ o)))
    lam_min = lam * 1e-9
    z = x.copy()
    t = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = a.T @ (a @ z - o)
        x_new = _soft(z - grad / L, lam / L, nonnegative)
        t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = x_new + ((t - 1) / t_new) * (x_new - x)
        # restart momentum when the objective direction turns
        if np.dot(z - x_new, x_new - x) < 0:
            z = x_new.copy()
            t_new = 1.0
        x, t = x_new, t_new
        lam = max(lam * 0.97, lam_min)
        res = float(np.linalg.norm(a @ x - o))
        history.append(res)
        if res <= tol * onorm and lam <= lam_min * 1.0001:
            converged = True
            break
    return x, converged, it, history[-1], history


def reconstruct(A, o, opts: ReconstructionOptions | None = None) -> Reconstruction:
    """Recover a sparse ``x`` with ``A x ~ o``.

    Non-convergence is not an error; the last iterate is returned with
    ``converged=False``.
    """
    opts = opts or ReconstructionOptions()
    a = _entries(A)
    o = np.asarray(o, dtype=float)
    if a.ndim != 2 or o.shape != (a.shape[0],):
        raise ValueError(f"observation length {o.shape} does not match matrix shape {a.shape}")
    K, N = a.shape

    if opts.basis == "dct2d":
        m = math.isqrt(N)
        if m * m != N:
            raise ValueError(f"dct2d basis needs a square signal length, got N={N}")
        psi = dct2d_synthesis(m)
        eff = a @ psi
        nonneg_coef = False
    else:
        psi = None
        eff = a
        nonneg_coef = opts.nonnegative

    if opts.solver == "greedy-pursuit":
        max_iter = opts.max_iterations or K
        coef, conv, it, res, hist = _greedy_pursuit(eff, o, max_iter, opts.residual_tolerance, nonneg_coef)
    else:
        max_iter = opts.max_iterations or 5000
        coef, conv, it, res, hist = _shrinkage(eff, o, max_iter, opts.residual_tolerance, nonneg_coef)

    x = coef if psi is None else psi @ coef
    if opts.nonnegative:
        x = np.maximum(x, 0.0)
    return Reconstruction(x=x, converged=conv, iterations=it, residual_norm=res, residual_history=hist)
