"""Joint sensing and wave manipulation on one surface.

Every row of the sampling matrix is decomposed into binary rows; each
binary row becomes a sensing pattern on the mask cells, is interleaved with
the steering configuration and deployed, and the detector power is logged.
The per-row powers are folded back into one linear observation and the
wavefront is recovered by sparse reconstruction.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Protocol

import numpy as np

from . import em
from .cs import ReconstructionOptions, SamplingMatrix, reconstruct
from .decomposition import DecompositionResult, decompose
from .geometry import check_bits, interleave, make_mask, reshape


class MeasurementBackend(Protocol):
    def measure(self, config: np.ndarray) -> float: ...


def measure_all(backend: MeasurementBackend, configs: np.ndarray) -> np.ndarray:
    """Measure a ``(k, n, n)`` stack in order, batched when the backend supports it."""
    batch = getattr(backend, "measure_batch", None)
    if batch is not None:
        return np.asarray(batch(configs), dtype=float)
    return np.array([backend.measure(c) for c in configs], dtype=float)


class PhysicalBackend:
    """Detector power from the reflectarray model."""

    def __init__(self, scene: em.SourceScene):
        self.scene = scene
        self._weights = em.detector_weights(scene)

    def measure(self, config) -> float:
        return em.power_toward(config, self._weights)

    def measure_batch(self, configs) -> np.ndarray:
        return em.power_toward_batch(configs, self._weights)


class IdealLinearBackend:
    """Power is the sum of ``x`` over mask cells whose deployed bit is 1.

    This is the linear measurement the observation model assumes; it serves
    as an exact oracle for the pipeline bookkeeping.
    """

    def __init__(self, x, mask):
        self.mask = check_bits(mask, name="mask")
        m = self.mask.shape[0] // 2
        x = np.asarray(x, dtype=float)
        if x.size != m * m:
            raise ValueError(f"x has {x.size} entries, mask needs {m * m}")
        self.x = x.reshape(m, m)

    def measure(self, config) -> float:
        config = check_bits(config, self.mask.shape)
        return float(np.sum(self.x * config[1::2, 1::2]))

    def measure_batch(self, configs) -> np.ndarray:
        sensed = np.asarray(configs)[:, 1::2, 1::2].astype(float)
        return np.tensordot(sensed, self.x, axes=([1, 2], [0, 1]))


def estimate_X(backend: MeasurementBackend, mask) -> float:
    """Measure with the mask itself deployed: every sensed cell ON, all others OFF."""
    return float(backend.measure(check_bits(mask, name="mask")))


def assemble_observation(r: DecompositionResult, P, X: float) -> float:
    """Fold the per-row powers into one observation: ``sum(s_j P_j) D/U + S X``."""
    P = np.asarray(P, dtype=float)
    if P.shape != (r.rows,):
        raise ValueError(f"expected {r.rows} measurements, got {P.shape}")
    return float(np.dot(r.s.astype(float), P)) * r.D / r.U + r.S * X


@dataclass
class RunManifest:
    K: int
    N: int
    n: int
    m: int
    I_e: int
    epsilon: float
    seed: int | None
    matrix_kind: str | None
    X: float
    per_row_measurements: list[int]
    total_measurements: int
    solver: dict
    converged: bool
    solver_iterations: int
    observations: list[float] = field(default_factory=list)
    monitor_trace: list[float] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_joint_sensing(
    backend: MeasurementBackend,
    c_f,
    A: SamplingMatrix,
    I_e: int = 2,
    epsilon: float = 1e-3,
    opts: ReconstructionOptions | None = None,
    monitor: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, RunManifest]:
    """Sense the impinging wavefront while the surface keeps steering with ``c_f``.

    ``monitor`` receives each batch of deployed configurations (a
    ``(k, n, n)`` stack, one batch per sampling row) and returns one value
    per configuration, e.g. the power still steered toward the target. The
    values are kept in ``manifest.monitor_trace`` in deployment order.
    Returns the ``m x m`` reconstructed wavefront and the run manifest.
    """
    c_f = check_bits(c_f, name="c_f")
    n = c_f.shape[0]
    if c_f.shape != (n, n) or n % 2:
        raise ValueError(f"c_f must be square with even side, got {c_f.shape}")
    m = n // 2
    a = A.entries
    K, N = a.shape
    if N != m * m:
        raise ValueError(f"sampling matrix has N={N} columns, surface needs m^2={m * m}")
    opts = opts or ReconstructionOptions()

    mask = make_mask(n)
    X = estimate_X(backend, mask)
    o = np.empty(K)
    per_row = []
    trace: list[float] = []
    for i in range(K):
        r = decompose(a[i], I_e, epsilon)
        deployed = interleave(c_f, reshape(r.B, m))
        P = measure_all(backend, deployed)
        if monitor is not None:
            trace.extend(float(v) for v in monitor(deployed))
        o[i] = assemble_observation(r, P, X)
        per_row.append(r.rows)

    rec = reconstruct(A, o, opts)
    W = reshape(rec.x, m)
    manifest = RunManifest(
        K=K, N=N, n=n, m=m, I_e=int(I_e), epsilon=float(epsilon),
        seed=getattr(A, "seed", None), matrix_kind=getattr(A, "kind", None),
        X=X, per_row_measurements=per_row, total_measurements=1 + sum(per_row),
        solver=asdict(opts), converged=rec.converged, solver_iterations=rec.iterations,
        observations=[float(v) for v in o], monitor_trace=trace,
    )
    return W, manifest


def wavefront_to_csv(W) -> str:
    W = np.asarray(W, dtype=float)
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in W)


def wavefront_to_pgm(W) -> bytes:
    """8-bit binary graymap normalized over the map's own range."""
    W = np.asarray(W, dtype=float)
    lo, hi = float(W.min()), float(W.max())
    if hi > lo:
        g = np.rint((W - lo) / (hi - lo) * 255)
    else:
        g = np.zeros_like(W)
    rows, cols = W.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + g.astype(np.uint8).tobytes()


def ground_truth_wavefront(scene: em.SourceScene) -> np.ndarray:
    """Incident power ``|E_inc|^2`` at the mask cells, as an ``m x m`` map."""
    e = em.incident_field(scene)
    return (np.abs(e) ** 2)[1::2, 1::2].copy()


def power_centroid(W) -> tuple[float, float]:
    """Power-weighted centroid ``(x, y)`` in cell units, origin at the map center, +y up."""
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    total = float(W.sum())
    if total <= 0:
        return 0.0, 0.0
    k = np.arange(m) - (m - 1) / 2
    cx = float(np.sum(W * k[None, :]) / total)
    cy = float(np.sum(W * -k[:, None]) / total)
    return cx, cy
