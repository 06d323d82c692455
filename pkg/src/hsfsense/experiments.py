"""Experiment configuration, efficiency bookkeeping and position sweeps."""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__, em
from .cs import MATRIX_KINDS, ReconstructionOptions, generate_sampling_matrix
from .geometry import CellGrid, SphericalDirection, make_mask
from .pipeline import (
    IdealLinearBackend,
    PhysicalBackend,
    RunManifest,
    ground_truth_wavefront,
    run_joint_sensing,
    wavefront_to_csv,
    wavefront_to_pgm,
)

# source positions (phi, theta) of the nine sweep cases
SWEEP_POSITIONS: list[tuple[float, float]] = [
    (20, 0), (20, 45), (20, 90),
    (40, 0), (40, 45), (40, 90),
    (60, 0), (60, 45), (0, 0),
]

DEFAULTS_VERSION = "1"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    n: int = 40
    pitch: float = 0.01
    frequency: float = em.DEFAULT_FREQUENCY
    source_phi: float = 0.0
    source_theta: float = 0.0
    source_R: float = 4.0
    detector_phi: float = 0.0
    detector_theta: float = 0.0
    detector_R: float = 4.0
    target_phi: float = 45.0
    target_theta: float = 0.0
    K: int = 300
    I_e: int = 2
    epsilon: float = 1e-3
    seed: int = 0
    matrix_kind: str = "gaussian"
    solver: str = "greedy-pursuit"
    max_iterations: int | None = None
    residual_tolerance: float = 1e-9
    nonnegative: bool = True
    basis: str = "identity"
    backend: str = "physical"
    positions: list[list[float]] = field(default_factory=lambda: [list(p) for p in SWEEP_POSITIONS])
    output_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ConfigError("n", "must be an even integer >= 2")
        for name in ("pitch", "frequency", "source_R", "detector_R"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError("K", "must be an integer >= 1")
        if int(self.I_e) != self.I_e or not 1 <= self.I_e <= 9:
            raise ConfigError("I_e", "must be an integer in [1, 9]")
        if not self.epsilon >= 0:
            raise ConfigError("epsilon", "must be >= 0")
        if self.matrix_kind not in MATRIX_KINDS:
            raise ConfigError("matrix_kind", f"must be one of {MATRIX_KINDS}")
        if self.backend not in ("physical", "ideal"):
            raise ConfigError("backend", "must be 'physical' or 'ideal'")
        for name in ("source_phi", "detector_phi"):
            if not 0 <= getattr(self, name) <= 90:
                raise ConfigError(name, "must lie in [0, 90]")
        try:
            self.options()
        except ValueError as exc:
            raise ConfigError("solver", str(exc)) from exc
        for p in self.positions:
            if len(p) != 2 or not 0 <= p[0] <= 90:
                raise ConfigError("positions", f"bad position {p!r}")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        return cls(**d).validate()

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    @property
    def grid(self) -> CellGrid:
        return CellGrid(self.n, self.pitch)

    @property
    def target(self) -> SphericalDirection:
        return SphericalDirection(self.target_phi, self.target_theta)

    def scene(self, phi: float | None = None, theta: float | None = None) -> em.SourceScene:
        phi = self.source_phi if phi is None else phi
        theta = self.source_theta if theta is None else theta
        return em.SourceScene(
            source=SphericalDirection(phi, theta, self.source_R),
            detector=SphericalDirection(self.detector_phi, self.detector_theta, self.detector_R),
            grid=self.grid,
            frequency=self.frequency,
        )

    def options(self) -> ReconstructionOptions:
        return ReconstructionOptions(
            solver=self.solver, max_iterations=self.max_iterations,
            residual_tolerance=self.residual_tolerance, nonnegative=self.nonnegative, basis=self.basis,
        )

    def sampling_matrix(self):
        return generate_sampling_matrix(self.K, (self.n // 2) ** 2, self.matrix_kind, self.seed)


@dataclass
class EfficiencyRow:
    phi: float
    theta: float
    efficiency: float
    baseline_ratio: float
    sigma: float


def compute_efficiency(P: float, P_max: float) -> float:
    if not P_max > 0:
        raise ValueError(f"P_max must be positive, got {P_max!r}")
    return P / P_max


def baseline_ratio(n: int) -> float:
    m = n // 2
    return (n * n - m * m) / (n * n)


@dataclass
class PositionResult:
    row: EfficiencyRow
    wavefront: np.ndarray
    manifest: RunManifest
    P_max: float


def run_position(config: ExperimentConfig, phi: float, theta: float, A=None) -> PositionResult:
    """Steer with the pure configuration, then sense while steering, for one source position."""
    scene = config.scene(phi, theta)
    c_f = em.synthesize_steering_config(scene, config.target)
    toward_target = em.detector_weights(scene, config.target)
    P_max = em.power_toward(c_f, toward_target)
    A = config.sampling_matrix() if A is None else A
    if config.backend == "physical":
        backend = PhysicalBackend(scene)
    else:
        backend = IdealLinearBackend(ground_truth_wavefront(scene), make_mask(config.n))
    W, manifest = run_joint_sensing(
        backend, c_f, A, config.I_e, config.epsilon, config.options(),
        monitor=lambda stack: em.power_toward_batch(stack, toward_target) / P_max,
    )
    trace = np.asarray(manifest.monitor_trace)
    row = EfficiencyRow(
        phi=float(phi), theta=float(theta),
        efficiency=float(trace.mean()) if trace.size else math.nan,
        baseline_ratio=baseline_ratio(config.n),
        sigma=float(trace.std()) if trace.size else math.nan,
    )
    manifest.extra.update(
        source_phi=float(phi), source_theta=float(theta), P_max=P_max,
        config_hash=config.config_hash(), defaults_version=DEFAULTS_VERSION,
        package_version=__version__, backend=config.backend,
    )
    return PositionResult(row=row, wavefront=W, manifest=manifest, P_max=P_max)


def run_sweep(config: ExperimentConfig, positions=None, workers: int = 1) -> list[PositionResult]:
    """Run every position; ``workers > 1`` spreads positions over processes.

    Positions are independent, so results are identical and in input order
    whatever the worker count.
    """
    positions = config.positions if positions is None else positions
    A = config.sampling_matrix()
    if workers <= 1 or len(positions) <= 1:
        return [run_position(config, p[0], p[1], A) for p in positions]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_position, config, p[0], p[1], A) for p in positions]
        return [f.result() for f in futures]


def sweep_to_csv(rows: list[EfficiencyRow]) -> str:
    lines = ["phi_deg,theta_deg,efficiency,baseline_ratio,sigma"]
    lines += [f"{r.phi!r},{r.theta!r},{r.efficiency!r},{r.baseline_ratio!r},{r.sigma!r}" for r in rows]
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def write_wavefront(outdir, stem: str, W, manifest: RunManifest | None = None) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_atomic(outdir / f"{stem}.csv", wavefront_to_csv(W).encode("utf-8"))
    _write_atomic(outdir / f"{stem}.pgm", wavefront_to_pgm(W))
    if manifest is not None:
        _write_atomic(outdir / f"{stem}.manifest.json", manifest.to_json().encode("utf-8"))


def position_stem(phi: float, theta: float) -> str:
    return f"wavefront_phi{phi:g}_theta{theta:g}"
