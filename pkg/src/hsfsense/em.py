"""Binary-phase reflectarray model of the programmable surface.

An isotropic point source illuminates the cells with a spherical wave. Each
cell reflects with coefficient +1 (bit 1) or -1 (bit 0) and the reflected
field toward a direction is the phase-coherent array-factor sum. Inter-cell
coupling, polarization and element patterns are not modeled.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import speed_of_light

from .geometry import CellGrid, SphericalDirection, angular_distance, check_bits

DEFAULT_FREQUENCY = 15e9


@dataclass(frozen=True)
class SourceScene:
    source: SphericalDirection
    detector: SphericalDirection
    grid: CellGrid = field(default_factory=lambda: CellGrid(40, 0.01))
    frequency: float = DEFAULT_FREQUENCY

    def __post_init__(self):
        if self.source.R is None or self.detector.R is None:
            raise ValueError("source and detector need a radius R")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency!r}")

    @property
    def wavelength(self) -> float:
        return speed_of_light / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength


def source_distances(scene: SourceScene) -> np.ndarray:
    """Distance from the source to every cell center, shape ``(n, n)``."""
    x, y = scene.grid.cell_positions()
    sx, sy, sz = scene.source.position()
    return np.sqrt((x - sx) ** 2 + (y - sy) ** 2 + sz**2)


def spherical_wave(points, source_position, wavenumber: float) -> np.ndarray:
    """``exp(-j k d) / d`` at arbitrary points of shape ``(..., 3)``."""
    d = np.linalg.norm(np.asarray(points, dtype=float) - np.asarray(source_position, dtype=float), axis=-1)
    return np.exp(-1j * wavenumber * d) / d


def incident_field(scene: SourceScene) -> np.ndarray:
    """Unit-amplitude spherical wave ``exp(-j k d) / d`` sampled at the cells."""
    d = source_distances(scene)
    return np.exp(-1j * scene.wavenumber * d) / d


def reflection_coefficients(config) -> np.ndarray:
    return np.where(np.asarray(config) == 1, 1.0, -1.0)


def wrap_phase(psi):
    """Map phases into ``[-pi, pi)``."""
    return (np.asarray(psi) + math.pi) % (2 * math.pi) - math.pi


def synthesize_steering_config(scene: SourceScene, target: SphericalDirection) -> np.ndarray:
    """1-bit configuration turning the source's spherical wave into a beam toward ``target``.

    The continuous compensation phase ``k (d_source - p . u_target)`` is
    quantized to bit 1 where it wraps into ``[-pi/2, pi/2)``.
    """
    x, y = scene.grid.cell_positions()
    u = target.unit_vector()
    psi = scene.wavenumber * (source_distances(scene) - (x * u[0] + y * u[1]))
    w = wrap_phase(psi)
    return ((w >= -math.pi / 2) & (w < math.pi / 2)).astype(np.uint8)


def far_field(config, incident, direction: SphericalDirection, grid: CellGrid, wavelength: float) -> complex:
    """Coherent reflected field toward ``direction``."""
    config = check_bits(config, (grid.n, grid.n))
    incident = np.asarray(incident)
    if incident.shape != (grid.n, grid.n):
        raise ValueError(f"incident field has shape {incident.shape}, expected {(grid.n, grid.n)}")
    x, y = grid.cell_positions()
    u = direction.unit_vector()
    k = 2 * math.pi / wavelength
    phase = np.exp(1j * k * (x * u[0] + y * u[1]))
    return complex(np.sum(reflection_coefficients(config) * incident * phase))


def far_field_grid(config, incident, grid: CellGrid, wavelength: float, phi_deg, theta_deg) -> np.ndarray:
    """Reflected field over a ``(len(phi), len(theta))`` angular grid.

    The lattice is separable in x and y so the sum factors into two
    matrix products per direction.
    """
    weights = reflection_coefficients(check_bits(config, (grid.n, grid.n))) * np.asarray(incident)
    k = 2 * math.pi / wavelength
    xs, ys = grid.cell_positions()
    xs, ys = xs[0], ys[:, 0]
    phi = np.radians(np.asarray(phi_deg, dtype=float))
    theta = np.radians(np.asarray(theta_deg, dtype=float))
    out = np.empty((phi.size, theta.size), dtype=complex)
    for a, p in enumerate(phi):
        ux = math.sin(p) * np.cos(theta)
        uy = math.sin(p) * np.sin(theta)
        ex = np.exp(1j * k * np.outer(ux, xs))
        ey = np.exp(1j * k * np.outer(uy, ys))
        out[a] = np.einsum("ti,ij,tj->t", ey, weights, ex)
    return out


def detector_weights(scene: SourceScene, direction: SphericalDirection | None = None) -> np.ndarray:
    """Per-cell complex gain from source to ``direction`` (detector by default).

    The field toward the direction is ``sum(Gamma * weights)``; precomputing
    the weights makes repeated power measurements a single dot product.
    """
    direction = scene.detector if direction is None else direction
    x, y = scene.grid.cell_positions()
    u = direction.unit_vector()
    return incident_field(scene) * np.exp(1j * scene.wavenumber * (x * u[0] + y * u[1]))


def power_toward(config, weights) -> float:
    e = np.sum(reflection_coefficients(config) * weights)
    return float(e.real**2 + e.imag**2)


def power_toward_batch(configs, weights) -> np.ndarray:
    """:func:`power_toward` for a ``(k, n, n)`` stack of configurations."""
    configs = np.asarray(configs)
    # Gamma = 2 b - 1, so E = 2 sum(b w) - sum(w)
    e = 2 * np.tensordot(configs.astype(float), weights, axes=([1, 2], [0, 1])) - weights.sum()
    return e.real**2 + e.imag**2


def measure_power_physical(config, scene: SourceScene) -> float:
    """Detector power ``|E|^2`` for a full configuration."""
    e = far_field(config, incident_field(scene), scene.detector, scene.grid, scene.wavelength)
    return abs(e) ** 2


@dataclass
class ScatteringDiagram:
    """Reflected power sampled on a regular (phi, theta) grid over the hemisphere."""

    phi: np.ndarray
    theta: np.ndarray
    power: np.ndarray  # shape (len(phi), len(theta))
    resolution: float

    def peak(self) -> tuple[SphericalDirection, float]:
        a, b = np.unravel_index(int(np.argmax(self.power)), self.power.shape)
        return SphericalDirection(float(self.phi[a]), float(self.theta[b])), float(self.power[a, b])

    def samples(self):
        for a, p in enumerate(self.phi):
            for b, t in enumerate(self.theta):
                yield float(p), float(t), float(self.power[a, b])

    def angle_from(self, direction: SphericalDirection) -> np.ndarray:
        """Great-circle angle (deg) of every sample from ``direction``."""
        p = np.radians(self.phi)[:, None]
        t = np.radians(self.theta)[None, :]
        u = direction.unit_vector()
        cosang = np.sin(p) * np.cos(t) * u[0] + np.sin(p) * np.sin(t) * u[1] + np.cos(p) * u[2]
        return np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))

    def main_lobe_halfwidth(self, wavelength: float, aperture: float) -> float:
        """First-null half-width (deg) of a uniform aperture, widened by the scan angle."""
        peak, _ = self.peak()
        width = math.degrees(math.asin(min(1.0, wavelength / aperture)))
        return width / max(math.cos(math.radians(peak.phi)), 0.2)

    def parasitic_level_db(self, exclusion_deg: float) -> tuple[float, SphericalDirection]:
        """Strongest sample outside the main-lobe cone, in dB relative to the peak."""
        peak, pmax = self.peak()
        outside = self.angle_from(peak) > exclusion_deg
        if not outside.any():
            return -math.inf, peak
        masked = np.where(outside, self.power, -1.0)
        a, b = np.unravel_index(int(np.argmax(masked)), masked.shape)
        level = 10 * math.log10(max(self.power[a, b], 1e-300) / pmax)
        return level, SphericalDirection(float(self.phi[a]), float(self.theta[b]))

    def to_csv(self) -> str:
        pmax = float(self.power.max())
        buf = io.StringIO()
        buf.write("theta_deg,phi_deg,power,power_db\n")
        for p, t, w in self.samples():
            db = 10 * math.log10(w / pmax) if w > 0 and pmax > 0 else -math.inf
            buf.write(f"{t!r},{p!r},{w!r},{db!r}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="\n")


def scattering_diagram(config, scene: SourceScene, resolution: float = 1.0) -> ScatteringDiagram:
    """Reflected power over phi in [0, 90], theta in [0, 360) at ``resolution`` degrees."""
    steps_phi = 90 / resolution
    steps_theta = 360 / resolution
    if not (resolution > 0 and abs(steps_phi - round(steps_phi)) < 1e-9 and abs(steps_theta - round(steps_theta)) < 1e-9):
        raise ValueError(f"resolution {resolution!r} must divide 90 and 360 evenly")
    phi = np.arange(round(steps_phi) + 1) * resolution
    theta = np.arange(round(steps_theta)) * resolution
    e = far_field_grid(config, incident_field(scene), scene.grid, scene.wavelength, phi, theta)
    return ScatteringDiagram(phi=phi, theta=theta, power=np.abs(e) ** 2, resolution=resolution)


def peak_error_deg(diagram: ScatteringDiagram, target: SphericalDirection) -> float:
    peak, _ = diagram.peak()
    return angular_distance(peak, target)
