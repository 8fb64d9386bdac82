"""Geometry, per-unit propagation terms, channel vectors and quadratic forms.

The surface lies in the z=0 plane centred on the origin.  Sources sit behind it
(z < 0) and observation points in front (z > 0); because every unit has z=0
only the in-plane geometry and the distances matter.  Angles are degrees at
this module's boundary and radians internally.

A received field at one observation point is ``h . e^{j omega}`` where entry
``n`` of ``h`` is

    g * sum_m E_m exp(-j 2 pi r_m^t(n) / wl) / r_m^t(n)
          * exp(-j 2 pi r^r(n) / wl) / r^r(n)

in spherical mode.  Far-field mode replaces the receive-side term with the
common factor ``exp(-j 2 pi r / wl) / r`` times the plane-wave phase
``exp(+j 2 pi p_n . u(theta, phi) / wl)``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, GeometryError

MODES = ("spherical", "far-field")


class ObservationPoint(NamedTuple):
    r: float
    theta: float
    phi: float


class SuppressionPoint(NamedTuple):
    r: float
    theta: float
    phi: float
    threshold: float | None


@dataclass(frozen=True)
class Source:
    r: float
    theta: float
    phi: float
    field_amplitude: float = 1.0


@dataclass(frozen=True)
class UnitGrid:
    positions: np.ndarray  # (N, 3) metres
    rows: int
    cols: int
    spacing: float

    @property
    def size(self):
        return self.positions.shape[0]


def build_grid(rows, cols, d):
    """Centred ``rows x cols`` lattice with pitch ``d`` in the z=0 plane.

    Columns run along x and rows along y; units are ordered row-major.
    """
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise ConfigError(f"grid needs positive integer rows/cols, got {rows}x{cols}")
    if not d > 0:
        raise ConfigError(f"unit spacing must be positive, got {d}")
    rows, cols = int(rows), int(cols)
    xs = (np.arange(cols) - (cols - 1) / 2.0) * d
    ys = (np.arange(rows) - (rows - 1) / 2.0) * d
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    pos = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(rows * cols)])
    return UnitGrid(positions=pos, rows=rows, cols=cols, spacing=float(d))


def direction(theta, phi):
    """Unit vector for elevation ``theta`` and azimuth ``phi`` in degrees.

    Negative elevations are accepted; ``(-t, p)`` is the same direction as
    ``(t, p + 180)``, which is how the 2-D cross-section angles are written.
    """
    th = np.deg2rad(np.asarray(theta, dtype=float))
    ph = np.deg2rad(np.asarray(phi, dtype=float))
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def source_position(src):
    u = direction(src.theta, src.phi)
    return src.r * np.array([u[0], u[1], -u[2]])


def _check_mode(mode):
    if mode not in MODES:
        raise ConfigError(f"unknown propagation mode {mode!r}; expected one of {MODES}")


def incident_field(grid, sources, wavelength):
    """Field arriving at each unit: ``sum_m E_m exp(-j k r_m(n)) / r_m(n)``."""
    if not wavelength > 0:
        raise ConfigError("wavelength must be positive")
    k = 2.0 * np.pi / wavelength
    inc = np.zeros(grid.size, dtype=complex)
    for src in sources:
        if not src.r > 0:
            raise ConfigError("source distance must be positive")
        dist = np.linalg.norm(grid.positions - source_position(src), axis=1)
        if np.any(dist <= 0):
            raise GeometryError("source coincides with a unit")
        inc += src.field_amplitude * np.exp(-1j * k * dist) / dist
    return inc


def receive_terms(grid, points, wavelength, mode="spherical"):
    """Per-unit receive-side propagation terms, shape ``(len(points), N)``."""
    _check_mode(mode)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r, theta, phi = pts[:, 0], pts[:, 1], pts[:, 2]
    if np.any(r <= 0):
        raise ConfigError("observation distance must be positive")
    k = 2.0 * np.pi / wavelength
    u = direction(theta, phi)  # (P, 3)
    if mode == "spherical":
        obs = r[:, None] * u
        dist = np.linalg.norm(obs[:, None, :] - grid.positions[None, :, :], axis=2)
        if np.any(dist <= 0):
            raise GeometryError("observation point coincides with a unit")
        return np.exp(-1j * k * dist) / dist
    common = np.exp(-1j * k * r) / r
    return common[:, None] * np.exp(1j * k * (u @ grid.positions.T))


@dataclass(frozen=True)
class ChannelVector:
    h: np.ndarray
    point: ObservationPoint


def channel_matrix(grid, sources, points, wavelength, gain=1.0, mode="spherical"):
    """Stacked channel vectors for many observation points, ``(P, N)``."""
    inc = incident_field(grid, sources, wavelength)
    return gain * receive_terms(grid, points, wavelength, mode) * inc[None, :]


def channel_vector(grid, sources, observation, wavelength, gain=1.0, mode="spherical"):
    point = ObservationPoint(*map(float, observation))
    h = channel_matrix(grid, sources, [point], wavelength, gain, mode)[0]
    return ChannelVector(h=h, point=point)


@dataclass(frozen=True)
class QuadraticForm:
    """The rank-1 Hermitian form ``scale * h h^H``, stored by its factor.

    Evaluated at phases ``omega`` as ``scale * |h . e^{j omega}|^2``.
    """

    factor: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("quadratic form scale must be positive")

    @property
    def dimension(self):
        return self.factor.size

    def __call__(self, omega):
        return self.scale * np.abs(self.factor @ np.exp(1j * np.asarray(omega, dtype=float))) ** 2

    def coherent_bound(self):
        """Largest value over all phases, reached by ``omega = -arg(h)``."""
        return self.scale * np.sum(np.abs(self.factor)) ** 2

    def mrc_phases(self):
        return np.mod(-np.angle(self.factor), 2 * np.pi)

    def matrix(self):
        """Dense ``scale * conj(h) h^T`` (so ``w^H M w`` matches with ``w = e^{j omega}``)."""
        return self.scale * np.outer(np.conj(self.factor), self.factor)


def quadratic_form(h, scale=1.0):
    """Wrap a channel vector (or raw array) as a rank-1 form.

    Use ``scale = 1/alpha`` for a served user of weight ``alpha`` and ``1`` for a
    suppression sample.
    """
    factor = h.h if isinstance(h, ChannelVector) else np.asarray(h, dtype=complex)
    return QuadraticForm(factor=np.ascontiguousarray(factor, dtype=complex), scale=float(scale))


def _inclusive_grid(lo, hi, step):
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def discretize_suppression(region):
    """Inclusive ``(theta, phi)`` sample grid for one suppression region."""
    lo_t, hi_t = region.theta
    lo_p, hi_p = region.phi
    if not region.sample_spacing > 0:
        raise ConfigError("sample_spacing must be positive")
    if lo_t > hi_t or lo_p > hi_p:
        raise ConfigError(f"suppression bounds out of order: theta={region.theta}, phi={region.phi}")
    thetas = _inclusive_grid(lo_t, hi_t, region.sample_spacing)
    phis = _inclusive_grid(lo_p, hi_p, region.sample_spacing)
    pts = [SuppressionPoint(region.r, float(t), float(p), region.threshold)
           for t in thetas for p in phis]
    if not pts:
        raise ConfigError("suppression region is empty after discretization")
    return pts
