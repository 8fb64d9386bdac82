"""Simplex projections and the compensated-convexity smooth max.

The smooth max of ``y`` with parameter ``lam`` is

    lam*|y|^2 - |2 lam y - P(2 lam y)|^2 / (4 lam) + 1/(4 lam)

with ``P`` the projection onto the unit simplex ``{x >= 0, sum(x) = 1}``.  It
satisfies ``max(y) <= value <= max(y) + 1/(4 lam)`` and its gradient is
``P(2 lam y)``, which is ``2 lam``-Lipschitz.

The value is evaluated in the algebraically equal form
``p.y + (1 - |p|^2)/(4 lam)`` to avoid cancellation at large ``lam``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericError


def _as_finite(y):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(y)):
        raise NumericError("input contains non-finite entries")
    return y


def project_unit_simplex(y):
    """Project onto the probability simplex ``{x >= 0, sum(x) = 1}``."""
    return kernels.project_unit_simplex(np.ascontiguousarray(_as_finite(y)))


def project_simplex(y):
    """Project onto the solid simplex ``{x >= 0, sum(x) <= 1}``.

    Negatives are clamped first; only when the clamped vector still sums past
    one does the projection land on the face ``sum(x) = 1``.

    >>> project_simplex([0.2, 0.3])
    array([0.2, 0.3])
    >>> project_simplex([1.0, 1.0])
    array([0.5, 0.5])
    """
    y = _as_finite(y)
    clamped = np.maximum(y, 0.0)
    # rounding slack so that projected points are fixed points (idempotence)
    if clamped.sum() <= 1.0 + 4.0 * y.size * np.finfo(float).eps:
        return clamped
    return project_unit_simplex(y)


@dataclass(frozen=True)
class SmoothMaxParams:
    lam: float
    dimension: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")


@dataclass(frozen=True)
class SmoothMaxEval:
    value: float
    weights: np.ndarray


def _check_lam(lam):
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lam must be positive and finite, got {lam}")


def smooth_max(y, lam):
    """Smooth upper approximation of ``max(y)`` and its gradient weights."""
    _check_lam(lam)
    y = _as_finite(y)
    # C(y + c) = C(y) + c; working relative to max(y) keeps the gap accurate
    top = float(y.max())
    d = y - top
    p = kernels.project_unit_simplex(np.ascontiguousarray(2.0 * lam * d))
    value = top + float(p @ d + (1.0 - p @ p) / (4.0 * lam))
    return SmoothMaxEval(value=value, weights=p)


def smooth_max_gradient(y, lam):
    return smooth_max(y, lam).weights
