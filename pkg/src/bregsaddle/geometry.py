"""Legendre mirror maps, Bregman distances, and closed-form Bregman proximal maps.

Two geometries are supported: the Euclidean map phi(x) = ||x||^2 / 2 paired
with the l2 norm, and negative entropy phi(x) = sum_i x_i log x_i on the
probability simplex paired with the l1 norm (Pinsker gives 1-strong
convexity for both pairings).

All operations accept arrays of shape (..., dim) and act on the last axis,
so property suites can run fully vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, UnsupportedPair
from .linalg import project_simplex, soft_threshold

EXP_OVERFLOW = 700.0
FEASIBILITY_TOL = 1e-8


class GeometryKind(str, Enum):
    EUCLIDEAN = "euclidean"
    NEGATIVE_ENTROPY = "negative_entropy"


class SimpleFunctionKind(str, Enum):
    ZERO = "zero"
    SIMPLEX = "simplex"          # indicator of the probability simplex
    BOX = "box"                  # indicator of [-1, 1]^p
    L1 = "l1"                    # weight * ||x||_1
    SCALED_GEOMETRY = "scaled_geometry"  # weight * phi(x)


@dataclass(frozen=True)
class LegendreGeometry:
    """A mirror map on R^dim together with its paired norm.

    ``domain_floor`` only matters for negative entropy: user-supplied points
    must have every coordinate strictly above it.  Iterates produced by the
    softmax-style prox are strictly positive by construction, so no clamping
    is ever applied mid-run.
    """

    dim: int
    kind: GeometryKind
    domain_floor: float = 1e-300

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.domain_floor < 0:
            raise ValueError("domain_floor must be nonnegative")


@dataclass(frozen=True)
class SimpleFunction:
    """A nonsmooth term with a closed-form Bregman prox.

    ``weight`` is the l1 weight for L1 and the multiple of the mirror map for
    SCALED_GEOMETRY; it is ignored for the other kinds.
    """

    kind: SimpleFunctionKind
    weight: float = 0.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("weight must be nonnegative")

    @property
    def relative_strong_convexity(self) -> float:
        """Strong convexity relative to the attached geometry (zero unless scaled)."""
        if self.kind is SimpleFunctionKind.SCALED_GEOMETRY:
            return self.weight
        return 0.0


ZERO = SimpleFunction(SimpleFunctionKind.ZERO)


def _check_interior(geom: LegendreGeometry, x: np.ndarray, what: str = "point") -> None:
    if geom.kind is GeometryKind.NEGATIVE_ENTROPY and not np.all(x > geom.domain_floor):
        raise DomainError(f"{what} has coordinates outside the interior domain "
                          f"(min={np.min(x)}, floor={geom.domain_floor})")


def in_interior(geom: LegendreGeometry, x) -> bool:
    x = np.asarray(x, dtype=float)
    if geom.kind is GeometryKind.NEGATIVE_ENTROPY:
        return bool(np.all(x > geom.domain_floor))
    return True


def _xlogx(x: np.ndarray) -> np.ndarray:
    positive = x > 0
    safe = np.where(positive, x, 1.0)
    return np.where(positive, safe * np.log(safe), 0.0)


def potential(geom: LegendreGeometry, x) -> np.ndarray | float:
    """Value of the mirror map phi at x (closed domain for entropy)."""
    x = np.asarray(x, dtype=float)
    if geom.kind is GeometryKind.EUCLIDEAN:
        return 0.5 * np.sum(x * x, axis=-1)
    if np.any(x < 0):
        raise DomainError("negative coordinate outside dom(phi) for negative entropy")
    return np.sum(_xlogx(x), axis=-1)


def grad(geom: LegendreGeometry, x) -> np.ndarray:
    """Gradient of the mirror map on the interior of its domain."""
    x = np.asarray(x, dtype=float)
    if geom.kind is GeometryKind.EUCLIDEAN:
        return x.copy()
    _check_interior(geom, x)
    return 1.0 + np.log(x)


def grad_conjugate(geom: LegendreGeometry, w) -> np.ndarray:
    """Inverse of ``grad``: the conjugate mirror map's gradient on the dual space."""
    w = np.asarray(w, dtype=float)
    if geom.kind is GeometryKind.EUCLIDEAN:
        return w.copy()
    if np.any(w > EXP_OVERFLOW):
        raise OverflowError("grad_conjugate would overflow; pre-shift the dual point")
    return np.exp(w - 1.0)


def bregman_distance(geom: LegendreGeometry, x, y) -> np.ndarray | float:
    """D_phi(x, y) = phi(x) - phi(y) - <x - y, grad phi(y)>, nonnegative."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if geom.kind is GeometryKind.EUCLIDEAN:
        diff = x - y
        return 0.5 * np.sum(diff * diff, axis=-1)
    _check_interior(geom, y, "second argument")
    if np.any(x < 0):
        raise DomainError("first argument outside the closed domain of negative entropy")
    val = np.sum(_xlogx(x), axis=-1) - np.sum(x * np.log(y), axis=-1) \
        - np.sum(x, axis=-1) + np.sum(y, axis=-1)
    return np.maximum(val, 0.0)


def paired_norm(geom: LegendreGeometry, x) -> np.ndarray | float:
    """Norm paired with the geometry: l2 for Euclidean, l1 for entropy."""
    x = np.asarray(x, dtype=float)
    if geom.kind is GeometryKind.EUCLIDEAN:
        return np.sqrt(np.sum(x * x, axis=-1))
    return np.sum(np.abs(x), axis=-1)


def dual_norm(geom: LegendreGeometry, w) -> np.ndarray | float:
    """Dual of the paired norm: l2 for Euclidean, l-infinity for entropy."""
    w = np.asarray(w, dtype=float)
    if geom.kind is GeometryKind.EUCLIDEAN:
        return np.sqrt(np.sum(w * w, axis=-1))
    return np.max(np.abs(w), axis=-1)


def evaluate(fn: SimpleFunction, geom: LegendreGeometry, x) -> float:
    """Value of the nonsmooth term, +inf outside indicator feasible sets."""
    x = np.asarray(x, dtype=float)
    kind = fn.kind
    if kind is SimpleFunctionKind.ZERO:
        return 0.0
    if kind is SimpleFunctionKind.SIMPLEX:
        feasible = (abs(float(np.sum(x)) - 1.0) <= FEASIBILITY_TOL
                    and np.all(x >= -FEASIBILITY_TOL))
        return 0.0 if feasible else float("inf")
    if kind is SimpleFunctionKind.BOX:
        return 0.0 if np.all(np.abs(x) <= 1.0 + FEASIBILITY_TOL) else float("inf")
    if kind is SimpleFunctionKind.L1:
        return fn.weight * float(np.sum(np.abs(x)))
    # scaled geometry
    return fn.weight * float(potential(geom, x))


def _softmax_last_axis(w: np.ndarray) -> np.ndarray:
    shifted = w - np.max(w, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def mirror_prox(geom: LegendreGeometry, fn: SimpleFunction, step: float, w) -> np.ndarray:
    """Solve grad phi(p) + step * dfn(p) ∋ w in closed form.

    ``w`` is the pre-assembled dual point, e.g. grad phi(x_k) - step * z_k -
    step * K^T u_k.  Only registered (geometry, function) pairs are solved;
    there is deliberately no iterative fallback.
    """
    if step <= 0:
        raise ValueError("step must be strictly positive")
    w = np.asarray(w, dtype=float)
    gk, fk = geom.kind, fn.kind
    if gk is GeometryKind.EUCLIDEAN:
        if fk is SimpleFunctionKind.ZERO:
            return w.copy()
        if fk is SimpleFunctionKind.L1:
            return soft_threshold(w, step * fn.weight)
        if fk is SimpleFunctionKind.BOX:
            return np.clip(w, -1.0, 1.0)
        if fk is SimpleFunctionKind.SIMPLEX:
            return project_simplex(w)
        if fk is SimpleFunctionKind.SCALED_GEOMETRY:
            return w / (1.0 + step * fn.weight)
    elif gk is GeometryKind.NEGATIVE_ENTROPY:
        if fk is SimpleFunctionKind.ZERO:
            return grad_conjugate(geom, w)
        if fk is SimpleFunctionKind.SIMPLEX:
            # max-shift is exact here: the normalization absorbs the shift
            return _softmax_last_axis(w)
    raise UnsupportedPair(f"no closed-form prox registered for ({gk.value}, {fk.value})")
