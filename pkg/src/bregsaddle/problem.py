"""Saddle-problem model: finite-sum smooth parts, coupling operator, gap function.

The primal-dual pair is represented through the gap function

    G(x, v) = h(x) + f(x) + <Kx, v> - g*(v) - l(v),

with h and l finite sums of smooth terms and f, g* simple nonsmooth terms.
Indicators make G extended-real valued; IEEE infinities keep evaluation total.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ConfigError, NegativeGapError
from .linalg import l2_operator_norm

LIPSCHITZ_VALIDATION_TOL = 1e-6
NEGATIVE_GAP_TOL = 1e-9


class AffineQuadraticTerm:
    """Smooth term 0.5 * ||A x - b||^2 + <c, x> with gradient A^T (A x - b) + c."""

    kind = "affine_quadratic"

    def __init__(self, A, b, c=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).ravel()
        self.c = (np.zeros(self.A.shape[1]) if c is None
                  else np.asarray(c, dtype=float).ravel())
        if self.A.shape[0] != self.b.shape[0] or self.A.shape[1] != self.c.shape[0]:
            raise ConfigError("inconsistent shapes for affine-quadratic term")
        self.dim = self.A.shape[1]

    def value(self, x) -> float:
        r = self.A @ x - self.b
        return 0.5 * float(r @ r) + float(self.c @ x)

    def gradient(self, x) -> np.ndarray:
        return self.A.T @ (self.A @ x - self.b) + self.c

    def lipschitz_bound(self) -> float:
        return l2_operator_norm(self.A) ** 2


class LinearTerm:
    """Smooth term <c, x>; its gradient is constant so the Lipschitz constant is 0."""

    kind = "linear"

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float).ravel()
        self.dim = self.c.shape[0]

    def value(self, x) -> float:
        return float(self.c @ x)

    def gradient(self, x) -> np.ndarray:
        return self.c.copy()

    def lipschitz_bound(self) -> float:
        return 0.0


class AggregateTerm:
    """A finite sum viewed as a single smooth term (the n = 1 deterministic collapse)."""

    kind = "aggregate"

    def __init__(self, inner: "FiniteSumSmooth"):
        self.inner = inner
        self.dim = inner.dim

    def value(self, x) -> float:
        return self.inner.value(x)

    def gradient(self, x) -> np.ndarray:
        return self.inner.gradient(x)

    def lipschitz_bound(self) -> float:
        return self.inner.mean_lipschitz


class FiniteSumSmooth:
    """h = (1/n) sum_i h_i with per-term gradient Lipschitz constants.

    Supplied constants are validated against power-iteration bounds for
    affine-quadratic terms; omitted constants are computed.
    """

    def __init__(self, terms, lipschitz=None):
        if not terms:
            raise ConfigError("a finite sum needs at least one term")
        self.terms = list(terms)
        self.count = len(self.terms)
        self.dim = self.terms[0].dim
        if any(t.dim != self.dim for t in self.terms):
            raise ConfigError("all terms must share one ambient dimension")
        if lipschitz is None:
            self.lipschitz = np.array([t.lipschitz_bound() for t in self.terms])
        else:
            self.lipschitz = np.asarray(lipschitz, dtype=float).ravel()
            if self.lipschitz.shape[0] != self.count:
                raise ConfigError("need one Lipschitz constant per term")
            if np.any(self.lipschitz < 0):
                raise ConfigError("Lipschitz constants must be nonnegative")
            for L, term in zip(self.lipschitz, self.terms):
                bound = term.lipschitz_bound()
                if L < bound - LIPSCHITZ_VALIDATION_TOL:
                    raise ConfigError(
                        f"supplied Lipschitz constant {L} below the validated "
                        f"bound {bound} for a {term.kind} term")

    @property
    def mean_lipschitz(self) -> float:
        return float(np.mean(self.lipschitz))

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return sum(t.value(x) for t in self.terms) / self.count

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros(self.dim)
        for t in self.terms:
            g += t.gradient(x)
        return g / self.count

    def term_gradient(self, i: int, x) -> np.ndarray:
        return self.terms[i].gradient(np.asarray(x, dtype=float))


def zero_sum(dim: int) -> FiniteSumSmooth:
    """The zero smooth part as a single linear term with constant 0."""
    return FiniteSumSmooth([LinearTerm(np.zeros(dim))])


class CouplingOperator:
    """Dense coupling K with its operator norm in the paired primal/dual norms.

    The norm formula follows from the two geometries: l2->l2 uses power
    iteration, l1->l-infinity is the max absolute entry, and the mixed
    pairings reduce to row / column l2 norms.
    """

    def __init__(self, matrix, primal_kind: geo.GeometryKind, dual_kind: geo.GeometryKind):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.primal_kind = primal_kind
        self.dual_kind = dual_kind
        self.norm = self._compute_norm()

    def _compute_norm(self) -> float:
        K = self.matrix
        E, NE = geo.GeometryKind.EUCLIDEAN, geo.GeometryKind.NEGATIVE_ENTROPY
        pk, dk = self.primal_kind, self.dual_kind
        if pk is E and dk is E:
            return l2_operator_norm(K)
        if pk is NE and dk is NE:
            return float(np.max(np.abs(K))) if K.size else 0.0
        if pk is NE and dk is E:       # l1 -> l2: max column norm
            return float(np.max(np.linalg.norm(K, axis=0)))
        return float(np.max(np.linalg.norm(K, axis=1)))  # l2 -> l-infinity: max row norm

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def adjoint_apply(self, v) -> np.ndarray:
        return self.matrix.T @ np.asarray(v, dtype=float)


@dataclass
class SaddleProblem:
    """The full problem data; immutable by convention after construction."""

    primal_geometry: geo.LegendreGeometry
    dual_geometry: geo.LegendreGeometry
    h: FiniteSumSmooth
    ell: FiniteSumSmooth
    f: geo.SimpleFunction
    g_star: geo.SimpleFunction
    coupling: CouplingOperator
    mu0: float = field(init=False)
    alpha: float = field(init=False)

    def __post_init__(self):
        d, p = self.primal_geometry.dim, self.dual_geometry.dim
        if self.h.dim != d:
            raise ConfigError(f"h acts on dimension {self.h.dim}, expected {d}")
        if self.ell.dim != p:
            raise ConfigError(f"l acts on dimension {self.ell.dim}, expected {p}")
        if self.coupling.shape != (p, d):
            raise ConfigError(f"coupling must be {p}x{d}, got {self.coupling.shape}")
        self.mu0 = max(self.h.mean_lipschitz, self.ell.mean_lipschitz)
        # a single relative strong-convexity constant must serve both f and g*;
        # the minimum is the sound choice when they differ
        self.alpha = min(self.f.relative_strong_convexity,
                         self.g_star.relative_strong_convexity)

    @property
    def primal_dim(self) -> int:
        return self.primal_geometry.dim

    @property
    def dual_dim(self) -> int:
        return self.dual_geometry.dim


def gap(problem: SaddleProblem, x, v) -> float:
    """Extended-real gap value G(x, v); +inf if x infeasible, -inf if only v is."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    fx = geo.evaluate(problem.f, problem.primal_geometry, x)
    if np.isinf(fx):
        return float("inf")
    gv = geo.evaluate(problem.g_star, problem.dual_geometry, v)
    if np.isinf(gv):
        return float("-inf")
    return (problem.h.value(x) + fx + float(problem.coupling.apply(x) @ v)
            - gv - problem.ell.value(v))


def primal_dual_gap_pair(problem: SaddleProblem, x, v, x_star, v_star) -> float:
    """G(x, v*) - G(x*, v); nonnegative when (x*, v*) is a saddle point."""
    a = gap(problem, x, v_star)
    b = gap(problem, x_star, v)
    if np.isinf(a) or np.isinf(b):
        if a == float("-inf") or b == float("inf"):
            raise NegativeGapError("gap pair is -inf: the reference point is not a saddle")
        return float("inf")
    value = a - b
    if value < -NEGATIVE_GAP_TOL:
        raise NegativeGapError(f"gap pair {value} < -{NEGATIVE_GAP_TOL}: "
                               "wrong saddle point or a bug")
    return value


def full_gradients(problem: SaddleProblem, y, u):
    """Exact finite-sum gradients (grad h(y), grad l(u)); cost Theta(n + n')."""
    return problem.h.gradient(y), problem.ell.gradient(u)


def product_bregman_distance(problem: SaddleProblem, x, v, y, w) -> float:
    """D_{phi (+) psi}((x, v), (y, w)) = D_phi(x, y) + D_psi(v, w)."""
    return float(geo.bregman_distance(problem.primal_geometry, x, y)
                 + geo.bregman_distance(problem.dual_geometry, v, w))


def product_norm(problem: SaddleProblem, x, v) -> float:
    """Product-space norm sqrt(||x||^2 + ||v||^2) in the paired norms."""
    nx = geo.paired_norm(problem.primal_geometry, x)
    nv = geo.paired_norm(problem.dual_geometry, v)
    return float(np.sqrt(nx * nx + nv * nv))
