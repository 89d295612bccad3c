"""Deterministic and plain-stochastic baselines, and saddle-point oracles.

The deterministic baseline is not a separate implementation: it reuses the
solver's inner step on an n = n' = 1 collapsed view of the problem, where
the variance-reduced estimators are exact by construction.  The collapse
test in the suite therefore exercises the stochastic code path itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import geometry as geo
from .errors import ConfigError, OracleFailure
from .estimator import AnchorState, SamplingMode, SamplingScheme, make_scheme, sample_pair
from .linalg import soft_threshold
from .problem import (AffineQuadraticTerm, AggregateTerm, CouplingOperator,
                      FiniteSumSmooth, LinearTerm, SaddleProblem, gap, product_norm)
from .solver import SolverConfig, StageState, inner_step

ORACLE_RESIDUAL_TOL = 1e-8
_NO_ACCUM = np.zeros(1)


class OracleMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    HIGH_ACCURACY_DETERMINISTIC = "high_accuracy_deterministic"


def collapse_problem(problem: SaddleProblem) -> SaddleProblem:
    """The same saddle problem with h and l viewed as single aggregate terms."""
    return SaddleProblem(
        primal_geometry=problem.primal_geometry,
        dual_geometry=problem.dual_geometry,
        h=FiniteSumSmooth([AggregateTerm(problem.h)]),
        ell=FiniteSumSmooth([AggregateTerm(problem.ell)]),
        f=problem.f,
        g_star=problem.g_star,
        coupling=problem.coupling,
    )


def make_deterministic(problem: SaddleProblem, gamma: float, theta: int = 1):
    """Collapsed problem, degenerate scheme, and a one-step config for exact stepping."""
    collapsed = collapse_problem(problem)
    scheme = make_scheme(collapsed, SamplingMode.UNIFORM)
    config = SolverConfig(gamma=gamma, theta=theta, m=1, stages=0,
                          weights="uniform", unsafe_override=(theta != 1))
    return collapsed, scheme, config


def deterministic_step(problem: SaddleProblem, gamma: float, state: StageState,
                       theta: int = 1, rng: np.random.Generator | None = None) -> StageState:
    """One exact-gradient primal-dual step (the n = 1 view of the inner step)."""
    collapsed, scheme, config = make_deterministic(problem, gamma, theta)
    if rng is None:
        rng = np.random.default_rng(0)
    return inner_step(collapsed, scheme, config, state, 0, rng, _NO_ACCUM)


def run_deterministic(problem: SaddleProblem, gamma: float, x0, v0,
                      max_iter: int = 500_000, movement_tol: float = 1e-14,
                      theta: int = 1):
    """Iterate the deterministic baseline until the iterates stop moving.

    Returns (x, v, iterations, last_movement) in the product norm.
    """
    collapsed, scheme, config = make_deterministic(problem, gamma, theta)
    rng = np.random.default_rng(0)
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    anchor = AnchorState.compute(collapsed, x0, v0)
    state = StageState(x_prev=x0.copy(), x_curr=x0.copy(),
                       v_prev=v0.copy(), v_curr=v0.copy(), anchor=anchor)
    movement = float("inf")
    iterations = 0
    for iterations in range(1, max_iter + 1):
        x_old, v_old = state.x_curr, state.v_curr
        inner_step(collapsed, scheme, config, state, 0, rng, _NO_ACCUM)
        movement = product_norm(problem, state.x_curr - x_old, state.v_curr - v_old)
        if movement <= movement_tol:
            break
    return state.x_curr, state.v_curr, iterations, movement


def plain_sgd_step(problem: SaddleProblem, scheme: SamplingScheme, gamma_k: float,
                   state: StageState, rng: np.random.Generator) -> StageState:
    """One primal-dual step with the non-variance-reduced single-term estimator.

    Restricted to uniform sampling, where grad h_i(y_k) is itself unbiased.
    """
    if not (np.allclose(scheme.q, scheme.q[0]) and np.allclose(scheme.q_prime, scheme.q_prime[0])):
        raise ConfigError("plain SGD supports the uniform scheme only")
    y_k = state.x_curr + (state.x_curr - state.x_prev)
    u_k = state.v_curr + (state.v_curr - state.v_prev)
    i_k, j_k = sample_pair(scheme, rng)
    z_k = problem.h.term_gradient(i_k, y_k)
    t_k = problem.ell.term_gradient(j_k, u_k)
    w_x = (geo.grad(problem.primal_geometry, state.x_curr)
           - gamma_k * z_k - gamma_k * problem.coupling.adjoint_apply(u_k))
    x_next = geo.mirror_prox(problem.primal_geometry, problem.f, gamma_k, w_x)
    w_v = (geo.grad(problem.dual_geometry, state.v_curr)
           - gamma_k * t_k + gamma_k * problem.coupling.apply(y_k))
    v_next = geo.mirror_prox(problem.dual_geometry, problem.g_star, gamma_k, w_v)
    state.x_prev, state.x_curr = state.x_curr, x_next
    state.v_prev, state.v_curr = state.v_curr, v_next
    return state


@dataclass(frozen=True)
class SaddleOracle:
    """A certified saddle point with its probe-grid residual."""

    method: OracleMethod
    x: np.ndarray
    v: np.ndarray
    residual: float

    def to_dict(self) -> dict:
        return {"method": self.method.value, "x": self.x.tolist(),
                "v": self.v.tolist(), "residual": self.residual}

    @classmethod
    def from_dict(cls, data: dict) -> "SaddleOracle":
        return cls(method=OracleMethod(data["method"]),
                   x=np.asarray(data["x"], dtype=float),
                   v=np.asarray(data["v"], dtype=float),
                   residual=float(data["residual"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SaddleOracle":
        return cls.from_dict(json.loads(text))


def sample_feasible(fn: geo.SimpleFunction, geom: geo.LegendreGeometry,
                    center: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    """Cheap unbiased samples from the feasible set of a simple function."""
    d = geom.dim
    if fn.kind is geo.SimpleFunctionKind.SIMPLEX:
        return rng.dirichlet(np.ones(d), size=count)
    if fn.kind is geo.SimpleFunctionKind.BOX:
        return rng.uniform(-1.0, 1.0, size=(count, d))
    return center + rng.standard_normal((count, d))


def probe_residual(problem: SaddleProblem, x_star, v_star,
                   probes: int = 10_000, seed: int = 0) -> float:
    """Max violation of the saddle chain G(x*, v) <= G(x*, v*) <= G(x, v*) over probes."""
    rng = np.random.default_rng(seed)
    x_star = np.asarray(x_star, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    center = gap(problem, x_star, v_star)
    xs = sample_feasible(problem.f, problem.primal_geometry, x_star, rng, probes)
    vs = sample_feasible(problem.g_star, problem.dual_geometry, v_star, rng, probes)
    worst = 0.0
    for v in vs:
        worst = max(worst, gap(problem, x_star, v) - center)
    for x in xs:
        worst = max(worst, center - gap(problem, x, v_star))
    return worst


def _affine_gradient_parts(fs: FiniteSumSmooth):
    """Hessian and constant of grad for a finite sum of quadratic/linear terms."""
    d = fs.dim
    hess = np.zeros((d, d))
    const = np.zeros(d)
    for term in fs.terms:
        if isinstance(term, AffineQuadraticTerm):
            hess += term.A.T @ term.A
            const += term.c - term.A.T @ term.b
        elif isinstance(term, LinearTerm):
            const += term.c
        else:
            raise OracleFailure(f"term kind {term.kind!r} has no affine gradient")
    return hess / fs.count, const / fs.count


def _closed_form_point(problem: SaddleProblem):
    E = geo.GeometryKind.EUCLIDEAN
    NE = geo.GeometryKind.NEGATIVE_ENTROPY
    SF = geo.SimpleFunctionKind
    pk = problem.primal_geometry.kind
    dk = problem.dual_geometry.kind
    fk, gk = problem.f.kind, problem.g_star.kind
    d, p = problem.primal_dim, problem.dual_dim
    K = problem.coupling.matrix

    if pk is E and dk is E and fk in (SF.ZERO, SF.SCALED_GEOMETRY) \
            and gk in (SF.ZERO, SF.SCALED_GEOMETRY):
        # unconstrained quadratic saddle: solve the stationarity system
        h_hess, h_const = _affine_gradient_parts(problem.h)
        l_hess, l_const = _affine_gradient_parts(problem.ell)
        mu_f = problem.f.weight if fk is SF.SCALED_GEOMETRY else 0.0
        mu_g = problem.g_star.weight if gk is SF.SCALED_GEOMETRY else 0.0
        block = np.block([[h_hess + mu_f * np.eye(d), K.T],
                          [K, -(l_hess + mu_g * np.eye(p))]])
        rhs = np.concatenate([-h_const, l_const])
        sol = np.linalg.solve(block, rhs)
        return sol[:d], sol[d:]

    if pk is NE and dk is NE and fk is SF.SIMPLEX and gk is SF.SIMPLEX:
        # symmetric-game pattern: uniform is a saddle iff both partial
        # gradients there are constant vectors (Lagrange multipliers)
        ux = np.full(d, 1.0 / d)
        uv = np.full(p, 1.0 / p)
        gx = problem.h.gradient(ux) + K.T @ uv
        gv = K @ ux - problem.ell.gradient(uv)
        if np.ptp(gx) <= 1e-10 and np.ptp(gv) <= 1e-10:
            return ux, uv
        raise OracleFailure("uniform point is not stationary for this simplex game")

    if pk is E and dk is E and fk is SF.L1 and gk is SF.ZERO:
        # lasso pattern: h constant, l(v) with identity curvature, K^T K = I
        if any(not isinstance(t, LinearTerm) or t.c.any() for t in problem.h.terms):
            raise OracleFailure("closed-form lasso needs a zero primal smooth part")
        l_hess, l_const = _affine_gradient_parts(problem.ell)
        if not (np.allclose(l_hess, np.eye(p), atol=1e-12)
                and np.allclose(K.T @ K, np.eye(d), atol=1e-10)):
            raise OracleFailure("closed-form lasso needs identity curvature and "
                                "an orthogonal design")
        x_star = soft_threshold(K.T @ l_const, problem.f.weight)
        v_star = K @ x_star - l_const
        return x_star, v_star

    raise OracleFailure("no closed form registered for this problem structure")


def find_saddle(problem: SaddleProblem, method: OracleMethod,
                probes: int = 10_000, seed: int = 0,
                init=None, max_iter: int = 500_000) -> SaddleOracle:
    """Produce a saddle point and certify it against a random probe grid."""
    method = OracleMethod(method)
    if method is OracleMethod.CLOSED_FORM:
        x_star, v_star = _closed_form_point(problem)
    else:
        if init is None:
            x0 = (np.full(problem.primal_dim, 1.0 / problem.primal_dim)
                  if problem.primal_geometry.kind is geo.GeometryKind.NEGATIVE_ENTROPY
                  else np.zeros(problem.primal_dim))
            v0 = (np.full(problem.dual_dim, 1.0 / problem.dual_dim)
                  if problem.dual_geometry.kind is geo.GeometryKind.NEGATIVE_ENTROPY
                  else np.zeros(problem.dual_dim))
        else:
            x0, v0 = init
        gamma = 0.5 / (problem.mu0 + problem.coupling.norm + 1.0)
        x_star, v_star, _, movement = run_deterministic(problem, gamma, x0, v0,
                                                        max_iter=max_iter)
        if movement > 1e-10:
            raise OracleFailure(f"deterministic oracle did not settle "
                                f"(movement {movement:g} after {max_iter} steps)")
    residual = probe_residual(problem, x_star, v_star, probes=probes, seed=seed)
    if residual > ORACLE_RESIDUAL_TOL:
        raise OracleFailure(f"probe residual {residual:g} exceeds {ORACLE_RESIDUAL_TOL:g}")
    return SaddleOracle(method=method, x=np.asarray(x_star, dtype=float),
                        v=np.asarray(v_star, dtype=float), residual=float(residual))
