"""The variance-reduced Bregman primal-dual loop (outer stages, inner steps).

Each stage freezes anchor gradients at the stage reference point, runs m
inner steps with extrapolation parameter theta in {0, 1}, and emits the
weighted stage average over the inner iterates x_1..x_m (x_0 excluded).
Stages warm-start from (x_m, x_{m-1}), not from the stage average.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ConfigError, DivergenceError, DomainError
from .estimator import AnchorState, SamplingScheme, estimate_dual, estimate_primal, sample_pair
from .certificates import geometric_weights
from .problem import (SaddleProblem, primal_dual_gap_pair, product_bregman_distance,
                      product_norm)

DIVERGENCE_THRESHOLD = 1e12
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Step size, extrapolation mode, epoch shape, and averaging schedule.

    The certified pairings are enforced: uniform weights go with theta = 1 and
    geometric weights (which require ``tau``) go with theta = 0.  Set
    ``unsafe_override`` to experiment outside the certified pairings.
    """

    gamma: float
    theta: int
    m: int
    stages: int
    weights: str = "uniform"            # "uniform" or "geometric"
    tau: float | None = None            # required for geometric weights
    seed: int = 0
    record_inner: bool = False
    unsafe_override: bool = False

    def __post_init__(self):
        if self.gamma <= 0:
            raise ConfigError("gamma must be strictly positive")
        if self.theta not in (0, 1):
            raise ConfigError("theta must be 0 or 1")
        if self.m < 1:
            raise ConfigError("m must be a strictly positive integer")
        if self.stages < 0:
            raise ConfigError("stages must be nonnegative")
        if self.weights not in ("uniform", "geometric"):
            raise ConfigError(f"unknown weight schedule {self.weights!r}")
        if self.weights == "geometric" and (self.tau is None or self.tau <= 0):
            raise ConfigError("geometric weights require tau > 0")
        if not self.unsafe_override:
            if self.weights == "uniform" and self.theta != 1:
                raise ConfigError("uniform averaging pairs with theta = 1 "
                                  "(set unsafe_override to bypass)")
            if self.weights == "geometric" and self.theta != 0:
                raise ConfigError("geometric averaging pairs with theta = 0 "
                                  "(set unsafe_override to bypass)")

    def weight_vector(self) -> np.ndarray:
        """omega_1..omega_m; geometric weights are normalized to sum to one."""
        if self.weights == "uniform":
            w = np.full(self.m, 1.0 / self.m)
        else:
            w = geometric_weights(self.tau, self.m)
        assert abs(float(np.sum(w)) - 1.0) <= WEIGHT_SUM_TOL
        return w


@dataclass
class StageState:
    """Mutable inner-loop state for one stage."""

    x_prev: np.ndarray
    x_curr: np.ndarray
    v_prev: np.ndarray
    v_curr: np.ndarray
    anchor: AnchorState
    x_bar_accum: np.ndarray = field(init=False)
    v_bar_accum: np.ndarray = field(init=False)

    def __post_init__(self):
        self.x_bar_accum = np.zeros_like(self.x_curr)
        self.v_bar_accum = np.zeros_like(self.v_curr)


@dataclass(frozen=True)
class StageCarry:
    """Cross-stage warm start: iterate pair plus the current reference points."""

    x0: np.ndarray
    x_minus1: np.ndarray
    v0: np.ndarray
    v_minus1: np.ndarray
    x_bar: np.ndarray
    v_bar: np.ndarray


@dataclass(frozen=True)
class StageRecord:
    replication: int
    stage: int
    gap_pair: float | None
    ergodic_gap: float | None
    bregman_dist: float | None
    bound: float | None
    wall_ms: float


@dataclass
class GapTrace:
    """Per-stage trace of one solver run."""

    records: list[StageRecord] = field(default_factory=list)
    final_x_bar: np.ndarray | None = None
    final_v_bar: np.ndarray | None = None
    ergodic_x: np.ndarray | None = None
    ergodic_v: np.ndarray | None = None


def inner_step(problem: SaddleProblem, scheme: SamplingScheme, config: SolverConfig,
               state: StageState, k: int, rng: np.random.Generator,
               weights: np.ndarray) -> StageState:
    """One inner iteration: extrapolate, sample, estimate, mirror-prox, accumulate."""
    theta = config.theta
    gamma = config.gamma
    if theta:
        y_k = state.x_curr + (state.x_curr - state.x_prev)
        u_k = state.v_curr + (state.v_curr - state.v_prev)
    else:
        y_k = state.x_curr
        u_k = state.v_curr
    i_k, j_k = sample_pair(scheme, rng)
    z_k = estimate_primal(scheme, problem.h, state.anchor, y_k, i_k)
    t_k = estimate_dual(scheme, problem.ell, state.anchor, u_k, j_k)

    w_x = (geo.grad(problem.primal_geometry, state.x_curr)
           - gamma * z_k - gamma * problem.coupling.adjoint_apply(u_k))
    x_next = geo.mirror_prox(problem.primal_geometry, problem.f, gamma, w_x)
    w_v = (geo.grad(problem.dual_geometry, state.v_curr)
           - gamma * t_k + gamma * problem.coupling.apply(y_k))
    v_next = geo.mirror_prox(problem.dual_geometry, problem.g_star, gamma, w_v)

    if product_norm(problem, x_next, v_next) > DIVERGENCE_THRESHOLD:
        raise DivergenceError(f"iterate norm exceeded {DIVERGENCE_THRESHOLD:g} "
                              f"at inner index {k}")

    state.x_bar_accum += weights[k] * x_next
    state.v_bar_accum += weights[k] * v_next
    state.x_prev, state.x_curr = state.x_curr, x_next
    state.v_prev, state.v_curr = state.v_curr, v_next
    return state


def run_stage(problem: SaddleProblem, scheme: SamplingScheme, config: SolverConfig,
              carry: StageCarry, rng: np.random.Generator):
    """Run m inner steps; return the new carry and the weighted stage averages.

    With ``config.record_inner`` the list of inner iterates (x_k, v_k) for
    k = 1..m is returned as a third element, else None.
    """
    anchor = AnchorState.compute(problem, carry.x_bar, carry.v_bar)
    state = StageState(x_prev=carry.x_minus1.copy(), x_curr=carry.x0.copy(),
                       v_prev=carry.v_minus1.copy(), v_curr=carry.v0.copy(),
                       anchor=anchor)
    weights = config.weight_vector()
    inner = [] if config.record_inner else None
    for k in range(config.m):
        inner_step(problem, scheme, config, state, k, rng, weights)
        if inner is not None:
            inner.append((state.x_curr.copy(), state.v_curr.copy()))
    new_carry = StageCarry(x0=state.x_curr, x_minus1=state.x_prev,
                           v0=state.v_curr, v_minus1=state.v_prev,
                           x_bar=state.x_bar_accum, v_bar=state.v_bar_accum)
    return new_carry, (state.x_bar_accum, state.v_bar_accum), inner


def initial_carry(problem: SaddleProblem, x_bar0, v_bar0) -> StageCarry:
    x0 = np.asarray(x_bar0, dtype=float).copy()
    v0 = np.asarray(v_bar0, dtype=float).copy()
    if not geo.in_interior(problem.primal_geometry, x0):
        raise DomainError("primal start point outside the interior domain")
    if not geo.in_interior(problem.dual_geometry, v0):
        raise DomainError("dual start point outside the interior domain")
    return StageCarry(x0=x0, x_minus1=x0.copy(), v0=v0, v_minus1=v0.copy(),
                      x_bar=x0.copy(), v_bar=v0.copy())


def solve(problem: SaddleProblem, scheme: SamplingScheme, config: SolverConfig,
          init, saddle_ref=None, bound_values=None, replication: int = 0) -> GapTrace:
    """Run N stages and record the gap trace.

    ``init`` is the pair (x_bar_0, v_bar_0).  Gap columns are filled only when
    ``saddle_ref = (x*, v*)`` is given; ``bound_values`` optionally supplies
    one theoretical bound value per stage for overlay.  On divergence the
    partial trace is attached to the raised error.
    """
    rng = np.random.default_rng(config.seed)
    carry = initial_carry(problem, init[0], init[1])
    trace = GapTrace()
    ergodic_x = np.zeros(problem.primal_dim)
    ergodic_v = np.zeros(problem.dual_dim)
    x_star = v_star = None
    if saddle_ref is not None:
        x_star = np.asarray(saddle_ref[0], dtype=float)
        v_star = np.asarray(saddle_ref[1], dtype=float)
    for s in range(1, config.stages + 1):
        t0 = time.perf_counter()
        try:
            carry, (x_bar, v_bar), _ = run_stage(problem, scheme, config, carry, rng)
        except DivergenceError as err:
            raise DivergenceError(f"stage {s}: {err}", trace=trace) from err
        wall_ms = (time.perf_counter() - t0) * 1e3
        ergodic_x += x_bar
        ergodic_v += v_bar
        gap_pair = ergodic_gap = bdist = None
        if x_star is not None:
            gap_pair = primal_dual_gap_pair(problem, x_bar, v_bar, x_star, v_star)
            ergodic_gap = primal_dual_gap_pair(problem, ergodic_x / s, ergodic_v / s,
                                               x_star, v_star)
            bdist = product_bregman_distance(problem, x_star, v_star, x_bar, v_bar)
        bound = None
        if bound_values is not None and s - 1 < len(bound_values):
            bound = float(bound_values[s - 1])
        trace.records.append(StageRecord(replication=replication, stage=s,
                                         gap_pair=gap_pair, ergodic_gap=ergodic_gap,
                                         bregman_dist=bdist, bound=bound,
                                         wall_ms=wall_ms))
    trace.final_x_bar = carry.x_bar
    trace.final_v_bar = carry.v_bar
    if config.stages > 0:
        trace.ergodic_x = ergodic_x / config.stages
        trace.ergodic_v = ergodic_v / config.stages
    else:
        trace.final_x_bar = np.asarray(init[0], dtype=float)
        trace.final_v_bar = np.asarray(init[1], dtype=float)
    return trace
