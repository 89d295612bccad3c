"""Importance-sampled variance-reduced gradient estimators and their constants.

The primal estimator is

    z_k = (grad h_i(y_k) - grad h_i(x_bar)) / (q_i n) + grad h(x_bar),

with i ~ Q; the dual estimator t_k mirrors it with j ~ Q'.  The derived
constants L_Q, L_Q', L_1, L_2 enter the step-size certificates.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .problem import FiniteSumSmooth, SaddleProblem, full_gradients

PROBABILITY_SUM_TOL = 1e-12


class SamplingMode(str, Enum):
    UNIFORM = "uniform"
    LIPSCHITZ_PROPORTIONAL = "lipschitz_proportional"


def _constants(probabilities: np.ndarray, lipschitz: np.ndarray):
    n = probabilities.shape[0]
    ratios = lipschitz / (probabilities * n)
    return float(np.max(ratios)), float(np.max(lipschitz * ratios))


@dataclass(frozen=True)
class SamplingScheme:
    """Probability vectors over the two finite sums with prefix tables and constants."""

    q: np.ndarray
    q_prime: np.ndarray
    cumulative_q: np.ndarray
    cumulative_q_prime: np.ndarray
    L_Q: float
    L_Qprime: float
    L1: float
    L2: float

    @classmethod
    def from_probabilities(cls, problem: SaddleProblem, q, q_prime) -> "SamplingScheme":
        q = np.asarray(q, dtype=float).ravel()
        qp = np.asarray(q_prime, dtype=float).ravel()
        for name, probs, count in (("q", q, problem.h.count), ("q'", qp, problem.ell.count)):
            if probs.shape[0] != count:
                raise ConfigError(f"{name} must have length {count}")
            if np.any(probs <= 0):
                raise ConfigError(f"{name} has a nonpositive probability")
            if abs(float(np.sum(probs)) - 1.0) > PROBABILITY_SUM_TOL:
                raise ConfigError(f"{name} does not sum to 1")
        l_q, l2_primal = _constants(q, problem.h.lipschitz)
        l_qp, l2_dual = _constants(qp, problem.ell.lipschitz)
        return cls(q=q, q_prime=qp,
                   cumulative_q=np.cumsum(q), cumulative_q_prime=np.cumsum(qp),
                   L_Q=l_q, L_Qprime=l_qp,
                   L1=max(l_q, l_qp), L2=max(l2_primal, l2_dual))


def _mode_probabilities(lipschitz: np.ndarray, mode: SamplingMode) -> np.ndarray:
    n = lipschitz.shape[0]
    if mode is SamplingMode.LIPSCHITZ_PROPORTIONAL and np.sum(lipschitz) > 0:
        return lipschitz / np.sum(lipschitz)
    return np.full(n, 1.0 / n)


def make_scheme(problem: SaddleProblem, mode: SamplingMode = SamplingMode.UNIFORM) -> SamplingScheme:
    """Build a scheme; Lipschitz-proportional falls back to uniform on all-zero constants."""
    mode = SamplingMode(mode)
    q = _mode_probabilities(problem.h.lipschitz, mode)
    qp = _mode_probabilities(problem.ell.lipschitz, mode)
    return SamplingScheme.from_probabilities(problem, q, qp)


@dataclass(frozen=True)
class AnchorState:
    """Stage reference points with their full gradients, computed once per stage."""

    x_bar: np.ndarray
    v_bar: np.ndarray
    grad_h_bar: np.ndarray
    grad_ell_bar: np.ndarray

    @classmethod
    def compute(cls, problem: SaddleProblem, x_bar, v_bar) -> "AnchorState":
        x_bar = np.asarray(x_bar, dtype=float)
        v_bar = np.asarray(v_bar, dtype=float)
        gh, gl = full_gradients(problem, x_bar, v_bar)
        return cls(x_bar=x_bar, v_bar=v_bar, grad_h_bar=gh, grad_ell_bar=gl)


def index_from_uniform(cumulative: np.ndarray, u: float) -> int:
    """Inverse-CDF lookup on a prefix-sum table (0-based index)."""
    return min(int(np.searchsorted(cumulative, u, side="right")),
               cumulative.shape[0] - 1)


def sample_pair(scheme: SamplingScheme, rng: np.random.Generator) -> tuple[int, int]:
    """Draw (i_k, j_k) independently; the i draw always consumes the stream first."""
    i = index_from_uniform(scheme.cumulative_q, rng.random())
    j = index_from_uniform(scheme.cumulative_q_prime, rng.random())
    return i, j


def estimate_primal(scheme: SamplingScheme, h: FiniteSumSmooth,
                    anchor: AnchorState, y_k, i_k: int) -> np.ndarray:
    """Variance-reduced primal estimate z_k of grad h(y_k)."""
    diff = h.term_gradient(i_k, y_k) - h.term_gradient(i_k, anchor.x_bar)
    return diff / (scheme.q[i_k] * h.count) + anchor.grad_h_bar


def estimate_dual(scheme: SamplingScheme, ell: FiniteSumSmooth,
                  anchor: AnchorState, u_k, j_k: int) -> np.ndarray:
    """Variance-reduced dual estimate t_k of grad l(u_k)."""
    diff = ell.term_gradient(j_k, u_k) - ell.term_gradient(j_k, anchor.v_bar)
    return diff / (scheme.q_prime[j_k] * ell.count) + anchor.grad_ell_bar


def enumerate_primal(scheme: SamplingScheme, h: FiniteSumSmooth,
                     anchor: AnchorState, y_k) -> tuple[np.ndarray, np.ndarray]:
    """All n possible outcomes of z_k with their probabilities (test oracle support)."""
    outcomes = np.stack([estimate_primal(scheme, h, anchor, y_k, i)
                         for i in range(h.count)])
    return outcomes, scheme.q


def enumerate_dual(scheme: SamplingScheme, ell: FiniteSumSmooth,
                   anchor: AnchorState, u_k) -> tuple[np.ndarray, np.ndarray]:
    """All n' possible outcomes of t_k with their probabilities."""
    outcomes = np.stack([estimate_dual(scheme, ell, anchor, u_k, j)
                         for j in range(ell.count)])
    return outcomes, scheme.q_prime
