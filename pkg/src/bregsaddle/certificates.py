"""Step-size certificates and theoretical rate bounds.

Two certificates are computed, matching the two convergence regimes:

* ergodic O(1/N): theta = 1 with uniform stage weights, valid when
  12 gamma L1 < 1 and 4 gamma mu0 + 2 gamma ||K|| + 8 L2 gamma^2 <= 1;
* linear: theta = 0 with geometric weights, valid when the problem is
  alpha-strongly convex relative to its geometries and gamma stays below
  min{1 / (2 ||K|| M' + mu0), (-1 + sqrt(1 + alpha'/(4 L1))) / alpha'}.

The inequalities are evaluated verbatim in double arithmetic with no slack
factors, so a certificate can be checked by inspection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .estimator import SamplingScheme
from .problem import SaddleProblem

NEAR_DEGENERATE_LAMBDA = 1.01


@dataclass(frozen=True)
class ErgodicCertificate:
    """Constants and conditions for the sublinear O(1/N) ergodic-gap bound."""

    L1: float
    L2: float
    mu0: float
    K_norm: float
    gamma: float
    m: int
    cond_a: bool        # 12 gamma L1 < 1
    cond_b: bool        # 4 gamma mu0 + 2 gamma ||K|| + 8 L2 gamma^2 <= 1
    bound_constant: float | None = None   # D(x*, xbar0) + 4 L1 gamma^2 (m+2) gap0

    @property
    def valid(self) -> bool:
        return self.cond_a and self.cond_b

    def bound(self, N: int, bound_constant: float | None = None) -> float:
        """Ergodic bound value at stage count N."""
        constant = self.bound_constant if bound_constant is None else bound_constant
        if constant is None:
            raise ConfigError("bound constant unknown: supply initial gap and distance")
        denom = self.m * self.gamma * (1.0 - 12.0 * self.L1 * self.gamma) * N
        return constant / denom


@dataclass(frozen=True)
class LinearCertificate:
    """Constants and conditions for the geometric per-stage gap bound."""

    alpha: float
    M_prime: float
    alpha_prime: float
    L1: float
    mu0: float
    K_norm: float
    gamma: float
    gamma_max: float
    tau: float
    eta: float
    lam: float
    m_min: int
    m: int | None = None
    delta: float | None = None
    weights: np.ndarray | None = None
    bound_prefactor: float | None = None  # (D0 + eta (1 + delta) gap0) / (eta delta)

    @property
    def valid(self) -> bool:
        ok = 0.0 < self.gamma < self.gamma_max and self.lam > 1.0
        if self.m is not None:
            ok = ok and self.m >= self.m_min
        return ok

    @property
    def near_degenerate(self) -> bool:
        """Flags configurations where the contraction factor is barely above 1."""
        return self.lam < NEAR_DEGENERATE_LAMBDA

    def bound(self, s: int, bound_prefactor: float | None = None) -> float:
        """Per-stage bound value lambda^{-s} * prefactor."""
        prefactor = self.bound_prefactor if bound_prefactor is None else bound_prefactor
        if prefactor is None:
            raise ConfigError("bound prefactor unknown: supply initial gap and distance")
        return self.lam ** (-s) * prefactor


def linear_constants(alpha_prime: float, L1: float, gamma: float):
    """Core arithmetic of the linear certificate: (tau, eta, lambda, m_min)."""
    if alpha_prime <= 0:
        raise ConfigError("alpha' must be strictly positive")
    if L1 <= 0 or gamma <= 0:
        raise ConfigError("L1 and gamma must be strictly positive")
    tau = 1.0 + gamma * alpha_prime
    eta = 4.0 * gamma * gamma * L1
    lam = (gamma - eta * tau) / eta
    if lam <= 1.0:
        m_min = 1
    else:
        m_min = math.floor(math.log(lam) / math.log(tau)) + 1
    return tau, eta, lam, m_min


def geometric_delta(tau: float, m: int) -> float:
    """delta = sum_{k=1}^{m} tau^{k-1}, in closed form when tau != 1."""
    if tau == 1.0:
        return float(m)
    return (tau ** m - 1.0) / (tau - 1.0)


def geometric_weights(tau: float, m: int) -> np.ndarray:
    """Stage-averaging weights omega_k = tau^{k-1} / delta for k = 1..m."""
    powers = tau ** np.arange(m, dtype=float)
    return powers / np.sum(powers)


def ergodic_bound_constant(initial_distance: float, initial_gap: float,
                           L1: float, gamma: float, m: int) -> float:
    return initial_distance + 4.0 * L1 * gamma * gamma * (m + 2) * initial_gap


def linear_bound_prefactor(initial_distance: float, initial_gap: float,
                           eta: float, delta: float) -> float:
    return (initial_distance + eta * (1.0 + delta) * initial_gap) / (eta * delta)


def certify_ergodic(problem: SaddleProblem, scheme: SamplingScheme,
                    gamma: float, m: int,
                    initial_distance: float | None = None,
                    initial_gap: float | None = None) -> ErgodicCertificate:
    """Evaluate the ergodic-regime step-size conditions for this configuration."""
    L1, L2 = scheme.L1, scheme.L2
    mu0, k_norm = problem.mu0, problem.coupling.norm
    cond_a = 12.0 * gamma * L1 < 1.0
    cond_b = 4.0 * gamma * mu0 + 2.0 * gamma * k_norm + 8.0 * L2 * gamma * gamma <= 1.0
    constant = None
    if initial_distance is not None and initial_gap is not None:
        constant = ergodic_bound_constant(initial_distance, initial_gap, L1, gamma, m)
    return ErgodicCertificate(L1=L1, L2=L2, mu0=mu0, K_norm=k_norm, gamma=gamma,
                              m=m, cond_a=cond_a, cond_b=cond_b,
                              bound_constant=constant)


def linear_gamma_max(alpha_prime: float, L1: float, mu0: float,
                     K_norm: float, M_prime: float) -> float:
    first = 1.0 / (2.0 * K_norm * M_prime + mu0) if (2.0 * K_norm * M_prime + mu0) > 0 \
        else float("inf")
    second = (-1.0 + math.sqrt(1.0 + alpha_prime / (4.0 * L1))) / alpha_prime
    return min(first, second)


def default_m_prime(problem: SaddleProblem) -> float:
    """Default M' = 4 ||K|| / alpha, doubling the minimum so alpha' = alpha / 2."""
    if problem.alpha <= 0:
        raise ConfigError("linear certificate requires relative strong convexity alpha > 0")
    if problem.coupling.norm == 0.0:
        return 1.0  # any positive M' works when K vanishes
    return 4.0 * problem.coupling.norm / problem.alpha


def certify_linear(problem: SaddleProblem, scheme: SamplingScheme, gamma: float,
                   M_prime: float | None = None, m: int | None = None,
                   initial_distance: float | None = None,
                   initial_gap: float | None = None) -> LinearCertificate:
    """Evaluate the linear-regime conditions and derive tau, eta, lambda, m_min."""
    alpha = problem.alpha
    k_norm = problem.coupling.norm
    if alpha <= 0:
        raise ConfigError("linear certificate requires relative strong convexity alpha > 0")
    if M_prime is None:
        M_prime = default_m_prime(problem)
    alpha_prime = alpha - 2.0 * k_norm / M_prime
    if alpha_prime <= 0:
        raise ConfigError(f"M' = {M_prime} must exceed 2 ||K|| / alpha = "
                          f"{2.0 * k_norm / alpha}")
    L1 = scheme.L1
    tau, eta, lam, m_min = linear_constants(alpha_prime, L1, gamma)
    gamma_max = linear_gamma_max(alpha_prime, L1, problem.mu0, k_norm, M_prime)
    delta = weights = prefactor = None
    if m is not None:
        if m < m_min:
            raise ConfigError(f"m = {m} is below the minimal epoch length m_min = {m_min}")
        delta = geometric_delta(tau, m)
        weights = geometric_weights(tau, m)
        if initial_distance is not None and initial_gap is not None:
            prefactor = linear_bound_prefactor(initial_distance, initial_gap, eta, delta)
    return LinearCertificate(alpha=alpha, M_prime=M_prime, alpha_prime=alpha_prime,
                             L1=L1, mu0=problem.mu0, K_norm=k_norm, gamma=gamma,
                             gamma_max=gamma_max, tau=tau, eta=eta, lam=lam,
                             m_min=m_min, m=m, delta=delta, weights=weights,
                             bound_prefactor=prefactor)


def theoretical_bound_curve(cert, indices, initial_distance: float | None = None,
                            initial_gap: float | None = None):
    """Exact rate-bound value per stage index, for overlay on empirical traces."""
    if isinstance(cert, ErgodicCertificate):
        constant = cert.bound_constant
        if constant is None:
            if initial_distance is None or initial_gap is None:
                raise ConfigError("supply initial gap and distance to evaluate the bound")
            constant = ergodic_bound_constant(initial_distance, initial_gap,
                                              cert.L1, cert.gamma, cert.m)
        return [(int(n), cert.bound(int(n), constant)) for n in indices]
    if isinstance(cert, LinearCertificate):
        prefactor = cert.bound_prefactor
        if prefactor is None:
            if initial_distance is None or initial_gap is None or cert.delta is None:
                raise ConfigError("supply m, initial gap, and distance to evaluate the bound")
            prefactor = linear_bound_prefactor(initial_distance, initial_gap,
                                               cert.eta, cert.delta)
        return [(int(s), cert.bound(int(s), prefactor)) for s in indices]
    raise TypeError(f"unknown certificate type {type(cert)!r}")


def suggest_ergodic_gamma(problem: SaddleProblem, scheme: SamplingScheme,
                          safety: float = 0.9) -> float:
    """Largest certified ergodic step size, scaled by a safety factor."""
    L1, L2 = scheme.L1, scheme.L2
    cap_a = 1.0 / (12.0 * L1) if L1 > 0 else float("inf")
    b = 4.0 * problem.mu0 + 2.0 * problem.coupling.norm
    if L2 > 0:
        cap_b = (-b + math.sqrt(b * b + 32.0 * L2)) / (16.0 * L2)
    elif b > 0:
        cap_b = 1.0 / b
    else:
        cap_b = float("inf")
    cap = min(cap_a, cap_b)
    if not math.isfinite(cap):
        raise ConfigError("no finite certified step size: supply gamma explicitly")
    return safety * cap


def suggest_linear_gamma(problem: SaddleProblem, scheme: SamplingScheme,
                         M_prime: float | None = None, safety: float = 0.9) -> float:
    """Step size strictly inside the linear-regime admissible interval."""
    if M_prime is None:
        M_prime = default_m_prime(problem)
    alpha_prime = problem.alpha - 2.0 * problem.coupling.norm / M_prime
    if alpha_prime <= 0:
        raise ConfigError("M' too small: alpha' would be nonpositive")
    return safety * linear_gamma_max(alpha_prime, scheme.L1, problem.mu0,
                                     problem.coupling.norm, M_prime)


def certificate_to_dict(cert) -> dict:
    """JSON-friendly view of a certificate (used by the CLI)."""
    if isinstance(cert, ErgodicCertificate):
        return {
            "kind": "ergodic",
            "L1": cert.L1, "L2": cert.L2, "mu0": cert.mu0, "K_norm": cert.K_norm,
            "gamma": cert.gamma, "m": cert.m,
            "cond_a": cert.cond_a, "cond_b": cert.cond_b, "valid": cert.valid,
            "bound_constant": cert.bound_constant,
        }
    if isinstance(cert, LinearCertificate):
        return {
            "kind": "linear",
            "alpha": cert.alpha, "M_prime": cert.M_prime, "alpha_prime": cert.alpha_prime,
            "L1": cert.L1, "mu0": cert.mu0, "K_norm": cert.K_norm,
            "gamma": cert.gamma, "gamma_max": cert.gamma_max,
            "tau": cert.tau, "eta": cert.eta, "lambda": cert.lam,
            "m_min": cert.m_min, "m": cert.m, "delta": cert.delta,
            "valid": cert.valid, "near_degenerate": cert.near_degenerate,
            "bound_prefactor": cert.bound_prefactor,
        }
    raise TypeError(f"unknown certificate type {type(cert)!r}")
