"""Stochastic variance-reduced primal-dual splitting with Bregman distances."""

from .baselines import (OracleMethod, SaddleOracle, find_saddle, make_deterministic,
                        plain_sgd_step, run_deterministic)
from .certificates import (ErgodicCertificate, LinearCertificate, certify_ergodic,
                           certify_linear, suggest_ergodic_gamma, suggest_linear_gamma,
                           theoretical_bound_curve)
from .errors import (ConfigError, DivergenceError, DomainError, NegativeGapError,
                     OracleFailure, UnsupportedPair)
from .estimator import SamplingMode, SamplingScheme, make_scheme
from .geometry import (GeometryKind, LegendreGeometry, SimpleFunction, SimpleFunctionKind,
                       bregman_distance, grad, grad_conjugate, mirror_prox, potential)
from .instances import BUILTIN_NAMES, build_problem, instance_hash, load_instance
from .problem import (AffineQuadraticTerm, CouplingOperator, FiniteSumSmooth, LinearTerm,
                      SaddleProblem, gap, primal_dual_gap_pair, product_bregman_distance)
from .solver import GapTrace, SolverConfig, StageRecord, solve

__version__ = "0.1.0"

__all__ = [
    "AffineQuadraticTerm", "BUILTIN_NAMES", "ConfigError", "CouplingOperator",
    "DivergenceError", "DomainError", "ErgodicCertificate", "FiniteSumSmooth",
    "GapTrace", "GeometryKind", "LegendreGeometry", "LinearCertificate", "LinearTerm",
    "NegativeGapError", "OracleFailure", "OracleMethod", "SaddleOracle", "SaddleProblem",
    "SamplingMode", "SamplingScheme", "SimpleFunction", "SimpleFunctionKind",
    "SolverConfig", "StageRecord", "UnsupportedPair", "bregman_distance",
    "build_problem", "certify_ergodic", "certify_linear", "find_saddle", "gap",
    "grad", "grad_conjugate", "instance_hash", "load_instance", "make_deterministic",
    "make_scheme", "mirror_prox", "plain_sgd_step", "potential",
    "primal_dual_gap_pair", "product_bregman_distance", "run_deterministic", "solve",
    "suggest_ergodic_gamma", "suggest_linear_gamma", "theoretical_bound_curve",
]
