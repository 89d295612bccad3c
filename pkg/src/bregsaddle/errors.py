"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point violates the (interior) domain of a mirror map or smooth term."""


class UnsupportedPair(KeyError):
    """No closed-form Bregman prox is registered for this (geometry, function) pair."""


class ConfigError(ValueError):
    """Invalid solver, sampling, or experiment configuration."""


class NegativeGapError(RuntimeError):
    """A primal-dual gap pair came out significantly negative: wrong saddle or a bug."""


class DivergenceError(RuntimeError):
    """Iterates blew past the divergence threshold (misconfigured step size)."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class OracleFailure(RuntimeError):
    """A saddle-point oracle could not certify a point within its residual budget."""
