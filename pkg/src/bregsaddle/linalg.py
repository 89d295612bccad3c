"""Small dense linear-algebra helpers."""

from __future__ import annotations

import numpy as np


def l2_operator_norm(matrix, tol: float = 1e-12, max_iter: int = 20000) -> float:
    """Largest singular value of a dense matrix by power iteration on M^T M.

    Deterministic start vector; converges fast at desk scale (d, p <= 500).
    """
    m = np.asarray(matrix, dtype=float)
    if m.size == 0 or not m.any():
        return 0.0
    gram = m.T @ m
    d = gram.shape[0]
    # deterministic, not orthogonal to any fixed eigenvector in practice
    v = np.ones(d) + 1e-3 * np.arange(d)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
        if abs(lam - lam_prev) <= tol * max(1.0, lam):
            break
        lam_prev = lam
    return float(np.sqrt(lam))


def soft_threshold(w, threshold: float):
    """Componentwise shrinkage: sign(w) * max(|w| - threshold, 0)."""
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - threshold, 0.0)


def project_simplex(w):
    """Euclidean projection onto the probability simplex (sort-based, last axis)."""
    w = np.asarray(w, dtype=float)
    d = w.shape[-1]
    u = np.flip(np.sort(w, axis=-1), axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    k = np.arange(1, d + 1)
    rho = np.count_nonzero(u - css / k > 0, axis=-1)
    theta = np.take_along_axis(css, np.expand_dims(rho - 1, -1), axis=-1) / np.expand_dims(rho, -1)
    return np.maximum(w - theta, 0.0)
