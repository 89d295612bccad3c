"""Builtin problem instances and the JSON/TOML instance-file schema.

An instance is a plain dict (the canonical serialization used for hashing):

    {
      "name": str,
      "primal_geometry": {"kind": "euclidean" | "negative_entropy", "dim": int},
      "dual_geometry":   {...},
      "f":      {"kind": "zero"|"simplex"|"box"|"l1"|"scaled_geometry", "weight": float},
      "g_star": {...},
      "h":   {"terms": [{"kind": "affine_quadratic", "A": [[...]], "b": [...], "c": [...]}
                        | {"kind": "linear", "c": [...]}]},
      "ell": {...},
      "K": [[...]],                       # row-major, p x d
      "init": {"x": [...], "v": [...]},   # interior starting points
    }

Builtins are generated deterministically from fixed seeds, so their hashes
are stable across runs and platforms.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import GeometryKind, LegendreGeometry, SimpleFunction, SimpleFunctionKind
from .problem import (AffineQuadraticTerm, CouplingOperator, FiniteSumSmooth,
                      LinearTerm, SaddleProblem)


def _term_dict(term) -> dict:
    if isinstance(term, AffineQuadraticTerm):
        return {"kind": "affine_quadratic", "A": term.A.tolist(),
                "b": term.b.tolist(), "c": term.c.tolist()}
    if isinstance(term, LinearTerm):
        return {"kind": "linear", "c": term.c.tolist()}
    raise ConfigError(f"term kind {type(term)!r} is not serializable")


def _term_from_dict(data: dict):
    kind = data["kind"]
    if kind == "affine_quadratic":
        return AffineQuadraticTerm(data["A"], data["b"], data.get("c"))
    if kind == "linear":
        return LinearTerm(data["c"])
    raise ConfigError(f"unknown term kind {kind!r}")


def _geometry_from_dict(data: dict) -> LegendreGeometry:
    return LegendreGeometry(dim=int(data["dim"]), kind=GeometryKind(data["kind"]))


def _simple_from_dict(data: dict) -> SimpleFunction:
    return SimpleFunction(kind=SimpleFunctionKind(data["kind"]),
                          weight=float(data.get("weight", 0.0)))


def build_problem(spec: dict):
    """Materialize (SaddleProblem, (x0, v0)) from an instance dict."""
    primal = _geometry_from_dict(spec["primal_geometry"])
    dual = _geometry_from_dict(spec["dual_geometry"])
    h = FiniteSumSmooth([_term_from_dict(t) for t in spec["h"]["terms"]])
    ell = FiniteSumSmooth([_term_from_dict(t) for t in spec["ell"]["terms"]])
    coupling = CouplingOperator(np.asarray(spec["K"], dtype=float),
                                primal.kind, dual.kind)
    problem = SaddleProblem(primal_geometry=primal, dual_geometry=dual,
                            h=h, ell=ell,
                            f=_simple_from_dict(spec["f"]),
                            g_star=_simple_from_dict(spec["g_star"]),
                            coupling=coupling)
    init = (np.asarray(spec["init"]["x"], dtype=float),
            np.asarray(spec["init"]["v"], dtype=float))
    return problem, init


def canonical_json(spec: dict) -> str:
    return json.dumps(spec, sort_keys=True, separators=(",", ":"))


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash, platform-independent."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def instance_hash(spec: dict) -> str:
    return f"{fnv1a64(canonical_json(spec).encode('utf-8')):016x}"


# ---------------------------------------------------------------------------
# builtin instances


def _quad_1d() -> dict:
    return {
        "name": "quad-1d",
        "primal_geometry": {"kind": "euclidean", "dim": 1},
        "dual_geometry": {"kind": "euclidean", "dim": 1},
        "f": {"kind": "zero"},
        "g_star": {"kind": "zero"},
        "h": {"terms": [{"kind": "affine_quadratic", "A": [[1.0]], "b": [0.0], "c": [0.0]}]},
        "ell": {"terms": [{"kind": "affine_quadratic", "A": [[1.0]], "b": [0.0], "c": [0.0]}]},
        "K": [[1.0]],
        "init": {"x": [1.0], "v": [1.0]},
    }


def _rps_game() -> dict:
    payoff = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]
    return {
        "name": "rps-game",
        "primal_geometry": {"kind": "negative_entropy", "dim": 3},
        "dual_geometry": {"kind": "negative_entropy", "dim": 3},
        "f": {"kind": "simplex"},
        "g_star": {"kind": "simplex"},
        "h": {"terms": [{"kind": "linear", "c": [0.0, 0.0, 0.0]}]},
        "ell": {"terms": [{"kind": "linear", "c": [0.0, 0.0, 0.0]}]},
        "K": payoff,
        "init": {"x": [0.5, 0.3, 0.2], "v": [0.2, 0.5, 0.3]},
    }


def _random_quadratic_terms(rng, n, d, scale, center=None):
    terms = []
    for _ in range(n):
        A = scale * rng.standard_normal((d, d)) / np.sqrt(d)
        b = A @ center if center is not None else rng.standard_normal(d)
        terms.append({"kind": "affine_quadratic",
                      "A": A.tolist(), "b": b.tolist(),
                      "c": np.zeros(d).tolist()})
    return terms


def _strongly_convex_quad() -> dict:
    d = p = 10
    n = 10
    rng = np.random.default_rng(20240817)
    h_terms = _random_quadratic_terms(rng, n, d, scale=1.0)
    l_terms = _random_quadratic_terms(rng, n, p, scale=1.0)
    K = rng.standard_normal((p, d))
    K *= 0.2 / np.linalg.norm(K, 2)
    x0 = rng.standard_normal(d)
    v0 = rng.standard_normal(p)
    return {
        "name": "strongly-convex-quad",
        "primal_geometry": {"kind": "euclidean", "dim": d},
        "dual_geometry": {"kind": "euclidean", "dim": p},
        "f": {"kind": "scaled_geometry", "weight": 1.0},
        "g_star": {"kind": "scaled_geometry", "weight": 1.0},
        "h": {"terms": h_terms},
        "ell": {"terms": l_terms},
        "K": K.tolist(),
        "init": {"x": x0.tolist(), "v": v0.tolist()},
    }


def _lasso_saddle() -> dict:
    d = p = 6
    rng = np.random.default_rng(20240818)
    q_mat, _ = np.linalg.qr(rng.standard_normal((p, d)))
    target = np.array([1.0, 0.2, -0.8, 0.05, 0.0, 2.0])
    b = q_mat @ target
    h_terms = [{"kind": "linear", "c": np.zeros(d).tolist()}]
    l_terms = [{"kind": "affine_quadratic",
                "A": np.eye(p).tolist(), "b": np.zeros(p).tolist(),
                "c": b.tolist()}]
    return {
        "name": "lasso-saddle",
        "primal_geometry": {"kind": "euclidean", "dim": d},
        "dual_geometry": {"kind": "euclidean", "dim": p},
        "f": {"kind": "l1", "weight": 0.3},
        "g_star": {"kind": "zero"},
        "h": {"terms": h_terms},
        "ell": {"terms": l_terms},
        "K": q_mat.tolist(),
        "init": {"x": np.zeros(d).tolist(), "v": np.zeros(p).tolist()},
    }


def _entropy_game_20() -> dict:
    """Simplex-vs-simplex game with curvature, built so uniform is the exact saddle.

    Quadratic parts vanish at the uniform point (b_i = A_i u), per-term linear
    parts average to zero, and the skew coupling annihilates constant vectors,
    so the uniform pair is stationary by construction.
    """
    d = p = 20
    n = 20
    rng = np.random.default_rng(20240819)
    u = np.full(d, 1.0 / d)

    def side_terms(dim):
        terms = []
        linear = rng.standard_normal((n, dim))
        linear -= linear.mean(axis=0, keepdims=True)
        for i in range(n):
            A = 0.7 * rng.standard_normal((dim, dim)) / np.sqrt(dim)
            terms.append({"kind": "affine_quadratic",
                          "A": A.tolist(), "b": (A @ u).tolist(),
                          "c": (0.5 * linear[i]).tolist()})
        return terms

    h_terms = side_terms(d)
    l_terms = side_terms(p)
    M = rng.standard_normal((p, d))
    skew = M - M.T
    center = np.eye(d) - np.full((d, d), 1.0 / d)
    K = center @ skew @ center
    K *= 1.0 / np.max(np.abs(K))
    x0 = rng.dirichlet(np.full(d, 5.0))
    v0 = rng.dirichlet(np.full(p, 5.0))
    return {
        "name": "entropy-game-20",
        "primal_geometry": {"kind": "negative_entropy", "dim": d},
        "dual_geometry": {"kind": "negative_entropy", "dim": p},
        "f": {"kind": "simplex"},
        "g_star": {"kind": "simplex"},
        "h": {"terms": h_terms},
        "ell": {"terms": l_terms},
        "K": K.tolist(),
        "init": {"x": x0.tolist(), "v": v0.tolist()},
    }


_BUILDERS = {
    "quad-1d": _quad_1d,
    "rps-game": _rps_game,
    "strongly-convex-quad": _strongly_convex_quad,
    "lasso-saddle": _lasso_saddle,
    "entropy-game-20": _entropy_game_20,
}

BUILTIN_NAMES = tuple(sorted(_BUILDERS))

_CACHE: dict[str, dict] = {}


def instance_dict(name: str) -> dict:
    """The instance dict for a builtin name (cached; treat as read-only)."""
    if name not in _BUILDERS:
        raise ConfigError(f"unknown builtin instance {name!r}; "
                          f"available: {', '.join(BUILTIN_NAMES)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


def load_instance(source: str | Path) -> dict:
    """Resolve a builtin name or read a .json / .toml instance file."""
    name = str(source)
    if name in _BUILDERS:
        return instance_dict(name)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"instance {name!r} is neither a builtin nor a file")
    if path.suffix == ".json":
        return json.loads(path.read_text())
    if path.suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    raise ConfigError(f"unsupported instance file type {path.suffix!r}")
