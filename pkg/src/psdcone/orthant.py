"""
Positive-orthant realizations: nonnegative factorizations G = B^T B.

If G = B^T B with B >= 0 entrywise (m x n), the columns of B are vectors in
the positive orthant of R^m with Gram matrix G, and sqrt(m) diag(b_k) gives
commuting PSD matrices realizing G under (1/m)Tr. The factorization search
here is projected gradient descent; its failures are evidence only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .configurations import VectorConfig, gram, hexagon
from .errors import ArityError, NotInOrthant, ResidualTooHigh
from .realization import Realization, check_target, relative_residual
from .search import SUCCESS_RESIDUAL, descend, restart_rngs, summarize

ORTHANT_TOL = 1e-12
DEFAULT_MAX_ITERS = 5000


@dataclass(eq=False)
class NonnegFactorization:
    """An m x n entrywise nonnegative B and its residual against the target."""

    b: np.ndarray
    residual: float

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.b.ndim != 2:
            raise ValueError("b must be a 2-d array")
        if np.any(self.b < 0):
            raise NotInOrthant("factor has a negative entry")

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def n(self) -> int:
        return self.b.shape[1]

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "b": self.b.tolist(), "residual": self.residual}

    @classmethod
    def from_json(cls, obj: dict) -> "NonnegFactorization":
        for key in ("b", "residual"):
            if key not in obj:
                raise ValueError(f"missing field '{key}'")
        return cls(np.asarray(obj["b"], dtype=float), float(obj["residual"]))


def _objective(b: np.ndarray, g: np.ndarray) -> np.ndarray:
    res = np.swapaxes(b, 1, 2) @ b - g
    return np.sum(res * res, axis=(1, 2))


def _gradient(b: np.ndarray, g: np.ndarray) -> np.ndarray:
    res = np.swapaxes(b, 1, 2) @ b - g
    return 4.0 * (b @ res)


def _clamp(b: np.ndarray) -> np.ndarray:
    return np.maximum(b, 0.0)


def factorize_nonneg(g, m: Optional[int] = None, restarts: int = 20,
                     max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0,
                     trace_every: int = 10, step_rule: str = "bb"):
    """Search for B >= 0 of shape (m, n) with B^T B = g.

    Each restart runs projected gradient descent on ||B^T B - G||_F^2,
    B <- max(0, B - eta * 4 B (B^T B - G)), with eta found by halving a
    trial step until the Armijo condition holds. The trial step is the
    Barzilai-Borwein step of the previous move (``step_rule="bb"``) or 1
    (``step_rule="reset"``). A restart stops when its relative
    residual drops below 1e-10, when the residual changes by less than a
    relative 1e-12 over 50 iterations, or after ``max_iters`` iterations.

    Returns
    -------
    (NonnegFactorization, SearchReport)
        The best restart, and statistics over all restarts.
    """
    target = check_target(g).entries
    n = target.shape[0]
    m = n * (n + 1) // 2 if m is None else m
    if m < 1:
        raise ValueError("inner dimension m must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    hi = np.sqrt(max(float(np.max(np.diag(target), initial=0.0)), 0.0) / m)
    x0 = np.stack([rng.uniform(0.0, hi, size=(m, n)) for rng in restart_rngs(seed, restarts)])
    result = descend(
        x0,
        lambda b: _objective(b, target),
        lambda b: _gradient(b, target),
        scale=float(np.linalg.norm(target)),
        max_iters=max_iters,
        project=_clamp,
        step_rule=step_rule,
        trace_every=trace_every,
    )
    report = summarize(result, seed)
    best = result.x[report.best_restart]
    return NonnegFactorization(best, report.best_residual), report


def diagonal_realization(config) -> Realization:
    """sqrt(m) diag(v_k) for every vector v_k of a positive-orthant configuration."""
    vecs = config.vectors if isinstance(config, VectorConfig) else np.atleast_2d(
        np.asarray(config, dtype=float))
    if np.any(vecs < -ORTHANT_TOL):
        raise NotInOrthant("configuration has a negative coordinate")
    vecs = np.maximum(vecs, 0.0)
    m = vecs.shape[1]
    mats = [np.sqrt(m) * np.diag(v) for v in vecs]
    return Realization(mats, target=vecs @ vecs.T)


def realization_from_factorization(f: NonnegFactorization,
                                   threshold: float = SUCCESS_RESIDUAL) -> Realization:
    """Diagonal realization built from the columns of B."""
    if not f.residual < threshold:
        raise ResidualTooHigh(f"residual {f.residual:.3e} is not below {threshold:g}")
    return diagonal_realization(f.b.T)


@dataclass
class HexagonDiagnostics:
    """Distance of six orthant vectors from the structure a hexagon realization forces.

    With e the common midpoint (a_k + a_{k+3})/2 and b_k = a_k - e, an exact
    realization would have b_k = s_k * e for sign vectors s_k and
    b_0 + b_2 + b_4 = 0, which parity rules out. Defects are divided by |e|.
    """

    gram_residual: float
    midpoint_defect: float
    sign_defect: float
    sum_defect: float
    midpoint_norm: float

    @property
    def links(self) -> dict:
        return {
            "gram": self.gram_residual,
            "midpoint": self.midpoint_defect,
            "sign_structure": self.sign_defect,
            "zero_sum": self.sum_defect,
        }

    @property
    def max_defect(self) -> float:
        return max(self.links.values())

    @property
    def violated_link(self) -> str:
        links = self.links
        return max(links, key=links.get)

    def to_json(self) -> dict:
        return {**self.links, "midpoint_norm": self.midpoint_norm,
                "max_defect": self.max_defect, "violated_link": self.violated_link}


def hexagon_orthant_diagnostics(candidate, tol: float = ORTHANT_TOL) -> HexagonDiagnostics:
    """Diagnose six nonnegative vectors (rows of ``candidate``) against the hexagon."""
    a = np.atleast_2d(np.asarray(candidate, dtype=float))
    if a.shape[0] != 6:
        raise ArityError(f"need 6 vectors, got {a.shape[0]}")
    if np.any(a < -tol):
        raise NotInOrthant("candidate has a negative coordinate")
    a = np.maximum(a, 0.0)
    e = 0.5 * (a[0] + a[3])
    ne = float(np.linalg.norm(e))
    unit = ne if ne > 0 else 1.0
    mid = max(np.linalg.norm(0.5 * (a[k] + a[k + 3]) - e) for k in range(3)) / unit
    b = a - e
    # closest signed copy of e, coordinate by coordinate
    sign_gap = np.minimum(np.abs(b - e), np.abs(b + e))
    sign = float(np.linalg.norm(sign_gap, axis=1).max()) / unit
    zero_sum = float(np.linalg.norm(b[0] + b[2] + b[4])) / unit
    target = gram(hexagon()).entries
    return HexagonDiagnostics(
        gram_residual=relative_residual(a @ a.T, target),
        midpoint_defect=float(mid),
        sign_defect=sign,
        sum_defect=zero_sum,
        midpoint_norm=ne,
    )
