"""
Creation and annihilation operators on the exterior algebra of R^k.

Basis monomials e_{i1} ^ ... ^ e_{ir} (i1 < ... < ir) are indexed by the
bitmask with bits i1-1, ..., ir-1 set; masks are ordered as integers, so
mask 0 (the scalar 1) comes first. Wedging e_i onto a monomial from the
left costs the sign (-1)^(number of occupied slots below i).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankOutOfRange

MAX_RANK = 12
CAR_TOL = 1e-12


def _check_rank(k: int) -> None:
    if not 1 <= k <= MAX_RANK:
        raise RankOutOfRange(f"k must lie in [1, {MAX_RANK}], got {k}")


def creation(k: int, v) -> np.ndarray:
    """Matrix of u -> v ^ u on the 2^k dimensional exterior algebra."""
    _check_rank(k)
    v = np.asarray(v, dtype=float)
    if v.shape != (k,):
        raise ValueError(f"vector must have length {k}, got shape {v.shape}")
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=np.complex128)
    masks = np.arange(dim)
    for i in range(k):
        if v[i] == 0.0:
            continue
        bit = 1 << i
        src = masks[(masks & bit) == 0]
        lower = src & (bit - 1)
        parity = np.array([bin(int(x)).count("1") & 1 for x in lower])
        out[src | bit, src] += v[i] * (1 - 2 * parity)
    return out


def annihilation(k: int, v) -> np.ndarray:
    """Adjoint of :func:`creation`."""
    return creation(k, v).conj().T


def _anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


@dataclass
class CarReport:
    k: int
    trials: int
    max_residual: float
    max_allowed: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.max_allowed


def car_residuals(k: int, v, w) -> tuple[float, float, float]:
    """Frobenius residuals of {e_v, e_w} = 0, {e_v*, e_w*} = 0, {e_v, e_w*} = <v,w> I."""
    cv, cw = creation(k, v), creation(k, w)
    av, aw = cv.conj().T, cw.conj().T
    eye = np.eye(1 << k)
    r1 = np.linalg.norm(_anticommutator(cv, cw))
    r2 = np.linalg.norm(_anticommutator(av, aw))
    r3 = np.linalg.norm(_anticommutator(cv, aw) - np.dot(v, w) * eye)
    return float(r1), float(r2), float(r3)


def verify_car(k: int, trials: int, seed: int) -> CarReport:
    """Check the canonical anticommutation relations on random Gaussian pairs.

    The check passes when every residual is at most ``1e-12 (1 + |v||w|)``
    for its pair; the report records the worst residual and the bound that
    belongs to that pair.
    """
    _check_rank(k)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst, worst_ratio, allowed = 0.0, -1.0, CAR_TOL
    for _ in range(trials):
        v, w = rng.standard_normal(k), rng.standard_normal(k)
        bound = CAR_TOL * (1.0 + np.linalg.norm(v) * np.linalg.norm(w))
        res = max(car_residuals(k, v, w))
        if res / bound > worst_ratio:
            worst, worst_ratio, allowed = res, res / bound, bound
    return CarReport(k, trials, worst, allowed)
