"""
Isometric embedding of R^n into Hermitian 2^floor(n/2) matrices that maps
the spherical cone {x1^2 >= x2^2 + ... + xn^2} into the PSD cone.

For odd n = 2k + 1 write x = c + v + w with v, w in R^k and set

    phi(x) = c I + (e_v + e_v*) + i (e_w - e_w*)

where e_v is wedge-multiplication by v on the exterior algebra of R^k.
Even n is padded with a trailing zero coordinate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionCap
from .exterior import creation
from .matrix_core import HermitianMatrix

MAX_N = 24
CONE_TOL = 1e-10


class NotConeGuaranteed(UserWarning):
    """Some input vector lies outside the cone, so positivity is not guaranteed."""


def embedding_dimension(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_N:
        raise DimensionCap(f"n = {n} exceeds cap {MAX_N}")
    return 1 << (n // 2)


@dataclass(frozen=True)
class ConeVector:
    """Split of x in R^n as c + v + w after padding to odd length."""

    n: int
    c: float
    v: np.ndarray
    w: np.ndarray

    @classmethod
    def split(cls, x) -> "ConeVector":
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        embedding_dimension(n)
        if n % 2 == 0:
            x = np.append(x, 0.0)
        k = (x.shape[0] - 1) // 2
        return cls(n, float(x[0]), x[1:k + 1].copy(), x[k + 1:].copy())

    @property
    def in_cone(self) -> bool:
        return in_cone(np.concatenate([[self.c], self.v, self.w]))


def in_cone(x, tol: float = CONE_TOL) -> bool:
    """Whether x1 >= 0 and x1^2 >= x2^2 + ... + xn^2 (relative tolerance)."""
    x = np.asarray(x, dtype=float)
    tail = float(np.dot(x[1:], x[1:]))
    scale = max(1.0, float(np.dot(x, x)))
    return x[0] >= -tol * scale and x[0] ** 2 - tail >= -tol * scale


@lru_cache(maxsize=None)
def generators(n: int) -> np.ndarray:
    """Images of the standard basis of R^n, stacked as an (n, d, d) array.

    The first generator is the identity; the rest anticommute pairwise and
    square to the identity.
    """
    d = embedding_dimension(n)
    k = (n - 1 + (n % 2 == 0)) // 2
    out = np.zeros((n, d, d), dtype=np.complex128)
    out[0] = np.eye(d)
    for i in range(k):
        e = np.zeros(k)
        e[i] = 1.0
        eps = creation(k, e)
        if 1 + i < n:
            out[1 + i] = eps + eps.conj().T
        if 1 + k + i < n:
            out[1 + k + i] = 1j * (eps - eps.conj().T)
    out.setflags(write=False)
    return out


def embed_array(x) -> np.ndarray:
    cv = ConeVector.split(x)
    d = embedding_dimension(cv.n)
    out = cv.c * np.eye(d, dtype=np.complex128)
    if cv.v.size:
        ev, ew = creation(cv.v.size, cv.v), creation(cv.w.size, cv.w)
        out += ev + ev.conj().T + 1j * (ew - ew.conj().T)
    return out


def embed(x) -> HermitianMatrix:
    """Image of a real vector under the Clifford embedding."""
    return HermitianMatrix(embed_array(x))


def embed_config(xs):
    """Embed every vector of a configuration; see :class:`Realization`.

    Vectors outside the cone are embedded anyway, with a
    :class:`NotConeGuaranteed` warning and the ``cone_guaranteed`` flag of the
    result cleared.
    """
    from .realization import Realization

    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[0] == 0:
        raise ValueError("configuration is empty")
    outside = [j for j, x in enumerate(xs) if not in_cone(x)]
    if outside:
        warnings.warn(f"vectors {outside} lie outside the cone; positivity not guaranteed",
                      NotConeGuaranteed, stacklevel=2)
    mats = [embed(x) for x in xs]
    return Realization(mats, target=xs @ xs.T, cone_guaranteed=not outside)
