"""Vector configurations, Gram matrices and the two named examples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GenerationFailure, NotPsd

SNAP_TOL = 1e-14
GRAM_SYM_TOL = 1e-12
GRAM_PSD_TOL = 1e-9
REJECTION_BUDGET = 10**6


@dataclass(frozen=True, eq=False)
class VectorConfig:
    """n real vectors in R^m, stored as the rows of an (n, m) array."""

    vectors: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float, ndmin=2)
        if v.ndim != 2:
            raise ValueError("vectors must form a 2-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("vectors must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def m(self) -> int:
        return self.vectors.shape[1]

    def to_json(self) -> dict:
        out = {"n": self.m, "vectors": self.vectors.tolist()}
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "VectorConfig":
        if "vectors" not in obj:
            raise ValueError("missing field 'vectors'")
        vecs = np.asarray(obj["vectors"], dtype=float)
        if vecs.ndim != 2:
            raise ValueError("field 'vectors' must be a list of equal-length lists")
        if "n" in obj and int(obj["n"]) != vecs.shape[1]:
            raise ValueError(f"field 'n' = {obj['n']} disagrees with vector length {vecs.shape[1]}")
        return cls(vecs, obj.get("label"))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Real symmetric PSD matrix of pairwise inner products."""

    entries: np.ndarray
    psd_tol: float = field(default=GRAM_PSD_TOL, repr=False)

    def __post_init__(self):
        g = np.array(self.entries, dtype=float, ndmin=2)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("Gram entries must be finite")
        scale = max(1.0, float(np.abs(g).max(initial=0.0)))
        if np.abs(g - g.T).max(initial=0.0) > GRAM_SYM_TOL * scale:
            raise ValueError("Gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        lam_min = np.linalg.eigvalsh(g)[0] if g.size else 0.0
        if lam_min < -self.psd_tol * scale:
            raise NotPsd(f"Gram matrix has eigenvalue {lam_min:.3e}")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "GramMatrix":
        if "entries" not in obj:
            raise ValueError("missing field 'entries'")
        g = np.asarray(obj["entries"], dtype=float)
        if "n" in obj and (g.ndim != 2 or int(obj["n"]) != g.shape[0]):
            raise ValueError(f"field 'n' = {obj['n']} disagrees with entries shape {g.shape}")
        return cls(g)


def as_gram(g) -> GramMatrix:
    return g if isinstance(g, GramMatrix) else GramMatrix(g)


def _snap(g: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(np.diag(g)).max(initial=0.0)))
    g = g.copy()
    g[np.abs(g) < SNAP_TOL * scale] = 0.0
    return g


def gram(config: VectorConfig) -> GramMatrix:
    v = config.vectors
    return GramMatrix(_snap(v @ v.T))


def pentagon() -> VectorConfig:
    """Five vectors (sqrt(cos(pi/5)), cos(2 pi k/5), sin(2 pi k/5)), k = 0..4.

    Consecutive vectors have inner product cos(pi/5) + cos(2 pi/5) and
    vectors two steps apart are orthogonal.
    """
    t = 2 * np.pi * np.arange(5) / 5
    h = np.sqrt(np.cos(np.pi / 5))
    return VectorConfig(np.column_stack([np.full(5, h), np.cos(t), np.sin(t)]), "pentagon")


def hexagon() -> VectorConfig:
    """Six vectors (1, cos(2 pi k/6), sin(2 pi k/6)) on the boundary of the cone."""
    t = 2 * np.pi * np.arange(6) / 6
    return VectorConfig(np.column_stack([np.ones(6), np.cos(t), np.sin(t)]), "hexagon")


def random_nonneg_config(n: int, m: int, seed: int) -> VectorConfig:
    """n unit vectors in R^m with pairwise nonnegative inner products.

    Vectors are drawn uniformly on the sphere; a draw that has a negative
    inner product with an already accepted vector is discarded.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = np.random.default_rng(seed)
    accepted = []
    for _ in range(REJECTION_BUDGET):
        x = rng.standard_normal(m)
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        x /= norm
        if all(np.dot(x, a) >= 0.0 for a in accepted):
            accepted.append(x)
            if len(accepted) == n:
                return VectorConfig(np.array(accepted), f"random-{n}x{m}-seed{seed}")
    raise GenerationFailure(f"rejection budget exhausted after accepting {len(accepted)} of {n}")


def vectors_from_gram(g) -> VectorConfig:
    """Vectors in R^r, r the numerical rank of g, reproducing g."""
    g = as_gram(g).entries
    lam, u = np.linalg.eigh(g)
    scale = max(1.0, float(lam[-1]) if lam.size else 1.0)
    if lam.size and lam[0] < -GRAM_PSD_TOL * scale:
        raise NotPsd(f"Gram matrix has eigenvalue {lam[0]:.3e}")
    lam = np.clip(lam, 0.0, None)
    keep = lam > GRAM_PSD_TOL * (lam[-1] if lam.size else 0.0)
    if not np.any(keep):
        return VectorConfig(np.zeros((g.shape[0], 1)))
    return VectorConfig(u[:, keep] * np.sqrt(lam[keep]))
