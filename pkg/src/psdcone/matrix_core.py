"""
Dense Hermitian matrices and the normalized trace inner product.

Every matrix in the library lives in the real Euclidean space of d x d
self-adjoint complex matrices equipped with

    <A, B> = (1/d) Tr(AB).

``HermitianMatrix`` is an immutable wrapper around a complex numpy array;
the search routines in :mod:`psdcone.realization` work on raw arrays and
only wrap their final answers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotHermitian, NotPsd, SpectralFailure, DimensionCap

MAX_DIM = 4096
# relative tolerances; callers may pass their own
EIG_TOL = 1e-10
ASYMMETRY_TOL = 1e-8
PSD_SQRT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """A d x d complex self-adjoint matrix.

    The input is symmetrized as (M + M*)/2 and the diagonal made exactly
    real. Inputs further than ``ASYMMETRY_TOL`` (relative Frobenius) from
    Hermitian are rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise DimensionCap(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        scale = max(np.linalg.norm(m), np.finfo(float).tiny)
        if np.linalg.norm(m - m.conj().T) > ASYMMETRY_TOL * scale:
            raise NotHermitian("matrix is not Hermitian within tolerance")
        h = 0.5 * (m + m.conj().T)
        h[np.diag_indices_from(h)] = h.diagonal().real
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __matmul__(self, other: "HermitianMatrix") -> np.ndarray:
        return self.entries @ other.entries

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"

    def scaled(self, factor: float) -> "HermitianMatrix":
        return HermitianMatrix(self.entries * factor)

    def to_json(self) -> dict:
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]
        return {"dim": self.dim, "entries": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "HermitianMatrix":
        try:
            dim = int(obj["dim"])
            raw = np.asarray(obj["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed matrix JSON: {exc}") from exc
        if raw.shape != (dim, dim, 2):
            raise DimMismatch(f"field 'entries' has shape {raw.shape}, expected ({dim}, {dim}, 2)")
        return cls(raw[..., 0] + 1j * raw[..., 1])


def identity(d: int) -> HermitianMatrix:
    return HermitianMatrix(np.eye(d))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def spectral_decomposition(a: HermitianMatrix) -> SpectralDecomposition:
    try:
        w, u = np.linalg.eigh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise SpectralFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise SpectralFailure("eigensolver returned non-finite eigenvalues")
    return SpectralDecomposition(w, u)


def trace_inner_product(a: HermitianMatrix, b: HermitianMatrix) -> float:
    """Return (1/d) Re Tr(ab)."""
    if a.dim != b.dim:
        raise DimMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    # Tr(ab) = sum_jk a_jk b_kj = sum_jk a_jk conj(b_jk) for Hermitian b
    # imaginary part is rounding noise (Hermitian inputs) and is dropped
    t = np.vdot(b.entries, a.entries)
    return float(t.real) / a.dim


def min_eigenvalue(a: HermitianMatrix) -> float:
    try:
        w = np.linalg.eigvalsh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise SpectralFailure(str(exc)) from exc
    return float(w[0])


def is_psd(a: HermitianMatrix, tol: float = 1e-9) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return min_eigenvalue(a) >= -tol


def psd_sqrt(a: HermitianMatrix, tol: float = PSD_SQRT_TOL) -> HermitianMatrix:
    """Unique positive square root; eigenvalues in [-tol, 0) are clamped to 0."""
    dec = spectral_decomposition(a)
    if dec.eigenvalues[0] < -tol:
        raise NotPsd(f"min eigenvalue {dec.eigenvalues[0]:.3e} below -{tol:g}")
    root = np.sqrt(np.clip(dec.eigenvalues, 0.0, None))
    u = dec.eigenvectors
    return HermitianMatrix((u * root) @ u.conj().T)


def gram_of(matrices) -> np.ndarray:
    """Real Gram matrix of a list of equal-size Hermitian matrices under (1/d)Tr."""
    if not matrices:
        return np.zeros((0, 0))
    d = matrices[0].dim
    for m in matrices:
        if m.dim != d:
            raise DimMismatch("all matrices must share one dimension")
    stack = np.stack([m.entries for m in matrices]).reshape(len(matrices), -1)
    # Tr(A_j A_k) = <vec(A_k), vec(A_j)> for Hermitian A_k
    return (stack.conj() @ stack.T).real / d
