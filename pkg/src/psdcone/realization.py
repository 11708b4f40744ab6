"""
Searching for and checking PSD realizations of a Gram matrix.

A realization of G is a list of PSD d x d matrices A_1..A_n with
(1/d) Tr(A_j A_k) = G_jk. The search parametrizes A_k = C_k C_k* with
C_k a complex d x r factor, so positivity holds by construction, and runs
multistart gradient descent on

    f(C) = sum_{j,k} ((1/d) Re Tr(A_j A_k) - G_jk)^2,

whose gradient with respect to C_j (real and imaginary parts packed as a
complex array) is (8/d) sum_k (M_jk - G_jk) A_k C_j.

A failed search is evidence, never proof, that no realization exists.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .configurations import GramMatrix, as_gram, pentagon, gram
from .errors import ArityError, DimMismatch, DimensionCap, GramHasNegativeEntry
from .matrix_core import MAX_DIM, HermitianMatrix, gram_of
from .search import SUCCESS_RESIDUAL, SearchReport, descend, restart_rngs, summarize

NEG_ENTRY_TOL = 1e-12
DEFAULT_MAX_ITERS = 3000


@dataclass(eq=False)
class Realization:
    """n PSD matrices of a common dimension d, optionally tied to a target Gram."""

    matrices: list
    target: Optional[np.ndarray] = None
    factors: Optional[np.ndarray] = field(default=None, repr=False)
    cone_guaranteed: bool = True

    def __post_init__(self):
        self.matrices = [m if isinstance(m, HermitianMatrix) else HermitianMatrix(m)
                         for m in self.matrices]
        if not self.matrices:
            raise ArityError("a realization needs at least one matrix")
        dims = {m.dim for m in self.matrices}
        if len(dims) != 1:
            raise DimMismatch(f"matrices have differing dimensions {sorted(dims)}")
        if self.target is not None:
            self.target = np.asarray(self.target, dtype=float)
            if self.target.shape != (self.n, self.n):
                raise ArityError(f"target shape {self.target.shape} does not match n = {self.n}")

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def d(self) -> int:
        return self.matrices[0].dim

    def gram(self) -> np.ndarray:
        return gram_of(self.matrices)

    @property
    def gram_residual(self) -> Optional[float]:
        if self.target is None:
            return None
        return relative_residual(self.gram(), self.target)

    def to_json(self, scale: float = 1.0) -> dict:
        out = {"n": self.n, "d": self.d,
               "matrices": [m.scaled(scale).to_json() if scale != 1.0 else m.to_json()
                            for m in self.matrices]}
        if self.gram_residual is not None:
            out["gram_residual"] = self.gram_residual
        return out

    @classmethod
    def from_json(cls, obj: dict, scale: float = 1.0) -> "Realization":
        if "matrices" not in obj:
            raise ValueError("missing field 'matrices'")
        mats = [HermitianMatrix.from_json(m) for m in obj["matrices"]]
        if scale != 1.0:
            mats = [m.scaled(scale) for m in mats]
        real = cls(mats)
        if "n" in obj and int(obj["n"]) != real.n:
            raise ArityError(f"field 'n' = {obj['n']} but {real.n} matrices given")
        if "d" in obj and int(obj["d"]) != real.d:
            raise DimMismatch(f"field 'd' = {obj['d']} but matrices have dim {real.d}")
        return real


def relative_residual(m: np.ndarray, g: np.ndarray) -> float:
    ng = np.linalg.norm(g)
    return float(np.linalg.norm(m - g) / (ng if ng > 0 else 1.0))


def check_target(g) -> GramMatrix:
    g = as_gram(g)
    if g.entries.size and g.entries.min() < -NEG_ENTRY_TOL:
        raise GramHasNegativeEntry(f"Gram entry {g.entries.min():.3e} is negative")
    return g


# -- objective ---------------------------------------------------------------

def _products(c: np.ndarray) -> np.ndarray:
    return c @ np.conj(np.swapaxes(c, -1, -2))


def _moments(a: np.ndarray) -> np.ndarray:
    b, n, d, _ = a.shape
    flat = a.reshape(b, n, d * d)
    return np.real(np.conj(flat) @ np.swapaxes(flat, -1, -2)) / d


def objective(c: np.ndarray, g: np.ndarray) -> np.ndarray:
    """f for a batch of factor points of shape (batch, n, d, r)."""
    res = _moments(_products(c)) - g
    return np.sum(res * res, axis=(1, 2))


def gradient(c: np.ndarray, g: np.ndarray) -> np.ndarray:
    d = c.shape[2]
    a = _products(c)
    res = _moments(a) - g
    s = np.einsum("bjk,bkxy->bjxy", res, a)
    return (8.0 / d) * (s @ c)


def random_factors(g: np.ndarray, d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian factors with E[(1/d) Tr(A_j^2)] = G_jj."""
    n = g.shape[0]
    # complex Wishart: E Tr(W^2) = d r (d + r) for unit-variance entries
    sigma2 = np.sqrt(np.clip(np.diag(g), 0.0, None) / (r * (d + r)))
    z = (rng.standard_normal((n, d, r)) + 1j * rng.standard_normal((n, d, r))) / np.sqrt(2)
    return z * np.sqrt(sigma2)[:, None, None]


def pad_factors(c: np.ndarray, d: int, r: int) -> np.ndarray:
    """Embed factors for dimension d0 as a direct summand in dimension d >= d0.

    The zero block halves (1/d)Tr, so the factors are rescaled by
    (d/d0)^(1/4) to keep every inner product unchanged.
    """
    n, d0, r0 = c.shape
    if d < d0 or r < r0:
        raise DimMismatch("warm start factors larger than the requested shape")
    out = np.zeros((n, d, r), dtype=np.complex128)
    out[:, :d0, :r0] = c * (d / d0) ** 0.25
    return out


def _matrices_from_factors(c: np.ndarray) -> list:
    return [HermitianMatrix(a) for a in _products(c[None])[0]]


def realize(g, d: int, r: Optional[int] = None, restarts: int = 20,
            max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0,
            init: Optional[np.ndarray] = None, trace_every: int = 10,
            polish: bool = True):
    """Multistart search for a d-dimensional PSD realization of ``g``.

    Parameters
    ----------
    g : GramMatrix or array_like
        Target; must be symmetric PSD with nonnegative entries.
    d, r : int
        Matrix dimension and factor rank (``r`` defaults to ``d``).
    init : ndarray, optional
        Factors of shape (n, d0, r0) with d0 <= d, r0 <= r used as the
        starting point of restart 0 after :func:`pad_factors`.
    polish : bool
        If the best restart misses the success threshold, rerun it once
        from rank-truncated factors (see :func:`truncate_rank`) and keep the
        result if it is better.

    Returns
    -------
    (Realization, SearchReport)
    """
    target = check_target(g).entries
    if d < 1:
        raise ValueError("d must be >= 1")
    if d > MAX_DIM:
        raise DimensionCap(f"d = {d} exceeds cap {MAX_DIM}")
    r = d if r is None else r
    if not 1 <= r <= d:
        raise ValueError(f"rank r must satisfy 1 <= r <= d, got {r}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    rngs = restart_rngs(seed, restarts)
    x0 = np.stack([random_factors(target, d, r, rng) for rng in rngs])
    if init is not None:
        x0[0] = pad_factors(np.asarray(init, dtype=np.complex128), d, r)

    def run(start):
        return descend(
            start,
            lambda c: objective(c, target),
            lambda c: gradient(c, target),
            scale=float(np.linalg.norm(target)),
            max_iters=max_iters,
            step_rule="bb",
            trace_every=trace_every,
        )

    result = run(x0)
    report = summarize(result, seed)
    if polish and not report.converged:
        b = report.best_restart
        trimmed = truncate_rank(result.x[b])
        again = run(trimmed[None])
        if again.residuals[0] < result.residuals[b]:
            last = result.traces[b][-1][0]
            result.x[b] = again.x[0]
            result.residuals[b] = again.residuals[0]
            result.iterations[b] += again.iterations[0]
            result.traces[b] += [(last + i, r) for i, r in again.traces[0]]
            report = summarize(result, seed)
    report.dim = d
    best = result.x[report.best_restart]
    real = Realization(_matrices_from_factors(best), target=target, factors=best)
    return real, report


def truncate_rank(c: np.ndarray, rel_tol: float = 1e-2) -> np.ndarray:
    """Drop singular directions of each factor below ``rel_tol`` times its largest.

    Plain descent converges slowly when the realization it approaches has
    lower rank than the factors; zero columns stay zero under the gradient
    step, so restarting from truncated factors removes the slow directions.
    """
    out = np.zeros_like(c)
    for k, ck in enumerate(c):
        u, s, vh = np.linalg.svd(ck, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            continue
        keep = s >= rel_tol * s[0]
        out[k, :, : keep.sum()] = u[:, keep] * s[keep]
    return out


def ladder_dims(d_max: int) -> list[int]:
    dims, d = [], 1
    while d < d_max:
        dims.append(d)
        d *= 2
    dims.append(d_max)
    return dims


def realize_ladder(g, d_max: int, restarts: int = 20, seed: int = 0,
                   max_iters: int = DEFAULT_MAX_ITERS, trace_every: int = 10):
    """Try d = 1, 2, 4, ... up to ``d_max``, stopping at the first success.

    A realization in dimension d yields one in every larger dimension, so
    each rung is warm-started from the previous rung's best factors.
    """
    target = check_target(g).entries
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    attempts, prev = [], None
    for d in ladder_dims(d_max):
        real, report = realize(target, d, restarts=restarts, max_iters=max_iters,
                               seed=seed, init=prev, trace_every=trace_every)
        attempts.append({"d": d, "best_residual": report.best_residual})
        prev = real.factors
        if report.converged:
            break
    report.attempts = attempts
    return real, report


# -- oracle and checks -------------------------------------------------------

def scalar_realizable(g, tol: float = SUCCESS_RESIDUAL) -> bool:
    """Closed-form test for realizability at d = 1.

    At d = 1 the matrices are nonnegative scalars a_k, so G must equal the
    rank-one matrix a a^T with a_k = sqrt(G_kk).
    """
    g = check_target(g).entries
    a = np.sqrt(np.clip(np.diag(g), 0.0, None))
    return relative_residual(np.outer(a, a), g) < tol


@dataclass
class VerificationReport:
    min_eigenvalues: list[float]
    residual_matrix: np.ndarray
    gram_residual: float
    max_abs_residual: float
    failing_psd: list[int]
    tol_psd: float
    tol_gram: float

    @property
    def psd_ok(self) -> bool:
        return not self.failing_psd

    @property
    def gram_ok(self) -> bool:
        return self.gram_residual <= self.tol_gram

    @property
    def passed(self) -> bool:
        return self.psd_ok and self.gram_ok

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "psd_ok": self.psd_ok,
            "gram_ok": self.gram_ok,
            "min_eigenvalues": self.min_eigenvalues,
            "failing_psd": self.failing_psd,
            "gram_residual": self.gram_residual,
            "max_abs_residual": self.max_abs_residual,
            "residual_matrix": self.residual_matrix.tolist(),
            "tol_psd": self.tol_psd,
            "tol_gram": self.tol_gram,
        }


def verify_realization(g, real: Realization, tol_psd: float = 1e-9,
                       tol_gram: float = SUCCESS_RESIDUAL) -> VerificationReport:
    """Check positivity of every matrix and the Gram match; no search.

    A matrix fails the PSD check when its smallest eigenvalue is below
    ``-tol_psd * max(1, ||A||_F)``. The Gram check compares the relative
    Frobenius residual against ``tol_gram``.
    """
    target = as_gram(g).entries
    if target.shape[0] != real.n:
        raise ArityError(f"target has {target.shape[0]} vectors, realization has {real.n}")
    mins, failing = [], []
    for i, m in enumerate(real.matrices):
        lam = float(np.linalg.eigvalsh(m.entries)[0])
        mins.append(lam)
        if lam < -tol_psd * max(1.0, m.frobenius_norm()):
            failing.append(i)
    resid = real.gram() - target
    return VerificationReport(
        min_eigenvalues=mins,
        residual_matrix=resid,
        gram_residual=relative_residual(real.gram(), target),
        max_abs_residual=float(np.abs(resid).max()),
        failing_psd=failing,
        tol_psd=tol_psd,
        tol_gram=tol_gram,
    )


# -- pentagon diagnostics ----------------------------------------------------

@dataclass
class PentagonDiagnostics:
    """How far five matrices are from each forced step of the pentagon argument.

    If the Gram matrix were matched exactly, positivity would force
    A_k A_{k+-2} = 0, then A_{k+-1} in span{A_k, A_{k+2}, A_{k-2}}, and then
    A_0 proportional to A_1, which contradicts <v_0, v_1> < |v_0||v_1|.
    Each defect below is scale free.
    """

    gram_residual: float
    product_norms: dict           # (k, k+2) -> ||A_k A_{k+2}||_F
    product_defects: dict         # same, divided by ||A_k||_F ||A_{k+2}||_F
    span_defects: dict            # (k, k+-1) -> relative least-squares residual
    collinearity_defect: float

    @property
    def links(self) -> dict:
        return {
            "gram": self.gram_residual,
            "orthogonal_products": max(self.product_defects.values()),
            "span_membership": max(self.span_defects.values()),
            "collinearity": self.collinearity_defect,
        }

    @property
    def max_defect(self) -> float:
        return max(self.links.values())

    @property
    def violated_link(self) -> str:
        links = self.links
        return max(links, key=links.get)

    def to_json(self) -> dict:
        return {
            "gram_residual": self.gram_residual,
            "product_norms": {f"{j},{k}": v for (j, k), v in self.product_norms.items()},
            "product_defects": {f"{j},{k}": v for (j, k), v in self.product_defects.items()},
            "span_defects": {f"{j},{k}": v for (j, k), v in self.span_defects.items()},
            "collinearity_defect": self.collinearity_defect,
            "links": self.links,
            "max_defect": self.max_defect,
            "violated_link": self.violated_link,
        }


def _real_vec(m: HermitianMatrix) -> np.ndarray:
    e = m.entries
    return np.concatenate([e.real.ravel(), e.imag.ravel()])


def pentagon_psd_diagnostics(real: Realization) -> PentagonDiagnostics:
    if real.n != 5:
        raise ArityError(f"pentagon diagnostics need 5 matrices, got {real.n}")
    mats = real.matrices
    norms = [m.frobenius_norm() for m in mats]
    vecs = [_real_vec(m) for m in mats]

    prod_norms, prod_defects = {}, {}
    for k in range(5):
        j = (k + 2) % 5
        p = float(np.linalg.norm(mats[k].entries @ mats[j].entries))
        prod_norms[(k, j)] = p
        denom = norms[k] * norms[j]
        prod_defects[(k, j)] = p / denom if denom > 0 else 0.0

    span_defects = {}
    for k in range(5):
        basis = np.column_stack([vecs[k], vecs[(k + 2) % 5], vecs[(k - 2) % 5]])
        for s in (1, -1):
            t = (k + s) % 5
            y = vecs[t]
            coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
            ny = np.linalg.norm(y)
            span_defects[(k, t)] = float(np.linalg.norm(basis @ coef - y) / ny) if ny > 0 else 0.0

    if norms[0] > 0 and norms[1] > 0:
        u0, u1 = vecs[0] / norms[0], vecs[1] / norms[1]
        coll = float(min(np.linalg.norm(u0 - u1), np.linalg.norm(u0 + u1)))
    else:
        coll = 0.0

    target = gram(pentagon()).entries
    return PentagonDiagnostics(
        gram_residual=relative_residual(real.gram(), target),
        product_norms=prod_norms,
        product_defects=prod_defects,
        span_defects=span_defects,
        collinearity_defect=coll,
    )
