"""
Multistart descent driver shared by the orthant and PSD searches.

All restarts run together as one batch: the iterate is an array whose first
axis indexes the restart, and every restart keeps its own step size and
stopping state. A restart's trajectory depends only on its own starting
point, so results do not depend on how restarts are grouped.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

SUCCESS_RESIDUAL = 1e-6
STOP_RESIDUAL = 1e-10
STALL_WINDOW = 50
STALL_RTOL = 1e-12
ARMIJO = 1e-4
MIN_STEP = 1e-30


def restart_rngs(seed: int, restarts: int) -> list[np.random.Generator]:
    """One independent generator per restart, keyed on (seed, restart index)."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return [np.random.default_rng(np.random.SeedSequence([seed, i])) for i in range(restarts)]


@dataclass
class SearchReport:
    best_residual: float
    restarts: int
    iterations_per_restart: list[int]
    seed: int
    converged: bool
    residual_trace: list[tuple[int, float]]
    best_restart: int = 0
    traces: dict[int, list[tuple[int, float]]] = field(default_factory=dict, repr=False)
    residuals: list[float] = field(default_factory=list, repr=False)
    dim: Optional[int] = None
    attempts: list[dict] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        out = {
            "best_residual": self.best_residual,
            "restarts": self.restarts,
            "iterations_per_restart": list(self.iterations_per_restart),
            "seed": self.seed,
            "converged": self.converged,
            "best_restart": self.best_restart,
            "residuals": list(self.residuals),
            "residual_trace": [[int(i), float(r)] for i, r in self.residual_trace],
        }
        if self.dim is not None:
            out["dim"] = self.dim
        if self.attempts:
            out["attempts"] = self.attempts
        return out

    def write_trace_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["restart", "iteration", "residual"])
            for r in sorted(self.traces):
                for it, res in self.traces[r]:
                    w.writerow([r, it, repr(float(res))])


@dataclass
class DescentResult:
    x: np.ndarray              # final iterates, one per restart
    residuals: np.ndarray      # final relative residual per restart
    iterations: np.ndarray
    traces: list[list[tuple[int, float]]]


def _inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    axes = tuple(range(1, a.ndim))
    return np.sum((a.conj() * b).real, axis=axes)


def descend(
    x0: np.ndarray,
    objective: Callable[[np.ndarray], np.ndarray],
    gradient: Callable[[np.ndarray], np.ndarray],
    scale: float,
    max_iters: int,
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    step_rule: str = "reset",
    trace_every: int = 10,
) -> DescentResult:
    """Batched (projected) gradient descent with Armijo backtracking.

    ``objective`` maps a batch of iterates to per-restart values of
    ||residual||_F^2 and ``scale`` is the target's Frobenius norm, so the
    reported residual is sqrt(f) / scale.

    ``step_rule`` picks the first trial step of each line search: "reset"
    starts at 1, "grow" at twice the last accepted step, and "bb" at the
    Barzilai-Borwein step s.s / s.y from the previous move. Trial steps are
    halved until the Armijo condition holds, so every accepted move
    decreases the objective.
    """
    if step_rule not in ("reset", "grow", "bb"):
        raise ValueError(f"unknown step rule {step_rule!r}")
    x = np.array(x0, copy=True)
    batch = x.shape[0]
    proj = project if project is not None else (lambda z: z)
    x = proj(x)
    f = objective(x)
    scale = scale if scale > 0 else 1.0

    def rel(fv):
        return np.sqrt(np.maximum(fv, 0.0)) / scale

    step = np.ones(batch)
    prev_x = prev_g = None
    if step_rule == "bb":
        prev_x = np.zeros_like(x)
        prev_g = np.zeros_like(x)
        have_prev = np.zeros(batch, dtype=bool)
    active = np.ones(batch, dtype=bool)
    iterations = np.zeros(batch, dtype=int)
    r0 = rel(f)
    history = deque([r0], maxlen=STALL_WINDOW + 1)
    traces = [[(0, float(r))] for r in r0]
    active &= r0 >= STOP_RESIDUAL

    for it in range(1, max_iters + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, fa = x[idx], f[idx]
        g = gradient(xa)
        if step_rule == "reset":
            eta = np.ones(idx.size)
        elif step_rule == "grow":
            eta = np.minimum(2.0 * step[idx], 1e12)
        else:
            sx = xa - prev_x[idx]
            sy = g - prev_g[idx]
            ss, sy_ = _inner(sx, sx), _inner(sx, sy)
            with np.errstate(divide="ignore", invalid="ignore"):
                bb = np.where(sy_ > 0, ss / sy_, 2.0 * step[idx])
            eta = np.where(have_prev[idx], np.clip(bb, 1e-12, 1e12), step[idx])
            prev_x[idx], prev_g[idx] = xa, g
            have_prev[idx] = True
        accepted = np.zeros(idx.size, dtype=bool)
        new_x = xa.copy()
        new_f = fa.copy()
        pending = np.arange(idx.size)
        while pending.size:
            shape = (-1,) + (1,) * (x.ndim - 1)
            cand = proj(xa[pending] - eta[pending].reshape(shape) * g[pending])
            fc = objective(cand)
            decrease = _inner(g[pending], cand - xa[pending])
            ok = fc <= fa[pending] + ARMIJO * decrease
            good = pending[ok]
            new_x[good], new_f[good] = cand[ok], fc[ok]
            accepted[good] = True
            pending = pending[~ok]
            eta[pending] *= 0.5
            pending = pending[eta[pending] >= MIN_STEP]
        x[idx], f[idx] = new_x, new_f
        step[idx] = np.where(accepted, eta, step[idx])
        iterations[idx[accepted]] = it

        r_now = rel(f)
        history.append(r_now)
        done = ~accepted
        done |= r_now[idx] < STOP_RESIDUAL
        if len(history) == STALL_WINDOW + 1:
            r_old = history[0][idx]
            done |= np.abs(r_old - r_now[idx]) <= STALL_RTOL * r_old
        record = idx if (it % trace_every == 0 or it == max_iters) else idx[done]
        for b in record:
            traces[b].append((it, float(r_now[b])))
        active[idx[done]] = False

    return DescentResult(x, rel(f), iterations, traces)


def summarize(result: DescentResult, seed: int) -> SearchReport:
    best = int(np.argmin(result.residuals))
    best_res = float(result.residuals[best])
    return SearchReport(
        best_residual=best_res,
        restarts=result.x.shape[0],
        iterations_per_restart=[int(i) for i in result.iterations],
        seed=seed,
        converged=best_res < SUCCESS_RESIDUAL,
        residual_trace=list(result.traces[best]),
        best_restart=best,
        traces={i: t for i, t in enumerate(result.traces)},
        residuals=[float(r) for r in result.residuals],
    )
