import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psdcone.configurations import VectorConfig, gram, hexagon
from psdcone.errors import (ArityError, GramHasNegativeEntry, NotInOrthant, NotPsd,
                            ResidualTooHigh)
from psdcone.matrix_core import is_psd
from psdcone.orthant import (NonnegFactorization, _gradient, _objective, diagonal_realization,
                             factorize_nonneg, hexagon_orthant_diagnostics,
                             realization_from_factorization)

# planted factor, drawn once from uniform(0, 1) and frozen
PLANTED_B = np.array([
    [0.64, 0.05, 0.91, 0.23],
    [0.12, 0.77, 0.00, 0.48],
    [0.35, 0.22, 0.59, 0.83],
    [0.90, 0.41, 0.07, 0.16],
    [0.03, 0.68, 0.44, 0.71],
    [0.57, 0.19, 0.26, 0.02],
])
PLANTED_G = PLANTED_B.T @ PLANTED_B


def central_difference(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def test_identity_factorizes():
    f, rep = factorize_nonneg(np.eye(3), m=3, restarts=10, seed=0)
    assert f.residual < 1e-8
    assert np.allclose(f.b.T @ f.b, np.eye(3), atol=1e-7)
    # B is a permutation matrix up to rounding
    assert np.allclose(np.sort(f.b, axis=0)[-1], 1.0, atol=1e-6)


def test_planted_factorization_recovered():
    f, rep = factorize_nonneg(PLANTED_G, m=6, restarts=10, seed=1)
    assert f.residual < 1e-8
    assert rep.converged and rep.best_residual == f.residual


def test_factorize_validates_target():
    with pytest.raises(GramHasNegativeEntry):
        factorize_nonneg([[1.0, -0.1], [-0.1, 1.0]], m=2)
    with pytest.raises(NotPsd):
        factorize_nonneg([[1.0, 2.0], [2.0, 1.0]], m=2)


def test_factorize_is_deterministic():
    a, ra = factorize_nonneg(gram(hexagon()), m=6, restarts=3, max_iters=200, seed=5)
    b, rb = factorize_nonneg(gram(hexagon()), m=6, restarts=3, max_iters=200, seed=5)
    assert np.array_equal(a.b, b.b)
    assert ra.residuals == rb.residuals


def test_default_inner_dimension():
    f, _ = factorize_nonneg(np.eye(3), restarts=1, max_iters=10)
    assert f.m == 6


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_and_monotone_descent(seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0, 1, (5, 4))
    f, rep = factorize_nonneg(b.T @ b, m=3, restarts=3, max_iters=300, seed=seed, trace_every=1)
    assert np.all(f.b >= 0)
    for trace in rep.traces.values():
        res = [r for _, r in trace]
        assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(res, res[1:]))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    g = PLANTED_G
    for _ in range(5):
        b = rng.uniform(0, 1, (1, 6, 4))
        fd = central_difference(lambda x: _objective(x, g)[0], b)
        an = _gradient(b, g)
        assert np.linalg.norm(an - fd) <= 1e-5 * np.linalg.norm(fd)


def test_diagonal_realization_examples():
    real = diagonal_realization(VectorConfig(np.eye(2)))
    assert np.allclose(real.matrices[0].entries, math.sqrt(2) * np.diag([1, 0]))
    assert np.allclose(real.gram(), np.eye(2), atol=1e-15)

    v = np.array([[1.0, 1.0]]) / math.sqrt(2)
    real = diagonal_realization(v)
    assert np.allclose(real.matrices[0].entries, np.eye(2))
    assert real.gram()[0, 0] == pytest.approx(1.0, abs=1e-15)

    real = diagonal_realization(np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert not np.any(real.matrices[0].entries)
    assert real.gram()[0].tolist() == [0.0, 0.0]


def test_diagonal_realization_rejects_negative():
    with pytest.raises(NotInOrthant):
        diagonal_realization(np.array([[1.0, -0.5]]))
    real = diagonal_realization(np.array([[1.0, -1e-13]]))
    assert real.matrices[0].entries[1, 1] == 0.0


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_diagonal_realization_is_exact(n, m, seed):
    v = np.random.default_rng(seed).uniform(0, 2, (n, m))
    real = diagonal_realization(v)
    assert np.abs(real.gram() - v @ v.T).max() <= 1e-14 * max(1.0, np.abs(v @ v.T).max())
    assert all(is_psd(a, 0.0) for a in real.matrices)


def test_realization_from_factorization():
    real = realization_from_factorization(NonnegFactorization(np.eye(2), 0.0))
    assert np.allclose(real.gram(), np.eye(2))
    assert real.d == 2

    f = NonnegFactorization(PLANTED_B, 0.0)
    real = realization_from_factorization(f)
    assert real.n == 4 and real.d == 6
    assert np.abs(real.gram() - PLANTED_G).max() <= 1e-8

    b = PLANTED_B.copy()
    b[:, 2] = 0.0
    real = realization_from_factorization(NonnegFactorization(b, 0.0))
    assert not np.any(real.matrices[2].entries)

    with pytest.raises(ResidualTooHigh):
        realization_from_factorization(NonnegFactorization(np.eye(2), 0.1))


def test_nonneg_factorization_rejects_negative():
    with pytest.raises(NotInOrthant):
        NonnegFactorization([[1.0, -1.0]], 0.0)


def test_hexagon_diagnostics_degenerate_equal_vectors():
    e = np.array([0.3, 0.5, 0.2])
    rep = hexagon_orthant_diagnostics(np.tile(e, (6, 1)))
    assert rep.midpoint_defect == 0.0
    assert rep.gram_residual > 0.5


def test_hexagon_diagnostics_clipped_hexagon():
    a = np.maximum(hexagon().vectors, 0.0)
    rep = hexagon_orthant_diagnostics(a)
    assert rep.sign_defect > 0.1
    assert rep.max_defect > 0.1


@given(st.lists(st.sampled_from([-1.0, 1.0]), min_size=12, max_size=12),
       st.lists(st.floats(0.1, 2.0), min_size=4, max_size=4))
def test_hexagon_parity_obstruction(signs, e):
    # six vectors e +- s_k e with exact midpoint and sign structure
    e = np.array(e)
    s = np.array(signs).reshape(3, 4)
    a = np.array([e + s[0] * e, e + s[1] * e, e + s[2] * e,
                  e - s[0] * e, e - s[1] * e, e - s[2] * e])
    rep = hexagon_orthant_diagnostics(a)
    assert rep.midpoint_defect <= 1e-15
    assert rep.sign_defect <= 1e-15
    # b_0 + b_2 + b_4 = (s_0 - s_1 + s_2) e here; every coordinate odd
    assert rep.sum_defect >= 1.0 - 1e-12


def test_hexagon_diagnostics_arity():
    with pytest.raises(ArityError):
        hexagon_orthant_diagnostics(np.ones((5, 3)))
