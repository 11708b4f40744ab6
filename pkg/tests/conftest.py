import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psdcone.matrix_core import HermitianMatrix


def finite(lo=-10.0, hi=10.0):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


@st.composite
def hermitian(draw, dim=None):
    d = draw(st.integers(1, 5)) if dim is None else dim
    re = draw(arrays(float, (d, d), elements=finite()))
    im = draw(arrays(float, (d, d), elements=finite()))
    m = re + 1j * im
    return HermitianMatrix(0.5 * (m + m.conj().T))


@st.composite
def hermitian_triple(draw):
    d = draw(st.integers(1, 5))
    return draw(hermitian(d)), draw(hermitian(d)), draw(hermitian(d))


def random_psd(rng, d, rank=None):
    r = d if rank is None else rank
    c = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    return HermitianMatrix(c @ c.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
