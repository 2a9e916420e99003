import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import matrices
from efresnel.core import ABCDMatrix, GridSpec, rel_l2
from efresnel.errors import SingularB
from efresnel.fresnel1d import RealLine1D, kernel_1d, propagate_1d, wigner_1d


def gauss(x):
    return np.exp(-x * x / 2)


def test_kernel_origin_value():
    val = kernel_1d(ABCDMatrix.free(1), 0.0, 0.0)
    assert val == pytest.approx(0.28209479177 - 0.28209479177j, abs=1e-10)


@settings(max_examples=30)
@given(matrices, st.floats(-5, 5), st.floats(-5, 5))
def test_kernel_modulus(m, x, xp):
    if abs(m.b) < 1e-3:
        return
    assert abs(kernel_1d(m, x, xp)) == pytest.approx((2 * np.pi * abs(m.b)) ** -0.5, rel=1e-12)


def test_kernel_symmetry():
    m = ABCDMatrix(2, 0.5, 1, 0.75)
    flipped = ABCDMatrix(m.d, m.b, m.c, m.a)
    assert kernel_1d(m, 0.4, -1.3) == pytest.approx(kernel_1d(flipped, -1.3, 0.4), abs=1e-15)


def test_singular():
    with pytest.raises(SingularB):
        kernel_1d(ABCDMatrix.identity(), 0.0, 0.0)


def test_gaussian_intensity_closed_form():
    # |phi|^2 = exp(-x^2/(A^2+B^2)) / sqrt(A^2+B^2) for psi = exp(-x^2/2)
    m = ABCDMatrix.free(1)
    spec = GridSpec(512, 12.0)
    out = propagate_1d(RealLine1D.from_function(gauss, spec), m, spec)
    s = m.a**2 + m.b**2
    want = np.exp(-spec.points**2 / s) / np.sqrt(s)
    assert rel_l2(np.abs(out.samples) ** 2, want) < 1e-10


def test_near_identity():
    # the input lattice must resolve the chirp of a B = 1e-3 kernel
    spec = GridSpec(32768, 5.0)
    out_spec = GridSpec(64, 4.0)
    out = propagate_1d(RealLine1D.from_function(gauss, spec), ABCDMatrix(1, 1e-3, 0, 1), out_spec)
    dist = np.sqrt(np.sum(np.abs(out.samples - gauss(out_spec.points)) ** 2) * out_spec.h)
    assert dist < 5e-2


def test_norm_preserved():
    spec = GridSpec(512, 10.0)
    f = RealLine1D.from_function(lambda x: gauss(x - 0.5) * np.exp(0.3j * x), spec)
    out = propagate_1d(f, ABCDMatrix(1, 0.5, -1, 0.5), spec)
    assert out.norm_sq() == pytest.approx(f.norm_sq(), rel=1e-6)


class TestWigner:
    spec = GridSpec(64, 6.0)
    nu = GridSpec(64, 6.0)

    def test_gaussian_closed_form(self):
        W = wigner_1d(RealLine1D.from_function(gauss, self.spec), self.nu)
        X, N = np.meshgrid(self.spec.points, self.nu.points)
        want = np.exp(-X**2 - N**2) / np.sqrt(np.pi)
        bulk = (np.abs(X) <= 2) & (np.abs(N) <= 2)
        assert np.max(np.abs(W - want)[bulk]) / want.max() < 5e-3

    def test_marginal(self):
        f = RealLine1D.from_function(lambda x: gauss(x) * (1 + 0.5 * x), GridSpec(256, 8.0))
        nu = GridSpec(256, 16.0)
        marg = wigner_1d(f, nu).sum(axis=0) * nu.h
        want = np.abs(f.samples) ** 2
        assert np.sum(np.abs(marg - want)) / np.sum(want) < 1e-3

    def test_real_for_complex_input(self):
        f = RealLine1D.from_function(lambda x: gauss(x - 1) + 0.4j * gauss(x + 1) * np.exp(2j * x),
                                     self.spec)
        W = wigner_1d(f, self.nu)
        assert W.dtype == float and np.all(np.isfinite(W))
