import mpmath
import numpy as np
import pytest

from efresnel.collins import (HankelConfig, RadialModes, angular_decompose, angular_reconstruct,
                              bessel_j, collins_radial, radial_grid, verify_hankel_consistency)
from efresnel.core import (ABCDMatrix, AngularMode, Gaussian, GridSpec, Superposition, rel_l2,
                           sample_beam)
from efresnel.errors import DomainError, SingularB

SPEC = GridSpec(128, 8.0)


def series_oracle(s, x):
    """High-precision power series for J_s(x)."""
    with mpmath.workdps(60):
        x = mpmath.mpf(x)
        term = (x / 2) ** s / mpmath.factorial(s)
        total = term
        k = 0
        while abs(term) > mpmath.mpf(10) ** -40 or k < 2 * x:
            k += 1
            term = -term * (x / 2) ** 2 / (k * (k + s))
            total += term
        return float(total)


class TestBessel:
    def test_origin(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(1, 0.0) == 0.0

    def test_first_zero(self):
        assert abs(bessel_j(0, 2.404826)) < 1e-6

    @pytest.mark.parametrize("s", [0, 1, 2, 5, 11, 20])
    def test_against_series(self, s):
        x = np.linspace(0, 50, 101)
        want = np.array([series_oracle(s, v) for v in x])
        assert np.max(np.abs(bessel_j(s, x) - want)) <= 1e-10

    def test_recurrence(self):
        x = np.linspace(0.5, 50, 200)
        for s in range(1, 20):
            lhs = bessel_j(s - 1, x) + bessel_j(s + 1, x)
            assert np.max(np.abs(lhs - 2 * s / x * bessel_j(s, x))) <= 1e-9

    def test_symmetries(self):
        x = np.array([0.7, 3.3, 17.0])
        assert np.allclose(bessel_j(-3, x), -bessel_j(3, x), atol=1e-15)
        assert np.allclose(bessel_j(3, -x), -bessel_j(3, x), atol=1e-15)
        assert np.allclose(bessel_j(2, -x), bessel_j(2, x), atol=1e-15)

    def test_matches_scipy(self):
        special = pytest.importorskip("scipy.special")
        x = np.linspace(-200, 200, 801)
        for s in (0, 3, 40):
            assert np.max(np.abs(bessel_j(s, x) - special.jv(s, x))) < 1e-11

    @pytest.mark.parametrize("s, x", [(65, 1.0), (0, 1e5), (0, np.nan), (1.5, 1.0)])
    def test_domain(self, s, x):
        with pytest.raises(DomainError):
            bessel_j(s, x)


class TestAngular:
    def test_single_mode_label(self):
        # e^{+i theta} lands on index -1 under the e^{+i s theta} analysis convention
        md = angular_decompose(sample_beam(AngularMode(1), SPEC), 2, 128)
        peaks = np.abs(md.profiles).max(axis=1)
        assert set(md.s_values[peaks > 1e-10 * peaks.max()]) == {-1}

    def test_gaussian_is_s0(self):
        md = angular_decompose(sample_beam(Gaussian(), SPEC), 2, 128)
        peaks = np.abs(md.profiles).max(axis=1)
        assert set(md.s_values[peaks > 1e-10 * peaks.max()]) == {0}

    def test_lattice_leakage_is_small(self):
        md = angular_decompose(sample_beam(Gaussian(), SPEC), 4, 128)
        peaks = np.abs(md.profiles).max(axis=1)
        assert peaks[md.s_values == 4][0] < 1e-5 * peaks.max()

    @pytest.mark.parametrize("beam", [Gaussian(), AngularMode(1), AngularMode(2)])
    def test_round_trip(self, beam):
        f = sample_beam(beam, SPEC)
        back = angular_reconstruct(angular_decompose(f, 4, 512), SPEC)
        assert rel_l2(back.samples, f.samples) <= 1e-4

    def test_reconstruct_then_decompose(self):
        md = angular_decompose(AngularMode(2), 3, 512, R=8.0)
        again = angular_decompose(angular_reconstruct(md, SPEC), 3, 512)
        assert rel_l2(again.profile(-2), md.profile(-2)) < 1e-3

    def test_zero_modes(self):
        r = radial_grid(32, 4.0)
        md = RadialModes(np.array([-1, 0, 1]), r, np.zeros((3, 32)))
        assert not np.any(angular_reconstruct(md, GridSpec(16, 4.0)).samples)

    def test_two_mode_linearity(self):
        a, b = 0.8 - 0.1j, 0.3j
        sup = Superposition(((a, AngularMode(0)), (b, AngularMode(2))))
        md = angular_decompose(sup, 3, 128, R=6.0)
        m0 = angular_decompose(AngularMode(0), 3, 128, R=6.0)
        m2 = angular_decompose(AngularMode(2), 3, 128, R=6.0)
        assert np.max(np.abs(md.profile(0) - a * m0.profile(0))) < 1e-6
        assert np.max(np.abs(md.profile(-2) - b * m2.profile(-2))) < 1e-6

    def test_energies(self):
        md = angular_decompose(AngularMode(1), 2, 256, R=8.0)
        assert md.energies().sum() == pytest.approx(np.pi, rel=1e-4)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            angular_decompose(sample_beam(Gaussian(), SPEC), 2, order=2)


class TestCollinsRadial:
    def test_zero_profile(self):
        r = radial_grid(64, 6.0)
        assert not np.any(collins_radial(np.zeros(64), 1, ABCDMatrix.free(1), r, r))

    def test_singular(self):
        r = radial_grid(64, 6.0)
        with pytest.raises(SingularB):
            collins_radial(np.ones(64), 0, ABCDMatrix.lens(1), r, r)

    def test_gaussian_s0_closed_form(self):
        # s = 0 harmonic of the propagated Gaussian through a free section
        m = ABCDMatrix.free(1)
        r = radial_grid(256, 8.0)
        got = collins_radial(np.exp(-r * r / 2), 0, m, r, r)
        a = 0.5 - 0.5j * m.a / m.b
        want = np.exp(0.5j * m.d * r * r / m.b - r * r / (4 * a * m.b**2)) / (2j * m.b * a)
        assert rel_l2(got, want) <= 1e-3


class TestConsistency:
    m = ABCDMatrix.free(1)

    def test_gaussian(self):
        r = verify_hankel_consistency(Gaussian(), self.m, HankelConfig(tolerance=1e-3))
        assert r.passed and r.extras["active_modes"] == 1

    @pytest.mark.parametrize("s", [1, 2])
    def test_modes(self, s):
        r = verify_hankel_consistency(AngularMode(s), self.m, HankelConfig(tolerance=2e-3))
        assert r.passed

    def test_superposition(self):
        beam = Superposition(((1, AngularMode(0)), (0.5j, AngularMode(1))))
        r = verify_hankel_consistency(beam, self.m, HankelConfig(tolerance=5e-3))
        assert r.passed and r.extras["active_modes"] == 2
        assert sum("active=True" in line for line in r.to_text().splitlines()) == 2

    def test_singular(self):
        r = verify_hankel_consistency(Gaussian(), ABCDMatrix.lens(1), HankelConfig())
        assert not r.passed and r.reason.startswith("SingularB")
