import numpy as np
import pytest
from hypothesis import given, settings

from conftest import matrices, unimodular
from efresnel.core import (ABCDMatrix, AngularMode, ComplexField, Gaussian, GridSpec,
                           SqueezeParams, Superposition, WarningCode, abcd_from_params, compose,
                           evaluate_beam, field_norm_sq, params_from_abcd, phase_align, rel_l2,
                           sample_beam, sampling_diagnostics, truncation_diagnostics, worker_count)
from efresnel.errors import InvalidMatrix, InvalidParams


def close(m, tup, tol=1e-12):
    return np.allclose(m.as_tuple(), tup, atol=tol, rtol=0)


class TestMatrix:
    def test_rejects_non_unimodular(self):
        with pytest.raises(InvalidMatrix):
            ABCDMatrix(1, 1, 1, 1)

    def test_rejects_nan(self):
        with pytest.raises(InvalidMatrix):
            ABCDMatrix(np.nan, 0, 0, 1)

    def test_swapped_is_inverse(self):
        m = ABCDMatrix(1, 0.5, -1, 0.5)
        assert close(compose(m, m.swapped()), (1, 0, 0, 1))


class TestParams:
    @pytest.mark.parametrize("abcd, k, t", [
        ((1, 0, 0, 1), 1, 0),
        ((1, 1, 0, 1), 1 - 0.5j, 0.5j),
        ((1, 0, -1, 1), 1 - 0.5j, -0.5j),
    ])
    def test_examples(self, abcd, k, t):
        p = params_from_abcd(ABCDMatrix(*abcd))
        assert abs(p.k - k) < 1e-15 and abs(p.t - t) < 1e-15

    def test_inverse_examples(self):
        assert close(abcd_from_params(SqueezeParams(1, 0)), (1, 0, 0, 1))
        assert close(abcd_from_params(SqueezeParams(1 - 0.5j, 0.5j)), (1, 1, 0, 1))

    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            SqueezeParams(1, 1)

    def test_hundred_random_round_trips(self, rng):
        worst = 0.0
        for _ in range(100):
            m = unimodular(*rng.uniform([-np.pi, 0.3, -2], [np.pi, 3, 2]))
            back = abcd_from_params(params_from_abcd(m))
            worst = max(worst, np.max(np.abs(back.as_array() - m.as_array())))
        assert worst < 1e-12

    @given(matrices)
    def test_invariant(self, m):
        p = params_from_abcd(m)
        assert abs(abs(p.k) ** 2 - abs(p.t) ** 2 - 1) <= 1e-12


class TestCompose:
    def test_free_adds(self):
        assert close(compose(ABCDMatrix.free(1), ABCDMatrix.free(2)), (1, 3, 0, 1))

    def test_identity(self):
        m = ABCDMatrix(1, 0.5, -1, 0.5)
        assert close(compose(m, ABCDMatrix.identity()), m.as_tuple())

    def test_lens_after_free(self):
        assert close(compose(ABCDMatrix.lens(-1), ABCDMatrix.free(1)), (1, 1, -1, 0))

    @settings(max_examples=50)
    @given(matrices, matrices, matrices)
    def test_associative(self, a, b, c):
        left = compose(compose(a, b), c).as_array()
        right = compose(a, compose(b, c)).as_array()
        assert np.allclose(left, right, atol=1e-9 * max(1, np.abs(left).max()))


class TestGrid:
    def test_cell_centred(self):
        g = GridSpec(4, 2.0)
        assert np.allclose(g.points, [-1.5, -0.5, 0.5, 1.5])
        assert g.h == 1.0

    @pytest.mark.parametrize("n", [0, 3, -2])
    def test_bad_n(self, n):
        with pytest.raises(ValueError):
            GridSpec(n, 1.0)

    def test_fields_are_read_only(self):
        f = sample_beam(Gaussian(), GridSpec(8, 3.0))
        with pytest.raises(ValueError):
            f.samples[0, 0] = 1


class TestBeams:
    def test_gaussian_definition(self):
        spec = GridSpec(64, 4.0)
        x1, x2 = spec.mesh()
        f = sample_beam(Gaussian(), spec)
        i = spec.n // 2
        assert f.samples[i, i] == pytest.approx(np.exp(-(x1[i, i] ** 2 + x2[i, i] ** 2) / 2))

    def test_s0_mode_is_gaussian(self):
        spec = GridSpec(32, 4.0)
        a = sample_beam(AngularMode(0), spec).samples
        b = sample_beam(Gaussian(), spec).samples
        assert np.max(np.abs(a - b)) < 1e-15

    def test_superposition_is_weighted_sum(self):
        beam = Superposition(((2.0, Gaussian()), (1j, AngularMode(1))))
        x, y = np.array([0.3, -1.2]), np.array([0.7, 0.1])
        want = 2 * evaluate_beam(Gaussian(), x, y) + 1j * evaluate_beam(AngularMode(1), x, y)
        assert np.allclose(evaluate_beam(beam, x, y), want, rtol=0, atol=1e-15)


class TestNorm:
    def test_zero(self):
        spec = GridSpec(8, 1.0)
        assert field_norm_sq(ComplexField(spec, np.zeros((8, 8)))) == 0.0

    def test_gaussian_is_pi(self):
        assert field_norm_sq(sample_beam(Gaussian(), GridSpec(128, 8.0))) == pytest.approx(
            np.pi, rel=1e-6)

    def test_convergence(self):
        errs = [abs(field_norm_sq(sample_beam(AngularMode(2, 1.3), GridSpec(n, 8.0)))
                    - 2 * np.pi * 1.3**2) for n in (32, 64, 128)]
        assert errs[2] <= errs[1] <= errs[0] or errs[2] < 1e-12


class TestDiagnostics:
    def test_near_singular(self):
        spec = GridSpec(64, 6.0)
        m = ABCDMatrix(1, 1e-9, 0, 1)
        codes = [w.code for w in sampling_diagnostics(m, spec, spec)]
        assert codes == [WarningCode.NEAR_SINGULAR_B]

    def test_well_sampled(self):
        spec = GridSpec(256, 6.0)
        assert sampling_diagnostics(ABCDMatrix.free(1), spec, spec) == []

    def test_undersampled(self):
        spec = GridSpec(64, 6.0)
        codes = {w.code for w in sampling_diagnostics(ABCDMatrix.free(0.05), spec, spec)}
        assert WarningCode.CHIRP_UNDERSAMPLED in codes

    def test_frequency_variant_checks_c(self):
        spec = GridSpec(64, 6.0)
        codes = [w.code for w in sampling_diagnostics(ABCDMatrix.free(1), spec, spec, "frequency")]
        assert codes == [WarningCode.NEAR_SINGULAR_C]

    def test_truncation(self):
        assert truncation_diagnostics(sample_beam(Gaussian(), GridSpec(64, 8.0))) == []
        codes = [w.code for w in truncation_diagnostics(sample_beam(Gaussian(), GridSpec(64, 2.0)))]
        assert codes == [WarningCode.TRUNCATION_LOSS]


def test_phase_align_removes_global_phase(rng):
    a = rng.normal(size=20) + 1j * rng.normal(size=20)
    assert rel_l2(phase_align(a * np.exp(0.7j), a), a) < 1e-14


def test_worker_count(monkeypatch):
    monkeypatch.setenv("EFRESNEL_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("EFRESNEL_THREADS", "0")
    with pytest.raises(ValueError):
        worker_count()
