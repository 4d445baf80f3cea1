import math

import numpy as np
import pytest

from conftest import random_level_point, random_sphere_point
from gtlab.dynamics import ham_field, lifted
from gtlab.errors import CriticalEnergyError, FixedPointError, NotOnLocus
from gtlab.geometry import ModelConfig, basis_point, volume_M
from gtlab.heisenberg import build_chart
from gtlab.kernels import (
    gk_integral,
    gk_spectral,
    gk_spectral_many,
    gk_trace,
    orbit_distance,
    predicted_scaling_leading,
    predicted_trace_leading,
    trace_terms,
)
from gtlab.window import Window, chi_hat, eval_chi
from sphere_rules import s3_rule

BUMP = Window()
EMPTY = Window(amplitude=0.0)


class TestSpectralKernel:
    def test_empty_window(self, line_model, equator):
        assert gk_spectral(line_model, 8, equator, equator, EMPTY) == 0
        assert gk_integral(line_model, 8, equator, equator, EMPTY) == 0

    def test_equivariance(self, rng, plane_model):
        x, y = random_sphere_point(rng, 3), random_sphere_point(rng, 3)
        k = 9
        base = gk_spectral(plane_model, k, x, y, BUMP)
        for t1, t2 in rng.uniform(-4, 4, (5, 2)):
            moved = gk_spectral(plane_model, k, np.exp(1j * t1) * x, np.exp(1j * t2) * y, BUMP)
            assert moved == pytest.approx(np.exp(1j * k * (t1 - t2)) * base, abs=1e-12)

    def test_equator_dual_route(self, line_model, equator):
        a = gk_spectral(line_model, 8, equator, equator, BUMP)
        b = gk_integral(line_model, 8, equator, equator, BUMP)
        assert abs(a - b) <= 1e-8

    def test_random_pairs_dual_route(self, rng, line_model):
        worst = 0.0
        for _ in range(20):
            x, y = random_sphere_point(rng, 2), random_sphere_point(rng, 2)
            worst = max(worst, abs(gk_spectral(line_model, 8, x, y, BUMP)
                                   - gk_integral(line_model, 8, x, y, BUMP)))
        assert worst <= 1e-8

    def test_hermitian(self, rng, plane_model):
        for _ in range(5):
            x, y = random_sphere_point(rng, 3), random_sphere_point(rng, 3)
            assert gk_integral(plane_model, 6, x, y, BUMP) == pytest.approx(
                np.conj(gk_integral(plane_model, 6, y, x, BUMP)), abs=1e-8)

    def test_shifted_window(self, rng, plane_model):
        w = BUMP.shifted(0.8)
        x, y = random_sphere_point(rng, 3), random_sphere_point(rng, 3)
        assert abs(gk_spectral(plane_model, 7, x, y, w) - gk_integral(plane_model, 7, x, y, w)) <= 1e-8

    def test_many(self, rng, plane_model):
        xs = [random_sphere_point(rng, 3) for _ in range(4)]
        ys = [random_sphere_point(rng, 3) for _ in range(4)]
        many = gk_spectral_many(plane_model, 5, xs, ys, BUMP)
        assert np.allclose(many, [gk_spectral(plane_model, 5, x, y, BUMP) for x, y in zip(xs, ys)],
                           atol=1e-15)


class TestTrace:
    def test_three_terms(self, line_model):
        expected = chi_hat(BUMP, 1.0) + chi_hat(BUMP, 0.0) + chi_hat(BUMP, -1.0)
        assert gk_trace(line_model, 2, BUMP) == pytest.approx(expected, abs=1e-15)

    def test_empty(self, plane_model):
        assert gk_trace(plane_model, 10, EMPTY) == 0

    @pytest.mark.parametrize("k", [1, 3, 6])
    def test_diagonal_integral(self, line_model, k):
        pts, w = s3_rule(24, 2 * k + 4)
        diag = np.array([gk_spectral(line_model, k, p, p, BUMP) for p in pts])
        assert np.sum(w * diag) == pytest.approx(gk_trace(line_model, k, BUMP), abs=1e-9)

    def test_line_tail(self, line_model):
        # all-integer Poisson sum minus the modes beyond the spectrum
        for k in (64, 128):
            tail = 2 * sum(chi_hat(BUMP, m).real for m in range(k // 2 + 1, 400))
            expected = 2 * math.pi * eval_chi(BUMP, 0.0) - tail
            assert gk_trace(line_model, k, BUMP).real == pytest.approx(expected, abs=1e-12)

    @pytest.mark.xfail(strict=True, reason="the finite spectrum leaves a tail of about 3e-5 at k=64")
    def test_line_k64_within_1e6(self, line_model):
        assert abs(gk_trace(line_model, 64, BUMP) - 2 * math.pi) <= 1e-6

    def test_line_k128(self, line_model):
        assert abs(gk_trace(line_model, 128, BUMP) - 2 * math.pi) <= 1e-6


class TestScalingPrediction:
    def test_equator(self, line_model, equator):
        z = np.zeros(2)
        for k in (16, 100):
            p = predicted_scaling_leading(line_model, equator, equator, 0, 0, z, z, k, BUMP)
            assert p == pytest.approx(2 * math.sqrt(2) * math.sqrt(k / math.pi), rel=1e-14)

    def test_vertical_and_transverse(self, line_model, equator):
        chart = build_chart(equator)
        u = chart.chart_vector(ham_field(line_model, equator))
        vert = u / np.linalg.norm(u)
        trans = np.array([-vert[1], vert[0]])
        z = np.zeros(2)
        base = predicted_scaling_leading(line_model, equator, equator, 0, 0, z, z, 32, BUMP)
        v = predicted_scaling_leading(line_model, equator, equator, 0, 0, vert, vert, 32, BUMP)
        t = predicted_scaling_leading(line_model, equator, equator, 0, 0, trans, trans, 32, BUMP)
        assert v == pytest.approx(base, rel=1e-13)
        assert t == pytest.approx(base * math.exp(-2), rel=1e-13)

    def test_theta_phase(self, line_model, equator):
        z = np.zeros(2)
        base = predicted_scaling_leading(line_model, equator, equator, 0, 0, z, z, 20, BUMP)
        p = predicted_scaling_leading(line_model, equator, equator, 0.3, -0.1, z, z, 20, BUMP)
        assert p == pytest.approx(np.exp(20j * 0.4) * base, rel=1e-13)

    def test_errors(self, line_model, plane_model, equator):
        z = np.zeros(2)
        off = np.array([math.sqrt(0.8), math.sqrt(0.2)])
        with pytest.raises(NotOnLocus):
            predicted_scaling_leading(line_model, off, off, 0, 0, z, z, 8, BUMP)
        other = np.array([1, 1j]) * np.exp(0.2j) / math.sqrt(2)
        narrow = Window(0.0, 1.0)
        with pytest.raises(NotOnLocus):
            predicted_scaling_leading(line_model, equator, other, 0, 0, z, z, 8, narrow)
        cfg = ModelConfig(2, (0, 1, 2), 0.5)
        x = np.array([math.sqrt(0.5), math.sqrt(0.5), 0])
        assert predicted_scaling_leading(cfg, x, x, 0, 0, np.zeros(4), np.zeros(4), 8, BUMP) != 0
        bad = ModelConfig(2, (0, 1, 2), 1.0 + 1e-3)
        with pytest.raises((FixedPointError, NotOnLocus)):
            predicted_scaling_leading(bad, basis_point(2, 1), basis_point(2, 1), 0, 0,
                                      np.zeros(4), np.zeros(4), 8, BUMP)


class TestTracePrediction:
    def test_line(self, line_model):
        for k in (4, 31):
            assert predicted_trace_leading(line_model, k, BUMP) == pytest.approx(2 * math.pi, rel=1e-14)

    def test_wide_window(self, line_model):
        w = Window(0.0, 7.0)
        c0, c1 = eval_chi(w, 0.0), eval_chi(w, 2 * math.pi)
        for k in (90, 91):
            expected = 2 * math.pi * (c0 + c1 * np.exp(-1j * math.pi * k) + c1 * np.exp(1j * math.pi * k))
            assert predicted_trace_leading(line_model, k, w) == pytest.approx(expected, abs=1e-12)
            # the Poisson value is exact up to the finite-spectrum tail
            assert gk_trace(line_model, k, w) == pytest.approx(expected, abs=1e-6)

    def test_empty_and_critical(self, line_model):
        assert predicted_trace_leading(line_model, 4, EMPTY) == 0
        with pytest.raises(CriticalEnergyError):
            ModelConfig(1, (0, 1), 1.0)

    def test_plane_leading_term(self, plane_model):
        k = 40
        # sigma = 0: (k/pi) * level integral pi^2/2, times chi(0)
        assert predicted_trace_leading(plane_model, k, Window(0.0, 2.0)) == pytest.approx(
            k / math.pi * math.pi**2 / 2, rel=1e-12)

    def test_terms(self, plane_model):
        rows = trace_terms(plane_model, 8, Window(0.0, 4.0))
        sigmas = sorted({r["sigma"] for r in rows})
        assert sigmas == pytest.approx([-math.pi, 0, math.pi])
        half = [r for r in rows if r["sigma"] == pytest.approx(math.pi)]
        assert {tuple(r["indices"]) for r in half} == {(0, 2), (1,)}


def test_orbit_distance(line_model, equator):
    assert orbit_distance(line_model, equator, equator, BUMP) == pytest.approx(0, abs=1e-8)
    far = np.array([math.sqrt(0.9), math.sqrt(0.1)])
    assert orbit_distance(line_model, equator, far, BUMP) > 0.2
    assert orbit_distance(line_model, equator, lifted(line_model, equator, 2.0), BUMP) == pytest.approx(0, abs=1e-7)
