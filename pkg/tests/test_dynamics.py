import math

import numpy as np
import pytest

from conftest import random_sphere_point
from gtlab.geometry import ModelConfig, basis_point, canonical, dist_M, g_metric, same_point
from gtlab.dynamics import (
    energy,
    eigenvalue,
    field_norm,
    flow_M,
    flow_X,
    ham_field,
    is_fixed_point,
    lifted,
    unitary_kernel,
    unitary_kernel_spectral,
)
from gtlab.hardy import hardy_dim, monomial_norm_sq, multi_indices, szego_kernel
from sphere_rules import s3_rule


def test_energy_examples(line_model, plane_model, equator):
    assert energy(line_model, equator) == pytest.approx(0.5, abs=1e-15)
    assert energy(line_model, basis_point(1, 1)) == 1
    assert energy(plane_model, basis_point(2, 2)) == 2


class TestField:
    def test_vanishes_at_fixed_points(self, plane_model):
        for j in range(3):
            assert np.linalg.norm(ham_field(plane_model, basis_point(2, j))) == 0
            assert is_fixed_point(plane_model, basis_point(2, j))

    def test_equator_speed(self, line_model, equator):
        assert field_norm(line_model, equator) == pytest.approx(0.5, abs=1e-15)
        h = 1e-6
        speed = dist_M(equator, flow_M(line_model, equator, h)) / h
        assert speed == pytest.approx(0.5, abs=1e-6)

    def test_orthogonal_to_J(self, rng, plane_model):
        for _ in range(20):
            m = random_sphere_point(rng, 3)
            u = ham_field(plane_model, m)
            assert abs(g_metric(u, 1j * u)) < 1e-15

    def test_tangent_to_level(self, rng, plane_model):
        for _ in range(20):
            m = random_sphere_point(rng, 3)
            h = 1e-6
            df = (energy(plane_model, flow_M(plane_model, m, h))
                  - energy(plane_model, flow_M(plane_model, m, -h))) / (2 * h)
            assert abs(df) < 1e-8

    def test_is_the_flow_velocity(self, rng, plane_model):
        m = random_sphere_point(rng, 3)
        h = 1e-6
        vel = (flow_X(plane_model, m, h) - flow_X(plane_model, m, -h)) / (2 * h)
        vel -= np.vdot(m, vel) * m
        assert np.allclose(vel, ham_field(plane_model, m), atol=1e-9)


class TestFlow:
    def test_half_period(self, line_model, equator):
        out = flow_M(line_model, equator, math.pi)
        assert same_point(out, np.array([1, -1]) / math.sqrt(2))

    def test_integer_period(self, rng, plane_model):
        m = canonical(random_sphere_point(rng, 3))
        assert same_point(flow_M(plane_model, m, 2 * math.pi), m)

    def test_conservation_and_isometry(self, rng, plane_model):
        for _ in range(20):
            m, n = random_sphere_point(rng, 3), random_sphere_point(rng, 3)
            t = rng.uniform(-20, 20)
            fm, fn = flow_M(plane_model, m, t), flow_M(plane_model, n, t)
            assert energy(plane_model, fm) == pytest.approx(energy(plane_model, m), abs=1e-14)
            assert dist_M(fm, fn) == pytest.approx(dist_M(m, n), abs=1e-12)

    def test_group_law(self, rng, plane_model):
        m = random_sphere_point(rng, 3)
        s, t = 0.7, -2.3
        assert same_point(flow_M(plane_model, flow_M(plane_model, m, s), t),
                          flow_M(plane_model, m, s + t))

    def test_lift_rotation(self, line_model):
        tau = 0.9
        assert np.allclose(lifted(line_model, basis_point(1, 1), tau),
                           np.exp(1j * tau) * basis_point(1, 1), atol=1e-15)

    def test_lift_equivariance(self, rng, plane_model):
        x = random_sphere_point(rng, 3)
        t, th = 1.3, 0.4
        assert same_point(flow_X(plane_model, x, t), flow_M(plane_model, x, t))
        assert np.allclose(flow_X(plane_model, np.exp(1j * th) * x, t),
                           np.exp(1j * th) * flow_X(plane_model, x, t), atol=1e-15)


def _fd_phase_rate(cfg, beta, h=1e-5):
    # (U(h) z^beta)(x) = z^beta(phi^X_{-h} x); read off the phase derivative
    x = np.full(cfg.d + 1, 1 / math.sqrt(cfg.d + 1), dtype=complex)
    vals = [np.prod(lifted(cfg, x, t) ** np.array(beta)) for t in (-h, h)]
    return float(np.angle(vals[1] / vals[0])) / (2 * h)


@pytest.mark.parametrize("weights, beta, expected", [
    ((0, 1), (2, 3), 3),
    ((0, 1), (7, 0), 0),
    ((1, 1, 2), (1, 0, 1), 3),
])
def test_eigenvalue_examples(weights, beta, expected):
    lo, hi = min(weights), max(weights)
    cfg = ModelConfig(len(weights) - 1, weights, (lo + hi) / 2 + 0.01)
    assert eigenvalue(cfg, beta) == expected
    assert _fd_phase_rate(cfg, beta) == pytest.approx(expected, abs=1e-8)


def test_sign_lock(plane_model):
    for k in (1, 3, 6):
        for beta in multi_indices(2, k):
            lam = eigenvalue(plane_model, beta)
            assert _fd_phase_rate(plane_model, beta) == pytest.approx(lam, abs=1e-7)
            assert k * plane_model.a.min() <= lam <= k * plane_model.a.max()


class TestUnitaryKernel:
    def test_identity(self, rng, plane_model):
        x, y = random_sphere_point(rng, 3), random_sphere_point(rng, 3)
        assert unitary_kernel(plane_model, 5, 0.0, x, y) == szego_kernel(2, 5, x, y)

    def test_fixed_point_example(self, line_model):
        e1 = basis_point(1, 1)
        for k in (1, 4, 9):
            for tau in (0.3, 2.0, -1.1):
                expected = hardy_dim(1, k) / math.pi * np.exp(1j * k * tau)
                assert unitary_kernel(line_model, k, tau, e1, e1) == pytest.approx(expected, abs=1e-12)
                assert unitary_kernel_spectral(line_model, k, tau, e1, e1) == pytest.approx(expected, abs=1e-12)

    def test_dual_route(self, rng, line_model):
        for k in range(0, 13):
            x, y = random_sphere_point(rng, 2), random_sphere_point(rng, 2)
            tau = rng.uniform(-10, 10)
            a = unitary_kernel(line_model, k, tau, x, y)
            b = unitary_kernel_spectral(line_model, k, tau, x, y)
            assert abs(a - b) <= 1e-10

    @pytest.mark.parametrize("k", [1, 4, 8])
    def test_unitarity(self, line_model, k):
        pts, w = s3_rule(24, 2 * k + 4)
        betas = multi_indices(1, k)
        norms = np.sqrt([monomial_norm_sq(1, b) for b in betas])
        tau = 0.83

        def basis(z):
            return np.prod(z[None, :, :] ** betas[:, None, :], axis=2) / norms[:, None]

        moved = pts * np.exp(1j * line_model.a * tau)
        for vals in (basis(pts), basis(moved)):
            gram = (vals * w) @ vals.conj().T
            assert np.allclose(gram, np.eye(len(betas)), atol=1e-8)
