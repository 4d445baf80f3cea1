import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_sphere_point
from gtlab.geometry import ModelConfig, volume_M
from gtlab.hardy import (
    hardy_dim,
    log_norm_sq,
    monomial_norm_sq,
    multi_indices,
    spectrum,
    szego_constant,
    szego_kernel,
    szego_kernel_spectral,
)
from gtlab.heisenberg import build_chart, psi2
from gtlab.kernels import szego_scaling_ratio
from gtlab.studies import fit_loglog_slope
from sphere_rules import s3_rule, s5_rule


@pytest.mark.parametrize("d, k, n", [(1, 3, 4), (2, 2, 6), (1, 0, 1), (3, 5, 56)])
def test_hardy_dim(d, k, n):
    assert hardy_dim(d, k) == n


def test_hardy_dim_overflow():
    with pytest.raises(OverflowError):
        hardy_dim(40, 10**6)
    assert hardy_dim(2, 10**5) == math.comb(10**5 + 2, 2)


def test_multi_indices():
    b = multi_indices(2, 3)
    assert b.shape == (10, 3)
    assert (b.sum(axis=1) == 3).all()
    assert len({tuple(r) for r in b}) == 10
    assert b[0].tolist() == [3, 0, 0]


class TestNorms:
    @pytest.mark.parametrize("beta, expected", [((0, 0), math.pi), ((1, 0), math.pi / 2), ((1, 1), math.pi / 6)])
    def test_line_examples(self, beta, expected):
        pts, w = s3_rule()
        oracle = float((w * np.prod(np.abs(pts) ** (2 * np.array(beta)), axis=1)).sum())
        assert oracle == pytest.approx(expected, rel=1e-12)
        assert monomial_norm_sq(1, beta) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("beta", [(2, 1, 0), (1, 1, 1), (0, 0, 3)])
    def test_plane_against_quadrature(self, beta):
        pts, w = s5_rule(24, 8)
        oracle = float((w * np.prod(np.abs(pts) ** (2 * np.array(beta)), axis=1)).sum())
        assert monomial_norm_sq(2, beta) == pytest.approx(oracle, rel=1e-10)

    def test_closed_form_matches_volume_formula(self):
        cfg = ModelConfig(2, (0, 1, 2), 0.5)
        for beta in multi_indices(2, 4):
            expected = volume_M(2) * 2 * math.prod(math.factorial(b) for b in beta) / math.factorial(6)
            assert monomial_norm_sq(cfg, beta) == pytest.approx(expected, rel=1e-14)

    def test_large_k_log_gamma_branch(self):
        beta = (300, 301)
        exact = math.log(math.pi) + math.lgamma(301) + math.lgamma(302) - math.lgamma(603)
        assert math.log(monomial_norm_sq(1, beta)) == pytest.approx(exact, rel=1e-13)
        assert log_norm_sq(1, [beta])[0] == pytest.approx(exact, rel=1e-13)


class TestSzego:
    def test_diagonal_trace(self, rng):
        for d in (1, 2):
            for k in (0, 1, 7, 40, 600):
                x = random_sphere_point(rng, d + 1)
                val = szego_kernel(d, k, x, x) * volume_M(d)
                assert abs(val - hardy_dim(d, k)) <= 1e-10 * hardy_dim(d, k)

    def test_orthogonal_points(self):
        assert szego_kernel(1, 5, [1, 0], [0, 1]) == 0

    def test_line_example(self):
        val = szego_kernel(1, 1, [1, 0], np.array([1, 1]) / math.sqrt(2))
        basis = szego_kernel_spectral(1, 1, [1, 0], np.array([1, 1]) / math.sqrt(2))
        assert basis == pytest.approx(2 / math.pi / math.sqrt(2), abs=1e-15)
        assert val == pytest.approx(basis, abs=1e-15)

    @pytest.mark.parametrize("d", [1, 2])
    def test_closed_form_vs_basis_sum(self, rng, d):
        for k in range(0, 9):
            x, y = random_sphere_point(rng, d + 1), random_sphere_point(rng, d + 1)
            assert abs(szego_kernel(d, k, x, y) - szego_kernel_spectral(d, k, x, y)) <= 1e-12

    def test_reproducing_property(self, rng):
        for k in (1, 4, 8, 12):
            pts, w = s3_rule(24, 2 * k + 2)
            x, y = random_sphere_point(rng, 2), random_sphere_point(rng, 2)
            integral = np.sum(w * szego_kernel(1, k, x, pts) * szego_kernel(1, k, pts, y))
            assert abs(integral - szego_kernel(1, k, x, y)) <= 1e-9

    @given(st.integers(0, 2**31), st.floats(-10, 10), st.integers(0, 30))
    def test_equivariance_and_symmetry(self, seed, theta, k):
        rng = np.random.default_rng(seed)
        x, y = random_sphere_point(rng, 3), random_sphere_point(rng, 3)
        val = szego_kernel(2, k, x, y)
        assert szego_kernel(2, k, np.exp(1j * theta) * x, y) == pytest.approx(np.exp(1j * k * theta) * val, abs=1e-9)
        assert szego_kernel(2, k, y, x) == pytest.approx(np.conj(val), abs=1e-12)

    def test_constant_large_k(self):
        assert szego_constant(2, 1000) == pytest.approx(math.comb(1002, 2) * 2 / math.pi**2, rel=1e-12)


def test_near_diagonal_limit_slope(rng):
    chart = build_chart(random_sphere_point(rng, 3))
    pairs = [(rng.normal(size=4), rng.normal(size=4)) for _ in range(4)]
    ks = [64, 128, 256, 512, 1024]
    errs = []
    for k in ks:
        worst = 0.0
        for v1, v2 in pairs:
            r = szego_scaling_ratio(2, k, chart, 0.3, -0.2, v1, v2)
            worst = max(worst, abs(r / np.exp(psi2(v1, v2)) - 1))
        errs.append(worst)
    slope, _ = fit_loglog_slope(ks, errs)
    assert slope <= -0.4


def test_spectrum_table(plane_model):
    tab = spectrum(plane_model, 3)
    assert len(tab) == 10
    assert tab.lambdas.min() >= 0 and tab.lambdas.max() <= 6
    csv = tab.to_csv().splitlines()
    assert csv[0] == "beta_0,beta_1,beta_2,lambda,norm_sq"
    assert len(csv) == 11
    assert float(csv[1].split(",")[-1]) == pytest.approx(monomial_norm_sq(2, (3, 0, 0)), rel=1e-15)
