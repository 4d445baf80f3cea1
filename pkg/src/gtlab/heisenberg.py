"""Heisenberg local coordinates on the sphere and the tvh splitting.

A chart at ``x`` is ``gamma_x(theta, v) = e^{i theta}(x + W v)/sqrt(1 + |v|^2)``
where the columns of ``W`` form an orthonormal basis of ``x^perp``.  The circle
action is translation in ``theta`` and the pairing of two chart points is

    <gamma(0, u), gamma(0, v)> = (1 + h(u, v)) / sqrt((1 + |u|^2)(1 + |v|^2)),

whose k-th power at scale ``1/sqrt(k)`` tends to ``exp(psi_2(u, v))``.

Real chart vectors ``v in R^{2d}`` are identified with ``C^d`` through
``v_{2j} + i v_{2j+1}`` (zero-based), i.e. consecutive real pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import ham_field, lifted
from .errors import FixedPointError, NotAPeriodError
from .geometry import ModelConfig, dist_M, normalize

PERIOD_TOL = 1e-8
FIXED_TOL = 1e-10


def to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[0::2] + 1j * v[1::2]


def to_real(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    out = np.empty(2 * c.size)
    out[0::2] = c.real
    out[1::2] = c.imag
    return out


def real_form(A) -> np.ndarray:
    """Real ``2d x 2d`` matrix of a complex ``d x d`` matrix in the paired layout."""
    A = np.asarray(A, dtype=complex)
    d = A.shape[0]
    R = np.empty((2 * d, 2 * d))
    R[0::2, 0::2] = A.real
    R[0::2, 1::2] = -A.imag
    R[1::2, 0::2] = A.imag
    R[1::2, 1::2] = A.real
    return R


def complex_structure(d: int) -> np.ndarray:
    """Multiplication by ``i`` on ``R^{2d}``."""
    return real_form(1j * np.eye(d))


def wrap_phase(theta: float) -> float:
    """Representative in ``(-pi, pi]``; ``-pi`` goes to ``pi``."""
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if t <= -math.pi else t


@dataclass(frozen=True)
class HLChart:
    base: np.ndarray
    frame: np.ndarray  # (d + 1, d), orthonormal columns spanning base^perp

    @property
    def d(self) -> int:
        return self.frame.shape[1]

    def embed(self, theta: float, v) -> np.ndarray:
        """``gamma_x(theta, v)`` for a real chart vector ``v``."""
        c = to_complex(v)
        z = self.base + self.frame @ c
        return np.exp(1j * theta) * z / math.sqrt(1.0 + float(np.vdot(c, c).real))

    def coords(self, z) -> tuple[float, np.ndarray]:
        """Inverse of ``embed`` on the chart domain ``<z, base> != 0``."""
        z = np.asarray(z, dtype=complex)
        c = np.vdot(self.base, z)
        if abs(c) < 1e-14:
            raise ValueError("point lies outside the chart domain")
        theta = float(np.angle(c))
        return theta, to_real((self.frame.conj().T @ z) / c)

    def tangent(self, v) -> np.ndarray:
        """Horizontal vector at ``base`` for the chart vector ``v``."""
        return self.frame @ to_complex(v)

    def chart_vector(self, w) -> np.ndarray:
        """Real chart coordinates of a horizontal vector at ``base``."""
        return to_real(self.frame.conj().T @ np.asarray(w, dtype=complex))


def build_chart(x) -> HLChart:
    """Chart at ``x`` with a Householder frame of ``x^perp``.

    ``H = I - 2 u u^* / |u|^2`` with ``u = x + e^{i phi} e_0`` (``phi = arg x_0``)
    sends ``x`` to ``-e^{i phi} e_0``; its remaining columns span ``x^perp``.
    Each column is rotated so its first nonzero entry is real positive.
    """
    x = normalize(x)
    n = x.size
    phi = float(np.angle(x[0])) if abs(x[0]) > 0 else 0.0
    u = x.copy()
    u[0] += np.exp(1j * phi)
    H = np.eye(n, dtype=complex) - 2.0 * np.outer(u, u.conj()) / float(np.vdot(u, u).real)
    W = H[:, 1:].copy()
    for j in range(W.shape[1]):
        col = W[:, j]
        lead = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        W[:, j] = col * (abs(lead) / lead)
    # remove the O(eps) component along x left by rounding
    W -= np.outer(x, x.conj() @ W)
    W, _ = np.linalg.qr(W)
    for j in range(W.shape[1]):
        col = W[:, j]
        lead = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        W[:, j] = col * (abs(lead) / lead)
    x.setflags(write=False)
    W.setflags(write=False)
    return HLChart(x, W)


def psi2(v1, v2) -> complex:
    """``h(v1, v2) - (|v1|^2 + |v2|^2)/2`` on real chart vectors."""
    return psi2_complex(to_complex(v1), to_complex(v2))


def psi2_complex(c1, c2) -> complex:
    c1 = np.asarray(c1, dtype=complex)
    c2 = np.asarray(c2, dtype=complex)
    h = complex(np.vdot(c2, c1))
    return h - 0.5 * (float(np.vdot(c1, c1).real) + float(np.vdot(c2, c2).real))


class TvhSplit(NamedTuple):
    """``w = a J upsilon + b upsilon + w_h``."""

    w_t: np.ndarray
    w_v: np.ndarray
    w_h: np.ndarray
    a: float
    b: float


def tvh_split_vectors(upsilon, w) -> TvhSplit:
    """Split ``w`` against a nonzero field value ``upsilon`` (same model space)."""
    upsilon = np.asarray(upsilon, dtype=complex)
    w = np.asarray(w, dtype=complex)
    nsq = float(np.vdot(upsilon, upsilon).real)
    if math.sqrt(nsq) < FIXED_TOL:
        raise FixedPointError("Hamiltonian field vanishes; tvh splitting undefined")
    Ju = 1j * upsilon
    a = float(np.vdot(Ju, w).real) / nsq
    b = float(np.vdot(upsilon, w).real) / nsq
    w_t = a * Ju
    w_v = b * upsilon
    return TvhSplit(w_t, w_v, w - w_t - w_v, a, b)


def tvh_decompose(cfg: ModelConfig, m, w) -> TvhSplit:
    """Transverse, vertical and horizontal parts of ``w`` at ``m``.

    ``w`` is a horizontal vector at the representative ``m``.
    """
    return tvh_split_vectors(ham_field(cfg, m), w)


def q_from_split(s1: TvhSplit, s2: TvhSplit, nsq: float) -> complex:
    # omega(b ups, a J ups) = a b |ups|^2
    twist = (s1.a * s1.b - s2.a * s2.b) * nsq
    damp = (s1.a**2 + s2.a**2) * nsq
    return psi2_complex(s1.w_h, s2.w_h) + 1j * twist - damp


def q_exponent(cfg: ModelConfig, m, w1, w2) -> complex:
    """Anisotropic exponent ``Q(w1, w2)`` at a regular point ``m``."""
    ups = ham_field(cfg, m)
    nsq = float(np.vdot(ups, ups).real)
    return q_from_split(tvh_split_vectors(ups, w1), tvh_split_vectors(ups, w2), nsq)


def q_exponent_chart(cfg: ModelConfig, chart: HLChart, v1, v2) -> complex:
    """``Q`` for real chart vectors at the chart base."""
    return q_exponent(cfg, chart.base, chart.tangent(v1), chart.tangent(v2))


def field_in_chart(cfg: ModelConfig, chart: HLChart) -> np.ndarray:
    """Hamiltonian field at the chart base as a real chart vector."""
    return chart.chart_vector(ham_field(cfg, chart.base))


def flow_differential_complex(cfg: ModelConfig, chart_x: HLChart, chart_y: HLChart,
                              tau: float) -> tuple[np.ndarray, float]:
    """Complex ``d x d`` matrix of ``d phi^M_{-tau}`` and the fiber phase.

    ``phi^X_{-tau}(gamma_x(0, v)) = gamma_y(theta_a, A v)`` holds exactly
    because the flow is linear and unitary on ``C^{d+1}``.
    """
    xt = lifted(cfg, chart_x.base, tau)
    if dist_M(xt, chart_y.base) > PERIOD_TOL:
        raise NotAPeriodError(
            f"tau={tau} does not carry the x-chart base onto the y-chart base"
        )
    pairing = np.vdot(chart_y.base, xt)
    theta = wrap_phase(float(np.angle(pairing)))
    D = np.exp(1j * cfg.a * tau)
    A = np.exp(-1j * theta) * (chart_y.frame.conj().T @ (D[:, None] * chart_x.frame))
    return A, theta


def flow_differential(cfg: ModelConfig, chart_x: HLChart, chart_y: HLChart,
                      tau: float) -> tuple[np.ndarray, float]:
    """Real ``2d x 2d`` orthogonal symplectic matrix and fiber phase in ``(-pi, pi]``.

    Raises ``NotAPeriodError`` unless ``phi^M_{-tau}(m_x) = m_y``.
    """
    A, theta = flow_differential_complex(cfg, chart_x, chart_y, tau)
    return real_form(A), theta
