"""The quadratic phase of a single transfer period and its stationary point.

With ``u`` the Hamiltonian field at ``m_y`` in chart coordinates,

    Upsilon(tau) = tau omega(u, A v1 + v2)
                   + (i/2) (tau^2 |u|^2 - 2 tau g(u, A v1 - v2)),
    Upsilon~(tau) = -i psi_2(A v1, v2) + Upsilon(tau).

``Upsilon`` has the single critical point
``tau_c = (g(u, A v1 - v2) + i omega(u, A v1 + v2)) / |u|^2`` where the second
derivative is ``i |u|^2``, and ``i Upsilon~(tau_c) = Q(A v1, v2)``.  Feeding
chart vectors ``v / sqrt(k)`` makes ``k i Upsilon~(tau_c)`` the level-free
exponent ``Q(A v1, v2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyNotReached, FixedPointError
from .geometry import ModelConfig
from .heisenberg import (
    HLChart,
    complex_structure,
    field_in_chart,
    psi2,
    q_exponent_chart,
    to_complex,
    to_real,
)
from .quadrature import composite_rule, csum, panels_for_rate
from .window import Window, eval_chi

MAX_PANELS = 1 << 16


def _as_complex_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if np.iscomplexobj(A):
        return A.astype(complex)
    return A[0::2, 0::2] + 1j * A[1::2, 0::2]


@dataclass
class QuadraticPhase:
    """Phase data at ``m_y``: chart, chart vectors ``v1, v2`` and flow differential ``A``."""

    cfg: ModelConfig
    chart: HLChart
    v1: np.ndarray
    v2: np.ndarray
    A: np.ndarray | None = None
    tau_a: float = 0.0
    u: np.ndarray = field(init=False)

    def __post_init__(self):
        d = self.chart.d
        self.v1 = np.asarray(self.v1, dtype=float)
        self.v2 = np.asarray(self.v2, dtype=float)
        self.A = np.eye(d, dtype=complex) if self.A is None else _as_complex_matrix(self.A)
        self.u = field_in_chart(self.cfg, self.chart)
        if np.linalg.norm(self.u) < 1e-10:
            raise FixedPointError("Hamiltonian field vanishes at the chart base")

    @property
    def Av1(self) -> np.ndarray:
        return to_real(self.A @ to_complex(self.v1))

    @property
    def speed_sq(self) -> float:
        return float(self.u @ self.u)

    def _g(self, w) -> float:
        return float(self.u @ w)

    def _omega(self, w) -> float:
        # omega(u, w) = g(J u, w)
        J = complex_structure(self.chart.d)
        return float((J @ self.u) @ w)

    def pairings(self) -> tuple[float, float]:
        """``(g(u, A v1 - v2), omega(u, A v1 + v2))``."""
        Av1 = self.Av1
        return self._g(Av1 - self.v2), self._omega(Av1 + self.v2)


def upsilon(p: QuadraticPhase, tau):
    g_, w_ = p.pairings()
    tau = np.asarray(tau, dtype=complex)
    return tau * w_ + 0.5j * (tau**2 * p.speed_sq - 2 * tau * g_)


def upsilon_tilde(p: QuadraticPhase, tau):
    return -1j * psi2(p.Av1, p.v2) + upsilon(p, tau)


def tau_critical(p: QuadraticPhase) -> tuple[complex, complex]:
    """Critical point of ``Upsilon`` and the second derivative there."""
    g_, w_ = p.pairings()
    nsq = p.speed_sq
    return complex(g_, w_) / nsq, 1j * nsq


def phase_critical_value(p: QuadraticPhase) -> complex:
    """``i Upsilon~(tau_c)`` from the g/omega pairings alone."""
    g_, w_ = p.pairings()
    nsq = p.speed_sq
    ups_c = -0.5j / nsq * (g_ * g_ - w_ * w_ + 2j * g_ * w_)
    return psi2(p.Av1, p.v2) + 1j * ups_c


def q_at_critical(p: QuadraticPhase) -> complex:
    """``Q(A v1, v2)`` through the tvh splitting, for comparison."""
    return q_exponent_chart(p.cfg, p.chart, p.Av1, p.v2)


def model_integral(p: QuadraticPhase, k: int, amplitude: Window,
                   rel_tol: float = 1e-12) -> complex:
    """``int exp(ik Upsilon~(tau)) chi(tau + tau_a) d tau`` by adaptive Gauss-Legendre."""
    if amplitude.amplitude == 0.0:
        return 0j
    lo, hi = amplitude.support
    lo -= p.tau_a
    hi -= p.tau_a
    g_, w_ = p.pairings()
    span = max(abs(lo), abs(hi))
    rate = k * (abs(w_) + abs(g_) + p.speed_sq * span) + 1.0
    panels = panels_for_rate(hi - lo, rate, minimum=16)
    # the Gaussian envelope has width 1/(|u| sqrt k); resolve it too
    panels = max(panels, math.ceil((hi - lo) * math.sqrt(p.speed_sq * k) / 2))
    base = k * psi2(p.Av1, p.v2)  # k * i * (-i psi_2)
    prev, err = None, math.inf
    while panels <= MAX_PANELS:
        t, wts = composite_rule(lo, hi, panels)
        f = wts * eval_chi(amplitude, t + p.tau_a) * np.exp(base + 1j * k * upsilon(p, t))
        val = csum(f)
        if prev is not None:
            err = abs(val - prev)
            if err <= rel_tol * float(np.abs(f).sum()):
                return val
        prev = val
        panels *= 2
    raise AccuracyNotReached(f"model integral at k={k} did not converge", err)


def stationary_phase_prediction(p: QuadraticPhase, k: int, amplitude: Window) -> complex:
    """``exp(k i Upsilon~(tau_c)) sqrt(2 pi / k) / |u| chi(tau_a)``."""
    return complex(np.exp(k * phase_critical_value(p)) * math.sqrt(2 * math.pi / k)
                   / math.sqrt(p.speed_sq) * eval_chi(amplitude, p.tau_a))
