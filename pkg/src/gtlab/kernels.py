"""Gutzwiller-Toeplitz kernels ``G_k``, their traces and leading asymptotics.

``G_k(x, y) = sum_beta chi_hat(kE - lambda_beta) e_beta(x) conj(e_beta(y))``
is evaluated two ways: as the finite spectral sum and as the oscillatory
integral ``int exp(-i tau k E) chi(tau) Pi_k(x_tau, y) d tau``.
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import energy, field_norm, flow_M
from .errors import AccuracyNotReached, CriticalEnergyError, FixedPointError, NotOnLocus
from .geometry import ModelConfig, dist_M, normalize
from .hardy import _spectrum, szego_constant
from .heisenberg import (
    HLChart,
    build_chart,
    flow_differential_complex,
    q_exponent,
    to_complex,
)
from .quadrature import composite_rule, csum, panels_for_rate
from .recurrence import (
    find_transfer_periods,
    fixed_components,
    level_component_integral,
    level_periods,
    meets_level,
)
from .window import Window, chi_hat_many, eval_chi

ENERGY_TOL = 1e-8
INTEGRAL_ABS_TOL = 1e-10
MAX_PANELS = 1 << 16


def _weights_for(cfg: ModelConfig, k: int, w: Window) -> tuple:
    spec = _spectrum(cfg.d, cfg.weights, k)
    lam, inv = np.unique(spec.lambdas, return_inverse=True)
    hats = chi_hat_many(w, k * cfg.energy - lam)
    return spec, hats[inv]


def gk_spectral(cfg: ModelConfig, k: int, x, y, w: Window) -> complex:
    """Finite spectral sum over the ``N_k`` normalized monomials."""
    if w.amplitude == 0.0:
        return 0j
    spec, hats = _weights_for(cfg, k, w)
    terms = hats * spec.values(x) * np.conj(spec.values(y))
    return csum(terms)


def gk_spectral_many(cfg: ModelConfig, k: int, xs, ys, w: Window) -> np.ndarray:
    """``gk_spectral`` for paired stacks of points, sharing the transform values."""
    spec, hats = _weights_for(cfg, k, w)
    out = np.empty(len(xs), dtype=complex)
    for i, (x, y) in enumerate(zip(xs, ys)):
        out[i] = csum(hats * spec.values(x) * np.conj(spec.values(y)))
    return out


def gk_integral(cfg: ModelConfig, k: int, x, y, w: Window,
                abs_tol: float = INTEGRAL_ABS_TOL) -> complex:
    """Oscillatory integral over the window support by composite Gauss-Legendre.

    The starting rule has at least ten nodes per period of the fastest
    oscillation ``k (|E| + max |a|)``; the panel count then doubles until two
    successive values agree to ``abs_tol`` (or to rounding of the summands).
    """
    if w.amplitude == 0.0:
        return 0j
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    lo, hi = w.support
    rate = k * (abs(cfg.energy) + float(np.max(np.abs(cfg.a))))
    panels = panels_for_rate(hi - lo, rate)
    const = szego_constant(cfg.d, k)
    ydag = np.conj(y)
    prev, err = None, math.inf
    while panels <= MAX_PANELS:
        tau, wts = composite_rule(lo, hi, panels)
        pair = (np.exp(1j * np.outer(tau, cfg.a)) * x) @ ydag
        f = wts * eval_chi(w, tau) * np.exp(-1j * tau * k * cfg.energy) * const * pair**k
        val = csum(f)
        if prev is not None:
            err = abs(val - prev)
            if err <= max(abs_tol, 1e-14 * float(np.abs(f).sum())):
                return val
        prev = val
        panels *= 2
    raise AccuracyNotReached(f"gk_integral at k={k} did not converge", err)


def gk_trace(cfg: ModelConfig, k: int, w: Window) -> complex:
    """``sum_beta chi_hat(kE - lambda_beta)``."""
    if w.amplitude == 0.0:
        return 0j
    spec = _spectrum(cfg.d, cfg.weights, k)
    lam, counts = np.unique(spec.lambdas, return_counts=True)
    return csum(counts * chi_hat_many(w, k * cfg.energy - lam))


def rescaled_points(chart_x: HLChart, chart_y: HLChart, theta1: float, theta2: float,
                    v1, v2, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``(x + (theta1, v1/sqrt(k)), y + (theta2, v2/sqrt(k)))`` in the two charts."""
    s = 1.0 / math.sqrt(k)
    return (chart_x.embed(theta1, np.asarray(v1, float) * s),
            chart_y.embed(theta2, np.asarray(v2, float) * s))


def orbit_distance(cfg: ModelConfig, m, n, w: Window, grid: int = 1000) -> float:
    """``dist_M(n, {phi_tau(m) : tau in supp chi})`` by grid seed and golden section."""
    lo, hi = w.support
    m = normalize(m)
    n = normalize(n)

    def dist(t):
        return dist_M(n, flow_M(cfg, m, t))

    taus = np.linspace(lo, hi, grid)
    vals = np.array([dist(t) for t in taus])
    i = int(np.argmin(vals))
    a, b = taus[max(i - 1, 0)], taus[min(i + 1, grid - 1)]
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = dist(c), dist(d)
    for _ in range(100):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = dist(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = dist(d)
    return float(min(vals[i], fc, fd))


def predicted_scaling_leading(cfg: ModelConfig, x, y, theta1: float, theta2: float,
                              v1, v2, k: int, w: Window) -> complex:
    """Leading term of ``G_k(x + (theta1, v1/sqrt k), y + (theta2, v2/sqrt k))``.

        sqrt(2)/|upsilon| (k/pi)^{d - 1/2} e^{ik(theta1 - theta2)}
            * sum_a e^{ik(theta_a - tau_a E) + Q(A_a v1, v2)} chi(tau_a)

    with ``Q`` taken at ``m_y`` in the chart of ``y``.  Raises ``NotOnLocus``
    off the energy level or when no transfer period lies in the support.
    """
    x = normalize(x)
    y = normalize(y)
    if abs(energy(cfg, x) - cfg.energy) > ENERGY_TOL:
        raise NotOnLocus(f"f(m_x) = {energy(cfg, x)} differs from E = {cfg.energy}")
    speed = field_norm(cfg, x)
    if speed < 1e-10:
        raise FixedPointError("m_x is a fixed point of the flow")
    lo, hi = w.support
    periods = [p for p in find_transfer_periods(cfg, x, y, (lo, hi)) if lo < p.tau < hi]
    if not periods:
        raise NotOnLocus("no transfer period from m_y to m_x inside the window support")
    cx, cy = build_chart(x), build_chart(y)
    c1 = to_complex(v1)
    c2 = to_complex(v2)
    total = 0j
    for p in periods:
        A, theta = flow_differential_complex(cfg, cx, cy, p.tau)
        q = q_exponent(cfg, cy.base, cy.frame @ (A @ c1), cy.frame @ c2)
        total += np.exp(1j * k * (theta - p.tau * cfg.energy) + q) * eval_chi(w, p.tau)
    pref = math.sqrt(2) / speed * (k / math.pi) ** (cfg.d - 0.5)
    return complex(pref * np.exp(1j * k * (theta1 - theta2)) * total)


def predicted_trace_leading(cfg: ModelConfig, k: int, w: Window) -> complex:
    """Leading term of ``gk_trace``:

        sum_b e^{-ik sigma_b E} sum_l (k/pi)^{d_bl - 1} e^{ik theta_bl} / D(b, l)
            * int_{level in component} 1/|upsilon| * chi(sigma_b)
    """
    if not cfg.is_regular():
        raise CriticalEnergyError(f"energy {cfg.energy} is a critical value")
    if w.amplitude == 0.0:
        return 0j
    lo, hi = w.support
    total = 0j
    for sigma in level_periods(cfg, (lo, hi)):
        chi = eval_chi(w, sigma)
        if chi == 0.0:
            continue
        inner = 0j
        for comp in fixed_components(cfg, sigma):
            if comp.d_bl == 0 or not meets_level(cfg, comp):
                continue
            inner += ((k / math.pi) ** (comp.d_bl - 1) * np.exp(1j * k * comp.theta_bl)
                      / comp.det_D * level_component_integral(cfg, comp))
        total += np.exp(-1j * k * sigma * cfg.energy) * inner * chi
    return complex(total)


def trace_terms(cfg: ModelConfig, k: int, w: Window) -> list[dict]:
    """Per-period breakdown of ``predicted_trace_leading`` for reports."""
    lo, hi = w.support
    rows = []
    for sigma in level_periods(cfg, (lo, hi)):
        for comp in fixed_components(cfg, sigma):
            rows.append({
                "sigma": sigma,
                "indices": list(comp.indices),
                "d_bl": comp.d_bl,
                "c_bl": comp.c_bl,
                "det_D_re": comp.det_D.real,
                "det_D_im": comp.det_D.imag,
                "theta_bl": comp.theta_bl,
                "level_integral": level_component_integral(cfg, comp),
                "chi": eval_chi(w, sigma),
            })
    return rows


def szego_scaling_ratio(d: int, k: int, chart: HLChart, theta1: float, theta2: float,
                        v1, v2) -> complex:
    """``(pi/k)^d Pi_k(gamma(theta1, v1/sqrt k), gamma(theta2, v2/sqrt k)) e^{-ik(theta1-theta2)}``."""
    x1, x2 = rescaled_points(chart, chart, theta1, theta2, v1, v2, k)
    # closed form, with the k-th power taken in log space to avoid overflow
    pair = np.vdot(x2, x1) * np.exp(-1j * (theta1 - theta2))
    logc = math.log(szego_constant(d, k)) + d * math.log(math.pi / k)
    return complex(np.exp(logc + k * np.log(pair)))

