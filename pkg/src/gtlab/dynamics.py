"""Torus Hamiltonians ``f = sum_j a_j |z_j|^2``, their flows and lifts.

Flow convention: ``phi^X_tau(z)_j = exp(-i a_j tau) z_j``.  The pull-back
``U(tau)_k s = s o phi^X_{-tau}`` then acts on ``z^beta`` by
``exp(i tau <a, beta>)``, so the first-order Toeplitz eigenvalues are
``<a, beta>`` and sit in ``[k min a, k max a]``.
"""

from __future__ import annotations

import numpy as np

from .geometry import ModelConfig, canonical, horizontal, normalize
from .hardy import _spectrum, szego_kernel
from .quadrature import csum

FIXED_TOL = 1e-10


def energy(cfg: ModelConfig, m) -> float:
    z = normalize(m)
    return float(np.dot(cfg.a, np.abs(z) ** 2))


def ham_field(cfg: ModelConfig, m) -> np.ndarray:
    """Hamiltonian vector field as a horizontal vector at the representative.

    ``J upsilon`` is the horizontal part of ``a * z``, which is the gradient
    of ``f`` for the metric ``g = Re <., .>`` up to the factor fixed by the
    symplectic form ``2 omega``.
    """
    z = normalize(m)
    return -1j * horizontal(z, cfg.a * z)


def field_norm(cfg: ModelConfig, m) -> float:
    return float(np.linalg.norm(ham_field(cfg, m)))


def is_fixed_point(cfg: ModelConfig, m) -> bool:
    return field_norm(cfg, m) < FIXED_TOL


def flow_X(cfg: ModelConfig, x, tau: float) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return np.exp(-1j * cfg.a * tau) * x


def lifted(cfg: ModelConfig, x, tau: float) -> np.ndarray:
    """``x_tau = phi^X_{-tau}(x)``, the point paired with ``y`` in ``U(tau)``."""
    return flow_X(cfg, x, -tau)


def flow_M(cfg: ModelConfig, m, tau: float) -> np.ndarray:
    """``phi^M_tau([z])``, returned in canonical form."""
    return canonical(flow_X(cfg, normalize(m), tau))


def eigenvalue(cfg: ModelConfig, beta) -> float:
    return float(np.dot(cfg.a, np.asarray(beta, dtype=float)))


def unitary_kernel(cfg: ModelConfig, k: int, tau: float, x, y) -> complex:
    """``U(tau)_k(x, y) = Pi_k(x_tau, y)``."""
    return szego_kernel(cfg, k, lifted(cfg, x, tau), y)


def unitary_kernel_spectral(cfg: ModelConfig, k: int, tau: float, x, y) -> complex:
    """``sum_beta exp(i tau lambda_beta) e_beta(x) conj(e_beta(y))``."""
    spec = _spectrum(cfg.d, cfg.weights, k)
    terms = np.exp(1j * tau * spec.lambdas) * spec.values(x) * np.conj(spec.values(y))
    return csum(terms)


def toeplitz_kernel_spectral(cfg: ModelConfig, k: int, x, y) -> complex:
    """Kernel of the first-order Toeplitz operator, ``sum lambda e(x) conj(e(y))``."""
    spec = _spectrum(cfg.d, cfg.weights, k)
    return csum(spec.lambdas * spec.values(x) * np.conj(spec.values(y)))
