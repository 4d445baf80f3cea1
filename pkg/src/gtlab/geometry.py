"""Fubini-Study geometry of CP^d and the Hopf circle bundle S^{2d+1} -> CP^d.

Points of ``X = S^{2d+1}`` and of ``M = CP^d`` are plain complex numpy arrays
of length ``d + 1``.  A point of ``M`` is stored as a unit representative;
tangent vectors at ``[z]`` are modelled horizontally, as vectors ``w`` of
``C^{d+1}`` with ``<w, z> = 0``.

The metric is normalized so that ``Vol(CP^1) = pi`` (curvature form of
``O(1)`` times ``i/2``).  On horizontal vectors this is simply

    g(v, w) = Re <v, w>,   omega(v, w) = -Im <v, w>,   J v = i v,

with ``<v, w> = sum_j v_j conj(w_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, CriticalEnergyError

UNIT_TOL = 1e-12
POINT_TOL = 1e-10


@dataclass(frozen=True)
class ModelConfig:
    """CP^d with torus Hamiltonian ``f = sum_j a_j |z_j|^2`` and energy ``E``."""

    d: int
    weights: tuple[float, ...]
    energy: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(a) for a in self.weights))
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"d must be a positive integer, got {self.d!r}")
        if len(self.weights) != self.d + 1:
            raise ConfigError(
                f"expected {self.d + 1} weights for d={self.d}, got {len(self.weights)}"
            )
        if len(set(self.weights)) < 2:
            raise ConfigError("at least two distinct weights are required")
        if not self.is_regular():
            raise CriticalEnergyError(
                f"energy {self.energy} is a critical value (weights {self.weights})"
            )
        lo, hi = min(self.weights), max(self.weights)
        if not lo < self.energy < hi:
            raise ConfigError(f"energy {self.energy} must lie strictly in ({lo}, {hi})")

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def is_regular(self, tol: float = 1e-12) -> bool:
        """True when ``E`` avoids every critical value (the weights)."""
        return all(abs(self.energy - a) > tol for a in self.weights)


def herm(z, w) -> complex:
    """Hermitian pairing ``<z, w> = sum z_j conj(w_j)`` (linear in ``z``)."""
    return complex(np.vdot(w, z))


def normalize(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    n = np.linalg.norm(z)
    if n == 0:
        raise ValueError("zero vector has no projective class")
    return z / n


def canonical(z) -> np.ndarray:
    """Unit representative whose first nonzero entry is real positive."""
    z = normalize(z)
    nz = np.flatnonzero(np.abs(z) > POINT_TOL)
    lead = z[nz[0]]
    return z * (abs(lead) / lead)


def is_unit(z, tol: float = UNIT_TOL) -> bool:
    return abs(np.linalg.norm(z) - 1.0) <= tol


def same_point(z, w, tol: float = POINT_TOL) -> bool:
    """Projective equality ``[z] = [w]`` for unit representatives."""
    return dist_M(z, w) <= tol


def basis_point(d: int, j: int) -> np.ndarray:
    e = np.zeros(d + 1, dtype=complex)
    e[j] = 1.0
    return e


def horizontal(z, w) -> np.ndarray:
    """Project ``w`` onto the complex orthocomplement of the unit vector ``z``."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return w - np.vdot(z, w) * z


def dist_M(m, n) -> float:
    """Fubini-Study distance ``arccos |<m, n>|`` between points of CP^d.

    Evaluated as ``atan2(|n_perp|, |<n, m>|)``, which keeps full relative
    accuracy for nearby points where ``arccos`` would not.
    """
    m = normalize(m)
    n = normalize(n)
    c = np.vdot(m, n)
    s = np.linalg.norm(n - c * m)
    return float(math.atan2(s, abs(c)))


def dist_X(x, y) -> float:
    """Round-sphere geodesic distance on S^{2d+1}."""
    c = float(np.real(np.vdot(x, y)))
    s = float(np.linalg.norm(np.asarray(y) - c * np.asarray(x)))
    return math.atan2(s, c)


def g_metric(v, w) -> float:
    return float(np.real(np.vdot(w, v)))


def omega_form(v, w) -> float:
    return float(-np.imag(np.vdot(w, v)))


def J_map(v) -> np.ndarray:
    return 1j * np.asarray(v, dtype=complex)


class TangentStructure(NamedTuple):
    g: Callable
    omega: Callable
    J: Callable


def metric_tensors(m) -> TangentStructure:
    """Riemannian metric, Kahler form and complex structure at ``[m]``.

    Arguments passed to the returned maps are first projected to the
    horizontal space at ``m``, so any representative of a tangent vector
    may be used.
    """
    m = normalize(m)

    def g(v, w):
        return g_metric(horizontal(m, v), horizontal(m, w))

    def omega(v, w):
        return omega_form(horizontal(m, v), horizontal(m, w))

    def J(v):
        return J_map(horizontal(m, v))

    return TangentStructure(g, omega, J)


def exp_map(m, v) -> np.ndarray:
    """Riemannian exponential of the horizontal vector ``v`` at ``[m]``."""
    m = normalize(m)
    v = horizontal(m, v)
    r = np.linalg.norm(v)
    if r == 0:
        return m.copy()
    return math.cos(r) * m + math.sin(r) * v / r


def volumes(cfg: ModelConfig) -> tuple[float, float]:
    """``(Vol(M), Vol(X))``; the fiber factor ``alpha / 2 pi`` integrates to 1."""
    vol = math.pi**cfg.d / math.factorial(cfg.d)
    return vol, vol


def volume_M(d: int) -> float:
    return math.pi**d / math.factorial(d)
