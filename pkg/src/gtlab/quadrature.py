"""Composite Gauss-Legendre rules and deterministic complex summation."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

NODES_PER_PANEL = 16


@lru_cache(maxsize=None)
def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(a: float, b: float, panels: int, n: int = NODES_PER_PANEL):
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on ``[a, b]``."""
    x, w = _gl(n)
    edges = np.linspace(a, b, panels + 1)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (half * x + 0.5 * (lo + hi)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def csum(values) -> complex:
    """Correctly rounded sum of a complex array, independent of ordering."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def panels_for_rate(length: float, rate: float, nodes_per_period: int = 10,
                    n: int = NODES_PER_PANEL, minimum: int = 4) -> int:
    """Panel count giving at least ``nodes_per_period`` nodes per oscillation."""
    periods = length * abs(rate) / (2 * math.pi)
    return max(minimum, math.ceil(periods * nodes_per_period / n))
