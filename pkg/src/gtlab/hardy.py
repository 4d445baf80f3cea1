"""Level-k Hardy spaces: homogeneous polynomials of degree k on S^{2d+1}.

The monomials ``z^beta`` (``|beta| = k``) are orthogonal in ``L^2(X, dV_X)``
with ``||z^beta||^2 = pi^d beta! / (k + d)!``.  Resumming the orthonormal
basis with the multinomial theorem gives the closed-form Szego kernel

    Pi_k(x, y) = (k + d)! / (k! pi^d) * <x, y>^k.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import ModelConfig

INT64_MAX = 2**63 - 1
EXACT_FACTORIAL_MAX = 500


def hardy_dim(d: int, k: int) -> int:
    """``N_k = binomial(k + d, d)``; raises ``OverflowError`` past int64."""
    if k < 0 or d < 0:
        raise ValueError(f"need d, k >= 0, got d={d}, k={k}")
    n = math.comb(k + d, d)
    if n > INT64_MAX:
        raise OverflowError(f"dim H(X)_k = C({k + d}, {d}) exceeds int64")
    return n


@lru_cache(maxsize=None)
def _log_factorial_table(n: int) -> np.ndarray:
    # exact big-integer factorials, correctly rounded logs
    out = np.empty(n + 1)
    f = 1
    for i in range(n + 1):
        if i > 1:
            f *= i
        out[i] = math.log(f)
    return out


def log_factorial(n) -> np.ndarray:
    """``log(n!)`` elementwise: exact table up to 500, log-gamma beyond."""
    n = np.asarray(n)
    small = _log_factorial_table(EXACT_FACTORIAL_MAX)
    big = np.vectorize(lambda m: math.lgamma(m + 1.0), otypes=[float])
    if n.size and n.max() <= EXACT_FACTORIAL_MAX:
        return small[n]
    return np.where(n <= EXACT_FACTORIAL_MAX, small[np.minimum(n, EXACT_FACTORIAL_MAX)], big(n))


def multi_indices(d: int, k: int) -> np.ndarray:
    """All ``beta`` in ``N^{d+1}`` with ``|beta| = k``, shape ``(N_k, d + 1)``.

    Rows are in reverse lexicographic order, starting at ``(k, 0, ..., 0)``.
    """
    hardy_dim(d, k)
    return _multi_indices(d, k).copy()


@lru_cache(maxsize=64)
def _multi_indices(d: int, k: int) -> np.ndarray:
    if d == 0:
        return np.array([[k]], dtype=np.int64)
    blocks = []
    for b0 in range(k, -1, -1):
        rest = _multi_indices(d - 1, k - b0)
        blocks.append(np.column_stack([np.full(len(rest), b0, dtype=np.int64), rest]))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def log_norm_sq(d: int, betas) -> np.ndarray:
    """``log ||z^beta||^2_{L^2(X)} = d log(pi) + log(beta!) - log((k + d)!)``."""
    betas = np.atleast_2d(np.asarray(betas, dtype=np.int64))
    k = betas.sum(axis=1)
    return d * math.log(math.pi) + log_factorial(betas).sum(axis=1) - log_factorial(k + d)


def monomial_norm_sq(cfg: ModelConfig | int, beta) -> float:
    """``int_X |z^beta|^2 dV_X``, exact rational arithmetic for ``k <= 500``."""
    d = cfg if isinstance(cfg, int) else cfg.d
    beta = [int(b) for b in beta]
    if len(beta) != d + 1 or min(beta) < 0:
        raise ValueError(f"beta must be {d + 1} nonnegative integers, got {beta}")
    k = sum(beta)
    if k <= EXACT_FACTORIAL_MAX:
        num = math.prod(math.factorial(b) for b in beta)
        return math.pi**d * (num / math.factorial(k + d))
    return math.exp(float(log_norm_sq(d, [beta])[0]))


def szego_constant(d: int, k: int) -> float:
    """Diagonal value ``Pi_k(x, x) = (k + d)! / (k! pi^d) = N_k / Vol(X)``."""
    if k <= EXACT_FACTORIAL_MAX:
        return math.comb(k + d, d) * math.factorial(d) / math.pi**d
    return math.exp(
        math.lgamma(k + d + 1.0) - math.lgamma(k + 1.0) - d * math.log(math.pi)
    )


def szego_kernel(cfg: ModelConfig | int, k: int, x, y) -> complex | np.ndarray:
    """Closed-form equivariant Szego kernel ``Pi_k(x, y)``.

    ``x`` and ``y`` may be stacks of points (last axis of length ``d + 1``);
    the pairing broadcasts.
    """
    d = cfg if isinstance(cfg, int) else cfg.d
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    pair = np.sum(x * np.conj(y), axis=-1)
    val = szego_constant(d, k) * pair**k
    return complex(val) if np.ndim(val) == 0 else val


def monomial_values(betas, log_norms, z) -> np.ndarray:
    """Orthonormal basis values ``e_beta(z) = z^beta / ||z^beta||``.

    Evaluated in log-polar form so that large ``k`` neither overflows nor
    underflows prematurely.
    """
    betas = np.asarray(betas)
    z = np.asarray(z, dtype=complex)
    mod = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmod = np.log(mod)
        # 0 * log(0) contributes nothing; positive power of a zero entry kills the term
        terms = np.where(betas > 0, betas * logmod, 0.0)
    logabs = terms.sum(axis=1) - 0.5 * np.asarray(log_norms)
    phase = betas @ np.angle(z)
    return np.exp(logabs + 1j * phase)


@dataclass(frozen=True)
class SpectrumTable:
    """Monomial basis of ``H(X)_k`` with Toeplitz eigenvalues ``<a, beta>``."""

    d: int
    k: int
    betas: np.ndarray
    lambdas: np.ndarray
    log_norms: np.ndarray

    def __len__(self):
        return len(self.betas)

    @property
    def norm_sq(self) -> np.ndarray:
        return np.exp(self.log_norms)

    def values(self, z) -> np.ndarray:
        return monomial_values(self.betas, self.log_norms, z)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"beta_{j}" for j in range(self.d + 1)] + ["lambda", "norm_sq"])
        for beta, lam, nsq in zip(self.betas, self.lambdas, self.norm_sq):
            w.writerow([int(b) for b in beta] + [f"{lam:.17g}", f"{nsq:.17g}"])
        return buf.getvalue()


def spectrum(cfg: ModelConfig, k: int) -> SpectrumTable:
    """Spectrum of the first-order Toeplitz operator on ``H(X)_k``."""
    return _spectrum(cfg.d, cfg.weights, k)


@lru_cache(maxsize=32)
def _spectrum(d: int, weights: tuple[float, ...], k: int) -> SpectrumTable:
    betas = _multi_indices(d, k)
    lambdas = betas @ np.asarray(weights)
    log_norms = log_norm_sq(d, betas)
    lambdas.setflags(write=False)
    log_norms.setflags(write=False)
    return SpectrumTable(d, k, betas, lambdas, log_norms)


def szego_kernel_spectral(cfg: ModelConfig | int, k: int, x, y) -> complex:
    """Basis-sum ``sum_beta e_beta(x) conj(e_beta(y))``; oracle for the closed form."""
    d = cfg if isinstance(cfg, int) else cfg.d
    betas = _multi_indices(d, k)
    ln = log_norm_sq(d, betas)
    terms = monomial_values(betas, ln, x) * np.conj(monomial_values(betas, ln, y))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))
