"""Convergence studies: rapid decrease, scaling asymptotics and trace asymptotics.

Each driver evaluates exact kernels on a grid of levels ``k``, compares
against a prediction (or against zero), and fits a log-log slope.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dynamics import energy, ham_field
from .errors import ConfigError
from .geometry import ModelConfig, exp_map, normalize
from .heisenberg import build_chart
from .kernels import (
    gk_spectral,
    gk_trace,
    orbit_distance,
    predicted_scaling_leading,
    predicted_trace_leading,
    rescaled_points,
)
from .window import Window

DEFAULT_K_GRID = (32, 45, 64, 91, 128, 181, 256, 362, 512)
D2_K_CAP = 256
DECAY_SLOPE = -6.0
SCALING_SLOPE = -0.4
TRACE_SLOPE = -0.7
TRACE_ABS_TOL = 1e-6
TINY = 1e-300


@dataclass
class StudyReport:
    study_id: str
    k_grid: list[int]
    values: list[dict]
    fitted_slope: float
    slope_stderr: float
    passed: bool
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "study_id": self.study_id,
            "k_grid": list(self.k_grid),
            "values": self.values,
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "pass": self.passed,
            "metadata": self.metadata,
        }


def default_k_grid(d: int) -> list[int]:
    cap = D2_K_CAP if d >= 2 else max(DEFAULT_K_GRID)
    return [k for k in DEFAULT_K_GRID if k <= cap]


def check_k_grid(k_grid) -> list[int]:
    ks = [int(k) for k in k_grid]
    if len(ks) < 4:
        raise ConfigError(f"k_grid needs at least 4 levels, got {ks}")
    if any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
        raise ConfigError(f"k_grid must be positive and strictly increasing, got {ks}")
    return ks


def fit_loglog_slope(ks, errs) -> tuple[float, float]:
    """Weighted least-squares slope of ``log err`` against ``log k``.

    The half of the grid with the largest ``k`` gets weight 2, the rest
    weight 1; returns ``(slope, standard error)``.
    """
    x = np.log(np.asarray(ks, dtype=float))
    y = np.log(np.maximum(np.asarray(errs, dtype=float), TINY))
    n = len(x)
    w = np.ones(n)
    w[n // 2:] = 2.0
    X = np.column_stack([np.ones(n), x])
    W = np.diag(w)
    cov = np.linalg.inv(X.T @ W @ X)
    beta = cov @ X.T @ W @ y
    resid = y - X @ beta
    dof = max(n - 2, 1)
    sigma2 = float(resid @ W @ resid) / dof
    stderr = math.sqrt(max(sigma2 * cov[1, 1], 0.0))
    return float(beta[1]), stderr


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def level_point(cfg: ModelConfig, target: float | None = None) -> np.ndarray:
    """Deterministic point with ``f = target`` (default ``E``) on a coordinate line."""
    E = cfg.energy if target is None else target
    a = cfg.weights
    for i in range(cfg.d + 1):
        for j in range(cfg.d + 1):
            if a[i] < E < a[j]:
                r = (E - a[i]) / (a[j] - a[i])
                z = np.zeros(cfg.d + 1, dtype=complex)
                z[i], z[j] = math.sqrt(1 - r), math.sqrt(r)
                return z
    raise ConfigError(f"no point of the model has f = {E}")


def _point(spec) -> np.ndarray:
    return normalize(np.array([complex(re, im) for re, im in spec]))


def scenario_points(cfg: ModelConfig, w: Window, scenario: dict) -> tuple[np.ndarray, np.ndarray, dict]:
    """Resolve a decay scenario to ``(x, y, diagnostics)``.

    ``off_orbit`` moves geodesically from a level point along ``J upsilon``
    by ``offset``; ``off_energy`` takes ``x = y`` with ``f = E + offset``;
    ``on_locus`` is the control ``x = y`` on the level; ``points`` reads
    explicit coordinates.
    """
    kind = scenario.get("kind", "off_orbit")
    offset = float(scenario.get("offset", 0.4 if kind == "off_orbit" else 0.3))
    if kind == "off_orbit":
        x = level_point(cfg)
        n = ham_field(cfg, x)
        y = exp_map(x, offset * 1j * n / np.linalg.norm(n))
    elif kind == "off_energy":
        x = level_point(cfg, cfg.energy + offset)
        y = x
    elif kind == "on_locus":
        x = level_point(cfg)
        y = x
    elif kind == "points":
        x, y = _point(scenario["x"]), _point(scenario["y"])
    else:
        raise ConfigError(f"unknown decay scenario {kind!r}")
    margin = max(orbit_distance(cfg, x, y, w), abs(energy(cfg, x) - cfg.energy))
    return x, y, {"kind": kind, "margin": margin,
                  "f_x": energy(cfg, x), "orbit_distance": orbit_distance(cfg, x, y, w)}


def run_rapid_decrease(cfg: ModelConfig, w: Window, scenario: dict, k_grid,
                       workers: int = 1) -> StudyReport:
    """``|G_k(x, y)|`` off the recurrence locus; passes when the slope is <= -6."""
    ks = check_k_grid(k_grid)
    x, y, diag = scenario_points(cfg, w, scenario)

    def one(k):
        g = gk_spectral(cfg, k, x, y, w)
        return {"k": k, "re": g.real, "im": g.imag, "abs": abs(g)}

    rows = _map(one, ks, workers)
    slope, se = fit_loglog_slope(ks, [r["abs"] for r in rows])
    return StudyReport(f"decay-{diag['kind']}", ks, rows, slope, se, slope <= DECAY_SLOPE,
                       {"scenario": diag, "threshold": DECAY_SLOPE})


def random_displacements(d: int, count: int, radius: float, seed: int) -> list[tuple]:
    """``count`` pairs of chart vectors, each of norm at most ``radius``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        pair = []
        for _ in range(2):
            v = rng.normal(size=2 * d)
            v *= radius * rng.uniform() ** (1 / (2 * d)) / np.linalg.norm(v)
            pair.append(v)
        out.append(tuple(pair))
    return out


def run_scaling_study(cfg: ModelConfig, w: Window, x, y, displacements, k_grid,
                      theta1: float = 0.0, theta2: float = 0.0,
                      workers: int = 1) -> StudyReport:
    """Relative error of ``G_k`` at rescaled arguments against the leading term.

    The recorded error per level is the maximum over displacement pairs;
    passes when its slope is <= -0.4.
    """
    ks = check_k_grid(k_grid)
    x = normalize(x)
    y = normalize(y)
    cx, cy = build_chart(x), build_chart(y)
    disps = [(np.asarray(a, float), np.asarray(b, float)) for a, b in displacements]

    def one(k):
        worst = None
        for v1, v2 in disps:
            p1, p2 = rescaled_points(cx, cy, theta1, theta2, v1, v2, k)
            g = gk_spectral(cfg, k, p1, p2, w)
            pred = predicted_scaling_leading(cfg, x, y, theta1, theta2, v1, v2, k, w)
            err = abs(g / pred - 1.0)
            if worst is None or err > worst["rel_err"]:
                worst = {"k": k, "re": g.real, "im": g.imag, "abs": abs(g),
                         "predicted_re": pred.real, "predicted_im": pred.imag, "rel_err": err}
        return worst

    rows = _map(one, ks, workers)
    slope, se = fit_loglog_slope(ks, [r["rel_err"] for r in rows])
    return StudyReport("scaling", ks, rows, slope, se, slope <= SCALING_SLOPE,
                       {"threshold": SCALING_SLOPE, "displacements": len(disps)})


def run_trace_study(cfg: ModelConfig, w: Window, k_grid, workers: int = 1) -> StudyReport:
    """``gk_trace`` against the leading trace formula.

    For ``d = 1`` the formula is exact up to a superpolynomially small tail,
    so the gate is an absolute error <= 1e-6 at the largest level; for
    ``d >= 2`` the relative error slope must be <= -0.7.
    """
    ks = check_k_grid(k_grid)

    def one(k):
        t = gk_trace(cfg, k, w)
        p = predicted_trace_leading(cfg, k, w)
        return {"k": k, "re": t.real, "im": t.imag, "abs": abs(t),
                "predicted_re": p.real, "predicted_im": p.imag,
                "abs_err": abs(t - p), "rel_err": abs(t - p) / abs(p) if p != 0 else math.inf}

    rows = _map(one, ks, workers)
    slope, se = fit_loglog_slope(ks, [r["rel_err"] for r in rows])
    if cfg.d == 1:
        passed = rows[-1]["abs_err"] <= TRACE_ABS_TOL
        gate = {"abs_err_at_max_k": TRACE_ABS_TOL}
    else:
        passed = slope <= TRACE_SLOPE
        gate = {"slope": TRACE_SLOPE}
    return StudyReport("trace", ks, rows, slope, se, passed, {"threshold": gate})
