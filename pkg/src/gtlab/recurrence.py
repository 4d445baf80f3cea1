"""Periods of the torus flow, fixed-point components and level integrals.

For ``f = sum a_j |z_j|^2`` everything is explicit.  ``phi^M_tau([n]) = [m]``
forces ``|n_j| = |m_j|`` and ``exp(i (a_q - a_p) tau)`` to match a fixed
phase ratio for every pair of supporting indices, so transfer periods lie on
an arithmetic progression.  The fixed set of ``phi^M_sigma`` is the disjoint
union of the projective subspaces spanned by the classes of indices with
equal ``exp(-i sigma a_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.interpolate import BSpline

from .dynamics import field_norm, flow_M, ham_field, is_fixed_point, lifted
from .errors import CriticalEnergyError, FixedPointAmbiguity, GtlabError
from .geometry import ModelConfig, dist_M, horizontal, normalize, same_point, volume_M
from .heisenberg import wrap_phase
from .quadrature import composite_rule

PERIOD_TOL = 1e-8
CLASS_TOL = 1e-10
DEDUP_TOL = 1e-9
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class TransferPeriod:
    """``phi^M_tau(n) = m`` with ``x_tau = e^{i theta} y`` for the given lifts."""

    tau: float
    theta: float


@dataclass(frozen=True)
class FixedComponent:
    """Projective subspace spanned by ``indices``, fixed by ``phi^M_sigma``."""

    sigma: float
    indices: tuple[int, ...]
    d_bl: int
    c_bl: int
    det_D: complex
    theta_bl: float


def _window_lattice(offset: float, spacing: float, lo: float, hi: float) -> list[float]:
    """Points ``offset + n * spacing`` in ``[lo, hi]``."""
    n0 = math.ceil((lo - offset) / spacing - 1e-12)
    n1 = math.floor((hi - offset) / spacing + 1e-12)
    return [offset + n * spacing for n in range(n0, n1 + 1)]


def find_transfer_periods(cfg: ModelConfig, m, n, window) -> list[TransferPeriod]:
    """All ``tau`` in ``window`` with ``phi^M_tau(n) = m``, ascending.

    ``m`` and ``n`` double as the lifts ``x`` and ``y`` used for the fiber
    phase ``theta``.  Raises ``FixedPointAmbiguity`` when ``m = n`` is a
    fixed point, because then every real ``tau`` is a period.
    """
    lo, hi = (float(t) for t in window)
    x = normalize(m)
    y = normalize(n)
    if is_fixed_point(cfg, x):
        if same_point(x, y):
            raise FixedPointAmbiguity("fixed point: every tau is a period")
        return []
    if np.max(np.abs(np.abs(x) - np.abs(y))) > 1e-9:
        return []  # moduli are flow invariants
    supp = np.flatnonzero(np.abs(x) > SUPPORT_TOL)
    a = cfg.a
    p = supp[0]
    q = supp[np.argmax(np.abs(a[supp] - a[p]))]
    gap = a[q] - a[p]
    # exp(i gap tau) = (n_q / m_q) / (n_p / m_p)
    ratio = (y[q] / x[q]) / (y[p] / x[p])
    base = float(np.angle(ratio)) / gap
    spacing = 2 * math.pi / abs(gap)
    out = []
    for tau in _window_lattice(base, spacing, lo, hi):
        if dist_M(flow_M(cfg, y, tau), x) <= PERIOD_TOL:
            xt = lifted(cfg, x, tau)
            theta = wrap_phase(float(np.angle(np.vdot(y, xt))))
            out.append(TransferPeriod(float(tau), theta))
    _check_progression([t.tau for t in out])
    return out


def _check_progression(taus):
    if len(taus) < 3:
        return
    steps = np.diff(taus)
    if np.max(np.abs(steps - steps[0])) > 1e-8 * max(1.0, abs(steps[0])):
        raise GtlabError(f"period list is not a coset of a lattice: {taus}")


def scan_transfer_periods(cfg: ModelConfig, m, n, window, step: float = 1e-3) -> list[float]:
    """Brute-force periods: grid scan of ``dist_M^2`` plus Newton refinement.

    Independent of the lattice construction in ``find_transfer_periods``.
    """
    lo, hi = (float(t) for t in window)
    x = normalize(m)
    y = normalize(n)
    a = cfg.a

    def overlap(tau):
        # 1 - |<phi_tau n, m>|^2 = sin^2 dist, smooth in tau
        c = np.vdot(x, np.exp(-1j * a * tau) * y)
        return 1.0 - abs(c) ** 2

    grid = np.arange(lo, hi + step, step)
    vals = np.array([overlap(t) for t in grid])
    roots = []
    for i in range(1, len(grid) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < 1e-4:
            t = grid[i]
            for _ in range(50):
                hstep = 1e-5
                d1 = (overlap(t + hstep) - overlap(t - hstep)) / (2 * hstep)
                d2 = (overlap(t + hstep) - 2 * overlap(t) + overlap(t - hstep)) / hstep**2
                if d2 <= 0:
                    break
                dt = d1 / d2
                t -= dt
                if abs(dt) < 1e-13:
                    break
            if lo <= t <= hi and math.sqrt(max(overlap(t), 0.0)) <= 1e-7:
                if not roots or abs(t - roots[-1]) > 1e-6:
                    roots.append(float(t))
    return roots


def level_periods(cfg: ModelConfig, window) -> list[float]:
    """All ``sigma`` in ``window`` fixing some point of the level set ``f = E``.

    A class of indices meets the level iff it contains weights on both sides
    of ``E``, so the answer is the union over straddling pairs ``a_j < E <
    a_j'`` of the lattices ``(2 pi / (a_j' - a_j)) Z``.
    """
    if not cfg.is_regular():
        raise CriticalEnergyError(f"energy {cfg.energy} is a critical value")
    lo, hi = (float(t) for t in window)
    E = cfg.energy
    below = [a for a in cfg.weights if a < E]
    above = [a for a in cfg.weights if a > E]
    found = []
    for g in sorted({b - a for a in below for b in above}):
        found.extend(_window_lattice(0.0, 2 * math.pi / g, lo, hi))
    found.sort()
    out = []
    for s in found:
        if not out or s - out[-1] > DEDUP_TOL:
            out.append(0.0 if abs(s) < DEDUP_TOL else s)
    return out


def _max_return_overlap(cfg: ModelConfig, sigma: float) -> float:
    # max over the level polytope of |sum r_j exp(-i sigma a_j)|; attained at a
    # vertex, and vertices are supported on straddling pairs
    E = cfg.energy
    best = 0.0
    for i, j in combinations(range(cfg.d + 1), 2):
        ai, aj = cfg.weights[i], cfg.weights[j]
        if (ai - E) * (aj - E) >= 0:
            continue
        r = (E - ai) / (aj - ai)
        val = abs((1 - r) * np.exp(-1j * sigma * ai) + r * np.exp(-1j * sigma * aj))
        best = max(best, val)
    return best


def scan_level_periods(cfg: ModelConfig, window, step: float = 1e-3,
                       samples: int = 64, seed: int = 0) -> list[float]:
    """Grid-scan oracle: minima of ``1 - max_p |<phi_sigma p, p>|`` over level points.

    Level points are random moduli on the level polytope (the overlap does
    not depend on the phases), so the oracle does not assume the pairwise
    lattice structure.
    """
    lo, hi = (float(t) for t in window)
    rng = np.random.default_rng(seed)
    a = cfg.a
    E = cfg.energy
    verts = []
    for i, j in combinations(range(cfg.d + 1), 2):
        if (a[i] - E) * (a[j] - E) < 0:
            v = np.zeros(cfg.d + 1)
            r = (E - a[i]) / (a[j] - a[i])
            v[i], v[j] = 1 - r, r
            verts.append(v)
    verts = np.array(verts)
    mix = rng.dirichlet(np.full(len(verts), 0.3), size=samples)
    pts = np.vstack([verts, mix @ verts])

    def gap(s):
        return 1.0 - float(np.max(np.abs(pts @ np.exp(-1j * s * a))))

    grid = np.arange(lo, hi + step, step)
    vals = np.array([gap(s) for s in grid])
    out = []
    for i in range(1, len(grid) - 1):
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < 1e-3:
            left, right = grid[i - 1], grid[i + 1]
            for _ in range(80):
                m1 = left + (right - left) * 0.382
                m2 = left + (right - left) * 0.618
                if gap(m1) < gap(m2):
                    right = m2
                else:
                    left = m1
            s = 0.5 * (left + right)
            if gap(s) < 1e-10 and (not out or s - out[-1] > 1e-6):
                out.append(float(s))
    return out


def _classes(cfg: ModelConfig, sigma: float) -> list[tuple[int, ...]]:
    ph = np.exp(-1j * sigma * cfg.a)
    cells: list[list[int]] = []
    for j in range(cfg.d + 1):
        for cell in cells:
            if abs(ph[j] - ph[cell[0]]) <= CLASS_TOL:
                cell.append(j)
                break
        else:
            cells.append([j])
    return [tuple(c) for c in cells]


def fixed_components(cfg: ModelConfig, sigma: float) -> list[FixedComponent]:
    """Connected components of the fixed set of ``phi^M_sigma``.

    ``det_D = prod_{j not in cell} (1 - exp(i sigma (a_j - a_c)))`` is the
    holomorphic determinant of ``id - d phi^M_{-sigma}`` on the normal
    bundle; in the affine chart ``z_c = 1`` the flow is diagonal, so the
    value is the same at every point of the component.
    """
    a = cfg.a
    out = []
    for cell in _classes(cfg, sigma):
        c = cell[0]
        det = complex(1.0)
        for j in range(cfg.d + 1):
            if j not in cell:
                det *= 1.0 - np.exp(1j * sigma * (a[j] - a[c]))
        theta = wrap_phase(sigma * a[c])
        out.append(FixedComponent(float(sigma), cell, len(cell) - 1,
                                  cfg.d - len(cell) + 1, complex(det), theta))
    return out


def component_point(cfg: ModelConfig, comp: FixedComponent, seed: int = 0) -> np.ndarray:
    """A random unit point of the component (zero off its index set)."""
    rng = np.random.default_rng(seed)
    z = np.zeros(cfg.d + 1, dtype=complex)
    idx = list(comp.indices)
    z[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    return normalize(z)


def normal_jacobian_det(cfg: ModelConfig, comp: FixedComponent, z, h: float = 1e-6) -> complex:
    """``det(id - d phi^M_{-sigma})`` on the normal directions, by finite differences.

    Works in the affine chart where the largest cell coordinate of ``z`` is 1.
    """
    z = normalize(z)
    cell = list(comp.indices)
    c = cell[int(np.argmax(np.abs(z[cell])))]
    others = [j for j in range(cfg.d + 1) if j != c]
    normal = [j for j in others if j not in comp.indices]
    w0 = z[others] / z[c]

    def affine_map(w):
        full = np.empty(cfg.d + 1, dtype=complex)
        full[c] = 1.0
        full[others] = w
        img = np.exp(1j * cfg.a * comp.sigma) * full  # phi^X_{-sigma}
        return img[others] / img[c]

    pos = [others.index(j) for j in normal]
    jac = np.empty((len(pos), len(pos)), dtype=complex)
    for col, p in enumerate(pos):
        e = np.zeros(len(others), dtype=complex)
        e[p] = h
        diff = (affine_map(w0 + e) - affine_map(w0 - e)) / (2 * h)
        jac[:, col] = diff[pos]
    return complex(np.linalg.det(np.eye(len(pos)) - jac))


def meets_level(cfg: ModelConfig, comp: FixedComponent) -> bool:
    w = [cfg.weights[j] for j in comp.indices]
    return min(w) < cfg.energy < max(w)


def level_component_integral(cfg: ModelConfig, comp: FixedComponent) -> float:
    """``int 1/|upsilon_f| dV`` over the level set inside the component.

    Equals ``2 Vol(CP^{d_bl}) M(E)`` with ``M`` the normalized B-spline
    density on the component's weights (push-forward of the normalized
    volume under the torus moment map).  Returns 0 without intersection.
    """
    if not meets_level(cfg, comp):
        return 0.0
    knots = sorted(cfg.weights[j] for j in comp.indices)
    return 2.0 * volume_M(comp.d_bl) * _spline_density(tuple(knots), cfg.energy)


@lru_cache(maxsize=256)
def _spline_density(knots: tuple[float, ...], E: float) -> float:
    n = len(knots) - 1
    if n == 1:
        return 1.0 / (knots[1] - knots[0])
    b = BSpline.basis_element(np.asarray(knots), extrapolate=False)
    return float(n / (knots[-1] - knots[0]) * b(E))


def _level_polytope_vertices(a, E):
    verts = []
    for i, j in combinations(range(len(a)), 2):
        if (a[i] - E) * (a[j] - E) < 0:
            v = np.zeros(len(a))
            r = (E - a[i]) / (a[j] - a[i])
            v[i], v[j] = 1 - r, r
            verts.append(v)
    return verts


def level_integral_quadrature(cfg: ModelConfig, comp: FixedComponent, nodes: int = 400) -> float:
    """Quadrature oracle for ``level_component_integral`` (components of dimension <= 2).

    Parametrizes the level set by moduli on the level polytope and one phase
    per index, and integrates ``1/|upsilon|`` against the Gram determinant
    of the induced metric.  The integrand is phase independent, so the phase
    directions contribute ``(2 pi)^{d_bl}``.
    """
    if not meets_level(cfg, comp):
        return 0.0
    idx = list(comp.indices)
    a = np.array([cfg.weights[j] for j in idx])
    verts = _level_polytope_vertices(a, cfg.energy)
    if comp.d_bl == 1:
        params = [(verts[0], None)]
        weights = [1.0]
    elif comp.d_bl == 2:
        if len(verts) != 2:
            raise NotImplementedError("level polytope with more than two vertices")
        # r = V0 + (V1 - V0) sin^2(u), u in (0, pi/2): tames the 1/sqrt(r) edges
        u, wu = composite_rule(0.0, math.pi / 2, nodes // 16)
        s = np.sin(u) ** 2
        ds = 2 * np.sin(u) * np.cos(u)
        params = [(verts[0] + si * (verts[1] - verts[0]), verts[1] - verts[0]) for si in s]
        weights = list(wu * ds)
    else:
        raise NotImplementedError("oracle covers components of dimension 1 and 2")

    total = 0.0
    for (r, dr), wt in zip(params, weights):
        root = np.sqrt(r)
        z = np.zeros(cfg.d + 1, dtype=complex)
        z[idx] = root
        vecs = []
        for p in range(1, len(idx)):  # phase directions (the first phase is the fiber)
            t = np.zeros(cfg.d + 1, dtype=complex)
            t[idx[p]] = 1j * root[p]
            vecs.append(horizontal(z, t))
        if dr is not None:
            t = np.zeros(cfg.d + 1, dtype=complex)
            with np.errstate(divide="ignore", invalid="ignore"):
                t[idx] = np.where(root > 0, dr / (2 * np.where(root > 0, root, 1.0)), 0.0)
            vecs.append(horizontal(z, t))
        V = np.array(vecs)
        G = (V.conj() @ V.T).real
        dens = math.sqrt(max(np.linalg.det(G), 0.0))
        total += wt * dens / field_norm(cfg, z)
    return (2 * math.pi) ** (len(idx) - 1) * total


def transversality_rank(cfg: ModelConfig, comp: FixedComponent, z) -> int:
    """Real rank of ``[J upsilon | normal directions]`` at a level point of the component."""
    z = normalize(z)
    ups = ham_field(cfg, z)
    cols = [1j * ups]
    for j in range(cfg.d + 1):
        if j not in comp.indices:
            for ph in (1.0, 1j):
                e = np.zeros(cfg.d + 1, dtype=complex)
                e[j] = ph
                cols.append(horizontal(z, e))
    M = np.array([np.concatenate([c.real, c.imag]) for c in cols])
    return int(np.linalg.matrix_rank(M, tol=1e-8))
