"""Adaptive integration of pullback densities over open simplices and prisms.

The base rule is a positive-weight tensor cubature on the simplex, built by
collapsing the simplex onto a cube and absorbing the collapse Jacobian into
Gauss-Jacobi weights (computed from exact rational moments).  Four points per
axis give exactness at total degree 7; the embedded three-point variant
(degree 5) provides the per-cell error estimate.  All rule nodes are strictly
interior, so evaluators are never queried on the boundary where pullbacks of
maps that are merely C^1 on open faces may blow up.

Cells are refined by longest-edge bisection driven by a priority queue, with
a refinement bonus for cells touching the boundary.  Absolute-value sums are
tracked across refinement depths; sustained growth is reported as divergence.
That verdict is a diagnostic, not a proof: integrability is not numerically
decidable, and pathologically conditioned integrands may be flagged
inconclusive.

Cone evaluators are integrated on the prism [0,1] x Delta_d by default: the
reparametrisation q collapsing {1} x Delta_d to the cone point is a
diffeomorphism away from a null set, and the product domain lets refinement
grade anisotropically into the wrapped simplex's singular faces.  q reverses
the coordinate orientation dt ^ db, so prism values carry the compensating
sign and match the direct cone integral.
"""

from __future__ import annotations

import dataclasses
import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chains import Cone, PrismMap, SingularSimplex
from .forms import Form, pullback_top_many

__all__ = [
    "QuadConfig",
    "QuadResult",
    "VolumeReport",
    "integrate_simplex",
    "integrate_prism",
    "finite_volume_check",
    "simplex_rule",
]


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-8
    max_depth: int = 40
    max_cells: int = 20000
    boundary_bonus: float = 4.0
    # cells thinner than this freeze: beyond it coordinate arithmetic near the
    # boundary collapses in float64 and "interior" nodes stop being interior
    min_cell_width: float = 1e-14
    # divergence diagnostics (see module docstring)
    growth_factor: float = 1.5
    growth_window: int = 5
    sustain_window: int = 8
    sustain_ratio: float = 0.97
    route_cones_via_prism: bool = True

    def with_tol(self, tol: float | None) -> "QuadConfig":
        if tol is None:
            return self
        return dataclasses.replace(self, rel_tol=tol, abs_tol=tol)


@dataclass
class QuadResult:
    value: float
    error_estimate: float
    abs_integral_estimate: float
    converged: bool
    subdivisions: int
    diverging: bool = False

    def to_dict(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "abs_integral_estimate": self.abs_integral_estimate,
            "converged": self.converged,
            "subdivisions": self.subdivisions,
            "diverging": self.diverging,
        }


@dataclass
class VolumeReport:
    per_index: dict
    verdict: str  # yes | no | inconclusive

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "per_index": {
                "dx_" + "_".join(map(str, idx)): r.to_dict() for idx, r in self.per_index.items()
            },
        }


# ---------------------------------------------------------------------------
# Base rules.
# ---------------------------------------------------------------------------


def _gauss_jacobi_01(n: int, alpha: int):
    """Nodes/weights for int_0^1 p(u) (1-u)^alpha du, exact to degree 2n-1.

    Built from exact rational moments: the monic orthogonal polynomial comes
    from a Hankel solve over Fractions, its roots from the companion matrix.
    """
    moments = [
        Fraction(math.factorial(k) * math.factorial(alpha), math.factorial(k + alpha + 1))
        for k in range(2 * n)
    ]
    mat = [[moments[i + j] for i in range(n)] for j in range(n)]
    rhs = [-moments[n + j] for j in range(n)]
    coeffs = _solve_fraction(mat, rhs)  # p(u) = u^n + c_{n-1} u^{n-1} + ... + c_0
    poly = np.array([1.0] + [float(coeffs[n - 1 - i]) for i in range(n)])
    nodes = np.sort(np.roots(poly).real)
    vander = np.vander(nodes, n, increasing=True).T
    weights = np.linalg.solve(vander, np.array([float(m) for m in moments[:n]]))
    return nodes, weights


def _solve_fraction(mat, rhs):
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


_RULE_CACHE: dict = {}


def simplex_rule(d: int, n: int):
    """Positive-weight interior cubature on the standard d-simplex, exact for
    polynomials of total degree <= 2n-1.  Returns (points, weights)."""
    key = (d, n)
    if key in _RULE_CACHE:
        return _RULE_CACHE[key]
    if d == 0:
        out = (np.zeros((1, 0)), np.ones(1))
        _RULE_CACHE[key] = out
        return out
    axes = [_gauss_jacobi_01(n, d - 1 - j) for j in range(d)]
    pts = []
    wts = []
    for combo in itertools.product(range(n), repeat=d):
        a = np.empty(d)
        w = 1.0
        prefix = 1.0
        for j, k in enumerate(combo):
            u = axes[j][0][k]
            a[j] = u * prefix
            prefix *= 1.0 - u
            w *= axes[j][1][k]
        pts.append(a)
        wts.append(w)
    out = (np.array(pts), np.array(wts))
    _RULE_CACHE[key] = out
    return out


def _interval_rule(n: int):
    return _gauss_jacobi_01(n, 0)


# ---------------------------------------------------------------------------
# Adaptive simplex integration.
# ---------------------------------------------------------------------------


def _touches_boundary(verts: np.ndarray, tol: float = 1e-13) -> bool:
    if np.any(verts.min(axis=0) <= tol):
        return True
    return bool(verts.sum(axis=1).max() >= 1.0 - tol)


def _longest_edge(verts: np.ndarray):
    d1 = verts.shape[0]
    best, bi, bj = -1.0, 0, 1
    for i in range(d1):
        for j in range(i + 1, d1):
            l2 = float(((verts[i] - verts[j]) ** 2).sum())
            if l2 > best + 1e-18:
                best, bi, bj = l2, i, j
    return bi, bj


class _Tracker:
    """Bookkeeping for the divergence diagnostics across depth levels."""

    def __init__(self, cfg: QuadConfig):
        self.cfg = cfg
        self.max_depth_seen = 0
        self.abs_history: list[float] = []
        self.boundary_flags: list[bool] = []
        self.diverging = False

    def on_split(self, child_depth: int, abs_total: float, touches: bool):
        if child_depth > self.max_depth_seen:
            self.max_depth_seen = child_depth
            self.abs_history.append(abs_total)
            self.boundary_flags.append(touches)
            self._check_growth()

    def _boundary_dominated(self, k: int) -> bool:
        flags = self.boundary_flags[-k:]
        return len(flags) >= k and sum(flags) >= 0.8 * len(flags)

    def _check_growth(self):
        h = self.abs_history
        w = self.cfg.growth_window
        if len(h) < w + 1 or not self._boundary_dominated(w):
            return
        base = h[-w - 1 :]
        if all(
            base[i] > 0 and base[i + 1] >= self.cfg.growth_factor * base[i] for i in range(w)
        ):
            self.diverging = True

    def check_at_exhaustion(self):
        """Sustained-growth trigger: absolute sums that keep climbing at an
        undiminished rate across refinement depths signal a (typically
        logarithmic) divergence the fixed-factor trigger cannot see.  Window
        means smooth out the oscillation of individual increments; for a
        convergent boundary singularity the window-to-window growth decays
        geometrically instead."""
        h = self.abs_history
        k = max(self.cfg.sustain_window, len(h) // 3)
        if len(h) < 3 * self.cfg.sustain_window or not self._boundary_dominated(k):
            return
        k = len(h) // 3
        m0 = sum(h[:k]) / k
        m1 = sum(h[k : 2 * k]) / k
        m2 = sum(h[2 * k : 3 * k]) / k
        g0, g1 = m1 - m0, m2 - m1
        if g1 <= 1e-3 * (1.0 + abs(h[-1])) or g0 <= 0:
            return
        if g1 >= self.cfg.sustain_ratio * g0:
            self.diverging = True


class _SimplexCell:
    __slots__ = ("verts", "depth", "q7", "q5", "a7", "err", "touches")

    def __init__(self, verts, depth, density, rule7, rule5):
        self.verts = verts
        self.depth = depth
        self.touches = _touches_boundary(verts)
        d = verts.shape[1]
        lin = (verts[1:] - verts[0]).T
        scale = abs(float(np.linalg.det(lin))) if d > 0 else 1.0
        p7, w7 = rule7
        p5, w5 = rule5
        v7 = density(verts[0] + p7 @ lin.T)
        v5 = density(verts[0] + p5 @ lin.T)
        self.q7 = scale * float(w7 @ v7)
        self.q5 = scale * float(w5 @ v5)
        self.a7 = scale * float(w7 @ np.abs(v7))
        self.err = abs(self.q7 - self.q5)

    def children(self, density, rule7, rule5):
        i, j = _longest_edge(self.verts)
        mid = 0.5 * (self.verts[i] + self.verts[j])
        va = self.verts.copy()
        va[j] = mid
        vb = self.verts.copy()
        vb[i] = mid
        return (
            _SimplexCell(va, self.depth + 1, density, rule7, rule5),
            _SimplexCell(vb, self.depth + 1, density, rule7, rule5),
        )


def _adapt_simplex(density, d: int, cfg: QuadConfig) -> QuadResult:
    if d == 0:
        v = float(density(np.zeros((1, 0)))[0])
        return QuadResult(v, 0.0, abs(v), True, 0)
    rule7 = simplex_rule(d, 4)
    rule5 = simplex_rule(d, 3)
    root = _SimplexCell(np.vstack([np.zeros((1, d)), np.eye(d)]), 0, density, rule7, rule5)
    heap = []
    seq = itertools.count()

    def push(c):
        bonus = cfg.boundary_bonus if c.touches else 1.0
        heapq.heappush(heap, (-c.err * bonus, next(seq), c))

    push(root)
    value = root.q7
    err = root.err
    abs_total = root.a7
    tracker = _Tracker(cfg)
    splits = 0
    ncells = 1
    while heap:
        if err <= max(cfg.abs_tol, cfg.rel_tol * abs(value)):
            return QuadResult(value, err, abs_total, True, splits)
        if tracker.diverging:
            break
        _, _, cell = heapq.heappop(heap)
        i, j = _longest_edge(cell.verts)
        width = float(np.sqrt(((cell.verts[i] - cell.verts[j]) ** 2).sum()))
        if cell.depth >= cfg.max_depth or width < cfg.min_cell_width:
            continue  # frozen: its error stays in the running total
        if ncells >= cfg.max_cells:
            break
        ca, cb = cell.children(density, rule7, rule5)
        value += ca.q7 + cb.q7 - cell.q7
        err += ca.err + cb.err - cell.err
        abs_total += ca.a7 + cb.a7 - cell.a7
        splits += 1
        ncells += 1
        push(ca)
        push(cb)
        tracker.on_split(ca.depth, abs_total, cell.touches)
    if not tracker.diverging:
        tracker.check_at_exhaustion()
    converged = err <= max(cfg.abs_tol, cfg.rel_tol * abs(value)) and not tracker.diverging
    return QuadResult(value, err, abs_total, converged, splits, tracker.diverging)


# ---------------------------------------------------------------------------
# Adaptive product (prism) integration with directional refinement.
# ---------------------------------------------------------------------------


class _PrismCell:
    __slots__ = ("t0", "t1", "verts", "depth", "q77", "a77", "err_t", "err_b", "err", "touches")

    def __init__(self, t0, t1, verts, depth, density, rules):
        self.t0, self.t1, self.verts, self.depth = t0, t1, verts, depth
        self.touches = t0 <= 1e-13 or t1 >= 1.0 - 1e-13 or _touches_boundary(verts)
        (t4, tw4), (t3, tw3), (b7, bw7), (b5, bw5) = rules
        d = verts.shape[1]
        lin = (verts[1:] - verts[0]).T
        scale = (t1 - t0) * (abs(float(np.linalg.det(lin))) if d > 0 else 1.0)
        tn4 = t0 + (t1 - t0) * t4
        tn3 = t0 + (t1 - t0) * t3
        bp7 = verts[0] + b7 @ lin.T
        bp5 = verts[0] + b5 @ lin.T

        def grid(ts, bs):
            nt, nb = ts.shape[0], bs.shape[0]
            pts = np.empty((nt * nb, d + 1))
            pts[:, 0] = np.repeat(ts, nb)
            pts[:, 1:] = np.tile(bs, (nt, 1))
            return density(pts).reshape(nt, nb)

        v44 = grid(tn4, bp7)
        q77 = scale * float(tw4 @ v44 @ bw7)
        self.a77 = scale * float(tw4 @ np.abs(v44) @ bw7)
        q57 = scale * float(tw3 @ grid(tn3, bp7) @ bw7)
        q75 = scale * float(tw4 @ grid(tn4, bp5) @ bw5)
        self.q77 = q77
        self.err_t = abs(q77 - q57)
        self.err_b = abs(q77 - q75)
        self.err = self.err_t + self.err_b

    def _b_width(self):
        if self.verts.shape[1] == 0:
            return 0.0
        i, j = _longest_edge(self.verts)
        return float(np.sqrt(((self.verts[i] - self.verts[j]) ** 2).sum()))

    def children(self, density, rules, min_width):
        split_t = self.err_t >= self.err_b
        if split_t and self.t1 - self.t0 < min_width:
            split_t = False
        if not split_t and self._b_width() < min_width:
            if self.t1 - self.t0 >= min_width:
                split_t = True
            else:
                return None
        if split_t:
            tm = 0.5 * (self.t0 + self.t1)
            return (
                _PrismCell(self.t0, tm, self.verts, self.depth + 1, density, rules),
                _PrismCell(tm, self.t1, self.verts, self.depth + 1, density, rules),
            )
        i, j = _longest_edge(self.verts)
        mid = 0.5 * (self.verts[i] + self.verts[j])
        va = self.verts.copy()
        va[j] = mid
        vb = self.verts.copy()
        vb[i] = mid
        return (
            _PrismCell(self.t0, self.t1, va, self.depth + 1, density, rules),
            _PrismCell(self.t0, self.t1, vb, self.depth + 1, density, rules),
        )


def _adapt_prism(density, d: int, cfg: QuadConfig) -> QuadResult:
    """Batch density over (t, b) points integrated on [0,1] x Delta_d."""
    rules = (_interval_rule(4), _interval_rule(3), simplex_rule(d, 4), simplex_rule(d, 3))
    verts = np.vstack([np.zeros((1, d)), np.eye(d)]) if d > 0 else np.zeros((1, 0))
    root = _PrismCell(0.0, 1.0, verts, 0, density, rules)
    heap = []
    seq = itertools.count()

    def push(c):
        bonus = cfg.boundary_bonus if c.touches else 1.0
        heapq.heappush(heap, (-c.err * bonus, next(seq), c))

    push(root)
    value, err, abs_total = root.q77, root.err, root.a77
    tracker = _Tracker(cfg)
    splits = 0
    ncells = 1
    while heap:
        if err <= max(cfg.abs_tol, cfg.rel_tol * abs(value)):
            return QuadResult(value, err, abs_total, True, splits)
        if tracker.diverging:
            break
        _, _, cell = heapq.heappop(heap)
        if cell.depth >= cfg.max_depth:
            continue  # frozen: its error stays in the running total
        if ncells >= cfg.max_cells:
            break
        kids = cell.children(density, rules, cfg.min_cell_width)
        if kids is None:
            continue
        ca, cb = kids
        value += ca.q77 + cb.q77 - cell.q77
        err += ca.err + cb.err - cell.err
        abs_total += ca.a77 + cb.a77 - cell.a77
        splits += 1
        ncells += 1
        push(ca)
        push(cb)
        tracker.on_split(ca.depth, abs_total, cell.touches)
    if not tracker.diverging:
        tracker.check_at_exhaustion()
    converged = err <= max(cfg.abs_tol, cfg.rel_tol * abs(value)) and not tracker.diverging
    return QuadResult(value, err, abs_total, converged, splits, tracker.diverging)


# ---------------------------------------------------------------------------
# Public entry points.
# ---------------------------------------------------------------------------


def integrate_simplex(
    sigma: SingularSimplex, omega: Form, tol: float | None = None, config: QuadConfig | None = None
) -> QuadResult:
    """Estimate of the integral of sigma^*(omega) over the standard simplex."""
    cfg = (config or QuadConfig()).with_tol(tol)
    if omega.degree != sigma.dim:
        raise ValueError("integrate_simplex needs deg(omega) == dim(sigma)")
    if sigma.domain == "prism":
        raise ValueError("prism-domain maps go through integrate_prism")
    if isinstance(sigma, Cone) and cfg.route_cones_via_prism:
        return integrate_prism(sigma.inner, "1 - t", omega, tol, config)

    def density(pts):
        return pullback_top_many(sigma, omega, pts)

    return _adapt_simplex(density, sigma.dim, cfg)


def integrate_prism(
    sigma: SingularSimplex,
    profile,
    omega: Form,
    tol: float | None = None,
    config: QuadConfig | None = None,
) -> QuadResult:
    """Integral of the pullback of omega along (t,b) |-> f(t) sigma(b) over
    [0,1] x Delta_d, oriented so that it matches the direct cone integral
    when f(t) = 1 - t (q reverses the dt^db coordinate orientation)."""
    cfg = (config or QuadConfig()).with_tol(tol)
    if omega.degree != sigma.dim + 1:
        raise ValueError("integrate_prism needs deg(omega) == dim(sigma) + 1")
    prism = PrismMap(sigma, profile)

    def density(pts):
        return -pullback_top_many(prism, omega, pts)

    return _adapt_prism(density, sigma.dim, cfg)


def finite_volume_check(
    sigma: SingularSimplex, tol: float = 1e-6, config: QuadConfig | None = None
) -> VolumeReport:
    """Absolute convergence of the pullbacks of all standard d-forms dx_I.

    A "yes" verdict means every index converged at the requested tolerance;
    "no" means the divergence diagnostic fired; anything else is
    inconclusive.  Faces are the caller's responsibility (compose with
    face_map and check each face)."""
    cfg = (config or QuadConfig()).with_tol(tol)
    d = sigma.dim
    results = {}
    route = isinstance(sigma, Cone) and cfg.route_cones_via_prism
    for idx in itertools.combinations(range(1, sigma.ambient + 1), d):
        omega = Form(d, sigma.ambient, [(idx, "1")])
        if route:
            prism = PrismMap(sigma.inner, "1 - t")

            def density(pts, prism=prism, omega=omega):
                return np.abs(pullback_top_many(prism, omega, pts))

            results[idx] = _adapt_prism(density, sigma.inner.dim, cfg)
        else:

            def density(pts, sigma=sigma, omega=omega):
                return np.abs(pullback_top_many(sigma, omega, pts))

            results[idx] = _adapt_simplex(density, d, cfg)
    if any(r.diverging for r in results.values()):
        verdict = "no"
    elif all(r.converged for r in results.values()):
        verdict = "yes"
    else:
        verdict = "inconclusive"
    return VolumeReport(results, verdict)
