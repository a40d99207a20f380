"""Singular simplices, integer chains, boundary, cone and prism constructions.

The standard d-simplex is ``{(a_1,...,a_d) : a_i >= 0, sum a_i <= 1}`` with
vertex 0 at the origin and vertex k at the k-th basis vector.  A singular
simplex is a continuous map of the closed simplex into R^N, C^1 on each open
face; evaluators come in five flavours (expression-backed, affine, cone,
prism, composed) and every one exposes an exact Jacobian at interior points.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import expr as ex

__all__ = [
    "SingularSimplex",
    "ExprMap",
    "AffineSimplex",
    "Cone",
    "PrismMap",
    "Composed",
    "Chain",
    "face_map",
    "boundary",
    "cone",
    "cone_chain",
    "prism_q",
    "prism_q_inverse",
    "barycentric_subdivide",
    "reference_subdivision",
    "in_standard_simplex",
    "interior_grid",
    "random_interior_point",
]


def in_standard_simplex(point, tol: float = 1e-12) -> bool:
    p = np.asarray(point, dtype=float)
    return bool(np.all(p >= -tol) and p.sum() <= 1.0 + tol)


def interior_grid(d: int, m: int = 4, shrink: float = 1e-3):
    """Deterministic strictly-interior sample points of the open d-simplex."""
    if d == 0:
        return [np.zeros(0)]
    pts = []
    for idx in itertools.product(range(1, m + 1), repeat=d):
        if sum(idx) > m + d:
            continue
        p = np.array(idx, dtype=float) / (m + d + 1)
        if p.sum() < 1.0 - shrink:
            pts.append(p)
    if not pts:
        pts = [np.full(d, 1.0 / (2 * d + 2))]
    return pts


def random_interior_point(d: int, rng) -> np.ndarray:
    """Uniform point in the open simplex via sorted-uniform gaps."""
    if d == 0:
        return np.zeros(0)
    cuts = np.sort(rng.random(d))
    p = np.diff(np.concatenate(([0.0], cuts)))
    return np.clip(p, 1e-12, None)


class SingularSimplex:
    """Base class: a map of the closed d-simplex into R^ambient."""

    dim: int
    ambient: int
    domain = "simplex"

    def evaluate(self, point) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, point) -> np.ndarray:
        """ambient x dim matrix of partial derivatives at an interior point."""
        raise NotImplementedError

    # batch variants; subclasses on the quadrature hot path override them
    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(p) for p in points])

    def jacobian_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.jacobian(p) for p in points])

    def key(self):
        raise NotImplementedError

    def face(self, i: int) -> "SingularSimplex":
        return Composed(self, face_map(self.dim, i))

    def __eq__(self, other):
        return isinstance(other, SingularSimplex) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim} ambient={self.ambient}>"


class ExprMap(SingularSimplex):
    """Simplex given by N component expressions in the simplex coordinates."""

    def __init__(self, components, dim: int):
        comps = []
        for c in components:
            comps.append(ex.parse(c, dim) if isinstance(c, str) else c)
        self.components = tuple(comps)
        self.dim = dim
        self.ambient = len(comps)
        self._fns = [ex.compile_expr(c) for c in self.components]
        self._jac_fns = [
            [ex.compile_expr(ex.diff(c, j + 1)) for j in range(dim)] for c in self.components
        ]
        self._vfns = [ex.compile_vec(c) for c in self.components]
        self._vjac_fns = [
            [ex.compile_vec(ex.diff(c, j + 1)) for j in range(dim)] for c in self.components
        ]

    def evaluate(self, point):
        return np.array([f(point) for f in self._fns])

    def jacobian(self, point):
        return np.array([[f(point) for f in row] for row in self._jac_fns])

    def evaluate_many(self, points):
        cols = np.asarray(points, dtype=float).T
        return np.stack([f(cols) for f in self._vfns], axis=1)

    def jacobian_many(self, points):
        cols = np.asarray(points, dtype=float).T
        n = cols.shape[1]
        out = np.empty((n, self.ambient, self.dim))
        for i, row in enumerate(self._vjac_fns):
            for j, f in enumerate(row):
                out[:, i, j] = f(cols)
        return out

    def key(self):
        return ("expr", self.dim, self.components)


class AffineSimplex(SingularSimplex):
    """Affine simplex spanned by an ordered list of d+1 vertices in R^N."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2:
            raise ValueError("vertices must be a (d+1) x N array")
        self.vertices = v
        self.dim = v.shape[0] - 1
        self.ambient = v.shape[1]
        self._linear = (v[1:] - v[0]).T if self.dim > 0 else np.zeros((self.ambient, 0))

    def evaluate(self, point):
        if self.dim == 0:
            return self.vertices[0].copy()
        return self.vertices[0] + self._linear @ np.asarray(point, dtype=float)

    def jacobian(self, point):
        return self._linear.copy()

    def evaluate_many(self, points):
        p = np.asarray(points, dtype=float)
        return self.vertices[0] + p @ self._linear.T

    def jacobian_many(self, points):
        n = np.asarray(points).shape[0]
        return np.broadcast_to(self._linear, (n, self.ambient, self.dim)).copy()

    def face(self, i):
        return AffineSimplex(np.delete(self.vertices, i, axis=0))

    def compose_affine(self, inner: "AffineSimplex") -> "AffineSimplex":
        """self o inner, as an affine simplex (inner maps into our domain)."""
        return AffineSimplex(np.array([self.evaluate(w) for w in inner.vertices]))

    def key(self):
        return ("affine", tuple(map(tuple, self.vertices.tolist())))


class Cone(SingularSimplex):
    """Cone over a simplex: interpolates linearly between the origin of R^N
    and the wrapped simplex, which sits on the face opposite vertex 0."""

    def __init__(self, inner: SingularSimplex):
        if inner.domain != "simplex":
            raise ValueError("can only cone a simplex-domain map")
        self.inner = inner
        self.dim = inner.dim + 1
        self.ambient = inner.ambient

    def evaluate(self, point):
        p = np.asarray(point, dtype=float)
        a = p.sum()
        if a <= 0.0:
            return np.zeros(self.ambient)
        return a * self.inner.evaluate(p[1:] / a)

    def jacobian(self, point):
        p = np.asarray(point, dtype=float)
        a = p.sum()
        u = p[1:] / a
        val = self.inner.evaluate(u)
        jac = self.inner.jacobian(u)
        base = val - jac @ u
        out = np.empty((self.ambient, self.dim))
        out[:, 0] = base
        out[:, 1:] = base[:, None] + jac
        return out

    def evaluate_many(self, points):
        p = np.asarray(points, dtype=float)
        a = p.sum(axis=1)
        safe = np.where(a > 0.0, a, 1.0)
        vals = self.inner.evaluate_many(p[:, 1:] / safe[:, None])
        return np.where(a[:, None] > 0.0, a[:, None] * vals, 0.0)

    def jacobian_many(self, points):
        p = np.asarray(points, dtype=float)
        a = p.sum(axis=1)
        u = p[:, 1:] / a[:, None]
        vals = self.inner.evaluate_many(u)
        jacs = self.inner.jacobian_many(u)
        base = vals - np.einsum("nij,nj->ni", jacs, u)
        out = np.empty((p.shape[0], self.ambient, self.dim))
        out[:, :, 0] = base
        out[:, :, 1:] = base[:, :, None] + jacs
        return out

    def face(self, i):
        # The face opposite the cone vertex is the wrapped simplex itself;
        # every other face is the cone of the matching face of the wrapped
        # simplex.  Using the identities structurally keeps evaluation away
        # from the wrapped simplex's singular locus (a naive composition
        # would query its Jacobian exactly there).
        if i == 0:
            return self.inner
        if self.inner.dim == 0:
            return AffineSimplex(np.zeros((1, self.ambient)))  # the cone point
        return Cone(self.inner.face(i - 1))

    def key(self):
        return ("cone", self.inner.key())


class PrismMap(SingularSimplex):
    """Map (t, b) |-> f(t) * sigma(b) on [0,1] x Delta_d (a prism, not a
    simplex; boundary and simplex quadrature refuse it)."""

    domain = "prism"

    def __init__(self, inner: SingularSimplex, profile):
        self.inner = inner
        self.profile = ex.parse(profile, 1) if isinstance(profile, str) else profile
        self.dim = inner.dim + 1
        self.ambient = inner.ambient
        self._f = ex.compile_expr(self.profile)
        self._df = ex.compile_expr(ex.diff(self.profile, 1))
        self._vf = ex.compile_vec(self.profile)
        self._vdf = ex.compile_vec(ex.diff(self.profile, 1))

    def evaluate(self, point):
        p = np.asarray(point, dtype=float)
        t = (p[0],)
        return self._f(t) * self.inner.evaluate(p[1:])

    def jacobian(self, point):
        p = np.asarray(point, dtype=float)
        t = (p[0],)
        val = self.inner.evaluate(p[1:])
        jac = self.inner.jacobian(p[1:])
        out = np.empty((self.ambient, self.dim))
        out[:, 0] = self._df(t) * val
        out[:, 1:] = self._f(t) * jac
        return out

    def evaluate_many(self, points):
        p = np.asarray(points, dtype=float)
        f = self._vf(p[:, :1].T)
        return f[:, None] * self.inner.evaluate_many(p[:, 1:])

    def jacobian_many(self, points):
        p = np.asarray(points, dtype=float)
        f = self._vf(p[:, :1].T)
        df = self._vdf(p[:, :1].T)
        vals = self.inner.evaluate_many(p[:, 1:])
        jacs = self.inner.jacobian_many(p[:, 1:])
        out = np.empty((p.shape[0], self.ambient, self.dim))
        out[:, :, 0] = df[:, None] * vals
        out[:, :, 1:] = f[:, None, None] * jacs
        return out

    def key(self):
        return ("prism", self.inner.key(), self.profile)


class Composed(SingularSimplex):
    """outer o inner for an inner map whose image lies in outer's domain."""

    def __new__(cls, outer, inner):
        # keep affine-affine compositions affine so chain terms merge exactly
        if isinstance(outer, AffineSimplex) and isinstance(inner, AffineSimplex):
            return outer.compose_affine(inner)
        if isinstance(outer, Composed) and isinstance(inner, AffineSimplex) and isinstance(
            outer.inner, AffineSimplex
        ):
            return Composed(outer.outer, outer.inner.compose_affine(inner))
        return super().__new__(cls)

    def __init__(self, outer: SingularSimplex, inner: SingularSimplex):
        if getattr(self, "outer", None) is not None:
            return  # __new__ handed back an already-flattened instance
        if inner.ambient != outer.dim:
            raise ValueError("inner map must land in the outer domain")
        self.outer = outer
        self.inner = inner
        self.dim = inner.dim
        self.ambient = outer.ambient

    def evaluate(self, point):
        return self.outer.evaluate(self.inner.evaluate(point))

    def jacobian(self, point):
        if self.dim == 0:
            return np.zeros((self.ambient, 0))
        mid = self.inner.evaluate(point)
        return self.outer.jacobian(mid) @ self.inner.jacobian(point)

    def evaluate_many(self, points):
        return self.outer.evaluate_many(self.inner.evaluate_many(points))

    def jacobian_many(self, points):
        n = np.asarray(points).shape[0]
        if self.dim == 0:
            return np.zeros((n, self.ambient, 0))
        mid = self.inner.evaluate_many(points)
        return np.einsum(
            "nij,njk->nik", self.outer.jacobian_many(mid), self.inner.jacobian_many(points)
        )

    def face(self, i):
        return Composed(self.outer, self.inner.face(i))

    def key(self):
        return ("composed", self.outer.key(), self.inner.key())


def face_map(d: int, i: int) -> AffineSimplex:
    """Affine embedding of Delta_{d-1} onto the face of Delta_d opposite
    vertex i, vertex order inherited from the ambient order."""
    if d < 1:
        raise ValueError("face_map needs dimension >= 1")
    if not 0 <= i <= d:
        raise IndexError(f"face index {i} out of range for dimension {d}")
    verts = [np.zeros(d)] + [row for row in np.eye(d)]
    del verts[i]
    return AffineSimplex(np.array(verts))


def cone(sigma: SingularSimplex) -> Cone:
    return Cone(sigma)


def prism_q(t: float, b) -> np.ndarray:
    """Reparametrisation [0,1] x Delta_d -> Delta_{d+1} collapsing {1} x Delta_d
    to the origin; satisfies prism = cone o q."""
    b = np.asarray(b, dtype=float)
    return np.concatenate(([(1.0 - t) * (1.0 - b.sum())], (1.0 - t) * b))


def prism_q_inverse(a):
    """Inverse of q away from the origin: (a_0,...,a_d) |-> (1-A, a_1/A,...)."""
    a = np.asarray(a, dtype=float)
    s = a.sum()
    if s <= 0.0:
        raise ValueError("q is not invertible at the origin")
    return 1.0 - s, a[1:] / s


class Chain:
    """Formal integer combination of singular simplices of one dimension."""

    def __init__(self, degree: int, terms=None):
        self.degree = degree
        self.terms: dict[SingularSimplex, int] = {}
        if terms:
            for sigma, n in terms.items() if isinstance(terms, dict) else terms:
                self._bump(sigma, n)

    def _bump(self, sigma: SingularSimplex, n: int):
        if n == 0:
            return
        if sigma.dim != self.degree:
            raise ValueError("simplex dimension does not match chain degree")
        new = self.terms.get(sigma, 0) + n
        if new == 0:
            self.terms.pop(sigma, None)
        else:
            self.terms[sigma] = new

    @classmethod
    def of(cls, sigma: SingularSimplex, coeff: int = 1) -> "Chain":
        return cls(sigma.dim, [(sigma, coeff)])

    def __add__(self, other: "Chain") -> "Chain":
        out = Chain(self.degree, self.terms)
        for sigma, n in other.terms.items():
            out._bump(sigma, n)
        return out

    def __sub__(self, other: "Chain") -> "Chain":
        return self + other.scale(-1)

    def scale(self, k: int) -> "Chain":
        return Chain(self.degree, [(s, k * n) for s, n in self.terms.items()])

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        return list(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, Chain)
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"<Chain deg={self.degree} terms={len(self.terms)}>"


def boundary(c: Chain) -> Chain:
    """Alternating sum of face restrictions, extended linearly."""
    if c.degree < 1:
        raise ValueError("boundary needs degree >= 1")
    out = Chain(c.degree - 1)
    for sigma, n in c.terms.items():
        if sigma.domain != "simplex":
            raise ValueError("boundary is defined for simplex-domain maps only")
        for i in range(c.degree + 1):
            out._bump(sigma.face(i), n * (-1) ** i)
    return out


def cone_chain(c: Chain) -> Chain:
    return Chain(c.degree + 1, [(Cone(s), n) for s, n in c.terms.items()])


def _sd_affine(sign: int, verts: np.ndarray):
    """First barycentric subdivision of an affine simplex, as signed affine
    simplices: cone at the barycenter over the subdivided boundary."""
    k = verts.shape[0] - 1
    if k == 0:
        return [(sign, verts)]
    bary = verts.mean(axis=0)
    out = []
    for i in range(k + 1):
        face = np.delete(verts, i, axis=0)
        for s, w in _sd_affine(sign * (-1) ** i, face):
            out.append((s, np.vstack([bary[None, :], w])))
    return out


def reference_subdivision(d: int):
    """Signed affine self-maps of Delta_d giving its barycentric subdivision."""
    verts = np.vstack([np.zeros((1, d)), np.eye(d)])
    return [(s, AffineSimplex(w)) for s, w in _sd_affine(1, verts)]


def barycentric_subdivide(c: Chain) -> Chain:
    ref = reference_subdivision(c.degree)
    out = Chain(c.degree)
    for sigma, n in c.terms.items():
        for s, piece in ref:
            out._bump(Composed(sigma, piece), n * s)
    return out


def check_continuity(sigma: SingularSimplex, depth: int = 20, grid_m: int = 3) -> float:
    """Spot-check continuity on a boundary-approaching grid.

    For sample points on each facet, evaluates along the inward segment at
    offsets 2^-k down to 2^-depth and returns the largest gap between the
    deepest sample and the facet value.  A validation, not a proof: small
    output is evidence of continuity at the boundary, nothing more."""
    d = sigma.dim
    if d == 0:
        return 0.0
    center = np.full(d, 1.0 / (d + 1))
    worst = 0.0
    targets = []
    for i in range(d + 1):
        fm = face_map(d, i)
        for c in interior_grid(d - 1, grid_m):
            targets.append(fm.evaluate(c))
    for x0 in targets:
        boundary_val = sigma.evaluate(x0)
        direction = center - x0
        prev = None
        for k in range(4, depth + 1, 4):
            val = sigma.evaluate(x0 + (2.0**-k) * direction)
            gap = float(np.abs(val - boundary_val).max())
            if prev is not None and gap > prev + 1e-9:
                worst = max(worst, gap)
            prev = gap
        worst = max(worst, prev)
    return worst
