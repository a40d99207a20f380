"""Triangulation gluing: extend a triangulation across an affine piece.

A Triangulation pairs a simplicial complex with per-simplex geometric
evaluators and named marked subsets.  glue() implements the interpolation
construction: a simplex of the first triangulation whose vertices split into
a part outside the overlap B and a face inside B is replaced by the join of
its outside part with every second-triangulation simplex refining that face;
the new evaluator interpolates between the outside part and the refined face
through the first evaluator, with the refining map transported by a numeric
inverse.  cover_and_triangulate() folds glue() over a list of pieces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .chains import AffineSimplex, Composed, SingularSimplex
from .homology import SimplicialComplex

__all__ = [
    "Triangulation",
    "GlueInput",
    "GluedMap",
    "InputCompatibilityError",
    "enforce_B_condition",
    "subdivide_triangulation",
    "glue",
    "cover_and_triangulate",
    "invert_simplex_map",
]


class InputCompatibilityError(Exception):
    pass


def _ref_vertices(d: int) -> np.ndarray:
    return np.vstack([np.zeros((1, d)), np.eye(d)]) if d > 0 else np.zeros((1, 0))


def _project_to_simplex(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    s = x.sum()
    if s <= 1.0:
        return x
    # Euclidean projection onto {x >= 0, sum x = 1}
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(x) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.clip(x - theta, 0.0, None)


def invert_simplex_map(f: SingularSimplex, y, tol: float = 1e-12, max_iter: int = 80):
    """Solve f(x) = y for x in the closed domain simplex.

    Exact linear solve for affine maps; damped Gauss-Newton with multistart
    from barycentric seeds otherwise.  Raises InputCompatibilityError when no
    start converges (the target is not in the image)."""
    y = np.asarray(y, dtype=float)
    scale = 1.0 + float(np.abs(y).max(initial=0.0))
    if isinstance(f, AffineSimplex):
        if f.dim == 0:
            x = np.zeros(0)
        else:
            x, *_ = np.linalg.lstsq(f._linear, y - f.vertices[0], rcond=None)
        inside = bool(np.all(x >= -1e-9) and x.sum() <= 1.0 + 1e-9)
        if inside and np.abs(f.evaluate(x) - y).max(initial=0.0) <= tol * scale:
            return _project_to_simplex(x)
        raise InputCompatibilityError("target not in the affine simplex image")
    d = f.dim
    seeds = [np.full(d, 1.0 / (d + 1))]
    for v in _ref_vertices(d):
        seeds.append(0.9 * v + 0.1 * seeds[0])
    best = None
    for x in seeds:
        x = x.copy()
        r = f.evaluate(x) - y
        for _ in range(max_iter):
            n0 = np.abs(r).max(initial=0.0)
            if n0 <= tol * scale:
                return x
            J = f.jacobian(x)
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            lam = 1.0
            while lam > 1e-12:
                xn = _project_to_simplex(x + lam * step)
                rn = f.evaluate(xn) - y
                if np.abs(rn).max(initial=0.0) < n0:
                    x, r = xn, rn
                    break
                lam *= 0.5
            else:
                break
        n0 = np.abs(r).max(initial=0.0)
        if best is None or n0 < best[0]:
            best = (n0, x)
        if n0 <= tol * scale:
            return x
    raise InputCompatibilityError(
        f"Newton inverse failed: residual {best[0]:.3e} at tolerance {tol:.1e}"
    )


class GluedMap(SingularSimplex):
    """Evaluator of a glued simplex (v_0..v_m, w_0..w_s).

    Barycentric mass on the w-part is routed through g = h1^{-1} o h2 into
    the reference simplex of the source simplex and interpolated against the
    v-part; the w-mass a -> 0 limit is the evaluation of the v-part alone.
    """

    def __init__(self, h1_sigma: SingularSimplex, h2_tau: SingularSimplex,
                 v_slots, roles):
        self.h1_sigma = h1_sigma
        self.h2_tau = h2_tau
        self.v_slots = tuple(v_slots)  # slot of v_i in sigma's barycentric refs
        self.roles = tuple(roles)  # per new-reference slot: ("v", i) | ("w", j)
        self.dim = len(roles) - 1
        self.ambient = h1_sigma.ambient
        self._g_cache: dict = {}

    def _g(self, u_std: np.ndarray) -> np.ndarray:
        """Barycentric coordinates in sigma's reference of h1^{-1}(h2(u))."""
        key = u_std.tobytes()
        hit = self._g_cache.get(key)
        if hit is not None:
            return hit
        target = self.h2_tau.evaluate(u_std)
        x = invert_simplex_map(self.h1_sigma, target)
        z = np.concatenate(([1.0 - x.sum()], x))
        self._g_cache[key] = z
        return z

    def evaluate(self, point):
        x = np.asarray(point, dtype=float)
        bar = np.concatenate(([1.0 - x.sum()], x))
        nv = len(self.v_slots)
        a_v = np.zeros(nv)
        a_w = np.zeros(len(self.roles) - nv)
        for slot, (kind, i) in enumerate(self.roles):
            if kind == "v":
                a_v[i] = bar[slot]
            else:
                a_w[i] = bar[slot]
        a = a_w.sum()
        arg = np.zeros(self.h1_sigma.dim + 1)
        for i, s in enumerate(self.v_slots):
            arg[s] += a_v[i]
        if a > 0.0:
            u = a_w / a
            arg += a * self._g(u[1:])
        return self.h1_sigma.evaluate(arg[1:])

    def jacobian(self, point):
        # finite differences: the glued map's inverse-transport factor has no
        # closed form, and this Jacobian only feeds sampled validation
        x = np.asarray(point, dtype=float)
        h = 1e-7
        out = np.empty((self.ambient, self.dim))
        for j in range(self.dim):
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            out[:, j] = (self.evaluate(xp) - self.evaluate(xm)) / (2 * h)
        return out

    def key(self):
        return ("glued", self.h1_sigma.key(), self.h2_tau.key(), self.v_slots, self.roles)


class Triangulation:
    """Simplicial complex + per-simplex evaluators into R^N + named marks."""

    def __init__(self, complex_: SimplicialComplex, evaluators: dict, marks=None):
        self.complex = complex_
        self.evaluators = {tuple(sorted(k)): v for k, v in evaluators.items()}
        self.marks = {name: {tuple(sorted(s)) for s in ss} for name, ss in (marks or {}).items()}
        ambients = {e.ambient for e in self.evaluators.values()}
        if len(ambients) != 1:
            raise ValueError("evaluators must share one ambient space")
        self.ambient = ambients.pop()

    def top_simplices(self):
        d = self.complex.dim
        return list(self.complex.simplices[d])

    def evaluator_for(self, simplex) -> SingularSimplex:
        s = tuple(sorted(simplex))
        ev = self.evaluators.get(s)
        if ev is not None:
            return ev
        # restrict the evaluator of any carrier simplex
        for d in range(len(s), self.complex.dim + 1):
            for parent in self.complex.simplices.get(d, []):
                if set(s) <= set(parent) and parent in self.evaluators:
                    ref = _ref_vertices(len(parent) - 1)
                    pos = [parent.index(v) for v in s]
                    return Composed(self.evaluators[parent], AffineSimplex(ref[pos]))
        raise KeyError(f"no evaluator covers simplex {s}")

    def vertex_point(self, v) -> np.ndarray:
        return self.evaluator_for((v,)).evaluate(np.zeros(0))

    def validate(self, grid_m: int = 3, face_tol: float = 1e-10, collision_tol: float = 1e-7):
        """Sampled structural checks: shared-face agreement of top evaluators
        and injectivity (no collisions between distinct top interiors)."""
        from .chains import interior_grid

        d = self.complex.dim
        tops = self.top_simplices()
        face_worst = 0.0
        for ftuple in self.complex.simplices.get(d - 1, []) if d >= 1 else []:
            carriers = [t for t in tops if set(ftuple) <= set(t)]
            if len(carriers) < 2:
                continue
            evs = []
            for t in carriers:
                ref = _ref_vertices(d)
                pos = [t.index(v) for v in ftuple]
                evs.append(Composed(self.evaluators[t], AffineSimplex(ref[pos])))
            grid = interior_grid(d - 1, grid_m)
            for p in grid:
                vals = [e.evaluate(p) for e in evs]
                for v in vals[1:]:
                    face_worst = max(face_worst, float(np.abs(v - vals[0]).max()))
        if face_worst > face_tol:
            raise InputCompatibilityError(f"face evaluators disagree by {face_worst:.2e}")
        # injectivity sampling
        grid = interior_grid(d, grid_m)
        clouds = []
        for t in tops:
            ev = self.evaluators[t]
            clouds.append(np.array([ev.evaluate(p) for p in grid]))
        for i in range(len(clouds)):
            for j in range(i + 1, len(clouds)):
                dists = np.linalg.norm(clouds[i][:, None, :] - clouds[j][None, :, :], axis=2)
                if dists.min() < collision_tol:
                    raise InputCompatibilityError(
                        f"interiors of {tops[i]} and {tops[j]} collide in sampling"
                    )
        return {
            "face_agreement": face_worst,
            "tops": len(tops),
            "status": "sampled, not certified",
        }

    def __repr__(self):
        return f"<Triangulation {self.complex!r} marks={sorted(self.marks)}>"


def _flags_of(K: SimplicialComplex):
    """(names, flags): barycentric-subdivision vertices indexed by simplex,
    and per maximal simplex the list of its maximal face chains."""
    names = {}
    for d in range(K.dim + 1):
        for s in K.simplices[d]:
            names[s] = len(names)
    flags = []

    def descend(chain, s):
        if len(s) == 1:
            flags.append(chain + [s])
            return
        for f in itertools.combinations(s, len(s) - 1):
            descend(chain + [s], f)

    for d in range(K.dim + 1):
        for s in K.simplices[d]:
            is_max = d == K.dim or all(
                tuple(sorted(set(s) | {v})) not in K._index.get(d + 1, {})
                for v in K.vertices
                if v not in s
            )
            if is_max:
                descend([], s)
    return names, flags


def subdivide_triangulation(T: Triangulation) -> Triangulation:
    """Geometric barycentric subdivision: flag complex plus evaluators that
    restrict the old ones along the affine barycenter embeddings."""
    K = T.complex
    names, flags = _flags_of(K)
    simplices = []
    evaluators = {}
    for flag in flags:
        top = flag[0]
        d = len(top) - 1
        ref = _ref_vertices(d)
        tup = tuple(names[s] for s in flag)
        order = sorted(range(len(flag)), key=lambda k: tup[k])
        new_simplex = tuple(tup[k] for k in order)
        barys = [ref[[top.index(v) for v in flag[k]]].mean(axis=0) for k in order]
        ev = Composed(T.evaluators[top], AffineSimplex(np.array(barys)))
        simplices.append(new_simplex)
        evaluators[new_simplex] = ev
    Ksd = SimplicialComplex(simplices)
    marks = {}
    for name, members in T.marks.items():
        new_members = set()
        for d in range(Ksd.dim + 1):
            for s in Ksd.simplices[d]:
                originals = [orig for orig, nm in names.items() if nm in s]
                if all(orig in members for orig in originals):
                    new_members.add(s)
        marks[name] = new_members
    return Triangulation(Ksd, evaluators, marks)


def _b_vertices(T: Triangulation, mark: str):
    return {v for (v,) in T.marks.get(mark, set()) if len((v,)) == 1}


def _violates_b_condition(K: SimplicialComplex, members: set) -> bool:
    bverts = {v for s in members for v in s}
    for d in range(1, K.dim + 1):
        for s in K.simplices[d]:
            if set(s) <= bverts and s not in members:
                return True
    return False


def enforce_B_condition(T: Triangulation, mark: str = "B", max_rounds: int = 5) -> Triangulation:
    """Subdivide until every simplex whose vertices all lie in the marked set
    lies in the marked set itself.  The mark must be subcomplex-supported;
    a non-terminating input trips the round guard."""
    members = T.marks.get(mark, set())
    for s in members:
        for k in range(1, len(s)):
            for f in itertools.combinations(s, k):
                if f not in members:
                    raise InputCompatibilityError(f"mark {mark!r} is not face-closed at {f}")
    current = T
    for _ in range(max_rounds):
        if not _violates_b_condition(current.complex, current.marks.get(mark, set())):
            return current
        current = subdivide_triangulation(current)
    raise InputCompatibilityError(
        f"B-condition still violated after {max_rounds} subdivisions; "
        f"is {mark!r} subcomplex-supported?"
    )


@dataclass
class GlueInput:
    """t2 must triangulate its side so that the marked overlap of t1 is
    refined by the marked overlap of t2; containment sends every marked
    t2-simplex to the smallest marked t1-simplex containing its image."""

    t1: Triangulation
    t2: Triangulation
    containment: dict  # tau tuple (in K2) -> sigma tuple (in K1)
    mark: str = "B"

    def __post_init__(self):
        self.containment = {
            tuple(sorted(k)): tuple(sorted(v)) for k, v in self.containment.items()
        }
        b2 = self.t2.marks.get(self.mark, set())
        missing = [s for s in b2 if s not in self.containment]
        if missing:
            raise InputCompatibilityError(
                f"containment table misses marked simplices of the second piece: {missing[:3]}"
            )
        b1 = self.t1.marks.get(self.mark, set())
        bad = [v for v in self.containment.values() if v not in b1]
        if bad:
            raise InputCompatibilityError(
                f"containment targets are not marked in the first piece: {bad[:3]}"
            )


def glue(inp: GlueInput) -> Triangulation:
    """Glued triangulation of the union; all second-piece simplices survive,
    first-piece simplices with no face in the overlap survive, and mixed
    simplices join an outside part with a refining simplex of the overlap."""
    t1, t2 = inp.t1, inp.t2
    if _violates_b_condition(t1.complex, t1.marks.get(inp.mark, set())):
        raise InputCompatibilityError("first piece violates the B-condition; subdivide first")
    if _violates_b_condition(t2.complex, t2.marks.get(inp.mark, set())):
        raise InputCompatibilityError("second piece violates the B-condition; subdivide first")
    b1 = t1.marks.get(inp.mark, set())
    b2 = t2.marks.get(inp.mark, set())
    b1_verts = {v for s in b1 for v in s}

    n2 = max(t2.complex.vertices, default=-1) + 1
    remap1 = {}  # K1 vertex (not in B) -> glued id
    for v in t1.complex.vertices:
        if v not in b1_verts:
            remap1[v] = n2 + len(remap1)

    simplices = []
    evaluators = {}
    source_of = {}  # glued simplex -> ("t1", sigma) | ("t2", tau) for marks

    for tau in (s for d in range(t2.complex.dim + 1) for s in t2.complex.simplices[d]):
        simplices.append(tau)
        evaluators[tau] = t2.evaluator_for(tau)
        source_of.setdefault(tau, []).append(("t2", tau))

    for d in range(t1.complex.dim + 1):
        for sigma in t1.complex.simplices[d]:
            v_part = tuple(v for v in sigma if v not in b1_verts)
            b_part = tuple(v for v in sigma if v in b1_verts)
            if not v_part:
                continue  # fully inside the overlap: replaced by t2
            if not b_part:
                new_simplex = tuple(sorted(remap1[v] for v in v_part))
                simplices.append(new_simplex)
                evaluators[new_simplex] = t1.evaluator_for(sigma)
                source_of.setdefault(new_simplex, []).append(("t1", sigma))
                continue
            if b_part not in b1:
                raise InputCompatibilityError(
                    f"simplex {sigma}: face {b_part} has all vertices in the overlap "
                    "but is not marked (B-condition)"
                )
            h1_sigma = t1.evaluator_for(sigma)
            for tau, carrier in inp.containment.items():
                if not set(carrier) <= set(b_part):
                    continue
                new_glued = _build_glued(t1, sigma, v_part, b_part, t2, tau, remap1, h1_sigma)
                new_simplex, ev = new_glued
                simplices.append(new_simplex)
                evaluators[new_simplex] = ev
                # a mixed simplex maps into h1 of the source simplex, so it
                # inherits only the first piece's marks; its tau-face carries
                # the second piece's marks on its own
                source_of.setdefault(new_simplex, []).append(("t1", sigma))

    K = SimplicialComplex(simplices)
    marks = {}
    for name, members in itertools.chain(t1.marks.items(), t2.marks.items()):
        marks.setdefault(name, set())
    for name in marks:
        m1 = t1.marks.get(name, set())
        m2 = t2.marks.get(name, set())
        for s, sources in source_of.items():
            keep = False
            for side, orig in sources:
                if side == "t1" and orig in m1:
                    keep = True
                if side == "t2" and orig in m2:
                    keep = True
            if keep:
                marks[name].add(s)
    out = Triangulation(K, evaluators, marks)
    return out


def _build_glued(t1, sigma, v_part, b_part, t2, tau, remap1, h1_sigma):
    sigma_sorted = tuple(sorted(sigma))
    new_v = [remap1[v] for v in v_part]
    new_tuple = tuple(sorted(list(tau) + new_v))
    # roles per reference slot of the new simplex, in sorted-tuple order
    tau_set = set(tau)
    roles = []
    for vid in new_tuple:
        if vid in tau_set:
            roles.append(("w", tau.index(vid)))
        else:
            roles.append(("v", new_v.index(vid)))
    v_slots = [sigma_sorted.index(v) for v in v_part]
    h2_tau = t2.evaluator_for(tau)
    ev = GluedMap(h1_sigma, h2_tau, v_slots, roles)
    return new_tuple, ev


def _face_closure(simplices):
    out = set()
    for s in simplices:
        s = tuple(sorted(s))
        for k in range(1, len(s) + 1):
            out.update(itertools.combinations(s, k))
    return out


def cover_and_triangulate(first: Triangulation, rest: list) -> Triangulation:
    """Fold glue() over (piece, containment) steps.  The overlap marks for
    each step are derived from the containment table (targets on the
    accumulated side, keys on the piece side); every output simplex is
    chart-tagged with its source piece via marks named chart:<k>."""
    acc = first
    acc.marks.setdefault("chart:0", set()).update(
        s for d in range(acc.complex.dim + 1) for s in acc.complex.simplices[d]
    )
    for k, (piece, containment) in enumerate(rest, start=1):
        piece.marks.setdefault(f"chart:{k}", set()).update(
            s for d in range(piece.complex.dim + 1) for s in piece.complex.simplices[d]
        )
        acc.marks["B"] = _face_closure(containment.values())
        piece.marks["B"] = _face_closure(containment.keys())
        acc = glue(GlueInput(acc, piece, containment))
    return acc
