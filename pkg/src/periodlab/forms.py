"""Differential forms on R^N: exterior derivative, pullback, A+B splitting.

A degree-p form is a merged list of (strictly increasing multi-index,
coefficient expression) terms; coefficients are DSL expressions in the ambient
coordinates ``a1..aN``.  Pullback along a simplex evaluator is computed from
exact symbolic Jacobians, one minor determinant per term.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .chains import PrismMap, SingularSimplex

__all__ = [
    "Form",
    "exterior_derivative",
    "pullback_density",
    "pullback_components",
    "DecompAB",
    "decompose_AB",
]


def _merge_terms(raw, degree, ambient):
    """Combine signed coefficient contributions per multi-index, dropping
    terms whose combined coefficient cancels structurally."""
    pools: dict[tuple, list] = {}
    for idx, sign, coeff in raw:
        idx = tuple(idx)
        if len(idx) != degree or list(idx) != sorted(set(idx)):
            raise ValueError(f"multi-index {idx} must be strictly increasing")
        if idx and not (1 <= idx[0] and idx[-1] <= ambient):
            raise ValueError(f"multi-index {idx} out of range for ambient {ambient}")
        pool = pools.setdefault(idx, [])
        for k, (s2, c2) in enumerate(pool):
            if c2 == coeff:
                pool[k] = (s2 + sign, c2)
                break
        else:
            pool.append((sign, coeff))
    terms = []
    for idx in sorted(pools):
        addends = [(s, c) for s, c in pools[idx] if s != 0]
        if not addends:
            continue
        acc = None
        for s, c in addends:
            piece = ex.mul(ex.const(s), c) if s != 1 else c
            acc = piece if acc is None else ex.add(acc, piece)
        if ex.is_structurally_zero(acc):
            continue
        terms.append((idx, acc))
    return tuple(terms)


class Form:
    """Differential form of fixed degree on R^ambient."""

    def __init__(self, degree: int, ambient: int, terms):
        if not 0 <= degree <= ambient:
            raise ValueError("form degree must lie between 0 and the ambient dimension")
        self.degree = degree
        self.ambient = ambient
        parsed = []
        for idx, coeff in terms:
            if isinstance(coeff, str):
                coeff = ex.parse(coeff, ambient)
            parsed.append((idx, 1, coeff))
        self.terms = _merge_terms(parsed, degree, ambient)
        self._fns = [ex.compile_expr(c) for _, c in self.terms]
        self._vfns = [ex.compile_vec(c) for _, c in self.terms]

    @classmethod
    def _from_signed(cls, degree, ambient, raw):
        f = cls.__new__(cls)
        f.degree = degree
        f.ambient = ambient
        f.terms = _merge_terms(raw, degree, ambient)
        f._fns = [ex.compile_expr(c) for _, c in f.terms]
        f._vfns = [ex.compile_vec(c) for _, c in f.terms]
        return f

    def is_zero(self) -> bool:
        return not self.terms

    def coefficients_at(self, x) -> dict:
        return {idx: fn(x) for (idx, _), fn in zip(self.terms, self._fns)}

    def __add__(self, other: "Form") -> "Form":
        if (other.degree, other.ambient) != (self.degree, self.ambient):
            raise ValueError("cannot add forms of different degree/ambient")
        raw = [(idx, 1, c) for idx, c in self.terms]
        raw += [(idx, 1, c) for idx, c in other.terms]
        return Form._from_signed(self.degree, self.ambient, raw)

    def scale(self, q) -> "Form":
        raw = [(idx, 1, ex.mul(ex.const(q), c)) for idx, c in self.terms]
        return Form._from_signed(self.degree, self.ambient, raw)

    def __repr__(self):
        body = " + ".join(f"[{ex.to_string(c)}] d{list(i)}" for i, c in self.terms) or "0"
        return f"<Form deg={self.degree} {body}>"


def exterior_derivative(omega: Form) -> Form:
    """d(h dx_I) = sum_j (dh/dx_j) dx_j ^ dx_I, normalised to increasing
    indices; structurally cancelling coefficients are dropped on merge."""
    raw = []
    for idx, coeff in omega.terms:
        for j in range(1, omega.ambient + 1):
            if j in idx:
                continue
            dcoeff = ex.diff(coeff, j)
            if dcoeff.kind == "const" and dcoeff.value == 0:
                continue
            pos = sum(1 for i in idx if i < j)
            new_idx = tuple(sorted(idx + (j,)))
            raw.append((new_idx, (-1) ** pos, dcoeff))
    return Form._from_signed(omega.degree + 1, omega.ambient, raw)


def _minor_det(jac: np.ndarray, rows, cols) -> float:
    sub = jac[np.ix_(rows, cols)]
    n = sub.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return sub[0, 0]
    if n == 2:
        return sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
    if n == 3:
        return (
            sub[0, 0] * (sub[1, 1] * sub[2, 2] - sub[1, 2] * sub[2, 1])
            - sub[0, 1] * (sub[1, 0] * sub[2, 2] - sub[1, 2] * sub[2, 0])
            + sub[0, 2] * (sub[1, 0] * sub[2, 1] - sub[1, 1] * sub[2, 0])
        )
    return float(np.linalg.det(sub))


def pullback_components(sigma: SingularSimplex, omega: Form, point) -> dict:
    """All components of sigma^*(omega) at an interior point of the domain,
    keyed by the strictly increasing subsets of domain coordinates (1-based)."""
    if omega.ambient != sigma.ambient:
        raise ValueError("form and simplex live in different ambient spaces")
    k = sigma.dim
    p = omega.degree
    if p > k:
        return {}
    x = sigma.evaluate(point)
    jac = sigma.jacobian(point) if p > 0 else None
    coeffs = [fn(x) for fn in omega._fns]
    out = {}
    for cols in itertools.combinations(range(k), p):
        total = 0.0
        for (idx, _), c in zip(omega.terms, coeffs):
            rows = [i - 1 for i in idx]
            total += c * _minor_det(jac, rows, list(cols)) if p > 0 else c
        out[tuple(i + 1 for i in cols)] = total
    return out


def pullback_density(sigma: SingularSimplex, omega: Form, point) -> float:
    """Coefficient of sigma^*(omega) against da_1 ^ ... ^ da_d (top degree)."""
    if omega.degree != sigma.dim:
        raise ValueError("pullback density needs deg(omega) == dim(sigma)")
    comps = pullback_components(sigma, omega, point)
    return comps[tuple(range(1, sigma.dim + 1))]


def _det_many(sub: np.ndarray) -> np.ndarray:
    p = sub.shape[1]
    if p == 0:
        return np.ones(sub.shape[0])
    if p == 1:
        return sub[:, 0, 0]
    if p == 2:
        return sub[:, 0, 0] * sub[:, 1, 1] - sub[:, 0, 1] * sub[:, 1, 0]
    return np.linalg.det(sub)


def pullback_top_many(sigma: SingularSimplex, omega: Form, points: np.ndarray) -> np.ndarray:
    """Batch top-degree pullback densities at many interior points."""
    d = sigma.dim
    if omega.degree != d:
        raise ValueError("pullback density needs deg(omega) == dim(sigma)")
    pts = np.asarray(points, dtype=float)
    x = sigma.evaluate_many(pts)
    out = np.zeros(pts.shape[0])
    if not omega.terms:
        return out
    jac = sigma.jacobian_many(pts) if d > 0 else None
    cols = x.T
    for (idx, _), vf in zip(omega.terms, omega._vfns):
        c = vf(cols)
        if d > 0:
            rows = [i - 1 for i in idx]
            c = c * _det_many(jac[:, rows, :])
        out += c
    return out


@dataclass
class DecompAB:
    """Split of the prism pullback tau^*(eta) into the time-independent part
    A (pure spatial top form) and the dt-carrying part B."""

    sigma: SingularSimplex
    profile: object  # Expr f(t)
    eta: Form
    C: Form

    def __post_init__(self):
        self.prism = PrismMap(self.sigma, self.profile)
        self._f = ex.compile_expr(self.prism.profile)
        self._df = ex.compile_expr(ex.diff(self.prism.profile, 1))

    def A_density(self, t: float, b) -> float:
        """Component of A against db_1 ^ ... ^ db_d at (t, b)."""
        d = self.sigma.dim
        x = self.prism.evaluate(np.concatenate(([t], b)))
        h = self.eta._fns[0](x)
        jac = self.sigma.jacobian(b)
        det = _minor_det(jac, list(range(d)), list(range(d)))
        return h * self._f((t,)) ** d * det

    def B_density(self, t: float, b) -> dict:
        """Components of B against dt ^ db_J for (d-1)-subsets J at (t, b).

        Expanded per the product-rule splitting of d(tau_1)^...^d(tau_d):
        B = (h o tau) sum_i (-1)^{i-1} f' f^{d-1} sigma_i dt ^ dsigma_(omit i),
        i.e. the coefficient rides at the prism image while the differentials
        are those of the unscaled sigma."""
        d = self.sigma.dim
        fval = self._f((t,))
        x = self.prism.evaluate(np.concatenate(([t], b)))
        h = self.eta._fns[0](x)
        sig = self.sigma.evaluate(b)
        jac = self.sigma.jacobian(b)
        lead = self._df((t,)) * fval ** (d - 1) * h
        out = {}
        for cols in itertools.combinations(range(d), d - 1):
            total = 0.0
            for i in range(1, d + 1):
                rows = [r for r in range(d) if r != i - 1]
                total += (-1) ** (i - 1) * sig[i - 1] * _minor_det(jac, rows, list(cols))
            out[tuple(c + 1 for c in cols)] = lead * total
        return out

    def direct(self, t: float, b) -> dict:
        """Components of the direct pullback of eta along the prism map,
        keyed over (t, b)-coordinate subsets (1 = t)."""
        return pullback_components(self.prism, self.eta, np.concatenate(([t], b)))

    def combined(self, t: float, b) -> dict:
        """A + B assembled in the same component convention as direct()."""
        d = self.sigma.dim
        out = {tuple(range(2, d + 2)): self.A_density(t, b)}
        for j, v in self.B_density(t, b).items():
            out[(1,) + tuple(i + 1 for i in j)] = v
        return out


def decompose_AB(sigma: SingularSimplex, profile, eta: Form) -> DecompAB:
    """Split tau^*(eta) for tau(t,b) = f(t) sigma(b) and a single-term
    eta = h dx_1^...^dx_d into A + B with

        A = tau^*(h) f^d  dsigma_1^...^dsigma_d,
        B = dt ^ (df/dt) f^{d-1} tau^*(C),
        C = h sum_i (-1)^{i-1} x_i dx_1^...^(omit i)...^dx_d.
    """
    d = sigma.dim
    if len(eta.terms) != 1 or eta.terms[0][0] != tuple(range(1, d + 1)):
        raise ValueError("eta must be a single term h dx_1^...^dx_d")
    if eta.degree != d:
        raise ValueError("eta must have degree equal to dim(sigma)")
    profile = ex.parse(profile, 1) if isinstance(profile, str) else profile
    h = eta.terms[0][1]
    raw = []
    for i in range(1, d + 1):
        idx = tuple(j for j in range(1, d + 1) if j != i)
        raw.append((idx, (-1) ** (i - 1), ex.mul(h, ex.var(i))))
    c_form = Form._from_signed(d - 1, eta.ambient, raw)
    return DecompAB(sigma, profile, eta, c_form)
