"""Period matrices: pairing homology cycles with closed forms by integration.

A cycle is accepted if its boundary cancels, either structurally (terms merge
to zero as chain elements) or geometrically (leftover boundary terms pair up
pointwise on a grid with opposite coefficients).  A form is accepted as
closed if its exterior derivative merges to zero symbolically, else if it
vanishes at 100 deterministic sample points.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chains import Chain, boundary, interior_grid
from .forms import Form, exterior_derivative
from .quad import QuadConfig, QuadResult, integrate_simplex

__all__ = [
    "GeometricCycle",
    "PeriodMatrix",
    "period_matrix",
    "compare_representatives",
    "chain_integral",
    "chain_vanishes_geometrically",
    "form_is_closed",
    "NotClosedError",
]


class NotClosedError(ValueError):
    """Input failed the closedness diagnostics."""


def chain_vanishes_geometrically(c: Chain, tol: float = 1e-10, grid_m: int = 3) -> bool:
    """True when the chain's terms cancel up to pointwise-equal geometry.

    Structurally equal terms already merged in the Chain; what remains is
    grouped by comparing evaluations on an interior grid."""
    terms = c.items()
    if not terms:
        return True
    grid = interior_grid(c.degree, grid_m)
    groups: list[list] = []  # [(fingerprint, coeff_sum)]
    for sigma, n in terms:
        fp = np.array([sigma.evaluate(p) for p in grid])
        for g in groups:
            if g[0].shape == fp.shape and np.abs(g[0] - fp).max() <= tol:
                g[1] += n
                break
        else:
            groups.append([fp, n])
    return all(g[1] == 0 for g in groups)


def form_is_closed(omega: Form, rng_seed: int = 20260808, samples: int = 100) -> bool:
    dw = exterior_derivative(omega)
    if dw.is_zero():
        return True
    rng = np.random.default_rng(rng_seed)
    checked = 0
    attempts = 0
    while checked < samples and attempts < samples * 50:
        attempts += 1
        x = rng.uniform(-2.0, 2.0, omega.ambient)
        try:
            vals = dw.coefficients_at(x)
        except Exception:
            continue  # outside the form's domain; resample
        if any(abs(v) > 1e-8 for v in vals.values()):
            return False
        checked += 1
    return checked == samples


@dataclass
class GeometricCycle:
    name: str
    chain: Chain
    provenance: str = "hand-built"

    def check_closed(self, tol: float = 1e-10):
        if self.chain.degree == 0:
            return
        if not chain_vanishes_geometrically(boundary(self.chain), tol):
            raise NotClosedError(f"cycle {self.name!r}: boundary does not cancel")


@dataclass
class PeriodMatrix:
    cycle_names: list
    form_names: list
    entries: list  # rows of QuadResult

    def values(self) -> np.ndarray:
        return np.array([[e.value for e in row] for row in self.entries])

    def all_converged(self) -> bool:
        return all(e.converged for row in self.entries for e in row)

    def to_dict(self):
        return {
            "cycles": self.cycle_names,
            "forms": self.form_names,
            "values": [[e.value for e in row] for row in self.entries],
            "error_estimates": [[e.error_estimate for e in row] for row in self.entries],
            "converged": self.all_converged(),
        }


def chain_integral(
    c: Chain, omega: Form, tol: float | None = None, config: QuadConfig | None = None
) -> QuadResult:
    """Integral of omega over a chain: coefficient-weighted simplex integrals."""
    value = err = absint = 0.0
    conv = True
    splits = 0
    for sigma, n in sorted(c.items(), key=lambda kv: repr(kv[0].key())):
        r = integrate_simplex(sigma, omega, tol, config)
        value += n * r.value
        err += abs(n) * r.error_estimate
        absint += abs(n) * r.abs_integral_estimate
        conv = conv and r.converged
        splits += r.subdivisions
    return QuadResult(value, err, absint, conv, splits)


def period_matrix(
    cycles: list,
    forms: list,
    tol: float = 1e-8,
    config: QuadConfig | None = None,
    jobs: int = 1,
    check_inputs: bool = True,
    check_seed: int = 20260808,
) -> PeriodMatrix:
    """Pair each cycle with each closed form; rejects non-cycles and
    non-closed forms with diagnostics."""
    # representatives may be singular along boundary faces; convergence there
    # costs one bisection level per digit pair, so allow deep grading
    config = config or QuadConfig(max_depth=80)
    named_forms = [(f"form{i}", w) if isinstance(w, Form) else w for i, w in enumerate(forms)]
    if check_inputs:
        for cyc in cycles:
            cyc.check_closed()
        for name, w in named_forms:
            if not form_is_closed(w, rng_seed=check_seed):
                raise NotClosedError(f"form {name!r} is not closed")
    tasks = [
        (i, j, cyc.chain, w)
        for i, cyc in enumerate(cycles)
        for j, (_, w) in enumerate(named_forms)
    ]

    def run(task):
        i, j, chain, w = task
        return i, j, chain_integral(chain, w, tol, config)

    entries = [[None] * len(named_forms) for _ in cycles]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for i, j, r in pool.map(run, tasks):
                entries[i][j] = r
    else:
        for t in tasks:
            i, j, r = run(t)
            entries[i][j] = r
    return PeriodMatrix([c.name for c in cycles], [n for n, _ in named_forms], entries)


@dataclass
class RepresentativeComparison:
    form_names: list
    periods_1: list
    periods_2: list
    differences: list
    max_difference: float
    all_converged: bool

    def to_dict(self):
        return {
            "forms": self.form_names,
            "periods_first": self.periods_1,
            "periods_second": self.periods_2,
            "differences": self.differences,
            "max_difference": self.max_difference,
            "converged": self.all_converged,
        }


def compare_representatives(
    c1: GeometricCycle,
    c2: GeometricCycle,
    forms: list,
    tol: float = 1e-8,
    config: QuadConfig | None = None,
) -> RepresentativeComparison:
    """Per-form difference of periods of two homologous cycles.

    Homology of c1 - c2 is the caller's assertion; this reports the numeric
    consequence (differences should sit within combined quadrature error)."""
    pm = period_matrix([c1, c2], forms, tol, config)
    p1 = [e.value for e in pm.entries[0]]
    p2 = [e.value for e in pm.entries[1]]
    diffs = [a - b for a, b in zip(p1, p2)]
    return RepresentativeComparison(
        pm.form_names,
        p1,
        p2,
        diffs,
        max(abs(d) for d in diffs) if diffs else 0.0,
        pm.all_converged(),
    )
