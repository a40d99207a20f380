import itertools
import math

import numpy as np
import pytest

from periodlab import chains as ch
from periodlab import forms as fo
from periodlab import quad as qd


def form_d(d, N, coeff="1"):
    return fo.Form(d, N, [(tuple(range(1, d + 1)), coeff)])


def test_rule_weights_positive_interior_and_normalised():
    for d in (1, 2, 3):
        for n in (3, 4):
            pts, w = qd.simplex_rule(d, n)
            assert np.all(w > 0)
            assert w.sum() == pytest.approx(1.0 / math.factorial(d), rel=1e-13)
            assert np.all(pts > 0)
            assert np.all(pts.sum(axis=1) < 1)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_rule_exact_to_degree_seven(d):
    pts, w = qd.simplex_rule(d, 4)
    for alpha in itertools.product(range(8), repeat=d):
        if sum(alpha) > 7:
            continue
        approx = float(w @ np.prod(pts**np.array(alpha), axis=1))
        exact = (
            np.prod([math.factorial(a) for a in alpha]) / math.factorial(sum(alpha) + d)
        )
        assert abs(approx - exact) <= 1e-12 * max(1.0, exact)


def test_identity_volume():
    for d in (1, 2, 3):
        ident = ch.ExprMap([f"a{i}" for i in range(1, d + 1)], d)
        r = qd.integrate_simplex(ident, form_d(d, d), 1e-10)
        assert r.converged
        assert r.value == pytest.approx(1.0 / math.factorial(d), abs=1e-10)


def test_sqrt_graph_integral():
    sigma = ch.ExprMap(["t", "sqrt(t)"], 1)
    omega = fo.Form(1, 2, [((2,), "1")])
    r = qd.integrate_simplex(sigma, omega, 1e-8, qd.QuadConfig(max_depth=60))
    assert r.converged
    assert r.value == pytest.approx(1.0, abs=1e-8)


def test_parabola_sheet():
    sigma = ch.ExprMap(["a1^2", "a2"], 2)
    r = qd.integrate_simplex(sigma, form_d(2, 2), 1e-8)
    assert r.converged
    assert r.value == pytest.approx(1.0 / 3.0, abs=1e-8)


def test_degree_zero_simplex():
    point = ch.AffineSimplex([[2.0, 5.0]])
    omega = fo.Form(0, 2, [((), "a1*a2")])
    r = qd.integrate_simplex(point, omega, 1e-10)
    assert r.converged and r.value == pytest.approx(10.0)


def test_linearity():
    sigma = ch.ExprMap(["a1 + a2^2", "a2"], 2)
    w1 = fo.Form(2, 2, [((1, 2), "a1")])
    w2 = fo.Form(2, 2, [((1, 2), "cos(a2)")])
    r1 = qd.integrate_simplex(sigma, w1, 1e-10)
    r2 = qd.integrate_simplex(sigma, w2, 1e-10)
    r12 = qd.integrate_simplex(sigma, w1 + w2, 1e-10)
    assert abs(r12.value - r1.value - r2.value) <= r1.error_estimate + r2.error_estimate + r12.error_estimate + 1e-12


def test_finite_volume_polynomial_yes():
    sigma = ch.ExprMap(["a1*a2", "a1 + a2", "a2^3"], 2)
    rep = qd.finite_volume_check(sigma, 1e-6)
    assert rep.verdict == "yes"
    assert set(rep.per_index) == {(1, 2), (1, 3), (2, 3)}


def test_finite_volume_sqrt_values():
    sigma = ch.ExprMap(["t", "sqrt(t)"], 1)
    rep = qd.finite_volume_check(sigma, 1e-6)
    assert rep.verdict == "yes"
    assert rep.per_index[(1,)].value == pytest.approx(1.0, abs=1e-6)
    assert rep.per_index[(2,)].value == pytest.approx(1.0, abs=1e-6)


def test_finite_volume_oscillatory_no():
    sigma = ch.ExprMap(["t", "t*sin(1/t)"], 1)
    rep = qd.finite_volume_check(sigma, 1e-6, qd.QuadConfig(max_cells=4000))
    assert rep.verdict == "no"
    assert not rep.per_index[(2,)].converged
    assert rep.per_index[(2,)].diverging
    # the x-coordinate itself is tame
    assert rep.per_index[(1,)].converged


def test_hard_but_integrable_is_not_flagged_no():
    # density ~ t^(-9/10): integrable; at an impossible tolerance the verdict
    # must degrade to inconclusive, never to a false "no"
    sigma = ch.ExprMap(["t", "t^(1/10)"], 1)
    cfg = qd.QuadConfig(rel_tol=1e-15, abs_tol=1e-15, max_cells=2500)
    rep = qd.finite_volume_check(sigma, None if False else 1e-15, cfg)
    assert rep.verdict == "inconclusive"


def test_prism_degenerate_point():
    # constant simplex at p: the prism image is the segment [0, p], so the
    # pullback density vanishes identically
    point = ch.ExprMap(["1", "0"], 1)
    w2 = fo.Form(2, 2, [((1, 2), "1")])
    r = qd.integrate_prism(point, "1 - t", w2, 1e-10)
    assert r.converged and abs(r.value) <= 1e-12


def test_prism_half_disk():
    sigma = ch.ExprMap(["cos(pi*t)", "sin(pi*t)"], 1)
    w2 = fo.Form(2, 2, [((1, 2), "1")])
    r = qd.integrate_prism(sigma, "1 - t", w2, 1e-8)
    assert r.converged
    assert r.value == pytest.approx(math.pi / 2, abs=1e-6)


def test_prism_agrees_with_direct_cone():
    rng = np.random.default_rng(11)
    for _ in range(3):
        c = rng.uniform(-1, 1, size=6)
        sigma = ch.ExprMap(
            [f"{c[0]:.3f} + {c[1]:.3f}*t + {c[2]:.3f}*t^2".replace("-", "- ").replace("+ -", "- "),
             f"{c[3]:.3f} + {c[4]:.3f}*t + {c[5]:.3f}*t^2".replace("-", "- ").replace("+ -", "- ")],
            1,
        )
        w2 = fo.Form(2, 2, [((1, 2), "1 + a1")])
        rp = qd.integrate_prism(sigma, "1 - t", w2, 1e-9)
        direct_cfg = qd.QuadConfig(route_cones_via_prism=False)
        rc = qd.integrate_simplex(ch.Cone(sigma), w2, 1e-9, direct_cfg)
        assert rp.converged and rc.converged
        assert abs(rp.value - rc.value) <= rp.error_estimate + rc.error_estimate + 1e-9


def test_cone_routing_matches_direct():
    sigma = ch.ExprMap(["cos(pi*t)", "sin(pi*t)"], 1)
    w2 = fo.Form(2, 2, [((1, 2), "1")])
    routed = qd.integrate_simplex(ch.Cone(sigma), w2, 1e-9)
    direct = qd.integrate_simplex(
        ch.Cone(sigma), w2, 1e-9, qd.QuadConfig(route_cones_via_prism=False)
    )
    assert abs(routed.value - direct.value) <= 1e-8


def test_subdivision_invariance():
    sigma = ch.ExprMap(["a1 + a2^2", "sin(a2)*a1"], 2)
    omega = fo.Form(2, 2, [((1, 2), "1 + a1")])
    tol = 1e-8
    direct = qd.integrate_simplex(sigma, omega, tol)
    sd = ch.barycentric_subdivide(ch.Chain.of(sigma))
    total = sum(n * qd.integrate_simplex(s, omega, tol).value for s, n in sd.items())
    assert abs(total - direct.value) <= 10 * tol


CORPUS = [
    ch.ExprMap(["t", "t^2"], 1),
    ch.ExprMap(["cos(pi*t)", "sin(pi*t)"], 1),
    ch.ExprMap(["t", "sqrt(t)"], 1),
    ch.ExprMap(["sqrt(t)", "t"], 1),
    ch.ExprMap(["t^(3/2)", "1 - t"], 1),
    ch.ExprMap(["a1", "a2"], 2),
    ch.ExprMap(["a1^2", "a2"], 2),
    ch.ExprMap(["a1 + a2", "a1*a2"], 2),
    ch.ExprMap(["a1", "a2", "sqrt(a1 + a2)"], 2),
    ch.ExprMap(["sin(a1)", "a2*a1", "a2^2"], 2),
]


def test_cone_stability_of_finite_volume():
    # every finite-volume corpus member keeps finite volume after coning
    for sigma in CORPUS:
        base = qd.finite_volume_check(sigma, 1e-5)
        assert base.verdict == "yes", sigma.components
        coned = qd.finite_volume_check(ch.Cone(sigma), 1e-4)
        assert coned.verdict == "yes", sigma.components


def test_reparametrisation_invariance():
    # orientation-preserving change of variables leaves integrals unchanged
    sigma1 = ch.ExprMap(["cos(pi*t)", "sin(pi*t)"], 1)
    rho1 = ch.ExprMap(["t^2"], 1)
    omega1 = fo.Form(1, 2, [((1,), "-a2"), ((2,), "a1")])
    a = qd.integrate_simplex(sigma1, omega1, 1e-9)
    b = qd.integrate_simplex(ch.Composed(sigma1, rho1), omega1, 1e-9)
    assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate + 1e-9

    sigma2 = ch.ExprMap(["a1 + a2^2", "a2"], 2)
    rho2 = ch.ExprMap(["a1^2 + a1*a2", "a1*a2 + a2^2"], 2)  # radial squaring
    omega2 = fo.Form(2, 2, [((1, 2), "1 + a1")])
    a = qd.integrate_simplex(sigma2, omega2, 1e-9)
    b = qd.integrate_simplex(ch.Composed(sigma2, rho2), omega2, 1e-8, qd.QuadConfig(max_depth=60))
    assert abs(a.value - b.value) <= 1e-7


def test_converged_respects_tolerance_contract():
    sigma = ch.ExprMap(["t", "sqrt(t)"], 1)
    omega = fo.Form(1, 2, [((2,), "1")])
    r = qd.integrate_simplex(sigma, omega, 1e-6)
    assert r.converged
    assert r.error_estimate <= max(1e-6, 1e-6 * abs(r.value))


def test_interior_evaluation_never_touches_boundary():
    # a map whose derivative blows up on the whole boundary: every rule node
    # must stay interior (no domain error), whatever the verdict
    sigma = ch.ExprMap(["a1", "a2", "sqrt(a1) + sqrt(a2) + sqrt(1 - a1 - a2)"], 2)
    rep = qd.finite_volume_check(sigma, 1e-4, qd.QuadConfig(max_cells=1500))
    assert rep.verdict in ("yes", "inconclusive")
