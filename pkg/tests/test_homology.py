import itertools
import random

import pytest

from periodlab import homology as hm


def hollow_triangle():
    return hm.SimplicialComplex([(0, 1), (1, 2), (0, 2)])


def torus_7():
    tris = [tuple(sorted((i % 7, (i + 1) % 7, (i + 3) % 7))) for i in range(7)]
    tris += [tuple(sorted((i % 7, (i + 2) % 7, (i + 3) % 7))) for i in range(7)]
    return hm.SimplicialComplex(tris)


def rp2_6():
    return hm.SimplicialComplex(
        [
            (1, 2, 3), (1, 2, 4), (1, 3, 5), (1, 4, 6), (1, 5, 6),
            (2, 3, 6), (2, 4, 5), (2, 5, 6), (3, 4, 5), (3, 4, 6),
        ]
    )


def sphere():
    return hm.SimplicialComplex(list(itertools.combinations(range(4), 3)))


def test_complex_closure_and_ordering():
    K = hm.SimplicialComplex([(2, 0, 1)])
    assert K.simplices[0] == [(0,), (1,), (2,)]
    assert K.simplices[1] == [(0, 1), (0, 2), (1, 2)]
    assert (0, 1) in K and (0, 1, 2) in K


def test_boundary_matrix_hollow_triangle():
    K = hollow_triangle()
    M = hm.boundary_matrix(K, 1)
    assert len(M) == 3 and len(M[0]) == 3
    for j in range(3):
        assert sum(M[i][j] for i in range(3)) == 0  # each edge: head - tail


def test_boundary_composition_vanishes():
    for K in (hm.SimplicialComplex([(0, 1, 2)]), torus_7(), rp2_6()):
        for d in range(2, K.dim + 1):
            m1 = hm.boundary_matrix(K, d - 1)
            m2 = hm.boundary_matrix(K, d)
            prod = hm._mat_mul(m1, m2)
            assert all(all(x == 0 for x in row) for row in prod)


def test_torus_boundary_matrix_shape_and_incidence():
    K = torus_7()
    M = hm.boundary_matrix(K, 2)
    assert len(M) == 21 and len(M[0]) == 14
    for row in M:  # every edge lies in exactly two triangles
        nz = [x for x in row if x != 0]
        assert len(nz) == 2 and all(abs(x) == 1 for x in nz)


def test_snf_examples():
    s = hm.smith_normal_form([[2, 0], [0, 3]])
    assert s.diagonal == [1, 6]
    s = hm.smith_normal_form([[0, 0], [0, 0]])
    assert s.diagonal == [0, 0] and s.rank == 0
    s = hm.smith_normal_form(hm.boundary_matrix(hollow_triangle(), 1))
    assert s.diagonal == [1, 1, 0]


def test_snf_properties_random():
    rng = random.Random(42)
    for _ in range(60):
        m = rng.randint(1, 6)
        n = rng.randint(1, 6)
        M = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
        s = hm.smith_normal_form(M)
        S = hm._mat_mul(hm._mat_mul(s.U, M), s.V)
        for i in range(m):
            for j in range(n):
                want = s.diagonal[i] if i == j and i < len(s.diagonal) else 0
                assert S[i][j] == want
        nz = [x for x in s.diagonal if x != 0]
        assert all(x > 0 for x in nz)
        assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
        assert hm._mat_mul(s.U, s.U_inv) == hm._identity(m)
        assert hm._mat_mul(s.V, s.V_inv) == hm._identity(n)


def test_homology_classics():
    assert hm.homology(hollow_triangle()).betti == [1, 1]
    assert hm.homology(hm.SimplicialComplex([(0, 1, 2)])).betti == [1, 0, 0]
    assert hm.homology(sphere()).betti == [1, 0, 1]
    h = hm.homology(torus_7())
    assert h.betti == [1, 2, 1]
    assert all(not t for t in h.torsion.values())
    h = hm.homology(rp2_6())
    assert h.betti == [1, 0, 0]
    assert h.torsion[1] == [2]


def test_representatives_are_cycles():
    for K in (hollow_triangle(), torus_7(), rp2_6(), sphere()):
        h = hm.homology(K)
        for d, reps in h.representatives.items():
            if d == 0:
                continue
            M = hm.boundary_matrix(K, d)
            for rep in reps:
                vec = [0] * K.n_cells(d)
                for simplex, coeff in rep:
                    vec[K.index_of(simplex)] = coeff
                out = [sum(M[i][j] * vec[j] for j in range(len(vec))) for i in range(len(M))]
                assert all(x == 0 for x in out)


def test_betti_invariant_under_subdivision():
    for K in (hollow_triangle(), rp2_6(), sphere()):
        Ksd = hm.barycentric_subdivide_complex(K)
        assert hm.homology(Ksd).betti == hm.homology(K).betti
        assert hm.homology(Ksd).torsion == hm.homology(K).torsion


def test_subdivision_counts():
    K = hm.SimplicialComplex([(0, 1, 2)])
    Ksd = hm.barycentric_subdivide_complex(K)
    assert Ksd.n_cells(2) == 6
    assert Ksd.n_cells(0) == 7
    # non-pure complex: a triangle with a dangling edge
    K2 = hm.SimplicialComplex([(0, 1, 2), (2, 3)])
    K2sd = hm.barycentric_subdivide_complex(K2)
    assert hm.homology(K2sd).betti == hm.homology(K2).betti


def test_euler_characteristic_matches_betti():
    for K in (hollow_triangle(), torus_7(), rp2_6(), sphere()):
        h = hm.homology(K)
        assert K.euler_characteristic() == sum(
            (-1) ** d * b for d, b in enumerate(h.betti)
        )


def test_boundary_matrix_degree_out_of_range():
    with pytest.raises(ValueError):
        hm.boundary_matrix(hollow_triangle(), 2)
    with pytest.raises(ValueError):
        hm.boundary_matrix(hollow_triangle(), 0)
