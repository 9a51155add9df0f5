import pytest
from hypothesis import given, settings, strategies as st

from orbitdec.lattice import (IntMatrix, hermite_normal_form, od_cyclic_matrix, od_gcd_full, primitive_completion,
                              smith_normal_form, solve_row_system, stab2_generators, tcp_zn, vector_gcd)

from conftest import random_unimodular, random_vector
from oracles import brute_orbit_power, brute_tcp

M = IntMatrix.of


def matrices(max_n=5, bound=9):
    return st.integers(1, max_n).flatmap(
        lambda m: st.integers(1, max_n).flatmap(
            lambda n: st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n), min_size=m, max_size=m)
        )
    ).map(IntMatrix.of)


def test_matrix_basics():
    A = M([[2, 1], [1, 1]])
    assert A.det() == 1
    assert A @ A.inverse() == IntMatrix.identity(2)
    assert A ** -2 == (A.inverse()) @ (A.inverse())
    assert (1, 0) @ A == (2, 1)
    B = M([[1, 2, 0], [0, 1, 0], [3, 0, 1]])
    assert B.det() == 1 and B @ B.inverse() == IntMatrix.identity(3)
    with pytest.raises(ValueError):
        M([[2, 0], [0, 1]]).inverse()


def test_smith_examples():
    assert smith_normal_form(IntMatrix.diagonal([2, 3])).diagonal == (1, 6)
    assert smith_normal_form(IntMatrix.zero(2, 3)).diagonal == (0, 0)
    s = smith_normal_form(IntMatrix.identity(3))
    assert s.D == IntMatrix.identity(3)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_smith_properties(A):
    s = smith_normal_form(A)
    assert s.U @ A @ s.V == s.D
    assert s.U.is_unimodular() and s.V.is_unimodular()
    d = [x for x in s.diagonal if x]
    assert all(x > 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
    for i in range(s.D.nrows):
        for j in range(s.D.ncols):
            if i != j:
                assert s.D[i, j] == 0


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_hermite_properties(A):
    H, U = hermite_normal_form(A)
    assert U @ A == H
    assert U.is_unimodular()


def test_solve_row_system_examples():
    D = IntMatrix.diagonal([2, 2])
    assert solve_row_system(D, (4, -2)) == (2, -1)
    assert solve_row_system(D, (1, 0)) is None
    assert solve_row_system(M([[0, -1], [0, 0]]), (0, 5)) == (-5, 0)


def test_solve_row_system_random(rng):
    for _ in range(200):
        n = rng.randint(1, 3)
        A = M([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)])
        x = random_vector(rng, n)
        b = x @ A
        y = solve_row_system(A, b)
        assert y is not None and y @ A == b


def test_tcp_examples():
    I = IntMatrix.identity(2)
    assert tcp_zn(I, (1, 2), (1, 2)).witness == (0, 0)
    assert tcp_zn(I, (1, 2), (2, 2)).is_no
    swap = M([[0, 1], [1, 0]])
    assert tcp_zn(swap, (0, 0), (1, -1)).witness == (1, 0)
    assert tcp_zn(swap, (0, 0), (1, 0)).is_no
    with pytest.raises(ValueError):
        tcp_zn(M([[2, 0], [0, 1]]), (0, 0), (0, 0))


def test_tcp_against_brute_force(rng):
    for _ in range(150):
        n = rng.randint(1, 3)
        A = random_unimodular(rng, n)
        u = random_vector(rng, n)
        x0 = random_vector(rng, n, 3)
        v = tuple(a + b for a, b in zip(u, x0 @ (IntMatrix.identity(n) - A))) if rng.random() < 0.5 else random_vector(rng, n)
        d = tcp_zn(A, u, v)
        brute = brute_tcp(A, u, v)
        if brute is not None:
            assert d.is_yes
        if d.is_yes:
            x = d.witness
            assert tuple(a + b for a, b in zip(u, x @ (IntMatrix.identity(n) - A))) == v
        else:
            assert brute is None


def test_gcd_examples():
    d = od_gcd_full((2, 4), (6, 2))
    assert d.is_yes and (2, 4) @ d.witness == (6, 2) and d.witness.is_unimodular()
    assert od_gcd_full((1, 0), (2, 0)).is_no
    d = od_gcd_full((0, 0), (0, 0))
    assert d.is_yes and d.witness.is_unimodular()


def test_gcd_random(rng):
    for _ in range(100):
        n = rng.randint(1, 4)
        u = random_vector(rng, n, 9)
        W = random_unimodular(rng, n, 3)
        assert od_gcd_full(u, u @ W).is_yes
        v = random_vector(rng, n, 9)
        assert od_gcd_full(u, v).is_yes == (vector_gcd(u) == vector_gcd(v))


def test_primitive_completion():
    g, W = primitive_completion((6, 10, 15))
    assert g == 1 and (6, 10, 15) @ W == (1, 0, 0) and W.is_unimodular()


def test_od_cyclic_examples():
    T = M([[1, 1], [0, 1]])
    assert od_cyclic_matrix(T, (1, 0), (1, -3)).witness == -3
    assert od_cyclic_matrix(T, (1, 0), (2, 0)).is_no
    assert od_cyclic_matrix(M([[2, 1], [1, 1]]), (1, 0), (1, 0)).witness == 0
    fib = M([[1, 1], [1, 0]])
    v = (1, 0) @ (fib**31)
    assert od_cyclic_matrix(fib, (1, 0), v).witness == 31
    rot = M([[0, 1], [-1, 0]])
    assert od_cyclic_matrix(rot, (1, 0), (-1, 0)).witness == 2


def test_od_cyclic_against_brute_force(rng):
    for _ in range(120):
        n = rng.choice([2, 3])
        A = random_unimodular(rng, n, 3)
        u = random_vector(rng, n, 3)
        if rng.random() < 0.6:
            k = rng.randint(-20, 20)
            v = u @ (A**k)
        else:
            v = random_vector(rng, n, 3)
        brute = brute_orbit_power(A, u, v, 30)
        d = od_cyclic_matrix(A, u, v)
        if brute:
            assert d.is_yes and d.witness == min(brute, key=lambda k: (abs(k), k < 0))
        if d.is_yes:
            assert u @ (A**d.witness) == tuple(v)
            if abs(d.witness) <= 30:
                assert brute
        else:
            assert not brute


def test_od_cyclic_long_unipotent_orbit():
    # large |k| on a unipotent 3x3 block: coordinates are quadratic in k
    A = M([[1, 1, 0], [0, 1, 1], [0, 0, 1]])
    v = (1, 0, 0) @ (A**-400)
    assert od_cyclic_matrix(A, (1, 0, 0), v).witness == -400
    assert od_cyclic_matrix(A, (1, 0, 0), (1, 5, 1)).is_no


def test_stab2_examples():
    assert stab2_generators((1, 0)) == [M([[1, 0], [1, 1]]), M([[1, 0], [0, -1]])]
    for v in [(0, 1), (2, 0), (3, -5)]:
        for G in stab2_generators(v):
            assert v @ G == v and G.is_unimodular()
    assert stab2_generators((2, 0)) == stab2_generators((1, 0))
    with pytest.raises(ValueError):
        stab2_generators((0, 0))


def test_stab2_words_fix_vector(rng):
    for _ in range(30):
        v = random_vector(rng, 2, 9)
        if not any(v):
            continue
        gens = stab2_generators(v)
        W = IntMatrix.identity(2)
        for _ in range(rng.randint(1, 8)):
            g = rng.choice(gens)
            W = W @ (g if rng.random() < 0.5 else g.inverse())
        assert v @ W == v
