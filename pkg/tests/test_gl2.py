import itertools

import pytest

from orbitdec.coset_enum import todd_coxeter
from orbitdec.gl2 import (GENERATOR_MATRICES, GL2_PRESENTATION, I2, NAMES, P_MATRIX, Q_MATRIX, AmalgamWord,
                          D12Element, NotInKernel, cip_gl2, enumerate_kernel_words, evaluate_kernel_word,
                          format_kernel_word, kernel_membership, kernel_rewrite, matrix_to_word, od_gl2_subgroup,
                          project_d12, stabilizer_word, word_to_matrix)
from orbitdec.lattice import IntMatrix, od_cyclic_matrix, od_gcd_full
from orbitdec.stallings import cip_free
from orbitdec.words import FreeWord, parse_word

from conftest import random_unimodular, random_word

M = IntMatrix.of
PINNED_R_WORD = "P Q^-1 P^-1 Q P Q^-1 P^-1 Q"


def A(text):
    return AmalgamWord.parse(text)


def test_word_to_matrix_examples():
    assert word_to_matrix(A("x6 x4^-1")) == M([[1, 1], [0, 1]])
    assert word_to_matrix(A("x6^-1 x4")) == M([[1, 0], [1, 1]])
    assert matrix_to_word(I2).letters == ()
    assert word_to_matrix(A("[x6,x4]")) == P_MATRIX
    assert word_to_matrix(A("[x6^2,x4]")) == Q_MATRIX


def test_presentation_relators_hold():
    for r in GL2_PRESENTATION.relators:
        assert word_to_matrix(r) == I2
    assert len(GL2_PRESENTATION.relators) == 8


def test_amalgam_word_normalises_exponents():
    assert A("x6^5").letters == (("x6", -1),)
    assert A("x4^2 x4^2").letters == ()
    assert A("t4 t4").letters == ()


def test_matrix_word_round_trip(rng):
    for _ in range(300):
        Mx = random_unimodular(rng, 2, 9)
        assert word_to_matrix(matrix_to_word(Mx)) == Mx


def test_projection_examples():
    assert project_d12(P_MATRIX).is_identity
    assert project_d12(A("x6^-1 x4")) == D12Element(0, 1)
    assert project_d12(A("t4")) == D12Element(1, 0)


def test_projection_is_a_homomorphism(rng):
    for _ in range(200):
        w1, w2 = random_word(rng, 4, 10), random_word(rng, 4, 10)
        assert project_d12(w1 * w2) == project_d12(w1) * project_d12(w2)
        assert project_d12(word_to_matrix(w1)) == project_d12(w1)


def test_d12_relations():
    t, x = D12Element(1, 0), D12Element(0, 1)
    assert x * t == t * x.inverse()
    e = D12Element()
    p = e
    for _ in range(12):
        p = p * x
    assert p.is_identity
    elements = {D12Element(r, k) for r in (0, 1) for k in range(12)}
    assert len(elements) == 24
    assert {project_d12(word_to_matrix(matrix_to_word(M([[1, 0], [k, 1]])))) for k in range(12)} == {
        D12Element(0, k) for k in range(12)}


def test_kernel_index_is_24():
    t = todd_coxeter(GL2_PRESENTATION, [A("[x6,x4]").to_free(), A("[x6^2,x4]").to_free()])
    assert t.index == 24


def test_kernel_rewrite_examples():
    assert kernel_rewrite(P_MATRIX) == FreeWord(2, (1,))
    assert kernel_rewrite(Q_MATRIX) == FreeWord(2, (2,))
    with pytest.raises(NotInKernel):
        kernel_rewrite(M([[1, 1], [0, 1]]))


def test_kernel_rewrite_round_trip(rng):
    for _ in range(200):
        w = random_word(rng, 2, 10)
        Mx = evaluate_kernel_word(w)
        assert kernel_membership(Mx)
        assert evaluate_kernel_word(kernel_rewrite(Mx)) == Mx
        # the kernel is free on P, Q so the rewrite is the word itself
        assert kernel_rewrite(Mx) == w


def test_stabilizer_word_is_pinned():
    R = stabilizer_word()
    assert format_kernel_word(R) == PINNED_R_WORD
    assert evaluate_kernel_word(R) == M([[1, 0], [12, 1]])
    assert word_to_matrix(A("x6^-1 x4")) ** 12 == M([[1, 0], [12, 1]])


def test_stabilizer_claim_on_random_words(rng):
    R = stabilizer_word()
    powers = {R**k for k in range(-2, 3)}
    for _ in range(500):
        w = random_word(rng, 2, 8)
        fixes = (1, 0) @ evaluate_kernel_word(w) == (1, 0)
        assert fixes == (w in powers)


def test_cip_gl2_examples():
    d = cip_gl2(I2, [I2], I2, [I2])
    assert d.is_yes and d.witness.element == I2
    d = cip_gl2(I2, [P_MATRIX], I2, [Q_MATRIX])
    assert d.is_yes and d.witness.element == I2
    # P<P> = <P> contains the identity, so it meets <Q>
    assert cip_gl2(P_MATRIX, [P_MATRIX], I2, [Q_MATRIX]).is_yes
    assert cip_gl2(P_MATRIX, [I2], I2, [Q_MATRIX]).is_no
    assert cip_gl2(P_MATRIX, [Q_MATRIX], I2, [Q_MATRIX]).is_no
    T, U = M([[1, 1], [0, 1]]), M([[1, 0], [1, 1]])
    d = cip_gl2(I2, [T], I2, [U])
    assert d.is_yes and d.witness.element == I2


def test_cip_gl2_matches_free_kernel(rng):
    # inside the free kernel, cip_gl2 must agree with Stallings on P, Q words
    for _ in range(25):
        a = [random_word(rng, 2, 3, 1) for _ in range(rng.randint(1, 2))]
        b = [random_word(rng, 2, 3, 1) for _ in range(rng.randint(1, 2))]
        x, y = random_word(rng, 2, 3), random_word(rng, 2, 3)
        ev = evaluate_kernel_word
        d = cip_gl2(ev(x), [ev(w) for w in a], ev(y), [ev(w) for w in b])
        assert d.answer == cip_free(x, a, y, b).answer
        if d.is_yes:
            assert d.certificate_checked


def _word_eval(gens, expr):
    out = I2
    for j in expr:
        out = out @ (gens[j - 1] if j > 0 else gens[-j - 1].inverse())
    return out


def test_od_gl2_examples():
    T = M([[1, 1], [0, 1]])
    d = od_gl2_subgroup([T], (1, 0), (1, 7))
    assert d.is_yes and d.witness.matrix == T**7 and od_cyclic_matrix(T, (1, 0), (1, 7)).witness == 7
    assert od_gl2_subgroup([T], (1, 0), (0, 1)).is_no
    gens = [GENERATOR_MATRICES[n] for n in NAMES]
    d = od_gl2_subgroup(gens, (2, 4), (6, 2))
    assert d.is_yes and od_gcd_full((2, 4), (6, 2)).is_yes
    assert (2, 4) @ _word_eval(gens, d.witness.word) == (6, 2)


def test_od_gl2_against_bounded_search(rng):
    for _ in range(25):
        gens = [random_unimodular(rng, 2, 2) for _ in range(rng.randint(1, 2))]
        u = (rng.randint(-3, 3), rng.randint(-3, 3))
        if not any(u):
            continue
        reach = {u}
        frontier = {u}
        for _ in range(6):
            frontier = {f @ g for f in frontier for g in gens + [g.inverse() for g in gens]} - reach
            reach |= frontier
        targets = rng.sample(sorted(reach), min(3, len(reach))) + [(rng.randint(-3, 3), rng.randint(-3, 3))]
        for v in targets:
            d = od_gl2_subgroup(gens, u, v)
            if v in reach:
                assert d.is_yes
            if d.is_yes:
                assert u @ d.witness.matrix == v
                assert _word_eval(gens, d.witness.word) == d.witness.matrix


def test_enumerate_kernel_words_count():
    assert sum(1 for _ in enumerate_kernel_words(3)) == 1 + 4 + 12 + 36
