import itertools
import random

import pytest

from orbitdec.coset_enum import Presentation, todd_coxeter
from orbitdec.decision import OverflowBudget
from orbitdec.stallings import (NotAnAutomorphism, aut_invert, cip_free, core_graph, enumerate_index_subgroups,
                                evaluate_expression, express_in_generators, index_or_infinite, membership_express,
                                pullback_intersection)
from orbitdec.words import FreeAutomorphism, FreeWord, parse_word

from conftest import random_word
from oracles import double_coset_search, transitive_pair_count


def W(text, rank=2):
    return parse_word(text, rank=rank)


def G(*texts, rank=2):
    return core_graph([W(t, rank) for t in texts], rank)


def test_core_graph_examples():
    g = G("a")
    assert g.num_vertices == 1 and [e for e in g.edges()] == [(0, 1, 0)]
    g = G("a^2", "ab")
    assert membership_express(g, W("a^2")).is_yes
    assert membership_express(g, W("ab")).is_yes
    assert membership_express(g, W("a")).is_no
    g = G("a", "b")
    assert g.num_vertices == 1 and index_or_infinite(g) == 1


def test_graph_invariants(rng):
    for _ in range(60):
        gens = [random_word(rng, 2, 6) for _ in range(rng.randint(1, 3))]
        g = core_graph(gens, 2)
        # folded: table entries are consistent in both directions
        for v, row in enumerate(g.table):
            for s, u in enumerate(row):
                if u >= 0:
                    assert g.table[u][s ^ 1] == v
        # core: non-basepoint vertices have degree >= 2
        for v in range(1, g.num_vertices):
            assert sum(u >= 0 for u in g.table[v]) >= 2
        for w in gens:
            assert membership_express(g, w).is_yes


def test_membership_examples():
    g = G("a^2", "b")
    d = membership_express(g, W("a^2 b"))
    assert d.is_yes
    assert evaluate_expression(g.basis(), d.witness, 2) == W("a^2 b")
    assert membership_express(g, W("a")).is_no
    d = membership_express(g, FreeWord.identity(2))
    assert d.is_yes and d.witness == ()


def _products(gens, depth):
    letters = [g for g in gens] + [g.inverse() for g in gens]
    out = {FreeWord.identity(gens[0].rank)}
    frontier = set(out)
    for _ in range(depth):
        frontier = {w * l for w in frontier for l in letters}
        out |= frontier
    return out


def test_membership_against_enumeration(rng):
    for _ in range(40):
        rank = rng.choice([2, 3])
        gens = [random_word(rng, rank, 3, 1) for _ in range(rng.randint(1, 2))]
        g = core_graph(gens, rank)
        elems = {w for w in _products(gens, 4) if len(w) <= 8}
        for w in elems:
            d = membership_express(g, w)
            assert d.is_yes
            expr = express_in_generators(g, w)
            assert evaluate_expression(gens, expr, rank) == w
        for _ in range(40):
            w = random_word(rng, rank, 8)
            d = membership_express(g, w)
            if d.is_yes:
                assert evaluate_expression(g.basis(), d.witness, rank) == w
            else:
                assert w not in elems


def test_index_examples():
    assert index_or_infinite(G("a", "b")) == 1
    assert index_or_infinite(G("a^2", "b", "a b a^-1")) == 2
    assert index_or_infinite(G("a^2", "b")) is None
    free = Presentation(("a", "b"))
    assert todd_coxeter(free, [W("a^2"), W("b"), W("a b a^-1")]).index == 2


def test_folding_is_confluent(rng):
    for _ in range(50):
        gens = [random_word(rng, 2, 6, 1) for _ in range(3)]
        g = core_graph(gens, 2)
        for perm in itertools.permutations(gens):
            assert core_graph(list(perm), 2) == g
        assert core_graph(gens + [gens[0] * gens[1]], 2) == g


def test_pullback_examples():
    assert pullback_intersection(G("a"), G("a^2")) == G("a^2")
    assert pullback_intersection(G("a", "b"), G("a^2", "b")) == G("a^2", "b")
    meet = pullback_intersection(G("ab"), G("ba"))
    assert meet.basis() == []
    ab, ba = W("ab"), W("ba")
    assert all(ab**i != ba**j for i in range(1, 7) for j in range(1, 7))


def test_pullback_contained_in_both(rng):
    for _ in range(50):
        g1 = core_graph([random_word(rng, 2, 4, 1) for _ in range(2)], 2)
        g2 = core_graph([random_word(rng, 2, 4, 1) for _ in range(2)], 2)
        meet = pullback_intersection(g1, g2)
        for b in meet.basis():
            assert membership_express(g1, b).is_yes and membership_express(g2, b).is_yes


def test_cip_examples():
    d = cip_free(W("a"), [W("a^2")], FreeWord.identity(2), [W("a^3")])
    assert d.is_yes and d.witness == W("a^3")
    assert cip_free(W("a"), [W("a^2")], FreeWord.identity(2), [W("a^2")]).is_no
    d = cip_free(FreeWord.identity(2), [W("a")], FreeWord.identity(2), [W("b")])
    assert d.is_yes and d.witness.is_identity()


def test_cip_against_double_coset_search(rng):
    for _ in range(60):
        A = [random_word(rng, 2, 3, 1) for _ in range(rng.randint(1, 2))]
        B = [random_word(rng, 2, 3, 1) for _ in range(rng.randint(1, 2))]
        x, y = random_word(rng, 2, 3), random_word(rng, 2, 3)
        ga, gb = core_graph(A, 2), core_graph(B, 2)
        d = cip_free(x, A, y, B)
        found = double_coset_search(x, ga, y, gb, 6)
        if found is not None:
            assert d.is_yes
        if d.is_yes:
            w = d.witness
            assert membership_express(ga, x.inverse() * w).is_yes
            assert membership_express(gb, y.inverse() * w).is_yes
            if len(w) <= 6:
                assert found is not None


def test_enumerate_index_subgroups():
    one = enumerate_index_subgroups(1, 3)
    assert one == [G("a^3", rank=1)]
    for s, expected in [(2, 3), (3, 13)]:
        subs = enumerate_index_subgroups(2, s)
        assert len(subs) == expected == transitive_pair_count(s)
        assert len(set(subs)) == len(subs)
    assert len(enumerate_index_subgroups(2, 4)) == transitive_pair_count(4)
    with pytest.raises(OverflowBudget):
        enumerate_index_subgroups(2, 4, budget=5)


def test_index_agrees_with_todd_coxeter():
    free = Presentation(("a", "b"))
    for s in range(1, 5):
        for g in enumerate_index_subgroups(2, s):
            assert index_or_infinite(g) == s
            assert todd_coxeter(free, g.basis()).index == s


def test_aut_invert_examples():
    phi = aut_invert(FreeAutomorphism(2, (W("ab"), W("b"))))
    assert phi.inverse().images == (W("a b^-1"), W("b"))
    swap = aut_invert(FreeAutomorphism(2, (W("b"), W("a"))))
    assert swap.inverse().images == swap.images
    phi = aut_invert(FreeAutomorphism(2, (W("ab"), W("a"))))
    assert phi.inverse().images == (W("b"), W("b^-1 a"))
    with pytest.raises(NotAnAutomorphism):
        aut_invert(FreeAutomorphism(2, (W("a^2"), W("b"))))
