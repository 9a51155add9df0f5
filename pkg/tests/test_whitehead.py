import math
import pytest

from orbitdec.whitehead import CyclicWord, compose_chain, minimize_cyclic, same_aut_orbit, whitehead_generators
from orbitdec.stallings import aut_invert
from orbitdec.words import FreeWord, conjugacy_free, cyclic_canonical, parse_word, reduced_words

from conftest import random_word


def W(text, rank=2):
    return parse_word(text, rank=rank)


def abelian_gcd(w: FreeWord) -> int:
    sums = [0] * w.rank
    for x in w.letters:
        sums[abs(x) - 1] += 1 if x > 0 else -1
    return math.gcd(*sums)


def test_generator_counts():
    assert len(whitehead_generators(1)) == 2
    g2 = whitehead_generators(2)
    assert len(g2) == 20
    assert sum(1 for g in g2 if g.kind == "TYPE_I") == 8
    assert len(whitehead_generators(3)) == 138
    with pytest.raises(ValueError):
        whitehead_generators(0)


def test_generators_distinct_and_contain_transvection():
    g2 = whitehead_generators(2)
    assert len({g.aut.images for g in g2}) == len(g2)
    assert any(g.aut.images == (W("ab"), W("b")) for g in g2)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_generators_invertible(rank):
    for g in whitehead_generators(rank):
        inv = aut_invert(g.aut).inverse()
        for j in range(1, rank + 1):
            x = FreeWord(rank, (j,))
            assert inv.apply(g.apply(x)) == x
            assert g.apply(inv.apply(x)) == x
        if g.kind == "TYPE_II":
            assert g.multiplier in g.subset and -g.multiplier not in g.subset


def test_minimize_examples():
    m, chain = minimize_cyclic(W("aab"))
    assert len(m) == 1
    assert CyclicWord.of(compose_chain(2, [g.aut for g in chain]).apply(W("aab"))) == m
    c = W("[a,b]")
    m, _ = minimize_cyclic(c)
    assert len(m) == 4
    assert all(len(cyclic_canonical(g.apply(c))) >= 4 for g in whitehead_generators(2))
    assert minimize_cyclic(W("a"))[0] == CyclicWord.of(W("a"))


def test_minimize_is_locally_minimal(rng):
    gens = whitehead_generators(2)
    for _ in range(60):
        w = random_word(rng, 2, 9)
        m, chain = minimize_cyclic(w)
        assert all(len(cyclic_canonical(g.apply(m.word()))) >= len(m) for g in gens)
        assert CyclicWord.of(compose_chain(2, [g.aut for g in chain]).apply(w)) == m


def _check_chain(u, v, d):
    total = compose_chain(u.rank, d.witness)
    assert conjugacy_free(total.apply(u), v).is_yes
    g = abelian_gcd(u)
    w = u
    for phi in d.witness:
        w = phi.apply(w)
        assert abelian_gcd(w) == g


def test_same_orbit_examples():
    for u, v in [("a", "b"), ("aab", "a")]:
        d = same_aut_orbit(W(u), W(v))
        assert d.is_yes
        _check_chain(W(u), W(v), d)
    assert same_aut_orbit(W("a"), W("a^2")).is_no
    with pytest.raises(ValueError):
        same_aut_orbit(W("a"), W("a", 3))


def test_reflexive_and_symmetric(rng):
    for _ in range(80):
        u, v = random_word(rng, 2, 5), random_word(rng, 2, 5)
        assert same_aut_orbit(u, u).is_yes
        a, b = same_aut_orbit(u, v), same_aut_orbit(v, u)
        assert a.answer == b.answer
        if a.is_yes:
            _check_chain(u, v, a)
            _check_chain(v, u, b)


def _brute_components(rank, max_len):
    """Union-find over cyclic words of length <= max_len joined by single Whitehead moves."""
    words = set()
    for w in reduced_words(rank, max_len):
        words.add(cyclic_canonical(w).letters)
    parent = {w: w for w in words}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gens = whitehead_generators(rank)
    for w in words:
        for g in gens:
            img = cyclic_canonical(g.apply(FreeWord(rank, w))).letters
            if img in parent:
                parent[find(img)] = find(w)
    return {w: find(w) for w in words}


def test_against_brute_closure(rng):
    comp = _brute_components(2, 5)
    keys = sorted(comp)
    for _ in range(300):
        u, v = rng.choice(keys), rng.choice(keys)
        d = same_aut_orbit(FreeWord(2, u), FreeWord(2, v))
        assert d.is_yes == (comp[u] == comp[v])
    # every pair inside a few components agrees too
    for u in keys[:40]:
        for v in keys[:40]:
            assert same_aut_orbit(FreeWord(2, u), FreeWord(2, v)).is_yes == (comp[u] == comp[v])
