"""Random semidirect-product instances for which cp_extension is complete."""

from orbitdec.extension import FREE_ABELIAN, ExtensionSpec, g_conjugate
from orbitdec.lattice import IntMatrix

from conftest import random_unimodular, random_vector, random_word

FAMILIES = ("rank_one", "gl2", "cyclic", "signed_perm")


def signed_permutation(rng, n):
    perm = list(range(n))
    rng.shuffle(perm)
    rows = [[0] * n for _ in range(n)]
    for i, p in enumerate(perm):
        rows[i][p] = rng.choice((1, -1))
    return IntMatrix.of(rows)


def random_spec(rng, family):
    if family == "rank_one":
        acts = [IntMatrix.of([[rng.choice((1, -1))]]) for _ in range(rng.randint(1, 2))]
        return ExtensionSpec(FREE_ABELIAN, 1, acts, od="finite_closure")
    if family == "gl2":
        acts = [random_unimodular(rng, 2, 2) for _ in range(rng.randint(1, 2))]
        return ExtensionSpec(FREE_ABELIAN, 2, acts, od="gl2_subgroup")
    if family == "cyclic":
        n = rng.randint(1, 3)
        return ExtensionSpec(FREE_ABELIAN, n, [random_unimodular(rng, n, 2)], od="cyclic")
    if family == "signed_perm":
        acts = [signed_permutation(rng, 3) for _ in range(rng.randint(1, 2))]
        return ExtensionSpec(FREE_ABELIAN, 3, acts, od="finite_closure")
    raise ValueError(family)


def random_element(rng, spec, max_t=4, bound=4):
    return spec.element(random_word(rng, spec.m, max_t).letters, random_vector(rng, spec.n, bound))


def random_instance(rng, family):
    """A spec and a pair (g, g'); half the time g' is a conjugate of g by a short element."""
    spec = random_spec(rng, family)
    g = random_element(rng, spec)
    if rng.random() < 0.5:
        c = random_element(rng, spec, max_t=2, bound=2)
        return spec, g, g_conjugate(spec, g, c)
    return spec, g, random_element(rng, spec)
