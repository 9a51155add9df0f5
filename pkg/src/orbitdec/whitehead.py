"""Whitehead's algorithm: Aut(F_n)-orbits of conjugacy classes."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cache
from itertools import combinations, permutations, product
from typing import Sequence

from .decision import Decision
from .words import FreeAutomorphism, FreeWord, conjugacy_free, cyclic_canonical, format_word

__all__ = [
    "CyclicWord",
    "WhiteheadAut",
    "whitehead_generators",
    "minimize_cyclic",
    "same_aut_orbit",
    "compose_chain",
]

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class CyclicWord:
    """Conjugacy class of a free-group element, as its least cyclic rotation."""

    rank: int
    letters: tuple[int, ...]

    @classmethod
    def of(cls, w: FreeWord) -> "CyclicWord":
        c = cyclic_canonical(w)
        return cls(w.rank, c.letters)

    def word(self) -> FreeWord:
        return FreeWord(self.rank, self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return format_word(self.word())


@dataclass(frozen=True)
class WhiteheadAut:
    """TYPE_I: signed permutation of generators; TYPE_II: multiplier ``a`` with subset ``A``."""

    kind: str
    aut: FreeAutomorphism
    multiplier: int | None = None
    subset: frozenset[int] | None = None

    def apply(self, w: FreeWord) -> FreeWord:
        return self.aut.apply(w)


def _type_two(rank: int, a: int, A: frozenset[int]) -> FreeAutomorphism:
    def images(a: int, A: frozenset[int]) -> tuple[FreeWord, ...]:
        out = []
        for j in range(1, rank + 1):
            if j == abs(a):
                out.append(FreeWord(rank, (j,)))
                continue
            letters = []
            if -j in A:
                letters.append(-a)
            letters.append(j)
            if j in A:
                letters.append(a)
            out.append(FreeWord(rank, tuple(letters)))
        return tuple(out)

    inv_subset = (A - {a}) | {-a}
    return FreeAutomorphism(rank, images(a, A), images(-a, frozenset(inv_subset)))


def whitehead_generators(rank: int) -> list[WhiteheadAut]:
    """All Whitehead automorphisms of F_rank, without duplicates (identity included once)."""
    if rank < 1:
        raise ValueError("rank must be positive")
    return list(_generators(rank))


@cache
def _generators(rank: int) -> tuple[WhiteheadAut, ...]:
    out: list[WhiteheadAut] = []
    seen: set[tuple[FreeWord, ...]] = set()
    for perm in permutations(range(1, rank + 1)):
        for signs in product((1, -1), repeat=rank):
            imgs = tuple(FreeWord(rank, (s * p,)) for p, s in zip(perm, signs))
            # inverse of a signed permutation
            inv = [None] * rank
            for i, (p, s) in enumerate(zip(perm, signs)):
                inv[p - 1] = FreeWord(rank, (s * (i + 1),))
            aut = FreeAutomorphism(rank, imgs, tuple(inv))
            seen.add(aut.images)
            out.append(WhiteheadAut("TYPE_I", aut))
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    for a in letters:
        others = [x for x in letters if abs(x) != abs(a)]
        for r in range(len(others) + 1):
            for extra in combinations(others, r):
                A = frozenset((a,) + extra)
                aut = _type_two(rank, a, A)
                if aut.images in seen:
                    continue
                seen.add(aut.images)
                out.append(WhiteheadAut("TYPE_II", aut, a, A))
    return tuple(out)


def _cyc(w: FreeWord) -> FreeWord:
    return cyclic_canonical(w)


def compose_chain(rank: int, chain: Sequence[FreeAutomorphism]) -> FreeAutomorphism:
    out = FreeAutomorphism.identity(rank)
    for phi in chain:
        out = out.compose(phi)
    return out


def minimize_cyclic(w: CyclicWord | FreeWord) -> tuple[CyclicWord, list[WhiteheadAut]]:
    """Greedy peak reduction: apply the most length-reducing Whitehead move until none helps."""
    word = w.word() if isinstance(w, CyclicWord) else w
    rank = word.rank
    gens = [g for g in _generators(rank) if g.kind == "TYPE_II"]
    cur = _cyc(word)
    chain: list[WhiteheadAut] = []
    while True:
        best = None
        for g in gens:
            img = _cyc(g.apply(cur))
            if len(img) < len(cur) and (best is None or len(img) < len(best[1])):
                best = (g, img)
        if best is None:
            break
        chain.append(best[0])
        cur = best[1]
    out = CyclicWord(rank, cur.letters)
    total = compose_chain(rank, [g.aut for g in chain])
    if CyclicWord.of(total.apply(word)) != out:
        raise AssertionError("minimization chain failed verification")
    return out, chain


def same_aut_orbit(u: CyclicWord | FreeWord, v: CyclicWord | FreeWord, budget: int = DEFAULT_BUDGET) -> Decision:
    """Decide whether some automorphism sends u to a conjugate of v.

    On YES the witness is a list of FreeAutomorphisms whose composite
    (applied left to right) maps u to a conjugate of v.
    """
    uw = u.word() if isinstance(u, CyclicWord) else u
    vw = v.word() if isinstance(v, CyclicWord) else v
    if uw.rank != vw.rank:
        raise ValueError("rank mismatch")
    rank = uw.rank
    umin, uchain = minimize_cyclic(uw)
    vmin, vchain = minimize_cyclic(vw)
    if len(umin) != len(vmin):
        return Decision.no(f"minimal lengths {len(umin)} and {len(vmin)} differ")
    gens = _generators(rank)
    start, goal = umin.letters, vmin.letters
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], int] | None] = {start: None}
    queue = deque([start])
    found = start == goal
    while queue and not found:
        cur = queue.popleft()
        cw = FreeWord(rank, cur)
        for gi, g in enumerate(gens):
            img = _cyc(g.apply(cw)).letters
            if len(img) != len(cur) or img in parent:
                continue
            parent[img] = (cur, gi)
            if len(parent) > budget:
                return Decision.overflow(f"minimal-length component exceeds {budget} words")
            if img == goal:
                found = True
                break
            queue.append(img)
    if not found:
        return Decision.no(f"component of size {len(parent)} at length {len(umin)} avoids the target")
    middle: list[FreeAutomorphism] = []
    node = goal
    while parent[node] is not None:
        node, gi = parent[node]  # type: ignore[misc]
        middle.append(gens[gi].aut)
    middle.reverse()
    chain = [g.aut for g in uchain] + middle + [g.aut.inverse() for g in reversed(vchain)]
    total = compose_chain(rank, chain)
    if not conjugacy_free(total.apply(uw), vw).is_yes:
        raise AssertionError("orbit chain failed verification")
    return Decision.yes(chain)
