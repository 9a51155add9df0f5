"""Independent brute-force oracles shared by the unit and acceptance tests."""

import itertools
from math import factorial

from orbitdec.lattice import IntMatrix
from orbitdec.words import FreeWord


def _slot(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def _accepts(table, letters) -> bool:
    v = 0
    for x in letters:
        v = table[v][_slot(x)]
        if v < 0:
            return False
    return v == 0


def _push(stack: list[int], x: int) -> bool:
    """Append x to a reduced word in place; returns True if it cancelled."""
    if stack and stack[-1] == -x:
        stack.pop()
        return True
    stack.append(x)
    return False


def double_coset_search(x: FreeWord, ga, y: FreeWord, gb, max_len: int = 8):
    """Shortlex-least reduced w with |w| <= max_len, x^-1 w in A and y^-1 w in B, or None.

    Membership is read off the folded graphs of A and B directly.
    """
    rank = x.rank
    letters = [i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)]
    for n in range(max_len + 1):
        for w in _reduced(letters, n):
            sa = list(x.inverse().letters)
            sb = list(y.inverse().letters)
            for l in w:
                _push(sa, l)
                _push(sb, l)
            if _accepts(ga.table, sa) and _accepts(gb.table, sb):
                return FreeWord(rank, w)
    return None


def _reduced(letters, n):
    def rec(prefix):
        if len(prefix) == n:
            yield prefix
            return
        for l in letters:
            if prefix and prefix[-1] == -l:
                continue
            yield from rec(prefix + (l,))
    yield from rec(())


def transitive_pair_count(s: int) -> int:
    """Index-s subgroups of F_2: transitive pairs of permutations of s points over (s-1)!."""
    perms = list(itertools.permutations(range(s)))
    count = 0
    for p, q in itertools.product(perms, repeat=2):
        seen, todo = {0}, [0]
        while todo:
            a = todo.pop()
            for b in (p[a], q[a], p.index(a), q.index(a)):
                if b not in seen:
                    seen.add(b)
                    todo.append(b)
        if len(seen) == s:
            count += 1
    assert count % factorial(s - 1) == 0
    return count // factorial(s - 1)


def brute_tcp(A: IntMatrix, u, v, bound: int = 6):
    """Some x with entries in [-bound, bound] and v = u + x(Id - A), or None."""
    n = A.nrows
    M = IntMatrix.identity(n) - A
    for x in itertools.product(range(-bound, bound + 1), repeat=n):
        img = x @ M
        if all(ui + ii == vi for ui, ii, vi in zip(u, img, v)):
            return x
    return None


def brute_orbit_power(A: IntMatrix, u, v, bound: int = 50):
    """All k in [-bound, bound] with u A^k = v."""
    out = []
    cur = tuple(u)
    for k in range(0, bound + 1):
        if cur == tuple(v):
            out.append(k)
        cur = cur @ A
    cur = tuple(u)
    Ainv = A.inverse()
    for k in range(1, bound + 1):
        cur = cur @ Ainv
        if cur == tuple(v):
            out.append(-k)
    return out
