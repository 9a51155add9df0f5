"""Todd-Coxeter coset enumeration and what is built on top of it.

Cosets are right cosets ``K g``; the table maps ``(coset, letter)`` to a coset
using the slot convention of :mod:`orbitdec.stallings`.  After enumeration
cosets are renumbered breadth-first so representatives form a shortlex
Schreier transversal.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .decision import Decision, OverflowBudget
from .stallings import core_graph, pullback_intersection, enumerate_index_subgroups, express_in_generators
from .words import FreeWord, format_word, parse_word, _reduce_letters

__all__ = [
    "Presentation",
    "CosetTable",
    "CipCertificate",
    "CharacteristicCore",
    "parse_presentation",
    "todd_coxeter",
    "coset_decompose",
    "reidemeister_schreier",
    "characteristic_finite_index",
    "cip_lift",
    "cip_finite_index_lift",
    "NotFiniteIndex",
]

DEFAULT_MAX_COSETS = 10**5


class NotFiniteIndex(ValueError):
    pass


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[FreeWord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "relators", tuple(self.relators))
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generator names must be distinct")
        if not self.generators:
            raise ValueError("need at least one generator")
        for r in self.relators:
            if r.rank != self.rank:
                raise ValueError("relator rank does not match generator count")

    @property
    def rank(self) -> int:
        return len(self.generators)

    def word(self, text: str) -> FreeWord:
        return parse_word(text, self.generators, self.rank)

    def format(self, w: FreeWord) -> str:
        return format_word(w, self.generators)

    def __str__(self) -> str:
        rels = ", ".join(self.format(r) for r in self.relators)
        return f"< {', '.join(self.generators)} | {rels} >"


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_presentation(text: str) -> Presentation:
    """Parse ``< a, b | a^5, [a,b] >``; relations ``u = v`` are allowed."""
    s = text.strip()
    if not (s.startswith("<") and s.endswith(">")):
        raise ValueError(f"presentation must be enclosed in <...>: {text!r}")
    body = s[1:-1]
    gens_part, _, rels_part = body.partition("|")
    gens = [g.strip() for g in gens_part.split(",") if g.strip()]
    for g in gens:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", g):
            raise ValueError(f"bad generator name {g!r}")
    rank = len(gens)
    rels = []
    for r in _split_top(rels_part):
        if "=" in r:
            lhs, rhs = r.split("=", 1)
            w = parse_word(lhs, gens, rank) * parse_word(rhs, gens, rank).inverse()
        else:
            w = parse_word(r, gens, rank)
        if not w.is_identity():
            rels.append(w)
    return Presentation(tuple(gens), tuple(rels))


def _slot(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def _letter(slot: int) -> int:
    return -(slot // 2 + 1) if slot & 1 else slot // 2 + 1


@dataclass(frozen=True)
class CosetTable:
    presentation: Presentation
    subgroup_generators: tuple[FreeWord, ...]
    table: tuple[tuple[int, ...], ...]
    representatives: tuple[FreeWord, ...] = field(repr=False)

    @property
    def index(self) -> int:
        return len(self.table)

    def trace(self, w: FreeWord, start: int = 0) -> int:
        c = start
        for x in w.letters:
            c = self.table[c][_slot(x)]
        return c

    def tree_edges(self) -> set[tuple[int, int]]:
        tree = set()
        for c, r in enumerate(self.representatives):
            if c == 0:
                continue
            x = r.letters[-1]
            parent = self.table[c][_slot(-x)]
            tree.add((parent, _slot(x)))
            tree.add((c, _slot(-x)))
        return tree

    def non_tree_edges(self) -> list[tuple[int, int]]:
        """Positive non-tree edges ``(coset, letter)`` in order."""
        tree = self.tree_edges()
        out = []
        for c in range(self.index):
            for i in range(self.presentation.rank):
                if (c, 2 * i) not in tree:
                    out.append((c, i + 1))
        return out

    def dump_tsv(self) -> str:
        gens = self.presentation.generators
        head = "coset\t" + "\t".join(f"{g}\t{g}^-1" for g in gens)
        return "\n".join([head] + [f"{c}\t" + "\t".join(map(str, row)) for c, row in enumerate(self.table)])


def _standardize(p: Presentation, subgens: tuple[FreeWord, ...], raw: list[list[int]], live: list[int]) -> CosetTable:
    width = 2 * p.rank
    order = {live[0]: 0}
    reps = [FreeWord.identity(p.rank)]
    queue = deque([live[0]])
    while queue:
        c = queue.popleft()
        for s in range(width):
            d = raw[c][s]
            if d not in order:
                order[d] = len(order)
                reps.append(reps[order[c]] * FreeWord._raw(p.rank, (_letter(s),)))
                queue.append(d)
    table = [[0] * width for _ in range(len(order))]
    for c, new in order.items():
        for s in range(width):
            table[new][s] = order[raw[c][s]]
    t = CosetTable(p, subgens, tuple(tuple(r) for r in table), tuple(reps))
    _check_table(t)
    return t


def _check_table(t: CosetTable) -> None:
    for c in range(t.index):
        for s, d in enumerate(t.table[c]):
            if t.table[d][s ^ 1] != c:
                raise AssertionError("coset table is not a permutation table")
        for r in t.presentation.relators:
            if t.trace(r, c) != c:
                raise AssertionError("relator does not close at a coset")
        if t.trace(t.representatives[c]) != c:
            raise AssertionError("representative does not reach its coset")
    for g in t.subgroup_generators:
        if t.trace(g) != 0:
            raise AssertionError("subgroup generator moves the trivial coset")


def todd_coxeter(p: Presentation, subgens: Sequence[FreeWord] = (), max_cosets: int = DEFAULT_MAX_COSETS) -> CosetTable:
    """Enumerate the right cosets of ``<subgens>`` by relator-based (HLT) scanning.

    Raises OverflowBudget once more than ``max_cosets`` cosets have been
    defined; the index may then be infinite.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be positive")
    subgens = tuple(subgens)
    for w in subgens:
        if w.rank != p.rank:
            raise ValueError("subgroup generator rank does not match presentation")
    width = 2 * p.rank
    table: list[list[int]] = [[-1] * width]
    parent = [0]
    rels = [[_slot(x) for x in r.letters] for r in p.relators]
    # cyclic conjugates are not needed for correctness with HLT
    queue: list[int] = []

    def rep(c: int) -> int:
        r = c
        while parent[r] != r:
            r = parent[r]
        while parent[c] != r:
            parent[c], c = r, parent[c]
        return r

    def define(c: int, s: int) -> int:
        if len(table) >= max_cosets:
            raise OverflowBudget(f"coset enumeration exceeded {max_cosets} cosets")
        d = len(table)
        table.append([-1] * width)
        parent.append(d)
        table[c][s] = d
        table[d][s ^ 1] = c
        return d

    def merge(a: int, b: int) -> None:
        a, b = rep(a), rep(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        parent[b] = a
        queue.append(b)

    def coincidence(a: int, b: int) -> None:
        merge(a, b)
        while queue:
            e = queue.pop(0)
            for s in range(width):
                f = table[e][s]
                if f < 0:
                    continue
                if table[f][s ^ 1] == e:
                    table[f][s ^ 1] = -1
                e1, f1 = rep(e), rep(f)
                if table[e1][s] >= 0:
                    merge(f1, table[e1][s])
                elif table[f1][s ^ 1] >= 0:
                    merge(e1, table[f1][s ^ 1])
                else:
                    table[e1][s] = f1
                    table[f1][s ^ 1] = e1

    def scan_and_fill(c: int, word: list[int]) -> None:
        n = len(word)
        if n == 0:
            return
        while True:
            f, i = c, 0
            while i < n and table[f][word[i]] >= 0:
                f = table[f][word[i]]
                i += 1
            if i == n:
                if f != c:
                    coincidence(f, c)
                return
            b, j = c, n - 1
            while j >= i and table[b][word[j] ^ 1] >= 0:
                b = table[b][word[j] ^ 1]
                j -= 1
            if j < i:
                coincidence(f, b)
                return
            if j == i:
                table[f][word[i]] = b
                table[b][word[i] ^ 1] = f
                return
            define(f, word[i])

    for w in subgens:
        scan_and_fill(rep(0), [_slot(x) for x in w.letters])
    c = 0
    while c < len(table):
        if parent[c] == c:
            for r in rels:
                scan_and_fill(c, r)
                if parent[c] != c:
                    break
            if parent[c] == c:
                for s in range(width):
                    if table[c][s] < 0:
                        define(c, s)
        c += 1
    live = [c for c in range(len(table)) if parent[c] == c]
    return _standardize(p, subgens, table, live)


def reidemeister_schreier(t: CosetTable) -> list[FreeWord]:
    """Schreier generators ``rep(c) x rep(cx)^-1`` over the non-tree edges."""
    reps = t.representatives
    rank = t.presentation.rank
    out = []
    for c, x in t.non_tree_edges():
        d = t.table[c][_slot(x)]
        out.append(reps[c] * FreeWord._raw(rank, (x,)) * reps[d].inverse())
    return out


def coset_decompose(t: CosetTable, g: FreeWord) -> tuple[int, tuple[int, ...]]:
    """Return ``(p, k)`` with ``g = k * rep(p)`` as free words.

    ``k`` is a signed-index expression over :func:`reidemeister_schreier`
    generators, so it lies in the subgroup; ``p == 0`` iff ``g`` does.
    """
    index = {e: j + 1 for j, e in enumerate(t.non_tree_edges())}
    c = 0
    k: list[int] = []
    for x in g.letters:
        d = t.table[c][_slot(x)]
        if x > 0:
            j = index.get((c, x))
            if j:
                k.append(j)
        else:
            j = index.get((d, -x))
            if j:
                k.append(-j)
        c = d
    return c, _reduce_letters(k)


# ---------------------------------------------------------------- characteristic cores


@dataclass(frozen=True)
class CharacteristicCore:
    generators: tuple[FreeWord, ...]
    index: int
    # index of the subgroup we started from
    base_index: int
    subgroups_intersected: int


def characteristic_finite_index(p: Presentation, k_gens: Sequence[FreeWord],
                                max_cosets: int = DEFAULT_MAX_COSETS,
                                enumeration_budget: int = 10**6) -> CharacteristicCore:
    """Generators of the intersection of all subgroups of index ``s = [G : K]``.

    The index-``s`` subgroups of the free group on the generators are
    enumerated; one is kept when its image still has index exactly ``s``
    (checked by a second enumeration), i.e. when it contains the relators'
    normal closure.  The kept subgroups are intersected by pullbacks.
    """
    try:
        s = todd_coxeter(p, k_gens, max_cosets).index
    except OverflowBudget as exc:
        raise NotFiniteIndex(f"could not certify finite index: {exc}") from exc
    graph = None
    kept = 0
    for h in enumerate_index_subgroups(p.rank, s, enumeration_budget):
        basis = h.basis()
        if todd_coxeter(p, basis, max_cosets).index != s:
            continue
        # the index test must agree with relators acting trivially on cosets
        if any(h.trace(r, v) != v for r in p.relators for v in range(h.num_vertices)):
            raise AssertionError("index test disagrees with relator closure")
        kept += 1
        hg = core_graph(basis, p.rank)
        graph = hg if graph is None else pullback_intersection(graph, hg)
    if graph is None:
        raise AssertionError("no index-s subgroup contains the relators")
    gens = tuple(graph.basis())
    return CharacteristicCore(gens, todd_coxeter(p, gens, max_cosets).index, s, kept)


# ---------------------------------------------------------------- coset intersection lift


@dataclass(frozen=True)
class CipCertificate:
    """Common element ``w`` of ``xA`` and ``yB``.

    ``a_expr`` writes ``x^-1 w`` over the A generators and ``b_expr`` writes
    ``y^-1 w`` over the B generators (signed 1-based indices); either may be
    None when the oracle that produced ``w`` gave no expression.
    """

    element: Any
    a_expr: tuple[int, ...] | None = None
    b_expr: tuple[int, ...] | None = None


def _eval(ops_mul, ops_inv, identity, gens, expr):
    out = identity
    for j in expr:
        g = gens[abs(j) - 1]
        out = ops_mul(out, g if j > 0 else ops_inv(g))
    return out


def _transversal(mul, inv, identity, gens, in_k, budget):
    """Left transversal of ``<gens> ∩ K`` in ``<gens>`` with generator words.

    Left multiplication permutes left cosets, so prepending generators to the
    representatives found so far reaches every coset; the search stops at the
    first round that adds nothing.
    """
    reps = [(identity, ())]
    letters = [j for i in range(1, len(gens) + 1) for j in (i, -i)]
    vals = {j: gens[j - 1] if j > 0 else inv(gens[-j - 1]) for j in letters}
    frontier = list(reps)
    while frontier:
        new = []
        for val, word in frontier:
            for j in letters:
                if word and word[0] == -j:
                    continue
                v2 = mul(vals[j], val)
                if not any(in_k(mul(inv(r), v2)) for r, _ in reps):
                    reps.append((v2, (j,) + word))
                    new.append(reps[-1])
                    if len(reps) > budget:
                        raise OverflowBudget("transversal enumeration exceeded its budget")
        frontier = new
    return reps


def _schreier_left(mul, inv, gens, reps, in_k):
    """Generators ``u_d^-1 a u_i`` of ``<gens> ∩ K`` with their expressions."""
    out = []
    for i, (u, uw) in enumerate(reps):
        for a_idx, a in enumerate(gens):
            au = mul(a, u)
            for d, (ud, udw) in enumerate(reps):
                if in_k(mul(inv(ud), au)):
                    expr = _reduce_letters([-x for x in reversed(udw)] + [a_idx + 1] + list(uw))
                    out.append((mul(inv(ud), au), expr))
                    break
            else:
                raise AssertionError("transversal does not cover a coset")
    return out


def _substitute(expr, exprs):
    out = []
    for j in expr:
        piece = exprs[abs(j) - 1]
        if j < 0:
            piece = [-x for x in reversed(piece)]
        out.extend(piece)
    return _reduce_letters(out)


def cip_lift(mul: Callable, inv: Callable, identity: Any, k_member: Callable[[Any], bool],
             k_cip: Callable[[Any, list, list], Decision], x: Any, a_gens: Sequence[Any], y: Any,
             b_gens: Sequence[Any], eq: Callable[[Any, Any], bool] | None = None,
             budget: int = 10**5) -> Decision:
    """Coset intersection in L from coset intersection in a finite-index K.

    ``k_cip(z, A', B')`` must decide ``z A' ∩ B'`` for subgroups of K, with a
    :class:`CipCertificate` witness (``x = z``, ``y = 1``).  On YES the
    witness is a :class:`CipCertificate` for ``xA ∩ yB``.
    """
    a_gens, b_gens = list(a_gens), list(b_gens)
    U = _transversal(mul, inv, identity, a_gens, k_member, budget)
    V = _transversal(mul, inv, identity, b_gens, k_member, budget)
    sa = _schreier_left(mul, inv, a_gens, U, k_member)
    sb = _schreier_left(mul, inv, b_gens, V, k_member)
    ak, bk = [g for g, _ in sa], [g for g, _ in sb]
    yinv_x = mul(inv(y), x)
    for ui, uiw in U:
        for vj, vjw in V:
            z = mul(mul(inv(vj), yinv_x), ui)
            if not k_member(z):
                continue
            d = k_cip(z, ak, bk)
            if not d.conclusive:
                return d
            if d.is_no:
                continue
            cert = d.witness
            wk = cert.element if isinstance(cert, CipCertificate) else cert
            W = mul(mul(y, vj), wk)
            a_expr = b_expr = None
            if isinstance(cert, CipCertificate) and cert.a_expr is not None:
                a_expr = _reduce_letters(list(uiw) + list(_substitute(cert.a_expr, [e for _, e in sa])))
            if isinstance(cert, CipCertificate) and cert.b_expr is not None:
                b_expr = _reduce_letters(list(vjw) + list(_substitute(cert.b_expr, [e for _, e in sb])))
            checked = False
            if eq is not None and a_expr is not None and b_expr is not None:
                ok_a = eq(_eval(mul, inv, identity, a_gens, a_expr), mul(inv(x), W))
                ok_b = eq(_eval(mul, inv, identity, b_gens, b_expr), mul(inv(y), W))
                if not (ok_a and ok_b):
                    raise AssertionError("lifted coset intersection certificate failed")
                checked = True
            return Decision.yes(CipCertificate(W, a_expr, b_expr), checked=checked)
    return Decision.no()


def cip_finite_index_lift(p: Presentation, k_gens: Sequence[FreeWord], k_cip: Callable[[Any, list, list], Decision],
                          x: FreeWord, a_gens: Sequence[FreeWord], y: FreeWord, b_gens: Sequence[FreeWord],
                          k_member: Callable[[FreeWord], bool] | None = None,
                          max_cosets: int = DEFAULT_MAX_COSETS) -> Decision:
    """:func:`cip_lift` for a finitely presented L given by ``p``.

    Elements are words over the generators of ``p``; membership in K defaults
    to tracing in the coset table of ``<k_gens>``.
    """
    if k_member is None:
        table = todd_coxeter(p, k_gens, max_cosets)
        k_member = lambda w: table.trace(w) == 0  # noqa: E731
    return cip_lift(lambda a, b: a * b, lambda a: a.inverse(), FreeWord.identity(p.rank), k_member, k_cip,
                    x, a_gens, y, b_gens)


def free_cip_oracle(z: FreeWord, a_gens: list[FreeWord], b_gens: list[FreeWord]) -> Decision:
    """``k_cip`` for a free K: Stallings coset intersection with expressions."""
    from .stallings import cip_free

    if not a_gens and not b_gens:
        return Decision.yes(CipCertificate(z, (), ())) if z.is_identity() else Decision.no()
    rank = z.rank
    one = FreeWord.identity(rank)
    d = cip_free(z, a_gens, one, b_gens)
    if not d.is_yes:
        return d
    w = d.witness
    ga, gb = core_graph(a_gens, rank), core_graph(b_gens, rank)
    a_expr = express_in_generators(ga, z.inverse() * w)
    b_expr = express_in_generators(gb, w)
    return Decision.yes(CipCertificate(w, a_expr, b_expr))
