"""Stallings graphs of finitely generated subgroups of free groups.

A graph is stored as a dense table ``table[v][slot]`` where
``slot(x) = 2*(|x|-1) + (x<0)`` and ``-1`` marks a missing edge.  Vertex 0 is
the basepoint and vertices are numbered in breadth-first order, so two graphs
built from generating sets of the same subgroup compare equal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .decision import Decision, OverflowBudget
from .words import FreeAutomorphism, FreeWord, format_word, default_names, _reduce_letters

__all__ = [
    "SubgroupGraph",
    "NotAnAutomorphism",
    "core_graph",
    "membership_express",
    "express_in_generators",
    "index_or_infinite",
    "pullback_intersection",
    "cip_free",
    "cip_free_graphs",
    "enumerate_index_subgroups",
    "aut_invert",
    "evaluate_expression",
]


class NotAnAutomorphism(ValueError):
    pass


def _slot(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def _letter(slot: int) -> int:
    return -(slot // 2 + 1) if slot & 1 else slot // 2 + 1


def evaluate_expression(basis: Sequence[FreeWord], expr: Sequence[int], rank: int) -> FreeWord:
    """Evaluate a signed-index expression over ``basis``."""
    out = FreeWord.identity(rank)
    for j in expr:
        b = basis[abs(j) - 1]
        out = out * (b if j > 0 else b.inverse())
    return out


@dataclass(frozen=True)
class SubgroupGraph:
    """Folded core graph with basepoint 0, canonically numbered."""

    rank: int
    table: tuple[tuple[int, ...], ...]
    # labels[v][slot]: element of the free group on the original generators
    # carried by the edge, or None when the graph was not built from them
    labels: tuple[tuple[tuple[int, ...] | None, ...], ...] | None = field(default=None, compare=False, repr=False)
    generators: tuple[FreeWord, ...] = field(default=(), compare=False, repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.table)

    def target(self, v: int, x: int) -> int:
        return self.table[v][_slot(x)]

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Positive edges ``(v, x, w)`` in (vertex, letter) order."""
        for v, row in enumerate(self.table):
            for i in range(self.rank):
                w = row[2 * i]
                if w >= 0:
                    yield v, i + 1, w

    def is_saturated(self) -> bool:
        return all(w >= 0 for row in self.table for w in row)

    def trace(self, w: FreeWord, start: int = 0) -> int | None:
        v = start
        for x in w.letters:
            v = self.table[v][_slot(x)]
            if v < 0:
                return None
        return v

    def spanning_tree(self) -> tuple[list[FreeWord], list[tuple[int, int, int]]]:
        """Tree paths from the basepoint and the positive non-tree edges."""
        n = self.num_vertices
        path: list[FreeWord | None] = [None] * n
        path[0] = FreeWord.identity(self.rank)
        tree: set[tuple[int, int]] = set()
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for s in range(2 * self.rank):
                w = self.table[v][s]
                if w >= 0 and path[w] is None:
                    x = _letter(s)
                    path[w] = path[v] * FreeWord._raw(self.rank, (x,))
                    tree.add((v, s))
                    tree.add((w, _slot(-x)))
                    queue.append(w)
        non_tree = [(v, x, w) for v, x, w in self.edges() if (v, _slot(x)) not in tree]
        return path, non_tree  # type: ignore[return-value]

    def basis(self) -> list[FreeWord]:
        path, non_tree = self.spanning_tree()
        return [path[v] * FreeWord._raw(self.rank, (x,)) * path[w].inverse() for v, x, w in non_tree]

    def subgroup_rank(self) -> int:
        return sum(1 for _ in self.edges()) - self.num_vertices + 1

    def dump(self, names: Sequence[str] | None = None) -> str:
        names = names or default_names(self.rank)
        return "\n".join(f"{v} {names[x - 1]} -> {w}" for v, x, w in self.edges())


def _canonical(rank: int, nverts: int, edges: list[tuple[int, int, int, tuple[int, ...] | None]],
               labelled: bool, generators: tuple[FreeWord, ...] = ()) -> SubgroupGraph:
    """Trim hanging trees (keeping vertex 0) and renumber breadth-first.

    ``edges`` holds positive edges ``(v, x, w, label)`` of a folded graph.
    """
    adj: list[dict[int, tuple[int, tuple[int, ...] | None]]] = [dict() for _ in range(nverts)]
    for v, x, w, lab in edges:
        adj[v][_slot(x)] = (w, lab)
        adj[w][_slot(-x)] = (v, None if lab is None else tuple(-y for y in reversed(lab)))
    stack = [v for v in range(1, nverts) if len(adj[v]) <= 1]
    while stack:
        v = stack.pop()
        if v == 0 or len(adj[v]) > 1:
            continue
        for s, (w, _) in list(adj[v].items()):
            del adj[v][s]
            adj[w].pop(_slot(-_letter(s)), None)
            if w != 0 and len(adj[w]) <= 1:
                stack.append(w)
    order = {0: 0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for s in sorted(adj[v]):
            w = adj[v][s][0]
            if w not in order:
                order[w] = len(order)
                queue.append(w)
    n = len(order)
    table = [[-1] * (2 * rank) for _ in range(n)]
    labels = [[None] * (2 * rank) for _ in range(n)] if labelled else None
    for v, new in order.items():
        for s, (w, lab) in adj[v].items():
            table[new][s] = order[w]
            if labels is not None:
                labels[new][s] = lab
    return SubgroupGraph(
        rank,
        tuple(tuple(r) for r in table),
        None if labels is None else tuple(tuple(r) for r in labels),
        generators,
    )


class _Folder:
    """Mutable labelled graph; folding keeps edge labels consistent."""

    def __init__(self, rank: int):
        self.rank = rank
        self.edges: dict[int, list] = {}  # eid -> [a, x, b, label]
        self.adj: list[dict[int, list[int]]] = [dict()]
        self.next_eid = 0
        self.alive = [True]

    def new_vertex(self) -> int:
        self.adj.append(dict())
        self.alive.append(True)
        return len(self.adj) - 1

    def add_edge(self, a: int, x: int, b: int, label: tuple[int, ...]) -> int:
        e = self.next_eid
        self.next_eid += 1
        self.edges[e] = [a, x, b, label]
        self.adj[a].setdefault(x, []).append(e)
        self.adj[b].setdefault(-x, []).append(e)
        return e

    def remove_edge(self, e: int) -> None:
        a, x, b, _ = self.edges.pop(e)
        self.adj[a][x].remove(e)
        self.adj[b][-x].remove(e)

    def out(self, v: int, x: int, e: int) -> tuple[int, tuple[int, ...]]:
        a, y, b, lab = self.edges[e]
        if a == v and y == x:
            return b, lab
        return a, _inv(lab)

    def merge(self, keep: int, gone: int, g: tuple[int, ...]) -> None:
        """Identify ``gone`` with ``keep``; ``g`` is the gauge change at ``gone``."""
        ginv = _inv(g)
        incident = {e for lst in self.adj[gone].values() for e in lst}
        for e in sorted(incident):
            a, x, b, lab = self.edges[e]
            self.remove_edge(e)
            if a == gone:
                lab = _reduce_letters(ginv + lab)
                a = keep
            if b == gone:
                lab = _reduce_letters(lab + g)
                b = keep
            self.add_edge(a, x, b, lab)
        self.alive[gone] = False

    def fold(self) -> None:
        work = list(range(len(self.adj)))
        while work:
            v = work.pop()
            if not self.alive[v]:
                continue
            for x in list(self.adj[v]):
                lst = self.adj[v].get(x, [])
                if len(lst) < 2:
                    continue
                e1, e2 = lst[0], lst[1]
                w1, l1 = self.out(v, x, e1)
                w2, l2 = self.out(v, x, e2)
                if w1 == w2:
                    # parallel edge; its label differs only by a relation
                    self.remove_edge(e2)
                elif w1 < w2:
                    self.merge(w1, w2, _reduce_letters(_inv(l2) + l1))
                else:
                    self.merge(w2, w1, _reduce_letters(_inv(l1) + l2))
                keep = min(w1, w2)
                work.append(v)
                work.append(keep)
                work.extend(self.out(keep, y, e)[0] for y, es in self.adj[keep].items() for e in es)
                break


def _inv(lab: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-y for y in reversed(lab))


def core_graph(generators: Sequence[FreeWord], rank: int | None = None) -> SubgroupGraph:
    """Stallings core graph of the subgroup generated by ``generators``.

    Edges carry labels over the given generators so that membership can be
    rewritten in them (see :func:`express_in_generators`).
    """
    gens = tuple(generators)
    if rank is None:
        if not gens:
            raise ValueError("rank required for an empty generating set")
        rank = gens[0].rank
    for g in gens:
        if g.rank != rank:
            raise ValueError("generators must share a rank")
    f = _Folder(rank)
    for j, g in enumerate(gens):
        if g.is_identity():
            continue
        v = 0
        for pos, x in enumerate(g.letters):
            w = 0 if pos == len(g) - 1 else f.new_vertex()
            f.add_edge(v, x, w, (j + 1,) if pos == 0 else ())
            v = w
    f.fold()
    old = [v for v in range(len(f.adj)) if f.alive[v]]
    index = {v: i for i, v in enumerate(old)}
    edges = []
    for a, x, b, lab in f.edges.values():
        if x < 0:
            a, x, b, lab = b, -x, a, _inv(lab)
        edges.append((index[a], x, index[b], lab))
    return _canonical(rank, len(old), edges, True, gens)


def membership_express(g: SubgroupGraph, w: FreeWord) -> Decision:
    """Decide ``w`` in the subgroup; the witness is an expression over ``g.basis()``.

    The expression is a tuple of signed 1-based indices into the basis.
    """
    if w.rank != g.rank:
        raise ValueError(f"rank mismatch: graph {g.rank} vs word {w.rank}")
    path, non_tree = g.spanning_tree()
    nt = {}
    for j, (v, x, u) in enumerate(non_tree):
        nt[(v, _slot(x))] = j + 1
        nt[(u, _slot(-x))] = -(j + 1)
    v = 0
    expr: list[int] = []
    for x in w.letters:
        s = _slot(x)
        u = g.table[v][s]
        if u < 0:
            return Decision.no()
        j = nt.get((v, s))
        if j is not None:
            expr.append(j)
        v = u
    if v != 0:
        return Decision.no()
    out = tuple(expr)
    basis = [path[a] * FreeWord._raw(g.rank, (x,)) * path[b].inverse() for a, x, b in non_tree]
    ok = evaluate_expression(basis, out, g.rank) == w
    if not ok:
        raise AssertionError("basis expression failed to re-evaluate")
    return Decision.yes(out)


def express_in_generators(g: SubgroupGraph, w: FreeWord) -> tuple[int, ...] | None:
    """Rewrite ``w`` over the generators the graph was built from.

    Returns a reduced tuple of signed generator indices, or None when ``w`` is
    not in the subgroup.
    """
    if g.labels is None:
        raise ValueError("graph carries no generator labels")
    if w.rank != g.rank:
        raise ValueError("rank mismatch")
    v = 0
    out: list[int] = []
    for x in w.letters:
        s = _slot(x)
        u = g.table[v][s]
        if u < 0:
            return None
        for y in g.labels[v][s]:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
        v = u
    if v != 0:
        return None
    expr = tuple(out)
    if evaluate_expression(g.generators, expr, g.rank) != w:
        raise AssertionError("generator expression failed to re-evaluate")
    return expr


def index_or_infinite(g: SubgroupGraph) -> int | None:
    """Index of the subgroup, or None when it is infinite."""
    return g.num_vertices if g.is_saturated() else None


def _product(g1: SubgroupGraph, g2: SubgroupGraph, start: tuple[int, int]):
    index = {start: 0}
    queue = deque([start])
    edges = []
    while queue:
        p = queue.popleft()
        for s in range(0, 2 * g1.rank, 2):
            a, b = g1.table[p[0]][s], g2.table[p[1]][s]
            if a < 0 or b < 0:
                continue
            q = (a, b)
            if q not in index:
                index[q] = len(index)
                queue.append(q)
            edges.append((index[p], s // 2 + 1, index[q], None))
        for s in range(1, 2 * g1.rank, 2):
            a, b = g1.table[p[0]][s], g2.table[p[1]][s]
            if a >= 0 and b >= 0 and (a, b) not in index:
                index[(a, b)] = len(index)
                queue.append((a, b))
    return index, edges


def pullback_intersection(g1: SubgroupGraph, g2: SubgroupGraph) -> SubgroupGraph:
    """Core graph of the intersection of the two subgroups."""
    if g1.rank != g2.rank:
        raise ValueError("rank mismatch")
    index, edges = _product(g1, g2, (0, 0))
    graph = _canonical(g1.rank, len(index), edges, False)
    return SubgroupGraph(graph.rank, graph.table, None, tuple(graph.basis()))


def _extend(g: SubgroupGraph, w: FreeWord) -> tuple[list[list[int]], int]:
    """Copy of the table with a hanging path appended so that ``w`` can be read."""
    table = [list(r) for r in g.table]
    v = 0
    for x in w.letters:
        s = _slot(x)
        if table[v][s] < 0:
            table.append([-1] * (2 * g.rank))
            u = len(table) - 1
            table[v][s] = u
            table[u][_slot(-x)] = v
        v = table[v][s]
    return table, v


def cip_free(x: FreeWord, A: Sequence[FreeWord], y: FreeWord, B: Sequence[FreeWord]) -> Decision:
    """Decide whether ``xA`` and ``yB`` meet; on YES the witness is a common element.

    The witness is the label of a shortest path from ``(v_x, v_y)`` to the
    basepoint pair in the product of the extended core graphs.
    """
    rank = x.rank
    for w in [y, *A, *B]:
        if w.rank != rank:
            raise ValueError("rank mismatch")
    return cip_free_graphs(x, core_graph(A, rank), y, core_graph(B, rank))


def cip_free_graphs(x: FreeWord, ga: SubgroupGraph, y: FreeWord, gb: SubgroupGraph) -> Decision:
    """:func:`cip_free` with the core graphs of A and B already built."""
    rank = x.rank
    if not (y.rank == ga.rank == gb.rank == rank):
        raise ValueError("rank mismatch")
    ta, vx = _extend(ga, x.inverse())
    tb, vy = _extend(gb, y.inverse())
    start = (vx, vy)
    parent: dict[tuple[int, int], tuple[tuple[int, int], int] | None] = {start: None}
    queue = deque([start])
    found = start == (0, 0)
    while queue and not found:
        p = queue.popleft()
        for s in range(2 * rank):
            a, b = ta[p[0]][s], tb[p[1]][s]
            if a < 0 or b < 0 or (a, b) in parent:
                continue
            parent[(a, b)] = (p, _letter(s))
            if (a, b) == (0, 0):
                found = True
                break
            queue.append((a, b))
    if not found:
        return Decision.no()
    letters: list[int] = []
    p = (0, 0)
    while parent[p] is not None:
        p, l = parent[p]  # type: ignore[misc]
        letters.append(l)
    w = FreeWord._raw(rank, _reduce_letters(reversed(letters)))
    checked = (
        membership_express(ga, x.inverse() * w).is_yes and membership_express(gb, y.inverse() * w).is_yes
    )
    if not checked:
        raise AssertionError("coset intersection witness failed membership check")
    return Decision.yes(w)


def enumerate_index_subgroups(rank: int, index: int, budget: int = 10**6) -> list[SubgroupGraph]:
    """Every subgroup of index ``index`` in the free group of rank ``rank``, once each.

    Backtracks over partial permutation tables, always filling the first
    undefined entry so that vertex numbers come out breadth-first.
    ``budget`` bounds the number of search nodes.
    """
    if rank < 1 or index < 1:
        raise ValueError("rank and index must be positive")
    width = 2 * rank
    table = [[-1] * width for _ in range(index)]
    results: list[SubgroupGraph] = []
    seen: set[tuple] = set()
    nodes = 0

    def first_gap(used: int) -> tuple[int, int] | None:
        for v in range(used):
            row = table[v]
            for s in range(width):
                if row[s] < 0:
                    return v, s
        return None

    def search(used: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise OverflowBudget(f"index-{index} enumeration exceeded {budget} nodes")
        gap = first_gap(used)
        if gap is None:
            if used == index:
                g = _canonical(rank, index, [(v, i + 1, table[v][2 * i], None)
                                             for v in range(index) for i in range(rank)], False)
                if g.table in seen:
                    raise AssertionError("duplicate subgroup in enumeration")
                seen.add(g.table)
                results.append(SubgroupGraph(rank, g.table, None, tuple(g.basis())))
            return
        v, s = gap
        inv = s ^ 1
        targets = [w for w in range(used) if table[w][inv] < 0]
        if used < index:
            targets.append(used)
        for w in targets:
            table[v][s] = w
            table[w][inv] = v
            search(max(used, w + 1))
            table[v][s] = -1
            table[w][inv] = -1

    search(1)
    return results


def aut_invert(phi: FreeAutomorphism) -> FreeAutomorphism:
    """Fill in the inverse of ``phi``; raise NotAnAutomorphism if the images do not generate."""
    g = core_graph(phi.images, phi.rank)
    if index_or_infinite(g) != 1:
        raise NotAnAutomorphism("images do not generate the free group")
    inverse = []
    for i in range(phi.rank):
        expr = express_in_generators(g, FreeWord.generator(phi.rank, i + 1))
        inverse.append(FreeWord(phi.rank, expr))
    # the constructor checks both compositions
    return FreeAutomorphism(phi.rank, phi.images, tuple(inverse))


def format_graph(g: SubgroupGraph) -> str:  # pragma: no cover - debugging aid
    return g.dump() + "\nbasis: " + ", ".join(format_word(b) for b in g.basis())
