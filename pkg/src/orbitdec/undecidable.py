"""Constructions behind the negative results.

Mihailova subgroups of F_n × F_n, Miller's groups G(H) = F_{n+1} ⋊ F_{m+n},
a block embedding of F_2 × F_2 into GL_4(Z) with trivial stabilizer of
(1,0,1,0), and the automorphisms q ↦ w1 q w2 of F_3 = <q, a, b>.
The base presentation H is pluggable; only decidable H are exercised.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from .coset_enum import Presentation, todd_coxeter
from .decision import Decision
from .gl2 import KERNEL_NAMES, evaluate_kernel_word, stabilizer_word
from .lattice import IntMatrix, solve_row_system
from .stallings import aut_invert, core_graph, pullback_intersection
from .words import FreeAutomorphism, FreeWord, _reduce_letters, commutator, conjugacy_free, format_word

__all__ = [
    "MihailovaSubgroup",
    "mihailova_generators",
    "mihailova_membership",
    "wp_abelian",
    "wp_free",
    "wp_finite",
    "MillerSpec",
    "miller_data",
    "CandidateRejected",
    "GL4Embedding",
    "gl4_block_embedding",
    "GL4_CANDIDATES",
    "pinned_gl4_embedding",
    "format_pq",
    "ThetaAut",
    "theta_aut",
    "theta_compose",
    "stab_star_test_qaqbq",
    "orbit_undecidable_generators",
]

WordOracle = Callable[[FreeWord], bool]


# ---------------------------------------------------------------- Mihailova


@dataclass(frozen=True)
class MihailovaSubgroup:
    """Generators ``(1,R_1), ..., (1,R_m), (s_1,s_1), ..., (s_n,s_n)`` of A(H) ≤ F_n × F_n."""

    base: Presentation
    generators: tuple[tuple[FreeWord, FreeWord], ...]


def mihailova_generators(H: Presentation) -> MihailovaSubgroup:
    one = FreeWord.identity(H.rank)
    gens = [(one, r) for r in H.relators]
    gens += [(FreeWord.generator(H.rank, i), FreeWord.generator(H.rank, i)) for i in range(1, H.rank + 1)]
    return MihailovaSubgroup(H, tuple(gens))


def wp_abelian(H: Presentation) -> WordOracle:
    """Word problem of the abelianization of H; only the word problem of H itself when H is abelian."""
    rows = [r.exponent_sums() for r in H.relators]
    M = IntMatrix.of(rows) if rows else None

    def oracle(w: FreeWord) -> bool:
        e = w.exponent_sums()
        if not any(e):
            return True
        return M is not None and solve_row_system(M, e) is not None

    return oracle


def wp_free(H: Presentation) -> WordOracle:
    if H.relators:
        raise ValueError("wp_free needs a presentation without relators")
    return lambda w: w.is_identity()


def wp_finite(H: Presentation, max_cosets: int = 10**5) -> WordOracle:
    """Word problem of a finite H from its regular coset table."""
    table = todd_coxeter(H, (), max_cosets=max_cosets)
    return lambda w: table.trace(w, 0) == 0


def _relator_products(H: Presentation, target: FreeWord, conj_len: int, budget: int) -> list[tuple[FreeWord, int, int]] | None:
    """Write target as a product of conjugates ``g^-1 R^±1 g`` with |g| ≤ conj_len, by bounded search."""
    from .words import reduced_words

    pieces = []
    for g in reduced_words(H.rank, conj_len):
        for i, r in enumerate(H.relators):
            for s in (1, -1):
                pieces.append((g.inverse() * (r if s > 0 else r.inverse()) * g, g, i, s))
    start = FreeWord.identity(H.rank)
    parent: dict[FreeWord, tuple[FreeWord, int] | None] = {start: None}
    queue = deque([start])
    while queue and len(parent) <= budget:
        cur = queue.popleft()
        if cur == target:
            out = []
            while parent[cur] is not None:
                prev, pi = parent[cur]  # type: ignore[misc]
                out.append(pi)
                cur = prev
            return [(pieces[pi][1], pieces[pi][2], pieces[pi][3]) for pi in reversed(out)]
        for pi, (c, *_rest) in enumerate(pieces):
            nxt = cur * c
            if nxt not in parent and len(nxt) <= len(target) + 2 * max(len(r) for r in H.relators) + 4 * conj_len:
                parent[nxt] = (cur, pi)
                queue.append(nxt)
    return None


def _evaluate_pairs(M: MihailovaSubgroup, expr: Sequence[int]) -> tuple[FreeWord, FreeWord]:
    x = y = FreeWord.identity(M.base.rank)
    for j in expr:
        a, b = M.generators[abs(j) - 1]
        if j < 0:
            a, b = a.inverse(), b.inverse()
        x, y = x * a, y * b
    return x, y


def mihailova_membership(M: MihailovaSubgroup, pair: tuple[FreeWord, FreeWord], wp_oracle: WordOracle,
                         search_budget: int = 2000, conj_len: int = 1) -> Decision:
    """``(x, y) ∈ A(H)`` iff ``x y^-1 = 1`` in H.

    On YES an expression over the listed generators is looked for by a
    bounded search; the witness is that expression (signed indices) when one
    is found, otherwise the YES is unchecked.
    """
    x, y = pair
    if not wp_oracle(x * y.inverse()):
        return Decision.no("x and y differ in H")
    H = M.base
    m = len(H.relators)
    # (x, y) = (x, x) (1, x^-1 y) and x^-1 y is a product of relator conjugates
    diag = tuple((m + l) if l > 0 else -(m - l) for l in x.letters)
    rest = x.inverse() * y
    products = [] if rest.is_identity() else (
        _relator_products(H, rest, conj_len, search_budget) if H.relators else None)
    if products is None:
        return Decision.yes(None, checked=False, note="equal in H; no generator expression within budget")
    expr: list[int] = list(diag)
    for g, i, s in products:
        gd = tuple((m + l) if l > 0 else -(m - l) for l in g.letters)
        expr += [-j for j in reversed(gd)] + [s * (i + 1)] + list(gd)
    expr = list(_reduce_letters(expr))
    if _evaluate_pairs(M, expr) != (x, y):
        raise AssertionError("Mihailova expression failed verification")
    return Decision.yes(tuple(expr))


# ---------------------------------------------------------------- Miller


@dataclass(frozen=True)
class MillerSpec:
    """α_i: q ↦ q R_i and β_j: q ↦ s_j^-1 q s_j on F_{n+1} = <q, s_1..s_n>, and G(H)."""

    base: Presentation
    alphas: tuple[FreeAutomorphism, ...]
    betas: tuple[FreeAutomorphism, ...]
    fiber_names: tuple[str, ...]
    presentation: Presentation


def _shift(w: FreeWord, rank: int) -> FreeWord:
    # s_k is letter k+1 of F_{n+1}; q is letter 1
    return FreeWord(rank, tuple(l + 1 if l > 0 else l - 1 for l in w.letters))


def miller_data(H: Presentation) -> MillerSpec:
    n = H.rank
    r = n + 1
    q = FreeWord.generator(r, 1)
    ss = [FreeWord.generator(r, k + 2) for k in range(n)]
    alphas, betas = [], []
    for R in H.relators:
        Rs = _shift(R, r)
        alphas.append(FreeAutomorphism(r, (q * Rs, *ss), (q * Rs.inverse(), *ss)))
    for s in ss:
        betas.append(FreeAutomorphism(r, (s.inverse() * q * s, *ss), (s * q * s.inverse(), *ss)))
    for phi in alphas + betas:
        inv = aut_invert(FreeAutomorphism(r, phi.images)).inverse()
        if inv.images != phi.inverse().images:
            raise AssertionError("Miller automorphism inverse mismatch")
    if "q" in H.generators:
        raise ValueError("base generators must not be named q")
    fiber_names = ("q",) + H.generators
    t_names = tuple(f"t{i}" for i in range(1, len(alphas) + 1)) + tuple(f"d{j}" for j in range(1, n + 1))
    names = fiber_names + t_names
    total = len(names)
    rels = []
    for k, phi in enumerate(alphas + betas):
        t = FreeWord.generator(total, r + k + 1)
        for x in range(1, r + 1):
            xw = FreeWord.generator(total, x)
            img = phi.images[x - 1].with_rank(total)
            rels.append(t.inverse() * xw * t * img.inverse())
    return MillerSpec(H, tuple(alphas), tuple(betas), fiber_names, Presentation(names, tuple(rels)))


# ---------------------------------------------------------------- GL_4 embedding


class CandidateRejected(ValueError):
    def __init__(self, condition: str):
        super().__init__(f"candidate rejected: {condition}")
        self.condition = condition


@dataclass(frozen=True)
class GL4Embedding:
    p_word: FreeWord
    q_word: FreeWord
    generators: tuple[IntMatrix, IntMatrix, IntMatrix, IntMatrix]
    v: tuple[int, int, int, int]


def gl4_block_embedding(p_word: FreeWord, q_word: FreeWord) -> GL4Embedding:
    """Check that <P', Q'> is free on P', Q' and meets <R> trivially, then emit block generators.

    R is the kernel word of (1,0; 12,1), which generates the stabilizer of
    (1,0) inside <P, Q>; so the four generators meet Stab((1,0,1,0)) trivially.
    """
    for w in (p_word, q_word):
        if w.rank != 2:
            raise ValueError("P', Q' must be words over P, Q")
    g = core_graph([p_word, q_word], 2)
    if g.subgroup_rank() != 2:
        raise CandidateRejected("<P', Q'> is not free of rank 2")
    meet = pullback_intersection(g, core_graph([stabilizer_word()], 2))
    if meet.basis():
        raise CandidateRejected("<P', Q'> meets the stabilizer of (1,0)")
    Pm, Qm = evaluate_kernel_word(p_word), evaluate_kernel_word(q_word)
    I = IntMatrix.identity(2)
    gens = (IntMatrix.block_diagonal(Pm, I), IntMatrix.block_diagonal(Qm, I),
            IntMatrix.block_diagonal(I, Pm), IntMatrix.block_diagonal(I, Qm))
    return GL4Embedding(p_word, q_word, gens, (1, 0, 1, 0))


_P, _Q = FreeWord.generator(2, 1), FreeWord.generator(2, 2)
GL4_CANDIDATES = (
    (commutator(_P, _Q), commutator(_P, _Q**2)),
    (commutator(_P, _Q), commutator(_P**2, _Q)),
    (commutator(_P**2, _Q), commutator(_P, _Q**2)),
    (_P**2, _Q**2),
)


def pinned_gl4_embedding() -> GL4Embedding:
    """First candidate pair that passes both checks."""
    for p, q in GL4_CANDIDATES:
        try:
            return gl4_block_embedding(p, q)
        except CandidateRejected:
            continue
    raise CandidateRejected("no candidate pair passed")


def format_pq(w: FreeWord) -> str:
    return format_word(w, KERNEL_NAMES)


# ---------------------------------------------------------------- q ↦ w1 q w2 on F_3


def _lift_ab(w: FreeWord) -> FreeWord:
    if w.rank != 2:
        raise ValueError("words must be over a, b")
    return _shift(w, 3)


@dataclass(frozen=True)
class ThetaAut:
    """q ↦ w1 q w2, a ↦ a, b ↦ b on F_3 = <q, a, b> (w1, w2 over a, b)."""

    w1: FreeWord
    w2: FreeWord

    @property
    def aut(self) -> FreeAutomorphism:
        q, a, b = (FreeWord.generator(3, i) for i in (1, 2, 3))
        l1, l2 = _lift_ab(self.w1), _lift_ab(self.w2)
        return FreeAutomorphism(3, (l1 * q * l2, a, b), (l1.inverse() * q * l2.inverse(), a, b))

    def inverse(self) -> "ThetaAut":
        return ThetaAut(self.w1.inverse(), self.w2.inverse())

    def apply(self, w: FreeWord) -> FreeWord:
        return self.aut.apply(w)


def theta_aut(w1: FreeWord, w2: FreeWord) -> ThetaAut:
    _lift_ab(w1)
    _lift_ab(w2)
    return ThetaAut(w1, w2)


def theta_compose(x: ThetaAut, y: ThetaAut) -> ThetaAut:
    """x then y: q ↦ (x.w1 y.w1) q (y.w2 x.w2)."""
    return ThetaAut(x.w1 * y.w1, y.w2 * x.w2)


_V_LETTERS = (1, 2, 1, 3, 1)  # q a q b q


def _cyclic_core(letters: list[int]) -> list[int]:
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    return letters[i:j + 1]


def _reduce_list(letters) -> list[int]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def stab_star_test_qaqbq(w1: FreeWord, w2: FreeWord) -> bool:
    """Whether q ↦ w1 q w2 sends qaqbq to a conjugate of itself.

    The image w1 q w2 a w1 q w2 b w1 q w2 is compared with qaqbq by
    conjugacy in F_3; a cyclic-length mismatch is rejected before that.
    """
    l1 = [l + 1 if l > 0 else l - 1 for l in w1.letters]
    l2 = [l + 1 if l > 0 else l - 1 for l in w2.letters]
    X = l1 + [1] + l2
    img = _reduce_list(X + [2] + X + [3] + X)
    if len(_cyclic_core(img)) != len(_V_LETTERS):
        return False
    return conjugacy_free(FreeWord(3, tuple(img)), FreeWord(3, _V_LETTERS)).is_yes


def orbit_undecidable_generators(H: Presentation) -> list[tuple[str, ThetaAut]]:
    """The θ-automorphisms ``1θ_{R_i}``, ``a^-1 θ_a``, ``b^-1 θ_b`` built from a presentation on a, b."""
    if H.rank != 2:
        raise ValueError("need a presentation on two generators")
    one = FreeWord.identity(2)
    a, b = FreeWord.generator(2, 1), FreeWord.generator(2, 2)
    out = [(f"1θ_{{{H.format(R)}}}", ThetaAut(one, R)) for R in H.relators]
    out.append((f"{H.generators[0]}^-1θ_{H.generators[0]}", ThetaAut(a.inverse(), a)))
    out.append((f"{H.generators[1]}^-1θ_{H.generators[1]}", ThetaAut(b.inverse(), b)))
    return out
