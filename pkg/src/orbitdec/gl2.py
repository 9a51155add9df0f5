"""GL_2(Z) as the amalgam D4 *_{D2} D6.

Generators (as matrices acting on row vectors from the right)::

    t4 = t6 = (0,1; 1,0)    x4 = (0,-1; 1,0)    x6 = (1,-1; 1,0)

The map onto D12 sends t4, t6 to the reflection t, x4 to x^3 and x6 to x^2.
Its kernel K is free on P = [x6, x4] = (1,1; 1,2) and Q = [x6^2, x4] = (2,1; 1,1)
and has index 24.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from itertools import product
from typing import Sequence

from .coset_enum import CipCertificate, CosetTable, Presentation, cip_lift, coset_decompose, \
    reidemeister_schreier, todd_coxeter
from .decision import Decision
from .lattice import IntMatrix, od_gcd_full, stab2_generators
from .stallings import cip_free_graphs, core_graph, express_in_generators
from .words import FreeWord, commutator, format_word, parse_word, _reduce_letters

__all__ = [
    "AmalgamWord",
    "D12Element",
    "GL2_PRESENTATION",
    "GENERATOR_MATRICES",
    "P_MATRIX",
    "Q_MATRIX",
    "NotInKernel",
    "OrbitWitness",
    "word_to_matrix",
    "matrix_to_word",
    "project_d12",
    "kernel_membership",
    "kernel_rewrite",
    "evaluate_kernel_word",
    "cip_gl2",
    "od_gl2_subgroup",
    "stabilizer_word",
]

NAMES = ("t4", "x4", "t6", "x6")
ORDERS = {"t4": 2, "x4": 4, "t6": 2, "x6": 6}

T4 = IntMatrix.of([[0, 1], [1, 0]])
X4 = IntMatrix.of([[0, -1], [1, 0]])
X6 = IntMatrix.of([[1, -1], [1, 0]])
GENERATOR_MATRICES = {"t4": T4, "x4": X4, "t6": T4, "x6": X6}
P_MATRIX = IntMatrix.of([[1, 1], [1, 2]])
Q_MATRIX = IntMatrix.of([[2, 1], [1, 1]])
I2 = IntMatrix.identity(2)

GL2_PRESENTATION = Presentation(
    NAMES,
    tuple(
        parse_word(r, NAMES, 4)
        for r in ["t4^2", "x4^4", "(t4 x4)^2", "t6^2", "x6^6", "(t6 x6)^2", "t4 t6^-1", "x4^2 x6^-3"]
    ),
)
KERNEL_NAMES = ("P", "Q")


class NotInKernel(ValueError):
    pass


def _normal_exponent(name: str, e: int) -> int:
    n = ORDERS[name]
    e %= n
    if e > n // 2:
        e -= n
    return e


@dataclass(frozen=True)
class AmalgamWord:
    """Word in t4, x4, t6, x6 with exponents reduced modulo the generator orders."""

    letters: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        out: list[list] = []
        for name, e in self.letters:
            if name not in ORDERS:
                raise ValueError(f"unknown amalgam generator {name!r}")
            if out and out[-1][0] == name:
                out[-1][1] += e
            else:
                out.append([name, e])
            out[-1][1] = _normal_exponent(name, out[-1][1])
            if out[-1][1] == 0:
                out.pop()
        object.__setattr__(self, "letters", tuple((n, e) for n, e in out))

    @classmethod
    def parse(cls, text: str) -> "AmalgamWord":
        return cls.from_free(parse_word(text, NAMES, 4))

    @classmethod
    def from_free(cls, w: FreeWord) -> "AmalgamWord":
        return cls(tuple((NAMES[abs(x) - 1], 1 if x > 0 else -1) for x in w.letters))

    def to_free(self) -> FreeWord:
        letters = []
        for name, e in self.letters:
            i = NAMES.index(name) + 1
            letters += [i if e > 0 else -i] * abs(e)
        return FreeWord(4, _reduce_letters(letters))

    def __mul__(self, other: "AmalgamWord") -> "AmalgamWord":
        return AmalgamWord(self.letters + other.letters)

    def inverse(self) -> "AmalgamWord":
        return AmalgamWord(tuple((n, -e) for n, e in reversed(self.letters)))

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(n if e == 1 else f"{n}^{e}" for n, e in self.letters)


def word_to_matrix(w: AmalgamWord | FreeWord) -> IntMatrix:
    if isinstance(w, FreeWord):
        w = AmalgamWord.from_free(w)
    out = I2
    for name, e in w.letters:
        out = out @ (GENERATOR_MATRICES[name] ** e)
    return out


_T_WORD = AmalgamWord((("x6", 1), ("x4", -1)))  # (1,1; 0,1)
_S_WORD = AmalgamWord((("x4", 1),))


def _power(w: AmalgamWord, k: int) -> AmalgamWord:
    base = w if k >= 0 else w.inverse()
    return AmalgamWord(base.letters * abs(k))


def matrix_to_word(M: IntMatrix) -> AmalgamWord:
    """Amalgam word for M by the Euclidean algorithm on the first column."""
    if M.nrows != 2 or M.ncols != 2:
        raise ValueError("GL_2 matrix must be 2x2")
    d = M.det()
    if abs(d) != 1:
        raise ValueError("matrix is not in GL_2(Z)")
    prefix = AmalgamWord()
    N = M
    if d == -1:
        prefix = AmalgamWord((("t4", 1),))
        N = T4 @ M
    # N = L_1^-1 L_2^-1 ... L_r^-1 (upper triangular); inverses holds the L_i^-1
    inverses: list[AmalgamWord] = []
    Tm = IntMatrix.of([[1, 1], [0, 1]])
    while N[1, 0] != 0:
        a, c = N[0, 0], N[1, 0]
        k = a // c
        if k:
            N = (Tm ** (-k)) @ N
            inverses.append(_power(_T_WORD, k))
        N = X4 @ N
        inverses.append(_S_WORD.inverse())
    a, b = N[0, 0], N[0, 1]
    tail = _power(_T_WORD, a * b)
    if a == -1:
        tail = AmalgamWord((("x4", 2),)) * tail
    word = prefix
    for w in inverses:
        word = word * w
    word = word * tail
    if word_to_matrix(word) != M:
        raise AssertionError("matrix_to_word failed round trip")
    return word


@dataclass(frozen=True)
class D12Element:
    """``t^reflection x^rotation`` in the dihedral group of order 24."""

    reflection: int = 0
    rotation: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "reflection", self.reflection % 2)
        object.__setattr__(self, "rotation", self.rotation % 12)

    def __mul__(self, other: "D12Element") -> "D12Element":
        # x t = t x^-1
        sign = -1 if other.reflection else 1
        return D12Element(self.reflection + other.reflection, sign * self.rotation + other.rotation)

    def inverse(self) -> "D12Element":
        if self.reflection:
            return self
        return D12Element(0, -self.rotation)

    @property
    def is_identity(self) -> bool:
        return self.reflection == 0 and self.rotation == 0

    def __str__(self) -> str:
        parts = (["t12"] if self.reflection else []) + ([f"x12^{self.rotation}"] if self.rotation else [])
        return " ".join(parts) or "1"


_D12_IMAGE = {"t4": D12Element(1, 0), "t6": D12Element(1, 0), "x4": D12Element(0, 3), "x6": D12Element(0, 2)}


_D12_T = D12Element(0, -1)  # image of x6 x4^-1
_D12_S = D12Element(0, 3)


def _project_matrix(M: IntMatrix) -> D12Element:
    """Projection of a GL_2 matrix, following the reduction of :func:`matrix_to_word`."""
    (a, b), (c, d) = M.rows
    det = a * d - b * c
    if abs(det) != 1:
        raise ValueError("matrix is not in GL_2(Z)")
    out = D12Element()
    if det == -1:
        out = D12Element(1, 0)
        a, b, c, d = c, d, a, b
    while c != 0:
        k = a // c
        if k:
            a, b = a - k * c, b - k * d
            out = out * D12Element(0, -k)
        # left multiplication by x4 sends rows (r1; r2) to (-r2; r1)
        a, b, c, d = -c, -d, a, b
        out = out * D12Element(0, -3)
    tail = D12Element(0, -a * b)
    if a == -1:
        tail = D12Element(0, 6) * tail
    return out * tail


def project_d12(w: AmalgamWord | FreeWord | IntMatrix) -> D12Element:
    if isinstance(w, IntMatrix):
        if w.nrows != 2 or w.ncols != 2:
            raise ValueError("GL_2 matrix must be 2x2")
        return _project_matrix(w)
    elif isinstance(w, FreeWord):
        w = AmalgamWord.from_free(w)
    out = D12Element()
    for name, e in w.letters:
        g = _D12_IMAGE[name] if e > 0 else _D12_IMAGE[name].inverse()
        for _ in range(abs(e)):
            out = out * g
    return out


def kernel_membership(M: IntMatrix) -> bool:
    return project_d12(M).is_identity


# ---------------------------------------------------------------- kernel rewriting


def evaluate_kernel_word(w: FreeWord) -> IntMatrix:
    """Matrix of a word over P, Q."""
    if w.rank != 2:
        raise ValueError("kernel words have rank 2")
    mats = {1: P_MATRIX, -1: P_MATRIX.inverse(), 2: Q_MATRIX, -2: Q_MATRIX.inverse()}
    out = I2
    for x in w.letters:
        out = out @ mats[x]
    return out


def _norm(M: IntMatrix) -> int:
    return sum(abs(x) for r in M.rows for x in r)


_PQ = {1: P_MATRIX, -1: P_MATRIX.inverse(), 2: Q_MATRIX, -2: Q_MATRIX.inverse()}


def _peel(M: IntMatrix, max_steps: int = 200) -> FreeWord | None:
    """Greedy: strip the leading P^±1, Q^±1 that most reduces the entry norm."""
    letters: list[int] = []
    N = M
    for _ in range(max_steps):
        if N == I2:
            w = FreeWord(2, _reduce_letters(letters))
            return w
        best = None
        for x in (1, -1, 2, -2):
            if letters and letters[-1] == -x:
                continue
            cand = _PQ[-x] @ N
            if best is None or _norm(cand) < best[0]:
                best = (_norm(cand), x, cand)
        if best[0] >= _norm(N):
            return None
        letters.append(best[1])
        N = best[2]
    return None


@cache
def _words_by_matrix(max_len: int) -> dict[tuple, FreeWord]:
    table: dict[tuple, FreeWord] = {I2.rows: FreeWord.identity(2)}
    level = [((), I2)]
    for _ in range(max_len):
        nxt = []
        for letters, M in level:
            for x in (1, -1, 2, -2):
                if letters and letters[-1] == -x:
                    continue
                N = M @ _PQ[x]
                w = letters + (x,)
                table.setdefault(N.rows, FreeWord(2, w))
                nxt.append((w, N))
        level = nxt
    return table


def _search_kernel_word(M: IntMatrix, half: int = 7) -> FreeWord:
    """Meet-in-the-middle search for the reduced P, Q word of M (length <= 2*half)."""
    table = _words_by_matrix(half)
    for rows, w in table.items():
        rest = IntMatrix(rows).inverse() @ M
        v = table.get(rest.rows)
        if v is not None:
            return w * v
    raise AssertionError("kernel element beyond the search horizon")


@dataclass(frozen=True)
class _KernelTables:
    coset_table: CosetTable
    schreier_words: tuple[FreeWord, ...]


@cache
def _kernel_tables() -> _KernelTables:
    p_word = commutator(GL2_PRESENTATION.word("x6"), GL2_PRESENTATION.word("x4"))
    q_word = commutator(GL2_PRESENTATION.word("x6^2"), GL2_PRESENTATION.word("x4"))
    t = todd_coxeter(GL2_PRESENTATION, [p_word, q_word])
    if t.index != 24:
        raise AssertionError("kernel of the D12 projection must have index 24")
    out = []
    for s in reidemeister_schreier(t):
        M = word_to_matrix(s)
        w = _peel(M) or _search_kernel_word(M)
        if evaluate_kernel_word(w) != M:
            raise AssertionError("Schreier generator rewrite failed")
        out.append(w)
    return _KernelTables(t, tuple(out))


def kernel_coset_table() -> CosetTable:
    return _kernel_tables().coset_table


def kernel_rewrite(M: IntMatrix) -> FreeWord:
    """The reduced word over P, Q (rank-2 FreeWord) evaluating to M."""
    if not kernel_membership(M):
        raise NotInKernel(f"{M} does not lie in the kernel of the D12 projection")
    w = _peel(M)
    if w is None:
        tables = _kernel_tables()
        p, k = coset_decompose(tables.coset_table, matrix_to_word(M).to_free())
        if p != 0:
            raise AssertionError("kernel element traced to a nontrivial coset")
        w = FreeWord.identity(2)
        for j in k:
            s = tables.schreier_words[abs(j) - 1]
            w = w * (s if j > 0 else s.inverse())
    if evaluate_kernel_word(w) != M:
        raise AssertionError("kernel rewrite failed verification")
    return w


def stabilizer_word() -> FreeWord:
    """P, Q word of (1,0; 12,1), the generator of the kernel's stabilizer of (1,0)."""
    return kernel_rewrite(IntMatrix.of([[1, 0], [12, 1]]))


# ---------------------------------------------------------------- CIP and orbits


def _kernel_cip(z: IntMatrix, a_gens: list[IntMatrix], b_gens: list[IntMatrix], cache_: dict) -> Decision:
    key = (tuple(a_gens), tuple(b_gens))
    if key not in cache_:
        aw = [kernel_rewrite(g) for g in a_gens]
        bw = [kernel_rewrite(g) for g in b_gens]
        cache_[key] = (core_graph(aw, 2), core_graph(bw, 2))
    ga, gb = cache_[key]
    zw = kernel_rewrite(z)
    d = cip_free_graphs(zw, ga, FreeWord.identity(2), gb)
    if not d.is_yes:
        return d
    w = d.witness
    a_expr = express_in_generators(ga, zw.inverse() * w)
    b_expr = express_in_generators(gb, w)
    return Decision.yes(CipCertificate(evaluate_kernel_word(w), a_expr, b_expr))


def _check_gl2(ms: Sequence[IntMatrix]) -> None:
    for m in ms:
        if m.nrows != 2 or m.ncols != 2 or not m.is_unimodular():
            raise ValueError(f"{m} is not in GL_2(Z)")


def cip_gl2(x: IntMatrix, a_gens: Sequence[IntMatrix], y: IntMatrix, b_gens: Sequence[IntMatrix]) -> Decision:
    """Decide whether ``x<A>`` and ``y<B>`` meet in GL_2(Z).

    Lifts coset intersection from the free kernel of the D12 projection.  The
    witness is a CipCertificate holding the common matrix W and expressions
    of ``x^-1 W`` over A and ``y^-1 W`` over B.
    """
    _check_gl2([x, y, *a_gens, *b_gens])
    store: dict = {}
    return cip_lift(
        lambda a, b: a @ b,
        lambda a: a.inverse(),
        I2,
        kernel_membership,
        lambda z, A, B: _kernel_cip(z, A, B, store),
        x,
        a_gens,
        y,
        b_gens,
        eq=lambda a, b: a == b,
    )


@dataclass(frozen=True)
class OrbitWitness:
    """Matrix W with ``uW = v`` and an expression of W over the generators."""

    matrix: IntMatrix
    word: tuple[int, ...]


def od_gl2_subgroup(gens: Sequence[IntMatrix], u: Sequence[int], v: Sequence[int]) -> Decision:
    """Orbit problem for a finitely generated subgroup of GL_2(Z).

    ``uW = v`` with W in ``<gens>`` iff ``<gens>`` meets ``M0 Stab(v)``, where
    M0 is any matrix of GL_2(Z) sending u to v.
    """
    gens = list(gens)
    _check_gl2(gens)
    u, v = tuple(u), tuple(v)
    if len(u) != 2 or len(v) != 2:
        raise ValueError("vectors must have length 2")
    if u == v:
        return Decision.yes(OrbitWitness(I2, ()))
    if not any(u) or not any(v):
        return Decision.no()
    d0 = od_gcd_full(u, v)
    if not d0.is_yes:
        return Decision.no()
    M0 = d0.witness
    d = cip_gl2(I2, gens, M0, stab2_generators(v))
    if not d.is_yes:
        return d
    W = d.witness.element
    word = d.witness.a_expr
    check = I2
    for j in word:
        check = check @ (gens[j - 1] if j > 0 else gens[-j - 1].inverse())
    if u @ W != v or check != W:
        raise AssertionError("orbit witness failed verification")
    return Decision.yes(OrbitWitness(W, word))


def format_kernel_word(w: FreeWord) -> str:
    return format_word(w, KERNEL_NAMES)


def enumerate_kernel_words(max_len: int):
    """All reduced P, Q words of length <= max_len."""
    yield FreeWord.identity(2)
    for n in range(1, max_len + 1):
        for letters in product((1, -1, 2, -2), repeat=n):
            if all(letters[i] != -letters[i + 1] for i in range(n - 1)):
                yield FreeWord._raw(2, letters)
