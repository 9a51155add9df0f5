"""Conjugacy in F ⋊ F_m for F free abelian or free, and the reductions around it.

Elements are normal forms ``w·f`` with ``w`` a word in t_1..t_m and ``f`` in
the fiber; the defining relation ``t^-1 f t = f·φ`` reads ``f t = t (f·φ)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .coset_enum import _transversal
from .decision import Decision
from .gl2 import od_gl2_subgroup
from .lattice import IntMatrix, IntVector, od_cyclic_matrix, od_gcd_full, tcp_zn, vec_add, vec_neg
from .whitehead import same_aut_orbit
from .words import FreeAutomorphism, FreeWord, conjugacy_free, root_decomposition

__all__ = [
    "FREE_ABELIAN",
    "FREE",
    "OD_STRATEGIES",
    "TCP_STRATEGIES",
    "ExtensionSpec",
    "GElement",
    "g_multiply",
    "g_inverse",
    "g_conjugate",
    "g_power",
    "action_of_word",
    "extension_ops",
    "cp_extension",
    "OrbitLiftWitness",
    "od_finite_index_lift",
    "tcp_via_cyclic_extension_cp",
    "tcp_finite_index_lift",
    "mp_via_od",
]

FREE_ABELIAN = "free_abelian"
FREE = "free"
OD_STRATEGIES = ("gcd_full", "gcd_full_sl", "cyclic", "gl2_subgroup", "finite_closure", "external", "whitehead_full")
TCP_STRATEGIES = ("zn_linear", "external")
DEFAULT_CLOSURE_BUDGET = 10**4
DEFAULT_WITNESS_BUDGET = 10**4

# external oracles:
#   od(spec, f, f2) -> Decision; witness a t-word (FreeWord) or a pair (t-word, fiber x)
#     with x^-1 (f·action(w)) x = f2
#   tcp(spec, phi, a, b) -> Decision; witness x with b = (x·phi)^-1 a x
OdOracle = Callable[["ExtensionSpec", Any, Any], Decision]
TcpOracle = Callable[["ExtensionSpec", Any, Any, Any], Decision]


class _AbelianFiber:
    def __init__(self, n: int):
        self.n = n

    def identity(self) -> IntVector:
        return (0,) * self.n

    def mul(self, a, b):
        return vec_add(a, b)

    def inv(self, a):
        return vec_neg(a)

    def act(self, f, phi: IntMatrix):
        return tuple(f) @ phi

    def aut_identity(self) -> IntMatrix:
        return IntMatrix.identity(self.n)

    def aut_mul(self, a: IntMatrix, b: IntMatrix) -> IntMatrix:
        return a @ b

    def aut_inv(self, a: IntMatrix) -> IntMatrix:
        return a.inverse()

    def basis(self) -> list[IntVector]:
        return [tuple(int(i == j) for j in range(self.n)) for i in range(self.n)]

    def belongs(self, f) -> bool:
        return type(f) is tuple and len(f) == self.n

    def check(self, f) -> IntVector:
        f = tuple(int(x) for x in f)
        if len(f) != self.n:
            raise ValueError(f"fiber vector must have length {self.n}")
        return f


class _FreeFiber:
    def __init__(self, n: int):
        self.n = n

    def identity(self) -> FreeWord:
        return FreeWord.identity(self.n)

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return a.inverse()

    def act(self, f, phi: FreeAutomorphism):
        return phi.apply(f)

    def aut_identity(self) -> FreeAutomorphism:
        return FreeAutomorphism.identity(self.n)

    def aut_mul(self, a: FreeAutomorphism, b: FreeAutomorphism) -> FreeAutomorphism:
        return a.compose(b)

    def aut_inv(self, a: FreeAutomorphism) -> FreeAutomorphism:
        return a.inverse()

    def basis(self) -> list[FreeWord]:
        return [FreeWord.generator(self.n, i + 1) for i in range(self.n)]

    def belongs(self, f) -> bool:
        return isinstance(f, FreeWord) and f.rank == self.n

    def check(self, f) -> FreeWord:
        if not isinstance(f, FreeWord) or f.rank != self.n:
            raise ValueError(f"fiber element must be a word of rank {self.n}")
        return f


@dataclass(frozen=True, eq=False)
class ExtensionSpec:
    """The group F ⋊_{φ_1..φ_m} F_m together with how to decide OD and TCP for it.

    ``od`` names the orbit strategy for the action subgroup, ``tcp`` the
    twisted-conjugacy strategy for the fiber.  ``gcd_full`` needs
    ``assume_transitive=True``: the caller vouches that the action subgroup
    is transitive on vectors of equal gcd (this is not checked).
    ``whitehead_full`` likewise assumes the action subgroup together with
    the inner automorphisms is all of Aut(F_n).
    """

    fiber: str
    n: int
    action: tuple
    od: str | None = "cyclic"
    tcp: str = "zn_linear"
    od_oracle: OdOracle | None = None
    tcp_oracle: TcpOracle | None = None
    assume_transitive: bool = False
    closure_budget: int = DEFAULT_CLOSURE_BUDGET
    witness_budget: int = DEFAULT_WITNESS_BUDGET
    _ops: Any = field(init=False, repr=False)
    _inverses: tuple = field(init=False, repr=False)
    _closure: dict | None = field(init=False, repr=False)
    _action_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "action", tuple(self.action))
        if self.fiber == FREE_ABELIAN:
            ops = _AbelianFiber(self.n)
            for a in self.action:
                if not isinstance(a, IntMatrix) or a.nrows != self.n or not a.is_unimodular():
                    raise ValueError("abelian action entries must be matrices in GL_n(Z)")
        elif self.fiber == FREE:
            ops = _FreeFiber(self.n)
            for a in self.action:
                if not isinstance(a, FreeAutomorphism) or a.rank != self.n:
                    raise ValueError("free action entries must be automorphisms of F_n")
                a.inverse()  # raises if inverse images are unknown
        else:
            raise ValueError(f"unknown fiber type {self.fiber!r}")
        if self.n < 1 or not self.action:
            raise ValueError("need n >= 1 and at least one action generator")
        object.__setattr__(self, "_ops", ops)
        object.__setattr__(self, "_inverses", tuple(ops.aut_inv(a) for a in self.action))
        object.__setattr__(self, "_closure", None)
        self._check_strategies()

    @property
    def m(self) -> int:
        return len(self.action)

    def _check_strategies(self) -> None:
        od, abelian = self.od, self.fiber == FREE_ABELIAN
        if od is not None and od not in OD_STRATEGIES:
            raise ValueError(f"unknown od strategy {od!r}")
        if self.tcp not in TCP_STRATEGIES:
            raise ValueError(f"unknown tcp strategy {self.tcp!r}")
        if od == "external" and self.od_oracle is None:
            raise ValueError("external od strategy needs od_oracle")
        if self.tcp == "external" and self.tcp_oracle is None:
            raise ValueError("external tcp strategy needs tcp_oracle")
        if not abelian:
            if od not in (None, "external", "whitehead_full"):
                raise ValueError(f"od strategy {od!r} needs a free abelian fiber")
            if self.tcp != "external":
                raise ValueError("free fibers need an external tcp oracle")
            return
        if od == "whitehead_full":
            raise ValueError("whitehead_full needs a free fiber")
        if od == "cyclic" and self.m != 1:
            raise ValueError("cyclic od strategy needs m == 1")
        if od == "gl2_subgroup" and self.n != 2:
            raise ValueError("gl2_subgroup od strategy needs n == 2")
        if od == "gcd_full" and not self.assume_transitive:
            raise ValueError("gcd_full needs assume_transitive=True")
        if od == "gcd_full_sl" and self.n < 2:
            raise ValueError("gcd_full_sl needs n >= 2")
        if od == "finite_closure":
            object.__setattr__(self, "_closure", self._finite_closure())

    def _finite_closure(self) -> dict:
        """Every element of the action subgroup with a t-word, or ValueError past the budget."""
        ops = self._ops
        letters = [j for i in range(1, self.m + 1) for j in (i, -i)]
        start = ops.aut_identity()
        words: dict = {start: ()}
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for j in letters:
                b = ops.aut_mul(a, self.generator_aut(j))
                if b not in words:
                    words[b] = words[a] + (j,)
                    if len(words) > self.closure_budget:
                        raise ValueError(f"action subgroup has more than {self.closure_budget} elements")
                    queue.append(b)
        return words

    def generator_aut(self, letter: int):
        return self.action[letter - 1] if letter > 0 else self._inverses[-letter - 1]

    def t_word(self, letters: Sequence[int] | FreeWord) -> FreeWord:
        if isinstance(letters, FreeWord):
            if letters.rank != self.m:
                raise ValueError("t-word rank mismatch")
            return letters
        return FreeWord(self.m, tuple(letters)) if _is_reduced(letters) else _reduce_t(self.m, letters)

    def element(self, t: Sequence[int] | FreeWord = (), f: Any = None) -> "GElement":
        fib = self._ops.identity() if f is None else self._ops.check(f)
        return GElement(self.t_word(t), fib)

    def identity(self) -> "GElement":
        return self.element()

    def fiber_basis(self) -> list["GElement"]:
        return [self.element((), b) for b in self._ops.basis()]

    def t_generators(self) -> list["GElement"]:
        return [self.element((i,)) for i in range(1, self.m + 1)]


def _is_reduced(letters: Sequence[int]) -> bool:
    return all(letters[i] != -letters[i + 1] for i in range(len(letters) - 1))


def _reduce_t(m: int, letters: Sequence[int]) -> FreeWord:
    w = FreeWord.identity(m)
    for x in letters:
        w = w * FreeWord(m, (x,))
    return w


@dataclass(frozen=True)
class GElement:
    """The element ``h · f`` of the extension."""

    h: FreeWord
    f: Any

    def __str__(self) -> str:
        from .words import format_word

        fib = list(self.f) if isinstance(self.f, tuple) else str(self.f)
        return f"({format_word(self.h, [f't{i}' for i in range(1, self.h.rank + 1)])}, {fib})"


def _check(spec: ExtensionSpec, g: GElement) -> None:
    if g.h.rank != spec.m:
        raise ValueError("element does not belong to this extension")
    if not spec._ops.belongs(g.f):
        spec._ops.check(g.f)


def action_of_word(spec: ExtensionSpec, w: FreeWord | Sequence[int]):
    """Fiber automorphism induced by a t-word; a homomorphism for the right action."""
    letters = w.letters if isinstance(w, FreeWord) else tuple(w)
    cache = spec._action_cache
    if letters in cache:
        return cache[letters]
    ops = spec._ops
    out = ops.aut_identity()
    for j in letters:
        out = ops.aut_mul(out, spec.generator_aut(j))
    if len(cache) < 1 << 16:
        cache[letters] = out
    return out


def g_multiply(spec: ExtensionSpec, g1: GElement, g2: GElement) -> GElement:
    _check(spec, g1)
    _check(spec, g2)
    ops = spec._ops
    return GElement(g1.h * g2.h, ops.mul(ops.act(g1.f, action_of_word(spec, g2.h)), g2.f))


def g_inverse(spec: ExtensionSpec, g: GElement) -> GElement:
    _check(spec, g)
    ops = spec._ops
    hinv = g.h.inverse()
    return GElement(hinv, ops.act(ops.inv(g.f), action_of_word(spec, hinv)))


def g_conjugate(spec: ExtensionSpec, g: GElement, c: GElement) -> GElement:
    """``c^-1 g c``."""
    return g_multiply(spec, g_multiply(spec, g_inverse(spec, c), g), c)


def g_power(spec: ExtensionSpec, g: GElement, k: int) -> GElement:
    base = g if k >= 0 else g_inverse(spec, g)
    out = spec.identity()
    for _ in range(abs(k)):
        out = g_multiply(spec, out, base)
    return out


def extension_ops(spec: ExtensionSpec):
    """``GroupOps`` on t-generators followed by the fiber basis, for black-box searches."""
    from .words import GroupOps

    return GroupOps(
        identity=spec.identity(),
        generators=spec.t_generators() + spec.fiber_basis(),
        mul=lambda a, b: g_multiply(spec, a, b),
        inv=lambda a: g_inverse(spec, a),
    )


# ---------------------------------------------------------------- orbit step


def _search_orbit_word(spec: ExtensionSpec, f, f2, budget: int) -> FreeWord | None:
    """Breadth-first search over t-words for ``f·action(w) = f2`` (abelian fiber)."""
    ops = spec._ops
    letters = [j for i in range(1, spec.m + 1) for j in (i, -i)]
    seen = {tuple(f): ()}
    queue = deque([tuple(f)])
    while queue and len(seen) <= budget:
        a = queue.popleft()
        if a == tuple(f2):
            return spec.t_word(seen[a])
        for j in letters:
            b = ops.act(a, spec.generator_aut(j))
            if b not in seen:
                seen[b] = seen[a] + (j,)
                queue.append(b)
    return None


def _orbit_step(spec: ExtensionSpec, f, f2) -> Decision:
    """Is ``f2`` conjugate in F to ``f·action(w)`` for some w?  Witness ``(w, x)`` or None."""
    od, ops = spec.od, spec._ops
    ident = ops.identity()
    if od is None:
        raise ValueError("this extension has no od strategy")
    if od == "cyclic":
        d = od_cyclic_matrix(spec.action[0], f, f2)
        return Decision.yes((spec.t_word((1,) * d.witness if d.witness >= 0 else (-1,) * -d.witness), ident)) if d.is_yes else d
    if od == "finite_closure":
        for M, word in spec._closure.items():
            if ops.act(f, M) == tuple(f2):
                return Decision.yes((spec.t_word(word), ident))
        return Decision.no("target not in the finite orbit")
    if od == "gl2_subgroup":
        d = od_gl2_subgroup(list(spec.action), f, f2)
        return Decision.yes((spec.t_word(d.witness.word), ident)) if d.is_yes else d
    if od in ("gcd_full", "gcd_full_sl"):
        d = od_gcd_full(f, f2)
        if not d.is_yes:
            return d
        if spec.n == 2:
            d2 = od_gl2_subgroup(list(spec.action), f, f2)
            if not d2.is_yes:
                raise AssertionError("transitivity assertion contradicted by the orbit oracle")
            return Decision.yes((spec.t_word(d2.witness.word), ident))
        w = _search_orbit_word(spec, f, f2, spec.witness_budget)
        if w is not None:
            return Decision.yes((w, ident))
        return Decision.yes(None, checked=False, note="gcd classes agree; no orbit word found within budget")
    if od == "whitehead_full":
        d = same_aut_orbit(f, f2)
        if d.is_yes:
            return Decision.yes(None, checked=False, note="same Aut(F_n)-orbit; automorphism chain not expressed in t-words")
        return d
    d = spec.od_oracle(spec, f, f2)
    if not d.is_yes:
        return d
    wit = d.witness
    if wit is None:
        return Decision.yes(None, checked=False, note=d.note)
    if isinstance(wit, FreeWord):
        return Decision.yes((wit, ident))
    return Decision.yes((spec.t_word(wit[0]), wit[1]))


def _twisted_step(spec: ExtensionSpec, phi, a, b) -> Decision:
    """Twisted conjugacy ``b = (x·phi)^-1 a x`` in the fiber."""
    if spec.tcp == "zn_linear":
        return tcp_zn(phi, a, b)
    return spec.tcp_oracle(spec, phi, a, b)


def cp_extension(spec: ExtensionSpec, g: GElement, g2: GElement) -> Decision:
    """Decide whether ``c^-1 g c = g2`` for some c in the extension; YES carries c.

    The t-parts are made equal with a free-group conjugator first.  If they
    are trivial the question is an orbit question for the action subgroup.
    Otherwise only conjugators whose t-part centralizes it matter; these are
    ``g^r y_i x`` with y_i running over the root powers, and the fiber part x
    solves a twisted conjugacy equation.
    """
    _check(spec, g)
    _check(spec, g2)
    ops = spec._ops
    d = conjugacy_free(g.h, g2.h)
    if not d.is_yes:
        return Decision.no("t-parts are not conjugate in F_m")
    u = GElement(d.witness, ops.identity())
    g1 = g_conjugate(spec, g, u)
    assert g1.h == g2.h
    h = g2.h

    def finish(c: GElement, note: str = "") -> Decision:
        if g_conjugate(spec, g, c) != g2:
            raise AssertionError("extension conjugator failed verification")
        return Decision.yes(c, note=note)

    if h.is_identity():
        d = _orbit_step(spec, g1.f, g2.f)
        if not d.is_yes:
            return d
        if d.witness is None:
            return d
        w, x = d.witness
        return finish(g_multiply(spec, u, GElement(w, x)))

    phi = action_of_word(spec, h)
    rd = root_decomposition(h)
    pending = None
    for i in range(rd.exponent):
        y = GElement(rd.root**i, ops.identity())
        q = g_conjugate(spec, g1, y)
        assert q.h == h
        t = _twisted_step(spec, phi, q.f, g2.f)
        if t.is_yes:
            c = g_multiply(spec, g_multiply(spec, u, y), GElement(FreeWord.identity(spec.m), t.witness))
            return finish(c)
        if not t.is_no:
            pending = t
    if pending is not None:
        return Decision.unknown(f"twisted conjugacy oracle inconclusive: {pending.note}")
    return Decision.no(f"no twisted solution over {rd.exponent} root cosets")


# ---------------------------------------------------------------- other reductions


@dataclass(frozen=True)
class OrbitLiftWitness:
    """``v`` is reached from ``u·representative`` by ``inner``; ``word`` spells the representative in B_gens."""

    representative: Any
    word: tuple[int, ...]
    inner: Any


def od_finite_index_lift(od_A: Callable[[Any, Any], Decision], mp_AB: Callable[[Any], bool],
                         B_gens: Sequence[Any], u: Any, v: Any, *, act: Callable[[Any, Any], Any],
                         mul: Callable, inv: Callable, identity: Any,
                         budget: int = DEFAULT_CLOSURE_BUDGET) -> Decision:
    """Orbit decidability of B from that of a finite-index A ≤ B.

    With ``B = ⊔ β_i A`` the orbit of u under B is the union of the A-orbits
    of the ``u β_i``.  Representatives are collected by prepending generators
    of B and testing new cosets with ``mp_AB``.
    """
    reps = _transversal(mul, inv, identity, list(B_gens), mp_AB, budget)
    pending = None
    for beta, word in reps:
        d = od_A(act(u, beta), v)
        if d.is_yes:
            return Decision.yes(OrbitLiftWitness(beta, word, d.witness), checked=d.certificate_checked, note=d.note)
        if not d.is_no:
            pending = d
    if pending is not None:
        return Decision.unknown(f"inner orbit oracle inconclusive: {pending.note}")
    return Decision.no(f"none of {len(reps)} coset representatives reaches v")


def _to_base_power(phi, apply: Callable, inv_apply: Callable, a, k: int, mul, inv):
    """Twisted conjugator X with ``a·phi^k = (X·phi)^-1 a X``, from ``a ∼ a·phi``."""
    X = None
    cur = a
    for _ in range(abs(k)):
        if k > 0:
            step = inv(cur)
            cur = apply(cur)
        else:
            cur = inv_apply(cur)
            step = cur
        X = step if X is None else mul(X, step)
    return X


def tcp_via_cyclic_extension_cp(spec: ExtensionSpec, u: Any, v: Any,
                                cp_oracle: Callable[[ExtensionSpec, GElement, GElement], Decision] | None = None
                                ) -> Decision:
    """Twisted conjugacy for φ = the single action generator, via conjugacy of ``t u`` and ``t v``.

    A conjugator ``t^k x`` gives ``v = (x·φ)^-1 (u·φ^k) x``, and ``u·φ^k`` is
    twisted-conjugate to u by chaining ``a ∼ a·φ``.  YES carries x with
    ``v = (x·φ)^-1 u x``.
    """
    if spec.m != 1:
        raise ValueError("need a cyclic extension")
    oracle = cp_oracle or cp_extension
    ops = spec._ops
    phi = spec.action[0]
    u, v = ops.check(u), ops.check(v)
    d = oracle(spec, spec.element((1,), u), spec.element((1,), v))
    if not d.is_yes:
        return d
    c: GElement = d.witness
    if c is None:
        return Decision.yes(None, checked=False, note=d.note)
    # c centralizes t modulo the fiber, so its t-part is a power of t
    k = sum(c.h.letters)
    if c.h.letters != ((1,) * k if k >= 0 else (-1,) * -k):
        raise AssertionError("conjugator t-part does not centralize t")
    phi_inv = spec._inverses[0]
    X = _to_base_power(phi, lambda a: ops.act(a, phi), lambda a: ops.act(a, phi_inv), u, k, ops.mul, ops.inv)
    x = c.f if X is None else ops.mul(X, c.f)
    if ops.mul(ops.mul(ops.inv(ops.act(x, phi)), u), x) != v:
        raise AssertionError("twisted conjugator failed verification")
    return Decision.yes(x)


def tcp_finite_index_lift(*, mul: Callable, inv: Callable, eq: Callable[[Any, Any], bool] | None = None,
                          reps: Sequence[Any], decompose: Callable[[Any], tuple[int, Any]],
                          phi: Callable[[Any], Any], tcp_K: Callable[[Callable[[Any], Any], Any, Any], Decision],
                          u: Any, v: Any) -> Decision:
    """Twisted conjugacy in F from twisted conjugacy in a characteristic finite-index K.

    ``reps`` are left coset representatives (``reps[0]`` the identity) and
    ``decompose(g) = (i, z)`` writes ``g = reps[i] z`` with z in K.
    ``tcp_K(psi, a, b)`` answers ``b = (k·psi)^-1 a k`` in K, where psi is
    given as a function on K.  YES carries X with ``v = (X·phi)^-1 u X``.
    """
    eq = eq or (lambda a, b: a == b)
    i, z = decompose(u)
    j, z2 = decompose(v)
    yj, yj_inv = reps[j], inv(reps[j])

    def psi(k):
        return mul(mul(yj_inv, phi(k)), yj)

    pending = None
    for l, yl in enumerate(reps):
        w = mul(mul(inv(phi(yl)), u), yl)
        jl, kl = decompose(w)
        if not eq(mul(reps[jl], kl), w):
            raise AssertionError("coset decomposition hook is inconsistent")
        if jl != j:
            continue
        d = tcp_K(psi, z2, kl)
        if d.is_yes:
            X = mul(yl, inv(d.witness))
            if not eq(mul(mul(inv(phi(X)), u), X), v):
                raise AssertionError("lifted twisted conjugator failed verification")
            return Decision.yes(X)
        if not d.is_no:
            pending = d
    if pending is not None:
        return Decision.unknown(f"inner oracle inconclusive: {pending.note}")
    return Decision.no()


def mp_via_od(od_A: Callable[[Any, Any], Decision], v: Any, psi: Any, act: Callable[[Any, Any], Any]) -> Decision:
    """Membership of psi in A, sound when B ∩ Stab*(v) is trivial for a B containing psi and A."""
    return od_A(v, act(v, psi))
