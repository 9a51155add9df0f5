"""Reduced words in finitely generated free groups.

Letters are signed integers: ``i`` is the i-th generator (1-based) and ``-i``
its inverse.  A :class:`FreeWord` is always freely reduced.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence

from .decision import Decision

__all__ = [
    "FreeWord",
    "FreeAutomorphism",
    "RootDecomposition",
    "GroupOps",
    "WordSyntaxError",
    "reduce",
    "parse_word",
    "format_word",
    "default_names",
    "letter_key",
    "conjugacy_free",
    "cyclic_canonical",
    "root_decomposition",
    "centralizer_cosets",
    "aut_apply",
    "aut_compose",
    "reduced_words",
    "free_group_ops",
    "bounded_conjugator_search",
    "commutator",
]


def letter_key(letter: int) -> int:
    # generator i < i^-1 < generator i+1
    return 2 * (abs(letter) - 1) + (letter < 0)


def _reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True, slots=True)
class FreeWord:
    rank: int
    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"rank must be positive, got {self.rank}")
        prev = 0
        for x in self.letters:
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x} out of range for rank {self.rank}")
            if x == -prev:
                raise ValueError("letters are not freely reduced; use reduce()")
            prev = x

    @classmethod
    def _raw(cls, rank: int, letters: tuple[int, ...]) -> "FreeWord":
        # trusted constructor for already-reduced, in-range letters
        w = object.__new__(cls)
        object.__setattr__(w, "rank", rank)
        object.__setattr__(w, "letters", letters)
        return w

    @classmethod
    def identity(cls, rank: int) -> "FreeWord":
        return cls(rank, ())

    @classmethod
    def generator(cls, rank: int, i: int) -> "FreeWord":
        return cls(rank, (i,))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def _check_rank(self, other: "FreeWord") -> None:
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        if not isinstance(other, FreeWord):
            return NotImplemented
        self._check_rank(other)
        a, b = self.letters, other.letters
        k = 0
        n = min(len(a), len(b))
        while k < n and a[len(a) - 1 - k] == -b[k]:
            k += 1
        return FreeWord._raw(self.rank, a[: len(a) - k] + b[k:])

    def inverse(self) -> "FreeWord":
        return FreeWord._raw(self.rank, tuple(-x for x in reversed(self.letters)))

    def __invert__(self) -> "FreeWord":
        return self.inverse()

    def __pow__(self, n: int) -> "FreeWord":
        if n < 0:
            return self.inverse() ** (-n)
        result = FreeWord.identity(self.rank)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self, x: "FreeWord") -> "FreeWord":
        """Return ``x^-1 self x``."""
        return x.inverse() * self * x

    def cyclic_reduction(self) -> tuple["FreeWord", "FreeWord"]:
        """Split as ``c * core * c^-1`` with ``core`` cyclically reduced."""
        a = self.letters
        i, j = 0, len(a) - 1
        while i < j and a[i] == -a[j]:
            i += 1
            j -= 1
        return (FreeWord._raw(self.rank, a[:i]), FreeWord._raw(self.rank, a[i : j + 1]))

    def is_cyclically_reduced(self) -> bool:
        a = self.letters
        return len(a) < 2 or a[0] != -a[-1]

    def cyclic_length(self) -> int:
        return len(self.cyclic_reduction()[1])

    def exponent_sums(self) -> tuple[int, ...]:
        sums = [0] * self.rank
        for x in self.letters:
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(sums)

    def with_rank(self, rank: int) -> "FreeWord":
        return FreeWord(rank, self.letters)

    def substitute(self, images: Sequence["FreeWord"]) -> "FreeWord":
        """Evaluate this word with generator i replaced by ``images[i-1]``."""
        if len(images) != self.rank:
            raise ValueError("need one image per generator")
        target = images[0].rank if images else self.rank
        inv = [None] * len(images)
        out: list[int] = []
        for x in self.letters:
            if x > 0:
                piece = images[x - 1].letters
            else:
                if inv[-x - 1] is None:
                    inv[-x - 1] = images[-x - 1].inverse().letters
                piece = inv[-x - 1]
            for y in piece:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return FreeWord._raw(target, tuple(out))

    def __str__(self) -> str:
        return format_word(self)

    def __repr__(self) -> str:
        return f"FreeWord({self.rank}, {format_word(self)!r})"


def reduce(raw: Iterable[int] | Iterable[tuple[int, int]], rank: int) -> FreeWord:
    """Freely reduce a sequence of signed letters.

    Accepts either signed integers or ``(index, sign)`` pairs.
    """
    letters: list[int] = []
    for item in raw:
        if isinstance(item, tuple):
            idx, sign = item
            if sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {sign}")
            x = idx * sign
        else:
            x = int(item)
        if x == 0 or abs(x) > rank:
            raise ValueError(f"letter {x} out of range for rank {rank}")
        letters.append(x)
    return FreeWord._raw(rank, _reduce_letters(letters))


def commutator(u: FreeWord, v: FreeWord) -> FreeWord:
    """``[u, v] = u^-1 v^-1 u v``."""
    return u.inverse() * v.inverse() * u * v


# ---------------------------------------------------------------- parsing


class WordSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


def default_names(rank: int) -> list[str]:
    if rank <= 26:
        return [chr(ord("a") + i) for i in range(rank)]
    return [f"x{i + 1}" for i in range(rank)]


_INT = re.compile(r"[+-]?\d+")


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.pos = 0
        self.names = sorted(((n, i + 1) for i, n in enumerate(names)), key=lambda p: -len(p[0]))
        self.compact_inverse = all(len(n) == 1 and n.islower() for n in names)

    def error(self, msg: str) -> WordSyntaxError:
        return WordSyntaxError(msg, self.text, self.pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and (self.text[self.pos].isspace() or self.text[self.pos] in "*."):
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> list[int]:
        out = self.expr()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}")
        return out

    def expr(self) -> list[int]:
        out: list[int] = []
        while self.peek() and self.peek() not in ",)]":
            out.extend(self.factor())
        return out

    def factor(self) -> list[int]:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.skip()
            m = _INT.match(self.text, self.pos)
            if not m:
                raise self.error("expected integer exponent")
            self.pos = m.end()
            n = int(m.group())
            if n < 0:
                base = [-x for x in reversed(base)]
                n = -n
            return base * n
        return base

    def atom(self) -> list[int]:
        c = self.peek()
        if c == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return inner
        if c == "[":
            self.pos += 1
            u = self.expr()
            if self.peek() != ",":
                raise self.error("expected ',' in commutator")
            self.pos += 1
            v = self.expr()
            if self.peek() != "]":
                raise self.error("expected ']'")
            self.pos += 1
            inv = lambda w: [-x for x in reversed(w)]  # noqa: E731
            return inv(u) + inv(v) + u + v
        for name, idx in self.names:
            if self.text.startswith(name, self.pos):
                self.pos += len(name)
                return [idx]
        if self.compact_inverse:
            for name, idx in self.names:
                if self.text.startswith(name.upper(), self.pos):
                    self.pos += 1
                    return [-idx]
        if c == "1":
            self.pos += 1
            return []
        raise self.error(f"unknown symbol {c!r}")


def parse_word(text: str, names: Sequence[str] | None = None, rank: int | None = None) -> FreeWord:
    """Parse compact (``abA``) or token (``a b a^-1``) notation.

    Also understands ``(w)^k``, commutators ``[u,v]`` and ``1`` for the
    identity.  With neither ``names`` nor ``rank`` the rank is inferred from
    the highest generator used.
    """
    if names is None:
        letters = _Parser(text, default_names(rank if rank is not None else 26)).parse()
        if rank is None:
            rank = max([abs(x) for x in letters] + [1])
    else:
        letters = _Parser(text, names).parse()
        if rank is None:
            rank = len(names)
    return reduce(letters, rank)


def format_word(w: FreeWord, names: Sequence[str] | None = None) -> str:
    if not w.letters:
        return "1"
    if names is None:
        names = default_names(w.rank)
    parts: list[str] = []
    i = 0
    a = w.letters
    while i < len(a):
        j = i
        while j < len(a) and a[j] == a[i]:
            j += 1
        n = (j - i) * (1 if a[i] > 0 else -1)
        name = names[abs(a[i]) - 1]
        parts.append(name if n == 1 else f"{name}^{n}")
        i = j
    return " ".join(parts)


# ---------------------------------------------------------------- conjugacy


def _least_rotation(letters: tuple[int, ...]) -> int:
    n = len(letters)
    if n == 0:
        return 0
    keys = [letter_key(x) for x in letters]
    best = 0
    for k in range(1, n):
        for t in range(n):
            a, b = keys[(k + t) % n], keys[(best + t) % n]
            if a != b:
                if a < b:
                    best = k
                break
    return best


def cyclic_canonical(w: FreeWord) -> FreeWord:
    """Lexicographically least rotation of the cyclic reduction of ``w``."""
    core = w.cyclic_reduction()[1].letters
    k = _least_rotation(core)
    return FreeWord._raw(w.rank, core[k:] + core[:k])


def conjugacy_free(u: FreeWord, v: FreeWord) -> Decision:
    """Decide whether ``x^-1 u x = v`` has a solution in the free group.

    On YES the witness is such an ``x``.
    """
    if u.rank != v.rank:
        raise ValueError(f"rank mismatch: {u.rank} vs {v.rank}")
    c, uc = u.cyclic_reduction()
    d, vc = v.cyclic_reduction()
    if len(uc) != len(vc):
        return Decision.no()
    n = len(uc)
    a, b = uc.letters, vc.letters
    for k in range(max(n, 1)):
        if a[k:] + a[:k] == b:
            r = FreeWord._raw(u.rank, a[:k])
            x = c * r * d.inverse()
            if x.inverse() * u * x != v:
                raise AssertionError("conjugator failed verification")
            return Decision.yes(x)
    return Decision.no()


@dataclass(frozen=True)
class RootDecomposition:
    root: FreeWord
    exponent: int


def root_decomposition(h: FreeWord) -> RootDecomposition:
    """Write ``h = root^exponent`` with ``root`` not a proper power."""
    if h.is_identity():
        raise ValueError("the trivial word has no root")
    c, core = h.cyclic_reduction()
    a = core.letters
    n = len(a)
    for p in range(1, n + 1):
        if n % p == 0 and a[:p] * (n // p) == a:
            root = c * FreeWord._raw(h.rank, a[:p]) * c.inverse()
            return RootDecomposition(root, n // p)
    raise AssertionError("unreachable")


def centralizer_cosets(h: FreeWord) -> list[FreeWord]:
    """Transversal ``[1, root, ..., root^(e-1)]`` of <h> in C(h)."""
    rd = root_decomposition(h)
    return [rd.root**i for i in range(rd.exponent)]


# ---------------------------------------------------------------- automorphisms


@dataclass(frozen=True)
class FreeAutomorphism:
    """Endomorphism of F_rank given by generator images (right action)."""

    rank: int
    images: tuple[FreeWord, ...]
    inverse_images: tuple[FreeWord, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(self.images))
        if self.inverse_images is not None:
            object.__setattr__(self, "inverse_images", tuple(self.inverse_images))
        for group in (self.images,) if self.inverse_images is None else (self.images, self.inverse_images):
            if len(group) != self.rank:
                raise ValueError("need exactly one image per generator")
            for w in group:
                if w.rank != self.rank:
                    raise ValueError("image rank does not match automorphism rank")
        if self.inverse_images is not None:
            gens = [FreeWord.generator(self.rank, i + 1) for i in range(self.rank)]
            for g in gens:
                if g.substitute(self.images).substitute(self.inverse_images) != g:
                    raise ValueError("inverse_images is not a left inverse")
                if g.substitute(self.inverse_images).substitute(self.images) != g:
                    raise ValueError("inverse_images is not a right inverse")

    @classmethod
    def identity(cls, rank: int) -> "FreeAutomorphism":
        gens = tuple(FreeWord.generator(rank, i + 1) for i in range(rank))
        return cls(rank, gens, gens)

    @classmethod
    def from_strings(cls, images: Sequence[str], inverse_images: Sequence[str] | None = None,
                     names: Sequence[str] | None = None) -> "FreeAutomorphism":
        rank = len(images)
        names = names or default_names(rank)
        imgs = tuple(parse_word(s, names, rank) for s in images)
        inv = None if inverse_images is None else tuple(parse_word(s, names, rank) for s in inverse_images)
        return cls(rank, imgs, inv)

    def __call__(self, w: FreeWord) -> FreeWord:
        return self.apply(w)

    def apply(self, w: FreeWord) -> FreeWord:
        if w.rank != self.rank:
            raise ValueError(f"rank mismatch: word {w.rank} vs automorphism {self.rank}")
        return w.substitute(self.images)

    def compose(self, other: "FreeAutomorphism") -> "FreeAutomorphism":
        """``self`` then ``other``: w(self.compose(other)) = (w self) other."""
        if other.rank != self.rank:
            raise ValueError("rank mismatch")
        images = tuple(other.apply(w) for w in self.images)
        inverse = None
        if self.inverse_images is not None and other.inverse_images is not None:
            inverse = tuple(w.substitute(self.inverse_images) for w in other.inverse_images)
        return FreeAutomorphism(self.rank, images, inverse)

    def inverse(self) -> "FreeAutomorphism":
        if self.inverse_images is None:
            raise ValueError("inverse unknown; compute it with stallings.aut_invert")
        return FreeAutomorphism(self.rank, self.inverse_images, self.images)

    def is_identity(self) -> bool:
        return all(w.letters == (i + 1,) for i, w in enumerate(self.images))

    def format(self, names: Sequence[str] | None = None) -> list[str]:
        return [format_word(w, names) for w in self.images]

    def __str__(self) -> str:
        names = default_names(self.rank)
        return ", ".join(f"{n}->{format_word(w, names)}" for n, w in zip(names, self.images))


def aut_apply(phi: FreeAutomorphism, w: FreeWord) -> FreeWord:
    return phi.apply(w)


def aut_compose(phi: FreeAutomorphism, psi: FreeAutomorphism) -> FreeAutomorphism:
    return phi.compose(psi)


# ---------------------------------------------------------------- enumeration


def reduced_words(rank: int, max_len: int) -> Iterator[FreeWord]:
    """All reduced words of length <= max_len in shortlex order."""
    alphabet = sorted([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)], key=letter_key)
    level: list[tuple[int, ...]] = [()]
    for length in range(max_len + 1):
        for letters in level:
            yield FreeWord._raw(rank, letters)
        if length == max_len:
            break
        level = [w + (x,) for w in level for x in alphabet if not w or w[-1] != -x]


@dataclass(frozen=True)
class GroupOps:
    """Black-box group given by generators and operations."""

    identity: Any
    generators: Sequence[Any]
    mul: Callable[[Any, Any], Any]
    inv: Callable[[Any], Any]
    eq: Callable[[Any, Any], bool] = lambda a, b: a == b


def free_group_ops(rank: int) -> GroupOps:
    return GroupOps(
        identity=FreeWord.identity(rank),
        generators=[FreeWord.generator(rank, i + 1) for i in range(rank)],
        mul=lambda a, b: a * b,
        inv=lambda a: a.inverse(),
    )


def _shortlex_elements(ops: GroupOps) -> Iterator[tuple[tuple[int, ...], Any]]:
    r = len(ops.generators)
    letters = sorted([i for i in range(1, r + 1)] + [-i for i in range(1, r + 1)], key=letter_key)
    values = {i: ops.generators[i - 1] for i in range(1, r + 1)}
    values.update({-i: ops.inv(ops.generators[i - 1]) for i in range(1, r + 1)})
    # children carry the parent's value and are multiplied out only when dequeued
    queue: deque[tuple[tuple[int, ...], Any, int]] = deque([((), ops.identity, 0)])
    while queue:
        word, parent, x = queue.popleft()
        val = ops.mul(parent, values[x]) if x else parent
        yield word, val
        for y in letters:
            if word and word[-1] == -y:
                continue
            queue.append((word + (y,), val, y))


def bounded_conjugator_search(ops: GroupOps, u: Any, v: Any, budget: int) -> Decision:
    """Semi-decide conjugacy by trying candidate conjugators in shortlex order.

    Tests at most ``budget`` candidates; returns YES with a conjugator ``x``
    (``x^-1 u x = v``) or UNKNOWN, never NO.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    for count, (word, x) in enumerate(_shortlex_elements(ops)):
        if count >= budget:
            break
        if ops.eq(ops.mul(ops.mul(ops.inv(x), u), x), v):
            return Decision.yes(x, note=f"generator word {word}")
    return Decision.unknown(f"no conjugator among {budget} candidates")
