"""Exact integer linear algebra and orbit questions for integer matrices.

Vectors are tuples of Python ints and act on the right: ``u @ A`` is ``uA``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from operator import mul
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import sympy

from .decision import Decision

__all__ = [
    "IntMatrix",
    "SmithDecomposition",
    "smith_normal_form",
    "hermite_normal_form",
    "solve_row_system",
    "tcp_zn",
    "vector_gcd",
    "od_gcd_full",
    "od_cyclic_matrix",
    "stab2_generators",
    "primitive_completion",
    "vec_add",
    "vec_sub",
    "vec_neg",
]

IntVector = tuple[int, ...]


def vec_add(u: Sequence[int], v: Sequence[int]) -> IntVector:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vec_sub(u: Sequence[int], v: Sequence[int]) -> IntVector:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vec_neg(u: Sequence[int]) -> IntVector:
    return tuple(-a for a in u)


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if not rows or not rows[0]:
            raise ValueError("matrix must be non-empty")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def _raw(cls, rows: tuple[tuple[int, ...], ...]) -> "IntMatrix":
        # trusted constructor: rows already a rectangular tuple of int tuples
        m = object.__new__(cls)
        object.__setattr__(m, "rows", rows)
        return m

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, m: int, n: int) -> "IntMatrix":
        return cls(tuple((0,) * n for _ in range(m)))

    @classmethod
    def diagonal(cls, entries: Sequence[int]) -> "IntMatrix":
        n = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def block_diagonal(cls, a: "IntMatrix", b: "IntMatrix") -> "IntMatrix":
        n = a.ncols + b.ncols
        rows = [r + (0,) * b.ncols for r in a.rows] + [(0,) * a.ncols + r for r in b.rows]
        assert all(len(r) == n for r in rows)
        return cls(tuple(rows))

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.rows[ij[0]][ij[1]]

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if self.ncols != other.nrows:
                raise ValueError("dimension mismatch")
            cols = list(zip(*other.rows))
            return IntMatrix._raw(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows))
        return NotImplemented

    def __rmatmul__(self, u):
        # row vector times matrix
        u = tuple(u)
        if len(u) != self.nrows:
            raise ValueError("dimension mismatch")
        return tuple(sum(map(mul, u, c)) for c in self._cols)

    @cached_property
    def _cols(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.rows))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(tuple(tuple(-a for a in r) for r in self.rows))

    def __pow__(self, k: int) -> "IntMatrix":
        if not self.is_square:
            raise ValueError("power of a non-square matrix")
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = IntMatrix.identity(self.nrows)
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def det(self) -> int:
        if not self.is_square:
            raise ValueError("determinant of a non-square matrix")
        if self.nrows == 2:
            (a, b), (c, d) = self.rows
            return a * d - b * c
        # Bareiss fraction-free elimination
        a = [list(r) for r in self.rows]
        n = len(a)
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k]:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def is_unimodular(self) -> bool:
        return self.is_square and abs(self.det()) == 1

    def inverse(self) -> "IntMatrix":
        """Inverse over Z; raises ValueError unless unimodular."""
        if not self.is_unimodular():
            raise ValueError("matrix is not invertible over Z")
        n = self.nrows
        if n == 2:
            (a, b), (c, d) = self.rows
            e = a * d - b * c
            return IntMatrix._raw(((e * d, -e * b), (-e * c, e * a)))
        a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            p = next(i for i in range(c, n) if a[i][c] != 0)
            a[c], a[p] = a[p], a[c]
            piv = a[c][c]
            a[c] = [x / piv for x in a[c]]
            for i in range(n):
                if i != c and a[i][c] != 0:
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return IntMatrix(tuple(tuple(int(x) for x in r[n:]) for r in a))

    def __str__(self) -> str:
        return "(" + "; ".join(",".join(map(str, r)) for r in self.rows) + ")"


# ---------------------------------------------------------------- normal forms


@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D.rows[i][i] for i in range(min(self.D.nrows, self.D.ncols)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)


def smith_normal_form(M: IntMatrix) -> SmithDecomposition:
    """``U M V = D`` with D diagonal, ``d_1 | d_2 | ...``, nonnegative entries."""
    m, n = M.nrows, M.ncols
    a = [list(r) for r in M.rows]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for r in a:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]

    for t in range(min(m, n)):
        while True:
            piv = None
            for i in range(t, m):
                for j in range(t, n):
                    if a[i][j] and (piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                break
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            done = True
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if piv is None:
            break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
    dec = SmithDecomposition(IntMatrix.of(U), IntMatrix.of(a), IntMatrix.of(V))
    if dec.U @ M @ dec.V != dec.D:
        raise AssertionError("Smith decomposition failed its product check")
    return dec


def hermite_normal_form(M: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite form: returns ``(H, U)`` with ``U M = H``, U unimodular.

    H is in row echelon form with positive pivots and entries above each
    pivot reduced into ``[0, pivot)``; zero rows come last.
    """
    m, n = M.nrows, M.ncols
    a = [list(r) for r in M.rows]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if a[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[p] = a[p], a[r]
            U[r], U[p] = U[p], U[r]
            clean = True
            for i in range(r + 1, m):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[r])]
                    if a[i][c]:
                        clean = False
            if clean:
                break
        if not a[r][c]:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                U[i] = [x - q * y for x, y in zip(U[i], U[r])]
        r += 1
    H, Um = IntMatrix.of(a), IntMatrix.of(U)
    if Um @ M != H:
        raise AssertionError("Hermite decomposition failed its product check")
    return H, Um


def _reduce_mod_lattice(x: list[int], kernel_rows: list[tuple[int, ...]]) -> list[int]:
    """Canonical representative of ``x`` modulo the row lattice of ``kernel_rows``.

    Trailing coordinates are reduced first into ``[0, pivot)``.
    """
    if not kernel_rows:
        return x
    n = len(x)
    rev = IntMatrix(tuple(tuple(reversed(r)) for r in kernel_rows))
    H, _ = hermite_normal_form(rev)
    y = list(reversed(x))
    for row in H.rows:
        c = next((j for j in range(n) if row[j]), None)
        if c is None:
            continue
        q = y[c] // row[c]
        if q:
            y = [a - q * b for a, b in zip(y, row)]
    return list(reversed(y))


def solve_row_system(M: IntMatrix, b: Sequence[int]) -> IntVector | None:
    """An integer ``x`` with ``x M = b``, or None when there is none.

    The returned solution is canonical: trailing free coordinates are reduced
    modulo the left kernel of M.
    """
    b = tuple(b)
    if len(b) != M.ncols:
        raise ValueError("dimension mismatch")
    dec = smith_normal_form(M)
    c = b @ dec.V
    diag = dec.diagonal
    m = M.nrows
    y = [0] * m
    for i in range(M.ncols):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d:
                return None
            y[i] = c[i] // d
    x = list(tuple(y) @ dec.U)
    kernel = [dec.U.rows[i] for i in range(m) if i >= len(diag) or diag[i] == 0]
    x = tuple(_reduce_mod_lattice(x, kernel))
    if x @ M != b:
        raise AssertionError("row system solution failed verification")
    return x


# ---------------------------------------------------------------- orbit questions


def _require_unimodular(A: IntMatrix) -> None:
    if not A.is_unimodular():
        raise ValueError("matrix must lie in GL_n(Z)")


def tcp_zn(A: IntMatrix, u: Sequence[int], v: Sequence[int]) -> Decision:
    """Twisted conjugacy in Z^n: YES with ``x`` such that ``v = u + x(Id - A)``."""
    _require_unimodular(A)
    u, v = tuple(u), tuple(v)
    n = A.nrows
    if len(u) != n or len(v) != n:
        raise ValueError("vector length does not match matrix")
    x = solve_row_system(IntMatrix.identity(n) - A, vec_sub(v, u))
    if x is None:
        return Decision.no()
    if vec_add(u, x @ (IntMatrix.identity(n) - A)) != v:
        raise AssertionError("twisted conjugator failed verification")
    return Decision.yes(x)


def vector_gcd(u: Sequence[int]) -> int:
    g = 0
    for a in u:
        g = gcd(g, a)
    return g


def primitive_completion(u: Sequence[int]) -> tuple[int, IntMatrix]:
    """Return ``(g, W)`` with W unimodular and ``u W = (g, 0, ..., 0)``, ``g = gcd(u)``."""
    n = len(u)
    w = list(u)
    W = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(dst, src, q):
        w[dst] += q * w[src]
        for r in W:
            r[dst] += q * r[src]

    def col_swap(i, j):
        w[i], w[j] = w[j], w[i]
        for r in W:
            r[i], r[j] = r[j], r[i]

    while True:
        nz = [j for j in range(n) if w[j]]
        if len(nz) <= 1:
            break
        p = min(nz, key=lambda j: abs(w[j]))
        for j in nz:
            if j != p:
                col_op(j, p, -(w[j] // w[p]))
    nz = [j for j in range(n) if w[j]]
    if nz:
        col_swap(0, nz[0])
        if w[0] < 0:
            w[0] = -w[0]
            for r in W:
                r[0] = -r[0]
    Wm = IntMatrix.of(W)
    if tuple(u) @ Wm != tuple(w):
        raise AssertionError("primitive completion failed verification")
    return w[0], Wm


def od_gcd_full(u: Sequence[int], v: Sequence[int]) -> Decision:
    """Orbits of the full GL_n(Z): YES with M such that ``u M = v`` iff gcds agree.

    Only sound as an orbit oracle for a subgroup acting transitively on each
    gcd class (GL_n(Z) itself, or SL_n(Z) for n >= 2).
    """
    u, v = tuple(u), tuple(v)
    if len(u) != len(v):
        raise ValueError("vector lengths differ")
    gu, Wu = primitive_completion(u)
    gv, Wv = primitive_completion(v)
    if gu != gv:
        return Decision.no()
    M = Wu @ Wv.inverse()
    if u @ M != v:
        raise AssertionError("orbit witness failed verification")
    return Decision.yes(M)


def _solve_rational(basis: list[list[Fraction]], target: list[Fraction]) -> list[Fraction] | None:
    """Coefficients c with sum c_i basis_i = target, or None (basis independent)."""
    d, n = len(basis), len(target)
    # columns are basis vectors; augmented system of n equations
    a = [[basis[j][i] for j in range(d)] + [target[i]] for i in range(n)]
    row = 0
    pivots = []
    for c in range(d):
        p = next((i for i in range(row, n) if a[i][c] != 0), None)
        if p is None:
            continue
        a[row], a[p] = a[p], a[row]
        piv = a[row][c]
        a[row] = [x / piv for x in a[row]]
        for i in range(n):
            if i != row and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
        pivots.append(c)
        row += 1
    if any(a[i][d] != 0 for i in range(row, n)):
        return None
    out = [Fraction(0)] * d
    for r, c in enumerate(pivots):
        out[c] = a[r][d]
    return out


def _krylov(A: IntMatrix, u: IntVector) -> tuple[list[IntVector], list[int]]:
    """Basis ``u, uA, ..., uA^(d-1)`` and the monic annihilator of u (low degree first)."""
    basis = [u]
    while True:
        nxt = basis[-1] @ A
        c = _solve_rational([[Fraction(x) for x in b] for b in basis], [Fraction(x) for x in nxt])
        if c is not None:
            for ci in c:
                if ci.denominator != 1:
                    raise AssertionError("annihilator of an integer matrix must be integral")
            poly = [-int(ci) for ci in c] + [1]
            return basis, poly
        basis.append(nxt)


def _polymod(a: list[Fraction], m: list[int]) -> list[Fraction]:
    """Remainder of ``a`` modulo monic ``m`` (coefficient lists, low degree first)."""
    a = list(a)
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        q = a[i]
        if q:
            for j in range(dm + 1):
                a[i - dm + j] -= q * m[j]
    out = a[:dm] + [Fraction(0)] * max(0, dm - len(a))
    return out


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _cyclotomic_order(f: list[int]) -> int | None:
    d = len(f) - 1
    x = sympy.Symbol("x")
    fs = sympy.Poly(list(reversed(f)), x)
    for n in range(1, 2 * d * d + 3):
        if sympy.totient(n) == d and sympy.Poly(sympy.cyclotomic_poly(n, x), x) == fs:
            return n
    return None


def _factor(poly: list[int]) -> list[tuple[list[int], int]]:
    x = sympy.Symbol("x")
    _, factors = sympy.factor_list(sympy.Poly(list(reversed(poly)), x))
    out = []
    for f, mult in factors:
        coeffs = [int(c) for c in reversed(f.all_coeffs())]
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
        out.append((coeffs, mult))
    return out


def _power_sum_lower_bound(f: list[int], limit: int = 20000) -> tuple[int, int]:
    """Find ``j`` with ``|s_j| > deg f`` for the power sums ``s_j`` of the roots of f.

    Then the largest root modulus satisfies ``rho^j >= |s_j| / deg f > 1``.
    """
    d = len(f) - 1
    a = [f[d - i] for i in range(d + 1)]  # a[i] is the coefficient of x^(d-i)
    s = [d]
    for k in range(1, limit + 1):
        total = sum(a[i] * s[k - i] for i in range(1, min(k - 1, d) + 1))
        if k <= d:
            total += k * a[k]
        s.append(-total)
        if abs(s[k]) > d:
            return k, abs(s[k])
    raise AssertionError("no dominant power sum found; factor should be cyclotomic")


def _exponent_bound(f: list[int], C: Fraction) -> int:
    """K such that every root of f with ``rho^k <= C`` for the largest modulus rho has ``k < K``."""
    d = len(f) - 1
    j, sj = _power_sum_lower_bound(f)
    C = max(C, Fraction(1))
    # rho^j >= sj/d, so rho^k <= C forces (sj/d)^k <= C^j
    k = 0
    Cj = C**j
    while Fraction(sj, d) ** k <= Cj:
        k += 1
    return k


def _integer_roots(coeffs: list[Fraction]) -> list[int] | None:
    """Integer roots of a polynomial with rational coefficients; None if identically zero."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if not coeffs:
        return None
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    roots = []
    if ints[0] == 0:
        roots.append(0)
        k = next(i for i, c in enumerate(ints) if c)
        ints = ints[k:]
    if len(ints) == 1:
        return roots
    for dv in sympy.divisors(abs(ints[0])):
        for q in (dv, -dv):
            if sum(c * q**i for i, c in enumerate(ints)) == 0:
                roots.append(q)
    return roots


def _binom_poly(i: int) -> list[Fraction]:
    """Coefficients (in q) of C(q, i)."""
    out = [Fraction(1)]
    for t in range(i):
        out = _polymul(out, [Fraction(-t), Fraction(1)])
    fact = 1
    for t in range(1, i + 1):
        fact *= t
    return [c / fact for c in out]


def _best(ks: Iterable[int]) -> int | None:
    ks = list(ks)
    if not ks:
        return None
    return min(ks, key=lambda k: (abs(k), k < 0))


def od_cyclic_matrix(A: IntMatrix, u: Sequence[int], v: Sequence[int]) -> Decision:
    """Decide whether ``u A^k = v`` for some integer k; YES carries the k of least |k|.

    The question is moved to ``Z[x] / (p_u)`` with ``p_u`` the annihilator of
    u.  If every irreducible factor of ``p_u`` is cyclotomic, ``x^m - 1`` is
    nilpotent there and each residue class of k reduces to integer roots of
    polynomials.  Otherwise a factor has a root off the unit circle, which
    gives an explicit bound on |k|, found from integer power sums.
    """
    _require_unimodular(A)
    u, v = tuple(u), tuple(v)
    if len(u) != A.nrows or len(v) != A.nrows:
        raise ValueError("vector length does not match matrix")
    if u == v:
        return Decision.yes(0)
    if not any(u) or not any(v):
        return Decision.no()
    basis, p = _krylov(A, u)
    d = len(p) - 1
    c = _solve_rational([[Fraction(x) for x in b] for b in basis], [Fraction(x) for x in v])
    if c is None or any(ci.denominator != 1 for ci in c):
        # u A^k has integral coordinates in the Krylov basis for every k
        return Decision.no()
    factors = _factor(p)
    orders = [_cyclotomic_order(f) for f, _ in factors]
    Ainv = A.inverse()

    def verify(k: int) -> Decision:
        if u @ (A**k) != v:
            raise AssertionError("orbit exponent failed verification")
        return Decision.yes(k)

    if all(o is not None for o in orders):
        m = 1
        for o in orders:
            m = m * o // gcd(m, o)
        e = max(mult for _, mult in factors)
        xm = [Fraction(0)] * m + [Fraction(1)]
        N = _polymod([x - (1 if i == 0 else 0) for i, x in enumerate(xm)], p)
        Npow = [[Fraction(1)] + [Fraction(0)] * (d - 1)]
        for _ in range(1, e):
            Npow.append(_polymod(_polymul(Npow[-1], N), p))
        candidates = []
        for r in range(m):
            xr = _polymod([Fraction(0)] * r + [Fraction(1)], p)
            B = [_polymod(_polymul(xr, Ni), p) for Ni in Npow]
            # coordinate t: sum_i C(q, i) B[i][t] - c[t] = 0, a polynomial in q
            sols: set[int] | None = None
            for t in range(d):
                poly = [Fraction(0)] * e
                for i in range(e):
                    bp = _binom_poly(i)
                    for deg, coef in enumerate(bp):
                        poly[deg] += coef * B[i][t]
                poly[0] -= c[t]
                roots = _integer_roots(poly)
                if roots is None:
                    continue
                sols = set(roots) if sols is None else sols & set(roots)
                if not sols:
                    break
            if sols is None:
                # every q works: smallest |k| in this residue class
                candidates += [r, r - m]
            else:
                candidates += [r + m * q for q in sols]
        k = _best(candidates)
        return Decision.no() if k is None else verify(k)

    f = next(f for (f, _), o in zip(factors, orders) if o is None)
    c_mod = _polymod([Fraction(x) for x in c], f)
    c_norm = sum(abs(x) for x in c_mod)
    # |c(lambda)| <= C for every root lambda of f (Cauchy bound on |lambda|)
    rho_up = 1 + max(abs(x) for x in f[:-1])
    C = c_norm * rho_up ** (len(f) - 2)
    k_pos = _exponent_bound(f, C)
    rec = list(reversed(f))
    if rec[-1] < 0:
        rec = [-x for x in rec]
    k_neg = _exponent_bound(rec, C)
    w_pos, w_neg = u, u
    for k in range(1, max(k_pos, k_neg) + 1):
        if k <= k_pos:
            w_pos = w_pos @ A
            if w_pos == v:
                return verify(k)
        if k <= k_neg:
            w_neg = w_neg @ Ainv
            if w_neg == v:
                return verify(-k)
    return Decision.no()


def stab2_generators(v: Sequence[int]) -> list[IntMatrix]:
    """Generators of the stabilizer of v in GL_2(Z)."""
    v = tuple(v)
    if len(v) != 2:
        raise ValueError("stab2_generators needs a vector of length 2")
    g = vector_gcd(v)
    if g == 0:
        raise ValueError("the zero vector has stabilizer GL_2(Z)")
    w = (v[0] // g, v[1] // g)
    # M0 has first row w, so e1 M0 = w
    _, W = primitive_completion(w)
    M0 = W.inverse()
    gens = [IntMatrix.of([[1, 0], [1, 1]]), IntMatrix.of([[1, 0], [0, -1]])]
    out = [M0.inverse() @ G @ M0 for G in gens]
    for G in out:
        if v @ G != v:
            raise AssertionError("stabilizer generator moves v")
    return out
