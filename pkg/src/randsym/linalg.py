"""Exact rank, determinant, nullspace and adjugate over the integers.

All routines work on Python integers, so there is no overflow at any size.
Elimination is fraction-free (Bareiss): every intermediate entry is a minor of
the input and each division is exact. Modular ranks are cheap lower bounds
and never decide singularity on their own, see :func:`certify_rank`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError
from .matrix import SymMatrix

MatrixLike = Union[SymMatrix, Sequence[Sequence[int]], np.ndarray]

# Largest primes below 2**62 and 2**61.
DEFAULT_PRIMES = (4611686018427387847, 2305843009213693951)


def as_rows(A: MatrixLike) -> list[list[int]]:
    """Fresh list-of-lists copy of ``A`` with Python int entries."""
    if isinstance(A, SymMatrix):
        return A.to_list()
    if isinstance(A, np.ndarray):
        return [[int(x) for x in row] for row in A.tolist()]
    return [[int(x) for x in row] for row in A]


def _ncols(rows: list[list[int]], ncols: int | None) -> int:
    if rows:
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged matrix")
        if ncols is not None and ncols != width:
            raise DimensionError(f"expected {ncols} columns, got {width}")
        return width
    return ncols or 0


@lru_cache(maxsize=64)
def _is_prime(p: int) -> bool:
    from sympy import isprime

    return bool(isprime(p))


def rank_mod_p(A: MatrixLike, p: int) -> int:
    """Rank of ``A`` over the field with ``p`` elements."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    M = [[x % p for x in row] for row in as_rows(A)]
    m = len(M)
    ncols = _ncols(M, None)
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, m) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        prow = [x * inv % p for x in M[rank]]
        M[rank] = prow
        for i in range(rank + 1, m):
            f = M[i][c]
            if f:
                M[i] = [(a - f * b) % p for a, b in zip(M[i], prow)]
        rank += 1
        if rank == m:
            break
    return rank


def _bareiss(M: list[list[int]]) -> tuple[int, int, int]:
    """Fraction-free row echelon form of ``M`` in place.

    Returns ``(rank, sign, last_pivot)``; for a square non-singular matrix the
    determinant is ``sign * last_pivot``.
    """
    m = len(M)
    ncols = len(M[0]) if m else 0
    prev, sign, r = 1, 1, 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if M[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
            sign = -sign
        pr = M[r]
        pk = pr[c]
        for i in range(r + 1, m):
            ri = M[i]
            a = ri[c]
            if a:
                M[i] = ri[:c] + [(pk * x - a * y) // prev for x, y in zip(ri[c:], pr[c:])]
            elif pk != prev:
                M[i] = ri[:c] + [pk * x // prev for x in ri[c:]]
        prev = pk
        r += 1
        if r == m:
            break
    return r, sign, prev


def rank_exact(A: MatrixLike) -> int:
    """Rank over the rationals."""
    rows = as_rows(A)
    _ncols(rows, None)
    if not rows:
        return 0
    return _bareiss(rows)[0]


def det_exact(A: MatrixLike) -> int:
    """Exact determinant of a square integer matrix."""
    rows = as_rows(A)
    n = len(rows)
    if _ncols(rows, n) != n:
        raise DimensionError("determinant of a non-square matrix")
    if n == 0:
        return 1
    rank, sign, last = _bareiss(rows)
    return sign * last if rank == n else 0


@dataclass(frozen=True)
class RankCertificate:
    """Exact rank plus the modular evidence it was derived from."""

    rank: int
    modular_evidence: tuple[tuple[int, int], ...]
    exact_confirmed: bool

    def __post_init__(self):
        if any(r > self.rank for _, r in self.modular_evidence):
            raise ValueError("a modular rank exceeds the certified rank")
        if not self.exact_confirmed and self.rank != max(r for _, r in self.modular_evidence):
            raise ValueError("an unconfirmed rank must equal the best modular rank")


def certify_rank(A: MatrixLike, primes: Sequence[int] = DEFAULT_PRIMES,
                 force_exact: bool = False) -> RankCertificate:
    """Rank with a certificate.

    A full modular rank proves non-singularity on its own. Anything short of
    full rank is re-checked by exact elimination, because ``p`` may divide
    the determinant.
    """
    if not primes:
        raise ValueError("certify_rank needs at least one prime")
    rows = as_rows(A)
    n = len(rows)
    evidence = []
    for p in primes:
        r = rank_mod_p(rows, p)
        evidence.append((int(p), r))
        if r == n and not force_exact:
            return RankCertificate(r, tuple(evidence), False)
    return RankCertificate(rank_exact(rows), tuple(evidence), True)


def _rref(M: list[list[Fraction]], ncols: int) -> list[int]:
    """Reduced row echelon form in place; returns pivot columns."""
    pivots: list[int] = []
    r = 0
    m = len(M)
    for c in range(ncols):
        piv = next((i for i in range(r, m) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        pr = M[r]
        for i in range(m):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], pr)]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return pivots


def primitive(v: Sequence[Fraction | int]) -> tuple[int, ...]:
    """Scale a non-zero rational vector to coprime integers, first non-zero entry positive."""
    v = [Fraction(x) for x in v]
    scale = math.lcm(*(x.denominator for x in v))
    ints = [int(x * scale) for x in v]
    g = math.gcd(*ints)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    lead = next(x for x in ints if x)
    if lead < 0:
        g = -g
    return tuple(x // g for x in ints)


def nullspace_rational(A: MatrixLike, ncols: int | None = None) -> list[tuple[int, ...]]:
    """Basis of the right nullspace ``{x : A x = 0}`` as primitive integer vectors.

    One vector per free column of the reduced echelon form, in column order.
    ``ncols`` is only needed when ``A`` has no rows.
    """
    rows = as_rows(A)
    width = _ncols(rows, ncols)
    M = [[Fraction(x) for x in row] for row in rows]
    pivots = _rref(M, width)
    pivot_set = set(pivots)
    basis = []
    for f in range(width):
        if f in pivot_set:
            continue
        v = [Fraction(0)] * width
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -M[r][f]
        basis.append(primitive(v))
    return basis


def _minor(rows: list[list[int]], drop_row: int, drop_col: int) -> list[list[int]]:
    return [[x for j, x in enumerate(row) if j != drop_col]
            for i, row in enumerate(rows) if i != drop_row]


def cofactor(A: MatrixLike, i: int, j: int) -> int:
    """Signed ``(i, j)`` cofactor: ``(-1)**(i+j)`` times the minor without row i, column j."""
    rows = as_rows(A)
    return (-1) ** (i + j) * det_exact(_minor(rows, i, j))


def adjugate(A: MatrixLike) -> list[list[int]]:
    """Exact adjugate, ``A @ adj(A) == det(A) * I``.

    Non-singular input goes through fraction-free Gauss-Jordan on ``[A | I]``.
    For rank ``n - 1`` the adjugate is a rank-one outer product of the null
    vectors, scaled by one explicitly computed cofactor; lower rank gives zero.
    """
    rows = as_rows(A)
    n = len(rows)
    if _ncols(rows, n) != n:
        raise DimensionError("adjugate of a non-square matrix")
    if n == 0:
        return []
    if n == 1:
        return [[1]]
    aug = [row + [int(i == j) for j in range(n)] for i, row in enumerate(rows)]
    prev, sign = 1, 1
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c]), None)
        if piv is None:
            return _adjugate_singular(rows)
        if piv != c:
            aug[c], aug[piv] = aug[piv], aug[c]
            sign = -sign
        pr = aug[c]
        pk = pr[c]
        for i in range(n):
            if i == c:
                continue
            ri = aug[i]
            a = ri[c]
            aug[i] = [(pk * x - a * y) // prev for x, y in zip(ri, pr)]
        prev = pk
    # Left block is now prev * I and the right block prev * A^{-1};
    # det(A) = sign * prev.
    return [[sign * x for x in row[n:]] for row in aug]


def _adjugate_singular(rows: list[list[int]]) -> list[list[int]]:
    n = len(rows)
    right = nullspace_rational(rows)
    if len(right) >= 2:
        return [[0] * n for _ in range(n)]
    x = right[0]
    y = nullspace_rational([list(col) for col in zip(*rows)])[0]
    i = next(k for k in range(n) if x[k])
    j = next(k for k in range(n) if y[k])
    # adj[i][j] is the (j, i) cofactor.
    alpha = Fraction(cofactor(rows, j, i), x[i] * y[j])
    out = [[alpha * xi * yj for yj in y] for xi in x]
    if any(v.denominator != 1 for row in out for v in row):
        raise ArithmeticError("non-integral adjugate; rank-one reconstruction failed")
    return [[int(v) for v in row] for row in out]


@dataclass(frozen=True)
class QuadraticFormInt:
    """Integer polynomial ``sum_ij quad[i][j] x_i x_j + sum_i linear[i] x_i + constant``."""

    nvars: int
    quad: tuple[tuple[int, ...], ...]
    linear: tuple[int, ...]
    constant: int = 0

    def __post_init__(self):
        if len(self.quad) != self.nvars or any(len(r) != self.nvars for r in self.quad):
            raise DimensionError("quadratic coefficient array does not match nvars")
        if len(self.linear) != self.nvars:
            raise DimensionError("linear coefficient vector does not match nvars")

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.nvars:
            raise DimensionError(f"expected {self.nvars} values, got {len(x)}")
        total = self.constant
        for i, xi in enumerate(x):
            if xi:
                row = self.quad[i]
                total += xi * (self.linear[i] + sum(row[j] * xj for j, xj in enumerate(x) if xj))
        return total

    def boolean_lift(self) -> "QuadraticFormInt":
        """Fold linear terms onto the diagonal (``x_i**2 == x_i`` for 0/1 inputs)."""
        quad = [list(r) for r in self.quad]
        for i, a in enumerate(self.linear):
            quad[i][i] += a
        return QuadraticFormInt(self.nvars, tuple(map(tuple, quad)), (0,) * self.nvars, self.constant)


def augmented_det_form(A: MatrixLike) -> QuadraticFormInt:
    """Determinant of the bordered matrix as a polynomial in the border.

    For ``A'`` = ``A`` bordered by ``u`` with corner ``x``:
    ``det(A') = det(A) * x - u^T adj(A) u``. The result has ``n + 1``
    variables ``(u_1, ..., u_n, x)``.
    """
    rows = as_rows(A)
    n = len(rows)
    d = det_exact(rows)
    adj = adjugate(rows)
    quad = [[-adj[i][j] for j in range(n)] + [0] for i in range(n)]
    quad.append([0] * (n + 1))
    linear = (0,) * n + (d,)
    return QuadraticFormInt(n + 1, tuple(map(tuple, quad)), linear, 0)
