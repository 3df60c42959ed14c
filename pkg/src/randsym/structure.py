"""Structural classes of random symmetric matrices.

A singular matrix is *abnormal* when some fewer than ``N`` of its rows are
linearly dependent (a short vanishing row combination), and *normal*
otherwise. A non-singular matrix is *imperfect* when deleting some row leaves
columns whose (unique up to scale) vanishing combination has support below
``N``, and *perfect* otherwise. ``N = max(1, ceil(n ** (1 - epsilon)))``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ContractViolation, GuardError
from .linalg import (DEFAULT_PRIMES, MatrixLike, adjugate, as_rows, det_exact,
                     nullspace_rational, rank_exact, rank_mod_p)

DEFAULT_EPSILON = 0.1
CIRCUIT_GUARD = 32
SPAN_GUARD = 24


@dataclass(frozen=True)
class DegreeThreshold:
    n: int
    epsilon: float
    N: int


def compute_N(n: int, epsilon: float = DEFAULT_EPSILON) -> DegreeThreshold:
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 0:
        raise ValueError("n must be non-negative")
    x = n ** (1 - epsilon)
    # Absorb float noise so exact powers such as 100 ** 0.5 stay integral.
    N = max(1, math.ceil(x - 1e-9))
    return DegreeThreshold(n, epsilon, N)


class StructureTag(str, enum.Enum):
    SINGULAR_NORMAL = "SingularNormal"
    SINGULAR_ABNORMAL = "SingularAbnormal"
    NONSINGULAR_PERFECT = "NonsingularPerfect"
    NONSINGULAR_IMPERFECT = "NonsingularImperfect"


@dataclass(frozen=True)
class Circuit:
    """Minimal dependent set of rows with its vanishing combination."""

    rows: tuple[int, ...]
    coefficients: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class BadRow:
    row: int
    support: int


@dataclass(frozen=True)
class StructuralClass:
    tag: StructureTag
    witness: Circuit | BadRow | None = None


def _independent(rows: list[list[int]]) -> bool:
    k = len(rows)
    # A full modular rank settles independence; a deficit needs exact work.
    if rank_mod_p(rows, DEFAULT_PRIMES[0]) == k:
        return True
    return rank_exact(rows) == k


def _circuit_from_support(rows: list[list[int]], support: tuple[int, ...]) -> Circuit:
    sub = [rows[i] for i in support]
    coeffs = nullspace_rational([list(c) for c in zip(*sub)])
    if len(coeffs) != 1 or not all(coeffs[0]):
        raise ArithmeticError(f"rows {support} do not form a circuit")
    return Circuit(support, coeffs[0])


def _search_by_size(rows, candidates, bound) -> tuple[int, ...] | None:
    for k in range(1, bound):
        for subset in itertools.combinations(candidates, k):
            if not _independent([rows[i] for i in subset]):
                return subset
    return None


def _search_by_nullspace(kernel, candidates, bound) -> tuple[int, ...] | None:
    # Every circuit is the support of an elementary vector of the left
    # nullspace: fixing d - 1 independent zero coordinates pins one down.
    d = len(kernel)
    best = None
    for zeros in itertools.combinations(candidates, d - 1):
        if d == 1:
            y = kernel[0]
        else:
            block = [[kernel[r][z] for r in range(d)] for z in zeros]
            lam = nullspace_rational(block, ncols=d)
            if len(lam) != 1:
                continue
            y = [sum(lam[0][r] * kernel[r][c] for r in range(d)) for c in range(len(kernel[0]))]
        support = tuple(i for i, v in enumerate(y) if v)
        if best is None or (len(support), support) < (len(best), best):
            best = support
    if best is not None and len(best) < bound:
        return best
    return None


def min_dependent_support(A: MatrixLike, bound: int, method: str = "auto") -> Circuit | None:
    """Smallest set of fewer than ``bound`` rows that is linearly dependent.

    Returns the lexicographically first minimum-size circuit of the rows, or
    ``None`` when every dependent row set has at least ``bound`` rows. Rows
    outside the union of left-null-vector supports are never in a circuit and
    are pruned up front.

    ``method`` selects the search: ``"size"`` tries subsets by increasing
    size, ``"nullspace"`` enumerates elementary vectors of the left
    nullspace, ``"auto"`` picks whichever enumerates fewer sets.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    rows = as_rows(A)
    m = len(rows)
    if m > CIRCUIT_GUARD:
        raise GuardError(f"circuit search is exhaustive; {m} rows exceeds the guard of {CIRCUIT_GUARD}")
    if m == 0:
        return None
    kernel = nullspace_rational([list(c) for c in zip(*rows)], ncols=m)
    d = len(kernel)
    if d == 0:
        return None
    candidates = [i for i in range(m) if any(v[i] for v in kernel)]
    if method == "auto":
        by_size = sum(math.comb(len(candidates), k) for k in range(1, min(bound, len(candidates) + 1)))
        method = "nullspace" if math.comb(len(candidates), d - 1) <= by_size else "size"
    if method == "size":
        support = _search_by_size(rows, candidates, bound)
    elif method == "nullspace":
        support = _search_by_nullspace(kernel, candidates, bound)
    else:
        raise ValueError(f"unknown method {method!r}")
    return None if support is None else _circuit_from_support(rows, support)


def classify_singular(A: MatrixLike, thr: DegreeThreshold, rank: int | None = None) -> StructuralClass:
    """Normal/abnormal class of a singular matrix (``rank`` skips recomputation)."""
    rows = as_rows(A)
    if rank is None:
        rank = rank_exact(rows)
    if rank >= len(rows):
        raise ContractViolation("normal/abnormal is only defined for singular matrices")
    circuit = min_dependent_support(rows, thr.N)
    if circuit is None:
        return StructuralClass(StructureTag.SINGULAR_NORMAL)
    return StructuralClass(StructureTag.SINGULAR_ABNORMAL, circuit)


def row_null_support(A: MatrixLike, i: int) -> int:
    """Support size of the column combination killed by ``A`` with row ``i`` deleted."""
    rows = as_rows(A)
    n = len(rows)
    if det_exact(rows) == 0:
        raise ContractViolation("good/bad rows are only defined for non-singular matrices")
    reduced = rows[:i] + rows[i + 1:]
    basis = nullspace_rational(reduced, ncols=n)
    if len(basis) != 1:
        raise ArithmeticError("deleting one row of a non-singular matrix must leave nullity one")
    return sum(1 for x in basis[0] if x)


def row_supports(A: MatrixLike, adj: Sequence[Sequence[int]] | None = None) -> list[int]:
    """:func:`row_null_support` for every row at once.

    Deleting row ``i`` leaves a matrix that annihilates column ``i`` of the
    adjugate, and that column is non-zero for non-singular ``A``, so the
    support is its count of non-zero cofactors.
    """
    if adj is None:
        adj = adjugate(A)
    n = len(adj)
    return [sum(1 for r in range(n) if adj[r][i]) for i in range(n)]


def classify_nonsingular(A: MatrixLike, thr: DegreeThreshold,
                         adj: Sequence[Sequence[int]] | None = None) -> StructuralClass:
    """Perfect/imperfect class of a non-singular matrix."""
    rows = as_rows(A)
    if adj is None:
        if det_exact(rows) == 0:
            raise ContractViolation("perfect/imperfect is only defined for non-singular matrices")
        adj = adjugate(rows)
    for i, s in enumerate(row_supports(rows, adj)):
        if s < thr.N:
            return StructuralClass(StructureTag.NONSINGULAR_IMPERFECT, BadRow(i, s))
    return StructuralClass(StructureTag.NONSINGULAR_PERFECT)


def classify(A: MatrixLike, thr: DegreeThreshold, rank: int | None = None) -> StructuralClass:
    rows = as_rows(A)
    if rank is None:
        rank = rank_exact(rows)
    if rank < len(rows):
        return classify_singular(rows, thr, rank=rank)
    return classify_nonsingular(rows, thr, adj=adjugate(rows))


def _span_annihilator(basis: Sequence[Sequence], n: int) -> np.ndarray:
    # Integer vectors w with B w = 0; the span is exactly {x : W x = 0}.
    rows = []
    for v in basis:
        scale = math.lcm(*(Fraction(x).denominator for x in v))
        rows.append([int(Fraction(x) * scale) for x in v])
    W = nullspace_rational(rows, ncols=n)
    return np.array(W, dtype=object).reshape(len(W), n)


def count_01_points_in_span(basis: Sequence[Sequence], n: int | None = None,
                            method: str = "enumerate") -> int:
    """Number of 0/1 vectors in the rational span of ``basis``.

    ``"enumerate"`` tests all ``2**n`` cube points against the annihilator of
    the span. ``"pivot"`` instead enumerates the ``2**d`` settings of the
    pivot coordinates of a reduced basis and keeps those whose completion is
    a 0/1 vector.
    """
    if n is None:
        if not basis:
            raise ValueError("dimension required for an empty basis")
        n = len(basis[0])
    if n > SPAN_GUARD:
        raise GuardError(f"dimension {n} exceeds the enumeration guard of {SPAN_GUARD}")
    if method == "enumerate":
        W = _span_annihilator(basis, n)
        if W.shape[0] == 0:
            return 2 ** n
        W = W.astype(np.int64) if np.abs(W).max() < 2**40 else W
        total = 0
        chunk = 1 << 16
        for start in range(0, 2 ** n, chunk):
            idx = np.arange(start, min(start + chunk, 2 ** n), dtype=np.int64)
            X = (idx[:, None] >> np.arange(n)) & 1
            total += int((~(X.astype(W.dtype) @ W.T != 0).any(axis=1)).sum())
        return total
    if method == "pivot":
        from .linalg import _rref

        M = [[Fraction(x) for x in v] for v in basis]
        pivots = _rref(M, n)
        R = M[:len(pivots)]
        count = 0
        for bits in itertools.product((0, 1), repeat=len(pivots)):
            x = [sum(b * R[r][c] for r, b in enumerate(bits)) for c in range(n)]
            if all(v in (0, 1) for v in x):
                count += 1
        return count
    raise ValueError(f"unknown method {method!r}")
