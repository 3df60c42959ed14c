"""Concentration of random linear, quadratic and multilinear forms.

Exact probabilities come from a dynamic program over achievable sums (linear
forms) or from full enumeration of the cube (any degree); Monte Carlo
estimates are seeded per block of trials. Bound calculators give the
Erdős/Littlewood-Offord bound, the quadratic bound with its greedy
partition, and the degree-``k`` exponent. Decoupling inequalities are checked
exactly by enumerating independent copies.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Mapping, Sequence

import numpy as np

from ._parallel import CONCENTRATION_DOMAIN, DECOUPLING_DOMAIN, PILOT_DOMAIN, parallel_map
from .errors import CapabilityError, GuardError
from .matrix import BERNOULLI01, EntryDistribution, derive_seed, rng_from_seed

ENUM_GUARD = 24
DP_STATE_CAP = 1 << 22
MC_BLOCK = 1 << 16
DECOUPLING_GUARD = 1 << 20


@dataclass(frozen=True)
class Interval:
    """Half-open ``[left, left + length)``; ``length == 0`` is the point ``{left}``."""

    left: Fraction
    length: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "left", Fraction(self.left))
        object.__setattr__(self, "length", Fraction(self.length))
        if self.length < 0:
            raise ValueError("interval length must be non-negative")

    @classmethod
    def point(cls, c) -> "Interval":
        return cls(Fraction(c))

    @classmethod
    def unit(cls, left) -> "Interval":
        return cls(Fraction(left), Fraction(1))

    @property
    def is_point(self) -> bool:
        return self.length == 0

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        if self.is_point:
            return x == self.left
        return self.left <= x < self.left + self.length

    def integer_range(self, scale: int = 1) -> tuple[int, int]:
        """Integers ``v`` with ``v / scale`` inside the interval, as ``[lo, hi)``."""
        lo = self.left * scale
        if self.is_point:
            return (int(lo), int(lo) + 1) if lo.denominator == 1 else (0, 0)
        hi = (self.left + self.length) * scale
        return math.ceil(lo), math.ceil(hi)

    def __str__(self):
        if self.is_point:
            return f"{{{self.left}}}"
        return f"[{self.left},{self.left + self.length})"


@dataclass(frozen=True)
class LinearForm:
    """``sum_i coeffs[i] * z_i`` with exact rational coefficients."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("a linear form needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def large_count(self, scale=1) -> int:
        """Number of coefficients with ``|a_i| >= scale``."""
        return sum(1 for c in self.coeffs if abs(c) >= scale)

    def __call__(self, z: Sequence[int]) -> Fraction:
        return sum((c * x for c, x in zip(self.coeffs, z)), Fraction(0))


@dataclass(frozen=True)
class PolyForm:
    """Homogeneous form ``sum c[i_1..i_k] z_{i_1} ... z_{i_k}`` on ``n`` variables.

    Indices are 0-based. ``terms`` is stored sorted, with repeated index
    tuples merged and zero coefficients dropped.
    """

    n: int
    degree: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...] = ()

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be at least 1")
        merged: dict[tuple[int, ...], Fraction] = {}
        for idx, c in self.terms:
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.degree:
                raise ValueError(f"index tuple {idx} does not have length {self.degree}")
            if any(not 0 <= i < self.n for i in idx):
                raise ValueError(f"index tuple {idx} out of range for {self.n} variables")
            merged[idx] = merged.get(idx, Fraction(0)) + Fraction(c)
        object.__setattr__(self, "terms", tuple(sorted((k, v) for k, v in merged.items() if v)))

    @classmethod
    def from_mapping(cls, n: int, degree: int, coeffs: Mapping) -> "PolyForm":
        return cls(n, degree, tuple(coeffs.items()))

    @classmethod
    def quadratic(cls, C: Sequence[Sequence]) -> "PolyForm":
        n = len(C)
        return cls(n, 2, tuple(((i, j), C[i][j]) for i in range(n) for j in range(n) if C[i][j]))

    @classmethod
    def linear(cls, coeffs: Sequence) -> "PolyForm":
        return cls(len(coeffs), 1, tuple(((i,), c) for i, c in enumerate(coeffs) if c))

    @property
    def coeffs(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self.terms)

    def __call__(self, z: Sequence[int]) -> Fraction:
        total = Fraction(0)
        for idx, c in self.terms:
            prod = 1
            for i in idx:
                prod *= z[i]
            total += c * prod
        return total

    def _scaled(self) -> tuple[int, list[tuple[tuple[int, ...], int]]]:
        scale = math.lcm(1, *(c.denominator for _, c in self.terms))
        return scale, [(idx, int(c * scale)) for idx, c in self.terms]

    def scaled_values(self, Z: np.ndarray) -> tuple[int, np.ndarray]:
        """``(L, L * f(Z))`` for a ``(B, n)`` batch, with ``L * f`` integer-valued."""
        L, terms = self._scaled()
        B = Z.shape[0]
        if not terms:
            return L, np.zeros(B, dtype=np.int64)
        amax = int(np.abs(Z).max()) if Z.size else 0
        bound = sum(abs(c) for _, c in terms) * max(amax, 1) ** self.degree
        if self.degree == 2 and bound < 2**53 and len(terms) > self.n:
            # Every partial sum is an integer below 2**53, so BLAS is exact.
            C = np.zeros((self.n, self.n))
            for (i, j), c in terms:
                C[i, j] = c
            Zf = Z.astype(np.float64)
            return L, np.rint(((Zf @ C) * Zf).sum(axis=1)).astype(np.int64)
        Zc = Z.astype(np.int64) if bound < 2**62 else Z.astype(object)
        out = np.zeros(B, dtype=Zc.dtype)
        for idx, c in terms:
            prod = Zc[:, idx[0]]
            for i in idx[1:]:
                prod = prod * Zc[:, i]
            out = out + c * prod
        return L, out


def as_polyform(f: LinearForm | PolyForm) -> PolyForm:
    return PolyForm.linear(f.coeffs) if isinstance(f, LinearForm) else f


class Method(str, enum.Enum):
    EXACT_DP = "ExactDP"
    EXACT_ENUM = "ExactEnum"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class MonteCarlo:
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass
class ConcentrationReport:
    form: str
    n: int
    interval: Interval
    probability: Fraction | float
    stderr: float | None
    bound: float | None
    method: Method
    hypothesis_met: bool = True

    def __post_init__(self):
        if self.stderr is None:
            if not 0 <= self.probability <= 1:
                raise ValueError("exact probability outside [0, 1]")
        elif self.probability + 3 * self.stderr < 0 or self.probability - 3 * self.stderr > 1:
            raise ValueError("estimate is inconsistent with [0, 1]")


# ---------------------------------------------------------------- enumeration

def _enumerate_cube(n: int, dist: EntryDistribution, chunk: int = 1 << 16):
    """Yield ``(Z, keys)`` blocks covering every outcome of ``n`` i.i.d. entries.

    ``keys`` encodes how many times each atom occurs (base ``n + 1`` digits),
    which is all the exact weight of an outcome depends on; it is ``None``
    for uniform distributions.
    """
    k = len(dist.atoms)
    total = k ** n
    if n > ENUM_GUARD or total > 1 << ENUM_GUARD:
        raise GuardError(f"enumerating {k}**{n} outcomes exceeds the guard of 2**{ENUM_GUARD}")
    values = dist.values
    powers = k ** np.arange(n, dtype=np.int64)
    key_base = (n + 1) ** np.arange(k, dtype=np.int64)
    for start in range(0, total, chunk):
        t = np.arange(start, min(start + chunk, total), dtype=np.int64)
        idx = (t[:, None] // powers) % k
        keys = None if dist.is_uniform else key_base[idx].sum(axis=1)
        yield values[idx], keys


def _key_weight(key: int, n: int, weights: Sequence[int]) -> int:
    w = 1
    for wj in weights:
        key, count = divmod(key, n + 1)
        w *= wj ** count
    return w


def _value_distribution_enum(f: PolyForm, dist: EntryDistribution) -> tuple[int, dict[int, int], int]:
    """Scale ``L``, map ``L * value -> integer weight``, and the total weight."""
    n = f.n
    weights = dist.weights
    tally: Counter = Counter()
    L = 1
    for Z, keys in _enumerate_cube(n, dist):
        L, vals = f.scaled_values(Z)
        if keys is None:
            u, c = np.unique(vals, return_counts=True)
            for v, cnt in zip(u.tolist(), c.tolist()):
                tally[v] += cnt
        else:
            pairs, c = np.unique(np.stack([vals.astype(np.int64), keys], axis=1), axis=0, return_counts=True)
            for (v, key), cnt in zip(pairs.tolist(), c.tolist()):
                tally[v] += cnt * _key_weight(key, n, weights)
    total = len(dist.atoms) ** n if dist.is_uniform else dist.denominator ** n
    return L, dict(tally), total


def _linear_dp(f: LinearForm, dist: EntryDistribution) -> tuple[int, dict[int, int], int]:
    L = math.lcm(1, *(c.denominator for c in f.coeffs))
    ints = [int(c * L) for c in f.coeffs]
    atoms = list(zip(dist.values.tolist(), dist.weights))
    states = {0: 1}
    for a in ints:
        nxt: dict[int, int] = {}
        for s, w in states.items():
            for v, wv in atoms:
                key = s + a * v
                nxt[key] = nxt.get(key, 0) + w * wv
        states = nxt
        if len(states) > DP_STATE_CAP:
            raise CapabilityError(f"more than {DP_STATE_CAP} achievable sums; use Monte Carlo")
    return L, states, dist.denominator ** f.n


def _probability_in(I: Interval, L: int, tally: Mapping[int, int], total: int) -> Fraction:
    lo, hi = I.integer_range(L)
    return Fraction(sum(w for v, w in tally.items() if lo <= v < hi), total)


def linear_distribution(f: LinearForm, dist: EntryDistribution = BERNOULLI01,
                        method: str = "dp") -> dict[Fraction, Fraction]:
    """Exact law of ``f(z)``: value -> probability."""
    if method == "dp":
        L, tally, total = _linear_dp(f, dist)
    elif method == "enum":
        L, tally, total = _value_distribution_enum(PolyForm.linear(f.coeffs), dist)
    else:
        raise ValueError(f"unknown method {method!r}")
    return {Fraction(v, L): Fraction(w, total) for v, w in sorted(tally.items())}


def atom_linear_exact(f: LinearForm, I: Interval, dist: EntryDistribution = BERNOULLI01,
                      method: str = "dp") -> Fraction:
    """Exact ``P(f(z) in I)`` for i.i.d. ``z_i`` drawn from ``dist``.

    ``"dp"`` walks the achievable sums after clearing denominators;
    ``"enum"`` enumerates all outcomes (at most 24 variables).
    """
    if method == "dp":
        L, tally, total = _linear_dp(f, dist)
    elif method == "enum":
        if f.n > ENUM_GUARD:
            raise CapabilityError(f"{f.n} variables is beyond exact enumeration; use Monte Carlo")
        L, tally, total = _value_distribution_enum(PolyForm.linear(f.coeffs), dist)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _probability_in(I, L, tally, total)


def erdos_bound(k: int) -> Fraction:
    """``binomial(k, k // 2) / 2**k``, the sharp point-atom bound for ``k`` large coefficients."""
    if k < 1:
        raise ValueError("k must be positive")
    return Fraction(math.comb(k, k // 2), 2 ** k)


def quad_lo_bound(S_size: int, d_values: Sequence[int], C: float = 1.0) -> float:
    """``C * (|S|**-1/2 + |S|**-1 * sum_i d_i**-1/2) ** (1/4)``."""
    if S_size < 1:
        raise ValueError("S must be non-empty")
    if len(d_values) != S_size:
        raise ValueError(f"expected {S_size} degree values, got {len(d_values)}")
    if any(d < 1 for d in d_values):
        raise ValueError("every d_i must be at least 1")
    inner = S_size ** -0.5 + sum(d ** -0.5 for d in d_values) / S_size
    return C * inner ** 0.25


def poly_lo_exponent(k: int) -> Fraction:
    """Decay exponent ``2 ** -((k**2 + k) / 2)`` for degree-``k`` forms."""
    if k < 1:
        raise ValueError("k must be positive")
    return Fraction(1, 2 ** ((k * k + k) // 2))


@dataclass(frozen=True)
class QuadPartition:
    U1: tuple[int, ...]
    U2: tuple[int, ...]
    S: tuple[int, ...]
    d: tuple[int, ...]


def quadratic_partition(f: PolyForm, scale=1) -> QuadPartition | None:
    """Greedy ``U1 / U2 / S`` choice for the quadratic bound.

    The pair ``{i, j}`` enters the form with weight ``c_ij + c_ji``. ``U1`` is
    the half of the indices with the most large pair weights, ``U2`` the rest,
    and ``S`` the members of ``U1`` with at least one large weight into
    ``U2``. Returns ``None`` when no admissible ``S`` exists.
    """
    if f.degree != 2:
        raise ValueError("quadratic_partition needs a degree-2 form")
    n = f.n
    if n < 2:
        return None
    eff: dict[tuple[int, int], Fraction] = {}
    for (i, j), c in f.terms:
        if i != j:
            key = (min(i, j), max(i, j))
            eff[key] = eff.get(key, Fraction(0)) + c
    large = {k for k, v in eff.items() if abs(v) >= scale}
    nbrs: dict[int, set[int]] = {i: set() for i in range(n)}
    for i, j in large:
        nbrs[i].add(j)
        nbrs[j].add(i)
    order = sorted(range(n), key=lambda i: (-len(nbrs[i]), i))
    U1 = tuple(sorted(order[:n // 2]))
    U2 = tuple(sorted(order[n // 2:]))
    u2 = set(U2)
    S, d = [], []
    for i in U1:
        di = len(nbrs[i] & u2)
        if di >= 1:
            S.append(i)
            d.append(di)
    if not S:
        return None
    return QuadPartition(U1, U2, tuple(S), tuple(d))


def theoretical_bound(f: LinearForm | PolyForm, C: float = 1.0, scale=1) -> float | None:
    """Bound matching the form's degree, or ``None`` when its hypothesis fails.

    Degree 1 uses :func:`erdos_bound`, degree 2 :func:`quad_lo_bound` on the
    greedy partition, higher degree ``C * m ** -a_k`` with ``m`` the number of
    large coefficients divided by ``n ** (k - 1)``.
    """
    f = as_polyform(f)
    if f.degree == 1:
        k = sum(1 for _, c in f.terms if abs(c) >= scale)
        return C * float(erdos_bound(k)) if k else None
    if f.degree == 2:
        part = quadratic_partition(f, scale)
        return None if part is None else quad_lo_bound(len(part.S), part.d, C)
    m = sum(1 for _, c in f.terms if abs(c) >= scale) / f.n ** (f.degree - 1)
    return C * m ** -float(poly_lo_exponent(f.degree)) if m >= 1 else None


def _describe(f: LinearForm | PolyForm) -> str:
    f = as_polyform(f)
    return f"degree{f.degree}:n={f.n}:terms={len(f.terms)}"


# ---------------------------------------------------------------- Monte Carlo

def _mc_block_hits(f: PolyForm, dist: EntryDistribution, I: Interval, seed: int,
                   domain: int, trials: int, b: int) -> int:
    size = min(MC_BLOCK, trials - b * MC_BLOCK)
    rng = rng_from_seed(derive_seed(seed, domain, b))
    L, vals = f.scaled_values(dist.sample(rng, (size, f.n)))
    lo, hi = I.integer_range(L)
    return int(((vals >= lo) & (vals < hi)).sum())


def _mc_block_counts(f: PolyForm, dist: EntryDistribution, seed: int, domain: int,
                     trials: int, b: int) -> tuple[int, Counter]:
    size = min(MC_BLOCK, trials - b * MC_BLOCK)
    rng = rng_from_seed(derive_seed(seed, domain, b))
    L, vals = f.scaled_values(dist.sample(rng, (size, f.n)))
    u, c = np.unique(vals, return_counts=True)
    return L, Counter(dict(zip(u.tolist(), c.tolist())))


def _n_blocks(trials: int) -> int:
    return -(-trials // MC_BLOCK)


def _estimate(hits: int, trials: int) -> tuple[Fraction, float]:
    p = Fraction(hits, trials)
    return p, math.sqrt(float(p) * (1 - float(p)) / trials)


def atom_poly(f: LinearForm | PolyForm, I: Interval, dist: EntryDistribution = BERNOULLI01,
              mode: str | MonteCarlo = "exact", threads: int = 1) -> ConcentrationReport:
    """``P(f(z) in I)`` exactly (``mode="exact"``) or by seeded Monte Carlo."""
    g = as_polyform(f)
    bound = theoretical_bound(g)
    if mode == "exact":
        L, tally, total = _value_distribution_enum(g, dist)
        return ConcentrationReport(_describe(f), g.n, I, _probability_in(I, L, tally, total),
                                   None, bound, Method.EXACT_ENUM, bound is not None)
    if not isinstance(mode, MonteCarlo):
        raise ValueError(f"unknown mode {mode!r}")
    job = partial(_mc_block_hits, g, dist, I, mode.seed, CONCENTRATION_DOMAIN, mode.trials)
    hits = sum(parallel_map(job, range(_n_blocks(mode.trials)), threads))
    p, se = _estimate(hits, mode.trials)
    return ConcentrationReport(_describe(f), g.n, I, p, se, bound, Method.MONTE_CARLO, bound is not None)


def max_atom(f: LinearForm | PolyForm, dist: EntryDistribution = BERNOULLI01,
             mode: str | MonteCarlo = "exact", threads: int = 1) -> tuple[Fraction, Fraction, float | None]:
    """Most likely value of ``f`` and its probability ``(value, p, stderr)``.

    Exact mode scans the full law (ties go to the smallest value). Monte
    Carlo picks the most frequent value in an independent pilot run of
    ``trials // 10`` draws and then estimates that value's probability from
    ``trials`` fresh draws, so the reported estimate is unbiased.
    """
    g = as_polyform(f)
    if mode == "exact":
        L, tally, total = _value_distribution_enum(g, dist)
        best = max(sorted(tally), key=lambda v: tally[v])
        return Fraction(best, L), Fraction(tally[best], total), None
    pilot_trials = max(mode.trials // 10, 1000)
    job = partial(_mc_block_counts, g, dist, mode.seed, PILOT_DOMAIN, pilot_trials)
    counts: Counter = Counter()
    L = 1
    for L, c in parallel_map(job, range(_n_blocks(pilot_trials)), threads):
        counts.update(c)
    best = min(counts, key=lambda v: (-counts[v], v))
    point = Interval.point(Fraction(best, L))
    report = atom_poly(g, point, dist, mode, threads)
    return point.left, report.probability, report.stderr


# ------------------------------------------------------------ LO experiments

def ones_offdiag(m: int) -> PolyForm:
    """``sum_{i != j} z_i z_j``."""
    return PolyForm(m, 2, tuple(((i, j), 1) for i in range(m) for j in range(m) if i != j))


def ones_linear(m: int) -> PolyForm:
    return PolyForm.linear([1] * m)


def diagonal_only(m: int) -> PolyForm:
    """``sum_i z_i**2``: every pair coefficient vanishes."""
    return PolyForm(m, 2, tuple(((i, i), 1) for i in range(m)))


FAMILIES: dict[str, Callable[[int], PolyForm]] = {
    "ones-offdiag": ones_offdiag,
    "ones-linear": ones_linear,
    "diagonal": diagonal_only,
}


def lo_experiment(family: str | Callable[[int], PolyForm], sizes: Sequence[int],
                  trials: int = 10**6, seed: int = 0, dist: EntryDistribution = BERNOULLI01,
                  exact_max_n: int = 16, bound_constant: float | None = None,
                  threads: int = 1) -> list[ConcentrationReport]:
    """Largest point atom of a form family at each size, paired with its bound.

    Sizes up to ``exact_max_n`` (at most 24) are computed exactly, larger
    ones by Monte Carlo with ``trials`` draws. With ``bound_constant=None``
    the constant is fitted so the bound equals the atom at the smallest size
    whose hypothesis holds; the bound is a shape check, not a constant claim.
    """
    if exact_max_n > ENUM_GUARD:
        raise GuardError(f"exact_max_n may not exceed {ENUM_GUARD}")
    make = FAMILIES[family] if isinstance(family, str) else family
    name = family if isinstance(family, str) else getattr(family, "__name__", "custom")
    rows = []
    for i, m in enumerate(sorted(sizes)):
        f = make(m)
        if m <= exact_max_n:
            value, p, se = max_atom(f, dist, "exact")
            method = Method.EXACT_ENUM
        else:
            value, p, se = max_atom(f, dist, MonteCarlo(trials, derive_seed(seed, CONCENTRATION_DOMAIN, m)), threads)
            method = Method.MONTE_CARLO
        base = theoretical_bound(f)
        rows.append([f"{name}:m={m}", f.n, Interval.point(value), p, se, base, method, base is not None])
    C = bound_constant
    if C is None:
        fit = next((r for r in rows if r[5] is not None), None)
        C = float(fit[3]) / fit[5] if fit else 1.0
    reports = []
    for r in rows:
        if r[5] is not None:
            r[5] = C * r[5]
        reports.append(ConcentrationReport(*r))
    return reports


# ---------------------------------------------------------------- decoupling

@dataclass(frozen=True)
class DecouplingResult:
    """``lhs = P(E)``; ``folded = P(E holds on all 2**k mixed copies)``."""

    k: int
    lhs: Fraction
    folded: Fraction
    holds: bool

    @property
    def rhs(self) -> float:
        return float(self.folded) ** (1 / 2 ** self.k)


def _marginals(joint: Mapping[tuple, Fraction]) -> list[dict]:
    k = len(next(iter(joint)))
    margs: list[dict] = [dict() for _ in range(k)]
    for x, p in joint.items():
        if len(x) != k:
            raise ValueError("outcomes of different arity in the joint table")
        for i, xi in enumerate(x):
            margs[i][xi] = margs[i].get(xi, Fraction(0)) + Fraction(p)
    return [{v: p for v, p in m.items() if p} for m in margs]


def decoupling_check(joint: Mapping[tuple, Fraction] | Sequence[Mapping], event: Callable[..., bool],
                     k: int | None = None) -> DecouplingResult:
    """Exact check of ``P(E)**(2**k) <= P(AND over S of E(X^S))``.

    ``joint`` is either a table ``outcome tuple -> probability`` for
    independent ``(X_1, ..., X_k)`` or a list of ``k`` marginal tables.
    ``X^S`` takes ``X_i`` for ``i`` in ``S`` and an independent copy ``X_i'``
    otherwise, over all subsets ``S`` of the ``k`` coordinates.
    """
    if isinstance(joint, Mapping):
        if not joint:
            raise ValueError("empty joint distribution")
        margs = _marginals(joint)
        if sum(Fraction(p) for p in joint.values()) != 1:
            raise ValueError("joint probabilities do not sum to 1")
        for x in itertools.product(*(sorted(m) for m in margs)):
            expected = math.prod(m[xi] for m, xi in zip(margs, x))
            if Fraction(joint.get(x, 0)) != expected:
                raise ValueError(f"components are dependent at outcome {x}")
    else:
        margs = [{v: Fraction(p) for v, p in m.items() if p} for m in joint]
        if any(sum(m.values()) != 1 for m in margs):
            raise ValueError("a marginal does not sum to 1")
    if k is not None and k != len(margs):
        raise ValueError(f"arity {k} does not match {len(margs)} components")
    k = len(margs)
    supports = [sorted(m) for m in margs]
    size = math.prod(len(s) for s in supports)
    if size * size > DECOUPLING_GUARD:
        raise GuardError(f"{size}**2 replicated outcomes exceed the guard of {DECOUPLING_GUARD}")
    table = {x: bool(event(*x)) for x in itertools.product(*supports)}
    prob = {x: math.prod(m[xi] for m, xi in zip(margs, x)) for x in table}
    lhs = sum((prob[x] for x, e in table.items() if e), Fraction(0))
    masks = list(itertools.product((True, False), repeat=k))
    folded = Fraction(0)
    hits = [x for x, e in table.items() if e]
    for x in hits:
        for y in hits:
            if all(table[tuple(a if keep else b for a, b, keep in zip(x, y, mask))] for mask in masks):
                folded += prob[x] * prob[y]
    return DecouplingResult(k, lhs, folded, lhs ** (2 ** k) <= folded)


@dataclass
class SweepResult:
    bits: tuple[int, ...]
    events: int
    holds: int
    violations: list[int] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return self.holds == self.events


def folded_counts(events: np.ndarray) -> np.ndarray:
    """Unnormalised ``2**k``-fold event counts for a stack of boolean event tensors.

    ``events`` has shape ``(E, s_1, ..., s_k)``. Each pass doubles one axis
    into ``(x_i, x_i')`` and multiplies, so after ``k`` passes the entry at
    ``(x, x')`` is the product over all mixtures ``x^S``.
    """
    T = events.astype(np.int64)
    k = events.ndim - 1
    for axis in range(1, 2 * k, 2):
        T = np.expand_dims(T, axis + 1) * np.expand_dims(T, axis)
    return T.reshape(T.shape[0], -1).sum(axis=1)


def decoupling_sweep(bits: Sequence[int], events: np.ndarray | None = None) -> SweepResult:
    """Check the decoupling inequality for events on uniform ``bits``-bit variables.

    With ``events=None`` all ``2**(2**sum(bits))`` events are swept (at most
    ``2**16``). Otherwise ``events`` is a ``(E, outcomes)`` boolean array.
    """
    bits = tuple(int(b) for b in bits)
    sizes = tuple(2 ** b for b in bits)
    outcomes = math.prod(sizes)
    k = len(bits)
    if events is None:
        if outcomes > 16:
            raise GuardError(f"exhaustive sweep over 2**{outcomes} events exceeds the guard of 2**16")
        ids = np.arange(2 ** outcomes, dtype=np.int64)
        events = ((ids[:, None] >> np.arange(outcomes)) & 1).astype(bool)
    events = np.asarray(events, dtype=bool).reshape((-1,) + sizes)
    counts = events.reshape(events.shape[0], -1).sum(axis=1)
    folded = folded_counts(events)
    # (c / O) ** 2**k <= F / O**2, cleared of denominators, in Python ints.
    power = 2 ** k
    holds, violations = 0, []
    for e, (c, F) in enumerate(zip(counts.tolist(), folded.tolist())):
        if c ** power * outcomes ** 2 <= F * outcomes ** power:
            holds += 1
        else:
            violations.append(e)
    return SweepResult(bits, events.shape[0], holds, violations)


def random_events(bits: Sequence[int], count: int, seed: int) -> np.ndarray:
    """``count`` uniformly random events (boolean outcome tables), seeded."""
    outcomes = math.prod(2 ** b for b in bits)
    rng = rng_from_seed(derive_seed(seed, DECOUPLING_DOMAIN, outcomes))
    return rng.integers(0, 2, size=(count, outcomes)).astype(bool)
