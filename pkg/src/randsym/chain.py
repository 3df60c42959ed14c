"""Nested random chains ``Q_1 ⊂ Q_2 ⊂ ...`` and singularity surveys.

A chain grows by bordering the current matrix with a fresh random column,
its transpose and a corner entry. Each step records the certified rank, the
rank increment (always 0, 1 or 2), the deficit functional
``X_n = 1.1 ** (n - rank)`` (0 when non-singular) and, for small ``n``, the
structural class. Surveys sample independent matrices instead.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Collection, Iterable, Sequence

import numpy as np

from ._parallel import CHAIN_DOMAIN, SURVEY_DOMAIN, parallel_map
from .batch import WORD_PRIME, BorderedRankTracker, batch_det
from .errors import GuardError
from .linalg import (MatrixLike, RankCertificate, _rref, adjugate, as_rows, det_exact,
                     nullspace_rational, rank_exact)
from .matrix import (BERNOULLI01, EntryDistribution, _sample_array, derive_seed,
                     rng_from_seed)
from .structure import DEFAULT_EPSILON, StructuralClass, StructureTag, classify, compute_N

X_BASE = 1.1
CLASSIFY_GUARD = 16
EXHAUSTIVE_GUARD = 28
LAW_GUARD = 20


@dataclass(frozen=True)
class ChainStep:
    n: int
    rank: int
    increment: int | None
    cls: StructuralClass | None
    x_value: float
    certificate: RankCertificate
    next_law: tuple[Fraction, Fraction, Fraction] | None = None


@dataclass(frozen=True)
class ChainTrace:
    seed: int
    dist: EntryDistribution
    epsilon: float
    steps: tuple[ChainStep, ...]


def x_functional(n: int, rank: int) -> float:
    return 0.0 if rank == n else X_BASE ** (n - rank)


def _exact_dtype(bound: int):
    if bound < 2**53:
        return np.float64
    return np.int64 if bound < 2**62 else object


def _border_batches(n: int, dist: EntryDistribution, chunk: int = 1 << 16):
    # All borders in atoms**n, with integer weights (None when uniform).
    k = len(dist.atoms)
    total = k ** n
    shifts = np.arange(n, dtype=np.int64)
    powers = k ** shifts
    weights = None
    if not dist.is_uniform:
        wdt = np.int64 if dist.denominator ** n < 2**62 // chunk else object
        weights = np.array(dist.weights, dtype=object).astype(wdt)
    for start in range(0, total, chunk):
        t = np.arange(start, min(start + chunk, total), dtype=np.int64)
        idx = (t[:, None] >> shifts) & 1 if k == 2 else (t[:, None] // powers) % k
        w = None if weights is None else np.prod(weights[idx], axis=1)
        yield dist.values[idx], w


def next_increment_law(A: MatrixLike, dist: EntryDistribution = BERNOULLI01,
                       diagonal: EntryDistribution | None = None,
                       rank: int | None = None) -> tuple[Fraction, Fraction, Fraction]:
    """Exact law of ``rank(A') - rank(A)`` when ``A`` is bordered at random.

    Returns ``(P(+0), P(+1), P(+2))``. The border ``u`` has i.i.d. entries
    from ``dist``, the corner is drawn from ``diagonal`` (default ``dist``).
    The rank grows by 2 exactly when ``u`` leaves the column space. Otherwise
    ``u`` is determined by its restriction to a basis set ``I`` of columns,
    ``B = A[I, I]`` is non-singular, and the rank stays put exactly when
    ``det(B) * corner == u_I^T adj(B) u_I``.
    """
    rows = as_rows(A)
    n = len(rows)
    corner = diagonal or dist
    k = len(dist.atoms)
    if n * math.log2(k) > LAW_GUARD:
        raise GuardError(f"{k}**{n} borders exceeds the guard of 2**{LAW_GUARD}")
    if rank is None:
        rank = rank_exact(rows) if n else 0
    if rank == n:
        basis, W = list(range(n)), []
    else:
        basis = _rref([[Fraction(x) for x in r] for r in rows], n)
        W = nullspace_rational(rows, ncols=n)
    B = [[rows[i][j] for j in basis] for i in basis]
    det_b = det_exact(B)
    adj_b = adjugate(B) if B else []

    r = len(basis)
    vmax = int(np.abs(dist.values).max())
    wmax = max((abs(x) for w in W for x in w), default=0)
    amax = max((abs(x) for row in adj_b for x in row), default=0)
    wt = _exact_dtype(max(n * wmax * vmax, 1))
    qt = _exact_dtype(max(r * r * amax * vmax * vmax, 1))
    Wm = np.array(W, dtype=object).reshape(len(W), n).astype(wt)
    adj_m = np.array(adj_b, dtype=object).reshape(r, r).astype(qt)
    targets = [(det_b * int(x), w) for x, w in zip(corner.values, corner.weights)]
    cden = corner.denominator

    law = [0, 0, 0]
    for U, w in _border_batches(n, dist):
        incol = ~((U.astype(wt) @ Wm.T) != 0).any(axis=1) if len(W) else np.ones(len(U), dtype=bool)
        Uc = U[incol][:, basis].astype(qt)
        q = ((Uc @ adj_m) * Uc).sum(axis=1)
        if w is None:
            inside = int(incol.sum())
            law[2] += (len(U) - inside) * cden
            stay = sum(int((q == target).sum()) * tw for target, tw in targets)
        else:
            wc = w[incol]
            inside = int(wc.sum())
            law[2] += int(w[~incol].sum()) * cden
            stay = sum(int(wc[q == target].sum()) * tw for target, tw in targets)
        law[0] += stay
        law[1] += inside * cden - stay
    den = (k ** n if dist.is_uniform else dist.denominator ** n) * cden
    return tuple(Fraction(c, den) for c in law)


def run_chain(n_max: int, dist: EntryDistribution = BERNOULLI01, seed: int = 0,
              epsilon: float = DEFAULT_EPSILON, classify_up_to: int = CLASSIFY_GUARD,
              classify_dims: Collection[int] | None = None,
              diagonal: EntryDistribution | None = None,
              law_classes: Collection[StructureTag] = ()) -> ChainTrace:
    """Grow one chain to dimension ``n_max``.

    Step ``n`` draws the border (``n - 1`` entries) and then the corner from
    the chain's generator. Ranks come from an incremental rank mod a word
    prime; any deficit is confirmed by exact elimination. Classes are computed
    for ``n <= classify_up_to`` (and, if given, only at ``classify_dims``).
    Classified steps whose tag is in ``law_classes`` also carry the exact law
    of the next increment (see :func:`next_increment_law`).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    rng = rng_from_seed(seed)
    Q = np.zeros((n_max, n_max), dtype=np.int64)
    tracker = BorderedRankTracker(WORD_PRIME, capacity=n_max)
    steps = []
    prev_rank = None
    for n in range(1, n_max + 1):
        border = dist.sample(rng, n - 1)
        corner = int((diagonal or dist).sample(rng, 1)[0])
        Q[n - 1, :n - 1] = border
        Q[:n - 1, n - 1] = border
        Q[n - 1, n - 1] = corner
        r_mod = tracker.push(border, corner)
        if r_mod == n:
            cert = RankCertificate(n, ((WORD_PRIME, r_mod),), False)
        else:
            cert = RankCertificate(rank_exact(Q[:n, :n]), ((WORD_PRIME, r_mod),), True)
        rank = cert.rank
        inc = None if prev_rank is None else rank - prev_rank
        if inc is not None and not 0 <= inc <= 2:
            raise RuntimeError(f"rank moved from {prev_rank} to {rank} at n={n}; bordering allows 0..2")
        cls = law = None
        if n <= classify_up_to and (classify_dims is None or n in classify_dims):
            cls = classify(Q[:n, :n], compute_N(n, epsilon), rank=rank)
            if cls.tag in law_classes:
                law = next_increment_law(Q[:n, :n], dist, diagonal, rank=rank)
        steps.append(ChainStep(n, rank, inc, cls, x_functional(n, rank), cert, law))
        prev_rank = rank
    return ChainTrace(seed, dist, epsilon, tuple(steps))


def chain_seed(seed: int, index: int) -> int:
    return derive_seed(seed, CHAIN_DOMAIN, index)


def _chain_unit(n_max, dist, seed, epsilon, classify_up_to, classify_dims, diagonal,
                law_classes, index):
    return run_chain(n_max, dist, chain_seed(seed, index), epsilon, classify_up_to,
                     classify_dims, diagonal, law_classes)


def run_chains(count: int, n_max: int, dist: EntryDistribution = BERNOULLI01, seed: int = 0,
               epsilon: float = DEFAULT_EPSILON, classify_up_to: int = CLASSIFY_GUARD,
               classify_dims: Collection[int] | None = None,
               diagonal: EntryDistribution | None = None,
               law_classes: Collection[StructureTag] = (), threads: int = 1) -> list[ChainTrace]:
    """``count`` independent chains; chain ``i`` is seeded with ``chain_seed(seed, i)``."""
    job = partial(_chain_unit, n_max, dist, seed, epsilon, classify_up_to,
                  None if classify_dims is None else frozenset(classify_dims), diagonal,
                  frozenset(law_classes))
    return parallel_map(job, range(count), threads)


@dataclass(frozen=True)
class IncrementRow:
    cls: str
    increment: int
    count: int
    total: int
    frequency: Fraction
    stderr: float


@dataclass
class IncrementStats:
    """Counts of ``(predecessor class, next increment)``; merge with ``+``."""

    counts: Counter = field(default_factory=Counter)

    def __add__(self, other: "IncrementStats") -> "IncrementStats":
        return IncrementStats(self.counts + other.counts)

    def total(self, cls: str) -> int:
        return sum(c for (k, _), c in self.counts.items() if k == cls)

    def frequency(self, cls: str, increment: int) -> tuple[Fraction, float]:
        total = self.total(cls)
        if total == 0:
            raise ValueError(f"no classified steps of class {cls}")
        f = Fraction(self.counts[(cls, increment)], total)
        return f, math.sqrt(float(f) * (1 - float(f)) / total)

    def rows(self) -> list[IncrementRow]:
        out = []
        for cls, inc in sorted(self.counts):
            f, se = self.frequency(cls, inc)
            out.append(IncrementRow(cls, inc, self.counts[(cls, inc)], self.total(cls), f, se))
        return out


def conditional_increment_stats(traces: Iterable[ChainTrace],
                                dims: Collection[int] | None = None) -> IncrementStats:
    """Distribution of the next rank increment given the class of ``Q_n``.

    Steps without a class are skipped; ``dims`` restricts the predecessor
    dimension.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces given")
    counts: Counter = Counter()
    for tr in traces:
        for cur, nxt in zip(tr.steps, tr.steps[1:]):
            if cur.cls is None or (dims is not None and cur.n not in dims):
                continue
            counts[(cur.cls.tag.value, nxt.increment)] += 1
    return IncrementStats(counts)


@dataclass(frozen=True)
class LawRow:
    cls: str
    increment: int
    steps: int
    mean: float
    stderr: float


def conditional_increment_means(traces: Iterable[ChainTrace],
                                dims: Collection[int] | None = None) -> list[LawRow]:
    """Average of the exact next-increment laws per predecessor class.

    Estimates the same conditional probabilities as
    :func:`conditional_increment_stats`, but each step contributes its exact
    conditional law instead of one observed increment, which removes the
    border randomness from the variance. Only steps that carry a law count.
    """
    laws: dict[str, list[tuple[Fraction, ...]]] = {}
    for tr in traces:
        for s in tr.steps:
            if s.next_law is None or (dims is not None and s.n not in dims):
                continue
            laws.setdefault(s.cls.tag.value, []).append(s.next_law)
    if not laws:
        raise ValueError("no steps carry an exact increment law")
    rows = []
    for cls in sorted(laws):
        ls = laws[cls]
        m = len(ls)
        for inc in range(3):
            xs = [float(l[inc]) for l in ls]
            mean = math.fsum(xs) / m
            var = math.fsum((x - mean) ** 2 for x in xs) / (m - 1) if m > 1 else 0.0
            rows.append(LawRow(cls, inc, m, mean, math.sqrt(var / m)))
    return rows


@dataclass(frozen=True)
class XRow:
    n: int
    count: int
    mean: float
    stderr: float


def x_decay_estimate(traces: Iterable[ChainTrace]) -> list[XRow]:
    """Per-dimension sample mean of ``X_n`` with its standard error."""
    by_n: dict[int, list[float]] = {}
    for tr in traces:
        for s in tr.steps:
            by_n.setdefault(s.n, []).append(s.x_value)
    rows = []
    for n in sorted(by_n):
        xs = by_n[n]
        k = len(xs)
        mean = math.fsum(xs) / k
        var = math.fsum((x - mean) ** 2 for x in xs) / (k - 1) if k > 1 else 0.0
        rows.append(XRow(n, k, mean, math.sqrt(var / k)))
    return rows


# ------------------------------------------------------------------- surveys

@dataclass(frozen=True)
class SurveyRow:
    n: int
    trials: int
    singular: int
    p_hat: Fraction
    stderr: float
    logdet_scaled: float


def trial_seed(seed: int, n: int, t: int) -> int:
    """Seed of trial ``t`` at dimension ``n``: ``sample_symmetric(n, dist, trial_seed(...))`` replays it."""
    return derive_seed(seed, SURVEY_DOMAIN, n, t)


def _survey_unit(n, dist, diagonal, seed, trials, unit_size, u) -> tuple[int, list[float]]:
    ts = range(u * unit_size, min((u + 1) * unit_size, trials))
    M = np.stack([_sample_array(n, dist, rng_from_seed(trial_seed(seed, n, t)), diagonal) for t in ts])
    dets = batch_det(M)
    logs = [math.log(abs(int(d))) for d in dets if d != 0]
    return len(ts) - len(logs), logs


def _scaled_mean(n: int, logs: Sequence[float]) -> float:
    if n < 2 or not logs:
        return math.nan
    return math.fsum(logs) / len(logs) / (n * math.log(n))


def _enumerate_symmetric(n: int, dist: EntryDistribution, chunk: int = 1 << 15):
    k = len(dist.atoms)
    iu = np.triu_indices(n)
    m = len(iu[0])
    total = k ** m
    if m * math.log2(k) > EXHAUSTIVE_GUARD:
        raise GuardError(f"{k}**{m} matrices at n={n} exceeds the guard of 2**{EXHAUSTIVE_GUARD}")
    powers = k ** np.arange(m, dtype=np.int64)
    values = dist.values
    for start in range(0, total, chunk):
        t = np.arange(start, min(start + chunk, total), dtype=np.int64)
        upper = values[(t[:, None] // powers) % k]
        M = np.zeros((len(t), n, n), dtype=np.int64)
        M[:, iu[0], iu[1]] = upper
        M[:, iu[1], iu[0]] = upper
        yield M


def _exhaustive(n: int, dist: EntryDistribution) -> tuple[int, int, list[float]]:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not dist.is_uniform:
        raise ValueError("exhaustive enumeration counts matrices, so atoms must be equally likely")
    total = singular = 0
    logs: list[float] = []
    for M in _enumerate_symmetric(n, dist):
        d = batch_det(M)
        nz = d[d != 0]
        total += len(d)
        singular += len(d) - len(nz)
        logs.extend(np.log(np.abs(nz.astype(np.float64))).tolist())
    return total, singular, logs


def exhaustive_singularity(n: int, dist: EntryDistribution = BERNOULLI01) -> Fraction:
    """Exact singular fraction over all symmetric matrices with entries in the atoms."""
    total, singular, _ = _exhaustive(n, dist)
    return Fraction(singular, total)


def survey_singularity(ns: Iterable[int], trials: int, dist: EntryDistribution = BERNOULLI01,
                       seed: int = 0, exhaustive: bool = False, threads: int = 1,
                       diagonal: EntryDistribution | None = None,
                       unit_size: int = 2048) -> list[SurveyRow]:
    """Singular frequency and scaled log-determinant of independent ``Q_n``.

    ``logdet_scaled`` averages ``log|det Q_n| / (n log n)`` over non-singular
    samples (NaN for ``n = 1`` or when all samples are singular). With
    ``exhaustive=True`` every matrix is counted once and ``trials`` is
    ignored.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rows = []
    for n in ns:
        if exhaustive:
            if diagonal is not None:
                raise ValueError("exhaustive mode uses one distribution for all entries")
            total, singular, logs = _exhaustive(n, dist)
            p = Fraction(singular, total)
            rows.append(SurveyRow(n, total, singular, p, 0.0, _scaled_mean(n, logs)))
            continue
        job = partial(_survey_unit, n, dist, diagonal, seed, trials, unit_size)
        singular, logs = 0, []
        for s, lg in parallel_map(job, range(-(-trials // unit_size)), threads):
            singular += s
            logs.extend(lg)
        p = Fraction(singular, trials)
        se = math.sqrt(float(p) * (1 - float(p)) / trials)
        rows.append(SurveyRow(n, trials, singular, p, se, _scaled_mean(n, logs)))
    return rows
