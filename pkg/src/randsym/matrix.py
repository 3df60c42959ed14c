"""Symmetric integer matrices, entry distributions and seeded sampling.

Every random draw in the package goes through :func:`rng_from_seed`, and
work units of an experiment get their seeds from :func:`derive_seed`, so a
result depends only on ``(master seed, unit key)`` and never on scheduling.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

SEED_BITS = 64


class DistName(str, enum.Enum):
    BERNOULLI01 = "Bernoulli01"
    RADEMACHER = "Rademacher"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class EntryDistribution:
    """Finite atomic distribution on the integers with exact probabilities.

    ``atoms`` holds ``(value, probability)`` pairs sorted by value.
    """

    atoms: tuple[tuple[int, Fraction], ...]
    name: DistName = DistName.CUSTOM

    def __post_init__(self):
        atoms = tuple(sorted((int(v), Fraction(p)) for v, p in self.atoms))
        values = [v for v, _ in atoms]
        if len(set(values)) != len(values):
            raise ValueError(f"duplicate atom values in {values}")
        if len(atoms) < 2:
            raise ValueError("a distribution needs at least two distinct atoms")
        if any(p <= 0 for _, p in atoms):
            raise ValueError("atom probabilities must be positive")
        total = sum(p for _, p in atoms)
        if total != 1:
            raise ValueError(f"atom probabilities sum to {total}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "name", DistName(self.name))

    @classmethod
    def bernoulli01(cls) -> "EntryDistribution":
        return cls(((0, Fraction(1, 2)), (1, Fraction(1, 2))), DistName.BERNOULLI01)

    @classmethod
    def rademacher(cls) -> "EntryDistribution":
        return cls(((-1, Fraction(1, 2)), (1, Fraction(1, 2))), DistName.RADEMACHER)

    @classmethod
    def custom(cls, atoms: Iterable[tuple[int, Fraction | int | str]]) -> "EntryDistribution":
        return cls(tuple((v, Fraction(p)) for v, p in atoms), DistName.CUSTOM)

    @classmethod
    def parse(cls, text: str) -> "EntryDistribution":
        """Parse ``bernoulli01``, ``rademacher`` or ``custom:v:p,v:p,...``."""
        key = text.strip().lower()
        if key == "bernoulli01":
            return cls.bernoulli01()
        if key == "rademacher":
            return cls.rademacher()
        if key.startswith("custom:"):
            atoms = []
            for item in key[len("custom:"):].split(","):
                value, _, prob = item.partition(":")
                if not prob:
                    raise ValueError(f"custom atom {item!r} must look like value:probability")
                atoms.append((int(value), Fraction(prob)))
            return cls.custom(atoms)
        raise ValueError(f"unknown distribution {text!r}")

    def spec(self) -> str:
        """Inverse of :meth:`parse`."""
        if self.name is DistName.BERNOULLI01:
            return "bernoulli01"
        if self.name is DistName.RADEMACHER:
            return "rademacher"
        return "custom:" + ",".join(f"{v}:{p}" for v, p in self.atoms)

    @cached_property
    def values(self) -> np.ndarray:
        v = np.array([v for v, _ in self.atoms], dtype=np.int64)
        v.flags.writeable = False
        return v

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.atoms)

    @cached_property
    def denominator(self) -> int:
        return math.lcm(*(p.denominator for _, p in self.atoms))

    @cached_property
    def weights(self) -> tuple[int, ...]:
        """Integer weights ``w`` with ``probability = w / denominator``."""
        d = self.denominator
        return tuple(int(p * d) for _, p in self.atoms)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.probabilities)) == 1

    @cached_property
    def _cumulative(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        # Exact sampling: uniform integer in [0, D) mapped through integer
        # cumulative weights, so rational probabilities are honoured exactly.
        u = rng.integers(0, self.denominator, size=size)
        idx = np.searchsorted(self._cumulative, u, side="right")
        return self.values[idx]


BERNOULLI01 = EntryDistribution.bernoulli01()
RADEMACHER = EntryDistribution.rademacher()


def rho_of(dist: EntryDistribution) -> Fraction:
    """Largest atom probability of ``dist``."""
    return max(p for _, p in dist.atoms)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(seed: int, *key: int) -> int:
    """Mix a master seed with a work-unit key into a fresh 64-bit seed.

    The mix is numpy's ``SeedSequence(seed, spawn_key=key)`` hash, read out as
    one 64-bit word. Distinct keys give statistically independent streams, and
    the value does not depend on how many units run or in which order.
    """
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


@dataclass(frozen=True)
class SymMatrix:
    """Square integer matrix with ``entries[i][j] == entries[j][i]``."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        n = len(rows)
        for row in rows:
            if len(row) != n:
                raise DimensionError(f"matrix is not square: row of length {len(row)} in {n} rows")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"matrix is not symmetric at ({i}, {j})")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]] | np.ndarray) -> "SymMatrix":
        if isinstance(rows, np.ndarray):
            rows = rows.tolist()
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, n: int) -> "SymMatrix":
        return cls(tuple((0,) * n for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def to_list(self) -> list[list[int]]:
        return [list(row) for row in self.entries]

    def to_numpy(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.n, self.n)

    def leading_block(self, k: int) -> "SymMatrix":
        return SymMatrix(tuple(row[:k] for row in self.entries[:k]))


@dataclass(frozen=True)
class AugmentationVector:
    """New last column (``border``) and bottom-right entry (``corner``)."""

    border: tuple[int, ...]
    corner: int

    def __post_init__(self):
        object.__setattr__(self, "border", tuple(int(x) for x in self.border))
        object.__setattr__(self, "corner", int(self.corner))

    def as_vector(self) -> tuple[int, ...]:
        return self.border + (self.corner,)


def _sample_array(n: int, dist: EntryDistribution, rng: np.random.Generator,
                  diagonal: EntryDistribution | None = None) -> np.ndarray:
    # Draw order is part of the reproducibility contract: the upper triangle
    # (diagonal included) in row-major order, then the diagonal again if a
    # separate diagonal law is given.
    rows, cols = _upper_indices(n)
    upper = dist.sample(rng, len(rows))
    out = np.empty((n, n), dtype=np.int64)
    out[rows, cols] = upper
    out[cols, rows] = upper
    if diagonal is not None:
        out[np.diag_indices(n)] = diagonal.sample(rng, n)
    return out


@lru_cache(maxsize=None)
def _upper_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n)


def sample_symmetric(n: int, dist: EntryDistribution, seed: int,
                     diagonal: EntryDistribution | None = None) -> SymMatrix:
    """Random symmetric ``n x n`` matrix with i.i.d. upper-triangle entries.

    ``diagonal`` optionally gives the diagonal its own distribution; by
    default the diagonal uses ``dist`` as well.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    return SymMatrix.from_rows(_sample_array(n, dist, rng_from_seed(seed), diagonal))


def sample_augmentation(n: int, dist: EntryDistribution, rng: np.random.Generator,
                        diagonal: EntryDistribution | None = None) -> AugmentationVector:
    border = dist.sample(rng, n)
    corner = (diagonal or dist).sample(rng, 1)[0]
    return AugmentationVector(tuple(border.tolist()), int(corner))


def augment(A: SymMatrix, v: AugmentationVector) -> SymMatrix:
    """Border ``A`` with ``v.border`` as last row and column and ``v.corner`` on the diagonal."""
    if len(v.border) != A.n:
        raise DimensionError(f"border has length {len(v.border)}, matrix has dimension {A.n}")
    rows = [row + (b,) for row, b in zip(A.entries, v.border)]
    rows.append(v.border + (v.corner,))
    return SymMatrix(tuple(rows))
