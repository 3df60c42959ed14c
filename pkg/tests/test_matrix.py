import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randsym.errors import DimensionError
from randsym.matrix import (BERNOULLI01, RADEMACHER, AugmentationVector, EntryDistribution,
                            SymMatrix, augment, derive_seed, rho_of, rng_from_seed,
                            sample_augmentation, sample_symmetric)

SEEDS = st.integers(0, 2**64 - 1)
DISTS = st.sampled_from([BERNOULLI01, RADEMACHER, EntryDistribution.parse("custom:0:7/10,1:3/10"),
                         EntryDistribution.parse("custom:-1:1/4,0:1/2,3:1/4")])


def test_named_distributions():
    assert BERNOULLI01.atoms == ((0, Fraction(1, 2)), (1, Fraction(1, 2)))
    assert RADEMACHER.atoms == ((-1, Fraction(1, 2)), (1, Fraction(1, 2)))


@pytest.mark.parametrize("dist, rho", [
    (BERNOULLI01, Fraction(1, 2)),
    (RADEMACHER, Fraction(1, 2)),
    (EntryDistribution.custom([(0, Fraction(7, 10)), (1, Fraction(3, 10))]), Fraction(7, 10)),
])
def test_rho(dist, rho):
    assert rho_of(dist) == rho


@pytest.mark.parametrize("atoms", [
    [(0, Fraction(1, 2)), (1, Fraction(1, 3))],
    [(0, Fraction(1))],
    [(0, Fraction(0)), (1, Fraction(1))],
    [(1, Fraction(1, 2)), (1, Fraction(1, 2))],
])
def test_invalid_distributions_rejected(atoms):
    with pytest.raises(ValueError):
        EntryDistribution.custom(atoms)


@pytest.mark.parametrize("text", ["bernoulli01", "rademacher", "custom:0:7/10,1:3/10"])
def test_parse_round_trip(text):
    d = EntryDistribution.parse(text)
    assert EntryDistribution.parse(d.spec()) == d


@pytest.mark.parametrize("text", ["gaussian", "custom:1", "custom:0:1/2,1:1/3"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        EntryDistribution.parse(text)


def test_one_by_one_is_an_atom():
    for seed in range(20):
        assert sample_symmetric(1, BERNOULLI01, seed).to_list() in ([[0]], [[1]])


@given(st.integers(0, 9), DISTS, SEEDS)
def test_sample_is_symmetric_and_atomic(n, dist, seed):
    A = sample_symmetric(n, dist, seed)
    M = A.to_numpy()
    assert (M == M.T).all()
    assert set(M.ravel().tolist()) <= {v for v, _ in dist.atoms}
    assert sample_symmetric(n, dist, seed) == A


def test_separate_diagonal_law():
    diag = EntryDistribution.parse("custom:5:1/2,7:1/2")
    A = sample_symmetric(6, RADEMACHER, 3, diagonal=diag).to_numpy()
    assert set(np.diag(A).tolist()) <= {5, 7}
    off = A[~np.eye(6, dtype=bool)]
    assert set(off.tolist()) <= {-1, 1}


def test_entry_mean_within_binomial_band():
    n, trials = 8, 10_000
    iu = np.triu_indices(n)
    total = sum(int(sample_symmetric(n, BERNOULLI01, derive_seed(99, t)).to_numpy()[iu].sum())
                for t in range(trials))
    count = trials * len(iu[0])
    se = math.sqrt(0.25 / count)
    assert abs(total / count - 0.5) < 3 * se


def test_custom_sampling_frequencies():
    d = EntryDistribution.parse("custom:0:7/10,1:1/5,4:1/10")
    x = d.sample(rng_from_seed(5), 200_000)
    for v, p in d.atoms:
        f = float((x == v).mean())
        assert abs(f - float(p)) < 4 * math.sqrt(float(p) * (1 - float(p)) / len(x))


def test_derive_seed_separates_keys():
    seen = {derive_seed(1, d, i) for d in range(3) for i in range(100)}
    assert len(seen) == 300
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(2, 2, 3)
    with pytest.raises(ValueError):
        derive_seed(-1)
    with pytest.raises(ValueError):
        rng_from_seed(2**64)


def test_augment_examples():
    assert augment(SymMatrix.zeros(0), AugmentationVector((), 1)).to_list() == [[1]]
    assert augment(SymMatrix.from_rows([[0]]), AugmentationVector((1,), 0)).to_list() == [[0, 1], [1, 0]]
    with pytest.raises(DimensionError):
        augment(SymMatrix.identity(2), AugmentationVector((1,), 0))


@given(st.integers(0, 7), DISTS, SEEDS)
def test_augment_keeps_leading_block(n, dist, seed):
    A = sample_symmetric(n, dist, seed)
    v = sample_augmentation(n, dist, rng_from_seed(seed))
    B = augment(A, v)
    assert B.n == n + 1
    assert B.leading_block(n) == A
    assert [B[i, n] for i in range(n + 1)] == list(v.as_vector())


def test_symmatrix_validation():
    with pytest.raises(ValueError):
        SymMatrix.from_rows([[0, 1], [0, 0]])
    with pytest.raises(DimensionError):
        SymMatrix.from_rows([[0, 1]])
    assert SymMatrix.identity(3)[1, 1] == 1
