import numpy as np
import pytest

from rhocollide.group import make_instance
from rhocollide.oracle import DistinguishedPredicate, PartitionOracle, is_distinguished, partition

CHI2_2DF_Q999 = 13.815510557964274  # -2 ln(0.001)


def _labels(N, seed=0):
    inst = make_instance(N, seed, "labeled")
    return np.array([inst.label(e) for e in range(N)], dtype=np.uint64)


def test_partition_deterministic():
    o = PartitionOracle(42)
    assert all(partition(o, e) == partition(PartitionOracle(42), e) for e in range(1000))
    assert set(o(e) for e in range(1000)) == {1, 2, 3}


def test_vectorized_types_match_scalar():
    o = PartitionOracle(9)
    labels = _labels(1009)
    assert o.types(labels).tolist() == [o(int(v)) for v in labels]


def test_type_counts_near_third():
    N = 10007
    counts = np.bincount(PartitionOracle(5).types(_labels(N)), minlength=4)[1:]
    assert np.all(np.abs(counts - N / 3) <= 4 * np.sqrt(N))


def test_chi_square_over_seeds():
    N = 10007
    labels = _labels(N)
    ok = 0
    for seed in range(100):
        counts = np.bincount(PartitionOracle(seed).types(labels), minlength=4)[1:]
        chi2 = float(((counts - N / 3) ** 2 / (N / 3)).sum())
        ok += chi2 < CHI2_2DF_Q999
    assert ok >= 95


def test_theta_one_marks_everything():
    pred = DistinguishedPredicate(1, 1.0)
    assert all(is_distinguished(pred, e) for e in range(2000))


def test_distinguished_density():
    N = 10**5
    theta = 2.0**-5
    hits = int(DistinguishedPredicate(7, theta).mask(np.arange(N, dtype=np.uint64)).sum())
    assert abs(hits - N * theta) <= 3 * np.sqrt(N * theta)


def test_distinguished_deterministic_and_vectorized():
    pred = DistinguishedPredicate(3, 0.1)
    vals = np.arange(5000, dtype=np.uint64)
    assert pred.mask(vals).tolist() == [pred(int(v)) for v in vals]
    assert [pred(v) for v in range(100)] == [DistinguishedPredicate(3, 0.1)(v) for v in range(100)]


@pytest.mark.parametrize("theta", [0.0, -0.5, 1.5])
def test_bad_theta(theta):
    with pytest.raises(ValueError):
        DistinguishedPredicate(0, theta)


def test_partition_and_distinguished_uncorrelated():
    N = 10**5
    vals = np.arange(N, dtype=np.uint64)
    types = PartitionOracle(11).types(vals).astype(float)
    dist = DistinguishedPredicate(11, 0.25).mask(vals).astype(float)
    for k in (1, 2, 3):
        r = np.corrcoef(types == k, dist)[0, 1]
        assert abs(r) < 0.01
