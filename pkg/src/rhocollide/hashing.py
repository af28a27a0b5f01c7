"""Keyed 64-bit mixing used for oracles, labels and seed derivation.

The mixer is the SplitMix64 finalizer::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all arithmetic mod 2**64.  It is a bijection on 64-bit words and
``unmix64`` is its exact inverse.

A keyed hash of ``value`` under ``(tag, key)`` is::

    keyed_hash(tag, key, value) = mix64(((value ^ mix64(key ^ tag)) * GAMMA) mod 2**64)

with ``GAMMA = 0x9E3779B97F4A7C15``.  Values must fit in 64 bits.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_M1_INV = pow(_M1, -1, 1 << 64)
_M2_INV = pow(_M2, -1, 1 << 64)

# domain-separation tags
TAG_PARTITION = 0x50415254_49544E31  # "PARTITN1"
TAG_DISTINGUISHED = 0x44495354_494E4731  # "DISTING1"
TAG_LABEL = 0x4C41424C_45445331  # "LABLEDS1"
TAG_SEED = 0x53454544_44455231  # "SEEDDER1"


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _unxorshift(z, k):
    y = z
    for _ in range(64 // k + 1):
        y = z ^ (y >> k)
    return y


def unmix64(z):
    """Inverse of :func:`mix64`."""
    z = _unxorshift(z & MASK64, 31)
    z = _unxorshift((z * _M2_INV) & MASK64, 27)
    return _unxorshift((z * _M1_INV) & MASK64, 30)


def subkey(tag, key):
    return mix64((key ^ tag) & MASK64)


def keyed_hash(tag, key, value):
    return mix64(((value ^ subkey(tag, key)) * GAMMA) & MASK64)


def mix64_array(z):
    """Vectorised :func:`mix64` over an integer array (returns uint64)."""
    z = np.asarray(z).astype(np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def keyed_hash_array(tag, key, values):
    values = np.asarray(values).astype(np.uint64)
    with np.errstate(over="ignore"):
        v = (values ^ np.uint64(subkey(tag, key))) * np.uint64(GAMMA)
    return mix64_array(v)


def derive_seed(master, *counters):
    """Counter-mode child seed: chain ``mix64`` over the counters.

    ``derive_seed(s, i)`` for trial ``i`` does not depend on how many
    trials are requested, so growing a run never reshuffles earlier trials.
    """
    z = mix64((master ^ TAG_SEED) & MASK64)
    for c in counters:
        z = mix64((z + GAMMA * (int(c) + 1)) & MASK64)
    return z
