"""Seeded random-oracle partition S1/S2/S3 and the distinguished-point predicate.

Both are keyed hashes of the element encoding (see :mod:`rhocollide.hashing`)
under distinct domain tags, so step types and distinguishedness are
independent of each other.  Step type is ``hash % 3 + 1``; an element is
distinguished iff ``hash < floor(theta * 2**64)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .hashing import (
    GAMMA,
    MASK64,
    TAG_DISTINGUISHED,
    TAG_PARTITION,
    keyed_hash_array,
    mix64,
    subkey,
)


@dataclass(frozen=True)
class PartitionOracle:
    seed: int
    _k: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_k", subkey(TAG_PARTITION, self.seed & MASK64))

    def __call__(self, e):
        return mix64(((e ^ self._k) * GAMMA) & MASK64) % 3 + 1

    def types(self, elements):
        """Vectorised step types for an array of element encodings."""
        return (keyed_hash_array(TAG_PARTITION, self.seed & MASK64, elements) % np.uint64(3)).astype(np.int64) + 1


@dataclass(frozen=True)
class DistinguishedPredicate:
    seed: int
    theta: float
    _k: int = field(init=False, repr=False, compare=False)
    threshold: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        object.__setattr__(self, "_k", subkey(TAG_DISTINGUISHED, self.seed & MASK64))
        object.__setattr__(self, "threshold", int(self.theta * 2.0**64))

    def __call__(self, e):
        return mix64(((e ^ self._k) * GAMMA) & MASK64) < self.threshold

    def mask(self, elements):
        h = keyed_hash_array(TAG_DISTINGUISHED, self.seed & MASK64, elements)
        if self.threshold >= 1 << 64:
            return np.ones(h.shape, dtype=bool)
        return h < np.uint64(self.threshold)


def partition(oracle, e):
    return oracle(e)


def is_distinguished(pred, e):
    return pred(e)
