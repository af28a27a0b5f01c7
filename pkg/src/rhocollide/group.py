"""Modular arithmetic and cyclic groups of odd prime order.

Two realizations share one element interface (plain Python ints):

* ``subgroup``: the order-N subgroup of units modulo the safe prime q = 2N+1.
* ``labeled``: exponents mapped to opaque 64-bit labels through a keyed
  bijection (``label(e) = mix64(e ^ key)``), exact and cheap for small N.
"""

from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np

from .hashing import TAG_LABEL, mix64, subkey, unmix64

# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

MIN_BITS, MAX_BITS = 8, 40


class NotInvertible(ArithmeticError):
    pass


class SearchExhausted(RuntimeError):
    pass


class InvalidElement(ValueError):
    pass


def is_prime(n):
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def mod_inv(a, n):
    """Inverse of ``a`` modulo ``n``; raises :class:`NotInvertible` if gcd(a, n) != 1."""
    a %= n
    if gcd(a, n) != 1:
        raise NotInvertible(f"{a} has no inverse modulo {n}")
    return pow(a, -1, n)


@dataclass(frozen=True)
class DlpInstance:
    """Discrete-log problem g^x = h in a cyclic group of odd prime order N."""

    N: int
    realization: str
    g: int
    h: int
    modulus: Optional[int] = None  # q, subgroup realization
    key: Optional[int] = None  # label key, labeled realization
    hidden_x: Optional[int] = None

    @property
    def identity(self):
        if self.realization == "subgroup":
            return 1
        return self.label(0)

    # labeled realization
    def label(self, e):
        return mix64((e % self.N) ^ self.key)

    def exponent_of(self, y):
        """Exponent of a labeled element (labeled realization only)."""
        e = unmix64(y) ^ self.key
        if e >= self.N:
            raise InvalidElement(f"{y:#x} is not a label of this group")
        return e

    def op(self, y, z):
        if self.realization == "subgroup":
            return y * z % self.modulus
        return self.label(self.exponent_of(y) + self.exponent_of(z))

    def square(self, y):
        if self.realization == "subgroup":
            return y * y % self.modulus
        return self.label(2 * self.exponent_of(y))

    def pow(self, y, e):
        if e < 0:
            raise ValueError("exponent must be nonnegative")
        if self.realization == "subgroup":
            return pow(y, e, self.modulus)
        return self.label(self.exponent_of(y) * e)

    def is_element(self, y):
        if self.realization == "subgroup":
            return 0 < y < self.modulus and pow(y, self.N, self.modulus) == 1
        try:
            self.exponent_of(y)
        except InvalidElement:
            return False
        return True


def group_op(y, z, inst):
    return inst.op(y, z)


def identity(inst):
    return inst.identity


def element_pow(base, e, inst):
    """``base`` composed with itself ``e`` times (square-and-multiply for subgroups)."""
    return inst.pow(base, e)


def make_instance(N, seed, realization="labeled", x=None, modulus=None):
    """Instance over a caller-chosen prime order N.

    ``subgroup`` needs q = 2N+1 prime unless ``modulus`` is given with N | q-1.
    """
    if N == 2 or not is_prime(N):
        raise ValueError(f"N={N} must be an odd prime")
    rng = np.random.default_rng(seed)
    if x is None:
        x = int(rng.integers(1, N))
    if realization == "subgroup":
        q = modulus if modulus is not None else 2 * N + 1
        if not is_prime(q) or (q - 1) % N:
            raise ValueError(f"q={q} is not a prime with N | q-1")
        # any element raised to (q-1)/N lands in the order-N subgroup
        cof = (q - 1) // N
        while True:
            g = pow(int(rng.integers(2, q - 1)), cof, q)
            if g != 1:
                break
        return DlpInstance(N, "subgroup", g, pow(g, x, q), modulus=q, hidden_x=x)
    if realization == "labeled":
        key = subkey(TAG_LABEL, int(rng.integers(0, 1 << 63)))
        proto = DlpInstance(N, "labeled", 0, 0, key=key)
        return DlpInstance(N, "labeled", proto.label(1), proto.label(x), key=key, hidden_x=x)
    raise ValueError(f"unknown realization {realization!r}")


def generate_instance(bits, seed, realization="subgroup", max_candidates=200_000):
    """Random solvable instance whose prime order N has exactly ``bits`` bits.

    Deterministic in ``seed``.  For the subgroup realization the candidate is
    incremented until both N and 2N+1 are prime, wrapping back to 2^(bits-1)
    when it reaches 2^bits.
    """
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ValueError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {bits}")
    rng = np.random.default_rng(seed)
    lo, hi = 1 << (bits - 1), 1 << bits
    n = int(rng.integers(lo, hi)) | 1
    for _ in range(min(max_candidates, (hi - lo) // 2)):
        if is_prime(n) and (realization != "subgroup" or is_prime(2 * n + 1)):
            break
        n += 2
        if n >= hi:
            n = lo + 1
    else:
        raise SearchExhausted(f"no suitable order found for bits={bits}, seed={seed}")
    return make_instance(n, int(rng.integers(0, 1 << 63)), realization=realization)
