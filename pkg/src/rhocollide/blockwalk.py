"""Exact block walk of the Rho exponent chain.

The block walk observes the exponent walk only at doubling steps.  One block
step is X -> 2(X + b), where the increment b sums the +1 / +x moves made
before the next doubling.  Everything here is exact dense linear algebra
over Z_N for N up to a few thousand.
"""

from dataclasses import dataclass
from math import ceil, floor, log, log2, sqrt

import numpy as np

from .chain import SLACK, mixing_time
from .group import mod_inv

XI = 1 - (4 - sqrt(10)) / 9
BLOCK_DECAY_RATE = 2 / 3


class NoConvergence(RuntimeError):
    pass


class NotConverged(RuntimeError):
    pass


class BoundViolated(AssertionError):
    def __init__(self, s, u, v, value, bound):
        super().__init__(f"B^{s}({u},{v}) = {value!r} exceeds bound {bound!r}")
        self.witness = (s, u, v)


def increment_distribution(N, x, tol=1e-14, max_terms=10_000, with_residual=False):
    """Law of one block increment b modulo N.

    Sums the geometric mixture sum_k (1/3)(2/3)^k law(k draws from {1, x})
    until the remaining mass falls below ``tol``, then renormalizes.
    """
    if N % 2 == 0:
        raise ValueError("N must be odd")
    if not 0 < tol <= 1e-9:
        raise ValueError("tol must be in (0, 1e-9]")
    x %= N
    term = np.zeros(N)
    term[0] = 1 / 3
    mu = np.zeros(N)
    residual = 1.0
    for _ in range(max_terms):
        mu += term
        residual = 1.0 - mu.sum()
        if residual < tol:
            break
        term = (np.roll(term, 1) + np.roll(term, x)) / 3
    else:
        raise NoConvergence(f"residual {residual} after {max_terms} terms")
    mu /= mu.sum()
    if with_residual:
        return mu, max(residual, 0.0)
    return mu


@dataclass(frozen=True)
class BlockKernel:
    kernel: np.ndarray
    N: int
    x: int
    mu: np.ndarray
    truncation_residual: float


def block_kernel(N, x, tol=1e-14):
    """B(u, v) = mu((v / 2 - u) mod N)."""
    mu, res = increment_distribution(N, x, tol, with_residual=True)
    half = mod_inv(2, N)
    u = np.arange(N)
    idx = (half * u[None, :] - u[:, None]) % N
    return BlockKernel(mu[idx], N, x % N, mu, res)


def block_max_entry_bound(N, s):
    """(2/3)^s up to floor(log2 N) steps, (3/2) / N^(log2 3 - 1) beyond."""
    if s <= floor(log2(N)):
        return BLOCK_DECAY_RATE**s
    return 1.5 / N ** (log2(3) - 1)


@dataclass(frozen=True)
class DecayRow:
    s: int
    max_entry: float
    bound: float
    witness: tuple

    @property
    def ok(self):
        return self.max_entry <= self.bound + SLACK


def verify_block_decay(N, x, s_max, strict=True, bk=None, method="dense"):
    """max_{u,v} B^s(u,v) against the decay bound for s = 0..s_max.

    ``method="dense"`` powers B directly.  ``method="zs"`` uses the fact that
    row u of B^s is the law of 2^s u + 2 Z_s, a bijective image of nu_s, so
    the largest entry of B^s is max nu_s; O(N^2) per step instead of O(N^3).
    """
    if s_max > 64:
        raise ValueError("s_max must be <= 64")
    if method not in ("dense", "zs"):
        raise ValueError(f"unknown method {method!r}")
    bk = bk or block_kernel(N, x)
    if method == "zs":
        prof = zs_profile(bk.mu, s_max) if s_max else np.empty((0, N))
    B = bk.kernel
    Q = np.eye(N)
    rows = []
    for s in range(s_max + 1):
        if s == 0:
            u, v, val = 0, 0, 1.0
        elif method == "zs":
            j = int(np.argmax(prof[s - 1]))
            # witness in row 0: v = 2 j
            u, v, val = 0, 2 * j % N, float(prof[s - 1, j])
        else:
            Q = Q @ B
            k = int(np.argmax(Q))
            u, v = divmod(k, N)
            val = float(Q[u, v])
        row = DecayRow(s, val, block_max_entry_bound(N, s), (u, v))
        if strict and not row.ok:
            raise BoundViolated(s, u, v, row.max_entry, row.bound)
        rows.append(row)
    return rows


def zs_transfer(mu):
    """Matrix M[u, v] = mu((v - 2u) mod N), so nu_s = nu_{s-1} @ M."""
    N = len(mu)
    u = np.arange(N)
    return mu[(u[None, :] - 2 * u[:, None]) % N]


def zs_distribution(N, x, s, mu=None):
    """Law of Z_s = 2^(s-1) b_1 + ... + b_s."""
    if s < 1:
        raise ValueError("s must be >= 1")
    mu = increment_distribution(N, x) if mu is None else mu
    M = zs_transfer(mu)
    nu = mu.copy()
    for _ in range(s - 1):
        nu = nu @ M
    return nu


def zs_profile(mu, s_max):
    """nu_1..nu_{s_max} as rows of an array (row s-1 holds nu_s)."""
    M = zs_transfer(mu)
    out = np.empty((s_max, len(mu)))
    out[0] = mu
    for s in range(1, s_max):
        out[s] = out[s - 1] @ M
    return out


def chi_square_vs_uniform(nu):
    nu = np.asarray(nu, dtype=float)
    N = len(nu)
    return float(N * np.sum((nu - 1 / N) ** 2))


def total_variation_vs_uniform(nu):
    nu = np.asarray(nu, dtype=float)
    return float(0.5 * np.abs(nu - 1 / len(nu)).sum())


def lemma8_bound(s, N):
    """2((1 + xi^(2 floor(s/m)))^(m-1) - 1) with 2^(m-1) < N < 2^m."""
    if N & (N - 1) == 0:
        raise ValueError("N must not be a power of two")
    m = ceil(log2(N))
    return 2 * ((1 + XI ** (2 * (s // m))) ** (m - 1) - 1)


def mixing_step_threshold(N, eps):
    """ceil(m ln(2(m-1)/eps)), m = ceil(log2 N), natural log."""
    m = ceil(log2(N))
    return ceil(m * log(2 * (m - 1) / eps))


@dataclass(frozen=True)
class MixingResult:
    s_star: int
    stated_threshold: int
    N: int
    eps: float


def empirical_mixing_steps(N, x, eps, cap=None, bk=None):
    """Least s with every entry of B^(2s) in [(1-eps)/N, (1+eps)/N]."""
    B = (bk or block_kernel(N, x)).kernel
    s_star = mixing_time(B @ B, eps, cap=cap)
    return MixingResult(s_star, mixing_step_threshold(N, eps), N, eps)


def block_sampler(mu, x0=0):
    """Monte Carlo sampler of the block walk X -> 2(X + b), b ~ mu."""
    N = len(mu)
    cdf = np.cumsum(mu)
    cdf[-1] = 1.0

    def sampler(rng):
        X = x0
        yield X
        while True:
            bs = np.minimum(np.searchsorted(cdf, rng.random(4096), side="right"), N - 1)
            for b in bs.tolist():
                X = 2 * (X + b) % N
                yield X

    return sampler


def simulate_block_lengths(n_blocks, seed):
    """Rho steps per block under i.i.d. uniform step types (type 3 closes a block)."""
    rng = np.random.default_rng(seed)
    lengths = []
    have = 0
    carry = 0
    while have < n_blocks:
        types = rng.integers(1, 4, size=max(3 * (n_blocks - have), 1024))
        ends = np.flatnonzero(types == 3)
        if ends.size == 0:
            carry += types.size
            continue
        seg = np.diff(np.concatenate(([-1], ends)))
        seg[0] += carry
        carry = types.size - 1 - ends[-1]
        lengths.append(seg)
        have += seg.size
    return np.concatenate(lengths)[:n_blocks]
