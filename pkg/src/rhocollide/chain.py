"""Dense Markov-chain analysis for doubly stochastic kernels on Z_N.

Kernels are plain ``(n, n)`` float64 arrays.  Functions here compute matrix
powers, Green's-function pre-mixing constants, relative-pointwise mixing
times, the collision-time bound formulas and Monte Carlo collision times.
"""

from dataclasses import dataclass
from math import ceil, comb, floor, sqrt

import numpy as np

ROW_TOL = 1e-12
COL_TOL = 1e-10
SLACK = 1e-9


class KernelError(ValueError):
    pass


class DegenerateHorizon(ValueError):
    pass


class NotErgodic(RuntimeError):
    pass


class Exhausted(RuntimeError):
    def __init__(self, max_steps):
        super().__init__(f"no collision within {max_steps} steps")
        self.max_steps = max_steps


def check_kernel(P, doubly=True):
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise KernelError(f"kernel must be square, got shape {P.shape}")
    if (P < 0).any():
        raise KernelError("kernel has negative entries")
    if np.abs(P.sum(axis=1) - 1).max() > ROW_TOL:
        raise KernelError("rows do not sum to 1")
    if doubly and np.abs(P.sum(axis=0) - 1).max() > COL_TOL:
        raise KernelError("columns do not sum to 1 (not doubly stochastic)")
    return P


def is_doubly_stochastic(P, tol=COL_TOL):
    try:
        check_kernel(P, doubly=True)
    except KernelError:
        return False
    return True


def is_circulant(P):
    n = P.shape[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return np.array_equal(P, P[0][idx])


def identity_kernel(n):
    return np.eye(n)


def complete_kernel(n):
    return np.full((n, n), 1.0 / n)


def cycle_kernel(n):
    """Deterministic rotation u -> u+1."""
    return np.roll(np.eye(n), 1, axis=1)


def power_rows(P, u, s):
    """Rows of P^0..P^s started from state ``u``: array of shape (s+1, n)."""
    n = P.shape[0]
    out = np.empty((s + 1, n))
    row = np.zeros(n)
    row[u] = 1.0
    out[0] = row
    for j in range(1, s + 1):
        row = row @ P
        out[j] = row
    return out


def maxprob_profile(P, T):
    """max_{u,v} P^j(u,v) for j = 0..T."""
    if is_circulant(P):
        return power_rows(P, 0, T).max(axis=1)
    n = P.shape[0]
    out = np.empty(T + 1)
    out[0] = 1.0
    Q = np.eye(n)
    for j in range(1, T + 1):
        Q = Q @ P
        out[j] = Q.max()
    return out


def a_profile(P, T):
    """Pre-mixing constants (A_t, A*_t) for every t = 0..T.

    G_t = sum_{i<=t} P^i; A_t is the largest row sum of G_t**2 and A*_t the
    largest column sum (the reversed chain has kernel P transpose).
    """
    n = P.shape[0]
    A = np.empty(T + 1)
    A_star = np.empty(T + 1)
    if is_circulant(P):
        rows = power_rows(P, 0, T)
        G = np.cumsum(rows, axis=0)
        A[:] = (G**2).sum(axis=1)
        A_star[:] = A
        return A, A_star
    Q = np.eye(n)
    G = np.eye(n)
    A[0] = A_star[0] = 1.0
    for t in range(1, T + 1):
        Q = Q @ P
        G += Q
        G2 = G * G
        A[t] = G2.sum(axis=1).max()
        A_star[t] = G2.sum(axis=0).max()
    return A, A_star


def green_and_A(P, T):
    A, A_star = a_profile(P, T)
    return float(A[T]), float(A_star[T])


def premix_params(P, T):
    """(m, M) with m/N <= P^T(u,v) <= M/N, taken tight."""
    n = P.shape[0]
    Q = np.linalg.matrix_power(P, T)
    m, M = n * Q.min(), n * Q.max()
    if m <= 0:
        raise DegenerateHorizon(f"P^{T} has zero entries; increase T")
    return float(m), float(M)


@dataclass(frozen=True)
class PremixSummary:
    T: int
    m: float
    M: float
    A_T: float
    A_T_star: float
    maxprob: np.ndarray  # j = 0..2T

    @property
    def A_max(self):
        return max(self.A_T, self.A_T_star)


def premix_summary(P, T):
    m, M = premix_params(P, T)
    A, A_star = green_and_A(P, T)
    return PremixSummary(T, m, M, A, A_star, maxprob_profile(P, 2 * T))


def _within(Q, eps):
    n = Q.shape[0]
    return Q.min() >= (1 - eps) / n and Q.max() <= (1 + eps) / n


def _above(Q, eps):
    return Q.min() >= (1 - eps) / Q.shape[0]


def mixing_time(P, eps, cap=None):
    """Smallest T with every entry of P^T in [(1-eps)/N, (1+eps)/N].

    Doubling then bisection.  Valid because for a doubly stochastic kernel
    the largest entry of P^T never increases and the smallest never decreases.
    """
    return _first_power(P, eps, cap, _within)


def separation_time(P, eps, cap=None):
    """One-sided T_s(eps): smallest T with every P^T(u,v) >= (1-eps)/N."""
    return _first_power(P, eps, cap, _above)


def _first_power(P, eps, cap, ok):
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    n = P.shape[0]
    cap = 64 * n if cap is None else cap
    if ok(np.eye(n), eps):
        return 0
    lo, Qlo = 0, np.eye(n)
    hi, Q = 1, P
    while not ok(Q, eps):
        if hi >= cap:
            raise NotErgodic(f"not within eps={eps} after {hi} steps (cap {cap})")
        lo, Qlo = hi, Q
        Q = Q @ Q
        hi *= 2
    # lo fails, hi passes
    while hi - lo > 1:
        mid = (lo + hi) // 2
        Qmid = Qlo @ np.linalg.matrix_power(P, mid - lo)
        if ok(Qmid, eps):
            hi = mid
        else:
            lo, Qlo = mid, Qmid
    if hi > cap:
        raise NotErgodic(f"mixing time {hi} exceeds cap {cap}")
    return hi


def lemma3_bound(maxprob):
    """2 * sum_j (j+1) * maxprob[j], an upper bound on A_T and A*_T."""
    maxprob = np.asarray(maxprob, dtype=float)
    j = np.arange(len(maxprob))
    return float(2 * np.sum((j + 1) * maxprob))


def green_bound_geometric(c, d, T):
    """Closed form of sum_{j=0}^T (j+1)(c + d^j)."""
    return c * (T + 1) * (T + 2) / 2 + (1 - d ** (T + 1) - (T + 1) * d ** (T + 1) * (1 - d)) / (1 - d) ** 2


def thm2_steps(N, T, m, M, A_max, c):
    """ceil(4c (M/m)^2 (sqrt(2N/M * A_max) + T)); collision w.p. >= 1 - e^-c."""
    if m <= 0:
        raise ValueError("m must be positive")
    return ceil(4 * c * (M / m) ** 2 * (sqrt(2 * N / M * A_max) + T))


def collision_bracket(maxprob, T):
    """1 + sum_{j=1}^{2T} 3j * maxprob[j] with ``maxprob`` indexed from j = 0."""
    maxprob = np.asarray(maxprob, dtype=float)
    if len(maxprob) < 2 * T + 1:
        raise ValueError(f"need maxprob for j = 0..{2 * T}")
    j = np.arange(1, 2 * T + 1)
    return float(1 + np.sum(3 * j * maxprob[1 : 2 * T + 1]))


def collision_bracket_geometric(c, d, T):
    """Closed form of sum_{j=1}^{2T} 3j(c + d^j)."""
    return 3 * c * T * (2 * T + 1) + 3 * d * (1 - d ** (2 * T) - 2 * T * d ** (2 * T) * (1 - d)) / (1 - d) ** 2


def thm4_steps(N, T, m, M, maxprob, c):
    """(ceil(2c (sqrt(bracket * N/M) + T)), (1 - m^2/(2M^2))^c)."""
    steps = ceil(2 * c * (sqrt(collision_bracket(maxprob, T) * N / M) + T))
    return steps, (1 - m * m / (2 * M * M)) ** c


def prop1_steps(N, T_s, c):
    return T_s + 2 * sqrt(2 * c * N * T_s)


def pair_count(N, beta):
    """C(floor(beta sqrt N) + 2, 2): number of index pairs in S."""
    return comb(floor(beta * sqrt(N)) + 2, 2)


def expected_self_intersections(P, u, beta, T):
    """Exact E[S] for the walk started at ``u``.

    S counts pairs (i, j) with 0 <= i <= L, i + 2T <= j <= L + 2T and
    X_i = X_j, where L = floor(beta sqrt N).
    """
    n = P.shape[0]
    L = floor(beta * sqrt(n))
    K = L + 2 * T
    dists = power_rows(P, u, L)
    diag = np.empty(K + 1)
    if is_circulant(P):
        diag[:] = power_rows(P, 0, K)[:, 0]
        diags = np.broadcast_to(diag[:, None], (K + 1, n))
    else:
        diags = np.empty((K + 1, n))
        Q = np.eye(n)
        diags[0] = 1.0
        for k in range(1, K + 1):
            Q = Q @ P
            diags[k] = np.diag(Q)
    # for fixed i, lags k = j - i run over 2T..K-i
    csum = np.cumsum(diags[::-1], axis=0)[::-1]  # csum[k] = sum_{k' >= k} diags[k']
    total = 0.0
    for i in range(L + 1):
        lag_hi = K - i
        w = csum[2 * T] - (csum[lag_hi + 1] if lag_hi + 1 <= K else 0.0)
        total += float(dists[i] @ w)
    return total


# Monte Carlo

def simulate_collision_time(sampler, seed, max_steps):
    """Index j of the first X_j already among X_0..X_{j-1}.

    ``sampler(rng)`` must return an iterator over states X_0, X_1, ...
    """
    rng = np.random.default_rng(seed)
    seen = set()
    for j, x in enumerate(sampler(rng)):
        if x in seen:
            return j
        if j >= max_steps:
            break
        seen.add(x)
    raise Exhausted(max_steps)


def _chunks(rng, size=4096):
    while True:
        yield from rng.random(size)


def kernel_sampler(P, x0=0):
    """Generic inverse-CDF sampler for a dense kernel."""
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = 1.0
    n = P.shape[0]

    def sampler(rng):
        x = x0
        yield x
        for r in _chunks(rng):
            x = min(int(np.searchsorted(cdf[x], r, side="right")), n - 1)
            yield x

    return sampler


def uniform_sampler(n):
    def sampler(rng):
        while True:
            yield from rng.integers(0, n, 4096).tolist()

    return sampler


def cycle_sampler(n, x0=0):
    def sampler(rng):
        x = x0
        while True:
            yield x
            x = (x + 1) % n

    return sampler


def example3_kernel(N):
    """u -> u+1 w.p. 1 - 1/sqrt N, otherwise a uniform jump."""
    if N < 4:
        raise ValueError("N must be >= 4")
    r = 1 / sqrt(N)
    P = np.full((N, N), r / N)
    idx = np.arange(N)
    P[idx, (idx + 1) % N] += 1 - r
    return P


def example3_sampler(N, x0=0):
    r = 1 / sqrt(N)

    def sampler(rng):
        x = x0
        yield x
        while True:
            jump = rng.random(4096) < r
            targets = rng.integers(0, N, 4096)
            for jmp, tgt in zip(jump.tolist(), targets.tolist()):
                x = tgt if jmp else (x + 1) % N
                yield x

    return sampler


def log_log_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs)."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
