"""Character sums for the block walk and the Mersenne lower-bound diagnostic.

For p = 2^t - 1 and x = p - 1 the non-doubling moves are +1 and -1, so one
block increment (taken over the integers) has the two-sided geometric law
a_k = r^|k| / sqrt(5) with r = (3 - sqrt 5) / 2, whose characteristic
function G(y) has a closed form.  Products of G at dyadic multiples give the
Fourier coefficients Pi_j of the t-block distribution, and from them the mean
and variance of the separating statistic f(k) = sum_j exp(2 pi i k 2^j / p).
"""

from dataclasses import dataclass
from math import exp, log, sqrt

import numpy as np

R = (3 - sqrt(5)) / 2
SUPPORTED_T = (13, 17, 19, 31)
CHEBYSHEV_K = 4.0


class NotMersennePrime(ValueError):
    pass


def geometric_g(y):
    """G(y) = sum_k a_k e^{2 pi i k y}; real, even and 1-periodic.

    Written as (1-r)^2 / ((1-r)^2 + 4r sin^2(pi y)), which equals
    (1-r^2) / (sqrt 5 (1 + r^2 - 2r cos 2 pi y)) because (1+r)/(1-r) = sqrt 5,
    and is exactly 1 at integer y.
    """
    y = np.asarray(y, dtype=float)
    q = (1 - R) ** 2
    val = q / (q + 4 * R * np.sin(np.pi * y) ** 2)
    return float(val) if val.ndim == 0 else val


def geometric_law(k):
    """a_k = Pr[b = k] for the integer-valued +-1 block increment."""
    return R ** np.abs(np.asarray(k)) / sqrt(5)


def folded_geometric_law(N, kmax=None):
    """a_k folded onto Z_N: mu(j) = sum_{k = j mod N} a_k."""
    if kmax is None:
        # r^k < 1e-17 once k > 17 / log10(1/r)
        kmax = int(17 / np.log10(1 / R)) + 2
    ks = np.arange(-kmax, kmax + 1)
    mu = np.zeros(N)
    np.add.at(mu, ks % N, geometric_law(ks))
    return mu


def _check_t(t):
    if t not in SUPPORTED_T:
        raise NotMersennePrime(f"t={t} is not one of the supported Mersenne exponents {SUPPORTED_T}")


def pi_j(t, j):
    """Pi_j = prod_{alpha < t} G(2^alpha (2^j - 1) / p), fractions reduced mod 1."""
    _check_t(t)
    if not 0 <= j < t:
        raise ValueError(f"j must be in [0, {t})")
    p = (1 << t) - 1
    num = np.array([(pow(2, a, p) * ((1 << j) - 1)) % p for a in range(t)], dtype=float)
    return float(np.prod(geometric_g(num / p)))


def pi_vector(t):
    return np.array([pi_j(t, j) for j in range(t)])


def pi1_window(t):
    """(lower, upper) limits for Pi_1 taken from the explicit estimates."""
    _check_t(t)
    p = (1 << t) - 1
    lo = 5.0**-5 * exp(-5 / (2**5 * (1 - 5 / 2**6 - 5 / 2**t)))
    hi = geometric_g((1 << (t - 1)) / p)
    return lo, hi


@dataclass(frozen=True)
class SeparationReport:
    t: int
    r: int
    E_Pn_f: complex
    var_Pn_f: float
    var_U_f: float
    pi: np.ndarray
    separated: bool

    @property
    def n(self):
        return self.r * self.t


def separation_diagnostic(t, r, pi=None):
    """Mean/variance of f after n = r t block steps from 0, versus uniform.

    ``separated`` is True when the Chebyshev windows of half-width
    4 sqrt(Var) around the two means are disjoint.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    pi = pi_vector(t) if pi is None else pi
    E = complex(t * pi[1] ** r)
    var = float(t * np.sum(pi**r) - t * t * abs(pi[1]) ** (2 * r))
    var_U = float(t)
    sep = abs(E) > CHEBYSHEV_K * sqrt(var_U) + CHEBYSHEV_K * sqrt(max(var, 0.0))
    return SeparationReport(t, r, E, var, var_U, pi, sep)


def separation_scan(t, r_max):
    pi = pi_vector(t)
    return [separation_diagnostic(t, r, pi) for r in range(1, r_max + 1)]


def predicted_r(t):
    """ln t / (2 ln(1/|Pi_1|)), the horizon before the lambda correction."""
    return log(t) / (2 * log(1 / abs(pi_j(t, 1))))


def direct_f_moments(t):
    """(E_U f, Var_U f) by summing f over all p = 2^t - 1 states."""
    if t > 13:
        raise ValueError("direct summation is limited to t <= 13")
    p = (1 << t) - 1
    k = np.arange(p, dtype=np.int64)
    f = np.zeros(p, dtype=complex)
    for j in range(t):
        f += np.exp(2j * np.pi * ((k << j) % p) / p)
    mean = f.mean()
    var = float(np.mean(np.abs(f) ** 2) - abs(mean) ** 2)
    return complex(mean), var


def separating_f(t, k):
    p = (1 << t) - 1
    return complex(sum(np.exp(2j * np.pi * ((k << j) % p) / p) for j in range(t)))


def mu_hat(mu, scale, ell, N):
    """sum_j exp(2 pi i ell (scale j mod N) / N) mu(j)."""
    mu = np.asarray(mu, dtype=float)
    j = np.arange(len(mu), dtype=np.int64)
    phase = (ell * ((scale * j) % N)) % N
    return complex(np.sum(np.exp(2j * np.pi * phase / N) * mu))


def distribution_hat(nu, ell):
    return mu_hat(nu, 1, ell, len(nu))
