"""Pollard Rho walk with exponent tracking, collision detection and log recovery."""

from dataclasses import dataclass, replace
from math import isqrt
from typing import Optional

import numpy as np

from .chain import Exhausted
from .group import NotInvertible, mod_inv
from .hashing import derive_seed
from .oracle import PartitionOracle


class Degenerate(ArithmeticError):
    pass


class VerificationFailed(AssertionError):
    pass


@dataclass(frozen=True, slots=True)
class WalkState:
    element: int
    a: int
    b: int
    step_index: int = 0


@dataclass(frozen=True)
class CollisionReport:
    steps_total: int
    pair: tuple  # ((a, b), (alpha, beta)): first visit, revisit
    colliding_element: int
    degenerate: bool
    first_index: int = 0
    recovered_x: Optional[int] = None


def start_state(inst, a):
    return WalkState(inst.pow(inst.g, a % inst.N), a % inst.N, 0, 0)


def random_start(inst, rng):
    return start_state(inst, int(rng.integers(0, inst.N)))


def rho_step(inst, oracle, s):
    """One application of the iterating function F.

    Type 1 multiplies by g, type 2 by h, type 3 squares.
    """
    N = inst.N
    t = oracle(s.element)
    if t == 1:
        return WalkState(inst.op(s.element, inst.g), (s.a + 1) % N, s.b, s.step_index + 1)
    if t == 2:
        return WalkState(inst.op(s.element, inst.h), s.a, (s.b + 1) % N, s.step_index + 1)
    return WalkState(inst.square(s.element), 2 * s.a % N, 2 * s.b % N, s.step_index + 1)


def _stepper(inst, oracle):
    """Fast closure ``(y, a, b) -> (y, a, b)`` equivalent to :func:`rho_step`."""
    N, g, h = inst.N, inst.g, inst.h
    if inst.realization == "subgroup":
        q = inst.modulus

        def step(y, a, b):
            t = oracle(y)
            if t == 1:
                return y * g % q, (a + 1) % N, b
            if t == 2:
                return y * h % q, a, (b + 1) % N
            return y * y % q, 2 * a % N, 2 * b % N

        return step

    op, sq = inst.op, inst.square

    def step(y, a, b):
        t = oracle(y)
        if t == 1:
            return op(y, g), (a + 1) % N, b
        if t == 2:
            return op(y, h), a, (b + 1) % N
        return sq(y), 2 * a % N, 2 * b % N

    return step


def default_max_steps(N):
    return 64 * (isqrt(N) + 1)


def run_until_collision(inst, oracle, start, max_steps=None, detector=None):
    """Walk from ``start`` until an element repeats.

    ``detector=None`` keeps every visited element and reports the exact first
    revisit.  A :class:`~rhocollide.oracle.DistinguishedPredicate` keeps only
    distinguished elements and reports the first repeated one, so it can only
    report later than the full-memory detector.
    """
    if max_steps is None:
        max_steps = default_max_steps(inst.N)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    N = inst.N
    step = _stepper(inst, oracle)
    y, a, b, i0 = start.element, start.a, start.b, start.step_index
    keep = (lambda e: True) if detector is None else detector
    seen = {}
    if keep(y):
        seen[y] = (a, b, i0)
    for i in range(1, max_steps + 1):
        y, a, b = step(y, a, b)
        if keep(y):
            prev = seen.get(y)
            if prev is not None:
                pa, pb, pi = prev
                return CollisionReport(
                    steps_total=i,
                    pair=((pa, pb), (a, b)),
                    colliding_element=y,
                    degenerate=(b - pb) % N == 0,
                    first_index=pi - i0,
                )
            seen[y] = (a, b, i0 + i)
    raise Exhausted(max_steps)


def recover_dlog(inst, report):
    """x = (a - alpha) / (beta - b) mod N, verified against g^x = h."""
    (a, b), (alpha, beta) = report.pair
    N = inst.N
    try:
        inv = mod_inv(beta - b, N)
    except NotInvertible:
        raise Degenerate(f"degenerate collision: beta == b (mod {N})") from None
    x = (a - alpha) * inv % N
    if inst.pow(inst.g, x) != inst.h:
        raise VerificationFailed(f"g^{x} != h for report {report}")
    return x


def solve(inst, seed, detector=None, max_steps=None, max_attempts=16):
    """Run Rho with restarts until a nondegenerate collision yields x.

    Each attempt uses a fresh oracle seed and a fresh uniform start, both
    derived from ``seed``.  Returns ``(report, attempts)`` with
    ``report.recovered_x`` set and ``report.steps_total`` summed over attempts.
    """
    total = 0
    last_error = None
    for attempt in range(max_attempts):
        oracle = PartitionOracle(derive_seed(seed, 0, attempt))
        rng = np.random.default_rng(derive_seed(seed, 1, attempt))
        try:
            report = run_until_collision(inst, oracle, random_start(inst, rng), max_steps, detector)
        except Exhausted as exc:
            total += exc.max_steps
            last_error = exc
            continue
        total += report.steps_total
        try:
            x = recover_dlog(inst, report)
        except Degenerate as exc:
            last_error = exc
            continue
        return replace(report, steps_total=total, recovered_x=x), attempt + 1
    raise last_error


def exponent_kernel(N, x):
    """Transition matrix of the exponent walk u -> u+1, u+x, 2u (each 1/3) on Z_N."""
    u = np.arange(N)
    P = np.zeros((N, N))
    for v in ((u + 1) % N, (u + x) % N, (2 * u) % N):
        np.add.at(P, (u, v), 1.0 / 3.0)
    return P
