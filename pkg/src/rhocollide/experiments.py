"""Experiment drivers behind the CLI.

Every driver returns a list of :class:`ResultRow` and is a deterministic
function of its arguments.  Per-trial seeds come from
``derive_seed(master, <experiment index>, N, trial, ...)``.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import ceil, exp, log2, sqrt
from typing import Optional

import numpy as np

from . import blockwalk, chain, fourier
from .chain import log_log_slope
from .group import generate_instance, make_instance
from .hashing import derive_seed
from .oracle import DistinguishedPredicate, PartitionOracle
from .parallel import parallel_solve
from .rho import random_start, run_until_collision, solve

FIELDS = ("experiment", "N", "x", "seed", "trial", "statistic", "value", "bound", "passed")
SCALING_CEILING = 52.5  # asymptotic constant on mean collision steps / sqrt(N)


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    N: Optional[int]
    x: Optional[int]
    seed: Optional[int]
    trial: Optional[int]
    statistic: str
    value: object
    bound: object = None
    passed: bool = True

    def __post_init__(self):
        for name in ("value", "bound"):
            v = getattr(self, name)
            if isinstance(v, np.generic):
                object.__setattr__(self, name, v.item())
        object.__setattr__(self, "passed", bool(self.passed))


def pmap(fn, items, workers=1):
    """Ordered map; results never depend on ``workers``."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def resolve_x(spec, N, seed):
    if spec is None or spec == "random":
        return int(np.random.default_rng(derive_seed(seed, 99, N)).integers(2, N - 1))
    if spec in ("N-1", "n-1"):
        return N - 1
    return int(spec) % N


def _annotate(exc, **ctx):
    where = ", ".join(f"{k}={v}" for k, v in ctx.items())
    return ExperimentError(f"{type(exc).__name__} at ({where}): {exc}")


# solve

def run_solve(n_bits, seed, realization="subgroup", theta=None):
    inst = generate_instance(n_bits, seed, realization)
    detector = None if theta is None else DistinguishedPredicate(derive_seed(seed, 7), theta)
    try:
        report, attempts = solve(inst, seed, detector=detector)
    except Exception as exc:
        raise _annotate(exc, N=inst.N, seed=seed) from exc
    x = report.recovered_x
    ok = inst.pow(inst.g, x) == inst.h
    return [ResultRow("solve", inst.N, None, seed, 0, "recovered_x", x, None, ok)]


# rho scaling

def _scaling_trial(args):
    N, seed, trial = args
    inst = make_instance(N, derive_seed(seed, 1, N), "labeled")
    oracle = PartitionOracle(derive_seed(seed, 1, N, trial, 0))
    start = random_start(inst, np.random.default_rng(derive_seed(seed, 1, N, trial, 1)))
    try:
        return run_until_collision(inst, oracle, start).steps_total
    except Exception as exc:
        raise _annotate(exc, N=N, seed=seed, trial=trial) from exc


def run_scaling(Ns, trials, seed, workers=1, slope_tol=0.05):
    rows, means = [], []
    for N in Ns:
        steps = pmap(_scaling_trial, [(N, seed, t) for t in range(trials)], workers)
        rows += [ResultRow("scaling", N, None, seed, t, "collision_steps", s) for t, s in enumerate(steps)]
        mean = float(np.mean(steps))
        means.append(mean)
        ratio = mean / sqrt(N)
        rows.append(ResultRow("scaling", N, None, seed, None, "mean_steps_over_sqrtN", ratio, SCALING_CEILING,
                              ratio <= SCALING_CEILING))
    if len(Ns) >= 2:
        slope = log_log_slope(Ns, means)
        rows.append(ResultRow("scaling", None, None, seed, None, "loglog_slope", slope, 0.5,
                              abs(slope - 0.5) <= slope_tol))
    return rows


# jump chain

def _example3_trial(args):
    N, seed, trial = args
    return chain.simulate_collision_time(chain.example3_sampler(N), derive_seed(seed, 2, N, trial), 64 * N)


def run_example3(Ns, trials, seed, workers=1, slope_tol=0.05, factor=2.9):
    rows, medians = [], []
    for N in Ns:
        times = pmap(_example3_trial, [(N, seed, t) for t in range(trials)], workers)
        rows += [ResultRow("example3", N, None, seed, t, "collision_steps", s) for t, s in enumerate(times)]
        med = float(np.median(times))
        medians.append(med)
        ref = N**0.75 / sqrt(2)
        rows.append(ResultRow("example3", N, None, seed, None, "median_over_ref", med / ref, factor,
                              1 / factor <= med / ref <= factor))
    if len(Ns) >= 2:
        slope = log_log_slope(Ns, medians)
        rows.append(ResultRow("example3", None, None, seed, None, "loglog_slope", slope, 0.75,
                              abs(slope - 0.75) <= slope_tol))
    return rows


# block walk

def run_block_verify(N, x, s_max, seed=0):
    x = resolve_x(x, N, seed)
    rows = []
    for r in blockwalk.verify_block_decay(N, x, s_max, strict=False)[1:]:
        rows.append(ResultRow("block-verify", N, x, seed, None, f"max_Bs[s={r.s}]", r.max_entry, r.bound, r.ok))
    return rows


def run_mixing(N, x, eps, seed=0, factor=6):
    x = resolve_x(x, N, seed)
    bk = blockwalk.block_kernel(N, x)
    res = blockwalk.empirical_mixing_steps(N, x, eps, bk=bk)
    Q = np.linalg.matrix_power(bk.kernel, 2 * res.s_star)
    dev = float(np.abs(N * Q - 1).max())
    rows = [
        ResultRow("mixing", N, x, seed, None, "s_star", res.s_star, factor * res.stated_threshold,
                  res.s_star <= factor * res.stated_threshold),
        ResultRow("mixing", N, x, seed, None, "stated_threshold", res.stated_threshold),
        ResultRow("mixing", N, x, seed, None, "max_rel_dev_B2s", dev, eps, dev <= eps),
    ]
    if N & (N - 1):
        m = ceil(log2(N))
        profile = blockwalk.zs_profile(bk.mu, 10 * m)
        for s in (m, 2 * m, 4 * m, 10 * m):
            chi = blockwalk.chi_square_vs_uniform(profile[s - 1])
            bound = blockwalk.lemma8_bound(s, N)
            rows.append(ResultRow("mixing", N, x, seed, None, f"chi_square[s={s}]", chi, bound,
                                  chi <= bound + chain.SLACK))
    return rows


# Fourier lower bound

def run_fourier_lb(ts, r_max):
    rows = []
    for t in ts:
        p = (1 << t) - 1
        pi = fourier.pi_vector(t)
        lo, hi = fourier.pi1_window(t)
        rows.append(ResultRow("fourier-lb", p, p - 1, None, None, "pi_1", pi[1], hi, lo < pi[1] < hi))
        sym = float(max(abs(pi[t - j] - pi[j]) for j in range(1, t)))
        rows.append(ResultRow("fourier-lb", p, p - 1, None, None, "max_pi_symmetry_gap", sym, 1e-10, sym <= 1e-10))
        rows.append(ResultRow("fourier-lb", p, p - 1, None, None, "predicted_r", fourier.predicted_r(t)))
        any_sep = False
        for r in range(1, r_max + 1):
            rep = fourier.separation_diagnostic(t, r, pi)
            thr = fourier.CHEBYSHEV_K * (sqrt(rep.var_U_f) + sqrt(max(rep.var_Pn_f, 0.0)))
            rows.append(ResultRow("fourier-lb", p, p - 1, None, r, "abs_E_Pn_f", abs(rep.E_Pn_f), thr))
            any_sep |= rep.separated
        rows.append(ResultRow("fourier-lb", p, p - 1, None, None, "separated_for_some_r", int(any_sep), 1, any_sep))
    return rows


# parallel

def _parallel_trial(args):
    n_bits, J, theta, seed, trial = args
    inst = generate_instance(n_bits, derive_seed(seed, 4, trial))
    try:
        rep = parallel_solve(inst, J, theta, seed=derive_seed(seed, 5, J, trial))
    except Exception as exc:
        raise _annotate(exc, N=inst.N, J=J, seed=seed, trial=trial) from exc
    ok = inst.pow(inst.g, rep.collision.recovered_x) == inst.h
    return inst.N, float(np.mean(rep.per_worker_steps)), ok


def run_parallel_bench(n_bits, Js, trials, theta, seed, workers=1, rel_tol=0.25):
    rows, means = [], []
    for J in Js:
        res = pmap(_parallel_trial, [(n_bits, J, theta, seed, t) for t in range(trials)], workers)
        for t, (N, steps, ok) in enumerate(res):
            rows.append(ResultRow("parallel-bench", N, None, seed, t, f"per_worker_steps[J={J}]", steps, None, ok))
        mean = float(np.mean([r[1] for r in res]))
        means.append(mean)
        rows.append(ResultRow("parallel-bench", None, None, seed, None, f"mean_per_worker_steps[J={J}]", mean))
    for (J0, m0), (J1, m1) in zip(zip(Js, means), zip(Js[1:], means[1:])):
        expected = J1 / J0
        ratio = m0 / m1
        rows.append(ResultRow("parallel-bench", None, None, seed, None, f"speedup[J={J0}->{J1}]", ratio, expected,
                              abs(ratio - expected) <= rel_tol * expected))
    return rows


# bounds

def _thm2_trial(args):
    N, x, budget, seed, trial = args
    mu = blockwalk.increment_distribution(N, x)
    rng = np.random.default_rng(derive_seed(seed, 6, trial))
    x0 = int(rng.integers(0, N))
    try:
        return chain.simulate_collision_time(blockwalk.block_sampler(mu, x0), derive_seed(seed, 6, trial, 1), budget)
    except chain.Exhausted:
        return None


def run_bounds(N, x, seed=0, T=None, eps=0.5, c=1.0, trials=0, workers=1, sweep=None):
    """Pre-mixing constants and bound formulas for the block kernel on Z_N.

    ``T`` defaults to the eps-mixing time.  The thm2_steps count is also
    reported for every horizon in ``sweep`` (default T, 2T, 4T), since any T
    with m > 0 is admissible.
    """
    x = resolve_x(x, N, seed)
    bk = blockwalk.block_kernel(N, x)
    B = bk.kernel
    if T is None:
        T = chain.mixing_time(B, eps)
    sweep = (T, 2 * T, 4 * T) if sweep is None else sweep
    summ = chain.premix_summary(B, T)
    l3 = chain.lemma3_bound(summ.maxprob[: T + 1])
    steps2 = chain.thm2_steps(N, T, summ.m, summ.M, summ.A_max, c)
    steps4, fail4 = chain.thm4_steps(N, T, summ.m, summ.M, summ.maxprob, c)
    T_s = chain.separation_time(B, 0.5)
    row = lambda stat, val, bound=None, ok=True: ResultRow("bounds", N, x, seed, None, stat, val, bound, ok)
    rows = [
        row("T", T),
        row("m", summ.m, 1.0, summ.m <= 1.0),
        row("M", summ.M),
        row("A_T", summ.A_T, l3, summ.A_T <= l3 + chain.SLACK),
        row("A_T_star", summ.A_T_star, l3, summ.A_T_star <= l3 + chain.SLACK),
        row("thm2_steps", steps2),
        row("collision_bracket", chain.collision_bracket(summ.maxprob, T)),
        row("thm4_steps", steps4),
        row("thm4_failure_prob", fail4),
        row("T_s_half", T_s),
        row("prop1_steps", chain.prop1_steps(N, T_s, c)),
    ]
    for t in sweep:
        m, M = chain.premix_params(B, t)
        A = max(chain.green_and_A(B, t))
        rows.append(row(f"thm2_steps[T={t}]", chain.thm2_steps(N, t, m, M, A, c)))
    for beta in (1, 2):
        es = chain.expected_self_intersections(B, 0, beta, T)
        lb = summ.m / N * chain.pair_count(N, beta)
        rows.append(row(f"E_S[beta={beta}]", es, lb, es >= lb - chain.SLACK))
    if trials:
        res = pmap(_thm2_trial, [(N, x, steps2, seed, t) for t in range(trials)], workers)
        frac = sum(r is None for r in res) / trials
        p = exp(-c)
        limit = p + 3 * sqrt(p * (1 - p) / trials)
        rows.append(row("thm2_no_collision_fraction", frac, limit, frac <= limit))
    return rows


def default_outdir():
    return os.environ.get("RHO_COLLIDE_OUTDIR")
