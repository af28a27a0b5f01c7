"""``rho-collide`` command line: run an experiment, write rows as CSV or JSON.

Exit status is 0 when every row passes, 1 when any pass flag is false or a
module error escapes, and 2 for configuration errors.
"""

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import astuple, dataclass
from typing import Optional

from . import experiments as ex
from .fourier import SUPPORTED_T
from .group import MAX_BITS, MIN_BITS

HEADER_COMMENT = "# rho-collide v1"
EXACT_N_CAP = 4000
SUBCOMMANDS = ("solve", "scaling", "example3", "block-verify", "mixing", "fourier-lb", "parallel-bench", "bounds")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    n_bits: int = 20
    N: tuple = ()
    x: Optional[str] = None
    seed: int = 0
    trials: int = 200
    theta: Optional[float] = None
    J: tuple = (1, 2, 4, 8)
    eps: float = 0.5
    s_max: int = 6
    t: tuple = SUPPORTED_T
    r_max: int = 10
    T: tuple = ()
    workers: int = 1
    output: Optional[str] = None
    format: str = "csv"


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="rho-collide", description="Pollard Rho collision-time experiments.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--n-bits", type=int, default=20)
    p.add_argument("--N", type=_int_list, default=())
    p.add_argument("--x", default=None, help="random, N-1 or an integer")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--J", type=_int_list, default=(1, 2, 4, 8))
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--s-max", type=int, default=6)
    p.add_argument("--t", type=_int_list, default=SUPPORTED_T)
    p.add_argument("--r-max", type=int, default=10)
    p.add_argument("--T", type=_int_list, default=(), help="bounds horizons; the first is primary, all are swept")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


_DEFAULT_N = {
    "scaling": (1009, 10007, 100003, 1000003),
    "example3": tuple(2**k for k in range(10, 17)),
    "block-verify": (101,),
    "mixing": (101,),
    "bounds": (1009,),
}
_DEFAULT_TRIALS = {"parallel-bench": 100, "bounds": 0}
_DEFAULT_EPS = {"mixing": 0.01}


def config_from_args(ns):
    sub = ns.subcommand
    return ExperimentConfig(
        subcommand=sub,
        n_bits=ns.n_bits,
        N=ns.N or _DEFAULT_N.get(sub, ()),
        x=ns.x,
        seed=ns.seed,
        trials=ns.trials if ns.trials is not None else _DEFAULT_TRIALS.get(sub, 200),
        theta=ns.theta,
        J=ns.J,
        eps=ns.eps if ns.eps is not None else _DEFAULT_EPS.get(sub, 0.5),
        s_max=ns.s_max,
        t=ns.t,
        r_max=ns.r_max,
        T=ns.T,
        workers=ns.workers,
        output=ns.output,
        format=ns.format,
    )


def validate(cfg):
    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {cfg.subcommand!r}")
    if cfg.subcommand in ("solve", "parallel-bench") and not MIN_BITS <= cfg.n_bits <= MAX_BITS:
        raise ConfigError(f"--n-bits must be in [{MIN_BITS}, {MAX_BITS}]")
    if cfg.trials < 0 or (cfg.trials == 0 and cfg.subcommand in ("scaling", "example3", "parallel-bench")):
        raise ConfigError("--trials must be positive")
    if cfg.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if cfg.theta is not None and not 0 < cfg.theta <= 1:
        raise ConfigError("--theta must be in (0, 1]")
    if not 0 < cfg.eps < 1:
        raise ConfigError("--eps must be in (0, 1)")
    if any(n < 3 for n in cfg.N):
        raise ConfigError("every N must be >= 3")
    if cfg.subcommand in ("block-verify", "mixing", "bounds"):
        if len(cfg.N) != 1:
            raise ConfigError(f"{cfg.subcommand} takes exactly one N")
        N = cfg.N[0]
        if N > EXACT_N_CAP:
            raise ConfigError(f"{cfg.subcommand} builds dense N x N matrices; N must be <= {EXACT_N_CAP}")
        if N % 2 == 0:
            raise ConfigError("the block walk needs odd N")
        if cfg.x not in (None, "random", "N-1", "n-1"):
            try:
                int(cfg.x)
            except ValueError:
                raise ConfigError(f"--x must be random, N-1 or an integer, got {cfg.x!r}") from None
    if any(t < 1 for t in cfg.T):
        raise ConfigError("--T values must be positive")
    if cfg.subcommand == "block-verify" and not 1 <= cfg.s_max <= 64:
        raise ConfigError("--s-max must be in [1, 64]")
    if cfg.subcommand == "scaling" and any(n > 1 << 40 for n in cfg.N):
        raise ConfigError("scaling N must be below 2^40")
    if cfg.subcommand == "example3" and any(n & (n - 1) for n in cfg.N):
        raise ConfigError("example3 N must be powers of two")
    if cfg.subcommand == "fourier-lb":
        bad = [t for t in cfg.t if t not in SUPPORTED_T]
        if bad:
            raise ConfigError(f"--t values {bad} unsupported; choose from {SUPPORTED_T}")
        if cfg.r_max < 1:
            raise ConfigError("--r-max must be >= 1")
    if cfg.subcommand == "parallel-bench" and (not cfg.J or min(cfg.J) < 1):
        raise ConfigError("--J must list positive worker counts")


def run_rows(cfg):
    s = cfg.subcommand
    if s == "solve":
        return ex.run_solve(cfg.n_bits, cfg.seed, theta=cfg.theta)
    if s == "scaling":
        return ex.run_scaling(cfg.N, cfg.trials, cfg.seed, cfg.workers)
    if s == "example3":
        return ex.run_example3(cfg.N, cfg.trials, cfg.seed, cfg.workers)
    if s == "block-verify":
        return ex.run_block_verify(cfg.N[0], cfg.x, cfg.s_max, cfg.seed)
    if s == "mixing":
        return ex.run_mixing(cfg.N[0], cfg.x, cfg.eps, cfg.seed)
    if s == "fourier-lb":
        return ex.run_fourier_lb(cfg.t, cfg.r_max)
    if s == "parallel-bench":
        return ex.run_parallel_bench(cfg.n_bits, cfg.J, cfg.trials, cfg.theta, cfg.seed, cfg.workers)
    T = cfg.T[0] if cfg.T else None
    return ex.run_bounds(cfg.N[0], cfg.x, cfg.seed, T, cfg.eps, trials=cfg.trials, workers=cfg.workers,
                         sweep=cfg.T or None)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows, fmt):
    if fmt == "json":
        return json.dumps([dict(zip(ex.FIELDS, astuple(r))) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    buf.write(HEADER_COMMENT + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ex.FIELDS)
    for r in rows:
        w.writerow([_cell(v) for v in astuple(r)])
    return buf.getvalue()


def output_path(cfg):
    if cfg.output:
        return cfg.output
    outdir = ex.default_outdir()
    if outdir:
        return os.path.join(outdir, f"{cfg.subcommand}.{cfg.format}")
    return None


def summarize(cfg, rows):
    failed = [r for r in rows if not r.passed]
    status = "PASS" if not failed else f"FAIL ({len(failed)} failing: {', '.join(r.statistic for r in failed[:3])})"
    return f"{cfg.subcommand}: {len(rows)} rows, seed={cfg.seed}: {status}"


def run(cfg, stdout=None, stderr=None):
    """Validate, execute and write one experiment; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    validate(cfg)
    rows = run_rows(cfg)
    text = render(rows, cfg.format)
    path = output_path(cfg)
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        print(summarize(cfg, rows), file=stdout)
    else:
        stdout.write(text)
        print(summarize(cfg, rows), file=stderr)
    return 0 if all(r.passed for r in rows) else 1


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns))
    except ConfigError as exc:
        print(f"rho-collide: config error: {exc}", file=sys.stderr)
        return 2
    except ex.ExperimentError as exc:
        print(f"rho-collide: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
