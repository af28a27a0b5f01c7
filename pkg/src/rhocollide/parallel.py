"""Distinguished-points parallel collision search over J workers.

All workers iterate one common function F (one shared partition oracle)
from independent uniform starts.  Only distinguished elements are sent to
the repository; the first element submitted twice ends the search.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import ceil, log2
from typing import Optional

import numpy as np

from .chain import Exhausted
from .hashing import derive_seed
from .oracle import DistinguishedPredicate, PartitionOracle
from .rho import CollisionReport, Degenerate, _stepper, default_max_steps, random_start, recover_dlog


class AllDegenerate(RuntimeError):
    pass


@dataclass(frozen=True)
class Submission:
    a: int
    b: int
    worker: int
    step: int


class Repository:
    """Append-only map element -> first submission, with atomic insert-or-report."""

    def __init__(self):
        self._store = {}
        self._lock = threading.Lock()

    def insert_or_report(self, element, sub):
        """Store ``sub`` and return None, or return the earlier submission."""
        with self._lock:
            prev = self._store.get(element)
            if prev is None:
                self._store[element] = sub
            return prev

    def __len__(self):
        return len(self._store)


@dataclass(frozen=True)
class ParallelReport:
    J: int
    theta: float
    per_worker_steps: tuple
    collision: CollisionReport
    detecting_point: int
    workers: tuple  # (worker of first submission, worker of repeat)
    true_collision_round: Optional[int] = None
    detection_round: int = 0
    repository_size: int = 0
    attempts: int = 1
    total_steps: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total_steps", sum(self.per_worker_steps))

    @property
    def overshoot(self):
        if self.true_collision_round is None:
            return None
        return self.detection_round - self.true_collision_round


def default_theta(N):
    return 2.0 ** -ceil(log2(N) / 4)


def distinguished_search(inst, oracle, pred, starts, max_steps_per_worker=None, track_true_collision=False):
    """Round-robin search: each round advances every worker by one step.

    The result is a pure function of (inst, oracle, pred, starts).  With
    ``track_true_collision`` every visited element is also kept so the round
    of the first actual collision (within or across walks) is reported.
    """
    if max_steps_per_worker is None:
        max_steps_per_worker = default_max_steps(inst.N)
    N = inst.N
    step = _stepper(inst, oracle)
    J = len(starts)
    repo = Repository()
    state = [(s.element, s.a, s.b) for s in starts]
    steps = [0] * J
    visited = {} if track_true_collision else None
    true_round = None

    def report(element, prev, a, b, w, rnd):
        return ParallelReport(
            J=J,
            theta=pred.theta,
            per_worker_steps=tuple(steps),
            collision=CollisionReport(
                steps_total=sum(steps),
                pair=((prev.a, prev.b), (a, b)),
                colliding_element=element,
                degenerate=(b - prev.b) % N == 0,
                first_index=prev.step,
            ),
            detecting_point=element,
            workers=(prev.worker, w),
            true_collision_round=true_round,
            detection_round=rnd,
            repository_size=len(repo),
        )

    for w, (y, a, b) in enumerate(state):
        if visited is not None:
            if y in visited and true_round is None:
                true_round = 0
            visited.setdefault(y, w)
        if pred(y):
            prev = repo.insert_or_report(y, Submission(a, b, w, 0))
            if prev is not None:
                return report(y, prev, a, b, w, 0)
    for rnd in range(1, max_steps_per_worker + 1):
        for w in range(J):
            y, a, b = state[w] = step(*state[w])
            steps[w] = rnd
            if visited is not None and true_round is None:
                if y in visited:
                    true_round = rnd
                else:
                    visited[y] = w
            if pred(y):
                prev = repo.insert_or_report(y, Submission(a, b, w, rnd))
                if prev is not None:
                    return report(y, prev, a, b, w, rnd)
    raise Exhausted(max_steps_per_worker)


def distinguished_search_threaded(inst, oracle, pred, starts, max_steps_per_worker=None):
    """Free-running workers sharing one locked repository (wall-clock mode).

    Step counts depend on thread scheduling; use :func:`distinguished_search`
    for reproducible statistics.
    """
    if max_steps_per_worker is None:
        max_steps_per_worker = default_max_steps(inst.N)
    N = inst.N
    J = len(starts)
    repo = Repository()
    steps = [0] * J
    stop = threading.Event()
    found = []

    def work(w):
        step = _stepper(inst, oracle)
        s = starts[w]
        y, a, b = s.element, s.a, s.b
        for i in range(max_steps_per_worker + 1):
            if stop.is_set():
                return
            if i:
                y, a, b = step(y, a, b)
                steps[w] = i
            if pred(y):
                prev = repo.insert_or_report(y, Submission(a, b, w, i))
                if prev is not None:
                    found.append((y, prev, a, b, w, i))
                    stop.set()
                    return

    with ThreadPoolExecutor(max_workers=J) as ex:
        list(ex.map(work, range(J)))
    if not found:
        raise Exhausted(max_steps_per_worker)
    y, prev, a, b, w, rnd = found[0]
    return ParallelReport(
        J=J,
        theta=pred.theta,
        per_worker_steps=tuple(steps),
        collision=CollisionReport(
            steps_total=sum(steps),
            pair=((prev.a, prev.b), (a, b)),
            colliding_element=y,
            degenerate=(b - prev.b) % N == 0,
            first_index=prev.step,
        ),
        detecting_point=y,
        workers=(prev.worker, w),
        detection_round=rnd,
        repository_size=len(repo),
    )


def parallel_solve(inst, J, theta=None, seed=0, max_steps_per_worker=None, max_attempts=8, mode="round_robin",
                   track_true_collision=False):
    """Solve g^x = h with J distinguished-point workers, restarting on degeneracy.

    Attempt k uses oracle seed ``derive_seed(seed, 0, k)``, predicate seed
    ``derive_seed(seed, 2, k)`` and worker w starts from
    ``derive_seed(seed, 1, k, w)``.  The returned report carries the
    recovered exponent in ``collision.recovered_x``.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    if mode not in ("round_robin", "threads"):
        raise ValueError(f"unknown mode {mode!r}")
    theta = default_theta(inst.N) if theta is None else theta
    search = distinguished_search if mode == "round_robin" else distinguished_search_threaded
    last = None
    for attempt in range(max_attempts):
        oracle = PartitionOracle(derive_seed(seed, 0, attempt))
        pred = DistinguishedPredicate(derive_seed(seed, 2, attempt), theta)
        starts = [random_start(inst, np.random.default_rng(derive_seed(seed, 1, attempt, w))) for w in range(J)]
        kwargs = {"track_true_collision": track_true_collision} if mode == "round_robin" else {}
        try:
            rep = search(inst, oracle, pred, starts, max_steps_per_worker, **kwargs)
        except Exhausted as exc:
            last = exc
            continue
        try:
            x = recover_dlog(inst, rep.collision)
        except Degenerate as exc:
            last = exc
            continue
        return replace(rep, collision=replace(rep.collision, recovered_x=x), attempts=attempt + 1)
    raise AllDegenerate(f"no nondegenerate collision in {max_attempts} attempts") from last
