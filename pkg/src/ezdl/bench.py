"""Benchmark harness: solver evaluation counts and wall-clock scaling.

Two experiments: (a) count how often each root solver evaluates the
auxiliary function on identical random inputs, (b) time the streaming
projection against the sort-based and alternating baselines on identical
pre-sparsified inputs.  Vectors are drawn from a counter-based generator
keyed by (seed, n), so eval counts reproduce exactly for a given seed while
timings naturally jitter.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .errors import NumericalInconsistency, OutOfRange
from .projection import (
    SOLVERS,
    alternating_project,
    oracle_project_sorted,
    project_nonneg,
)
from .sparseness import target_norms

TIMING_ALGORITHMS = ("linear", "sorted_oracle", "alternating")

CSV_HEADER = "n,algorithm,trials,mean_evals,std_evals,mean_time_ns"


@dataclass
class BenchRecord:
    """Aggregate of one (dimension, algorithm) cell."""

    n: int
    algorithm: str
    trials: int
    mean_evals: float
    std_evals: float
    mean_time_ns: float


def _rng_for(seed: int, n: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, n))))


def bench_solvers(n_list, sigma_star: float, trials: int, seed: int) -> list[BenchRecord]:
    """Auxiliary-evaluation counts per solver on shared random vectors.

    Every solver projects the very same uniform-random vectors; the count
    includes the feasibility evaluation at offset zero.
    """
    if trials < 1:
        raise OutOfRange(f"need at least one trial, got {trials}")
    records = []
    for n in n_list:
        if n < 4:
            raise OutOfRange(f"benchmark dimensions start at 4, got {n}")
        rng = _rng_for(seed, n)
        evals = {s: [] for s in SOLVERS}
        times = {s: [] for s in SOLVERS}
        for _ in range(trials):
            v = rng.random(n)
            lam2 = float(np.linalg.norm(v))
            target = target_norms(sigma_star, n, lam2)
            for solver in SOLVERS:
                buf = v.copy()
                t0 = time.perf_counter_ns()
                outcome = project_nonneg(buf, target, solver)
                times[solver].append(time.perf_counter_ns() - t0)
                evals[solver].append(outcome.solver_evals)
        for solver in SOLVERS:
            records.append(BenchRecord(
                n=int(n), algorithm=solver, trials=trials,
                mean_evals=statistics.fmean(evals[solver]),
                std_evals=statistics.pstdev(evals[solver]),
                mean_time_ns=statistics.fmean(times[solver]),
            ))
    return records


def _run_algorithm(name: str, buf: np.ndarray, target):
    """Run one projection; returns (result, aux evals or None)."""
    if name == "linear":
        outcome = project_nonneg(buf, target)
        return outcome.p, outcome.solver_evals
    if name == "sorted_oracle":
        return oracle_project_sorted(buf, target), None
    if name == "alternating":
        return alternating_project(buf, target), None
    raise OutOfRange(f"unknown algorithm {name!r}, expected one of {TIMING_ALGORITHMS}")


def bench_timing(n_list, algorithms, trials: int, sigma_pre: float,
                 sigma_star: float, seed: int, reps: int = 5) -> list[BenchRecord]:
    """Wall-clock comparison of projection algorithms on identical inputs.

    Random vectors are first projected to sparseness ``sigma_pre`` (the
    realistic regime: inputs are rarely raw noise), then every algorithm
    projects copies of the same vectors to ``sigma_star``.  Per trial each
    algorithm runs ``reps`` repetitions on a monotonic clock and the median
    is kept; the first trial cross-checks that all algorithms produce the
    same projection to within 1e-8 of the target scale.
    """
    if trials < 1:
        raise OutOfRange(f"need at least one trial, got {trials}")
    algorithms = tuple(algorithms)
    for name in algorithms:
        if name not in TIMING_ALGORITHMS:
            raise OutOfRange(f"unknown algorithm {name!r}, expected one of {TIMING_ALGORITHMS}")
    records = []
    for n in n_list:
        if n < 4:
            raise OutOfRange(f"benchmark dimensions start at 4, got {n}")
        rng = _rng_for(seed, n)
        times = {a: [] for a in algorithms}
        evals = []
        for trial in range(trials):
            v = rng.random(n)
            pre_target = target_norms(sigma_pre, n, float(np.linalg.norm(v)))
            v = project_nonneg(v, pre_target).p
            target = target_norms(sigma_star, n, float(np.linalg.norm(v)))
            outputs = {}
            for name in algorithms:
                rep_times = []
                for rep in range(reps):
                    buf = v.copy()
                    t0 = time.perf_counter_ns()
                    result, nevals = _run_algorithm(name, buf, target)
                    rep_times.append(time.perf_counter_ns() - t0)
                    if nevals is not None and rep == 0:
                        evals.append(nevals)
                    if trial == 0 and rep == 0:
                        outputs[name] = result.copy()
                times[name].append(statistics.median(rep_times))
            if trial == 0 and len(outputs) > 1:
                names = list(outputs)
                base = outputs[names[0]]
                for other in names[1:]:
                    dev = float(np.abs(outputs[other] - base).max())
                    if dev > 1e-8 * target.lambda2:
                        raise NumericalInconsistency(
                            f"{other} deviates from {names[0]} by {dev} at n={n}")
        for name in algorithms:
            records.append(BenchRecord(
                n=int(n), algorithm=name, trials=trials,
                mean_evals=statistics.fmean(evals) if name == "linear" and evals else 0.0,
                std_evals=statistics.pstdev(evals) if name == "linear" and evals else 0.0,
                mean_time_ns=statistics.fmean(times[name]),
            ))
    return records


def records_to_csv(records) -> str:
    """Render records as CSV with a '.' decimal separator."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.n},{r.algorithm},{r.trials},"
                     f"{r.mean_evals!r},{r.std_evals!r},{r.mean_time_ns!r}")
    return "\n".join(lines) + "\n"


def write_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(records_to_csv(records))
