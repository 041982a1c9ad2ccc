"""Deterministic fan-out of independent trials over a process pool."""
import os
from concurrent.futures import ProcessPoolExecutor

from .boolcore import trial_rng

WORKERS_ENV = "NWBENCH_WORKERS"


def worker_count():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_chunk(args):
    func, payload, seed, lo, hi = args
    return [func(payload, trial_rng(seed, i)) for i in range(lo, hi)]


def map_trials(func, payload, seed, trials, workers=None):
    """``[func(payload, rng_i) for i in range(trials)]`` with per-trial streams.

    ``func`` must be a module-level function when ``workers > 1``. Results
    come back in trial order whatever the worker count.
    """
    workers = worker_count() if workers is None else workers
    if workers <= 1 or trials < 4 * workers:
        return _run_chunk((func, payload, seed, 0, trials))
    step = -(-trials // (4 * workers))
    jobs = [(func, payload, seed, lo, min(trials, lo + step)) for lo in range(0, trials, step)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = []
        for part in pool.map(_run_chunk, jobs):
            out.extend(part)
    return out
