"""Thread-pool plumbing for the Monte Carlo drivers.

Replicate tasks write into preallocated per-index slots, so results are
bit-identical for any worker count; threads only change wall time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .validation import InputFormatError, PreconditionError

ENV_THREADS = "USPECTRAL_THREADS"


def resolve_jobs(n_jobs=None) -> int:
    """Worker count: explicit argument, else the environment, else 1."""
    if n_jobs is None:
        raw = os.environ.get(ENV_THREADS, "").strip()
        if not raw:
            return 1
        try:
            n_jobs = int(raw)
        except ValueError:
            raise InputFormatError(
                f"{ENV_THREADS} must be a positive integer, got {raw!r}"
            ) from None
    jobs = int(n_jobs)
    if jobs < 1:
        raise PreconditionError(f"thread count must be >= 1, got {n_jobs}")
    return jobs


def run_indexed(task, count: int, n_jobs=None) -> None:
    """Run task(i) for i in 0..count-1, possibly on a thread pool."""
    jobs = resolve_jobs(n_jobs)
    if jobs == 1 or count <= 1:
        for i in range(count):
            task(i)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        # list() drains the iterator so worker exceptions propagate here
        list(pool.map(task, range(count)))
