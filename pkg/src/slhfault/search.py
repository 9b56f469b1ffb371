"""Reproducible first-success search over a counter-indexed candidate stream.

Candidate ``g`` is a pure function of ``(label, base_seed, g)``, so the
winner and its attempt count do not depend on the number of workers: the
result is always the smallest accepted ``g``.  Workers scan contiguous
slices of a round and publish accepted indices to a shared minimum; a
worker stops once that minimum lies below its position.
"""

from __future__ import annotations

import hashlib
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import BudgetExceeded


def candidate_bytes(label: bytes, base_seed: int, g: int, length: int) -> bytes:
    return hashlib.shake_256(label + base_seed.to_bytes(16, "big") + g.to_bytes(8, "big")).digest(length)


@dataclass
class SearchOutcome:
    index: int  # winning candidate number (0-based)
    value: Any  # whatever the predicate returned
    work: int  # candidates evaluated across all workers

    @property
    def attempts(self) -> int:
        return self.index + 1


def _scan(predicate, start, stop, shared=None):
    evaluated = 0
    for g in range(start, stop):
        # a smaller accepted index elsewhere makes the rest of this slice moot
        if shared is not None and g % 64 == 0 and shared[0].value < g:
            break
        evaluated += 1
        value = predicate(g)
        if value is not None:
            if shared is not None:
                best, lock = shared
                with lock:
                    if g < best.value:
                        best.value = g
            return g, value, evaluated
    return None, None, evaluated


def _scan_worker(args):
    return _scan(*args)


def first_success(
    predicate: Callable[[int], Optional[Any]],
    budget: int,
    workers: int = 1,
    batch: int = 256,
    expected: Optional[float] = None,
) -> SearchOutcome:
    """Smallest ``g < budget`` with ``predicate(g) is not None``.

    ``predicate`` must be picklable when ``workers > 1``.
    """
    if workers <= 1:
        g, value, work = _scan(predicate, 0, budget)
        if g is None:
            raise BudgetExceeded(work, expected)
        return SearchOutcome(g, value, work)

    work = 0
    manager = multiprocessing.Manager()
    try:
        shared = (manager.Value("q", budget), manager.Lock())
        with ProcessPoolExecutor(max_workers=workers) as pool:
            start = 0
            while start < budget:
                stop = min(budget, start + workers * batch)
                futures = [
                    pool.submit(_scan_worker, (predicate, s, min(stop, s + batch), shared))
                    for s in range(start, stop, batch)
                ]
                best = None
                for fut in futures:
                    g, value, evaluated = fut.result()
                    work += evaluated
                    if g is not None and (best is None or g < best[0]):
                        best = (g, value)
                if best is not None:
                    return SearchOutcome(best[0], best[1], work)
                start = stop
    finally:
        manager.shutdown()
    raise BudgetExceeded(work, expected)
