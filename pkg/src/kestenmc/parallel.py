"""Deterministic fan-out of replicas over worker processes.

Replicas are cut into fixed-size chunks; chunk ``i`` of a job labelled
``label`` draws from the stream ``(master_seed, crc32(label), i)``.  The
chunking does not depend on the number of workers and results are merged
in chunk order, so outputs are bit-identical for any ``workers``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial

from .stats import stream

CHUNK = 10_000


def _run_one(fn, seed, label, kwargs, item):
    index, size = item
    return fn(stream(seed, label, index), size, **kwargs)


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    full, rest = divmod(int(n), chunk)
    items = [(i, chunk) for i in range(full)]
    if rest:
        items.append((full, rest))
    return items


def run_chunks(fn, n: int, seed: int, label: str, workers: int = 1, chunk: int = CHUNK,
               **kwargs) -> list:
    """Call ``fn(rng, size, **kwargs)`` for each chunk; results in chunk order."""
    items = chunk_sizes(n, chunk)
    job = partial(_run_one, fn, seed, label, kwargs)
    if workers <= 1 or len(items) <= 1:
        return [job(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, items))
