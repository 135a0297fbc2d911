"""Order-preserving parallel map over frames.

Work is split into contiguous chunks and results are re-assembled in input
order, so the output never depends on worker count or completion order.
"""
from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from functools import partial


def _run_chunk(fn, context, chunk):
    return [fn(item, context) for item in chunk]


def _pool_context():
    methods = mp.get_all_start_methods()
    return mp.get_context("fork" if "fork" in methods else "spawn")


def ordered_map(fn, items, workers=1, context=None, chunks_per_worker=4):
    """Return ``[fn(item, context) for item in items]`` using ``workers`` processes."""
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(item, context) for item in items]
    n_chunks = min(len(items), workers * chunks_per_worker)
    bounds = [round(i * len(items) / n_chunks) for i in range(n_chunks + 1)]
    chunks = [items[bounds[i]:bounds[i + 1]] for i in range(n_chunks)]
    with ProcessPoolExecutor(max_workers=workers, mp_context=_pool_context()) as pool:
        parts = list(pool.map(partial(_run_chunk, fn, context), chunks))
    return [r for part in parts for r in part]
