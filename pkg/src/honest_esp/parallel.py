"""Deterministic work splitting.

Replicated work (bootstrap draws, simulation replicates) is split into
fixed-size chunks whose random streams are keyed by chunk start, never
by worker id.  Results land in preallocated slices, so any thread count
produces byte-identical output.
"""

import os
from concurrent.futures import ThreadPoolExecutor

DEFAULT_CHUNK = 1024


def thread_count(override=None):
    """Worker threads to use: explicit override, else env, else 1."""
    if override is not None:
        return max(1, int(override))
    env = os.environ.get("HONEST_ESP_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return 1


def run_chunks(total, worker, chunk=DEFAULT_CHUNK, threads=None):
    """Call worker(start, stop) over fixed [start, stop) chunks.

    The chunk grid depends only on total and chunk, so the same seeds
    map to the same chunks regardless of parallelism.
    """
    spans = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    n_threads = thread_count(threads)
    if n_threads == 1 or len(spans) == 1:
        for start, stop in spans:
            worker(start, stop)
        return
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        list(pool.map(lambda span: worker(*span), spans))
