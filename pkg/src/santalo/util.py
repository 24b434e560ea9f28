"""Small shared helpers: direction handling, thread control."""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InputError

UNIT_NORM_TOL = 1e-12


def thread_count():
    """Worker cap from SANTALO_THREADS (default 1: deterministic, no pool overhead)."""
    raw = os.environ.get("SANTALO_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise InputError(f"SANTALO_THREADS must be an integer, got {raw!r}")
    return max(1, k)


def parallel_map(fn, items):
    """Order-preserving map, threaded when SANTALO_THREADS > 1."""
    items = list(items)
    k = thread_count()
    if k <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def unit_vector(u):
    """Validate/normalize a direction; rejects near-zero vectors."""
    u = np.asarray(u, dtype=float)
    nrm = float(np.linalg.norm(u))
    if nrm < 1e-14:
        raise InputError("direction vector is (numerically) zero")
    if abs(nrm - 1.0) > UNIT_NORM_TOL:
        u = u / nrm
    return u
