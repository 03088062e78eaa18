"""
Deterministic reductions and the worker pool used by the quadratures.

Integrands are evaluated chunk by chunk on a thread pool, the chunks are put
back in input order and summed along a fixed pairwise tree, so a result does
not depend on how many threads produced it.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np

from config import config

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

# Rows per work item handed to the pool
CHUNK_ROWS = 4096


def pairwise_sum(values) -> np.ndarray:
    """
    Sum along axis 0 with a fixed pairwise tree.

    Args:
        values: array of shape (N, ...), real or complex

    Returns:
        Sum of the N entries, shape (...); zeros for N == 0
    """
    arr = np.asarray(values)
    if arr.shape[0] == 0:
        return np.zeros(arr.shape[1:], dtype=arr.dtype)
    while arr.shape[0] > 1:
        if arr.shape[0] % 2:
            # odd tail is carried unchanged to the next level
            head = arr[:-1:2] + arr[1::2]
            arr = np.concatenate([head, arr[-1:]], axis=0)
        else:
            arr = arr[0::2] + arr[1::2]
    return arr[0]


def parallel_map(func: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """
    Apply func to every item on the worker pool.

    Returns:
        Results in input order.
    """
    workers = min(config.worker_count(), max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]
    logger.debug(f"Mapping {len(items)} chunks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunked(rows: np.ndarray, size: int = CHUNK_ROWS) -> List[np.ndarray]:
    """Split an array into row chunks of at most size rows."""
    n = rows.shape[0]
    if n == 0:
        return [rows]
    return [rows[start:start + size] for start in range(0, n, size)]


def parallel_rows(func: Callable[[np.ndarray], np.ndarray], rows: np.ndarray) -> np.ndarray:
    """
    Evaluate a row-wise function over an array in parallel chunks.

    Args:
        func: maps an (m, ...) chunk to an (m, ...) result
        rows: input array with rows along axis 0

    Returns:
        Concatenated results in row order.
    """
    parts = parallel_map(func, chunked(rows))
    return np.concatenate(parts, axis=0)
