# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Chunked worker pool with results independent of the worker count."""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

from invmap.geometry import FloatArray

logger = logging.getLogger("invmap")

T = TypeVar("T")
R = TypeVar("R")

# Chunk boundaries depend only on the item count, never on the worker count.
CHUNK_SIZE = 4096

_threads: int = os.cpu_count() or 1


def set_threads(n: int | None) -> int:
    """Cap the number of worker threads (None restores the core count)."""
    global _threads
    if n is not None and n < 1:
        raise ValueError(f"threads must be >= 1, got {n}")
    _threads = n if n is not None else (os.cpu_count() or 1)
    logger.debug("Worker threads: %d", _threads)
    return _threads


def get_threads() -> int:
    return _threads


def chunk_bounds(n_items: int, chunk: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]


def map_chunks(
    func: Callable[[int, int], T], n_items: int, chunk: int = CHUNK_SIZE
) -> list[T]:
    """Run ``func(lo, hi)`` on fixed chunks of ``range(n_items)``, results in chunk order."""
    bounds = chunk_bounds(n_items, chunk)
    if _threads == 1 or len(bounds) <= 1:
        return [func(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=min(_threads, len(bounds))) as pool:
        futures = [pool.submit(func, lo, hi) for lo, hi in bounds]
        return [f.result() for f in futures]


def map_points(
    func: Callable[[FloatArray], FloatArray], points: FloatArray, chunk: int = CHUNK_SIZE
) -> FloatArray:
    """Apply a row-wise array function to ``points`` chunk by chunk."""
    if len(points) == 0:
        return func(points)
    parts = map_chunks(lambda lo, hi: func(points[lo:hi]), len(points), chunk)
    return np.concatenate(parts, axis=0)


def map_items(func: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Apply ``func`` to every item; results in item order."""
    parts = map_chunks(lambda lo, hi: [func(it) for it in items[lo:hi]], len(items), 1)
    return [r for part in parts for r in part]


def ordered_sum(values: FloatArray, chunk: int = CHUNK_SIZE) -> float:
    """Sum in fixed chunk order with compensated accumulation."""
    flat = np.ravel(values)
    partials = [math.fsum(flat[lo:hi].tolist()) for lo, hi in chunk_bounds(len(flat), chunk)]
    return math.fsum(partials)
