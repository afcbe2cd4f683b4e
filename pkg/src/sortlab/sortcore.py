"""Instrumented shift-insertion sort and conventional insertion sort.

Both sorts count two deterministic costs:

* ``comparisons`` -- key-vs-key order tests (``A[i] > key``);
* ``writes`` -- assignments into the array or into the temporary slot.

Timed calls also report elapsed seconds on one of two clocks: ``"thread"``
(the calling thread's CPU clock, the default; it does not advance while
the thread is descheduled) or ``"wall"`` (``time.perf_counter``).

The kernels are compiled with numba so that quadratic sorts of a few
thousand elements stay cheap enough for property testing. A parallel
``payload`` array (original indices, say) can be carried along without
affecting the counters; the stability tests rely on it.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

__all__ = [
    "ALGORITHMS",
    "CLOCKS",
    "SortStats",
    "insertion_sort",
    "shift_insertion_sort",
    "sort_array",
    "verify_sorted",
]


@dataclass(frozen=True)
class SortStats:
    comparisons: int = 0
    writes: int = 0
    wall_time: float = 0.0  # elapsed seconds on the selected clock; 0 when untimed

    def __post_init__(self) -> None:
        if self.comparisons < 0 or self.writes < 0 or self.wall_time < 0:
            raise ValueError("SortStats fields must be non-negative")

    def counters(self) -> tuple[int, int]:
        return self.comparisons, self.writes


@njit(cache=True, nogil=True)
def _shift_insertion_kernel(a, payload):
    # Forward scan of the sorted prefix; the first element greater than
    # a[j] marks the slot, the block a[i..j-1] moves right by one.
    n = a.shape[0]
    carry = payload.shape[0] == n
    comparisons = 0
    writes = 0
    for j in range(1, n):
        for i in range(j):
            comparisons += 1
            if a[i] > a[j]:
                temp = a[j]
                writes += 1
                if carry:
                    ptemp = payload[j]
                for k in range(j, i, -1):
                    a[k] = a[k - 1]
                    if carry:
                        payload[k] = payload[k - 1]
                writes += j - i
                a[i] = temp
                if carry:
                    payload[i] = ptemp
                writes += 1
                break
    return comparisons, writes


@njit(cache=True, nogil=True)
def _insertion_kernel(a, payload):
    # Backward scan; no sentinel, so reaching the front costs no extra test.
    n = a.shape[0]
    carry = payload.shape[0] == n
    comparisons = 0
    writes = 0
    for j in range(1, n):
        key = a[j]
        if carry:
            pkey = payload[j]
        writes += 1
        i = j - 1
        while i >= 0:
            comparisons += 1
            if a[i] > key:
                a[i + 1] = a[i]
                if carry:
                    payload[i + 1] = payload[i]
                writes += 1
                i -= 1
            else:
                break
        a[i + 1] = key
        if carry:
            payload[i + 1] = pkey
        writes += 1
    return comparisons, writes


_KERNELS: dict[str, Callable] = {
    "shift_insertion": _shift_insertion_kernel,
    "insertion": _insertion_kernel,
}

ALGORITHMS: tuple[str, ...] = tuple(_KERNELS)

CLOCKS: dict[str, Callable[[], float]] = {
    "thread": time.thread_time,
    "wall": time.perf_counter,
}

_NO_PAYLOAD = np.empty(0, dtype=np.int64)


def _as_keys(a: Sequence[float]) -> np.ndarray:
    keys = np.array(a, dtype=np.float64, copy=True).reshape(-1)
    if not np.all(np.isfinite(keys)):
        raise ValueError("sort input contains non-finite values")
    return keys


def sort_array(
    algorithm: str,
    a: Sequence[float],
    *,
    timed: bool = True,
    clock: str = "thread",
    payload: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, SortStats]:
    """Sort a copy of ``a`` with the named algorithm.

    The timer brackets the kernel call only, with the garbage collector
    paused; conversion and validation of the input happen before it starts. ``payload`` (int64, same length)
    is permuted in place alongside the keys.
    """
    try:
        kernel = _KERNELS[algorithm]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}"
        ) from None
    try:
        now = CLOCKS[clock]
    except KeyError:
        raise ValueError(f"unknown clock {clock!r}; expected one of {tuple(CLOCKS)}") from None
    keys = _as_keys(a)
    if payload is None:
        payload = _NO_PAYLOAD
    elif payload.shape != keys.shape or payload.dtype != np.int64:
        raise ValueError("payload must be an int64 array matching the keys")

    if timed:
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            t0 = now()
            comparisons, writes = kernel(keys, payload)
            elapsed = now() - t0
        finally:
            if gc_was_enabled:
                gc.enable()
    else:
        comparisons, writes = kernel(keys, payload)
        elapsed = 0.0
    return keys, SortStats(int(comparisons), int(writes), max(elapsed, 0.0))


def shift_insertion_sort(
    a: Sequence[float], *, timed: bool = True, clock: str = "thread"
) -> tuple[list[float], SortStats]:
    """Shift-insertion sort: for each ``j`` scan the prefix from the front and,
    at the first ``A[i] > A[j]``, rotate ``A[i..j]`` right by one."""
    keys, stats = sort_array("shift_insertion", a, timed=timed, clock=clock)
    return keys.tolist(), stats


def insertion_sort(
    a: Sequence[float], *, timed: bool = True, clock: str = "thread"
) -> tuple[list[float], SortStats]:
    """Conventional insertion sort with a backward scan of the sorted prefix."""
    keys, stats = sort_array("insertion", a, timed=timed, clock=clock)
    return keys.tolist(), stats


def verify_sorted(a: Sequence[float], original: Sequence[float]) -> bool:
    """True iff ``a`` is non-decreasing and a multiset permutation of ``original``."""
    out = list(a)
    src = list(original)
    if len(out) != len(src):
        return False
    if any(x != x for x in out):  # NaN
        return False
    for prev, cur in zip(out, out[1:]):
        if not prev <= cur:
            return False
    try:
        ref = sorted(src)
    except TypeError:
        return False
    return out == ref
