"""Independent reference computations used only by the tests.

None of these share code with the package: the sorts are plain-Python
transcriptions of the step lists, and the ANOVA oracle fits nested
indicator models by least squares.
"""

from __future__ import annotations

import itertools

import numpy as np


def shift_insertion_steps(a):
    """Step-by-step transcription of shift-insertion, counting operations.

    Steps, 0-based: for j = 1..n-1, for i = 0..j-1, if A[i] > A[j] then
    temp := A[j]; for k = j down to i+1: A[k] := A[k-1]; A[i] := temp;
    stop scanning i.
    """
    A = list(a)
    n = len(A)
    comparisons = writes = 0
    j = 1
    while j <= n - 1:
        i = 0
        while i <= j - 1:
            comparisons += 1
            if A[i] > A[j]:
                temp = A[j]
                writes += 1
                k = j
                while k >= i + 1:
                    A[k] = A[k - 1]
                    writes += 1
                    k -= 1
                A[i] = temp
                writes += 1
                break
            i += 1
        j += 1
    return A, comparisons, writes


def insertion_steps(a):
    """Backward-scan insertion sort, transcribed with the same cost model."""
    A = list(a)
    comparisons = writes = 0
    for j in range(1, len(A)):
        key = A[j]
        writes += 1
        i = j - 1
        while i >= 0:
            comparisons += 1
            if not A[i] > key:
                break
            A[i + 1] = A[i]
            writes += 1
            i -= 1
        A[i + 1] = key
        writes += 1
    return A, comparisons, writes


def beta23_cdf(x):
    """Beta(2, 3) CDF in closed form: 1 - (1 - x)^3 (1 + 3x)."""
    return 1 - (1 - x) ** 3 * (1 + 3 * x)


def f_tail_d1_2(f, d2):
    """P(F(2, d2) > f) in closed form."""
    return (1 + 2 * f / d2) ** (-d2 / 2)


def least_squares_ss(y):
    """Sequential SS per factor subset by fitting nested indicator models.

    ``y`` has shape (levels..., replicates). Subsets are added in order of
    size, then lexicographically; each source's SS is the squared norm of
    the change in fitted values, which avoids differencing residual sums.
    Returns (dict subset -> SS, SSE, SST).
    """
    y = np.asarray(y, dtype=float)
    k = y.ndim - 1
    levels = y.shape[:k]
    rows = list(itertools.product(*(range(L) for L in levels), range(y.shape[-1])))
    obs = np.array([y[idx] for idx in rows])
    N = len(rows)

    def indicators(subset):
        cells = list(itertools.product(*(range(levels[f]) for f in subset)))
        X = np.zeros((N, len(cells)))
        for r, idx in enumerate(rows):
            X[r, cells.index(tuple(idx[f] for f in subset))] = 1.0
        return X

    def fitted(X):
        coef, *_ = np.linalg.lstsq(X, obs, rcond=None)
        return X @ coef

    X = np.ones((N, 1))
    prev = fitted(X)
    out = {}
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            X = np.hstack([X, indicators(subset)])
            cur = fitted(X)
            out[subset] = float(np.sum((cur - prev) ** 2))
            prev = cur
    sse = float(np.sum((obs - prev) ** 2))
    sst = float(np.sum((obs - obs.mean()) ** 2))
    return out, sse, sst
