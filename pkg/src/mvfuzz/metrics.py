"""External clustering agreement: normalized mutual information and Rand index.

The value-producing code lives in jitted kernels over dense label vectors;
the public functions validate and densify their inputs, then delegate.
Both metrics are symmetric in their arguments and invariant to relabeling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DataError


@dataclass(frozen=True)
class ContingencyTable:
    """Joint label counts with marginals: counts[i, j] pairs pred i, truth j."""

    counts: np.ndarray
    pred_totals: np.ndarray
    truth_totals: np.ndarray
    total: int


@dataclass(frozen=True)
class PairCounts:
    """Sample-pair agreement counts out of n(n-1)/2 unordered pairs."""

    f00: int
    f11: int
    total_pairs: int


@njit(cache=True)
def _contingency_kernel(a, b, ca, cb):
    counts = np.zeros((ca, cb), dtype=np.int64)
    for i in range(a.size):
        counts[a[i], b[i]] += 1
    return counts


@njit(cache=True)
def _pair_counts_kernel(counts):
    """(f00, f11) from a contingency table, via the closed pair-count form."""
    n = 0
    f11 = 0
    same_a = 0
    same_b = 0
    for i in range(counts.shape[0]):
        row = 0
        for j in range(counts.shape[1]):
            c = counts[i, j]
            n += c
            f11 += c * (c - 1) // 2
            row += c
        same_a += row * (row - 1) // 2
    for j in range(counts.shape[1]):
        col = 0
        for i in range(counts.shape[0]):
            col += counts[i, j]
        same_b += col * (col - 1) // 2
    total = n * (n - 1) // 2
    f00 = total - same_a - same_b + f11
    return f00, f11, total


@njit(cache=True)
def _nmi_kernel(counts):
    """Normalized mutual information from a contingency table.

    Natural logarithms; empty cells contribute nothing, and a partition
    with a single cluster yields 0 by convention.
    """
    n = 0.0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            n += counts[i, j]
    rows = np.zeros(counts.shape[0])
    cols = np.zeros(counts.shape[1])
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            rows[i] += counts[i, j]
            cols[j] += counts[i, j]
    num = 0.0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            c = counts[i, j]
            if c > 0:
                num += c * np.log(n * c / (rows[i] * cols[j]))
    den_a = 0.0
    for i in range(rows.size):
        if rows[i] > 0:
            den_a += rows[i] * np.log(rows[i] / n)
    den_b = 0.0
    for j in range(cols.size):
        if cols[j] > 0:
            den_b += cols[j] * np.log(cols[j] / n)
    den = np.sqrt(den_a * den_b)
    if den == 0.0:
        return 0.0
    value = num / den
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


def _dense_labels(name: str, labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise DataError(f"{name} must be a 1-D label vector, got shape {arr.shape}")
    if arr.size == 0:
        raise DataError(f"{name} is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        raise DataError(f"{name} must contain integers, got dtype {arr.dtype}")
    _, dense = np.unique(arr, return_inverse=True)
    return dense.astype(np.int64)


def _paired(pred, truth):
    a = _dense_labels("pred", pred)
    b = _dense_labels("truth", truth)
    if a.size != b.size:
        raise DataError(
            f"label vectors differ in length: {a.size} versus {b.size}"
        )
    return a, b


def contingency_table(pred, truth) -> ContingencyTable:
    a, b = _paired(pred, truth)
    counts = _contingency_kernel(a, b, int(a.max()) + 1, int(b.max()) + 1)
    return ContingencyTable(
        counts=counts,
        pred_totals=counts.sum(axis=1),
        truth_totals=counts.sum(axis=0),
        total=int(counts.sum()),
    )


def pair_counts(pred, truth) -> PairCounts:
    a, b = _paired(pred, truth)
    if a.size < 2:
        raise DataError("pair counts need at least 2 samples")
    counts = _contingency_kernel(a, b, int(a.max()) + 1, int(b.max()) + 1)
    f00, f11, total = _pair_counts_kernel(counts)
    return PairCounts(int(f00), int(f11), int(total))


def rand_index(pred, truth) -> float:
    """Fraction of sample pairs both partitions agree on, in [0, 1]."""
    pc = pair_counts(pred, truth)
    return (pc.f00 + pc.f11) / pc.total_pairs


def nmi(pred, truth) -> float:
    """Normalized mutual information with the geometric-mean denominator."""
    a, b = _paired(pred, truth)
    counts = _contingency_kernel(a, b, int(a.max()) + 1, int(b.max()) + 1)
    return float(_nmi_kernel(counts))
