"""Fuzzy c-means: the membership/center kernel and the alternating fit.

Data matrices are ``(features, samples)``; membership matrices are
``(clusters, samples)`` with every column on the probability simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DataError, DegenerateClusterError

# Squared distances below this are treated as a coincident sample/center pair.
EPS_DIST = 1e-12

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class FuzzyPartition:
    """Membership matrix ``u`` of shape (clusters, samples) plus fuzzifier."""

    u: np.ndarray
    fuzzifier_m: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        if u.ndim != 2 or u.shape[0] < 1 or u.shape[1] < 1:
            raise DataError(f"membership matrix must be 2-D, got shape {u.shape}")
        if self.fuzzifier_m <= 1.0:
            raise DataError("fuzzifier must be greater than 1")
        if u.min() < -SIMPLEX_TOL or u.max() > 1.0 + SIMPLEX_TOL:
            raise DataError("memberships must lie in [0, 1]")
        col_sums = u.sum(axis=0)
        if np.abs(col_sums - 1.0).max() > SIMPLEX_TOL:
            worst = int(np.abs(col_sums - 1.0).argmax())
            raise DataError(
                f"membership column {worst} sums to {col_sums[worst]!r}, not 1"
            )
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def n_clusters(self) -> int:
        return self.u.shape[0]

    @property
    def n_samples(self) -> int:
        return self.u.shape[1]


@dataclass(frozen=True)
class Centers:
    """Cluster centers ``v`` of shape (clusters, features)."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if v.ndim != 2:
            raise DataError(f"centers must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("centers contain non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "v", v)


def squared_distances(data: np.ndarray, centers_v: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (clusters, samples)."""
    data = np.asarray(data, dtype=np.float64)
    v = np.asarray(centers_v, dtype=np.float64)
    d2 = (
        (v * v).sum(axis=1)[:, None]
        - 2.0 * (v @ data)
        + (data * data).sum(axis=0)[None, :]
    )
    return np.maximum(d2, 0.0)


def _memberships_from_sq(d2: np.ndarray, m: float) -> np.ndarray:
    """Simplex-optimal memberships for given squared distances.

    Columns whose minimum distance is below EPS_DIST get a crisp uniform
    split over the coincident centers; all other columns use the usual
    ratio form with exponent 1/(m-1), written against the column minimum
    so the powers stay in [0, 1].
    """
    d2 = np.asarray(d2, dtype=np.float64)
    dmin = d2.min(axis=0)
    coincident = dmin < EPS_DIST
    u = np.zeros_like(d2)
    if np.any(coincident):
        hits = d2[:, coincident] < EPS_DIST
        u[:, coincident] = hits / hits.sum(axis=0)
    regular = ~coincident
    if np.any(regular):
        ratios = dmin[regular][None, :] / d2[:, regular]
        powered = ratios ** (1.0 / (m - 1.0))
        u[:, regular] = powered / powered.sum(axis=0)
    return u


def update_membership(data, centers: Centers, fuzzifier_m: float) -> FuzzyPartition:
    """One exact membership update for fixed centers."""
    if fuzzifier_m <= 1.0:
        raise DataError("fuzzifier must be greater than 1")
    d2 = squared_distances(data, centers.v)
    return FuzzyPartition(_memberships_from_sq(d2, fuzzifier_m), fuzzifier_m)


def _center_sums(data: np.ndarray, u: np.ndarray, m: float):
    """Weighted sums behind the center update: returns (numerators, weights)."""
    w = u**m
    return w @ np.asarray(data, dtype=np.float64).T, w.sum(axis=1)


def update_centers(data, partition: FuzzyPartition) -> Centers:
    """One exact center update for a fixed partition.

    Raises DegenerateClusterError when a cluster has zero total weight,
    so callers can re-seed that center and continue.
    """
    nums, weights = _center_sums(data, partition.u, partition.fuzzifier_m)
    dead = np.flatnonzero(weights == 0.0)
    if dead.size:
        raise DegenerateClusterError(dead.tolist())
    return Centers(nums / weights[:, None])


def _centers_with_rescue(
    data: np.ndarray, u: np.ndarray, m: float, rescue_order: np.ndarray
) -> tuple[np.ndarray, list[int]]:
    """Center update that replaces zero-weight rows with picked data columns.

    ``rescue_order`` ranks sample columns worst-first; successive dead
    clusters take successive columns from it.
    """
    nums, weights = _center_sums(data, u, m)
    dead = np.flatnonzero(weights == 0.0)
    safe = np.where(weights == 0.0, 1.0, weights)
    v = nums / safe[:, None]
    for slot, cluster in enumerate(dead):
        v[cluster] = data[:, rescue_order[slot % rescue_order.size]]
    return v, dead.tolist()


def fcm_objective(data, partition: FuzzyPartition, centers: Centers) -> float:
    """Weighted within-cluster scatter: sum of u^m times squared distance."""
    d2 = squared_distances(data, centers.v)
    return float(((partition.u**partition.fuzzifier_m) * d2).sum())


def defuzzify(partition: FuzzyPartition) -> np.ndarray:
    """Hard labels per sample: argmax membership, ties to the lowest index."""
    return partition.u.argmax(axis=0)


def random_partition(c: int, n: int, fuzzifier_m: float, rng) -> FuzzyPartition:
    """Uniformly random memberships, column-normalized onto the simplex."""
    u = rng.random((c, n))
    return FuzzyPartition(u / u.sum(axis=0), fuzzifier_m)


class FcmResult(NamedTuple):
    partition: FuzzyPartition
    centers: Centers
    objective_trace: np.ndarray


def fcm_fit(
    data,
    c: int,
    fuzzifier_m: float = 2.0,
    *,
    seed: int = 0,
    tol: float = 1e-6,
    t_max: int = 1000,
    init: FuzzyPartition | None = None,
    observer: Callable | None = None,
) -> FcmResult:
    """Alternate membership and center updates until the objective settles.

    Starts from random column-normalized memberships (or ``init``). Stops
    when the objective changes by at most ``tol * max(1, |J|)`` between
    iterations, or after ``t_max`` iterations. The returned trace holds the
    initial objective followed by one value per iteration.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DataError(f"data must be (features, samples), got shape {data.shape}")
    n = data.shape[1]
    if not 1 <= c <= n:
        raise DataError(f"need 1 <= c <= {n} samples, got c={c}")
    if t_max < 1:
        raise DataError("t_max must be at least 1")

    if init is not None:
        if init.u.shape != (c, n):
            raise DataError(
                f"init membership shape {init.u.shape} does not match ({c}, {n})"
            )
        part = FuzzyPartition(init.u, fuzzifier_m)
    else:
        part = random_partition(c, n, fuzzifier_m, np.random.default_rng(seed))

    # Ranks samples farthest-from-any-center first; used only if a cluster dies.
    def rescue_order(v):
        return np.argsort(-squared_distances(data, v).min(axis=0), kind="stable")

    v, _ = _centers_with_rescue(
        data, part.u, fuzzifier_m, np.arange(n)
    )
    trace = [fcm_objective(data, part, Centers(v))]
    u = part.u
    for t in range(1, t_max + 1):
        u = _memberships_from_sq(squared_distances(data, v), fuzzifier_m)
        v, _ = _centers_with_rescue(data, u, fuzzifier_m, rescue_order(v))
        d2 = squared_distances(data, v)
        j = float(((u**fuzzifier_m) * d2).sum())
        trace.append(j)
        if observer is not None:
            observer(t, u, v)
        if abs(trace[-2] - j) <= tol * max(1.0, abs(j)):
            break
    return FcmResult(
        FuzzyPartition(u, fuzzifier_m), Centers(v), np.asarray(trace)
    )
