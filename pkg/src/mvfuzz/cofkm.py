"""Collaborative fuzzy clustering across views.

Each view keeps its own membership matrix and centers; an exchange rate
``eta`` blends squared distances (for the membership step) and powered
memberships (for the center step) across views. ``eta = 0`` decouples the
views into independent fuzzy c-means runs.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .dataset import MultiViewDataset
from .errors import DataError
from .fcm import (
    Centers,
    FuzzyPartition,
    _memberships_from_sq,
    random_partition,
    squared_distances,
)


def heuristic_fuzzifier(n_samples: int, n_features: int) -> float:
    """Fuzzifier rule of thumb min(n, d-1) / (min(n, d-1) - 2).

    Falls back to 2.0 when the denominator would not be positive, which
    covers every dataset with 3 or fewer features.
    """
    q = min(n_samples, n_features - 1)
    if q <= 2:
        return 2.0
    return q / (q - 2.0)


class CoFkmState(NamedTuple):
    memberships: tuple[FuzzyPartition, ...]
    centers: tuple[Centers, ...]
    eta: float


class CoFkmResult(NamedTuple):
    state: CoFkmState
    objective_trace: np.ndarray


def _coupled(stack: np.ndarray, eta: float) -> np.ndarray:
    """Blend a per-view stack (K, c, n) with the mean of the other views."""
    k = stack.shape[0]
    if k == 1:
        # No other views exist, so the coupling sum is empty.
        return (1.0 - eta) * stack
    others = stack.sum(axis=0)[None, :, :] - stack
    return (1.0 - eta) * stack + (eta / (k - 1)) * others


def consensus_membership(state: CoFkmState) -> FuzzyPartition:
    """Entrywise geometric mean of the per-view memberships, renormalized.

    A column that collapses to all zeros (possible only when views assign
    crisp memberships to different clusters) falls back to a uniform split.
    """
    k = len(state.memberships)
    stack = np.stack([p.u for p in state.memberships])
    merged = np.prod(stack, axis=0) ** (1.0 / k)
    sums = merged.sum(axis=0)
    dead = sums == 0.0
    merged = merged / np.where(dead, 1.0, sums)
    if np.any(dead):
        merged[:, dead] = 1.0 / merged.shape[0]
    return FuzzyPartition(merged, state.memberships[0].fuzzifier_m)


def cofkm_fit(
    ds: MultiViewDataset,
    c: int,
    fuzzifier_m: float | None = None,
    eta: float = 0.5,
    *,
    seed: int = 0,
    tol: float = 1e-6,
    t_max: int = 1000,
    init: tuple[FuzzyPartition, ...] | None = None,
    observer: Callable | None = None,
) -> CoFkmResult:
    """Alternate coupled membership and center updates over all views.

    The fuzzifier defaults to the heuristic rule evaluated at the smallest
    view width. The trace starts with the initial objective and then holds
    one value per iteration; the stop rule matches fcm_fit.
    """
    n = ds.n_samples
    big_k = ds.n_views
    if not 1 <= c <= n:
        raise DataError(f"need 1 <= c <= {n} samples, got c={c}")
    if not 0.0 <= eta < 1.0:
        raise DataError(f"eta must lie in [0, 1), got {eta}")
    if t_max < 1:
        raise DataError("t_max must be at least 1")
    if fuzzifier_m is None:
        fuzzifier_m = heuristic_fuzzifier(n, min(ds.view_dims))
    m = float(fuzzifier_m)
    if m <= 1.0:
        raise DataError("fuzzifier must be greater than 1")

    if init is not None:
        if len(init) != big_k:
            raise DataError(f"{len(init)} initial memberships for {big_k} views")
        for part in init:
            if part.u.shape != (c, n):
                raise DataError(
                    f"init membership shape {part.u.shape} does not match ({c}, {n})"
                )
        u_stack = np.stack([FuzzyPartition(p.u, m).u for p in init])
    else:
        rng = np.random.default_rng(seed)
        u_stack = np.stack(
            [random_partition(c, n, m, rng).u for _ in range(big_k)]
        )

    def center_pass(u_stack):
        """Centers from coupled membership weights, one view at a time."""
        coupled_w = _coupled(u_stack**m, eta)
        vs = []
        for k, view in enumerate(ds.views):
            nums = coupled_w[k] @ view.T
            weights = coupled_w[k].sum(axis=1)
            dead = weights == 0.0
            v = nums / np.where(dead, 1.0, weights)[:, None]
            if np.any(dead):
                # Re-seed dead centers on samples far from the view mean.
                spread = ((view - view.mean(axis=1, keepdims=True)) ** 2).sum(axis=0)
                far = np.argsort(-spread, kind="stable")
                for slot, cluster in enumerate(np.flatnonzero(dead)):
                    v[cluster] = view[:, far[slot % n]]
            vs.append(v)
        return vs

    def objective(u_stack, vs):
        coupled_w = _coupled(u_stack**m, eta)
        total = 0.0
        for k, view in enumerate(ds.views):
            total += float((coupled_w[k] * squared_distances(view, vs[k])).sum())
        return total

    vs = center_pass(u_stack)
    trace = [objective(u_stack, vs)]
    for t in range(1, t_max + 1):
        d2_stack = np.stack(
            [squared_distances(view, vs[k]) for k, view in enumerate(ds.views)]
        )
        blended = _coupled(d2_stack, eta)
        u_stack = np.stack(
            [_memberships_from_sq(blended[k], m) for k in range(big_k)]
        )
        vs = center_pass(u_stack)
        j = objective(u_stack, vs)
        trace.append(j)
        if observer is not None:
            observer(t, u_stack, vs)
        if abs(trace[-2] - j) <= tol * max(1.0, abs(j)):
            break

    state = CoFkmState(
        tuple(FuzzyPartition(u_stack[k], m) for k in range(big_k)),
        tuple(Centers(v) for v in vs),
        eta,
    )
    return CoFkmResult(state, np.asarray(trace))
