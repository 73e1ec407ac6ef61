"""Joint solver: fuzzy c-means in a hidden space shared by all views.

The objective couples three pieces. Cluster scatter lives in the hidden
space (memberships and centers act on the shared coefficient matrix), a
weighted sum of per-view reconstruction errors ties the hidden space to
the data, and a Shannon entropy term spreads the view weights:

    sum_l sum_i u_li^m ||h_i - v_l||^2
        + lam * sum_k w_k ||X_k - P_k H||_F^2
        + eta * sum_k w_k ln w_k

Each iteration updates memberships, centers, bases, coefficients and view
weights in that fixed order. Every block either minimizes its subproblem
exactly or applies a multiplicative step that cannot increase it, so the
objective trace is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .dataset import MultiViewDataset
from .errors import ConfigError, DataError
from .fcm import (
    Centers,
    FuzzyPartition,
    _center_sums,
    _memberships_from_sq,
    squared_distances,
)
from .nmf import (
    EPS_DIV,
    HiddenFactorization,
    max_rank,
    reconstruction_error,
    update_basis_step,
)

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class HssConfig:
    """Solver settings: cluster count, rank, fuzzifier and regularizers.

    ``lam`` scales the reconstruction term, ``eta`` the entropy term.
    ``h_inner_steps`` is how many multiplicative coefficient steps run per
    outer iteration.
    """

    c: int
    r: int
    fuzzifier_m: float = 2.0
    lam: float = 1.0
    eta: float = 1.0
    tol: float = 1e-6
    t_max: int = 1000
    h_inner_steps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.c < 2:
            raise ConfigError("c must be at least 2")
        if self.r < 1:
            raise ConfigError("r must be at least 1")
        if self.fuzzifier_m <= 1.0:
            raise ConfigError("fuzzifier must be greater than 1")
        if self.lam <= 0:
            raise ConfigError("lam must be positive")
        if self.eta <= 0:
            raise ConfigError("eta must be positive")
        if self.tol < 0:
            raise ConfigError("tol must be nonnegative")
        if self.t_max < 1:
            raise ConfigError("t_max must be at least 1")
        if self.h_inner_steps < 1:
            raise ConfigError("h_inner_steps must be at least 1")


@dataclass(frozen=True)
class ViewWeights:
    """Nonnegative weights over views, summing to one."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise DataError(f"weights must be a nonempty vector, got {w.shape}")
        if w.min() < -WEIGHT_TOL or w.max() > 1.0 + WEIGHT_TOL:
            raise DataError("weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DataError(f"weights sum to {w.sum()!r}, not 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class HssState:
    partition: FuzzyPartition
    centers: Centers
    factorization: HiddenFactorization
    weights: ViewWeights
    view_errors: np.ndarray
    objective: float

    def __post_init__(self):
        errors = np.asarray(self.view_errors, dtype=np.float64)
        if errors.shape != self.weights.w.shape:
            raise DataError("one reconstruction error per view required")
        if errors.min() < 0:
            raise DataError("reconstruction errors must be nonnegative")
        errors = errors.copy()
        errors.setflags(write=False)
        object.__setattr__(self, "view_errors", errors)


class HssTrace(NamedTuple):
    """Objective and view weights per iteration (index 0 is the start)."""

    objective: np.ndarray
    weights: np.ndarray
    rescues: tuple[tuple[int, int], ...]


class HssResult(NamedTuple):
    state: HssState
    trace: HssTrace


def _entropy(w: np.ndarray) -> float:
    # 0 * ln 0 is taken as 0.
    positive = w[w > 0]
    return float((positive * np.log(positive)).sum())


def update_weights(view_errors, lam: float, eta: float) -> ViewWeights:
    """Exact minimizer of the weight subproblem: a softmax of -lam*D/eta.

    The exponent is shifted by its maximum before exponentiation so the
    computation cannot overflow.
    """
    errors = np.asarray(view_errors, dtype=np.float64)
    if lam <= 0 or eta <= 0:
        raise ConfigError("lam and eta must be positive")
    z = -(lam / eta) * errors
    z = z - z.max()
    e = np.exp(z)
    return ViewWeights(e / e.sum())


def objective(ds: MultiViewDataset, state: HssState, cfg: HssConfig) -> float:
    """Evaluate the full objective for an arbitrary state.

    Reconstruction errors are recomputed from the dataset rather than read
    from the state, so hand-built states evaluate correctly.
    """
    h = state.factorization.coeff
    d2 = squared_distances(h, state.centers.v)
    cluster = float(((state.partition.u**cfg.fuzzifier_m) * d2).sum())
    errors = np.array(
        [
            reconstruction_error(x, p, h)
            for x, p in zip(ds.views, state.factorization.basis)
        ]
    )
    w = state.weights.w
    return cluster + cfg.lam * float(w @ errors) + cfg.eta * _entropy(w)


def _hidden_step(views, bases, h, um, v, w, lam):
    """One multiplicative coefficient step for the joint objective.

    The numerator collects the membership-weighted centers and the
    weighted back-projections of the data; the denominator collects the
    matching positive parts of the gradient.
    """
    s = um.sum(axis=0)
    num = v.T @ um
    den = h * s[None, :]
    back = np.zeros_like(num)
    gram = np.zeros((h.shape[0], h.shape[0]))
    for x, p, wk in zip(views, bases, w):
        back += wk * (p.T @ x)
        gram += wk * (p.T @ p)
    num = num + lam * back
    den = den + lam * (gram @ h) + EPS_DIV
    return h * (num / den)


def update_hidden_step(
    ds: MultiViewDataset, state: HssState, cfg: HssConfig
) -> np.ndarray:
    """Apply ``cfg.h_inner_steps`` multiplicative steps to the coefficients."""
    h = state.factorization.coeff.copy()
    um = state.partition.u**cfg.fuzzifier_m
    for _ in range(cfg.h_inner_steps):
        h = _hidden_step(
            ds.views,
            state.factorization.basis,
            h,
            um,
            state.centers.v,
            state.weights.w,
            cfg.lam,
        )
    return h


def _reseeded_centers(h, u, m, recon_per_sample):
    """Center update that re-seeds dead clusters on badly fit samples."""
    nums, weights = _center_sums(h, u, m)
    dead = np.flatnonzero(weights == 0.0)
    v = nums / np.where(weights == 0.0, 1.0, weights)[:, None]
    worst_first = np.argsort(-recon_per_sample, kind="stable")
    for slot, cluster in enumerate(dead):
        v[cluster] = h[:, worst_first[slot % worst_first.size]]
    return v, dead.tolist()


def hss_fit(
    ds: MultiViewDataset, cfg: HssConfig, *, observer: Callable | None = None
) -> HssResult:
    """Run the joint solver on a nonnegative multi-view dataset.

    Bases and coefficients start uniform on [0, 1); the initial centers are
    ``cfg.c`` distinct random columns of the initial coefficient matrix and
    the view weights start uniform. Stops once the objective changes by at
    most ``tol * max(1, |J|)``, or after ``t_max`` iterations.

    If a cluster ever receives zero membership weight its center is
    re-seeded on the sample with the worst weighted reconstruction error;
    the iteration where that happened is recorded in the trace.
    """
    n = ds.n_samples
    big_k = ds.n_views
    if any(v.min() < 0 for v in ds.views):
        raise DataError("hss_fit needs nonnegative data; normalize first")
    if cfg.c > n:
        raise DataError(f"c={cfg.c} exceeds the number of samples {n}")
    if cfg.r > max_rank(ds):
        raise DataError(
            f"rank must lie in [1, {max_rank(ds)}] for this dataset, got {cfg.r}"
        )
    m = cfg.fuzzifier_m
    rng = np.random.default_rng(cfg.seed)
    bases = [rng.uniform(0.0, 1.0, size=(d, cfg.r)) for d in ds.view_dims]
    h = rng.uniform(0.0, 1.0, size=(cfg.r, n))
    v = h[:, rng.choice(n, size=cfg.c, replace=False)].T.copy()
    w = np.full(big_k, 1.0 / big_k)

    def recon_errors():
        return np.array(
            [reconstruction_error(x, p, h) for x, p in zip(ds.views, bases)]
        )

    errors = recon_errors()
    u = _memberships_from_sq(squared_distances(h, v), m)
    um = u**m

    def full_objective():
        cluster = float((um * squared_distances(h, v)).sum())
        return cluster + cfg.lam * float(w @ errors) + cfg.eta * _entropy(w)

    trace_obj = [full_objective()]
    trace_w = [w.copy()]
    rescues: list[tuple[int, int]] = []

    for t in range(1, cfg.t_max + 1):
        u = _memberships_from_sq(squared_distances(h, v), m)
        um = u**m
        nums, weights = _center_sums(h, u, m)
        if np.all(weights > 0.0):
            v = nums / weights[:, None]
        else:
            per_sample = np.zeros(n)
            for x, p, wk in zip(ds.views, bases, w):
                resid = x - p @ h
                per_sample += wk * (resid * resid).sum(axis=0)
            v, dead = _reseeded_centers(h, u, m, per_sample)
            rescues.extend((t, cluster) for cluster in dead)
        bases = [update_basis_step(x, p, h) for x, p in zip(ds.views, bases)]
        for _ in range(cfg.h_inner_steps):
            h = _hidden_step(ds.views, bases, h, um, v, w, cfg.lam)
        errors = recon_errors()
        w = update_weights(errors, cfg.lam, cfg.eta).w
        j = full_objective()
        trace_obj.append(j)
        trace_w.append(w.copy())
        if observer is not None:
            observer(t, u, v, bases, h, w)
        if abs(trace_obj[-2] - j) <= cfg.tol * max(1.0, abs(j)):
            break

    state = HssState(
        partition=FuzzyPartition(u, m),
        centers=Centers(v),
        factorization=HiddenFactorization(tuple(bases), h),
        weights=ViewWeights(w),
        view_errors=errors,
        objective=trace_obj[-1],
    )
    return HssResult(state, HssTrace(np.asarray(trace_obj), np.asarray(trace_w), tuple(rescues)))
