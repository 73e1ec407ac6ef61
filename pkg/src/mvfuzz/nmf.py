"""Nonnegative factorization with one coefficient matrix shared across views.

Multiplicative updates only rescale entries, so zeros stay zero and
nonnegativity is preserved exactly. A small floor keeps denominators away
from zero without disturbing fixed points beyond that floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .dataset import MultiViewDataset
from .errors import DataError

# Additive floor for multiplicative-update denominators.
EPS_DIV = 1e-12


@dataclass(frozen=True)
class HiddenFactorization:
    """Per-view bases (features_k x rank) and a shared coefficient (rank x n)."""

    basis: tuple[np.ndarray, ...]
    coeff: np.ndarray

    def __post_init__(self):
        coeff = np.asarray(self.coeff, dtype=np.float64)
        if coeff.ndim != 2:
            raise DataError(f"coeff must be 2-D, got shape {coeff.shape}")
        r, n = coeff.shape
        if coeff.min() < 0:
            raise DataError("coeff must be nonnegative")
        frozen = []
        for k, p in enumerate(self.basis):
            arr = np.asarray(p, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != r:
                raise DataError(
                    f"basis {k} must have shape (features, {r}), got {arr.shape}"
                )
            if arr.min() < 0:
                raise DataError(f"basis {k} must be nonnegative")
            if r > arr.shape[0]:
                raise DataError(
                    f"rank {r} exceeds the {arr.shape[0]} features of view {k}"
                )
            arr = arr.copy()
            arr.setflags(write=False)
            frozen.append(arr)
        if r > n:
            raise DataError(f"rank {r} exceeds the number of samples {n}")
        coeff = coeff.copy()
        coeff.setflags(write=False)
        object.__setattr__(self, "basis", tuple(frozen))
        object.__setattr__(self, "coeff", coeff)

    @property
    def rank(self) -> int:
        return self.coeff.shape[0]


def reconstruction_error(x, basis, coeff) -> float:
    """Squared Frobenius norm of ``x - basis @ coeff``."""
    x = np.asarray(x, dtype=np.float64)
    basis = np.asarray(basis, dtype=np.float64)
    coeff = np.asarray(coeff, dtype=np.float64)
    if x.shape != (basis.shape[0], coeff.shape[1]) or basis.shape[1] != coeff.shape[0]:
        raise DataError(
            f"shapes do not multiply: x {x.shape}, basis {basis.shape}, "
            f"coeff {coeff.shape}"
        )
    resid = x - basis @ coeff
    return float((resid * resid).sum())


def update_basis_step(x, basis, coeff) -> np.ndarray:
    """One multiplicative step on the basis for fixed coefficients."""
    x = np.asarray(x, dtype=np.float64)
    basis = np.asarray(basis, dtype=np.float64)
    coeff = np.asarray(coeff, dtype=np.float64)
    num = x @ coeff.T
    den = basis @ (coeff @ coeff.T) + EPS_DIV
    return basis * (num / den)


def _shared_coeff_step(views, bases, coeff) -> np.ndarray:
    num = np.zeros_like(coeff)
    den = np.zeros((coeff.shape[0], coeff.shape[0]))
    for x, p in zip(views, bases):
        num += p.T @ x
        den += p.T @ p
    return coeff * (num / (den @ coeff + EPS_DIV))


def max_rank(ds: MultiViewDataset) -> int:
    """Largest admissible factorization rank for a dataset."""
    return min(min(ds.view_dims), ds.n_samples)


class SharedNmfResult(NamedTuple):
    factorization: HiddenFactorization
    objective_trace: np.ndarray


def shared_nmf_fit(
    ds: MultiViewDataset,
    r: int,
    *,
    seed: int = 0,
    tol: float = 1e-6,
    t_max: int = 1000,
    observer: Callable | None = None,
) -> SharedNmfResult:
    """Factor every view against one shared coefficient matrix.

    Minimizes the summed squared reconstruction error with alternating
    multiplicative updates (all bases, then the coefficient matrix) from a
    uniform random start. Trace and stop rule work as in fcm_fit.
    """
    if any(v.min() < 0 for v in ds.views):
        raise DataError("shared_nmf_fit needs nonnegative data")
    if not 1 <= r <= max_rank(ds):
        raise DataError(
            f"rank must lie in [1, {max_rank(ds)}] for this dataset, got {r}"
        )
    if t_max < 1:
        raise DataError("t_max must be at least 1")
    rng = np.random.default_rng(seed)
    bases = [rng.uniform(0.0, 1.0, size=(d, r)) for d in ds.view_dims]
    coeff = rng.uniform(0.0, 1.0, size=(r, ds.n_samples))

    def total_error():
        return sum(
            reconstruction_error(x, p, coeff) for x, p in zip(ds.views, bases)
        )

    trace = [total_error()]
    for t in range(1, t_max + 1):
        bases = [update_basis_step(x, p, coeff) for x, p in zip(ds.views, bases)]
        coeff = _shared_coeff_step(ds.views, bases, coeff)
        j = total_error()
        trace.append(j)
        if observer is not None:
            observer(t, bases, coeff)
        if abs(trace[-2] - j) <= tol * max(1.0, abs(j)):
            break
    return SharedNmfResult(
        HiddenFactorization(tuple(bases), coeff), np.asarray(trace)
    )
