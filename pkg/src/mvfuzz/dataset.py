"""Multi-view data: container, CSV loading, normalization, synthetic generation.

Every view is stored as a ``(features, samples)`` array so that column ``i``
of each view describes the same sample. CSV files on disk use the transposed
layout (one sample per row), which is what the loader and writer expect.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    out = np.array(values, dtype=dtype, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MultiViewDataset:
    """K feature matrices sharing a sample axis, plus optional labels.

    Parameters
    ----------
    views:
        Sequence of 2-D arrays, each ``(features_k, samples)``. All views
        must agree on the number of samples (at least 2).
    labels:
        Optional integer vector of length ``samples`` with ground truth
        cluster ids. Metrics require it; fitting does not.
    view_names:
        Optional names, one per view. Defaults to ``view_0 .. view_{K-1}``.
    """

    views: tuple[np.ndarray, ...]
    labels: np.ndarray | None = None
    view_names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.views) < 1:
            raise DataError("a dataset needs at least one view")
        frozen = []
        n_ref = None
        for k, view in enumerate(self.views):
            arr = np.asarray(view, dtype=np.float64)
            if arr.ndim != 2:
                raise DataError(f"view {k} must be 2-D, got shape {arr.shape}")
            if arr.shape[0] < 1:
                raise DataError(f"view {k} has no features")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"view {k} contains non-finite values")
            if n_ref is None:
                n_ref = arr.shape[1]
            elif arr.shape[1] != n_ref:
                raise DataError(
                    f"view {k} has {arr.shape[1]} samples, expected {n_ref}"
                )
            frozen.append(_frozen_array(arr))
        if n_ref < 2:
            raise DataError(f"need at least 2 samples, got {n_ref}")
        object.__setattr__(self, "views", tuple(frozen))

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != n_ref:
                raise DataError(
                    f"labels must be a vector of length {n_ref}, "
                    f"got shape {labels.shape}"
                )
            if not np.issubdtype(labels.dtype, np.integer):
                raise DataError("labels must be integers")
            object.__setattr__(self, "labels", _frozen_array(labels, np.int64))

        names = tuple(self.view_names) or tuple(
            f"view_{k}" for k in range(len(self.views))
        )
        if len(names) != len(self.views):
            raise DataError(
                f"{len(names)} view names given for {len(self.views)} views"
            )
        object.__setattr__(self, "view_names", names)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[1]

    @property
    def view_dims(self) -> tuple[int, ...]:
        return tuple(v.shape[0] for v in self.views)

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise DataError("this dataset has no ground-truth labels")
        return self.labels


def _read_matrix_csv(path: str | Path, header: bool) -> np.ndarray:
    """Parse one CSV of samples-as-rows into a float array."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {width}"
                )
            parsed = []
            for col, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column {col}: "
                        f"non-numeric value {cell.strip()!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def _read_labels(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    values = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}: expected an integer, got {text!r}"
                ) from None
    if not values:
        raise DataError(f"{path}: no labels found")
    return np.array(values, dtype=np.int64)


def load_multiview(
    view_paths,
    label_path: str | Path | None = None,
    *,
    header: bool = False,
    view_names=None,
) -> MultiViewDataset:
    """Load one CSV per view (samples as rows) plus an optional label file.

    The label file holds one integer per line. Raises DataError with the
    offending file and location on any parse or shape problem.
    """
    paths = [Path(p) for p in view_paths]
    if not paths:
        raise DataError("no view files given")
    views = []
    n_ref = None
    for path in paths:
        matrix = _read_matrix_csv(path, header)
        if n_ref is None:
            n_ref = matrix.shape[0]
        elif matrix.shape[0] != n_ref:
            raise DataError(
                f"{path}: has {matrix.shape[0]} samples, "
                f"other views have {n_ref}"
            )
        views.append(matrix.T)
    labels = None
    if label_path is not None:
        labels = _read_labels(label_path)
        if labels.shape[0] != n_ref:
            raise DataError(
                f"{label_path}: {labels.shape[0]} labels for {n_ref} samples"
            )
    names = tuple(view_names) if view_names else tuple(p.stem for p in paths)
    return MultiViewDataset(tuple(views), labels, names)


def save_multiview(ds: MultiViewDataset, out_dir: str | Path) -> list[Path]:
    """Write one ``view_k.csv`` per view (samples as rows) and ``labels.csv``.

    Returns the written paths. Values use repr precision so a reload
    round-trips exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for k, view in enumerate(ds.views):
        path = out / f"view_{k}.csv"
        np.savetxt(path, view.T, delimiter=",", fmt="%.17g")
        written.append(path)
    if ds.labels is not None:
        path = out / "labels.csv"
        np.savetxt(path, ds.labels, fmt="%d")
        written.append(path)
    return written


def normalize_minmax(ds: MultiViewDataset) -> MultiViewDataset:
    """Rescale each feature row of each view to [0, 1].

    Constant features map to 0. Applying the function twice gives the
    same result as applying it once.
    """
    views = []
    for view in ds.views:
        lo = view.min(axis=1, keepdims=True)
        span = view.max(axis=1, keepdims=True) - lo
        flat = span[:, 0] == 0.0
        safe = np.where(span == 0.0, 1.0, span)
        scaled = (view - lo) / safe
        scaled[flat, :] = 0.0
        views.append(scaled)
    return MultiViewDataset(tuple(views), ds.labels, ds.view_names)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a clustered synthetic dataset built from planted factors.

    ``n`` samples are split as evenly as possible across ``c_true``
    clusters. A nonnegative coefficient matrix with ``r_true`` rows carries
    the cluster structure; each view mixes it through its own nonnegative
    basis and optionally adds Gaussian noise (clamped at zero).
    """

    n: int
    c_true: int
    r_true: int
    view_dims: tuple[int, ...]
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "view_dims", tuple(int(d) for d in self.view_dims))
        if self.c_true < 2:
            raise DataError("c_true must be at least 2")
        if self.n < self.c_true:
            raise DataError("n must be at least c_true")
        if self.r_true < 1:
            raise DataError("r_true must be at least 1")
        if not self.view_dims:
            raise DataError("view_dims must not be empty")
        if any(d < 1 for d in self.view_dims):
            raise DataError("every view dimension must be positive")
        if self.noise_sigma < 0:
            raise DataError("noise_sigma must be nonnegative")


def _planted_factors(rng: np.random.Generator, spec: SyntheticSpec):
    """Draw labels, coefficient matrix and per-view bases for a spec."""
    sizes = np.full(spec.c_true, spec.n // spec.c_true, dtype=np.int64)
    sizes[: spec.n % spec.c_true] += 1
    labels = np.repeat(np.arange(spec.c_true), sizes)

    prototypes = rng.uniform(0.05, 0.35, size=(spec.c_true, spec.r_true))
    for j in range(spec.c_true):
        prototypes[j, j % spec.r_true] += 1.4
    jitter = rng.uniform(0.0, 0.12, size=(spec.r_true, spec.n))
    coeff = prototypes[labels].T + jitter

    bases = tuple(
        rng.uniform(0.1, 1.0, size=(d, spec.r_true)) for d in spec.view_dims
    )
    return labels, coeff, bases


def synthetic_factorization(spec: SyntheticSpec):
    """Return ``(raw_views, bases, coeff, labels)`` for a spec, noise free.

    The raw views are the exact products ``basis @ coeff``, useful as a
    certificate that a rank ``r_true`` factorization with zero error exists.
    """
    rng = np.random.default_rng(spec.seed)
    labels, coeff, bases = _planted_factors(rng, spec)
    raw_views = tuple(p @ coeff for p in bases)
    return raw_views, bases, coeff, labels


def generate_synthetic(spec: SyntheticSpec) -> MultiViewDataset:
    """Build the dataset a spec describes: mix, add noise, clamp, normalize."""
    rng = np.random.default_rng(spec.seed)
    labels, coeff, bases = _planted_factors(rng, spec)
    views = []
    for basis in bases:
        x = basis @ coeff
        if spec.noise_sigma > 0:
            x = x + rng.normal(0.0, spec.noise_sigma, size=x.shape)
        views.append(np.maximum(x, 0.0))
    raw = MultiViewDataset(tuple(views), labels)
    return normalize_minmax(raw)
