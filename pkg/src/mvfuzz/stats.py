"""Rank aggregation over score tables: Friedman test plus Holm step-down.

Ranks are assigned per dataset row (best score gets rank 1, ties share the
average). The Friedman statistic uses the classic chi-square form

    chi2 = 12 N / (k (k + 1)) * (sum_i R_i^2 - k (k + 1)^2 / 4)

on average ranks R_i, referred to a chi-square with k - 1 degrees of
freedom. Holm's procedure then compares the best-ranked algorithm against
the others with z = (R_i - R_0) / sqrt(k (k + 1) / (6 N)) and two-sided
normal p-values against step-down thresholds alpha / (k - 1), alpha / (k - 2), ...

The chi-square and normal tail probabilities are evaluated locally (series
and continued-fraction forms of the regularized incomplete gamma function,
and erfc), so this module needs no statistics library.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ScoreTable:
    """Scores with datasets as rows and algorithms as columns."""

    scores: np.ndarray
    algorithms: tuple[str, ...]
    datasets: tuple[str, ...]
    higher_is_better: bool = True

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise DataError(f"scores must be 2-D, got shape {scores.shape}")
        n, k = scores.shape
        if k < 2:
            raise DataError("need at least 2 algorithms")
        if n < 2:
            raise DataError("need at least 2 dataset rows")
        if not np.all(np.isfinite(scores)):
            raise DataError("scores contain non-finite values")
        if len(self.algorithms) != k:
            raise DataError(f"{len(self.algorithms)} names for {k} algorithm columns")
        if len(set(self.algorithms)) != k:
            raise DataError("duplicated algorithm name")
        if len(self.datasets) != n:
            raise DataError(f"{len(self.datasets)} names for {n} dataset rows")
        if len(set(self.datasets)) != n:
            raise DataError("duplicated dataset name")
        scores = scores.copy()
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "datasets", tuple(self.datasets))


@dataclass(frozen=True)
class FriedmanResult:
    algorithms: tuple[str, ...]
    avg_ranks: np.ndarray
    chi_square: float
    p_value: float
    alpha: float
    reject: bool
    n_datasets: int


@dataclass(frozen=True)
class HolmComparison:
    algorithm: str
    z: float
    p_value: float
    threshold: float
    reject: bool


@dataclass(frozen=True)
class HolmResult:
    control: str
    standard_error: float
    alpha: float
    comparisons: tuple[HolmComparison, ...]


def _row_ranks(values: np.ndarray, higher_is_better: bool) -> np.ndarray:
    """Ranks within one row, best = 1, ties averaged."""
    keyed = -values if higher_is_better else values
    order = np.argsort(keyed, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and keyed[order[j + 1]] == keyed[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def average_ranks(table: ScoreTable) -> np.ndarray:
    per_row = [_row_ranks(row, table.higher_is_better) for row in table.scores]
    return np.vstack(per_row).mean(axis=0)


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _gamma_p_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma by power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(10000):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    """Regularized upper incomplete gamma by continued fraction (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    frac = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return frac * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution."""
    if x < 0:
        return 1.0
    if x == 0:
        return 1.0
    a = df / 2.0
    half = x / 2.0
    if half < a + 1.0:
        return 1.0 - _gamma_p_series(a, half)
    return _gamma_q_contfrac(a, half)


def friedman(table: ScoreTable, alpha: float = 0.05) -> FriedmanResult:
    """Test whether the k algorithms rank differently across N datasets."""
    n, k = table.scores.shape
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    ranks = average_ranks(table)
    chi2 = (12.0 * n / (k * (k + 1.0))) * (
        float((ranks**2).sum()) - k * (k + 1.0) ** 2 / 4.0
    )
    p = _chi2_sf(chi2, k - 1)
    return FriedmanResult(
        algorithms=table.algorithms,
        avg_ranks=ranks,
        chi_square=chi2,
        p_value=p,
        alpha=alpha,
        reject=p < alpha,
        n_datasets=n,
    )


def holm_posthoc(
    fr: FriedmanResult, n_datasets: int | None = None, alpha: float | None = None
) -> HolmResult:
    """Compare the best-ranked algorithm against all others, step-down.

    Comparisons are ordered by descending z. The j-th comparison (1-based)
    is tested at alpha / (k - j); once one fails, no later one can reject.
    """
    n = fr.n_datasets if n_datasets is None else n_datasets
    alpha = fr.alpha if alpha is None else alpha
    k = len(fr.algorithms)
    if n < 1:
        raise DataError("need at least one dataset")
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    se = math.sqrt(k * (k + 1.0) / (6.0 * n))
    control = int(np.argmin(fr.avg_ranks))
    others = [i for i in range(k) if i != control]
    z = {i: (fr.avg_ranks[i] - fr.avg_ranks[control]) / se for i in others}
    others.sort(key=lambda i: (-z[i], i))
    comparisons = []
    alive = True
    for j, i in enumerate(others, start=1):
        p = min(1.0, 2.0 * _normal_sf(abs(z[i])))
        threshold = alpha / (k - j)
        reject = alive and p < threshold
        if not reject:
            alive = False
        comparisons.append(
            HolmComparison(
                algorithm=fr.algorithms[i],
                z=float(z[i]),
                p_value=p,
                threshold=threshold,
                reject=reject,
            )
        )
    return HolmResult(
        control=fr.algorithms[control],
        standard_error=se,
        alpha=alpha,
        comparisons=tuple(comparisons),
    )


def read_score_csv(path: str | Path, *, higher_is_better: bool = True) -> ScoreTable:
    """Read a score table: header of algorithm names, one dataset per row.

    The first header cell labels the dataset column and is ignored; every
    other cell must be numeric.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    algorithms = tuple(name.strip() for name in rows[0][1:])
    if not algorithms:
        raise DataError(f"{path}: header names no algorithm columns")
    datasets = []
    scores = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(algorithms) + 1:
            raise DataError(
                f"{path}: row {lineno} has {len(row)} cells, "
                f"expected {len(algorithms) + 1}"
            )
        datasets.append(row[0].strip())
        values = []
        for col, cell in enumerate(row[1:], start=2):
            try:
                values.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: row {lineno}, column {col}: "
                    f"non-numeric value {cell.strip()!r}"
                ) from None
        scores.append(values)
    return ScoreTable(
        np.array(scores), algorithms, tuple(datasets), higher_is_better
    )


def load_bundled_scores(metric: str) -> ScoreTable:
    """Published benchmark scores shipped with the package ("ri" or "nmi")."""
    metric = metric.lower()
    if metric not in ("ri", "nmi"):
        raise DataError(f"unknown bundled table {metric!r}; use 'ri' or 'nmi'")
    resource = resources.files("mvfuzz").joinpath(f"data/benchmark_{metric}.csv")
    with resources.as_file(resource) as path:
        return read_score_csv(path)


def format_friedman(result: FriedmanResult) -> str:
    lines = ["algorithm,average_rank"]
    for name, rank in zip(result.algorithms, result.avg_ranks):
        lines.append(f"{name},{rank:.4f}")
    lines.append(f"chi_square,{result.chi_square:.6f}")
    lines.append(f"p_value,{result.p_value:.6f}")
    lines.append(f"reject_at_{result.alpha:g},{str(result.reject).lower()}")
    return "\n".join(lines)


def format_holm(result: HolmResult) -> str:
    lines = [f"control,{result.control}", "i,algorithm,z,p_value,holm,reject"]
    m = len(result.comparisons)
    for j, comp in enumerate(result.comparisons):
        lines.append(
            f"{m - j},{comp.algorithm},{comp.z:.6f},{comp.p_value:.6f},"
            f"{comp.threshold:.6f},{str(comp.reject).lower()}"
        )
    return "\n".join(lines)


def write_friedman_csv(result: FriedmanResult, path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["algorithm", "average_rank"])
        for name, rank in zip(result.algorithms, result.avg_ranks):
            writer.writerow([name, repr(float(rank))])
        writer.writerow(["chi_square", repr(result.chi_square)])
        writer.writerow(["p_value", repr(result.p_value)])
        writer.writerow(["alpha", repr(result.alpha)])
        writer.writerow(["reject", str(result.reject).lower()])


def write_holm_csv(result: HolmResult, path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["i", "algorithm", "z", "p_value", "holm", "reject"])
        m = len(result.comparisons)
        for j, comp in enumerate(result.comparisons):
            writer.writerow(
                [
                    m - j,
                    comp.algorithm,
                    repr(comp.z),
                    repr(comp.p_value),
                    repr(comp.threshold),
                    str(comp.reject).lower(),
                ]
            )
