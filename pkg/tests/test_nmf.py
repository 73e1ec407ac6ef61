import numpy as np
import pytest

from mvfuzz import (
    DataError,
    HiddenFactorization,
    MultiViewDataset,
    SyntheticSpec,
    max_rank,
    reconstruction_error,
    shared_nmf_fit,
    synthetic_factorization,
    update_basis_step,
)
from tests.conftest import random_dataset


def test_reconstruction_error_exact_product_is_zero():
    rng = np.random.default_rng(0)
    p = rng.uniform(size=(5, 2))
    h = rng.uniform(size=(2, 7))
    assert reconstruction_error(p @ h, p, h) == 0.0


def test_reconstruction_error_zero_factors():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    p = np.zeros((2, 1))
    h = np.zeros((1, 2))
    assert reconstruction_error(x, p, h) == float((x * x).sum())


def test_reconstruction_error_hand_value():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    p = np.array([[1.0], [1.0]])
    h = np.array([[1.0, 1.0]])
    assert reconstruction_error(x, p, h) == 14.0


def test_reconstruction_error_shape_mismatch():
    with pytest.raises(DataError, match="shapes"):
        reconstruction_error(np.ones((2, 2)), np.ones((2, 1)), np.ones((2, 2)))


def test_basis_step_fixed_point_on_exact_product():
    rng = np.random.default_rng(1)
    p = rng.uniform(0.1, 1.0, size=(6, 3))
    h = rng.uniform(0.1, 1.0, size=(3, 8))
    stepped = update_basis_step(p @ h, p, h)
    np.testing.assert_allclose(stepped, p, rtol=1e-9)


def test_basis_step_keeps_zeros_and_nonnegativity():
    rng = np.random.default_rng(2)
    p = rng.uniform(size=(4, 2))
    p[1, 0] = 0.0
    p[3, 1] = 0.0
    h = rng.uniform(size=(2, 5))
    x = rng.uniform(size=(4, 5))
    for _ in range(25):
        p = update_basis_step(x, p, h)
        assert p[1, 0] == 0.0
        assert p[3, 1] == 0.0
        assert p.min() >= 0.0


def test_basis_step_never_increases_error():
    rng = np.random.default_rng(3)
    x = rng.uniform(size=(5, 9))
    p = rng.uniform(size=(5, 2))
    h = rng.uniform(size=(2, 9))
    before = reconstruction_error(x, p, h)
    for _ in range(50):
        p = update_basis_step(x, p, h)
        after = reconstruction_error(x, p, h)
        assert after <= before + 1e-8 * max(1.0, before)
        before = after


def _rank1_grid_oracle(x):
    """Brute-force best rank-1 nonnegative fit over a dense parameter grid.

    For fixed unit-ish p the optimal h is closed form, so gridding p's
    direction is enough for a 3x2 matrix.
    """
    best = np.inf
    for a in np.linspace(0.0, 1.0, 201):
        for b in np.linspace(0.0, 1.0, 201):
            for c in np.linspace(0.0, 1.0, 201)[:: 4]:
                p = np.array([[a], [b], [c]])
                denom = float(a * a + b * b + c * c)
                if denom == 0.0:
                    continue
                h = np.maximum(p.T @ x / denom, 0.0)
                best = min(best, reconstruction_error(x, p, h))
    return best


def test_alternating_steps_reach_rank1_oracle():
    rng = np.random.default_rng(4)
    x = rng.uniform(size=(3, 2))
    p = rng.uniform(size=(3, 1))
    h = rng.uniform(size=(1, 2))
    for _ in range(200):
        p = update_basis_step(x, p, h)
        # Least-squares oracle step for h, clipped to stay nonnegative.
        h = np.maximum(np.linalg.lstsq(p, x, rcond=None)[0], 0.0)
    assert reconstruction_error(x, p, h) <= _rank1_grid_oracle(x) + 1e-6


def test_factorization_validation():
    with pytest.raises(DataError, match="nonnegative"):
        HiddenFactorization((np.ones((3, 2)),), -np.ones((2, 4)))
    with pytest.raises(DataError, match="nonnegative"):
        HiddenFactorization((-np.ones((3, 2)),), np.ones((2, 4)))
    with pytest.raises(DataError, match="rank 3 exceeds"):
        HiddenFactorization((np.ones((2, 3)),), np.ones((3, 4)))
    with pytest.raises(DataError, match="exceeds the number of samples"):
        HiddenFactorization((np.ones((4, 3)),), np.ones((3, 2)))
    fac = HiddenFactorization((np.ones((4, 2)),), np.ones((2, 5)))
    assert fac.rank == 2


def test_max_rank():
    rng = np.random.default_rng(5)
    assert max_rank(random_dataset(rng, n=20, dims=(4, 9))) == 4
    assert max_rank(random_dataset(rng, n=3, dims=(10, 8))) == 3


def test_fit_rank_bounds():
    rng = np.random.default_rng(6)
    ds = random_dataset(rng, n=10, dims=(4, 6))
    with pytest.raises(DataError, match="rank"):
        shared_nmf_fit(ds, 0)
    with pytest.raises(DataError, match="rank"):
        shared_nmf_fit(ds, 5)


def test_fit_rejects_negative_data():
    ds = MultiViewDataset((np.array([[1.0, -0.5], [0.0, 2.0]]),))
    with pytest.raises(DataError, match="nonnegative"):
        shared_nmf_fit(ds, 1)


def test_fit_trace_monotone_and_factors_nonnegative():
    rng = np.random.default_rng(7)
    ds = random_dataset(rng, n=30, dims=(6, 9))

    def watch(t, bases, coeff):
        assert coeff.min() >= 0.0
        for p in bases:
            assert p.min() >= 0.0

    result = shared_nmf_fit(ds, 3, seed=1, t_max=150, observer=watch)
    trace = result.objective_trace
    drops = np.diff(trace)
    assert np.all(drops <= 1e-8 * np.maximum(1.0, np.abs(trace[:-1])))


def test_fit_reaches_zero_error_certificate():
    # The generator guarantees an exact rank-r factorization exists.
    for seed in range(3):
        spec = SyntheticSpec(n=30, c_true=3, r_true=3, view_dims=(7, 5), seed=seed)
        raw_views, _, _, _ = synthetic_factorization(spec)
        ds = MultiViewDataset(raw_views)
        norm = sum(float((x * x).sum()) for x in raw_views)
        result = shared_nmf_fit(ds, 3, seed=seed, tol=0.0, t_max=2000)
        assert result.objective_trace[-1] <= 1e-6 * norm


def test_single_view_fit_is_classical_nmf():
    rng = np.random.default_rng(8)
    x = rng.uniform(size=(6, 20))
    ds = MultiViewDataset((x,))
    result = shared_nmf_fit(ds, 2, seed=3, t_max=300)
    fac = result.factorization
    assert len(fac.basis) == 1
    np.testing.assert_allclose(
        result.objective_trace[-1],
        reconstruction_error(x, fac.basis[0], fac.coeff),
    )
    # The final error sits well below the trivial all-zero factorization.
    assert result.objective_trace[-1] < 0.2 * float((x * x).sum())


def test_fit_deterministic():
    rng = np.random.default_rng(9)
    ds = random_dataset(rng, n=12, dims=(5, 4))
    a = shared_nmf_fit(ds, 2, seed=4, t_max=80)
    b = shared_nmf_fit(ds, 2, seed=4, t_max=80)
    np.testing.assert_array_equal(a.objective_trace, b.objective_trace)
    np.testing.assert_array_equal(a.factorization.coeff, b.factorization.coeff)
