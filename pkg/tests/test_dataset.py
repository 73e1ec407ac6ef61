import numpy as np
import pytest

from mvfuzz import (
    DataError,
    MultiViewDataset,
    SyntheticSpec,
    generate_synthetic,
    load_multiview,
    normalize_minmax,
    save_multiview,
    synthetic_factorization,
)
from tests.conftest import random_dataset


def test_container_shapes_and_properties():
    ds = MultiViewDataset(
        views=(np.ones((4, 10)), np.zeros((2, 10))),
        labels=np.repeat([0, 1], 5),
    )
    assert ds.n_views == 2
    assert ds.n_samples == 10
    assert ds.view_dims == (4, 2)
    assert ds.view_names == ("view_0", "view_1")
    assert ds.labels.dtype == np.int64


def test_views_are_read_only():
    ds = MultiViewDataset(views=(np.ones((2, 3)),))
    with pytest.raises(ValueError):
        ds.views[0][0, 0] = 5.0


def test_sample_count_mismatch_rejected():
    with pytest.raises(DataError, match="samples"):
        MultiViewDataset(views=(np.ones((2, 5)), np.ones((2, 6))))


def test_non_finite_rejected():
    bad = np.ones((2, 4))
    bad[1, 2] = np.nan
    with pytest.raises(DataError, match="non-finite"):
        MultiViewDataset(views=(bad,))


def test_single_sample_rejected():
    with pytest.raises(DataError, match="at least 2 samples"):
        MultiViewDataset(views=(np.ones((3, 1)),))


def test_float_labels_rejected():
    with pytest.raises(DataError, match="integers"):
        MultiViewDataset(views=(np.ones((2, 4)),), labels=np.ones(4))


def test_label_length_checked():
    with pytest.raises(DataError, match="length 4"):
        MultiViewDataset(views=(np.ones((2, 4)),), labels=np.arange(5))


def test_require_labels():
    ds = MultiViewDataset(views=(np.ones((2, 4)),))
    with pytest.raises(DataError):
        ds.require_labels()


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    ds = random_dataset(rng, n=12, dims=(5, 3), labels=np.arange(12) % 3)
    save_multiview(ds, tmp_path)
    back = load_multiview(
        [tmp_path / "view_0.csv", tmp_path / "view_1.csv"],
        tmp_path / "labels.csv",
    )
    assert back.n_views == 2
    for a, b in zip(ds.views, back.views):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(ds.labels, back.labels)
    assert back.view_names == ("view_0", "view_1")


def test_loader_header_flag(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    with pytest.raises(DataError, match="non-numeric"):
        load_multiview([path])
    ds = load_multiview([path], header=True)
    np.testing.assert_array_equal(ds.views[0], [[1.0, 3.0], [2.0, 4.0]])


def test_loader_reports_ragged_row(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(DataError, match="row 2"):
        load_multiview([path])


def test_loader_reports_bad_cell(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("1,2\n3,oops\n")
    with pytest.raises(DataError, match="row 2, column 2"):
        load_multiview([path])


def test_loader_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_multiview([tmp_path / "nope.csv"])


def test_loader_label_count_mismatch(tmp_path):
    v = tmp_path / "v.csv"
    v.write_text("1,2\n3,4\n")
    lab = tmp_path / "y.csv"
    lab.write_text("0\n1\n0\n")
    with pytest.raises(DataError, match="3 labels for 2 samples"):
        load_multiview([v], lab)


def test_normalize_minmax_range_and_idempotence():
    rng = np.random.default_rng(9)
    views = (rng.normal(5.0, 3.0, size=(6, 30)),)
    ds = normalize_minmax(MultiViewDataset(views))
    for view in ds.views:
        assert view.min() >= 0.0
        assert view.max() <= 1.0
        np.testing.assert_allclose(view.min(axis=1), 0.0)
        np.testing.assert_allclose(view.max(axis=1), 1.0)
    again = normalize_minmax(ds)
    np.testing.assert_array_equal(ds.views[0], again.views[0])


def test_normalize_constant_feature_goes_to_zero():
    view = np.vstack([np.full(5, 7.0), np.arange(5.0)])
    ds = normalize_minmax(MultiViewDataset((view,)))
    np.testing.assert_array_equal(ds.views[0][0], np.zeros(5))
    np.testing.assert_allclose(ds.views[0][1], np.arange(5.0) / 4.0)


def test_synthetic_spec_validation():
    with pytest.raises(DataError):
        SyntheticSpec(n=5, c_true=1, r_true=2, view_dims=(3,))
    with pytest.raises(DataError):
        SyntheticSpec(n=2, c_true=3, r_true=2, view_dims=(3,))
    with pytest.raises(DataError):
        SyntheticSpec(n=5, c_true=2, r_true=0, view_dims=(3,))
    with pytest.raises(DataError):
        SyntheticSpec(n=5, c_true=2, r_true=1, view_dims=())
    with pytest.raises(DataError):
        SyntheticSpec(n=5, c_true=2, r_true=1, view_dims=(3,), noise_sigma=-0.1)


def test_generate_synthetic_shapes_and_balance():
    spec = SyntheticSpec(n=10, c_true=3, r_true=2, view_dims=(4, 6), seed=0)
    ds = generate_synthetic(spec)
    assert ds.view_dims == (4, 6)
    assert ds.n_samples == 10
    counts = np.bincount(ds.labels)
    np.testing.assert_array_equal(counts, [4, 3, 3])
    for view in ds.views:
        assert view.min() >= 0.0
        assert view.max() <= 1.0


def test_generate_synthetic_deterministic():
    spec = SyntheticSpec(n=20, c_true=2, r_true=3, view_dims=(5,), noise_sigma=0.1, seed=42)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    np.testing.assert_array_equal(a.views[0], b.views[0])
    np.testing.assert_array_equal(a.labels, b.labels)


def test_synthetic_factorization_is_exact():
    spec = SyntheticSpec(n=15, c_true=3, r_true=4, view_dims=(6, 5), seed=7)
    raw_views, bases, coeff, labels = synthetic_factorization(spec)
    assert coeff.shape == (4, 15)
    assert coeff.min() >= 0.0
    assert labels.shape == (15,)
    for x, p in zip(raw_views, bases):
        assert p.min() >= 0.0
        np.testing.assert_array_equal(x, p @ coeff)


def test_synthetic_factorization_matches_generator_labels():
    spec = SyntheticSpec(n=12, c_true=2, r_true=2, view_dims=(3,), seed=5)
    _, _, _, labels = synthetic_factorization(spec)
    ds = generate_synthetic(spec)
    np.testing.assert_array_equal(labels, ds.labels)
