import numpy as np
import pytest

from mvfuzz import MultiViewDataset, SyntheticSpec, generate_synthetic


@pytest.fixture
def small_ds():
    """A 3-cluster two-view dataset that every algorithm separates easily."""
    spec = SyntheticSpec(n=45, c_true=3, r_true=3, view_dims=(8, 5), noise_sigma=0.0, seed=11)
    return generate_synthetic(spec)


@pytest.fixture
def noisy_ds():
    spec = SyntheticSpec(n=45, c_true=3, r_true=3, view_dims=(8, 5), noise_sigma=0.05, seed=11)
    return generate_synthetic(spec)


def random_dataset(rng, n=20, dims=(4, 3), labels=None):
    """Unstructured nonnegative views, for shape and invariant checks."""
    views = tuple(rng.uniform(0.0, 1.0, size=(d, n)) for d in dims)
    return MultiViewDataset(views=views, labels=labels)
