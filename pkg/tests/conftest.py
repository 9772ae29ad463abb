import numpy as np
import pytest

from gpopt import load_csv_dataset, make_synthetic_credit_csv


@pytest.fixture(scope="session")
def surrogate_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "credit_surrogate.csv"
    make_synthetic_credit_csv(path)
    return str(path)


@pytest.fixture(scope="session")
def surrogate_dataset(surrogate_csv):
    return load_csv_dataset(surrogate_csv, "approved")


def random_kernel_points(rng: np.random.Generator, n: int, dims: int) -> np.ndarray:
    return rng.uniform(-3.0, 3.0, size=(n, dims))
