import logging
import os
from pathlib import Path

import numpy as np
import pytest

logging.getLogger("psvm").setLevel(logging.ERROR)


def repo_data_dir() -> Path:
    env = os.environ.get("PSVM_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory) -> Path:
    """Benchmark dataset directory. The cancer CSV is materialized from
    scikit-learn if absent; other datasets must be fetched beforehand
    (scripts/fetch_datasets.py) and tests needing them skip otherwise."""
    base = repo_data_dir()
    if not base.exists():
        base = tmp_path_factory.mktemp("data")
    cancer = base / "cancer.csv"
    if not cancer.exists():
        try:
            from psvm.bench import materialize_cancer_csv
            materialize_cancer_csv(cancer)
        except ImportError:
            pass
    return base


def require_dataset(data_dir: Path, names) -> None:
    if not any((data_dir / n).exists() for n in names):
        pytest.skip(f"dataset not present (looked for {names} in {data_dir}); "
                    "run scripts/fetch_datasets.py with network access")


def two_blobs(rng: np.random.Generator, n_per: int = 30, dim: int = 2, gap: float = 4.0,
              spread: float = 0.6):
    center = np.zeros(dim)
    center[0] = gap / 2.0
    X = np.vstack([rng.normal(-center, spread, (n_per, dim)),
                   rng.normal(center, spread, (n_per, dim))])
    y = np.concatenate([-np.ones(n_per), np.ones(n_per)])
    return X, y


def random_instance(rng: np.random.Generator, m_range=(4, 51), dim_range=(2, 11)):
    """A labeled instance with both classes present, for solver cross-checks."""
    m = int(rng.integers(*m_range))
    M = int(rng.integers(*dim_range))
    X = rng.normal(size=(m, M))
    y = np.ones(m)
    y[: m // 2] = -1.0
    rng.shuffle(y)
    if abs(y.sum()) == m:
        y[0] = -y[0]
    return X, y
