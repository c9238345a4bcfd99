from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest

from resources.lib.hilbert import DensityMatrix, bell_state
from resources.lib.partitions import ProductPartition, make_product_partition
from resources.lib.toolkit import Toolkit


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture
def bell() -> DensityMatrix:
    return bell_state()


@pytest.fixture
def pp22() -> ProductPartition:
    return make_product_partition([2, 2])


@pytest.fixture(autouse=True)
def toolkit_home(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Iterator[Path]:
    home = tmp_path / "home"
    monkeypatch.setenv(Toolkit.HOME_ENV, str(home))
    monkeypatch.delenv(Toolkit.DEBUG_ENV, raising=False)
    yield home
    Toolkit.set_debug(enabled=False)
