import pytest

from gromov_lab.core.random import Lcg64
from gromov_lab.services.metric_core import one_point_space
from gromov_lab.storage.files import write_matrix
from tests.strategies import reals


@pytest.fixture
def unit_pair():
    return reals(0, 1)


@pytest.fixture
def three_points():
    return reals(0, 1, 3)


@pytest.fixture
def point():
    return one_point_space()


@pytest.fixture
def rng():
    return Lcg64(20240601)


@pytest.fixture
def matrix_file(tmp_path):
    """Writes a space to tmp_path/<name>.mat and returns the path as str."""

    def write(space, name="space"):
        return str(write_matrix(space, tmp_path / f"{name}.mat"))

    return write


@pytest.fixture
def bad_matrix_file(tmp_path):
    path = tmp_path / "bad.mat"
    path.write_text("3\na b c\n0 1 5\n1 0 1\n5 1 0\n", encoding="utf-8")
    return str(path)
