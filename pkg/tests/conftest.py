import pathlib

import pytest

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def two_assets_csv() -> pathlib.Path:
    path = DATA_DIR / "two_assets_2003_2012.csv"
    assert path.exists(), "fixture missing; regenerate with tests/data/make_two_assets_csv.py"
    return path
