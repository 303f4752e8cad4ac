import os

import pytest

from harmbounds import FullLaw, observed_from_full

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def make_law_e1() -> FullLaw:
    """Single-level fixture: confounded intention, null-ish trial signal.

    Marginal strata (0.1, 0.3, 0.2, 0.4); everyone intending treatment
    would die under it, nobody intending to skip it would.
    """
    return FullLaw(
        levels=("l0",),
        p_level={"l0": 1.0},
        p_astar={"l0": 0.3},
        p_strata={("l0", 1): (1 / 3, 0.0, 2 / 3, 0.0),
                  ("l0", 0): (0.0, 3 / 7, 0.0, 4 / 7)},
        p_r1={"l0": 0.5},
        p_treat={"l0": 0.5},
    )


@pytest.fixture
def law_e1() -> FullLaw:
    return make_law_e1()


@pytest.fixture
def obs_e1(law_e1):
    return observed_from_full(law_e1)


@pytest.fixture
def e1_law_path() -> str:
    return os.path.join(DATA_DIR, "e1.law")


@pytest.fixture
def pen3_util_path() -> str:
    return os.path.join(DATA_DIR, "surv_pen3.util")
