import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from influence import PosetBuilder, ZitterPath
from influence.simulation import TAG_STEP_LEFT, TAG_STEP_RIGHT

settings.register_profile(
    "ci", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")


def make_five_step_poset():
    """Five-emission walk (right, left, right, left, right) with two observers.

    Anchors: w1 and w2 both forward-project to l1; w1 forward-projects to r1
    but w2 to r2 (so w2 does not precede r1); w3's emission arrives at r2.
    """
    b = PosetBuilder()
    b.add_chain("walker", ["w1", "w2", "w3", "w4", "w5"])
    b.add_chain("obs_right", ["r1", "r2", "r3"])
    b.add_chain("obs_left", ["l1", "l2"])
    for src, dst in [("w1", "r1"), ("w2", "l1"), ("w3", "r2"), ("w4", "l2"), ("w5", "r3")]:
        b.add_influence(src, dst)
    return b.freeze()


def make_ladder_poset(n: int = 12, lag: int = 3, drop_edge: int | None = None):
    """Two coordinated observer chains exchanging influence.

    Every left event li sends to r(i+1); every right event ri sends to
    q(i+lag).  drop_edge=i omits the r_i -> l_(i+lag) edge, breaking
    coordination.
    """
    b = PosetBuilder()
    rights = [f"r{i}" for i in range(1, n + 1)]
    lefts = [f"l{i}" for i in range(1, n + 1)]
    b.add_chain("right", rights)
    b.add_chain("left", lefts)
    for i in range(1, n + 1):
        if i + lag <= n and i != drop_edge:
            b.add_influence(f"r{i}", f"l{i + lag}")
        if i + 1 <= n:
            b.add_influence(f"l{i}", f"r{i + 1}")
    return b.freeze()


def make_path(tags):
    """ZitterPath from explicit emission tags (counts bookkeeping)."""
    tags = np.asarray(tags, dtype=np.int8)
    right = np.cumsum(tags == TAG_STEP_RIGHT, dtype=np.float64)
    left = np.cumsum(tags == TAG_STEP_LEFT, dtype=np.float64)
    return ZitterPath(
        kind="free", tags=tags, em_dp=right, em_dq=left, k_step=1.0, seed=0
    )


@pytest.fixture
def five_step_poset():
    return make_five_step_poset()


@pytest.fixture
def ladder_poset():
    return make_ladder_poset()


@pytest.fixture
def broken_ladder_poset():
    return make_ladder_poset(drop_edge=4)
