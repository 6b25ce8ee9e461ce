import warnings

import pytest

from conncontract.forksim import estimate_pc
from conncontract.params import (
    DEFAULT_FIT,
    ChannelParams,
    EconParams,
    NetworkParams,
    reference_grid,
)
from conncontract.profiles import build_types

REFERENCE_SEED = 2024


@pytest.fixture(scope="session")
def env():
    return NetworkParams(), ChannelParams(), DEFAULT_FIT, EconParams()


@pytest.fixture(scope="session")
def default_types(env):
    net, ch, fit, econ = env
    return build_types(reference_grid(), mode="grid", net=net, channel=ch, fit=fit, econ=econ)


@pytest.fixture(scope="session")
def reference_pc_samples():
    # z=100, p_l=0.2, 2000 trials per bucket; shared by the simulator and acceptance tests
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return estimate_pc(100, 0.2, 2000, REFERENCE_SEED)
