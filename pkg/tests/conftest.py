import numpy as np
import pytest

from thzirs.sim import ScenarioConfig, generate_scenario


def make_scenario(k=2, n=3, l=None, m=4, seed=0, trial=0, eps=0.1, **kw):
    """Small random instance on the default radio with an m x m panel."""
    cfg = ScenarioConfig(num_tx=k, num_rx=k if l is None else l, num_irs=n, mx=m, my=m,
                         seed=seed, csi_error=eps, **kw)
    return generate_scenario(cfg, trial)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
