import numpy as np
import pytest

from maxlinks import (ChannelSet, Scenario, SchemeConfig, SimParams, Topology,
                      build_scenario, noise_power, trial_rng)


def make_scenario(gains, fading, params=None, noise_mw=None):
    """Scenario with explicit propagation state (topology is a placeholder)."""
    gains = np.asarray(gains, dtype=float)
    fading = np.asarray(fading, dtype=complex)
    params = params if params is not None else SimParams()
    k = gains.shape[0]
    topo = Topology(tx=np.zeros((k, 2)), rx=np.zeros((k, 2)))
    if noise_mw is None:
        noise_mw = noise_power(params)
    return Scenario(params=params, topology=topo,
                    channels=ChannelSet(gains=gains, fading=fading,
                                        noise_power_mw=noise_mw))


def random_scenario(seed, pair_count, config: SchemeConfig, params=None):
    params = params if params is not None else SimParams()
    return build_scenario(params, pair_count, config, trial_rng(seed, 0, 0))


@pytest.fixture
def table_params():
    return SimParams()
