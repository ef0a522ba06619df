import json

import numpy as np
import pytest

from maxlinks import (ParameterError, Scheme, SchemeConfig, SimParams,
                      build_scenario, mw_to_dbm, noise_power, path_gain,
                      sample_channels, sample_topology, scenario_from_json,
                      trial_rng)


@pytest.mark.parametrize("kwargs", [
    {"pathloss_exponent": 0.0},
    {"reference_distance_m": 0.0},
    {"bandwidth_hz": 0.0},
    {"disk_radius_m": 0.5},          # below the 1 m reference distance
    {"max_iterations": 0},
    {"convergence_tolerance": 0.0},
    {"rng_seed": -1},
    {"max_power_dbm": float("nan")},
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        SimParams(**kwargs)


def test_param_unit_conversions(table_params):
    assert table_params.max_power_mw == pytest.approx(100.0)
    assert table_params.sinr_threshold == pytest.approx(10.0)


def test_single_pair_topology_within_disk():
    topo = sample_topology(1, 100.0, trial_rng(3, 0))
    assert topo.tx.shape == (1, 2) and topo.rx.shape == (1, 2)
    assert np.linalg.norm(topo.tx[0]) <= 100.0
    assert np.linalg.norm(topo.rx[0]) <= 100.0


def test_topology_point_count():
    topo = sample_topology(4, 100.0, trial_rng(4, 0))
    assert topo.tx.shape == (4, 2) and topo.rx.shape == (4, 2)
    assert np.all(np.linalg.norm(topo.tx, axis=1) <= 100.0)


def test_radius_below_reference_rejected():
    with pytest.raises(ParameterError):
        sample_topology(1, 0.5, trial_rng(0, 0), min_radius_m=1.0)


def test_disk_radial_second_moment():
    # Uniform on a disk: E[(r/R)^2] = int_0^1 t^2 * 2t dt = 1/2.
    topo = sample_topology(50_000, 100.0, trial_rng(5, 0))
    r2 = (np.concatenate([topo.tx, topo.rx]) ** 2).sum(axis=1)
    assert (r2 / 100.0**2).mean() == pytest.approx(0.5, abs=0.01)


def test_path_gain_reference_values(table_params):
    # 46 dB at 1 m, then 30 dB per decade with exponent 3.
    assert path_gain(1.0, table_params) == pytest.approx(10 ** -4.6, rel=1e-12)
    assert path_gain(1.0, table_params) == pytest.approx(2.5119e-5, rel=1e-4)
    assert path_gain(10.0, table_params) == pytest.approx(10 ** -7.6, rel=1e-12)
    assert path_gain(100.0, table_params) == pytest.approx(10 ** -10.6, rel=1e-12)


def test_path_gain_monotone_and_clamped(table_params):
    d = np.linspace(1.0, 200.0, 400)
    g = path_gain(d, table_params)
    assert np.all(np.diff(g) < 0)
    assert path_gain(0.25, table_params) == path_gain(1.0, table_params)


def test_path_gain_rejects_nonpositive(table_params):
    with pytest.raises(ParameterError):
        path_gain(0.0, table_params)
    with pytest.raises(ParameterError):
        path_gain(-3.0, table_params)


def test_noise_power_reference(table_params):
    # -174 dBm/Hz + 60 dB(1 MHz) + 4 dB = -110 dBm.
    assert noise_power(table_params) == pytest.approx(1e-11, rel=1e-12)


def test_noise_power_identity_case():
    p = SimParams(noise_figure_db=0.0, bandwidth_hz=1.0)
    assert noise_power(p) == pytest.approx(10 ** -17.4, rel=1e-12)


def test_noise_power_20mhz():
    # 10*log10(2e7) = 73.01029995663981, so -174 + 73.0103 + 4 = -96.9897 dBm.
    p = SimParams(bandwidth_hz=20e6)
    assert mw_to_dbm(noise_power(p)) == pytest.approx(-96.98970004336019, abs=1e-9)


def test_channel_moments():
    h = sample_channels(1, 2, 500_000, trial_rng(6, 0))
    mag2 = np.abs(h) ** 2
    assert mag2.mean() == pytest.approx(1.0, abs=0.01)
    assert abs(h.mean()) < 0.01
    # Independence across entries and between quadrature components.
    a, b = h[0, 0, 0], h[0, 0, 1]
    assert abs(np.mean(a * b.conj())) < 0.01
    assert abs(np.corrcoef(a.real, a.imag)[0, 1]) < 0.01


def test_build_scenario_shapes(table_params):
    cfg = SchemeConfig(Scheme.RX_DIVERSITY, 2)
    sc = build_scenario(table_params, 2, cfg, trial_rng(7, 0))
    assert sc.channels.gains.shape == (2, 2)
    assert sc.channels.fading.shape == (2, 2, 1, 2)
    assert sc.channels.noise_power_mw == pytest.approx(1e-11)


@pytest.mark.parametrize("scheme,m,n_tx", [
    (Scheme.RX_DIVERSITY, 3, 1), (Scheme.STBC, 3, 2), (Scheme.BEAMFORMING, 3, 3)])
def test_tx_antenna_count_follows_scheme(table_params, scheme, m, n_tx):
    sc = build_scenario(table_params, 2, SchemeConfig(scheme, m), trial_rng(8, 0))
    assert sc.channels.fading.shape == (2, 2, n_tx, m)


def test_build_scenario_deterministic(table_params):
    cfg = SchemeConfig(Scheme.STBC, 2)
    a = build_scenario(table_params, 3, cfg, trial_rng(9, 1, 4))
    b = build_scenario(table_params, 3, cfg, trial_rng(9, 1, 4))
    assert a.to_json() == b.to_json()
    c = build_scenario(table_params, 3, cfg, trial_rng(9, 1, 5))
    assert a.to_json() != c.to_json()


def test_gain_clamp_at_reference_distance():
    # A disk as small as the reference distance forces many clamped links.
    p = SimParams(disk_radius_m=1.0)
    sc = build_scenario(p, 20, SchemeConfig(Scheme.RX_DIVERSITY, 1), trial_rng(10, 0))
    cap = path_gain(1.0, p)
    assert np.all(sc.channels.gains <= cap * (1 + 1e-12))
    assert np.any(sc.channels.gains == cap)


def test_scenario_json_roundtrip(table_params):
    cfg = SchemeConfig(Scheme.BEAMFORMING, 2)
    sc = build_scenario(table_params, 2, cfg, trial_rng(11, 0))
    back = scenario_from_json(sc.to_json())
    assert json.loads(back.to_json()) == json.loads(sc.to_json())
    assert np.array_equal(back.channels.fading, sc.channels.fading)


def test_trial_rng_streams():
    assert trial_rng(1, 2, 3).random(4).tolist() == trial_rng(1, 2, 3).random(4).tolist()
    assert trial_rng(1, 2, 3).random(4).tolist() != trial_rng(1, 2, 4).random(4).tolist()
    assert trial_rng(1, 2, 3).random(4).tolist() != trial_rng(2, 2, 3).random(4).tolist()
