"""Random network realizations: topology, path loss, Rayleigh fading, noise.

All powers are linear milliwatts and all gains/SINRs are linear ratios inside
the library; dB and dBm appear only in configuration fields and reports.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ParameterError

if TYPE_CHECKING:
    from .mimo import SchemeConfig


def db_to_linear(value_db: float) -> float:
    """dB -> linear power ratio."""
    return 10.0 ** (np.asarray(value_db) / 10.0)


def linear_to_db(value: float) -> float:
    """Linear power ratio -> dB."""
    value = np.asarray(value)
    if np.any(value <= 0):
        raise ParameterError("dB conversion requires a positive linear value")
    return 10.0 * np.log10(value)


# dBm <-> mW use the same scaling as dB <-> ratio.
dbm_to_mw = db_to_linear
mw_to_dbm = linear_to_db


@dataclass(frozen=True)
class SimParams:
    """Physical and control parameters for one simulation.

    Defaults reproduce the reference parameter set: 46 dB loss at the 1 m
    reference distance with exponent 3, -174 dBm/Hz thermal noise, 4 dB noise
    figure, 1 MHz bandwidth, 20 dBm power cap and a 10 dB SINR target inside
    a 100 m disk.
    """

    pathloss_exponent: float = 3.0        # alpha
    reference_distance_m: float = 1.0     # d0
    reference_loss_db: float = 46.0       # loss at d0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 4.0
    bandwidth_hz: float = 1e6
    max_power_dbm: float = 20.0           # per-pair transmit power cap
    sinr_threshold_db: float = 10.0       # QoS floor at the receiver
    disk_radius_m: float = 100.0
    max_iterations: int = 200             # feasibility iteration cap
    convergence_tolerance: float = 1e-8   # relative, fixed-point self-consistency
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.pathloss_exponent > 0:
            raise ParameterError("pathloss_exponent must be > 0")
        if not self.reference_distance_m > 0:
            raise ParameterError("reference_distance_m must be > 0")
        if not self.bandwidth_hz > 0:
            raise ParameterError("bandwidth_hz must be > 0")
        if not self.disk_radius_m >= self.reference_distance_m:
            raise ParameterError("disk_radius_m must be >= reference_distance_m")
        if not self.max_iterations >= 1:
            raise ParameterError("max_iterations must be >= 1")
        if not self.convergence_tolerance > 0:
            raise ParameterError("convergence_tolerance must be > 0")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ParameterError("rng_seed must be an unsigned 64-bit integer")
        for name in ("max_power_dbm", "sinr_threshold_db", "noise_psd_dbm_hz",
                     "noise_figure_db"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def max_power_mw(self) -> float:
        return float(dbm_to_mw(self.max_power_dbm))

    @property
    def sinr_threshold(self) -> float:
        return float(db_to_linear(self.sinr_threshold_db))


@dataclass(frozen=True, eq=False)
class Topology:
    """Planar node positions for K transmit/receive pairs, in meters."""

    tx: np.ndarray  # (K, 2)
    rx: np.ndarray  # (K, 2)

    @property
    def pair_count(self) -> int:
        return self.tx.shape[0]

    def distances(self) -> np.ndarray:
        """(K, K) matrix of distances from Tx node j to Rx node k."""
        return np.linalg.norm(self.rx[:, None, :] - self.tx[None, :, :], axis=2)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Large- and small-scale propagation state for one realization."""

    gains: np.ndarray        # (K, K) power-loss ratio, Tx j -> Rx k
    fading: np.ndarray       # (K, K, n_tx, M) complex, unit-variance entries
    noise_power_mw: float


@dataclass(frozen=True, eq=False)
class Scenario:
    """One realization of node locations and channel responses."""

    params: SimParams
    topology: Topology
    channels: ChannelSet

    @property
    def pair_count(self) -> int:
        return self.topology.pair_count

    @property
    def tx_antennas(self) -> int:
        return self.channels.fading.shape[2]

    @property
    def rx_antennas(self) -> int:
        return self.channels.fading.shape[3]

    def to_json(self) -> str:
        """Self-describing record for debugging and replay."""
        payload = {
            "params": asdict(self.params),
            "tx_positions_m": self.topology.tx.tolist(),
            "rx_positions_m": self.topology.rx.tolist(),
            "gains": self.channels.gains.tolist(),
            "fading_real": self.channels.fading.real.tolist(),
            "fading_imag": self.channels.fading.imag.tolist(),
            "noise_power_mw": self.channels.noise_power_mw,
        }
        return json.dumps(payload, sort_keys=True)


def scenario_from_json(text: str) -> Scenario:
    data = json.loads(text)
    fading = np.asarray(data["fading_real"], dtype=float) \
        + 1j * np.asarray(data["fading_imag"], dtype=float)
    return Scenario(
        params=SimParams(**data["params"]),
        topology=Topology(
            tx=np.asarray(data["tx_positions_m"], dtype=float),
            rx=np.asarray(data["rx_positions_m"], dtype=float),
        ),
        channels=ChannelSet(
            gains=np.asarray(data["gains"], dtype=float),
            fading=fading,
            noise_power_mw=float(data["noise_power_mw"]),
        ),
    )


def trial_rng(master_seed: int, *subkey: int) -> np.random.Generator:
    """Independent substream for (master seed, cell index, trial index, ...).

    The same key always yields the same stream, so serial and parallel runs
    see identical draws.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in subkey))
    return np.random.default_rng(seq)


def sample_topology(pair_count: int, radius_m: float, rng: np.random.Generator,
                    min_radius_m: float | None = None) -> Topology:
    """Draw 2K node positions i.i.d. uniform over a disk of the given radius.

    Uses polar sampling (r = radius * sqrt(u), uniform angle). Tx points are
    drawn first, then Rx points. min_radius_m, when given, rejects disks
    smaller than the path-loss reference distance.
    """
    if pair_count < 1:
        raise ParameterError("pair_count must be >= 1")
    if not radius_m > 0:
        raise ParameterError("radius_m must be > 0")
    if min_radius_m is not None and radius_m < min_radius_m:
        raise ParameterError(
            f"radius_m {radius_m} is below the reference distance {min_radius_m}")

    def draw(n: int) -> np.ndarray:
        r = radius_m * np.sqrt(rng.random(n))
        theta = 2.0 * np.pi * rng.random(n)
        return np.column_stack((r * np.cos(theta), r * np.sin(theta)))

    return Topology(tx=draw(pair_count), rx=draw(pair_count))


def path_gain(distance_m, params: SimParams):
    """Power-loss ratio at the given distance under the log-distance model.

    Distances below the reference distance are clamped to it, where the model
    is not defined. Accepts scalars or arrays.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ParameterError("distance must be > 0")
    d = np.maximum(d, params.reference_distance_m)
    loss_db = params.reference_loss_db + 10.0 * params.pathloss_exponent * \
        np.log10(d / params.reference_distance_m)
    gain = 10.0 ** (-loss_db / 10.0)
    return float(gain) if np.isscalar(distance_m) else gain


def noise_power(params: SimParams) -> float:
    """Receiver noise power in linear mW: thermal PSD x bandwidth x noise figure."""
    dbm = params.noise_psd_dbm_hz + 10.0 * np.log10(params.bandwidth_hz) \
        + params.noise_figure_db
    return float(dbm_to_mw(dbm))


def sample_channels(pair_count: int, tx_antennas: int, rx_antennas: int,
                    rng: np.random.Generator) -> np.ndarray:
    """(K, K, n_tx, M) tensor of i.i.d. CN(0, 1) flat-fading coefficients.

    Entry [k, j, m, :] is the channel from antenna m of Tx node j to the M
    receive antennas of Rx node k; real and imaginary parts each have
    variance 1/2 so every coefficient has unit mean-square magnitude.
    """
    if pair_count < 1 or tx_antennas < 1 or rx_antennas < 1:
        raise ParameterError("pair_count, tx_antennas, rx_antennas must be >= 1")
    shape = (pair_count, pair_count, tx_antennas, rx_antennas)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / np.sqrt(2.0)


def build_scenario(params: SimParams, pair_count: int, config: "SchemeConfig",
                   rng: np.random.Generator) -> Scenario:
    """Sample one complete network realization for the given MIMO scheme."""
    topology = sample_topology(pair_count, params.disk_radius_m, rng,
                               min_radius_m=params.reference_distance_m)
    distances = np.maximum(topology.distances(), params.reference_distance_m)
    gains = path_gain(distances, params)
    fading = sample_channels(pair_count, config.tx_antennas, config.rx_antennas, rng)
    return Scenario(
        params=params,
        topology=topology,
        channels=ChannelSet(gains=gains, fading=fading,
                            noise_power_mw=noise_power(params)),
    )
