"""Effective channels, MMSE receive combining and SINR for three MIMO schemes.

Schemes: single-antenna transmit with receive diversity (1xM), two-antenna
Alamouti block coding (2xM), and dominant-eigenmode transmit beamforming
(MxM). All three are reduced to the same abstraction: per pair and stream, a
desired effective vector plus effective interferer vectors of a common
dimension D (M, or 2M for the block code).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import NumericError, ParameterError
from .scenario import Scenario

# Power-method stopping rule: relative change of the Rayleigh quotient.
EIG_TOL = 1e-12
EIG_MAX_ITERATIONS = 50_000

# Components smaller than this are ignored when fixing the phase convention.
PHASE_EPS = 1e-9


class Scheme(Enum):
    RX_DIVERSITY = "rxdiv"
    STBC = "stbc"
    BEAMFORMING = "beamforming"

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        key = str(name).strip().lower()
        for scheme in cls:
            if key == scheme.value:
                return scheme
        raise ParameterError(
            f"unknown scheme {name!r}; expected one of "
            f"{', '.join(s.value for s in cls)}")


@dataclass(frozen=True)
class SchemeConfig:
    """MIMO scheme plus receive-antenna count; stream count follows the scheme."""

    scheme: Scheme
    rx_antennas: int

    def __post_init__(self) -> None:
        if self.rx_antennas < 1:
            raise ParameterError("rx_antennas must be >= 1")

    @property
    def streams(self) -> int:
        return 2 if self.scheme is Scheme.STBC else 1

    @property
    def tx_antennas(self) -> int:
        if self.scheme is Scheme.RX_DIVERSITY:
            return 1
        if self.scheme is Scheme.STBC:
            return 2
        return self.rx_antennas

    @property
    def dim(self) -> int:
        """Dimension of the effective receive space (2M for the block code)."""
        factor = 2 if self.scheme is Scheme.STBC else 1
        return factor * self.rx_antennas


def beamforming_weight(channel_matrix: np.ndarray) -> np.ndarray:
    """Unit-norm dominant eigenvector of H^H H via power iteration.

    The returned vector is phase-normalized: its first component with
    magnitude above 1e-9 is real and nonnegative. For a degenerate top
    eigenspace any converged vector is optimal and is returned as-is
    (after phase normalization).
    """
    h = np.asarray(channel_matrix, dtype=complex)
    if h.ndim != 2 or not np.all(np.isfinite(h)):
        raise ParameterError("channel matrix must be a finite 2-D array")
    a = h.conj().T @ h
    m = a.shape[0]

    x = np.ones(m, dtype=complex) / np.sqrt(m)
    r_prev = None
    for _ in range(EIG_MAX_ITERATIONS):
        y = a @ x
        r = np.vdot(x, y).real  # Rayleigh quotient at x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # x is in the null space; for a PSD matrix this means the top
            # eigenvalue is 0 and any unit vector attains it.
            return _normalize_phase(x)
        x_next = y / ny
        if r_prev is not None and abs(r - r_prev) <= EIG_TOL * max(abs(r), 1e-300):
            return _normalize_phase(x_next)
        x, r_prev = x_next, r
    raise NumericError("power iteration did not converge")


def _normalize_phase(u: np.ndarray) -> np.ndarray:
    u = u / np.linalg.norm(u)
    for component in u:
        if abs(component) > PHASE_EPS:
            return u * (component.conjugate() / abs(component))
    return u


def stbc_stack(h_first: np.ndarray, h_second: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stack the two per-antenna channels into the 2M-dim Alamouti model.

    Returns the effective vectors for the two symbols of one block:
    [h1; h2*] and [h2; -h1*]. They are orthogonal by construction.
    """
    h1 = np.asarray(h_first, dtype=complex)
    h2 = np.asarray(h_second, dtype=complex)
    if h1.shape != h2.shape or h1.ndim != 1:
        raise ParameterError("stbc_stack expects two 1-D vectors of equal length")
    return (np.concatenate([h1, h2.conj()]),
            np.concatenate([h2, -h1.conj()]))


@dataclass(eq=False)
class EffectiveChannel:
    """Per-(receiver, transmitter, stream) effective vectors for one scenario.

    vectors[k, j, l] is the dimension-D effective channel from stream l of
    Tx node j to Rx node k; the desired vector of pair k, stream l is
    vectors[k, k, l]. For beamforming each transmitter's effective vectors
    already include its own weight.
    """

    config: SchemeConfig
    gains: np.ndarray        # (K, K) power-loss ratios
    vectors: np.ndarray      # (K, K, L, D) complex
    noise_mw: float
    beam_weights: np.ndarray | None = None  # (K, M) for beamforming, else None

    @property
    def pair_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def streams(self) -> int:
        return self.vectors.shape[2]

    @property
    def dim(self) -> int:
        return self.vectors.shape[3]

    def desired(self, k: int, stream: int = 0) -> np.ndarray:
        return self.vectors[k, k, stream]

    @cached_property
    def weighted_outer(self) -> np.ndarray:
        """(K, K, L, D, D) gain-weighted outer products used by the power loops."""
        v = self.vectors
        return np.ascontiguousarray(
            self.gains[:, :, None, None, None] *
            (v[..., :, None] * v[..., None, :].conj()))

    @cached_property
    def desired_vectors(self) -> np.ndarray:
        """(K, L, D) desired effective vectors, one row per pair."""
        idx = np.arange(self.pair_count)
        return np.ascontiguousarray(self.vectors[idx, idx])

    @cached_property
    def direct_gains(self) -> np.ndarray:
        """(K,) gains of the intended links."""
        idx = np.arange(self.pair_count)
        return np.ascontiguousarray(self.gains[idx, idx])


def effective_channel(scenario: Scenario, config: SchemeConfig) -> EffectiveChannel:
    """Build the effective-channel view of a scenario for one scheme."""
    fading = scenario.channels.fading
    k_count = scenario.pair_count
    m = config.rx_antennas
    if fading.shape != (k_count, k_count, config.tx_antennas, m):
        raise ParameterError(
            f"scenario fading tensor {fading.shape} does not match scheme "
            f"(expected {(k_count, k_count, config.tx_antennas, m)})")

    beam_weights = None
    if config.scheme is Scheme.RX_DIVERSITY:
        vectors = fading[:, :, 0, :][:, :, None, :].copy()
    elif config.scheme is Scheme.STBC:
        vectors = np.empty((k_count, k_count, 2, 2 * m), dtype=complex)
        for k in range(k_count):
            for j in range(k_count):
                vectors[k, j, 0], vectors[k, j, 1] = \
                    stbc_stack(fading[k, j, 0], fading[k, j, 1])
    else:
        # fading[k, j] holds per-antenna rows; the channel matrix has the
        # per-antenna vectors as columns.
        beam_weights = np.empty((k_count, m), dtype=complex)
        for j in range(k_count):
            beam_weights[j] = beamforming_weight(fading[j, j].T)
        vectors = np.empty((k_count, k_count, 1, m), dtype=complex)
        for k in range(k_count):
            for j in range(k_count):
                vectors[k, j, 0] = fading[k, j].T @ beam_weights[j]

    return EffectiveChannel(
        config=config,
        gains=scenario.channels.gains,
        vectors=vectors,
        noise_mw=scenario.channels.noise_power_mw,
        beam_weights=beam_weights,
    )


def _check_powers(powers: np.ndarray, ec: EffectiveChannel) -> np.ndarray:
    p = np.asarray(powers, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if p.shape != (ec.pair_count, ec.streams):
        raise ParameterError(
            f"power array shape {np.shape(powers)} does not match "
            f"(pairs, streams) = {(ec.pair_count, ec.streams)}")
    if np.any(p < 0):
        raise ParameterError("powers must be nonnegative")
    return p


def interference_covariance(ec: EffectiveChannel, k: int, stream: int,
                            powers: np.ndarray) -> np.ndarray:
    """Interference-plus-noise covariance seen by pair k on one stream.

    Sums gain-weighted outer products of every other (pair, stream)
    contribution; for the block code this includes the pair's own other
    stream. Inactive pairs contribute nothing because their power is zero.
    """
    p = _check_powers(powers, ec)
    if not (0 <= k < ec.pair_count and 0 <= stream < ec.streams):
        raise ParameterError("pair or stream index out of range")
    phi = ec.noise_mw * np.eye(ec.dim, dtype=complex)
    for j in range(ec.pair_count):
        for m in range(ec.streams):
            if j == k and m == stream:
                continue
            if p[j, m] == 0.0:
                continue
            v = ec.vectors[k, j, m]
            phi += p[j, m] * ec.gains[k, j] * np.outer(v, v.conj())
    return phi


def mmse_weight(phi: np.ndarray, h: np.ndarray) -> np.ndarray:
    """MMSE receive weight under the unit-gain constraint w^H h = 1.

    Solves the Hermitian system instead of forming an inverse.
    """
    try:
        x = np.linalg.solve(phi, h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"covariance solve failed: {exc}") from exc
    denom = np.vdot(h, x).real
    if not np.isfinite(denom) or denom <= 0:
        raise NumericError("covariance is not positive definite")
    return x / denom


def mmse_sinr(power_mw: float, gain: float, h: np.ndarray,
              phi: np.ndarray) -> float:
    """Post-combining SINR attained by the MMSE weight: P * rho * h^H Phi^-1 h."""
    try:
        x = np.linalg.solve(phi, h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"covariance solve failed: {exc}") from exc
    quad = np.vdot(h, x).real
    if not np.isfinite(quad) or quad <= 0:
        raise NumericError("covariance is not positive definite")
    return float(power_mw * gain * quad)


def generic_sinr(power_mw: float, gain: float, h: np.ndarray, phi: np.ndarray,
                 w: np.ndarray) -> float:
    """SINR of an arbitrary receive weight w (Rayleigh-quotient form)."""
    num = power_mw * gain * abs(np.vdot(w, h)) ** 2
    den = np.vdot(w, phi @ w).real
    if den <= 0:
        raise NumericError("weight has nonpositive interference energy")
    return float(num / den)
