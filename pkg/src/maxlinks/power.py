"""QoS power control: target-tracking power updates and feasibility decisions.

A candidate pair set is feasible when some power allocation gives every
active stream an MMSE SINR at or above the threshold while every pair stays
within the transmit power cap. The decision runs the fixed-point power
iteration from zero and stops on the first of three events: a pair exceeds
the cap (infeasible), the current state already meets the QoS (feasible), or
the iteration budget runs out (declared infeasible).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import NumericError, ParameterError
from .mimo import EffectiveChannel, SchemeConfig, effective_channel
from .scenario import Scenario, SimParams

# Relative slack for SINR-vs-threshold comparisons; absorbs rounding at
# fixed points that sit exactly on the threshold.
SINR_SLACK = _kernels.SINR_SLACK

PairSet = tuple[int, ...]


class InfeasibleCause(Enum):
    POWER_EXCEEDED = "power_exceeded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    """Outcome of the feasibility decision for one pair set.

    On a feasible verdict, powers_mw (K, L), weights (K, L, D) and sinrs
    (K, L) hold the final state with zero rows outside the active set; they
    are None otherwise.
    """

    feasible: bool
    cause: InfeasibleCause | None
    iterations: int
    powers_mw: np.ndarray | None = None
    weights: np.ndarray | None = None
    sinrs: np.ndarray | None = None


def normalize_pairs(pairs: Iterable[int], pair_count: int) -> PairSet:
    """Validate a pair set: 1-based labels, in range, strictly increasing."""
    out = tuple(int(p) for p in pairs)
    if any(p < 1 or p > pair_count for p in out):
        raise ParameterError(f"pair labels must lie in 1..{pair_count}: {out}")
    if len(set(out)) != len(out):
        raise ParameterError(f"pair set has duplicate labels: {out}")
    return tuple(sorted(out))


def _context(scenario: Scenario | None, config: SchemeConfig,
             params: SimParams | None,
             ec: EffectiveChannel | None) -> tuple[EffectiveChannel, SimParams]:
    if ec is None:
        if scenario is None:
            raise ParameterError("either a scenario or an effective channel is required")
        ec = effective_channel(scenario, config)
    if params is None:
        if scenario is None:
            raise ParameterError("params are required when no scenario is given")
        params = scenario.params
    return ec, params


def _active_powers(powers, ec: EffectiveChannel, act: np.ndarray) -> np.ndarray:
    """Validate a (K, L) power state that must be zero off the active set."""
    p = np.asarray(powers, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    if p.shape != (ec.pair_count, ec.streams):
        raise ParameterError(
            f"power array shape {np.shape(powers)} does not match "
            f"(pairs, streams) = {(ec.pair_count, ec.streams)}")
    if np.any(p < 0):
        raise ParameterError("powers must be nonnegative")
    mask = np.ones(ec.pair_count, dtype=bool)
    mask[act] = False
    if np.any(p[mask] != 0):
        raise ParameterError("powers must be zero outside the active pair set")
    return p


def _solve_state(ec: EffectiveChannel, act: np.ndarray,
                 powers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched MMSE solves at one power state.

    Returns x = Phi^-1 h with shape (A, L, D) and the quadratic forms
    q = h^H Phi^-1 h with shape (A, L).
    """
    gout = ec.weighted_outer
    total = np.einsum('jm,ajmde->ade', powers, gout[act])
    hd = ec.desired_vectors[act]                       # (A, L, D)
    own = gout[act, act]                               # (A, L, D, D)
    phi = total[:, None] - powers[act][..., None, None] * own \
        + ec.noise_mw * np.eye(ec.dim)
    try:
        x = np.linalg.solve(phi, hd[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"covariance solve failed: {exc}") from exc
    q = np.einsum('ald,ald->al', hd.conj(), x).real
    if not np.all(np.isfinite(q)) or np.any(q <= 0):
        raise NumericError("covariance solve produced a nonpositive quadratic form")
    return x, q


def power_step(scenario: Scenario | None, config: SchemeConfig,
               pairs: Sequence[int], powers, params: SimParams | None = None,
               ec: EffectiveChannel | None = None) -> np.ndarray:
    """One application of the power-update mapping at the given state.

    For each active pair and stream, the MMSE weight for the current
    interference state is computed, and the new power is the smallest value
    that would meet the SINR threshold against that weighted interferer sum
    plus noise. Pairs outside the active set stay at zero.
    """
    ec, params = _context(scenario, config, params, ec)
    pairs = normalize_pairs(pairs, ec.pair_count)
    act = np.asarray(pairs, dtype=np.int64) - 1
    p = _active_powers(powers, ec, act)
    new_powers = np.zeros((ec.pair_count, ec.streams))
    if not pairs:
        return new_powers

    x, q = _solve_state(ec, act, p)
    w = x / q[..., None]
    rho_kk = ec.direct_gains[act]

    # Weighted interferer sum: every other (pair, stream) contribution as
    # seen through this stream's weight, own other stream included.
    z = np.einsum('ald,ajmd->aljm', w.conj(), ec.vectors[act])
    g2 = np.abs(z) ** 2
    full = np.einsum('jm,aj,aljm->al', p, ec.gains[act], g2)
    a_idx = np.arange(len(act))[:, None]
    l_idx = np.arange(ec.streams)[None, :]
    g_own = g2[a_idx, l_idx, act[:, None], l_idx]
    interference = full - p[act] * rho_kk[:, None] * g_own

    w_norm2 = np.einsum('ald,ald->al', w.conj(), w).real
    new_powers[act] = params.sinr_threshold * \
        (interference + ec.noise_mw * w_norm2) / rho_kk[:, None]
    return new_powers


def is_supported(scenario: Scenario | None, config: SchemeConfig,
                 pairs: Sequence[int], powers,
                 params: SimParams | None = None,
                 ec: EffectiveChannel | None = None) -> bool:
    """True when the given power state already meets the QoS for every active
    stream and every active pair is within the power cap."""
    ec, params = _context(scenario, config, params, ec)
    pairs = normalize_pairs(pairs, ec.pair_count)
    if not pairs:
        return True
    act = np.asarray(pairs, dtype=np.int64) - 1
    p = _active_powers(powers, ec, act)
    if np.any(p[act].sum(axis=1) > params.max_power_mw):
        return False
    _, q = _solve_state(ec, act, p)
    sinr = p[act] * ec.direct_gains[act][:, None] * q
    return bool(np.all(sinr >= params.sinr_threshold * (1.0 - SINR_SLACK)))


def _iterate_numpy(ec: EffectiveChannel, act: np.ndarray, gamma: float,
                   pt_mw: float, imax: int):
    """Reference implementation of the decision loop (numpy path)."""
    n_active = len(act)
    hd = ec.desired_vectors[act]
    rho_kk = ec.direct_gains[act]
    q_cur = np.einsum('ald,ald->al', hd.conj(), hd).real / ec.noise_mw
    threshold = gamma * (1.0 - SINR_SLACK)
    p_full = np.zeros((ec.pair_count, ec.streams))
    sinr = np.zeros((n_active, ec.streams))
    for n in range(1, imax + 1):
        p_next = gamma / (rho_kk[:, None] * q_cur)
        if np.any(p_next.sum(axis=1) > pt_mw):
            return _kernels.POWER_EXCEEDED, n, p_next, sinr
        p_full[act] = p_next
        _, q_next = _solve_state(ec, act, p_full)
        sinr = p_next * rho_kk[:, None] * q_next
        if np.all(sinr >= threshold):
            return _kernels.FEASIBLE, n, p_next, sinr
        q_cur = q_next
    return _kernels.ITERATION_LIMIT, imax, p_next, sinr


def determine_feasibility(scenario: Scenario | None, config: SchemeConfig,
                          pairs: Sequence[int],
                          params: SimParams | None = None,
                          ec: EffectiveChannel | None = None,
                          use_fast: bool | None = None) -> FeasibilityResult:
    """Decide whether the pair set can hold the SINR target under the power cap.

    Starts the power iteration from zero and applies, in order after each
    update: the power-cap check (infeasible), the QoS check at the updated
    state (feasible), and the iteration budget (infeasible). A numeric
    failure raises instead of returning an infeasible verdict.
    """
    ec, params = _context(scenario, config, params, ec)
    pairs = normalize_pairs(pairs, ec.pair_count)
    shape = (ec.pair_count, ec.streams)
    if not pairs:
        return FeasibilityResult(
            feasible=True, cause=None, iterations=1,
            powers_mw=np.zeros(shape),
            weights=np.zeros(shape + (ec.dim,), dtype=complex),
            sinrs=np.zeros(shape))

    act = np.asarray(pairs, dtype=np.int64) - 1
    gamma = params.sinr_threshold
    pt_mw = params.max_power_mw
    imax = int(params.max_iterations)

    if use_fast is None:
        use_fast = _kernels.HAVE_NUMBA
    if use_fast:
        status, n, p_act, sinr_act = _kernels.feasibility_kernel(
            ec.weighted_outer, ec.desired_vectors, ec.direct_gains,
            act, ec.noise_mw, gamma, pt_mw, imax)
    else:
        status, n, p_act, sinr_act = _iterate_numpy(ec, act, gamma, pt_mw, imax)

    if status == _kernels.NUMERIC_FAILURE:
        raise NumericError("covariance factorization failed during power iteration")
    if status == _kernels.POWER_EXCEEDED:
        return FeasibilityResult(feasible=False,
                                 cause=InfeasibleCause.POWER_EXCEEDED,
                                 iterations=int(n))
    if status == _kernels.ITERATION_LIMIT:
        return FeasibilityResult(feasible=False,
                                 cause=InfeasibleCause.ITERATION_LIMIT,
                                 iterations=int(n))

    powers = np.zeros(shape)
    powers[act] = p_act
    x, q = _solve_state(ec, act, powers)
    weights = np.zeros(shape + (ec.dim,), dtype=complex)
    weights[act] = x / q[..., None]
    sinrs = np.zeros(shape)
    sinrs[act] = sinr_act
    return FeasibilityResult(feasible=True, cause=None, iterations=int(n),
                             powers_mw=powers, weights=weights, sinrs=sinrs)
