"""Search for the largest simultaneously supportable pair set.

Feasible pair sets are downward closed (shutting a transmitter off only
removes interference), so a depth-first search over subsets can prune every
candidate no larger than the best set already found, and an exhaustive
search can stop at the first feasible subset when enumerating large sizes
first. Pair labels are 1-based throughout this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import ParameterError
from .mimo import SchemeConfig, effective_channel
from .power import PairSet, determine_feasibility
from .scenario import Scenario, SimParams

FeasibilityOracle = Callable[[PairSet], bool]

BRUTE_FORCE_CAP = 15


class Direction(Enum):
    FORWARD = 1
    BACKWARD = 0


@dataclass(frozen=True)
class SelectionResult:
    """Largest feasible pair set found, with the oracle-call count.

    idf_calls counts every invocation of the iterative feasibility decision,
    the search-complexity metric reported by the harness.
    """

    n_max: int
    best_set: PairSet
    idf_calls: int


def _check_candidate(pairs: PairSet, pair_count: int) -> None:
    if len(pairs) == 0:
        raise ParameterError("candidate pair set must be nonempty")
    if any(p < 1 or p > pair_count for p in pairs):
        raise ParameterError(f"pair labels must lie in 1..{pair_count}: {pairs}")
    if any(a >= b for a, b in zip(pairs, pairs[1:])):
        raise ParameterError(f"pair set must be strictly increasing: {pairs}")


def next_pair_set(pairs: PairSet, direction: Direction,
                  pair_count: int) -> PairSet | None:
    """Successor of a candidate in the depth-first subset order.

    Forward direction extends the set with the next label; backward advances
    the largest label instead. When the largest label is already at the end
    of the range, the set retreats one level. Returns None once the whole
    space has been visited (candidate == {pair_count}).
    """
    pairs = tuple(int(p) for p in pairs)
    _check_candidate(pairs, pair_count)
    k_max = pairs[-1]
    if k_max < pair_count:
        if direction is Direction.FORWARD:
            return pairs + (k_max + 1,)
        return pairs[:-1] + (k_max + 1,)
    if len(pairs) > 1:
        head = pairs[:-1]
        return head[:-1] + (head[-1] + 1,)
    return None


def backtracking_search(oracle: FeasibilityOracle, pair_count: int,
                        prune: bool = True) -> SelectionResult:
    """Depth-first search for the maximum feasible pair set.

    Only candidates strictly larger than the best set found so far are
    tested (the oracle must be monotone: subsets of feasible sets are
    feasible). `prune=False` disables that skip for diagnostics; it never
    changes the result, only the call count.
    """
    if pair_count < 1:
        raise ParameterError("pair_count must be >= 1")
    candidate: PairSet = (1,)
    best: PairSet = ()
    best_size = 0
    calls = 0
    while True:
        if len(candidate) > best_size or not prune:
            calls += 1
            if oracle(candidate):
                direction = Direction.FORWARD
                if len(candidate) > best_size:
                    best = candidate
                    best_size = len(candidate)
            else:
                direction = Direction.BACKWARD
        else:
            direction = Direction.FORWARD
        if candidate == (pair_count,):
            return SelectionResult(n_max=best_size, best_set=best, idf_calls=calls)
        candidate = next_pair_set(candidate, direction, pair_count)


def exhaustive_search(oracle: FeasibilityOracle, pair_count: int,
                      cap: int = BRUTE_FORCE_CAP) -> SelectionResult:
    """Enumerate subsets by decreasing size and return the first feasible one.

    Monotone feasibility makes stopping at the first hit exact. Within a
    size, subsets are visited in lexicographic order.
    """
    if pair_count < 1:
        raise ParameterError("pair_count must be >= 1")
    if pair_count > cap:
        raise ParameterError(
            f"exhaustive search over {pair_count} pairs exceeds the cap ({cap})")
    calls = 0
    for size in range(pair_count, 0, -1):
        for subset in itertools.combinations(range(1, pair_count + 1), size):
            calls += 1
            if oracle(subset):
                return SelectionResult(n_max=size, best_set=subset, idf_calls=calls)
    return SelectionResult(n_max=0, best_set=(), idf_calls=calls)


def feasibility_oracle(scenario: Scenario, config: SchemeConfig,
                       params: SimParams | None = None) -> FeasibilityOracle:
    """Bind the iterative feasibility decision to one scenario.

    The effective channel is built once and shared across all calls.
    """
    ec = effective_channel(scenario, config)
    params = params if params is not None else scenario.params

    def oracle(pairs: PairSet) -> bool:
        return determine_feasibility(scenario, config, pairs,
                                     params=params, ec=ec).feasible

    return oracle


def select_max_links(scenario: Scenario, config: SchemeConfig,
                     params: SimParams | None = None,
                     method: str = "backtracking") -> SelectionResult:
    """Maximum number of concurrent links for one scenario.

    method is "backtracking" (default) or "exhaustive"; both return the same
    size, and the call count is the complexity metric of interest.
    """
    oracle = feasibility_oracle(scenario, config, params)
    if method == "backtracking":
        return backtracking_search(oracle, scenario.pair_count)
    if method == "exhaustive":
        return exhaustive_search(oracle, scenario.pair_count)
    raise ParameterError(f"unknown search method {method!r}")
