"""Seeded Monte Carlo driver: sweeps, trial execution and aggregation.

Every (scheme, K, M, power-cap) combination is a cell; every trial draws an
independent realization from a substream keyed by (master seed, cell index,
trial index), so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericError, ParameterError
from .mimo import Scheme, SchemeConfig
from .scenario import SimParams, build_scenario, trial_rng
from .selection import backtracking_search, exhaustive_search, \
    feasibility_oracle, select_max_links


@dataclass(frozen=True)
class Cell:
    """One sweep point."""

    index: int
    scheme: Scheme
    pair_count: int
    rx_antennas: int
    pt_dbm: float

    def key(self) -> tuple:
        return (self.scheme, self.pair_count, self.rx_antennas, self.pt_dbm)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep definition plus execution options."""

    params: SimParams = SimParams()
    schemes: tuple[Scheme, ...] = (Scheme.BEAMFORMING,)
    pair_counts: tuple[int, ...] = (10,)
    antenna_counts: tuple[int, ...] = (4,)
    pt_dbm_values: tuple[float, ...] | None = None  # None: use params.max_power_dbm
    trials: int = 100
    workers: int = 1
    allow_failures: bool = False  # record numeric failures instead of raising

    def __post_init__(self) -> None:
        if not self.schemes or not self.pair_counts or not self.antenna_counts:
            raise ParameterError("sweep lists must be nonempty")
        if self.pt_dbm_values is not None and len(self.pt_dbm_values) == 0:
            raise ParameterError("pt_dbm_values must be nonempty when given")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if any(k < 1 for k in self.pair_counts):
            raise ParameterError("pair counts must be >= 1")
        if any(m < 1 for m in self.antenna_counts):
            raise ParameterError("antenna counts must be >= 1")

    @property
    def master_seed(self) -> int:
        return self.params.rng_seed

    def cells(self) -> list[Cell]:
        pts = self.pt_dbm_values
        if pts is None:
            pts = (self.params.max_power_dbm,)
        out = []
        index = 0
        for scheme in self.schemes:
            for pair_count in self.pair_counts:
                for rx_antennas in self.antenna_counts:
                    for pt_dbm in pts:
                        out.append(Cell(index, scheme, pair_count,
                                        rx_antennas, float(pt_dbm)))
                        index += 1
        return out


@dataclass(frozen=True)
class TrialRecord:
    cell_index: int
    trial: int
    scheme: Scheme
    pair_count: int
    rx_antennas: int
    pt_dbm: float
    n_max: int
    idf_calls: int
    ms: float


@dataclass(frozen=True)
class CellAggregate:
    scheme: Scheme
    pair_count: int
    rx_antennas: int
    pt_dbm: float
    mean_nmax: float
    stderr: float
    mean_idf_calls: float
    trials: int


@dataclass(frozen=True)
class TrialFailure:
    cell_index: int
    trial: int
    error: str


@dataclass(frozen=True, eq=False)
class RunResult:
    config: ExperimentConfig
    cells: list[Cell]
    records: list[TrialRecord]
    aggregates: list[CellAggregate]
    failures: list[TrialFailure] = field(default_factory=list)

    def by_cell(self) -> dict[tuple, CellAggregate]:
        return {(a.scheme, a.pair_count, a.rx_antennas, a.pt_dbm): a
                for a in self.aggregates}

    def records_for(self, cell: Cell) -> list[TrialRecord]:
        return [r for r in self.records if r.cell_index == cell.index]


def run_one_trial(params: SimParams, cell: Cell, master_seed: int,
                  trial: int) -> TrialRecord:
    """Build the realization for (cell, trial) and search it."""
    cell_params = dataclasses.replace(params, max_power_dbm=cell.pt_dbm)
    config = SchemeConfig(cell.scheme, cell.rx_antennas)
    rng = trial_rng(master_seed, cell.index, trial)
    scenario = build_scenario(cell_params, cell.pair_count, config, rng)
    start = time.perf_counter()
    result = select_max_links(scenario, config)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return TrialRecord(
        cell_index=cell.index, trial=trial, scheme=cell.scheme,
        pair_count=cell.pair_count, rx_antennas=cell.rx_antennas,
        pt_dbm=cell.pt_dbm, n_max=result.n_max, idf_calls=result.idf_calls,
        ms=elapsed_ms)


def _run_chunk(args) -> tuple[list[TrialRecord], list[TrialFailure]]:
    params, cell, master_seed, trial_lo, trial_hi, allow_failures = args
    records: list[TrialRecord] = []
    failures: list[TrialFailure] = []
    for trial in range(trial_lo, trial_hi):
        try:
            records.append(run_one_trial(params, cell, master_seed, trial))
        except NumericError as exc:
            if not allow_failures:
                raise
            failures.append(TrialFailure(cell.index, trial, str(exc)))
    return records, failures


def _aggregate(cell: Cell, records: Sequence[TrialRecord]) -> CellAggregate:
    n = len(records)
    nmax = np.array([r.n_max for r in records], dtype=float)
    calls = np.array([r.idf_calls for r in records], dtype=float)
    stderr = float(nmax.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return CellAggregate(
        scheme=cell.scheme, pair_count=cell.pair_count,
        rx_antennas=cell.rx_antennas, pt_dbm=cell.pt_dbm,
        mean_nmax=float(nmax.mean()) if n else 0.0,
        stderr=stderr,
        mean_idf_calls=float(calls.mean()) if n else 0.0,
        trials=n)


def run_trials(config: ExperimentConfig) -> RunResult:
    """Run every cell of the sweep and aggregate per cell.

    Results are merged in (cell index, trial index) order, so the output is
    identical for any worker count.
    """
    cells = config.cells()
    chunk = max(1, config.trials // max(1, config.workers * 4))
    tasks = []
    for cell in cells:
        for lo in range(0, config.trials, chunk):
            hi = min(lo + chunk, config.trials)
            tasks.append((config.params, cell, config.master_seed, lo, hi,
                          config.allow_failures))

    records: list[TrialRecord] = []
    failures: list[TrialFailure] = []
    if config.workers == 1:
        outputs = map(_run_chunk, tasks)
        for recs, fails in outputs:
            records.extend(recs)
            failures.extend(fails)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for recs, fails in pool.map(_run_chunk, tasks):
                records.extend(recs)
                failures.extend(fails)

    records.sort(key=lambda r: (r.cell_index, r.trial))
    failures.sort(key=lambda f: (f.cell_index, f.trial))
    by_index: dict[int, list[TrialRecord]] = {c.index: [] for c in cells}
    for record in records:
        by_index[record.cell_index].append(record)
    aggregates = [_aggregate(cell, by_index[cell.index]) for cell in cells]
    return RunResult(config=config, cells=cells, records=records,
                     aggregates=aggregates, failures=failures)


def running_mean(values: Iterable[float]) -> np.ndarray:
    """Cumulative mean after each trial; the convergence-vs-trials view."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return arr
    return np.cumsum(arr) / np.arange(1, arr.size + 1)


@dataclass(frozen=True)
class ValidationRow:
    scheme: Scheme
    rx_antennas: int
    trial: int
    n_max_backtracking: int
    n_max_exhaustive: int
    calls_backtracking: int
    calls_exhaustive: int


@dataclass(frozen=True, eq=False)
class ValidationReport:
    rows: list[ValidationRow]

    @property
    def mismatches(self) -> int:
        return sum(1 for r in self.rows
                   if r.n_max_backtracking != r.n_max_exhaustive)


def validate_equivalence(params: SimParams, schemes: Sequence[Scheme],
                         pair_count: int, antenna_counts: Sequence[int],
                         trials: int, cap: int = 15) -> ValidationReport:
    """Backtracking vs exhaustive search on shared random scenarios.

    Both searches run against one feasibility oracle per scenario, so any
    size mismatch is a search bug, not sampling noise.
    """
    if pair_count > cap:
        raise ParameterError(
            f"validation over {pair_count} pairs exceeds the cap ({cap})")
    rows: list[ValidationRow] = []
    cell_index = 0
    for scheme in schemes:
        for rx_antennas in antenna_counts:
            config = SchemeConfig(scheme, rx_antennas)
            for trial in range(trials):
                rng = trial_rng(params.rng_seed, cell_index, trial)
                scenario = build_scenario(params, pair_count, config, rng)
                oracle = feasibility_oracle(scenario, config)
                back = backtracking_search(oracle, pair_count)
                full = exhaustive_search(oracle, pair_count, cap=cap)
                rows.append(ValidationRow(
                    scheme=scheme, rx_antennas=rx_antennas, trial=trial,
                    n_max_backtracking=back.n_max,
                    n_max_exhaustive=full.n_max,
                    calls_backtracking=back.idf_calls,
                    calls_exhaustive=full.idf_calls))
            cell_index += 1
    return ValidationReport(rows=rows)
