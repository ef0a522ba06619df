import json
import math

import numpy as np
import pytest

from maxlinks import (ExperimentConfig, ParameterError, Scheme, SimParams,
                      emit_report, load_config_file, run_one_trial, run_trials,
                      validate_equivalence)
from maxlinks.harness import Cell, running_mean
from maxlinks.reporting import (AGGREGATE_HEADER, TRIALS_HEADER,
                                read_aggregate_csv)


def small_config(**overrides):
    base = dict(params=SimParams(rng_seed=123),
                schemes=(Scheme.BEAMFORMING,), pair_counts=(3,),
                antenna_counts=(2,), trials=5, workers=1)
    base.update(overrides)
    return ExperimentConfig(**base)


# ------------------------------------------------------------- config

@pytest.mark.parametrize("overrides", [
    {"schemes": ()}, {"pair_counts": ()}, {"antenna_counts": ()},
    {"trials": 0}, {"workers": 0}, {"pair_counts": (0,)},
    {"pt_dbm_values": ()},
])
def test_config_validation(overrides):
    with pytest.raises(ParameterError):
        small_config(**overrides)


def test_cells_enumeration_is_deterministic():
    cfg = small_config(schemes=(Scheme.RX_DIVERSITY, Scheme.STBC),
                       pair_counts=(2, 3), antenna_counts=(1, 2),
                       pt_dbm_values=(10.0, 20.0))
    cells = cfg.cells()
    assert len(cells) == 16
    assert [c.index for c in cells] == list(range(16))
    assert cells[0].key() == (Scheme.RX_DIVERSITY, 2, 1, 10.0)
    assert cells[-1].key() == (Scheme.STBC, 3, 2, 20.0)


# ------------------------------------------------------------- trials

def test_single_trial_record():
    cfg = small_config(pair_counts=(1,), antenna_counts=(1,), trials=1)
    run = run_trials(cfg)
    assert len(run.records) == 1
    rec = run.records[0]
    assert rec.n_max in (0, 1)
    assert rec.idf_calls >= 1
    assert rec.ms >= 0


def test_trial_records_identical_across_worker_counts():
    serial = run_trials(small_config(trials=12, workers=1))
    parallel = run_trials(small_config(trials=12, workers=8))
    strip = lambda r: (r.cell_index, r.trial, r.scheme, r.pair_count,
                       r.rx_antennas, r.pt_dbm, r.n_max, r.idf_calls)
    assert [strip(r) for r in serial.records] == [strip(r) for r in parallel.records]


def test_run_one_trial_is_reproducible():
    cfg = small_config()
    cell = cfg.cells()[0]
    a = run_one_trial(cfg.params, cell, cfg.master_seed, 3)
    b = run_one_trial(cfg.params, cell, cfg.master_seed, 3)
    assert (a.n_max, a.idf_calls) == (b.n_max, b.idf_calls)


def test_aggregate_stats():
    cfg = small_config(trials=8)
    run = run_trials(cfg)
    agg = run.aggregates[0]
    vals = [r.n_max for r in run.records]
    assert agg.trials == 8
    assert agg.mean_nmax == pytest.approx(np.mean(vals))
    assert agg.stderr == pytest.approx(np.std(vals, ddof=1) / math.sqrt(8))
    assert 0.0 <= agg.mean_nmax <= 3.0


def test_running_mean():
    assert running_mean([1, 2, 3]).tolist() == [1.0, 1.5, 2.0]
    assert running_mean([]).size == 0


def test_estimate_stabilizes_with_trials():
    # the running mean moves less than two standard errors between the
    # half-way point and the full run
    cfg = small_config(pair_counts=(4,), antenna_counts=(2,), trials=1000,
                       workers=2)
    run = run_trials(cfg)
    series = running_mean([r.n_max for r in run.records])
    agg = run.aggregates[0]
    assert abs(series[499] - series[999]) < 2 * agg.stderr


def test_numeric_failures_abort_unless_allowed(monkeypatch):
    import maxlinks.harness as harness
    from maxlinks.errors import NumericError

    real = harness.run_one_trial

    def flaky(params, cell, master_seed, trial):
        if trial == 2:
            raise NumericError("synthetic failure")
        return real(params, cell, master_seed, trial)

    monkeypatch.setattr(harness, "run_one_trial", flaky)
    with pytest.raises(NumericError):
        run_trials(small_config(trials=4))
    run = run_trials(small_config(trials=4, allow_failures=True))
    assert len(run.records) == 3
    assert len(run.failures) == 1
    assert run.failures[0].trial == 2
    assert run.aggregates[0].trials == 3


def test_validation_equivalence_small():
    report = validate_equivalence(SimParams(rng_seed=5), (Scheme.STBC,),
                                  4, (2,), trials=10)
    assert report.mismatches == 0
    assert len(report.rows) == 10
    assert all(r.calls_exhaustive >= 1 for r in report.rows)


# ----------------------------------------------------------- reporting

def test_emit_report_files(tmp_path):
    run = run_trials(small_config(trials=4))
    paths = emit_report(run, str(tmp_path / "out"))
    trials = (tmp_path / "out" / "trials.csv").read_text().splitlines()
    assert trials[0] == ",".join(TRIALS_HEADER)
    assert len(trials) == 5
    agg = (tmp_path / "out" / "aggregate.csv").read_text().splitlines()
    assert agg[0] == ",".join(AGGREGATE_HEADER)
    assert len(agg) == 2
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["seed"] == 123
    assert summary["empty_run"] is False
    assert len(summary["running_mean_nmax"]) == 1
    rows = read_aggregate_csv(paths["aggregate"])
    assert rows[0]["K"] == 3 and rows[0]["trials"] == 4


def test_emit_report_is_idempotent(tmp_path):
    run = run_trials(small_config(trials=4))
    emit_report(run, str(tmp_path / "a"))
    emit_report(run, str(tmp_path / "b"))
    for name in ("trials.csv", "aggregate.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_empty_run_report(tmp_path):
    run = run_trials(small_config(trials=1))
    empty = type(run)(config=run.config, cells=run.cells, records=[],
                      aggregates=[], failures=[])
    emit_report(empty, str(tmp_path))
    assert (tmp_path / "aggregate.csv").read_text() == \
        ",".join(AGGREGATE_HEADER) + "\n"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["empty_run"] is True


def test_aggregate_row_count_matches_cells(tmp_path):
    cfg = small_config(schemes=(Scheme.RX_DIVERSITY, Scheme.BEAMFORMING),
                       pair_counts=(2, 3), trials=3)
    run = run_trials(cfg)
    emit_report(run, str(tmp_path))
    agg = (tmp_path / "aggregate.csv").read_text().splitlines()
    assert len(agg) - 1 == len(cfg.cells()) == 4


# ---------------------------------------------------------- config file

def test_load_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\npairs = 1-4\n\nscheme=beamforming # inline\n"
                   "trials = 7\n")
    values = load_config_file(str(cfg))
    assert values == {"pairs": "1-4", "scheme": "beamforming", "trials": "7"}


def test_load_config_file_rejects_garbage(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a key value line\n")
    with pytest.raises(ParameterError):
        load_config_file(str(cfg))
    with pytest.raises(ParameterError):
        load_config_file(str(tmp_path / "missing.cfg"))
