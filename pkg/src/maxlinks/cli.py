"""Command-line interface.

Subcommands: simulate (config-file-driven sweep), sweep (flag-driven
cartesian sweep), fit (two-segment line from an aggregate CSV), validate
(backtracking vs exhaustive search equivalence). Exit codes: 0 success,
1 parameter error, 2 runtime/numeric error, 3 validation mismatch.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from ._version import __version__
from .errors import NumericError, ParameterError
from .fitting import fit_two_stage
from .harness import ExperimentConfig, run_trials, validate_equivalence
from .mimo import Scheme
from .reporting import emit_report, load_config_file, read_aggregate_csv
from .scenario import SimParams


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map usage errors onto exit code 1
        raise ParameterError(message)


def _int_list(text: str) -> tuple[int, ...]:
    """Comma-separated ints with a-b ranges: '1-4,8' -> (1, 2, 3, 4, 8)."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part[1:]:
                lo_text, hi_text = part[1:].split("-", 1)
                lo, hi = int(part[0] + lo_text), int(hi_text)
                if hi < lo:
                    raise ParameterError(f"bad range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise ParameterError(f"bad integer list entry {part!r}") from exc
    if not out:
        raise ParameterError(f"empty integer list: {text!r}")
    return tuple(out)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        out = tuple(float(p) for p in str(text).split(",") if p.strip())
    except ValueError as exc:
        raise ParameterError(f"bad number list {text!r}") from exc
    if not out:
        raise ParameterError(f"empty number list: {text!r}")
    return out


def _scheme_list(text: str) -> tuple[Scheme, ...]:
    if str(text).strip().lower() == "all":
        return tuple(Scheme)
    return tuple(Scheme.parse(p) for p in str(text).split(",") if p.strip())


_PARAM_KEYS = {
    "alpha": ("pathloss_exponent", float),
    "d0_m": ("reference_distance_m", float),
    "ref_loss_db": ("reference_loss_db", float),
    "noise_psd_dbm_hz": ("noise_psd_dbm_hz", float),
    "noise_figure_db": ("noise_figure_db", float),
    "bandwidth_hz": ("bandwidth_hz", float),
    "radius_m": ("disk_radius_m", float),
    "sinr_db": ("sinr_threshold_db", float),
    "imax": ("max_iterations", int),
    "seed": ("rng_seed", int),
}


def _build_config(args) -> ExperimentConfig:
    """Merge defaults, config-file values and flag overrides."""
    file_values = load_config_file(args.config) if getattr(args, "config", None) \
        else {}
    known = set(_PARAM_KEYS) | {"pairs", "antennas", "scheme", "trials",
                                "pt_dbm", "out", "workers"}
    unknown = set(file_values) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")

    params_kwargs = {}
    for key, (field, cast) in _PARAM_KEYS.items():
        if key in file_values:
            params_kwargs[field] = cast(file_values[key])
    flag_map = {"radius_m": args.radius_m, "sinr_db": args.sinr_db,
                "imax": args.imax, "seed": args.seed}
    for key, value in flag_map.items():
        if value is not None:
            field, cast = _PARAM_KEYS[key]
            params_kwargs[field] = cast(value)

    pairs = args.pairs if args.pairs is not None else \
        (_int_list(file_values["pairs"]) if "pairs" in file_values else (10,))
    antennas = args.antennas if args.antennas is not None else \
        (_int_list(file_values["antennas"]) if "antennas" in file_values else (4,))
    schemes = args.scheme if args.scheme is not None else \
        (_scheme_list(file_values["scheme"]) if "scheme" in file_values
         else (Scheme.BEAMFORMING,))
    trials = args.trials if args.trials is not None else \
        (int(file_values["trials"]) if "trials" in file_values else 100)
    pt_values = args.pt_dbm if args.pt_dbm is not None else \
        (_float_list(file_values["pt_dbm"]) if "pt_dbm" in file_values else None)
    workers = args.workers if args.workers is not None else \
        (int(file_values["workers"]) if "workers" in file_values else 1)
    if pt_values is not None and len(pt_values) == 1:
        # A single cap value is not a sweep axis; fold it into the params.
        params_kwargs["max_power_dbm"] = pt_values[0]
        pt_values = None

    params = SimParams(**params_kwargs)
    return ExperimentConfig(params=params, schemes=schemes, pair_counts=pairs,
                            antenna_counts=antennas, pt_dbm_values=pt_values,
                            trials=trials, workers=workers)


def _out_dir(args) -> str:
    if args.out:
        return args.out
    file_values = load_config_file(args.config) if getattr(args, "config", None) \
        else {}
    return file_values.get("out", "maxlinks_out")


def _cmd_run(args) -> int:
    config = _build_config(args)
    run = run_trials(config)
    paths = emit_report(run, _out_dir(args))
    for agg in run.aggregates:
        print(f"{agg.scheme.value} K={agg.pair_count} M={agg.rx_antennas} "
              f"pt={agg.pt_dbm:g}dBm: mean_nmax={agg.mean_nmax:.4f} "
              f"stderr={agg.stderr:.4f} mean_idf_calls={agg.mean_idf_calls:.1f} "
              f"trials={agg.trials}")
    if run.failures:
        print(f"failed trials: {len(run.failures)}", file=sys.stderr)
    print(f"wrote {paths['trials']}, {paths['aggregate']}, {paths['summary']}")
    return 0


def _cmd_fit(args) -> int:
    rows = read_aggregate_csv(args.aggregate_csv)
    scheme = Scheme.parse(args.fit_scheme)
    rx_antennas = args.fit_antennas
    rows = [r for r in rows if r["scheme"] == scheme.value
            and r["M"] == rx_antennas]
    if args.fit_pt_dbm is not None:
        rows = [r for r in rows if r["pt_dbm"] == args.fit_pt_dbm]
    pts = sorted({r["pt_dbm"] for r in rows})
    if len(pts) > 1:
        raise ParameterError(
            f"aggregate holds several power caps {pts}; select one with --pt-dbm")
    if not rows:
        raise ParameterError("no aggregate rows match the scheme/antenna filter")
    points = [(r["K"], r["mean_nmax"]) for r in rows]
    fit = fit_two_stage(points, rx_antennas)
    a1, b1, a2, b2 = (round(v, 6) + 0.0 for v in (fit.a1, fit.b1, fit.a2, fit.b2))
    print(f"low-K segment  (K <= {rx_antennas}): a1={a1:.6f} b1={b1:.6f}")
    print(f"high-K segment (K > {rx_antennas}): a2={a2:.6f} b2={b2:.6f}")
    return 0


def _cmd_validate(args) -> int:
    params_kwargs = {}
    for key, value in (("sinr_db", args.sinr_db), ("radius_m", args.radius_m),
                       ("imax", args.imax), ("seed", args.seed)):
        if value is not None:
            field, cast = _PARAM_KEYS[key]
            params_kwargs[field] = cast(value)
    if args.pt_dbm is not None:
        if len(args.pt_dbm) != 1:
            raise ParameterError("validate takes a single --pt-dbm value")
        params_kwargs["max_power_dbm"] = args.pt_dbm[0]
    params = SimParams(**params_kwargs)
    schemes = args.scheme if args.scheme is not None else tuple(Scheme)
    pairs = args.pairs if args.pairs is not None else (6,)
    if len(pairs) != 1:
        raise ParameterError("validate takes a single --pairs value")
    antennas = args.antennas if args.antennas is not None else (2,)
    trials = args.trials if args.trials is not None else 100

    report = validate_equivalence(params, schemes, pairs[0], antennas,
                                  trials, cap=args.brute_cap)
    for scheme in schemes:
        for m in antennas:
            rows = [r for r in report.rows
                    if r.scheme is scheme and r.rx_antennas == m]
            bad = sum(1 for r in rows
                      if r.n_max_backtracking != r.n_max_exhaustive)
            mean_back = sum(r.calls_backtracking for r in rows) / len(rows)
            mean_full = sum(r.calls_exhaustive for r in rows) / len(rows)
            print(f"{scheme.value} M={m}: trials={len(rows)} mismatches={bad} "
                  f"mean_calls backtracking={mean_back:.1f} "
                  f"exhaustive={mean_full:.1f}")
    print(f"mismatches: {report.mismatches}")
    return 3 if report.mismatches else 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--pairs", type=_int_list, default=None,
                     help="pair counts, e.g. 10 or 1-15 or 4,8,12")
    sub.add_argument("--antennas", type=_int_list, default=None,
                     help="receive antenna counts, e.g. 4 or 1-8")
    sub.add_argument("--scheme", type=_scheme_list, default=None,
                     help="rxdiv|stbc|beamforming, comma list, or all")
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--radius-m", dest="radius_m", type=float, default=None)
    sub.add_argument("--pt-dbm", dest="pt_dbm", type=_float_list, default=None,
                     help="power cap(s) in dBm; a comma list sweeps the cap")
    sub.add_argument("--sinr-db", dest="sinr_db", type=float, default=None)
    sub.add_argument("--imax", type=int, default=None,
                     help="feasibility iteration cap")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--workers", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="maxlinks",
                     description="Concurrent-link capacity bound for MIMO "
                                 "ad hoc networks under an SINR target")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser(
        "simulate", help="run the sweep described by a config file")
    simulate.add_argument("--config", default=None, help="key=value config file")
    _add_common(simulate)
    simulate.set_defaults(func=_cmd_run)

    sweep = commands.add_parser(
        "sweep", help="run a cartesian sweep given by flags")
    sweep.add_argument("--config", default=None, help="key=value config file")
    _add_common(sweep)
    sweep.set_defaults(func=_cmd_run)

    fit = commands.add_parser(
        "fit", help="fit the two-segment line to an aggregate CSV")
    fit.add_argument("aggregate_csv", help="aggregate.csv produced by a sweep")
    fit.add_argument("--scheme", dest="fit_scheme", default="beamforming")
    fit.add_argument("--antennas", dest="fit_antennas", type=int, required=True,
                     help="receive antenna count M (segment breakpoint)")
    fit.add_argument("--pt-dbm", dest="fit_pt_dbm", type=float, default=None)
    fit.set_defaults(func=_cmd_fit)

    validate = commands.add_parser(
        "validate", help="check backtracking vs exhaustive search equivalence")
    _add_common(validate)
    validate.add_argument("--brute-cap", dest="brute_cap", type=int, default=15)
    validate.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
