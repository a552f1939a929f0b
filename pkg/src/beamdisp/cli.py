"""Command-line front end: sweeps, figure data, squeezing thresholds, Monte Carlo.

Lengths are given in units of the waist (d / w0). Tables go to ``--out`` as CSV or
JSON together with a run manifest; without ``--out`` they are printed to stdout.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .detection import (
    Scheme,
    SchemeConfig,
    TruncationError,
    evaluate,
    qnl_crossover_db,
    qnl_sensitivity,
)
from .modes import BeamState, decompose
from .montecarlo import (
    GENERATOR,
    EmptyTrialError,
    McConfig,
    empirical_sensitivity,
    run_trials,
    summarize,
    trial_estimates,
)
from .numerics import QuadratureError

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_EMPTY_TRIALS = 4
MAX_EMPTY_FRACTION = 0.01
SMALL_D = 1e-6

FIGURES = ("fig2", "fig3", "fig4", "fig6")

_SIGNAL_COLUMNS = {
    Scheme.ARRAY_QNL: ("mean_2d_over_w0", "noise_std_unit"),
    Scheme.SPLIT: ("mean_nminus_over_N", "noise_std_over_sqrtN"),
    Scheme.TEM10_HOMODYNE: ("mean_nminus_over_sqrtN_sqrtNLO", "noise_std_over_sqrtNLO"),
}


class UsageError(Exception):
    pass


class Table:
    def __init__(self, name: str, columns: Sequence[str], rows: list):
        self.name = name
        self.columns = list(columns)
        self.rows = rows

    def render(self, fmt: str) -> str:
        if fmt == "json":
            payload = {"columns": self.columns, "rows": [[_json_cell(v) for v in r] for r in self.rows]}
            return json.dumps(payload, indent=1) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    """Parse a table written by this tool back into floats."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [[float(x) for x in row] for row in reader]


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise UsageError(f"--steps must be >= 2, got {steps}")
    if not lo < hi:
        raise UsageError(f"empty range: {lo} >= {hi}")
    return np.linspace(lo, hi, steps)


def _beam(args, d_over_w0: float = 0.0) -> BeamState:
    try:
        return BeamState(args.waist, args.photons, d_over_w0 * args.waist)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _scheme_config(scheme, db: Optional[float], n_max: int) -> SchemeConfig:
    try:
        return SchemeConfig.with_db(scheme, db, n_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# table builders ---------------------------------------------------------

def sweep_table(scheme, d: np.ndarray, waist=1.0, photons=1e6, squeeze_db=None, n_max=40) -> Table:
    scheme = Scheme(scheme)
    config = _scheme_config(scheme, squeeze_db, n_max)
    mean_col, noise_col = _SIGNAL_COLUMNS[scheme]
    rows = []
    for r in d:
        res = evaluate(config, BeamState(waist, photons, float(r) * waist))
        rows.append([float(r), res.mean_signal, res.noise_std, res.sensitivity, res.relative_to_qnl])
    cols = ["d_over_w0", mean_col, noise_col, "sensitivity_per_length", "relative_to_qnl"]
    return Table(f"sweep_{scheme.value}", cols, rows)


def decompose_table(d: np.ndarray, orders: int = 5) -> Table:
    rows = []
    for r in d:
        vec = decompose(BeamState(1.0, 1.0, float(r)), orders)
        rows.append([float(r), *vec.values])
    return Table("decompose", ["d_over_w0", *[f"c{n}" for n in range(orders + 1)]], rows)


def squeeze_table(db: np.ndarray, n_max: int = 40, d_over_w0: float = SMALL_D) -> Table:
    rows = []
    for v in db:
        v = float(v)
        beam = BeamState(1.0, 1.0, d_over_w0)
        split = evaluate(SchemeConfig.with_db(Scheme.SPLIT, v, n_max), beam).relative_to_qnl
        hom = evaluate(SchemeConfig.with_db(Scheme.TEM10_HOMODYNE, v, n_max), beam).relative_to_qnl
        rows.append([v, split, hom, int(split > 1.0), int(hom > 1.0)])
    cols = ["squeezing_db", "relative_to_qnl_split", "relative_to_qnl_homodyne", "split_beats_qnl", "homodyne_beats_qnl"]
    return Table("squeeze_sweep", cols, rows)


def crossover_table() -> Table:
    rows = [
        [Scheme.SPLIT.value, qnl_crossover_db(Scheme.SPLIT), 10.0 * math.log10(math.pi / 2.0)],
        [Scheme.TEM10_HOMODYNE.value, qnl_crossover_db(Scheme.TEM10_HOMODYNE), 0.0],
    ]
    return Table("crossover", ["scheme", "crossover_db", "closed_form_db"], rows)


def figure_tables(figure: str, waist=1.0, photons=1e6, n_max=40) -> tuple[Table, str]:
    """Data behind one figure plus its one-line checkpoint summary."""
    d = np.linspace(0.0, 4.0, 401)
    if figure == "fig2":
        rows = []
        for r in d:
            beam = BeamState(1.0, photons, float(r))
            rows.append([float(r), evaluate(SchemeConfig(Scheme.SPLIT), beam).mean_signal,
                         evaluate(SchemeConfig(Scheme.TEM10_HOMODYNE), beam).mean_signal])
        table = Table("fig2", ["d_over_w0", "split_nminus_over_N", "homodyne_nminus_over_sqrtN_sqrtNLO"], rows)
        peak = max(rows, key=lambda row: row[2])
        msg = f"fig2: homodyne peak {peak[2]:.4f} at d={peak[0]:g}w0; split mean at d=4w0 = {rows[-1][1]:.12f}"
        return table, msg
    if figure == "fig3":
        rows = []
        for r in d:
            beam = BeamState(waist, photons, float(r) * waist)
            s = evaluate(SchemeConfig(Scheme.SPLIT), beam)
            h = evaluate(SchemeConfig(Scheme.TEM10_HOMODYNE), beam)
            rows.append([float(r), qnl_sensitivity(beam), s.sensitivity, h.sensitivity,
                         s.relative_to_qnl, h.relative_to_qnl])
        cols = ["d_over_w0", "qnl_sensitivity", "split_sensitivity", "homodyne_sensitivity",
                "split_relative_to_qnl", "homodyne_relative_to_qnl"]
        msg = f"fig3: d->0 ratio = {rows[0][2] / rows[0][3]:.4f}"
        return Table("fig3", cols, rows), msg
    if figure == "fig4":
        table = decompose_table(d, 5)
        peak = max(table.rows, key=lambda row: row[2])
        worst = max(math.fsum(c * c for c in row[1:]) for row in table.rows)
        msg = f"fig4: c1 peak {peak[2]:.4f} at d={peak[0]:g}w0; max row sum of squares {worst:.12f}"
        return Table("fig4", table.columns, table.rows), msg
    if figure == "fig6":
        table = squeeze_table(np.linspace(0.0, 10.0, 201), n_max)
        msg = f"fig6: split crossover = {qnl_crossover_db(Scheme.SPLIT):.3f} dB"
        return Table("fig6", table.columns, table.rows), msg
    raise UsageError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")


# output -----------------------------------------------------------------

def _emit(tables: list[Table], args, argv: Sequence[str], extra: Optional[dict] = None):
    ext = "json" if args.format == "json" else "csv"
    if args.out is None:
        for t in tables:
            sys.stdout.write(t.render(args.format))
        return
    os.makedirs(args.out, exist_ok=True)
    outputs = []
    for t in tables:
        name = f"{t.name}.{ext}"
        data = t.render(args.format).encode()
        with open(os.path.join(args.out, name), "wb") as fh:
            fh.write(data)
        outputs.append({"file": name, "sha256": hashlib.sha256(data).hexdigest()})
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": " ".join(["beamdisp", *argv]),
        "config": config,
        "version": __version__,
        "seed": args.seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "random_generator": GENERATOR,
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(args.out, f"{args.command}_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_sweep(args, argv):
    d = _grid(args.d_min, args.d_max, args.steps)
    _beam(args)
    table = sweep_table(args.scheme, d, args.waist, args.photons, args.squeeze_db, args.n_max)
    _emit([table], args, argv)


def cmd_decompose(args, argv):
    if args.orders < 0:
        raise UsageError("--orders must be non-negative")
    d = _grid(args.d_min, args.d_max, args.steps)
    _emit([decompose_table(d, args.orders)], args, argv)


def cmd_squeeze_sweep(args, argv):
    if args.db_min < 0:
        raise UsageError("--db-min must be >= 0")
    db = _grid(args.db_min, args.db_max, args.steps)
    _emit([squeeze_table(db, args.n_max)], args, argv)


def cmd_crossover(args, argv):
    _emit([crossover_table()], args, argv)


def cmd_reproduce(args, argv):
    figures = FIGURES if args.figure == "all" else (args.figure,)
    tables, messages = [], []
    for fig in figures:
        t, msg = figure_tables(fig, args.waist, args.photons, args.n_max)
        tables.append(t)
        messages.append(msg)
    _emit(tables, args, argv, {"checkpoints": messages})
    stream = sys.stdout if args.out is not None else sys.stderr
    for msg in messages:
        print(msg, file=stream)


def cmd_montecarlo(args, argv):
    beam = _beam(args, args.d)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if not args.delta > 0:
        raise UsageError("--delta must be positive")
    try:
        config = McConfig(beam, args.trials, args.seed, args.sampling)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    (table,) = run_trials(config, workers=args.workers)
    empty = int(np.count_nonzero(table.photons == 0))
    if empty > MAX_EMPTY_FRACTION * args.trials:
        print(f"error: {empty} of {args.trials} trials detected no photons", file=sys.stderr)
        return EXIT_EMPTY_TRIALS
    result = summarize(config, table, args.scheme)
    sens = empirical_sensitivity(config, args.scheme, args.delta * args.waist, workers=args.workers)
    if args.scheme == "split":
        predicted = evaluate(SchemeConfig(Scheme.SPLIT), beam).sensitivity
    else:
        predicted = qnl_sensitivity(beam)
    summary = [
        ("scheme", args.scheme),
        ("photons", float(args.photons)),
        ("trials", args.trials),
        ("seed", args.seed),
        ("photon_sampling", config.photon_sampling.value),
        ("d_over_w0", float(args.d)),
        ("estimator_mean", result.estimator_mean),
        ("estimator_std", result.estimator_std),
        ("predicted_mean", result.predicted_mean),
        ("predicted_std", result.predicted_std),
        ("std_ratio", result.estimator_std / result.predicted_std),
        ("std_standard_error", result.standard_error),
        ("n_effective", result.n_effective),
        ("empty_trials", result.empty_trials),
        ("empirical_sensitivity", float(sens)),
        ("sensitivity_bootstrap_se", sens.standard_error),
        ("predicted_sensitivity", predicted),
        ("relative_to_qnl", float(sens) / qnl_sensitivity(beam)),
    ]
    tables = [Table(f"montecarlo_{args.scheme}", ["quantity", "value"], [list(kv) for kv in summary])]
    if args.per_trial:
        est = trial_estimates(table, args.scheme, args.photons)
        tables.append(Table(f"montecarlo_{args.scheme}_trials", ["trial", "estimate"],
                            [[i, float(v)] for i, v in enumerate(est)]))
    _emit(tables, args, argv)
    if args.out is not None:
        for k, v in summary:
            print(f"{k}: {_csv_cell(v)}")


def _add_common(p: argparse.ArgumentParser, photons: float = 1e6):
    p.add_argument("--waist", type=float, default=1.0, help="beam waist w0 (length scale)")
    p.add_argument("--photons", type=float, default=photons, help="mean photon number N")
    p.add_argument("--squeeze-db", type=float, default=None, help="squeezing on the scheme's noise mode")
    p.add_argument("--n-max", type=int, default=40, help="basis truncation for noise sums")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamdisp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="signal, noise and sensitivity versus displacement")
    _add_common(p)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], required=True)
    p.add_argument("--d-min", type=float, default=0.0)
    p.add_argument("--d-max", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=401)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("decompose", help="Hermite-Gauss coefficients of the displaced beam")
    _add_common(p)
    p.add_argument("--d-min", type=float, default=0.0)
    p.add_argument("--d-max", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=401)
    p.add_argument("--orders", type=int, default=5, help="highest mode order")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("squeeze-sweep", help="small-displacement sensitivity versus squeezing")
    _add_common(p)
    p.add_argument("--db-min", type=float, default=0.0)
    p.add_argument("--db-max", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=201)
    p.set_defaults(func=cmd_squeeze_sweep)

    p = sub.add_parser("crossover", help="squeezing needed to reach the QNL")
    _add_common(p)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("montecarlo", help="photon-level simulation")
    _add_common(p, photons=1e4)
    p.add_argument("--scheme", choices=("array_qnl", "split"), default="array_qnl")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--d", type=float, default=0.0, help="displacement in units of w0")
    p.add_argument("--delta", type=float, default=0.01, help="finite-difference step in units of w0")
    p.add_argument("--sampling", choices=("fixed_n", "poissonian"), default="poissonian")
    p.add_argument("--per-trial", action="store_true", help="also write per-trial estimates")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("reproduce", help="write the data behind a figure")
    _add_common(p)
    p.add_argument("figure", choices=(*FIGURES, "all"))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args, argv)
    except UsageError as exc:
        print(f"beamdisp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, TruncationError) as exc:
        print(f"beamdisp {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EmptyTrialError as exc:
        print(f"beamdisp {args.command}: {exc}", file=sys.stderr)
        return EXIT_EMPTY_TRIALS
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
