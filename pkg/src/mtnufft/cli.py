"""Command-line front end.

Exit codes: 0 success, 2 malformed input or arguments (nothing written),
3 numeric failure (the failing band is named on stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (PAPER_METHODS, PAPER_SCHEMES, error_reports_to_csv, reports_to_json,
                    run_error_analysis, run_speed_analysis, speed_reports_to_csv)
from .errors import SpectralError
from .estimators import METHODS, build_operator
from .grid import SamplingGrid, SignalBand, SignalSeries, make_band_plan
from .inference import f_test, suboptimality
from .simkit import (SCHEMES, generate_bandlimited_noise, generate_grid,
                     generate_line_plus_noise, generate_white_noise, paper_config)

CSV_SCHEMA = "mtnufft.csv/1"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    """Malformed input file or inconsistent arguments."""


def _fmt(x) -> str:
    return format(float(x), ".17g")


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def read_series(path: str) -> SignalSeries:
    """Parse a ``t,x`` CSV; ``#`` starts a comment.

    Unsorted rows are sorted with a warning; duplicate times are rejected.
    """
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise InputError(f"{path}: {err.strerror}") from err
    rows, lines = [], []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if not header_seen:
            if cells != ["t", "x"]:
                raise InputError(f"{path}:{lineno}: expected header 't,x', got {line!r}")
            header_seen = True
            continue
        if len(cells) != 2:
            raise InputError(f"{path}:{lineno}: expected 2 fields, got {len(cells)}")
        try:
            t, x = float(cells[0]), float(cells[1])
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
        if not (math.isfinite(t) and math.isfinite(x)):
            raise InputError(f"{path}:{lineno}: non-finite value")
        rows.append((t, x))
        lines.append(lineno)
    if not header_seen:
        raise InputError(f"{path}: empty input")
    if len(rows) < 2:
        raise InputError(f"{path}: need at least two samples, got {len(rows)}")
    data = np.array(rows)
    order = np.argsort(data[:, 0], kind="stable")
    if np.any(order != np.arange(len(order))):
        warnings.warn(f"{path}: times were not sorted; sorting", stacklevel=2)
    data = data[order]
    dup = np.nonzero(np.diff(data[:, 0]) == 0)[0]
    if dup.size:
        i = order[dup[0] + 1]
        raise InputError(f"{path}:{lines[i]}: duplicate time {float(data[dup[0], 0])!r}")
    return SignalSeries(SamplingGrid(data[:, 0]), data[:, 1])


def _file_digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_series_csv(series: SignalSeries, chash: str) -> str:
    out = [f"# schema={CSV_SCHEMA} config_hash={chash}", "t,x"]
    out += [f"{_fmt(t)},{_fmt(x)}" for t, x in zip(series.grid.times, series.values)]
    return "\n".join(out) + "\n"


def _table(header, rows, chash) -> str:
    out = [f"# schema={CSV_SCHEMA} config_hash={chash}", ",".join(header)]
    out += [",".join(r) for r in rows]
    return "\n".join(out) + "\n"


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _positive(name):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"{name} must be positive and finite")
        return v
    return conv


def _count(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _band_args(p, k_default=None):
    p.add_argument("--f-max", type=_positive("f_max"), default=0.5)
    p.add_argument("--f-w", type=_positive("f_w"), default=0.05)
    p.add_argument("--spacing", type=_positive("spacing"), default=None,
                   help="band-center spacing (default f_w/5)")
    p.add_argument("-K", "--k-tapers", type=_count, default=k_default)


def _plan(args):
    try:
        return SignalBand(args.f_max), make_band_plan(args.f_max, args.f_w, args.spacing)
    except ValueError as err:
        raise InputError(str(err)) from err


def _numeric_config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys}


def cmd_simulate(args) -> int:
    cfg = paper_config(args.scheme, seed=args.grid_seed)
    if not (math.isfinite(args.variance) and args.variance >= 0) or (
            args.variance == 0 and args.signal != "line"):
        raise InputError("variance must be positive (or 0 with --signal line)")
    grid = generate_grid(cfg)
    if args.signal == "white":
        series = generate_white_noise(grid, args.variance, args.seed)
    elif args.signal == "bandlimited":
        series = generate_bandlimited_noise(grid, SignalBand(args.f_max), args.variance,
                                            args.seed)
    else:
        series = generate_line_plus_noise(grid, args.freq, args.amplitude, 0.0,
                                          args.variance, args.seed)
    conf = {"command": "simulate", "grid": cfg.as_dict(),
            **_numeric_config(args, ["signal", "variance", "seed", "freq", "amplitude",
                                     "f_max"])}
    _write(args.output, write_series_csv(series, config_hash(conf)))
    return EXIT_OK


def _failed_bands(est):
    return [(i, f, fl) for i, (f, fl) in enumerate(zip(est.f_centers, est.flags))
            if any(x.startswith("failed") for x in fl)]


def cmd_spectrum(args) -> int:
    series = read_series(args.input)
    sb, plan = _plan(args)
    options = {}
    if args.method in ("mtnufft", "mtnufft0"):
        options = {"k_tapers": args.k_tapers, "epsilon": args.epsilon}
    elif args.method == "bg_fixed":
        options = {"k_tapers": args.k_tapers}
    op = build_operator(args.method, series.grid, sb, plan, **options)
    est = op.estimate(series)
    conf = {"command": "spectrum", "input_sha256": _file_digest(args.input),
            **_numeric_config(args, ["method", "f_max", "f_w", "spacing", "k_tapers",
                                     "epsilon"])}
    chash = config_hash(conf)
    rows = [[_fmt(f), _fmt(p), _fmt(db), str(int(k)), _fmt(w), fl]
            for f, p, db, k, w, fl in zip(est.f_centers, est.power, est.power_db,
                                          est.k_used, est.f_w_used, est.flag_strings())]
    _write(args.output, _table(["f_center", "power", "power_db", "k_used", "f_w_used",
                                "flag"], rows, chash))
    if args.manifest:
        manifest = {"schema": "mtnufft.manifest/1", "config": conf, "config_hash": chash,
                    "version": __version__, "numpy": np.__version__,
                    "n_samples": series.grid.n_samples, "n_bands": len(plan)}
        Path(args.manifest).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    failed = _failed_bands(est)
    if failed:
        for i, f, fl in failed:
            print(f"error: band {i} (f_center={f:g}) failed: {'|'.join(fl)}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_ftest(args) -> int:
    series = read_series(args.input)
    sb, plan = _plan(args)
    op = build_operator("mtnufft", series.grid, sb, plan, k_tapers=args.k_tapers,
                        epsilon=args.epsilon)
    res = f_test(op.eigencoefficients(series.values), op.tapers, plan)
    levels = list(res.critical_values)
    conf = {"command": "ftest", "input_sha256": _file_digest(args.input),
            **_numeric_config(args, ["f_max", "f_w", "spacing", "k_tapers", "epsilon"])}
    header = ["f_center", "f_stat", "amplitude_re", "amplitude_im", "crit_p05", "crit_p01",
              "crit_rayleigh", "flag"]
    crit = [_fmt(res.critical_values[p]) for p in levels]
    rows = [[_fmt(f), _fmt(F), _fmt(c.real), _fmt(c.imag), *crit, fl]
            for f, F, c, fl in zip(plan.centers, res.f_stat, res.amplitude, res.flags())]
    text = _table(header, rows, config_hash(conf))
    text = text.replace("\n", f" dof={res.dof[0]},{res.dof[1]} "
                        f"p_rayleigh={_fmt(levels[2])}\n", 1)
    _write(args.output, text)
    return EXIT_OK


def cmd_subopt(args) -> int:
    if args.input:
        grid = read_series(args.input).grid
        source = {"input_sha256": _file_digest(args.input)}
    else:
        cfg = paper_config(args.scheme, seed=args.grid_seed)
        grid = generate_grid(cfg)
        source = {"grid": cfg.as_dict()}
    sb, plan = _plan(args)
    rep = suboptimality(grid, sb, plan, args.k_tapers)
    conf = {"command": "subopt", **source,
            **_numeric_config(args, ["f_max", "f_w", "spacing", "k_tapers"])}
    rows = [[_fmt(f), _fmt(e)] for f, e in zip(plan.centers, rep.epsilon_measure)]
    _write(args.output, _table(["f_center", "epsilon_measure"], rows, config_hash(conf)))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.paper_protocol:
        methods, schemes, trials = list(PAPER_METHODS), list(PAPER_SCHEMES), 1000
    else:
        methods, schemes, trials = args.methods, args.schemes, args.trials
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    for s in schemes:
        if s not in SCHEMES:
            raise InputError(f"unknown scheme {s!r}")
    conf = {"command": "bench", "methods": methods, "schemes": schemes, "trials": trials,
            "seed": args.seed, "grid_seed": args.grid_seed, "reps": args.reps,
            "f_max": args.f_max, "f_w": args.f_w}
    chash = config_hash(conf)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    err = run_error_analysis(methods, schemes, trials, args.seed, args.grid_seed,
                             args.f_max, args.f_w)
    (out / "error.json").write_text(reports_to_json(err, {"config_hash": chash}) + "\n")
    (out / "error.csv").write_text(f"# config_hash={chash}\n" + error_reports_to_csv(err))
    if args.reps:
        spd = run_speed_analysis(methods, schemes, args.reps, args.f_max, args.f_w,
                                 args.grid_seed)
        (out / "speed.json").write_text(reports_to_json(spd, {"config_hash": chash}) + "\n")
        (out / "speed.csv").write_text(f"# config_hash={chash}\n" + speed_reports_to_csv(spd))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtnufft",
                                 description="Multitaper spectra of nonuniformly sampled data")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated series as t,x CSV")
    p.add_argument("--scheme", choices=SCHEMES, default="uniform")
    p.add_argument("--signal", choices=("white", "bandlimited", "line"), default="white")
    p.add_argument("--variance", type=float, default=1.0,
                   help="noise variance; 0 allowed for --signal line")
    p.add_argument("--freq", type=float, default=0.1)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--f-max", type=_positive("f_max"), default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="estimate a power spectrum")
    p.add_argument("input")
    p.add_argument("--method", choices=METHODS, default="mtnufft")
    _band_args(p)
    p.add_argument("--epsilon", type=_positive("epsilon"), default=1e-8)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--manifest", default=None, help="JSON run manifest path")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ftest", help="harmonic F-test for line components")
    p.add_argument("input")
    _band_args(p)
    p.add_argument("--epsilon", type=_positive("epsilon"), default=1e-8)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_ftest)

    p = sub.add_parser("subopt", help="suboptimality of the shifted nominal tapers")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--scheme", choices=SCHEMES, default="uniform")
    p.add_argument("--grid-seed", type=int, default=0)
    _band_args(p, k_default=4)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_subopt)

    p = sub.add_parser("bench", help="Monte Carlo error and speed analysis")
    p.add_argument("--paper-protocol", action="store_true",
                   help="all four methods and schemes, 1000 trials")
    p.add_argument("--methods", nargs="+", default=["mtnufft", "bg_fixed"])
    p.add_argument("--schemes", nargs="+", default=["uniform"])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--reps", type=int, default=10, help="speed batches; 0 skips timing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-seed", type=int, default=0)
    p.add_argument("--f-max", type=_positive("f_max"), default=0.5)
    p.add_argument("--f-w", type=_positive("f_w"), default=0.05)
    p.add_argument("--out-dir", default="bench_out")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench" and (args.trials < 2 or (args.reps and args.reps < 10)):
        print("error: trials must be >= 2 and reps 0 or >= 10", file=sys.stderr)
        return EXIT_INPUT
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda m, *a, **k: print(f"warning: {m}", file=sys.stderr)
            return args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except SpectralError as err:
        print(f"error: numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
