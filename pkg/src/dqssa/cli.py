"""Command-line entry point: ``dqssa simulate|compare|table1|fig1``.

Exit codes: 0 success, 2 usage error, 3 solver or period-detection
failure, 4 I/O or config failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from dqssa.analysis import PeriodError, build_table1, compare, run_all
from dqssa.history import HistoryLookupError
from dqssa.integrator import SYSTEMS, SolverConfig, SolverError, simulate
from dqssa.io import (ConfigError, figure_panel, load_config, render_table1, table1_rows,
                      write_panel_csv, write_panel_svg, write_table1_csv,
                      write_trajectory_csv, write_trajectory_svg)
from dqssa.model import DEFAULT_RATES

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("dqssa")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-end", type=float, help="horizon in hours (default 300)")
    p.add_argument("--dt", type=float, help="step in hours (default 1e-3)")
    p.add_argument("--skip", type=float, default=100.0, help="transient skipped before measuring (h)")
    p.add_argument("--stride", type=int, help="keep every n-th step in the output (default 10)")
    p.add_argument("--config", help="key = value parameter file (default: $DQSSA_CONFIG)")
    p.add_argument("--format", choices=("csv", "svg"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqssa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one system and write its trajectory")
    p.add_argument("--system", required=True, choices=SYSTEMS)
    p.add_argument("--out", required=True)
    _common(p)

    p = sub.add_parser("compare", help="period and L2 errors of one approximation")
    p.add_argument("--system", required=True, choices=SYSTEMS[1:])
    p.add_argument("--out", help="optional CSV with the single report row")
    _common(p)

    p = sub.add_parser("table1", help="periods and errors of all approximations")
    p.add_argument("--out", required=True, help="CSV path; a .txt rendering is written next to it")
    _common(p)

    p = sub.add_parser("fig1", help="D_R, M_R, R panels: original vs qss and vs dqss-derived")
    p.add_argument("--out", required=True, help="output prefix")
    _common(p)
    return parser


def _setup(args):
    cfg_path = args.config or os.environ.get("DQSSA_CONFIG")
    p, solver = DEFAULT_RATES, {}
    if cfg_path:
        p, solver = load_config(cfg_path)
    cfg = SolverConfig().with_(**solver).with_(dt=args.dt, t_end=args.t_end, stride=args.stride)
    return p, cfg


def _simulate(args, p, cfg) -> None:
    traj = simulate(args.system, cfg, p)
    if args.format == "svg":
        write_trajectory_svg(traj, args.out)
    else:
        write_trajectory_csv(traj, args.out)
    log.info("wrote %s (%d samples)", args.out, len(traj))


def _compare(args, p, cfg) -> None:
    runs = run_all(cfg, p, systems=("original", args.system))
    r = compare(runs["original"], runs[args.system], args.skip, p)
    print(f"{r.system}: period {r.p_approx:.3f} h (original {r.p_orig:.3f} h), "
          f"RelErr(period) {100 * r.rel_err_period:.2f} %, RelErr(L2) {100 * r.rel_err_l2:.1f} %")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("system,p_orig_h,p_approx_h,rel_err_period_pct,rel_err_l2_pct,window_a,window_b\n")
            fh.write(f"{r.system},{r.p_orig:.6f},{r.p_approx:.6f},{100 * r.rel_err_period:.6f},"
                     f"{100 * r.rel_err_l2:.6f},{r.window[0]:.6f},{r.window[1]:.6f}\n")


def _table1(args, p, cfg) -> None:
    original, reports = build_table1(cfg, p, args.skip)
    rows = table1_rows(original, reports)
    out = Path(args.out)
    write_table1_csv(rows, out)
    text = render_table1(rows)
    out.with_suffix(".txt").write_text(text)
    sys.stdout.write(text)


def _fig1(args, p, cfg) -> None:
    runs = run_all(cfg, p, systems=("original", "qss", "dqss-derived"))
    for side, other in (("left", "qss"), ("right", "dqss-derived")):
        cols, data = figure_panel(runs["original"], runs[other])
        write_panel_csv(cols, data, f"{args.out}_{side}.csv")
        if args.format == "svg":
            write_panel_svg(cols, data, f"{args.out}_{side}.svg", title=f"original vs {other}")


COMMANDS = {"simulate": _simulate, "compare": _compare, "table1": _table1, "fig1": _fig1}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        p, cfg = _setup(args)
        COMMANDS[args.command](args, p, cfg)
    except (SolverError, PeriodError, HistoryLookupError) as exc:
        print(f"dqssa: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, OSError) as exc:
        print(f"dqssa: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"dqssa: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
