"""Trajectory CSV, the summary error table, figure data and the flat config format."""

from __future__ import annotations

import csv
from dataclasses import fields
from pathlib import Path

import numpy as np

from dqssa.analysis import ErrorReport, PeriodEstimate, reconstruct_full
from dqssa.integrator import SolverConfig, Trajectory
from dqssa.model import SPECIES, RateConstants

CSV_HEADER = ("t",) + SPECIES
_FMT = "%.15g"

_SOLVER_KEYS = {"dt": float, "t_end": float, "newton_tol": float, "max_iters": int}


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


class UnknownKey(ConfigError):
    pass


def load_config(path) -> tuple[RateConstants, dict]:
    """Reads ``key = value`` lines; ``#`` starts a comment.

    Keys are rate-constant names or solver knobs (dt, t_end, newton_tol,
    max_iters).  Returns the rate constants (defaults for absent keys) and
    a dict of solver overrides.
    """
    rates: dict[str, float] = {}
    solver: dict = {}
    rate_keys = {f.name for f in fields(RateConstants)}
    text = Path(path).read_text()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key or not value:
            raise ParseError(path, line_no, f"expected 'key = value', got {raw.strip()!r}")
        if key not in rate_keys and key not in _SOLVER_KEYS:
            raise UnknownKey(f"{path}:{line_no}: unknown key {key!r}")
        try:
            if key in rate_keys:
                rates[key] = float(value)
            else:
                solver[key] = _SOLVER_KEYS[key](value)
        except ValueError:
            raise ParseError(path, line_no, f"bad value {value!r} for {key}") from None
    try:
        p = RateConstants(**rates)
        SolverConfig().with_(**solver)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return p, solver


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    """Writes all nine species (reduced runs are reconstructed first)."""
    full = reconstruct_full(traj)
    data = np.column_stack([full.times, full.states[:, [full.names.index(s) for s in SPECIES]]])
    path = Path(path)
    np.savetxt(path, data, delimiter=",", header=",".join(CSV_HEADER), comments="", fmt=_FMT)
    return path


def read_trajectory_csv(path, system: str = "") -> Trajectory:
    with open(path, newline="") as fh:
        header = tuple(next(csv.reader(fh)))
    if header != CSV_HEADER:
        raise ConfigError(f"{path}: unexpected header {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data[:, 0], data[:, 1:], SPECIES, system=system)


def table1_rows(original: PeriodEstimate, reports: list[ErrorReport]) -> list[dict]:
    rows = [{"system": "original", "period_h": original.period,
             "rel_err_period_pct": None, "rel_err_l2_pct": None}]
    for r in reports:
        rows.append({"system": r.system, "period_h": r.p_approx,
                     "rel_err_period_pct": 100 * r.rel_err_period,
                     "rel_err_l2_pct": 100 * r.rel_err_l2})
    return rows


def write_table1_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["system", "period_h", "rel_err_period_pct", "rel_err_l2_pct"])
        for row in rows:
            w.writerow([row["system"]] + [
                "" if row[k] is None else f"{row[k]:.6f}"
                for k in ("period_h", "rel_err_period_pct", "rel_err_l2_pct")])
    return path


def render_table1(rows: list[dict]) -> str:
    """Plain-text table laid out with systems as columns."""
    labels = {"original": "original", "qss": "standard", "dqss-derived": "derived",
              "dqss-simplified": "simplified", "dqss-constant": "constant"}
    heads = [labels.get(r["system"], r["system"]) for r in rows]

    def cell(v, fmt):
        return "---" if v is None else fmt.format(v)

    lines = [
        ["", *heads],
        ["period", *(cell(r["period_h"], "{:.1f} h") for r in rows)],
        ["RelErr(period)", *(cell(r["rel_err_period_pct"], "{:.2f} %") for r in rows)],
        ["RelErr(L2)", *(cell(r["rel_err_l2_pct"], "{:.1f} %") for r in rows)],
    ]
    widths = [max(len(line[i]) for line in lines) for i in range(len(lines[0]))]
    out = []
    for j, line in enumerate(lines):
        out.append(" | ".join(s.rjust(w) for s, w in zip(line, widths)))
        if j == 0:
            out.append("-+-".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


FIG_CHANNELS = ("D_R", "M_R", "R")


def figure_panel(solid: Trajectory, dashed: Trajectory) -> tuple[list[str], np.ndarray]:
    """Columns t, <channel>_solid..., <channel>_dashed... on the common grid."""
    a = reconstruct_full(solid)
    b = reconstruct_full(dashed)
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times):
        raise ValueError("panels need trajectories on the same time grid")
    cols = ["t"] + [f"{c}_solid" for c in FIG_CHANNELS] + [f"{c}_dashed" for c in FIG_CHANNELS]
    data = np.column_stack([a.times] + [a[c] for c in FIG_CHANNELS] + [b[c] for c in FIG_CHANNELS])
    return cols, data


def write_panel_csv(cols: list[str], data: np.ndarray, path) -> Path:
    path = Path(path)
    np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="", fmt=_FMT)
    return path


def write_panel_svg(cols: list[str], data: np.ndarray, path, title: str = "") -> Path:
    """One subplot per channel, solid vs dashed."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = data[:, 0]
    fig, axes = plt.subplots(len(FIG_CHANNELS), 1, sharex=True, figsize=(6, 6))
    for ax, ch in zip(axes, FIG_CHANNELS):
        ax.plot(t, data[:, cols.index(f"{ch}_solid")], "-", color="k", lw=1, label="original")
        ax.plot(t, data[:, cols.index(f"{ch}_dashed")], "--", color="C3", lw=1, label="reduced")
        ax.set_ylabel(ch)
    axes[0].legend(loc="upper right", fontsize="small")
    axes[-1].set_xlabel("t [h]")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def write_trajectory_svg(traj: Trajectory, path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    full = reconstruct_full(traj)
    fig, axes = plt.subplots(len(FIG_CHANNELS), 1, sharex=True, figsize=(6, 6))
    for ax, ch in zip(axes, FIG_CHANNELS):
        ax.plot(full.times, full[ch], "-", color="k", lw=1)
        ax.set_ylabel(ch)
    axes[0].set_title(traj.system)
    axes[-1].set_xlabel("t [h]")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
