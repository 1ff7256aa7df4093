"""Period extraction, alignment and relative errors between trajectories."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from dqssa.delays import DelayVariant
from dqssa.integrator import SolverConfig, Trajectory, simulate
from dqssa.model import DEFAULT_RATES, SPECIES, RateConstants, a_tilde_s, steady_DA, \
    steady_DR, steady_MA, steady_MR

APPROXIMATIONS = ("qss", "dqss-derived", "dqss-simplified", "dqss-constant")


class PeriodError(ValueError):
    pass


class NoOscillation(PeriodError):
    pass


class IrregularPeriod(PeriodError):
    pass


class MissingChannel(KeyError):
    pass


class WindowOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    peak_times: tuple[float, ...]
    n_cycles_used: int
    spread: float


@dataclass(frozen=True)
class ErrorReport:
    system: str
    p_orig: float
    p_approx: float
    rel_err_period: float
    rel_err_l2: float
    window: tuple[float, float]


def peak_times(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Times of strict local maxima, refined by a parabola through 3 samples.

    Maxima not above the signal mean are dropped (shoulders on the falling
    flank are not cycles).
    """
    if len(x) < 3:
        return np.empty(0)
    mid = x[1:-1]
    idx = np.flatnonzero((mid > x[:-2]) & (mid > x[2:]) & (mid > x.mean())) + 1
    left, centre, right = x[idx - 1], x[idx], x[idx + 1]
    curv = left - 2.0 * centre + right
    offset = np.where(curv != 0.0, 0.5 * (left - right) / np.where(curv != 0.0, curv, 1.0), 0.0)
    h = t[idx + 1] - t[idx]
    return t[idx] + offset * h


def detect_period(traj: Trajectory, component: str = "R", skip: float = 100.0,
                  max_spread: float = 0.01, min_cycles: int = 3) -> PeriodEstimate:
    """Mean spacing of successive maxima of ``component`` after ``skip`` hours."""
    if not traj.has(component):
        raise MissingChannel(component)
    t = np.asarray(traj.times)
    x = np.asarray(traj[component])
    keep = t >= skip
    if keep.sum() < 3:
        raise IrregularPeriod(
            f"too few cycles: trajectory ends at t={t[-1]:g} h, before the {skip:g} h transient skip")
    peaks = peak_times(t[keep], x[keep])
    if len(peaks) < 3:
        raise NoOscillation(f"{component} shows {len(peaks)} peak(s) after t={skip:g} h")
    spacing = np.diff(peaks)
    if len(spacing) < min_cycles:
        raise IrregularPeriod(
            f"too few cycles: {len(spacing)} after t={skip:g} h, need {min_cycles}")
    period = float(spacing.mean())
    spread = float(spacing.std() / period)
    if spread > max_spread:
        raise IrregularPeriod(f"peak spacing varies by {100 * spread:.2f}% (limit {100 * max_spread:g}%)")
    return PeriodEstimate(period, tuple(float(v) for v in peaks), len(spacing), spread)


def reconstruct_full(traj: Trajectory, mode: str = "auto",
                     p: RateConstants | None = None) -> Trajectory:
    """Nine-species trajectory from a reduced (R, C) run.

    ``qss`` puts every fast species at its steady state for A = a_tilde_s(R);
    the delayed modes read the recorded delayed auxiliaries instead, with
    A taken as A_tau.  ``auto`` picks by ``traj.system``.
    """
    if all(name in traj.names for name in SPECIES):
        return traj
    if mode == "auto":
        mode = "qss" if traj.system == "qss" else traj.system.removeprefix("dqss-")
    for name in ("R", "C"):
        if not traj.has(name):
            raise MissingChannel(name)
    R, C = traj["R"], traj["C"]
    if mode == "qss":
        A = a_tilde_s(R, p)
        DA_, DR_ = steady_DA(A, p), steady_DR(A, p)
        MA, MR = steady_MA(A, p), steady_MR(A, p)
    else:
        DelayVariant(mode)
        need = ("D_A_tau", "D_R_tau", "M_A_tau", "M_R_tau", "A_tau")
        missing = [c for c in need if not traj.has(c)]
        if missing:
            raise MissingChannel(", ".join(missing))
        DA_, DR_, MA, MR, A = (traj[c] for c in need)
    states = np.column_stack([DA_, 1.0 - DA_, DR_, 1.0 - DR_, MA, MR, A, R, C])
    return Trajectory(traj.times, states, SPECIES, system=traj.system, config=traj.config,
                      aux=dict(traj.aux))


def align_scale(f: Trajectory, g: Trajectory, p_orig: float, p_approx: float,
                skip: float = 100.0, component: str = "R") -> Trajectory:
    """Stretches ``g`` to period ``p_orig`` and shifts it onto ``f``'s peaks.

    The first ``component`` maximum after ``skip`` in ``g`` is moved onto the
    first such maximum of ``f``; the result lives on ``f``'s time grid (NaN
    where ``g`` does not reach).
    """
    tf = detect_period(f, component, skip).peak_times[0]
    tg = detect_period(g, component, skip).peak_times[0]
    scale = p_orig / p_approx
    t_mapped = scale * (np.asarray(g.times) - tg) + tf
    states = np.column_stack([
        np.interp(f.times, t_mapped, g.states[:, j], left=np.nan, right=np.nan)
        for j in range(len(g.names))
    ])
    return Trajectory(np.asarray(f.times), states, g.names, system=g.system, config=g.config)


def rel_err_l2(f: Trajectory, g_tilde: Trajectory, window: tuple[float, float]) -> float:
    """``||f - g_tilde|| / ||f||`` in L2(a, b), summed over f's components."""
    a, b = window
    t = np.asarray(f.times)
    h = t[1] - t[0]
    i_a = int(round((a - t[0]) / h))
    i_b = int(round((b - t[0]) / h))
    if i_a < 0 or i_b >= len(t) or i_b <= i_a:
        raise WindowOutOfRange(f"window ({a:g}, {b:g}) outside [{t[0]:g}, {t[-1]:g}]")
    sl = slice(i_a, i_b + 1)
    try:
        cols = [g_tilde.names.index(name) for name in f.names]
    except ValueError as exc:
        raise MissingChannel(str(exc)) from None
    fv = f.states[sl]
    gv = g_tilde.states[sl][:, cols]
    if not np.all(np.isfinite(gv)):
        raise WindowOutOfRange(f"aligned trajectory does not cover ({a:g}, {b:g})")
    ts = t[sl]
    num = np.trapezoid(np.sum((fv - gv) ** 2, axis=1), ts)
    den = np.trapezoid(np.sum(fv ** 2, axis=1), ts)
    return float(np.sqrt(num / den))


def compare(f: Trajectory, g: Trajectory, skip: float = 100.0,
            p: RateConstants | None = None) -> ErrorReport:
    """Period and L2 errors of approximation ``g`` against original ``f``."""
    p_orig = detect_period(f, "R", skip).period
    p_approx = detect_period(g, "R", skip).period
    g9 = reconstruct_full(g, p=p)
    g_tilde = align_scale(f, g9, p_orig, p_approx, skip)
    a = detect_period(f, "R", skip).peak_times[0]
    window = (a, a + p_orig)
    return ErrorReport(
        system=g.system,
        p_orig=p_orig,
        p_approx=p_approx,
        rel_err_period=abs(p_orig - p_approx) / p_orig,
        rel_err_l2=rel_err_l2(f, g_tilde, window),
        window=window,
    )


def run_all(cfg: SolverConfig = SolverConfig(), p: RateConstants | None = None,
            systems=("original",) + APPROXIMATIONS, workers: int | None = None):
    """Simulates ``systems``; the compiled steppers release the GIL, so threads help."""
    p = p or DEFAULT_RATES
    with ThreadPoolExecutor(max_workers=workers or len(systems)) as pool:
        runs = list(pool.map(lambda s: simulate(s, cfg, p), systems))
    return dict(zip(systems, runs))


def build_table1(cfg: SolverConfig = SolverConfig(), p: RateConstants | None = None,
                 skip: float = 100.0, runs: dict | None = None):
    """Returns ``(original PeriodEstimate, [ErrorReport per approximation])``."""
    runs = runs or run_all(cfg, p)
    f = runs["original"]
    reports = [compare(f, runs[name], skip, p) for name in APPROXIMATIONS]
    return detect_period(f, "R", skip), reports
