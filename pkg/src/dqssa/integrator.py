"""Fixed-step implicit Euler for the full, reduced and delayed systems."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numba.core.registry import CPUDispatcher

from dqssa import _kernels as K
from dqssa.delays import DelayVariant, delayed_aux_at, initial_history
from dqssa.history import HistoryLookupError, HistoryStore
from dqssa.model import DEFAULT_RATES, SPECIES, FullState, RateConstants

SYSTEMS = ("original", "qss", "dqss-derived", "dqss-simplified", "dqss-constant")

AUX_CHANNELS = ("D_A_tau", "D_R_tau", "M_A_tau", "M_R_tau", "A_tau", "A_s",
                "tau_DA", "tau_DR", "tau_MA", "tau_MR", "tau_A")


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    def __init__(self, t: float, residual: float):
        super().__init__(f"implicit solve did not converge at t={t:.6g} h (residual {residual:.3g})")
        self.t = t
        self.residual = residual


class NonFinite(SolverError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state at t={t:.6g} h")
        self.t = t


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 300.0
    newton_tol: float = 1e-10
    max_iters: int = 50
    stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")
        if int(self.stride) < 1:
            raise ValueError("stride must be at least 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclass
class Trajectory:
    """Samples of one run on a uniform grid.

    ``states`` has one row per time and one column per entry of ``names``.
    ``aux`` carries extra per-sample channels (delayed auxiliaries).
    """

    times: np.ndarray
    states: np.ndarray
    names: tuple[str, ...]
    system: str = ""
    config: SolverConfig | None = None
    aux: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    def has(self, name: str) -> bool:
        return name in self.names or name in self.aux

    def __getitem__(self, name: str) -> np.ndarray:
        if name in self.names:
            return self.states[:, self.names.index(name)]
        if name in self.aux:
            return self.aux[name]
        raise KeyError(name)


def _raise_for(status: int, t: float, residual: float) -> None:
    if status == K.NONCONVERGENCE:
        raise NonConvergence(t, residual)
    if status == K.NONFINITE:
        raise NonFinite(t)
    if status == K.EXTRAPOLATION:
        raise HistoryLookupError(f"delayed lookup ran past the provisional sample at t={t:.6g} h")


def integrate_ode(rhs, y0, cfg: SolverConfig, params=None, names=None,
                  system: str = "ode") -> Trajectory:
    """Backward Euler for ``y' = rhs(y, params)``.

    Each step is solved by Newton with a forward-difference Jacobian,
    warm-started at the previous state, to ``max|F| <= tol*(1 + max|y|)``.
    Numba-jitted right-hand sides run compiled; any other callable runs
    through the same loop in plain Python.
    """
    y0 = np.asarray(y0, dtype=float).ravel()
    k = np.zeros(0) if params is None else np.asarray(params, dtype=float)
    args = (y0, k, float(cfg.dt), cfg.n_steps, float(cfg.newton_tol), int(cfg.max_iters),
            int(cfg.stride))
    if isinstance(rhs, CPUDispatcher):
        status, t_fail, res, out = K.implicit_euler_jit(rhs, *args)
    else:
        def f(y, kk):
            return np.asarray(rhs(y, kk), dtype=float)
        status, t_fail, res, out = K.implicit_euler_loop(f, *args)
    _raise_for(status, t_fail, res)
    times = np.arange(out.shape[0]) * (cfg.stride * cfg.dt)
    names = tuple(names) if names else tuple(f"y{i}" for i in range(len(y0)))
    return Trajectory(times, out, names, system=system, config=cfg)


def integrate_full(cfg: SolverConfig = SolverConfig(), p: RateConstants | None = None,
                   y0: FullState | None = None) -> Trajectory:
    y0 = (y0 or FullState.initial()).as_array()
    return integrate_ode(K.full_rhs, y0, cfg, (p or DEFAULT_RATES).as_array(),
                         names=SPECIES, system="original")


def integrate_reduced(cfg: SolverConfig = SolverConfig(), p: RateConstants | None = None,
                      R0: float = 0.0, C0: float = 0.0) -> Trajectory:
    return integrate_ode(K.reduced_rhs, [R0, C0], cfg, (p or DEFAULT_RATES).as_array(),
                         names=("R", "C"), system="qss")


def integrate_dde(variant: DelayVariant | str, cfg: SolverConfig = SolverConfig(),
                  p: RateConstants | None = None, a_s_before_zero: str = "frozen",
                  return_history: bool = False):
    """Method of steps for the delayed (R, C) system.

    Every grid point is committed to a :class:`HistoryStore` (A_tau, A_s,
    R, C); the returned trajectory keeps every ``stride``-th sample and the
    delayed auxiliaries in ``aux``.
    """
    variant = DelayVariant(variant)
    p = p or DEFAULT_RATES
    n = cfg.n_steps
    hist = initial_history(cfg.dt, p, capacity=n + 1, a_s_before_zero=a_s_before_zero)
    rec = np.zeros((len(AUX_CHANNELS), n + 1))
    a0 = delayed_aux_at(0.0, 0.0, hist, variant, p)
    rec[:, 0] = [a0.D_A_tau, a0.D_R_tau, a0.M_A_tau, a0.M_R_tau, a0.A_tau, a0.A_s_now,
                 *a0.delays.as_tuple()]
    status, t_fail, res, done = K.dde_run(variant.code, p.as_array(), float(cfg.dt), n,
                                          float(cfg.newton_tol), int(cfg.max_iters),
                                          hist.data, hist.pre0, rec)
    hist.size = done + 1
    _raise_for(status, t_fail, res)
    idx = np.arange(0, n + 1, cfg.stride)
    traj = Trajectory(
        times=idx * cfg.dt,
        states=np.column_stack([hist.data[K.H_R, idx], hist.data[K.H_C, idx]]),
        names=("R", "C"),
        system=f"dqss-{variant.value}",
        config=cfg,
        aux={name: rec[i, idx].copy() for i, name in enumerate(AUX_CHANNELS)},
    )
    if return_history:
        return traj, hist
    return traj


def simulate(system: str, cfg: SolverConfig = SolverConfig(),
             p: RateConstants | None = None) -> Trajectory:
    """Runs one of ``SYSTEMS`` from the standard initial condition."""
    if system == "original":
        return integrate_full(cfg, p)
    if system == "qss":
        return integrate_reduced(cfg, p)
    if system.startswith("dqss-"):
        return integrate_dde(system[len("dqss-"):], cfg, p)
    raise ValueError(f"unknown system {system!r}; expected one of {', '.join(SYSTEMS)}")
