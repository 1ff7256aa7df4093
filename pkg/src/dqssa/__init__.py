"""Circadian clock model with standard and delayed quasi-steady-state reductions."""

from dqssa.analysis import (ErrorReport, PeriodEstimate, align_scale, build_table1, compare,
                            detect_period, reconstruct_full, rel_err_l2, run_all)
from dqssa.delays import (DelayedAux, DelayVariant, QuadratureRule, delayed_aux_at,
                          delayed_rhs, delays_at, exact_tau_w, limit_tau_w)
from dqssa.history import HistoryStore
from dqssa.integrator import (SolverConfig, Trajectory, integrate_dde, integrate_full,
                              integrate_ode, integrate_reduced, simulate)
from dqssa.model import (FullState, RateConstants, ReducedState, a_tilde_s, full_rhs,
                         reduced_rhs, steady_DA, steady_DR, steady_MA, steady_MR)

__version__ = "0.1.0"
