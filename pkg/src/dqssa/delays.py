"""Delayed quasi-steady-state approximations.

A fast species obeying ``dX/dt = f - g X`` is replaced by its steady state
``f/g`` evaluated a lag ``1/g`` in the past.  The lag is where a one-point
quadrature of the convolution solution against the kernel
``exp(delta*(s - t))`` on ``[0, t]`` becomes exact for every linear
integrand; see :func:`exact_tau_w`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from dqssa import _kernels as K
from dqssa.history import HistoryLookupError, HistoryStore
from dqssa.model import DEFAULT_RATES, RateConstants, ReducedState


class DelayVariant(str, enum.Enum):
    """Which delays feed the delayed system.

    ``derived``: all state-dependent delays as obtained from the quadrature
    argument.  ``simplified``: gene delays frozen at ``1/theta``, only the
    activator delay follows ``R``.  ``constant``: additionally the activator
    delay is pinned to the activator-mRNA delay ``1/delta_MA``.
    """

    DERIVED = "derived"
    SIMPLIFIED = "simplified"
    CONSTANT = "constant"

    @property
    def code(self) -> int:
        return {"derived": K.DERIVED, "simplified": K.SIMPLIFIED, "constant": K.CONSTANT}[self.value]


@dataclass(frozen=True)
class QuadratureRule:
    tau: float
    w: float


@dataclass(frozen=True)
class Delays:
    tau_DA: float
    tau_DR: float
    tau_MA: float
    tau_MR: float
    tau_A: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.tau_DA, self.tau_DR, self.tau_MA, self.tau_MR, self.tau_A)


@dataclass(frozen=True)
class DelayedAux:
    D_A_tau: float
    D_R_tau: float
    M_A_tau: float
    M_R_tau: float
    A_tau: float
    A_s_now: float
    delays: Delays

    @classmethod
    def _from_kernel(cls, a) -> "DelayedAux":
        return cls(*(float(v) for v in a[:6]), delays=Delays(*(float(v) for v in a[6:11])))


def exact_tau_w(delta: float, t: float) -> QuadratureRule:
    """Node offset and weight making ``w * phi(t - tau)`` exact for linear phi.

    Exact for ``int_0^t phi(s) exp(delta*(s - t)) ds`` at finite ``t``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not t > 0:
        raise ValueError("t must be positive (the rule degenerates to 0/0 at t = 0)")
    x = delta * t
    one_minus_e = -math.expm1(-x)
    w = one_minus_e / delta
    if x < 1e-4:
        # numerator 1 - (1 + x) e^-x loses everything to cancellation here
        ratio = 0.5 - x / 12.0 + x ** 3 / 720.0
        return QuadratureRule(tau=t * ratio, w=w)
    tau = (one_minus_e - x * math.exp(-x)) / (delta * one_minus_e)
    return QuadratureRule(tau=tau, w=w)


def limit_tau_w(delta: float) -> QuadratureRule:
    """Large-``t`` limit of :func:`exact_tau_w`: both equal ``1/delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return QuadratureRule(tau=1.0 / delta, w=1.0 / delta)


def delays_at(variant: DelayVariant | str, t: float, R_now: float,
              DA_tau: float = 1.0, DR_tau: float = 1.0,
              p: RateConstants | None = None) -> Delays:
    """The five lags at time ``t``; none of them depends on ``t`` explicitly.

    ``DA_tau``/``DR_tau`` only enter the activator lag of the derived variant.
    """
    variant = DelayVariant(variant)
    k = (p or DEFAULT_RATES).as_array()
    return Delays(*(float(v) for v in K.delays(variant.code, float(R_now), float(DA_tau),
                                                float(DR_tau), k)))


def delayed_aux_at(t: float, R_now: float, hist: HistoryStore,
                   variant: DelayVariant | str, p: RateConstants | None = None,
                   provisional: dict | None = None) -> DelayedAux:
    """Evaluates the delayed steady-state chain at time ``t``.

    Order: gene lags from ``R_now``; delayed gene and mRNA levels from the
    A_tau history; activator lag; A_tau from the A_s history; finally the
    current A_s from the delayed gene/mRNA levels.
    """
    variant = DelayVariant(variant)
    k = (p or DEFAULT_RATES).as_array()
    has_prov = provisional is not None
    prov = np.zeros(4)
    if has_prov:
        prov[:] = [float(provisional.get(c, np.nan)) for c in ("A_tau", "A_s", "R", "C")]
    if hist.size == 0 and t > hist.t0:
        raise HistoryLookupError("empty history")
    a = K.delayed_aux(float(t) - hist.t0, float(R_now), hist.data, hist.n, prov, has_prov,
                      hist.pre0, hist.dt, variant.code, k)
    if not np.all(np.isfinite(a)):
        raise HistoryLookupError(f"delayed lookup at t={t} beyond newest sample t={hist.t_last}")
    return DelayedAux._from_kernel(a)


def delayed_rhs(t: float, s: ReducedState, hist: HistoryStore, variant: DelayVariant | str,
                p: RateConstants | None = None, provisional: dict | None = None):
    """Returns ``(dR/dt, dC/dt, A_s_now)`` of the delayed system."""
    aux = delayed_aux_at(t, s.R, hist, variant, p, provisional)
    k = (p or DEFAULT_RATES).as_array()
    a = np.array([aux.D_A_tau, aux.D_R_tau, aux.M_A_tau, aux.M_R_tau, aux.A_tau])
    dR, dC = K.delayed_derivs(float(s.R), float(s.C), a, k)
    return float(dR), float(dC), aux.A_s_now


def initial_history(dt: float, p: RateConstants | None = None, R0: float = 0.0,
                    C0: float = 0.0, capacity: int = 1024,
                    a_s_before_zero: str = "frozen") -> HistoryStore:
    """History for the constant pre-zero extension of the initial condition.

    A is zero before and at t = 0, so is A_tau.  A_s before zero is either
    frozen at its t = 0 value (``"frozen"``) or zero (``"zero"``).
    """
    probe = HistoryStore(dt, {"A_tau": 0.0, "A_s": 0.0, "R": R0, "C": C0}, capacity=capacity)
    # at t = 0 every lookup reaches back before zero, so A_s's pre-zero value is irrelevant here
    a_s0 = delayed_aux_at(0.0, R0, probe, DelayVariant.DERIVED, p).A_s_now
    if a_s_before_zero == "frozen":
        pre_as = a_s0
    elif a_s_before_zero == "zero":
        pre_as = 0.0
    else:
        raise ValueError(f"unknown a_s_before_zero {a_s_before_zero!r}")
    hist = HistoryStore(dt, {"A_tau": 0.0, "A_s": pre_as, "R": R0, "C": C0}, capacity=capacity)
    hist.append({"A_tau": 0.0, "A_s": a_s0, "R": R0, "C": C0})
    return hist
