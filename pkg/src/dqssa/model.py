"""Nine-species activator/repressor clock and its quasi-steady-state maps.

Species order everywhere: D_A, D_A', D_R, D_R', M_A, M_R, A, R, C.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from dqssa import _kernels as K

SPECIES = ("D_A", "D_Ap", "D_R", "D_Rp", "M_A", "M_R", "A", "R", "C")


@dataclass(frozen=True)
class RateConstants:
    """Kinetic rate constants; rates in 1/h, bimolecular (gamma_*) in 1/(Mol h)."""

    alpha_A: float = 50.0
    alpha_A_p: float = 500.0
    alpha_R: float = 0.01
    alpha_R_p: float = 50.0
    beta_A: float = 50.0
    beta_R: float = 5.0
    gamma_A: float = 1.0
    gamma_R: float = 1.0
    gamma_C: float = 2.0
    delta_A: float = 1.0
    delta_R: float = 0.2
    delta_MA: float = 10.0
    delta_MR: float = 0.5
    theta_A: float = 50.0
    theta_R: float = 100.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"rate constant {f.name} must be positive, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


assert tuple(f.name for f in fields(RateConstants)) == K.PARAM_NAMES

DEFAULT_RATES = RateConstants()


@dataclass(frozen=True)
class FullState:
    D_A: float
    D_Ap: float
    D_R: float
    D_Rp: float
    M_A: float
    M_R: float
    A: float
    R: float
    C: float

    @classmethod
    def initial(cls) -> "FullState":
        """Both genes inactive, every other species absent."""
        return cls(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, y) -> "FullState":
        return cls(*(float(v) for v in y))

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class ReducedState:
    R: float
    C: float

    @classmethod
    def from_array(cls, y) -> "ReducedState":
        return cls(float(y[0]), float(y[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.R, self.C], dtype=float)


def _k(p: RateConstants | None) -> np.ndarray:
    return (p or DEFAULT_RATES).as_array()


def full_rhs(s: FullState, p: RateConstants | None = None) -> FullState:
    """Mass-action time derivatives of all nine species."""
    return FullState.from_array(K.full_rhs(s.as_array(), _k(p)))


def steady_DA(A, p: RateConstants | None = None):
    """Inactive activator gene at equilibrium with activator level ``A``."""
    return K.steady_DA(A, _k(p))


def steady_DR(A, p: RateConstants | None = None):
    return K.steady_DR(A, _k(p))


def steady_MA(A, p: RateConstants | None = None):
    """Activator mRNA at equilibrium with gene occupancy set by ``A``."""
    return K.steady_MA(A, _k(p))


def steady_MR(A, p: RateConstants | None = None):
    return K.steady_MR(A, _k(p))


def a_tilde_s(R, p: RateConstants | None = None):
    """Activator level at which A, its gene and its mRNA are all balanced.

    Positive root of ``A**2 - (alpha_A_p*rho - Kd)*A - alpha_A*rho*Kd`` with
    ``rho = beta_A / (delta_MA*(gamma_C*R + delta_A))`` and
    ``Kd = theta_A/gamma_A``.  The ``+sqrt`` form is used as is: for R >= 0
    the discriminant dominates the linear term so nothing cancels.
    Accepts scalars or arrays.
    """
    k = _k(p)
    if np.ndim(R) == 0:
        return K.a_tilde_s(float(R), k)
    return np.array([K.a_tilde_s(float(r), k) for r in np.ravel(R)]).reshape(np.shape(R))


def reduced_rhs(s: ReducedState, p: RateConstants | None = None) -> ReducedState:
    """(dR/dt, dC/dt) with every fast species at its quasi-steady state."""
    return ReducedState.from_array(K.reduced_rhs(s.as_array(), _k(p)))
