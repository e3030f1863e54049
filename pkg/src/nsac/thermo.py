"""
Equations of state for the bulk fluid and their thermodynamic consistency
checks.

Two closed-form families are provided:

* ideal gas        p = R rho theta,            e = c_v theta
* stiffened gas    p = R rho theta + a rho^2,  e = c_v theta + a rho

Both satisfy p = rho^2 e_rho + theta p_theta identically, so the
compatibility residual is pure round-off.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ParameterError, UnsupportedError

EOS_KINDS = ("ideal", "stiffened")


@dataclass(frozen=True)
class EosModel:
    kind: str = "ideal"
    R: float = 1.0
    cv: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in EOS_KINDS:
            raise ParameterError(f"eos.kind must be one of {EOS_KINDS}, got {self.kind!r}")
        if not self.R > 0:
            raise ParameterError("eos.R must be > 0")
        if not self.cv > 0:
            raise ParameterError("eos.cv must be > 0")
        if self.a < 0:
            raise ParameterError("eos.a must be >= 0")
        if self.kind == "ideal" and self.a != 0.0:
            raise ParameterError("eos.a is only meaningful for kind 'stiffened'")

    @classmethod
    def ideal(cls, R=1.0, cv=1.0):
        return cls("ideal", R, cv, 0.0)

    @classmethod
    def stiffened(cls, R=1.0, cv=1.0, a=0.0):
        return cls("stiffened", R, cv, a)


@dataclass(frozen=True)
class ViscosityHeat:
    """Shear viscosity ``nu``, second viscosity ``lam`` and heat conductivity ``k``."""

    nu: float
    lam: float
    k: float
    dim: int = 2

    def __post_init__(self):
        if not self.nu > 0:
            raise ParameterError("viscosity.nu must be > 0")
        if not self.lam > 0:
            raise ParameterError("viscosity.lambda must be > 0")
        if not self.k > 0:
            raise ParameterError("viscosity.k must be > 0")
        if self.lam + 2.0 / self.dim * self.nu < 0:
            raise ParameterError("viscosity must satisfy lambda + (2/N) nu >= 0")


class EosState(NamedTuple):
    p: np.ndarray
    e: np.ndarray
    e_theta: np.ndarray
    p_theta: np.ndarray
    e_rho: np.ndarray


def _check_positive(rho, theta):
    if np.any(np.asarray(rho) <= 0) or not np.all(np.isfinite(rho)):
        raise DomainError("rho must be > 0")
    if np.any(np.asarray(theta) <= 0) or not np.all(np.isfinite(theta)):
        raise DomainError("theta must be > 0")


def eos_eval(eos, rho, theta):
    """Pressure, specific internal energy and their partial derivatives.

    Works elementwise on scalars or arrays of equal shape.
    """
    _check_positive(rho, theta)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    p = eos.R * rho * theta
    e = eos.cv * theta
    e_theta = np.full_like(rho * theta, eos.cv)
    p_theta = eos.R * rho
    e_rho = np.zeros_like(rho * theta)
    if eos.kind == "stiffened":
        p = p + eos.a * rho * rho
        e = e + eos.a * rho
        e_rho = e_rho + eos.a
    if p.ndim == 0:
        return EosState(float(p), float(e), float(e_theta), float(p_theta), float(e_rho))
    return EosState(p, e, e_theta, p_theta, e_rho)


def pressure(eos, rho, theta):
    return eos_eval(eos, rho, theta).p


def sound_speed_squared(eos, rho, theta):
    """Adiabatic sound speed c^2 = p_rho + theta p_theta^2 / (rho^2 e_theta)."""
    st = eos_eval(eos, rho, theta)
    p_rho = eos.R * np.asarray(theta) + (2.0 * eos.a * np.asarray(rho) if eos.kind == "stiffened" else 0.0)
    return p_rho + np.asarray(theta) * st.p_theta ** 2 / (np.asarray(rho) ** 2 * st.e_theta)


def theta_from_pressure(eos, rho, p):
    """Invert p(rho, theta) = p for theta."""
    rho = np.asarray(rho, dtype=float)
    theta = (np.asarray(p, dtype=float) - (eos.a * rho * rho if eos.kind == "stiffened" else 0.0)) / (eos.R * rho)
    if np.any(theta <= 0):
        raise DomainError("requested pressure implies non-positive temperature")
    return theta


def check_compatibility(eos, rho, theta):
    """Residual p - rho^2 e_rho - theta p_theta of the bulk compatibility relation."""
    st = eos_eval(eos, rho, theta)
    return st.p - np.asarray(rho) ** 2 * st.e_rho - np.asarray(theta) * st.p_theta


def entropy(eos, rho, theta):
    if eos.kind != "ideal":
        raise UnsupportedError(f"entropy is not defined for eos kind {eos.kind!r}")
    _check_positive(rho, theta)
    return eos.cv * np.log(theta) - eos.R * np.log(rho)


def check_maxwell(eos, rho, theta, h):
    """Finite-difference check of ds/dtheta = e_theta/theta and
    ds/drho = (e_rho - p/rho^2)/theta, summed in absolute value."""
    if not h > 0:
        raise ParameterError("finite-difference step h must be > 0")
    if eos.kind != "ideal":
        raise UnsupportedError(f"entropy is not defined for eos kind {eos.kind!r}")
    _check_positive(rho, theta)
    if rho - h <= 0 or theta - h <= 0:
        raise ParameterError("step h too large for the evaluation point")
    st = eos_eval(eos, rho, theta)
    ds_dtheta = (entropy(eos, rho, theta + h) - entropy(eos, rho, theta - h)) / (2.0 * h)
    ds_drho = (entropy(eos, rho + h, theta) - entropy(eos, rho - h, theta)) / (2.0 * h)
    return float(abs(ds_dtheta - st.e_theta / theta)
                 + abs(ds_drho - (st.e_rho - st.p / rho ** 2) / theta))
