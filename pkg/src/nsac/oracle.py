"""
Independent ground truth for the stretched-coordinate layer problem.

The leading-order layer profile solves phi' = (1 - phi^2)/sqrt(2) with
phi(0) = 0; it is integrated here by classical RK4 (no use of tanh), so it can
be compared against the closed form used elsewhere. Members of the
leading-order solution family are constructed explicitly and the residuals of
the five leading-order layer equations are evaluated by fourth-order finite
differences on the xi grid.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .phasefield import SIGMA, SQRT2, MobilityMode, simpson_uniform


@dataclass
class InnerProfile:
    xi: np.ndarray
    phi0: np.ndarray
    dphi0: np.ndarray
    rho0: np.ndarray
    un0: np.ndarray
    theta0: np.ndarray
    mu0: np.ndarray

    @property
    def dxi(self):
        return float(self.xi[1] - self.xi[0])

    def with_fields(self, **kw):
        return replace(self, **kw)


def _slope(phi):
    return (1.0 - phi * phi) / SQRT2


def _rk4_march(h, steps):
    out = np.empty(steps + 1)
    y = 0.0
    out[0] = y
    for i in range(steps):
        k1 = _slope(y)
        k2 = _slope(y + 0.5 * h * k1)
        k3 = _slope(y + 0.5 * h * k2)
        k4 = _slope(y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return out


def solve_phi_profile(L=10.0, n=4001):
    """RK4 solution of the layer ODE on ``n`` points of [-L, L].

    Integrated outward from xi = 0 in both directions; the backward branch is
    the exact negative of the forward one since the ODE is odd-symmetric.
    """
    if L < 8:
        raise ParameterError("L must be >= 8")
    if n < 801 or n % 2 == 0:
        raise ParameterError("n must be odd and >= 801")
    xi = np.linspace(-L, L, n)
    half = (n - 1) // 2
    h = xi[1] - xi[0]
    fwd = _rk4_march(h, half)
    phi = np.concatenate([-fwd[:0:-1], fwd])
    ones = np.ones(n)
    return InnerProfile(xi, phi, _slope(phi), ones.copy(), np.zeros(n), ones.copy(), np.zeros(n))


def layer_quadratures(profile, rho_profile=None):
    """Simpson integrals of |phi0'|^2 and rho0 |phi0'|^2 over the xi grid."""
    rho = profile.rho0 if rho_profile is None else np.broadcast_to(rho_profile, profile.xi.shape)
    w = _slope(profile.phi0) ** 2
    return {
        "sigma": simpson_uniform(w, profile.dxi),
        "weighted": simpson_uniform(rho * w, profile.dxi),
    }


def construct_family(L=10.0, n=4001, mode=MobilityMode.C1, V_n=0.0, rho_minus=1.0, rho_plus=1.0,
                     un=None, theta=1.0):
    """A member of the leading-order layer solution family.

    phi0 from the RK4 solve, un0 and theta0 constant in xi, mu0 = 0. The
    density blends rho_minus -> rho_plus through the layer. When the density
    varies, the normal velocity must equal the fluid normal velocity in both
    mobility regimes; in C1 this holds regardless.
    """
    mode = MobilityMode(mode)
    prof = solve_phi_profile(L, n)
    rho = rho_minus + (rho_plus - rho_minus) * 0.5 * (1.0 + prof.phi0)
    if un is None:
        un = V_n
    if mode is MobilityMode.C1 and un != V_n:
        raise ParameterError("C1 family requires V_n == un")
    if rho_minus != rho_plus and un != V_n:
        raise ParameterError("a varying layer density requires V_n == un")
    return prof.with_fields(rho0=rho, un0=np.full(n, float(un)), theta0=np.full(n, float(theta)),
                            mu0=np.zeros(n))


def d1(f, h):
    """Fourth-order first derivative; the two points at each end are one-sided."""
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    out[:2] = (-25 * f[0:2] + 48 * f[1:3] - 36 * f[2:4] + 16 * f[3:5] - 3 * f[4:6]) / (12.0 * h)
    out[-2:] = (25 * f[-2:] - 48 * f[-3:-1] + 36 * f[-4:-2] - 16 * f[-5:-3] + 3 * f[-6:-4]) / (12.0 * h)
    return out


def d2(f, h):
    """Fourth-order second derivative (one-sided five-point at the ends, third order)."""
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    for i in (0, 1):
        s = f[i:i + 6]
        out[i] = (45 * s[0] - 154 * s[1] + 214 * s[2] - 156 * s[3] + 61 * s[4] - 10 * s[5]) / (12.0 * h * h)
        t = f[len(f) - 1 - i - 5: len(f) - i][::-1]
        out[-1 - i] = (45 * t[0] - 154 * t[1] + 214 * t[2] - 156 * t[3] + 61 * t[4] - 10 * t[5]) / (12.0 * h * h)
    return out


def zeroth_residuals(profile, V_n, mode, nu=1.0, lam=1.0, k=1.0):
    """Max-norm residuals of the five leading-order layer equations.

    Only the normal velocity component enters; tangential components are
    absent from the profile and therefore identically zero.
    """
    chi = MobilityMode(mode).chi
    h = profile.dxi
    rho, un, phi, th, mu = profile.rho0, profile.un0, profile.phi0, profile.theta0, profile.mu0
    dphi = d1(phi, h)
    dun = d1(un, h)
    res = {
        "mass": -d1(rho, h) * V_n + d1(rho * un, h),
        "momentum": d1((lam + 2.0 * nu) * dun, h) + 0.25 * d1((phi ** 2 - 1.0) ** 2, h)
        - 0.5 * d1(dphi ** 2, h),
        "phase": chi * rho * dphi * (V_n - un) - mu,
        "potential": rho * mu + d2(phi, h) - phi ** 3 + phi,
        "temperature": k * d2(th, h) + nu * dun ** 2 + (nu + lam) * dun ** 2 + chi * mu ** 2,
    }
    return {name: float(np.max(np.abs(r))) for name, r in res.items()}


def mass_flux(profile, V_n):
    return profile.rho0 * (V_n - profile.un0)


def mechanical_balance(profile, nu=1.0, lam=1.0):
    """(lam + 2 nu) un0' + W(phi0) - |phi0'|^2 / 2, evaluated with the ODE slope."""
    phi = profile.phi0
    return (lam + 2.0 * nu) * d1(profile.un0, profile.dxi) + 0.25 * (phi ** 2 - 1.0) ** 2 - 0.5 * _slope(phi) ** 2


def lemma25_check(rho0, V_n, un, kappa, sigma=None):
    """rho0 (V_n - un) * (rho0 sigma) + sigma kappa for a constant layer density."""
    if not rho0 > 0:
        raise ParameterError("rho0 must be > 0")
    if sigma is None:
        sigma = layer_quadratures(solve_phi_profile())["sigma"]
    return rho0 * (V_n - un) * (rho0 * sigma) + sigma * kappa


def oracle_table(profile):
    return np.column_stack([profile.xi, profile.phi0, profile.dphi0, profile.rho0,
                            profile.un0, profile.theta0, profile.mu0])


ORACLE_COLUMNS = ("xi", "phi0", "dphi0", "rho0", "un0", "theta0", "mu0")
__all__ = ["InnerProfile", "solve_phi_profile", "layer_quadratures", "construct_family",
           "zeroth_residuals", "mass_flux", "mechanical_balance", "lemma25_check", "SIGMA"]
