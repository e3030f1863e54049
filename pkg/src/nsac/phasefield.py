"""
Phase-field energetics: double well, free energy, chemical potential,
capillary stress, the planar equilibrium profile and the surface tension
integral.
"""
import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import grid as G
from .errors import DomainError, ParameterError

SQRT2 = np.sqrt(2.0)
#: closed-form value of the layer integral of |d/dxi tanh(xi/sqrt 2)|^2
SIGMA = 2.0 * SQRT2 / 3.0
RHO_FLOOR = 1e-6


class MobilityMode(enum.Enum):
    C1 = "C1"
    C2 = "C2"

    def M(self, eps):
        return 1.0 if self is MobilityMode.C1 else 1.0 / eps

    @property
    def chi(self):
        return 1 if self is MobilityMode.C1 else 0


@dataclass(frozen=True)
class PhaseParams:
    eps: float
    mode: MobilityMode = MobilityMode.C1

    def __post_init__(self):
        if not self.eps > 0:
            raise ParameterError("eps must be > 0")
        if not isinstance(self.mode, MobilityMode):
            object.__setattr__(self, "mode", MobilityMode(self.mode))

    @property
    def M(self):
        return self.mode.M(self.eps)


def double_well(phi):
    return 0.25 * (1.0 - np.asarray(phi) ** 2) ** 2


def double_well_prime(phi):
    phi = np.asarray(phi)
    return phi ** 3 - phi


def free_energy_density(rho, phi, grad_phi, eps):
    """Specific free energy f = W(phi)/(eps rho) + eps |grad phi|^2 / (2 rho).

    ``grad_phi`` holds the vector components on its first axis.
    """
    if np.any(np.asarray(rho) <= 0):
        raise DomainError("rho must be > 0")
    if not eps > 0:
        raise DomainError("eps must be > 0")
    g2 = np.sum(np.asarray(grad_phi, dtype=float) ** 2, axis=0)
    return double_well(phi) / (eps * rho) + 0.5 * eps * g2 / rho


def free_energy_volume(phi, eps, grid):
    """rho f on the grid, i.e. W(phi)/eps + eps |grad phi|^2 / 2."""
    g = G.gradient(phi, grid)
    return double_well(phi) / eps + 0.5 * eps * np.sum(g * g, axis=0)


def chemical_potential_field(rho, phi, eps, grid, rho_floor=RHO_FLOOR):
    G.check_scalar(rho, grid)
    G.check_scalar(phi, grid)
    if np.min(rho) <= rho_floor:
        raise DomainError(f"density below vacuum floor {rho_floor}")
    return (double_well_prime(phi) / eps - eps * G.laplacian(phi, grid)) / rho


def capillary_stress_div(phi, eps, grid):
    """-eps div(grad phi (x) grad phi), tensor-divergence form."""
    g = G.gradient(phi, grid)
    T = g[:, None] * g[None, :]
    return -eps * G.tensor_divergence(T, grid)


def relax_to_discrete_equilibrium(phi, eps, grid, tau=10.0):
    """Pseudo-time gradient flow phi_s = lap_h phi - W'(phi)/eps^2 run for s = tau eps^2.

    Removes the O((h/eps)^2) mismatch between a continuous tanh seed and the
    discrete layer equilibrium. Curved interfaces also move by about
    tau eps^2 kappa, which the caller should keep small.
    """
    ds = 0.2 * min(grid.hx, grid.hy if grid.dim == 2 else grid.hx) ** 2 / grid.dim
    ds = min(ds, 0.2 * eps * eps)
    nsteps = int(np.ceil(tau * eps * eps / ds))
    ds = tau * eps * eps / nsteps
    phi = np.array(phi, dtype=float)
    for _ in range(nsteps):
        phi = phi + ds * (G.laplacian(phi, grid) - double_well_prime(phi) / (eps * eps))
    return phi


def equilibrium_profile(xi):
    return np.tanh(np.asarray(xi) / SQRT2)


def equilibrium_profile_slope(xi):
    return (1.0 - equilibrium_profile(xi) ** 2) / SQRT2


def simpson_uniform(y, dx):
    """Composite Simpson rule on an odd number of uniformly spaced samples."""
    if len(y) % 2 == 0:
        raise ParameterError("composite Simpson needs an odd number of points")
    return float(simpson(y, dx=dx))


def surface_tension(L=10.0, n=2001):
    """Simpson quadrature of |d/dxi tanh(xi/sqrt 2)|^2 over [-L, L]."""
    if L < 8:
        raise ParameterError("truncation half-width L must be >= 8")
    if n < 201 or n % 2 == 0:
        raise ParameterError("n must be odd and >= 201")
    xi = np.linspace(-L, L, n)
    return simpson_uniform(equilibrium_profile_slope(xi) ** 2, xi[1] - xi[0])
