"""
Explicit time integration of the compressible Navier-Stokes/Allen-Cahn system.

Prognostic variables are the density rho, the momentum rho u, the phase mass
rho phi (all in conservative form) and the temperature theta.

The capillary force has two discrete forms that agree in the continuum:

* ``potential`` (default): -grad p_eos + rho mu grad phi, with the same
  discrete mu as the phase equation. A layer at discrete equilibrium
  (mu = 0) then exerts no force, so no parasitic currents are generated.
* ``divergence``: the flux p_eos - W(phi)/eps - eps |grad phi|^2 / 2 plus the
  capillary stress eps grad phi (x) grad phi, which conserves the cell sum of
  momentum exactly on a periodic grid.

Mass and phase mass are conserved exactly in both forms, and the total energy
rho (e + f + |u|^2/2) up to truncation error.
"""
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import grid as G
from . import thermo
from .errors import (InvariantViolation, NegativeTemperatureError, PreconditionError,
                     SimulationError, VacuumError)
from .phasefield import RHO_FLOOR, PhaseParams, double_well, double_well_prime, free_energy_volume

PHI_OVERSHOOT = 0.1
CAPILLARY_FORMS = ("potential", "divergence")


@dataclass
class State:
    rho: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    t: float
    grid: G.GridSpec

    def copy(self):
        return State(self.rho.copy(), self.u.copy(), self.phi.copy(), self.theta.copy(), self.t, self.grid)


@dataclass
class SimConfig:
    grid: G.GridSpec
    eos: thermo.EosModel
    visc: thermo.ViscosityHeat
    phase: PhaseParams
    ic: dict
    t_end: float
    cfl_safety: float = 0.4
    snapshot_interval: float = 0.0
    output_dir: str = "nsac_out/run"
    pair_steps: int = 0
    diagnostics_every: int = 10
    trace_delta: float = None
    quad_L: float = 10.0
    rho_floor: float = RHO_FLOOR
    capillary_form: str = "potential"
    source: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.t_end >= 0:
            raise ValueError("t_end must be >= 0")
        if not 0 < self.cfl_safety < 1:
            raise ValueError("cfl_safety must lie in (0, 1)")
        if self.capillary_form not in CAPILLARY_FORMS:
            raise ValueError(f"capillary_form must be one of {CAPILLARY_FORMS}")
        if self.trace_delta is None:
            self.trace_delta = 4.0 * self.phase.eps

    @property
    def eps(self):
        return self.phase.eps

    @property
    def M(self):
        return self.phase.M

    def with_output_dir(self, path):
        return replace(self, output_dir=str(path))


class Tendencies(NamedTuple):
    rho: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    theta: np.ndarray


class _Cons(NamedTuple):
    rho: np.ndarray
    m: np.ndarray
    rphi: np.ndarray
    theta: np.ndarray

    def axpy(self, a, other):
        return _Cons(*(x + a * y for x, y in zip(self, other)))

    def combine(self, wa, other, wb):
        return _Cons(*(wa * x + wb * y for x, y in zip(self, other)))


def _to_cons(state):
    return _Cons(state.rho, state.rho * state.u, state.rho * state.phi, state.theta)


def _from_cons(c, t, grid):
    return State(c.rho, c.m / c.rho, c.rphi / c.rho, c.theta, t, grid)


def _guard(rho, theta, cfg):
    if np.min(rho) <= cfg.rho_floor:
        idx = np.unravel_index(np.argmin(rho), rho.shape)
        raise VacuumError(f"density {rho[idx]:.3e} <= floor {cfg.rho_floor} at cell {idx}")
    if np.min(theta) <= 0:
        idx = np.unravel_index(np.argmin(theta), theta.shape)
        raise NegativeTemperatureError(f"temperature {theta[idx]:.3e} <= 0 at cell {idx}")


def _cons_rhs(c, cfg):
    grid, visc, eps, M = cfg.grid, cfg.visc, cfg.eps, cfg.M
    rho, m, rphi, theta = c
    _guard(rho, theta, cfg)
    u = m / rho
    phi = rphi / rho
    st = thermo.eos_eval(cfg.eos, rho, theta)

    gphi = G.gradient(phi, grid)
    mu = (double_well_prime(phi) / eps - eps * G.laplacian(phi, grid)) / rho
    Gu = G.velocity_gradient(u, grid)
    div_u = np.trace(Gu, axis1=0, axis2=1)
    D = 0.5 * (Gu + np.swapaxes(Gu, 0, 1))

    drho = -G.divergence(m, grid)

    flux = m[:, None] * u[None, :]
    if cfg.capillary_form == "divergence":
        p_total = st.p - double_well(phi) / eps - 0.5 * eps * np.sum(gphi * gphi, axis=0)
        flux = flux + eps * gphi[:, None] * gphi[None, :]
    else:
        p_total = st.p
    for a in range(grid.dim):
        flux[a, a] += p_total
    dm = (-G.tensor_divergence(flux, grid) + visc.nu * G.vector_laplacian(u, grid)
          + (visc.nu + visc.lam) * G.gradient(div_u, grid))
    if cfg.capillary_form != "divergence":
        dm = dm + rho * mu * gphi

    drphi = -G.divergence(rphi * u, grid) - M * mu

    heating = (2.0 * visc.nu * np.sum(D * D, axis=(0, 1)) + visc.lam * div_u ** 2 + M * mu ** 2
               - theta * st.p_theta * div_u + visc.k * G.laplacian(theta, grid))
    dtheta = -np.sum(u * G.gradient(theta, grid), axis=0) + heating / (rho * st.e_theta)
    return _Cons(drho, dm, drphi, dtheta)


def rhs(state, cfg):
    """Time derivatives of (rho, u, phi, theta) at ``state``."""
    c = _cons_rhs(_to_cons(state), cfg)
    du = (c.m - state.u * c.rho) / state.rho
    dphi = (c.rphi - state.phi * c.rho) / state.rho
    return Tendencies(c.rho, du, dphi, c.theta)


def chemical_potential(state, cfg):
    return (double_well_prime(state.phi) / cfg.eps - cfg.eps * G.laplacian(state.phi, cfg.grid)) / state.rho


def phase_form_residual(state, cfg):
    """rho dphi/dt + rho u.grad phi + M mu for the integrated (conservative) tendency.

    The two forms agree in the continuum; on the grid they differ by the
    O(h^2) error of the discrete product rule.
    """
    tend = rhs(state, cfg)
    adv = np.sum(state.u * G.gradient(state.phi, cfg.grid), axis=0)
    return state.rho * (tend.phi + adv) + cfg.M * chemical_potential(state, cfg)


def dt_bounds(state, cfg):
    """Individual explicit-stability limits before the safety factor."""
    grid, visc = cfg.grid, cfg.visc
    h, dim = grid.h, grid.dim
    rho_min = float(np.min(state.rho))
    st = thermo.eos_eval(cfg.eos, state.rho, state.theta)
    c = np.sqrt(thermo.sound_speed_squared(cfg.eos, state.rho, state.theta))
    return {
        "advective": h / float(np.max(np.sqrt(np.sum(state.u ** 2, axis=0)) + c)),
        "viscous": h * h * rho_min / (2.0 * dim * (2.0 * visc.nu + visc.lam)),
        "thermal": h * h * rho_min * float(np.min(st.e_theta)) / (2.0 * dim * visc.k),
        "phase": h * h * rho_min ** 2 / (2.0 * dim * cfg.M * cfg.eps),
        "reaction": rho_min ** 2 * cfg.eps / cfg.M,
    }


def stable_dt(state, cfg):
    """cfl_safety times the tightest of the advective/acoustic, viscous,
    thermal, phase-diffusion and phase-reaction limits."""
    return cfg.cfl_safety * min(dt_bounds(state, cfg).values())


def check_state(state, cfg):
    """Raise InvariantViolation naming the first offending field and cell."""
    for name in ("rho", "phi", "theta"):
        arr = getattr(state, name)
        bad = ~np.isfinite(arr)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise InvariantViolation(name, idx, arr[idx])
    bad = ~np.isfinite(state.u)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise InvariantViolation("u", idx, state.u[idx])
    if np.min(state.rho) <= cfg.rho_floor:
        idx = tuple(int(i) for i in np.unravel_index(np.argmin(state.rho), state.rho.shape))
        raise InvariantViolation("rho", idx, state.rho[idx])
    if np.min(state.theta) <= 0:
        idx = tuple(int(i) for i in np.unravel_index(np.argmin(state.theta), state.theta.shape))
        raise InvariantViolation("theta", idx, state.theta[idx])
    aphi = np.abs(state.phi)
    if np.max(aphi) > 1.0 + PHI_OVERSHOOT:
        idx = tuple(int(i) for i in np.unravel_index(np.argmax(aphi), aphi.shape))
        raise InvariantViolation("phi", idx, state.phi[idx])


def step(state, cfg, dt, check_dt=True):
    """One third-order SSP Runge-Kutta step (Shu-Osher form)."""
    if check_dt:
        limit = stable_dt(state, cfg)
        if dt > limit * (1.0 + 1e-12):
            raise PreconditionError(f"dt={dt:.3e} exceeds stable_dt={limit:.3e}")
    u0 = _to_cons(state)
    u1 = u0.axpy(dt, _cons_rhs(u0, cfg))
    u2 = u0.combine(0.75, u1.axpy(dt, _cons_rhs(u1, cfg)), 0.25)
    u3 = u0.combine(1.0 / 3.0, u2.axpy(dt, _cons_rhs(u2, cfg)), 2.0 / 3.0)
    new = _from_cons(u3, state.t + dt, state.grid)
    check_state(new, cfg)
    return new


DIAG_COLUMNS = ("t", "mass", "momentum_x", "momentum_y", "phase_mass", "total_energy", "mu_integral")


def diagnostics(state, cfg):
    grid = cfg.grid
    st = thermo.eos_eval(cfg.eos, state.rho, state.theta)
    mu = chemical_potential(state, cfg)
    kinetic = 0.5 * state.rho * np.sum(state.u ** 2, axis=0)
    energy = state.rho * st.e + free_energy_volume(state.phi, cfg.eps, grid) + kinetic
    mom = [G.integrate(state.rho * state.u[a], grid) for a in range(grid.dim)]
    if grid.dim == 1:
        mom.append(0.0)
    return {
        "t": state.t,
        "mass": G.integrate(state.rho, grid),
        "momentum_x": mom[0],
        "momentum_y": mom[1],
        "phase_mass": G.integrate(state.rho * state.phi, grid),
        "total_energy": G.integrate(energy, grid),
        "mu_integral": G.integrate(cfg.M * mu, grid),
    }


@dataclass
class RunResult:
    manifest_path: Path
    manifest: dict
    snapshots: list
    diagnostics: list
    final_state: State


def integrate(state, cfg, t_stop, on_step=None):
    """Advance ``state`` to ``t_stop`` with the largest stable steps; no output."""
    while state.t < t_stop - 1e-14 * max(1.0, t_stop):
        dt = min(stable_dt(state, cfg), t_stop - state.t)
        try:
            state = step(state, cfg, dt, check_dt=False)
        except Exception as exc:
            raise SimulationError(state.t, exc) from exc
        if on_step is not None:
            on_step(state)
    return state


def run(cfg, state=None):
    """Integrate from the configured initial condition to ``t_end``.

    Snapshots are written every ``snapshot_interval`` (and at ``t_end``);
    with ``pair_steps > 0`` one more snapshot follows that many extra steps
    past ``t_end`` for time-differenced interface diagnostics.
    """
    from . import io
    from .ics import initial_state

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    wall0 = time.time()
    if state is None:
        state = initial_state(cfg)
    check_state(state, cfg)

    snaps = []
    diag_rows = [diagnostics(state, cfg)]

    def snapshot(s):
        path = out / f"snap_{len(snaps):05d}.nsac"
        io.write_snapshot(s, path)
        snaps.append({"path": path.name, "t": s.t})
        if diag_rows[-1]["t"] != s.t:
            diag_rows.append(diagnostics(s, cfg))

    snapshot(state)
    interval = cfg.snapshot_interval if cfg.snapshot_interval > 0 else cfg.t_end
    nsteps = 0
    k = 1
    while state.t < cfg.t_end - 1e-12 * max(1.0, cfg.t_end):
        t_next = min(k * interval, cfg.t_end)
        if t_next <= state.t + 1e-12 * max(1.0, cfg.t_end):
            k += 1
            continue
        while state.t < t_next - 1e-13 * max(1.0, t_next):
            dt = min(stable_dt(state, cfg), t_next - state.t)
            try:
                state = step(state, cfg, dt, check_dt=False)
            except Exception as exc:
                raise SimulationError(state.t, exc) from exc
            nsteps += 1
            if cfg.diagnostics_every and nsteps % cfg.diagnostics_every == 0:
                diag_rows.append(diagnostics(state, cfg))
        state.t = t_next if abs(state.t - t_next) < 1e-9 * max(1.0, t_next) else state.t
        snapshot(state)
        k += 1

    if cfg.pair_steps > 0:
        for _ in range(cfg.pair_steps):
            try:
                state = step(state, cfg, stable_dt(state, cfg), check_dt=False)
            except Exception as exc:
                raise SimulationError(state.t, exc) from exc
            nsteps += 1
        snapshot(state)

    diag_path = out / "diagnostics.csv"
    io.write_diagnostics(diag_rows, diag_path)
    manifest = io.build_run_manifest(cfg, snaps, diag_path.name, steps=nsteps,
                                     wall_seconds=time.time() - wall0)
    mpath = out / "manifest.json"
    io.write_json(manifest, mpath)
    return RunResult(mpath, manifest, [out / s["path"] for s in snaps], diag_rows, state)
