"""Initial-condition presets. Phase fields are seeded with the equilibrium
profile tanh(d / (sqrt(2) eps)) of the signed distance d."""
import numpy as np

from . import thermo
from .errors import ConfigError
from .phasefield import SQRT2, relax_to_discrete_equilibrium

PRESETS = {
    "uniform": {"rho": 1.0, "theta": 1.0, "phi": 1.0, "velocity": None,
                "rho_amplitude": 0.0, "rho_mode": 1},
    "planar1d": {"a": 0.25, "b": 0.75, "rho_plus": 1.0, "rho_minus": 1.0, "theta": 1.0,
                 "balance_pressure": False, "velocity": 0.0, "blend_width": 0.0,
                 "prepare": False},
    "bubble2d": {"cx": 0.5, "cy": 0.5, "r0": 0.25, "rho_in": 1.0, "rho_out": 1.0, "theta": 1.0,
                 "prepare": False},
    "shear2d": {"cx": 0.5, "cy": 0.5, "r0": 0.25, "rho_in": 1.0, "rho_out": 1.0, "theta": 1.0,
                "shear": 1.0, "prepare": False},
}


def preset_params(ic):
    """Merge user parameters over the preset defaults, rejecting unknown keys."""
    name = ic.get("preset")
    if name not in PRESETS:
        raise ConfigError(f"ic.preset must be one of {sorted(PRESETS)}, got {name!r}")
    params = dict(PRESETS[name])
    for key, val in ic.items():
        if key == "preset":
            continue
        if key not in params:
            raise ConfigError(f"unknown key 'ic.{key}' for preset {name!r}")
        params[key] = val
    return name, params


def interval_distance(x, a, b, period):
    """Signed distance to the endpoints of the periodic interval [a, b]; positive inside."""
    x = np.mod(x, period)
    inside = (x >= a) & (x <= b)
    d_in = np.minimum(x - a, b - x)
    d_out = -np.minimum(np.mod(a - x, period), np.mod(x - b, period))
    return np.where(inside, d_in, d_out)


def smooth_interval_coordinate(x, a, b, period):
    """Smooth periodic coordinate vanishing at a and b, positive inside [a, b].

    Equals the signed distance to first order at both endpoints when b - a is
    half the period; unlike the distance it has no kinks.
    """
    k = 2.0 * np.pi / period
    mid = 0.5 * (a + b)
    return (np.cos(k * (x - mid)) - np.cos(0.5 * k * (b - a))) / k


def periodic_radius(X, Y, cx, cy, lx, ly):
    dx = X - cx
    dy = Y - cy
    dx -= lx * np.round(dx / lx)
    dy -= ly * np.round(dy / ly)
    return np.hypot(dx, dy)


def _seed(d, cfg, prm):
    phi = np.tanh(d / (SQRT2 * cfg.eps))
    if prm.get("prepare"):
        phi = relax_to_discrete_equilibrium(phi, cfg.eps, cfg.grid)
    return phi


def initial_state(cfg):
    from .solver import State

    grid = cfg.grid
    name, prm = preset_params(cfg.ic)
    X, Y = grid.coords()
    u = np.zeros((grid.dim,) + grid.shape)

    if name == "uniform":
        rho = np.full(grid.shape, float(prm["rho"]))
        if prm["rho_amplitude"]:
            rho = rho * (1.0 + prm["rho_amplitude"] * np.sin(2.0 * np.pi * prm["rho_mode"] * X / grid.lx))
        theta = np.full(grid.shape, float(prm["theta"]))
        phi = np.full(grid.shape, float(prm["phi"]))
        if prm["velocity"] is not None:
            vel = np.atleast_1d(np.asarray(prm["velocity"], dtype=float))
            if vel.size != grid.dim:
                raise ConfigError("ic.velocity must have one entry per dimension")
            u += vel[:, None, None]
    elif name == "planar1d":
        d = interval_distance(X, prm["a"] * grid.lx, prm["b"] * grid.lx, grid.lx)
        phi = _seed(d, cfg, prm)
        # blend_width > 0 spreads the bulk contrast over a fixed length instead of the layer
        w = float(prm["blend_width"])
        if w > 0:
            s = smooth_interval_coordinate(X, prm["a"] * grid.lx, prm["b"] * grid.lx, grid.lx)
            blend = np.tanh(s / w)
        else:
            blend = phi
        rho = prm["rho_minus"] + (prm["rho_plus"] - prm["rho_minus"]) * 0.5 * (1.0 + blend)
        if prm["balance_pressure"]:
            p0 = thermo.pressure(cfg.eos, prm["rho_plus"], prm["theta"])
            theta = thermo.theta_from_pressure(cfg.eos, rho, p0)
        else:
            theta = np.full(grid.shape, float(prm["theta"]))
        u[0] += float(prm["velocity"])
    else:
        if grid.dim != 2:
            raise ConfigError(f"preset {name!r} needs a 2D grid")
        r = periodic_radius(X, Y, prm["cx"] * grid.lx, prm["cy"] * grid.ly, grid.lx, grid.ly)
        phi = _seed(r - prm["r0"], cfg, prm)
        rho = prm["rho_in"] + (prm["rho_out"] - prm["rho_in"]) * 0.5 * (1.0 + phi)
        theta = np.full(grid.shape, float(prm["theta"]))
        if name == "shear2d":
            u[0] = prm["shear"] * np.sin(2.0 * np.pi * Y / grid.ly)

    return State(rho.astype(float), u, phi.astype(float), theta.astype(float), 0.0, grid)
