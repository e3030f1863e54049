"""
Interface extraction and geometry on the diffuse field.

The interface is the zero level set of phi. Normals point toward phi > 0
and the curvature is div(n), positive where the phi < 0 region is convex.
"""
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from . import grid as G
from . import thermo
from .errors import (DegenerateGradientError, DisplacementTooLargeError, NoInterfaceError,
                     OutOfBandError, ParameterError)

GRAD_TINY = 1e-8


@dataclass
class InterfaceSamples:
    """Points on the interface; arrays indexed by sample along the first axis."""

    x: np.ndarray                 # (m, dim)
    arc: np.ndarray               # (m,)
    contour: np.ndarray           # (m,) contour id
    n: np.ndarray = None          # (m, dim)
    kappa: np.ndarray = None      # (m,)
    Vn: np.ndarray = None         # (m,)

    def __len__(self):
        return len(self.arc)


@dataclass
class SignedDistanceField:
    d: np.ndarray
    band: float
    segments: np.ndarray = field(repr=False, default=None)

    @property
    def mask(self):
        return np.abs(self.d) <= self.band


def _crossings_1d(phi, grid):
    row = phi[0]
    nxt = np.roll(row, -1)
    idx = np.nonzero(((row < 0) & (nxt >= 0)) | ((row >= 0) & (nxt < 0)))[0]
    # a sign flip of size > 1 between neighbours is a seam discontinuity, not a resolved layer
    idx = idx[np.abs(nxt[idx] - row[idx]) <= 1.0]
    w = row[idx] / (row[idx] - nxt[idx])
    x = ((idx + 0.5 + w) * grid.hx) % grid.lx
    return x, np.sign(nxt[idx] - row[idx])


def extract_interface(phi, grid):
    """Zero crossings of phi: interpolated along x in 1D, marching squares in 2D.

    2D contours are computed on the unwrapped array, so an interface touching
    the periodic seam is split into open pieces.
    """
    G.check_scalar(phi, grid)
    if np.all(phi > 0) or np.all(phi < 0):
        raise NoInterfaceError("phi has uniform sign; no interface")
    if grid.dim == 1:
        x, _ = _crossings_1d(phi, grid)
        if len(x) == 0:
            raise NoInterfaceError("no zero crossing found")
        return InterfaceSamples(x[:, None], np.zeros(len(x)), np.arange(len(x)))
    pts, arcs, ids = [], [], []
    for cid, c in enumerate(measure.find_contours(phi, 0.0)):
        xy = np.column_stack([(c[:, 1] + 0.5) * grid.hx, (c[:, 0] + 0.5) * grid.hy])
        closed = np.allclose(xy[0], xy[-1])
        if closed:
            xy = xy[:-1]
        seg = np.hypot(*np.diff(xy, axis=0).T)
        arcs.append(np.concatenate([[0.0], np.cumsum(seg)]))
        pts.append(xy)
        ids.append(np.full(len(xy), cid))
    if not pts:
        raise NoInterfaceError("no zero contour found")
    return InterfaceSamples(np.concatenate(pts), np.concatenate(arcs), np.concatenate(ids))


def normal_field(phi, grid):
    g = G.gradient(phi, grid)
    mag = np.sqrt(np.sum(g * g, axis=0))
    return g / np.maximum(mag, 1e-300), mag


def curvature_field(phi, grid):
    n, mag = normal_field(phi, grid)
    return G.divergence(n, grid)


def geometry(phi, grid, samples):
    """Fill unit normals (toward phi > 0) and curvature div(n) at the samples."""
    g = G.gradient(phi, grid)
    gs = G.interpolate(g, grid, samples.x).T
    mag = np.sqrt(np.sum(gs * gs, axis=1))
    if np.any(mag < GRAD_TINY):
        raise DegenerateGradientError(f"|grad phi| < {GRAD_TINY} at {int(np.sum(mag < GRAD_TINY))} samples")
    samples.n = gs / mag[:, None]
    samples.kappa = G.interpolate(curvature_field(phi, grid), grid, samples.x)
    return samples


def distance_estimate(phi, grid, points, scale):
    """First-order signed distance phi / |grad phi| with a given gradient scale."""
    return G.interpolate(phi, grid, points) / scale


def normal_velocity(samples, phi1, phi2, dt_pair, grid):
    """V_n = -(d2 - d1)/dt at the time-1 sample positions.

    Both distances use phi / |grad phi| with the gradient magnitude of the
    first field at the sample, i.e. the layer steepness at the interface.
    """
    if not dt_pair > 0:
        raise ParameterError("dt_pair must be > 0")
    if samples.n is None:
        geometry(phi1, grid, samples)
    g1 = G.interpolate(np.sqrt(np.sum(G.gradient(phi1, grid) ** 2, axis=0)), grid, samples.x)
    p2 = G.interpolate(phi2, grid, samples.x)
    if np.any(np.abs(p2) >= 0.9):
        raise DisplacementTooLargeError("interface left the |phi| < 0.9 band between snapshots")
    d1 = distance_estimate(phi1, grid, samples.x, g1)
    d2 = p2 / g1
    if np.any(np.abs(d2 - d1) > 2.0 * grid.h):
        raise DisplacementTooLargeError("interface moved more than 2 cells between snapshots")
    samples.Vn = -(d2 - d1) / dt_pair
    return samples


@dataclass
class Traces:
    """One-sided limits (+ side along n, - side against n) per sample."""

    rho: tuple
    u: tuple
    theta: tuple
    p: tuple
    stress: tuple

    def jump(self, name):
        plus, minus = getattr(self, name)
        return plus - minus


def stress_field(state, visc, eos):
    """Cauchy stress without capillary part: 2 nu D u + lambda div u I - p I."""
    S = G.viscous_stress(state.u, visc, state.grid)
    p = thermo.pressure(eos, state.rho, state.theta)
    for a in range(state.grid.dim):
        S[a, a] -= p
    return S, p


def one_sided_traces(state, samples, delta, eps, visc, eos):
    """Richardson-extrapolated traces 2 f(x +- delta n) - f(x +- 2 delta n)."""
    if delta < 3.0 * eps:
        raise ParameterError(f"trace offset delta={delta} must be >= 3 eps")
    grid = state.grid
    if 2.0 * delta >= 0.5 * min(grid.lengths):
        raise OutOfBandError("trace stencil reaches beyond half the periodic domain")
    if samples.n is None:
        geometry(state.phi, grid, samples)
    S, p = stress_field(state, visc, eos)
    quantities = {"rho": state.rho, "u": state.u, "theta": state.theta, "p": p, "stress": S}
    out = {}
    for name, f in quantities.items():
        sides = []
        for sgn in (1.0, -1.0):
            a = G.interpolate(f, grid, samples.x + sgn * delta * samples.n)
            b = G.interpolate(f, grid, samples.x + sgn * 2.0 * delta * samples.n)
            sides.append(np.moveaxis(2.0 * a - b, -1, 0))
        out[name] = tuple(sides)
    return Traces(**out)


def _segments(phi, grid):
    if grid.dim == 1:
        return None
    segs = []
    for c in measure.find_contours(phi, 0.0):
        xy = np.column_stack([(c[:, 1] + 0.5) * grid.hx, (c[:, 0] + 0.5) * grid.hy])
        segs.append(np.stack([xy[:-1], xy[1:]], axis=1))
    return np.concatenate(segs) if segs else np.empty((0, 2, 2))


def signed_distance(phi, grid, band):
    """Geometric signed distance to the zero contour (positive where phi > 0).

    1D uses the interpolated crossings; 2D the marching-squares polyline with
    minimum-image periodic offsets. Only cells within ``band`` of the contour
    are meaningful beyond the polyline's own reach; others get the true
    distance as well but are flagged outside the band by ``mask``.
    """
    G.check_scalar(phi, grid)
    if np.all(phi > 0) or np.all(phi < 0):
        raise NoInterfaceError("phi has uniform sign; no interface")
    X, Y = grid.coords()
    sign = np.where(phi >= 0, 1.0, -1.0)
    if grid.dim == 1:
        xs, _ = _crossings_1d(phi, grid)
        dx = X[0][:, None] - xs[None, :]
        dx -= grid.lx * np.round(dx / grid.lx)
        d = np.min(np.abs(dx), axis=1)[None, :]
        return SignedDistanceField(sign * d, band)
    segs = _segments(phi, grid)
    P = np.column_stack([X.ravel(), Y.ravel()])
    best = np.full(len(P), np.inf)
    A = segs[:, 0]
    AB = segs[:, 1] - segs[:, 0]
    L2 = np.maximum(np.sum(AB * AB, axis=1), 1e-300)
    period = np.array([grid.lx, grid.ly])
    chunk = max(1, 4_000_000 // max(1, len(segs)))
    for s in range(0, len(P), chunk):
        Q = P[s:s + chunk]
        AP = Q[:, None, :] - A[None, :, :]
        AP -= period * np.round(AP / period)
        tt = np.clip(np.sum(AP * AB[None], axis=2) / L2[None], 0.0, 1.0)
        diff = AP - tt[..., None] * AB[None]
        best[s:s + chunk] = np.sqrt(np.min(np.sum(diff * diff, axis=2), axis=1))
    return SignedDistanceField(sign * best.reshape(grid.shape), band, segs)


def polygon_area(samples):
    """Enclosed area of each closed contour (shoelace)."""
    areas = {}
    for cid in np.unique(samples.contour):
        xy = samples.x[samples.contour == cid]
        x, y = xy[:, 0], xy[:, 1]
        areas[int(cid)] = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    return areas


SAMPLE_COLUMNS = ("arc", "x", "y", "nx", "ny", "kappa", "Vn", "rho_plus", "rho_minus", "un_plus",
                  "un_minus", "theta_plus", "theta_minus", "p_plus", "p_minus", "stress_jump_x",
                  "stress_jump_y")


def sample_rows(samples, traces):
    """Rows for the interface-sample CSV export."""
    m = len(samples)
    dim = samples.x.shape[1]
    pad = lambda a: np.column_stack([a, np.zeros((m, 2 - dim))]) if dim == 1 else a  # noqa: E731
    x = pad(samples.x)
    n = pad(samples.n)
    un_p = np.sum(traces.u[0] * samples.n, axis=1)
    un_m = np.sum(traces.u[1] * samples.n, axis=1)
    sj = pad(np.einsum("mab,mb->ma", traces.stress[0] - traces.stress[1], samples.n))
    Vn = samples.Vn if samples.Vn is not None else np.full(m, np.nan)
    cols = [samples.arc, x[:, 0], x[:, 1], n[:, 0], n[:, 1], samples.kappa, Vn, traces.rho[0],
            traces.rho[1], un_p, un_m, traces.theta[0], traces.theta[1], traces.p[0], traces.p[1],
            sj[:, 0], sj[:, 1]]
    return np.column_stack(cols)
