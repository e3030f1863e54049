"""
Uniform periodic grids in one and two dimensions with second-order central
difference operators.

Fields are stored as arrays of shape ``(ny, nx)`` (``ny == 1`` in 1D), x being
the fastest (last) axis, so a C-order flatten is row-major. Vector fields
carry their components on a leading axis: ``(dim, ny, nx)``; tensors
``(dim, dim, ny, nx)``. Cell centres sit at ``((i + 1/2) hx, (j + 1/2) hy)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError


@dataclass(frozen=True)
class GridSpec:
    dim: int
    nx: int
    ny: int
    lx: float
    ly: float
    bc: tuple = ("periodic", "periodic")

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError("grid.dim must be 1 or 2")
        if self.nx < 8:
            raise ParameterError("grid.nx must be >= 8")
        if self.dim == 2 and self.ny < 8:
            raise ParameterError("grid.ny must be >= 8")
        if self.dim == 1 and self.ny != 1:
            raise ParameterError("1D grids have ny == 1")
        if not (self.lx > 0 and self.ly > 0):
            raise ParameterError("grid lengths must be > 0")
        if any(b != "periodic" for b in self.bc):
            raise ParameterError("only periodic boundaries are supported")

    @classmethod
    def line(cls, nx, lx):
        """1D grid; ``ly`` is set to ``hx`` so that ``hy == hx``."""
        return cls(1, int(nx), 1, float(lx), float(lx) / int(nx))

    @classmethod
    def plane(cls, nx, ny, lx, ly):
        return cls(2, int(nx), int(ny), float(lx), float(ly))

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    @property
    def h(self):
        return min(self.hx, self.hy) if self.dim == 2 else self.hx

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def cell_volume(self):
        return self.hx * self.hy if self.dim == 2 else self.hx

    @property
    def lengths(self):
        return (self.lx, self.ly)[: self.dim]

    def coords(self):
        """Cell-centre coordinate arrays ``(X, Y)`` each of shape ``(ny, nx)``."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        X, Y = np.meshgrid(x, y)
        if self.dim == 1:
            Y = np.zeros_like(X)
        return X, Y

    def zeros(self):
        return np.zeros(self.shape)


def check_scalar(f, grid):
    if np.shape(f) != grid.shape:
        raise ShapeError(f"scalar field has shape {np.shape(f)}, grid expects {grid.shape}")


def check_vector(v, grid):
    if np.shape(v) != (grid.dim,) + grid.shape:
        raise ShapeError(f"vector field has shape {np.shape(v)}, grid expects {(grid.dim,) + grid.shape}")


def ddx(f, grid):
    return (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2.0 * grid.hx)


def ddy(f, grid):
    return (np.roll(f, -1, axis=-2) - np.roll(f, 1, axis=-2)) / (2.0 * grid.hy)


def _partial(f, axis, grid):
    return ddx(f, grid) if axis == 0 else ddy(f, grid)


def gradient(f, grid):
    check_scalar(f, grid)
    return np.stack([_partial(f, a, grid) for a in range(grid.dim)])


def divergence(v, grid):
    check_vector(v, grid)
    out = ddx(v[0], grid)
    if grid.dim == 2:
        out = out + ddy(v[1], grid)
    return out


def laplacian(f, grid):
    """Compact 3-point (1D) / 5-point (2D) Laplacian."""
    check_scalar(f, grid)
    out = (np.roll(f, -1, axis=-1) - 2.0 * f + np.roll(f, 1, axis=-1)) / grid.hx ** 2
    if grid.dim == 2:
        out = out + (np.roll(f, -1, axis=-2) - 2.0 * f + np.roll(f, 1, axis=-2)) / grid.hy ** 2
    return out


def vector_laplacian(v, grid):
    check_vector(v, grid)
    return np.stack([laplacian(c, grid) for c in v])


def velocity_gradient(u, grid):
    """``G[a, b] = d u_a / d x_b``."""
    check_vector(u, grid)
    return np.stack([np.stack([_partial(u[a], b, grid) for b in range(grid.dim)])
                     for a in range(grid.dim)])


def deformation_tensor(u, grid):
    G = velocity_gradient(u, grid)
    return 0.5 * (G + np.swapaxes(G, 0, 1))


def viscous_stress(u, visc, grid):
    """S = 2 nu D(u) + lambda (div u) I."""
    D = deformation_tensor(u, grid)
    S = 2.0 * visc.nu * D
    div_u = np.trace(D, axis1=0, axis2=1)
    for a in range(grid.dim):
        S[a, a] += visc.lam * div_u
    return S


def tensor_divergence(T, grid):
    """``(div T)_a = sum_b d T[a, b] / d x_b``."""
    if np.shape(T) != (grid.dim, grid.dim) + grid.shape:
        raise ShapeError("tensor field does not match grid")
    out = []
    for a in range(grid.dim):
        acc = ddx(T[a, 0], grid)
        if grid.dim == 2:
            acc = acc + ddy(T[a, 1], grid)
        out.append(acc)
    return np.stack(out)


def integrate(f, grid):
    """Cell-sum quadrature over the periodic domain."""
    return float(np.sum(f) * grid.cell_volume)


def interpolate(f, grid, points):
    """Periodic (bi)linear interpolation of ``f`` at ``points`` (shape ``(m, dim)``).

    ``f`` may carry leading component axes; the result has shape
    ``f.shape[:-2] + (m,)``.
    """
    f = np.asarray(f)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    fx = points[:, 0] / grid.hx - 0.5
    i0 = np.floor(fx).astype(int)
    wx = fx - i0
    i0 %= grid.nx
    i1 = (i0 + 1) % grid.nx
    if grid.dim == 1:
        row = f[..., 0, :]
        return (1.0 - wx) * row[..., i0] + wx * row[..., i1]
    fy = points[:, 1] / grid.hy - 0.5
    j0 = np.floor(fy).astype(int)
    wy = fy - j0
    j0 %= grid.ny
    j1 = (j0 + 1) % grid.ny
    return ((1.0 - wx) * (1.0 - wy) * f[..., j0, i0] + wx * (1.0 - wy) * f[..., j0, i1]
            + (1.0 - wx) * wy * f[..., j1, i0] + wx * wy * f[..., j1, i1])
