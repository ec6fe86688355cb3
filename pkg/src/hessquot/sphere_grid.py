"""Sphere discretizations producing pointwise jets of scalar fields.

Two grids are provided: a 1-D colatitude grid on [0, pi] for axisymmetric
fields in any dimension, and a full latitude-longitude grid on the 2-sphere.
Both use 2nd-order central differences.  The axisymmetric grid includes the
poles and closes stencils by even reflection (rho(-theta) = rho(theta)); the
2-D grid offsets nodes half a spacing off the poles and closes stencils with
the antipodal rule (crossing a pole lands at phi + pi).

The polar axis is the first ambient coordinate, so x1 = rho cos(theta).
Node ordering on the 2-D grid is theta-major: index = i * n_phi + j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SizeMismatch, TooCoarse
from .radial_geometry import PointJet

__all__ = [
    "AxisymGrid",
    "SphereGrid2D",
    "build_axisym_grid",
    "build_s2_grid",
    "axisym_jets",
    "axisym_jet_arrays",
    "s2_jets",
    "s2_jet_arrays",
    "field_norms",
]

MIN_AXISYM_NODES = 16
MIN_S2_THETA = 16
MIN_S2_PHI = 32


@dataclass
class AxisymGrid:
    """Uniform colatitude nodes theta_m = m pi/(N-1), m = 0..N-1, poles included."""

    node_count: int
    theta: np.ndarray
    spacing: float
    _frame_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def positions(self, n: int) -> np.ndarray:
        """Representative meridian points of S^n in R^{n+1}: (cos t, sin t, 0, ...)."""
        return self._frames(n)[0]

    def frames(self, n: int) -> np.ndarray:
        """Orthonormal tangent frames, shape (N, n, n+1); row 0 is d/dtheta."""
        return self._frames(n)[1]

    def _frames(self, n: int):
        if n not in self._frame_cache:
            N = self.node_count
            pos = np.zeros((N, n + 1))
            pos[:, 0] = np.cos(self.theta)
            pos[:, 1] = np.sin(self.theta)
            frm = np.zeros((N, n, n + 1))
            frm[:, 0, 0] = -np.sin(self.theta)
            frm[:, 0, 1] = np.cos(self.theta)
            for j in range(1, n):
                frm[:, j, j + 1] = 1.0
            self._frame_cache[n] = (pos, frm)
        return self._frame_cache[n]


@dataclass
class SphereGrid2D:
    """Pole-offset latitude-longitude grid: theta_i = (i + 1/2) pi / n_theta."""

    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    dtheta: float
    dphi: float
    _frame_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def node_count(self) -> int:
        return self.n_theta * self.n_phi

    def positions(self) -> np.ndarray:
        return self._frames()[0]

    def frames(self) -> np.ndarray:
        """Orthonormal frames (N, 2, 3): rows are d/dtheta and (1/sin t) d/dphi."""
        return self._frames()[1]

    def _frames(self):
        if "xf" not in self._frame_cache:
            tt, pp = np.meshgrid(self.theta, self.phi, indexing="ij")
            st, ct = np.sin(tt), np.cos(tt)
            sp, cp = np.sin(pp), np.cos(pp)
            pos = np.stack([ct, st * cp, st * sp], axis=-1).reshape(-1, 3)
            e_t = np.stack([-st, ct * cp, ct * sp], axis=-1)
            e_p = np.stack([np.zeros_like(sp), -sp, cp], axis=-1)
            frm = np.stack([e_t, e_p], axis=-2).reshape(-1, 2, 3)
            self._frame_cache["xf"] = (pos, frm)
        return self._frame_cache["xf"]


def build_axisym_grid(N: int) -> AxisymGrid:
    if N < MIN_AXISYM_NODES:
        raise TooCoarse(f"axisymmetric grid needs N >= {MIN_AXISYM_NODES}, got {N}")
    theta = np.linspace(0.0, math.pi, N)
    return AxisymGrid(node_count=N, theta=theta, spacing=math.pi / (N - 1))


def build_s2_grid(n_theta: int, n_phi: int) -> SphereGrid2D:
    if n_theta < MIN_S2_THETA or n_phi < MIN_S2_PHI:
        raise TooCoarse(
            f"sphere grid needs n_theta >= {MIN_S2_THETA} and n_phi >= {MIN_S2_PHI}, "
            f"got ({n_theta}, {n_phi})"
        )
    if n_phi % 2 != 0:
        raise TooCoarse(f"n_phi must be even for antipodal pole stencils, got {n_phi}")
    dtheta = math.pi / n_theta
    theta = (np.arange(n_theta) + 0.5) * dtheta
    dphi = 2.0 * math.pi / n_phi
    phi = np.arange(n_phi) * dphi
    return SphereGrid2D(
        n_theta=n_theta, n_phi=n_phi, theta=theta, phi=phi, dtheta=dtheta, dphi=dphi
    )


def _check_field(field_values, count: int) -> np.ndarray:
    f = np.asarray(field_values, dtype=float).reshape(-1)
    if f.size != count:
        raise SizeMismatch(f"field has {f.size} values, grid has {count} nodes")
    return f


def axisym_jet_arrays(field_values, grid: AxisymGrid, n: int):
    """Jet arrays (rho, grad, hess) for a field depending on theta only.

    Frame: row 0 is the meridian direction, rows 1..n-1 span the orbit
    directions where the covariant Hessian of a zonal field is cot(theta) rho'
    (replaced by its pole limit rho'').
    """
    f = _check_field(field_values, grid.node_count)
    if n < 2:
        raise ValueError(f"dimension n must be >= 2, got {n}")
    dt = grid.spacing
    ext = np.empty(f.size + 2)
    ext[1:-1] = f
    ext[0] = f[1]       # even reflection across theta = 0
    ext[-1] = f[-2]     # even reflection across theta = pi
    d1 = (ext[2:] - ext[:-2]) / (2.0 * dt)
    d2 = (ext[2:] - 2.0 * f + ext[:-2]) / dt**2

    tang = np.empty_like(f)
    interior = slice(1, -1)
    tang[interior] = d1[interior] / np.tan(grid.theta[interior])
    tang[0] = d2[0]
    tang[-1] = d2[-1]

    grad = np.zeros((f.size, n))
    grad[:, 0] = d1
    hess = np.zeros((f.size, n, n))
    hess[:, 0, 0] = d2
    for j in range(1, n):
        hess[:, j, j] = tang
    return f, grad, hess


def axisym_jets(field_values, grid: AxisymGrid, n: int) -> list:
    rho, grad, hess = axisym_jet_arrays(field_values, grid, n)
    return [PointJet(rho=rho[m], grad=grad[m], hess=hess[m]) for m in range(rho.size)]


def _s2_extend(f2d: np.ndarray, n_phi: int) -> np.ndarray:
    """Add antipodal ghost rows above theta=0 and below theta=pi."""
    shift = n_phi // 2
    ext = np.empty((f2d.shape[0] + 2, n_phi))
    ext[1:-1] = f2d
    ext[0] = np.roll(f2d[0], -shift)
    ext[-1] = np.roll(f2d[-1], -shift)
    return ext


def s2_jet_arrays(field_values, grid: SphereGrid2D):
    """Jet arrays on the 2-sphere grid.

    In the frame e_1 = d/dtheta, e_2 = (1/sin t) d/dphi the covariant Hessian
    of a scalar is
        hess_11 = r_tt
        hess_12 = (r_tp - cot t r_p) / sin t
        hess_22 = r_pp / sin^2 t + cot t r_t
    with partials from centered differences, periodic in phi and crossing the
    poles by the antipodal rule.
    """
    f = _check_field(field_values, grid.node_count)
    nt, np_ = grid.n_theta, grid.n_phi
    f2 = f.reshape(nt, np_)
    dt, dp = grid.dtheta, grid.dphi
    ext = _s2_extend(f2, np_)

    r_t = (ext[2:] - ext[:-2]) / (2.0 * dt)
    r_tt = (ext[2:] - 2.0 * f2 + ext[:-2]) / dt**2
    r_p = (np.roll(f2, -1, axis=1) - np.roll(f2, 1, axis=1)) / (2.0 * dp)
    r_pp = (np.roll(f2, -1, axis=1) - 2.0 * f2 + np.roll(f2, 1, axis=1)) / dp**2
    p_ext = (np.roll(ext, -1, axis=1) - np.roll(ext, 1, axis=1)) / (2.0 * dp)
    r_tp = (p_ext[2:] - p_ext[:-2]) / (2.0 * dt)

    st = np.sin(grid.theta)[:, None]
    ct = np.cos(grid.theta)[:, None]
    cot = ct / st

    grad = np.stack([r_t, r_p / st], axis=-1).reshape(-1, 2)
    h11 = r_tt
    h12 = (r_tp - cot * r_p) / st
    h22 = r_pp / st**2 + cot * r_t
    hess = np.stack(
        [np.stack([h11, h12], axis=-1), np.stack([h12, h22], axis=-1)], axis=-2
    ).reshape(-1, 2, 2)
    return f, grad, hess


def s2_jets(field_values, grid: SphereGrid2D) -> list:
    rho, grad, hess = s2_jet_arrays(field_values, grid)
    return [PointJet(rho=rho[m], grad=grad[m], hess=hess[m]) for m in range(rho.size)]


def jet_arrays(field_values, grid, n: int):
    """Dispatch to the grid's jet computation; returns (rho, grad, hess) arrays."""
    if isinstance(grid, AxisymGrid):
        return axisym_jet_arrays(field_values, grid, n)
    if isinstance(grid, SphereGrid2D):
        if n != 2:
            raise ValueError(f"the 2-sphere grid requires n = 2, got n = {n}")
        return s2_jet_arrays(field_values, grid)
    raise TypeError(f"unsupported grid type {type(grid).__name__}")


def node_frames(grid, n: int):
    """(positions, frames) arrays for mapping local normals to ambient vectors."""
    if isinstance(grid, AxisymGrid):
        return grid.positions(n), grid.frames(n)
    if isinstance(grid, SphereGrid2D):
        if n != 2:
            raise ValueError(f"the 2-sphere grid requires n = 2, got n = {n}")
        return grid.positions(), grid.frames()
    raise TypeError(f"unsupported grid type {type(grid).__name__}")


def quadrature_weights(grid, n: int = 2) -> np.ndarray:
    """Surface-measure weights per node (sin^{n-1} theta times spacings)."""
    if isinstance(grid, AxisymGrid):
        # area of S^{n-1} times the colatitude measure; trapezoidal ends
        area = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        w = np.sin(grid.theta) ** (n - 1) * grid.spacing * area
        w[0] *= 0.5
        w[-1] *= 0.5
        return w
    if isinstance(grid, SphereGrid2D):
        w = np.repeat(np.sin(grid.theta) * grid.dtheta * grid.dphi, grid.n_phi)
        return w
    raise TypeError(f"unsupported grid type {type(grid).__name__}")


def field_norms(field_values, grid, n: int = 2):
    """(sup, quadrature-weighted L2) norms of a nodal field."""
    w = quadrature_weights(grid, n)
    f = _check_field(field_values, w.size)
    sup = float(np.abs(f).max())
    l2 = float(math.sqrt(float(np.sum(w * f**2))))
    return sup, l2
