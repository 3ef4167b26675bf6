"""Chart-level differential geometry with centred finite differences.

Conventions
-----------
Component arrays carry their indices first and the chart grid last.

* metric ``g[mu, nu, ...]``
* Christoffel symbols ``Gamma[lam, mu, nu, ...]`` = Gamma^lam_{mu nu}
* frame ``theta[mu, a, ...]`` = theta^mu_a, the coefficient of dx^a
* connection ``omega[mu, nu, a, ...]`` = omega^mu_nu (d/dx^a)
* 2-forms carry their two form indices last among the component indices.

Riemann is ``R^r_{s m n} = d_m Gamma^r_{n s} - d_n Gamma^r_{m s} + Gamma^r_{m l} Gamma^l_{n s}
- Gamma^r_{n l} Gamma^l_{m s}``, Ricci ``R_{s n} = R^r_{s r n}``.  The round
sphere then has positive scalar curvature.  For spacetime charts
``x^0 = c t`` and the flat metric is ``eta = diag(+1, -1, -1, -1)``; with
these choices the conformal metric ``g = Omega^2 eta`` has
``R = -6 box(Omega) / Omega^3``, ``box = eta^{mn} d_m d_n``.

Derivatives use second-order centred differences (one-sided, second order,
at the chart edges) because the charts of interest are not periodic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fieldgrid import NATURAL, GridSpec, RealField, UnitSystem
from .madelung import DEFAULT_EPS, nodal_mask, quantum_potential_rel


@dataclass(frozen=True)
class Chart:
    """Coordinate chart sampled on a rectilinear grid.

    ``axes[a]`` is the 1D array of sample positions of coordinate ``a``, or
    ``None`` when nothing depends on that coordinate (its derivatives vanish
    and it takes no array axis).
    """

    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(None if a is None else np.asarray(a, dtype=float)
                                               for a in self.axes))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes if a is not None)

    def mesh(self) -> list:
        """Coordinate arrays on the grid (``None`` for homogeneous coordinates)."""
        sampled = [a for a in self.axes if a is not None]
        grids = np.meshgrid(*sampled, indexing="ij") if sampled else []
        out, it = [], iter(grids)
        for a in self.axes:
            out.append(None if a is None else next(it))
        return out

    def derivative(self, f: np.ndarray, a: int) -> np.ndarray:
        """``d f / d x^a`` of an array whose trailing axes are the chart grid."""
        if self.axes[a] is None:
            return np.zeros_like(f)
        grid_axis = sum(1 for b in self.axes[:a] if b is not None)
        axis = f.ndim - len(self.shape) + grid_axis
        return np.gradient(f, self.axes[a], axis=axis, edge_order=2)

    def d_all(self, f: np.ndarray) -> np.ndarray:
        """Stack of all partial derivatives, new leading index."""
        return np.stack([self.derivative(f, a) for a in range(self.dim)])

    def interior(self, margin: int = 2) -> tuple:
        return tuple(slice(margin, n - margin) for n in self.shape)


# -- metric pipeline ---------------------------------------------------------

def inverse_metric(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise inverse, determinant and singular-point mask of ``g[mu, nu, ...]``."""
    n = g.shape[0]
    gm = np.moveaxis(g.reshape(n, n, -1), -1, 0)
    det = np.linalg.det(gm)
    singular = np.abs(det) < 1e-300
    gm = np.where(singular[:, None, None], np.eye(n), gm)
    inv = np.moveaxis(np.linalg.inv(gm), 0, -1).reshape(g.shape)
    return inv, det.reshape(g.shape[2:]), singular.reshape(g.shape[2:])


def christoffel(g: np.ndarray, chart: Chart) -> np.ndarray:
    """``Gamma^l_{m n} = 1/2 g^{l s} (d_m g_{s n} + d_n g_{s m} - d_s g_{m n})``."""
    ginv, _, _ = inverse_metric(g)
    dg = chart.d_all(g)  # dg[a, m, n] = d_a g_{mn}
    lower = 0.5 * (np.einsum("msn...->smn...", dg) + np.einsum("nsm...->smn...", dg) - dg)
    return np.einsum("ls...,smn...->lmn...", ginv, lower)


def ricci_tensor(Gamma: np.ndarray, chart: Chart) -> np.ndarray:
    dG = chart.d_all(Gamma)  # dG[a, r, m, n] = d_a Gamma^r_{mn}
    # R_{sn} = d_r G^r_{ns} - d_n G^r_{rs} + G^r_{rl} G^l_{ns} - G^r_{nl} G^l_{rs}
    term1 = np.einsum("rrns...->sn...", dG)
    term2 = np.einsum("nrrs...->sn...", dG)
    trace = np.einsum("rrl...->l...", Gamma)
    term3 = np.einsum("l...,lns...->sn...", trace, Gamma)
    term4 = np.einsum("rnl...,lrs...->sn...", Gamma, Gamma)
    return term1 - term2 + term3 - term4


def ricci_scalar(g: np.ndarray, chart: Chart) -> np.ndarray:
    """Scalar curvature of ``g`` by finite differences through Christoffel symbols."""
    ginv, _, _ = inverse_metric(g)
    Ric = ricci_tensor(christoffel(g, chart), chart)
    return np.einsum("sn...,sn...->...", ginv, Ric)


def minkowski(n: int = 4) -> np.ndarray:
    return np.diag([1.0] + [-1.0] * (n - 1))


@dataclass(frozen=True)
class CurvatureResult:
    scalar: np.ndarray
    singular: np.ndarray


def ricci_scalar_conformal(omega: np.ndarray, spacing: Sequence[float],
                           units: UnitSystem = NATURAL, ndim: int = 4) -> CurvatureResult:
    """Scalar curvature of ``g = Omega^2 eta`` from samples of ``Omega(t, x, ...)``.

    ``omega`` has one array axis for time and one per sampled spatial
    coordinate; the remaining of the ``ndim - 1`` spatial coordinates are
    homogeneous.  ``spacing`` gives ``(dt, dx, ...)``.  The metric components
    are differentiated numerically; no conformal closed form is used.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != len(spacing) or omega.ndim > ndim:
        raise ValueError("need one spacing per array axis and at most ndim axes")
    axes = [np.arange(omega.shape[0]) * spacing[0] * units.c]
    axes += [np.arange(omega.shape[i]) * spacing[i] for i in range(1, omega.ndim)]
    axes += [None] * (ndim - omega.ndim)
    chart = Chart(tuple(axes))
    g = np.einsum("mn,...->mn...", minkowski(ndim), omega**2)
    _, det, singular = inverse_metric(g)
    singular = singular | ~(omega > 0)
    R = ricci_scalar(g, chart)
    return CurvatureResult(np.where(singular, 0.0, R), singular)


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of ``U_h^2 = hbar^2 c^2 rho0 R / 6`` at one time slice."""

    curvature_side: np.ndarray
    potential_side: np.ndarray
    mask: np.ndarray

    def max_error(self, region: np.ndarray | None = None) -> float:
        keep = ~self.mask if region is None else (~self.mask & region)
        return float(np.max(np.abs(self.curvature_side - self.potential_side)[keep]))


def conformal_identity(rho0: np.ndarray, dt: float, grid: GridSpec, units: UnitSystem = NATURAL,
                       eps: float = DEFAULT_EPS) -> IdentityCheck:
    """Compare the curvature of ``g = rho0 eta`` with the relativistic quantum term.

    ``rho0`` has shape ``(nt, *grid.shape)`` with ``nt >= 5``; the comparison
    is made at the middle slice.  The curvature side runs the finite
    difference Christoffel/Ricci pipeline; the potential side is
    :func:`causalwave.madelung.quantum_potential_rel` (spectral in space).
    """
    rho0 = np.asarray(rho0, dtype=float)
    nt = rho0.shape[0]
    if nt < 5:
        raise ValueError("need at least five time slices")
    mid = nt // 2
    curv = ricci_scalar_conformal(np.sqrt(rho0), (dt,) + grid.dx, units)
    lhs = units.hbar**2 * units.c**2 * rho0[mid] * curv.scalar[mid] / 6.0
    slices = [RealField(grid, rho0[k]) for k in (mid - 1, mid, mid + 1)]
    rhs, mask = quantum_potential_rel(slices, units, dt, eps, return_mask=True)
    return IdentityCheck(lhs, rhs.values, mask | curv.singular[mid])


# -- Cartan calculus ---------------------------------------------------------

@dataclass(frozen=True)
class ChartConnection:
    """Frame ``theta[mu, a]``, connection ``omega[mu, nu, a]`` and frame metric ``g[mu, nu]``.

    ``g`` may be a constant ``(n, n)`` matrix (an orthonormal frame) or a
    field ``(n, n, *chart.shape)``.
    """

    chart: Chart
    theta: np.ndarray
    omega: np.ndarray
    g: np.ndarray | None = None

    def __post_init__(self):
        n = self.chart.dim
        shape = self.chart.shape
        theta = np.asarray(self.theta, dtype=float)
        omega = np.asarray(self.omega, dtype=float)
        if theta.shape != (n, n) + shape:
            raise ValueError(f"theta must have shape {(n, n) + shape}, got {theta.shape}")
        if omega.shape != (n, n, n) + shape:
            raise ValueError(f"omega must have shape {(n, n, n) + shape}, got {omega.shape}")
        for name, arr in (("theta", theta), ("omega", omega)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite components")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "omega", omega)
        if self.g is not None:
            g = np.asarray(self.g, dtype=float)
            if g.shape == (n, n):
                g = np.broadcast_to(g.reshape((n, n) + (1,) * len(shape)), (n, n) + shape).copy()
            if g.shape != (n, n) + shape:
                raise ValueError(f"g must have shape {(n, n)} or {(n, n) + shape}")
            object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def with_omega(self, omega) -> "ChartConnection":
        return ChartConnection(self.chart, self.theta, omega, self.g)


@dataclass(frozen=True)
class CartanOutput:
    torsion: np.ndarray    # Theta^mu_{ab}
    curvature: np.ndarray  # Omega^mu_{nu ab}


def exterior_derivative_1form(A: np.ndarray, chart: Chart) -> np.ndarray:
    """``(dA)_{ab} = d_a A_b - d_b A_a`` for ``A[..., b, *grid]``."""
    n = chart.dim
    lead = A.ndim - len(chart.shape) - 1
    dA = np.stack([chart.derivative(A, a) for a in range(n)], axis=lead)
    return dA - np.swapaxes(dA, lead, lead + 1)


def cartan_structure(conn: ChartConnection) -> CartanOutput:
    """Torsion ``d theta + omega ^ theta`` and curvature ``d omega + omega ^ omega``."""
    chart, th, om = conn.chart, conn.theta, conn.omega
    # (omega ^ theta)^mu_{ab} = omega^mu_{nu a} theta^nu_b - omega^mu_{nu b} theta^nu_a
    wt = np.einsum("mna...,nb...->mab...", om, th)
    torsion = exterior_derivative_1form(th, chart) + (wt - np.swapaxes(wt, 1, 2))
    ww = np.einsum("mla...,lnb...->mnab...", om, om)
    curvature = exterior_derivative_1form(om, chart) + (ww - np.swapaxes(ww, 2, 3))
    return CartanOutput(torsion, curvature)


def frame_vectors(theta: np.ndarray) -> np.ndarray:
    """Dual frame ``e[a, alpha]`` with ``theta^mu_alpha e_a^alpha = delta^mu_a``."""
    n = theta.shape[0]
    t = np.moveaxis(theta.reshape(n, n, -1), -1, 0)
    inv = np.linalg.inv(t)  # inv[alpha, a]
    return np.moveaxis(np.swapaxes(inv, 1, 2), 0, -1).reshape(theta.shape)


def scalar_curvature(conn: ChartConnection, out: CartanOutput | None = None) -> np.ndarray:
    """Contract the curvature 2-form: ``Ric_{bd} = Omega^a_b(e_a, e_d)``, ``R = g^{bd} Ric_{bd}``."""
    out = cartan_structure(conn) if out is None else out
    n = conn.dim
    e = frame_vectors(conn.theta)
    frame_curv = np.einsum("abxy...,cx...,dy...->abcd...", out.curvature, e, e)
    ric = np.einsum("abad...->bd...", frame_curv)
    g = conn.g if conn.g is not None else np.broadcast_to(
        np.eye(n).reshape((n, n) + (1,) * len(conn.chart.shape)), (n, n) + conn.chart.shape)
    ginv, _, _ = inverse_metric(np.array(g))
    return np.einsum("bd...,bd...->...", ginv, ric)


def metricity(conn: ChartConnection, tol: float = 1e-6):
    """``Q_{a mu nu} = d_a g_{mu nu} - omega^l_{mu a} g_{l nu} - omega^l_{nu a} g_{mu l}``.

    Returns ``(Q, reducible)`` where ``reducible`` is ``max|Q| < tol``.
    """
    if conn.g is None:
        raise ValueError("metricity needs a metric")
    Q = _metricity_field(conn.g, conn.omega, conn.chart)
    return Q, bool(np.max(np.abs(Q)) < tol)


def _metricity_field(g, omega, chart):
    dg = chart.d_all(g)
    low = np.einsum("ln...,lma...->anm...", g, omega)  # omega^l_{mu a} g_{l nu} as [a, nu, mu]
    return dg - low - np.swapaxes(low, 1, 2)


def split_connection(conn: ChartConnection, det_tol: float = 1e-12):
    """``omega = omega_bar + tau`` with ``omega_bar`` metric compatible.

    ``tau`` is g-symmetric once its upper index is lowered, i.e. it takes
    values in the complement of the orthogonal algebra; it equals ``-Q/2``
    raised with ``g``.  Returns ``(omega_bar, tau)`` as component arrays.
    """
    if conn.g is None:
        raise ValueError("splitting needs a metric")
    ginv, det, _ = inverse_metric(conn.g)
    if np.any(np.abs(det) < det_tol):
        raise ValueError("metric is degenerate on the chart")
    Q = _metricity_field(conn.g, conn.omega, conn.chart)
    tau_low = -0.5 * Q  # [a, mu, nu], symmetric in mu nu
    tau = np.einsum("ml...,aln...->mna...", ginv, tau_low)
    return conn.omega - tau, tau


def change_frame(conn: ChartConnection, A: np.ndarray) -> ChartConnection:
    """Constant change of frame ``theta -> A theta``, ``omega -> A omega A^-1``."""
    A = np.asarray(A, dtype=float)
    Ai = np.linalg.inv(A)
    theta = np.einsum("mr,ra...->ma...", A, conn.theta)
    omega = np.einsum("mr,rsa...,sn->mna...", A, conn.omega, Ai)
    g = None
    if conn.g is not None:
        g = np.einsum("rm,rs...,sn->mn...", Ai, conn.g, Ai)
    return ChartConnection(conn.chart, theta, omega, g)


def levi_civita_holonomic(g: np.ndarray, chart: Chart) -> ChartConnection:
    """Coordinate frame ``theta = dx`` with ``omega^mu_{nu a} = Gamma^mu_{a nu}``."""
    n = chart.dim
    Gamma = christoffel(g, chart)
    theta = np.broadcast_to(np.eye(n).reshape((n, n) + (1,) * len(chart.shape)),
                            (n, n) + chart.shape).copy()
    return ChartConnection(chart, theta, np.swapaxes(Gamma, 1, 2), g)


# -- preset charts -----------------------------------------------------------

def cartesian_preset(chart: Chart) -> ChartConnection:
    n = chart.dim
    theta = np.broadcast_to(np.eye(n).reshape((n, n) + (1,) * len(chart.shape)),
                            (n, n) + chart.shape).copy()
    return ChartConnection(chart, theta, np.zeros((n, n, n) + chart.shape), np.eye(n))


def polar_preset(r: np.ndarray, phi: np.ndarray) -> ChartConnection:
    """Orthonormal frame ``(dr, r dphi)`` on the flat plane with its Levi-Civita connection."""
    chart = Chart((r, phi))
    R, _ = chart.mesh()
    theta = np.zeros((2, 2) + chart.shape)
    theta[0, 0] = 1.0
    theta[1, 1] = R
    omega = np.zeros((2, 2, 2) + chart.shape)
    omega[0, 1, 1] = -1.0  # omega^1_2 = -dphi
    omega[1, 0, 1] = 1.0
    return ChartConnection(chart, theta, omega, np.eye(2))


def sphere_preset(colatitude: np.ndarray, longitude: np.ndarray, radius: float = 1.0) -> ChartConnection:
    """Orthonormal frame ``(r dth, r sin(th) dph)`` on the round sphere."""
    chart = Chart((colatitude, longitude))
    th, _ = chart.mesh()
    theta = np.zeros((2, 2) + chart.shape)
    theta[0, 0] = radius
    theta[1, 1] = radius * np.sin(th)
    omega = np.zeros((2, 2, 2) + chart.shape)
    omega[0, 1, 1] = -np.cos(th)  # omega^1_2 = -cos(th) dph
    omega[1, 0, 1] = np.cos(th)
    return ChartConnection(chart, theta, omega, np.eye(2))


def polar_metric(r: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, Chart]:
    chart = Chart((r, phi))
    R, _ = chart.mesh()
    g = np.zeros((2, 2) + chart.shape)
    g[0, 0] = 1.0
    g[1, 1] = R**2
    return g, chart


def sphere_metric(colatitude: np.ndarray, longitude: np.ndarray, radius: float = 1.0):
    chart = Chart((colatitude, longitude))
    th, _ = chart.mesh()
    g = np.zeros((2, 2) + chart.shape)
    g[0, 0] = radius**2
    g[1, 1] = (radius * np.sin(th)) ** 2
    return g, chart
