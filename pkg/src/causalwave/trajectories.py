"""Guided trajectories, Hamiltonian rays and the Hamilton-Jacobi residual.

The guidance law is ``dx/dt = grad S / m`` with ``psi = R exp(iS/hbar)`` and
the sign convention of :mod:`causalwave.schrodinger`.  Under the conjugate
convention ``(hbar/i) dpsi/dt = H psi`` the same flow reads ``-grad S / m``.

Rays integrate the standard characteristic pair ``dx/dt = dH/dp``,
``dp/dt = -dH/dx``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .fieldgrid import NATURAL, ComplexField, GridSpec, RealField, UnitSystem
from .madelung import DEFAULT_EPS, nodal_mask, phase_gradient, phase_time_derivative
from .schrodinger import Series


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray          # (nt, dim)
    label: str = ""
    entered_mask: bool = False
    momenta: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float).reshape(len(self.times), -1)
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("trajectory positions must be finite")


@dataclass(frozen=True)
class RayState:
    x: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if x.shape != p.shape:
            raise ValueError("x and p must have the same shape")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p)) and np.isfinite(self.t)):
            raise ValueError("ray state must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)


# -- guided flow -------------------------------------------------------------

class VelocityField:
    """Cubic-spline interpolant of ``grad S / m`` over a snapshot series.

    Time is interpolated linearly between snapshots.  Positions wrap around
    the periodic box.
    """

    def __init__(self, series: Series, units: UnitSystem = NATURAL, eps: float = DEFAULT_EPS):
        self.grid: GridSpec = series.grid
        self.times = np.asarray(series.times, dtype=float)
        if len(self.times) < 2 or np.any(np.diff(self.times) <= 0):
            raise ValueError("need at least two snapshots at increasing times")
        self.coeffs = []
        self.masks = []
        for psi in series.fields:
            p, mask = phase_gradient(psi, units, eps)
            self.coeffs.append([ndimage.spline_filter(c / units.m, order=3, mode="grid-wrap")
                                for c in p])
            self.masks.append(mask)

    def _index_coords(self, x: np.ndarray) -> np.ndarray:
        g = self.grid
        return np.stack([(x[:, a] - g.origin[a]) / g.dx[a] for a in range(g.dim)])

    def _at_snapshot(self, k: int, idx: np.ndarray) -> np.ndarray:
        return np.stack([ndimage.map_coordinates(c, idx, order=3, mode="grid-wrap", prefilter=False)
                         for c in self.coeffs[k]], axis=1)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        idx = self._index_coords(x)
        k = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        w = (t - self.times[k]) / (self.times[k + 1] - self.times[k])
        return (1.0 - w) * self._at_snapshot(k, idx) + w * self._at_snapshot(k + 1, idx)

    def in_mask(self, t: float, x: np.ndarray) -> np.ndarray:
        """True where the nearest grid point is nodal in the bracketing snapshots."""
        g = self.grid
        near = tuple(np.mod(np.rint((x[:, a] - g.origin[a]) / g.dx[a]).astype(int), g.n[a])
                     for a in range(g.dim))
        k = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        return self.masks[k][near] | self.masks[k + 1][near]


def _as_points(seeds, dim):
    pts = np.asarray(seeds, dtype=float)
    if dim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"seeds must be points in {dim} dimensions")
    return pts


def integrate_guided(series: Series, seeds, units: UnitSystem = NATURAL, dt: float | None = None,
                     eps: float = DEFAULT_EPS, velocity: VelocityField | None = None):
    """RK4 integration of an ensemble.

    Returns ``(times, positions[nt, N, dim], entered_mask[N])``.  Members
    that enter the nodal mask are frozen at their last position.
    """
    vf = velocity or VelocityField(series, units, eps)
    x = _as_points(seeds, vf.grid.dim).copy()
    if np.any(vf.in_mask(vf.times[0], x)):
        bad = np.flatnonzero(vf.in_mask(vf.times[0], x))
        raise ValueError(f"seeds {bad.tolist()} lie on the nodal mask")
    t0, t1 = vf.times[0], vf.times[-1]
    if dt is None:
        dt = float(np.min(np.diff(vf.times)))
    nsteps = max(1, int(np.ceil((t1 - t0) / dt - 1e-9)))
    h = (t1 - t0) / nsteps
    times = t0 + h * np.arange(nsteps + 1)
    out = np.empty((nsteps + 1,) + x.shape)
    out[0] = x
    stopped = np.zeros(len(x), dtype=bool)
    for i in range(nsteps):
        t = times[i]
        k1 = vf(t, x)
        k2 = vf(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = vf(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = vf(t + h, x + h * k3)
        new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        new[stopped] = x[stopped]
        hit = ~stopped & vf.in_mask(times[i + 1], new)
        new[hit] = x[hit]
        stopped |= hit
        x = new
        out[i + 1] = x
    return times, out, stopped


def bohm_trajectories(series: Series, seeds, units: UnitSystem = NATURAL, dt: float | None = None,
                      eps: float = DEFAULT_EPS) -> list[Trajectory]:
    """One :class:`Trajectory` per seed, labelled by seed index."""
    times, pos, stopped = integrate_guided(series, seeds, units, dt, eps)
    return [Trajectory(times, pos[:, j], label=f"seed{j}", entered_mask=bool(stopped[j]))
            for j in range(pos.shape[1])]


def sample_density(psi: ComplexField, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` points from ``|psi|^2``: pick a grid cell, then a uniform point in it."""
    g = psi.grid
    prob = np.abs(psi.values).ravel() ** 2
    prob = prob / prob.sum()
    cells = rng.choice(prob.size, size=n, p=prob)
    idx = np.unravel_index(cells, g.shape)
    pts = np.stack([g.origin[a] + g.dx[a] * (idx[a] + rng.uniform(-0.5, 0.5, size=n))
                    for a in range(g.dim)], axis=1)
    return pts


@dataclass
class EquivarianceReport:
    n: int
    t: float
    l1: float
    bin_edges: list
    ensemble_hist: np.ndarray
    density_hist: np.ndarray
    stopped: int = 0

    def to_dict(self) -> dict:
        return {"N": self.n, "T": self.t, "L1": self.l1, "stopped": self.stopped,
                "bin_edges": [e.tolist() for e in self.bin_edges],
                "ensemble": self.ensemble_hist.ravel().tolist(),
                "density": self.density_hist.ravel().tolist()}


def _cell_bins(psi: ComplexField, cells_per_bin: int, support: float):
    """Bin edges on cell boundaries covering the region where ``|psi|^2 > support * max``."""
    g = psi.grid
    dens = np.abs(psi.values) ** 2
    edges, groups = [], []
    for a in range(g.dim):
        other = tuple(i for i in range(g.dim) if i != a)
        prof = dens.max(axis=other) if other else dens
        keep = np.flatnonzero(prof > support * prof.max())
        lo, hi = keep[0], keep[-1] + 1
        nb = max(1, int(np.ceil((hi - lo) / cells_per_bin)))
        hi = min(g.n[a], lo + nb * cells_per_bin)
        starts = np.arange(lo, hi, cells_per_bin)
        e = g.origin[a] + g.dx[a] * (np.append(starts, hi) - 0.5)
        edges.append(e)
        groups.append((starts, hi))
    return edges, groups


def equivariance_check(series: Series, ensemble, units: UnitSystem = NATURAL, bins: int = 30,
                       dt: float | None = None, eps: float = DEFAULT_EPS,
                       support: float = 1e-6) -> EquivarianceReport:
    """Transport an ensemble and compare its histogram with ``|psi(T)|^2``.

    Bins are aligned with grid cells, so the reference probability of a bin
    is the exact grid sum of ``|psi(T)|^2``.  ``L1`` is the sum of absolute
    differences of bin probabilities; ensemble members outside the bins
    count fully against it.
    """
    times, pos, stopped = integrate_guided(series, ensemble, units, dt, eps)
    final = series.fields[-1]
    g = final.grid
    dens = np.abs(final.values) ** 2
    dens = dens / dens.sum()
    span = [0] * g.dim
    for a in range(g.dim):
        other = tuple(i for i in range(g.dim) if i != a)
        prof = dens.max(axis=other) if other else dens
        keep = np.flatnonzero(prof > support * prof.max())
        span[a] = keep[-1] + 1 - keep[0]
    cells_per_bin = max(1, int(round(max(span) / bins)))
    edges, groups = _cell_bins(final, cells_per_bin, support)
    ref = dens
    for a, (starts, hi) in enumerate(groups):
        ref = np.add.reduceat(np.take(ref, np.arange(starts[0], hi), axis=a),
                              starts - starts[0], axis=a)
    x = pos[-1]
    # wrap into the box so periodic images count in the right bin
    for a in range(g.dim):
        x[:, a] = g.origin[a] - 0.5 * g.dx[a] + np.mod(x[:, a] - g.origin[a] + 0.5 * g.dx[a], g.length[a])
    hist, _ = np.histogramdd(x, bins=edges)
    hist = hist / len(x)
    l1 = float(np.sum(np.abs(hist - ref)) + (1.0 - hist.sum()) + max(0.0, 1.0 - ref.sum()))
    return EquivarianceReport(len(x), float(times[-1] - times[0]), l1, edges, hist, ref,
                              int(stopped.sum()))


# -- rays --------------------------------------------------------------------

@dataclass(frozen=True)
class Hamiltonian:
    """``H(x, p)``; arrays carry the vector component on axis 0.

    Separable Hamiltonians ``T(p) + V(x)`` supply ``kinetic``/``dT_dp`` and
    ``potential``/``dV_dx``.  A general one supplies ``value``, ``dH_dx`` and
    ``dH_dp`` and is integrated by the implicit midpoint rule.
    """

    name: str
    kinetic: Callable | None = None
    dT_dp: Callable | None = None
    potential: Callable | None = None
    dV_dx: Callable | None = None
    general: tuple | None = None
    params: dict = field(default_factory=dict)

    @property
    def separable(self) -> bool:
        return self.general is None

    def value(self, x, p):
        if self.general is not None:
            return self.general[0](x, p)
        v = self.potential(x) if self.potential else 0.0
        return self.kinetic(p) + v

    def dH_dp(self, x, p):
        if self.general is not None:
            return self.general[2](x, p)
        return self.dT_dp(p)

    def dH_dx(self, x, p):
        if self.general is not None:
            return self.general[1](x, p)
        return self.dV_dx(x) if self.dV_dx else np.zeros_like(np.asarray(x, dtype=float))


def free_hamiltonian(m: float = 1.0) -> Hamiltonian:
    return Hamiltonian("free", lambda p: np.sum(np.asarray(p) ** 2, axis=0) / (2.0 * m),
                       lambda p: np.asarray(p) / m, params={"m": m})


def harmonic_hamiltonian(m: float = 1.0, omega: float = 1.0) -> Hamiltonian:
    return Hamiltonian("harmonic", lambda p: np.sum(np.asarray(p) ** 2, axis=0) / (2.0 * m),
                       lambda p: np.asarray(p) / m,
                       lambda x: 0.5 * m * omega**2 * np.sum(np.asarray(x) ** 2, axis=0),
                       lambda x: m * omega**2 * np.asarray(x), params={"m": m, "omega": omega})


def relativistic_hamiltonian(m0: float = 1.0, c: float = 1.0) -> Hamiltonian:
    """``H = c sqrt(p^2 + m0^2 c^2)``; rays move at ``c^2 p / H``."""
    def T(p):
        return c * np.sqrt(np.sum(np.asarray(p) ** 2, axis=0) + (m0 * c) ** 2)

    def dT(p):
        p = np.asarray(p)
        return c * p / np.sqrt(np.sum(p**2, axis=0) + (m0 * c) ** 2)
    return Hamiltonian("relativistic", T, dT, params={"m0": m0, "c": c})


@dataclass(frozen=True)
class RayConfig:
    dt: float
    steps: int
    method: str = "yoshida4"
    save_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.method not in ("leapfrog", "yoshida4", "midpoint"):
            raise ValueError(f"unknown ray integrator {self.method!r}")


_Y1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_Y0 = -(2.0 ** (1.0 / 3.0)) * _Y1


def _leapfrog(H: Hamiltonian, x, p, h):
    p = p - 0.5 * h * H.dH_dx(x, p)
    x = x + h * H.dT_dp(p)
    p = p - 0.5 * h * H.dH_dx(x, p)
    return x, p


def _midpoint(H: Hamiltonian, x, p, h, tol=1e-14, maxiter=100):
    xn, pn = x, p
    for _ in range(maxiter):
        xm, pm = 0.5 * (x + xn), 0.5 * (p + pn)
        x2 = x + h * H.dH_dp(xm, pm)
        p2 = p - h * H.dH_dx(xm, pm)
        done = max(np.max(np.abs(x2 - xn)), np.max(np.abs(p2 - pn))) < tol * (1 + np.max(np.abs(x2)))
        xn, pn = x2, p2
        if done:
            break
    return xn, pn


def ray_step(H: Hamiltonian, x, p, h, method="yoshida4"):
    """One step for arrays ``x, p`` of shape ``(dim, N)``."""
    if method == "midpoint" or not H.separable:
        return _midpoint(H, x, p, h)
    if method == "leapfrog":
        return _leapfrog(H, x, p, h)
    for w in (_Y1, _Y0, _Y1):
        x, p = _leapfrog(H, x, p, w * h)
    return x, p


def hamilton_rays(H: Hamiltonian, initial: Sequence[RayState], cfg: RayConfig) -> list[Trajectory]:
    """Integrate ``dx/dt = dH/dp``, ``dp/dt = -dH/dx`` for each initial state.

    Separable Hamiltonians use the kick-drift-kick leapfrog (``method="leapfrog"``)
    or its fourth-order Yoshida composition (default); others use the
    implicit midpoint rule.  All three are symplectic.
    """
    initial = list(initial)
    if not initial:
        return []
    x = np.stack([s.x for s in initial], axis=1)
    p = np.stack([s.p for s in initial], axis=1)
    t0 = np.array([s.t for s in initial])
    every = max(1, int(cfg.save_every))
    xs, ps, ts = [x.copy()], [p.copy()], [0.0]
    for i in range(1, cfg.steps + 1):
        x, p = ray_step(H, x, p, cfg.dt, cfg.method)
        if i % every == 0 or i == cfg.steps:
            xs.append(x.copy())
            ps.append(p.copy())
            ts.append(i * cfg.dt)
    X, P, T = np.array(xs), np.array(ps), np.array(ts)
    return [Trajectory(t0[j] + T, X[:, :, j], label=f"ray{j}", momenta=P[:, :, j])
            for j in range(len(initial))]


def characteristic_action(H: Hamiltonian, x0, p0, S0, cfg: RayConfig):
    """Transport ``S`` along rays with ``dS/dt = p . dH/dp - H``.

    ``x0, p0`` have shape ``(dim, N)`` and ``S0`` shape ``(N,)``.  Returns
    ``(times, x[nt, dim, N], p[nt, dim, N], S[nt, N])``.  The action
    increment is accumulated with the trapezoid rule on the sub-steps, so
    it shares the order of the chosen integrator only for ``leapfrog``;
    for exact comparison integrate ``p.dH/dp - H`` with small ``dt``.
    """
    x = np.array(x0, dtype=float)
    p = np.array(p0, dtype=float)
    S = np.array(S0, dtype=float)
    lag = np.sum(p * H.dH_dp(x, p), axis=0) - H.value(x, p)
    xs, ps, Ss, ts = [x.copy()], [p.copy()], [S.copy()], [0.0]
    every = max(1, int(cfg.save_every))
    for i in range(1, cfg.steps + 1):
        x, p = ray_step(H, x, p, cfg.dt, cfg.method)
        lag_new = np.sum(p * H.dH_dp(x, p), axis=0) - H.value(x, p)
        S = S + 0.5 * cfg.dt * (lag + lag_new)
        lag = lag_new
        if i % every == 0 or i == cfg.steps:
            xs.append(x.copy())
            ps.append(p.copy())
            Ss.append(S.copy())
            ts.append(i * cfg.dt)
    return np.array(ts), np.array(xs), np.array(ps), np.array(Ss)


# -- Hamilton-Jacobi residual -------------------------------------------------

def hj_residual(S_slices: Sequence[RealField], dt: float, H: Hamiltonian,
                hbar: float | None = None, eps: float = DEFAULT_EPS, t: float = 0.0) -> RealField:
    """``dS/dt + H(x, grad S)`` at the middle of three slices.

    With ``hbar`` given, ``S`` is treated as the phase of ``exp(iS/hbar)``:
    derivatives come from the periodic phase factor (spectral in space,
    wrapped difference in time), which suits actions obtained from a
    wavefunction.  Without it, ``S`` is differentiated directly with
    second-order centred differences.
    """
    if len(S_slices) != 3:
        raise ValueError("need three consecutive slices of S")
    grid = S_slices[1].grid
    x = np.stack(grid.coords())
    if hbar is not None:
        units = UnitSystem.explicit(hbar=hbar)
        psis = [ComplexField(grid, np.exp(1j * np.asarray(s.values) / hbar)) for s in S_slices]
        dSdt = phase_time_derivative(psis[0], psis[2], 2.0 * dt, units)
        p, mask = phase_gradient(psis[1], units, eps)
        p = np.stack(p)
    else:
        dSdt = (S_slices[2].values - S_slices[0].values) / (2.0 * dt)
        mid = np.asarray(S_slices[1].values)
        p = np.stack([np.gradient(mid, grid.axes()[a], axis=a, edge_order=2) for a in range(grid.dim)])
    return RealField(grid, dSdt + H.value(x, p))


def oscillator_action(x, t, m=1.0, omega=1.0):
    """Action of the harmonic oscillator family started with ``S(x, 0) = 0``."""
    return -0.5 * m * omega * np.asarray(x) ** 2 * np.tan(omega * t)
