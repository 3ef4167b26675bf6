"""Polar (Madelung) form of wavefunctions and the resulting fluid equations.

A wavefunction is written ``psi = R exp(iS/hbar)``.  Phase gradients are
always taken from ``psi`` itself, ``grad S = hbar Im(conj(psi) grad psi) / |psi|^2``,
rather than by differentiating the unwrapped ``S``: the unwrapped action of a
periodic state is generally not periodic (a plane wave has ``S = hbar k x``),
while ``psi`` is.  Time derivatives of ``S`` use the wrapped phase increment
between snapshots for the same reason, which also makes them blind to the
arbitrary unwrapping constant of each snapshot.

Points where ``R < eps * max(R)`` form the nodal mask.  The quantum
potential genuinely diverges there, so masked values are reported as 0 and
flagged rather than regularised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .fieldgrid import (NATURAL, ComplexField, GridSpec, RealField, UnitSystem, _spectral_derivative,
                        laplacian)
from .schrodinger import ZERO, Potential

DEFAULT_EPS = 1e-8


@dataclass(frozen=True)
class PolarFields:
    R: RealField
    S: RealField
    nodal_mask: np.ndarray
    hbar: float = 1.0
    regions: int = 1
    vortices: tuple = ()

    @property
    def multi_region(self) -> bool:
        return self.regions > 1

    @property
    def grid(self) -> GridSpec:
        return self.R.grid


@dataclass(frozen=True)
class HydroFields:
    """Mass density, momentum covector ``p = grad S`` and velocity ``p / m``."""

    rho: RealField
    p: list
    v: list
    mask: np.ndarray


def nodal_mask(amplitude: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    amplitude = np.abs(np.asarray(amplitude))
    peak = amplitude.max()
    if peak == 0.0:
        return np.ones(amplitude.shape, dtype=bool)
    return amplitude < eps * peak


def _wrap_angle(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _neighbour_graph(mask: np.ndarray):
    """Edges between face-adjacent unmasked points (no periodic wrap)."""
    idx = np.arange(mask.size).reshape(mask.shape)
    rows, cols = [], []
    for ax in range(mask.ndim):
        lo = [slice(None)] * mask.ndim
        hi = [slice(None)] * mask.ndim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        ok = ~mask[tuple(lo)] & ~mask[tuple(hi)]
        rows.append(idx[tuple(lo)][ok])
        cols.append(idx[tuple(hi)][ok])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n = mask.size
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    return graph + graph.T


def _unwrap_tree(phase: np.ndarray, mask: np.ndarray):
    """Unwrap along a breadth-first spanning tree of each unmasked region."""
    flat = phase.ravel()
    m = mask.ravel()
    out = flat.copy()
    graph = _neighbour_graph(mask)
    regions = 0
    done = np.zeros(flat.size, dtype=bool)
    for start in np.flatnonzero(~m):
        if done[start]:
            continue
        regions += 1
        order, pred = breadth_first_order(graph, start, directed=False, return_predecessors=True)
        done[order] = True
        for node in order[1:]:
            parent = pred[node]
            out[node] = out[parent] + _wrap_angle(flat[node] - flat[parent])
    return out.reshape(phase.shape), regions


def _unwrap_1d(phase: np.ndarray, mask: np.ndarray):
    out = phase.copy()
    regions = 0
    n = len(phase)
    i = 0
    while i < n:
        if mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and not mask[j + 1]:
            j += 1
        out[i:j + 1] = np.unwrap(phase[i:j + 1])
        regions += 1
        i = j + 1
    return out, regions


def plaquette_winding(phase: np.ndarray, mask: np.ndarray):
    """Quantised circulation around every elementary plaquette of unmasked points.

    Returns ``[(axes, index, winding)]`` for plaquettes with nonzero winding,
    where ``index`` is the lower corner and ``axes`` the plaquette plane.
    """
    found = []
    nd = phase.ndim
    for a in range(nd):
        for b in range(a + 1, nd):
            def sl(da, db):
                s = [slice(None)] * nd
                s[a] = slice(da, phase.shape[a] - 1 + da)
                s[b] = slice(db, phase.shape[b] - 1 + db)
                return tuple(s)
            corners = [sl(0, 0), sl(1, 0), sl(1, 1), sl(0, 1)]
            ph = [phase[c] for c in corners]
            ok = np.ones(ph[0].shape, dtype=bool)
            for c in corners:
                ok &= ~mask[c]
            circ = sum(_wrap_angle(ph[(i + 1) % 4] - ph[i]) for i in range(4))
            wind = np.rint(circ / (2.0 * np.pi)).astype(int)
            for index in zip(*np.nonzero(ok & (wind != 0))):
                found.append(((a, b), tuple(int(i) for i in index), int(wind[index])))
    return found


def decompose(psi: ComplexField, eps_node: float = DEFAULT_EPS,
              units: UnitSystem = NATURAL) -> PolarFields:
    """Polar decomposition ``psi -> (R, S)``.

    ``S`` is unwrapped region by region; each region starts from the raw
    phase of its first point.  On masked points ``S`` holds the wrapped raw
    phase (times hbar) and carries no meaning.  In 2D and 3D the phase is
    unwrapped along a spanning tree, and plaquettes with nonzero winding are
    listed in ``vortices``.
    """
    vals = psi.values
    R = np.abs(vals)
    mask = nodal_mask(R, eps_node)
    raw = np.angle(vals)
    if psi.grid.dim == 1:
        unwrapped, regions = _unwrap_1d(raw, mask)
        vortices = ()
    else:
        unwrapped, regions = _unwrap_tree(raw, mask)
        vortices = tuple(plaquette_winding(raw, mask))
    return PolarFields(RealField(psi.grid, R), RealField(psi.grid, units.hbar * unwrapped),
                       mask, units.hbar, regions, vortices)


def recompose(pf: PolarFields) -> ComplexField:
    return ComplexField(pf.grid, pf.R.values * np.exp(1j * pf.S.values / pf.hbar))


# -- phase calculus ----------------------------------------------------------

def _as_psi(x) -> ComplexField:
    return recompose(x) if isinstance(x, PolarFields) else x


def phase_gradient(psi, units: UnitSystem = NATURAL, eps: float = DEFAULT_EPS):
    """``grad S`` from ``hbar Im(conj(psi) grad psi) / |psi|^2``; zero on the nodal mask.

    Returns the list of component arrays and the mask.
    """
    psi = _as_psi(psi)
    vals = psi.values
    dens = np.abs(vals) ** 2
    mask = nodal_mask(np.sqrt(dens), eps)
    safe = np.where(mask, 1.0, dens)
    out = []
    for ax in range(psi.grid.dim):
        d = _spectral_derivative(vals, psi.grid, ax)
        out.append(np.where(mask, 0.0, units.hbar * np.imag(np.conj(vals) * d) / safe))
    return out, mask


def probability_current(psi, units: UnitSystem = NATURAL):
    """``R^2 grad S = hbar Im(conj(psi) grad psi)``; smooth through nodes."""
    psi = _as_psi(psi)
    return [units.hbar * np.imag(np.conj(psi.values) * _spectral_derivative(psi.values, psi.grid, ax))
            for ax in range(psi.grid.dim)]


def phase_time_derivative(before, after, dt_total: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Centred ``dS/dt`` from the wrapped phase increment across ``dt_total``."""
    a, b = _as_psi(before).values, _as_psi(after).values
    return units.hbar * np.angle(b * np.conj(a)) / dt_total


def hydro_fields(psi, units: UnitSystem = NATURAL, relativistic: bool = False,
                 eps: float = DEFAULT_EPS) -> HydroFields:
    """``rho = m R^2`` (or ``R^2`` when relativistic), ``p = grad S``, ``v = p/m``."""
    psi = _as_psi(psi)
    R2 = np.abs(psi.values) ** 2
    rho = R2 if relativistic else units.m * R2
    p, mask = phase_gradient(psi, units, eps)
    g = psi.grid
    return HydroFields(RealField(g, rho), [RealField(g, c) for c in p],
                       [RealField(g, c / units.m) for c in p], mask)


# -- quantum potential -------------------------------------------------------

def quantum_potential(rho: RealField, units: UnitSystem = NATURAL, eps: float = DEFAULT_EPS,
                      form: str = "amplitude", return_mask: bool = False):
    """``U_h = -(hbar^2/2m) laplacian(sqrt(rho)) / sqrt(rho)``.

    ``form="amplitude"`` differentiates ``sqrt(rho)`` spectrally.
    ``form="density"`` uses the equivalent
    ``laplacian(rho)/(2 rho) - |grad rho|^2/(4 rho^2)``, which stays spectrally
    accurate when ``sqrt(rho)`` has kinks at nodes (``rho = sin^2``) but loses
    accuracy faster in exponentially small tails.
    """
    vals = np.asarray(rho.values)
    if np.any(vals < 0):
        raise ValueError("density must be non-negative")
    amp = np.sqrt(vals)
    mask = nodal_mask(amp, eps)
    if mask.all():
        raise ValueError("density is masked everywhere")
    if form == "amplitude":
        lap = laplacian(RealField(rho.grid, amp)).values
        ratio = lap / np.where(mask, 1.0, amp)
    elif form == "density":
        lap = laplacian(rho).values
        grad2 = sum(_spectral_derivative(vals, rho.grid, ax) ** 2 for ax in range(rho.grid.dim))
        safe = np.where(mask, 1.0, vals)
        ratio = lap / (2.0 * safe) - grad2 / (4.0 * safe**2)
    else:
        raise ValueError(f"unknown form {form!r}")
    U = np.where(mask, 0.0, -units.hbar**2 / (2.0 * units.m) * ratio)
    out = RealField(rho.grid, U)
    return (out, mask) if return_mask else out


def quantum_potential_rel(rho0, units: UnitSystem = NATURAL, dt: float | None = None,
                          eps: float = DEFAULT_EPS, return_mask: bool = False):
    """Signed relativistic quantum term ``-hbar^2 c^2 box(sqrt(rho0)) / sqrt(rho0)``.

    The result is what the relativistic formula calls ``U_h^2``; it can be
    negative.  ``rho0`` is either a single static field or three consecutive
    time slices ``(before, at, after)`` spaced by ``dt``; the value refers to
    the middle slice.  ``box = (1/c^2) d_t^2 - laplacian``.
    """
    if isinstance(rho0, RealField):
        slices = None
        mid = rho0
    else:
        slices = list(rho0)
        if len(slices) != 3 or dt is None:
            raise ValueError("pass one static field or three slices plus dt")
        mid = slices[1]
    amp = np.sqrt(np.asarray(mid.values))
    mask = nodal_mask(amp, eps)
    if mask.all():
        raise ValueError("density is masked everywhere")
    box = -laplacian(RealField(mid.grid, amp)).values
    if slices is not None:
        a0, a2 = (np.sqrt(np.asarray(s.values)) for s in (slices[0], slices[2]))
        box = box + (a2 - 2.0 * amp + a0) / (dt**2 * units.c**2)
    val = -units.hbar**2 * units.c**2 * box / np.where(mask, 1.0, amp)
    out = RealField(mid.grid, np.where(mask, 0.0, val))
    return (out, mask) if return_mask else out


@dataclass(frozen=True)
class EffectiveDensity:
    rho0: RealField
    negative_radicand: np.ndarray


def effective_density(Uh2: RealField, units: UnitSystem = NATURAL) -> EffectiveDensity:
    """``rho0 = sqrt(m0^2 - U_h^2 / c^2)`` with mass and density in the same units.

    Points where the radicand is negative are set to 0 and flagged.
    """
    rad = units.m0**2 - np.asarray(Uh2.values) / units.c**2
    bad = rad < 0
    return EffectiveDensity(RealField(Uh2.grid, np.sqrt(np.where(bad, 0.0, rad))), bad)


# -- residuals ---------------------------------------------------------------

@dataclass(frozen=True)
class Residuals:
    """Residual fields at the middle snapshot, with the mask they were evaluated off."""

    fields: dict
    mask: np.ndarray
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.fields[key]

    def summary(self) -> dict:
        return {name: residual_norms(f, self.mask) for name, f in self.fields.items()}


def residual_norms(f: RealField, mask: np.ndarray | None = None) -> dict:
    vals = np.asarray(f.values)
    keep = np.ones(vals.shape, dtype=bool) if mask is None else ~mask
    sel = vals[keep]
    if sel.size == 0:
        return {"max": 0.0, "l2": 0.0}
    return {"max": float(np.max(np.abs(sel))),
            "l2": float(np.sqrt(np.sum(sel**2) * f.grid.cell_volume))}


def _three(snapshots):
    snaps = [_as_psi(s) for s in snapshots]
    if len(snaps) != 3:
        raise ValueError("need exactly three consecutive snapshots")
    return snaps


def schrodinger_residuals(snapshots: Sequence, dt: float, V: Potential = ZERO,
                          units: UnitSystem = NATURAL, eps: float = DEFAULT_EPS) -> Residuals:
    """Real and imaginary parts of the wave equation in polar form, at the middle snapshot.

    ``hj = dS/dt + |grad S|^2/2m + V + U_h`` and
    ``continuity = d(R^2)/dt + div(R^2 grad S / m)``.  Time derivatives are
    centred differences over ``2 dt``.
    """
    a, b, c = _three(snapshots)
    grid = b.grid
    dSdt = phase_time_derivative(a, c, 2.0 * dt, units)
    p, mask = phase_gradient(b, units, eps)
    R2 = np.abs(b.values) ** 2
    Uh, qmask = quantum_potential(RealField(grid, R2), units, eps, return_mask=True)
    mask = mask | qmask
    hj = dSdt + sum(pc**2 for pc in p) / (2.0 * units.m) + V.values(grid, units) + Uh.values
    hj = np.where(mask, 0.0, hj)
    j = probability_current(b, units)
    div = sum(_spectral_derivative(jc, grid, ax) for ax, jc in enumerate(j)) / units.m
    drho = (np.abs(c.values) ** 2 - np.abs(a.values) ** 2) / (2.0 * dt)
    cont = drho + div
    return Residuals({"hj": RealField(grid, hj), "continuity": RealField(grid, cont)}, mask)


def euler_residual(snapshots: Sequence, dt: float, V: Potential = ZERO,
                   units: UnitSystem = NATURAL, eps: float = DEFAULT_EPS) -> Residuals:
    """``dp/dt + (p.grad) p / m + grad(V + U_h)`` at the middle of five snapshots.

    ``dp/dt`` is the centred difference of ``p`` between snapshots 1 and 3,
    which equals the gradient of the centred ``dS/dt`` used in
    :func:`schrodinger_residuals` evaluated on snapshots 1..3.
    """
    snaps = [_as_psi(s) for s in snapshots]
    if len(snaps) != 5:
        raise ValueError("need five consecutive snapshots")
    grid = snaps[2].grid
    p0, m0 = phase_gradient(snaps[1], units, eps)
    p2, m2 = phase_gradient(snaps[3], units, eps)
    p, mask = phase_gradient(snaps[2], units, eps)
    R2 = np.abs(snaps[2].values) ** 2
    Uh, qmask = quantum_potential(RealField(grid, R2), units, eps, return_mask=True)
    mask = mask | m0 | m2 | qmask
    W = V.values(grid, units) + Uh.values
    out = {}
    for i in range(grid.dim):
        adv = sum(p[j] * _spectral_derivative(p[i], grid, j) for j in range(grid.dim)) / units.m
        r = (p2[i] - p0[i]) / (2.0 * dt) + adv + _spectral_derivative(W, grid, i)
        out[f"euler_{'xyz'[i]}"] = RealField(grid, np.where(mask, 0.0, r))
    return Residuals(out, mask)


def kg_residuals(snapshots: Sequence, dt: float, units: UnitSystem = NATURAL,
                 eps: float = DEFAULT_EPS) -> Residuals:
    """Polar form of the Klein-Gordon equation at the middle of three snapshots.

    With ``p_mu = d_mu S``, ``p_t = dS/dt`` and signature (+,-,-,-),
    ``p^2 = (p_t/c)^2 - |grad S|^2``.  Residuals:

    * ``mass_shell = p^2 - m0^2 c^2 - hbar^2 box(R)/R`` (real part)
    * ``codivergence = (1/c^2) d_t p_t - div(grad S)``
    * ``current_codivergence = (1/c^2) d_t (R^2 p_t) - div(R^2 grad S)``
      (imaginary part; vanishes for every solution)
    """
    a, b, c = _three(snapshots)
    grid = b.grid
    hbar, cc = units.hbar, units.c
    pt = phase_time_derivative(a, c, 2.0 * dt, units)
    p, mask = phase_gradient(b, units, eps)
    psq = (pt / cc) ** 2 - sum(pc**2 for pc in p)
    rhos = [RealField(grid, np.abs(s.values) ** 2) for s in (a, b, c)]
    Uh2, qmask = quantum_potential_rel(rhos, units, dt, eps, return_mask=True)
    mask = mask | qmask
    # hbar^2 box(R)/R = -Uh2 / c^2
    mass_shell = psq - (units.m0 * cc) ** 2 + Uh2.values / cc**2
    # time derivative of p_t from the phase of the outer snapshots is not
    # available at the middle slice without two more, so use the second
    # difference of the phase directly: d_t p_t = d_t^2 S
    ptt = hbar * (np.angle(c.values * np.conj(b.values)) - np.angle(b.values * np.conj(a.values))) / dt**2
    lapS = sum(_spectral_derivative(pc, grid, ax) for ax, pc in enumerate(p))
    codiv = ptt / cc**2 - lapS
    R2 = [np.abs(s.values) ** 2 for s in (a, b, c)]
    pt_a = hbar * np.angle(b.values * np.conj(a.values)) / dt
    pt_c = hbar * np.angle(c.values * np.conj(b.values)) / dt
    # R^2 p_t at the two half steps, differenced
    flux_t = (0.5 * (R2[1] + R2[2]) * pt_c - 0.5 * (R2[0] + R2[1]) * pt_a) / dt
    j = probability_current(b, units)
    divj = sum(_spectral_derivative(jc, grid, ax) for ax, jc in enumerate(j))
    cur = flux_t / cc**2 - divj
    return Residuals({"mass_shell": RealField(grid, np.where(mask, 0.0, mass_shell)),
                      "codivergence": RealField(grid, np.where(mask, 0.0, codiv)),
                      "current_codivergence": RealField(grid, cur)}, mask)


def spacetime_momentum(slices: Sequence, dt: float, units: UnitSystem = NATURAL,
                       eps: float = DEFAULT_EPS):
    """Covector ``p = dS`` on each interior slice of a run of wavefunction snapshots.

    Returns ``(ps, mask)`` where ``ps[k] = [p_t, p_x, ...]`` belongs to
    ``slices[k + 1]``.
    """
    snaps = [_as_psi(s) for s in slices]
    ps, mask = [], np.zeros(snaps[0].grid.shape, dtype=bool)
    for k in range(1, len(snaps) - 1):
        pt = phase_time_derivative(snaps[k - 1], snaps[k + 1], 2.0 * dt, units)
        p, m = phase_gradient(snaps[k], units, eps)
        ps.append([pt] + p)
        mask |= m
    return ps, mask


def momentum_system_residuals(rho0: RealField, p_slices: Sequence, dt: float,
                              units: UnitSystem = NATURAL) -> Residuals:
    """``dp = 0``, ``delta p = 0`` and ``p^2 = rho0^2 c^2`` at the middle of three slices.

    ``p_slices[k]`` is ``[p_t, p_1, ..., p_d]`` (arrays or fields) at three
    consecutive times spaced by ``dt``; ``rho0`` is the effective density at
    the middle time.  The closedness field is the largest antisymmetrised
    derivative component ``|d_mu p_nu - d_nu p_mu|`` at each point, with the
    time derivative of the spatial components balanced against the spatial
    derivative of ``p_t``.
    """
    if len(p_slices) != 3:
        raise ValueError("need p on three consecutive slices")
    grid = rho0.grid
    P = [[np.asarray(getattr(c, "values", c), dtype=float) for c in s] for s in p_slices]
    mid = P[1]
    d = grid.dim
    cc = units.c
    comps = {}
    for i in range(d):
        dt_pi = (P[2][i + 1] - P[0][i + 1]) / (2.0 * dt)
        comps[("t", i)] = dt_pi - _spectral_derivative(mid[0], grid, i)
    for i in range(d):
        for j in range(i + 1, d):
            comps[(i, j)] = (_spectral_derivative(mid[j + 1], grid, i)
                             - _spectral_derivative(mid[i + 1], grid, j))
    closed = np.zeros(grid.shape)
    for v in comps.values():
        closed = np.maximum(closed, np.abs(v))
    dt_pt = (P[2][0] - P[0][0]) / (2.0 * dt)
    codiv = dt_pt / cc**2 - sum(_spectral_derivative(mid[i + 1], grid, i) for i in range(d))
    psq = (mid[0] / cc) ** 2 - sum(mid[i + 1] ** 2 for i in range(d))
    shell = psq - np.asarray(rho0.values) ** 2 * cc**2
    return Residuals({"closedness": RealField(grid, closed),
                      "codivergence": RealField(grid, codiv),
                      "mass_shell": RealField(grid, shell)},
                     np.zeros(grid.shape, dtype=bool),
                     {"components": {str(k): RealField(grid, v) for k, v in comps.items()}})


system27_residuals = momentum_system_residuals


def kinematic_vorticity(rho: RealField, p: Sequence[RealField], eps: float = DEFAULT_EPS) -> dict:
    """Spatial components of ``d(p / rho)`` for ``p = grad S``.

    Since ``d(grad S) = 0`` this reduces to ``-rho^-2 d(rho) ^ dS``; both
    are returned for comparison.
    """
    grid = rho.grid
    r = np.asarray(rho.values)
    mask = nodal_mask(np.sqrt(r), eps)
    safe = np.where(mask, 1.0, r)
    u = [np.asarray(pc.values) / safe for pc in p]
    drho = [_spectral_derivative(r, grid, i) for i in range(grid.dim)]
    out = {}
    for i in range(grid.dim):
        for j in range(i + 1, grid.dim):
            direct = _spectral_derivative(u[j], grid, i) - _spectral_derivative(u[i], grid, j)
            wedge = -(drho[i] * p[j].values - drho[j] * p[i].values) / safe**2
            out[(i, j)] = (RealField(grid, np.where(mask, 0.0, direct)),
                           RealField(grid, np.where(mask, 0.0, wedge)))
    return out
