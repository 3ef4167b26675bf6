"""Linear and nonlinear Klein-Gordon fields.

Signature is (+,-,-,-) and the wave operator is ``box = (1/c^2) d_t^2 - laplacian``.
With this choice the linear equation ``box(phi) + k_C^2 phi = 0`` propagates
modes with ``omega^2 = c^2 (k^2 + k_C^2)``.

The nonlinear real equation for an amplitude ``R``::

    box(R) - kappa^2 R (1 - R^4) = 0,    kappa = m0 c / hbar

uses the dimensionally consistent coefficient ``kappa^2``.  Linearising about
``R = 1`` gives ``omega^2 = c^2 k^2 + 4 (m0 c^2 / hbar)^2``, a mode of mass ``2 m0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import oscillation_frequency  # noqa: F401  (re-export)
from .errors import NumericalError
from .fieldgrid import NATURAL, ComplexField, GridSpec, RealField, UnitSystem, laplacian
from .schrodinger import EvolutionConfig


@dataclass(frozen=True)
class KGState:
    phi: RealField | ComplexField
    phi_dot: RealField | ComplexField
    units: UnitSystem = NATURAL
    t: float = 0.0

    def __post_init__(self):
        if self.phi.grid != self.phi_dot.grid:
            raise ValueError("phi and phi_dot must share a grid")
        if type(self.phi) is not type(self.phi_dot):
            raise ValueError("phi and phi_dot must both be real or both complex")

    @property
    def grid(self) -> GridSpec:
        return self.phi.grid


def kg_dispersion(k, units: UnitSystem = NATURAL):
    """``omega = c sqrt(k^2 + k_C^2)``; ``k`` may be a scalar, array or wavevector norm."""
    k = np.asarray(k, dtype=float)
    return units.c * np.sqrt(k**2 + units.compton_wavenumber**2)


def five_dim_dispersion(k, k5, c=1.0):
    """Massless dispersion in five dimensions, ``omega = c sqrt(k^2 + k5^2)``.

    Separating the fifth coordinate with wavenumber ``k5 = k_C`` gives back
    :func:`kg_dispersion`.
    """
    k = np.asarray(k, dtype=float)
    return c * np.sqrt(k**2 + np.asarray(k5, dtype=float) ** 2)


def nlkg_linear_dispersion(k, units: UnitSystem = NATURAL):
    """Small oscillations about ``R = 1``: ``omega^2 = c^2 k^2 + 4 (m0 c^2 / hbar)^2``."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(units.c**2 * k**2 + 4.0 * (units.m0 * units.c**2 / units.hbar) ** 2)


def stability_bound(grid: GridSpec, units: UnitSystem = NATURAL, mass_scale: float = 0.0,
                    safety: float = 0.5) -> float:
    """Largest admissible leapfrog step: ``safety * dx / (c pi)``, tightened by the mass term."""
    kmax = grid.k_max()
    cfl = safety / (units.c * kmax)
    omega_max = units.c * np.sqrt(kmax**2 + mass_scale**2)
    return float(min(cfl, safety * 2.0 / omega_max))


def kg_energy(state: KGState) -> float:
    """Conserved quadratic form ``int |phi_t|^2/c^2 + |grad phi|^2 + k_C^2 |phi|^2`` (times 1/2)."""
    grid, u = state.grid, state.units
    coeffs = np.fft.fftn(state.phi.values)
    grad2 = np.sum(grid.k_squared() * np.abs(coeffs) ** 2) / grid.size
    kc2 = u.compton_wavenumber**2
    dens = np.abs(state.phi_dot.values) ** 2 / u.c**2 + kc2 * np.abs(state.phi.values) ** 2
    return float(0.5 * (dens.sum() + grad2) * grid.cell_volume)


def nlkg_energy(state: KGState) -> float:
    """``int R_t^2/2c^2 + |grad R|^2/2 - kappa^2 (R^2/2 - R^6/6)``, conserved by the nonlinear flow."""
    grid, u = state.grid, state.units
    R = state.phi.values
    coeffs = np.fft.fftn(R)
    grad2 = np.sum(grid.k_squared() * np.abs(coeffs) ** 2) / grid.size
    kappa2 = u.compton_wavenumber**2
    dens = state.phi_dot.values**2 / (2.0 * u.c**2) - kappa2 * (R**2 / 2.0 - R**6 / 6.0)
    return float((dens.sum() + 0.5 * grad2) * grid.cell_volume)


def _dominant_mode(grid, values):
    coeffs = np.abs(np.fft.fftn(values))
    idx = np.unravel_index(np.argmax(coeffs), coeffs.shape)
    return tuple(float(k[tuple(idx[j] if j == a else 0 for j in range(grid.dim))])
                 for a, k in enumerate(grid.wavenumbers()))


def _guard(grid, phi, phid, units, e0, step, energy_fn):
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(phid))):
        raise NumericalError(f"non-finite field at step {step}", step=step)
    cls = ComplexField if np.iscomplexobj(phi) else RealField
    e = energy_fn(KGState(cls(grid, phi), cls(grid, phid), units))
    if abs(e - e0) > 1e6 * max(abs(e0), 1e-300):
        mode = _dominant_mode(grid, phi - phi.mean())
        raise NumericalError(
            f"instability at step {step}: energy moved from {e0:.3e} to {e:.3e}, "
            f"dominant mode k={mode}", step=step, mode=mode)


def evolve_kg(state: KGState, cfg: EvolutionConfig, scheme: str = "exact",
              check_every: int = 50) -> KGState:
    """Evolve ``box(phi) + k_C^2 phi = 0``.

    ``scheme="exact"`` advances every Fourier mode by its exact rotation, so a
    step of any size has no phase error.  ``scheme="leapfrog"`` is the
    classical Stormer-Verlet update with a spectral Laplacian and must satisfy
    :func:`stability_bound`.
    """
    grid, u = state.grid, state.units
    dt = cfg.dt
    kc = u.compton_wavenumber
    omega = u.c * np.sqrt(grid.k_squared() + kc**2)
    phi = np.fft.fftn(state.phi.values)
    phid = np.fft.fftn(state.phi_dot.values)
    e0 = kg_energy(state)
    real = isinstance(state.phi, RealField)

    if scheme == "exact":
        cw, sw = np.cos(omega * dt), np.sin(omega * dt)
        with np.errstate(invalid="ignore", divide="ignore"):
            sinc = np.where(omega > 0, sw / np.where(omega > 0, omega, 1.0), dt)

        def advance(phi, phid):
            return cw * phi + sinc * phid, -omega * sw * phi + cw * phid
    elif scheme == "leapfrog":
        bound = stability_bound(grid, u, kc)
        if dt > bound:
            raise ValueError(f"dt={dt} exceeds the leapfrog stability bound {bound:.4g}")
        w2 = omega**2

        def advance(phi, phid):
            phid = phid - 0.5 * dt * w2 * phi
            phi = phi + dt * phid
            return phi, phid - 0.5 * dt * w2 * phi
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    def to_space(a):
        a = np.fft.ifftn(a)
        return a.real if real else a

    for i in range(1, int(cfg.steps) + 1):
        phi, phid = advance(phi, phid)
        if i % check_every == 0 or i == cfg.steps:
            _guard(grid, to_space(phi), to_space(phid), u, e0, i, kg_energy)
    cls = type(state.phi)
    return KGState(cls(grid, to_space(phi)), cls(grid, to_space(phid)), u, state.t + cfg.steps * dt)


def nlkg_force(R: np.ndarray, grid: GridSpec, units: UnitSystem) -> np.ndarray:
    """``d^2 R / dt^2 = c^2 (laplacian(R) + kappa^2 R (1 - R^4))``."""
    lap = np.fft.ifftn(-grid.k_squared() * np.fft.fftn(R)).real
    kappa2 = units.compton_wavenumber**2
    return units.c**2 * (lap + kappa2 * R * (1.0 - R**4))


def evolve_nlkg(state: KGState, cfg: EvolutionConfig, check_every: int = 50,
                record=None) -> KGState:
    """Kick-drift-kick leapfrog for the nonlinear real equation.

    ``record``, if given, is called as ``record(t, R, R_dot)`` after every step.
    """
    if not isinstance(state.phi, RealField):
        raise ValueError("the nonlinear equation evolves a real amplitude")
    grid, u = state.grid, state.units
    dt = cfg.dt
    bound = stability_bound(grid, u, 2.0 * u.compton_wavenumber)
    if dt > bound:
        raise ValueError(f"dt={dt} exceeds the leapfrog stability bound {bound:.4g}")
    R = np.array(state.phi.values)
    Rd = np.array(state.phi_dot.values)
    e0 = nlkg_energy(state)
    acc = nlkg_force(R, grid, u)
    t = state.t
    for i in range(1, int(cfg.steps) + 1):
        Rd += 0.5 * dt * acc
        R += dt * Rd
        acc = nlkg_force(R, grid, u)
        Rd += 0.5 * dt * acc
        t = state.t + i * dt
        if record is not None:
            record(t, R.copy(), Rd.copy())
        if i % check_every == 0 or i == cfg.steps:
            _guard(grid, R, Rd, u, e0, i, nlkg_energy)
    return KGState(RealField(grid, R), RealField(grid, Rd), u, t)


def nlkg_residual(R: RealField, R_tt: RealField, units: UnitSystem = NATURAL) -> RealField:
    """Pointwise ``box(R) - kappa^2 R (1 - R^4)`` given the second time derivative."""
    if R.grid != R_tt.grid:
        raise ValueError("R and R_tt must share a grid")
    kappa2 = units.compton_wavenumber**2
    lap = laplacian(R).values
    r = R.values
    return RealField(R.grid, R_tt.values / units.c**2 - lap - kappa2 * r * (1.0 - r**4))


def nlkg_residual_from_snapshots(prev: RealField, cur: RealField, nxt: RealField, dt: float,
                                 units: UnitSystem = NATURAL) -> RealField:
    """Residual at the middle snapshot with a centred second difference in time."""
    R_tt = (nxt.values - 2.0 * cur.values + prev.values) / dt**2
    return nlkg_residual(cur, RealField(cur.grid, R_tt), units)


def plane_wave_state(grid: GridSpec, k, units: UnitSystem = NATURAL, amplitude=1.0) -> KGState:
    """Positive-frequency plane wave ``A exp(i(k.x - omega t))`` at ``t = 0``."""
    k = np.broadcast_to(np.asarray(k, dtype=float), (grid.dim,))
    omega = float(kg_dispersion(np.linalg.norm(k), units))
    phase = sum(kk * x for kk, x in zip(k, grid.coords()))
    phi = amplitude * np.exp(1j * phase)
    return KGState(ComplexField(grid, phi), ComplexField(grid, -1j * omega * phi), units)


def positive_frequency_packet(grid: GridSpec, envelope: np.ndarray, k0,
                              units: UnitSystem = NATURAL) -> KGState:
    """``envelope * exp(i k0.x)`` with the time derivative of the positive-frequency branch."""
    k0 = np.broadcast_to(np.asarray(k0, dtype=float), (grid.dim,))
    phase = sum(kk * x for kk, x in zip(k0, grid.coords()))
    phi = envelope * np.exp(1j * phase)
    omega = kg_dispersion(np.sqrt(grid.k_squared()), units)
    phid = np.fft.ifftn(-1j * omega * np.fft.fftn(phi))
    return KGState(ComplexField(grid, phi), ComplexField(grid, phid), units)
