"""Split-step spectral propagation of the non-relativistic wave equation.

Sign convention::

    i hbar dpsi/dt = -(hbar^2 / 2m) laplacian(psi) + V psi

Writing the equation as ``(hbar/i) dpsi/dt = ...`` instead yields the complex
conjugate evolution; the two are mapped onto each other by ``S -> -S`` in
``psi = R exp(iS/hbar)``.  The guidance velocity used elsewhere in the
package, ``v = +grad(S)/m``, belongs to the convention adopted here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_hermite, factorial

from .errors import ConvergenceError, NumericalError
from .fieldgrid import NATURAL, ComplexField, GridSpec, RealField, UnitSystem


@dataclass(frozen=True)
class Potential:
    """External potential.

    ``kind`` is one of ``zero``, ``harmonic`` (``V = m omega^2 r^2 / 2``),
    ``square_well`` (``-depth`` inside a centred box of side ``width``,
    0 outside) or ``tabulated`` (``table`` holds the samples).
    """

    kind: str = "zero"
    omega: float = 1.0
    depth: float = 0.0
    width: float = 1.0
    center: float = 0.0
    table: RealField | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "harmonic", "square_well", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        for name in ("omega", "depth", "width", "center"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"potential parameter {name} must be finite")
        if self.kind == "tabulated" and self.table is None:
            raise ValueError("tabulated potential needs a table")

    @classmethod
    def harmonic(cls, omega=1.0):
        return cls("harmonic", omega=float(omega))

    @classmethod
    def square_well(cls, depth, width, center=0.0):
        return cls("square_well", depth=float(depth), width=float(width), center=float(center))

    @classmethod
    def tabulated(cls, table: RealField):
        return cls("tabulated", table=table)

    def values(self, grid: GridSpec, units: UnitSystem = NATURAL) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(grid.shape)
        if self.kind == "harmonic":
            r2 = sum((x - self.center) ** 2 for x in grid.coords())
            with np.errstate(over="ignore", invalid="ignore"):
                V = 0.5 * units.m * np.float64(self.omega) ** 2 * r2
            if not np.all(np.isfinite(V)):
                raise ValueError(f"harmonic potential overflows on this grid (omega = {self.omega})")
            return V
        if self.kind == "square_well":
            inside = np.ones(grid.shape, dtype=bool)
            for x in grid.coords():
                inside &= np.abs(x - self.center) < 0.5 * self.width
            return np.where(inside, -self.depth, 0.0)
        if self.table.grid != grid:
            raise ValueError("tabulated potential does not match the grid")
        return np.asarray(self.table.values, dtype=float)


ZERO = Potential()


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    units: UnitSystem = NATURAL
    save_every: int | None = None

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.save_every is not None and int(self.save_every) < 1:
            raise ValueError("save_every must be >= 1")


@dataclass
class Series:
    """Snapshots ``fields[i]`` at ``times[i]`` of one run."""

    times: np.ndarray
    fields: list = field(default_factory=list)

    def __len__(self):
        return len(self.fields)

    @property
    def grid(self) -> GridSpec:
        return self.fields[0].grid


class SplitStepper:
    """Strang splitting, kinetic half step / potential / kinetic half step.

    Each factor is unitary, so the L2 norm is conserved to rounding whatever
    the potential.
    """

    def __init__(self, grid: GridSpec, potential: Potential, units: UnitSystem, dt: float,
                 imaginary: bool = False):
        self.grid = grid
        self.units = units
        self.dt = dt
        self.V = potential.values(grid, units)
        hbar, m = units.hbar, units.m
        kin = hbar * grid.k_squared() / (2.0 * m)
        pot = self.V / hbar
        if imaginary:
            self.half_kin = np.exp(-0.5 * dt * kin)
            self.full_pot = np.exp(-dt * (pot - pot.min()))
        else:
            self.half_kin = np.exp(-0.5j * dt * kin)
            self.full_pot = np.exp(-1j * dt * pot)

    def step(self, psi: np.ndarray) -> np.ndarray:
        psi = np.fft.ifftn(self.half_kin * np.fft.fftn(psi))
        psi = self.full_pot * psi
        return np.fft.ifftn(self.half_kin * np.fft.fftn(psi))


def _check_finite(psi, step):
    if not np.all(np.isfinite(psi)):
        raise NumericalError(f"non-finite wavefunction at step {step}", step=step)


def evolve(psi: ComplexField, V: Potential, cfg: EvolutionConfig) -> ComplexField:
    """Propagate ``psi`` for ``cfg.steps`` steps of size ``cfg.dt``."""
    stepper = SplitStepper(psi.grid, V, cfg.units, cfg.dt)
    vals = np.array(psi.values)
    for i in range(1, int(cfg.steps) + 1):
        vals = stepper.step(vals)
        if i % 64 == 0 or i == cfg.steps:
            _check_finite(vals, i)
    return ComplexField(psi.grid, vals)


def evolve_series(psi: ComplexField, V: Potential, cfg: EvolutionConfig, t0: float = 0.0) -> Series:
    """Like :func:`evolve` but keeps every ``cfg.save_every``-th state (and the initial one)."""
    every = int(cfg.save_every or 1)
    stepper = SplitStepper(psi.grid, V, cfg.units, cfg.dt)
    vals = np.array(psi.values)
    times, fields = [t0], [psi]
    for i in range(1, int(cfg.steps) + 1):
        vals = stepper.step(vals)
        if i % every == 0 or i == cfg.steps:
            _check_finite(vals, i)
            times.append(t0 + i * cfg.dt)
            fields.append(ComplexField(psi.grid, vals))
    return Series(np.array(times), fields)


def energy(psi: ComplexField, V: Potential, units: UnitSystem = NATURAL) -> float:
    """Rayleigh quotient ``<psi|H|psi> / <psi|psi>`` with an exact spectral kinetic term."""
    grid = psi.grid
    coeffs = np.fft.fftn(psi.values)
    weight = np.abs(coeffs) ** 2
    kinetic = np.sum(units.hbar**2 * grid.k_squared() / (2.0 * units.m) * weight) / np.sum(weight)
    dens = np.abs(psi.values) ** 2
    potential = np.sum(V.values(grid, units) * dens) / np.sum(dens)
    return float(kinetic + potential)


@dataclass
class GroundState:
    psi: ComplexField
    energy: float
    iterations: int
    residual: float


def ground_state(V: Potential, grid: GridSpec, units: UnitSystem = NATURAL, tol: float = 1e-12,
                 dt_schedule=(0.1, 0.01, 1e-3, 1e-4), max_steps: int = 1_000_000,
                 initial: ComplexField | None = None, state_tol: float = 1e-9) -> GroundState:
    """Imaginary-time relaxation with renormalisation after every step.

    Each stage of ``dt_schedule`` runs until the energy changes by less than
    ``tol`` per unit imaginary time and the state by less than ``state_tol``
    (L2 norm per unit imaginary time).  The energy alone is a poor stopping
    signal since its error is quadratic in the state error.  The last stage
    sets the splitting error of the result, which is O(dt^2).
    """
    if initial is None:
        r2 = sum(x**2 for x in grid.coords())
        psi = np.exp(-r2 / (0.5 * min(grid.length) ** 2)).astype(complex)
    else:
        psi = np.array(initial.values, dtype=complex)
    dv = grid.cell_volume

    def normalize(a):
        return a / np.sqrt(np.sum(np.abs(a) ** 2) * dv)

    psi = normalize(psi)
    e_old = energy(ComplexField(grid, psi), V, units)
    total = 0
    residual = np.inf
    check = 16
    for dt in dt_schedule:
        stepper = SplitStepper(grid, V, units, dt, imaginary=True)
        while True:
            prev = psi
            for _ in range(check):
                psi = normalize(stepper.step(psi))
            total += check
            _check_finite(psi, total)
            e_new = energy(ComplexField(grid, psi), V, units)
            residual = abs(e_new - e_old) / (check * dt)
            change = np.sqrt(np.sum(np.abs(psi - prev) ** 2) * dv) / (check * dt)
            e_old = e_new
            if residual < tol and change < state_tol:
                break
            if total >= max_steps:
                raise ConvergenceError(
                    f"imaginary-time relaxation did not converge in {total} steps "
                    f"(energy change rate {residual:.3e})",
                    residual=residual, iterations=total)
    # fix the global phase so the state is real and positive at its peak
    peak = np.unravel_index(np.argmax(np.abs(psi)), psi.shape)
    psi = psi * np.exp(-1j * np.angle(psi[peak]))
    out = ComplexField(grid, psi)
    return GroundState(out, energy(out, V, units), total, residual)


# -- initial-state presets ---------------------------------------------------

def gaussian(grid: GridSpec, sigma=1.0, x0=0.0, k0=0.0) -> ComplexField:
    """Normalised Gaussian whose density ``|psi|^2`` has standard deviation ``sigma`` per axis."""
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (grid.dim,))
    k0 = np.broadcast_to(np.asarray(k0, dtype=float), (grid.dim,))
    arg = np.zeros(grid.shape, dtype=complex)
    for x, c, k in zip(grid.coords(), x0, k0):
        arg += -((x - c) ** 2) / (4.0 * sigma**2) + 1j * k * x
    return ComplexField(grid, np.exp(arg)).normalized()


def plane_wave(grid: GridSpec, k, amplitude=1.0) -> ComplexField:
    k = np.broadcast_to(np.asarray(k, dtype=float), (grid.dim,))
    phase = sum(kk * x for kk, x in zip(k, grid.coords()))
    return ComplexField(grid, amplitude * np.exp(1j * phase))


def oscillator_eigenstate(grid: GridSpec, n=0, omega=1.0, units: UnitSystem = NATURAL) -> ComplexField:
    """Harmonic oscillator eigenstate, ``n`` is a quantum number per axis."""
    n = np.broadcast_to(np.asarray(n, dtype=int), (grid.dim,))
    scale = np.sqrt(units.m * omega / units.hbar)
    vals = np.ones(grid.shape, dtype=complex)
    for x, q in zip(grid.coords(), n):
        xi = scale * x
        norm = (scale**2 / np.pi) ** 0.25 / np.sqrt(2.0**q * factorial(q))
        vals *= norm * eval_hermite(int(q), xi) * np.exp(-0.5 * xi**2)
    return ComplexField(grid, vals)


def oscillator_energy(n=0, omega=1.0, units: UnitSystem = NATURAL) -> float:
    n = np.atleast_1d(n)
    return float(units.hbar * omega * np.sum(n + 0.5))


def free_gaussian_width(t, sigma0, units: UnitSystem = NATURAL):
    """Density standard deviation of a free Gaussian packet at time ``t``."""
    return sigma0 * np.sqrt(1.0 + (units.hbar * t / (2.0 * units.m * sigma0**2)) ** 2)


def position_moments(psi: ComplexField):
    """Mean and variance of each coordinate under ``|psi|^2``."""
    dens = np.abs(psi.values) ** 2
    dens = dens / dens.sum()
    out = []
    for x in psi.grid.coords():
        mean = float(np.sum(x * dens))
        out.append((mean, float(np.sum((x - mean) ** 2 * dens))))
    return out
