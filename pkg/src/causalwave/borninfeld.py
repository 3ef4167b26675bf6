"""Born-Infeld electrodynamics in Heaviside-Lorentz units.

The Lagrangian density is the determinant form::

    L = b^2 (1 - sqrt(1 - 2 S / b^2 - P^2 / b^4)),   S = (|E|^2 - |B|^2)/2,  P = E.B

which reduces to the Maxwell density ``S`` when ``b -> infinity``.  A point
charge ``q`` has ``D = q / (4 pi r^2)`` and a field that saturates at ``b``:
``E = q / (4 pi sqrt(r^4 + r0^4))`` with ``r0^2 = q / (4 pi b)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .errors import ConvergenceError, SupercriticalFieldError

# int_0^inf (sqrt(1 + x^-4) - 1) x^2 dx = Gamma(1/4)^2 / (6 sqrt(pi))
SELF_ENERGY_INTEGRAL = gamma(0.25) ** 2 / (6.0 * np.sqrt(np.pi))


@dataclass(frozen=True)
class EMSample:
    E: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if E.shape[:1] != (3,) or B.shape != E.shape:
            raise ValueError("E and B must be 3-vectors (component axis first) of equal shape")
        if not (np.all(np.isfinite(E)) and np.all(np.isfinite(B))):
            raise ValueError("field components must be finite")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class BIParams:
    b: float
    q: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.b) and self.b > 0):
            raise ValueError(f"critical field b must be positive, got {self.b}")
        if not np.isfinite(self.q):
            raise ValueError("charge must be finite")

    @property
    def r0(self) -> float:
        """Radius where the point-charge field drops to ``b / sqrt(2)``."""
        return float(np.sqrt(abs(self.q) / (4.0 * np.pi * self.b)))


def invariants(s: EMSample):
    """``(S, P) = ((|E|^2 - |B|^2) / 2, E.B)``."""
    S = 0.5 * (np.sum(s.E**2, axis=0) - np.sum(s.B**2, axis=0))
    P = np.sum(s.E * s.B, axis=0)
    return S, P


def lagrangian_from_invariants(S, P, b: float):
    """Born-Infeld density from the invariants.

    Written as ``b^2 x / (1 + sqrt(1 - x))`` with ``x = 2S/b^2 + P^2/b^4``
    to avoid cancellation at weak fields.
    """
    S = np.asarray(S, dtype=float)
    P = np.asarray(P, dtype=float)
    x = 2.0 * S / b**2 + P**2 / b**4
    if np.any(x > 1.0):
        worst = float(np.max(x))
        raise SupercriticalFieldError(
            f"super-critical field: radicand 1 - x = {1.0 - worst:.3e} < 0 for b = {b}")
    out = b**2 * x / (1.0 + np.sqrt(1.0 - x))
    return float(out) if out.ndim == 0 else out


def lagrangian(s: EMSample, p: BIParams):
    S, P = invariants(s)
    return lagrangian_from_invariants(S, P, p.b)


def maxwell_deviation(s: EMSample, p: BIParams, floor: float = 1e-300):
    """``|L - S| / max(|S|, floor)``."""
    S, P = invariants(s)
    L = lagrangian_from_invariants(S, P, p.b)
    return np.abs(L - S) / np.maximum(np.abs(S), floor)


def point_charge_field(r, p: BIParams):
    """Radial field of a point charge; equals ``b`` at the origin and is Coulombic far out."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    r0 = p.r0
    out = np.sign(p.q) * p.b / np.sqrt((r / r0) ** 4 + 1.0)
    return float(out) if out.ndim == 0 else out


def energy_density(r, p: BIParams):
    """Hamiltonian density ``b^2 (sqrt(1 + D^2/b^2) - 1)`` with ``D = q / (4 pi r^2)``.

    Uses ``D^2 / (sqrt(1 + D^2/b^2) + 1)`` so it stays accurate where ``D << b``.
    """
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        D = p.q / (4.0 * np.pi * r**2)
        ratio = np.abs(D) / p.b
        out = np.where(np.isinf(ratio), np.inf, D**2 / (np.sqrt(1.0 + ratio**2) + 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SelfEnergy:
    value: float
    error: float
    analytic: float


def self_energy(p: BIParams, rtol: float = 1e-10) -> SelfEnergy:
    """``int 4 pi r^2 u(r) dr`` over all space by adaptive quadrature.

    The integrand is rescaled to ``x = r / r0``; the result scales as
    ``q^{3/2} b^{1/2}``.  ``analytic`` is ``4 pi b^2 r0^3 Gamma(1/4)^2 / (6 sqrt(pi))``.
    """
    r0 = p.r0

    def f(x):
        # (sqrt(1 + x^-4) - 1) x^2 written without cancellation for large x
        return 1.0 / (x**2 * (np.sqrt(1.0 + x**-4) + 1.0)) if x > 0 else 0.0

    parts = [integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200, full_output=1),
             integrate.quad(f, 1.0, np.inf, epsabs=0.0, epsrel=rtol, limit=200, full_output=1)]
    for part in parts:
        if len(part) > 3:
            raise ConvergenceError(f"self-energy quadrature failed: {part[3]}",
                                   residual=part[1], iterations=part[2]["neval"])
    scale = 4.0 * np.pi * p.b**2 * r0**3
    total = sum(part[0] for part in parts)
    err = sum(part[1] for part in parts)
    return SelfEnergy(scale * total, scale * err, scale * SELF_ENERGY_INTEGRAL)


def coulomb_cutoff_energy(q: float, r_min: float, r_max: float = np.inf) -> float:
    """Maxwell field energy of a point charge outside ``r_min``: ``q^2 (1/r_min - 1/r_max) / 8 pi``.

    Grows without bound as ``r_min -> 0``.
    """
    if r_min <= 0:
        raise ValueError("r_min must be positive; the Coulomb energy diverges at the origin")
    inv_max = 0.0 if np.isinf(r_max) else 1.0 / r_max
    return q**2 * (1.0 / r_min - inv_max) / (8.0 * np.pi)


def coulomb_cutoff_quadrature(q: float, r_min: float, rtol: float = 1e-10) -> float:
    """Same quantity by quadrature of ``4 pi r^2 (q / 4 pi r^2)^2 / 2``."""
    val, _ = integrate.quad(lambda r: q**2 / (8.0 * np.pi * r**2), r_min, np.inf,
                            epsabs=0.0, epsrel=rtol)
    return val


def radial_profile(p: BIParams, r):
    """Rows ``(r, E_BI, E_Coulomb, u_BI)`` for export."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        coul = p.q / (4.0 * np.pi * r**2)
    return np.column_stack([r, point_charge_field(r, p), coul, energy_density(r, p)])


def report(E, B, b: float) -> dict:
    """JSON-ready summary for one field sample."""
    s = EMSample(E, B)
    S, P = invariants(s)
    out = {"E": s.E.tolist(), "B": s.B.tolist(), "b": b, "S": float(S), "P": float(P)}
    try:
        out["lagrangian"] = lagrangian_from_invariants(S, P, b)
        out["maxwell"] = float(S)
        out["supercritical"] = False
    except SupercriticalFieldError:
        out["lagrangian"] = None
        out["supercritical"] = True
    return out
