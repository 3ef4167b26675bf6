"""Fast invariant suite run by the ``check`` command.

Each check is small enough to finish in well under a second and returns the
measured quantity next to its tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import borninfeld as bi
from . import geometry as geo
from .fieldgrid import GridSpec, RealField, band_limited_random, grid1d
from .kleingordon import KGState, evolve_kg, evolve_nlkg, plane_wave_state
from .madelung import decompose, quantum_potential, recompose
from .schrodinger import EvolutionConfig, Potential, evolve, gaussian
from .trajectories import RayConfig, RayState, hamilton_rays, harmonic_hamiltonian


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float

    def __post_init__(self):
        self.value = float(self.value)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed}


def norm_conservation():
    g = grid1d(256, -10.0, 10.0)
    psi = gaussian(g, 1.0, 1.0, 0.5)
    out = evolve(psi, Potential.harmonic(1.0), EvolutionConfig(1e-3, 1000))
    return CheckResult("norm_conservation", abs(out.norm() / psi.norm() - 1.0), 1e-10)


def madelung_round_trip(seed=0):
    rng = np.random.default_rng(seed)
    g = GridSpec((64, 64), (2 * np.pi, 2 * np.pi))
    worst = 0.0
    for _ in range(3):
        psi = band_limited_random(g, rng)
        pf = decompose(psi)
        diff = np.abs(recompose(pf).values - psi.values)[~pf.nodal_mask]
        worst = max(worst, float(diff.max()))
    return CheckResult("madelung_round_trip", worst, 1e-12)


def quantum_potential_gaussian():
    g = grid1d(256, -12.0, 12.0)
    x = g.axes()[0]
    rho = RealField(g, np.exp(-x**2 / 2.0) / np.sqrt(2 * np.pi))
    U, mask = quantum_potential(rho, eps=1e-6, return_mask=True)
    exact = -0.5 * (x**2 / 4.0 - 0.5)
    return CheckResult("quantum_potential_gaussian", float(np.max(np.abs(U.values - exact)[~mask])), 1e-7)


def kg_plane_wave_phase():
    g = grid1d(32, 0.0, 2 * np.pi)
    st = plane_wave_state(g, 1.0)
    omega = np.sqrt(2.0)
    T = 10 * 2 * np.pi / omega
    out = evolve_kg(st, EvolutionConfig(T / 100, 100))
    exact = st.phi.values * np.exp(-1j * omega * T)
    return CheckResult("kg_plane_wave_phase", float(np.max(np.abs(out.phi.values - exact))), 1e-8)


def nlkg_vacuum():
    g = grid1d(64, 0.0, 2 * np.pi)
    st = KGState(RealField(g, np.ones(64)), RealField(g, np.zeros(64)))
    out = evolve_nlkg(st, EvolutionConfig(0.01, 200))
    return CheckResult("nlkg_vacuum", float(np.max(np.abs(out.phi.values - 1.0))), 1e-14)


def bi_maxwell_limit():
    p = bi.BIParams(1.0)
    dev = float(bi.maxwell_deviation(bi.EMSample([0.01, 0, 0], [0, 0, 0]), p))
    return CheckResult("bi_maxwell_limit", abs(dev - 2.5e-5), 5e-6)


def bi_self_energy():
    p = bi.BIParams(b=2.0, q=1.0)
    se = bi.self_energy(p)
    return CheckResult("bi_self_energy", abs(se.value / se.analytic - 1.0), 1e-9)


def ray_energy():
    H = harmonic_hamiltonian()
    steps = 2000 * 10
    tr = hamilton_rays(H, [RayState([1.0], [0.0])], RayConfig(2 * np.pi / 2000, steps))[0]
    E = 0.5 * (tr.positions[:, 0] ** 2 + tr.momenta[:, 0] ** 2)
    return CheckResult("ray_energy", float(np.max(np.abs(E - 0.5))), 1e-10)


def flat_polar_cartan():
    conn = geo.polar_preset(np.linspace(1.0, 2.0, 21), np.linspace(0.0, 1.0, 21))
    out = geo.cartan_structure(conn)
    worst = max(float(np.max(np.abs(out.torsion))), float(np.max(np.abs(out.curvature))))
    return CheckResult("flat_polar_cartan", worst, 1e-10)


ALL = (norm_conservation, madelung_round_trip, quantum_potential_gaussian, kg_plane_wave_phase,
       nlkg_vacuum, bi_maxwell_limit, bi_self_energy, ray_energy, flat_polar_cartan)


def run_all(seed: int = 0) -> list[CheckResult]:
    out = []
    for fn in ALL:
        out.append(fn(seed) if fn is madelung_round_trip else fn())
    return out

