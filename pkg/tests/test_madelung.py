import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalwave.fieldgrid import (ComplexField, GridSpec, RealField, UnitSystem, band_limited_random,
                                  gradient, grid1d)
from causalwave.madelung import (PolarFields, decompose, effective_density, euler_residual,
                                 hydro_fields, kg_residuals, kinematic_vorticity, quantum_potential,
                                 quantum_potential_rel, recompose, schrodinger_residuals,
                                 spacetime_momentum, momentum_system_residuals)
from causalwave.kleingordon import kg_dispersion
from causalwave.schrodinger import (ZERO, EvolutionConfig, Potential, evolve_series, gaussian,
                                    oscillator_eigenstate, plane_wave)

TWO_PI = 2 * np.pi


def test_decompose_plane_wave():
    g = grid1d(64, 0.0, TWO_PI)
    x = g.axes()[0]
    pf = decompose(plane_wave(g, 3.0))
    assert np.allclose(pf.R.values, 1.0)
    S = pf.S.values
    assert np.max(np.abs((S - S[0]) - 3.0 * (x - x[0]))) < 1e-12
    assert not pf.nodal_mask.any() and not pf.multi_region


def test_decompose_gaussian_has_flat_phase():
    g = grid1d(128, -10, 10)
    pf = decompose(gaussian(g, 1.0))
    assert np.max(np.abs(pf.S.values)) < 1e-14


def test_decompose_node():
    g = grid1d(129, -10.0, 10.0 + 20.0 / 128)  # odd n puts a sample on the node
    psi = oscillator_eigenstate(g, 1)
    pf = decompose(psi)
    x = g.axes()[0]
    assert pf.nodal_mask[np.argmin(np.abs(x))]
    left, right = x < -0.5, (x > 0.5) & (x < 3)
    S = pf.S.values
    jump = np.median(S[right]) - np.median(S[left & (x > -3)])
    assert np.isclose(abs(np.angle(np.exp(1j * jump))), np.pi)
    off = ~pf.nodal_mask
    assert np.max(np.abs(recompose(pf).values - psi.values)[off]) < 1e-12
    assert pf.multi_region


def test_recompose_trivial():
    g = grid1d(16, 0, 1)
    one = recompose(PolarFields(RealField(g, np.ones(16)), RealField(g, np.zeros(16)),
                                np.zeros(16, bool)))
    assert np.all(one.values == 1)
    zero = recompose(PolarFields(RealField(g, np.zeros(16)), RealField(g, np.zeros(16)),
                                 np.ones(16, bool)))
    assert np.all(zero.values == 0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 3),
       hbar=st.sampled_from([1.0, 0.1, 3.0]))
def test_round_trip(seed, dim, hbar):
    n = {1: 128, 2: 32, 3: 12}[dim]
    g = GridSpec((n,) * dim, (TWO_PI,) * dim)
    psi = band_limited_random(g, np.random.default_rng(seed))
    pf = decompose(psi, units=UnitSystem.explicit(hbar=hbar))
    err = np.abs(recompose(pf).values - psi.values)[~pf.nodal_mask]
    assert err.max() < 1e-12 * max(1.0, np.abs(psi.values).max())
    assert np.all(pf.R.values >= 0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(-3.0, 3.0))
def test_gauge_shift(seed, alpha):
    g = grid1d(64, 0.0, TWO_PI)
    psi = band_limited_random(g, np.random.default_rng(seed))
    a = decompose(psi)
    b = decompose(ComplexField(g, np.exp(1j * alpha) * psi.values))
    assert np.max(np.abs(a.R.values - b.R.values)) < 1e-14
    off = ~a.nodal_mask
    d = (b.S.values - a.S.values)[off]
    assert np.ptp(d) < 1e-12
    assert np.isclose(np.angle(np.exp(1j * (d[0] - alpha))), 0.0, atol=1e-12)


def test_unwrapped_phase_is_continuous_2d():
    g = GridSpec((48, 48), (TWO_PI, TWO_PI))
    x, y = g.coords()
    psi = ComplexField(g, np.exp(1j * (3 * np.sin(x) + 2 * np.cos(y))))
    S = decompose(psi).S.values
    assert np.max(np.abs(np.diff(S, axis=0))) < np.pi
    assert np.max(np.abs(np.diff(S, axis=1))) < np.pi


def test_vortex_detected():
    g = GridSpec((64, 64), (8.0, 8.0))
    x, y = g.coords()
    x0, y0 = 0.04, 0.03
    psi = ComplexField(g, ((x - x0) + 1j * (y - y0)) * np.exp(-(x**2 + y**2) / 2))
    pf = decompose(psi)
    wind = [w for _, _, w in pf.vortices]
    assert wind == [1]


def test_quantum_potential_constant_and_scale():
    g = grid1d(64, 0, 1)
    assert np.all(quantum_potential(RealField(g, np.full(64, 2.0))).values == 0)
    h = grid1d(128, -8, 8)
    x = h.axes()[0]
    rho = RealField(h, np.exp(-x**2 / 2) * (1.5 + np.sin(x) ** 2))
    core = np.abs(x) < 5
    a = quantum_potential(rho, eps=1e-6).values
    for lam in (1e-3, 7.0):
        b = quantum_potential(RealField(h, lam * rho.values), eps=1e-6).values
        assert np.max(np.abs(a - b)[core]) < 1e-12 * max(1, np.max(np.abs(a)))


@pytest.mark.parametrize("sigma", [0.8, 1.0, 1.5])
def test_quantum_potential_gaussian(sigma):
    g = grid1d(256, -12 * sigma, 12 * sigma)
    x = g.axes()[0]
    U, mask = quantum_potential(RealField(g, np.exp(-x**2 / (2 * sigma**2))), eps=1e-6, return_mask=True)
    exact = -0.5 * (x**2 / (4 * sigma**4) - 1 / (2 * sigma**2))
    assert np.max(np.abs(U.values - exact)[~mask]) < 1e-7


def test_quantum_potential_well():
    L = 3.0
    g = grid1d(256, 0.0, L)
    x = g.axes()[0]
    rho = RealField(g, np.sin(np.pi * x / L) ** 2)
    U, mask = quantum_potential(rho, form="density", eps=1e-4, return_mask=True)
    assert np.max(np.abs(U.values - np.pi**2 / (2 * L**2))[~mask]) < 1e-6


def test_quantum_potential_rejects():
    g = grid1d(16, 0, 1)
    with pytest.raises(ValueError):
        quantum_potential(RealField(g, np.zeros(16)))
    with pytest.raises(ValueError):
        quantum_potential(RealField(g, -np.ones(16)))


def test_quantum_potential_rel_static_and_constant():
    g = grid1d(256, -12, 12)
    x = g.axes()[0]
    assert np.all(quantum_potential_rel(RealField(g, np.full(256, 3.0))).values == 0)
    rho = RealField(g, np.exp(-x**2 / 2))
    rel = quantum_potential_rel(rho, eps=1e-6).values
    nr = quantum_potential(rho, eps=1e-6).values
    u = UnitSystem()
    assert np.max(np.abs(rel + 2 * u.m * u.c**2 * nr)) < 1e-12


def test_quantum_potential_rel_travelling_modulation():
    # sqrt(rho0) = 2 + cos(kx - wt): box sqrt(rho0) = (k^2 - w^2/c^2) cos(...)
    u = UnitSystem.explicit(hbar=0.7, c=2.0)
    g = grid1d(64, 0.0, TWO_PI)
    x = g.axes()[0]
    k, w, dt = 2.0, 3.0, 1e-4
    sl = [RealField(g, (2 + np.cos(k * x - w * t)) ** 2) for t in (-dt, 0.0, dt)]
    got = quantum_potential_rel(sl, u, dt).values
    exact = -u.hbar**2 * u.c**2 * (k**2 - w**2 / u.c**2) * np.cos(k * x) / (2 + np.cos(k * x))
    assert np.max(np.abs(got - exact)) < 1e-6


def test_hydro_fields():
    g = grid1d(64, 0.0, TWO_PI)
    u = UnitSystem.explicit(m=2.0, hbar=0.5)
    h = hydro_fields(plane_wave(g, 3.0, amplitude=2.0), u)
    assert np.allclose(h.rho.values, 8.0)
    assert np.allclose(h.p[0].values, 1.5)
    assert np.allclose(h.v[0].values, 0.75)


def _snapshots(psi, V, dt, n, units=UnitSystem()):
    return evolve_series(psi, V, EvolutionConfig(dt, n, units, 1)).fields


def test_schrodinger_residuals_plane_wave():
    g = grid1d(64, 0.0, TWO_PI)
    snaps = _snapshots(plane_wave(g, 2.0), ZERO, 0.01, 2)
    res = schrodinger_residuals(snaps, 0.01)
    assert res.summary()["hj"]["max"] < 1e-9
    assert res.summary()["continuity"]["max"] < 1e-9


def test_schrodinger_residuals_ground_state():
    g = grid1d(128, -10, 10)
    V = Potential.harmonic()
    snaps = _snapshots(oscillator_eigenstate(g, 0), V, 1e-4, 2)
    res = schrodinger_residuals(snaps, 1e-4, V, eps=1e-6)
    core = np.abs(g.axes()[0]) < 4
    assert np.max(np.abs(res["hj"].values[core])) < 1e-6
    assert res.summary()["continuity"]["max"] < 1e-9


def test_euler_is_gradient_of_hj():
    # node-free periodic state so no mask enters the spectral gradient
    g = grid1d(64, 0.0, TWO_PI)
    x = g.axes()[0]
    dt = 0.01
    psi = ComplexField(g, (1.5 + 0.5 * np.cos(x)) * np.exp(2j * x))
    snaps = _snapshots(psi, ZERO, dt, 4)
    hj = schrodinger_residuals(snaps[1:4], dt)
    eu = euler_residual(snaps, dt)
    grad = gradient(hj["hj"])[0].values
    assert np.max(np.abs(grad - eu["euler_x"].values)) < 1e-8


def _kg_slices(g, k, omega, dt, u=UnitSystem()):
    x = g.axes()[0]
    return [ComplexField(g, np.exp(1j * (k * x - omega * t))) for t in (-dt, 0.0, dt)]


def test_kg_residuals_plane_wave():
    g = grid1d(64, 0.0, TWO_PI)
    w = float(kg_dispersion(2.0))
    res = kg_residuals(_kg_slices(g, 2.0, w, 1e-3), 1e-3).summary()
    assert all(res[key]["max"] < 1e-9 for key in ("mass_shell", "codivergence", "current_codivergence"))


def test_kg_residuals_rest_and_off_shell():
    u = UnitSystem.explicit(hbar=1.3, m=0.7, c=2.0)
    g = grid1d(32, 0.0, TWO_PI)
    w0 = u.m * u.c**2 / u.hbar
    rest = kg_residuals(_kg_slices(g, 0.0, w0, 1e-3), 1e-3, u)
    assert rest.summary()["mass_shell"]["max"] < 1e-10
    k = 1.0
    w = float(kg_dispersion(k, u))
    d = 1e-4
    off = kg_residuals(_kg_slices(g, k, w + d, 1e-3), 1e-3, u)
    expect = 2 * u.hbar**2 * w * d / u.c**2
    assert np.allclose(off["mass_shell"].values, expect, rtol=1e-3)


def test_effective_density():
    g = grid1d(16, 0, 1)
    u = UnitSystem.explicit(m=2.0, c=3.0)
    assert np.allclose(effective_density(RealField(g, np.zeros(16)), u).rho0.values, 2.0)
    ed = effective_density(RealField(g, np.full(16, 36.0)), u)
    assert np.allclose(ed.rho0.values, 0.0) and not ed.negative_radicand.any()
    ed = effective_density(RealField(g, np.full(16, 40.0)), u)
    assert ed.negative_radicand.all()
    U2 = np.random.default_rng(0).uniform(-5.0, 0.9, 10)
    rho0 = effective_density(RealField(grid1d(10, 0, 1), U2)).rho0.values
    for u2, r in zip(U2, rho0):
        assert abs(r - (1.0 - u2) ** 0.5) < 1e-15


def test_momentum_system_closed_and_on_shell():
    g = GridSpec((32, 32), (TWO_PI, TWO_PI))
    x, y = g.coords()
    E, dt = 2.0, 0.01
    # S = sin(x) cos(y) - E t + 0.2 t sin(x): p_x is linear in t, so d_t p_x is exact
    def p_at(t):
        return [-E + 0.2 * np.sin(x), np.cos(x) * np.cos(y) + 0.2 * t * np.cos(x), -np.sin(x) * np.sin(y)]
    res = momentum_system_residuals(RealField(g, np.ones(g.shape)), [p_at(t) for t in (-dt, 0, dt)], dt)
    assert res.summary()["closedness"]["max"] < 1e-10
    # constant on-shell covector
    m0, px = 1.5, 0.4
    pt = np.sqrt(m0**2 + px**2)
    const = [np.full(g.shape, pt), np.full(g.shape, px), np.zeros(g.shape)]
    res = momentum_system_residuals(RealField(g, np.full(g.shape, m0)), [const] * 3, dt)
    assert all(v["max"] < 1e-14 for v in res.summary().values())


def test_momentum_system_detects_curl():
    g = GridSpec((32, 32), (TWO_PI, TWO_PI))
    x, y = g.coords()
    a = 0.3
    p = [np.zeros(g.shape), np.cos(x) + a * np.sin(y), np.zeros(g.shape)]
    res = momentum_system_residuals(RealField(g, np.ones(g.shape)), [p] * 3, 0.1)
    assert abs(res.summary()["closedness"]["max"] / a - 1) < 0.01


def test_momentum_system_plane_wave():
    g = grid1d(64, 0.0, TWO_PI)
    w, dt = float(kg_dispersion(3.0)), 1e-3
    x = g.axes()[0]
    slices = [ComplexField(g, np.exp(1j * (3 * x - w * t))) for t in np.arange(-2, 3) * dt]
    ps, mask = spacetime_momentum(slices, dt)
    rho = [RealField(g, np.abs(s.values) ** 2) for s in slices[1:4]]
    rho0 = effective_density(quantum_potential_rel(rho, dt=dt)).rho0
    res = momentum_system_residuals(rho0, ps, dt).summary()
    assert all(v["max"] < 1e-8 for v in res.values())


def test_kinematic_vorticity_forms_agree():
    g = GridSpec((64, 64), (TWO_PI, TWO_PI))
    x, y = g.coords()
    rho = RealField(g, 2 + np.cos(x) * np.sin(y))
    p = [RealField(g, np.cos(x + 2 * y)), RealField(g, 2 * np.cos(x + 2 * y))]
    direct, wedge = kinematic_vorticity(rho, p)[(0, 1)]
    assert np.max(np.abs(direct.values - wedge.values)) < 1e-10
    assert np.max(np.abs(direct.values)) > 0.1
