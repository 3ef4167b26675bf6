"""Command-line driver.

    causalwave --config run.json --out results/ [--seed N] [--quiet]
    causalwave bi --E 1 0 0 --B 0 0 0 --b 2

A run writes CSV fields, a ``report.json``, SVG figures and a
``manifest.json`` listing every file with its SHA-256.  Floats in CSV use the
shortest representation that round-trips (``repr``), so a repeated run with
the same config and seed reproduces every file byte for byte.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.  Errors
are written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import borninfeld as bi
from . import checks
from . import geometry as geo
from .analysis import oscillation_frequency
from .errors import ConfigError, NumericalError
from .fieldgrid import (ComplexField, GridSpec, RealField, UnitSystem, fmt, read_field_csv,
                        write_field_csv)
from .kleingordon import (KGState, evolve_kg, evolve_nlkg, kg_energy, nlkg_energy,
                          nlkg_linear_dispersion, plane_wave_state, positive_frequency_packet)
from .madelung import decompose, quantum_potential, schrodinger_residuals
from .plotting import plot_series, plot_svg
from .schrodinger import (EvolutionConfig, Potential, energy, evolve_series, gaussian,
                          oscillator_eigenstate, plane_wave, position_moments)
from .trajectories import (RayConfig, RayState, VelocityField, equivariance_check,
                           free_hamiltonian, hamilton_rays, harmonic_hamiltonian,
                           integrate_guided, relativistic_hamiltonian, sample_density, Trajectory)

log = logging.getLogger("causalwave")

COMMANDS = ("evolve", "evolve-kg", "evolve-nlkg", "decompose", "potential", "residuals",
            "geometry", "trajectories", "rays", "bi", "check")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT = {"type": "integer", "minimum": 1}
_VEC = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 3}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_INITIAL = {"oneOf": [
    _obj({"type": {"const": "gaussian"}, "sigma": _POS, "x0": _VEC, "k0": _VEC}, ["type"]),
    _obj({"type": {"const": "oscillator"}, "n": {"oneOf": [{"type": "integer", "minimum": 0},
                                                           {"type": "array"}]},
          "omega": _POS}, ["type"]),
    _obj({"type": {"const": "plane_wave"}, "k": _VEC}, ["type", "k"]),
    _obj({"type": {"const": "csv"}, "path": {"type": "string"}, "name": {"type": "string"}},
         ["type", "path"]),
]}
_POTENTIAL = _obj({"kind": {"enum": ["zero", "harmonic", "square_well"]}, "omega": _POS,
                   "depth": _NUM, "width": _POS, "center": _NUM}, ["kind"])
_STEPPING = {"dt": _POS, "steps": _INT, "save_every": _INT}

PARAMS = {
    "evolve": _obj({"initial": _INITIAL, "potential": _POTENTIAL, **_STEPPING},
                   ["initial", "dt", "steps"]),
    "evolve-kg": _obj({"initial": {"oneOf": [
        _obj({"type": {"const": "plane_wave"}, "k": _VEC, "amplitude": _NUM}, ["type", "k"]),
        _obj({"type": {"const": "packet"}, "sigma": _POS, "x0": _VEC, "k0": _VEC}, ["type"])]},
        "scheme": {"enum": ["exact", "leapfrog"]}, **_STEPPING}, ["initial", "dt", "steps"]),
    "evolve-nlkg": _obj({"amplitude": _NUM, "mode": {"type": "integer", "minimum": 0},
                         **_STEPPING}, ["dt", "steps"]),
    "decompose": _obj({"initial": _INITIAL, "eps": _POS}, ["initial"]),
    "potential": _obj({"initial": _INITIAL, "eps": _POS, "form": {"enum": ["amplitude", "density"]}},
                      ["initial"]),
    "residuals": _obj({"initial": _INITIAL, "potential": _POTENTIAL, "eps": _POS, **_STEPPING},
                      ["initial", "dt", "steps"]),
    "geometry": _obj({"chart": {"enum": ["polar", "sphere", "cartesian"]}, "n": {"type": "integer", "minimum": 5},
                      "radius": _POS}, ["chart"]),
    "trajectories": _obj({"initial": _INITIAL, "potential": _POTENTIAL, "seeds": {"type": "array"},
                          "ensemble": _INT, "bins": _INT, "traj_dt": _POS, "eps": _POS, **_STEPPING},
                         ["initial", "dt", "steps"]),
    "rays": _obj({"hamiltonian": _obj({"kind": {"enum": ["free", "harmonic", "relativistic"]},
                                       "m": _POS, "omega": _POS, "c": _POS}, ["kind"]),
                  "initial": {"type": "array", "minItems": 1,
                              "items": _obj({"x": _VEC, "p": _VEC}, ["x", "p"])},
                  "method": {"enum": ["leapfrog", "yoshida4", "midpoint"]}, **_STEPPING},
                 ["hamiltonian", "initial", "dt", "steps"]),
    "bi": _obj({"E": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                "B": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                "b": _POS, "q": _NUM, "r_max": _POS, "n": _INT}, ["b"]),
    "check": _obj({}),
}

SCHEMA = _obj({
    "command": {"enum": list(COMMANDS)},
    "grid": _obj({"n": {"oneOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"}}]},
                  "length": _VEC, "origin": _VEC}, ["n", "length"]),
    "units": _obj({"hbar": _POS, "m": _POS, "c": _POS, "mode": {"enum": ["natural", "explicit"]}}),
    "seed": {"type": "integer", "minimum": 0},
    "params": {"type": "object"},
    "output": _obj({"plots": {"type": "boolean"}}),
}, ["command"])

NEEDS_GRID = {"evolve", "evolve-kg", "evolve-nlkg", "decompose", "potential", "residuals",
              "trajectories"}


def validate(cfg: dict) -> dict:
    """Check ``cfg`` against the schema; raise :class:`ConfigError` with the JSON path."""
    try:
        jsonschema.validate(cfg, SCHEMA)
        jsonschema.validate(cfg.get("params", {}), PARAMS[cfg["command"]])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    if cfg["command"] in NEEDS_GRID and "grid" not in cfg:
        raise ConfigError(f"command {cfg['command']!r} needs a grid")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return validate(cfg)


# -- building blocks -------------------------------------------------------------

def _units(cfg) -> UnitSystem:
    u = cfg.get("units") or {}
    if u.get("mode", "natural") == "natural" and not ({"hbar", "m", "c"} & set(u)):
        return UnitSystem()
    return UnitSystem.explicit(u.get("hbar", 1.0), u.get("m", 1.0), u.get("c", 1.0))


def _grid(cfg) -> GridSpec:
    g = cfg["grid"]
    return GridSpec(g["n"], g["length"], g.get("origin"))


def _initial(spec, grid, units) -> ComplexField:
    kind = spec["type"]
    if kind == "gaussian":
        return gaussian(grid, spec.get("sigma", 1.0), spec.get("x0", 0.0), spec.get("k0", 0.0))
    if kind == "oscillator":
        return oscillator_eigenstate(grid, spec.get("n", 0), spec.get("omega", 1.0), units)
    if kind == "csv":
        try:
            fields = read_field_csv(spec["path"])
        except OSError as exc:
            raise ConfigError(f"cannot read initial state: {exc}") from None
        f = fields.get(spec.get("name", "psi"))
        if not isinstance(f, ComplexField):
            raise ConfigError(f"{spec['path']}: no complex column {spec.get('name', 'psi')!r}")
        if f.grid.shape != grid.shape:
            raise ConfigError(f"initial state has shape {f.grid.shape}, grid is {grid.shape}")
        return ComplexField(grid, f.values)
    return plane_wave(grid, spec["k"]).normalized()


def _potential(spec) -> Potential:
    spec = dict(spec or {"kind": "zero"})
    return Potential(spec.pop("kind"), **{k: float(v) for k, v in spec.items()})


class Outputs:
    """Collects files written during a run and emits the manifest."""

    def __init__(self, root: Path, plots: bool = True):
        self.root = root
        self.plots = plots
        self.files: list[Path] = []
        root.mkdir(parents=True, exist_ok=True)

    def csv_field(self, name, fields, extra=None):
        self.files.append(write_field_csv(self.root / name, fields, extra))

    def csv_rows(self, name, header, rows):
        path = self.root / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
        self.files.append(path)

    def json(self, name, data):
        path = self.root / name
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
        self.files.append(path)

    def svg(self, name, text):
        if self.plots:
            path = self.root / name
            path.write_text(text)
            self.files.append(path)

    def manifest(self):
        entries = []
        for p in sorted(set(self.files)):
            entries.append({"file": p.name, "bytes": p.stat().st_size,
                            "sha256": hashlib.sha256(p.read_bytes()).hexdigest()})
        path = self.root / "manifest.json"
        path.write_text(json.dumps({"files": entries}, indent=2) + "\n")
        return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _trajectory_rows(tr: Trajectory):
    dim = tr.positions.shape[1]
    header = ["t"] + ["xyz"[a] for a in range(dim)]
    if tr.momenta is not None:
        header += [f"p{'xyz'[a]}" for a in range(dim)]
    header.append("flags")
    flag = "mask" if tr.entered_mask else ""
    rows = []
    for i, t in enumerate(tr.times):
        row = [t, *tr.positions[i]]
        if tr.momenta is not None:
            row += list(tr.momenta[i])
        rows.append(row + [flag])
    return header, rows


def _plot_field(out, name, field, label):
    if field.grid.dim <= 2:
        out.svg(name, plot_svg(field, label=label))


# -- commands ----------------------------------------------------------------------

def cmd_evolve(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    psi = _initial(p["initial"], grid, units)
    V = _potential(p.get("potential"))
    ec = EvolutionConfig(p["dt"], p["steps"], units, p.get("save_every", p["steps"]))
    series = evolve_series(psi, V, ec)
    norm0 = psi.norm()
    rows = []
    for k, (t, f) in enumerate(zip(series.times, series.fields)):
        out.csv_field(f"snapshot_{k:04d}.csv", {"psi": f})
        rows.append({"t": float(t), "norm": f.norm(), "energy": energy(f, V, units),
                     "moments": position_moments(f)})
    _plot_field(out, "density.svg", series.fields[-1].density(), "|psi|^2")
    return {"snapshots": rows,
            "norm_drift": abs(series.fields[-1].norm() / norm0 - 1.0)}


def cmd_evolve_kg(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    init = p["initial"]
    if init["type"] == "plane_wave":
        st = plane_wave_state(grid, init["k"], units, init.get("amplitude", 1.0))
    else:
        env = np.abs(gaussian(grid, init.get("sigma", 1.0), init.get("x0", 0.0)).values)
        st = positive_frequency_packet(grid, env, init.get("k0", 0.0), units)
    ec = EvolutionConfig(p["dt"], p["steps"], units)
    final = evolve_kg(st, ec, scheme=p.get("scheme", "exact"))
    out.csv_field("kg_final.csv", {"phi": final.phi, "phi_dot": final.phi_dot})
    _plot_field(out, "kg_final.svg", final.phi, "|phi|")
    e0, e1 = kg_energy(st), kg_energy(final)
    return {"t": final.t, "energy_initial": e0, "energy_final": e1,
            "energy_drift": abs(e1 / e0 - 1.0)}


def cmd_evolve_nlkg(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    amp = p.get("amplitude", 1e-3)
    mode = p.get("mode", 1)
    x = grid.coords()[0]
    k = 2 * np.pi * mode / grid.length[0]
    R0 = RealField(grid, 1.0 + amp * np.cos(k * (x - grid.origin[0])))
    st = KGState(R0, RealField(grid, np.zeros(grid.shape)), units)
    probe_t, probe_a = [0.0], [amp]
    coeff = np.cos(k * (x - grid.origin[0]))
    norm = np.sum(coeff**2)

    def record(t, R, Rd):
        probe_t.append(t)
        probe_a.append(float(np.sum((R - 1.0) * coeff) / norm))

    final = evolve_nlkg(st, EvolutionConfig(p["dt"], p["steps"], units), record=record)
    out.csv_field("nlkg_final.csv", {"R": final.phi, "R_dot": final.phi_dot})
    out.csv_rows("nlkg_probe.csv", ["t", "mode_amplitude"], zip(probe_t, probe_a))
    out.svg("nlkg_probe.svg", plot_series(np.array(probe_t), {"mode": np.array(probe_a)},
                                          xlabel="t", ylabel="amplitude"))
    rep = {"energy_initial": nlkg_energy(st), "energy_final": nlkg_energy(final),
           "k": k, "omega_predicted": float(nlkg_linear_dispersion(k, units))}
    try:
        rep["omega_measured"] = oscillation_frequency(np.array(probe_t), np.array(probe_a))
    except ValueError:
        rep["omega_measured"] = None
    return rep


def cmd_decompose(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    psi = _initial(p["initial"], grid, units)
    pf = decompose(psi, p.get("eps", 1e-8), units)
    out.csv_field("polar.csv", {"R": pf.R, "S": pf.S}, {"mask": pf.nodal_mask})
    _plot_field(out, "amplitude.svg", pf.R, "R")
    return {"regions": int(pf.regions),
            "vortices": [{"plane": list(ax), "index": list(idx), "winding": w}
                         for ax, idx, w in pf.vortices],
            "masked_points": int(pf.nodal_mask.sum())}


def cmd_potential(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    psi = _initial(p["initial"], grid, units)
    U, mask = quantum_potential(psi.density(), units, p.get("eps", 1e-8),
                                form=p.get("form", "amplitude"), return_mask=True)
    out.csv_field("quantum_potential.csv", {"U_h": U}, {"mask": mask})
    _plot_field(out, "quantum_potential.svg", U, "U_h")
    sel = U.values[~mask]
    return {"min": float(sel.min()), "max": float(sel.max()), "masked_points": int(mask.sum())}


def cmd_residuals(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    psi = _initial(p["initial"], grid, units)
    V = _potential(p.get("potential"))
    steps = max(2, p["steps"])
    series = evolve_series(psi, V, EvolutionConfig(p["dt"], steps, units, 1))
    res = schrodinger_residuals(series.fields[-3:], p["dt"], V, units, p.get("eps", 1e-8))
    out.csv_field("residuals.csv", res.fields, {"mask": res.mask})
    _plot_field(out, "hj_residual.svg", res["hj"], "hj residual")
    return {"t": float(series.times[-2]), "residuals": res.summary()}


def cmd_geometry(cfg, out, rng):
    p = cfg["params"]
    n = p.get("n", 41)
    chart = p["chart"]
    if chart == "sphere":
        radius = p.get("radius", 1.0)
        conn = geo.sphere_preset(np.linspace(0.5, np.pi - 0.5, n), np.linspace(0.0, 1.0, n), radius)
        expected = 2.0 / radius**2
    elif chart == "polar":
        conn = geo.polar_preset(np.linspace(1.0, 2.0, n), np.linspace(0.0, 1.0, n))
        expected = 0.0
    else:
        conn = geo.cartesian_preset(geo.Chart((np.linspace(0.0, 1.0, n), np.linspace(0.0, 1.0, n))))
        expected = 0.0
    res = geo.cartan_structure(conn)
    scal = geo.scalar_curvature(conn, res)
    Q, reducible = geo.metricity(conn)
    omega_bar, tau = geo.split_connection(conn)
    u, v = conn.chart.mesh()
    tors = np.max(np.abs(res.torsion.reshape(-1, *conn.chart.shape)), axis=0)
    curv = np.max(np.abs(res.curvature.reshape(-1, *conn.chart.shape)), axis=0)
    out.csv_rows("geometry.csv", ["u", "v", "scalar_curvature", "torsion_max", "curvature_max"],
                 zip(u.ravel(), v.ravel(), scal.ravel(), tors.ravel(), curv.ravel()))
    inner = conn.chart.interior(2)
    return {"chart": chart, "expected_scalar": expected,
            "scalar_error_interior": float(np.max(np.abs(scal[inner] - expected))),
            "torsion_max_interior": float(tors[inner].max()), "metricity_max": float(np.max(np.abs(Q))),
            "metric_compatible": bool(reducible),
            "split_reassembly": float(np.max(np.abs(omega_bar + tau - conn.omega)))}


def cmd_trajectories(cfg, out, rng):
    p, units, grid = cfg["params"], _units(cfg), _grid(cfg)
    psi = _initial(p["initial"], grid, units)
    V = _potential(p.get("potential"))
    series = evolve_series(psi, V, EvolutionConfig(p["dt"], p["steps"], units, p.get("save_every", 1)))
    eps = p.get("eps", 1e-8)
    vf = VelocityField(series, units, eps)
    rep = {}
    trs = []
    if "seeds" in p:
        times, pos, stopped = integrate_guided(series, p["seeds"], units, p.get("traj_dt"), eps, vf)
        for j in range(pos.shape[1]):
            tr = Trajectory(times, pos[:, j], f"seed{j}", bool(stopped[j]))
            trs.append(tr)
            out.csv_rows(f"trajectory_{j:03d}.csv", *_trajectory_rows(tr))
        rep["trajectories"] = len(trs)
        rep["entered_mask"] = [int(j) for j in np.flatnonzero(stopped)]
    if "ensemble" in p:
        ens = sample_density(psi, p["ensemble"], rng)
        eq = equivariance_check(series, ens, units, p.get("bins", 30), p.get("traj_dt"), eps)
        rep["equivariance"] = eq.to_dict()
    if grid.dim <= 2:
        field = series.fields[-1] if grid.dim == 2 else None
        out.svg("trajectories.svg", plot_svg(field, trs, label="|psi|"))
    return rep


_HAMILTONIANS = {"free": lambda s: free_hamiltonian(s.get("m", 1.0)),
                 "harmonic": lambda s: harmonic_hamiltonian(s.get("m", 1.0), s.get("omega", 1.0)),
                 "relativistic": lambda s: relativistic_hamiltonian(s.get("m", 1.0), s.get("c", 1.0))}


def cmd_rays(cfg, out, rng):
    p = cfg["params"]
    H = _HAMILTONIANS[p["hamiltonian"]["kind"]](p["hamiltonian"])
    init = [RayState(s["x"], s["p"]) for s in p["initial"]]
    rc = RayConfig(p["dt"], p["steps"], p.get("method", "yoshida4"), p.get("save_every", 1))
    trs = hamilton_rays(H, init, rc)
    drifts = []
    for j, tr in enumerate(trs):
        out.csv_rows(f"ray_{j:03d}.csv", *_trajectory_rows(tr))
        E = H.value(tr.positions.T, tr.momenta.T)
        drifts.append(float(np.max(np.abs(E - E[0]))))
    if all(tr.positions.shape[1] == 1 for tr in trs):
        out.svg("rays.svg", plot_series(trs[0].times, {tr.label: tr.positions[:, 0] for tr in trs},
                                        xlabel="t", ylabel="x"))
    return {"hamiltonian": H.name, "method": rc.method, "energy_drift": drifts}


def cmd_bi(cfg, out, rng):
    p = cfg["params"]
    rep = {}
    if "E" in p or "B" in p:
        rep["sample"] = bi.report(p.get("E", [0, 0, 0]), p.get("B", [0, 0, 0]), p["b"])
    params = bi.BIParams(p["b"], p.get("q", 1.0))
    r = np.linspace(0.0, p.get("r_max", 10.0 * params.r0), p.get("n", 101))
    prof = bi.radial_profile(params, r)
    out.csv_rows("bi_profile.csv", ["r", "E_bi", "E_coulomb", "energy_density"], prof)
    se = bi.self_energy(params)
    rep["self_energy"] = {"value": se.value, "error": se.error, "closed_form": se.analytic}
    rep["r0"] = params.r0
    out.svg("bi_profile.svg", plot_series(r[1:], {"Born-Infeld": prof[1:, 1], "Coulomb": prof[1:, 2]},
                                          xlabel="r", ylabel="E", logy=True))
    return rep


def cmd_check(cfg, out, rng):
    results = [r.to_dict() for r in checks.run_all(int(cfg.get("seed", 0)))]
    return {"checks": results, "all_passed": all(r["passed"] for r in results)}


DISPATCH = {"evolve": cmd_evolve, "evolve-kg": cmd_evolve_kg, "evolve-nlkg": cmd_evolve_nlkg,
            "decompose": cmd_decompose, "potential": cmd_potential, "residuals": cmd_residuals,
            "geometry": cmd_geometry, "trajectories": cmd_trajectories, "rays": cmd_rays,
            "bi": cmd_bi, "check": cmd_check}


def run(cfg: dict, out_dir, seed: int | None = None) -> dict:
    """Validate ``cfg``, execute it and write outputs plus manifest under ``out_dir``."""
    cfg = validate(dict(cfg))
    if seed is not None:
        cfg["seed"] = seed
    cfg.setdefault("params", {})
    rng = np.random.default_rng(cfg.get("seed", 0))
    out = Outputs(Path(out_dir), (cfg.get("output") or {}).get("plots", True))
    try:
        body = DISPATCH[cfg["command"]](cfg, out, rng)
    except (NumericalError, ConfigError):
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = {"command": cfg["command"], "config": cfg, "result": body}
    out.json("report.json", report)
    out.manifest()
    return report


def _error(kind, exc, code):
    payload = {"error": kind, "message": str(exc)}
    if isinstance(exc, NumericalError):
        payload.update({"step": exc.step, **{k: v for k, v in exc.details.items()}})
    print(json.dumps(payload, default=_json_default), file=sys.stderr)
    return code


def _bi_main(argv):
    ap = argparse.ArgumentParser(prog="causalwave bi", description="Born-Infeld invariants and Lagrangian")
    ap.add_argument("--E", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    ap.add_argument("--B", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    ap.add_argument("--b", type=float, required=True, help="critical field strength")
    args = ap.parse_args(argv)
    try:
        bi.BIParams(args.b)
        rep = bi.report(args.E, args.B, args.b)
    except ValueError as exc:
        return _error("config", exc, 2)
    print(json.dumps(rep, sort_keys=True))
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "bi":
        return _bi_main(argv[1:])
    ap = argparse.ArgumentParser(prog="causalwave", description=__doc__.split("\n\n")[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="RNG seed, overrides the config")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    if args.seed is not None and args.seed < 0:
        return _error("config", "seed must be non-negative", 2)
    try:
        cfg = load_config(args.config)
        report = run(cfg, args.out, args.seed)
    except ConfigError as exc:
        return _error("config", exc, 2)
    except NumericalError as exc:
        return _error("numeric", exc, 3)
    log.info("%s: wrote %s", report["command"], args.out)
    if report["command"] == "check" and not report["result"]["all_passed"]:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
