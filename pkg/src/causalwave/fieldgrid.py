"""Uniform periodic grids and spectral calculus.

Every field in the package lives on a :class:`GridSpec`: a periodic box in
1 to 3 dimensions with ``n[i]`` samples along axis ``i``.  Derivatives are
taken in Fourier space, so any resolved Fourier mode is differentiated
exactly up to rounding.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Periodic box ``[origin, origin + length)`` sampled at ``n`` points per axis."""

    n: tuple[int, ...]
    length: tuple[float, ...]
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        length = tuple(float(v) for v in np.atleast_1d(self.length))
        if len(length) == 1 and len(n) > 1:
            length = length * len(n)
        if not 1 <= len(n) <= 3:
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {len(n)}")
        if len(length) != len(n):
            raise ValueError("length must have one entry per axis")
        if any(v < 8 for v in n):
            raise ValueError(f"need at least 8 points per axis, got {n}")
        if any(not np.isfinite(v) or v <= 0 for v in length):
            raise ValueError(f"axis lengths must be positive, got {length}")
        if self.origin is None:
            origin = tuple(-0.5 * v for v in length)
        else:
            origin = tuple(float(v) for v in np.atleast_1d(self.origin))
            if len(origin) == 1 and len(n) > 1:
                origin = origin * len(n)
            if len(origin) != len(n):
                raise ValueError("origin must have one entry per axis")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.length, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def axes(self) -> list[np.ndarray]:
        return [o + d * np.arange(n) for o, d, n in zip(self.origin, self.dx, self.n)]

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays broadcast to the full grid shape (``ij`` indexing)."""
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def wavenumbers(self) -> list[np.ndarray]:
        """Angular wavenumbers per axis, shaped to broadcast against the grid."""
        out = []
        for i, (n, d) in enumerate(zip(self.n, self.dx)):
            k = 2.0 * np.pi * np.fft.fftfreq(n, d=d)
            shape = [1] * self.dim
            shape[i] = n
            out.append(k.reshape(shape))
        return out

    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.wavenumbers())

    def k_max(self) -> float:
        return float(max(np.pi / d for d in self.dx))

    def to_dict(self) -> dict:
        return {"n": list(self.n), "length": list(self.length), "origin": list(self.origin)}


def grid1d(n: int, lo: float, hi: float) -> GridSpec:
    return GridSpec((n,), (hi - lo,), (lo,))


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants.  ``mode="natural"`` forces hbar = m = c = 1."""

    hbar: float = 1.0
    m: float = 1.0
    c: float = 1.0
    mode: str = "natural"

    def __post_init__(self):
        if self.mode not in ("natural", "explicit"):
            raise ValueError(f"unknown unit mode {self.mode!r}")
        if self.mode == "natural" and (self.hbar, self.m, self.c) != (1.0, 1.0, 1.0):
            raise ValueError("natural units require hbar = m = c = 1; use mode='explicit'")
        for name in ("hbar", "m", "c"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be strictly positive, got {v}")

    @classmethod
    def explicit(cls, hbar=1.0, m=1.0, c=1.0) -> "UnitSystem":
        return cls(float(hbar), float(m), float(c), "explicit")

    @property
    def m0(self) -> float:
        """Rest mass; the same constant as ``m``."""
        return self.m

    @property
    def compton_wavenumber(self) -> float:
        return self.m * self.c / self.hbar

    def to_dict(self) -> dict:
        return {"hbar": self.hbar, "m": self.m, "c": self.c, "mode": self.mode}


NATURAL = UnitSystem()


class _Field:
    grid: GridSpec
    values: np.ndarray
    _dtype: type = float

    def __init__(self, grid: GridSpec, values):
        arr = np.array(values, dtype=self._dtype)
        if arr.shape != grid.shape:
            if arr.size != grid.size:
                raise ValueError(
                    f"field has {arr.size} samples but grid has {grid.size}"
                )
            arr = arr.reshape(grid.shape)
        if not np.all(np.isfinite(arr)):
            bad = int(np.count_nonzero(~np.isfinite(arr)))
            raise ValueError(f"field contains {bad} non-finite samples")
        arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("fields are immutable")

    def __repr__(self):
        return f"{type(self).__name__}(grid={self.grid.n}, dtype={self.values.dtype})"

    def like(self, values):
        return type(self)(self.grid, values)

    def integral(self) -> complex | float:
        return self.values.sum() * self.grid.cell_volume


class RealField(_Field):
    _dtype = float


class ComplexField(_Field):
    _dtype = complex

    def norm(self) -> float:
        """L2 norm, ``sqrt(sum |f|^2 dV)``."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def normalized(self) -> "ComplexField":
        return ComplexField(self.grid, self.values / self.norm())

    def density(self) -> RealField:
        return RealField(self.grid, np.abs(self.values) ** 2)


def _wrap(f, values):
    if np.iscomplexobj(values) or isinstance(f, ComplexField):
        return ComplexField(f.grid, values)
    return RealField(f.grid, values)


def _spectral_derivative(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    k = grid.wavenumbers()[axis]
    n = grid.n[axis]
    if n % 2 == 0:
        # the Nyquist mode has no odd-derivative partner
        k = k.copy()
        idx = [0] * grid.dim
        idx[axis] = n // 2
        k[tuple(idx)] = 0.0
    out = np.fft.ifftn(1j * k * np.fft.fftn(values))
    return out if np.iscomplexobj(values) else out.real


def gradient(f: RealField | ComplexField) -> list:
    """Spectral gradient; returns one field per axis."""
    return [_wrap(f, _spectral_derivative(f.values, f.grid, i)) for i in range(f.grid.dim)]


def laplacian(f: RealField | ComplexField):
    out = np.fft.ifftn(-f.grid.k_squared() * np.fft.fftn(f.values))
    if not np.iscomplexobj(f.values):
        out = out.real
    return _wrap(f, out)


def divergence(components: Sequence[RealField | ComplexField]):
    grid = components[0].grid
    total = sum(_spectral_derivative(c.values, grid, i) for i, c in enumerate(components))
    return _wrap(components[0], total)


def helmholtz_residual(f: ComplexField, k: float) -> RealField:
    """Pointwise ``|laplacian(f) + k^2 f|``."""
    if not np.isfinite(k):
        raise ValueError("wavenumber must be finite")
    lap = laplacian(f).values
    return RealField(f.grid, np.abs(lap + k**2 * f.values))


def spectrum(f) -> np.ndarray:
    """Unitary-normalised forward transform (Parseval holds with ``sum |F|^2 dk``)."""
    return np.fft.fftn(f.values, norm="ortho")


def from_spectrum(grid: GridSpec, coeffs: np.ndarray) -> ComplexField:
    return ComplexField(grid, np.fft.ifftn(coeffs, norm="ortho"))


def band_limited_random(grid: GridSpec, rng: np.random.Generator, kmax_fraction=0.25,
                        complex_valued=True):
    """Random smooth field with energy only below ``kmax_fraction`` of Nyquist."""
    coeffs = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    mask = np.ones(grid.shape, dtype=bool)
    for i, k in enumerate(grid.wavenumbers()):
        mask &= np.abs(k) <= kmax_fraction * np.pi / grid.dx[i]
    vals = np.fft.ifftn(coeffs * mask) * np.sqrt(grid.size)
    if complex_valued:
        return ComplexField(grid, vals)
    return RealField(grid, vals.real)


# -- CSV ----------------------------------------------------------------------

_AXIS_NAMES = ("x", "y", "z")


def fmt(v: float) -> str:
    """Shortest representation that round-trips exactly."""
    return repr(float(v))


def field_rows(fields: dict[str, RealField | ComplexField], extra: dict[str, np.ndarray] | None = None):
    """Header plus rows for one or more fields sharing a grid."""
    grids = {f.grid for f in fields.values()}
    if len(grids) != 1:
        raise ValueError("fields must share one grid")
    grid = grids.pop()
    header = list(_AXIS_NAMES[: grid.dim])
    cols = [c.ravel() for c in grid.coords()]
    for name, f in fields.items():
        if isinstance(f, ComplexField):
            header += [f"{name}_real", f"{name}_imag"]
            cols += [f.values.real.ravel(), f.values.imag.ravel()]
        else:
            header.append(name)
            cols.append(f.values.ravel())
    for name, arr in (extra or {}).items():
        header.append(name)
        cols.append(np.asarray(arr).ravel())
    rows = []
    for i in range(grid.size):
        rows.append([fmt(c[i]) if c.dtype != bool else str(int(c[i])) for c in cols])
    return header, rows


def write_field_csv(path: str | Path, fields: dict, extra: dict | None = None) -> Path:
    if not isinstance(fields, dict):
        fields = {"psi" if isinstance(fields, ComplexField) else "value": fields}
    header, rows = field_rows(fields, extra)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def read_field_csv(path: str | Path, grid: GridSpec | None = None) -> dict[str, RealField | ComplexField]:
    """Inverse of :func:`write_field_csv`.

    The grid is reconstructed from the coordinate columns when not supplied;
    the box is assumed to start at the first sample and be exactly periodic.
    """
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    ncoord = 0
    while ncoord < len(header) and header[ncoord] in _AXIS_NAMES:
        ncoord += 1
    if ncoord == 0:
        raise ValueError(f"{path}: no coordinate columns in header {header}")
    if grid is None:
        n, length, origin = [], [], []
        for a in range(ncoord):
            ax = np.unique(data[:, a])
            d = (ax[-1] - ax[0]) / (len(ax) - 1)
            n.append(len(ax))
            length.append(d * len(ax))
            origin.append(ax[0])
        grid = GridSpec(tuple(n), tuple(length), tuple(origin))
    out = {}
    i = ncoord
    while i < len(header):
        name = header[i]
        if name.endswith("_real") and i + 1 < len(header) and header[i + 1].endswith("_imag"):
            out[name[:-5]] = ComplexField(grid, data[:, i] + 1j * data[:, i + 1])
            i += 2
        else:
            out[name] = RealField(grid, data[:, i])
            i += 1
    return out
