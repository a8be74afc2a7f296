"""Uniform tensor grids on boxes, Dirichlet grid functions and field files.

Grid functions store values at interior nodes only. Everything outside the
interior node set is exactly zero, which is how the Dirichlet condition is
imposed on all of R^n.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class BoxDomain:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(a) for a in self.lower)
        upper = tuple(float(b) for b in self.upper)
        if len(lower) == 0 or len(lower) != len(upper):
            raise ValueError("lower and upper must be non-empty and of equal length")
        for a, b in zip(lower, upper):
            if not (np.isfinite(a) and np.isfinite(b) and a < b):
                raise ValueError(f"invalid box side [{a}, {b}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, n: int, length: float = 1.0) -> "BoxDomain":
        return cls((0.0,) * n, (float(length),) * n)

    @property
    def ndim(self) -> int:
        return len(self.lower)

    @property
    def extents(self) -> tuple:
        return tuple(b - a for a, b in zip(self.lower, self.upper))


@dataclass(frozen=True)
class TensorGrid:
    box: BoxDomain
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(k) for k in self.counts)
        if len(counts) != self.box.ndim:
            raise ValueError("counts must have one entry per axis")
        if any(k < 1 for k in counts):
            raise ValueError(f"counts must be positive, got {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def spacings(self) -> tuple:
        return tuple((b - a) / (k + 1) for a, b, k in
                     zip(self.box.lower, self.box.upper, self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def axis_nodes(self, axis: int) -> np.ndarray:
        k = self.counts[axis]
        return self.box.lower[axis] + np.arange(1, k + 1) * self.spacings[axis]

    def mesh(self) -> list:
        return np.meshgrid(*(self.axis_nodes(i) for i in range(self.ndim)), indexing="ij")


def build_grid(box: BoxDomain, counts: Sequence[int]) -> TensorGrid:
    return TensorGrid(box, tuple(counts))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values on the interior nodes of ``grid``, zero outside."""

    grid: TensorGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.size == int(np.prod(self.grid.counts)) and values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if values.shape != self.grid.shape:
            raise ValueError(f"values of shape {values.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def ndim(self) -> int:
        return self.grid.ndim

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other):
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, t):
        return self.with_values(float(t) * self.values)

    __rmul__ = __mul__


def _check_same_grid(u: GridFunction, v: GridFunction):
    if u.grid != v.grid:
        raise ValueError("grid functions live on different grids")


def zeros(grid: TensorGrid) -> GridFunction:
    return GridFunction(grid, np.zeros(grid.shape))


def sample(f: Callable, grid: TensorGrid) -> GridFunction:
    """Evaluate ``f(x_1, ..., x_n)`` at the interior nodes (vectorized call)."""
    values = np.asarray(f(*grid.mesh()), dtype=float)
    values = np.broadcast_to(values, grid.shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("sampled field has non-finite values")
    return GridFunction(grid, values)


def _pad_axis(a: np.ndarray, axis: int, before: int, after: int) -> np.ndarray:
    widths = [(0, 0)] * a.ndim
    widths[axis] = (before, after)
    return np.pad(a, widths)


def forward_diff(u: GridFunction, axis: int) -> np.ndarray:
    """Forward difference quotients on the ``counts[axis] + 1`` staggered cells.

    The boundary cells see the zero exterior value on one side.
    """
    if not 0 <= axis < u.ndim:
        raise ValueError(f"axis {axis} out of range for a {u.ndim}-d grid")
    padded = _pad_axis(u.values, axis, 1, 1)
    return np.diff(padded, axis=axis) / u.grid.spacings[axis]


def forward_diff_adjoint(g: np.ndarray, grid: TensorGrid, axis: int) -> np.ndarray:
    """Adjoint of :func:`forward_diff` w.r.t. plain sums: ``sum g*Du = sum (D^T g)*u``."""
    lo = [slice(None)] * g.ndim
    hi = [slice(None)] * g.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    return (g[tuple(lo)] - g[tuple(hi)]) / grid.spacings[axis]


def shift_diff(u: GridFunction, axis: int, m: int) -> np.ndarray:
    """``u(x + m*Delta_axis*e_axis) - u(x)`` at every interior node."""
    m = int(m)
    if m == 0:
        raise ValueError("shift must be nonzero")
    if not 0 <= axis < u.ndim:
        raise ValueError(f"axis {axis} out of range for a {u.ndim}-d grid")
    k = u.grid.counts[axis]
    shifted = np.zeros_like(u.values)
    if abs(m) < k:
        dst = [slice(None)] * u.ndim
        src = [slice(None)] * u.ndim
        if m > 0:
            dst[axis], src[axis] = slice(0, k - m), slice(m, k)
        else:
            dst[axis], src[axis] = slice(-m, k), slice(0, k + m)
        shifted[tuple(dst)] = u.values[tuple(src)]
    return shifted - u.values


# ---------------------------------------------------------------- field files

MAGIC = "ANISOFIELD 1"


class FieldFormatError(ValueError):
    """Base class for malformed field files."""


class FieldHeaderError(FieldFormatError):
    pass


class FieldDimensionError(FieldFormatError):
    pass


class FieldValueError(FieldFormatError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def format_field(u: GridFunction) -> str:
    g = u.grid
    lines = [
        MAGIC,
        f"dim {g.ndim}",
        "counts " + " ".join(str(k) for k in g.counts),
        "lower " + " ".join(_fmt(a) for a in g.box.lower),
        "upper " + " ".join(_fmt(b) for b in g.box.upper),
    ]
    lines.extend(_fmt(v) for v in u.values.ravel(order="C"))
    return "\n".join(lines) + "\n"


def write_field(u: GridFunction, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_field(u))


def _header_values(line: str, key: str, cast, n=None):
    parts = line.split()
    if not parts or parts[0] != key:
        raise FieldHeaderError(f"expected '{key} ...' header line, got {line!r}")
    try:
        vals = [cast(x) for x in parts[1:]]
    except ValueError as exc:
        raise FieldHeaderError(f"bad number in '{key}' line: {line!r}") from exc
    if n is not None and len(vals) != n:
        raise FieldDimensionError(f"'{key}' line has {len(vals)} entries, expected {n}")
    return vals


def parse_field(text: str) -> GridFunction:
    lines = text.splitlines()
    if len(lines) < 5:
        raise FieldHeaderError("field file is empty or its header is truncated")
    if lines[0].strip() != MAGIC:
        raise FieldHeaderError(f"missing '{MAGIC}' magic line")
    (dim,) = _header_values(lines[1], "dim", int, 1)
    if dim < 1:
        raise FieldHeaderError(f"dimension must be positive, got {dim}")
    counts = _header_values(lines[2], "counts", int, dim)
    lower = _header_values(lines[3], "lower", float, dim)
    upper = _header_values(lines[4], "upper", float, dim)
    try:
        grid = TensorGrid(BoxDomain(tuple(lower), tuple(upper)), tuple(counts))
    except ValueError as exc:
        raise FieldHeaderError(str(exc)) from exc

    body = [ln.strip() for ln in lines[5:] if ln.strip()]
    expected = int(np.prod(grid.counts))
    if len(body) != expected:
        raise FieldDimensionError(f"expected {expected} values, found {len(body)}")
    try:
        values = np.array([float(x) for x in body])
    except ValueError as exc:
        raise FieldValueError(f"unparseable value: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise FieldValueError("field contains non-finite values")
    return GridFunction(grid, values.reshape(grid.shape))


def read_field(path) -> GridFunction:
    return parse_field(Path(path).read_text())
