"""Uniform-grid geometry and the field containers shared across the library.

Two grid conventions are used, chosen by topology:

* ``"truncated"`` boxes sample at cell midpoints and integrate with the
  midpoint rule; fields are read as extended by zero outside the box.
* ``"periodic"`` boxes sample at the standard FFT nodes ``origin + i*h``
  and integrate with the (exact-on-band-limited) rectangle rule.

Quadrature weight is uniform in both cases: the cell volume.  Fields are
plain numpy arrays wrapped with just enough structure to carry the grid
around; all containers are immutable value objects.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

PERIODIC = "periodic"
TRUNCATED = "truncated"
_TOPOLOGIES = (PERIODIC, TRUNCATED)


class GridMismatchError(ValueError):
    """Two objects that must live on the same grid do not."""


class FieldNotFiniteError(ValueError):
    """Field values contain NaN or Inf."""


def _as_float_tuple(values, length: int, name: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if len(out) != length:
        raise ValueError(f"{name} must have {length} entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned uniform grid on a box ``[origin, origin + extents]``.

    Parameters
    ----------
    dimension : int
        1 or 3.
    extents : tuple of float
        Side lengths per axis, all positive.
    resolution : tuple of int
        Cells per axis, at least 2.
    topology : str
        ``"periodic"`` or ``"truncated"``.
    origin : tuple of float
        Lower corner of the box.  Defaults to the origin.
    """

    dimension: int
    extents: tuple[float, ...]
    resolution: tuple[int, ...]
    topology: str = TRUNCATED
    origin: tuple[float, ...] = None

    def __post_init__(self):
        if self.dimension not in (1, 3):
            raise ValueError(f"dimension must be 1 or 3, got {self.dimension}")
        if self.topology not in _TOPOLOGIES:
            raise ValueError(f"topology must be one of {_TOPOLOGIES}, got {self.topology!r}")
        object.__setattr__(self, "extents", _as_float_tuple(self.extents, self.dimension, "extents"))
        origin = self.origin if self.origin is not None else (0.0,) * self.dimension
        object.__setattr__(self, "origin", _as_float_tuple(origin, self.dimension, "origin"))
        res = tuple(int(r) for r in self.resolution)
        if len(res) != self.dimension:
            raise ValueError(f"resolution must have {self.dimension} entries, got {len(res)}")
        if any(r < 2 for r in res):
            raise ValueError(f"resolution must be at least 2 per axis, got {res}")
        if any(e <= 0 for e in self.extents):
            raise ValueError(f"extents must be positive, got {self.extents}")
        object.__setattr__(self, "resolution", res)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.resolution

    @cached_property
    def spacings(self) -> tuple[float, ...]:
        return tuple(e / r for e, r in zip(self.extents, self.resolution))

    @cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @cached_property
    def measure(self) -> float:
        """Total measure of the box."""
        return float(np.prod(self.extents))

    @cached_property
    def center(self) -> tuple[float, ...]:
        return tuple(o + e / 2 for o, e in zip(self.origin, self.extents))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Sample coordinates along one axis, per the topology convention."""
        h = self.spacings[axis]
        idx = np.arange(self.resolution[axis], dtype=float)
        if self.topology == TRUNCATED:
            return self.origin[axis] + (idx + 0.5) * h
        return self.origin[axis] + idx * h

    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        axes = [self.axis_coords(i) for i in range(self.dimension)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))

    def refine(self, factor: int = 2) -> GridSpec:
        """Same box, resolution multiplied by ``factor`` per axis."""
        if factor < 1:
            raise ValueError(f"refinement factor must be >= 1, got {factor}")
        return GridSpec(
            self.dimension,
            self.extents,
            tuple(r * factor for r in self.resolution),
            self.topology,
            self.origin,
        )


def radial_distance(grid: GridSpec, center: tuple[float, ...] | None = None) -> np.ndarray:
    """Distance from ``center`` (default: box center) at every sample point.

    Periodic grids use the minimum-image distance so the result is a genuine
    function on the torus.
    """
    if center is None:
        center = grid.center
    sq = np.zeros(grid.shape)
    for axis, x in enumerate(grid.coords()):
        d = np.abs(x - center[axis])
        if grid.topology == PERIODIC:
            d = np.minimum(d, grid.extents[axis] - d)
        sq = sq + d * d
    return np.sqrt(sq)


def _check_values(values, grid: GridSpec, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != grid.shape:
        raise GridMismatchError(
            f"{what} shape {arr.shape} does not match grid resolution {grid.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise FieldNotFiniteError(f"{what} contains non-finite values")
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Real scalar samples on a grid."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.values, self.grid, "scalar field"))

    def __add__(self, other: ScalarField) -> ScalarField:
        require_same_grid(self, other)
        return ScalarField(self.values + other.values, self.grid)

    def __sub__(self, other: ScalarField) -> ScalarField:
        require_same_grid(self, other)
        return ScalarField(self.values - other.values, self.grid)

    def __mul__(self, factor: float) -> ScalarField:
        return ScalarField(self.values * float(factor), self.grid)

    __rmul__ = __mul__


@dataclass(frozen=True)
class VectorField:
    """Vector samples on a grid, one array per component."""

    components: tuple[ScalarField, ...]
    grid: GridSpec

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.grid.dimension:
            raise GridMismatchError(
                f"expected {self.grid.dimension} components, got {len(comps)}"
            )
        for c in comps:
            if c.grid != self.grid:
                raise GridMismatchError("vector components live on different grids")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_arrays(cls, arrays, grid: GridSpec) -> VectorField:
        return cls(tuple(ScalarField(a, grid) for a in arrays), grid)

    def magnitude(self) -> ScalarField:
        sq = sum(c.values * c.values for c in self.components)
        return ScalarField(np.sqrt(sq), self.grid)

    def __add__(self, other: VectorField) -> VectorField:
        require_same_grid(self, other)
        return VectorField(tuple(a + b for a, b in zip(self.components, other.components)), self.grid)

    def __sub__(self, other: VectorField) -> VectorField:
        require_same_grid(self, other)
        return VectorField(tuple(a - b for a, b in zip(self.components, other.components)), self.grid)

    def __mul__(self, factor: float) -> VectorField:
        return VectorField(tuple(c * factor for c in self.components), self.grid)

    __rmul__ = __mul__


@dataclass(frozen=True)
class TensorField:
    """Rank-2 tensor samples, stored as a 3x3 nest of scalar fields."""

    components: tuple[tuple[ScalarField, ...], ...]
    grid: GridSpec

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.components)
        n = self.grid.dimension
        if len(rows) != n or any(len(r) != n for r in rows):
            raise GridMismatchError(f"tensor must be {n}x{n}")
        for row in rows:
            for c in row:
                if c.grid != self.grid:
                    raise GridMismatchError("tensor components live on different grids")
        object.__setattr__(self, "components", rows)

    @classmethod
    def from_arrays(cls, arrays, grid: GridSpec) -> TensorField:
        return cls(tuple(tuple(ScalarField(a, grid) for a in row) for row in arrays), grid)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time nodes ``0 = t_0 < ... < t_steps = T``."""

    T: float
    steps: int

    def __post_init__(self):
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "steps", int(self.steps))
        if self.T <= 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    @property
    def dt(self) -> float:
        return self.T / self.steps


@dataclass(frozen=True)
class SpaceTimeField:
    """Vector field sampled on every node of a time grid.

    The payload is one contiguous stack ``data[node, component, ...space]``;
    ``frame(i)`` views a single node as a :class:`VectorField` without
    copying.
    """

    data: np.ndarray
    tg: TimeGrid
    grid: GridSpec

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        want = (self.tg.steps + 1, self.grid.dimension) + self.grid.shape
        if arr.shape != want:
            raise GridMismatchError(f"space-time data shape {arr.shape}, expected {want}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def zeros(cls, tg: TimeGrid, grid: GridSpec) -> SpaceTimeField:
        shape = (tg.steps + 1, grid.dimension) + grid.shape
        return cls(np.zeros(shape), tg, grid)

    @classmethod
    def from_frames(cls, frames, tg: TimeGrid, grid: GridSpec) -> SpaceTimeField:
        frames = list(frames)
        if len(frames) != tg.steps + 1:
            raise GridMismatchError(f"expected {tg.steps + 1} frames, got {len(frames)}")
        data = np.empty((tg.steps + 1, grid.dimension) + grid.shape)
        for i, f in enumerate(frames):
            require_same_grid(f, grid=grid)
            for m, c in enumerate(f.components):
                data[i, m] = c.values
        return cls(data, tg, grid)

    def frame(self, i: int) -> VectorField:
        return VectorField.from_arrays(self.data[i], self.grid)

    @property
    def frames(self) -> tuple[VectorField, ...]:
        return tuple(self.frame(i) for i in range(self.tg.steps + 1))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def __add__(self, other: SpaceTimeField) -> SpaceTimeField:
        self._check_compatible(other)
        return SpaceTimeField(self.data + other.data, self.tg, self.grid)

    def __sub__(self, other: SpaceTimeField) -> SpaceTimeField:
        self._check_compatible(other)
        return SpaceTimeField(self.data - other.data, self.tg, self.grid)

    def __mul__(self, factor: float) -> SpaceTimeField:
        return SpaceTimeField(self.data * float(factor), self.tg, self.grid)

    __rmul__ = __mul__

    def _check_compatible(self, other: SpaceTimeField):
        if self.tg != other.tg:
            raise GridMismatchError("space-time fields have different time grids")
        require_same_grid(self, other)


def require_same_grid(*objects, grid: GridSpec | None = None):
    """Raise :class:`GridMismatchError` unless all objects share one grid."""
    grids = [grid] if grid is not None else []
    grids += [o.grid for o in objects if hasattr(o, "grid")]
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grids differ: {first} vs {g}")
