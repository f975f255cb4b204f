"""Variable exponent fields ``p(x)`` and their regularity diagnostics.

An exponent field is a sampled function with ``1 < p_minus <= p(x) <=
p_plus < inf``.  Closed-form families keep their defining parameters so a
field can be re-evaluated on a refined or restricted grid; everything else
is carried as raw samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import PERIODIC, GridSpec, GridMismatchError, radial_distance

FAMILIES = ("constant", "radial-log", "gaussian-bump", "sinusoidal", "custom-samples")


class ExponentRangeError(ValueError):
    """Exponent samples leave the admissible open range ``(1, inf)``."""


@dataclass(frozen=True)
class ExponentField:
    """Sampled exponent with cached bounds.

    ``p_infinity`` is the decay limit for families that have one (constant,
    radial-log, gaussian-bump); ``None`` otherwise.  ``params`` holds the
    family parameters for re-evaluation, ``None`` for raw samples.
    """

    samples: np.ndarray
    grid: GridSpec
    p_minus: float
    p_plus: float
    p_infinity: float | None
    family_tag: str
    params: tuple[float, ...] | None = None


def _build(samples: np.ndarray, grid: GridSpec, family: str,
           params: tuple[float, ...] | None, p_infinity: float | None) -> ExponentField:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.shape:
        raise GridMismatchError(
            f"exponent samples shape {samples.shape} does not match grid {grid.shape}"
        )
    if not np.all(np.isfinite(samples)):
        raise ExponentRangeError("exponent samples must be finite")
    p_minus = float(samples.min())
    p_plus = float(samples.max())
    if p_minus <= 1.0:
        raise ExponentRangeError(
            f"exponent infimum must exceed 1, got p_minus = {p_minus} (family {family!r})"
        )
    return ExponentField(samples, grid, p_minus, p_plus, p_infinity, family, params)


def make_exponent(family_tag: str, params, grid: GridSpec) -> ExponentField:
    """Evaluate a named exponent family on a grid.

    Families and their parameters:

    * ``constant``: ``(c,)`` with value ``c`` everywhere.
    * ``radial-log``: ``(p_inf, A)`` giving ``p_inf + A / log(e + |x|)``
      with ``|x|`` measured from the box center.
    * ``gaussian-bump``: ``(a, b)`` or ``(a, b, width)`` giving
      ``a + b * exp(-(|x|/width)^2)``.
    * ``sinusoidal``: ``(a, b)`` giving ``a + b * prod_j sin(2 pi x_j / L_j)``,
      periodic with the box.
    * ``custom-samples``: flattened sample values, one per grid point.
    """
    params = tuple(float(v) for v in params)
    if family_tag == "constant":
        (c,) = params
        return _build(np.full(grid.shape, c), grid, family_tag, params, c)
    if family_tag == "radial-log":
        p_inf, amp = params
        r = radial_distance(grid)
        return _build(p_inf + amp / np.log(np.e + r), grid, family_tag, params, p_inf)
    if family_tag == "gaussian-bump":
        if len(params) == 2:
            a, b, width = params[0], params[1], 1.0
            params = (a, b)
        else:
            a, b, width = params
        r = radial_distance(grid)
        return _build(a + b * np.exp(-((r / width) ** 2)), grid, family_tag, params, a)
    if family_tag == "sinusoidal":
        a, b = params
        prod = np.ones(grid.shape)
        for axis, x in enumerate(grid.coords()):
            prod = prod * np.sin(2 * np.pi * (x - grid.origin[axis]) / grid.extents[axis])
        return _build(a + b * prod, grid, family_tag, params, None)
    if family_tag == "custom-samples":
        n = int(np.prod(grid.shape))
        if len(params) != n:
            raise ValueError(
                f"custom-samples needs one value per grid point ({n}), got {len(params)}"
            )
        return _build(np.asarray(params).reshape(grid.shape), grid, family_tag, None, None)
    raise ValueError(f"unknown exponent family {family_tag!r}, expected one of {FAMILIES}")


def exponent_from_samples(samples, grid: GridSpec,
                          p_infinity: float | None = None) -> ExponentField:
    """Wrap raw samples as a ``custom-samples`` exponent field."""
    return _build(np.asarray(samples, dtype=float), grid, "custom-samples", None, p_infinity)


def conjugate_exponent(p: ExponentField) -> ExponentField:
    """Pointwise conjugate ``p' = p / (p - 1)``."""
    samples = p.samples / (p.samples - 1.0)
    p_inf = None if p.p_infinity is None else p.p_infinity / (p.p_infinity - 1.0)
    if p.family_tag == "constant":
        return _build(samples, p.grid, "constant", (p_inf,), p_inf)
    return _build(samples, p.grid, "custom-samples", None, p_inf)


def scale_exponent(p: ExponentField, factor: float) -> ExponentField:
    """Pointwise multiple ``factor * p``; rejected if the infimum drops to 1."""
    factor = float(factor)
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    samples = factor * p.samples
    p_inf = None if p.p_infinity is None else factor * p.p_infinity
    if p.family_tag == "constant":
        return _build(samples, p.grid, "constant", (factor * p.params[0],), p_inf)
    return _build(samples, p.grid, "custom-samples", None, p_inf)


def resample_exponent(p: ExponentField, grid: GridSpec) -> ExponentField:
    """Re-evaluate an exponent field on another grid.

    Closed-form families are evaluated exactly; raw samples are linearly
    interpolated (one-dimensional grids only).
    """
    if p.family_tag != "custom-samples":
        out = make_exponent(p.family_tag, p.params, grid)
        if p.family_tag in ("sinusoidal",) or out.p_infinity == p.p_infinity:
            return out
        return ExponentField(out.samples, out.grid, out.p_minus, out.p_plus,
                             p.p_infinity, out.family_tag, out.params)
    if p.grid.dimension != 1 or grid.dimension != 1:
        raise ValueError("raw exponent samples can only be resampled in one dimension")
    values = np.interp(grid.axis_coords(0), p.grid.axis_coords(0), p.samples)
    return _build(values, grid, "custom-samples", None, p.p_infinity)


@dataclass(frozen=True)
class LogHolderReport:
    """Measured log-regularity constants of an exponent field.

    ``c_local`` bounds ``|1/p(x) - 1/p(y)| * log(e + 1/|x - y|)`` over the
    sampled pair set, ``c_decay`` bounds ``|1/p(x) - 1/p_inf| * log(e + |x|)``
    (``None`` when the field has no limit exponent), and ``pair_count`` is
    the number of distinct point pairs inspected.
    """

    c_local: float
    c_decay: float | None
    pair_count: int

    def flagged(self, threshold: float = 50.0) -> bool:
        """Whether either constant exceeds ``threshold``."""
        worst = max(self.c_local, self.c_decay if self.c_decay is not None else 0.0)
        return worst > threshold


_MIX1 = np.uint64(0x9E3779B97F4A7C15)
_MIX2 = np.uint64(0xBF58476D1CE4E5B9)
_MIX3 = np.uint64(0x94D049BB133111EB)


def _hash_stream(seed: int, start: int, count: int) -> np.ndarray:
    # Counter-based mix so a longer stream extends a shorter one exactly.
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
             + np.arange(start + 1, start + count + 1, dtype=np.uint64) * _MIX1)
        z = (z ^ (z >> np.uint64(30))) * _MIX2
        z = (z ^ (z >> np.uint64(27))) * _MIX3
        return z ^ (z >> np.uint64(31))


def _point_matrix(grid: GridSpec) -> np.ndarray:
    axes = [grid.axis_coords(i) for i in range(grid.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _pair_distance(grid: GridSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(a - b)
    if grid.topology == PERIODIC:
        for axis in range(grid.dimension):
            d[:, axis] = np.minimum(d[:, axis], grid.extents[axis] - d[:, axis])
    return np.sqrt(np.sum(d * d, axis=1))


def log_holder_constants(p: ExponentField, pair_budget: int = 200_000,
                         seed: int = 0) -> LogHolderReport:
    """Scan point pairs for the local log-continuity and decay constants.

    Grids small enough that every pair fits in ``pair_budget`` are scanned
    exhaustively; otherwise pairs come from a counter-based hash stream, so
    a larger budget with the same seed only ever adds pairs.
    """
    if pair_budget < 1:
        raise ValueError(f"pair_budget must be positive, got {pair_budget}")
    pts = _point_matrix(p.grid)
    recip = 1.0 / p.samples.ravel()
    n = pts.shape[0]
    total_pairs = n * (n - 1) // 2
    if total_pairs == 0:
        c_local, evaluated = 0.0, 0
    elif total_pairs <= pair_budget:
        ii, jj = np.triu_indices(n, k=1)
        dist = _pair_distance(p.grid, pts[ii], pts[jj])
        c_local = float(np.max(np.abs(recip[ii] - recip[jj]) * np.log(np.e + 1.0 / dist)))
        evaluated = total_pairs
    else:
        c_local, evaluated = 0.0, 0
        chunk = 1 << 16
        drawn = 0
        while drawn < pair_budget:
            m = min(chunk, pair_budget - drawn)
            raw = _hash_stream(seed, 2 * drawn, 2 * m) % np.uint64(n)
            ii = raw[0::2].astype(np.intp)
            jj = raw[1::2].astype(np.intp)
            keep = ii != jj
            ii, jj = ii[keep], jj[keep]
            if ii.size:
                dist = _pair_distance(p.grid, pts[ii], pts[jj])
                c_local = max(c_local, float(np.max(
                    np.abs(recip[ii] - recip[jj]) * np.log(np.e + 1.0 / dist))))
            evaluated += int(ii.size)
            drawn += m
    c_decay = None
    if p.p_infinity is not None:
        r = radial_distance(p.grid).ravel()
        c_decay = float(np.max(np.abs(recip - 1.0 / p.p_infinity) * np.log(np.e + r)))
    return LogHolderReport(c_local, c_decay, evaluated)
