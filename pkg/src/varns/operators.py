"""Operators on sampled fields: maximal averages, spectral multipliers,
singular-kernel quadrature, and the heat semigroup.

Spectral operators act on periodic grids through the real FFT.  Odd
(derivative-type) symbols use wavenumbers with the Nyquist plane zeroed,
the standard convention that keeps real fields real and makes the
first-order identities exact on band-limited data; even symbols such as
the heat multiplier use the full wavenumbers.

Kernel quadrature (the fractional-integral operators) runs on truncated
boxes with the field extended by zero, midpoint weights off the diagonal
and a closed-form cell integral on it.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.signal import fftconvolve

from .fields import (
    PERIODIC,
    TRUNCATED,
    GridSpec,
    ScalarField,
    SpaceTimeField,
    TensorField,
    TimeGrid,
    VectorField,
    require_same_grid,
)


class RadialOrderError(ValueError):
    """A kernel that must be radially nonincreasing is not."""


def worker_count() -> int:
    """FFT worker cap, from the VARNS_THREADS environment variable."""
    try:
        return max(1, int(os.environ.get("VARNS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SpectralWorkspace:
    """Precomputed wavenumber tables for one periodic grid.

    ``k`` are the full wavenumbers (even symbols), ``k_deriv`` the
    Nyquist-zeroed ones (odd symbols); both are broadcastable against the
    half-complex spectrum layout of the real FFT.
    """

    grid: GridSpec
    k: tuple[np.ndarray, ...]
    k_deriv: tuple[np.ndarray, ...]
    k2: np.ndarray
    k2_deriv: np.ndarray
    workers: int

    def forward(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfftn(values, workers=self.workers)

    def inverse(self, hat: np.ndarray) -> np.ndarray:
        return sfft.irfftn(hat, s=self.grid.shape, workers=self.workers)


@lru_cache(maxsize=16)
def make_workspace(grid: GridSpec, workers: int | None = None) -> SpectralWorkspace:
    """Build (and cache) the spectral workspace for a periodic grid."""
    if grid.topology != PERIODIC:
        raise ValueError("spectral operators need a periodic grid")
    if workers is None:
        workers = worker_count()
    dim = grid.dimension
    k_full, k_deriv = [], []
    for axis in range(dim):
        n = grid.resolution[axis]
        h = grid.spacings[axis]
        last = axis == dim - 1
        freq = sfft.rfftfreq(n, d=h) if last else sfft.fftfreq(n, d=h)
        k = 2.0 * np.pi * freq
        kd = k.copy()
        if n % 2 == 0:
            # self-conjugate bin of the real transform: zero for odd symbols
            kd[-1 if last else n // 2] = 0.0
        shape = [1] * dim
        shape[axis] = k.size
        k_full.append(k.reshape(shape))
        k_deriv.append(kd.reshape(shape))
    k2 = sum(k * k for k in k_full)
    k2_deriv = sum(k * k for k in k_deriv)
    return SpectralWorkspace(grid, tuple(k_full), tuple(k_deriv), k2, k2_deriv, workers)


def _hat_components(v: VectorField, ws: SpectralWorkspace) -> list[np.ndarray]:
    return [ws.forward(c.values) for c in v.components]


def riesz_transform(f: ScalarField, axis: int, ws: SpectralWorkspace) -> ScalarField:
    """Riesz transform along one axis: symbol ``-i k_axis / |k|``, zero mean mode."""
    require_same_grid(f, grid=ws.grid)
    dim = ws.grid.dimension
    if not 0 <= axis < dim:
        raise ValueError(f"axis must be in [0, {dim}), got {axis}")
    mag = np.sqrt(ws.k2_deriv)
    with np.errstate(invalid="ignore", divide="ignore"):
        symbol = np.where(mag > 0.0, ws.k_deriv[axis] / np.where(mag > 0, mag, 1.0), 0.0)
    return ScalarField(ws.inverse(-1j * symbol * ws.forward(f.values)), ws.grid)


def divergence(v: VectorField, ws: SpectralWorkspace) -> ScalarField:
    """Spectral divergence of a vector field."""
    require_same_grid(v, grid=ws.grid)
    hats = _hat_components(v, ws)
    acc = sum(1j * ws.k_deriv[j] * hats[j] for j in range(len(hats)))
    return ScalarField(ws.inverse(acc), ws.grid)


def tensor_divergence(t: TensorField, ws: SpectralWorkspace) -> VectorField:
    """Row divergence ``(div T)_m = sum_l d_l T_{lm}`` of a tensor field."""
    require_same_grid(t, grid=ws.grid)
    dim = ws.grid.dimension
    out = []
    for m in range(dim):
        acc = 0.0
        for l in range(dim):
            acc = acc + 1j * ws.k_deriv[l] * ws.forward(t.components[l][m].values)
        out.append(ws.inverse(acc))
    return VectorField.from_arrays(out, ws.grid)


def _leray_hats(hats: list[np.ndarray], ws: SpectralWorkspace) -> list[np.ndarray]:
    dot = sum(ws.k_deriv[j] * hats[j] for j in range(len(hats)))
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(ws.k2_deriv > 0.0, dot / np.where(ws.k2_deriv > 0, ws.k2_deriv, 1.0), 0.0)
    return [hats[j] - ws.k_deriv[j] * scale for j in range(len(hats))]


def leray_project(v: VectorField, ws: SpectralWorkspace) -> VectorField:
    """Project onto divergence-free fields; the mean mode passes through."""
    require_same_grid(v, grid=ws.grid)
    hats = _leray_hats(_hat_components(v, ws), ws)
    return VectorField.from_arrays([ws.inverse(h) for h in hats], ws.grid)


def _parseval_weights(ws: SpectralWorkspace) -> np.ndarray:
    w = np.full(ws.k2.shape, 2.0)
    w[..., 0] = 1.0
    if ws.grid.resolution[-1] % 2 == 0:
        w[..., -1] = 1.0
    return w


def relative_divergence(v: VectorField, ws: SpectralWorkspace) -> float:
    """Spectral divergence content relative to the gradient content of ``v``."""
    require_same_grid(v, grid=ws.grid)
    hats = _hat_components(v, ws)
    w = _parseval_weights(ws)
    div_hat = sum(ws.k_deriv[j] * hats[j] for j in range(len(hats)))
    num = np.sum(w * np.abs(div_hat) ** 2)
    den = np.sum(w * ws.k2_deriv * sum(np.abs(h) ** 2 for h in hats))
    if den == 0.0:
        return 0.0
    return float(np.sqrt(num / den))


def heat_convolve(f, t: float, ws: SpectralWorkspace):
    """Heat semigroup at time ``t`` applied spectrally; ``t = 0`` is the identity."""
    t = float(t)
    if t < 0:
        raise ValueError(f"heat time must be nonnegative, got {t}")
    if t == 0.0:
        return f
    mult = np.exp(-t * ws.k2)

    def apply(values: np.ndarray) -> np.ndarray:
        return ws.inverse(mult * ws.forward(values))

    if isinstance(f, ScalarField):
        require_same_grid(f, grid=ws.grid)
        return ScalarField(apply(f.values), ws.grid)
    if isinstance(f, VectorField):
        require_same_grid(f, grid=ws.grid)
        return VectorField.from_arrays([apply(c.values) for c in f.components], ws.grid)
    raise TypeError(f"heat_convolve expects a scalar or vector field, got {type(f)!r}")


def duhamel_accumulate(hat_at_node, tg: TimeGrid, ws: SpectralWorkspace) -> np.ndarray:
    """Trapezoid-in-time heat accumulation of a spectral forcing history.

    ``hat_at_node(i)`` must return the stacked component spectra at node
    ``i``.  Returns the physical space-time stack; node 0 is zero.  The
    running form multiplies the accumulator by the one-step decay, which
    reproduces the trapezoid rule applied to the closed-form integrand.
    """
    dim = ws.grid.dimension
    out = np.zeros((tg.steps + 1, dim) + ws.grid.shape)
    decay = np.exp(-tg.dt * ws.k2)
    acc = np.zeros((dim,) + ws.k2.shape, dtype=complex)
    prev = np.asarray(hat_at_node(0))
    half = 0.5 * tg.dt
    for i in range(1, tg.steps + 1):
        cur = np.asarray(hat_at_node(i))
        acc *= decay
        acc += half * (decay * prev + cur)
        for m in range(dim):
            out[i, m] = ws.inverse(acc[m])
        prev = cur
    return out


def duhamel_force(force: SpaceTimeField, tg: TimeGrid, ws: SpectralWorkspace) -> SpaceTimeField:
    """Heat-propagated time integral of a sampled forcing history."""
    require_same_grid(force, grid=ws.grid)
    if force.tg != tg:
        raise ValueError("force history and time grid disagree")

    def hat(i: int):
        return [ws.forward(force.data[i, m]) for m in range(ws.grid.dimension)]

    return SpaceTimeField(duhamel_accumulate(hat, tg, ws), tg, ws.grid)


def default_radius_ladder(grid: GridSpec, count: int = 12) -> tuple[float, ...]:
    """Geometric radius ladder from a single cell up to half the box extent."""
    if count < 2:
        raise ValueError(f"ladder needs at least 2 rungs, got {count}")
    r0 = 0.49 * min(grid.spacings)
    r1 = 0.5 * min(grid.extents)
    return tuple(float(r0 * (r1 / r0) ** (i / (count - 1))) for i in range(count))


def _ball_kernel_truncated(grid: GridSpec, radius: float) -> tuple[np.ndarray, int]:
    h = grid.spacings
    half = [int(np.floor(radius / h[a])) for a in range(grid.dimension)]
    offsets = np.meshgrid(
        *[np.arange(-k, k + 1) * h[a] for a, k in enumerate(half)],
        indexing="ij", sparse=True,
    )
    dist2 = sum(o * o for o in offsets)
    mask = dist2 <= radius * radius
    return mask.astype(float), int(np.count_nonzero(mask))


def _torus_offset_distance(grid: GridSpec) -> np.ndarray:
    axes = []
    for a in range(grid.dimension):
        n, h = grid.resolution[a], grid.spacings[a]
        m = np.arange(n, dtype=float)
        axes.append(np.minimum(m, n - m) * h)
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    return np.sqrt(sum(d * d for d in mesh))


def maximal_function(f: ScalarField, radii) -> ScalarField:
    """Pointwise max of discrete ball averages of ``|f|`` over a radius ladder.

    A ball collects the cells whose center offsets lie within the radius;
    truncated boxes read the field as zero outside, periodic boxes wrap.
    Radii must stay within half the smallest box extent.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("radius ladder is empty")
    rmax = 0.5 * min(f.grid.extents)
    for r in radii:
        if r <= 0 or r > rmax * (1 + 1e-12):
            raise ValueError(f"radius {r} outside (0, {rmax}]")
    fa = np.abs(f.values)
    out = np.zeros(f.grid.shape)
    if f.grid.topology == TRUNCATED:
        for r in radii:
            kernel, count = _ball_kernel_truncated(f.grid, r)
            if count == 1:
                avg = fa
            else:
                avg = fftconvolve(fa, kernel, mode="same") / count
            np.maximum(out, avg, out=out)
    else:
        dist = _torus_offset_distance(f.grid)
        fhat = sfft.rfftn(fa, workers=worker_count())
        for r in radii:
            mask = (dist <= r).astype(float)
            count = int(mask.sum())
            if count == 1:
                avg = fa
            else:
                khat = sfft.rfftn(mask, workers=worker_count())
                avg = sfft.irfftn(fhat * khat, s=f.grid.shape, workers=worker_count()) / count
            np.maximum(out, avg, out=out)
    return ScalarField(out, f.grid)


def _diagonal_cell_integral(grid: GridSpec, sigma: float) -> float:
    # closed-form integral of |y|^(sigma - n) over the singular cell
    if grid.dimension == 1:
        h = grid.spacings[0]
        return 2.0 * (0.5 * h) ** sigma / sigma
    r_eq = (3.0 * grid.cell_volume / (4.0 * np.pi)) ** (1.0 / 3.0)
    return 4.0 * np.pi * r_eq**sigma / sigma


def riesz_potential_direct(f: ScalarField, sigma: float) -> ScalarField:
    """Fractional integral ``int |f(y)| / |x - y|^(n - sigma) dy`` on a box.

    Direct quadrature against the zero-extended field: midpoint weights off
    the diagonal, the analytic cell integral on it (an equal-volume ball in
    three dimensions).  Note the absolute value: the operator is positive
    and sublinear, not linear.
    """
    grid = f.grid
    if grid.topology != TRUNCATED:
        raise ValueError("the fractional integral runs on truncated boxes")
    sigma = float(sigma)
    if not 0.0 < sigma < grid.dimension:
        raise ValueError(f"order must lie in (0, {grid.dimension}), got {sigma}")
    offsets = np.meshgrid(
        *[np.arange(1 - n, n) * h for n, h in zip(grid.resolution, grid.spacings)],
        indexing="ij", sparse=True,
    )
    dist2 = sum(o * o for o in offsets)
    center = tuple(n - 1 for n in grid.resolution)
    with np.errstate(divide="ignore"):
        kernel = grid.cell_volume * dist2 ** (0.5 * (sigma - grid.dimension))
    kernel[center] = _diagonal_cell_integral(grid, sigma)
    return ScalarField(fftconvolve(np.abs(f.values), kernel, mode="same"), grid)


def riesz_potential_1d(psi: ScalarField, sigma: float) -> ScalarField:
    """One-dimensional fractional integral on an interval, zero extension."""
    if psi.grid.dimension != 1:
        raise ValueError("expected a one-dimensional field")
    return riesz_potential_direct(psi, sigma)


def grad_heat_kernel_defect(t: float, x) -> float:
    """Gap functional ``|grad g_t(x)| * (t^2 + |x|^4)`` of the heat kernel.

    Scale invariant under ``(t, x) -> (s^2 t, s x)``; vanishes at ``x = 0``
    and stays bounded over the whole quadrant.
    """
    t = float(t)
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    x = np.asarray(x, dtype=float).reshape(-1)
    r2 = float(np.dot(x, x))
    r = np.sqrt(r2)
    g = (4.0 * np.pi * t) ** -1.5 * np.exp(-r2 / (4.0 * t))
    return float(r / (2.0 * t) * g * (t * t + r2 * r2))


def radial_majorant_defect(phi: ScalarField, f: ScalarField) -> float:
    """Worst ratio of ``|phi * f|`` against ``L1(phi)`` times the maximal average.

    ``phi`` must be nonnegative, radially nonincreasing about the box
    center, and supported within half the box extent; the convolution is
    circular.  The maximal average runs over every offset shell inside the
    support, which makes the layer-cake comparison exact up to roundoff.
    """
    require_same_grid(phi, f)
    grid = phi.grid
    if grid.topology != PERIODIC:
        raise ValueError("the majorant comparison runs on periodic grids")
    if any(n % 2 for n in grid.resolution):
        raise ValueError("resolutions must be even so the box center is a node")
    pv = phi.values
    if np.any(pv < 0):
        raise RadialOrderError("kernel must be nonnegative")
    peak = float(pv.max())
    if peak == 0.0:
        raise RadialOrderError("kernel is identically zero")
    rolled = np.roll(pv, [-(n // 2) for n in grid.resolution],
                     axis=tuple(range(grid.dimension)))
    dist = _torus_offset_distance(grid)
    order = np.argsort(dist.ravel(), kind="stable")
    sorted_vals = rolled.ravel()[order]
    slack = 1e-9 * peak
    if np.any(np.diff(sorted_vals) > slack):
        raise RadialOrderError("kernel is not radially nonincreasing about the box center")
    rmax = 0.5 * min(grid.extents)
    sorted_dist = dist.ravel()[order]
    outside = sorted_dist > rmax
    if np.any(outside) and float(sorted_vals[outside].max(initial=0.0)) > 1e-12 * peak:
        raise RadialOrderError("kernel support exceeds half the box extent")

    workers = worker_count()
    fa = np.abs(f.values)
    fhat = sfft.rfftn(fa, workers=workers)
    conv = grid.cell_volume * sfft.irfftn(
        sfft.rfftn(rolled, workers=workers) * fhat, s=grid.shape, workers=workers)
    l1 = grid.cell_volume * float(rolled.sum())

    support = sorted_dist[sorted_vals > 1e-13 * peak]
    r_support = min(float(support.max()) if support.size else 0.0, rmax)
    shell_key = np.round(dist, 12)
    radii = np.unique(shell_key[shell_key <= np.round(r_support, 12)])
    maximal = np.zeros(grid.shape)
    ball_hat = np.zeros(fhat.shape, dtype=complex)
    count = 0
    for r in radii:
        mask = (shell_key == r).astype(float)
        count += int(mask.sum())
        ball_hat += sfft.rfftn(mask, workers=workers)
        cum = sfft.irfftn(ball_hat * fhat, s=grid.shape, workers=workers)
        np.maximum(maximal, cum / count, out=maximal)

    denom = l1 * maximal
    live = denom > 0
    if not np.any(live):
        return 0.0
    return float(np.max(np.abs(conv[live]) / denom[live]))
