"""Modulars, Luxemburg norms, and the inequalities tying them together.

The modular of a field ``f`` against an exponent field ``p`` is the
quadrature of ``|f(x)|^p(x)``.  The Luxemburg norm is the smallest positive
scale ``lam`` with ``modular(f / lam) <= 1``; since the modular is strictly
decreasing in ``lam`` for nonzero ``f``, a bracketed bisection computes it
to any requested half-width.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import ExponentField, conjugate_exponent, exponent_from_samples
from .fields import (
    TRUNCATED,
    GridSpec,
    ScalarField,
    require_same_grid,
)

_BRACKET_CAP = 200


class BisectionError(RuntimeError):
    """Norm bisection failed to bracket or converge; input scale is pathological."""


class UndefinedRatioError(ZeroDivisionError):
    """A defect ratio has a null denominator."""


class ExponentRelationError(ValueError):
    """Exponent fields do not satisfy the pointwise relation an inequality needs."""


@dataclass(frozen=True)
class NormValue:
    """A computed norm: the value, which norm it is, and the achieved tolerance."""

    value: float
    kind: str
    tolerance: float


def modular(f: ScalarField, p: ExponentField) -> float:
    """Quadrature of ``|f(x)|^p(x)`` over the grid."""
    require_same_grid(f, p)
    return float(f.grid.cell_volume * np.sum(np.abs(f.values) ** p.samples))


def classical_norm(f: ScalarField, q: float) -> float:
    """Constant-exponent Lebesgue norm by direct quadrature."""
    if q <= 0:
        raise ValueError(f"classical exponent must be positive, got {q}")
    return float((f.grid.cell_volume * np.sum(np.abs(f.values) ** q)) ** (1.0 / q))


def luxemburg_norm(f: ScalarField, p: ExponentField, tol: float = 1e-8) -> NormValue:
    """Luxemburg norm of ``f`` for the exponent field ``p``.

    Returns exactly zero for the zero field.  Otherwise brackets the unit
    modular level by doubling/halving from a constant-exponent seed and
    bisects until the bracket half-width is at most ``tol``.
    """
    require_same_grid(f, p)
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    a = np.abs(f.values)
    if not a.any():
        return NormValue(0.0, "luxemburg", 0.0)
    w = f.grid.cell_volume
    pexp = p.samples

    def rho(lam: float) -> float:
        with np.errstate(over="ignore"):
            return float(w * np.sum((a / lam) ** pexp))

    seed = float((w * np.sum(a ** p.p_minus)) ** (1.0 / p.p_minus))
    if not np.isfinite(seed) or seed <= 0.0:
        seed = float(np.max(a))
    if not np.isfinite(seed) or seed <= 0.0:
        raise BisectionError("could not seed the norm bracket; field scale is pathological")

    r = rho(seed)
    if r == 1.0:
        return NormValue(seed, "luxemburg", 0.0)
    if r > 1.0:
        lo, hi = seed, seed
        for _ in range(_BRACKET_CAP):
            hi *= 2.0
            if rho(hi) <= 1.0:
                break
        else:
            raise BisectionError("failed to bracket the norm from above")
    else:
        lo, hi = seed, seed
        for _ in range(_BRACKET_CAP):
            lo /= 2.0
            if rho(lo) > 1.0:
                break
        else:
            raise BisectionError("failed to bracket the norm from below")

    for _ in range(_BRACKET_CAP):
        if 0.5 * (hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    else:
        raise BisectionError(f"bisection did not reach half-width {tol}")
    return NormValue(0.5 * (lo + hi), "luxemburg", 0.5 * (hi - lo))


def mixed_norm(f: ScalarField, p: ExponentField, frak_p: float,
               tol: float = 1e-8) -> NormValue:
    """Maximum of the Luxemburg norm and the classical ``frak_p`` norm."""
    lux = luxemburg_norm(f, p, tol)
    fixed = classical_norm(f, frak_p)
    return NormValue(max(lux.value, fixed), "mixed", lux.tolerance)


def _check_holder_triple(p: ExponentField, q: ExponentField, r: ExponentField):
    residual = np.max(np.abs(1.0 / p.samples - 1.0 / q.samples - 1.0 / r.samples))
    if residual > 1e-12:
        raise ExponentRelationError(
            f"1/p = 1/q + 1/r fails pointwise, worst residual {residual:.3e}"
        )


def holder_defect(f: ScalarField, g: ScalarField, p: ExponentField,
                  q: ExponentField, r: ExponentField, tol: float = 1e-9) -> float:
    """Ratio ``norm(fg, p) / (norm(f, q) * norm(g, r))`` with ``1/p = 1/q + 1/r``."""
    require_same_grid(f, g, p, q, r)
    _check_holder_triple(p, q, r)
    num = luxemburg_norm(ScalarField(f.values * g.values, f.grid), p, tol).value
    den = luxemburg_norm(f, q, tol).value * luxemburg_norm(g, r, tol).value
    if den == 0.0:
        raise UndefinedRatioError("product bound ratio undefined: a factor has zero norm")
    return num / den


def conjugate_pairing_lower_bound(f: ScalarField, p: ExponentField,
                                  candidates: int = 8, seed: int = 0,
                                  tol: float = 1e-8) -> float:
    """Best pairing ``integral |f| |g|`` over unit-norm conjugate candidates.

    The candidate set is the canonical near-optimizer ``|f / norm(f)|^(p-1)``
    plus seeded rough fields, each normalized in the conjugate Luxemburg
    norm.  The result is a certified lower bound for the dual norm and never
    exceeds twice the Luxemburg norm of ``f``.
    """
    require_same_grid(f, p)
    if candidates < 0:
        raise ValueError(f"candidate count must be nonnegative, got {candidates}")
    pc = conjugate_exponent(p)
    w = f.grid.cell_volume
    af = np.abs(f.values)
    lux = luxemburg_norm(f, p, tol).value
    if lux == 0.0:
        return 0.0
    pool = [(af / lux) ** (p.samples - 1.0)]
    rng = np.random.default_rng(seed)
    for _ in range(candidates):
        pool.append(np.abs(rng.standard_normal(f.grid.shape)) + 0.1)
    best = 0.0
    for values in pool:
        g = ScalarField(values, f.grid)
        gnorm = luxemburg_norm(g, pc, tol).value
        if gnorm == 0.0:
            continue
        best = max(best, float(w * np.sum(af * values) / gnorm))
    return best


def unit_function_norm(T: float, p: ExponentField, tol: float = 1e-8) -> NormValue:
    """Luxemburg norm of the constant function 1 on the interval ``[0, T]``."""
    if p.grid.dimension != 1 or p.grid.topology != TRUNCATED:
        raise ValueError("unit-function norm expects a one-dimensional truncated grid")
    if abs(p.grid.extents[0] - T) > 1e-12 * max(1.0, T):
        raise ValueError(
            f"grid extent {p.grid.extents[0]} does not cover the requested horizon {T}"
        )
    ones = ScalarField(np.ones(p.grid.shape), p.grid)
    out = luxemburg_norm(ones, p, tol)
    return NormValue(out.value, "luxemburg", out.tolerance)


def embedding_defect(f: ScalarField, p1: ExponentField, p2: ExponentField,
                     tol: float = 1e-8) -> float:
    """Ratio ``norm(f, p1) / norm(f, p2)`` for ``p1 <= p2`` on a bounded box.

    The pointwise order is verified first; the ratio is bounded by
    ``1 + measure(box)``.
    """
    require_same_grid(f, p1, p2)
    gap = p1.samples - p2.samples
    if np.any(gap > 1e-12):
        idx = np.unravel_index(int(np.argmax(gap)), p1.grid.shape)
        point = tuple(float(grid_axis[i]) for grid_axis, i in
                      zip([p1.grid.axis_coords(d) for d in range(p1.grid.dimension)], idx))
        raise ExponentRelationError(
            f"p1 <= p2 fails at grid point {point}: "
            f"{p1.samples[idx]:.6f} > {p2.samples[idx]:.6f}"
        )
    den = luxemburg_norm(f, p2, tol).value
    if den == 0.0:
        raise UndefinedRatioError("embedding ratio undefined: zero field")
    return luxemburg_norm(f, p1, tol).value / den


def holder_split(q: ExponentField, r: ExponentField) -> ExponentField:
    """Exponent field ``p`` with ``1/p = 1/q + 1/r`` pointwise."""
    require_same_grid(q, r)
    samples = 1.0 / (1.0 / q.samples + 1.0 / r.samples)
    return exponent_from_samples(samples, q.grid)


__all__ = [
    "BisectionError",
    "ExponentRelationError",
    "NormValue",
    "UndefinedRatioError",
    "classical_norm",
    "conjugate_pairing_lower_bound",
    "embedding_defect",
    "holder_defect",
    "holder_split",
    "luxemburg_norm",
    "mixed_norm",
    "modular",
    "unit_function_norm",
]
