"""Fixed-point construction of mild solutions on the torus.

The iteration is ``u_{n+1} = e0 - B(u_n, u_n)`` with ``e0`` the heat flow
of the data plus the accumulated forcing, and ``B`` the heat-propagated
projected transport term.  Under the measured smallness gate
``delta < 1 / (4 c_B)`` the increments contract geometrically and the
limit stays within ``2 delta`` in the regime norm.

Two regimes are supported: ``thm1`` measures iterates in a mixed norm of
the pointwise-in-space supremum over time, ``thm2`` in a Luxemburg norm in
time of the spatial fixed-exponent norm trace.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import ExponentField, resample_exponent
from .fields import (
    PERIODIC,
    TRUNCATED,
    GridSpec,
    ScalarField,
    SpaceTimeField,
    TensorField,
    TimeGrid,
    VectorField,
)
from .operators import (
    SpectralWorkspace,
    duhamel_accumulate,
    leray_project,
    make_workspace,
    relative_divergence,
)
from .varlp import NormValue, luxemburg_norm, mixed_norm

_DIV_TOL = 1e-8
_LADDER_POINTS = 16
_LADDER_SPAN = 64.0  # smallest horizon candidate is T / span


class SmallnessError(RuntimeError):
    """The data are too large for the contraction gate and no override was set."""


class PicardBlowupError(FloatingPointError):
    """An iterate produced non-finite values."""


class ForceDivergenceError(ValueError):
    """The forcing is not divergence-free to the required tolerance."""


@dataclass(frozen=True)
class SolverConfig:
    """Everything one fixed-point run needs.

    ``p`` is the spatial exponent field for ``thm1`` (on the flow grid) or
    the temporal one for ``thm2`` (on a 1d grid over ``[0, T]`` with one
    cell per time step).  ``u0`` is projected divergence-free on
    construction.
    """

    regime: str
    p: ExponentField
    q: float | None
    frak_p: float
    tol_fixedpoint: float
    max_iters: int
    tol_norm: float
    u0: VectorField
    force_spec: TensorField | SpaceTimeField | None
    tg: TimeGrid

    def __post_init__(self):
        if self.regime not in ("thm1", "thm2"):
            raise ValueError(f"regime must be 'thm1' or 'thm2', got {self.regime!r}")
        grid = self.u0.grid
        if grid.topology != PERIODIC or grid.dimension != 3:
            raise ValueError("the flow grid must be a three-dimensional torus")
        if self.frak_p <= 1:
            raise ValueError(f"frak_p must exceed 1, got {self.frak_p}")
        if self.tol_fixedpoint <= 0 or self.tol_norm <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.regime == "thm1":
            if self.p.grid != grid:
                raise ValueError("thm1 exponent field must live on the flow grid")
        else:
            self._check_thm2_exponents()
        if isinstance(self.force_spec, TensorField):
            if self.force_spec.grid != grid:
                raise ValueError("tensor force must live on the flow grid")
        elif isinstance(self.force_spec, SpaceTimeField):
            if self.force_spec.grid != grid or self.force_spec.tg != self.tg:
                raise ValueError("sampled force must share the flow grid and time grid")
        elif self.force_spec is not None:
            raise TypeError(f"unsupported force specification {type(self.force_spec)!r}")
        ws = make_workspace(grid)
        object.__setattr__(self, "u0", leray_project(self.u0, ws))

    def _check_thm2_exponents(self):
        p, q = self.p, self.q
        if q is None:
            raise ValueError("thm2 needs the fixed spatial exponent q")
        g = p.grid
        if g.dimension != 1 or g.topology != TRUNCATED:
            raise ValueError("thm2 exponent must be sampled on a 1d interval")
        if abs(g.extents[0] - self.tg.T) > 1e-12 * max(1.0, self.tg.T):
            raise ValueError("thm2 exponent interval must cover [0, T]")
        if g.resolution[0] != self.tg.steps:
            raise ValueError("thm2 exponent needs one sample per time step")
        if p.p_minus <= 2.0:
            raise ValueError(f"thm2 needs p > 2 everywhere, got minimum {p.p_minus}")
        if q <= 3.0:
            raise ValueError(f"thm2 needs q > 3, got {q}")
        worst = float(np.max(2.0 / p.samples + 3.0 / q))
        if worst >= 1.0:
            raise ValueError(
                f"thm2 scaling condition 2/p(t) + 3/q < 1 fails, worst value {worst:.6f}"
            )


@dataclass(frozen=True)
class SmallnessVerdict:
    """Measured smallness gate: data size against the contraction threshold.

    ``ladder`` holds ``(T, delta, threshold, passed)`` rows for the scanned
    horizon candidates (``thm2`` only, largest first); ``admissible_T`` is
    the first passing horizon, ``None`` when none passes.
    """

    delta: float
    threshold: float
    c_b: float
    passed: bool
    admissible_T: float | None = None
    ladder: tuple[tuple[float, float, float, bool], ...] = ()


@dataclass(frozen=True)
class SolverResult:
    """Outcome of a fixed-point run."""

    iterates_norms: tuple[float, ...]
    increments: tuple[float, ...]
    final: SpaceTimeField
    residual: float
    contraction_estimate: float | None
    c_b_estimate: float
    smallness: SmallnessVerdict
    converged: bool
    divergence_defect: float


def _hat_rel_divergence(hats, ws: SpectralWorkspace) -> float:
    w = np.full(ws.k2.shape, 2.0)
    w[..., 0] = 1.0
    if ws.grid.resolution[-1] % 2 == 0:
        w[..., -1] = 1.0
    div_hat = sum(ws.k_deriv[j] * hats[j] for j in range(len(hats)))
    num = np.sum(w * np.abs(div_hat) ** 2)
    den = np.sum(w * ws.k2_deriv * sum(np.abs(h) ** 2 for h in hats))
    if den == 0.0:
        return 0.0
    return float(np.sqrt(num / den))


def initial_term(u0: VectorField, force_spec, tg: TimeGrid,
                 ws: SpectralWorkspace) -> SpaceTimeField:
    """Heat flow of the data plus the accumulated forcing history.

    The forcing may be ``None``, a static tensor whose row divergence is
    the force, or a sampled space-time history.  Either way the resulting
    force must be divergence-free to ``1e-8`` relative or the call fails.
    """
    grid = ws.grid
    if u0.grid != grid:
        raise ValueError("data and workspace grids differ")
    dim = grid.dimension
    u0_hat = [ws.forward(c.values) for c in u0.components]
    data = np.empty((tg.steps + 1, dim) + grid.shape)
    for i, t in enumerate(tg.nodes):
        mult = np.exp(-t * ws.k2)
        for m in range(dim):
            data[i, m] = ws.inverse(mult * u0_hat[m])

    if force_spec is None:
        return SpaceTimeField(data, tg, grid)

    if isinstance(force_spec, TensorField):
        if force_spec.grid != grid:
            raise ValueError("tensor force and workspace grids differ")
        f_hat = []
        for m in range(dim):
            acc = 0.0
            for l in range(dim):
                acc = acc + 1j * ws.k_deriv[l] * ws.forward(force_spec.components[l][m].values)
            f_hat.append(acc)
        defect = _hat_rel_divergence(f_hat, ws)
        if defect > _DIV_TOL:
            raise ForceDivergenceError(
                f"tensor force has relative divergence {defect:.3e} > {_DIV_TOL}"
            )
        data += duhamel_accumulate(lambda i: f_hat, tg, ws)
        return SpaceTimeField(data, tg, grid)

    if isinstance(force_spec, SpaceTimeField):
        if force_spec.grid != grid or force_spec.tg != tg:
            raise ValueError("sampled force does not match the requested grids")

        worst = 0.0

        def hat(i: int):
            nonlocal worst
            hats = [ws.forward(force_spec.data[i, m]) for m in range(dim)]
            worst = max(worst, _hat_rel_divergence(hats, ws))
            return hats

        duh = duhamel_accumulate(hat, tg, ws)
        if worst > _DIV_TOL:
            raise ForceDivergenceError(
                f"sampled force has relative divergence {worst:.3e} > {_DIV_TOL}"
            )
        data += duh
        return SpaceTimeField(data, tg, grid)

    raise TypeError(f"unsupported force specification {type(force_spec)!r}")


def bilinear_term(u: SpaceTimeField, ws: SpectralWorkspace) -> SpaceTimeField:
    """Heat-propagated projected transport term of ``u`` against itself."""
    if u.grid != ws.grid:
        raise ValueError("field and workspace grids differ")
    dim = ws.grid.dimension

    def ghat(i: int):
        ui = u.data[i]
        t_hat = {}
        for l in range(dim):
            for m in range(l, dim):
                t_hat[(l, m)] = ws.forward(ui[l] * ui[m])
        g = []
        for m in range(dim):
            acc = 0.0
            for l in range(dim):
                key = (l, m) if l <= m else (m, l)
                acc = acc + 1j * ws.k_deriv[l] * t_hat[key]
            g.append(acc)
        dot = sum(ws.k_deriv[j] * g[j] for j in range(dim))
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(ws.k2_deriv > 0.0,
                             dot / np.where(ws.k2_deriv > 0, ws.k2_deriv, 1.0), 0.0)
        return [g[j] - ws.k_deriv[j] * scale for j in range(dim)]

    return SpaceTimeField(duhamel_accumulate(ghat, u.tg, ws), u.tg, u.grid)


def _sup_trace(data: np.ndarray) -> np.ndarray:
    out = np.sum(data[0] * data[0], axis=0)
    for i in range(1, data.shape[0]):
        np.maximum(out, np.sum(data[i] * data[i], axis=0), out=out)
    return np.sqrt(out)


def norm_E_thm1(u: SpaceTimeField, p: ExponentField, frak_p: float = 3.0,
                tol: float = 1e-8) -> NormValue:
    """Mixed norm of the pointwise supremum over time of ``|u|``."""
    trace = ScalarField(_sup_trace(u.data), u.grid)
    return mixed_norm(trace, p, frak_p, tol)


def _lq_trace(data: np.ndarray, q: float, cell_volume: float) -> np.ndarray:
    n_nodes = data.shape[0]
    out = np.empty(n_nodes)
    for i in range(n_nodes):
        mag = np.sqrt(np.sum(data[i] * data[i], axis=0))
        out[i] = (cell_volume * np.sum(mag**q)) ** (1.0 / q)
    return out


def norm_E_thm2(u: SpaceTimeField, p: ExponentField, q: float,
                tol: float = 1e-8) -> NormValue:
    """Luxemburg norm in time of the spatial fixed-exponent norm trace.

    Node values are averaged onto time cells so the trace lives on the same
    midpoint grid as the temporal exponent.
    """
    g = p.grid
    if g.dimension != 1 or g.resolution[0] != u.tg.steps:
        raise ValueError("temporal exponent needs one sample per time step")
    if abs(g.extents[0] - u.tg.T) > 1e-12 * max(1.0, u.tg.T):
        raise ValueError("temporal exponent interval must cover [0, T]")
    nodes = _lq_trace(u.data, q, u.grid.cell_volume)
    cells = 0.5 * (nodes[:-1] + nodes[1:])
    return luxemburg_norm(ScalarField(cells, g), p, tol)


def regime_norm(u: SpaceTimeField, cfg: SolverConfig) -> NormValue:
    if cfg.regime == "thm1":
        return norm_E_thm1(u, cfg.p, cfg.frak_p, cfg.tol_norm)
    return norm_E_thm2(u, cfg.p, cfg.q, cfg.tol_norm)


def _difference_norm(a: SpaceTimeField, b: SpaceTimeField, cfg: SolverConfig) -> float:
    # streamed so two large stacks never produce a third
    if cfg.regime == "thm1":
        sq = None
        for i in range(a.data.shape[0]):
            d = a.data[i] - b.data[i]
            mag2 = np.sum(d * d, axis=0)
            sq = mag2 if sq is None else np.maximum(sq, mag2)
        trace = ScalarField(np.sqrt(sq), a.grid)
        return mixed_norm(trace, cfg.p, cfg.frak_p, cfg.tol_norm).value
    q = cfg.q
    w = a.grid.cell_volume
    nodes = np.empty(a.data.shape[0])
    for i in range(a.data.shape[0]):
        d = a.data[i] - b.data[i]
        mag = np.sqrt(np.sum(d * d, axis=0))
        nodes[i] = (w * np.sum(mag**q)) ** (1.0 / q)
    cells = 0.5 * (nodes[:-1] + nodes[1:])
    return luxemburg_norm(ScalarField(cells, cfg.p.grid), cfg.p, cfg.tol_norm).value


def _random_divfree_history(grid: GridSpec, tg: TimeGrid,
                            rng: np.random.Generator, modes: int = 2) -> SpaceTimeField:
    coords = grid.coords()
    data = np.zeros((tg.steps + 1, grid.dimension) + grid.shape)
    for _ in range(modes):
        while True:
            n = rng.integers(-2, 3, size=grid.dimension)
            if np.any(n != 0):
                break
        e = rng.standard_normal(grid.dimension)
        nf = n.astype(float)
        e = e - nf * (nf @ e) / (nf @ nf)
        if np.linalg.norm(e) < 1e-8:
            e = np.roll(nf, 1) - nf * (nf @ np.roll(nf, 1)) / (nf @ nf)
        e = e / np.linalg.norm(e)
        amp = rng.uniform(0.3, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        arg = sum(2.0 * np.pi * n[a] * (coords[a] - grid.origin[a]) / grid.extents[a]
                  for a in range(grid.dimension))
        wave = amp * np.cos(arg + phase)
        omega = rng.uniform(0.0, 2.0 * np.pi)
        psi = rng.uniform(0.0, 2.0 * np.pi)
        mod = 1.0 + 0.5 * np.cos(omega * tg.nodes + psi)
        for i in range(tg.steps + 1):
            for m in range(grid.dimension):
                data[i, m] += mod[i] * e[m] * wave
    return SpaceTimeField(data, tg, grid)


def estimate_bilinear_constant(regime: str, p: ExponentField, q: float | None,
                               tg: TimeGrid, ws: SpectralWorkspace,
                               trials: int = 3, seed: int = 0,
                               frak_p: float = 3.0, tol: float = 1e-8) -> float:
    """Measured operator constant: worst ``norm(B(u,u)) / norm(u)^2`` over trials.

    Trial fields are seeded divergence-free plane-wave packets with smooth
    time modulation, so repeated calls are deterministic and more trials
    can only raise the estimate.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        u = _random_divfree_history(ws.grid, tg, rng)
        if regime == "thm1":
            nu = norm_E_thm1(u, p, frak_p, tol).value
            nb = norm_E_thm1(bilinear_term(u, ws), p, frak_p, tol).value
        else:
            nu = norm_E_thm2(u, p, q, tol).value
            nb = norm_E_thm2(bilinear_term(u, ws), p, q, tol).value
        if nu > 0:
            best = max(best, nb / (nu * nu))
    return best


def _interp_history(force: SpaceTimeField, tg: TimeGrid) -> SpaceTimeField:
    pos = tg.nodes / force.tg.dt
    lo = np.minimum(np.floor(pos).astype(int), force.tg.steps - 1)
    frac = pos - lo
    data = np.empty((tg.steps + 1,) + force.data.shape[1:])
    for i in range(tg.steps + 1):
        data[i] = (1.0 - frac[i]) * force.data[lo[i]] + frac[i] * force.data[lo[i] + 1]
    return SpaceTimeField(data, tg, force.grid)


def _horizon_ladder(T: float) -> list[float]:
    return [float(T * _LADDER_SPAN ** (-j / (_LADDER_POINTS - 1)))
            for j in range(_LADDER_POINTS)]


def smallness_check(cfg: SolverConfig, c_b: float) -> SmallnessVerdict:
    """Measure the data size and compare against the contraction threshold.

    For ``thm2`` a decreasing geometric ladder of horizon candidates is
    scanned as well; the ladder thresholds rescale the measured constant by
    ``(1 + T') / (1 + T)``, the horizon dependence of the transport bound.
    """
    if c_b <= 0:
        raise ValueError(f"bilinear constant must be positive, got {c_b}")
    ws = make_workspace(cfg.u0.grid)
    e0 = initial_term(cfg.u0, cfg.force_spec, cfg.tg, ws)
    delta = regime_norm(e0, cfg).value
    threshold = 1.0 / (4.0 * c_b)
    passed = delta < threshold
    if cfg.regime == "thm1":
        return SmallnessVerdict(delta, threshold, c_b, passed)

    ladder = []
    admissible = None
    for T_cand in _horizon_ladder(cfg.tg.T):
        steps = max(2, int(round(cfg.tg.steps * T_cand / cfg.tg.T)))
        tg = TimeGrid(T_cand, steps)
        p_grid = GridSpec(1, (T_cand,), (steps,), TRUNCATED, (0.0,))
        p_cand = resample_exponent(cfg.p, p_grid)
        force = cfg.force_spec
        if isinstance(force, SpaceTimeField):
            force = _interp_history(force, tg)
        e0_cand = initial_term(cfg.u0, force, tg, ws)
        delta_cand = norm_E_thm2(e0_cand, p_cand, cfg.q, cfg.tol_norm).value
        c_cand = c_b * (1.0 + T_cand) / (1.0 + cfg.tg.T)
        thr_cand = 1.0 / (4.0 * c_cand)
        ok = delta_cand < thr_cand
        ladder.append((T_cand, delta_cand, thr_cand, ok))
        if ok and admissible is None:
            admissible = T_cand
    return SmallnessVerdict(delta, threshold, c_b, passed, admissible, tuple(ladder))


def picard_solve(cfg: SolverConfig, c_b: float | None = None, trials: int = 3,
                 seed: int = 0, disable_bilinear: bool = False,
                 override_smallness: bool = False) -> SolverResult:
    """Run the fixed-point iteration until the increments drop below tolerance.

    ``disable_bilinear`` switches the transport term off (the linear heat
    limit); ``override_smallness`` lets the run proceed past a failed gate,
    reporting the failure in the verdict instead of raising.
    """
    ws = make_workspace(cfg.u0.grid)
    e0 = initial_term(cfg.u0, cfg.force_spec, cfg.tg, ws)
    if c_b is None:
        c_b = estimate_bilinear_constant(
            cfg.regime, cfg.p, cfg.q, cfg.tg, ws, trials, seed, cfg.frak_p, cfg.tol_norm)
        if c_b == 0.0:
            c_b = 1e-30
    verdict = smallness_check(cfg, c_b)
    if not verdict.passed and not override_smallness:
        raise SmallnessError(
            f"data norm {verdict.delta:.6e} is not below the contraction "
            f"threshold {verdict.threshold:.6e}; pass override_smallness=True to force"
        )

    u = e0
    norms = [regime_norm(u, cfg).value]
    increments: list[float] = []
    converged = False
    for n in range(1, cfg.max_iters + 1):
        if disable_bilinear:
            u_next = e0
        else:
            bu = bilinear_term(u, ws)
            u_next = SpaceTimeField(np.subtract(e0.data, bu.data, out=bu.data),
                                    cfg.tg, cfg.u0.grid)
        if not u_next.is_finite():
            raise PicardBlowupError(f"iterate {n} produced non-finite values")
        d = _difference_norm(u_next, u, cfg)
        increments.append(d)
        norms.append(regime_norm(u_next, cfg).value)
        u = u_next
        if d <= cfg.tol_fixedpoint:
            converged = True
            break

    if disable_bilinear:
        residual = 0.0
    else:
        bu = bilinear_term(u, ws)
        # residual of the fixed-point equation, which is also the next increment
        np.add(bu.data, u.data, out=bu.data)
        np.subtract(bu.data, e0.data, out=bu.data)
        residual = regime_norm(SpaceTimeField(bu.data, cfg.tg, cfg.u0.grid), cfg).value

    contraction = None
    positive = [(a, b) for a, b in zip(increments, increments[1:]) if a > 0]
    if positive:
        contraction = max(b / a for a, b in positive)

    div_defect = 0.0
    for i in range(u.data.shape[0]):
        div_defect = max(div_defect, relative_divergence(u.frame(i), ws))

    return SolverResult(tuple(norms), tuple(increments), u, residual, contraction,
                        c_b, verdict, converged, div_defect)
