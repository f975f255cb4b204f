"""Inequality falsification campaigns.

Each target names one bounded-operator or norm-comparison statement.  A
campaign evaluates the statement's ratio on every corpus element at every
refinement level and reports the worst case; a configured bound encodes
"finite and stable under refinement" rather than a sharp constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exponents import (
    ExponentField,
    exponent_from_samples,
    make_exponent,
    scale_exponent,
)
from ..fields import PERIODIC, TRUNCATED, GridSpec, ScalarField, radial_distance
from ..operators import (
    default_radius_ladder,
    grad_heat_kernel_defect,
    maximal_function,
    radial_majorant_defect,
    riesz_potential_direct,
)
from ..varlp import (
    conjugate_pairing_lower_bound,
    embedding_defect,
    holder_split,
    luxemburg_norm,
    mixed_norm,
    unit_function_norm,
)
from .corpus import KINDS, generate_corpus

TARGETS = (
    "holder",
    "duality",
    "maximal",
    "riesz_potential",
    "proposition1",
    "embedding",
    "radial_majorant",
    "grad_heat",
    "lemma_unit_norm",
)

# targets whose elements are seeded parameter draws, not corpus fields
_SCAN_TARGETS = ("grad_heat", "lemma_unit_norm")

_STATEMENTS = {
    "holder": "product norm bounded by the product of factor norms under a pointwise exponent split",
    "duality": "norm equivalent to the pairing supremum over unit conjugate-norm fields",
    "maximal": "ball-average maximal operator bounded on the variable-exponent space",
    "riesz_potential": "smoothing potential maps the base space into the lifted-exponent space",
    "proposition1": "smoothing potential bounded from the mixed space into the doubled-exponent space",
    "embedding": "pointwise-smaller exponents embed with constant one plus the domain measure",
    "radial_majorant": "radially decreasing convolution dominated by its mass times the maximal function",
    "grad_heat": "heat kernel gradient controlled by the inverse of t^2 + |x|^4",
    "lemma_unit_norm": "unit-function norm bracketed by horizon powers of the extreme exponents",
}


class CampaignElementError(RuntimeError):
    """An element evaluation failed; the message carries its coordinates."""


@dataclass(frozen=True)
class CampaignConfig:
    """One falsification run: corpus, refinement ladder, exponents, bound."""

    target: str
    corpus_size: int
    seed: int
    grids: tuple[GridSpec, ...]
    exponent_specs: tuple[tuple[str, tuple[float, ...]], ...]
    bound: float
    refinement_levels: int
    corpus_kind: str = "smooth-decaying"
    sigma: float = 1.0
    frak_p: float = 1.5
    tol: float = 1e-8

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown campaign target {self.target!r}")
        if self.corpus_size < 1:
            raise ValueError(f"corpus size must be at least 1, got {self.corpus_size}")
        if self.refinement_levels < 1:
            raise ValueError(
                f"refinement levels must be at least 1, got {self.refinement_levels}"
            )
        if self.bound <= 0:
            raise ValueError(f"bound must be positive, got {self.bound}")
        if self.corpus_kind not in KINDS:
            raise ValueError(f"unknown corpus kind {self.corpus_kind!r}")
        object.__setattr__(self, "grids", tuple(self.grids))
        if len(self.grids) != self.refinement_levels:
            raise ValueError(
                f"{len(self.grids)} grids for {self.refinement_levels} refinement levels"
            )
        specs = tuple((str(tag), tuple(float(v) for v in params))
                      for tag, params in self.exponent_specs)
        object.__setattr__(self, "exponent_specs", specs)
        if self.target not in _SCAN_TARGETS + ("radial_majorant",) and not specs:
            raise ValueError(f"target {self.target!r} needs at least one exponent spec")


@dataclass(frozen=True)
class WorstCase:
    """Reference to the worst evaluation: regenerate and re-run to reproduce."""

    level: int
    element: int
    ratio: float


@dataclass(frozen=True)
class InequalityReport:
    target: str
    observed_max_ratio: float
    per_level_max: tuple[float, ...]
    passed: bool
    bound: float
    statement: str
    worst_case: WorstCase
    ratios: tuple[tuple[float, ...], ...] = field(default=())


def _grid_ladder(base: GridSpec, levels: int) -> tuple[GridSpec, ...]:
    return tuple(base.refine(2**j) for j in range(levels))


def default_campaign_config(target: str, corpus_size: int | None = None,
                            seed: int = 0, refinement_levels: int = 3) -> CampaignConfig:
    """Tuned defaults per target; see the statement table for what each checks."""
    line_box = GridSpec(1, (40.0,), (512,), TRUNCATED, (-20.0,))
    cube_box = GridSpec(3, (24.0, 24.0, 24.0), (16, 16, 16), TRUNCATED,
                        (-12.0, -12.0, -12.0))
    torus = GridSpec(3, (2.0 * np.pi,) * 3, (12, 12, 12), PERIODIC)
    scan = GridSpec(1, (1.0,), (256,), TRUNCATED, (0.0,))
    table = {
        "holder": (line_box, "smooth-decaying", 8, 4.0,
                   (("radial-log", (2.5, 0.5)), ("constant", (4.0,)),
                    ("gaussian-bump", (2.2, 0.6)))),
        "duality": (line_box, "smooth-decaying", 8, 2.0,
                    (("radial-log", (2.0, 0.5)), ("gaussian-bump", (1.8, 0.7)),
                     ("sinusoidal", (2.5, 0.8)))),
        "embedding": (line_box, "smooth-decaying", 8, 1.0 + line_box.measure,
                      (("radial-log", (1.8, 0.4)), ("gaussian-bump", (1.6, 0.5)))),
        "maximal": (cube_box, "smooth-decaying", 5, 10.0,
                    (("radial-log", (2.0, 0.5)), ("constant", (2.0,)),
                     ("gaussian-bump", (2.2, 0.5)))),
        "riesz_potential": (cube_box, "smooth-decaying", 5, 10.0,
                            (("radial-log", (2.0, 0.5)),)),
        "proposition1": (cube_box, "smooth-decaying", 5, 10.0,
                         (("radial-log", (1.5, 0.3)),)),
        "radial_majorant": (torus, "plane-wave-mix", 6, 1.05, ()),
        "grad_heat": (scan, "plane-wave-mix", 8, 0.30, ()),
        "lemma_unit_norm": (scan, "plane-wave-mix", 12, 2.0, ()),
    }
    if target not in table:
        raise ValueError(f"unknown campaign target {target!r}")
    base, kind, size, bound, specs = table[target]
    return CampaignConfig(
        target=target,
        corpus_size=size if corpus_size is None else corpus_size,
        seed=seed,
        grids=_grid_ladder(base, refinement_levels),
        exponent_specs=specs,
        bound=bound,
        refinement_levels=refinement_levels,
        corpus_kind=kind,
    )


def _spec_exponent(cfg: CampaignConfig, grid: GridSpec, which: int) -> ExponentField:
    tag, params = cfg.exponent_specs[which % len(cfg.exponent_specs)]
    return make_exponent(tag, params, grid)


def _majorant_profile(grid: GridSpec) -> ScalarField:
    width = 0.0875 * min(grid.extents)
    r = radial_distance(grid)
    return ScalarField(np.exp(-((r / width) ** 2)), grid)


def _eval_holder(cfg, grid, index, corpus) -> float:
    f = corpus[index]
    g = corpus[(index + 1) % len(corpus)]
    q = _spec_exponent(cfg, grid, index)
    r = _spec_exponent(cfg, grid, index + 1)
    split = 1.0 / (1.0 / q.samples + 1.0 / r.samples)
    product = ScalarField(f.values * g.values, grid)
    if np.max(np.abs(split - 1.0)) <= 1e-12:
        num = grid.cell_volume * float(np.sum(np.abs(product.values)))
    else:
        num = luxemburg_norm(product, holder_split(q, r), cfg.tol).value
    den = luxemburg_norm(f, q, cfg.tol).value * luxemburg_norm(g, r, cfg.tol).value
    return num / den


def _eval_duality(cfg, grid, index, corpus) -> float:
    f = corpus[index]
    p = _spec_exponent(cfg, grid, index)
    lux = luxemburg_norm(f, p, cfg.tol).value
    if lux == 0.0:
        return 0.0
    sup = conjugate_pairing_lower_bound(f, p, seed=cfg.seed + 7919 * index,
                                        tol=cfg.tol)
    return max(sup / lux, lux / sup)


def _eval_maximal(cfg, grid, index, corpus) -> float:
    f = corpus[index]
    p = _spec_exponent(cfg, grid, index)
    # fixed absolute rungs keep levels comparable; the one-cell rung makes
    # the ladder exact at the small-radius end of the current level
    radii = default_radius_ladder(cfg.grids[0]) + (0.49 * min(grid.spacings),)
    mf = maximal_function(f, radii)
    return luxemburg_norm(mf, p, cfg.tol).value / luxemburg_norm(f, p, cfg.tol).value


def _lifted_exponent(p: ExponentField, sigma: float, grid: GridSpec) -> ExponentField:
    inv = 1.0 / p.samples - sigma / grid.dimension
    if np.min(inv) <= 0.0:
        raise ValueError("lifted exponent undefined: 1/p - sigma/n is not positive")
    p_inf = None
    if p.p_infinity is not None:
        p_inf = 1.0 / (1.0 / p.p_infinity - sigma / grid.dimension)
    return exponent_from_samples(1.0 / inv, grid, p_inf)


def _eval_riesz_potential(cfg, grid, index, corpus) -> float:
    f = corpus[index]
    p = _spec_exponent(cfg, grid, index)
    q = _lifted_exponent(p, cfg.sigma, grid)
    pot = riesz_potential_direct(f, cfg.sigma)
    return luxemburg_norm(pot, q, cfg.tol).value / luxemburg_norm(f, p, cfg.tol).value


def _eval_proposition1(cfg, grid, index, corpus) -> float:
    f = corpus[index]
    pe = _spec_exponent(cfg, grid, index)
    rho = scale_exponent(pe, 2.0)
    pot = riesz_potential_direct(f, cfg.sigma)
    num = luxemburg_norm(pot, rho, cfg.tol).value
    return num / mixed_norm(f, pe, cfg.frak_p, cfg.tol).value


def _eval_embedding(cfg, grid, index, corpus) -> float:
    f = corpus[index]
    p1 = _spec_exponent(cfg, grid, index)
    p2 = scale_exponent(p1, 1.5)
    return embedding_defect(f, p1, p2, cfg.tol)


def _eval_radial_majorant(cfg, grid, index, corpus) -> float:
    return radial_majorant_defect(_majorant_profile(grid), corpus[index])


def _eval_grad_heat(cfg, grid, index, corpus) -> float:
    rng = np.random.default_rng((cfg.seed, index))
    t = 10.0 ** rng.uniform(-3.0, 1.0)
    jitter = rng.uniform()
    n = grid.resolution[0]
    log_u = np.log(1e-2) + (np.arange(n) + jitter) * (np.log(2500.0) / n)
    radii = 2.0 * np.sqrt(np.exp(log_u) * t)
    return max(grad_heat_kernel_defect(t, [r]) for r in radii)


def _eval_lemma_unit_norm(cfg, grid, index, corpus) -> float:
    rng = np.random.default_rng((cfg.seed, index))
    horizon = 8.0 ** rng.uniform(-1.0, 1.0)
    swing = rng.uniform(0.3, 1.1)
    pgrid = GridSpec(1, (horizon,), (grid.resolution[0],), TRUNCATED, (0.0,))
    p = make_exponent("sinusoidal", (2.5, swing), pgrid)
    nv = unit_function_norm(horizon, p, cfg.tol).value
    ends = (horizon ** (1.0 / p.p_minus), horizon ** (1.0 / p.p_plus))
    return max(nv / max(ends), min(ends) / nv)


_EVALUATORS = {
    "holder": _eval_holder,
    "duality": _eval_duality,
    "maximal": _eval_maximal,
    "riesz_potential": _eval_riesz_potential,
    "proposition1": _eval_proposition1,
    "embedding": _eval_embedding,
    "radial_majorant": _eval_radial_majorant,
    "grad_heat": _eval_grad_heat,
    "lemma_unit_norm": _eval_lemma_unit_norm,
}


def _level_corpus(cfg: CampaignConfig, level: int):
    if cfg.target in _SCAN_TARGETS:
        return None
    return generate_corpus(cfg.corpus_kind, cfg.corpus_size, cfg.grids[level],
                           cfg.seed)


def evaluate_element(cfg: CampaignConfig, level: int, index: int,
                     corpus=None) -> float:
    """Ratio of one corpus element at one level; regenerates the corpus if
    not supplied, so a stored (level, element) reference replays exactly."""
    if not 0 <= level < cfg.refinement_levels:
        raise IndexError(f"level {level} outside the configured ladder")
    if not 0 <= index < cfg.corpus_size:
        raise IndexError(f"element {index} outside the corpus")
    if corpus is None:
        corpus = _level_corpus(cfg, level)
    return float(_EVALUATORS[cfg.target](cfg, cfg.grids[level], index, corpus))


def run_campaign(cfg: CampaignConfig) -> InequalityReport:
    """Evaluate every element at every level; worst case by first strict max."""
    per_level = []
    all_ratios = []
    worst = WorstCase(0, 0, -np.inf)
    for level in range(cfg.refinement_levels):
        corpus = _level_corpus(cfg, level)
        ratios = []
        for index in range(cfg.corpus_size):
            try:
                ratio = evaluate_element(cfg, level, index, corpus)
            except Exception as exc:
                raise CampaignElementError(
                    f"target {cfg.target}, level {level}, element {index}: {exc}"
                ) from exc
            ratios.append(ratio)
            if ratio > worst.ratio:
                worst = WorstCase(level, index, ratio)
        per_level.append(max(ratios))
        all_ratios.append(tuple(ratios))
    observed = max(per_level)
    return InequalityReport(
        target=cfg.target,
        observed_max_ratio=observed,
        per_level_max=tuple(per_level),
        passed=observed <= cfg.bound,
        bound=cfg.bound,
        statement=_STATEMENTS[cfg.target],
        worst_case=worst,
        ratios=tuple(all_ratios),
    )


def replay_worst_case(cfg: CampaignConfig, worst: WorstCase) -> float:
    """Recompute the stored worst case from scratch."""
    return evaluate_element(cfg, worst.level, worst.element)
