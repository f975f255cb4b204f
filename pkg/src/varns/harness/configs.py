"""JSON run configurations.

One JSON document describes one run; command-line flags override document
keys one-to-one.  Campaign documents start from the target's defaults and
replace only the keys present.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from ..exponents import ExponentField, make_exponent
from ..fields import (
    PERIODIC,
    TRUNCATED,
    GridSpec,
    SpaceTimeField,
    TimeGrid,
    VectorField,
)
from ..mild_solver import SolverConfig
from .campaigns import CampaignConfig, default_campaign_config
from .corpus import antisymmetric_tensor_field, generate_corpus
from .fieldfile import read_field


def _merge(doc: dict, overrides: dict | None) -> dict:
    merged = dict(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    return merged


def grid_from_doc(doc: dict) -> GridSpec:
    dimension = int(doc["dimension"])
    topology = doc.get("topology", TRUNCATED)
    if topology not in (TRUNCATED, PERIODIC):
        raise ValueError(f"unknown topology {topology!r}")
    origin = doc.get("origin", (0.0,) * dimension)
    return GridSpec(dimension, tuple(doc["extents"]), tuple(doc["resolution"]),
                    topology, tuple(origin))


def exponent_from_doc(doc: dict, grid: GridSpec) -> ExponentField:
    return make_exponent(doc["family"], tuple(doc["params"]), grid)


def build_campaign_config(doc: dict, overrides: dict | None = None) -> CampaignConfig:
    doc = _merge(doc, overrides)
    if "target" not in doc:
        raise ValueError("campaign config needs a 'target' key")
    cfg = default_campaign_config(doc["target"],
                                  refinement_levels=int(doc.get("refinement_levels", 3)))
    updates = {}
    for key in ("corpus_size", "seed", "refinement_levels"):
        if key in doc:
            updates[key] = int(doc[key])
    for key in ("bound", "sigma", "frak_p", "tol"):
        if key in doc:
            updates[key] = float(doc[key])
    if "corpus_kind" in doc:
        updates["corpus_kind"] = doc["corpus_kind"]
    if "exponent_specs" in doc:
        updates["exponent_specs"] = tuple(
            (tag, tuple(params)) for tag, params in doc["exponent_specs"])
    if "grids" in doc:
        updates["grids"] = tuple(grid_from_doc(g) for g in doc["grids"])
    elif "base_grid" in doc:
        levels = updates.get("refinement_levels", cfg.refinement_levels)
        base = grid_from_doc(doc["base_grid"])
        updates["grids"] = tuple(base.refine(2**j) for j in range(levels))
    if "grids" in updates and "refinement_levels" not in updates:
        updates["refinement_levels"] = len(updates["grids"])
    return dataclasses.replace(cfg, **updates)


def _initial_field_from_doc(doc: dict, grid: GridSpec) -> VectorField:
    if "components_paths" in doc:
        comps = [read_field(path) for path in doc["components_paths"]]
        return VectorField(tuple(comps), grid)
    kind = doc.get("kind", "divergence-free")
    if kind != "divergence-free":
        raise ValueError(f"unknown initial-field kind {kind!r}")
    element = generate_corpus("divergence-free", 1, grid, int(doc.get("seed", 0)))[0]
    return element * float(doc.get("amplitude", 1.0))


def _force_from_doc(doc, grid: GridSpec, tg: TimeGrid):
    if doc is None:
        return None
    kind = doc.get("kind")
    amplitude = float(doc.get("amplitude", 1.0))
    seed = int(doc.get("seed", 0))
    if kind == "antisymmetric-tensor":
        return antisymmetric_tensor_field(grid, seed, amplitude)
    if kind == "modulated-divergence-free":
        omega = float(doc.get("omega", 1.0))
        shape_field = generate_corpus("divergence-free", 1, grid, seed)[0]
        data = np.empty((tg.steps + 1, grid.dimension) + grid.shape)
        for i, t in enumerate(tg.nodes):
            factor = amplitude * np.cos(omega * t)
            for m in range(grid.dimension):
                data[i, m] = factor * shape_field.components[m].values
        return SpaceTimeField(data, tg, grid)
    raise ValueError(f"unknown force kind {kind!r}")


def build_solver_config(doc: dict, overrides: dict | None = None) -> SolverConfig:
    doc = _merge(doc, overrides)
    grid = grid_from_doc(doc["grid"])
    tg = TimeGrid(float(doc["T"]), int(doc["steps"]))
    regime = doc["regime"]
    if regime == "thm1":
        p_grid = grid
    else:
        p_grid = GridSpec(1, (tg.T,), (tg.steps,), TRUNCATED, (0.0,))
    p = exponent_from_doc(doc["p"], p_grid)
    u0 = _initial_field_from_doc(doc["u0"], grid)
    force = _force_from_doc(doc.get("force"), grid, tg)
    return SolverConfig(
        regime=regime,
        p=p,
        q=None if doc.get("q") is None else float(doc["q"]),
        frak_p=float(doc.get("frak_p", 3.0)),
        tol_fixedpoint=float(doc.get("tol_fixedpoint", 1e-9)),
        max_iters=int(doc.get("max_iters", 20)),
        tol_norm=float(doc.get("tol_norm", 1e-8)),
        u0=u0,
        force_spec=force,
        tg=tg,
    )
