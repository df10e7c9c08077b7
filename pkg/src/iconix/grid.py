"""Dual-axis icon grid assembly, style variants and sprite-sheet export.

Rows carry semantic richness (top row = Macroscopic, the most elaborate);
columns carry visual complexity (leftmost = lowest step index = most
detailed). Style variants derive in a fixed chain: mask composite ->
Outline, then Outline -> Filled and Outline -> Color.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .backends.base import StyleVariant
from .errors import (
    BackendUnavailable,
    DimensionMismatch,
    IncompleteVariant,
    InsufficientFrames,
    NonMonotonicPicks,
    VariantOrderViolation,
)
from .imaging import PixelFormat, Raster, encode_png, paste
from .layering import LayeredIcon
from .scaffold import View

DEFAULT_COLUMNS = 3
GUTTER = 8

SEMANTIC_LEVEL = {View.COMPARATIVE: 1, View.MICROSCOPIC: 2, View.MACROSCOPIC: 3}
VIEW_BY_LEVEL = {level: view for view, level in SEMANTIC_LEVEL.items()}

# Display order, top to bottom: semantic richness decreases.
ROW_VIEWS_TOP_DOWN = (View.MACROSCOPIC, View.MICROSCOPIC, View.COMPARATIVE)

VARIANT_ORDER = (StyleVariant.OUTLINE, StyleVariant.FILLED, StyleVariant.COLOR)


@dataclass(frozen=True)
class Provenance:
    view: View
    step: int
    layers_ref: str


@dataclass
class GridCell:
    semantic_level: int
    complexity_level: int
    variant: StyleVariant
    icon: Raster
    provenance: Provenance


@dataclass
class SourceCell:
    """Layered-mask composite a cell's styled variants derive from."""
    semantic_level: int
    complexity_level: int
    icon: LayeredIcon
    provenance: Provenance


@dataclass
class IconGrid:
    concept: str
    columns: int
    rows: int = 3
    sources: dict[tuple[int, int], SourceCell] = field(default_factory=dict)
    cells: dict[tuple[int, int, StyleVariant], GridCell] = field(default_factory=dict)
    failures: dict[tuple[int, int, StyleVariant], str] = field(default_factory=dict)

    @property
    def selected_variants(self) -> set[StyleVariant]:
        return {variant for variant in StyleVariant if self.variant_complete(variant)}

    def variant_complete(self, variant: StyleVariant) -> bool:
        return all((level, column, variant) in self.cells
                   for level in SEMANTIC_LEVEL.values()
                   for column in range(1, self.columns + 1))

    def row_cells(self, variant: StyleVariant, semantic_level: int) -> list[GridCell]:
        return [self.cells[(semantic_level, column, variant)]
                for column in range(1, self.columns + 1)]


def default_pick_ranks(available: int, columns: int) -> list[int]:
    """Evenly spaced 1-based ranks among `available` ordered frames."""
    if available < columns:
        raise InsufficientFrames(f"{available} frames for {columns} columns")
    if columns == 1:
        return [(available + 1) // 2]
    span = (available - 1) / (columns - 1)
    return [1 + int(np.floor(j * span + 0.5)) for j in range(columns)]


def assemble_grid(per_view: Mapping[View, Sequence[tuple[int, LayeredIcon]]],
                  columns: int = DEFAULT_COLUMNS,
                  picks: Mapping[View, Sequence[int]] | None = None,
                  concept: str = "") -> IconGrid:
    """Build the grid's source cells from per-view layered icons.

    Each view's list holds (step index, icon) in ascending step order.
    Default picks take evenly spaced ranks; explicit picks are step
    indices and must be strictly increasing within a row.
    """
    grid = IconGrid(concept=concept, columns=columns)
    for view in View:
        entries = list(per_view.get(view, ()))
        if not entries:
            raise InsufficientFrames(f"no frames for {view.value}")
        steps = [step for step, _ in entries]
        if sorted(steps) != steps or len(set(steps)) != len(steps):
            raise ValueError(f"{view.value} frames must be in strictly "
                             "increasing step order")
        by_step = dict(entries)
        if picks and view in picks:
            chosen = [int(s) for s in picks[view]]
            if len(chosen) != columns:
                raise InsufficientFrames(
                    f"{view.value}: {len(chosen)} picks for {columns} columns")
            if any(b <= a for a, b in zip(chosen, chosen[1:])):
                raise NonMonotonicPicks(
                    f"{view.value} picks {chosen} not strictly increasing")
            missing = [s for s in chosen if s not in by_step]
            if missing:
                raise InsufficientFrames(
                    f"{view.value} picks reference unknown steps {missing}")
        else:
            ranks = default_pick_ranks(len(entries), columns)
            chosen = [steps[rank - 1] for rank in ranks]
        level = SEMANTIC_LEVEL[view]
        for column, step in enumerate(chosen, start=1):
            provenance = Provenance(view=view, step=step,
                                    layers_ref=f"{view.value}/{step}")
            grid.sources[(level, column)] = SourceCell(
                semantic_level=level, complexity_level=column,
                icon=by_step[step], provenance=provenance)
    return grid


def restyle_grid(grid: IconGrid, variants: set[StyleVariant], restyler) -> IconGrid:
    """Populate the requested style variants, respecting the derivation chain.

    Per-cell backend failures are recorded in `grid.failures` and the grid
    comes back partial.
    """
    requested = [v for v in VARIANT_ORDER if v in variants]
    derived = {StyleVariant.FILLED, StyleVariant.COLOR}
    needs_outline = any(v in derived for v in requested)
    if needs_outline and StyleVariant.OUTLINE not in variants \
            and not grid.variant_complete(StyleVariant.OUTLINE):
        raise VariantOrderViolation(
            "filled/color derive from outline cells, which do not exist yet")
    for variant in requested:
        for (level, column), source in sorted(grid.sources.items()):
            key = (level, column, variant)
            if variant is StyleVariant.OUTLINE:
                origin = source.icon.composite
            else:
                outline = grid.cells.get((level, column, StyleVariant.OUTLINE))
                if outline is None:
                    grid.failures[key] = "outline cell missing"
                    continue
                origin = outline.icon
            try:
                styled = restyler.restyle(origin, variant)
            except BackendUnavailable as exc:
                grid.failures[key] = str(exc) or "backend unavailable"
                continue
            grid.failures.pop(key, None)
            grid.cells[key] = GridCell(
                semantic_level=level, complexity_level=column, variant=variant,
                icon=styled, provenance=source.provenance)
    return grid


@dataclass
class GridExport:
    sheets: dict[StyleVariant, Raster]
    manifest: dict


def _cell_rect(row: int, column: int, width: int, height: int) -> dict:
    return {
        "x": GUTTER + (column - 1) * (width + GUTTER),
        "y": GUTTER + (row - 1) * (height + GUTTER),
        "w": width,
        "h": height,
    }


def export_grid(grid: IconGrid,
                variants: set[StyleVariant] | None = None) -> GridExport:
    """Sprite sheet per variant plus a manifest that round-trips losslessly.

    Cells tile row-major with 8-px white gutters; the manifest records the
    pixel rectangle and provenance of every cell, with `png_ref` the
    SHA-256 of the cell's PNG bytes.
    """
    complete = grid.selected_variants
    wanted = sorted(variants or complete, key=VARIANT_ORDER.index)
    if not wanted:
        raise IncompleteVariant("no complete variant to export")
    missing = [v.value for v in wanted if v not in complete]
    if missing:
        raise IncompleteVariant(f"variants not fully populated: {missing}")
    sheets: dict[StyleVariant, Raster] = {}
    cell_entries: list[dict] = []
    layer_refs: dict[str, dict] = {}
    for variant in wanted:
        cells = [grid.cells[(level, column, variant)]
                 for level in SEMANTIC_LEVEL.values()
                 for column in range(1, grid.columns + 1)]
        sizes = {cell.icon.size for cell in cells}
        if len(sizes) != 1:
            raise DimensionMismatch(f"mixed cell sizes in {variant.value}: {sizes}")
        width, height = sizes.pop()
        fmt = cells[0].icon.fmt
        sheet_w = grid.columns * width + (grid.columns + 1) * GUTTER
        sheet_h = grid.rows * height + (grid.rows + 1) * GUTTER
        channels = fmt.channels
        canvas = np.full((sheet_h, sheet_w, channels) if channels > 1
                         else (sheet_h, sheet_w), 255, dtype=np.uint8)
        for display_row, view in enumerate(ROW_VIEWS_TOP_DOWN, start=1):
            level = SEMANTIC_LEVEL[view]
            for column in range(1, grid.columns + 1):
                cell = grid.cells[(level, column, variant)]
                if cell.icon.fmt is not fmt:
                    raise DimensionMismatch(
                        f"mixed pixel formats in {variant.value}")
                rect = _cell_rect(display_row, column, width, height)
                paste(canvas, cell.icon, rect["x"], rect["y"])
                png_ref = hashlib.sha256(encode_png(cell.icon)).hexdigest()
                cell_entries.append({
                    "row": display_row,
                    "col": column,
                    "variant": variant.value,
                    "png_ref": png_ref,
                    "rect": rect,
                    "provenance": {
                        "view": cell.provenance.view.value,
                        "step": cell.provenance.step,
                        "layers_ref": cell.provenance.layers_ref,
                    },
                })
        sheets[variant] = Raster.from_array(canvas)
    for source in grid.sources.values():
        layer_refs.setdefault(source.provenance.layers_ref, {
            "view": source.provenance.view.value,
            "step": source.provenance.step,
            "alpha": source.icon.layers[0].alpha if source.icon.layers else None,
            "layer_count": len(source.icon.layers),
        })
    manifest = {
        "concept": grid.concept,
        "rows": grid.rows,
        "columns": grid.columns,
        "variants": [v.value for v in wanted],
        "cells": cell_entries,
        "layers": layer_refs,
    }
    return GridExport(sheets=sheets, manifest=manifest)
