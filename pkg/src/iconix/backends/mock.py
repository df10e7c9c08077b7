"""Deterministic mock backends.

Every operation is a pure function of its inputs: pattern seeds come from
content hashes, never from process state, so repeated runs (and repeated
processes) produce byte-identical outputs.
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy import ndimage

from ..errors import BackendUnavailable
from ..ideation import AttributeScores, Category, Concept, ConceptSource
from ..imaging import (
    BinaryMask,
    Connectivity,
    PixelFormat,
    Raster,
    REFERENCE_SIZE,
    binarize,
    connected_components,
    downsample,
    reference_perceptual_distance,
    to_grayscale,
)
from ..scaffold import SemanticRelation
from .base import FeatureVector, StyleVariant, merge_expansions
from . import fixtures

MOCK_CANVAS = 128
_BACKGROUND = 235

# Constant per-step blur keeps the simplifier memoryless: resuming from the
# last frame reproduces a longer run frame-for-frame. At this sigma the
# blur/requantize pair behaves like curvature flow: small and pointed
# features evaporate within a few dozen steps while large blobs survive,
# so sequences stay busy early and then settle to one dark component.
_SIGMA = 3.0
_MAX_GRAY_LEVELS = 8

_PALETTE = (
    (214, 69, 65),
    (67, 134, 198),
    (244, 179, 66),
    (87, 163, 112),
    (142, 101, 186),
    (224, 130, 55),
)


def _seed_bytes(*parts: bytes) -> np.random.Generator:
    digest = hashlib.sha256(b"\x1f".join(parts)).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


class FixtureExpansionSource:
    """Single fixture table acting as one expansion source."""

    def __init__(self, table: dict[str, list[tuple[str, str]]],
                 source: ConceptSource, fail: bool = False):
        self._table = table
        self._source = source
        self._fail = fail

    def expand_concepts(self, input_concept: Concept, known: set[str]) -> list[Concept]:
        if self._fail:
            raise BackendUnavailable(f"scripted outage for {self._source.value}")
        labels: list[tuple[str, str]] = list(self._table.get(input_concept.label, []))
        for origin in sorted(known):
            labels.extend(self._table.get(origin, []))
        out: list[Concept] = []
        seen = set(known)
        for label, gloss in labels:
            if label in seen:
                continue
            seen.add(label)
            out.append(Concept(label=label, gloss=gloss, source=self._source))
        return out


class MockBackend:
    """All eight backend roles, deterministic and offline."""

    def __init__(self, canvas: int = MOCK_CANVAS):
        self.canvas = canvas
        self._kb = FixtureExpansionSource(fixtures.KB_EXPANSIONS,
                                          ConceptSource.KNOWLEDGE_BASE)
        self._lm = FixtureExpansionSource(fixtures.LM_EXPANSIONS,
                                          ConceptSource.LANGUAGE_MODEL)

    # -- generation ---------------------------------------------------------

    def generate(self, prompt: str, condition: Raster | None = None) -> Raster:
        """Procedural icon-like pattern seeded by hash(prompt + condition bytes).

        Light ground with one dominant dark shape plus a few smaller
        satellites, so downstream simplification converges to a single blob.
        """
        rng = _seed_bytes(prompt.encode("utf-8"),
                          condition.data if condition is not None else b"")
        side = self.canvas
        img = np.full((side, side), _BACKGROUND, dtype=np.uint8)
        yy, xx = np.mgrid[0:side, 0:side]
        cx = side // 2 + int(rng.integers(-side // 10, side // 10 + 1))
        cy = side // 2 + int(rng.integers(-side // 10, side // 10 + 1))
        main_r = int(rng.integers(side // 5, side // 3 + 1))
        shade = int(rng.integers(25, 56))
        if rng.integers(0, 2) == 0:
            img[(xx - cx) ** 2 + (yy - cy) ** 2 <= main_r ** 2] = shade
        else:
            half_w = main_r
            half_h = max(4, int(main_r * 0.7))
            img[(np.abs(xx - cx) <= half_w) & (np.abs(yy - cy) <= half_h)] = shade
        for _ in range(int(rng.integers(1, 4))):
            angle = rng.uniform(0, 2 * np.pi)
            dist = main_r + int(rng.integers(8, 21))
            sx = int(np.clip(cx + dist * np.cos(angle), 10, side - 11))
            sy = int(np.clip(cy + dist * np.sin(angle), 10, side - 11))
            sat_r = int(rng.integers(side // 16, side // 9 + 1))
            sat_shade = int(rng.integers(25, 56))
            img[(xx - sx) ** 2 + (yy - sy) ** 2 <= sat_r ** 2] = sat_shade
        return Raster.from_array(img)

    # -- simplification -----------------------------------------------------

    def simplify_step(self, img: Raster, step_count: int = 1) -> list[Raster]:
        """Reference simplifier: blur, snap to the frame's gray levels, close.

        Stands in for the diffusion-based service; it only guarantees the
        pipeline contracts (deterministic, dimension-preserving, gray-level
        inventory never grows), not any visual resemblance.
        """
        if step_count < 1:
            raise ValueError("step_count must be >= 1")
        frames: list[Raster] = []
        current = img
        for _ in range(step_count):
            current = _simplify_once(current)
            frames.append(current)
        return frames

    # -- segmentation -------------------------------------------------------

    def segment(self, img: Raster) -> list[BinaryMask]:
        """One mask per dark connected component (raster-scan order)."""
        mask = binarize(img)
        count, labels = connected_components(mask, Connectivity.EIGHT)
        return [BinaryMask.from_array(labels == index)
                for index in range(1, count + 1)]

    # -- features and distances ---------------------------------------------

    def extract_features(self, img: Raster) -> FeatureVector:
        thumb = downsample(to_grayscale(img), REFERENCE_SIZE, REFERENCE_SIZE)
        return FeatureVector.from_array(thumb.to_array().reshape(-1) / 255.0)

    def perceptual_distance(self, a: Raster, b: Raster) -> float:
        return reference_perceptual_distance(a, b)

    # -- language roles -----------------------------------------------------

    def score_attributes(self, candidate: Concept, base: Concept
                         ) -> tuple[AttributeScores, str, Category]:
        row = fixtures.SCORE_TABLE.get(candidate.label)
        if row is None:
            c, f, i, m = fixtures.DEFAULT_SCORE
            interpretation = (f"a {candidate.label} loosely associated "
                              f"with {base.label}")
            category = fixtures.DEFAULT_CATEGORY
        else:
            c, f, i, m, category, interpretation = row
        return AttributeScores(c, f, i, m), interpretation, category

    def expand_concepts(self, input_concept: Concept, known: set[str]) -> list[Concept]:
        return merge_expansions([self._kb, self._lm], input_concept, known)

    # -- restyle -------------------------------------------------------------

    def restyle(self, img: Raster, variant: StyleVariant) -> Raster:
        foreground = binarize(img).to_array()
        if variant is StyleVariant.OUTLINE:
            interior = ndimage.binary_erosion(
                foreground, structure=ndimage.generate_binary_structure(2, 1),
                border_value=0)
            boundary = foreground & ~interior
            out = np.where(boundary, 0, 255).astype(np.uint8)
            return Raster.from_array(out)
        silhouette = ndimage.binary_fill_holes(foreground)
        if variant is StyleVariant.FILLED:
            out = np.where(silhouette, 0, 255).astype(np.uint8)
            return Raster.from_array(out)
        rng_index = int.from_bytes(hashlib.sha256(img.data).digest()[:4], "big")
        color = _PALETTE[rng_index % len(_PALETTE)]
        rgba = np.full((img.height, img.width, 4), 255, dtype=np.uint8)
        rgba[silhouette, 0] = color[0]
        rgba[silhouette, 1] = color[1]
        rgba[silhouette, 2] = color[2]
        return Raster.from_array(rgba)


def _snap_to_levels(values: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Map each value to the nearest allowed level, ties to the lower level."""
    if levels.size == 1:
        return np.full_like(values, levels[0])
    midpoints = (levels[:-1] + levels[1:]) / 2.0
    idx = np.searchsorted(midpoints, values, side="left")
    return levels[idx]


def _simplify_channel(channel: np.ndarray) -> np.ndarray:
    levels = np.unique(channel)
    if levels.size > _MAX_GRAY_LEVELS:
        levels = np.round(np.linspace(0, 255, _MAX_GRAY_LEVELS))
    blurred = ndimage.gaussian_filter(channel.astype(np.float64), sigma=_SIGMA,
                                      mode="nearest")
    snapped = _snap_to_levels(blurred, levels.astype(np.float64))
    closed = ndimage.grey_closing(snapped, size=(3, 3), mode="nearest")
    return closed.astype(np.uint8)


def _simplify_once(img: Raster) -> Raster:
    arr = img.to_array()
    if img.fmt is PixelFormat.GRAY8:
        return Raster.from_array(_simplify_channel(arr))
    out = np.stack([_simplify_channel(arr[..., c]) for c in range(4)], axis=-1)
    return Raster.from_array(out)
