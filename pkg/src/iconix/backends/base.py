"""Backend roles, endpoint configuration and shared client types.

Every ML-heavy step reaches its model only through this layer, so the
whole pipeline runs offline against the deterministic mocks.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from ..errors import BackendUnavailable
from ..ideation import Concept

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_SECS = 30.0

ENV_URL = "ICONIX_{kind}_URL"
ENV_MODE = "ICONIX_{kind}_MODE"
ENV_TIMEOUT = "ICONIX_TIMEOUT_SECS"


class BackendKind(Enum):
    GENERATE = "generate"
    SIMPLIFY = "simplify"
    SEGMENT = "segment"
    SCORE = "score"
    EXPAND = "expand"
    FEATURES = "features"
    PERCEPTUAL = "perceptual"
    RESTYLE = "restyle"


class BackendMode(Enum):
    REMOTE = "remote"
    MOCK = "mock"


class StyleVariant(Enum):
    OUTLINE = "outline"
    FILLED = "filled"
    COLOR = "color"


@dataclass(frozen=True)
class BackendEndpoint:
    kind: BackendKind
    url: str = ""
    timeout: float = DEFAULT_TIMEOUT_SECS
    mode: BackendMode = BackendMode.MOCK

    def __post_init__(self):
        if self.mode is BackendMode.REMOTE and not self.url:
            raise ValueError(f"remote endpoint for {self.kind.value} needs a url")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


def endpoint_from_env(kind: BackendKind,
                      env: Mapping[str, str] | None = None) -> BackendEndpoint:
    """ICONIX_<KIND>_URL / ICONIX_<KIND>_MODE / ICONIX_TIMEOUT_SECS."""
    env = os.environ if env is None else env
    key = kind.value.upper()
    url = env.get(ENV_URL.format(kind=key), "")
    mode_name = env.get(ENV_MODE.format(kind=key), "").strip().lower()
    if mode_name:
        mode = BackendMode(mode_name)
    else:
        mode = BackendMode.REMOTE if url else BackendMode.MOCK
    timeout = float(env.get(ENV_TIMEOUT, DEFAULT_TIMEOUT_SECS))
    return BackendEndpoint(kind=kind, url=url, timeout=timeout, mode=mode)


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("feature vector must be non-empty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("feature vector contains non-finite values")

    @property
    def length(self) -> int:
        return len(self.values)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "FeatureVector":
        return cls(values=tuple(float(v) for v in np.asarray(arr, dtype=np.float64).reshape(-1)))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


def merge_expansions(sources: Sequence, input_concept: Concept,
                     known: set[str]) -> list[Concept]:
    """Merge multiple expansion sources, tolerating partial outages.

    One source failing degrades (warning recorded); all sources failing
    raises BackendUnavailable. Results are deduped client-side against
    `known` and each other, in source order.
    """
    merged: list[Concept] = []
    seen = set(known)
    failures: list[str] = []
    for source in sources:
        try:
            found = source.expand_concepts(input_concept, known)
        except BackendUnavailable as exc:
            failures.append(str(exc) or source.__class__.__name__)
            logger.warning("expansion source failed, degrading: %s", exc)
            continue
        for concept in found:
            if concept.label in seen:
                continue
            seen.add(concept.label)
            merged.append(concept)
    if failures and len(failures) == len(sources):
        raise BackendUnavailable(
            "all expansion sources failed: " + "; ".join(failures))
    return merged
