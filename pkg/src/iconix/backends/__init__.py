"""Uniform client layer for external model services plus deterministic mocks."""

from __future__ import annotations

from typing import Mapping

from .base import (
    BackendEndpoint,
    BackendKind,
    BackendMode,
    FeatureVector,
    StyleVariant,
    endpoint_from_env,
    merge_expansions,
)
from .mock import MockBackend
from .remote import RemoteBackend


class Backends:
    """Facade resolving each backend role to its mock or remote client."""

    def __init__(self, endpoints: Mapping[BackendKind, BackendEndpoint] | None = None):
        self.endpoints = {kind: BackendEndpoint(kind=kind) for kind in BackendKind}
        if endpoints:
            self.endpoints.update(endpoints)
        self._mock = MockBackend()
        self._remote = RemoteBackend(self.endpoints)

    @classmethod
    def all_mock(cls) -> "Backends":
        return cls()

    @classmethod
    def from_env(cls, env=None) -> "Backends":
        return cls({kind: endpoint_from_env(kind, env) for kind in BackendKind})

    def _resolve(self, kind: BackendKind):
        if self.endpoints[kind].mode is BackendMode.MOCK:
            return self._mock
        return self._remote

    def generate(self, prompt, condition=None):
        return self._resolve(BackendKind.GENERATE).generate(prompt, condition)

    def simplify_step(self, img, step_count=1):
        return self._resolve(BackendKind.SIMPLIFY).simplify_step(img, step_count)

    def segment(self, img):
        return self._resolve(BackendKind.SEGMENT).segment(img)

    def extract_features(self, img):
        return self._resolve(BackendKind.FEATURES).extract_features(img)

    def perceptual_distance(self, a, b):
        return self._resolve(BackendKind.PERCEPTUAL).perceptual_distance(a, b)

    def score_attributes(self, candidate, base):
        return self._resolve(BackendKind.SCORE).score_attributes(candidate, base)

    def expand_concepts(self, input_concept, known):
        return self._resolve(BackendKind.EXPAND).expand_concepts(input_concept, known)

    def restyle(self, img, variant):
        return self._resolve(BackendKind.RESTYLE).restyle(img, variant)


__all__ = [
    "BackendEndpoint",
    "BackendKind",
    "BackendMode",
    "Backends",
    "FeatureVector",
    "MockBackend",
    "RemoteBackend",
    "StyleVariant",
    "endpoint_from_env",
    "merge_expansions",
]
