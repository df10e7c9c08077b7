"""JSON-over-HTTP clients for remote model servers.

The wire contract is this project's own minimal schema (versioned with
"v": 1); adapters for concrete model servers live behind it. Every call
surfaces exactly one of BackendUnavailable / BackendTimeout /
MalformedResponse.
"""

from __future__ import annotations

import base64
import logging

import requests

from ..errors import BackendTimeout, BackendUnavailable, MalformedResponse
from ..ideation import AttributeScores, Category, Concept, ConceptSource, SCALE_BOUNDS
from ..imaging import BinaryMask, Raster, decode_mask_png, decode_png, encode_png
from .base import BackendEndpoint, BackendKind, FeatureVector, StyleVariant

logger = logging.getLogger(__name__)

WIRE_VERSION = 1


def _image_field(img: Raster | None) -> str | None:
    return base64.b64encode(encode_png(img)).decode("ascii") if img is not None else None


def _decode_image(field: str) -> Raster:
    try:
        return decode_png(base64.b64decode(field))
    except Exception as exc:
        raise MalformedResponse(f"undecodable image payload: {exc}") from exc


def _decode_mask(field: str) -> BinaryMask:
    try:
        return decode_mask_png(base64.b64decode(field))
    except Exception as exc:
        raise MalformedResponse(f"undecodable mask payload: {exc}") from exc


def post_backend(endpoint: BackendEndpoint, body: dict) -> dict:
    """POST {url}/v1/{kind}; returns the payload of an {ok: true} envelope."""
    url = f"{endpoint.url.rstrip('/')}/v1/{endpoint.kind.value}"
    body = {"v": WIRE_VERSION, **body}
    try:
        response = requests.post(url, json=body, timeout=endpoint.timeout)
    except requests.Timeout as exc:
        raise BackendTimeout(f"{endpoint.kind.value} timed out after "
                             f"{endpoint.timeout}s") from exc
    except requests.RequestException as exc:
        raise BackendUnavailable(f"{endpoint.kind.value} unreachable: {exc}") from exc
    if response.status_code >= 500:
        raise BackendUnavailable(
            f"{endpoint.kind.value} server error {response.status_code}")
    try:
        envelope = response.json()
    except ValueError as exc:
        raise MalformedResponse(f"{endpoint.kind.value} returned non-JSON") from exc
    if not isinstance(envelope, dict) or "ok" not in envelope:
        raise MalformedResponse(f"{endpoint.kind.value} envelope missing 'ok'")
    if not envelope["ok"]:
        raise BackendUnavailable(
            f"{endpoint.kind.value} refused: {envelope.get('error', 'unknown')}")
    payload = envelope.get("payload")
    if not isinstance(payload, dict):
        raise MalformedResponse(f"{endpoint.kind.value} envelope missing payload")
    return payload


def _require(payload: dict, key: str):
    if key not in payload:
        raise MalformedResponse(f"payload missing {key!r}")
    return payload[key]


class RemoteBackend:
    """Remote counterpart of MockBackend; one endpoint per role."""

    def __init__(self, endpoints: dict[BackendKind, BackendEndpoint]):
        self.endpoints = endpoints

    def _endpoint(self, kind: BackendKind) -> BackendEndpoint:
        endpoint = self.endpoints.get(kind)
        if endpoint is None:
            raise BackendUnavailable(f"no endpoint configured for {kind.value}")
        return endpoint

    def generate(self, prompt: str, condition: Raster | None = None) -> Raster:
        payload = post_backend(self._endpoint(BackendKind.GENERATE), {
            "prompt": prompt,
            "condition_png_b64": _image_field(condition),
        })
        return _decode_image(_require(payload, "image_png_b64"))

    def simplify_step(self, img: Raster, step_count: int = 1) -> list[Raster]:
        payload = post_backend(self._endpoint(BackendKind.SIMPLIFY), {
            "image_png_b64": _image_field(img),
            "steps": step_count,
        })
        frames = _require(payload, "frames_png_b64")
        if len(frames) != step_count:
            raise MalformedResponse(
                f"asked for {step_count} frames, got {len(frames)}")
        return [_decode_image(f) for f in frames]

    def segment(self, img: Raster) -> list[BinaryMask]:
        payload = post_backend(self._endpoint(BackendKind.SEGMENT), {
            "image_png_b64": _image_field(img),
        })
        return [_decode_mask(m) for m in _require(payload, "masks_png_b64")]

    def extract_features(self, img: Raster) -> FeatureVector:
        payload = post_backend(self._endpoint(BackendKind.FEATURES), {
            "image_png_b64": _image_field(img),
        })
        values = _require(payload, "values")
        try:
            return FeatureVector(values=tuple(float(v) for v in values))
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad feature payload: {exc}") from exc

    def perceptual_distance(self, a: Raster, b: Raster) -> float:
        payload = post_backend(self._endpoint(BackendKind.PERCEPTUAL), {
            "a_png_b64": _image_field(a),
            "b_png_b64": _image_field(b),
        })
        try:
            return float(_require(payload, "distance"))
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad distance payload: {exc}") from exc

    def score_attributes(self, candidate: Concept, base: Concept
                         ) -> tuple[AttributeScores, str, Category]:
        payload = post_backend(self._endpoint(BackendKind.SCORE), {
            "candidate": candidate.label,
            "gloss": candidate.gloss,
            "base": base.label,
        })
        raw = _require(payload, "scores")
        try:
            values = {
                "concreteness": int(raw["c"]),
                "familiarity": int(raw["f"]),
                "imageability": int(raw["i"]),
                "meaningfulness": int(raw["m"]),
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad score payload: {exc}") from exc
        clamped = {}
        for name, value in values.items():
            lo, hi = SCALE_BOUNDS[name]
            bounded = min(max(value, lo), hi)
            if bounded != value:
                logger.info("clamped %s for %r: %d -> %d",
                            name, candidate.label, value, bounded)
            clamped[name] = bounded
        try:
            category = Category(str(payload.get("category", "concrete_object")))
        except ValueError as exc:
            raise MalformedResponse(f"unknown category: {exc}") from exc
        interpretation = str(payload.get("interpretation", ""))
        return AttributeScores(**clamped), interpretation, category

    def expand_concepts(self, input_concept: Concept, known: set[str]) -> list[Concept]:
        payload = post_backend(self._endpoint(BackendKind.EXPAND), {
            "concept": input_concept.label,
            "known": sorted(known),
        })
        out: list[Concept] = []
        seen = set(known)
        for row in _require(payload, "concepts"):
            try:
                label = str(row["label"]).strip().lower()
                source = ConceptSource(row.get("source", "language_model"))
                gloss = str(row.get("gloss", ""))
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponse(f"bad concept row: {exc}") from exc
            if not label or label in seen:
                continue
            seen.add(label)
            out.append(Concept(label=label, gloss=gloss, source=source))
        return out

    def restyle(self, img: Raster, variant: StyleVariant) -> Raster:
        payload = post_backend(self._endpoint(BackendKind.RESTYLE), {
            "image_png_b64": _image_field(img),
            "variant": variant.value,
        })
        return _decode_image(_require(payload, "image_png_b64"))
