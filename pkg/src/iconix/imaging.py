"""Raster primitives shared by all visual stages.

Images are desk-scale byte buffers; numpy does the arithmetic. Foreground
means dark pixels throughout (icons are dark strokes on a light ground).
All operations are pure functions over immutable inputs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import DimensionMismatch

# Default binarization threshold: midpoint of the 8-bit range.
DEFAULT_THRESHOLD = 128

# Side length of the grayscale thumbnail used by the reference perceptual
# metric and the reference feature extractor.
REFERENCE_SIZE = 32

# rec-601 luma weights for RGB -> luminance.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class PixelFormat(Enum):
    GRAY8 = "gray8"
    RGBA8 = "rgba8"

    @property
    def channels(self) -> int:
        return 1 if self is PixelFormat.GRAY8 else 4

    @property
    def pil_mode(self) -> str:
        return "L" if self is PixelFormat.GRAY8 else "RGBA"


class Connectivity(Enum):
    FOUR = 4
    EIGHT = 8


def _round_half_up(values: np.ndarray) -> np.ndarray:
    # np.round / round() round half to even; the pipeline's compositing
    # contract is half-up for bit-exact cross-implementation results.
    return np.floor(values + 0.5)


@dataclass(frozen=True)
class Raster:
    """Decoded image buffer: row-major bytes, 8-bit gray or 8-bit RGBA."""

    width: int
    height: int
    fmt: PixelFormat
    data: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"raster dimensions must be >= 1, got {self.width}x{self.height}")
        expected = self.width * self.height * self.fmt.channels
        if len(self.data) != expected:
            raise ValueError(f"raster data length {len(self.data)} != expected {expected}")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Raster":
        """Build from a (h, w) gray or (h, w, 4) RGBA uint8 array."""
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.ndim == 2:
            fmt = PixelFormat.GRAY8
        elif arr.ndim == 3 and arr.shape[2] == 4:
            fmt = PixelFormat.RGBA8
        else:
            raise ValueError(f"unsupported array shape {arr.shape}")
        h, w = arr.shape[0], arr.shape[1]
        return cls(width=w, height=h, fmt=fmt, data=arr.tobytes())

    def to_array(self) -> np.ndarray:
        """(h, w) for gray, (h, w, 4) for RGBA; always a fresh uint8 array."""
        flat = np.frombuffer(self.data, dtype=np.uint8)
        if self.fmt is PixelFormat.GRAY8:
            return flat.reshape(self.height, self.width).copy()
        return flat.reshape(self.height, self.width, 4).copy()

    @property
    def size(self) -> tuple[int, int]:
        return (self.width, self.height)


def new_raster(width: int, height: int, fmt: PixelFormat = PixelFormat.GRAY8,
               fill: int | Sequence[int] = 255) -> Raster:
    channels = fmt.channels
    pixel = _normalize_fill(fill, fmt)
    arr = np.empty((height, width, channels) if channels > 1 else (height, width), dtype=np.uint8)
    arr[...] = pixel if channels > 1 else pixel[0]
    return Raster.from_array(arr)


@dataclass(frozen=True)
class BinaryMask:
    """One bit per pixel, row-major, with the set-pixel count cached."""

    width: int
    height: int
    bits: bytes
    area: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("mask dimensions must be >= 1")
        n = self.width * self.height
        if len(self.bits) != (n + 7) // 8:
            raise ValueError(f"mask bit buffer has wrong length {len(self.bits)}")
        popcount = int(np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8), count=n).sum())
        if popcount != self.area:
            raise ValueError(f"cached area {self.area} != popcount {popcount}")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BinaryMask":
        arr = np.asarray(arr, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("mask array must be 2-D")
        bits = np.packbits(arr.reshape(-1)).tobytes()
        return cls(width=arr.shape[1], height=arr.shape[0], bits=bits, area=int(arr.sum()))

    def to_array(self) -> np.ndarray:
        n = self.width * self.height
        flat = np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8), count=n)
        return flat.reshape(self.height, self.width).astype(bool)

    def first_foreground_index(self) -> int | None:
        """Row-major index of the first set pixel; None for an empty mask."""
        if self.area == 0:
            return None
        flat = self.to_array().reshape(-1)
        return int(np.argmax(flat))

    @property
    def size(self) -> tuple[int, int]:
        return (self.width, self.height)


def luminance(img: Raster) -> np.ndarray:
    """Per-pixel luminance as float64 (h, w).

    Gray8 pixels are their own luminance. Rgba8 is alpha-premultiplied
    against white, then weighted with rec-601 luma.
    """
    arr = img.to_array().astype(np.float64)
    if img.fmt is PixelFormat.GRAY8:
        return arr
    alpha = arr[..., 3:4] / 255.0
    rgb = arr[..., :3] * alpha + 255.0 * (1.0 - alpha)
    return rgb @ _LUMA_WEIGHTS


def to_grayscale(img: Raster) -> Raster:
    """Gray8 version of any raster (luminance, rounded half-up)."""
    if img.fmt is PixelFormat.GRAY8:
        return img
    gray = np.clip(_round_half_up(luminance(img)), 0, 255).astype(np.uint8)
    return Raster.from_array(gray)


def binarize(img: Raster, threshold: int = DEFAULT_THRESHOLD) -> BinaryMask:
    """Foreground mask of dark pixels: set iff luminance < threshold."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in 0..255, got {threshold}")
    return BinaryMask.from_array(luminance(img) < threshold)


_STRUCTURES = {
    Connectivity.FOUR: ndimage.generate_binary_structure(2, 1),
    Connectivity.EIGHT: np.ones((3, 3), dtype=bool),
}


def connected_components(mask: BinaryMask,
                         connectivity: Connectivity = Connectivity.EIGHT
                         ) -> tuple[int, np.ndarray]:
    """Label foreground components; background is 0.

    Returns (component count, int32 label map). Labels are assigned in
    raster-scan discovery order, so output is deterministic.
    """
    labels, count = ndimage.label(mask.to_array(), structure=_STRUCTURES[connectivity])
    return int(count), labels.astype(np.int32)


def _normalize_fill(fill: int | Sequence[int], fmt: PixelFormat) -> np.ndarray:
    if isinstance(fill, (int, np.integer)):
        values = [int(fill)] if fmt is PixelFormat.GRAY8 else [int(fill)] * 3 + [255]
    else:
        values = [int(v) for v in fill]
        if fmt is PixelFormat.RGBA8 and len(values) == 3:
            values = values + [255]
        if len(values) != fmt.channels:
            raise ValueError(f"fill {fill!r} does not match {fmt.value} channel count")
    if any(not 0 <= v <= 255 for v in values):
        raise ValueError(f"fill components must be in 0..255, got {values}")
    return np.array(values, dtype=np.float64)


def composite_layers(background: Raster,
                     layers: Iterable[tuple[BinaryMask, int | Sequence[int], float]]
                     ) -> Raster:
    """Paint translucent mask layers back-to-front over a background.

    Each layer is (mask, fill color, alpha). Source-over per channel:
    out = alpha*fill + (1-alpha)*under, rounded half-up after every layer.
    """
    out = background.to_array().astype(np.float64)
    if out.ndim == 2:
        out = out[..., np.newaxis]
    for mask, fill, alpha in layers:
        if mask.size != background.size:
            raise DimensionMismatch(
                f"layer mask {mask.size} does not match background {background.size}")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {alpha}")
        color = _normalize_fill(fill, background.fmt)
        where = mask.to_array()
        out[where] = _round_half_up(alpha * color + (1.0 - alpha) * out[where])
    result = out.astype(np.uint8)
    if background.fmt is PixelFormat.GRAY8:
        result = result[..., 0]
    return Raster.from_array(result)


def _box_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) row-stochastic overlap matrix for a 1-D box filter."""
    scale = src / dst
    weights = np.zeros((dst, src))
    for i in range(dst):
        lo = i * scale
        hi = (i + 1) * scale
        for j in range(int(np.floor(lo)), min(int(np.ceil(hi)), src)):
            weights[i, j] = min(hi, j + 1) - max(lo, j)
    return weights / scale


def downsample(img: Raster, width: int, height: int) -> Raster:
    """Box-filter resample onto a target grid (either direction), half-up rounded."""
    if width < 1 or height < 1:
        raise ValueError(f"target dimensions must be >= 1, got {width}x{height}")
    arr = img.to_array().astype(np.float64)
    rows = _box_weights(img.height, height)
    cols = _box_weights(img.width, width)
    if arr.ndim == 2:
        resampled = rows @ arr @ cols.T
    else:
        resampled = np.einsum("ij,jkc,lk->ilc", rows, arr, cols)
    out = np.clip(_round_half_up(resampled), 0, 255).astype(np.uint8)
    return Raster.from_array(out)


def reference_perceptual_distance(a: Raster, b: Raster) -> float:
    """Fallback perceptual distance in [0, 1].

    Mean squared difference of 32x32 grayscale thumbnails, normalized by
    255^2 so all-black vs all-white is exactly 1.0. Symmetric, zero on
    identical inputs, resolution-independent.
    """
    if a.size != b.size:
        raise DimensionMismatch(f"cannot compare {a.size} with {b.size}")
    ta = downsample(to_grayscale(a), REFERENCE_SIZE, REFERENCE_SIZE).to_array().astype(np.float64)
    tb = downsample(to_grayscale(b), REFERENCE_SIZE, REFERENCE_SIZE).to_array().astype(np.float64)
    return float(np.mean((ta - tb) ** 2) / 255.0 ** 2)


def crop(img: Raster, x: int, y: int, width: int, height: int) -> Raster:
    """Axis-aligned crop; the rectangle must lie inside the image."""
    if x < 0 or y < 0 or x + width > img.width or y + height > img.height:
        raise ValueError(f"crop rect {(x, y, width, height)} outside {img.size}")
    return Raster.from_array(img.to_array()[y:y + height, x:x + width])


def paste(target: np.ndarray, img: Raster, x: int, y: int) -> None:
    """Blit a raster into a uint8 canvas array in place (shared helper for sheets)."""
    arr = img.to_array()
    target[y:y + img.height, x:x + img.width] = arr


# --- PNG and run-length serialization -------------------------------------

def encode_png(img: Raster) -> bytes:
    pil = Image.frombytes(img.fmt.pil_mode, (img.width, img.height), img.data)
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes) -> Raster:
    pil = Image.open(io.BytesIO(data))
    if pil.mode == "L":
        pass
    elif pil.mode in ("1", "I;16", "I"):
        pil = pil.convert("L")
    elif pil.mode != "RGBA":
        pil = pil.convert("RGBA")
    fmt = PixelFormat.GRAY8 if pil.mode == "L" else PixelFormat.RGBA8
    return Raster(width=pil.width, height=pil.height, fmt=fmt, data=pil.tobytes())


def encode_mask_png(mask: BinaryMask) -> bytes:
    """1-bit PNG; foreground pixels are white."""
    gray = Image.fromarray(mask.to_array().astype(np.uint8) * 255, "L")
    buf = io.BytesIO()
    gray.convert("1", dither=Image.Dither.NONE).save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes) -> BinaryMask:
    pil = Image.open(io.BytesIO(data)).convert("L")
    return BinaryMask.from_array(np.asarray(pil) > 0)


def mask_to_runs(mask: BinaryMask) -> dict:
    """Run-length JSON: lengths of alternating runs, background first."""
    flat = mask.to_array().reshape(-1)
    if flat.size == 0:
        return {"width": mask.width, "height": mask.height, "runs": []}
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs = [0] + runs
    return {"width": mask.width, "height": mask.height, "runs": [int(r) for r in runs]}


def mask_from_runs(payload: dict) -> BinaryMask:
    width, height = int(payload["width"]), int(payload["height"])
    n = width * height
    flat = np.zeros(n, dtype=bool)
    pos = 0
    value = False
    for run in payload["runs"]:
        flat[pos:pos + run] = value
        pos += run
        value = not value
    if pos != n:
        raise ValueError(f"runs cover {pos} pixels, expected {n}")
    return BinaryMask.from_array(flat.reshape(height, width))
