"""Mask ordering and layered compositing of simplified frames.

Bigger masks go to the back; each layer is painted translucently over the
frame itself so the underlying detail stays visible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import BinaryMask, PixelFormat, Raster, composite_layers

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True)
class Layer:
    mask: BinaryMask
    alpha: float
    fill: tuple[int, ...]
    area: int
    order_index: int


@dataclass
class LayeredIcon:
    base: Raster
    layers: list[Layer]
    composite: Raster

    @property
    def empty(self) -> bool:
        return not self.layers


def order_masks(masks: list[BinaryMask]) -> list[BinaryMask]:
    """Descending by area; ties broken by first foreground pixel in
    row-major scan order."""
    def key(mask: BinaryMask) -> tuple[int, int]:
        first = mask.first_foreground_index()
        return (-mask.area, first if first is not None else mask.width * mask.height)

    return sorted(masks, key=key)


def mean_fill(frame: Raster, mask: BinaryMask) -> tuple[int, ...]:
    """Mean frame color under the mask, rounded half-up, per channel."""
    if mask.size != frame.size:
        raise ValueError(f"mask {mask.size} does not match frame {frame.size}")
    if mask.area == 0:
        raise ValueError("cannot sample a fill color from an empty mask")
    arr = frame.to_array().astype(np.float64)
    where = mask.to_array()
    if frame.fmt is PixelFormat.GRAY8:
        return (int(np.floor(arr[where].mean() + 0.5)),)
    means = arr[where].mean(axis=0)
    return tuple(int(v) for v in np.floor(means + 0.5))


def build_layered_icon(frame: Raster, segmenter,
                       alpha: float = DEFAULT_ALPHA,
                       fill: tuple[int, ...] | None = None) -> LayeredIcon:
    """Segment a frame and composite its masks back over it, area-ordered.

    Layer fills default to the mean frame color under each mask so detail
    from the frame stays visible; pass `fill` to force one color. A frame
    that segments to zero masks passes through unchanged (valid:
    late-sequence frames may be featureless); `LayeredIcon.empty` flags it.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    masks = segmenter.segment(frame)
    ordered = order_masks(list(masks))
    layers = [
        Layer(mask=mask, alpha=alpha,
              fill=fill if fill is not None else mean_fill(frame, mask),
              area=mask.area, order_index=index)
        for index, mask in enumerate(ordered)
    ]
    if not layers:
        return LayeredIcon(base=frame, layers=[], composite=frame)
    composite = composite_layers(frame, [(l.mask, l.fill, l.alpha) for l in layers])
    return LayeredIcon(base=frame, layers=layers, composite=composite)


def recomposite(icon: LayeredIcon) -> Raster:
    """Rebuild the composite from base + layers (must match byte-exactly)."""
    if not icon.layers:
        return icon.base
    return composite_layers(icon.base,
                            [(l.mask, l.fill, l.alpha) for l in icon.layers])


def layer_manifest(icon: LayeredIcon, frame_ref: str,
                   mask_refs: list[str]) -> dict:
    if len(mask_refs) != len(icon.layers):
        raise ValueError("one ref per layer required")
    alpha = icon.layers[0].alpha if icon.layers else DEFAULT_ALPHA
    return {
        "frame_ref": frame_ref,
        "alpha": alpha,
        "layers": [
            {"mask_ref": ref, "area": layer.area,
             "order_index": layer.order_index, "fill": list(layer.fill)}
            for layer, ref in zip(icon.layers, mask_refs)
        ],
    }
