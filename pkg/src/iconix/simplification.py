"""Progressive simplification loop with the two-part stop criterion:
checkpoint distances plateau, then the frame must be a single connected
foreground component."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .errors import BackendUnavailable
from .imaging import Connectivity, Raster, binarize, connected_components

CHECKPOINT_INTERVAL = 5
PLATEAU_EPSILON = 0.02
STABLE_REQUIRED = 2
MAX_STEPS = 200


class Termination(Enum):
    PLATEAU_AND_SINGLE_COMPONENT = "plateau_and_single_component"
    MAX_STEPS = "max_steps"


@dataclass
class SimplificationSequence:
    source: Raster
    frames: list[tuple[int, Raster]] = field(default_factory=list)
    checkpoints: list[tuple[int, float]] = field(default_factory=list)
    terminated_by: Termination | None = None
    error: str | None = None

    def __post_init__(self):
        if not self.frames or self.frames[0][0] != 0 or self.frames[0][1] is not self.source:
            raise ValueError("frames must start with (0, source)")
        steps = [step for step, _ in self.frames]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("frame step indices must be strictly increasing")
        if self.terminated_by is None and self.error is None:
            raise ValueError("a finished sequence needs a termination reason")

    @property
    def complete(self) -> bool:
        return self.error is None

    @property
    def last_step(self) -> int:
        return self.frames[-1][0]

    def frame_at(self, step: int) -> Raster:
        for frame_step, image in self.frames:
            if frame_step == step:
                return image
        raise KeyError(f"no frame at step {step}")


def check_termination(checkpoints: Sequence[tuple[int, float]],
                      latest_frame: Raster,
                      epsilon: float = PLATEAU_EPSILON,
                      stable_required: int = STABLE_REQUIRED) -> bool:
    """True iff the last `stable_required` checkpoint distances are all
    below epsilon and the frame is one 8-connected dark component.

    The component check runs only once the plateau holds (cheap first).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if stable_required < 1:
        raise ValueError("stable_required must be >= 1")
    if len(checkpoints) < stable_required:
        return False
    recent = checkpoints[-stable_required:]
    if any(distance >= epsilon for _, distance in recent):
        return False
    count, _ = connected_components(binarize(latest_frame), Connectivity.EIGHT)
    return count == 1


def run_simplification(source: Raster,
                       simplifier,
                       metric: Callable[[Raster, Raster], float],
                       checkpoint_interval: int = CHECKPOINT_INTERVAL,
                       epsilon: float = PLATEAU_EPSILON,
                       stable_required: int = STABLE_REQUIRED,
                       max_steps: int = MAX_STEPS) -> SimplificationSequence:
    """Advance the simplifier `checkpoint_interval` steps at a time.

    A checkpoint records metric(frame_t, frame_{t-interval}) at every
    interval multiple; the loop stops at the first satisfied termination
    check, else at max_steps. Every generated frame is kept. On backend
    failure the partial sequence is returned with `error` set.
    """
    if checkpoint_interval < 1:
        raise ValueError("checkpoint_interval must be >= 1")
    if max_steps < checkpoint_interval:
        raise ValueError("max_steps must be >= checkpoint_interval")
    frames: list[tuple[int, Raster]] = [(0, source)]
    checkpoints: list[tuple[int, float]] = []
    step = 0
    previous_checkpoint_frame = source
    # Full strides only, so every recorded step is a checkpoint multiple.
    while step + checkpoint_interval <= max_steps:
        try:
            new_frames = simplifier.simplify_step(frames[-1][1], checkpoint_interval)
        except BackendUnavailable as exc:
            return SimplificationSequence(
                source=source, frames=frames, checkpoints=checkpoints,
                error=str(exc) or "backend unavailable")
        for offset, image in enumerate(new_frames, start=1):
            frames.append((step + offset, image))
        step += checkpoint_interval
        latest = frames[-1][1]
        checkpoints.append((step, metric(latest, previous_checkpoint_frame)))
        previous_checkpoint_frame = latest
        if check_termination(checkpoints, latest, epsilon, stable_required):
            return SimplificationSequence(
                source=source, frames=frames, checkpoints=checkpoints,
                terminated_by=Termination.PLATEAU_AND_SINGLE_COMPONENT)
    return SimplificationSequence(
        source=source, frames=frames, checkpoints=checkpoints,
        terminated_by=Termination.MAX_STEPS)


def sequence_manifest(seq: SimplificationSequence,
                      source_ref: str,
                      frame_refs: Sequence[str]) -> dict:
    """Manifest JSON; `frame_refs` line up with seq.frames."""
    if len(frame_refs) != len(seq.frames):
        raise ValueError("one ref per frame required")
    return {
        "source_ref": source_ref,
        "frames": [
            {"step": step, "artifact_ref": ref}
            for (step, _), ref in zip(seq.frames, frame_refs)
        ],
        "checkpoints": [
            {"step": step, "distance": distance}
            for step, distance in seq.checkpoints
        ],
        "terminated_by": seq.terminated_by.value if seq.terminated_by else None,
        "complete": seq.complete,
    }
