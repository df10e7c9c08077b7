"""Exception taxonomy for the pipeline.

Names mirror the error contracts of the public operations; HTTP and CLI
layers map them onto status codes / exit codes.
"""


class IconixError(Exception):
    """Base class for all pipeline errors."""


class DimensionMismatch(IconixError):
    """Rasters or masks that must share dimensions do not."""


class InvalidConfig(IconixError):
    """A config override fails schema validation."""


class EmptyPool(IconixError):
    """No candidate survived filtering after the final ideation round."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class SubjectMismatch(IconixError):
    """A relation's subject differs from the scaffold center."""


class SelectionOutOfBucket(IconixError):
    """A selected relation is not in the bucket its view draws from."""


class BackendError(IconixError):
    """Base class for model-backend failures."""


class BackendUnavailable(BackendError):
    """The backend cannot be reached (or a mock scripted a failure)."""


class BackendTimeout(BackendError):
    """The backend did not answer within the configured timeout."""


class MalformedResponse(BackendError):
    """The backend answered with bytes we cannot interpret."""


class InvalidK(IconixError):
    """Cluster count outside 1..n_points."""


class AlignmentMismatch(IconixError):
    """Per-frame features do not line up one-to-one with frames."""


class InsufficientFrames(IconixError):
    """A grid row has fewer candidate frames than requested columns."""


class NonMonotonicPicks(IconixError):
    """Explicit grid picks are not strictly increasing in step index."""


class VariantOrderViolation(IconixError):
    """Filled/Color requested before Outline cells exist."""


class IncompleteVariant(IconixError):
    """Export requested for a variant whose cells are not all present."""


class StageOrderViolation(IconixError):
    """A session request targets a stage it may not move to."""


class NotFound(IconixError):
    """Unknown session id or artifact hash."""


class CorruptStore(IconixError):
    """Stored artifact bytes fail their checksum."""
