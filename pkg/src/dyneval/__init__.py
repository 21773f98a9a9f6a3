"""Fine-grained consistency metrics and a preference benchmark for generated videos."""

__version__ = "0.1.0"

from .types import (
    BinaryMask,
    DatasetManifest,
    ErrorMap,
    ErrorMapStack,
    FrameSequence,
    PromptEntry,
    TrackSet,
    VideoRecord,
)

__all__ = [
    "BinaryMask",
    "DatasetManifest",
    "ErrorMap",
    "ErrorMapStack",
    "FrameSequence",
    "PromptEntry",
    "TrackSet",
    "VideoRecord",
    "__version__",
]
