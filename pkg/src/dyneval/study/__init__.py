from .server import create_app
from .store import (
    DIMENSION_QUESTIONS,
    IncompleteResponse,
    NotQualified,
    PoolExhausted,
    StudyError,
    StudyStore,
    UnknownWorker,
)

__all__ = [
    "DIMENSION_QUESTIONS",
    "IncompleteResponse",
    "NotQualified",
    "PoolExhausted",
    "StudyError",
    "StudyStore",
    "UnknownWorker",
    "create_app",
]
