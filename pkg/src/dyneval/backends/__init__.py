from .base import (
    AutoMaskerBackend,
    BackendError,
    BackendPool,
    CallCounter,
    EmbedderBackend,
    GrounderBackend,
    InterpolatorBackend,
    MaskPropagatorBackend,
    PhraseExtractorBackend,
    PointTrackerBackend,
    RecordingInterpolator,
    ReplayInterpolator,
)
from .synthetic import (
    DownsampleEmbedder,
    OracleAutoMasker,
    OracleGrounder,
    OracleInterpolator,
    OracleMaskPropagator,
    OracleTracker,
    PresetEmbedder,
    ShiftBlendInterpolator,
    Sprite,
    SpriteOutOfBounds,
    SyntheticScene,
    TablePhraseExtractor,
    disc_sprite,
    inject_patch_flicker,
    oracle_interpolate,
    oracle_masks,
    oracle_tracks,
    render_synthetic_scene,
    smooth_texture,
    sprite_raster,
    square_sprite,
)

__all__ = [name for name in dir() if not name.startswith("_")]
