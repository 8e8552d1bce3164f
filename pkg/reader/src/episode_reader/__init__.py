"""Standalone loader and validator for isoteleop episode directories."""

from .reader import (
    FrameStream,
    LoadedEpisode,
    ReaderError,
    crc32c,
    iterate_observations,
    load,
    validate,
)

__version__ = "0.1.0"
