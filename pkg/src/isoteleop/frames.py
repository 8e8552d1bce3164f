"""Synthetic PNG frames for recorded episodes.

Frames are opaque payloads to the rest of the pipeline; these generators
stamp the master-clock tick index into the first pixels so cross-stream
alignment can be decoded back out of any stored frame.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
FRAME_SIZE = 64


def _stamp(pixels: np.ndarray, index: int):
    # tick index as u32 little-endian in the first four pixels (channel 0)
    for i, byte in enumerate(int(index).to_bytes(4, "little")):
        pixels[0, i, 0] = byte


def make_rgbd_frame(index: int, size: int = FRAME_SIZE) -> bytes:
    """Deterministic RGB gradient frame stamped with the tick index."""
    grid = np.arange(size, dtype=np.uint8)
    pixels = np.zeros((size, size, 3), dtype=np.uint8)
    pixels[:, :, 0] = grid[None, :]
    pixels[:, :, 1] = grid[:, None]
    pixels[:, :, 2] = (index * 7) % 256
    _stamp(pixels, index)
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def make_tactile_frame(finger: int, index: int, size: int = FRAME_SIZE) -> bytes:
    """Deterministic grayscale gel-image stand-in stamped with the tick index."""
    grid = np.arange(size, dtype=np.int32)
    pixels = np.zeros((size, size, 1), dtype=np.uint8)
    pixels[:, :, 0] = (((grid[:, None] + grid[None, :]) // 2 + 31 * finger + index) % 256).astype(np.uint8)
    _stamp(pixels, index)
    buf = io.BytesIO()
    Image.fromarray(pixels[:, :, 0], mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_frame_stamp(data: bytes) -> int:
    """Recover the tick index stamped into a frame by the generators above."""
    img = Image.open(io.BytesIO(data))
    arr = np.asarray(img)
    if arr.ndim == 2:
        row = arr[0, :4]
    else:
        row = arr[0, :4, 0]
    return int.from_bytes(bytes(int(b) for b in row), "little")


def is_png(data: bytes) -> bool:
    return data[: len(PNG_SIGNATURE)] == PNG_SIGNATURE


def decodable(data: bytes) -> bool:
    """True when the payload parses as a complete PNG image."""
    if not is_png(data):
        return False
    try:
        img = Image.open(io.BytesIO(data))
        img.verify()
        return True
    except Exception:
        return False
