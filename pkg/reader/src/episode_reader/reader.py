"""Standalone reader for isoteleop episode directories.

Implements the published on-disk layout directly from its byte-level
description, deliberately sharing no code with the writer: a directory holds
``manifest.json`` plus one file per joint stream (``<name>.jstream``) and an
index/blob pair per frame stream (``<name>.fidx`` / ``<name>.fblob``). Every
stream file is little-endian: magic ``MILE``, version u32 (=1), record count
u64, then records of [timestamp f64][17 x f32] for joint streams or
[timestamp f64][offset u64][length u64] for frame indexes. The manifest
carries CRC-32C checksums for every file.

Frames decode lazily; checksums are verified eagerly at load.
"""

from __future__ import annotations

import io
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

MAGIC = b"MILE"
VERSION = 1
HEADER_SIZE = 16
JOINT_COUNT = 17
JOINT_DTYPE = np.dtype([("t", "<f8"), ("q", "<f4", (JOINT_COUNT,))])
INDEX_DTYPE = np.dtype([("t", "<f8"), ("offset", "<u8"), ("length", "<u8")])
PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

JOINT_STREAMS = ("proprio_qr", "action_qh")
FRAME_STREAMS = ("rgbd", "tactile_0", "tactile_1", "tactile_2", "tactile_3")
STRATEGY_LABELS = ("thumb_only", "index_only", "middle_only", "thumb_index_coop", "other")

FIXTURES_ENV = "ISOTELEOP_FIXTURES"


class ReaderError(Exception):
    """Episode directory violates the published layout."""

    def __init__(self, message: str, path=None, offset: int | None = None):
        super().__init__(message)
        self.path = path
        self.offset = offset


def _crc32c_table():
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ 0x82F63B78 if crc & 1 else crc >> 1
        table.append(crc)
    return table


_TABLE = _crc32c_table()


def crc32c(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for byte in data:
        crc = _TABLE[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


@dataclass
class FrameStream:
    """Lazily decoded frame payloads for one stream."""

    name: str
    timestamps: np.ndarray
    payloads: list[bytes]

    def __len__(self) -> int:
        return len(self.payloads)

    def raw(self, index: int) -> bytes:
        return self.payloads[index]

    def image(self, index: int) -> np.ndarray:
        return np.asarray(Image.open(io.BytesIO(self.payloads[index])))

    def stamp(self, index: int) -> int:
        """Tick index stamped into the first four pixels by the recorder."""
        arr = self.image(index)
        row = arr[0, :4] if arr.ndim == 2 else arr[0, :4, 0]
        return int.from_bytes(bytes(int(v) for v in row), "little")


@dataclass
class LoadedEpisode:
    timestamps: np.ndarray  # (T,) f64 seconds, master clock
    proprio: np.ndarray  # (T, 17) f32, robot joint order
    action: np.ndarray  # (T, 17) f32, exoskeleton joint order
    frames: dict[str, FrameStream]
    metadata: dict
    stream_timestamps: dict[str, np.ndarray]  # per-stream copies, for validation

    @property
    def tick_count(self) -> int:
        return int(self.timestamps.shape[0])


def _parse_stream_file(path: Path, dtype: np.dtype, expected_count: int) -> np.ndarray:
    data = path.read_bytes()
    if len(data) < HEADER_SIZE:
        raise ReaderError(f"{path}: header truncated at offset {len(data)}", path, len(data))
    if data[:4] != MAGIC:
        raise ReaderError(f"{path}: bad magic {data[:4]!r}", path, 0)
    version = int.from_bytes(data[4:8], "little")
    if version != VERSION:
        raise ReaderError(f"{path}: unsupported version {version}", path, 4)
    count = int.from_bytes(data[8:16], "little")
    if count != expected_count:
        raise ReaderError(f"{path}: header count {count} != manifest {expected_count}", path, 8)
    expected_size = HEADER_SIZE + count * dtype.itemsize
    if len(data) < expected_size:
        raise ReaderError(
            f"{path}: file ends at offset {len(data)}, expected {expected_size} bytes",
            path,
            len(data),
        )
    if len(data) > expected_size:
        raise ReaderError(f"{path}: trailing bytes after offset {expected_size}", path, expected_size)
    return np.frombuffer(data[HEADER_SIZE:], dtype=dtype)


def _verify_crc(path: Path, expected: int):
    actual = crc32c(path.read_bytes())
    if actual != expected:
        raise ReaderError(
            f"{path}: crc32c {actual:#010x} != manifest {expected:#010x}", path
        )


def load(directory: str | Path) -> LoadedEpisode:
    """Load an episode directory, verifying magic, version, counts, and
    checksums; raises ReaderError naming the file and offset otherwise."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise ReaderError(f"{directory}: manifest.json not found", manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ReaderError(f"{manifest_path}: invalid JSON ({exc})", manifest_path) from None
    if manifest.get("format") != "isoteleop-episode" or manifest.get("version") != VERSION:
        raise ReaderError(f"{manifest_path}: unrecognized format/version", manifest_path)

    entries = {entry["name"]: entry for entry in manifest.get("streams", [])}
    joints: dict[str, np.ndarray] = {}
    stamps: dict[str, np.ndarray] = {}
    frames: dict[str, FrameStream] = {}

    for name in JOINT_STREAMS:
        if name not in entries:
            raise ReaderError(f"{directory}: stream {name!r} missing from manifest", manifest_path)
        entry = entries[name]
        path = directory / entry["file"]
        records = _parse_stream_file(path, JOINT_DTYPE, int(entry["count"]))
        _verify_crc(path, int(entry["crc32c"]))
        stamps[name] = records["t"].copy()
        joints[name] = records["q"].copy()

    for name in FRAME_STREAMS:
        if name not in entries:
            raise ReaderError(f"{directory}: stream {name!r} missing from manifest", manifest_path)
        entry = entries[name]
        path = directory / entry["file"]
        records = _parse_stream_file(path, INDEX_DTYPE, int(entry["count"]))
        _verify_crc(path, int(entry["crc32c"]))
        blob_path = directory / entry["blob_file"]
        blob = blob_path.read_bytes()
        _verify_crc(blob_path, int(entry["blob_crc32c"]))
        payloads = []
        for i in range(records.shape[0]):
            off, length = int(records["offset"][i]), int(records["length"][i])
            if off + length > len(blob):
                raise ReaderError(
                    f"{blob_path}: frame {i} spans past end of blob at offset {len(blob)}",
                    blob_path,
                    len(blob),
                )
            payloads.append(blob[off : off + length])
        stamps[name] = records["t"].copy()
        frames[name] = FrameStream(name=name, timestamps=records["t"].copy(), payloads=payloads)

    counts = {name: arr.shape[0] for name, arr in stamps.items()}
    if len(set(counts.values())) != 1:
        raise ReaderError(f"{directory}: stream counts differ: {counts}", manifest_path)

    return LoadedEpisode(
        timestamps=stamps[JOINT_STREAMS[0]],
        proprio=joints["proprio_qr"],
        action=joints["action_qh"],
        frames=frames,
        metadata=dict(manifest.get("metadata", {})),
        stream_timestamps=stamps,
    )


def iterate_observations(episode: LoadedEpisode):
    """Yield one (q_r, rgbd, (tactile x 4), q_h) tuple per master tick."""
    tactile = [episode.frames[f"tactile_{i}"] for i in range(4)]
    rgbd = episode.frames["rgbd"]
    for t in range(episode.tick_count):
        yield (
            episode.proprio[t],
            rgbd.raw(t),
            tuple(tac.raw(t) for tac in tactile),
            episode.action[t],
        )


# ---------------------------------------------------------------------------
# Validation mirroring the writer-side validator's verdicts.

_JOINT_LINE = re.compile(r"^joint\s+\S+.*?\bmin=(\S+)\s+max=(\S+)")


def _limits_from_hand_file(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Joint limits in declaration order from a `.hand` fixture file."""
    lows, highs = [], []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        match = _JOINT_LINE.match(line)
        if match:
            lows.append(float(match.group(1)))
            highs.append(float(match.group(2)))
    if not lows:
        raise ReaderError(f"{path}: no joints found", path)
    return np.array(lows), np.array(highs)


def _writer_fixture_dir() -> Path | None:
    """Locate the writer package's bundled fixture data, without importing it."""
    import importlib.util

    spec = importlib.util.find_spec("isoteleop")
    if spec and spec.origin:
        candidate = Path(spec.origin).parent / "fixtures"
        if candidate.is_dir():
            return candidate
    return None


def _find_fixture(name: str, fixture_dirs=None) -> Path:
    candidates = [Path(d) for d in (fixture_dirs or [])]
    env = os.environ.get(FIXTURES_ENV)
    if env:
        candidates.extend(Path(p) for p in env.split(os.pathsep) if p)
    bundled = _writer_fixture_dir()
    if bundled is not None:
        candidates.append(bundled)
    for directory in candidates:
        path = directory / name
        if path.is_file():
            return path
    raise ReaderError(f"fixture {name!r} not found in {candidates}")


def _png_decodable(data: bytes) -> bool:
    if data[: len(PNG_SIGNATURE)] != PNG_SIGNATURE:
        return False
    try:
        Image.open(io.BytesIO(data)).verify()
        return True
    except Exception:
        return False


def validate(directory: str | Path, fixture_dirs=None) -> tuple[bool, list[str]]:
    """Validity verdict plus failed-check names, matching the writer-side
    validator: integrity, structure, monotonicity, rate_deviation,
    gap_census, shape_consistency, limit_violations, blob_integrity."""
    failed: list[str] = []
    try:
        episode = load(directory)
    except ReaderError as exc:
        if "crc32c" in str(exc):
            failed.append("integrity")
        else:
            failed.append("structure")
        return False, failed

    if episode.metadata.get("strategy") not in STRATEGY_LABELS:
        failed.append("structure")

    streams = dict(episode.stream_timestamps)
    rate = float(episode.metadata.get("rate_hz", 30.0))
    period = 1.0 / rate

    for name, ts in streams.items():
        if np.any(np.diff(ts) <= 0):
            failed.append("monotonicity")
            break

    for name, ts in streams.items():
        dt = np.diff(ts)
        if dt.size == 0:
            continue
        multiples = np.round(dt / period)
        if np.any(multiples < 1) or np.any(np.abs(dt - multiples * period) > 1e-9):
            failed.append("rate_deviation")
            break

    max_gap = 0.0
    for ts in streams.values():
        dt = np.diff(ts)
        if dt.size:
            max_gap = max(max_gap, float(np.max(dt)))
    if max_gap > period + 1e-9:
        failed.append("gap_census")

    master = episode.timestamps
    if any(not np.array_equal(ts, master) for ts in streams.values()):
        failed.append("shape_consistency")

    try:
        lo_r, hi_r = _limits_from_hand_file(
            _find_fixture(episode.metadata.get("robot_fixture", ""), fixture_dirs)
        )
        lo_h, hi_h = _limits_from_hand_file(
            _find_fixture(episode.metadata.get("human_fixture", ""), fixture_dirs)
        )
        for values, (lo, hi) in ((episode.proprio, (lo_r, hi_r)), (episode.action, (lo_h, hi_h))):
            v = values.astype(np.float64)
            if not np.all((v >= lo - 1e-6) & (v <= hi + 1e-6)):
                failed.append("limit_violations")
                break
    except ReaderError:
        failed.append("limit_violations")

    for name in FRAME_STREAMS:
        stream = episode.frames[name]
        if any(not _png_decodable(stream.raw(i)) for i in range(len(stream))):
            failed.append("blob_integrity")
            break

    return not failed, failed
