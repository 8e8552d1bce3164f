"""Multimodal episode store: synchronization, on-disk format, validation.

An episode is a directory:

    manifest.json            metadata + per-stream entries with CRC-32C sums
    <name>.jstream           joint-vector stream (proprio_qr, action_qh)
    <name>.fidx + <name>.fblob   frame stream index + concatenated PNG blobs

Every stream file starts with magic ``MILE``, a little-endian u32 version
(currently 1), and a little-endian u64 record count. Joint records are
[timestamp f64 LE][17 x f32 LE]; frame-index records are [timestamp f64 LE]
[offset u64 LE][length u64 LE] into the blob file. All numbers little-endian.

The canonical stream set is fixed: robot proprioception, operator action,
one RGB-D frame stream, and four fingertip tactile frame streams, all on a
shared 30 Hz master clock after synchronization.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import frames as frame_codec

MAGIC = b"MILE"
FORMAT_VERSION = 1
HEADER_SIZE = 16
JOINT_COUNT = 17
JOINT_DTYPE = np.dtype([("t", "<f8"), ("q", "<f4", (JOINT_COUNT,))])
INDEX_DTYPE = np.dtype([("t", "<f8"), ("offset", "<u8"), ("length", "<u8")])

JOINT_VECTOR = "joint_vector"
FRAME_BLOB = "frame_blob"

STRATEGY_LABELS = ("thumb_only", "index_only", "middle_only", "thumb_index_coop", "other")

MASTER_RATE_HZ = 30.0


@dataclass(frozen=True)
class StreamDescriptor:
    name: str
    kind: str
    nominal_rate_hz: float
    element_shape: int | None = None  # joint count for joint_vector streams


CANONICAL_STREAMS = (
    StreamDescriptor("proprio_qr", JOINT_VECTOR, MASTER_RATE_HZ, JOINT_COUNT),
    StreamDescriptor("action_qh", JOINT_VECTOR, MASTER_RATE_HZ, JOINT_COUNT),
    StreamDescriptor("rgbd", FRAME_BLOB, MASTER_RATE_HZ),
    StreamDescriptor("tactile_0", FRAME_BLOB, MASTER_RATE_HZ),
    StreamDescriptor("tactile_1", FRAME_BLOB, MASTER_RATE_HZ),
    StreamDescriptor("tactile_2", FRAME_BLOB, MASTER_RATE_HZ),
    StreamDescriptor("tactile_3", FRAME_BLOB, MASTER_RATE_HZ),
)
CANONICAL_KINDS = {d.name: d.kind for d in CANONICAL_STREAMS}


# ---------------------------------------------------------------------------
# CRC-32C (Castagnoli), reflected polynomial 0x82F63B78.

def _crc32c_table() -> list[int]:
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ 0x82F63B78 if crc & 1 else crc >> 1
        table.append(crc)
    return table


_CRC_TABLE = _crc32c_table()


def crc32c(data: bytes, crc: int = 0) -> int:
    crc ^= 0xFFFFFFFF
    table = _CRC_TABLE
    for byte in data:
        crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


# ---------------------------------------------------------------------------
# Errors

class EpisodeFormatError(Exception):
    """Base for on-disk format violations."""


class BadMagic(EpisodeFormatError):
    pass


class BadVersion(EpisodeFormatError):
    pass


class CountMismatch(EpisodeFormatError):
    pass


class Truncated(EpisodeFormatError):
    def __init__(self, path, offset: int, expected: int):
        super().__init__(f"{path}: file ends at offset {offset}, expected {expected} bytes")
        self.offset = offset
        self.expected = expected


class ChecksumMismatch(EpisodeFormatError):
    pass


# ---------------------------------------------------------------------------
# In-memory model

@dataclass(frozen=True)
class EpisodeMetadata:
    task: str
    strategy: str
    rate_hz: float = MASTER_RATE_HZ
    seed: int = 0
    human_fixture: str = ""
    robot_fixture: str = ""
    created: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGY_LABELS:
            raise ValueError(f"strategy {self.strategy!r} not in {STRATEGY_LABELS}")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "strategy": self.strategy,
            "rate_hz": self.rate_hz,
            "seed": self.seed,
            "human_fixture": self.human_fixture,
            "robot_fixture": self.robot_fixture,
            "created": self.created,
        }

    @staticmethod
    def from_dict(data: dict) -> "EpisodeMetadata":
        return EpisodeMetadata(
            task=str(data["task"]),
            strategy=str(data["strategy"]),
            rate_hz=float(data["rate_hz"]),
            seed=int(data["seed"]),
            human_fixture=str(data.get("human_fixture", "")),
            robot_fixture=str(data.get("robot_fixture", "")),
            created=str(data.get("created", "")),
        )


@dataclass(frozen=True)
class Stream:
    name: str
    kind: str
    rate_hz: float
    timestamps: np.ndarray  # (T,) f64 seconds
    joints: np.ndarray | None = None  # (T, 17) f32 for joint_vector streams
    frames: list[bytes] | None = None  # PNG payloads for frame_blob streams

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        if self.kind == JOINT_VECTOR:
            vals = np.asarray(self.joints, dtype=np.float32)
            if vals.shape != (ts.shape[0], JOINT_COUNT):
                raise ValueError(
                    f"stream {self.name!r}: joints shape {vals.shape}, "
                    f"expected ({ts.shape[0]}, {JOINT_COUNT})"
                )
            object.__setattr__(self, "joints", vals)
        elif self.kind == FRAME_BLOB:
            if self.frames is None or len(self.frames) != ts.shape[0]:
                raise ValueError(f"stream {self.name!r}: payload count != timestamp count")
        else:
            raise ValueError(f"unknown stream kind {self.kind!r}")

    @property
    def count(self) -> int:
        return int(self.timestamps.shape[0])


@dataclass(frozen=True)
class Episode:
    metadata: EpisodeMetadata
    streams: dict[str, Stream] = field(default_factory=dict)

    @property
    def timestamps(self) -> np.ndarray:
        return next(iter(self.streams.values())).timestamps

    @property
    def proprio(self) -> np.ndarray:
        return self.streams["proprio_qr"].joints

    @property
    def action(self) -> np.ndarray:
        return self.streams["action_qh"].joints


def episodes_equal(a: Episode, b: Episode) -> bool:
    """Bit-exact equality of metadata, timestamps, joints, and frame bytes."""
    if a.metadata != b.metadata or set(a.streams) != set(b.streams):
        return False
    for name, sa in a.streams.items():
        sb = b.streams[name]
        if sa.kind != sb.kind or sa.rate_hz != sb.rate_hz:
            return False
        if not np.array_equal(sa.timestamps, sb.timestamps):
            return False
        if sa.kind == JOINT_VECTOR:
            if not np.array_equal(sa.joints, sb.joints):
                return False
        else:
            if sa.frames != sb.frames:
                return False
    return True


# ---------------------------------------------------------------------------
# Synchronization

@dataclass(frozen=True)
class RawStream:
    """Capture-side stream on its own clock, fed into synchronize()."""

    timestamps: np.ndarray
    values: np.ndarray | None = None  # (T, 17) radians for joint streams
    frames: list[bytes] | None = None

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        if ts.size == 0:
            raise ValueError("stream is empty")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("raw stream timestamps must be strictly increasing")


def _nearest_indices(ts: np.ndarray, grid: np.ndarray, tolerance: float) -> np.ndarray:
    """Index of the nearest sample within tolerance per tick, -1 when none."""
    pos = np.searchsorted(ts, grid)
    left = np.clip(pos - 1, 0, ts.size - 1)
    right = np.clip(pos, 0, ts.size - 1)
    d_left = np.abs(grid - ts[left])
    d_right = np.abs(grid - ts[right])
    idx = np.where(d_left <= d_right, left, right)
    dist = np.minimum(d_left, d_right)
    return np.where(dist <= tolerance, idx, -1)


def synchronize(
    raw_streams: dict[str, RawStream],
    master_rate_hz: float = MASTER_RATE_HZ,
    tolerance_s: float | None = None,
    metadata: EpisodeMetadata | None = None,
    interpolate_joints: bool = False,
) -> Episode:
    """Associate every stream to a shared uniform master clock.

    The grid starts at the latest stream start and runs at master_rate_hz;
    each tick takes the nearest sample within +/- tolerance from each stream
    (joint streams may interpolate linearly instead). Ticks any stream cannot
    fill are dropped from all streams; more than 50% drops is an error.
    """
    if set(raw_streams) != set(CANONICAL_KINDS):
        raise ValueError(
            f"streams {sorted(raw_streams)} do not match the canonical set "
            f"{sorted(CANONICAL_KINDS)}"
        )
    if tolerance_s is None:
        tolerance_s = 0.5 / master_rate_hz
    metadata = metadata or EpisodeMetadata(task="untitled", strategy="other")

    t0 = max(float(s.timestamps[0]) for s in raw_streams.values())
    t_end = min(float(s.timestamps[-1]) for s in raw_streams.values())
    n_ticks = int(np.floor((t_end - t0) * master_rate_hz + 1e-9)) + 1
    if n_ticks < 1:
        raise ValueError("streams do not overlap in time")
    grid = t0 + np.arange(n_ticks) / master_rate_hz

    nearest = {
        name: _nearest_indices(s.timestamps, grid, tolerance_s)
        for name, s in raw_streams.items()
    }
    filled = np.ones(n_ticks, dtype=bool)
    for idx in nearest.values():
        filled &= idx >= 0
    if np.count_nonzero(~filled) > 0.5 * n_ticks:
        raise ValueError("streams unsynchronizable: more than 50% of ticks dropped")

    master = grid[filled]
    streams: dict[str, Stream] = {}
    for desc in CANONICAL_STREAMS:
        raw = raw_streams[desc.name]
        idx = nearest[desc.name][filled]
        if desc.kind == JOINT_VECTOR:
            if raw.values is None:
                raise ValueError(f"stream {desc.name!r} must carry joint values")
            vals = np.asarray(raw.values, dtype=np.float64)
            if interpolate_joints:
                picked = np.empty((master.size, vals.shape[1]))
                for j in range(vals.shape[1]):
                    picked[:, j] = np.interp(master, raw.timestamps, vals[:, j])
            else:
                picked = vals[idx]
            streams[desc.name] = Stream(
                name=desc.name,
                kind=desc.kind,
                rate_hz=master_rate_hz,
                timestamps=master,
                joints=picked.astype(np.float32),
            )
        else:
            if raw.frames is None:
                raise ValueError(f"stream {desc.name!r} must carry frame payloads")
            streams[desc.name] = Stream(
                name=desc.name,
                kind=desc.kind,
                rate_hz=master_rate_hz,
                timestamps=master,
                frames=[raw.frames[i] for i in idx],
            )
    return Episode(metadata=metadata, streams=streams)


# ---------------------------------------------------------------------------
# Binary IO

def _header(count: int) -> bytes:
    return MAGIC + FORMAT_VERSION.to_bytes(4, "little") + int(count).to_bytes(8, "little")


def _parse_header(path: Path, data: bytes) -> int:
    if len(data) < HEADER_SIZE:
        raise Truncated(path, offset=len(data), expected=HEADER_SIZE)
    if data[:4] != MAGIC:
        raise BadMagic(f"{path}: magic {data[:4]!r}, expected {MAGIC!r}")
    version = int.from_bytes(data[4:8], "little")
    if version != FORMAT_VERSION:
        raise BadVersion(f"{path}: version {version}, expected {FORMAT_VERSION}")
    return int.from_bytes(data[8:16], "little")


def _encode_joint_stream(stream: Stream) -> bytes:
    records = np.empty(stream.count, dtype=JOINT_DTYPE)
    records["t"] = stream.timestamps
    records["q"] = stream.joints
    return _header(stream.count) + records.tobytes()


def _encode_frame_stream(stream: Stream) -> tuple[bytes, bytes]:
    blob = b"".join(stream.frames)
    records = np.empty(stream.count, dtype=INDEX_DTYPE)
    records["t"] = stream.timestamps
    offset = 0
    for i, payload in enumerate(stream.frames):
        records["offset"][i] = offset
        records["length"][i] = len(payload)
        offset += len(payload)
    return _header(stream.count) + records.tobytes(), blob


def _decode_records(path: Path, data: bytes, dtype: np.dtype, expected_count: int) -> np.ndarray:
    count = _parse_header(path, data)
    if count != expected_count:
        raise CountMismatch(
            f"{path}: header count {count} != manifest count {expected_count}"
        )
    body = data[HEADER_SIZE:]
    expected = count * dtype.itemsize
    if len(body) < expected:
        raise Truncated(path, offset=len(data), expected=HEADER_SIZE + expected)
    if len(body) > expected:
        raise CountMismatch(f"{path}: {len(body) - expected} trailing bytes after records")
    return np.frombuffer(body, dtype=dtype)


def _read_checked(path: Path, expected_crc: int | None) -> bytes:
    data = path.read_bytes()
    if expected_crc is not None:
        actual = crc32c(data)
        if actual != expected_crc:
            raise ChecksumMismatch(
                f"{path}: crc32c {actual:#010x} != manifest {expected_crc:#010x}"
            )
    return data


def write_episode(episode: Episode, directory: str | Path, overwrite: bool = False) -> Path:
    """Write the episode directory atomically; returns the manifest path."""
    directory = Path(directory)
    if directory.exists():
        if any(directory.iterdir()) and not overwrite:
            raise FileExistsError(f"{directory} exists and is not empty (use overwrite)")
    lock_path = Path(str(directory) + ".lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise FileExistsError(f"another writer holds {lock_path}") from None
    os.close(fd)
    tmp = Path(tempfile.mkdtemp(dir=directory.parent, prefix=directory.name + ".tmp-"))
    try:
        entries = []
        for desc in CANONICAL_STREAMS:
            if desc.name not in episode.streams:
                raise ValueError(f"episode is missing canonical stream {desc.name!r}")
            stream = episode.streams[desc.name]
            entry = {
                "name": stream.name,
                "kind": stream.kind,
                "count": stream.count,
                "rate_hz": stream.rate_hz,
            }
            if stream.kind == JOINT_VECTOR:
                payload = _encode_joint_stream(stream)
                entry["file"] = f"{stream.name}.jstream"
                entry["crc32c"] = crc32c(payload)
                (tmp / entry["file"]).write_bytes(payload)
            else:
                index_bytes, blob = _encode_frame_stream(stream)
                entry["file"] = f"{stream.name}.fidx"
                entry["crc32c"] = crc32c(index_bytes)
                entry["blob_file"] = f"{stream.name}.fblob"
                entry["blob_crc32c"] = crc32c(blob)
                (tmp / entry["file"]).write_bytes(index_bytes)
                (tmp / entry["blob_file"]).write_bytes(blob)
            entries.append(entry)
        manifest = {
            "format": "isoteleop-episode",
            "version": FORMAT_VERSION,
            "metadata": episode.metadata.to_dict(),
            "streams": entries,
        }
        (tmp / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if directory.exists():
            shutil.rmtree(directory)
        os.rename(tmp, directory)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    finally:
        lock_path.unlink(missing_ok=True)
    return directory / "manifest.json"


def _load_manifest(directory: Path) -> dict:
    path = directory / "manifest.json"
    if not path.is_file():
        raise EpisodeFormatError(f"{directory}: manifest.json not found")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise EpisodeFormatError(f"{path}: invalid JSON ({exc})") from None
    if manifest.get("format") != "isoteleop-episode":
        raise BadMagic(f"{path}: format tag {manifest.get('format')!r}")
    if manifest.get("version") != FORMAT_VERSION:
        raise BadVersion(f"{path}: version {manifest.get('version')!r}, expected {FORMAT_VERSION}")
    return manifest


def read_episode(directory: str | Path) -> Episode:
    """Read an episode directory back into memory, verifying magic, version,
    counts, and checksums for every stream file."""
    directory = Path(directory)
    manifest = _load_manifest(directory)
    metadata = EpisodeMetadata.from_dict(manifest["metadata"])
    streams: dict[str, Stream] = {}
    for entry in manifest["streams"]:
        name = entry["name"]
        kind = entry["kind"]
        count = int(entry["count"])
        path = directory / entry["file"]
        data = path.read_bytes()
        if kind == JOINT_VECTOR:
            records = _decode_records(path, data, JOINT_DTYPE, count)
            _verify_crc(path, data, int(entry["crc32c"]))
            streams[name] = Stream(
                name=name,
                kind=kind,
                rate_hz=float(entry["rate_hz"]),
                timestamps=records["t"].copy(),
                joints=records["q"].copy(),
            )
        elif kind == FRAME_BLOB:
            records = _decode_records(path, data, INDEX_DTYPE, count)
            _verify_crc(path, data, int(entry["crc32c"]))
            blob_path = directory / entry["blob_file"]
            blob = blob_path.read_bytes()
            _verify_crc(blob_path, blob, int(entry["blob_crc32c"]))
            payloads = []
            for i in range(count):
                off, length = int(records["offset"][i]), int(records["length"][i])
                if off + length > len(blob):
                    raise Truncated(blob_path, offset=len(blob), expected=off + length)
                payloads.append(blob[off : off + length])
            streams[name] = Stream(
                name=name,
                kind=kind,
                rate_hz=float(entry["rate_hz"]),
                timestamps=records["t"].copy(),
                frames=payloads,
            )
        else:
            raise EpisodeFormatError(f"{path}: unknown stream kind {kind!r}")
    return Episode(metadata=metadata, streams=streams)


def _verify_crc(path: Path, data: bytes, expected: int):
    actual = crc32c(data)
    if actual != expected:
        raise ChecksumMismatch(f"{path}: crc32c {actual:#010x} != manifest {expected:#010x}")


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
        }


CHECK_INTEGRITY = "integrity"
CHECK_STRUCTURE = "structure"
CHECK_MONOTONICITY = "monotonicity"
CHECK_RATE = "rate_deviation"
CHECK_GAPS = "gap_census"
CHECK_SHAPE = "shape_consistency"
CHECK_LIMITS = "limit_violations"
CHECK_BLOBS = "blob_integrity"


def _resolve_limit_trees(metadata: EpisodeMetadata, human_tree, robot_tree):
    from .handspec import find_fixture, load_hand_file

    def load(tree, fixture_name):
        if tree is not None:
            return tree, None
        if not fixture_name:
            return None, "no fixture named in metadata"
        try:
            doc = load_hand_file(find_fixture(fixture_name))
        except FileNotFoundError as exc:
            return None, str(exc)
        if doc.tree is None:
            return None, f"fixture {fixture_name!r} failed to parse"
        return doc.tree, None

    human, err_h = load(human_tree, metadata.human_fixture)
    robot, err_r = load(robot_tree, metadata.robot_fixture)
    return human, robot, err_h or err_r


def validate_episode(
    source: Episode | str | Path,
    human_tree=None,
    robot_tree=None,
) -> ValidationReport:
    """Run all integrity/consistency checks; VALID iff every check passes.

    Directory sources are additionally checked for file integrity and
    structure; in-memory episodes pass those checks vacuously.
    """
    checks: list[CheckResult] = []
    episode: Episode | None = None

    if isinstance(source, Episode):
        episode = source
        checks.append(CheckResult(CHECK_INTEGRITY, True, "in-memory episode"))
        checks.append(CheckResult(CHECK_STRUCTURE, True, "in-memory episode"))
    else:
        directory = Path(source)
        integrity_fail = None
        structure_fail = None
        try:
            episode = read_episode(directory)
        except ChecksumMismatch as exc:
            integrity_fail = str(exc)
        except (EpisodeFormatError, OSError, KeyError, ValueError) as exc:
            structure_fail = f"{type(exc).__name__}: {exc}"
        checks.append(CheckResult(CHECK_INTEGRITY, integrity_fail is None, integrity_fail or ""))
        checks.append(CheckResult(CHECK_STRUCTURE, structure_fail is None, structure_fail or ""))
        if episode is None:
            # remaining checks cannot run on an unreadable episode
            for name in (CHECK_MONOTONICITY, CHECK_RATE, CHECK_GAPS, CHECK_SHAPE, CHECK_LIMITS, CHECK_BLOBS):
                checks.append(CheckResult(name, False, "episode unreadable"))
            return ValidationReport(checks=tuple(checks))

    # structure: canonical stream set
    missing = set(CANONICAL_KINDS) - set(episode.streams)
    extra = set(episode.streams) - set(CANONICAL_KINDS)
    if missing or extra:
        checks = [
            c if c.name != CHECK_STRUCTURE else CheckResult(
                CHECK_STRUCTURE, False, f"missing streams {sorted(missing)}, extra {sorted(extra)}"
            )
            for c in checks
        ]
        return ValidationReport(checks=tuple(checks))

    # monotonicity
    mono_fail = ""
    for name, stream in episode.streams.items():
        dt = np.diff(stream.timestamps)
        bad = np.flatnonzero(dt <= 0)
        if bad.size:
            mono_fail = f"stream {name!r}: non-increasing timestamp at index {int(bad[0]) + 1}"
            break
    checks.append(CheckResult(CHECK_MONOTONICITY, not mono_fail, mono_fail))

    # rate deviation: every step within 1e-9 of a positive multiple of 1/rate
    rate_fail = ""
    for name, stream in episode.streams.items():
        period = 1.0 / stream.rate_hz
        dt = np.diff(stream.timestamps)
        if dt.size == 0:
            continue
        multiples = np.round(dt / period)
        if np.any(multiples < 1) or np.any(np.abs(dt - multiples * period) > 1e-9):
            worst = int(np.argmax(np.abs(dt - multiples * period)))
            rate_fail = f"stream {name!r}: interval {dt[worst]:.9f}s off the {period:.9f}s grid"
            break
    checks.append(CheckResult(CHECK_RATE, not rate_fail, rate_fail))

    # gap census: report the largest inter-sample gap, fail on dropped ticks
    gap_fail = ""
    max_gap = 0.0
    for stream in episode.streams.values():
        dt = np.diff(stream.timestamps)
        if dt.size:
            max_gap = max(max_gap, float(np.max(dt)))
    period = 1.0 / episode.metadata.rate_hz
    if max_gap > period + 1e-9:
        gap_fail = f"max inter-sample gap {max_gap:.6f}s exceeds one period {period:.6f}s"
    checks.append(
        CheckResult(CHECK_GAPS, not gap_fail, gap_fail or f"max gap {max_gap:.6f}s")
    )

    # shape consistency: equal counts and identical master timestamps
    shape_fail = ""
    counts = {name: s.count for name, s in episode.streams.items()}
    if len(set(counts.values())) != 1:
        shape_fail = f"stream counts differ: {counts}"
    else:
        master = episode.timestamps
        for name, stream in episode.streams.items():
            if not np.array_equal(stream.timestamps, master):
                shape_fail = f"stream {name!r} timestamps differ from master clock"
                break
    checks.append(CheckResult(CHECK_SHAPE, not shape_fail, shape_fail))

    # limit violations against the fixture trees named in metadata
    human, robot, resolve_err = _resolve_limit_trees(episode.metadata, human_tree, robot_tree)
    limit_fail = ""
    if resolve_err:
        limit_fail = f"cannot verify limits: {resolve_err}"
    else:
        for stream_name, tree in (("proprio_qr", robot), ("action_qh", human)):
            lo, hi = tree.joint_limits()
            vals = episode.streams[stream_name].joints.astype(np.float64)
            ok = (vals >= lo - 1e-6) & (vals <= hi + 1e-6)
            if not np.all(ok):
                t_idx, j_idx = np.argwhere(~ok)[0]
                limit_fail = (
                    f"stream {stream_name!r}: joint {tree.joints[j_idx].name!r} outside "
                    f"[{lo[j_idx]:.6f}, {hi[j_idx]:.6f}] at tick {int(t_idx)}"
                )
                break
    checks.append(CheckResult(CHECK_LIMITS, not limit_fail, limit_fail))

    # blob integrity: every frame is a decodable PNG
    blob_fail = ""
    for name, stream in episode.streams.items():
        if stream.kind != FRAME_BLOB:
            continue
        for i, payload in enumerate(stream.frames):
            if not frame_codec.decodable(payload):
                blob_fail = f"stream {name!r}: frame {i} is not a decodable PNG"
                break
        if blob_fail:
            break
    checks.append(CheckResult(CHECK_BLOBS, not blob_fail, blob_fail))

    return ValidationReport(checks=tuple(checks))
