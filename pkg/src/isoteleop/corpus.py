"""Episode corpora for validator and reader testing.

Generates property-style valid episodes (random lengths, metadata, in-range
joint values, stamped frames) and applies five corruption types, each staged
so a specific validation check catches it:

    timestamp_regression -> monotonicity
    truncation           -> structure
    checksum             -> integrity
    shape                -> shape_consistency
    limit                -> limit_violations
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import frames as frame_codec
from .episodes import (
    CANONICAL_STREAMS,
    CHECK_INTEGRITY,
    CHECK_LIMITS,
    CHECK_MONOTONICITY,
    CHECK_SHAPE,
    CHECK_STRUCTURE,
    Episode,
    EpisodeMetadata,
    FRAME_BLOB,
    HEADER_SIZE,
    INDEX_DTYPE,
    JOINT_DTYPE,
    JOINT_VECTOR,
    MASTER_RATE_HZ,
    STRATEGY_LABELS,
    Stream,
    crc32c,
    write_episode,
)
from .handspec import find_fixture, load_hand_file


def _fixture_limits(name: str):
    tree = load_hand_file(find_fixture(name)).tree
    return tree.joint_limits()


def make_episode(index: int, seed: int, tick_count: int | None = None) -> Episode:
    """One deterministic valid episode with in-range joints and stamped frames."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    count = int(tick_count if tick_count is not None else rng.integers(2, 12))
    t0 = float(rng.integers(0, 100)) / MASTER_RATE_HZ
    ts = t0 + np.arange(count) / MASTER_RATE_HZ

    lo_h, hi_h = _fixture_limits("mile_exo.hand")
    lo_r, hi_r = _fixture_limits("mile_tac.hand")
    action = lo_h + rng.random((count, 17)) * (hi_h - lo_h)
    proprio = lo_r + rng.random((count, 17)) * (hi_r - lo_r)

    streams = {
        "proprio_qr": Stream("proprio_qr", JOINT_VECTOR, MASTER_RATE_HZ, ts, joints=proprio.astype(np.float32)),
        "action_qh": Stream("action_qh", JOINT_VECTOR, MASTER_RATE_HZ, ts, joints=action.astype(np.float32)),
        "rgbd": Stream("rgbd", FRAME_BLOB, MASTER_RATE_HZ, ts,
                       frames=[frame_codec.make_rgbd_frame(i) for i in range(count)]),
    }
    for finger in range(4):
        streams[f"tactile_{finger}"] = Stream(
            f"tactile_{finger}", FRAME_BLOB, MASTER_RATE_HZ, ts,
            frames=[frame_codec.make_tactile_frame(finger, i) for i in range(count)],
        )
    metadata = EpisodeMetadata(
        task=f"corpus_task_{index}",
        strategy=STRATEGY_LABELS[index % len(STRATEGY_LABELS)],
        rate_hz=MASTER_RATE_HZ,
        seed=seed,
        human_fixture="mile_exo.hand",
        robot_fixture="mile_tac.hand",
        created="",
    )
    return Episode(metadata=metadata, streams=streams)


def generate_valid_episodes(root: str | Path, count: int, seed: int) -> list[Path]:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    dirs = []
    for i in range(count):
        episode = make_episode(i, seed)
        directory = root / f"episode_{i:03d}"
        write_episode(episode, directory, overwrite=True)
        dirs.append(directory)
    return dirs


# -- file surgery -----------------------------------------------------------

def _manifest(directory: Path) -> dict:
    return json.loads((directory / "manifest.json").read_text(encoding="utf-8"))


def _save_manifest(directory: Path, manifest: dict):
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _entry(manifest: dict, name: str) -> dict:
    return next(e for e in manifest["streams"] if e["name"] == name)


def _rewrite_records(directory: Path, name: str, mutate, refresh_manifest: bool = True):
    """Apply `mutate(records) -> records` to a stream file, refreshing header
    count and manifest checksum so only the intended check fires."""
    manifest = _manifest(directory)
    entry = _entry(manifest, name)
    path = directory / entry["file"]
    data = path.read_bytes()
    dtype = JOINT_DTYPE if entry["kind"] == JOINT_VECTOR else INDEX_DTYPE
    records = np.frombuffer(data[HEADER_SIZE:], dtype=dtype).copy()
    records = mutate(records)
    payload = data[:8] + len(records).to_bytes(8, "little") + records.tobytes()
    path.write_bytes(payload)
    if refresh_manifest:
        entry["count"] = int(len(records))
        entry["crc32c"] = crc32c(payload)
        _save_manifest(directory, manifest)


def corrupt_timestamp_regression(directory: Path, rng: np.random.Generator) -> str:
    """Push one tick's timestamp behind its predecessor, in every stream."""
    manifest = _manifest(directory)
    tick = int(rng.integers(1, _entry(manifest, "proprio_qr")["count"]))

    def regress(records):
        records["t"][tick] = records["t"][tick - 1] - 0.01
        return records

    for desc in CANONICAL_STREAMS:
        _rewrite_records(directory, desc.name, regress)
    return CHECK_MONOTONICITY


def corrupt_truncation(directory: Path, rng: np.random.Generator) -> str:
    """Chop the tail off one stream file without telling the manifest."""
    manifest = _manifest(directory)
    name = CANONICAL_STREAMS[int(rng.integers(0, len(CANONICAL_STREAMS)))].name
    path = directory / _entry(manifest, name)["file"]
    data = path.read_bytes()
    path.write_bytes(data[: len(data) - int(rng.integers(1, 20))])
    return CHECK_STRUCTURE


def corrupt_checksum(directory: Path, rng: np.random.Generator) -> str:
    """Flip the low bit of one payload byte; size and structure stay intact."""
    manifest = _manifest(directory)
    name = CANONICAL_STREAMS[int(rng.integers(0, len(CANONICAL_STREAMS)))].name
    path = directory / _entry(manifest, name)["file"]
    data = bytearray(path.read_bytes())
    # low mantissa byte of the first joint value (or first index record byte)
    offset = HEADER_SIZE + 8
    data[offset] ^= 0x01
    path.write_bytes(bytes(data))
    return CHECK_INTEGRITY


def corrupt_shape(directory: Path, rng: np.random.Generator) -> str:
    """Drop the last record of one stream, self-consistently, so only the
    cross-stream shape check can notice."""
    manifest = _manifest(directory)
    candidates = [d.name for d in CANONICAL_STREAMS]
    name = candidates[int(rng.integers(0, len(candidates)))]
    _rewrite_records(directory, name, lambda records: records[:-1])
    return CHECK_SHAPE


def corrupt_limit(directory: Path, rng: np.random.Generator) -> str:
    """Push one stored joint value well beyond the fixture's q_max."""
    stream = ("proprio_qr", "action_qh")[int(rng.integers(0, 2))]
    fixture = "mile_tac.hand" if stream == "proprio_qr" else "mile_exo.hand"
    _, hi = _fixture_limits(fixture)
    joint = int(rng.integers(0, 17))

    def blow(records):
        records["q"][0, joint] = np.float32(hi[joint] + 0.5)
        return records

    _rewrite_records(directory, stream, blow)
    return CHECK_LIMITS


CORRUPTIONS = (
    corrupt_timestamp_regression,
    corrupt_truncation,
    corrupt_checksum,
    corrupt_shape,
    corrupt_limit,
)


def generate_corrupted_corpus(
    root: str | Path, count: int, seed: int
) -> list[tuple[Path, str]]:
    """Write `count` corrupted episodes cycling the five corruption types;
    returns (directory, designated failing check) pairs."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        episode = make_episode(i, seed ^ 0x5A5A, tick_count=int(rng.integers(4, 10)))
        directory = root / f"corrupt_{i:03d}"
        write_episode(episode, directory, overwrite=True)
        corruption = CORRUPTIONS[i % len(CORRUPTIONS)]
        designated = corruption(directory, rng)
        out.append((directory, designated))
    return out
