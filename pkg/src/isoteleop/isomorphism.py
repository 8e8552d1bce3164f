"""Mechanical-isomorphism checks between two kinematic trees.

Two hands are mechanically isomorphic when, under a joint bijection, their
joint axes align through one base rotation, their link lengths differ by one
global scale, and every robot joint range contains the mapped human range.
When the checks hold, teleoperation is the linear map q_r[pi(j)] = s_j*q_h[j]
with no retargeting step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .kinematics import KinematicTree, batch_tip_positions

DEFAULT_AXIS_TOL = 0.02  # ~1.15 degree cone on unit axis difference
DEFAULT_LEN_TOL = 0.0005  # meters


class AlignmentError(ValueError):
    """Alignment cannot be estimated from the given trees."""


@dataclass(frozen=True)
class JointBijection:
    """Permutation sending human joint index j to robot joint index pi(j)."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(i) for i in self.mapping))
        n = len(self.mapping)
        if sorted(self.mapping) != list(range(n)):
            raise ValueError(f"mapping {self.mapping} is not a permutation of 0..{n - 1}")

    def __len__(self) -> int:
        return len(self.mapping)

    def __call__(self, j: int) -> int:
        return self.mapping[j]

    def inverse(self) -> "JointBijection":
        inv = [0] * len(self.mapping)
        for j, i in enumerate(self.mapping):
            inv[i] = j
        return JointBijection(tuple(inv))

    @staticmethod
    def identity(n: int) -> "JointBijection":
        return JointBijection(tuple(range(n)))


@dataclass(frozen=True)
class ToleranceSpec:
    """Per-joint axis tolerance and per-link length tolerance (scalars broadcast)."""

    alpha: float | np.ndarray = DEFAULT_AXIS_TOL
    eps_len: float | np.ndarray = DEFAULT_LEN_TOL

    def resolved(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        alpha = np.broadcast_to(np.asarray(self.alpha, dtype=float), (n,))
        eps = np.broadcast_to(np.asarray(self.eps_len, dtype=float), (n,))
        if np.any(alpha < 0) or np.any(eps < 0):
            raise ValueError("tolerances must be >= 0")
        return alpha, eps


@dataclass(frozen=True)
class IsomorphismMap:
    """Joint bijection plus signs, global link scale, and base rotation."""

    pi: JointBijection
    signs: tuple[int, ...]  # indexed by human joint, entries +1/-1
    scale: float
    base_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if len(self.signs) != len(self.pi):
            raise ValueError("signs length must match bijection size")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if not self.scale > 0:
            raise ValueError("scale must be > 0")
        R = np.asarray(self.base_rotation, dtype=float)
        if R.shape != (3, 3):
            raise ValueError("base_rotation must be 3x3")
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-9 or abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("base_rotation must be a proper rotation (orthonormal, det +1)")
        object.__setattr__(self, "base_rotation", R)

    def inverse(self) -> "IsomorphismMap":
        inv_pi = self.pi.inverse()
        inv_signs = tuple(self.signs[inv_pi(i)] for i in range(len(self.pi)))
        return IsomorphismMap(
            pi=inv_pi,
            signs=inv_signs,
            scale=1.0 / self.scale,
            base_rotation=self.base_rotation.T,
        )


@dataclass(frozen=True)
class IsomorphismReport:
    """Residuals of the three checks, in robot joint order."""

    per_joint_axis_residual: np.ndarray
    per_link_length_residual: np.ndarray
    range_inclusion_ok: np.ndarray
    passed: bool
    estimated_scale: float
    signed_ranges_applied: bool  # True when any sign is -1 (ranges compared after negation)
    max_cartesian_deviation: float | None = None

    def to_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "estimated_scale": float(self.estimated_scale),
            "per_joint_axis_residual": [float(x) for x in self.per_joint_axis_residual],
            "per_link_length_residual": [float(x) for x in self.per_link_length_residual],
            "range_inclusion_ok": [bool(x) for x in self.range_inclusion_ok],
            "signed_ranges_applied": bool(self.signed_ranges_applied),
            "max_cartesian_deviation": (
                None if self.max_cartesian_deviation is None else float(self.max_cartesian_deviation)
            ),
        }


def _proper_procrustes(targets: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Rotation minimizing sum ||t_j - R s_j||^2 over proper rotations."""
    M = targets.T @ sources
    U, _, Vt = np.linalg.svd(M)
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def _paired_axes(tree_h: KinematicTree, tree_r: KinematicTree, pi: JointBijection):
    if tree_h.n_joints != tree_r.n_joints:
        raise ValueError(
            f"joint counts differ: {tree_h.name!r} has {tree_h.n_joints}, "
            f"{tree_r.name!r} has {tree_r.n_joints}"
        )
    if len(pi) != tree_h.n_joints:
        raise ValueError(f"bijection size {len(pi)} does not match joint count {tree_h.n_joints}")
    axes_h = tree_h.axes()
    axes_r = tree_r.axes()[list(pi.mapping)]  # robot axes reordered to human index
    return axes_h, axes_r


def estimate_alignment(
    tree_h: KinematicTree, tree_r: KinematicTree, pi: JointBijection
) -> IsomorphismMap:
    """Estimate base rotation, signs, and link scale for a declared bijection.

    The rotation is the proper-Procrustes optimum of the paired axis sets;
    signs flip whenever that reduces a joint's own residual, alternating with
    rotation refits until a fixed point (at most n rounds). The scale is the
    least-squares line through the origin over paired nonzero link lengths.
    """
    axes_h, axes_r = _paired_axes(tree_h, tree_r, pi)
    n = len(pi)

    sing = np.linalg.svd(axes_h, compute_uv=False)
    if sing[1] <= 1e-9 * max(sing[0], 1.0):
        raise AlignmentError("alignment underdetermined: joint axes are collinear")

    signs = np.ones(n)
    R = _proper_procrustes(axes_r, axes_h * signs[:, None])
    for _ in range(n):
        dots = np.einsum("ij,ij->i", axes_r, (axes_h * signs[:, None]) @ R.T)
        flips = dots < 0
        if not np.any(flips):
            break
        signs[flips] *= -1
        R = _proper_procrustes(axes_r, axes_h * signs[:, None])

    len_h = tree_h.joint_link_lengths()
    len_r = tree_r.joint_link_lengths()[list(pi.mapping)]
    paired = len_h > 0  # zero-length links are stacked-joint artifacts, no length signal
    if not np.any(paired):
        raise AlignmentError("no nonzero-length link pairs: scale undetermined")
    scale = float(np.dot(len_r[paired], len_h[paired]) / np.dot(len_h[paired], len_h[paired]))

    return IsomorphismMap(
        pi=pi,
        signs=tuple(int(s) for s in signs),
        scale=scale,
        base_rotation=R,
    )


def check_isomorphism(
    tree_h: KinematicTree,
    tree_r: KinematicTree,
    iso: IsomorphismMap,
    tol: ToleranceSpec = ToleranceSpec(),
) -> IsomorphismReport:
    """Evaluate axis, length, and range-inclusion residuals under the map.

    Violations are report content, not errors. Ranges are compared after sign
    application: a -1 sign maps the human range [a, b] to [-b, -a] before the
    inclusion test, since that is the range actually commanded.
    """
    axes_h, axes_r = _paired_axes(tree_h, tree_r, iso.pi)
    n = len(iso.pi)
    alpha, eps_len = tol.resolved(n)
    signs = np.array(iso.signs, dtype=float)
    R = iso.base_rotation

    # residuals computed in human pairing order, then reported in robot order
    axis_res_h = np.linalg.norm(axes_r - (axes_h * signs[:, None]) @ R.T, axis=1)

    len_h = tree_h.joint_link_lengths()
    len_r = tree_r.joint_link_lengths()[list(pi_list := list(iso.pi.mapping))]
    len_res_h = np.abs(len_r - iso.scale * len_h)

    lo_h, hi_h = tree_h.joint_limits()
    mapped_lo = np.where(signs > 0, lo_h, -hi_h)
    mapped_hi = np.where(signs > 0, hi_h, -lo_h)
    lo_r, hi_r = tree_r.joint_limits()
    range_ok_h = (lo_r[pi_list] <= mapped_lo) & (hi_r[pi_list] >= mapped_hi)

    inv = iso.pi.inverse()
    order = list(inv.mapping)  # robot index i -> human pairing row
    axis_res = axis_res_h[order]
    len_res = len_res_h[order]
    range_ok = range_ok_h[order]

    # tolerances are indexed by robot joint/link, same order as the residuals
    passed = bool(
        np.all(axis_res <= alpha) and np.all(len_res <= eps_len) and np.all(range_ok)
    )
    return IsomorphismReport(
        per_joint_axis_residual=axis_res,
        per_link_length_residual=len_res,
        range_inclusion_ok=range_ok,
        passed=passed,
        estimated_scale=iso.scale,
        signed_ranges_applied=bool(np.any(signs < 0)),
    )


def apply_map(iso: IsomorphismMap, q_h: np.ndarray) -> np.ndarray:
    """Map human joint values to robot joint order: q_r[pi(j)] = s_j * q_h[j].

    Accepts a vector (n,) or a stack (..., n); the map is linear and applies
    unchanged to velocities.
    """
    q_h = np.asarray(q_h, dtype=float)
    n = len(iso.pi)
    if q_h.shape[-1] != n:
        raise ValueError(f"joint vector has size {q_h.shape[-1]}, map expects {n}")
    out = np.empty_like(q_h)
    out[..., list(iso.pi.mapping)] = q_h * np.array(iso.signs, dtype=float)
    return out


def check_workspace_inclusion(
    tree_h: KinematicTree,
    tree_r: KinematicTree,
    iso: IsomorphismMap,
    tip_pairs: list[tuple[str, str]],
    n_samples: int,
    seed: int,
) -> tuple[float, bool]:
    """Sample the human joint space; verify mapped commands and tip geometry.

    Returns (max_deviation, all_in_range): the largest Cartesian gap between
    robot fingertips and the scaled/rotated human fingertips, and whether all
    mapped joint vectors stayed inside the robot's limits. Sampling is
    counter-seeded per sample, so results do not depend on evaluation order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tips_h = [p[0] for p in tip_pairs]
    tips_r = [p[1] for p in tip_pairs]
    for name in tips_h:
        tree_h.link(name)
    for name in tips_r:
        tree_r.link(name)

    lo, hi = tree_h.joint_limits()
    n = tree_h.n_joints
    samples = np.empty((n_samples, n))
    for i in range(n_samples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        samples[i] = lo + rng.random(n) * (hi - lo)

    q_r = apply_map(iso, samples)
    lo_r, hi_r = tree_r.joint_limits()
    all_in_range = bool(np.all((q_r >= lo_r) & (q_r <= hi_r)))

    p_h = batch_tip_positions(tree_h, samples, tips_h)  # (B, T, 3)
    p_r = batch_tip_positions(tree_r, q_r, tips_r)
    mapped = iso.scale * np.einsum("ij,btj->bti", iso.base_rotation, p_h)
    max_deviation = float(np.max(np.linalg.norm(p_r - mapped, axis=-1)))
    return max_deviation, all_in_range


def bijection_from_pairs(
    pairs: list[tuple[str, str]], tree_h: KinematicTree, tree_r: KinematicTree
) -> JointBijection:
    """Build the index permutation from (human joint, robot joint) name pairs."""
    if len(pairs) != tree_h.n_joints:
        raise ValueError(
            f"map lists {len(pairs)} pairs, tree {tree_h.name!r} has {tree_h.n_joints} joints"
        )
    h_index = {j.name: i for i, j in enumerate(tree_h.joints)}
    r_index = {j.name: i for i, j in enumerate(tree_r.joints)}
    mapping = [-1] * tree_h.n_joints
    for h_name, r_name in pairs:
        if h_name not in h_index:
            raise ValueError(f"map references unknown human joint {h_name!r}")
        if r_name not in r_index:
            raise ValueError(f"map references unknown robot joint {r_name!r}")
        if mapping[h_index[h_name]] != -1:
            raise ValueError(f"human joint {h_name!r} mapped twice")
        mapping[h_index[h_name]] = r_index[r_name]
    return JointBijection(tuple(mapping))


def load_joint_pairing(path: str | Path) -> list[tuple[str, str]]:
    """Read a joint-pairing JSON file: {"pairs": [[human, robot], ...]}."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or "pairs" not in data:
        raise ValueError(f"{path}: expected an object with a 'pairs' list")
    pairs = [(str(h), str(r)) for h, r in data["pairs"]]
    return pairs
