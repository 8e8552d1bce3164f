"""Kinematic tree model with forward kinematics and joint-limit utilities.

A tree is a set of links connected by revolute joints. Every non-root link
may be driven by at most one joint; links without a joint are rigidly
attached. Joint axes are expressed in the base-aligned frame, which at the
zero configuration coincides with every link frame (the format carries no
fixed rotations, only translations), so axes double as local-frame axes.

Pose positions refer to the distal end of a link: the point where children
attach by default. Lengths and offsets are meters, angles radians.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

ROOT = "ROOT"


@dataclass(frozen=True)
class LinkSpec:
    name: str
    parent: str  # link name or ROOT
    length: float  # meters, >= 0

    def __post_init__(self):
        if self.name == ROOT:
            raise ValueError("link name 'ROOT' is reserved")
        if self.length < 0:
            raise ValueError(f"link {self.name!r}: length must be >= 0, got {self.length}")


@dataclass(frozen=True)
class JointSpec:
    """Revolute hinge driving `link` relative to its parent link.

    `axis` is a unit vector in the base-aligned frame; `offset` places the
    joint in the parent link's frame (default: the parent's distal end).
    """

    name: str
    link: str
    axis: tuple[float, float, float]
    q_min: float
    q_max: float
    offset: tuple[float, float, float]

    def __post_init__(self):
        norm = float(np.linalg.norm(self.axis))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"joint {self.name!r}: axis norm {norm} not unit within 1e-9")
        if not self.q_min < self.q_max:
            raise ValueError(f"joint {self.name!r}: q_min must be < q_max")
        if self.q_min < -np.pi or self.q_max > np.pi:
            raise ValueError(f"joint {self.name!r}: limits must lie in [-pi, pi]")


@dataclass(frozen=True)
class Pose:
    """Rigid pose: rotation matrix and distal-end position (meters)."""

    rotation: np.ndarray  # (3, 3)
    position: np.ndarray  # (3,)


@dataclass(frozen=True)
class KinematicTree:
    """Links and joints; joint declaration order is the canonical joint index."""

    name: str
    links: tuple[LinkSpec, ...]
    joints: tuple[JointSpec, ...]

    # derived lookup tables, filled in __post_init__
    _link_index: dict = field(default_factory=dict, repr=False, compare=False)
    _joint_index: dict = field(default_factory=dict, repr=False, compare=False)
    _joint_of_link: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "joints", tuple(self.joints))
        names = {}
        for link in self.links:
            if link.name in names:
                raise ValueError(f"duplicate link name {link.name!r}")
            names[link.name] = link
        # parents must exist and form a single tree rooted at ROOT
        for link in self.links:
            if link.parent != ROOT and link.parent not in names:
                raise ValueError(f"link {link.name!r}: unknown parent {link.parent!r}")
        for link in self.links:
            seen = {link.name}
            cur = link.parent
            while cur != ROOT:
                if cur in seen:
                    raise ValueError(f"cycle through link {link.name!r}")
                seen.add(cur)
                cur = names[cur].parent
        joint_names = set()
        joint_of_link = {}
        for joint in self.joints:
            if joint.name in joint_names:
                raise ValueError(f"duplicate joint name {joint.name!r}")
            joint_names.add(joint.name)
            if joint.link not in names:
                raise ValueError(f"joint {joint.name!r}: unknown link {joint.link!r}")
            if joint.link in joint_of_link:
                raise ValueError(f"link {joint.link!r} driven by more than one joint")
            joint_of_link[joint.link] = joint
        object.__setattr__(self, "_link_index", {l.name: i for i, l in enumerate(self.links)})
        object.__setattr__(self, "_joint_index", {j.name: i for i, j in enumerate(self.joints)})
        object.__setattr__(self, "_joint_of_link", joint_of_link)

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    def link(self, name: str) -> LinkSpec:
        try:
            return self.links[self._link_index[name]]
        except KeyError:
            raise KeyError(f"tree {self.name!r} has no link {name!r}") from None

    def joint_limits(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([j.q_min for j in self.joints])
        hi = np.array([j.q_max for j in self.joints])
        return lo, hi

    def axes(self) -> np.ndarray:
        """Joint axes in the base-aligned frame, shape (n, 3), joint order."""
        return np.array([j.axis for j in self.joints])

    def joint_link_lengths(self) -> np.ndarray:
        """Length of the link each joint drives, shape (n,), joint order."""
        return np.array([self.link(j.link).length for j in self.joints])

    def topo_links(self) -> list[LinkSpec]:
        """Links ordered parents-before-children."""
        placed = {ROOT}
        out = []
        pending = list(self.links)
        while pending:
            progressed = False
            rest = []
            for link in pending:
                if link.parent in placed:
                    out.append(link)
                    placed.add(link.name)
                    progressed = True
                else:
                    rest.append(link)
            if not progressed:
                raise ValueError(f"tree {self.name!r}: orphaned links {[l.name for l in rest]}")
            pending = rest
        return out

    def chains(self) -> list[list[str]]:
        """Root-to-leaf link chains (one per fingertip for hand trees)."""
        children: dict[str, list[str]] = {}
        for link in self.links:
            children.setdefault(link.parent, []).append(link.name)
        leaves = [l.name for l in self.links if l.name not in children]
        out = []
        for leaf in leaves:
            chain = [leaf]
            cur = self.link(leaf).parent
            while cur != ROOT:
                chain.append(cur)
                cur = self.link(cur).parent
            out.append(chain[::-1])
        return out


def _check_dimension(tree: KinematicTree, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (tree.n_joints,):
        raise ValueError(
            f"joint vector has shape {q.shape}, tree {tree.name!r} expects ({tree.n_joints},)"
        )
    return q


def _rotation_about(axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Rodrigues rotation matrices, batched over `angle` (shape (...,))."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    angle = np.asarray(angle, dtype=float)
    c = np.cos(angle)[..., None, None]
    s = np.sin(angle)[..., None, None]
    eye = np.eye(3)
    cross = np.array([
        [0.0, -a[2], a[1]],
        [a[2], 0.0, -a[0]],
        [-a[1], a[0], 0.0],
    ])
    outer = np.outer(a, a)
    return c * eye + s * cross + (1.0 - c) * outer


def _batch_poses(tree: KinematicTree, q_batch: np.ndarray):
    """Orientation and distal position per link for a batch of configurations.

    Returns (rotations, positions): dict link name -> (B,3,3) / (B,3).
    """
    q_batch = np.asarray(q_batch, dtype=float)
    batch = q_batch.shape[:-1]
    rots = {ROOT: np.broadcast_to(np.eye(3), batch + (3, 3))}
    origins = {ROOT: np.zeros(batch + (3,))}
    ends = {ROOT: np.zeros(batch + (3,))}
    for link in tree.topo_links():
        parent_rot = rots[link.parent]
        parent_origin = origins[link.parent]
        joint = tree._joint_of_link.get(link.name)
        if joint is None:
            parent_len = 0.0 if link.parent == ROOT else tree.link(link.parent).length
            offset = np.array([parent_len, 0.0, 0.0])
            rot = rots[link.parent]
        else:
            offset = np.asarray(joint.offset, dtype=float)
            angle = q_batch[..., tree._joint_index[joint.name]]
            rot = parent_rot @ _rotation_about(joint.axis, angle)
        origin = parent_origin + np.einsum("...ij,j->...i", parent_rot, offset)
        rots[link.name] = rot
        origins[link.name] = origin
        ends[link.name] = origin + rot[..., :, 0] * link.length
    return rots, ends


def forward_kinematics(tree: KinematicTree, q) -> dict[str, Pose]:
    """Pose of every link (rotation + distal-end position) at configuration q.

    Out-of-limit values are allowed but flagged with a warning; a dimension
    mismatch raises ValueError.
    """
    q = _check_dimension(tree, q)
    lo, hi = tree.joint_limits()
    if np.any(q < lo) or np.any(q > hi):
        bad = [tree.joints[i].name for i in np.flatnonzero((q < lo) | (q > hi))]
        warnings.warn(f"configuration outside joint limits at {bad}", stacklevel=2)
    rots, ends = _batch_poses(tree, q)
    return {name: Pose(rotation=rots[name], position=ends[name]) for name in ends}

def fingertip_positions(tree: KinematicTree, q, tip_links: list[str]) -> np.ndarray:
    """Distal-end positions of the named links, shape (len(tip_links), 3)."""
    for name in tip_links:
        tree.link(name)  # raises on unknown names
    poses = forward_kinematics(tree, q)
    return np.array([poses[name].position for name in tip_links])


def batch_tip_positions(tree: KinematicTree, q_batch: np.ndarray, tip_links: list[str]) -> np.ndarray:
    """Vectorized fingertip positions for a (B, n) batch: returns (B, T, 3)."""
    q_batch = np.asarray(q_batch, dtype=float)
    if q_batch.ndim != 2 or q_batch.shape[1] != tree.n_joints:
        raise ValueError(
            f"batch has shape {q_batch.shape}, tree {tree.name!r} expects (B, {tree.n_joints})"
        )
    for name in tip_links:
        tree.link(name)
    _, ends = _batch_poses(tree, q_batch)
    return np.stack([ends[name] for name in tip_links], axis=1)


def clamp_to_limits(tree: KinematicTree, q) -> tuple[np.ndarray, np.ndarray]:
    """Clamp q into the tree's joint ranges; mask marks clamped joints."""
    q = _check_dimension(tree, q)
    lo, hi = tree.joint_limits()
    clamped = np.clip(q, lo, hi)
    return clamped, clamped != q


def scale_geometry(tree: KinematicTree, factor: float, name: str | None = None) -> KinematicTree:
    """Copy of the tree with all lengths and joint offsets scaled by `factor`."""
    if factor <= 0:
        raise ValueError("scale factor must be > 0")
    links = tuple(
        LinkSpec(name=l.name, parent=l.parent, length=l.length * factor) for l in tree.links
    )
    joints = tuple(
        JointSpec(
            name=j.name,
            link=j.link,
            axis=j.axis,
            q_min=j.q_min,
            q_max=j.q_max,
            offset=tuple(c * factor for c in j.offset),
        )
        for j in tree.joints
    )
    return KinematicTree(name=name or tree.name, links=links, joints=joints)
