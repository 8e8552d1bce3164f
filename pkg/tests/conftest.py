import numpy as np
import pytest

from isoteleop import (
    JointBijection,
    JointSpec,
    KinematicTree,
    LinkSpec,
    bijection_from_pairs,
    estimate_alignment,
    find_fixture,
    load_hand_file,
    load_joint_pairing,
)


@pytest.fixture(scope="session")
def exo_tree():
    doc = load_hand_file(find_fixture("mile_exo.hand"))
    assert doc.tree is not None, doc.diagnostics
    return doc.tree


@pytest.fixture(scope="session")
def robot_tree():
    doc = load_hand_file(find_fixture("mile_tac.hand"))
    assert doc.tree is not None, doc.diagnostics
    return doc.tree


@pytest.fixture(scope="session")
def bundled_pi(exo_tree, robot_tree):
    pairs = load_joint_pairing(find_fixture("mile_map.json"))
    return bijection_from_pairs(pairs, exo_tree, robot_tree)


@pytest.fixture(scope="session")
def bundled_iso(exo_tree, robot_tree, bundled_pi):
    return estimate_alignment(exo_tree, robot_tree, bundled_pi)


TIP_PAIRS = [(f, f) for f in ("thumb_dist", "index_dist", "middle_dist", "ring_dist")]


def planar_chain(l1=0.04, l2=0.03):
    """Two-link planar chain, both joints about z."""
    links = (
        LinkSpec("l1", "ROOT", l1),
        LinkSpec("l2", "l1", l2),
    )
    joints = (
        JointSpec("j1", "l1", (0.0, 0.0, 1.0), -np.pi, np.pi, (0.0, 0.0, 0.0)),
        JointSpec("j2", "l2", (0.0, 0.0, 1.0), -np.pi, np.pi, (l1, 0.0, 0.0)),
    )
    return KinematicTree(name="planar", links=links, joints=joints)


def random_tree(rng: np.random.Generator, n_chains=2, max_links=4) -> KinematicTree:
    """Random jointed chain tree for property tests."""
    links = []
    joints = []
    for c in range(n_chains):
        parent = "ROOT"
        for k in range(int(rng.integers(1, max_links + 1))):
            name = f"c{c}_l{k}"
            length = float(np.round(rng.uniform(0.0, 0.08), 9))
            links.append(LinkSpec(name, parent, length))
            axis = rng.normal(size=3)
            axis = tuple(axis / np.linalg.norm(axis))
            lo = float(np.round(rng.uniform(-2.5, -0.1), 9))
            hi = float(np.round(rng.uniform(0.1, 2.5), 9))
            offset = tuple(np.round(rng.uniform(-0.02, 0.05, size=3), 9))
            joints.append(JointSpec(f"c{c}_j{k}", name, axis, lo, hi, offset))
            parent = name
    return KinematicTree(name=f"random_{int(rng.integers(1e6))}", links=tuple(links), joints=tuple(joints))


def identity_map(n: int):
    from isoteleop import IsomorphismMap

    return IsomorphismMap(
        pi=JointBijection.identity(n),
        signs=(1,) * n,
        scale=1.0,
        base_rotation=np.eye(3),
    )
