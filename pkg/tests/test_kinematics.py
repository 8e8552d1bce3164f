import numpy as np
import pytest

from isoteleop import (
    JointSpec,
    KinematicTree,
    LinkSpec,
    batch_tip_positions,
    clamp_to_limits,
    fingertip_positions,
    forward_kinematics,
    scale_geometry,
)

from conftest import planar_chain, random_tree


def single_link(length=0.05, axis=(0.0, 0.0, 1.0)):
    return KinematicTree(
        name="one",
        links=(LinkSpec("l1", "ROOT", length),),
        joints=(JointSpec("j1", "l1", axis, -np.pi, np.pi, (0.0, 0.0, 0.0)),),
    )


class TestForwardKinematics:
    def test_zero_angle_identity(self):
        poses = forward_kinematics(single_link(), [0.0])
        np.testing.assert_allclose(poses["l1"].position, [0.05, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(poses["ROOT"].position, [0.0, 0.0, 0.0])
        np.testing.assert_allclose(poses["ROOT"].rotation, np.eye(3))

    def test_quarter_turn(self):
        poses = forward_kinematics(single_link(), [np.pi / 2])
        np.testing.assert_allclose(poses["l1"].position, [0.0, 0.05, 0.0], atol=1e-12)

    def test_planar_two_link_against_trig_oracle(self):
        # independent straight-line oracle: absolute angles accumulate,
        # tip = l1*(cos a1, sin a1) + l2*(cos(a1+a2), sin(a1+a2))
        l1, l2 = 0.04, 0.03
        q1, q2 = np.radians(30.0), np.radians(60.0)
        expect = np.array(
            [
                l1 * np.cos(q1) + l2 * np.cos(q1 + q2),
                l1 * np.sin(q1) + l2 * np.sin(q1 + q2),
                0.0,
            ]
        )
        poses = forward_kinematics(planar_chain(l1, l2), [q1, q2])
        np.testing.assert_allclose(poses["l2"].position, expect, atol=1e-12)

    def test_dimension_mismatch_reports_sizes(self):
        with pytest.raises(ValueError, match=r"\(3,\).*expects \(2,\)"):
            forward_kinematics(planar_chain(), [0.0, 0.0, 0.0])

    def test_out_of_limit_flags_warning(self):
        tree = single_link()
        with pytest.warns(UserWarning, match="j1"):
            forward_kinematics(tree, [3.5])

    def test_composition_child_after_parent(self):
        # recompute each pose from its parent's pose and the local transform
        rng = np.random.default_rng(3)
        tree = random_tree(rng)
        lo, hi = tree.joint_limits()
        q = lo + rng.random(tree.n_joints) * (hi - lo)
        poses = forward_kinematics(tree, q)
        joint_of_link = {j.link: j for j in tree.joints}
        qmap = {j.name: q[i] for i, j in enumerate(tree.joints)}
        for link in tree.topo_links():
            parent = link.parent
            if parent == "ROOT":
                parent_rot, parent_end, parent_len = np.eye(3), np.zeros(3), 0.0
            else:
                parent_rot = poses[parent].rotation
                parent_end = poses[parent].position
                parent_len = tree.link(parent).length
            joint = joint_of_link[link.name]
            origin = parent_end - parent_rot @ [parent_len, 0, 0] + parent_rot @ joint.offset
            axis = np.asarray(joint.axis)
            angle = qmap[joint.name]
            k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
            local = np.cos(angle) * np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * np.outer(axis, axis)
            rot = parent_rot @ local
            np.testing.assert_allclose(rot, poses[link.name].rotation, atol=1e-12)
            np.testing.assert_allclose(
                origin + rot @ [link.length, 0, 0], poses[link.name].position, atol=1e-12
            )

    def test_rigid_distance_invariance(self):
        # distance from a link's origin to its own distal end is its length,
        # independent of configuration
        rng = np.random.default_rng(11)
        tree = planar_chain()
        for _ in range(20):
            q = rng.uniform(-np.pi, np.pi, size=2)
            poses = forward_kinematics(tree, q)
            d = np.linalg.norm(poses["l2"].position - poses["l1"].position)
            np.testing.assert_allclose(d, 0.03, atol=1e-12)

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(7)
        tree = random_tree(rng)
        scaled = scale_geometry(tree, 1.8)
        lo, hi = tree.joint_limits()
        for _ in range(10):
            q = lo + rng.random(tree.n_joints) * (hi - lo)
            p = forward_kinematics(tree, q)
            ps = forward_kinematics(scaled, q)
            for name in p:
                np.testing.assert_allclose(
                    ps[name].position, 1.8 * p[name].position, rtol=1e-12, atol=1e-15
                )


class TestFingertips:
    def test_tip_at_root(self):
        tree = single_link()
        # ROOT itself is addressable only through links; a zero-length link
        # at the root stands in for it
        zl = KinematicTree(
            name="z",
            links=(LinkSpec("base", "ROOT", 0.0),),
            joints=(JointSpec("j", "base", (0, 0, 1.0), -1.0, 1.0, (0.0, 0.0, 0.0)),),
        )
        tips = fingertip_positions(zl, [0.3], ["base"])
        np.testing.assert_allclose(tips[0], [0.0, 0.0, 0.0])
        del tree

    def test_mile_zero_config_matches_cumulative_offsets(self, exo_tree):
        # independent oracle: at q = 0 no rotations act, so a tip is the sum
        # of every joint offset plus the leaf length along the chain
        joint_of_link = {j.link: j for j in exo_tree.joints}
        for chain in exo_tree.chains():
            expect = np.zeros(3)
            prev = "ROOT"
            for name in chain:
                joint = joint_of_link.get(name)
                if joint is not None:
                    expect += np.asarray(joint.offset)
                else:
                    prev_len = 0.0 if prev == "ROOT" else exo_tree.link(prev).length
                    expect += [prev_len, 0.0, 0.0]
                prev = name
            expect += [exo_tree.link(chain[-1]).length, 0.0, 0.0]
            tip = fingertip_positions(exo_tree, np.zeros(17), [chain[-1]])[0]
            np.testing.assert_allclose(tip, expect, atol=1e-15)

    def test_matches_forward_kinematics(self, exo_tree):
        rng = np.random.default_rng(5)
        lo, hi = exo_tree.joint_limits()
        q = lo + rng.random(17) * (hi - lo)
        tips = fingertip_positions(exo_tree, q, ["index_dist", "thumb_dist"])
        poses = forward_kinematics(exo_tree, q)
        np.testing.assert_array_equal(tips[0], poses["index_dist"].position)
        np.testing.assert_array_equal(tips[1], poses["thumb_dist"].position)

    def test_unknown_link_named(self, exo_tree):
        with pytest.raises(KeyError, match="pinky_dist"):
            fingertip_positions(exo_tree, np.zeros(17), ["pinky_dist"])

    def test_batch_matches_single(self, exo_tree):
        rng = np.random.default_rng(9)
        lo, hi = exo_tree.joint_limits()
        batch = lo + rng.random((8, 17)) * (hi - lo)
        tips = batch_tip_positions(exo_tree, batch, ["ring_dist"])
        for i in range(8):
            single = fingertip_positions(exo_tree, batch[i], ["ring_dist"])
            np.testing.assert_allclose(tips[i, 0], single[0], atol=1e-12)


class TestClamp:
    def test_in_range_unchanged(self, exo_tree):
        q = np.zeros(17)
        clamped, mask = clamp_to_limits(exo_tree, q)
        np.testing.assert_array_equal(clamped, q)
        assert not mask.any()

    def test_above_max_clamps(self, exo_tree):
        lo, hi = exo_tree.joint_limits()
        q = np.zeros(17)
        q[3] = hi[3] + 0.1
        clamped, mask = clamp_to_limits(exo_tree, q)
        assert clamped[3] == hi[3]
        assert mask[3] and mask.sum() == 1

    def test_mixed_against_scalar_oracle(self, exo_tree):
        rng = np.random.default_rng(2)
        lo, hi = exo_tree.joint_limits()
        q = rng.uniform(-4.0, 4.0, size=17)
        clamped, mask = clamp_to_limits(exo_tree, q)
        for j in range(17):
            expect = min(max(q[j], lo[j]), hi[j])
            assert clamped[j] == expect
            assert mask[j] == (expect != q[j])


class TestTreeValidation:
    def test_duplicate_link_rejected(self):
        with pytest.raises(ValueError, match="duplicate link"):
            KinematicTree(
                name="bad",
                links=(LinkSpec("a", "ROOT", 0.1), LinkSpec("a", "ROOT", 0.1)),
                joints=(),
            )

    def test_unknown_parent_rejected(self):
        with pytest.raises(ValueError, match="unknown parent"):
            KinematicTree(name="bad", links=(LinkSpec("a", "nope", 0.1),), joints=())

    def test_two_joints_one_link_rejected(self):
        with pytest.raises(ValueError, match="more than one joint"):
            KinematicTree(
                name="bad",
                links=(LinkSpec("a", "ROOT", 0.1),),
                joints=(
                    JointSpec("j1", "a", (0, 0, 1.0), -1, 1, (0, 0, 0)),
                    JointSpec("j2", "a", (0, 1.0, 0), -1, 1, (0, 0, 0)),
                ),
            )

    def test_non_unit_axis_rejected(self):
        with pytest.raises(ValueError, match="axis norm"):
            JointSpec("j", "a", (0, 0, 2.0), -1, 1, (0, 0, 0))

    def test_limits_order_rejected(self):
        with pytest.raises(ValueError, match="q_min"):
            JointSpec("j", "a", (0, 0, 1.0), 1.0, 0.5, (0, 0, 0))
