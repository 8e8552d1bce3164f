"""Mechanically isomorphic hand teleoperation toolkit.

Kinematic trees and forward kinematics, hand-spec fixtures, isomorphism
verification and the retargeting-free joint map, encoder/MoCap/latency
simulation, closed-loop teleoperation, precision metrics, and a validated
multimodal episode recording format.
"""

from .episodes import (
    CANONICAL_STREAMS,
    Episode,
    EpisodeMetadata,
    RawStream,
    Stream,
    StreamDescriptor,
    ValidationReport,
    crc32c,
    episodes_equal,
    read_episode,
    synchronize,
    validate_episode,
    write_episode,
)
from .handspec import (
    Diagnostic,
    HandSpecDocument,
    find_fixture,
    load_hand_file,
    parse_hand_spec,
    serialize_hand_spec,
)
from .isomorphism import (
    IsomorphismMap,
    IsomorphismReport,
    JointBijection,
    ToleranceSpec,
    apply_map,
    bijection_from_pairs,
    check_isomorphism,
    check_workspace_inclusion,
    estimate_alignment,
    load_joint_pairing,
)
from .kinematics import (
    JointSpec,
    KinematicTree,
    LinkSpec,
    Pose,
    batch_tip_positions,
    clamp_to_limits,
    fingertip_positions,
    forward_kinematics,
    scale_geometry,
)
from .metrics import (
    GLOVE_BASELINES,
    PrecisionReport,
    aligned_precision,
    build_summary,
    estimate_latency_xcorr,
    mae,
    maxae,
    precision,
    xcorr_lag,
)
from .sensors import (
    EncoderModel,
    InterferenceSpec,
    MoCapModel,
    TrajectoryProgram,
    generate_trajectory,
    inject_latency,
    simulate_encoder,
    simulate_mocap,
)
from .teleop import (
    ControllerGains,
    PlantModel,
    TeleopTrace,
    mapped_reference,
    run_teleop_session,
    track_joint,
)
from .trajectory import JointTrajectory, uniform_timestamps

__version__ = "0.1.0"
