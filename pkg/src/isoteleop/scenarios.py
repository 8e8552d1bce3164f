"""Scenario configuration and runners for the three evaluation protocols.

A scenario JSON names the motion program, sensor models, seeds, and fixture
files. Three kinds are supported:

  single_joint  one joint cycles; encoder readout vs MoCap reference
  multi_joint   all joints move; encoder readout vs MoCap reference
  teleop        whole pipeline through the mapped, delayed, tracked robot;
                mapped operator truth vs robot trajectory, latency-aligned

Sensor parameters in bundled scenarios are calibrated to land inside the
published precision bands; they are calibration targets, not measurements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import frames as frame_codec
from .episodes import Episode, EpisodeMetadata, RawStream, synchronize
from .handspec import find_fixture, load_hand_file
from .isomorphism import IsomorphismMap, bijection_from_pairs, estimate_alignment, load_joint_pairing
from .kinematics import KinematicTree
from .metrics import PrecisionReport, aligned_precision, precision
from .sensors import (
    EncoderModel,
    InterferenceSpec,
    MoCapModel,
    TrajectoryProgram,
    generate_trajectory,
    simulate_encoder,
    simulate_mocap,
)
from .teleop import ControllerGains, PlantModel, TeleopTrace, derive_seeds, mapped_reference, run_teleop_session
from .trajectory import JointTrajectory

SINGLE_JOINT = "single_joint"
MULTI_JOINT = "multi_joint"
TELEOP = "teleop"
_KINDS = (SINGLE_JOINT, MULTI_JOINT, TELEOP)

# summary-row key per scenario kind; the With-MI single-joint row is derived
# from the encoder model carrying an interference block
ROW_KEYS = {
    SINGLE_JOINT: ("single_joint_no_mi", "single_joint_with_mi"),
    MULTI_JOINT: "multi_joint",
    TELEOP: "teleoperation",
}


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    seed: int
    human_fixture: str
    program: TrajectoryProgram
    encoder: EncoderModel = EncoderModel()
    mocap: MoCapModel = MoCapModel()
    robot_fixture: str | None = None
    map_file: str | None = None
    latency_s: float = 0.0
    max_lag_s: float = 0.5
    plant: PlantModel = PlantModel()
    gains: ControllerGains = ControllerGains()
    task: str = "untitled"
    strategy: str = "other"

    @property
    def row_key(self) -> str:
        if self.kind == SINGLE_JOINT:
            no_mi, with_mi = ROW_KEYS[SINGLE_JOINT]
            return with_mi if self.encoder.interference is not None else no_mi
        return ROW_KEYS[self.kind]


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    seed: int
    report: PrecisionReport
    traces: dict[str, JointTrajectory]
    joint_names: tuple[str, ...]
    episode: Episode | None = None
    trace_obj: TeleopTrace | None = None
    unaligned_report: PrecisionReport | None = None


def _program_from_dict(data: dict) -> TrajectoryProgram:
    return TrajectoryProgram(
        kind=data["kind"],
        duration_s=float(data["duration_s"]),
        rate_hz=float(data.get("rate_hz", 30.0)),
        joint=data.get("joint"),
        amplitude=data.get("amplitude"),
        frequency_hz=data.get("frequency_hz"),
        phase=data.get("phase"),
        center=data.get("center"),
    )


def _encoder_from_dict(data: dict) -> EncoderModel:
    interference = None
    if data.get("interference"):
        block = data["interference"]
        interference = InterferenceSpec(
            amplitude_deg=float(block["amplitude_deg"]),
            pulse_width_s=float(block["pulse_width_s"]),
            pulse_times_s=tuple(float(t) for t in block["pulse_times_s"]),
        )
    return EncoderModel(
        quant_step_deg=float(data.get("quant_step_deg", EncoderModel().quant_step_deg)),
        noise_sigma_deg=float(data.get("noise_sigma_deg", 0.0)),
        bias_deg=float(data.get("bias_deg", 0.0)),
        interference=interference,
    )


def load_scenario(source: str | Path | dict) -> Scenario:
    """Load a scenario from a JSON file (or an already-parsed dict)."""
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text(encoding="utf-8"))
        default_name = Path(source).stem
    else:
        data = source
        default_name = "inline"
    kind = data["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown scenario kind {kind!r}")
    plant = PlantModel(**data["plant"]) if "plant" in data else PlantModel()
    gains = ControllerGains(**data["gains"]) if "gains" in data else ControllerGains()
    episode_block = data.get("episode", {})
    return Scenario(
        name=data.get("name", default_name),
        kind=kind,
        seed=int(data.get("seed", 0)),
        human_fixture=data["human_fixture"],
        robot_fixture=data.get("robot_fixture"),
        map_file=data.get("map"),
        program=_program_from_dict(data["program"]),
        encoder=_encoder_from_dict(data.get("encoder", {})),
        mocap=MoCapModel(
            angular_noise_sigma_deg=float(data.get("mocap", {}).get("angular_noise_sigma_deg", 0.2))
        ),
        latency_s=float(data.get("latency_s", 0.0)),
        max_lag_s=float(data.get("max_lag_s", 0.5)),
        plant=plant,
        gains=gains,
        task=episode_block.get("task", data.get("name", default_name)),
        strategy=episode_block.get("strategy", "other"),
    )


def _load_tree(fixture_name: str) -> KinematicTree:
    doc = load_hand_file(find_fixture(fixture_name))
    if doc.tree is None:
        errors = "; ".join(f"line {d.line}: {d.message}" for d in doc.diagnostics)
        raise ValueError(f"fixture {fixture_name!r} failed to parse: {errors}")
    return doc.tree


def load_alignment(
    human_fixture: str, robot_fixture: str, map_file: str
) -> tuple[KinematicTree, KinematicTree, IsomorphismMap]:
    """Load the fixture pair, build the declared bijection, estimate the map."""
    tree_h = _load_tree(human_fixture)
    tree_r = _load_tree(robot_fixture)
    pairs = load_joint_pairing(find_fixture(map_file))
    pi = bijection_from_pairs(pairs, tree_h, tree_r)
    return tree_h, tree_r, estimate_alignment(tree_h, tree_r, pi)


def _restrict(traj: JointTrajectory, joint: int) -> JointTrajectory:
    return JointTrajectory(timestamps=traj.timestamps, values=traj.values[:, [joint]])


def episode_from_trace(
    trace: TeleopTrace,
    metadata: EpisodeMetadata,
    sync_tolerance_s: float | None = None,
    interpolate_joints: bool = False,
) -> Episode:
    """Record a teleop trace as a synchronized multimodal episode.

    Proprioception is the tracked robot trajectory, the action stream is the
    encoder readout, and frame streams carry synthetic tick-stamped PNGs.
    """
    ts = trace.q_actual_r.timestamps
    count = ts.shape[0]
    raw = {
        "proprio_qr": RawStream(timestamps=ts, values=trace.q_actual_r.values),
        "action_qh": RawStream(timestamps=ts, values=trace.q_enc_h.values),
        "rgbd": RawStream(
            timestamps=ts, frames=[frame_codec.make_rgbd_frame(i) for i in range(count)]
        ),
    }
    for finger in range(4):
        raw[f"tactile_{finger}"] = RawStream(
            timestamps=ts,
            frames=[frame_codec.make_tactile_frame(finger, i) for i in range(count)],
        )
    return synchronize(
        raw,
        master_rate_hz=metadata.rate_hz,
        tolerance_s=sync_tolerance_s,
        metadata=metadata,
        interpolate_joints=interpolate_joints,
    )


def run_scenario(
    scenario: Scenario,
    seed: int | None = None,
    created: str = "",
    sync_tolerance_s: float | None = None,
    interpolate_joints: bool = False,
) -> ScenarioResult:
    """Run a scenario deterministically; `seed` overrides the configured one."""
    effective_seed = scenario.seed if seed is None else seed
    tree_h = _load_tree(scenario.human_fixture)
    names_h = tuple(j.name for j in tree_h.joints)

    if scenario.kind in (SINGLE_JOINT, MULTI_JOINT):
        seed_traj, seed_enc, seed_mocap = derive_seeds(effective_seed, 3)
        q_true = generate_trajectory(scenario.program, tree_h, seed_traj)
        q_enc = simulate_encoder(q_true, scenario.encoder, seed_enc)
        q_ref = simulate_mocap(q_true, scenario.mocap, seed_mocap)
        traces = {"q_true_h": q_true, "q_enc_h": q_enc, "q_mocap_h": q_ref}
        if scenario.kind == SINGLE_JOINT:
            j = int(scenario.program.joint)
            report = precision(
                _restrict(q_enc, j), _restrict(q_ref, j), joint_names=(names_h[j],)
            )
        else:
            report = precision(q_enc, q_ref, joint_names=names_h)
        return ScenarioResult(
            scenario=scenario,
            seed=effective_seed,
            report=report,
            traces=traces,
            joint_names=names_h,
        )

    # teleop
    if not (scenario.robot_fixture and scenario.map_file):
        raise ValueError("teleop scenario needs robot_fixture and map entries")
    tree_h, tree_r, iso = load_alignment(
        scenario.human_fixture, scenario.robot_fixture, scenario.map_file
    )
    trace = run_teleop_session(
        program=scenario.program,
        tree_h=tree_h,
        tree_r=tree_r,
        iso=iso,
        encoder=scenario.encoder,
        latency_s=scenario.latency_s,
        plant=scenario.plant,
        gains=scenario.gains,
        seed=effective_seed,
    )
    names_r = tuple(j.name for j in tree_r.joints)
    reference = mapped_reference(trace, iso)
    report = aligned_precision(reference, trace.q_actual_r, scenario.max_lag_s, names_r)
    unaligned = precision(reference, trace.q_actual_r, names_r)
    metadata = EpisodeMetadata(
        task=scenario.task,
        strategy=scenario.strategy,
        rate_hz=scenario.program.rate_hz,
        seed=effective_seed,
        human_fixture=scenario.human_fixture,
        robot_fixture=scenario.robot_fixture,
        created=created,
    )
    episode = episode_from_trace(
        trace, metadata, sync_tolerance_s=sync_tolerance_s, interpolate_joints=interpolate_joints
    )
    traces = {
        "q_true_h": trace.q_true_h,
        "q_enc_h": trace.q_enc_h,
        "q_cmd_r": trace.q_cmd_r,
        "q_actual_r": trace.q_actual_r,
    }
    return ScenarioResult(
        scenario=scenario,
        seed=effective_seed,
        report=report,
        traces=traces,
        joint_names=names_r,
        episode=episode,
        trace_obj=trace,
        unaligned_report=unaligned,
    )


def traces_to_csv(result: ScenarioResult) -> str:
    """Wide CSV of every trace group, one column per joint, full precision."""
    groups = result.traces
    first = next(iter(groups.values()))
    lines = []
    header = ["t"]
    for group, traj in groups.items():
        for j in range(traj.n_joints):
            header.append(f"{group}[{j}]")
    lines.append(",".join(header))
    for t_idx in range(first.n_samples):
        row = [repr(float(first.timestamps[t_idx]))]
        for traj in groups.values():
            row.extend(repr(float(v)) for v in traj.values[t_idx])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
