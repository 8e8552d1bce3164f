"""Closed-loop teleoperation simulation.

Operator trajectory -> exoskeleton encoders -> linear joint map -> transport
latency -> per-joint PD-tracked servo plant -> robot trajectory. The plant is
a decoupled linear second-order system with torque and velocity saturation,
integrated with semi-implicit Euler at the servo command rate while the 30 Hz
observation-clock command is held (zero-order hold) between ticks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .isomorphism import IsomorphismMap, ToleranceSpec, apply_map, check_isomorphism
from .kinematics import KinematicTree
from .sensors import EncoderModel, TrajectoryProgram, generate_trajectory, inject_latency, simulate_encoder
from .trajectory import JointTrajectory


@dataclass(frozen=True)
class PlantModel:
    inertia: float = 1.0  # normalized
    damping: float = 1.0  # 1/s
    command_rate_hz: float = 1000.0
    torque_limit: float = 500.0  # normalized
    velocity_limit: float = 20.0  # rad/s

    def __post_init__(self):
        for name in ("inertia", "damping", "command_rate_hz", "torque_limit", "velocity_limit"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class ControllerGains:
    kp: float = 400.0  # 1/s^2; default critically damped pair with kd
    kd: float = 40.0  # 1/s

    def __post_init__(self):
        if self.kp <= 0:
            raise ValueError("kp must be > 0")
        if self.kd < 0:
            raise ValueError("kd must be >= 0")


@dataclass(frozen=True)
class TeleopTrace:
    """The four signals of a session, all on the observation clock."""

    q_true_h: JointTrajectory
    q_enc_h: JointTrajectory
    q_cmd_r: JointTrajectory  # mapped encoder command, delayed, limit-clamped
    q_actual_r: JointTrajectory
    configured_latency_s: float


def track_joint(
    target: JointTrajectory,
    plant: PlantModel = PlantModel(),
    gains: ControllerGains = ControllerGains(),
    initial_position: np.ndarray | None = None,
    initial_velocity: np.ndarray | None = None,
) -> JointTrajectory:
    """Track the target with the saturated PD plant; output on target timestamps.

    The initial state defaults to the first target sample at rest.
    """
    target.uniform_rate()  # raises on non-uniform timestamps
    ts = target.timestamps
    n = target.n_joints
    dt = 1.0 / plant.command_rate_hz
    t0, t_end = float(ts[0]), float(ts[-1])
    steps = int(np.ceil((t_end - t0) / dt))
    fine_t = t0 + np.arange(steps + 1) * dt

    # zero-order hold: command active during each fine step
    cmd_idx = np.searchsorted(ts, fine_t[:-1] + 1e-12, side="right") - 1
    cmd_idx = np.clip(cmd_idx, 0, len(ts) - 1)

    theta = target.values[0].copy() if initial_position is None else np.array(initial_position, dtype=float)
    omega = np.zeros(n) if initial_velocity is None else np.array(initial_velocity, dtype=float)
    trace = np.empty((steps + 1, n))
    trace[0] = theta
    for k in range(steps):
        cmd = target.values[cmd_idx[k]]
        torque = gains.kp * (cmd - theta) - gains.kd * omega
        torque = np.clip(torque, -plant.torque_limit, plant.torque_limit)
        omega = omega + dt * (torque - plant.damping * omega) / plant.inertia
        omega = np.clip(omega, -plant.velocity_limit, plant.velocity_limit)
        theta = theta + dt * omega
        trace[k + 1] = theta

    out = np.empty_like(target.values)
    for j in range(n):
        out[:, j] = np.interp(ts, fine_t, trace[:, j])
    return target.with_values(out)


def derive_seeds(seed: int, count: int) -> list[int]:
    """Stable child seeds for the stages of a seeded pipeline."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def run_teleop_session(
    program: TrajectoryProgram,
    tree_h: KinematicTree,
    tree_r: KinematicTree,
    iso: IsomorphismMap,
    encoder: EncoderModel,
    latency_s: float,
    plant: PlantModel = PlantModel(),
    gains: ControllerGains = ControllerGains(),
    seed: int = 0,
    tolerance: ToleranceSpec = ToleranceSpec(),
) -> TeleopTrace:
    """Run one whole-system session; deterministic given the seed.

    Commands are clamped to the robot's joint limits before dispatch, the
    range enforcement a real servo bus applies; with a passing isomorphism
    map this only trims encoder noise at the range boundary.
    """
    report = check_isomorphism(tree_h, tree_r, iso, tolerance)
    if not report.passed:
        raise ValueError("isomorphism check failed for the supplied tree pair and map")

    seed_traj, seed_enc = derive_seeds(seed, 2)
    q_true = generate_trajectory(program, tree_h, seed_traj)
    q_enc = simulate_encoder(q_true, encoder, seed_enc)

    mapped = q_enc.with_values(apply_map(iso, q_enc.values))
    delayed = inject_latency(mapped, latency_s)
    lo_r, hi_r = tree_r.joint_limits()
    q_cmd = delayed.with_values(np.clip(delayed.values, lo_r, hi_r))

    q_actual = track_joint(q_cmd, plant, gains)
    return TeleopTrace(
        q_true_h=q_true,
        q_enc_h=q_enc,
        q_cmd_r=q_cmd,
        q_actual_r=q_actual,
        configured_latency_s=latency_s,
    )


def mapped_reference(trace: TeleopTrace, iso: IsomorphismMap) -> JointTrajectory:
    """The operator's true motion expressed in robot joint order."""
    return trace.q_true_h.with_values(apply_map(iso, trace.q_true_h.values))
