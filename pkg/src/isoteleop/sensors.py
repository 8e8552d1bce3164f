"""Sensor and operator-motion simulation.

Encoder measurements pick up quantization, Gaussian noise, bias, and optional
magnetic-interference transients; MoCap references carry their own angular
noise and serve as evaluation ground truth. Sensor model parameters are in
degrees (the configuration surface); trajectories stay in radians.

Every stochastic operation is a pure function of (inputs, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import KinematicTree
from .trajectory import JointTrajectory, uniform_timestamps

DEFAULT_QUANT_STEP_DEG = 360.0 / 4096.0  # 12-bit magnetic encoder

CONSTANT = "constant"
SINGLE_JOINT_CYCLIC = "single_joint_cyclic"
MULTI_JOINT_DYNAMIC = "multi_joint_dynamic"
_KINDS = (CONSTANT, SINGLE_JOINT_CYCLIC, MULTI_JOINT_DYNAMIC)


@dataclass(frozen=True)
class InterferenceSpec:
    """Gaussian-shaped additive pulses from a moving magnet near the encoder."""

    amplitude_deg: float
    pulse_width_s: float
    pulse_times_s: tuple[float, ...]

    def __post_init__(self):
        if self.pulse_width_s <= 0:
            raise ValueError("pulse_width_s must be > 0")
        object.__setattr__(self, "pulse_times_s", tuple(float(t) for t in self.pulse_times_s))

    def waveform(self, times: np.ndarray) -> np.ndarray:
        out = np.zeros_like(times)
        for t_k in self.pulse_times_s:
            out += self.amplitude_deg * np.exp(-((times - t_k) ** 2) / (2.0 * self.pulse_width_s**2))
        return out


@dataclass(frozen=True)
class EncoderModel:
    quant_step_deg: float = DEFAULT_QUANT_STEP_DEG
    noise_sigma_deg: float = 0.0
    bias_deg: float = 0.0
    interference: InterferenceSpec | None = None

    def __post_init__(self):
        if self.quant_step_deg <= 0:
            raise ValueError("quant_step_deg must be > 0")
        if self.noise_sigma_deg < 0:
            raise ValueError("noise_sigma_deg must be >= 0")


@dataclass(frozen=True)
class MoCapModel:
    angular_noise_sigma_deg: float = 0.2
    positional_noise_sigma_m: float = 5e-4  # marker-level noise; not used on joint traces

    def __post_init__(self):
        if self.angular_noise_sigma_deg < 0 or self.positional_noise_sigma_m < 0:
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class TrajectoryProgram:
    """Operator motion program; per-joint fields accept a scalar, a sequence,
    or None for seeded/midrange defaults."""

    kind: str
    duration_s: float
    rate_hz: float
    joint: int | None = None  # driven joint for single_joint_cyclic
    amplitude: object = None  # radians
    frequency_hz: object = None
    phase: object = None  # radians
    center: object = None  # radians

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown program kind {self.kind!r}")
        if self.rate_hz <= 0 or self.duration_s <= 0:
            raise ValueError("rate_hz and duration_s must be > 0")
        if self.kind == SINGLE_JOINT_CYCLIC and self.joint is None:
            raise ValueError("single_joint_cyclic needs a driven joint index")


def _per_joint(value, default: np.ndarray) -> np.ndarray:
    if value is None:
        return default.copy()
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(default.shape, float(arr))
    if arr.shape != default.shape:
        raise ValueError(f"per-joint parameter has shape {arr.shape}, expected {default.shape}")
    return arr


def generate_trajectory(
    program: TrajectoryProgram, tree: KinematicTree, seed: int
) -> JointTrajectory:
    """Sample the program on a uniform clock, guaranteed within joint limits."""
    lo, hi = tree.joint_limits()
    n = tree.n_joints
    half = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0
    rng = np.random.default_rng(seed)

    center = _per_joint(program.center, mid)
    if program.kind == CONSTANT:
        amplitude = _per_joint(program.amplitude, np.zeros(n))
        frequency = _per_joint(program.frequency_hz, np.zeros(n))
        phase = _per_joint(program.phase, np.zeros(n))
        active = np.zeros(n, dtype=bool)
    elif program.kind == SINGLE_JOINT_CYCLIC:
        j = int(program.joint)
        if not 0 <= j < n:
            raise ValueError(f"driven joint {j} out of range for {n} joints")
        active = np.zeros(n, dtype=bool)
        active[j] = True
        amplitude = np.zeros(n)
        amplitude[j] = 0.8 * half[j] if program.amplitude is None else float(program.amplitude)
        frequency = np.zeros(n)
        frequency[j] = 0.5 if program.frequency_hz is None else float(program.frequency_hz)
        phase = np.zeros(n)
        phase[j] = 0.0 if program.phase is None else float(program.phase)
    else:  # multi_joint_dynamic
        active = np.ones(n, dtype=bool)
        amplitude = _per_joint(program.amplitude, 0.4 * half)
        frequency = _per_joint(program.frequency_hz, rng.uniform(0.25, 0.75, size=n))
        phase = _per_joint(program.phase, rng.uniform(0.0, 2.0 * np.pi, size=n))

    over = active & ((center + np.abs(amplitude) > hi) | (center - np.abs(amplitude) < lo))
    still = ~active & ((center > hi) | (center < lo))
    if np.any(over | still):
        bad = [tree.joints[i].name for i in np.flatnonzero(over | still)]
        raise ValueError(f"program exceeds joint limits at {bad}")

    t = uniform_timestamps(program.duration_s, program.rate_hz)
    values = center[None, :] + amplitude[None, :] * np.sin(
        2.0 * np.pi * frequency[None, :] * t[:, None] + phase[None, :]
    )
    values[:, ~active] = center[~active]
    return JointTrajectory(timestamps=t, values=values)


def _quantize(deg: np.ndarray, step: float) -> np.ndarray:
    return np.round(deg / step) * step


def simulate_encoder(truth: JointTrajectory, model: EncoderModel, seed: int) -> JointTrajectory:
    """Encoder readout: quantize(truth + bias + noise + interference)."""
    rng = np.random.default_rng(seed)
    deg = np.degrees(truth.values)
    deg = deg + model.bias_deg
    deg = deg + model.noise_sigma_deg * rng.standard_normal(deg.shape)
    if model.interference is not None:
        deg = deg + model.interference.waveform(truth.timestamps)[:, None]
    return truth.with_values(np.radians(_quantize(deg, model.quant_step_deg)))


def simulate_mocap(truth: JointTrajectory, model: MoCapModel, seed: int) -> JointTrajectory:
    """Optical reference: truth plus i.i.d. Gaussian angular noise."""
    rng = np.random.default_rng(seed)
    noise = np.radians(model.angular_noise_sigma_deg) * rng.standard_normal(truth.values.shape)
    return truth.with_values(truth.values + noise)


def inject_latency(traj: JointTrajectory, delay_s: float) -> JointTrajectory:
    """Delay the signal: output at t is the input at t - delay (linear interp).

    The region before the first available sample holds the first value. A
    delay that is a whole number of sample periods shifts sample-exactly,
    keeping the interior bit-identical to the input.
    """
    if delay_s < 0:
        raise ValueError("delay must be >= 0")
    if delay_s == 0:
        return traj
    if traj.n_samples >= 2:
        try:
            rate = traj.uniform_rate()
        except ValueError:
            rate = None
        if rate is not None:
            shift = delay_s * rate
            k = int(round(shift))
            if abs(shift - k) < 1e-9 and k < traj.n_samples:
                values = np.vstack([np.tile(traj.values[0], (k, 1)), traj.values[:-k or None]])
                return traj.with_values(values)
    return traj.with_values(traj.values_at(traj.timestamps - delay_s))
