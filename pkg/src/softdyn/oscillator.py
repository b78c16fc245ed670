"""Reduced-order surrogate of the magnetic soft actuator.

Two coupled, damped, magnetically driven Duffing-type modal equations:

    q1'' = -2*z1*w1*q1' - w1^2*q1 - k1*q1^3 - chi*q1*q2^2 + mu1*B(t)*cos(q1) + eta*B(t)*sin(2*q1)
    q2'' = -2*z2*w2*q2' - w2^2*q2 - k2*q2^3 - chi*q2*q1^2 + mu2*B(t)*cos(q1) + eta*B(t)*sin(2*q1)

The cos(q1) factor models the torque of the drive field on a rotating
magnetic moment; the eta term models the actuator's interaction with its
own stray field.  Depending on drive amplitude and frequency the tip
motion is periodic, quasiperiodic or chaotic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import IntegrationDivergedError

__all__ = [
    "DriveParams",
    "OscillatorConfig",
    "Trajectory",
    "drive_field",
    "tip_position",
    "default_step",
    "simulate",
    "simulate_batch",
    "largest_lyapunov",
]

_STATE_BLOWUP = 1.0e6


@dataclass(frozen=True)
class DriveParams:
    """Sinusoidal AC drive field: amplitude in mT, frequency in Hz, in-plane tilt in degrees."""

    amplitude: float
    frequency: float
    tilt: float = 0.0
    waveform: str = "sine"

    def __post_init__(self):
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        if not -90.0 <= self.tilt <= 90.0:
            raise ValueError(f"tilt must be in [-90, 90] degrees, got {self.tilt}")
        if self.waveform != "sine":
            raise ValueError(f"only the 'sine' waveform is supported, got {self.waveform!r}")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


@dataclass(frozen=True)
class OscillatorConfig:
    """Modal parameters of the two-mode actuator surrogate.

    omega1/omega2 are modal angular frequencies (rad/s), zeta1/zeta2 damping
    ratios, kappa1/kappa2 cubic stiffnesses, chi the inter-mode coupling,
    mu1/mu2 the magneto-mechanical couplings (rad s^-2 mT^-1), eta the
    self-field coefficient, arm_length the display length scale and
    mode_mix the readout mixing weight.
    """

    omega1: float
    omega2: float
    zeta1: float
    zeta2: float
    kappa1: float
    kappa2: float
    chi: float
    mu1: float
    mu2: float
    eta: float
    arm_length: float = 1.0
    mode_mix: float = 0.2

    def __post_init__(self):
        for name in ("omega1", "omega2", "zeta1", "zeta2", "arm_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")

    @classmethod
    def calibrated_default(cls) -> "OscillatorConfig":
        """Default constants fixed by the scripted scan in scripts/calibrate.py.

        On the f in [1, 20] Hz x A in [0.5, 9] mT grid this set produces
        periodic response in the low-f/low-A corner and a chaotic band
        around 14-18 Hz at 4-9 mT.
        """
        return cls(
            omega1=2 * math.pi * 10.0,
            omega2=2 * math.pi * 16.2,
            zeta1=0.02,
            zeta2=0.02,
            kappa1=5.0e4,
            kappa2=5.0e4,
            chi=3.0e4,
            mu1=2500.0,
            mu2=900.0,
            eta=600.0,
        )

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "OscillatorConfig":
        with open(path) as fh:
            return cls(**json.load(fh))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled tip trajectory; the common currency of all pipelines."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    phase: np.ndarray
    sample_rate: float
    provenance: str = "simulated"

    def __post_init__(self):
        for name in ("t", "x", "y", "phase"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.phase) == n):
            raise ValueError("t, x, y, phase must have equal length")
        if n >= 2:
            steps = np.diff(self.t)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
                raise ValueError("t must be strictly increasing with a constant step")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def to_csv(self, path) -> None:
        data = np.column_stack([self.t, self.x, self.y, self.phase])
        np.savetxt(path, data, fmt="%.17g", delimiter=",",
                   header="t_s,x,y,phase", comments="")

    @classmethod
    def from_csv(cls, path, provenance: str = "recorded") -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t = data[:, 0]
        rate = 1.0 / (t[1] - t[0]) if len(t) >= 2 else 1.0
        return cls(t=t, x=data[:, 1], y=data[:, 2], phase=data[:, 3],
                   sample_rate=rate, provenance=provenance)


def drive_field(params: DriveParams, t) -> np.ndarray:
    """In-plane field vector (mT) at time(s) t: B(t) = A*sin(2*pi*f*t) along the tilt direction."""
    b = params.amplitude * np.sin(2 * np.pi * params.frequency * np.asarray(t, dtype=float))
    tilt = math.radians(params.tilt)
    return np.stack([b * math.cos(tilt), b * math.sin(tilt)], axis=-1)


def tip_position(q1, q2, config: OscillatorConfig):
    """Map modal coordinates to marker coordinates on the arm arc."""
    angle = np.asarray(q1) + config.mode_mix * np.asarray(q2)
    return config.arm_length * np.sin(angle), config.arm_length * (1.0 - np.cos(angle))


def _rhs(state: np.ndarray, b: float, c: OscillatorConfig) -> np.ndarray:
    """Modal equations of motion; state has shape (4, ...) = (q1, u1, q2, u2)."""
    q1, u1, q2, u2 = state
    cos_q1 = np.cos(q1)
    self_field = np.sin(2.0 * q1)
    a1 = (-2 * c.zeta1 * c.omega1 * u1 - c.omega1**2 * q1 - c.kappa1 * q1**3
          - c.chi * q1 * q2**2 + c.mu1 * b * cos_q1 + c.eta * b * self_field)
    a2 = (-2 * c.zeta2 * c.omega2 * u2 - c.omega2**2 * q2 - c.kappa2 * q2**3
          - c.chi * q2 * q1**2 + c.mu2 * b * cos_q1 + c.eta * b * self_field)
    return np.stack([u1, a1, u2, a2])

def _axial_amplitude(drive: DriveParams) -> float:
    # Only the along-axis component torques the moment; tilt reduces it.
    return drive.amplitude * math.cos(math.radians(drive.tilt))


def _rk4_steps(config, drive, state, t0, n_steps, dt, record=None):
    """Advance `state` (shape (4, B)) n_steps with classical RK4.

    `record`, when given, is a callable invoked as record(i, state) after
    each step.  Raises IntegrationDivergedError on non-finite state.
    """
    a = _axial_amplitude(drive)
    w = 2 * np.pi * drive.frequency
    t = t0
    check_every = max(1, n_steps // 256)
    for i in range(n_steps):
        b1 = a * math.sin(w * t)
        bm = a * math.sin(w * (t + 0.5 * dt))
        b2 = a * math.sin(w * (t + dt))
        k1 = _rhs(state, b1, config)
        k2 = _rhs(state + (0.5 * dt) * k1, bm, config)
        k3 = _rhs(state + (0.5 * dt) * k2, bm, config)
        k4 = _rhs(state + dt * k3, b2, config)
        state = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * dt
        if i % check_every == 0 or i == n_steps - 1:
            if not np.all(np.isfinite(state)) or np.max(np.abs(state)) > _STATE_BLOWUP:
                raise IntegrationDivergedError(t)
        if record is not None:
            record(i, state)
    return state


def _validate_step(drive: DriveParams, duration: float, dt: float) -> None:
    if dt > 1.0 / (50.0 * drive.frequency) + 1e-15:
        raise ValueError(f"dt = {dt} too coarse; need dt <= 1/(50*f) = {1.0 / (50 * drive.frequency):.6g}")
    if duration < 2.0 * drive.period:
        raise ValueError(f"duration = {duration} shorter than 2 drive periods")


def simulate_batch(config: OscillatorConfig, drive: DriveParams, duration: float,
                   dt: float, initial_states: np.ndarray, noise_sigma: float = 0.0,
                   seed: int | None = None) -> list[Trajectory]:
    """Integrate a batch of initial states (B, 4) under one drive; returns one Trajectory per row."""
    _validate_step(drive, duration, dt)
    states = np.asarray(initial_states, dtype=float)
    if states.ndim != 2 or states.shape[1] != 4:
        raise ValueError("initial_states must have shape (B, 4)")
    n = int(duration / dt)
    batch = states.shape[0]
    qs = np.empty((n, 2, batch))

    def record(i, s):
        qs[i, 0] = s[0]
        qs[i, 1] = s[2]

    _rk4_steps(config, drive, states.T.copy(), 0.0, n, dt, record)
    t = np.arange(1, n + 1) * dt
    phase = np.mod(2 * np.pi * drive.frequency * t, 2 * np.pi)
    x, y = tip_position(qs[:, 0], qs[:, 1], config)
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        x = x + rng.normal(0.0, noise_sigma, x.shape)
        y = y + rng.normal(0.0, noise_sigma, y.shape)
    return [Trajectory(t=t, x=x[:, j], y=y[:, j], phase=phase,
                       sample_rate=1.0 / dt, provenance="simulated")
            for j in range(batch)]


def default_step(config: OscillatorConfig, drive: DriveParams) -> float:
    """Step giving 60 substeps per period of the fastest timescale.

    At drive frequencies below the actuator's natural modes the step must
    resolve the free response, not just the drive, or the integrator goes
    unstable at large amplitudes.
    """
    f_fast = max(drive.frequency, config.omega1 / (2 * math.pi),
                 config.omega2 / (2 * math.pi))
    return 1.0 / (60.0 * f_fast)


def simulate(config: OscillatorConfig, drive: DriveParams, duration: float, dt: float,
             initial_state=(0.05, 0.0, 0.02, 0.0), noise_sigma: float = 0.0,
             seed: int | None = None) -> Trajectory:
    """Simulate the driven actuator and return the tip trajectory.

    Deterministic for identical inputs; optional seeded Gaussian position
    noise models measurement error (off by default).
    """
    return simulate_batch(config, drive, duration, dt,
                          np.asarray(initial_state, float)[None, :],
                          noise_sigma=noise_sigma, seed=seed)[0]


def largest_lyapunov(config: OscillatorConfig, drive: DriveParams, duration: float,
                     dt: float, d0: float = 1e-8, transient_periods: int = 50,
                     initial_state=(0.05, 0.0, 0.02, 0.0), with_stderr: bool = False):
    """Benettin two-trajectory estimate of the largest Lyapunov exponent (1/s).

    A reference and a perturbed trajectory are integrated together; the
    separation is renormalized to d0 once per drive period and the mean
    log stretching rate is returned.  With `with_stderr` the standard
    error of the per-period stretching rates is returned as well, which
    serves as the estimator tolerance for sign classification.
    """
    periods = int(duration * drive.frequency)
    if periods < 200:
        raise ValueError("duration must cover at least 200 drive periods")
    steps = max(1, int(round(drive.period / dt)))
    dt = drive.period / steps
    _validate_step(drive, duration, dt)

    state = np.asarray(initial_state, float)[:, None].repeat(2, axis=1)
    state = _rk4_steps(config, drive, state, 0.0, transient_periods * steps, dt)
    state[:, 1] = state[:, 0]
    state[0, 1] += d0
    t = transient_periods * drive.period
    rates = np.empty(periods)
    for i in range(periods):
        state = _rk4_steps(config, drive, state, t, steps, dt)
        t += drive.period
        delta = state[:, 1] - state[:, 0]
        dist = float(np.linalg.norm(delta))
        if dist == 0.0:
            dist = np.finfo(float).tiny
        rates[i] = math.log(dist / d0) / drive.period
        state[:, 1] = state[:, 0] + delta * (d0 / dist)
    exponent = float(rates.mean())
    if with_stderr:
        return exponent, float(rates.std(ddof=1) / math.sqrt(periods))
    return exponent
