"""Deterministic task signals: basic waveforms and the Mackey-Glass series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationDivergedError

__all__ = ["MGParams", "waveform", "mackey_glass", "series_to_csv", "series_from_csv"]

_WAVEFORMS = ("sine", "square", "sawtooth")


@dataclass(frozen=True)
class MGParams:
    """Parameters of the Mackey-Glass delay-differential equation.

        dx/dt = beta * x(t - tau) / (1 + x(t - tau)**n) - gamma * x(t)

    `history` is the constant value of x over [-tau, 0]; `stride` sets how
    many integration steps separate emitted samples (default one sample
    per time unit at dt = 0.1); `warmup` is the discarded lead-in time.
    """

    beta: float = 0.2
    gamma: float = 0.1
    tau: float = 17.0
    n: float = 10.0
    dt: float = 0.1
    history: float = 1.2
    n_points: int = 3000
    stride: int = 10
    warmup: float = 170.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.gamma <= 0 or self.dt <= 0 or self.tau <= 0:
            raise ValueError("gamma, tau and dt must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n_points <= 0 or self.stride <= 0:
            raise ValueError("n_points and stride must be positive")
        if self.warmup < 10 * self.tau:
            raise ValueError("warmup must cover at least 10 delay times")


def waveform(kind: str, n_points: int, period: float, amplitude: float = 1.0,
             phase: float = 0.0) -> np.ndarray:
    """Sample `n_points` of a unit-step sine/square/sawtooth wave.

    The sample index is the time variable: the sine is
    A*sin(2*pi*t/T + phi), the square its sign, and the sawtooth ramps
    from -A to A once per period with the same phase origin.
    """
    if kind not in _WAVEFORMS:
        raise ValueError(f"unknown waveform {kind!r}; expected one of {_WAVEFORMS}")
    if period < 4:
        raise ValueError("period must span at least 4 samples")
    t = np.arange(n_points, dtype=float)
    arg = t / period + phase / (2 * np.pi)
    if kind == "sine":
        return amplitude * np.sin(2 * np.pi * arg)
    if kind == "square":
        s = np.sign(np.sin(2 * np.pi * arg))
        s[s == 0] = 1.0  # zero crossings take the rising-edge value
        return amplitude * s
    return amplitude * (2.0 * np.mod(arg, 1.0) - 1.0)


def _mg_rhs(x, x_delay, p: MGParams):
    return p.beta * x_delay / (1.0 + x_delay ** p.n) - p.gamma * x


def mackey_glass(params: MGParams | None = None) -> np.ndarray:
    """Integrate the Mackey-Glass equation and return the emitted samples.

    Fixed-step RK4; the delayed state is read from the stored solution by
    cubic Hermite interpolation (exact lookup when tau is a multiple of
    dt).  The configured warmup is discarded before emitting `n_points`
    values spaced `stride` steps apart.
    """
    p = params if params is not None else MGParams()
    delay_steps = p.tau / p.dt
    warm_steps = int(round(p.warmup / p.dt))
    total_steps = warm_steps + p.n_points * p.stride
    n_hist = int(np.ceil(delay_steps)) + 1

    # solution and derivative on the step grid; indices [0, n_hist) hold
    # the constant pre-history on [-tau, 0], index n_hist - 1 is t = 0.
    x = np.empty(n_hist + total_steps)
    dx = np.empty_like(x)
    x[:n_hist] = p.history
    dx[:n_hist] = _mg_rhs(p.history, p.history, p)

    base = n_hist - 1  # grid index of t = 0

    def delayed(step_pos):
        """Interpolate x at grid position step_pos (in units of dt)."""
        if step_pos <= base:
            return p.history  # constant pre-history, exact
        i = int(np.floor(step_pos))
        s = step_pos - i
        if s == 0.0:
            return x[i]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        # tangents rescaled to the unit grid interval
        return (h00 * x[i] + h10 * p.dt * dx[i]
                + h01 * x[i + 1] + h11 * p.dt * dx[i + 1])

    for k in range(total_steps):
        xi = x[base + k]
        pos = base + k - delay_steps
        xd0 = delayed(pos)
        xd1 = delayed(pos + 0.5)
        xd2 = delayed(pos + 1.0)
        k1 = _mg_rhs(xi, xd0, p)
        k2 = _mg_rhs(xi + 0.5 * p.dt * k1, xd1, p)
        k3 = _mg_rhs(xi + 0.5 * p.dt * k2, xd1, p)
        k4 = _mg_rhs(xi + p.dt * k3, xd2, p)
        xn = xi + p.dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(xn):
            raise IntegrationDivergedError((k + 1) * p.dt)
        x[base + k + 1] = xn
        dx[base + k + 1] = _mg_rhs(xn, delayed(pos + 1.0), p)
    emitted = x[base + warm_steps::p.stride][:p.n_points]
    return emitted.copy()


def series_to_csv(series, path) -> None:
    """Write a series as `index,value` CSV."""
    with open(path, "w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(np.asarray(series, dtype=float)):
            fh.write(f"{i},{float(v)!r}\n")


def series_from_csv(path) -> np.ndarray:
    """Read a series written by `series_to_csv`."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim == 1:
        data = data.reshape(1, -1)
    return data[:, 1]
