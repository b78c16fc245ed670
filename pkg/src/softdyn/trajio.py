"""Ingestion of recorded marker-tracking data and drive-synchronous Poincare sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryGapError, ParseError, SchemaError
from .oscillator import DriveParams, Trajectory

__all__ = [
    "TrackedSeries",
    "PoincareMap",
    "load_tracked_csv",
    "fill_gaps",
    "resample_uniform",
    "poincare_sample",
]


@dataclass(frozen=True)
class TrackedSeries:
    """Possibly non-uniform marker positions; dropped frames carry valid=False."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "valid", np.asarray(self.valid, dtype=bool))
        if np.any(np.diff(self.t) <= 0):
            raise SchemaError("time must be strictly increasing")
        if int(self.valid.sum()) < 2:
            raise SchemaError("need at least 2 valid samples")

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class PoincareMap:
    """Tip positions sampled once per drive period at a fixed phase."""

    points: np.ndarray  # shape (n, 2)
    frequency: float
    phase_offset: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("Poincare points must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


def load_tracked_csv(path) -> TrackedSeries:
    """Parse the `t_s,x,y` schema; empty x or y cells mark dropped frames."""
    ts, xs, ys, valid = [], [], [], []
    last_t = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if lineno == 1 or (last_t is None and line.lower().startswith("t_s")):
                if line.lower().replace(" ", "") != "t_s,x,y":
                    raise ParseError(lineno, f"expected header 't_s,x,y', got {line!r}")
                continue
            cells = line.split(",")
            if len(cells) != 3:
                raise ParseError(lineno, f"expected 3 fields, got {len(cells)}")
            try:
                t = float(cells[0])
            except ValueError:
                raise ParseError(lineno, f"bad time value {cells[0]!r}") from None
            if last_t is not None and t <= last_t:
                raise SchemaError("time not strictly increasing", line=lineno)
            last_t = t
            ok = cells[1].strip() != "" and cells[2].strip() != ""
            try:
                x = float(cells[1]) if ok else np.nan
                y = float(cells[2]) if ok else np.nan
            except ValueError:
                raise ParseError(lineno, f"bad coordinate in {line!r}") from None
            ts.append(t)
            xs.append(x)
            ys.append(y)
            valid.append(ok)
    return TrackedSeries(t=np.array(ts), x=np.array(xs), y=np.array(ys), valid=np.array(valid))


def fill_gaps(series: TrackedSeries) -> TrackedSeries:
    """Replace interior invalid runs by linear interpolation between flanking valid samples."""
    if not series.valid[0] or not series.valid[-1]:
        raise BoundaryGapError("series must start and end with valid samples")
    if series.valid.all():
        return series
    tv = series.t[series.valid]
    x = np.interp(series.t, tv, series.x[series.valid])
    y = np.interp(series.t, tv, series.y[series.valid])
    return TrackedSeries(t=series.t, x=x, y=y, valid=np.ones(len(series), dtype=bool))


def resample_uniform(series: TrackedSeries, rate: float,
                     drive: DriveParams | None = None) -> Trajectory:
    """Linearly resample a gap-free series onto a uniform grid spanning its time range."""
    if not series.valid.all():
        raise ValueError("series must be gap-free; run fill_gaps first")
    span = series.t[-1] - series.t[0]
    n = int(np.floor(span * rate)) + 1
    if n < 2:
        raise ValueError("requested rate yields fewer than 2 samples over the input range")
    t = series.t[0] + np.arange(n) / rate
    x = np.interp(t, series.t, series.x)
    y = np.interp(t, series.t, series.y)
    if drive is not None:
        phase = np.mod(2 * np.pi * drive.frequency * t, 2 * np.pi)
    else:
        phase = np.zeros(n)
    return Trajectory(t=t, x=x, y=y, phase=phase, sample_rate=rate, provenance="recorded")


def poincare_sample(traj: Trajectory, drive: DriveParams, phase_offset: float = 0.0) -> PoincareMap:
    """Sample the trajectory once per drive period at drive phase `phase_offset`.

    Sampling instants are linearly interpolated between bracketing samples.
    """
    t0, t1 = traj.t[0], traj.t[-1]
    period = drive.period
    if t1 - t0 < 2 * period:
        raise ValueError("trajectory must cover at least 2 drive periods")
    # drive phase is 2*pi*f*t for simulated data; solve 2*pi*f*t = phase_offset (mod 2*pi)
    k0 = int(np.ceil((2 * np.pi * drive.frequency * t0 - phase_offset) / (2 * np.pi)))
    times = (phase_offset / (2 * np.pi) + np.arange(k0, k0 + int((t1 - t0) / period) + 2)) * period
    times = times[(times >= t0) & (times <= t1)]
    x = np.interp(times, traj.t, traj.x)
    y = np.interp(times, traj.t, traj.y)
    return PoincareMap(points=np.stack([x, y], axis=1), frequency=drive.frequency,
                       phase_offset=phase_offset)
