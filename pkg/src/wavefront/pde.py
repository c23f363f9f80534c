"""Method-of-lines integration of the delayed reaction-diffusion system.

    u_t = D u_xx + f(u(x, t), u(x, t - tau))

Explicit Euler in time, centred second differences in space, Dirichlet
values clamped to the front limits at both ends.  The delayed state is
read from a ring buffer, linearly interpolated when tau/dt is fractional.
A travelling wave u = phi(x + c t) moves toward -x, so the measured speed
is minus the slope of the tracked crossing position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .engine import ModelSpec
from .errors import BlowUpError, ConfigurationError, TrackingError
from .perron import Profile

CFL = 0.4


@dataclass(frozen=True)
class SimConfig:
    x_left: float
    x_right: float
    dx: float
    dt: float
    T: float
    snapshot_every: float = 0.1
    boundary: str = "clamped"

    def __post_init__(self):
        if not (self.x_right > self.x_left and self.dx > 0 and self.dt > 0):
            raise ConfigurationError("need x_left < x_right and positive dx, dt")
        if not self.T > 0:
            raise ConfigurationError("final time T must be positive")
        if self.boundary != "clamped":
            raise ConfigurationError(f"unsupported boundary {self.boundary!r}")
        if self.snapshot_every < self.dt:
            raise ConfigurationError("snapshot interval shorter than the time step")

    @property
    def x(self) -> np.ndarray:
        m = int(round((self.x_right - self.x_left) / self.dx))
        return self.x_left + self.dx * np.arange(m + 1)

    def history_depth(self, tau: float) -> int:
        return int(math.floor(tau / self.dt + 1e-9)) + 2

    def check_cfl(self, D):
        limit = CFL * self.dx ** 2 / float(np.max(D))
        if self.dt > limit * (1 + 1e-12):
            raise ConfigurationError(f"dt={self.dt} violates dt <= {CFL} dx^2 / max D = {limit}")

    @classmethod
    def for_front(cls, width: float, c: float, T: float, dx: float = 0.05, margin: float = 40.0, D=1.0):
        """Window ahead of the front by c T + margin, with at least 4 widths overall."""
        left = -(c * T + max(margin, 4 * width))
        right = max(margin, 4 * width)
        left = dx * math.floor(left / dx)
        right = dx * math.ceil(right / dx)
        return cls(left, right, dx, CFL * dx * dx / float(np.max(D)), T)


@dataclass
class SimResult:
    times: np.ndarray
    x: np.ndarray
    snapshots: np.ndarray  # (n_snap, n, nx)
    front_positions: List[Tuple[float, float]]
    measured_speed: float = float("nan")
    speed_r2: float = float("nan")
    drift: Optional[float] = None


def transition_width(phi: Callable, K1: float, lo: float = -500.0, hi: float = 500.0) -> float:
    """Distance between the 0.1 K1 and 0.9 K1 crossings of the first component."""
    xs = np.linspace(lo, hi, 200001)
    v = phi(xs)[0]
    a = xs[np.argmax(v >= 0.1 * K1)]
    b = xs[np.argmax(v >= 0.9 * K1)]
    return float(b - a)


def crossing(x, v, level):
    j = int(np.argmax(v >= level))
    if v[j] < level or j < 2 or j > x.size - 3:
        raise TrackingError(f"level {level:.3g} crossing not inside the window")
    return float(x[j - 1] + (level - v[j - 1]) * (x[j] - x[j - 1]) / (v[j] - v[j - 1]))


def simulate(
    model: ModelSpec, initial: Profile, config: SimConfig, check_window: bool = True, track: bool = True
) -> SimResult:
    """Integrate from the travelling-wave history u(x, s) = phi(x + c s), s in [-tau, 0].

    track=False skips the level-crossing record (for data without a front).
    """
    config.check_cfl(model.D)
    phi = initial.evaluate
    K = model.K
    x = config.x
    if check_window:
        width = transition_width(phi, K[0])
        need = 4 * width + model.c * config.T
        if config.x_right - config.x_left < need:
            raise ConfigurationError(f"window {config.x_right - config.x_left:.4g} shorter than 4 widths + cT = {need:.4g}")
    n, nx, dt, dx = model.n, x.size, config.dt, config.dx
    left_bc = initial.tails.left_limit[:, None]
    right_bc = initial.tails.right_limit[:, None]
    q = model.tau / dt
    m = config.history_depth(model.tau)
    buf = np.empty((m, n, nx))
    for j in range(-(m - 1), 1):
        buf[j % m] = phi(x + model.c * j * dt)
    u = buf[0].copy()
    Dc = model.D[:, None] / dx ** 2
    steps = int(round(config.T / dt))
    every = max(1, int(round(config.snapshot_every / dt)))
    lo_band, hi_band = -0.1 * K[:, None], 1.1 * K[:, None]

    times, snaps, pos = [0.0], [u.copy()], []
    if track:
        pos.append((0.0, crossing(x, u[0], 0.5 * K[0])))
    lap = np.zeros_like(u)
    for step in range(1, steps + 1):
        s = (step - 1) - q
        j0 = math.floor(s + 1e-12)
        w = s - j0
        if q == 0:
            ud = u
        elif w < 1e-12:
            ud = buf[j0 % m]
        else:
            ud = (1 - w) * buf[j0 % m] + w * buf[(j0 + 1) % m]
        lap[:, 1:-1] = u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]
        u = u + dt * (Dc * lap + model.reaction(u, ud))
        u[:, :1] = left_bc
        u[:, -1:] = right_bc
        if np.any(u < lo_band) or np.any(u > hi_band):
            raise BlowUpError(f"solution left [-0.1K, 1.1K] at t={step * dt:.6g}")
        buf[step % m] = u
        if step % every == 0 or step == steps:
            t = step * dt
            times.append(t)
            snaps.append(u.copy())
            if track:
                pos.append((t, crossing(x, u[0], 0.5 * K[0])))
    res = SimResult(np.array(times), x, np.array(snaps), pos)
    if len(pos) >= 10:
        try:
            res.measured_speed, res.speed_r2 = front_speed(res)
        except ConfigurationError:
            pass
    return res


def fit_speed(times, positions) -> Tuple[float, float]:
    """Least-squares speed (minus the slope) and R^2 of the fit."""
    t = np.asarray(times, dtype=float)
    p = np.asarray(positions, dtype=float)
    if t.size < 10:
        raise ConfigurationError(f"need at least 10 front positions, got {t.size}")
    slope, icpt = np.polyfit(t, p, 1)
    ss_res = float(np.sum((p - (slope * t + icpt)) ** 2))
    ss_tot = float(np.sum((p - p.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-24 * max(1.0, float(np.sum(p * p))) else 1.0 - ss_res / ss_tot
    if r2 <= 0.999:
        raise ConfigurationError(f"front track is not linear enough: R^2 = {r2:.6f}")
    return -float(slope), r2


def front_speed(result: SimResult) -> Tuple[float, float]:
    t, p = zip(*result.front_positions)
    return fit_speed(t, p)


def profile_drift(result: SimResult, phi: Callable, c: float) -> float:
    """max over snapshots of |u(x, t) - phi(x + c t)|."""
    worst = 0.0
    for t, u in zip(result.times, result.snapshots):
        worst = max(worst, float(np.max(np.abs(u - phi(result.x + c * t)))))
    return worst


def manufactured_translation(phi: Callable, c: float, K1: float, config: SimConfig) -> SimResult:
    """Snapshots of the exact translate phi(x + c t); a check on the tracking and fit."""
    x = config.x
    steps = int(round(config.T / config.snapshot_every))
    times = np.linspace(0.0, steps * config.snapshot_every, steps + 1)
    snaps = np.array([phi(x + c * t) for t in times])
    pos = [(float(t), crossing(x, s[0], 0.5 * K1)) for t, s in zip(times, snaps)]
    res = SimResult(times, x, snaps, pos)
    res.measured_speed, res.speed_r2 = front_speed(res)
    return res
