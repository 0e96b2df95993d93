"""Free two-body relative motion on a periodic grid.

The dilation operator ``R = (qp + pq)/2`` splits states into incoming
(``<R> < 0``), outgoing (``<R> > 0``) and a thin ``Zero`` band of width
``tol_R``.  Under free motion ``d<R>/dt = <p^2>/m`` is constant and
positive, so ``<R>`` is affine in time and its zero crossing ``t0``
gives an operational time coordinate ``<T>(t) = t - t0``.

Propagation is exact: the packet is kept in momentum space and each sample
time gets the phase ``exp(-i hbar k^2 t / 2m)`` computed from ``t`` itself,
so there is no per-step error accumulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import (
    BandLimitExceeded,
    DimensionMismatch,
    GridTooSmall,
    InvalidParameter,
    NoCrossing,
    TagMismatch,
    ZeroAmplitude,
)
from ..reports import write_csv

TOL_R = 1e-9
NORM_TOL = 1e-10
TRAJECTORY_HEADER = ("t", "expect_R", "expect_T", "expect_q", "expect_p", "norm", "classification")


class Classification(str, Enum):
    IN = "In"
    ZERO = "Zero"
    OUT = "Out"


@dataclass(frozen=True)
class Grid:
    n: int = 1024
    length: float = 80.0

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise InvalidParameter(f"grid size must be a power of two, got {self.n}")
        if not self.length > 0:
            raise InvalidParameter("grid length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.length / 2 + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2 * math.pi * np.fft.fftfreq(self.n, self.dx)


@dataclass(frozen=True)
class TrajectoryTag:
    """Identifies one family of trajectories by its initial conditions."""

    x0: float
    p0: float
    sigma: float
    t0: float = 0.0


@dataclass(frozen=True, eq=False)
class Wavepacket:
    grid: Grid
    amplitudes: np.ndarray
    tag: TrajectoryTag
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.grid.n,):
            raise DimensionMismatch(f"expected {self.grid.n} amplitudes, got {amp.shape}")
        if abs(self.norm_of(amp) - 1) > NORM_TOL:
            raise InvalidParameter("wavepacket is not normalized")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def norm_of(self, amp: np.ndarray) -> float:
        return float(np.vdot(amp, amp).real * self.grid.dx)

    @property
    def norm(self) -> float:
        return self.norm_of(self.amplitudes)

    def with_amplitudes(self, amp: np.ndarray) -> Wavepacket:
        return Wavepacket(self.grid, amp, self.tag, self.mass, self.hbar)

    def apply_p(self, amp: np.ndarray | None = None) -> np.ndarray:
        amp = self.amplitudes if amp is None else amp
        return np.fft.ifft(self.hbar * self.grid.k * np.fft.fft(amp))

    def expect_q(self) -> float:
        return _expect_q(self.amplitudes, self.grid)

    def expect_p(self) -> float:
        return _expect_diag_k(self.amplitudes, self.hbar * self.grid.k, self.grid)

    def expect_p2(self) -> float:
        return _expect_diag_k(self.amplitudes, (self.hbar * self.grid.k) ** 2, self.grid)


def _expect_q(amp, grid):
    return float(np.sum(np.abs(amp) ** 2 * grid.x) * grid.dx)


def _expect_diag_k(amp, diag, grid):
    spec = np.fft.fft(amp)
    # Parseval: sum |psi|^2 dx = sum |fft psi|^2 dx / n
    return float(np.sum(np.abs(spec) ** 2 * diag) * grid.dx / grid.n)


def _expect_R(amp, grid, hbar):
    p_amp = np.fft.ifft(hbar * grid.k * np.fft.fft(amp))
    # q and p are Hermitian, so <(qp + pq)/2> = Re <psi| q p |psi>
    return float(np.real(np.vdot(amp, grid.x * p_amp)) * grid.dx)


def gaussian_packet(x0: float, p0: float, sigma: float, grid: Grid | None = None, *,
                    mass: float = 1.0, hbar: float = 1.0, t0: float = 0.0) -> Wavepacket:
    """Minimal-uncertainty packet centered at ``(x0, p0)`` with position width ``sigma``."""
    grid = grid or Grid()
    if not sigma > 0:
        raise InvalidParameter("sigma must be positive")
    if 6 * sigma >= grid.length:
        raise GridTooSmall(f"6 sigma = {6 * sigma} does not fit in L = {grid.length}")
    if abs(p0) >= math.pi * hbar / grid.dx:
        raise BandLimitExceeded(f"|p0| = {abs(p0)} beyond grid band limit {math.pi * hbar / grid.dx}")
    if mass <= 0 or hbar <= 0:
        raise InvalidParameter("mass and hbar must be positive")
    x = grid.x
    amp = (2 * math.pi * sigma**2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * p0 * x / hbar)
    amp = amp / math.sqrt(np.vdot(amp, amp).real * grid.dx)
    return Wavepacket(grid, amp, TrajectoryTag(float(x0), float(p0), float(sigma), float(t0)), mass, hbar)


def expect_R(psi: Wavepacket) -> float:
    return _expect_R(psi.amplitudes, psi.grid, psi.hbar)


def classify_value(r: float, tol_R: float = TOL_R) -> Classification:
    if r < -tol_R:
        return Classification.IN
    if r > tol_R:
        return Classification.OUT
    return Classification.ZERO


def classify(psi: Wavepacket, tol_R: float = TOL_R) -> Classification:
    return classify_value(expect_R(psi), tol_R)


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    expect_R: float
    expect_T: float
    expect_q: float
    expect_p: float
    norm: float
    classification: Classification


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    expect_R: np.ndarray
    expect_q: np.ndarray
    expect_p: np.ndarray
    norm: np.ndarray
    final: Wavepacket
    tol_R: float = TOL_R

    @property
    def classifications(self) -> list[Classification]:
        return [classify_value(r, self.tol_R) for r in self.expect_R]

    def points(self) -> list[TrajectoryPoint]:
        """Samples with ``expect_T`` filled in, NaN if ``<R>`` never changes sign."""
        try:
            T = time_expectation(self)
        except NoCrossing:
            T = np.full_like(self.t, np.nan)
        return [
            TrajectoryPoint(float(t), float(r), float(tt), float(q), float(p), float(n), c)
            for t, r, tt, q, p, n, c in zip(self.t, self.expect_R, T, self.expect_q,
                                            self.expect_p, self.norm, self.classifications)
        ]

    def rows(self):
        for pt in self.points():
            yield (pt.t, pt.expect_R, pt.expect_T, pt.expect_q, pt.expect_p, pt.norm, pt.classification.value)

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, TRAJECTORY_HEADER, self.rows())


def propagate(psi: Wavepacket, t: float) -> Wavepacket:
    k = psi.grid.k
    phase = np.exp(-1j * psi.hbar * k**2 * t / (2 * psi.mass))
    return psi.with_amplitudes(np.fft.ifft(np.fft.fft(psi.amplitudes) * phase))


def evolve_free(psi: Wavepacket, dt: float, steps: int, tol_R: float = TOL_R) -> Trajectory:
    """Sample the free evolution at ``t = 0, dt, ..., steps*dt`` (times relative to ``psi``)."""
    if not dt > 0:
        raise InvalidParameter("dt must be positive")
    if steps < 0:
        raise InvalidParameter("steps must be non-negative")
    grid = psi.grid
    k = grid.k
    spec0 = np.fft.fft(psi.amplitudes)
    times = dt * np.arange(steps + 1)
    R = np.empty(steps + 1)
    Q = np.empty(steps + 1)
    P = np.empty(steps + 1)
    norms = np.empty(steps + 1)
    p_diag = psi.hbar * k
    amp = psi.amplitudes
    for i, t in enumerate(times):
        spec = spec0 * np.exp(-1j * psi.hbar * k**2 * t / (2 * psi.mass))
        amp = np.fft.ifft(spec)
        p_amp = np.fft.ifft(p_diag * spec)
        R[i] = np.real(np.vdot(amp, grid.x * p_amp)) * grid.dx
        Q[i] = _expect_q(amp, grid)
        P[i] = float(np.sum(np.abs(spec) ** 2 * p_diag) * grid.dx / grid.n)
        norms[i] = float(np.vdot(amp, amp).real * grid.dx)
    return Trajectory(times, R, Q, P, norms, psi.with_amplitudes(amp), tol_R)


def zero_crossing(t: np.ndarray, r: np.ndarray) -> float:
    """First sign change of ``r`` located by linear interpolation."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    exact = np.flatnonzero(r == 0)
    change = np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)
    candidates = []
    if exact.size:
        candidates.append((exact[0], float(t[exact[0]])))
    if change.size:
        i = change[0]
        candidates.append((i, float(t[i] - r[i] * (t[i + 1] - t[i]) / (r[i + 1] - r[i]))))
    if not candidates:
        raise NoCrossing("<R> keeps one sign over the sampled window")
    return min(candidates)[1]


def time_expectation(trajectory: Trajectory) -> np.ndarray:
    """``<T>(t) = t - t0`` with ``t0`` the zero crossing of ``<R>``."""
    return trajectory.t - zero_crossing(trajectory.t, trajectory.expect_R)


def superpose(psi1: Wavepacket, psi2: Wavepacket, c1: complex = 1.0, c2: complex = 1.0) -> Wavepacket:
    """Renormalized ``c1 psi1 + c2 psi2``; only one trajectory family may be combined."""
    if psi1.tag != psi2.tag:
        raise TagMismatch(f"cannot superpose {psi1.tag} with {psi2.tag}")
    if psi1.grid != psi2.grid or psi1.mass != psi2.mass or psi1.hbar != psi2.hbar:
        raise DimensionMismatch("packets live on different grids or carry different constants")
    amp = c1 * psi1.amplitudes + c2 * psi2.amplitudes
    n = psi1.norm_of(amp)
    if n == 0:
        raise ZeroAmplitude("superposition vanishes identically")
    return psi1.with_amplitudes(amp / math.sqrt(n))
