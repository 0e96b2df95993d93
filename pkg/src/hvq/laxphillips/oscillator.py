"""Phase trajectory of a coherent oscillator state in a truncated Fock space.

The state is propagated exactly in the number basis (``H`` is diagonal) and
the centroid ``(<q>, <p>)`` is read off with the truncated quadratures.  The
phase angle is ``atan2(-<p>/(m omega), <q>)``, unwrapped, which grows as
``omega t``; ``tan(phase/2)`` then sweeps from ``-inf`` to ``+inf`` once
per period.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from ..errors import InvalidParameter, ZeroAmplitude
from ..fock_phase import build_oscillator
from ..reports import write_csv

HEADER = ("t", "expect_q", "expect_p", "phase", "tan_half_phase")


@dataclass(frozen=True, eq=False)
class OscillatorTrajectory:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    phase: np.ndarray
    omega: float
    dim: int

    @property
    def tan_half(self) -> np.ndarray:
        return np.tan(self.phase / 2)

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, HEADER, zip(self.t, self.q, self.p, self.phase, self.tan_half))


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    if alpha == 0:
        raise ZeroAmplitude("coherent amplitude must be nonzero")
    n = np.arange(dim)
    log_mag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    c = np.exp(log_mag - abs(alpha) ** 2 / 2) * np.exp(1j * n * np.angle(alpha))
    return c / np.linalg.norm(c)


def default_dim(alpha: complex) -> int:
    # Poisson number distribution: mean |alpha|^2, width |alpha|
    r = abs(alpha)
    return max(32, int(math.ceil(r * r + 12 * r + 40)))


def oscillator_trajectory(omega: float, q0: float, p0: float, t_grid, *, mass: float = 1.0,
                          hbar: float = 1.0, dim: int | None = None) -> OscillatorTrajectory:
    if not omega > 0 or not mass > 0 or not hbar > 0:
        raise InvalidParameter("omega, mass and hbar must be positive")
    if q0 == 0 and p0 == 0:
        raise ZeroAmplitude("phase is undefined at the origin of phase space")
    alpha = math.sqrt(mass * omega / (2 * hbar)) * complex(q0, p0 / (mass * omega))
    dim = dim or default_dim(alpha)
    osc = build_oscillator(dim, omega, mass, hbar)
    c0 = coherent_amplitudes(alpha, dim)
    t = np.asarray(t_grid, dtype=float)
    energies = np.diag(osc.H).real / hbar
    states = c0[None, :] * np.exp(-1j * np.outer(t, energies))
    q = np.einsum("ti,ij,tj->t", states.conj(), osc.q, states).real
    p = np.einsum("ti,ij,tj->t", states.conj(), osc.p, states).real
    phase = np.unwrap(np.arctan2(-p / (mass * omega), q))
    return OscillatorTrajectory(t, q, p, phase, omega, dim)


def monotone_branches(values: np.ndarray) -> list[np.ndarray]:
    """Split a ``tan(phase/2)`` series at its poles (jumps from large positive to negative)."""
    breaks = np.flatnonzero(np.diff(values) < 0) + 1
    return np.split(values, breaks)
