"""Discrete resonance block between a discretized In continuum and N out channels.

Layout of the generator (all blocks mutually orthogonal)::

    [ In continuum | Theta (N + 1 sites) | Out_1 | ... | Out_N ]

Theta site 0 is the doorway: it couples to every In mode with a flat
amplitude ``g_in`` and to each channel site ``c`` by the hopping ``omega``.
Channel site ``c`` couples to the modes of Out_c with flat amplitude ``g_c``.
The Theta block alone has a bright pair at ``+-omega sqrt(N)`` and
``N - 1`` dark states at 0.  Continuum bands are centered on the upper
bright level so the flat couplings produce no level shift.

Coupling strengths are parametrized by their golden-rule widths
``width = 2 pi g^2 / spacing``.  Evolution uses one Hermitian
eigendecomposition, so occupations are unitary to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch, InvalidParameter, NonHermitian
from ..reports import write_csv

MIN_MODES = 64


@dataclass(frozen=True)
class ResonanceParams:
    n_channels: int = 1
    hopping: float = 3.0
    width_in: float = 0.2
    widths_out: float | tuple[float, ...] = 0.2
    spacing: float = 0.04
    bandwidth: float = 16.0
    packet_width: float = 0.6
    arrival: float = 8.0
    coupling_scale: float = 1.0

    def out_widths(self) -> tuple[float, ...]:
        if isinstance(self.widths_out, (int, float)):
            return (float(self.widths_out),) * self.n_channels
        w = tuple(float(x) for x in self.widths_out)
        if len(w) != self.n_channels:
            raise DimensionMismatch(f"{len(w)} out widths for {self.n_channels} channels")
        return w

    @property
    def modes(self) -> int:
        return int(round(self.bandwidth / self.spacing))

    @property
    def bright_energy(self) -> float:
        return self.hopping * math.sqrt(self.n_channels)


@dataclass(frozen=True, eq=False)
class ResonanceSystem:
    H: np.ndarray
    n_channels: int
    modes: int
    mode_energies: np.ndarray
    params: ResonanceParams | None = None
    _eig: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        H = np.asarray(self.H)
        expected = self.modes * (self.n_channels + 1) + self.n_channels + 1
        if H.shape != (expected, expected):
            raise DimensionMismatch(f"generator shape {H.shape}, expected {expected}")
        if not np.allclose(H, H.conj().T, rtol=0, atol=1e-12):
            raise NonHermitian("resonance generator must be Hermitian")
        if self.modes < MIN_MODES:
            raise InvalidParameter(f"need at least {MIN_MODES} modes per continuum, got {self.modes}")

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def theta_dim(self) -> int:
        return self.n_channels + 1

    def block(self, name: str) -> slice:
        m, th = self.modes, self.theta_dim
        if name == "in":
            return slice(0, m)
        if name == "theta":
            return slice(m, m + th)
        if name.startswith("out_"):
            c = int(name[4:])
            if not 1 <= c <= self.n_channels:
                raise InvalidParameter(f"no channel {c}")
            start = m + th + (c - 1) * m
            return slice(start, start + m)
        raise InvalidParameter(f"unknown block {name!r}")

    def block_names(self) -> list[str]:
        return ["in", "theta"] + [f"out_{c}" for c in range(1, self.n_channels + 1)]

    def projector(self, name: str) -> np.ndarray:
        diag = np.zeros(self.dim)
        diag[self.block(name)] = 1.0
        return np.diag(diag)

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        if not self._eig:
            self._eig.extend(np.linalg.eigh(self.H))
        return self._eig[0], self._eig[1]


def _band(center: float, modes: int, spacing: float) -> np.ndarray:
    return center + spacing * (np.arange(modes) - (modes - 1) / 2)


def build_resonance(params: ResonanceParams = ResonanceParams()) -> ResonanceSystem:
    if params.n_channels < 1:
        raise InvalidParameter("need at least one out channel")
    if params.spacing <= 0 or params.bandwidth <= 0:
        raise InvalidParameter("spacing and bandwidth must be positive")
    widths = (params.width_in,) + params.out_widths()
    if any(w < 0 for w in widths):
        raise InvalidParameter("widths must be non-negative")
    m, nc = params.modes, params.n_channels
    th = nc + 1
    energies = _band(params.bright_energy, m, params.spacing)
    dim = m * (nc + 1) + th
    H = np.zeros((dim, dim))
    cont_starts = [0] + [m + th + c * m for c in range(nc)]
    for start in cont_starts:
        H[start:start + m, start:start + m] = np.diag(energies)
    theta0 = m
    for c in range(1, th):
        H[theta0, theta0 + c] = H[theta0 + c, theta0] = params.hopping
    # site attached to each continuum: doorway for In, channel site c for Out_c
    for site, start, width in zip(range(th), cont_starts, widths):
        g = params.coupling_scale * math.sqrt(width * params.spacing / (2 * math.pi))
        H[theta0 + site, start:start + m] = g
        H[start:start + m, theta0 + site] = g
    return ResonanceSystem(H, nc, m, energies, params)


def in_packet(system: ResonanceSystem, energy: float | None = None, width: float | None = None,
              arrival: float | None = None) -> np.ndarray:
    """Gaussian In-continuum state, energy spread ``width``, reaching the doorway at ``arrival``."""
    p = system.params or ResonanceParams()
    energy = p.bright_energy if energy is None else energy
    width = p.packet_width if width is None else width
    arrival = p.arrival if arrival is None else arrival
    if not width > 0:
        raise InvalidParameter("packet width must be positive")
    e = system.mode_energies
    psi = np.zeros(system.dim, dtype=complex)
    psi[system.block("in")] = np.exp(-((e - energy) ** 2) / (4 * width**2) + 1j * e * arrival)
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True, eq=False)
class ResonanceResult:
    t: np.ndarray
    P_in: np.ndarray
    P_theta: np.ndarray
    P_out: np.ndarray  # shape (n_t, n_channels)

    @property
    def total(self) -> np.ndarray:
        return self.P_in + self.P_theta + self.P_out.sum(axis=1)

    @property
    def branching(self) -> np.ndarray:
        final = self.P_out[-1]
        s = final.sum()
        return final / s if s > 0 else np.full_like(final, np.nan)

    def header(self) -> list[str]:
        return ["t", "P_in", "P_theta"] + [f"P_out_{c}" for c in range(1, self.P_out.shape[1] + 1)]

    def to_csv(self, path: str | Path) -> Path:
        rows = (
            (t, a, b, *c) for t, a, b, c in zip(self.t, self.P_in, self.P_theta, self.P_out)
        )
        return write_csv(path, self.header(), rows)


def resonance_evolve(system: ResonanceSystem, initial: np.ndarray, t_grid: Sequence[float]) -> ResonanceResult:
    psi0 = np.asarray(initial, dtype=complex)
    if psi0.shape != (system.dim,):
        raise DimensionMismatch(f"initial state has shape {psi0.shape}, expected ({system.dim},)")
    nrm = np.linalg.norm(psi0)
    if nrm == 0:
        raise InvalidParameter("initial state is zero")
    t = np.asarray(t_grid, dtype=float)
    w, v = system.eigensystem()
    coef = v.conj().T @ (psi0 / nrm)
    amps = v @ (coef[:, None] * np.exp(-1j * np.outer(w, t)))
    prob = np.abs(amps) ** 2
    P_in = prob[system.block("in")].sum(axis=0)
    P_theta = prob[system.block("theta")].sum(axis=0)
    P_out = np.stack(
        [prob[system.block(f"out_{c}")].sum(axis=0) for c in range(1, system.n_channels + 1)], axis=1
    )
    return ResonanceResult(t, P_in, P_theta, P_out)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    residual: float  # max relative deviation of exp(fit) from the data
    t_start: float
    t_end: float
    n_points: int


def decay_fit(t, p_theta, lo: float = 0.1, hi: float = 0.9) -> DecayFit:
    """Log-linear fit of ``p_theta`` on the decaying side between ``lo`` and ``hi`` of its peak."""
    t = np.asarray(t, dtype=float)
    p = np.asarray(p_theta, dtype=float)
    peak = int(np.argmax(p))
    pmax = p[peak]
    if not pmax > 0:
        raise InvalidParameter("occupation never rises above zero")
    tail = p[peak:]
    below = np.flatnonzero(tail < lo * pmax)
    end = peak + (below[0] if below.size else tail.size)
    idx = np.arange(peak, end)
    idx = idx[p[idx] <= hi * pmax]
    if idx.size < 3:
        raise InvalidParameter("decay window has fewer than 3 samples; extend or refine the time grid")
    slope, intercept = np.polyfit(t[idx], np.log(p[idx]), 1)
    fit = np.exp(intercept + slope * t[idx])
    residual = float(np.max(np.abs(fit / p[idx] - 1)))
    return DecayFit(float(-slope), float(intercept), residual, float(t[idx[0]]), float(t[idx[-1]]), int(idx.size))


def coupling_density(system: ResonanceSystem, site: int, block: str, energy: float,
                     window: float | None = None) -> float:
    """Box-window quadrature of ``sum_k |V_site,k|^2 delta(E - e_k)`` around ``energy``."""
    p = system.params
    spacing = p.spacing if p else float(np.diff(system.mode_energies).mean())
    window = 20 * spacing if window is None else window
    v = system.H[system.block("theta").start + site, system.block(block)]
    inside = np.abs(system.mode_energies - energy) < window / 2
    return float(np.sum(np.abs(v[inside]) ** 2) / window)


def golden_rule_rate(system: ResonanceSystem, energy: float | None = None, window: float | None = None) -> float:
    """Decay rate ``2 pi sum_site |<site|b>|^2 J_site(E_b)`` of the Theta eigenstate nearest ``energy``."""
    th = system.block("theta")
    h_theta = system.H[th, th]
    w, v = np.linalg.eigh(h_theta)
    if energy is None:
        energy = system.params.bright_energy if system.params else float(w[-1])
    k = int(np.argmin(np.abs(w - energy)))
    b, e_b = v[:, k], float(w[k])
    blocks = ["in"] + [f"out_{c}" for c in range(1, system.n_channels + 1)]
    return 2 * math.pi * sum(
        abs(b[site]) ** 2 * coupling_density(system, site, blk, e_b, window) for site, blk in enumerate(blocks)
    )
