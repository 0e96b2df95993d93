"""Truncated Fock-space operators, the exponential phase operator and its doubled space.

Everything lives in the number basis ``|0>, ..., |D-1>``.  The phase
operator is the lowering map with unit amplitudes, ``E|n> = |n-1>`` and
``E|0> = 0``, i.e. ``E = (N+1)^(-1/2) a``.  It is isometric on the
complement of the vacuum, ``E^dag E = 1 - |0><0|``.

The doubled space has basis ``|m>``, ``m = -D, ..., D-1``: the ``J = +1``
block holds ``m >= 0`` and the ``J = -1`` block holds ``m < 0``.  The cyclic
shift ``S|m> = |m-1>`` (with ``S|-D> = |D-1>``) is a permutation, hence
exactly unitary; its ``m = 0 -> m = -1`` entry links the two ground states.
Matrix index ``k`` corresponds to ``m = k - D``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BlockMixture, DimensionMismatch, InvalidParameter
from .reports import write_csv


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class TruncatedOscillator:
    dim: int
    omega: float
    a: np.ndarray
    a_dagger: np.ndarray
    N: np.ndarray
    H: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0

    @property
    def q(self) -> np.ndarray:
        return math.sqrt(self.hbar / (2 * self.mass * self.omega)) * (self.a + self.a_dagger)

    @property
    def p(self) -> np.ndarray:
        return 1j * math.sqrt(self.mass * self.omega * self.hbar / 2) * (self.a_dagger - self.a)

    @property
    def H_quadrature(self) -> np.ndarray:
        """``p^2/2m + m omega^2 q^2 / 2`` from the truncated quadratures.

        Agrees with ``H`` except in the last diagonal entry, where the
        truncated ``a a^dag`` loses its top term.
        """
        return 0.5 * self.omega * self.hbar * (self.a @ self.a_dagger + self.a_dagger @ self.a)


def build_oscillator(D: int, omega: float = 1.0, mass: float = 1.0, hbar: float = 1.0) -> TruncatedOscillator:
    if D < 3:
        raise InvalidParameter("oscillator truncation needs D >= 3")
    a = np.diag(np.sqrt(np.arange(1, D, dtype=float)), k=1).astype(complex)
    ad = a.conj().T.copy()
    N = np.diag(np.arange(D, dtype=float)).astype(complex)
    H = omega * hbar * (N + 0.5 * np.eye(D))
    return TruncatedOscillator(D, omega, _frozen(a), _frozen(ad), _frozen(N), _frozen(H), mass, hbar)


@dataclass(frozen=True)
class PhaseOperator:
    E: np.ndarray
    E_dagger: np.ndarray

    @property
    def dim(self) -> int:
        return self.E.shape[0]

    def isometry_defects(self) -> dict[str, float]:
        """Distances of ``E^dag E`` from ``1 - P0`` and of ``E E^dag`` from ``1 - P_{D-1}``."""
        d = self.dim
        eye = np.eye(d)
        p0 = np.zeros((d, d))
        p0[0, 0] = 1
        top = np.zeros((d, d))
        top[-1, -1] = 1
        return {
            "EdagE_minus_1_minus_P0": float(np.linalg.norm(self.E_dagger @ self.E - (eye - p0))),
            "EEdag_minus_1_minus_Ptop": float(np.linalg.norm(self.E @ self.E_dagger - (eye - top))),
            "EEdag_minus_1": float(np.linalg.norm(self.E @ self.E_dagger - eye)),
        }


def sg_phase(D: int) -> PhaseOperator:
    if D < 2:
        raise InvalidParameter("phase operator needs D >= 2")
    E = np.eye(D, k=1, dtype=complex)
    return PhaseOperator(_frozen(E), _frozen(E.conj().T.copy()))


def phase_from_ladder(osc: TruncatedOscillator) -> np.ndarray:
    """``(N+1)^(-1/2) a`` computed from the ladder matrices."""
    n = np.real(np.diag(osc.N))
    return np.diag(1.0 / np.sqrt(n + 1)) @ osc.a


def literal_exponent_form(osc: TruncatedOscillator) -> np.ndarray:
    """``(a a^dag + 1)^(+1/2) a``: the positive-exponent variant, which is not isometric."""
    w, v = np.linalg.eigh(osc.a @ osc.a_dagger + np.eye(osc.dim))
    return (v * np.sqrt(w)) @ v.conj().T @ osc.a


@dataclass(frozen=True)
class CommutatorReport:
    dim: int
    omega: float
    interior_lower: float
    interior_raise: float
    full_lower: float
    full_raise: float
    quadrature_interior_lower: float
    quadrature_full_lower: float
    ladder_interior: float
    ladder_full: float

    def rows(self):
        d = self.dim
        return [
            ("[H,E]+wE interior", self.interior_lower, d, "single"),
            ("[H,E+]-wE+ interior", self.interior_raise, d, "single"),
            ("[H,E]+wE full", self.full_lower, d, "single"),
            ("[H,E+]-wE+ full", self.full_raise, d, "single"),
            ("[Hq,E]+wE interior", self.quadrature_interior_lower, d, "single"),
            ("[Hq,E]+wE full", self.quadrature_full_lower, d, "single"),
            ("[a,a+]-1 interior", self.ladder_interior, d, "single"),
            ("[a,a+]-1 full", self.ladder_full, d, "single"),
        ]


def _interior(m: np.ndarray) -> np.ndarray:
    return m[:-1, :-1]


def commutator_report(osc: TruncatedOscillator, phase: PhaseOperator) -> CommutatorReport:
    """Frobenius norms of the phase-shift commutator defects.

    "Interior" keeps rows and columns ``n < D-1``.  With the exactly diagonal
    ``H`` both commutators close on the full matrix as well.  The defect
    at the truncation edge shows up in the quadrature-built Hamiltonian and
    in the ladder commutator, both reported here.
    """
    if osc.dim != phase.dim:
        raise DimensionMismatch(f"oscillator dim {osc.dim} != phase dim {phase.dim}")
    w = osc.omega * osc.hbar
    E, Ed = phase.E, phase.E_dagger

    def lower(H):
        return H @ E - E @ H + w * E

    def raise_(H):
        return H @ Ed - Ed @ H - w * Ed

    ladder = osc.a @ osc.a_dagger - osc.a_dagger @ osc.a - np.eye(osc.dim)
    norm = np.linalg.norm
    return CommutatorReport(
        dim=osc.dim,
        omega=osc.omega,
        interior_lower=float(norm(_interior(lower(osc.H)))),
        interior_raise=float(norm(_interior(raise_(osc.H)))),
        full_lower=float(norm(lower(osc.H))),
        full_raise=float(norm(raise_(osc.H))),
        quadrature_interior_lower=float(norm(_interior(lower(osc.H_quadrature)))),
        quadrature_full_lower=float(norm(lower(osc.H_quadrature))),
        ladder_interior=float(norm(_interior(ladder))),
        ladder_full=float(norm(ladder)),
    )


# --------------------------------------------------------------------------
# doubled space
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubledSpace:
    dim_per_block: int
    omega: float
    J: np.ndarray
    S: np.ndarray
    H2: np.ndarray

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.dim_per_block, self.dim_per_block)

    @property
    def energies(self) -> np.ndarray:
        return np.real(np.diag(self.H2))

    def index(self, m: int) -> int:
        if not -self.dim_per_block <= m < self.dim_per_block:
            raise InvalidParameter(f"level m={m} outside the doubled space")
        return m + self.dim_per_block

    def projector(self, block: int) -> np.ndarray:
        sign = np.sign(np.real(np.diag(self.J)))
        return np.diag((sign == block).astype(float))

    def evolution(self, t: float) -> np.ndarray:
        """``exp(-i H2 t)``, exact because ``H2`` is diagonal."""
        return np.diag(np.exp(-1j * self.energies * t))

    def evolve(self, state: np.ndarray, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(-1j * np.outer(t, self.energies)) * np.asarray(state)[None, :]


def build_doubled(D: int, omega: float = 1.0) -> DoubledSpace:
    if D < 2:
        raise InvalidParameter("doubled space needs D >= 2 levels per block")
    m = np.arange(-D, D)
    J = np.diag(np.where(m >= 0, 1.0, -1.0)).astype(complex)
    S = np.zeros((2 * D, 2 * D), dtype=complex)
    for k in range(1, 2 * D):
        S[k - 1, k] = 1.0
    S[2 * D - 1, 0] = 1.0  # wrap |-D> -> |D-1>: truncation artifact
    energies = np.where(m >= 0, omega * (m + 0.5), omega * (-m - 0.5))
    H2 = np.diag(energies).astype(complex)
    return DoubledSpace(D, omega, _frozen(J), _frozen(S), _frozen(H2))


def block_commutator_defects(space: DoubledSpace) -> dict[str, float]:
    """``[H2, S]`` against ``-omega S`` on m >= 1 columns and ``+omega S`` on m <= -1."""
    c = space.H2 @ space.S - space.S @ space.H2
    m = space.m_values
    plus = m >= 1
    minus = (m <= -1) & (m > -space.dim_per_block)  # drop the wrap column
    w = space.omega
    return {
        "plus": float(np.linalg.norm((c + w * space.S)[:, plus])),
        "minus": float(np.linalg.norm((c - w * space.S)[:, minus])),
    }


@dataclass(frozen=True)
class SuperselectionReport:
    leak_minus_from_plus: float
    leak_plus_from_minus: float
    max_roundtrip_defect: float


def superselection_check(space: DoubledSpace, t_grid) -> SuperselectionReport:
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(np.isfinite(t_grid)):
        raise InvalidParameter("time grid must be finite")
    pp, pm = space.projector(+1), space.projector(-1)
    eye = np.eye(2 * space.dim_per_block)
    a = b = r = 0.0
    for t in t_grid:
        u = space.evolution(t)
        a = max(a, float(np.linalg.norm(pm @ u @ pp, 2)))
        b = max(b, float(np.linalg.norm(pp @ u @ pm, 2)))
        r = max(r, float(np.linalg.norm(u @ space.evolution(-t) - eye, 2)))
    return SuperselectionReport(a, b, r)


def two_level_state(space: DoubledSpace, block: int, amplitudes=(1.0, 1.0)) -> np.ndarray:
    """Equal-weight superposition of the two lowest levels of one block.

    ``block = +1`` uses m = 0, 1; ``block = -1`` the mirror levels m = -1, -2.
    """
    if block not in (1, -1):
        raise InvalidParameter("block must be +1 or -1")
    levels = (0, 1) if block == 1 else (-1, -2)
    psi = np.zeros(2 * space.dim_per_block, dtype=complex)
    for m, c in zip(levels, amplitudes):
        psi[space.index(m)] = c
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class PhaseWinding:
    t: np.ndarray
    phase: np.ndarray
    slope: np.ndarray
    block: int

    @property
    def mean_slope(self) -> float:
        return float(np.mean(self.slope))


def phase_winding(space: DoubledSpace, initial, t_grid) -> PhaseWinding:
    """Unwrapped ``arg <psi(t)|S|psi(t)>`` for a state confined to one block.

    ``initial`` is either a block label (+1 or -1, giving
    :func:`two_level_state`) or an explicit state vector.  The slope is a
    finite difference of the unwrapped phase.
    """
    if isinstance(initial, (int, np.integer)):
        psi0 = two_level_state(space, int(initial))
    else:
        psi0 = np.asarray(initial, dtype=complex)
    weight_plus = float(np.linalg.norm(space.projector(+1) @ psi0))
    weight_minus = float(np.linalg.norm(space.projector(-1) @ psi0))
    if weight_plus > 0 and weight_minus > 0:
        raise BlockMixture("initial state has support in both J blocks")
    block = 1 if weight_plus > 0 else -1
    t = np.asarray(t_grid, dtype=float)
    states = space.evolve(psi0, t)
    expect = np.einsum("ti,ij,tj->t", states.conj(), space.S, states)
    phase = np.unwrap(np.angle(expect))
    slope = np.gradient(phase, t) if t.size > 1 else np.zeros(1)
    return PhaseWinding(t, phase, slope, block)


def matrix_triplets(m: np.ndarray):
    """Nonzero entries as ``(row, col, re, im)``."""
    rows, cols = np.nonzero(m)
    for r, c in zip(rows, cols):
        yield int(r), int(c), float(m[r, c].real), float(m[r, c].imag)


def export_matrix(m: np.ndarray, path: str | Path) -> Path:
    return write_csv(path, ["row", "col", "re", "im"], matrix_triplets(m))


def diagnostics_rows(D: int, omega: float = 1.0, t_max: float = 100.0, n_t: int = 201):
    """Rows ``(check, norm, dimension, block)`` covering every identity in this module."""
    osc = build_oscillator(max(D, 3), omega)
    ph = sg_phase(osc.dim)
    rows = [(name, value, ph.dim, "single") for name, value in ph.isometry_defects().items()]
    rows += commutator_report(osc, ph).rows()
    space = build_doubled(D, omega)
    eye = np.eye(2 * D)
    rows.append(("S unitary", float(np.linalg.norm(space.S.conj().T @ space.S - eye)), 2 * D, "both"))
    defects = block_commutator_defects(space)
    rows.append(("[H2,S]+wS", defects["plus"], 2 * D, "+1"))
    rows.append(("[H2,S]-wS", defects["minus"], 2 * D, "-1"))
    # t_max is in units of 1/omega
    t = np.linspace(-t_max, t_max, n_t) / (omega if omega else 1.0)
    sup = superselection_check(space, t)
    rows.append(("P- U P+", sup.leak_minus_from_plus, 2 * D, "+1"))
    rows.append(("P+ U P-", sup.leak_plus_from_minus, 2 * D, "-1"))
    rows.append(("U(t)U(-t)-1", sup.max_roundtrip_defect, 2 * D, "both"))
    return rows
