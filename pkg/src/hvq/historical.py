"""Closed-form early quantum formulas: blackbody laws, photoeffect, hydrogen levels, matter waves.

Every function takes a :class:`PhysicalConstants` (SI by default).  The
hydrogen formula is the Gaussian-units expression ``-2 pi^2 m e^4 / (h^2 n^2)``
times ``(1 / 4 pi eps0)^2``, where that Coulomb factor is 1 in Gaussian and
natural units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
import scipy.constants as sc

from .errors import InvalidParameter


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = sc.h
    c: float = sc.c
    k_B: float = sc.k
    m_e: float = sc.m_e
    e: float = sc.e
    epsilon_0: float = sc.epsilon_0
    units: str = "SI"

    def __post_init__(self):
        for name in ("h", "c", "k_B", "m_e", "e", "epsilon_0"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"constant {name} must be positive")
        if self.units not in ("SI", "gaussian"):
            raise InvalidParameter(f"units must be 'SI' or 'gaussian', got {self.units!r}")

    @property
    def hbar(self) -> float:
        return self.h / (2 * math.pi)

    @property
    def coulomb_factor(self) -> float:
        return 1 / (4 * math.pi * self.epsilon_0) if self.units == "SI" else 1.0

    def with_overrides(self, **kw) -> PhysicalConstants:
        return replace(self, **kw)


SI = PhysicalConstants()
NATURAL = PhysicalConstants(h=1.0, c=1.0, k_B=1.0, m_e=1.0, e=1.0, epsilon_0=1 / (4 * math.pi), units="gaussian")


def _positive(**kw):
    for name, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise InvalidParameter(f"{name} must be positive")


def _bose_factor(x):
    """``1 / (e^x - 1)`` written with ``e^-x`` so large ``x`` underflows instead of overflowing."""
    return np.exp(-x) / -np.expm1(-x)


def reduced_frequency(nu, T, const: PhysicalConstants = SI):
    """``x = h nu / (k_B T)``."""
    return const.h * np.asarray(nu, dtype=float) / (const.k_B * np.asarray(T, dtype=float))


def planck_density(nu, T, const: PhysicalConstants = SI):
    _positive(nu=nu, T=T)
    nu = np.asarray(nu, dtype=float)
    x = reduced_frequency(nu, T, const)
    return 8 * math.pi * const.h * nu**3 * _bose_factor(x) / const.c**3


def rayleigh_jeans(nu, T, const: PhysicalConstants = SI):
    _positive(nu=nu, T=T)
    nu = np.asarray(nu, dtype=float)
    return 8 * math.pi * nu**2 * const.k_B * np.asarray(T, dtype=float) / const.c**3


def wien(nu, T, a: float, b: float):
    _positive(a=a, b=b, T=T)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0):
        raise InvalidParameter("nu must be non-negative")
    return a * nu**3 * np.exp(-b * nu / np.asarray(T, dtype=float))


def wien_coefficients(const: PhysicalConstants = SI) -> tuple[float, float]:
    """``(a, b)`` for which the Wien law is the large-``x`` limit of the Planck law."""
    return 8 * math.pi * const.h / const.c**3, const.h / const.k_B


def planck_rj_ratio(x):
    """``x / (e^x - 1)``, the Planck to Rayleigh-Jeans ratio, with its limit 1 at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, safe / np.expm1(safe))


def avg_oscillator_energy(nu, T, const: PhysicalConstants = SI):
    _positive(nu=nu, T=T)
    return const.h * np.asarray(nu, dtype=float) * _bose_factor(reduced_frequency(nu, T, const))


def avg_oscillator_energy_sum(nu: float, T: float, terms: int = 200, const: PhysicalConstants = SI) -> float:
    """Mean of ``m h nu`` over Boltzmann populations ``exp(-m x)``, ``m < terms``."""
    _positive(nu=nu, T=T)
    if terms < 1:
        raise InvalidParameter("terms must be >= 1")
    x = float(reduced_frequency(nu, T, const))
    m = np.arange(terms)
    weights = np.exp(-m * x)
    return float(const.h * nu * np.dot(m, weights) / weights.sum())


def truncation_bound(nu: float, T: float, terms: int, const: PhysicalConstants = SI) -> float:
    """Upper bound on ``closed form - truncated sum`` (the difference is never negative)."""
    q = math.exp(-float(reduced_frequency(nu, T, const)))
    return const.h * nu * q**terms * (terms + q / (1 - q))


@dataclass(frozen=True)
class NoEmission:
    """Light below the photoelectric threshold ejects nothing."""

    frequency: float
    threshold_frequency: float


def photoelectron_energy(nu: float, work_function: float, const: PhysicalConstants = SI) -> float | NoEmission:
    _positive(nu=nu)
    if work_function < 0:
        raise InvalidParameter("work function must be non-negative")
    photon = const.h * nu
    if photon <= work_function:
        return NoEmission(nu, work_function / const.h)
    return photon - work_function


def _level_index(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameter(f"principal quantum number must be an integer >= 1, got {n!r}")
    return int(n)


def bohr_level(n: int, const: PhysicalConstants = SI) -> float:
    n = _level_index(n)
    k = const.coulomb_factor
    return -2 * math.pi**2 * const.m_e * const.e**4 * k**2 / (const.h**2 * n**2)


def emission_frequency(n: int, m: int, const: PhysicalConstants = SI) -> float:
    """Frequency emitted in the jump from level ``n`` down to level ``m``."""
    n, m = _level_index(n), _level_index(m)
    if n <= m:
        raise InvalidParameter("emission needs n > m")
    return (bohr_level(n, const) - bohr_level(m, const)) / const.h


def line_weight(n: int, m: int) -> Fraction:
    """Exact ``1/m^2 - 1/n^2``; emission frequencies are proportional to it."""
    n, m = _level_index(n), _level_index(m)
    if n <= m:
        raise InvalidParameter("emission needs n > m")
    return Fraction(1, m * m) - Fraction(1, n * n)


def de_broglie_wavelength(p, const: PhysicalConstants = SI):
    _positive(p=p)
    return const.h / np.asarray(p, dtype=float)


def duane_maxima(L: float, p: float, n_max: int | None = None, const: PhysicalConstants = SI) -> list[float]:
    """Deflection angles (radians) with ``sin(theta_n) = n h / (L p)`` up to the last physical order."""
    _positive(L=L, p=p)
    step = const.h / (L * p)
    angles = []
    n = 1
    while n_max is None or n <= n_max:
        s = n * step
        if s > 1 + 1e-12:
            break
        angles.append(math.asin(min(s, 1.0)))
        n += 1
    return angles


def boltzmann_entropy(w, const: PhysicalConstants = SI):
    _positive(w=w)
    return const.k_B * np.log(np.asarray(w, dtype=float))
