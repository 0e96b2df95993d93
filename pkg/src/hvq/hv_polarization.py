"""Hidden-variable model of photon transmission through a polarizer pair.

A single polarizer is described by a transmission curve ``p1(lam)`` on a
uniform, pi-periodic grid of ``lam`` in [-pi/2, pi/2). Under the
hidden-variable picture the two-polarizer (or coincidence) transmission is
the circular autocorrelation of ``p1`` with uniform polarization density
``1/pi``::

    A(alpha) = (1/pi) * integral p1(lam) p1(lam - alpha) dlam

which is compared, after normalization by ``A(0)``, with the generalized
Malus law ``M(alpha) = (1 - eps) cos^2(alpha) + eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameter, ZeroAtOrigin
from .reports import write_csv, write_summary

DEFAULT_GRID = 360
#: Smallest Malus offset that a nonnegative p1 reproduces exactly after
#: A(0)-normalization (see :func:`fourier_feasibility`).
MIN_EPSILON_EXACT = 1.0 / 3.0


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ResponseCurve:
    """Single-polarizer transmission probabilities on midpoint nodes.

    Node ``i`` sits at ``-pi/2 + (i + 1/2) * pi / grid_size``.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.ndim != 1 or v.size == 0:
            raise InvalidParameter("response values must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
            raise InvalidParameter("transmission probabilities must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        return math.pi / self.grid_size

    @property
    def nodes(self) -> np.ndarray:
        return -math.pi / 2 + (np.arange(self.grid_size) + 0.5) * self.spacing

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], grid_size: int = DEFAULT_GRID):
        nodes = -math.pi / 2 + (np.arange(grid_size) + 0.5) * math.pi / grid_size
        return cls(np.asarray(func(nodes), dtype=float))

    @classmethod
    def cos2(cls, grid_size: int = DEFAULT_GRID) -> "ResponseCurve":
        return cls.from_function(lambda lam: np.cos(lam) ** 2, grid_size)

    @classmethod
    def constant(cls, c: float, grid_size: int = DEFAULT_GRID) -> "ResponseCurve":
        return cls(np.full(grid_size, float(c)))

    def at(self, angle):
        """Nearest-node lookup of ``p1`` at arbitrary angles (pi-periodic)."""
        x = np.mod(np.asarray(angle, dtype=float) + math.pi / 2, math.pi)
        idx = np.floor(x / self.spacing).astype(np.int64) % self.grid_size
        return self.values[idx]

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ["lambda_or_alpha", "value"], zip(self.nodes, self.values))


@dataclass(frozen=True)
class CoincidenceCurve:
    """Autocorrelation ``A`` on the lag grid ``alpha_k = k * pi / N``.

    Angles run over ``k = -N//2, ..., N - N//2 - 1`` so that ``alpha = 0``
    sits at index ``N // 2``.  ``normalized`` is ``None`` when ``A(0) == 0``.
    """

    raw: np.ndarray
    normalized: np.ndarray | None

    @property
    def grid_size(self) -> int:
        return self.raw.size

    @property
    def angles(self) -> np.ndarray:
        n = self.grid_size
        return (np.arange(n) - n // 2) * (math.pi / n)

    @property
    def zero_index(self) -> int:
        return self.grid_size // 2

    def to_csv(self, path: str | Path, which: str = "normalized") -> Path:
        data = self.normalized if which == "normalized" else self.raw
        if data is None:
            raise ZeroAtOrigin("no normalized curve: A(0) = 0")
        return write_csv(path, ["lambda_or_alpha", "value"], zip(self.angles, data))


@dataclass(frozen=True)
class MalusTarget:
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidParameter(f"Malus offset must lie in [0, 1), got {self.epsilon}")

    def __call__(self, alpha):
        return malus(alpha, self)


@dataclass(frozen=True)
class FeasibilityReport:
    c0: float
    c1: float
    ratio: float
    feasible_exact: bool
    min_epsilon_exact: float = MIN_EPSILON_EXACT


@dataclass
class FitReport:
    fitted: ResponseCurve
    sup_residual: float
    l2_residual: float
    iterations: int
    feasibility_bound: float
    objective: float = float("nan")
    converged: bool = False
    target: MalusTarget = field(default_factory=MalusTarget)

    def to_csv(self, path: str | Path) -> Path:
        return self.fitted.to_csv(path)

    def write_summary(self, path: str | Path) -> Path:
        return write_summary(
            path,
            {
                "epsilon": self.target.epsilon,
                "grid_size": self.fitted.grid_size,
                "sup_residual": self.sup_residual,
                "l2_residual": self.l2_residual,
                "objective": self.objective,
                "iterations": self.iterations,
                "converged": self.converged,
                "feasibility_bound": self.feasibility_bound,
            },
        )


@dataclass(frozen=True)
class MismatchReport:
    max_deviation: float
    at_angle: float


# --------------------------------------------------------------------------
# forward model
# --------------------------------------------------------------------------


def _lag_autocorrelation(p: np.ndarray) -> np.ndarray:
    """A at lags j = 0..N-1 (FFT order): (1/N) sum_i p_i p_{i-j}."""
    spec = np.fft.rfft(p)
    return np.fft.irfft(spec * spec.conj(), n=p.size) / p.size


def _to_angle_order(lagged: np.ndarray) -> np.ndarray:
    return np.roll(lagged, lagged.size // 2)


def autocorrelate(p1: ResponseCurve, normalize: bool = True) -> CoincidenceCurve:
    """Coincidence transmission for a common-polarization photon pair."""
    if p1.grid_size < 4:
        raise InvalidParameter("grid_size must be at least 4")
    raw = _to_angle_order(_lag_autocorrelation(p1.values))
    # lag 0 directly: avoids FFT roundoff in the normalizer
    a0 = float(np.dot(p1.values, p1.values)) / p1.grid_size
    raw[raw.size // 2] = a0
    if a0 == 0.0:
        if normalize:
            raise ZeroAtOrigin("A(0) = 0: all-zero response cannot be normalized")
        return CoincidenceCurve(raw, None)
    return CoincidenceCurve(raw, raw / a0)


def malus(alpha, target: MalusTarget | float = 0.0):
    eps = target.epsilon if isinstance(target, MalusTarget) else float(target)
    return (1.0 - eps) * np.cos(alpha) ** 2 + eps


def malus_mismatch(grid_size: int = DEFAULT_GRID, epsilon: float = 0.0) -> MismatchReport:
    """Largest gap between the coincidence curve of ``p1 = cos^2`` and Malus.

    The returned angle is folded into [0, pi/2]; the curves are even and
    pi-periodic, so -pi/2 and pi/2 are the same point.
    """
    if grid_size < 16:
        raise InvalidParameter("grid_size must be at least 16")
    curve = autocorrelate(ResponseCurve.cos2(grid_size))
    dev = np.abs(curve.normalized - malus(curve.angles, epsilon))
    k = int(np.argmax(dev))
    return MismatchReport(float(dev[k]), abs(float(curve.angles[k])))


def fourier_feasibility(target: MalusTarget | float) -> FeasibilityReport:
    """Whether normalized autocorrelation can match ``M`` exactly.

    ``M`` has mean ``(1+eps)/2`` and a single ``cos 2 alpha`` harmonic of
    weight ``(1-eps)/2``.  An autocorrelation of a nonnegative pi-periodic
    curve with no harmonics beyond the first has the form
    ``p1 = a0 + 2 a1 cos(2 lam - phi)`` with ``2|a1| <= a0``, which caps
    ``c1 / c0 = 2|a1|^2 / a0^2`` at 1/2, i.e. ``eps >= 1/3``.
    """
    eps = target.epsilon if isinstance(target, MalusTarget) else float(target)
    c0 = (1.0 + eps) / 2.0
    c1 = (1.0 - eps) / 2.0
    ratio = c1 / c0
    return FeasibilityReport(c0, c1, ratio, ratio <= 0.5 + 1e-15)


def cosine_coefficients(curve: CoincidenceCurve) -> np.ndarray:
    """Real DFT coefficients of the raw curve, lag-ordered (c_k, k >= 0)."""
    lagged = np.roll(curve.raw, -(curve.grid_size // 2))
    return np.fft.rfft(lagged).real / curve.grid_size


# --------------------------------------------------------------------------
# inversion
# --------------------------------------------------------------------------


class _Objective:
    """Sum of squared normalized-autocorrelation residuals and its gradient."""

    def __init__(self, target: np.ndarray):
        self.target = target  # lag order
        self.n = target.size

    def residual(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        a = _lag_autocorrelation(p)
        a0 = float(np.dot(p, p)) / self.n
        if a0 == 0.0:
            raise ZeroAtOrigin("iterate collapsed to zero")
        r = a / a0
        r[0] = 1.0
        return r - self.target, r, a0

    def value(self, p: np.ndarray) -> float:
        e, _, _ = self.residual(p)
        return float(np.dot(e, e))

    def value_and_grad(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        e, r, a0 = self.residual(p)
        w = 2.0 * e / a0
        # d/dp_m sum_j w_j A_j = (1/N) sum_j w_j (p_{m-j} + p_{m+j})
        P = np.fft.rfft(p)
        W = np.fft.rfft(w)
        g = (np.fft.irfft(W * P, n=self.n) + np.fft.irfft(W.conj() * P, n=self.n)) / self.n
        g -= float(np.dot(w, r)) * 2.0 * p / self.n
        return float(np.dot(e, e)), g


def _lag_target(target: MalusTarget, grid_size: int) -> np.ndarray:
    lags = np.arange(grid_size) * (math.pi / grid_size)
    return malus(lags, target)


def fit_response(
    target: MalusTarget | float,
    grid_size: int = DEFAULT_GRID,
    max_iter: int = 20000,
    tol: float = 1e-12,
    init: ResponseCurve | np.ndarray | None = None,
) -> FitReport:
    """Projected-gradient inversion of the normalized autocorrelation.

    Minimizes ``sum_j (A(alpha_j)/A(0) - M(alpha_j))^2`` over curves with
    values in [0, 1].  The step is found by backtracking on the usual
    sufficient-decrease test for projected steps.  The objective is
    invariant under ``p -> c p``, so every accepted iterate is rescaled to
    ``max p = 1``; this keeps it inside the box and the gradient well scaled.

    The default initialization is ``cos^2``.  Non-convergence is reported
    through ``converged`` and the residuals, never raised.
    """
    if not isinstance(target, MalusTarget):
        target = MalusTarget(float(target))
    if grid_size < 32:
        raise InvalidParameter("grid_size must be at least 32")
    if max_iter < 1:
        raise InvalidParameter("max_iter must be >= 1")
    if not tol > 0:
        raise InvalidParameter("tol must be positive")

    if init is None:
        p = ResponseCurve.cos2(grid_size).values.copy()
    else:
        p = np.array(init.values if isinstance(init, ResponseCurve) else init, dtype=float)
        if p.size != grid_size:
            raise InvalidParameter("initial curve does not match grid_size")
        p = np.clip(p, 0.0, 1.0)
    if p.max() <= 0.0:
        raise ZeroAtOrigin("initial curve is identically zero")
    p /= p.max()

    obj = _Objective(_lag_target(target, grid_size))
    f, g = obj.value_and_grad(p)
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        while True:
            q = np.clip(p - step * g, 0.0, 1.0)
            d = q - p
            if not np.any(d):
                break
            fq = obj.value(q)
            if fq <= f + float(np.dot(g, d)) + float(np.dot(d, d)) / (2.0 * step):
                break
            step *= 0.5
            if step < 1e-20:
                break
        dnorm = float(np.linalg.norm(d))
        if dnorm == 0.0 or step < 1e-20:
            converged = True
            break
        q /= q.max()
        f_new, g = obj.value_and_grad(q)
        p = q
        decrease = f - f_new
        f = f_new
        step *= 2.0
        if f < tol * tol or (0 <= decrease <= tol * max(f, tol)):
            converged = True
            break

    fitted = ResponseCurve(p)
    curve = autocorrelate(fitted)
    resid = curve.normalized - malus(curve.angles, target)
    return FitReport(
        fitted=fitted,
        sup_residual=float(np.max(np.abs(resid))),
        l2_residual=float(np.sqrt(np.mean(resid**2))),
        iterations=it,
        feasibility_bound=MIN_EPSILON_EXACT,
        objective=float(f),
        converged=converged,
        target=target,
    )


def restart_inits(grid_size: int, n_restarts: int, seed: int, amplitude: float = 0.1) -> list[np.ndarray]:
    """Seeded perturbations of the cos^2 start, one independent stream each."""
    base = ResponseCurve.cos2(grid_size).values
    streams = np.random.SeedSequence(seed).spawn(n_restarts)
    inits = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        inits.append(np.clip(base + amplitude * rng.uniform(-1.0, 1.0, grid_size), 0.0, 1.0))
    return inits


def fit_restarts(
    target: MalusTarget | float,
    n_restarts: int = 5,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID,
    amplitude: float = 0.1,
    **kwargs,
) -> list[FitReport]:
    return [
        fit_response(target, grid_size=grid_size, init=init, **kwargs)
        for init in restart_inits(grid_size, n_restarts, seed, amplitude)
    ]


def best_fit(reports: Sequence[FitReport]) -> FitReport:
    """Minimum sup residual; ties go to the lowest index."""
    if not reports:
        raise InvalidParameter("no fit reports to merge")
    return min(enumerate(reports), key=lambda kv: (kv[1].sup_residual, kv[0]))[1]
