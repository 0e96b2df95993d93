"""Monte Carlo EPR coincidence experiments with impact-parameter hidden variables.

Each photon pair carries a common polarization ``lam`` (uniform on
[-pi/2, pi/2)) and one impact parameter per photon, ``f_left`` and
``f_right`` (uniform on [0, 1)).  A polarizer at angle ``theta`` passes the
photon iff ``f < p1(lam - theta)`` in the f-dependent mode.  In the
f-independent mode every evaluation draws its own uniform variate instead.

Random streams
--------------
Every run starts from ``numpy.random.SeedSequence(seed)``.  Work is cut
into fixed-size batches and batch ``k`` uses child ``k`` of
``SeedSequence(seed).spawn(n_batches)``.  Counts are plain integer sums,
so merging batches is associative and the result does not depend on how
batches are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidParameter
from .hv_polarization import ResponseCurve
from .reports import write_csv

HALF_PI = math.pi / 2
DEFAULT_BATCH = 1 << 16


class Mode(str, Enum):
    F_DEPENDENT = "f_dependent"
    F_INDEPENDENT = "f_independent"


class Sampling(str, Enum):
    COUNTERFACTUAL = "counterfactual"
    FRESH = "fresh"


@dataclass(frozen=True)
class HiddenState:
    lam: float
    f_left: float
    f_right: float

    def __post_init__(self):
        if not -HALF_PI <= self.lam < HALF_PI:
            raise InvalidParameter("lambda must lie in [-pi/2, pi/2)")
        for f in (self.f_left, self.f_right):
            if not 0.0 <= f < 1.0:
                raise InvalidParameter("impact parameters must lie in [0, 1)")


@dataclass(frozen=True)
class DetectionModel:
    response: ResponseCurve
    mode: Mode = Mode.F_DEPENDENT

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))

    def pass_probability(self, lam, theta):
        return self.response.at(np.asarray(lam) - theta)

    def outcomes(self, lam: np.ndarray, f: np.ndarray, theta: float, rng: np.random.Generator) -> np.ndarray:
        """Vectorized pass/absorb for many photons at one polarizer angle."""
        p = self.pass_probability(lam, theta)
        if self.mode is Mode.F_INDEPENDENT:
            f = rng.random(np.shape(lam))
        return f < p


@dataclass(frozen=True)
class AngleSettings:
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float

    def __post_init__(self):
        if not all(math.isfinite(a) for a in self.as_tuple()):
            raise InvalidParameter("angles must be finite")

    @classmethod
    def from_degrees(cls, a1, a2, b1, b2) -> "AngleSettings":
        return cls(*(math.radians(x) for x in (a1, a2, b1, b2)))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.beta1, self.beta2)

    @property
    def alphas(self) -> tuple[float, float]:
        return (self.alpha1, self.alpha2)

    @property
    def betas(self) -> tuple[float, float]:
        return (self.beta1, self.beta2)


STANDARD_SETTINGS = AngleSettings(0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)

# Sub-experiments of one correlator, as (left rotated?, right rotated?, sign).
_SUBS = ((False, False, 1), (True, True, 1), (True, False, -1), (False, True, -1))
# Probability combination a1b1 + a2b1 + a1b2 - a2b2, indexed [i][j].
PROB_SIGNS = np.array([[1, 1], [1, -1]])
# Standard CHSH pattern E11 - E12 + E21 + E22, indexed [i][j].
CHSH_SIGNS = np.array([[1, -1], [1, 1]])


@dataclass
class CoincidenceStats:
    """Counts and derived statistics of a four-setting experiment.

    ``trials[i, j]`` and ``coincidences[i, j]`` refer to the plain pair
    (alpha_i, beta_j).  ``sub_counts[i, j, s]`` holds pass-pass counts of the
    four correlator sub-experiments in the order (a, b), (a+, b+), (a+, b),
    (a, b+), where ``+`` is the axis rotated by pi/2.
    """

    settings: AngleSettings
    sampling: Sampling
    trials: np.ndarray
    coincidences: np.ndarray
    sub_counts: np.ndarray
    sub_trials: np.ndarray
    s_sum: float = 0.0
    s_sq_sum: float = 0.0
    s_min: float = math.inf
    s_max: float = -math.inf

    @property
    def probabilities(self) -> np.ndarray:
        return self.coincidences / self.trials

    @property
    def stderr(self) -> np.ndarray:
        p = self.probabilities
        return np.sqrt(p * (1 - p) / self.trials)

    @property
    def bell_prob_combination(self) -> float:
        return float(np.sum(PROB_SIGNS * self.probabilities))

    @property
    def bell_prob_stderr(self) -> float:
        if self.sampling is Sampling.COUNTERFACTUAL:
            n = int(self.trials[0, 0])
            if n < 2:
                return math.inf
            mean = self.s_sum / n
            var = max(self.s_sq_sum / n - mean * mean, 0.0) * n / (n - 1)
            return math.sqrt(var / n)
        return float(np.sqrt(np.sum(self.stderr**2)))

    @property
    def correlators(self) -> np.ndarray:
        signs = np.array([s for *_, s in _SUBS])
        total = self.sub_counts.sum(axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            return (self.sub_counts * signs).sum(axis=2) / total

    @property
    def correlator_stderr(self) -> np.ndarray:
        # binomial approximation with the coincidence total as sample size
        total = self.sub_counts.sum(axis=2)
        e = self.correlators
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.sqrt((1 - e**2) / total)

    @property
    def chsh_correlator(self) -> float:
        return float(np.sum(CHSH_SIGNS * self.correlators))

    @property
    def chsh_stderr(self) -> float:
        return float(np.sqrt(np.sum(self.correlator_stderr**2)))

    def merge(self, other: "CoincidenceStats") -> "CoincidenceStats":
        return CoincidenceStats(
            self.settings,
            self.sampling,
            self.trials + other.trials,
            self.coincidences + other.coincidences,
            self.sub_counts + other.sub_counts,
            self.sub_trials + other.sub_trials,
            self.s_sum + other.s_sum,
            self.s_sq_sum + other.s_sq_sum,
            min(self.s_min, other.s_min),
            max(self.s_max, other.s_max),
        )

    def rows(self):
        a, b = self.settings.alphas, self.settings.betas
        p, se = self.probabilities, self.stderr
        for i in range(2):
            for j in range(2):
                yield (a[i], b[j], int(self.trials[i, j]), int(self.coincidences[i, j]), p[i, j], se[i, j])

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(path, ["setting_i", "setting_j", "trials", "coincidences", "probability", "stderr"], self.rows())


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(ss))


def batch_streams(seed: int, n_items: int, batch_size: int = DEFAULT_BATCH) -> list[tuple[int, np.random.Generator]]:
    """Split ``n_items`` into fixed batches, each with its own child stream."""
    n_batches = max(1, -(-n_items // batch_size))
    children = np.random.SeedSequence(int(seed)).spawn(n_batches)
    sizes = [batch_size] * (n_batches - 1) + [n_items - batch_size * (n_batches - 1)]
    return [(size, make_rng(ss)) for size, ss in zip(sizes, children)]


def sample_pairs(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lam = rng.uniform(-HALF_PI, HALF_PI, n)
    f = rng.random((2, n))
    return lam, f[0], f[1]


def sample_pair(rng: np.random.Generator) -> HiddenState:
    lam, fl, fr = sample_pairs(rng, 1)
    return HiddenState(float(lam[0]), float(fl[0]), float(fr[0]))


def transmit(model: DetectionModel, state: HiddenState, theta: float, side: str,
             rng: np.random.Generator | None = None) -> bool:
    """Single-photon decision; ``rng`` is required in the f-independent mode."""
    if side not in ("left", "right"):
        raise InvalidParameter(f"side must be 'left' or 'right', got {side!r}")
    p = float(model.pass_probability(state.lam, theta))
    if model.mode is Mode.F_INDEPENDENT:
        if rng is None:
            raise InvalidParameter("f_independent mode needs an rng")
        return bool(rng.random() < p)
    f = state.f_left if side == "left" else state.f_right
    return f < p


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------


def _empty_stats(settings: AngleSettings, sampling: Sampling) -> CoincidenceStats:
    z = np.zeros((2, 2), dtype=np.int64)
    return CoincidenceStats(settings, sampling, z.copy(), z.copy(),
                            np.zeros((2, 2, 4), dtype=np.int64), np.zeros((2, 2, 4), dtype=np.int64))


def _counterfactual_batch(model, settings, n, rng, check_samples):
    lam, fl, fr = sample_pairs(rng, n)
    left = {}
    right = {}
    for i, a in enumerate(settings.alphas):
        left[i, False] = model.outcomes(lam, fl, a, rng)
        left[i, True] = model.outcomes(lam, fl, a + HALF_PI, rng)
    for j, b in enumerate(settings.betas):
        right[j, False] = model.outcomes(lam, fr, b, rng)
        right[j, True] = model.outcomes(lam, fr, b + HALF_PI, rng)
    st = _empty_stats(settings, Sampling.COUNTERFACTUAL)
    s = np.zeros(n)
    for i in range(2):
        for j in range(2):
            both = left[i, False] & right[j, False]
            st.trials[i, j] = n
            st.coincidences[i, j] = int(both.sum())
            s += PROB_SIGNS[i, j] * both
            for k, (rl, rr, _) in enumerate(_SUBS):
                st.sub_counts[i, j, k] = int((left[i, rl] & right[j, rr]).sum())
                st.sub_trials[i, j, k] = n
    if check_samples and n:
        assert s.max() <= 2 and s.min() >= -1, "per-sample combination outside [-1, 2]"
    st.s_sum = float(s.sum())
    st.s_sq_sum = float(np.dot(s, s))
    if n:
        st.s_min, st.s_max = float(s.min()), float(s.max())
    return st


def _fresh_batch(model, settings, n, rng):
    st = _empty_stats(settings, Sampling.FRESH)
    for i, a in enumerate(settings.alphas):
        for j, b in enumerate(settings.betas):
            for k, (rl, rr, _) in enumerate(_SUBS):
                lam, fl, fr = sample_pairs(rng, n)
                both = (model.outcomes(lam, fl, a + HALF_PI * rl, rng)
                        & model.outcomes(lam, fr, b + HALF_PI * rr, rng))
                st.sub_counts[i, j, k] = int(both.sum())
                st.sub_trials[i, j, k] = n
                if k == 0:
                    st.trials[i, j] = n
                    st.coincidences[i, j] = st.sub_counts[i, j, 0]
    return st


def run_experiment(
    model: DetectionModel,
    settings: AngleSettings,
    n_pairs: int,
    seed: int,
    sampling: Sampling | str = Sampling.COUNTERFACTUAL,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
    check_samples: bool = False,
) -> CoincidenceStats:
    """Four-setting coincidence experiment.

    ``counterfactual`` evaluates every polarizer angle (and its rotated
    partner) on the same hidden state; ``fresh`` draws a new pair for every
    setting pair and sub-experiment.  ``n_pairs`` counts pairs per setting
    pair.  With ``check_samples`` each counterfactual sample's contribution
    to the probability combination is asserted to lie in [-1, 2].
    """
    if n_pairs < 1:
        raise InvalidParameter("n_pairs must be >= 1")
    sampling = Sampling(sampling)
    jobs = batch_streams(seed, int(n_pairs), batch_size)

    def work(job):
        n, rng = job
        if sampling is Sampling.COUNTERFACTUAL:
            return _counterfactual_batch(model, settings, n, rng, check_samples)
        return _fresh_batch(model, settings, n, rng)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(job) for job in jobs]
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total


# --------------------------------------------------------------------------
# quantum reference
# --------------------------------------------------------------------------


def qm_coincidence(alpha, beta):
    return 0.5 * np.cos(np.asarray(alpha) - beta) ** 2


def qm_correlator(alpha, beta):
    return np.cos(2 * (np.asarray(alpha) - beta))


def chsh_value(alpha1, alpha2, beta1, beta2, correlator=qm_correlator):
    """``E(a1,b1) - E(a1,b2) + E(a2,b1) + E(a2,b2)`` (broadcasts over arrays)."""
    return (correlator(alpha1, beta1) - correlator(alpha1, beta2)
            + correlator(alpha2, beta1) + correlator(alpha2, beta2))


def prob_combination(alpha1, alpha2, beta1, beta2, coincidence=qm_coincidence):
    """Probability form ``p11 + p21 + p12 - p22``."""
    return (coincidence(alpha1, beta1) + coincidence(alpha2, beta1)
            + coincidence(alpha1, beta2) - coincidence(alpha2, beta2))


@dataclass(frozen=True)
class ScanResult:
    values: np.ndarray
    maximum: float
    argmax: AngleSettings


def chsh_scan(alpha1, alpha2, beta1, beta2) -> ScanResult:
    """Evaluate the QM correlator combination on a broadcastable angle grid."""
    a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (alpha1, alpha2, beta1, beta2)))
    if a1.size == 0:
        raise InvalidParameter("settings grid is empty")
    values = chsh_value(a1, a2, b1, b2)
    k = np.unravel_index(int(np.argmax(values)), values.shape)
    best = AngleSettings(float(a1[k]), float(a2[k]), float(b1[k]), float(b2[k]))
    return ScanResult(values, float(values[k]), best)


def settings_grid(step: float, fix_alpha1: bool = True):
    """Sparse broadcastable grid over [0, pi) with ``alpha1`` pinned at 0.

    The correlator depends only on angle differences, so pinning one angle
    loses nothing and keeps the grid three-dimensional.
    """
    axis = np.arange(0.0, math.pi, step)
    if fix_alpha1:
        return (np.zeros(1)[:, None, None], axis[:, None, None], axis[None, :, None], axis[None, None, :])
    return (axis[:, None, None, None], axis[None, :, None, None], axis[None, None, :, None], axis[None, None, None, :])


@dataclass(frozen=True)
class CorrelatorEstimate:
    value: float
    stderr: float
    correlators: np.ndarray


def qm_monte_carlo(settings: AngleSettings, n: int, seed: int, batch_size: int = DEFAULT_BATCH) -> CorrelatorEstimate:
    """Sample QM two-photon outcomes and estimate the correlator combination.

    For each setting pair the left photon passes ``alpha`` or its rotated
    partner with probability 1/2; the right photon then agrees (passes
    ``beta`` resp. its partner) with probability ``cos^2(alpha - beta)``.
    This reproduces ``p(alpha, beta) = cos^2(alpha - beta) / 2`` for all
    four sub-experiments.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    agree = np.zeros((2, 2), dtype=np.int64)
    for size, rng in batch_streams(seed, n, batch_size):
        for i, a in enumerate(settings.alphas):
            for j, b in enumerate(settings.betas):
                p_agree = math.cos(a - b) ** 2
                agree[i, j] += int((rng.random(size) < p_agree).sum())
    e = 2 * agree / n - 1
    se = np.sqrt((1 - e**2) / n)
    return CorrelatorEstimate(float(np.sum(CHSH_SIGNS * e)), float(np.sqrt(np.sum(se**2))), e)


# --------------------------------------------------------------------------
# interchange diagnostic
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GapResult:
    gap: float
    stderr: float
    lhs: float
    rhs: float
    n: int


def interchange_gap(model: DetectionModel, settings: AngleSettings, n_pairs: int, seed: int,
                    batch_size: int = DEFAULT_BATCH) -> GapResult:
    """Estimate ``E[a_a b_b a_a' b_b']`` with shared versus redrawn impact parameters.

    The left-hand quantity evaluates all four outcomes on one hidden state
    (one impact parameter per side).  The right-hand one keeps ``lam`` but
    draws fresh impact parameters for the primed settings.  The estimate is
    the mean paired difference with its standard error (``inf`` for n = 1).
    """
    if n_pairs < 1:
        raise InvalidParameter("n_pairs must be >= 1")
    a, a2, b, b2 = settings.as_tuple()
    d_sum = d_sq = lhs_sum = rhs_sum = 0.0
    for size, rng in batch_streams(seed, int(n_pairs), batch_size):
        lam, fl, fr = sample_pairs(rng, size)
        fl2, fr2 = rng.random((2, size))
        first = model.outcomes(lam, fl, a, rng) & model.outcomes(lam, fr, b, rng)
        shared = first & model.outcomes(lam, fl, a2, rng) & model.outcomes(lam, fr, b2, rng)
        redrawn = first & model.outcomes(lam, fl2, a2, rng) & model.outcomes(lam, fr2, b2, rng)
        d = shared.astype(float) - redrawn
        d_sum += d.sum()
        d_sq += np.dot(d, d)
        lhs_sum += shared.sum()
        rhs_sum += redrawn.sum()
    n = int(n_pairs)
    gap = d_sum / n
    if n < 2:
        se = math.inf
    else:
        var = max(d_sq / n - gap * gap, 0.0) * n / (n - 1)
        se = math.sqrt(var / n)
    return GapResult(float(gap), se, lhs_sum / n, rhs_sum / n, n)


def interchange_gap_quadrature(model: DetectionModel, settings: AngleSettings,
                               n_lambda: int = 36000, n_f: int = 100000) -> float:
    """Deterministic 2-D midpoint quadrature of the same gap over (lam, f).

    For the threshold rule the impact-parameter integrals factor per side;
    each is evaluated on an ``n_f`` midpoint grid by counting nodes below
    the pass probabilities.  In the f-independent mode both sides coincide
    and the gap is zero.
    """
    if model.mode is Mode.F_INDEPENDENT:
        return 0.0
    lam = -HALF_PI + (np.arange(n_lambda) + 0.5) * math.pi / n_lambda
    fgrid = (np.arange(n_f) + 0.5) / n_f
    a, a2, b, b2 = settings.as_tuple()

    def frac_below(x):
        return np.searchsorted(fgrid, x, side="left") / n_f

    pa, pa2 = model.pass_probability(lam, a), model.pass_probability(lam, a2)
    pb, pb2 = model.pass_probability(lam, b), model.pass_probability(lam, b2)
    shared = frac_below(np.minimum(pa, pa2)) * frac_below(np.minimum(pb, pb2))
    redrawn = frac_below(pa) * frac_below(pa2) * frac_below(pb) * frac_below(pb2)
    return float(np.mean(shared - redrawn))


def summary_rows(stats: CoincidenceStats, bounds: dict[str, float] | None = None) -> list[tuple]:
    rows = [
        ("S_prob", stats.bell_prob_combination, stats.bell_prob_stderr),
        ("S_corr", stats.chsh_correlator, stats.chsh_stderr),
    ]
    for name, value in (bounds or {}).items():
        rows.append((f"bound_{name}", value, 0.0))
    return rows
