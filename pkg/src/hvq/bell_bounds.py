"""Upper bounds of the four-term Bell combination under three operator models.

deterministic
    every a_i, b_j in {-1, +1}; exhaustive enumeration.
tensor_commuting
    A_i (x) 1 and 1 (x) B_j with rank-balanced involutions on each factor;
    largest eigenvalue of A1B1 + A2B1 + A1B2 - A2B2, multi-start BFGS.
noncommuting
    A_i, B_j Hermitian with spectrum in [-1, 1] on one shared space; the
    products are symmetrized, ``{A, B}/2``, so the combination is Hermitian.
    Maximized by alternating ascent: for fixed top eigenvector ``psi`` the
    best contraction for one operator is ``sign(K)`` of a Hermitian ``K``
    built from ``psi``, then ``psi`` is refreshed.  Each step is monotone.

No global-optimality claim is made for the local searches; every restart
has its own child stream of ``SeedSequence(seed)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .errors import InvalidParameter

# a1b1 + a2b1 + a1b2 - a2b2 as (i, j, sign)
TERMS = ((0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, -1))

_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


class BoundMode(str, Enum):
    DETERMINISTIC = "deterministic"
    TENSOR_COMMUTING = "tensor_commuting"
    NONCOMMUTING = "noncommuting"


@dataclass(frozen=True)
class BoundResult:
    mode: BoundMode
    value: float
    dim: int | None
    restarts: int
    per_restart: tuple[float, ...] = ()


def combination(a, b):
    return sum(s * a[i] * b[j] for i, j, s in TERMS)


def deterministic_bound() -> float:
    best = -math.inf
    for a1, a2, b1, b2 in itertools.product((-1, 1), repeat=4):
        best = max(best, combination((a1, a2), (b1, b2)))
    return float(best)


# --------------------------------------------------------------------------
# tensor-product model
# --------------------------------------------------------------------------


def _bloch(theta: float, phi: float) -> np.ndarray:
    n = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    return np.tensordot(n, _PAULI, axes=1)


def _hermitian(params: np.ndarray, d: int) -> np.ndarray:
    h = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    k = len(iu[0])
    h[iu] = params[:k] + 1j * params[k:2 * k]
    h = h + h.conj().T
    h[np.diag_indices(d)] = params[2 * k:2 * k + d]
    return h


def _balanced_involution(params: np.ndarray, d: int) -> np.ndarray:
    u = expm(1j * _hermitian(params, d))
    signs = np.array([1.0] * (d // 2) + [-1.0] * (d - d // 2))
    return (u * signs) @ u.conj().T


def _tensor_operators(x: np.ndarray, d: int) -> list[np.ndarray]:
    if d == 2:
        return [_bloch(x[2 * k], x[2 * k + 1]) for k in range(4)]
    n = d * d
    return [_balanced_involution(x[k * n:(k + 1) * n], d) for k in range(4)]


def tensor_bell_operator(ops: list[np.ndarray]) -> np.ndarray:
    a, b = ops[:2], ops[2:]
    return sum(s * np.kron(a[i], b[j]) for i, j, s in TERMS)


def _tensor_value(x, d):
    return float(np.linalg.eigvalsh(tensor_bell_operator(_tensor_operators(x, d)))[-1])


def tensor_commuting_bound(restarts: int = 32, seed: int = 0, dim: int = 2) -> BoundResult:
    """``dim`` is the dimension of each tensor factor (2 or 4)."""
    if dim not in (2, 4):
        raise InvalidParameter("tensor_commuting supports factor dimension 2 or 4")
    n_params = 8 if dim == 2 else 4 * dim * dim
    values = []
    for ss in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(ss)
        x0 = rng.uniform(0, 2 * math.pi, n_params) if dim == 2 else rng.normal(size=n_params)
        res = minimize(lambda x: -_tensor_value(x, dim), x0, method="BFGS", options={"gtol": 1e-10})
        values.append(-float(res.fun))
    return BoundResult(BoundMode.TENSOR_COMMUTING, max(values), dim, restarts, tuple(values))


# --------------------------------------------------------------------------
# shared-space, noncommuting model
# --------------------------------------------------------------------------


def _sym(a, b):
    return 0.5 * (a @ b + b @ a)


def symmetrized_bell_operator(a: list[np.ndarray], b: list[np.ndarray]) -> np.ndarray:
    return sum(s * _sym(a[i], b[j]) for i, j, s in TERMS)


def _sign(k: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(k)
    return (v * np.where(w >= 0, 1.0, -1.0)) @ v.conj().T


def _random_contraction(rng: np.random.Generator, d: int) -> np.ndarray:
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (x + x.conj().T)
    w, v = np.linalg.eigh(h)
    return (v * np.tanh(w)) @ v.conj().T


def _best_partner(psi: np.ndarray, coef: np.ndarray) -> np.ndarray:
    # max over Hermitian contractions X of Re<coef psi, X psi> = tr(X K)
    w = coef @ psi
    k = np.outer(psi, w.conj())
    return _sign(0.5 * (k + k.conj().T))


def _seesaw(a, b, max_iter: int = 2000, tol: float = 1e-14) -> float:
    value = -math.inf
    for _ in range(max_iter):
        evals, evecs = np.linalg.eigh(symmetrized_bell_operator(a, b))
        psi = evecs[:, -1]
        b = [_best_partner(psi, a[0] + a[1]), _best_partner(psi, a[0] - a[1])]
        a = [_best_partner(psi, b[0] + b[1]), _best_partner(psi, b[0] - b[1])]
        new = float(np.linalg.eigvalsh(symmetrized_bell_operator(a, b))[-1])
        if new - value <= tol:
            value = max(value, new)
            break
        value = new
    return value


def noncommuting_bound(restarts: int = 256, seed: int = 0, dim: int = 4) -> BoundResult:
    if dim not in (2, 4):
        raise InvalidParameter("noncommuting supports dimension 2 or 4")
    values = []
    for ss in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(ss)
        a = [_random_contraction(rng, dim) for _ in range(2)]
        b = [_random_contraction(rng, dim) for _ in range(2)]
        values.append(_seesaw(a, b))
    return BoundResult(BoundMode.NONCOMMUTING, max(values), dim, restarts, tuple(values))


def bell_operator_bound(mode: BoundMode | str, dim: int | None = None, restarts: int | None = None,
                        seed: int = 0) -> BoundResult:
    mode = BoundMode(mode)
    if mode is BoundMode.DETERMINISTIC:
        return BoundResult(mode, deterministic_bound(), None, 0)
    if mode is BoundMode.TENSOR_COMMUTING:
        return tensor_commuting_bound(32 if restarts is None else restarts, seed, 2 if dim is None else dim)
    return noncommuting_bound(256 if restarts is None else restarts, seed, 4 if dim is None else dim)
