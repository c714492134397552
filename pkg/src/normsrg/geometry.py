"""Directional cosines and angles, facet labels, and logarithmic norms."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .pairings import PairingSpec, as_vector, norm, norm_rows, pair_rows, peak_info
from .sampling import unit_sphere_samples

__all__ = [
    "DirectionalAngle",
    "cos_rows",
    "cos_left",
    "cos_right",
    "DefectCheck",
    "cosine_defect_bound_check",
    "L1SignPattern",
    "LInfMinFacet",
    "LInfActiveSet",
    "facet_label",
    "symmetric_eigenvalues",
    "log_norm_closed_form",
    "induced_norm",
    "LumerEstimate",
    "log_norm_lumer_estimate",
    "gain_phase_sup",
    "MonotoneCheck",
    "phase_monotone_check",
    "CLAMP_TOL",
]

log = logging.getLogger(__name__)

# Cosines may leave [-1, 1] by this much through rounding and are clamped.
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class DirectionalAngle:
    cos_value: float
    angle_rad: float
    side: str
    spec: PairingSpec


def _clamp(c: np.ndarray) -> np.ndarray:
    excess = np.max(np.abs(c) - 1.0, initial=0.0)
    if excess > CLAMP_TOL:
        log.error("cosine outside [-1, 1] by %.3g", excess)
        raise ValueError(f"cosine outside [-1, 1] by {excess:.3g}; "
                         "the pairing violates Cauchy-Schwarz")
    return np.clip(c, -1.0, 1.0)


def cos_rows(X: np.ndarray, Y: np.ndarray, spec: PairingSpec,
             side: str = "left") -> np.ndarray:
    """Row-wise directional cosine of nonzero rows ``X_k``, ``Y_k``.

    Left: ``[[Y, X]] / (||X|| ||Y||)``.  Right swaps the pairing arguments.
    """
    if side == "left":
        num = pair_rows(Y, X, spec)
    elif side == "right":
        num = pair_rows(X, Y, spec)
    else:
        raise ValueError("side must be 'left' or 'right'")
    den = norm_rows(X, spec) * norm_rows(Y, spec)
    return _clamp(num / den)


def _angle(x, y, spec, side) -> DirectionalAngle:
    spec = PairingSpec.parse(spec)
    x, y = as_vector(x), as_vector(y)
    if norm(x, spec) == 0 or norm(y, spec) == 0:
        raise ValueError("directional angles need nonzero vectors")
    c = float(cos_rows(x[None, :], y[None, :], spec, side)[0])
    return DirectionalAngle(c, math.acos(c), side, spec)


def cos_left(x: ArrayLike, y: ArrayLike, spec: PairingSpec) -> DirectionalAngle:
    return _angle(x, y, spec, "left")


def cos_right(x: ArrayLike, y: ArrayLike, spec: PairingSpec) -> DirectionalAngle:
    return _angle(x, y, spec, "right")


@dataclass(frozen=True)
class DefectCheck:
    lhs: float
    rhs: float
    holds: bool


def cosine_defect_bound_check(x, y, z, spec: PairingSpec,
                              unit_tol: float = 1e-12) -> DefectCheck:
    """Compare ``|cos_L(x,z) - cos_L(y,z) cos_L(x,y)|`` with ``||z - cos_L(y,z) y||``.

    The bound holds for semi-inner products and unit vectors, so both are
    enforced.
    """
    spec = PairingSpec.parse(spec)
    if not spec.is_sip:
        raise ValueError(f"{spec.value} is not a semi-inner product")
    x, y, z = (as_vector(v) for v in (x, y, z))
    for name, v in (("x", x), ("y", y), ("z", z)):
        if abs(norm(v, spec) - 1.0) > unit_tol:
            raise ValueError(f"{name} is not on the unit sphere; normalize first")
    c_yz = cos_left(y, z, spec).cos_value
    lhs = abs(cos_left(x, z, spec).cos_value - c_yz * cos_left(x, y, spec).cos_value)
    rhs = norm(z - c_yz * y, spec)
    return DefectCheck(lhs, rhs, lhs <= rhs + 1e-12)


# Facet labels. L2 has no facets.

@dataclass(frozen=True)
class L1SignPattern:
    signs: tuple[int, ...]


@dataclass(frozen=True)
class LInfMinFacet:
    index: int
    sign: int

    def __str__(self):
        return f"F_{self.index + 1}^{'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True)
class LInfActiveSet:
    indices: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if not self.indices:
            raise ValueError("active facet set must be nonempty")


def facet_label(x: ArrayLike, spec: PairingSpec):
    """Label of the unit-ball facet(s) that ``x`` points into."""
    spec = PairingSpec.parse(spec)
    x = as_vector(x)
    if not np.any(x):
        raise ValueError("zero vector has no facet label")
    if spec is PairingSpec.L2Dot:
        raise ValueError("l2 unit ball has no facets")
    if spec is PairingSpec.L1Sign:
        return L1SignPattern(tuple(int(s) for s in np.sign(x)))
    peaks = peak_info(x).indices
    if spec is PairingSpec.LInfMinIndex:
        m = peaks[0]
        return LInfMinFacet(m, int(np.sign(x[m])))
    return LInfActiveSet(peaks, tuple(int(np.sign(x[i])) for i in peaks))


def symmetric_eigenvalues(S: ArrayLike, tol: float = 1e-12,
                          max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol * max(1, ||S||_F)``.
    """
    a = np.array(S, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    target = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if apq == 0.0:
                    continue
                theta = float(a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # theta^2 would overflow; the rotation angle is ~1/(2 theta).
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
    else:
        log.warning("Jacobi iteration hit max_sweeps=%d", max_sweeps)
    return np.sort(np.diag(a))


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def log_norm_closed_form(A: ArrayLike, spec: PairingSpec) -> float:
    """Logarithmic norm induced by ``spec``'s norm.

    l2: half the largest eigenvalue of ``A + A^T``; l1: largest column sum of
    ``a_jj + sum_{i != j} |a_ij|``; l-inf: the same over rows.  Both l-inf
    pairings share the value.
    """
    spec = PairingSpec.parse(spec)
    A = _square(A)
    if spec is PairingSpec.L2Dot:
        return float(symmetric_eigenvalues(0.5 * (A + A.T))[-1])
    d = np.diag(A)
    off = np.abs(A) - np.diag(np.abs(d))
    axis = 0 if spec is PairingSpec.L1Sign else 1
    return float(np.max(d + off.sum(axis=axis)))


def induced_norm(A: ArrayLike, spec: PairingSpec) -> float:
    """Operator norm of ``A`` induced by ``spec``'s vector norm."""
    spec = PairingSpec.parse(spec)
    A = _square(A)
    if spec is PairingSpec.L2Dot:
        return math.sqrt(max(0.0, float(symmetric_eigenvalues(A.T @ A)[-1])))
    axis = 0 if spec is PairingSpec.L1Sign else 1
    return float(np.max(np.abs(A).sum(axis=axis)))


@dataclass(frozen=True)
class LumerEstimate:
    estimate: float
    argmax_witness: np.ndarray


def _sphere_points(spec, n, n_samples, seed, points, include_extremes):
    if points is not None:
        X = np.asarray(points, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != n:
            raise ValueError("points must be an (N, n) array")
        return X
    if n_samples < 1:
        raise ValueError("need at least one sample")
    return unit_sphere_samples(spec, n, n_samples, seed, include_extremes)


def log_norm_lumer_estimate(A: ArrayLike, spec: PairingSpec, n_samples: int = 10_000,
                            seed=0, points=None,
                            include_extremes: bool = True) -> LumerEstimate:
    """Lower estimate of the log norm: the max of ``[[Ax, x]]`` over sampled unit ``x``."""
    spec = PairingSpec.parse(spec)
    A = _square(A)
    X = _sphere_points(spec, A.shape[0], n_samples, seed, points, include_extremes)
    vals = pair_rows(X @ A.T, X, spec)
    k = int(np.argmax(vals))
    return LumerEstimate(float(vals[k]), X[k].copy())


def gain_phase_sup(A: ArrayLike, spec: PairingSpec, n_samples: int = 10_000,
                   seed=0, points=None, include_extremes: bool = True) -> float:
    """Max over sampled unit ``x`` of ``||Ax|| cos_L(x, Ax)``; ``Ax = 0`` contributes 0."""
    spec = PairingSpec.parse(spec)
    A = _square(A)
    X = _sphere_points(spec, A.shape[0], n_samples, seed, points, include_extremes)
    AX = X @ A.T
    gain = norm_rows(AX, spec)
    vals = np.zeros(len(X))
    live = gain > 0
    vals[live] = gain[live] * cos_rows(X[live], AX[live], spec, "left")
    return float(np.max(vals))


@dataclass(frozen=True)
class MonotoneCheck:
    is_monotone_on_samples: bool
    worst_angle: float
    witness: "tuple[np.ndarray, np.ndarray] | None"
    n_checked: int


def phase_monotone_check(pairs: Sequence, spec: PairingSpec,
                         tol_angle: float = 1e-9) -> MonotoneCheck:
    """Check that every left phase of the increment pairs ``(u, v)`` is at most pi/2.

    Pairs with a zero side carry no phase and are skipped.
    """
    spec = PairingSpec.parse(spec)
    if len(pairs) == 0:
        return MonotoneCheck(True, 0.0, None, 0)
    U = np.array([np.asarray(p[0], dtype=np.float64) for p in pairs])
    V = np.array([np.asarray(p[1], dtype=np.float64) for p in pairs])
    keep = (norm_rows(U, spec) > 0) & (norm_rows(V, spec) > 0)
    U, V = U[keep], V[keep]
    if len(U) == 0:
        return MonotoneCheck(True, 0.0, None, 0)
    angles = np.arccos(cos_rows(U, V, spec, "left"))
    k = int(np.argmax(angles))
    worst = float(angles[k])
    return MonotoneCheck(worst <= math.pi / 2 + tol_angle, worst,
                         (U[k].copy(), V[k].copy()), len(U))
