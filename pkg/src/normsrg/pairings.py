"""Norms and regular pairings on R^n.

Four pairings are supported, each tied to one norm:

    L2Dot         ||.||_2    [[u, v]] = v^T u
    L1Sign        ||.||_1    [[u, v]] = ||v||_1 sign(v)^T u
    LInfMax       ||.||_inf  [[u, v]] = max over peak indices i of v of u_i v_i
    LInfMinIndex  ||.||_inf  [[u, v]] = ||v||_inf sign(v_m) u_m, m = first peak of v

``u`` always sits in the first (subadditive) slot.  Every routine has a
row-batched twin (``*_rows``) operating on ``(N, n)`` arrays; the scalar
versions call the batched ones so both paths round identically.

Indices are 0-based in code; reports print them 1-based.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "PairingSpec",
    "PeakInfo",
    "as_vector",
    "norm",
    "norm_rows",
    "sign_map",
    "peak_mask_rows",
    "peak_info",
    "pair",
    "pair_rows",
    "jmt_quotients",
    "jmt_pair_numeric",
    "parallelogram_defect",
    "DEFAULT_JMT_STEPS",
]

DEFAULT_JMT_STEPS = (1e-2, 1e-4, 1e-6)


class PairingSpec(enum.Enum):
    """Which norm and regular pairing govern the geometry."""

    L2Dot = "l2"
    L1Sign = "l1"
    LInfMax = "linf-max"
    LInfMinIndex = "linf-min"

    @property
    def order(self) -> float:
        """The p of the underlying l^p norm."""
        return {"l2": 2.0, "l1": 1.0}.get(self.value, np.inf)

    @property
    def is_sip(self) -> bool:
        # The max pairing is only subadditive in its first slot.
        return self is not PairingSpec.LInfMax

    @classmethod
    def parse(cls, name: "str | PairingSpec") -> "PairingSpec":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        for spec in cls:
            if key in (spec.value, spec.name.lower()):
                return spec
        raise ValueError(f"unknown pairing spec {name!r}; "
                         f"expected one of {[s.value for s in cls]}")


@dataclass(frozen=True)
class PeakInfo:
    """Peak index set of a vector, 0-based.

    ``tol_peak`` records the relative tolerance used for membership.
    """

    indices: tuple[int, ...]
    tol_peak: float = 0.0

    @property
    def min_index(self) -> int:
        return self.indices[0]

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.indices)


def as_vector(x: ArrayLike) -> NDArray[np.float64]:
    """Validate and convert to a finite 1-D float array of length >= 1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("vector must have dimension n >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def _same_dim(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")


def norm_rows(X: np.ndarray, spec: PairingSpec) -> np.ndarray:
    """Row-wise norm of an ``(N, n)`` array."""
    spec = PairingSpec.parse(spec)
    if spec is PairingSpec.L2Dot:
        return np.sqrt(np.sum(X * X, axis=-1))
    if spec is PairingSpec.L1Sign:
        return np.sum(np.abs(X), axis=-1)
    return np.max(np.abs(X), axis=-1)


def norm(x: ArrayLike, spec: PairingSpec) -> float:
    x = as_vector(x)
    return float(norm_rows(x[None, :], spec)[0])


def sign_map(x: ArrayLike) -> NDArray[np.float64]:
    """Componentwise sign with sign(0) = 0."""
    return np.sign(np.asarray(x, dtype=np.float64))


def peak_mask_rows(V: np.ndarray, tol_peak: float = 0.0) -> np.ndarray:
    """Boolean mask of peak entries, row-wise.

    Exact comparison when ``tol_peak == 0``.
    """
    A = np.abs(V)
    top = A.max(axis=-1, keepdims=True)
    if tol_peak == 0.0:
        return A == top
    return A >= top * (1.0 - tol_peak)


def peak_info(x: ArrayLike, tol_peak: float = 0.0) -> PeakInfo:
    x = as_vector(x)
    if tol_peak < 0:
        raise ValueError("tol_peak must be nonnegative")
    if not np.any(x):
        raise ValueError("no peak index: zero vector")
    idx = np.flatnonzero(peak_mask_rows(x[None, :], tol_peak)[0])
    return PeakInfo(tuple(int(i) for i in idx), float(tol_peak))


def pair_rows(U: np.ndarray, V: np.ndarray, spec: PairingSpec,
              tol_peak: float = 0.0) -> np.ndarray:
    """Row-wise pairing ``[[U_k, V_k]]``; rows with ``V_k = 0`` give 0."""
    spec = PairingSpec.parse(spec)
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    _same_dim(U, V)
    if spec is PairingSpec.L2Dot:
        return np.sum(U * V, axis=-1)
    if spec is PairingSpec.L1Sign:
        return norm_rows(V, spec) * np.sum(np.sign(V) * U, axis=-1)

    zero = ~np.any(V != 0, axis=-1)
    mask = peak_mask_rows(V, tol_peak)
    if spec is PairingSpec.LInfMax:
        out = np.max(np.where(mask, U * V, -np.inf), axis=-1)
    else:
        m = np.argmax(mask, axis=-1)
        v_m = np.take_along_axis(V, m[..., None], axis=-1)[..., 0]
        u_m = np.take_along_axis(U, m[..., None], axis=-1)[..., 0]
        out = norm_rows(V, spec) * np.sign(v_m) * u_m
    return np.where(zero, 0.0, out)


def pair(u: ArrayLike, v: ArrayLike, spec: PairingSpec,
         tol_peak: float = 0.0) -> float:
    """The regular pairing ``[[u, v]]`` with ``u`` in the subadditive slot."""
    u, v = as_vector(u), as_vector(v)
    _same_dim(u, v)
    return float(pair_rows(u[None, :], v[None, :], spec, tol_peak)[0])


def jmt_quotients(u: ArrayLike, v: ArrayLike, spec: PairingSpec,
                  side: str = "upper",
                  steps: Sequence[float] = DEFAULT_JMT_STEPS) -> np.ndarray:
    """Scaled one-sided difference quotients of the norm at ``v`` along ``u``.

    Entry k is ``||v|| (||v + t_k u|| - ||v||) / t_k`` with ``t_k = +steps[k]``
    for the upper pairing and ``-steps[k]`` for the lower one.
    """
    u, v = as_vector(u), as_vector(v)
    _same_dim(u, v)
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    steps = np.asarray(steps, dtype=np.float64)
    if steps.ndim != 1 or steps.size == 0 or np.any(steps <= 0):
        raise ValueError("steps must be a nonempty sequence of positive numbers")
    if np.any(np.diff(steps) >= 0):
        raise ValueError("steps must be strictly descending")
    nv = norm(v, spec)
    if nv == 0.0:
        raise ValueError("JMT pairing needs v != 0")
    t = steps if side == "upper" else -steps
    shifted = norm_rows(v[None, :] + t[:, None] * u[None, :], spec)
    return nv * (shifted - nv) / t


def jmt_pair_numeric(u: ArrayLike, v: ArrayLike, spec: PairingSpec,
                     side: str = "upper",
                     steps: Sequence[float] = DEFAULT_JMT_STEPS) -> float:
    """Numerical upper/lower JMT pairing: the smallest-step quotient."""
    return float(jmt_quotients(u, v, spec, side, steps)[-1])


def parallelogram_defect(x: ArrayLike, y: ArrayLike, spec: PairingSpec) -> float:
    """``||x+y||^2 + ||x-y||^2 - 2||x||^2 - 2||y||^2``; zero iff the identity holds."""
    x, y = as_vector(x), as_vector(y)
    _same_dim(x, y)
    spec = PairingSpec.parse(spec)

    def sq(w):
        # Squaring a square root would leave rounding noise in the l2 case.
        return float(w @ w) if spec is PairingSpec.L2Dot else norm(w, spec) ** 2

    return sq(x + y) + sq(x - y) - 2 * sq(x) - 2 * sq(y)
