"""Seeded samplers: unit-sphere points for Lumer estimates and increment
pairs for SRG clouds.

All samplers take either an integer seed or a ``numpy.random.Generator``;
nothing reads global random state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .pairings import PairingSpec, norm_rows

__all__ = [
    "as_rng",
    "sign_vectors",
    "extreme_points",
    "unit_sphere_samples",
    "IncrementSampler",
    "INCREMENT_KINDS",
    "MAX_EXTREME_DIM",
]

# Extreme-point families are enumerated only up to this dimension.
MAX_EXTREME_DIM = 12

# Offset that pushes a vertex of the l1 ball onto an adjacent facet, or a
# hypercube coordinate just below its peak.
VERTEX_OFFSET = 1e-15

INCREMENT_KINDS = ("gaussian", "laplace", "rademacher", "impulse")


def as_rng(seed: "int | np.random.Generator | None") -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sign_vectors(n: int) -> np.ndarray:
    """All ``2**n`` vectors in ``{-1, +1}^n``, lexicographic order."""
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def _l1_extremes(n: int) -> np.ndarray:
    # +-e_j, plus each vertex pushed onto every adjacent open facet: the sign
    # pairing sees sign(x), so the supremum is approached from facets.
    rows = [s * e for e in np.eye(n) for s in (1.0, -1.0)]
    if n > 1:
        eps = VERTEX_OFFSET
        for j in range(n):
            for signs in itertools.product((-1.0, 1.0), repeat=n):
                x = eps * np.array(signs)
                x[j] = signs[j] * (1.0 - (n - 1) * eps)
                rows.append(x)
    return np.array(rows)


def _linf_min_extremes(n: int) -> np.ndarray:
    # Sign vectors whose first k coordinates are shrunk below the peak, so the
    # minimal peak index lands on k (k = 0 gives the plain sign vectors).
    S = sign_vectors(n)
    blocks = []
    for k in range(n):
        B = S.copy()
        B[:, :k] *= 1.0 - VERTEX_OFFSET
        blocks.append(B)
    return np.concatenate(blocks)


def extreme_points(spec: PairingSpec, n: int) -> np.ndarray:
    """Unit-sphere points at which the closed-form log norm is (nearly) attained.

    Empty for l2 and for ``n > MAX_EXTREME_DIM``.
    """
    spec = PairingSpec.parse(spec)
    if spec is PairingSpec.L2Dot or n > MAX_EXTREME_DIM:
        return np.empty((0, n))
    if spec is PairingSpec.L1Sign:
        X = _l1_extremes(n)
    elif spec is PairingSpec.LInfMax:
        X = sign_vectors(n)
    else:
        X = _linf_min_extremes(n)
    return X / norm_rows(X, spec)[:, None]


def unit_sphere_samples(spec: PairingSpec, n: int, count: int, seed=None,
                        include_extremes: bool = True) -> np.ndarray:
    """``count`` random points on the unit sphere of ``spec``'s norm.

    l2 uses normalized Gaussians, l1 normalized Laplace draws, l-inf uniform
    draws on [-1, 1]^n with one coordinate forced to +-1.  With
    ``include_extremes`` the extreme-point family is prepended.
    """
    spec = PairingSpec.parse(spec)
    if n < 1 or count < 0:
        raise ValueError("need n >= 1 and count >= 0")
    rng = as_rng(seed)
    if spec is PairingSpec.L2Dot:
        X = rng.standard_normal((count, n))
    elif spec is PairingSpec.L1Sign:
        X = rng.laplace(size=(count, n))
    else:
        X = rng.uniform(-1.0, 1.0, size=(count, n))
        j = rng.integers(0, n, size=count)
        X[np.arange(count), j] = rng.choice((-1.0, 1.0), size=count)
    # A zero draw has probability zero; guard anyway.
    X[~np.any(X != 0, axis=1), 0] = 1.0
    X = X / norm_rows(X, spec)[:, None]
    if include_extremes:
        X = np.concatenate([extreme_points(spec, n), X])
    return X


@dataclass(frozen=True)
class IncrementSampler:
    """Draws input pairs ``(x1, x2)`` whose increments probe a norm's geometry.

    kind:
        ``gaussian`` and ``laplace`` draw both points independently;
        ``rademacher`` uses a random sign vector as the increment and
        ``impulse`` a signed coordinate vector, both with a random length in
        (0, 2 * scale] around a Gaussian base point.  ``mixed`` splits the
        draws evenly across the four kinds, in that order.
    """

    kind: str = "mixed"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in INCREMENT_KINDS + ("mixed",):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("sampler scale must be positive")

    @property
    def id(self) -> str:
        return self.kind if self.scale == 1.0 else f"{self.kind}@{self.scale:g}"

    def draw(self, n: int, count: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
        rng = as_rng(seed)
        if self.kind == "mixed":
            parts = [IncrementSampler(k, self.scale)._draw(n, c, rng)
                     for k, c in zip(INCREMENT_KINDS, _split(count, 4))]
            return (np.concatenate([p[0] for p in parts]),
                    np.concatenate([p[1] for p in parts]))
        return self._draw(n, count, rng)

    def _draw(self, n, count, rng):
        s = self.scale
        if self.kind == "gaussian":
            return s * rng.standard_normal((count, n)), s * rng.standard_normal((count, n))
        if self.kind == "laplace":
            return s * rng.laplace(size=(count, n)), s * rng.laplace(size=(count, n))
        base = s * rng.standard_normal((count, n))
        length = s * rng.uniform(0.0, 2.0, size=count)
        length[length == 0] = s
        if self.kind == "rademacher":
            step = rng.choice((-1.0, 1.0), size=(count, n))
        else:
            step = np.zeros((count, n))
            step[np.arange(count), rng.integers(0, n, size=count)] = \
                rng.choice((-1.0, 1.0), size=count)
        return base + length[:, None] * step, base


def _split(total: int, parts: int) -> list[int]:
    q, r = divmod(total, parts)
    return [q + (1 if i < r else 0) for i in range(parts)]
