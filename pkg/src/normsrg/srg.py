"""Directional scaled relative graphs from sampled increments.

A cloud stores one upper-half-plane representative ``gain * exp(i phase)``
per increment pair ``(u, v)``, ``phase`` in [0, pi]; the conjugate is implied.
Sampled clouds are inner approximations of the true SRG: a violated
certificate disproves the property, a passing one is evidence only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .geometry import cos_rows
from .pairings import PairingSpec, norm_rows
from .sampling import IncrementSampler, as_rng

__all__ = [
    "MatrixOperator",
    "PointwiseOperator",
    "FiniteGraph",
    "scale_operator",
    "add_operators",
    "compose_operators",
    "Increments",
    "sample_increments",
    "SrgPoint",
    "SrgCloud",
    "cloud_from_increments",
    "sample_srg",
    "merge_clouds",
    "Property",
    "CertificateReport",
    "region_slack",
    "certify",
    "contraction_factor",
    "srg_scale",
    "srg_invert",
    "boxplus_contains",
    "diamond_contains",
    "count_contained",
    "sigma_from_increments",
    "estimate_sigma",
    "ZERO_INCREMENT_RTOL",
]

# ||u|| below this times (1 + ||x1|| + ||x2||) counts as a zero increment.
ZERO_INCREMENT_RTOL = 1e-12


# -- operators -------------------------------------------------------------

@dataclass(frozen=True)
class MatrixOperator:
    matrix: np.ndarray
    name: str = "matrix"

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix operator needs a square matrix")
        object.__setattr__(self, "matrix", A)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.matrix.T


@dataclass(frozen=True)
class PointwiseOperator:
    """A single-valued map on R^n given as a function.

    ``func`` maps an ``(N, n)`` array to ``(N, n)`` when ``batched`` is true,
    otherwise a single vector to a vector.
    """

    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    name: str = "pointwise"
    batched: bool = True

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.batched:
            Y = np.asarray(self.func(X), dtype=np.float64)
        else:
            Y = np.array([np.asarray(self.func(x), dtype=np.float64) for x in X])
        if Y.shape != X.shape:
            raise ValueError(f"{self.name}: output shape {Y.shape} != input {X.shape}")
        return Y


@dataclass(frozen=True)
class FiniteGraph:
    """An operator given by its graph points ``(xs[k], ys[k])``.

    Repeated inputs with different outputs encode a multi-valued operator.
    """

    xs: np.ndarray
    ys: np.ndarray
    name: str = "graph"

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=np.float64))
        ys = np.atleast_2d(np.asarray(self.ys, dtype=np.float64))
        if xs.shape != ys.shape or len(xs) < 2:
            raise ValueError("graph needs at least two (x, y) pairs of equal shape")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    def inverse(self) -> "FiniteGraph":
        return FiniteGraph(self.ys, self.xs, f"inv({self.name})")


def scale_operator(T, alpha: float):
    if isinstance(T, MatrixOperator):
        return MatrixOperator(alpha * T.matrix, f"{alpha:g}*{T.name}")
    if isinstance(T, FiniteGraph):
        return FiniteGraph(T.xs, alpha * T.ys, f"{alpha:g}*{T.name}")
    return PointwiseOperator(lambda X: alpha * T.evaluate(X), T.dim, f"{alpha:g}*{T.name}")


def add_operators(A, B):
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    if isinstance(A, MatrixOperator) and isinstance(B, MatrixOperator):
        return MatrixOperator(A.matrix + B.matrix, f"{A.name}+{B.name}")
    return PointwiseOperator(lambda X: A.evaluate(X) + B.evaluate(X), A.dim,
                             f"{A.name}+{B.name}")


def compose_operators(A, B):
    """``A o B``: apply ``B`` first."""
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    if isinstance(A, MatrixOperator) and isinstance(B, MatrixOperator):
        return MatrixOperator(A.matrix @ B.matrix, f"{A.name}*{B.name}")
    return PointwiseOperator(lambda X: A.evaluate(B.evaluate(X)), A.dim,
                             f"{A.name}*{B.name}")


# -- increments ------------------------------------------------------------

@dataclass(frozen=True)
class Increments:
    """Increment pairs ``u = x1 - x2``, ``v = T(x1) - T(x2)``.

    ``ref`` is ``1 + ||x1|| + ||x2||`` (computed in the l2 norm), the scale
    for zero-increment screening.
    """

    U: np.ndarray
    V: np.ndarray
    ref: np.ndarray


def sample_increments(T, sampler: IncrementSampler, n_samples: int, seed=0) -> Increments:
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    rng = as_rng(seed)
    if isinstance(T, FiniteGraph):
        K = len(T.xs)
        i = rng.integers(0, K, size=n_samples)
        j = (i + rng.integers(1, K, size=n_samples)) % K
        X1, X2, Y1, Y2 = T.xs[i], T.xs[j], T.ys[i], T.ys[j]
    else:
        X1, X2 = sampler.draw(T.dim, n_samples, rng)
        Y1, Y2 = T.evaluate(X1), T.evaluate(X2)
        bad = ~np.all(np.isfinite(Y1), axis=1) | ~np.all(np.isfinite(Y2), axis=1)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise FloatingPointError(f"{getattr(T, 'name', 'operator')} returned a "
                                     f"non-finite value at sample {k}: x1={X1[k]}, x2={X2[k]}")
    ref = 1.0 + norm_rows(X1, PairingSpec.L2Dot) + norm_rows(X2, PairingSpec.L2Dot)
    return Increments(X1 - X2, Y1 - Y2, ref)


# -- clouds ----------------------------------------------------------------

@dataclass(frozen=True)
class SrgPoint:
    gain: float
    phase: float
    is_infinity: bool
    draw_index: int = -1

    @property
    def z(self) -> complex:
        if self.is_infinity:
            return complex(math.inf, 0.0)
        return complex(self.gain * math.cos(self.phase), self.gain * math.sin(self.phase))


@dataclass(frozen=True, eq=False)
class SrgCloud:
    """A finite multiset of SRG points for one pairing and side.

    Infinity points have ``gain = inf`` and ``phase = 0``.  ``meta`` records
    sampler id, sample count, and seed; ``draw_index`` maps each point back to
    the increment that produced it and is not persisted.
    """

    gain: np.ndarray
    phase: np.ndarray
    spec: PairingSpec
    side: str = "left"
    meta: dict = field(default_factory=dict)
    draw_index: "np.ndarray | None" = None

    def __post_init__(self):
        gain = np.asarray(self.gain, dtype=np.float64).ravel()
        phase = np.asarray(self.phase, dtype=np.float64).ravel()
        if gain.shape != phase.shape:
            raise ValueError("gain and phase must have equal length")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if np.any(np.isnan(gain)) or np.any(gain < 0) or np.any(gain == -np.inf):
            raise ValueError("gains must be nonnegative or +inf")
        if not np.all((phase >= 0) & (phase <= math.pi)):
            raise ValueError("phases must lie in [0, pi]")
        if np.any(phase[np.isinf(gain)] != 0):
            raise ValueError("infinity points carry phase 0")
        object.__setattr__(self, "gain", gain)
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "spec", PairingSpec.parse(self.spec))

    def __len__(self) -> int:
        return len(self.gain)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SrgCloud):
            return NotImplemented
        return (self.spec is other.spec and self.side == other.side
                and self.meta == other.meta
                and np.array_equal(self.gain, other.gain)
                and np.array_equal(self.phase, other.phase))

    __hash__ = None

    @property
    def is_infinity(self) -> np.ndarray:
        return np.isinf(self.gain)

    @property
    def re(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.is_infinity, np.inf, self.gain * np.cos(self.phase))

    @property
    def im(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.is_infinity, np.inf, self.gain * np.sin(self.phase))

    def point(self, k: int) -> SrgPoint:
        d = -1 if self.draw_index is None else int(self.draw_index[k])
        return SrgPoint(float(self.gain[k]), float(self.phase[k]),
                        bool(self.is_infinity[k]), d)

    def to_complex(self, mirror: bool = True) -> np.ndarray:
        """Finite points as complex numbers, with conjugates appended if ``mirror``."""
        fin = ~self.is_infinity
        z = self.gain[fin] * np.exp(1j * self.phase[fin])
        return np.concatenate([z, np.conj(z)]) if mirror else z

    def with_points(self, gain, phase, **changes) -> "SrgCloud":
        return replace(self, gain=gain, phase=phase, draw_index=self.draw_index, **changes)


def cloud_from_increments(inc: Increments, spec: PairingSpec, side: str = "left",
                          meta: "dict | None" = None) -> SrgCloud:
    """Turn increment pairs into SRG points.

    ``u = 0, v = 0`` gives no point, ``u = 0, v != 0`` an infinity point,
    ``v = 0`` the origin.
    """
    spec = PairingSpec.parse(spec)
    nu = norm_rows(inc.U, spec)
    nv = norm_rows(inc.V, spec)
    u_zero = nu < ZERO_INCREMENT_RTOL * inc.ref
    v_zero = nv == 0
    keep = ~(u_zero & v_zero)
    gain = np.zeros(len(nu))
    phase = np.zeros(len(nu))
    gain[u_zero] = np.inf
    live = ~u_zero & ~v_zero
    gain[live] = nv[live] / nu[live]
    phase[live] = np.arccos(cos_rows(inc.U[live], inc.V[live], spec, side))
    return SrgCloud(gain[keep], phase[keep], spec, side, dict(meta or {}),
                    np.flatnonzero(keep))


def sample_srg(T, spec: PairingSpec, side: str = "left",
               sampler: "IncrementSampler | None" = None, n_samples: int = 5000,
               seed: int = 0) -> SrgCloud:
    """Sampled directional SRG of ``T``."""
    sampler = sampler or IncrementSampler()
    inc = sample_increments(T, sampler, n_samples, seed)
    meta = {"sampler": sampler.id, "n_samples": int(n_samples), "seed": seed}
    return cloud_from_increments(inc, spec, side, meta)


def merge_clouds(*clouds: SrgCloud) -> SrgCloud:
    """Multiset union of clouds sharing spec and side."""
    first = clouds[0]
    for c in clouds[1:]:
        if c.spec is not first.spec or c.side != first.side:
            raise ValueError("can only merge clouds with equal spec and side")
    return SrgCloud(np.concatenate([c.gain for c in clouds]),
                    np.concatenate([c.phase for c in clouds]),
                    first.spec, first.side,
                    {"merged": [c.meta for c in clouds]})


# -- certificates ----------------------------------------------------------

class Property(enum.Enum):
    Lipschitz = "lipschitz"
    OneSided = "one-sided"
    StronglyMonotone = "strongly-monotone"
    Cocoercive = "cocoercive"

    @classmethod
    def parse(cls, name: "str | Property") -> "Property":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        if key == "monotone":
            return cls.StronglyMonotone
        for p in cls:
            if key in (p.value, p.name.lower()):
                return p
        raise ValueError(f"unknown property {name!r}")


@dataclass(frozen=True)
class CertificateReport:
    property: Property
    parameter: float
    verdict: str
    margin: float
    witness: "SrgPoint | None"
    tolerance: float
    n_points: int

    @property
    def holds(self) -> bool:
        return self.verdict == "holds_on_samples"

    def to_dict(self) -> dict:
        w = self.witness
        return {
            "property": self.property.value,
            "parameter": self.parameter,
            "verdict": self.verdict,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "n_points": self.n_points,
            "witness": None if w is None else {
                "gain": w.gain, "phase_rad": w.phase,
                "is_infinity": w.is_infinity, "draw_index": w.draw_index},
        }


def _check_parameter(prop: Property, p: float) -> None:
    if prop in (Property.Lipschitz, Property.Cocoercive) and not p > 0:
        raise ValueError(f"{prop.value} parameter must be > 0")
    if prop is Property.StronglyMonotone and not p >= 0:
        raise ValueError("strong monotonicity parameter must be >= 0")
    if not math.isfinite(p):
        raise ValueError("parameter must be finite")


def region_slack(cloud: SrgCloud, prop, parameter: float) -> np.ndarray:
    """Signed distance-like slack of each point to the property's region.

    Nonnegative inside.  Infinity points get ``-inf`` for the disk regions
    and ``+inf`` for the half-planes, where the defining inequality reads 0 <= 0.
    """
    prop = Property.parse(prop)
    p = float(parameter)
    _check_parameter(prop, p)
    inf = cloud.is_infinity
    g = np.where(inf, 0.0, cloud.gain)
    re = g * np.cos(cloud.phase)
    if prop is Property.Lipschitz:
        s = p - g
    elif prop is Property.OneSided:
        s = p - re
    elif prop is Property.StronglyMonotone:
        s = re - p
    else:
        r = 1.0 / (2.0 * p)
        s = r - np.abs(g * np.exp(1j * cloud.phase) - r)
    disk = prop in (Property.Lipschitz, Property.Cocoercive)
    return np.where(inf, -np.inf if disk else np.inf, s)


def certify(cloud: SrgCloud, prop, parameter: float, tol: float = 1e-9) -> CertificateReport:
    """Containment test of the cloud in the region of ``prop``.

    Regions: Lipschitz ``|z| <= l``; one-sided ``Re z <= c``; strongly
    monotone ``Re z >= mu``; cocoercive ``|z - 1/(2 g)| <= 1/(2 g)``.
    """
    prop = Property.parse(prop)
    if len(cloud) == 0:
        raise ValueError("cannot certify an empty cloud")
    s = region_slack(cloud, prop, parameter)
    k = int(np.argmin(s))
    margin = float(s[k])
    violated = margin < -tol
    return CertificateReport(prop, float(parameter),
                             "violated" if violated else "holds_on_samples",
                             margin, cloud.point(k) if violated else None,
                             tol, len(cloud))


def contraction_factor(cloud: SrgCloud) -> float:
    """Largest modulus in the cloud; ``inf`` when an infinity point is present."""
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    return float(np.max(cloud.gain))


# -- calculus --------------------------------------------------------------

def _require_sip(cloud: SrgCloud) -> None:
    if not cloud.spec.is_sip:
        raise ValueError(f"{cloud.spec.value} is not a semi-inner product; "
                         "the SRG calculus needs linearity in the first argument")


def srg_scale(cloud: SrgCloud, alpha: float) -> SrgCloud:
    """Image of the left cloud under ``z -> alpha z``."""
    _require_sip(cloud)
    if cloud.side != "left":
        raise ValueError("scaling applies to left clouds")
    if alpha == 0:
        return cloud.with_points(np.zeros(len(cloud)), np.zeros(len(cloud)))
    inf = cloud.is_infinity
    gain = np.where(inf, np.inf, abs(alpha) * cloud.gain)
    phase = cloud.phase if alpha > 0 else np.where(inf | (gain == 0), 0.0, math.pi - cloud.phase)
    return cloud.with_points(gain, phase)


def srg_invert(cloud: SrgCloud) -> SrgCloud:
    """Map a right cloud through ``z -> 1 / conj(z)`` into a left cloud.

    Moduli invert, arguments stay, and 0 and infinity swap.
    """
    if cloud.side != "right":
        raise ValueError("inversion maps a right cloud to a left cloud")
    with np.errstate(divide="ignore"):
        gain = np.where(cloud.gain == 0, np.inf,
                        np.where(cloud.is_infinity, 0.0, 1.0 / cloud.gain))
    phase = np.where(np.isinf(gain) | (gain == 0), 0.0, cloud.phase)
    return cloud.with_points(gain, phase, side="left")


def _finite_parts(cloud: SrgCloud):
    fin = ~cloud.is_infinity
    g = cloud.gain[fin]
    return g * np.cos(cloud.phase[fin]), g


def _check_pair(S1: SrgCloud, S2: SrgCloud) -> None:
    if S1.spec is not S2.spec or S1.side != S2.side:
        raise ValueError("clouds must share spec and side")


class _Boxplus:
    def __init__(self, S1, S2, tol):
        _check_pair(S1, S2)
        self.tol = tol
        self.has_inf = bool(np.any(S1.is_infinity) or np.any(S2.is_infinity))
        self.re1, self.mod1 = _finite_parts(S1)
        re2, mod2 = _finite_parts(S2)
        order = np.argsort(re2, kind="stable")
        self.re2, self.mod2 = re2[order], mod2[order]

    def __call__(self, z: complex) -> bool:
        if not np.isfinite(abs(z)):
            return self.has_inf
        tol, rz, az = self.tol, z.real, abs(z)
        target = rz - self.re1
        lo = np.searchsorted(self.re2, target - tol, "left")
        hi = np.searchsorted(self.re2, target + tol, "right")
        for i in np.flatnonzero(hi > lo):
            m2 = self.mod2[lo[i]:hi[i]]
            m1 = self.mod1[i]
            if np.any((np.abs(m1 - m2) - tol <= az) & (az <= m1 + m2 + tol)):
                return True
        return False


class _Diamond:
    def __init__(self, S1, S2, sigma, tol):
        _check_pair(S1, S2)
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.sigma, self.tol = sigma, tol
        self.has_inf = bool(np.any(S1.is_infinity) or np.any(S2.is_infinity))
        self.re1, self.mod1 = _finite_parts(S1)
        re2, mod2 = _finite_parts(S2)
        order = np.argsort(mod2, kind="stable")
        self.re2, self.mod2 = re2[order], mod2[order]

    def __call__(self, z: complex) -> bool:
        if not np.isfinite(abs(z)):
            return self.has_inf
        if len(self.mod2) == 0:
            return False
        tol, rz, az = self.tol, z.real, abs(z)
        bound = self.sigma * az + tol
        zero1 = self.mod1 == 0
        if np.any(zero1) and az <= tol:
            if np.any(np.abs(rz - self.re1[zero1, None] * self.re2[None, :]) <= bound):
                return True
        m1 = np.where(zero1, np.nan, self.mod1)
        with np.errstate(invalid="ignore"):
            lo = np.searchsorted(self.mod2, (az - tol) / m1, "left")
            hi = np.searchsorted(self.mod2, (az + tol) / m1, "right")
        for i in np.flatnonzero((hi > lo) & ~zero1):
            r2 = self.re2[lo[i]:hi[i]]
            if np.any(np.abs(rz - self.re1[i] * r2) <= bound):
                return True
        return False


def boxplus_contains(S1: SrgCloud, S2: SrgCloud, z: complex, tol: float = 1e-9) -> bool:
    """Is ``z`` in the sum region of two finite clouds?

    Needs ``z1, z2`` with ``Re z = Re z1 + Re z2`` and
    ``||z1| - |z2|| <= |z| <= |z1| + |z2|``, each within ``tol``.  Infinity
    belongs to the region iff either cloud holds it.
    """
    return _Boxplus(S1, S2, tol)(complex(z))


def diamond_contains(S1: SrgCloud, S2: SrgCloud, sigma: float, z: complex,
                     tol: float = 1e-9) -> bool:
    """Is ``z`` in the composition region of two finite clouds?

    Needs ``z1, z2`` with ``|z| = |z1||z2|`` and
    ``|Re z - Re z1 Re z2| <= sigma |z|``, each within ``tol``.
    """
    return _Diamond(S1, S2, sigma, tol)(complex(z))


def count_contained(composite: SrgCloud, S1: SrgCloud, S2: SrgCloud,
                    operation: str, sigma: float = 0.0, tol: float = 1e-9) -> tuple[int, int]:
    """``(contained, tested)`` over the composite cloud's points."""
    if operation == "add":
        test = _Boxplus(S1, S2, tol)
    elif operation == "compose":
        test = _Diamond(S1, S2, sigma, tol)
    else:
        raise ValueError("operation must be 'add' or 'compose'")
    hits = 0
    for k in range(len(composite)):
        hits += test(composite.point(k).z)
    return hits, len(composite)


def sigma_from_increments(inc: Increments, spec: PairingSpec) -> float:
    """Max of ``|| v/||v|| - cos_L(u, v) u/||u|| ||`` over the nonzero pairs."""
    spec = PairingSpec.parse(spec)
    if not spec.is_sip:
        raise ValueError(f"{spec.value} is not a semi-inner product")
    nu, nv = norm_rows(inc.U, spec), norm_rows(inc.V, spec)
    live = (nu >= ZERO_INCREMENT_RTOL * inc.ref) & (nv > 0)
    if not np.any(live):
        return 0.0
    U, V = inc.U[live] / nu[live, None], inc.V[live] / nv[live, None]
    c = cos_rows(U, V, spec, "left")
    return float(np.max(norm_rows(V - c[:, None] * U, spec)))


def estimate_sigma(A, spec: PairingSpec, sampler: "IncrementSampler | None" = None,
                   n_samples: int = 10_000, seed: int = 0) -> float:
    """Empirical lower bound of the alignment defect sigma_A (at most 2)."""
    inc = sample_increments(A, sampler or IncrementSampler(), n_samples, seed)
    return sigma_from_increments(inc, spec)
