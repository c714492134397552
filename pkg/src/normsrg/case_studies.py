"""Worked examples: dual l1/l-inf monotone matrices, their cubic nonlinear
counterparts, and policy evaluation on a random MDP."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pairings import PairingSpec
from .sampling import IncrementSampler, as_rng
from .srg import (
    MatrixOperator,
    PointwiseOperator,
    SrgCloud,
    contraction_factor,
    sample_increments,
    cloud_from_increments,
    sample_srg,
)

__all__ = [
    "A1",
    "A_INF",
    "reference_matrices",
    "cubic",
    "build_F_p",
    "Mdp",
    "random_mdp",
    "default_policy",
    "bellman_apply",
    "soft_shrink",
    "regularized_bellman_apply",
    "bellman_operator",
    "ValueRangeSampler",
    "ValueIterationResult",
    "value_iteration",
    "builtin_operator",
    "BUILTIN_OPERATORS",
    "PANEL_SPECS",
    "monotonicity_panels",
    "BellmanStudy",
    "bellman_study",
]

A1 = np.array([[0.0, -2.0, -2.0],
               [0.0, 2.0, -1.0],
               [0.0, 0.0, 3.0]])
A_INF = A1.T.copy()
A1.flags.writeable = False
A_INF.flags.writeable = False


def reference_matrices() -> tuple[np.ndarray, np.ndarray]:
    """``(A1, A_inf)``: l1- and l-inf-monotone respectively, ``A_inf = A1^T``."""
    return A1.copy(), A_INF.copy()


def cubic(x):
    return x + x ** 3


def build_F_p(A) -> PointwiseOperator:
    """``x -> diag(A) phi(x) + (A - diag(A)) x`` with ``phi(t) = t + t^3`` componentwise."""
    A = np.asarray(A, dtype=np.float64)
    d = np.diag(A).copy()
    off = A - np.diag(d)

    def F(X):
        return d * cubic(X) + X @ off.T

    return PointwiseOperator(F, A.shape[0], "F")


@dataclass(frozen=True)
class Mdp:
    """Finite MDP. ``transitions[s, a, s']`` is P(s' | s, a)."""

    rewards: np.ndarray
    transitions: np.ndarray
    discount: float
    seed: "int | None" = None

    def __post_init__(self):
        r = np.asarray(self.rewards, dtype=np.float64)
        P = np.asarray(self.transitions, dtype=np.float64)
        if r.ndim != 2 or P.shape != (r.shape[0], r.shape[1], r.shape[0]):
            raise ValueError("need rewards (n, m) and transitions (n, m, n)")
        if np.any(P < 0) or np.max(np.abs(P.sum(axis=2) - 1.0)) > 1e-12:
            raise ValueError("transition rows must be probability vectors")
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must lie in (0, 1)")
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "transitions", P)

    @property
    def n_states(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_actions(self) -> int:
        return self.rewards.shape[1]

    def policy_arrays(self, policy) -> tuple[np.ndarray, np.ndarray]:
        """``(r_pi, P_pi)`` for a deterministic stationary policy."""
        pi = np.asarray(policy, dtype=int)
        if pi.shape != (self.n_states,) or np.any(pi < 0) or np.any(pi >= self.n_actions):
            raise ValueError("policy must give a valid action for every state")
        s = np.arange(self.n_states)
        return self.rewards[s, pi], self.transitions[s, pi, :]


def random_mdp(n: int, m: int, discount: float = 0.7, seed=42) -> Mdp:
    """Rows uniform on the simplex (normalized exponentials), rewards uniform on [0, 1]."""
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    rng = as_rng(seed)
    E = rng.exponential(size=(n, m, n))
    P = E / E.sum(axis=2, keepdims=True)
    r = rng.uniform(0.0, 1.0, size=(n, m))
    return Mdp(r, P, discount, seed if isinstance(seed, int) else None)


def default_policy(mdp: Mdp) -> np.ndarray:
    """Always take the first action."""
    return np.zeros(mdp.n_states, dtype=int)


def _check_dim(mdp, v):
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != mdp.n_states:
        raise ValueError(f"value vector has dimension {v.shape[-1]}, "
                         f"MDP has {mdp.n_states} states")
    return v


def bellman_apply(mdp: Mdp, policy, v) -> np.ndarray:
    """``T_pi v = r_pi + gamma P_pi v``; ``v`` may be a batch of rows."""
    v = _check_dim(mdp, v)
    r_pi, P_pi = mdp.policy_arrays(policy)
    return r_pi + mdp.discount * v @ P_pi.T


def soft_shrink(v):
    """``-v / (1 + |v|)``: bounded, sign-reversing, 1-Lipschitz."""
    return -v / (1.0 + np.abs(v))


def regularized_bellman_apply(mdp: Mdp, policy, alpha: float, v) -> np.ndarray:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    v = _check_dim(mdp, v)
    return bellman_apply(mdp, policy, v) + alpha * soft_shrink(v)


def bellman_operator(mdp: Mdp, policy=None, alpha: float = 0.0) -> PointwiseOperator:
    policy = default_policy(mdp) if policy is None else policy
    if alpha == 0:
        return PointwiseOperator(lambda V: bellman_apply(mdp, policy, V),
                                 mdp.n_states, "bellman")
    return PointwiseOperator(lambda V: regularized_bellman_apply(mdp, policy, alpha, V),
                             mdp.n_states, "bellman_reg")


@dataclass(frozen=True)
class ValueRangeSampler:
    """Value-vector pairs for Bellman operators.

    Half the draws are independent pairs uniform on ``[-bound, bound]^n``; the
    other half step from a uniform base point along a random sign vector with
    length uniform in (0, bound].
    """

    bound: float

    @property
    def id(self) -> str:
        return f"value-range@{self.bound:.6g}"

    def draw(self, n: int, count: int, seed=None):
        rng = as_rng(seed)
        half = count // 2
        b = self.bound
        X1 = rng.uniform(-b, b, size=(half, n))
        X2 = rng.uniform(-b, b, size=(half, n))
        rest = count - half
        base = rng.uniform(-b, b, size=(rest, n))
        length = b * (1.0 - rng.uniform(0.0, 1.0, size=rest))
        step = rng.choice((-1.0, 1.0), size=(rest, n))
        return (np.concatenate([X1, base + length[:, None] * step]),
                np.concatenate([X2, base]))

    @classmethod
    def for_mdp(cls, mdp: Mdp) -> "ValueRangeSampler":
        return cls(float(np.max(np.abs(mdp.rewards))) / (1.0 - mdp.discount))


@dataclass(frozen=True)
class ValueIterationResult:
    fixed_point: np.ndarray
    residuals: np.ndarray
    observed_rate: float
    converged: bool

    @property
    def n_iter(self) -> int:
        return len(self.residuals)


def value_iteration(T, v0, max_iter: int = 1000, tol_fix: float = 1e-10) -> ValueIterationResult:
    """Iterate ``v <- T v`` until the sup-norm step is at most ``tol_fix``.

    ``residuals[k] = ||v^{k+1} - v^k||_inf``.  The observed rate is
    ``(r_last / r_first) ** (1 / (K - 1))`` over the K residuals, and 0 when
    K < 2 or either endpoint residual is 0.
    """
    evaluate = T.evaluate if hasattr(T, "evaluate") else (lambda X: np.asarray(T(X[0]))[None, :])
    v = np.asarray(v0, dtype=np.float64).copy()
    residuals = []
    converged = False
    for _ in range(max_iter):
        nxt = evaluate(v[None, :])[0]
        res = float(np.max(np.abs(nxt - v)))
        residuals.append(res)
        v = nxt
        if res <= tol_fix:
            converged = True
            break
    r = np.array(residuals)
    if len(r) < 2 or r[-1] == 0 or r[0] == 0:
        rate = 0.0
    else:
        rate = float((r[-1] / r[0]) ** (1.0 / (len(r) - 1)))
    return ValueIterationResult(v, r, rate, converged)


# -- builtin operators and experiment runners ----------------------------

BUILTIN_OPERATORS = ("A1", "Ainf", "F1", "Finf", "bellman", "bellman_reg", "identity")

PANEL_SPECS = (PairingSpec.L1Sign, PairingSpec.L2Dot, PairingSpec.LInfMax)


def builtin_operator(name: str, *, n_states: int = 8, n_actions: int = 3,
                     gamma: float = 0.7, alpha: float = 0.25, mdp_seed: int = 42,
                     dim: int = 3):
    """Frozen operators by id; Bellman ids build the seeded random MDP."""
    if name == "A1":
        return MatrixOperator(A1, "A1")
    if name == "Ainf":
        return MatrixOperator(A_INF, "Ainf")
    if name == "F1":
        return _named(build_F_p(A1), "F1")
    if name == "Finf":
        return _named(build_F_p(A_INF), "Finf")
    if name == "identity":
        return MatrixOperator(np.eye(dim), "identity")
    if name in ("bellman", "bellman_reg"):
        mdp = random_mdp(n_states, n_actions, gamma, mdp_seed)
        return bellman_operator(mdp, alpha=alpha if name == "bellman_reg" else 0.0)
    raise KeyError(f"unknown operator {name!r}; builtins: {', '.join(BUILTIN_OPERATORS)}")


def _named(op: PointwiseOperator, name: str) -> PointwiseOperator:
    return PointwiseOperator(op.func, op.dim, name, op.batched)


def monotonicity_panels(n_samples: int = 5000, seed: int = 42,
                        sampler: "IncrementSampler | None" = None,
                        operators=("A1", "Ainf", "F1", "Finf"),
                        specs=PANEL_SPECS) -> dict[tuple[str, str], SrgCloud]:
    """Left SRG clouds of each operator in each norm, on shared increments."""
    sampler = sampler or IncrementSampler()
    out = {}
    for name in operators:
        inc = sample_increments(builtin_operator(name), sampler, n_samples, seed)
        meta = {"sampler": sampler.id, "n_samples": n_samples, "seed": seed, "operator": name}
        for spec in specs:
            out[(name, spec.value)] = cloud_from_increments(inc, spec, "left", meta)
    return out


@dataclass
class BellmanStudy:
    mdp: Mdp
    policy: np.ndarray
    alpha: float
    cloud: SrgCloud
    cloud_reg: SrgCloud
    factor: float
    factor_reg: float
    vi: ValueIterationResult
    vi_reg: ValueIterationResult
    meta: dict = field(default_factory=dict)

    @property
    def lipschitz_bound(self) -> float:
        return self.mdp.discount + self.alpha

    def summary(self) -> dict:
        g = self.mdp.discount
        return {
            "n_states": self.mdp.n_states,
            "n_actions": self.mdp.n_actions,
            "gamma": g,
            "alpha": self.alpha,
            "mdp_seed": self.mdp.seed,
            "policy": [int(a) for a in self.policy],
            "contraction_factor": self.factor,
            "contraction_factor_reg": self.factor_reg,
            "lipschitz_bound_reg": self.lipschitz_bound,
            "margin_reg": self.lipschitz_bound - self.factor_reg,
            "vi_rate": self.vi.observed_rate,
            "vi_rate_reg": self.vi_reg.observed_rate,
            "vi_iterations": self.vi.n_iter,
            "vi_iterations_reg": self.vi_reg.n_iter,
            "vi_converged": self.vi.converged and self.vi_reg.converged,
            **self.meta,
        }


def bellman_study(n_states: int = 8, n_actions: int = 3, gamma: float = 0.7,
                  alpha: float = 0.25, seed: int = 42, mdp_seed: int = 42,
                  n_samples: int = 5000, spec=PairingSpec.LInfMax) -> BellmanStudy:
    """Sampled l-inf SRGs of plain and regularized policy evaluation, plus value iteration."""
    mdp = random_mdp(n_states, n_actions, gamma, mdp_seed)
    policy = default_policy(mdp)
    T = bellman_operator(mdp, policy)
    T_reg = bellman_operator(mdp, policy, alpha)
    sampler = ValueRangeSampler.for_mdp(mdp)
    cloud = sample_srg(T, spec, "left", sampler, n_samples, seed)
    cloud_reg = sample_srg(T_reg, spec, "left", sampler, n_samples, seed)
    v0 = np.zeros(n_states)
    return BellmanStudy(mdp, policy, alpha, cloud, cloud_reg,
                        contraction_factor(cloud), contraction_factor(cloud_reg),
                        value_iteration(T, v0), value_iteration(T_reg, v0),
                        {"seed": seed, "n_samples": n_samples, "sampler": sampler.id,
                         "spec": PairingSpec.parse(spec).value})

