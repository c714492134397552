"""Acceptance criteria 1 to 9, one test group per criterion.

Every test is named ``test_criterion_<k>_...``; conftest prints one PASS/FAIL
line per criterion at the end of the run.
"""
import math
import time

import numpy as np
import pytest

from normsrg import cli
from normsrg.case_studies import (A1, A_INF, bellman_study, build_F_p, builtin_operator,
                                  monotonicity_panels)
from normsrg.geometry import (cos_left, cos_right, cos_rows, cosine_defect_bound_check, gain_phase_sup,
                              log_norm_closed_form, log_norm_lumer_estimate,
                              symmetric_eigenvalues)
from normsrg.pairings import (PairingSpec, jmt_pair_numeric, norm, norm_rows, pair, pair_rows,
                              parallelogram_defect, peak_info)
from normsrg.persist import cloud_to_csv
from normsrg.plotting import render_svg
from normsrg.sampling import IncrementSampler, unit_sphere_samples
from normsrg.srg import (FiniteGraph, Increments, MatrixOperator, SrgCloud, add_operators,
                         cloud_from_increments, contraction_factor, count_contained,
                         estimate_sigma, region_slack, sample_increments, sample_srg,
                         scale_operator, sigma_from_increments, srg_invert, srg_scale)

from conftest import ALL_SPECS, SIP_SPECS

X, Y = (1.0, 0.5), (0.3, 1.0)
N_CASES = 1000


# -- 1. pairing values ------------------------------------------------------

def test_criterion_1_example_pairings(note):
    t0 = time.perf_counter()
    assert abs(pair(X, Y, "l1") - 1.95) <= 1e-12
    assert abs(pair(Y, X, "l1") - 1.95) <= 1e-12
    for s in ("linf-max", "linf-min"):
        assert abs(pair(X, Y, s) - 0.5) <= 1e-12
        assert abs(pair(Y, X, s) - 0.3) <= 1e-12
    assert norm(X, "l1") == 1.5 and norm(Y, "l1") == 1.3
    assert peak_info(X).one_based() == (1,) and peak_info(Y).one_based() == (2,)
    dt = time.perf_counter() - t0
    assert dt < 1.0
    note(1, f"l1 pair {pair(X, Y, 'l1')!r}, linf 0.5 vs 0.3, {dt * 1e3:.1f} ms")


# -- 2. cosine values -------------------------------------------------------

def test_criterion_2_example_cosines(note):
    t0 = time.perf_counter()
    assert abs(cos_left(X, Y, "l1").cos_value - 1.0) <= 1e-12
    assert abs(cos_right(X, Y, "l1").cos_value - 1.0) <= 1e-12
    c2 = cos_left(X, Y, "l2").cos_value
    assert abs(c2 - 16 / math.sqrt(545)) <= 1e-12
    assert abs(cos_right(X, Y, "l2").cos_value - 16 / math.sqrt(545)) <= 1e-12
    for s in ("linf-max", "linf-min"):
        assert abs(cos_left(X, Y, s).cos_value - 0.3) <= 1e-12
        assert abs(cos_right(X, Y, s).cos_value - 0.5) <= 1e-12
    dt = time.perf_counter() - t0
    assert dt < 1.0
    note(2, f"l2 cos {c2!r}, {dt * 1e3:.1f} ms")


# -- 3. closed-form log norms -----------------------------------------------

def test_criterion_3_closed_form_log_norms(note):
    assert log_norm_closed_form(-A1, "l1") == 0.0
    assert log_norm_closed_form(-A_INF, "linf-max") == 0.0
    assert log_norm_closed_form(-A_INF, "linf-min") == 0.0
    S = 0.5 * (A1 + A1.T)
    lam = symmetric_eigenvalues(S, tol=1e-12)
    assert np.allclose(lam, np.linalg.eigvalsh(S), atol=1e-10)
    assert lam[0] < -1e-10
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        A = rng.standard_normal((n, n))
        gap = abs(log_norm_closed_form(A, "l1") - log_norm_closed_form(A.T, "linf-max"))
        worst = max(worst, gap)
    assert worst <= 1e-12
    note(3, f"lambda_min {lam[0]:.8f}, duality gap {worst:.1e}")


# -- 4. Lumer sampling ------------------------------------------------------

@pytest.mark.parametrize("A,spec", [(A1, "l1"), (A_INF, "linf-max"), (A_INF, "linf-min")],
                         ids=["A1-l1", "Ainf-linf-max", "Ainf-linf-min"])
def test_criterion_4_lumer_sampling(note, A, spec):
    t0 = time.perf_counter()
    est = log_norm_lumer_estimate(A, spec, n_samples=10_000, seed=0).estimate
    closed = log_norm_closed_form(A, spec)
    assert abs(est - closed) <= 1e-12
    assert abs(gain_phase_sup(A, spec, n_samples=10_000, seed=0) - est) <= 1e-12
    # Pointwise agreement of the two formulas on the same sample set.
    s = PairingSpec.parse(spec)
    P = unit_sphere_samples(s, 3, 10_000, 0)
    AP = P @ A.T
    lumer = pair_rows(AP, P, s)
    g = norm_rows(AP, s)
    live = g > 0
    gp = np.zeros(len(P))
    gp[live] = g[live] * cos_rows(P[live], AP[live], s, "left")
    assert np.max(np.abs(gp - lumer)) <= 1e-12
    dt = time.perf_counter() - t0
    assert dt < 5.0
    note(4, f"{spec} estimate {est!r} vs {closed!r} in {dt:.2f} s")


# -- 5. monotonicity panels -------------------------------------------------

def test_criterion_5_monotonicity_panels(note):
    t0 = time.perf_counter()
    panels = monotonicity_panels(n_samples=5000, seed=42, sampler=IncrementSampler("mixed"))
    dt = time.perf_counter() - t0

    def min_re(op, spec):
        c = panels[(op, spec)]
        return float(c.re[~c.is_infinity].min())

    for op in ("A1", "F1"):
        assert min_re(op, "l1") >= -1e-6
    for op in ("Ainf", "Finf"):
        assert min_re(op, "linf-max") >= -1e-6
    for op in ("A1", "Ainf", "F1", "Finf"):
        assert min_re(op, "l2") < -1e-6
    assert dt < 30.0
    note(5, "min re " + ", ".join(f"{op}/{s} {min_re(op, s):.2e}" for op, s in
                                  (("A1", "l1"), ("F1", "l1"), ("Ainf", "linf-max"),
                                   ("Finf", "linf-max"), ("A1", "l2"))) + f"; {dt:.2f} s")


# -- 6. Bellman certificates ------------------------------------------------

def test_criterion_6_bellman_certificates(note):
    t0 = time.perf_counter()
    s = bellman_study(n_states=8, n_actions=3, gamma=0.7, alpha=0.25, seed=42, mdp_seed=42,
                      n_samples=5000)
    dt = time.perf_counter() - t0
    margin = 0.95 - s.factor_reg
    assert s.factor <= 0.7 + 1e-9
    assert s.factor_reg <= 0.95 + 1e-9
    assert margin > 0
    assert s.vi.converged and s.vi_reg.converged
    assert s.vi.observed_rate <= s.factor + 1e-3
    assert s.vi_reg.observed_rate <= s.factor_reg + 1e-3
    assert dt < 30.0
    note(6, f"factor {s.factor:.6f}, regularized {s.factor_reg:.6f} (margin {margin:.4f}), "
            f"VI rates {s.vi.observed_rate:.4f}/{s.vi_reg.observed_rate:.4f}")


# -- 7. property suites -----------------------------------------------------

def _vectors(rng, k=2):
    """Random vectors; every fifth draw uses coarse entries so peaks and zeros tie."""
    n = int(rng.integers(2, 9))
    if rng.random() < 0.2:
        return rng.integers(-2, 3, size=(k, n)).astype(float)
    return rng.standard_normal((k, n))


def _nonzero(rng, k):
    while True:
        V = _vectors(rng, k)
        if np.all(np.any(V != 0, axis=1)):
            return V


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_criterion_7_cauchy_schwarz_compatibility_straight_angle(spec):
    rng = np.random.default_rng(101)
    for _ in range(N_CASES):
        x, y = _vectors(rng)
        nx, ny = norm(x, spec), norm(y, spec)
        assert abs(pair(x, y, spec)) <= nx * ny + 1e-12
        assert pair(x, x, spec) == pytest.approx(nx**2, rel=1e-12, abs=0)
        assert pair(-x, x, spec) == pytest.approx(-nx**2, rel=1e-12, abs=0)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_criterion_7_weak_homogeneity_partial_linearity(spec):
    rng = np.random.default_rng(102)
    for _ in range(N_CASES):
        x, y = _vectors(rng)
        p = pair(x, y, spec)
        scale = 1 + abs(p) + norm(x, spec) * norm(y, spec) + norm(y, spec) ** 2
        for s in (0.5, 2.0, 7.3):
            assert abs(pair(s * x, y, spec) - s * p) <= 1e-12 * s * scale
            assert abs(pair(x, s * y, spec) - s * p) <= 1e-12 * s * scale
        for a in (-2.0, -1.0, 0.0, 0.5, 3.0):
            lhs = pair(x + a * y, y, spec)
            assert abs(lhs - (p + a * norm(y, spec) ** 2)) <= 1e-12 * 4 * scale


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_criterion_7_cosine_identities(spec):
    rng = np.random.default_rng(103)
    for _ in range(N_CASES):
        x, y, z = _nonzero(rng, 3)
        assert cos_left(x, x, spec).cos_value == pytest.approx(1.0, abs=1e-12)
        assert cos_left(x, -x, spec).cos_value == pytest.approx(-1.0, abs=1e-12)
        c = cos_left(x, y, spec).cos_value
        for s in (0.5, 2.0, 10.0):
            assert abs(cos_left(s * x, y, spec).cos_value - c) <= 1e-12
            assert abs(cos_left(x, s * y, spec).cos_value - c) <= 1e-12
        a, b = rng.uniform(0, 2, 2)
        w = a * y + b * z
        if norm(w, spec) > 1e-9:
            nw = norm(w, spec)
            bound = (a * norm(y, spec) / nw * c
                     + b * norm(z, spec) / nw * cos_left(x, z, spec).cos_value)
            assert cos_left(x, w, spec).cos_value <= bound + 1e-12
        if spec in SIP_SPECS:
            xu, yu, zu = (v / norm(v, spec) for v in (x, y, z))
            assert cosine_defect_bound_check(xu, yu, zu, spec).holds


def test_criterion_7_parallelogram(note):
    e1, e2 = [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]
    assert parallelogram_defect(e1, e2, "l1") == 4.0
    assert parallelogram_defect(e1, e2, "linf-max") == -2.0
    rng = np.random.default_rng(104)
    failures = {"l1": 0, "linf-max": 0}
    for _ in range(N_CASES):
        x, y = _vectors(rng)
        scale = 1 + np.dot(x, x) + np.dot(y, y)
        assert abs(parallelogram_defect(x, y, "l2")) <= 1e-12 * scale
        for s in failures:
            failures[s] += int(abs(parallelogram_defect(x, y, s)) > 1e-9 * scale)
    assert failures["l1"] > 0 and failures["linf-max"] > 0
    note(7, f"{N_CASES} cases per property; parallelogram failures {failures}")


def test_criterion_7_jmt_agreement(note):
    rng = np.random.default_rng(105)
    checked = worst = 0
    while checked < N_CASES:
        n = int(rng.integers(2, 7))
        u, v = rng.uniform(-1, 1, (2, n))
        a = np.sort(np.abs(v))
        if a[-1] - a[-2] < 1e-3 or a[0] < 1e-3:
            continue  # keep v off the kinks that the step schedule would straddle
        for spec, side, ref in (("linf-max", "upper", "linf-max"),
                                ("linf-min", "upper", "linf-min"),
                                ("linf-min", "lower", "linf-min"),
                                ("l1", "upper", "l1"), ("l1", "lower", "l1")):
            gap = abs(jmt_pair_numeric(u, v, spec, side) - pair(u, v, ref))
            worst = max(worst, gap)
            assert gap <= 1e-8
        checked += 1
    note(7, f"JMT vs closed form x{N_CASES}, worst gap {worst:.1e}")


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_criterion_7_region_inequality_equivalence(spec):
    s = PairingSpec.parse(spec)
    rng = np.random.default_rng(106)
    A = rng.standard_normal((3, 3))
    inc = sample_increments(MatrixOperator(A), IncrementSampler(), N_CASES, 7)
    c = cloud_from_increments(inc, s)
    U, V = inc.U[c.draw_index], inc.V[c.draw_index]
    nu, nv = norm_rows(U, s), norm_rows(V, s)
    p = pair_rows(V, U, s)
    tests = [("lipschitz", 1.5, 1.5 * nu - nv, nu),
             ("one-sided", 0.3, 0.3 * nu**2 - p, nu**2),
             ("strongly-monotone", 0.2, p - 0.2 * nu**2, nu**2)]
    for g in (0.5, 1.0, 2.0):
        tests.append(("cocoercive", g, p - g * nv**2, nu * nv + g * nv**2))
    for prop, param, ineq, scale in tests:
        slack = region_slack(c, prop, param)
        decisive = np.abs(ineq) > 1e-12 * scale
        assert np.all((slack[decisive] >= 0) == (ineq[decisive] >= 0))


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_criterion_7_cocoercive_disk_algebra(gamma):
    rng = np.random.default_rng(107)
    z = rng.uniform(0, 2.5, N_CASES) * np.exp(1j * rng.uniform(0, math.pi, N_CASES))
    r = 1 / (2 * gamma)
    assert np.allclose(np.abs(z - r) ** 2 - r**2, np.abs(z) ** 2 - z.real / gamma, atol=1e-12)
    c = SrgCloud(np.abs(z), np.angle(z), PairingSpec.L2Dot)
    inside = region_slack(c, "cocoercive", gamma) >= 0
    target = z.real >= gamma * np.abs(z) ** 2
    decisive = np.abs(z.real - gamma * np.abs(z) ** 2) > 1e-12
    assert np.all(inside[decisive] == target[decisive])


# -- 8. calculus ------------------------------------------------------------

CALC_CASES = [("A1", "F1", "l1"), ("Ainf", "Finf", "linf-min")]


def _sigma(A, inc_outer, spec):
    indep = estimate_sigma(A, spec, IncrementSampler(), 10_000, 1)
    return 1.1 * max(indep, sigma_from_increments(inc_outer, spec))


@pytest.mark.parametrize("a,b,spec", CALC_CASES)
def test_criterion_8_addition_and_composition(a, b, spec, note):
    A, B = builtin_operator(a), builtin_operator(b)
    sampler = IncrementSampler()
    X1, X2 = sampler.draw(3, 5000, 42)
    ref = 1 + np.linalg.norm(X1, axis=1) + np.linalg.norm(X2, axis=1)
    U = X1 - X2
    YA1, YA2, YB1, YB2 = A.evaluate(X1), A.evaluate(X2), B.evaluate(X1), B.evaluate(X2)
    S_A = cloud_from_increments(Increments(U, YA1 - YA2, ref), spec)
    S_B = cloud_from_increments(Increments(U, YB1 - YB2, ref), spec)
    C = add_operators(A, B)
    S_sum = cloud_from_increments(Increments(U, C.evaluate(X1) - C.evaluate(X2), ref), spec)
    hits_add, n_add = count_contained(S_sum, S_A, S_B, "add", tol=1e-9)
    assert hits_add == n_add
    assert S_sum.re.max() <= S_A.re.max() + S_B.re.max() + 1e-9

    Z1, Z2 = A.evaluate(YB1), A.evaluate(YB2)
    ref_y = 1 + np.linalg.norm(YB1, axis=1) + np.linalg.norm(YB2, axis=1)
    inc_outer = Increments(YB1 - YB2, Z1 - Z2, ref_y)
    S_outer = cloud_from_increments(inc_outer, spec)
    S_comp = cloud_from_increments(Increments(U, Z1 - Z2, ref), spec)
    sigma = _sigma(A, inc_outer, spec)
    hits_c, n_c = count_contained(S_comp, S_outer, S_B, "compose", sigma, tol=1e-9)
    assert hits_c == n_c
    assert (contraction_factor(S_comp)
            <= contraction_factor(S_outer) * contraction_factor(S_B) + 1e-9)
    note(8, f"{a}+{b} {hits_add}/{n_add}, {a}o{b} {hits_c}/{n_c} ({spec}, sigma {sigma:.3f})")


@pytest.mark.parametrize("a,b,spec", CALC_CASES)
def test_criterion_8_scaling_and_inversion(a, b, spec, note):
    worst_scale = worst_inv = 0.0
    for name in (a, b):
        T = builtin_operator(name)
        base = sample_srg(T, spec, n_samples=5000, seed=42)
        for alpha in (-1.0, 2.0, -0.5, 0.25):
            pred = srg_scale(base, alpha)
            fresh = sample_srg(scale_operator(T, alpha), spec, n_samples=5000, seed=42)
            assert np.array_equal(pred.is_infinity, fresh.is_infinity)
            gap = np.max(np.abs(pred.to_complex(False) - fresh.to_complex(False)))
            worst_scale = max(worst_scale, gap)
            assert gap <= 1e-12
        rng = np.random.default_rng(5)
        xs = rng.standard_normal((200, 3))
        G = FiniteGraph(xs, T.evaluate(xs))
        pred = srg_invert(sample_srg(G, spec, "right", n_samples=5000, seed=42))
        fresh = sample_srg(G.inverse(), spec, "left", n_samples=5000, seed=42)
        assert np.array_equal(pred.is_infinity, fresh.is_infinity)
        fin = ~pred.is_infinity
        gap = max(np.max(np.abs(pred.gain[fin] - fresh.gain[fin]) / (1 + fresh.gain[fin])),
                  np.max(np.abs(pred.phase - fresh.phase)))
        worst_inv = max(worst_inv, gap)
        assert gap <= 1e-12
    note(8, f"{a},{b} ({spec}): scaling gap {worst_scale:.1e}, inversion gap {worst_inv:.1e}")


# -- 9. determinism ---------------------------------------------------------

def test_criterion_9_determinism(tmp_path, capsys, note):
    runs = []
    for k in range(2):
        c = sample_srg(build_F_p(A1), "l1", n_samples=5000, seed=42)
        runs.append((cloud_to_csv(c), render_svg([c])))
    assert runs[0] == runs[1]
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert cli.main(["srg", "--op", "F1", "--spec", "l1", "--seed", "42",
                         "--out-dir", str(d / "srg")]) == 0
        assert cli.main(["bellman", "--seed", "42", "--out-dir", str(d / "bellman")]) == 0
    capsys.readouterr()
    files = ["srg/cloud.csv", "srg/srg.svg", "bellman/cloud_bellman.csv",
             "bellman/cloud_bellman_reg.csv", "bellman/bellman.svg"]
    for f in files:
        assert (tmp_path / "run0" / f).read_bytes() == (tmp_path / "run1" / f).read_bytes()
    note(9, f"{len(files) + 2} artifacts byte-identical across two runs")
