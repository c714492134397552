from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from normsrg.pairings import (DEFAULT_JMT_STEPS, PairingSpec, as_vector, jmt_pair_numeric,
                              jmt_quotients, norm, pair, pair_rows, parallelogram_defect,
                              peak_info, sign_map)

from conftest import ALL_SPECS, SIP_SPECS

X, Y = (1.0, 0.5), (0.3, 1.0)


def test_spec_parsing_and_flags():
    assert PairingSpec.parse("l1") is PairingSpec.L1Sign
    assert PairingSpec.parse("LInfMax") is PairingSpec.LInfMax
    assert PairingSpec.parse(PairingSpec.L2Dot) is PairingSpec.L2Dot
    assert [s.is_sip for s in PairingSpec] == [True, True, False, True]
    with pytest.raises(ValueError):
        PairingSpec.parse("l3")


def test_norm_examples():
    assert norm(X, "l1") == 1.5
    assert norm(Y, "l1") == 1.3
    assert norm(Y, "linf-max") == 1.0
    for s in ALL_SPECS:
        assert norm([0.0, 0.0], s) == 0.0


def test_vector_validation():
    with pytest.raises(ValueError):
        as_vector([])
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError):
        pair([1.0, 2.0], [1.0], "l2")


def test_sign_map():
    assert sign_map(X).tolist() == [1, 1]
    assert sign_map([0, -3]).tolist() == [0, -1]
    assert sign_map([0, 0]).tolist() == [0, 0]


def test_peak_info():
    assert peak_info(X).one_based() == (1,)
    assert peak_info(Y).one_based() == (2,)
    p = peak_info([1, -1])
    assert p.one_based() == (1, 2) and p.min_index == 0
    assert peak_info([1.0, 0.999], tol_peak=0.01).indices == (0, 1)
    with pytest.raises(ValueError, match="no peak index"):
        peak_info([0.0, 0.0])


def _fraction_oracle(u, v, spec):
    """Exact rational evaluation of the four pairings."""
    u = [Fraction(str(a)) for a in u]
    v = [Fraction(str(a)) for a in v]
    if not any(v):
        return Fraction(0)
    if spec == "l2":
        return sum(a * b for a, b in zip(u, v))
    if spec == "l1":
        n1 = sum(abs(b) for b in v)
        return n1 * sum(a * (b > 0) - a * (b < 0) for a, b in zip(u, v))
    m = max(abs(b) for b in v)
    peaks = [i for i, b in enumerate(v) if abs(b) == m]
    if spec == "linf-max":
        return max(u[i] * v[i] for i in peaks)
    i = peaks[0]
    return m * (1 if v[i] > 0 else -1) * u[i]


def test_example_pairings_match_exact_oracle():
    assert _fraction_oracle(X, Y, "l1") == Fraction(39, 20)
    for s in ALL_SPECS:
        for a, b in ((X, Y), (Y, X)):
            assert pair(a, b, s) == pytest.approx(float(_fraction_oracle(a, b, s)), abs=1e-12)
    assert pair(X, Y, "linf-max") == 0.5 and pair(Y, X, "linf-max") == 0.3
    assert pair(X, Y, "linf-min") == 0.5 and pair(Y, X, "linf-min") == 0.3


def test_pairings_match_oracle_on_small_integer_vectors(rng):
    for _ in range(300):
        n = int(rng.integers(1, 5))
        u = rng.integers(-3, 4, size=n).astype(float)
        v = rng.integers(-3, 4, size=n).astype(float)
        for s in ALL_SPECS:
            assert pair(u, v, s) == float(_fraction_oracle(u, v, s))


def test_zero_second_argument_gives_zero():
    for s in ALL_SPECS:
        assert pair([1.0, 2.0], [0.0, 0.0], s) == 0.0


def test_straight_angle_example():
    for s in ALL_SPECS:
        assert pair([-2.0, 1.0], [2.0, -1.0], s) == pytest.approx(-norm([2.0, -1.0], s) ** 2,
                                                                  rel=1e-15)


def test_row_batch_matches_scalar(rng):
    U = rng.standard_normal((50, 4))
    V = rng.standard_normal((50, 4))
    V[::7] = 0.0
    V[3] = [1.0, -1.0, 1.0, 0.0]
    for s in ALL_SPECS:
        batch = pair_rows(U, V, PairingSpec.parse(s))
        assert batch.tolist() == [pair(u, v, s) for u, v in zip(U, V)]


def test_max_pairing_is_not_linear_in_first_argument():
    x1, x2, y = [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]
    lhs = pair(np.add(x1, x2), y, "linf-max")
    rhs = pair(x1, y, "linf-max") + pair(x2, y, "linf-max")
    assert lhs < rhs


def test_max_pairing_linearity_violation_found_by_search(rng):
    found = False
    for _ in range(2000):
        y = rng.choice([-1.0, 1.0], size=3)
        x1, x2 = rng.standard_normal(3), rng.standard_normal(3)
        lhs = pair(x1 + x2, y, "linf-max")
        rhs = pair(x1, y, "linf-max") + pair(x2, y, "linf-max")
        assert lhs <= rhs + 1e-12
        found |= rhs - lhs > 1e-6
    assert found


@pytest.mark.parametrize("spec", SIP_SPECS)
def test_sip_first_argument_linearity(rng, spec):
    for _ in range(1000):
        n = int(rng.integers(2, 8))
        x1, x2, y = rng.standard_normal((3, n))
        a, b = rng.standard_normal(2)
        lhs = pair(a * x1 + b * x2, y, spec)
        rhs = a * pair(x1, y, spec) + b * pair(x2, y, spec)
        assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(rhs)))


def test_jmt_examples():
    assert jmt_pair_numeric(X, Y, "linf-max") == pytest.approx(0.5, abs=1e-8)
    assert jmt_pair_numeric(X, Y, "l1") == pytest.approx(1.95, abs=1e-8)
    for s in ALL_SPECS:
        for side in ("upper", "lower"):
            assert jmt_pair_numeric([1, 2], [1, 2], s, side) == pytest.approx(
                norm([1, 2], s) ** 2, abs=1e-5)


def test_jmt_lower_side_of_max_norm_is_min_over_peaks():
    u, v = [1.0, 3.0], [1.0, 1.0]
    assert jmt_pair_numeric(u, v, "linf-max", "upper") == pytest.approx(3.0, abs=1e-8)
    assert jmt_pair_numeric(u, v, "linf-max", "lower") == pytest.approx(1.0, abs=1e-8)


def test_jmt_l2_converges_linearly_in_step(rng):
    u, v = rng.standard_normal((2, 4))
    q = jmt_quotients(u, v, "l2")
    err = np.abs(q - pair(u, v, "l2"))
    assert err[-1] < 1e-5 and err[0] > err[1] > err[2]
    assert len(q) == len(DEFAULT_JMT_STEPS)


def test_jmt_validation():
    with pytest.raises(ValueError):
        jmt_pair_numeric([1, 0], [0, 0], "l1")
    with pytest.raises(ValueError):
        jmt_quotients([1, 0], [1, 0], "l1", steps=(1e-4, 1e-2))
    with pytest.raises(ValueError):
        jmt_quotients([1, 0], [1, 0], "l1", side="middle")


def test_parallelogram_examples():
    e1, e2 = [1.0, 0.0], [0.0, 1.0]
    assert parallelogram_defect(e1, e2, "l2") == 0.0
    assert parallelogram_defect(e1, e2, "l1") == 4.0
    assert parallelogram_defect(e1, e2, "linf-max") == -2.0


# Tiny magnitudes are flushed to zero so squared norms cannot underflow.
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False).map(
    lambda a: 0.0 if abs(a) < 1e-100 else a)
vec_pairs = st.integers(1, 6).flatmap(
    lambda n: st.tuples(arrays(np.float64, n, elements=finite),
                        arrays(np.float64, n, elements=finite)))


@settings(max_examples=300, deadline=None, derandomize=True)
@given(vec_pairs, st.sampled_from(ALL_SPECS))
def test_hypothesis_cauchy_schwarz_and_compatibility(xy, spec):
    x, y = xy
    nx, ny = norm(x, spec), norm(y, spec)
    assert abs(pair(x, y, spec)) <= nx * ny * (1 + 1e-12)
    assert pair(x, x, spec) == pytest.approx(nx * nx, rel=1e-12)
    assert pair(-x, x, spec) == pytest.approx(-nx * nx, rel=1e-12)


@settings(max_examples=300, deadline=None, derandomize=True)
@given(vec_pairs, st.sampled_from(ALL_SPECS), st.floats(0.01, 100))
def test_hypothesis_weak_homogeneity(xy, spec, s):
    x, y = xy
    p = pair(x, y, spec)
    tol = 1e-12 * (1 + s) * (1 + norm(x, spec) * norm(y, spec))
    assert pair(s * x, y, spec) == pytest.approx(s * p, abs=tol)
    assert pair(x, s * y, spec) == pytest.approx(s * p, abs=tol)
    assert pair(-x, -y, spec) == pytest.approx(p, abs=tol)
