import cmath
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pntap import aconst
from pntap.errors import BoundViolation, DomainError

ALPHA0 = 26.354133491747653
INFIMUM = 1110.817286401673


# -- power sums ------------------------------------------------------------------------

def test_power_sum_bound_examples():
    e = math.e
    assert aconst.power_sum_bound(1, 0) == pytest.approx(1.007 / (4 * e), rel=1e-15)
    assert aconst.power_sum_bound(2, 0) == pytest.approx(1.007 / (4 * e) ** 2, rel=1e-15)
    assert aconst.power_sum_bound(3, 6) == pytest.approx(1.007 * (3 / (36 * e)) ** 3, rel=1e-15)
    with pytest.raises(DomainError):
        aconst.power_sum_bound(0, 0)
    with pytest.raises(DomainError):
        aconst.power_sum_bound(1, -1)


def test_power_sum_examples():
    z = 0.3 - 0.7j
    r = aconst.power_sum_min_k(aconst.PowerSumInstance((z,), 0))
    assert r.k == 1
    assert r.value == pytest.approx(abs(z))
    assert r.value >= 1.007 / (4 * math.e) * abs(z)

    r = aconst.power_sum_min_k(aconst.PowerSumInstance((1, -1), 0))
    assert r.k == 2 and r.value == pytest.approx(2.0)
    assert r.bound == pytest.approx(1.007 * (2 / (8 * math.e)) ** 2)
    assert r.bound == pytest.approx(0.00852, abs=1e-5)

    with pytest.raises(DomainError):
        aconst.PowerSumInstance((), 0)


def test_instance_sorted_by_modulus():
    inst = aconst.PowerSumInstance((0.1, 1j, -0.5), 2)
    assert [abs(z) for z in inst.points] == [1.0, 0.5, 0.1]
    assert inst.N == 3


def test_power_sum_violation_raises():
    # no genuine input violates the bound, so reach the raise path by patching it
    inst = aconst.PowerSumInstance((1, -1), 0)
    orig = aconst.power_sum_bound
    try:
        aconst.power_sum_bound = lambda N, M: 10.0
        with pytest.raises(BoundViolation):
            aconst.power_sum_min_k(inst)
        assert aconst.power_sum_min_k(inst, check=False).ratio == pytest.approx(0.2)
    finally:
        aconst.power_sum_bound = orig


def brute_best(points, M):
    r1 = max(abs(z) for z in points)
    vals = {k: abs(sum(z**k for z in points)) / r1**k for k in range(M + 1, M + len(points) + 1)}
    return max(vals.values())


def test_power_sum_suite_random():
    out = aconst.power_sum_suite(10_000, 4, 5, seed=0)
    assert out["violations"] == 0
    assert 1 <= out["min_ratio"] < 1e3


polar = st.tuples(st.floats(1e-3, 1), st.floats(0, 2 * math.pi)).map(lambda p: cmath.rect(*p))


@settings(max_examples=500)
@given(st.lists(polar, min_size=1, max_size=4), st.integers(0, 5))
def test_power_sum_bound_property(points, M):
    res = aconst.power_sum_min_k(aconst.PowerSumInstance(tuple(points), M))
    assert M + 1 <= res.k <= M + len(points)
    assert res.ratio >= 1
    assert res.ratio * aconst.power_sum_bound(len(points), M) == pytest.approx(brute_best(points, M), rel=1e-9)
    k, best = aconst.exhaustive_best_k(points, M)
    assert best == pytest.approx(brute_best(points, M), rel=1e-9)


# -- optimisation --------------------------------------------------------------------------

def test_alpha0_root():
    a = aconst.alpha0_root()
    assert a == pytest.approx(ALPHA0, abs=1e-10)
    assert abs(aconst.alpha0_equation(a)) < 1e-10
    grid = np.linspace(20, 30, 201)
    vals = [aconst.alpha0_equation(x) for x in grid]
    assert all(b > c for c, b in zip(vals, vals[1:]))


def test_alpha0_root_high_precision():
    with mp.workdps(40):
        f = lambda a: a - mp.log(a) ** 2 - (1 + mp.log(16)) * mp.log(a) - mp.log(4) - mp.log(4) ** 2
        want = mp.findroot(f, 26)
    assert aconst.alpha0_root() == pytest.approx(float(want), abs=1e-10)


def test_optimize_constants():
    r = aconst.optimize_constants()
    assert r.objective == pytest.approx(INFIMUM, rel=1e-6)
    assert r.alpha == pytest.approx(ALPHA0, abs=1e-6)
    assert r.alpha == pytest.approx(aconst.alpha0_root(), abs=1e-6)
    assert r.A == pytest.approx((4 * math.e * r.alpha) ** (1 / r.alpha), rel=1e-12)
    assert r.B == 0 and r.boundary_active
    assert r.objective <= 1110.817286401682
    assert aconst.contraction(r.alpha, r.A, r.B) <= 1 + 1e-12


def test_infimum_closed_form():
    # at B = 0 and the active A, the objective is (4 e a)^{(4 e a)^{1/a}}
    with mp.workdps(40):
        a = mp.mpf(ALPHA0)
        val = (4 * mp.e * a) ** ((4 * mp.e * a) ** (1 / a))
    assert float(val) == pytest.approx(INFIMUM, rel=1e-12)


def test_published_feasible_point():
    a, A, B = float(aconst.PUBLISHED_ALPHA), float(aconst.PUBLISHED_A), float(aconst.PUBLISHED_B)
    assert aconst.objective(a, A, B) == pytest.approx(1110.817286401682, rel=1e-12)
    assert aconst.contraction(a, A, B) < 1


@settings(max_examples=200)
@given(st.floats(2, 80), st.floats(0, 2))
def test_active_A_is_on_the_constraint(alpha, B):
    A = aconst.active_A(alpha, B)
    assert aconst.contraction(alpha, A, B) == pytest.approx(1.0, rel=1e-9)


# -- chain audit ------------------------------------------------------------------------------

def test_verify_constant_chain_published_values():
    out = aconst.verify_constant_chain()
    assert out["all_pass"]
    assert out["objective"]["residual"] < 1e-10
    assert out["contraction"]["one_minus_value"] > 1e-14
    assert out["final_exponent"]["exponent"] == pytest.approx(18.70094, abs=1e-5)
    assert out["final_exponent"]["exponent"] <= 18.75
    assert out["theta_mapping"]["residual"] == 0
    assert out["convexity_example"]["exponent"] == pytest.approx(56.1028, abs=1e-3)
    assert out["convexity_example"]["theta"] == pytest.approx(1 - 1 / 56.102816325281075)
    assert abs(out["base_gap"]["gap"]) < 1e-8
    assert abs(out["coefficient_gap"]["gap_eta"]) < 1e-7


def test_exponent_exact_arithmetic():
    chain = aconst.ConstantChain()
    want = Fraction("112.20563265056215") * (Fraction(1, 6) + Fraction(1, 10**7))
    assert chain.exponent() == want
    assert chain.exponent(Fraction(1, 100)) == Fraction("112.20563265056215") * Fraction(10, 734)


def test_chain_detects_bad_constants():
    bad = aconst.ConstantChain(A="1.2")
    out = aconst.verify_constant_chain(bad)
    assert not out["contraction"]["pass"]
    assert not out["all_pass"]
    big_phi = aconst.ConstantChain(phi=Fraction(1, 5))
    assert not aconst.verify_constant_chain(big_phi)["final_exponent"]["pass"]


# -- j_k ----------------------------------------------------------------------------------------

def test_root_A0_A1():
    A0, A1 = aconst.root_A0_A1()
    assert A0 == pytest.approx(0.2919, abs=1e-4)
    assert abs(A0 * math.e - 1 / 1.26) < 1e-14
    assert 1.729e18 <= A1 < 1.730e18
    # second equation in log form
    assert math.log(A1) + 1 - A1 * 1e-16 / 4 == pytest.approx(-math.log(1.26), abs=1e-9)


def test_jk_values():
    for k in (1, 2, 5):
        assert aconst.jk(k, 1e-16, 0.0) == 0.0
    assert aconst.jk(0, 1e-16, 0.0) == 1.0
    assert aconst.jk(3, 0.5, 2.0) == pytest.approx(math.exp(-1) * 8 / 6)


def test_jk_decay_examples():
    A0, A1 = aconst.root_A0_A1()
    for k in range(3, 7):
        r = aconst.jk_decay_check(k, 1e-16, A0, A1, 3, 0.1)
        assert r.ok, r
        assert r.log_N1 > 1e18


def test_jk_decay_errors():
    A0, A1 = aconst.root_A0_A1()
    with pytest.raises(DomainError):
        aconst.jk_decay_check(2, 1e-16, A0, A1, 3, 0.1)
    with pytest.raises(DomainError):
        aconst.jk_decay_check(3, 1e-16, A0, A1, 3, 0.5)
    with pytest.raises(DomainError):
        aconst.jk_decay_check(0, 1e-16, A0, A1, 0, 0.1)
