import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from pntap import pnt
from pntap.chars import character_group, euler_phi
from pntap.errors import DomainError, InvalidResidueError, PreconditionError, StaleInputError
from pntap.primes import theta_ap
from pntap.zeros import ExceptionalZero, ZeroRecord, ZeroSet, synthetic_exceptional


def real_char(q):
    return [c for c in character_group(q).real_characters() if not c.is_trivial][0]


def mp_lambda(x, h, beta1, chi_a):
    with mp.workdps(40):
        x, h, b = mp.mpf(x), mp.mpf(h), mp.mpf(beta1)
        return float(1 - chi_a * (x**b - (x - h) ** b) / (b * h))


# -- lambda ------------------------------------------------------------------------

def test_lambda_examples():
    none = ExceptionalZero(7, False, 0.99)
    assert pnt.lambda_(1e5, 7, 3, 1e3, none) == 1.0
    assert pnt.lambda_(1e5, 7, 3, 1e3, None) == 1.0

    chi = real_char(7)
    exc = synthetic_exceptional(7, 0.995, chi)
    x = 1e6
    for a in (1, 3):
        want = 1 - exc.chi1_at(a) * x ** (exc.beta1 - 1) / exc.beta1
        assert pnt.lambda_(x, 7, a, x, exc) == pytest.approx(want, rel=1e-13)

    v = pnt.lambda_value(1e6, 1e5, 0.999, -1)
    assert 1 < v < 2
    assert v == pytest.approx(pnt.lambda_quadrature(1e6, 1e5, 0.999, -1), abs=1e-10)


def test_lambda_errors():
    with pytest.raises(DomainError):
        pnt.lambda_(100, 7, 1, 3, None)
    with pytest.raises(DomainError):
        pnt.lambda_(100, 7, 1, 200, None)
    with pytest.raises(InvalidResidueError):
        pnt.lambda_(100, 7, 14, 50, None)


def test_lambda_matches_quadrature_grid():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = 10 ** rng.uniform(2, 9)
        h = max(4.0, x * 10 ** rng.uniform(-4, 0))
        beta1 = rng.uniform(0.97, 1)
        chi_a = int(rng.choice([-1, 1]))
        lam = pnt.lambda_value(x, h, beta1, chi_a)
        assert lam == pytest.approx(pnt.lambda_quadrature(x, h, beta1, chi_a), abs=1e-10)
        assert lam == pytest.approx(mp_lambda(x, h, beta1, chi_a), abs=1e-12)


def test_xi_in_interval():
    for x, h, b in ((1e6, 1e5, 0.99), (1e4, 1e4, 0.98), (1e8, 1e4, 0.999)):
        z = pnt.xi(x, h, b)
        assert x - h < z < x
        assert 1 - z ** (b - 1) == pytest.approx(pnt.lambda_value(x, h, b, 1), rel=1e-8)


def test_lambda_bounds_examples():
    assert pnt.lambda_bounds_check(1e4, 1e2, 0.98, 1)
    assert pnt.lambda_bounds_check(1e4, 1e2, 0.98, -1)
    assert pnt.lambda_bounds_check(1e6, 1e3, 1 - 1e-8, 1)
    lam = pnt.lambda_value(1e6, 1e3, 1 - 1e-8, 1)
    lower = 1e-8 * math.log(1e6) / 8
    assert lower < lam < 20 * lower
    with pytest.raises(DomainError):
        pnt.lambda_bounds_check(1e4, 50, 0.98, 1)
    with pytest.raises(DomainError):
        pnt.lambda_bounds_check(1e4, 1e2, 0.96, 1)
    with pytest.raises(DomainError):
        pnt.lambda_bounds_check(1e4, 1e2, 0.98, 0)


@settings(max_examples=10_000)
@given(st.floats(4, 1e15), st.floats(0, 1), st.floats(0.97, 1, exclude_min=True, exclude_max=True),
       st.sampled_from([-1, 1]))
def test_lambda_bounds_grid(x, frac, beta1, chi_a):
    h = math.sqrt(x) + frac * (x - math.sqrt(x))
    h = min(max(h, math.sqrt(x)), x)
    assert pnt.lambda_bounds_check(x, h, beta1, chi_a)


# -- theta, Siegel floor --------------------------------------------------------------

def test_theta_constant_and_policy():
    assert pnt.theta_constant(True) == Fraction(71, 75)
    assert pnt.theta_constant(False) == Fraction(7, 12)
    assert pnt.theta_policy(True, lambda_one=True) == (Fraction(7, 12), True)
    assert pnt.theta_policy(False, lambda_one=True) == (Fraction(7, 12), False)


def test_siegel_floor():
    pnt.siegel_floor_check(100, 0.95, 0.5)
    with pytest.raises(DomainError):
        pnt.siegel_floor_check(100, 0.99, 0.5)
    with pytest.raises(DomainError):
        synthetic_exceptional(101, 0.9999, real_char(101), b_siegel=0.5)
    assert synthetic_exceptional(101, 0.998, real_char(101), b_siegel=0.01).exists


# -- zero-free regions --------------------------------------------------------------------

def test_zfr_examples():
    vk = pnt.ZeroFreeRegionProfile("VK", c_vk=0.05)
    assert pnt.zfr_delta(math.e, math.exp(10), vk) == pytest.approx(0.005, rel=1e-15)

    iw = pnt.ZeroFreeRegionProfile("IWANIEC", squarefree_part=2)
    qt = math.e
    want = (1 / (4 * 10**4)) / (math.log(2) + 1.0 * pnt.log_plus(1.0) ** 0.75)
    assert pnt.zfr_delta(math.e, qt / math.e, iw) == pytest.approx(want)
    iw8 = pnt.ZeroFreeRegionProfile("IWANIEC")
    assert pnt.zfr_delta(10.0, 8, iw8) == pytest.approx(pnt.zfr_delta(10.0, 8, iw))

    dh = pnt.ZeroFreeRegionProfile("DH", beta1=0.9)
    assert pnt.zfr_delta(100.0, 1000, dh) == 0.0
    dh = pnt.ZeroFreeRegionProfile("DH", beta1=1 - 1e-6)
    assert pnt.zfr_delta(10.0, 5, dh) > 0
    with pytest.raises(DomainError):
        pnt.zfr_delta(2.0, 5, vk)


def test_profile_validation():
    with pytest.raises(ValueError):
        pnt.ZeroFreeRegionProfile("XYZ")
    with pytest.raises(ValueError):
        pnt.ZeroFreeRegionProfile("VK", c_vk=0)
    with pytest.raises(ValueError):
        pnt.ZeroFreeRegionProfile("DH")


def test_log_plus():
    assert pnt.log_plus(0.5) == 0.0
    assert pnt.log_plus(1.0) == 0.0
    assert pnt.log_plus(math.e) == pytest.approx(1.0)
    assert pnt.log_plus(-3.0) == 0.0


# -- envelopes -----------------------------------------------------------------------------

def envelope_oracle(x, h, q, C):
    # written from the formula, with mpmath and no shared helpers
    with mp.workdps(30):
        x, h, q = mp.mpf(x), mp.mpf(h), mp.mpf(q)
        lxh = mp.log(x / h)
        lp = mp.log(lxh) if lxh > 1 else mp.mpf(0)
        den = mp.log(q) + lxh ** (mp.mpf(2) / 3) * lp ** (mp.mpf(1) / 3) \
            + mp.log(x) ** mp.mpf("0.4") * mp.log(mp.log(x)) ** mp.mpf("0.2")
        return float(mp.exp(-C * mp.log(x) / den))


def test_envelope_examples():
    v = pnt.error_envelope(1e6, 1e5, 101, 0.05, "VK")
    assert 0 < v < 1
    assert v == pytest.approx(envelope_oracle(1e6, 1e5, 101, 0.05), rel=1e-12)
    vals = [pnt.error_envelope(1e6, 1e5, 101, C) for C in (0.1, 1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-10
    # h = x: the log(x/h) term drops out
    assert pnt.error_envelope(1e6, 1e6, 7, 1.0) == pytest.approx(envelope_oracle(1e6, 1e6, 7, 1.0), rel=1e-12)
    with pytest.raises(PreconditionError):
        pnt.error_envelope(1e6, 1e5, 101, 1.0, "GALLAGHER")
    with pytest.raises(ValueError):
        pnt.error_envelope(1e6, 1e5, 101, 1.0, "NOPE")
    with pytest.raises(DomainError):
        pnt.error_envelope(1e6, 1e5, 101, 0.0)


@pytest.mark.parametrize("flavor", pnt.ENVELOPE_FLAVORS)
def test_envelope_decreasing_in_x(flavor):
    for q in (3, 101, 1000):
        for ratio in (1.0, 0.1, 1e-3):
            xs = np.logspace(4, 14, 40)
            vals = [pnt.error_envelope(x, max(4.0, ratio * x), q, 0.5, flavor, beta1=0.99) for x in xs]
            assert all(a > b for a, b in zip(vals, vals[1:]))
            assert all(0 < v <= 1 for v in vals)


# -- explicit formula ------------------------------------------------------------------------

def test_explicit_formula_empty_zero_set():
    for q, a in ((3, 1), (7, 4), (1, 0)):
        assert pnt.explicit_formula_theta(1e4, 10, q, a, {}) == pytest.approx(1e4 / euler_phi(q))


def test_explicit_formula_synthetic_low_zero():
    chi = character_group(1)[0]
    rho = complex(0.5, 0.5)
    zs = ZeroSet(chi.label, 1, 20.0, [ZeroRecord(0.5, 0.5, chi.label), ZeroRecord(-0.5, 0.5, chi.label)])
    x = 1e3
    want = x - 2 * (x**rho / rho - 1 / rho).real
    assert pnt.explicit_formula_theta(x, 10, 1, 0, {chi.label: zs}) == pytest.approx(want, rel=1e-13)


def test_explicit_formula_exceptional_term():
    chi1 = real_char(5)
    exc = synthetic_exceptional(5, 0.995, chi1)
    x = 1e4
    for a in (1, 2):
        want = x / 4 - exc.chi1_at(a) / 4 * x**0.995 / 0.995
        assert pnt.explicit_formula_theta(x, 10, 5, a, {}, exc) == pytest.approx(want, rel=1e-13)


def test_explicit_formula_stale_and_errors():
    zs = pnt.zero_sets_for_modulus(3, 20)
    with pytest.raises(StaleInputError):
        pnt.explicit_formula_theta(1e4, 30, 3, 1, zs)
    partial = {k: v for k, v in zs.items() if k.endswith(".0")}
    with pytest.raises(StaleInputError):
        pnt.explicit_formula_theta(1e4, 10, 3, 1, partial)
    with pytest.raises(InvalidResidueError):
        pnt.explicit_formula_theta(1e4, 10, 3, 3, zs)
    with pytest.raises(DomainError):
        pnt.explicit_formula_theta(1.5, 10, 3, 1, zs)


@pytest.mark.parametrize("x,T,q,a", [(1e5, 30, 3, 1), (1e4, 50, 4, 3)])
def test_explicit_formula_against_sieve(x, T, q, a):
    zs = pnt.zero_sets_for_modulus(q, T)
    actual = theta_ap(x, q, a)
    slack = pnt.explicit_formula_slack(x, T)
    for mode in pnt.LOWER_ORDER_MODES:
        dev = abs(pnt.explicit_formula_theta(x, T, q, a, zs, lower_order=mode) - actual)
        assert dev < slack
    rows = pnt.explicit_formula_audit(x, q, a, [10, T], zs)
    assert [r["T"] for r in rows] == [10, T]
    assert all(r["ratio"] == pytest.approx(r["deviation"] / r["slack"]) for r in rows)


def test_explicit_formula_exact_mode_is_sharp():
    zs = pnt.zero_sets_for_modulus(1, 80)
    x = 1e4
    dev = abs(pnt.explicit_formula_theta(x, 80, 1, 0, zs, lower_order="exact") - theta_ap(x, 1, 0))
    assert dev < 0.02 * math.sqrt(x) * math.log(x)


# -- predictions ------------------------------------------------------------------------------

def test_predict_examples():
    r = pnt.predict_and_compare(1e6, 1e6, 5, 1)
    assert r.relative_error < 0.05
    assert r.lam == 1.0 and r.theta_exponent == "7/12"
    assert r.range_condition_met

    r = pnt.predict_and_compare(1e7, 1e6, 3, 2)
    assert r.relative_error < 0.1

    r = pnt.predict_and_compare(1e6, 100, 5, 1)
    assert not r.range_condition_met
    assert r.actual >= 0 and r.relative_error is not None

    with pytest.raises(InvalidResidueError):
        pnt.predict_and_compare(1e6, 1e5, 6, 3)


def test_predict_identity_with_synthetic_zero():
    chi1 = real_char(7)
    exc = synthetic_exceptional(7, 0.99, chi1)
    for a in range(1, 7):
        r = pnt.predict_and_compare(1e6, 1e5, 7, a, exc=exc)
        assert r.predicted == r.primary_term + r.secondary_term
        assert r.predicted == pytest.approx(r.lam * r.h / 6, rel=1e-12)
        assert r.theta_exponent == "71/75"
        assert r.exceptional["synthetic"]
    r = pnt.predict_and_compare(1e6, 1e5, 7, 1, exc=exc, lambda_one=True)
    assert r.lam == 1.0 and r.secondary_term == 0.0 and r.theta_exponent == "7/12"


def test_report_serialization():
    r = pnt.predict_and_compare(1e5, 1e4, 3, 1)
    d = r.to_dict()
    assert "lambda" in d and "lam" not in d
    csv_text = pnt.reports_to_csv([r, r])
    lines = csv_text.splitlines()
    assert lines[0] == ",".join(pnt.REPORT_COLUMNS)
    assert len(lines) == 3


def test_read_queries_csv():
    text = "x,h,q,a\n# comment\n1e6,1e5,7,3\n\n1000000,100000,5,2\n"
    assert pnt.read_queries_csv(text) == [(1e6, 1e5, 7, 3), (1e6, 1e5, 5, 2)]
    assert pnt.read_queries_csv("1e4,100,3,1") == [(1e4, 100.0, 3, 1)]
    with pytest.raises(ValueError):
        pnt.read_queries_csv("1e4,100,3,1\nbad,row,x,y\n")


# -- Brun--Titchmarsh --------------------------------------------------------------------------

def test_brun_titchmarsh_examples():
    bt = pnt.brun_titchmarsh_audit(1e6, 1e5, 101, 0.5)
    assert bt.passed and len(bt.ratios) == 100
    assert bt.bound == 1.5

    bt = pnt.brun_titchmarsh_audit(1e6, 1e6, 3, 0.5)
    assert all(abs(r - 1) < 0.01 for r in bt.ratios.values())

    bt = pnt.brun_titchmarsh_audit(1e6, 1e6, 2, 0.5)
    assert len(bt.ratios) == 1
    assert abs(bt.max_ratio - 1) < 0.01

    exc = synthetic_exceptional(101, 0.998, real_char(101))
    assert pnt.brun_titchmarsh_audit(1e6, 1e5, 101, 0.5, exc).bound == 2.5
    with pytest.raises(DomainError):
        pnt.brun_titchmarsh_audit(1e6, 1e5, 101, 0)


@settings(max_examples=30)
@given(st.integers(3, 60), st.integers(0, 10**6))
def test_bt_ratios_match_theta(q, seed):
    x = 1e5
    h = 2e4
    bt = pnt.brun_titchmarsh_audit(x, h, q, 1.0)
    a = sorted(bt.ratios)[seed % len(bt.ratios)]
    assume(math.gcd(a, q) == 1)
    direct = euler_phi(q) * (theta_ap(x, q, a) - theta_ap(x - h, q, a)) / h
    assert bt.ratios[a] == pytest.approx(direct, rel=1e-12, abs=1e-12)
