import math
import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sympy import isprime, primerange

from pntap import primes
from pntap.chars import euler_phi
from pntap.errors import InvalidConstraintError, InvalidResidueError, ResourceLimitError
from pntap.primes import DigitConstraint, ThetaQuery


def simple_sieve(n):
    mark = np.ones(n + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mark[p]:
            mark[p * p::p] = False
    return mark


ORACLE = simple_sieve(10**7)


def test_sieve_examples():
    assert primes.sieve_interval(10, 20).tolist() == [11, 13, 17, 19]
    assert primes.sieve_interval(2, 2).tolist() == [2]
    got = primes.sieve_interval(10**6, 10**6 + 100).tolist()
    trial = [n for n in range(10**6, 10**6 + 101) if all(n % d for d in range(2, math.isqrt(n) + 1))]
    assert got == trial and len(got) == 6


def test_sieve_cap_and_empty():
    with pytest.raises(ResourceLimitError):
        primes.sieve_interval(2, 10**6, cap=10**5)
    with pytest.raises(ValueError):
        primes.sieve_interval(20, 10)
    assert primes.sieve_interval(0, 1).size == 0


def test_sieve_matches_oracle_on_random_subintervals():
    rng = np.random.default_rng(0)
    for lo in rng.integers(0, 10**7 - 1000, size=1000):
        lo = int(lo)
        got = primes.sieve_interval(lo, lo + 999)
        want = np.flatnonzero(ORACLE[lo:lo + 1000]) + lo
        np.testing.assert_array_equal(got, want)


@given(st.integers(0, 10**5), st.integers(0, 3000))
def test_sieve_matches_sympy(lo, width):
    assert primes.sieve_interval(lo, lo + width).tolist() == list(primerange(lo, lo + width + 1))


def test_theta_examples():
    assert primes.theta_ap(10, 3, 1) == pytest.approx(math.log(7))
    assert primes.theta_ap(10, 3, 2) == pytest.approx(math.log(2) + math.log(5))
    assert primes.theta_ap(1.5, 3, 1) == 0
    with pytest.raises(InvalidResidueError):
        primes.theta_ap(100, 6, 3)


def test_theta_relative_accuracy_against_fsum():
    x = 2 * 10**6
    ps = np.flatnonzero(ORACLE[: x + 1])
    for q, a in ((1, 0), (7, 3), (30, 7)):
        sel = ps[ps % q == a % q]
        want = math.fsum(math.log(int(p)) for p in sel)
        assert primes.theta_ap(x, q, a) == pytest.approx(want, rel=1e-12)
        assert primes.prime_count_ap(x, q, a) == sel.size


def test_short_interval_examples():
    x = 1000
    assert primes.theta_short_interval(ThetaQuery(x, x, 7, 2)) == pytest.approx(primes.theta_ap(x, 7, 2), abs=1e-9)
    want = sum(math.log(p) for p in (53, 61, 73, 89, 97))
    assert primes.theta_short_interval(ThetaQuery(100, 50, 4, 1)) == pytest.approx(want)
    assert primes.theta_short_interval(ThetaQuery(114, 1, 4, 1)) == 0


def test_query_validation():
    with pytest.raises(ValueError):
        ThetaQuery(1, 1, 3, 1)
    with pytest.raises(ValueError):
        ThetaQuery(100, 0, 3, 1)
    with pytest.raises(ValueError):
        ThetaQuery(100, 200, 3, 1)
    with pytest.raises(InvalidResidueError):
        ThetaQuery(100, 10, 4, 2)


@given(st.floats(2, 5 * 10**5), st.floats(0.001, 1), st.integers(1, 40), st.integers(0, 1000))
def test_short_interval_equals_difference(x, frac, q, a):
    if math.gcd(a, q) != 1:
        a = 1
    h = max(x * frac, 1e-9)
    got = primes.theta_short_interval(ThetaQuery(x, h, q, a))
    want = primes.theta_ap(x, q, a) - primes.theta_ap(x - h, q, a)
    assert got == pytest.approx(want, abs=1e-9 * max(1.0, x / 1e4))


@pytest.mark.parametrize("q", [1, 2, 6, 10, 17, 30])
def test_partition_identity(q):
    for x in (10**3, 10**5, 10**6):
        parts = sum(primes.theta_ap(x, q, a) for a in range(q) if math.gcd(a, q) == 1)
        parts += sum(math.log(p) for p in range(2, q + 1) if q % p == 0 and isprime(p) and p <= x)
        assert parts == pytest.approx(primes.theta(x), abs=1e-8 * max(1.0, x / 1e5))


def test_chebyshev_bound():
    for x in (10**3, 10**4, 10**5, 10**6, 10**7, 10**8):
        assert primes.theta(x) < 1.1 * x


def test_class_sums_threads_agree():
    lo, hi = 10**7, 10**7 + (1 << 23)
    c1, s1 = primes.class_sums(lo, hi, 12, threads=1)
    c2, s2 = primes.class_sums(lo, hi, 12, threads=3)
    np.testing.assert_array_equal(c1, c2)
    np.testing.assert_allclose(s1, s2, rtol=1e-14)


def test_digit_examples():
    r = primes.count_prescribed_digits(DigitConstraint(10, 3, (3,), (1,)), list_primes=True)
    assert r.count == 5 and r.primes == (103, 113, 163, 173, 193)
    assert r.predicted == pytest.approx(10 / 4)
    r = primes.count_prescribed_digits(DigitConstraint(2, 4, (1,), (1,)), list_primes=True)
    assert r.primes == (11, 13)
    r = primes.count_prescribed_digits(DigitConstraint(10, 4))
    assert r.count == len(list(primerange(1000, 10000)))
    assert r.predicted == pytest.approx(10**4 / euler_phi(10))


@given(st.sampled_from([2, 3, 7, 10]), st.integers(2, 6), st.data())
def test_digit_counts_match_enumeration(base, N, data):
    A = data.draw(st.integers(0, N - 1))
    B = data.draw(st.integers(0, N - 1 - A))
    low = tuple(data.draw(st.integers(0, base - 1)) for _ in range(A))
    high = tuple(data.draw(st.integers(0, base - 1)) for _ in range(B))
    c = DigitConstraint(base, N, low, high)
    try:
        c.validate()
    except InvalidConstraintError:
        return
    def digits(p):
        out = []
        while p:
            out.append(p % base)
            p //= base
        return out
    want = []
    for p in primerange(base ** (N - 1), base**N):
        d = digits(p)
        if tuple(d[:A]) == low and (B == 0 or tuple(d[N - B:]) == high):
            want.append(p)
    got = primes.count_prescribed_digits(c, list_primes=True)
    assert list(got.primes) == want and got.count == len(want)


def test_digit_constraint_errors():
    for bad in (DigitConstraint(10, 2, (1,), (1,)), DigitConstraint(10, 3, (3,), (0,)),
                DigitConstraint(10, 3, (4,), (1,)), DigitConstraint(10, 3, (12,), ())):
        with pytest.raises(InvalidConstraintError):
            bad.validate()
    with pytest.raises(ResourceLimitError):
        primes.count_prescribed_digits(DigitConstraint(10, 12, (1,), (1,)), cap=10**9)


def test_prime_cache_roundtrip(tmp_path):
    path = tmp_path / "seg.bin"
    arr = primes.sieve_interval(1000, 5000)
    primes.write_prime_cache(path, 1000, 5000, arr)
    lo, hi, back = primes.read_prime_cache(path)
    assert (lo, hi) == (1000, 5000)
    np.testing.assert_array_equal(back, arr)
    raw = path.read_bytes()
    assert raw[:8] == b"PNTAPPRM"
    assert struct.unpack_from("<I", raw, 8)[0] == 1
    assert np.frombuffer(raw[36:44], dtype="<i8")[0] == arr[0]


def test_prime_cache_rejects_bad_files(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"nope")
    with pytest.raises(ValueError):
        primes.read_prime_cache(path)
    primes.write_prime_cache(path, 2, 100, primes.sieve_interval(2, 100))
    raw = bytearray(path.read_bytes())
    raw[8] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="version"):
        primes.read_prime_cache(path)
    primes.write_prime_cache(path, 2, 100, primes.sieve_interval(2, 100))
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(ValueError, match="length"):
        primes.read_prime_cache(path)


def test_cached_sieve_reuses_and_refreshes(tmp_path):
    path = tmp_path / "c.bin"
    a = primes.cached_sieve(path, 10, 200)
    stamp = path.stat().st_mtime_ns
    b = primes.cached_sieve(path, 10, 200)
    assert path.stat().st_mtime_ns == stamp
    np.testing.assert_array_equal(a, b)
    c = primes.cached_sieve(path, 10, 300)
    assert c[-1] == 293
