"""Segmented sieving and Chebyshev sums over primes in progressions.

All sums are over primes only (no prime powers).  Accumulation of
``log p`` is compensated (Neumaier in the compiled kernel, ``math.fsum``
in the numpy fallback).
"""
from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from .chars import euler_phi
from .errors import InvalidConstraintError, InvalidModulusError, InvalidResidueError, ResourceLimitError

SIEVE_CAP = 10**10

_base_cache = np.array([3, 5, 7], dtype=np.int64)
_base_limit = 7


def base_primes(limit: int) -> np.ndarray:
    """Odd primes <= limit (int64), from a cached simple sieve."""
    global _base_cache, _base_limit
    limit = int(limit)
    if limit > _base_limit:
        n = max(limit, 2 * _base_limit)
        mark = np.ones(n + 1, dtype=bool)
        mark[:2] = False
        mark[4::2] = False
        for p in range(3, math.isqrt(n) + 1, 2):
            if mark[p]:
                mark[p * p::2 * p] = False
        _base_cache = np.flatnonzero(mark)[1:].astype(np.int64)
        _base_limit = n
    return _base_cache[: np.searchsorted(_base_cache, limit, side="right")]


def _check_range(lo: int, hi: int, cap: int | None):
    cap = SIEVE_CAP if cap is None else cap
    if hi > cap:
        raise ResourceLimitError(f"sieve bound {hi} exceeds cap {cap}")


def sieve_interval(lo: int, hi: int, cap: int | None = None) -> np.ndarray:
    """Ascending primes in [lo, hi]."""
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    _check_range(lo, hi, cap)
    if hi < 2:
        return np.zeros(0, dtype=np.int64)
    return kernels.primes_between(max(lo, 2), hi, base_primes(math.isqrt(hi)))


def _chunks(lo, hi, threads):
    if threads <= 1 or hi - lo < 1 << 22:
        return [(lo, hi)]
    step = -(-(hi - lo + 1) // threads)
    return [(a, min(hi, a + step - 1)) for a in range(lo, hi + 1, step)]


def class_sums(lo: int, hi: int, q: int, threads: int = 1, cap: int | None = None):
    """(counts, sums) over residue classes mod q of primes in [lo, hi]."""
    lo, hi, q = max(int(lo), 2), int(hi), int(q)
    if q < 1:
        raise InvalidModulusError(f"modulus must be >= 1, got {q}")
    if hi < lo:
        return np.zeros(q, dtype=np.int64), np.zeros(q)
    _check_range(lo, hi, cap)
    base = base_primes(math.isqrt(hi))
    parts = _chunks(lo, hi, threads)
    if len(parts) == 1:
        return kernels.class_sums(lo, hi, q, base)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        results = list(ex.map(lambda r: kernels.class_sums(r[0], r[1], q, base), parts))
    counts = sum(r[0] for r in results)
    sums = np.array([math.fsum(r[1][c] for r in results) for c in range(q)])
    return counts, sums


def _check_residue(q, a):
    if q < 1:
        raise InvalidModulusError(f"modulus must be >= 1, got {q}")
    if math.gcd(int(a), int(q)) != 1:
        raise InvalidResidueError(f"gcd({a}, {q}) != 1")


def _progression(lo, hi, q, a, cap=None):
    lo, hi = max(int(lo), 2), int(hi)
    if hi < lo:
        return 0, 0.0
    _check_range(lo, hi, cap)
    return kernels.progression_sum(lo, hi, int(q), int(a) % int(q), base_primes(math.isqrt(hi)))


def theta_ap(x: float, q: int, a: int, cap: int | None = None) -> float:
    """Sum of log p over primes p <= x with p = a (mod q)."""
    _check_residue(q, a)
    return _progression(2, math.floor(x), q, a, cap)[1]


def theta(x: float, cap: int | None = None) -> float:
    """Unrestricted sum of log p over p <= x."""
    return _progression(2, math.floor(x), 1, 0, cap)[1]


def prime_count_ap(x: float, q: int, a: int, cap: int | None = None) -> int:
    _check_residue(q, a)
    return _progression(2, math.floor(x), q, a, cap)[0]


@dataclass(frozen=True)
class ThetaQuery:
    x: float
    h: float
    q: int
    a: int

    def __post_init__(self):
        if not self.x >= 2:
            raise ValueError(f"x must be >= 2, got {self.x}")
        if not 0 < self.h <= self.x:
            raise ValueError(f"h must lie in (0, x], got {self.h}")
        _check_residue(self.q, self.a)

    @property
    def integer_range(self) -> tuple[int, int]:
        """Integers n with x - h < n <= x."""
        return math.floor(self.x - self.h) + 1, math.floor(self.x)


def theta_short_interval(query: ThetaQuery, cap: int | None = None) -> float:
    """Sum of log p over x - h < p <= x with p = a (mod q)."""
    lo, hi = query.integer_range
    return _progression(lo, hi, query.q, query.a, cap)[1]


@dataclass(frozen=True)
class DigitConstraint:
    """Primes with N base-ell digits whose A lowest and B highest digits are fixed.

    ``low`` lists d_0..d_{A-1}; ``high`` lists d_{N-B}..d_{N-1} (most
    significant last, matching the digit index).
    """

    base: int
    N: int
    low: tuple = ()
    high: tuple = ()

    @property
    def A(self) -> int:
        return len(self.low)

    @property
    def B(self) -> int:
        return len(self.high)

    def validate(self):
        ell = self.base
        if ell < 2 or self.N < 1:
            raise InvalidConstraintError("need base >= 2 and N >= 1")
        if self.A + self.B >= self.N:
            raise InvalidConstraintError(f"A + B = {self.A + self.B} must be < N = {self.N}")
        if any(not 0 <= d < ell for d in (*self.low, *self.high)):
            raise InvalidConstraintError("digits must lie in [0, base)")
        if self.B and self.high[-1] == 0:
            raise InvalidConstraintError("leading digit d_{N-1} must be nonzero")
        if self.A and math.gcd(self.low[0], ell) != 1:
            raise InvalidConstraintError("units digit d_0 must be coprime to the base")

    def progression(self) -> tuple[int, int]:
        """(modulus ell^A, residue) encoding the low digits."""
        return self.base**self.A, sum(d * self.base**j for j, d in enumerate(self.low))

    def interval(self) -> tuple[int, int]:
        """Inclusive integer range encoding the N-digit window and the high digits."""
        ell, N, B = self.base, self.N, self.B
        if B == 0:
            return ell ** (N - 1), ell**N - 1
        top = sum(d * ell**j for j, d in enumerate(self.high))
        width = ell ** (N - B)
        return top * width, (top + 1) * width - 1


@dataclass(frozen=True)
class DigitCount:
    count: int
    log_weighted: float
    predicted: float
    primes: tuple | None = None

    @property
    def ratio(self) -> float:
        return self.count / self.predicted

    def log_ratio(self, c: DigitConstraint) -> float:
        """log-weighted sum against its natural main term ell^{N-B}/phi(ell^A)."""
        mod, _ = c.progression()
        return self.log_weighted / (c.base ** (c.N - c.B) / euler_phi(mod))


def count_prescribed_digits(c: DigitConstraint, list_primes: bool = False, cap: int | None = None) -> DigitCount:
    c.validate()
    if c.base**c.N > (SIEVE_CAP if cap is None else cap):
        raise ResourceLimitError(f"{c.base}^{c.N} exceeds sieve cap")
    mod, res = c.progression()
    lo, hi = c.interval()
    predicted = c.base ** (c.N - c.A - c.B) / euler_phi(c.base)
    if list_primes:
        ps = sieve_interval(max(lo, 2), hi, cap)
        ps = ps[ps % mod == res]
        return DigitCount(int(ps.size), math.fsum(np.log(ps.astype(float))), predicted, tuple(int(p) for p in ps))
    count, logs = _progression(lo, hi, mod, res, cap)
    return DigitCount(int(count), float(logs), predicted)


# -- binary cache -------------------------------------------------------------

_MAGIC = b"PNTAPPRM"
_VERSION = 1
_HEADER = struct.Struct("<8sIqqq")


def write_prime_cache(path, lo: int, hi: int, primes: np.ndarray):
    """Store a sieved segment as a versioned little-endian int64 list."""
    arr = np.ascontiguousarray(primes, dtype="<i8")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _VERSION, int(lo), int(hi), arr.size))
        f.write(arr.tobytes())


def read_prime_cache(path):
    """Return (lo, hi, primes) from a file written by :func:`write_prime_cache`."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated prime cache")
    magic, version, lo, hi, n = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError("not a prime cache file")
    if version != _VERSION:
        raise ValueError(f"unsupported prime cache version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * n:
        raise ValueError("prime cache length mismatch")
    return lo, hi, np.frombuffer(body, dtype="<i8").astype(np.int64)


def cached_sieve(path, lo: int, hi: int, cap: int | None = None) -> np.ndarray:
    """Sieve [lo, hi], reusing ``path`` when it holds exactly that range."""
    p = Path(path)
    if p.exists():
        try:
            clo, chi, arr = read_prime_cache(p)
            if (clo, chi) == (lo, hi):
                return arr
        except ValueError:
            pass
    arr = sieve_interval(lo, hi, cap)
    write_prime_cache(p, lo, hi, arr)
    return arr
