"""Dirichlet L-functions by Euler--Maclaurin summation of Hurwitz zeta values.

L(s, chi) = q^{-s} sum_{a=1}^{q} chi(a) zeta(s, a/q) is evaluated as one
block: a finite head sum over n < N of (nq + a)^{-s}, the integral term,
half the boundary term, and K Bernoulli corrections.  The truncation error
is bounded by the first omitted correction times |s + 2K + 1| / (sigma + 2K + 1).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, gammaln, loggamma

from ._backend import kernels
from .chars import DirichletCharacter, character_group, root_number
from .errors import DomainError, NumericalCheckError, PoleError, PreconditionError, ResourceLimitError


@dataclass(frozen=True)
class EvalSettings:
    euler_maclaurin_terms: int = 50
    bernoulli_order: int = 30
    target_abs_error: float = 1e-10
    t_cap: float = 200.0
    q_cap: int = 200
    max_terms: int = 4000
    adaptive_head: bool = True

    def __post_init__(self):
        if self.euler_maclaurin_terms < 1 or self.bernoulli_order < 1:
            raise ValueError("term counts must be positive")
        if self.t_cap <= 0 or self.q_cap <= 0:
            raise ValueError("caps must be positive")
        if self.target_abs_error < 1e-14:
            raise ValueError("target_abs_error must be >= 1e-14")

    def with_(self, **kw) -> "EvalSettings":
        return replace(self, **kw)


DEFAULT = EvalSettings()


@lru_cache(maxsize=None)
def bernoulli_coefficients(K: int) -> np.ndarray:
    """B_{2k} / (2k)! for k = 1..K as floats."""
    from sympy import bernoulli, factorial

    return np.array([float(bernoulli(2 * k) / factorial(2 * k)) for k in range(1, K + 1)])


def _as_array(s):
    arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    return arr, np.ndim(s) == 0


def em_error_bound(s, q: int, N: int, K: int, nterms: int, offset: float = 1.0) -> np.ndarray:
    """Bound on the Euler--Maclaurin remainder of the L-function block.

    The dominant residue is the one with the smallest boundary point
    w = Nq + offset; each of the ``nterms`` residues contributes at most that.
    """
    s = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    sig = s.real
    j = np.arange(2 * K + 1)
    with np.errstate(divide="ignore"):
        logP = np.log(np.abs(s[:, None] + j[None, :])).sum(axis=1)
    w = N * q + offset
    b = abs(bernoulli_coefficients(K + 1)[K])
    logb = (
        math.log(b) + logP - sig * math.log(w) + (2 * K + 1) * math.log(q / w)
        + np.log(np.abs(s + 2 * K + 1)) - np.log(np.maximum(sig + 2 * K + 1, 1e-300))
    )
    return nterms * np.exp(logb)


# candidate head lengths for the adaptive choice
_HEAD_LADDER = (2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64, 90, 128)
_HEAD_MARGIN = 1e-3


def _choose_terms(s, q, nterms, settings: EvalSettings, offset: float = 1.0):
    """Head length N and Bernoulli order K for the requested accuracy.

    With ``adaptive_head`` the shortest head whose remainder bound sits well
    below the target is used: for Re s < 0 the head terms grow like
    (nq)^{-Re s} and a needlessly long head only adds cancellation.
    """
    K = settings.bernoulli_order
    if settings.adaptive_head:
        # keep the retained Bernoulli terms decreasing: 2 pi w >= |s| + 2K + 2
        w_min = (np.max(np.abs(s)) + 2 * K + 2) / (2 * math.pi)
        for N in _HEAD_LADDER:
            if N > settings.max_terms:
                break
            if N * q + offset < w_min:
                continue
            bound = em_error_bound(s, q, N, K, nterms, offset)
            if np.all(bound <= _HEAD_MARGIN * settings.target_abs_error):
                return N, K, bound
        N = _HEAD_LADDER[-1]
    else:
        N = settings.euler_maclaurin_terms
    while True:
        bound = em_error_bound(s, q, N, K, nterms, offset)
        if np.all(bound <= settings.target_abs_error) or N >= settings.max_terms:
            return N, K, bound
        N = min(settings.max_terms, int(N * 1.5) + 1)


def _check_caps(s, q, settings):
    if q > settings.q_cap:
        raise ResourceLimitError(f"modulus {q} exceeds q_cap {settings.q_cap}")
    if s.size and np.max(np.abs(s.imag)) > settings.t_cap:
        raise ResourceLimitError(f"|Im s| exceeds t_cap {settings.t_cap}")


def _block(s, chi_vals, q, nontrivial, settings, nterms):
    N, K, bound = _choose_terms(s, q, nterms, settings)
    bern = bernoulli_coefficients(K)
    vals = kernels.dirichlet_block(
        np.ascontiguousarray(s.real), np.ascontiguousarray(s.imag),
        np.ascontiguousarray(chi_vals.real), np.ascontiguousarray(chi_vals.imag),
        q, N, bern, nontrivial,
    )
    return vals, bound


def _zeta(s, settings):
    if np.any(np.abs(s - 1) < 1e-8):
        raise PoleError("zeta has a pole at s = 1")
    return _block(s, np.array([1.0 + 0j]), 1, False, settings, 1)


def l_values_with_error(s, chi: DirichletCharacter, settings: EvalSettings = DEFAULT):
    """(values, error bounds) of L(s, chi) on an array of points."""
    s, _ = _as_array(s)
    q = chi.modulus
    _check_caps(s, q, settings)
    if chi.is_trivial:
        z, err = _zeta(s, settings)
        if q == 1:
            return z, err
        fac = np.ones_like(s)
        from .chars import factorize

        for p, _ in factorize(q):
            fac = fac * (1 - np.exp(-s * math.log(p)))
        return z * fac, err * np.abs(fac)
    vals = chi.values()
    return _block(s, vals, q, True, settings, int(np.count_nonzero(vals)))


def l_values(s, chi: DirichletCharacter, settings: EvalSettings = DEFAULT) -> np.ndarray:
    return l_values_with_error(s, chi, settings)[0]


def l_value(s: complex, chi: DirichletCharacter, settings: EvalSettings = DEFAULT) -> complex:
    """L(s, chi) to absolute error about q * target_abs_error."""
    return complex(l_values(s, chi, settings)[0])


def hurwitz_zeta(s: complex, a: float, settings: EvalSettings = DEFAULT) -> complex:
    """zeta(s, a) = sum_{n>=0} (n + a)^{-s} for a in (0, 1]."""
    if not 0 < a <= 1:
        raise DomainError(f"a must lie in (0, 1], got {a}")
    s = complex(s)
    if abs(s - 1) < 1e-8:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    if abs(s.imag) > settings.t_cap:
        raise ResourceLimitError(f"|Im s| exceeds t_cap {settings.t_cap}")
    N, K, bound = _choose_terms(np.array([s]), 1, 1, settings, offset=a)
    bern = bernoulli_coefficients(K)
    n = np.arange(N) + a
    head = np.sum(np.exp(-s * np.log(n)))
    w = N + a
    W = cmath.exp(-s * math.log(w))
    tail = w * W / (s - 1) + 0.5 * W
    P = s
    for k in range(K):
        tail += bern[k] * P * W * w ** (-(2 * k + 1))
        P *= (s + 2 * k + 1) * (s + 2 * k + 2)
    return complex(head + tail)


# -- completed L-function -----------------------------------------------------

def _require_primitive(chi):
    if not chi.is_primitive:
        raise PreconditionError(f"character {chi.label} is not primitive")


def _log_gamma_factor(s, q, a):
    z = (s + a) / 2
    return z * math.log(q / math.pi) + loggamma(z)


def completed_l(s, chi: DirichletCharacter, settings: EvalSettings = DEFAULT):
    """Lambda(s, chi) = (q/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi), a the parity."""
    _require_primitive(chi)
    arr, scalar = _as_array(s)
    vals = np.exp(_log_gamma_factor(arr, chi.modulus, chi.parity)) * l_values(arr, chi, settings)
    return complex(vals[0]) if scalar else vals


def functional_equation_residual(s: complex, chi: DirichletCharacter, settings: EvalSettings = DEFAULT,
                                 relative: bool = False) -> float:
    """|Lambda(s, chi) - eps(chi) Lambda(1 - s, conj chi)|.

    With ``relative`` the residual is divided by max(1, |Lambda(s, chi)|).
    """
    _require_primitive(chi)
    s = complex(s)
    eps = root_number(chi)
    lhs = completed_l(s, chi, settings)
    rhs = eps * completed_l(1 - s, chi.conj(), settings)
    r = abs(lhs - rhs)
    return r / max(1.0, abs(lhs)) if relative else r


def hardy_z_complex(t, chi: DirichletCharacter, settings: EvalSettings = DEFAULT) -> np.ndarray:
    """The rotated L(1/2 + it) before taking the real part."""
    _require_primitive(chi)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    s = 0.5 + 1j * t
    q, a = chi.modulus, chi.parity
    theta = np.imag(loggamma((s + a) / 2)) + 0.5 * t * math.log(q / math.pi)
    eps = root_number(chi)
    rot = cmath.exp(-0.5j * cmath.phase(eps))
    return rot * np.exp(1j * theta) * l_values(s, chi, settings)


def hardy_z(t, chi: DirichletCharacter, settings: EvalSettings = DEFAULT, check: bool = True):
    """Real-valued function with the same zeros as L(1/2 + it, chi)."""
    scalar = np.ndim(t) == 0
    z = hardy_z_complex(t, chi, settings)
    if check:
        bad = np.abs(z.imag) > 1e-8 * np.maximum(1.0, np.abs(z.real))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NumericalCheckError(
                f"Hardy Z self-test failed for {chi.label} at t={np.atleast_1d(t)[i]}: Im={z.imag[i]:.3e}"
            )
    return float(z.real[0]) if scalar else z.real


# -- logarithmic derivative ---------------------------------------------------

DIRECT_SERIES_CAP = 10**7


def _series_tail_bound(sigma: float, N: float, k: int) -> float:
    # integral of (log u)^{k+1} u^{-sigma} / k! over u > N
    a = (sigma - 1) * math.log(N)
    return float(gammaincc(k + 2, a) * math.exp(gammaln(k + 2) - gammaln(k + 1)) / (sigma - 1) ** (k + 2))


def _direct_terms_needed(sigma, k, target):
    lo, hi = math.log(2), math.log(DIRECT_SERIES_CAP)
    if _series_tail_bound(sigma, DIRECT_SERIES_CAP, k) > target:
        return None
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _series_tail_bound(sigma, math.exp(mid), k) > target:
            lo = mid
        else:
            hi = mid
    return int(math.exp(hi)) + 1


def _direct_log_derivative(s, chi, k, N):
    from .primes import sieve_interval

    ps = sieve_interval(2, N)
    ns, lp = [ps], [np.log(ps.astype(float))]
    pw = ps.copy()
    while True:
        keep = pw <= N // ps[: pw.size]
        pw = pw[keep] * ps[: pw.size][keep]
        if pw.size == 0:
            break
        ns.append(pw)
        lp.append(np.log(ps[: pw.size].astype(float)))
    n = np.concatenate(ns)
    lam = np.concatenate(lp)
    q = chi.modulus
    cv = chi.values()[n % q] if q > 1 else np.ones(n.size)
    ln = np.log(n.astype(float))
    terms = cv * lam * ln**k / math.factorial(k) * np.exp(-s * ln)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _cauchy_log_derivative(s, chi, k, settings, npts=64):
    sig = s.real
    r = 0.5 * min(1.0, sig - 1)
    theta = 2 * np.pi * np.arange(npts) / npts
    pts = s + r * np.exp(1j * theta)
    L = l_values(pts, chi, settings)
    phase = np.unwrap(np.angle(L))
    logL = np.log(np.abs(L)) + 1j * phase
    c = np.fft.fft(logL) / npts
    m = k + 1
    cm = c[m] / r**m
    return complex((-1) ** (k + 1) * m * cm)


def log_derivative(s: complex, chi: DirichletCharacter, k: int = 0, settings: EvalSettings = DEFAULT,
                   mode: str = "auto") -> complex:
    """sum_n chi(n) Lambda(n) (log n)^k / k! n^{-s}; k = 0 gives -L'/L(s, chi).

    ``mode`` is "direct" (truncated series with a tail bound), "cauchy"
    (Taylor coefficients of log L on a circle inside Re s > 1), or "auto".
    """
    s = complex(s)
    if s.real < 1 + 1e-3:
        raise DomainError(f"log_derivative needs Re s >= 1 + 1e-3, got {s.real}")
    if k < 0:
        raise DomainError("derivative order must be >= 0")
    if mode in ("auto", "direct"):
        N = _direct_terms_needed(s.real, k, settings.target_abs_error)
        if N is not None:
            return _direct_log_derivative(s, chi, k, N)
        if mode == "direct":
            raise ResourceLimitError("direct series would exceed the term cap")
    return _cauchy_log_derivative(s, chi, k, settings)


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return character_group(q).primitive_characters()
