# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

Two hot loops live here:

* an odd-only segmented Eratosthenes sieve, with consumers that either
  materialise the primes or accumulate ``sum log p`` per residue class with
  Neumaier compensation;
* the finite Dirichlet-series block of the Euler--Maclaurin evaluation of
  ``sum_a chi(a) q^{-s} zeta(s, a/q)``.

The pure-numpy twin is :mod:`pntap._pycore`; both expose the same functions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, cos, sin, fabs
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

BACKEND = "cython"
DEF SEG_ODDS = 1 << 19          # odd numbers per block -> 2**20 integers


cdef inline void _neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef void _mark(unsigned char *buf, long long seg_lo, long long nodd,
                const long long *bp, Py_ssize_t nbp) noexcept nogil:
    # buf[i] <-> seg_lo + 2*i, seg_lo odd
    cdef Py_ssize_t k
    cdef long long p, start, j, seg_hi = seg_lo + 2 * (nodd - 1)
    memset(buf, 1, nodd)
    if seg_lo == 1:
        buf[0] = 0
    for k in range(nbp):
        p = bp[k]
        if p * p > seg_hi:
            break
        start = ((seg_lo + p - 1) // p) * p
        if start < p * p:
            start = p * p
        if (start & 1) == 0:
            start += p
        j = (start - seg_lo) >> 1
        while j < nodd:
            buf[j] = 0
            j += p


cdef inline long long _odd_floor_lo(long long lo):
    if lo < 3:
        lo = 3
    if (lo & 1) == 0:
        lo += 1
    return lo


def primes_between(long long lo, long long hi, cnp.int64_t[::1] base):
    """Ascending primes in [lo, hi]; ``base`` holds the odd primes <= sqrt(hi)."""
    chunks = []
    if lo <= 2 <= hi:
        chunks.append(np.array([2], dtype=np.int64))
    cdef long long start = _odd_floor_lo(lo)
    if hi < start:
        return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    cdef unsigned char *buf = <unsigned char *> malloc(SEG_ODDS)
    cdef long long seg_lo, nodd, i, cnt
    cdef cnp.int64_t[::1] out
    cdef Py_ssize_t nbp = base.shape[0]
    cdef const long long *bp = <const long long *> &base[0] if nbp > 0 else NULL
    try:
        seg_lo = start
        while seg_lo <= hi:
            nodd = (hi - seg_lo) // 2 + 1
            if nodd > SEG_ODDS:
                nodd = SEG_ODDS
            with nogil:
                _mark(buf, seg_lo, nodd, bp, nbp)
            cnt = 0
            for i in range(nodd):
                cnt += buf[i]
            arr = np.empty(cnt, dtype=np.int64)
            out = arr
            cnt = 0
            for i in range(nodd):
                if buf[i]:
                    out[cnt] = seg_lo + 2 * i
                    cnt += 1
            chunks.append(arr)
            seg_lo += 2 * nodd
    finally:
        free(buf)
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


def progression_sum(long long lo, long long hi, long long q, long long a,
                    cnp.int64_t[::1] base):
    """(count, sum log p) over primes p in [lo, hi] with p = a (mod q)."""
    cdef long long count = 0
    cdef double s = 0.0, c = 0.0
    a = a % q
    if lo <= 2 <= hi and 2 % q == a:
        count += 1
        _neumaier(&s, &c, log(2.0))
    cdef long long start = _odd_floor_lo(lo)
    if hi < start:
        return count, s + c
    cdef unsigned char *buf = <unsigned char *> malloc(SEG_ODDS)
    cdef long long seg_lo, nodd, i, n
    cdef Py_ssize_t nbp = base.shape[0]
    cdef const long long *bp = <const long long *> &base[0] if nbp > 0 else NULL
    try:
        with nogil:
            seg_lo = start
            while seg_lo <= hi:
                nodd = (hi - seg_lo) // 2 + 1
                if nodd > SEG_ODDS:
                    nodd = SEG_ODDS
                _mark(buf, seg_lo, nodd, bp, nbp)
                for i in range(nodd):
                    if buf[i]:
                        n = seg_lo + 2 * i
                        if n % q == a:
                            count += 1
                            _neumaier(&s, &c, log(<double> n))
                seg_lo += 2 * nodd
    finally:
        free(buf)
    return count, s + c


def class_sums(long long lo, long long hi, long long q, cnp.int64_t[::1] base):
    """Per-residue (counts, sum log p) arrays of length q over primes in [lo, hi]."""
    counts_arr = np.zeros(q, dtype=np.int64)
    sums_arr = np.zeros(q, dtype=np.float64)
    comp_arr = np.zeros(q, dtype=np.float64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef double[::1] sums = sums_arr
    cdef double[::1] comp = comp_arr
    if lo <= 2 <= hi:
        counts[2 % q] += 1
        _neumaier(&sums[2 % q], &comp[2 % q], log(2.0))
    cdef long long start = _odd_floor_lo(lo)
    if hi < start:
        return counts_arr, sums_arr + comp_arr
    cdef unsigned char *buf = <unsigned char *> malloc(SEG_ODDS)
    cdef long long seg_lo, nodd, i, n, r
    cdef Py_ssize_t nbp = base.shape[0]
    cdef const long long *bp = <const long long *> &base[0] if nbp > 0 else NULL
    try:
        with nogil:
            seg_lo = start
            while seg_lo <= hi:
                nodd = (hi - seg_lo) // 2 + 1
                if nodd > SEG_ODDS:
                    nodd = SEG_ODDS
                _mark(buf, seg_lo, nodd, bp, nbp)
                for i in range(nodd):
                    if buf[i]:
                        n = seg_lo + 2 * i
                        r = n % q
                        counts[r] += 1
                        _neumaier(&sums[r], &comp[r], log(<double> n))
                seg_lo += 2 * nodd
    finally:
        free(buf)
    return counts_arr, sums_arr + comp_arr


def dirichlet_block(double[::1] sr, double[::1] si, double[::1] chi_re,
                    double[::1] chi_im, long long q, long long N,
                    double[::1] bern, bint nontrivial):
    """sum_{a<=q} chi(a) q^{-s} zeta(s, a/q) by Euler--Maclaurin with N terms.

    ``chi_re/chi_im`` are indexed by residue 0..q-1, ``bern[k-1]`` is
    B_{2k}/(2k)!.  With ``nontrivial`` the pole term is written as
    (w^{1-s} - 1)/(s - 1), which is exact when sum_a chi(a) = 0 and stays
    finite at s = 1.
    """
    cdef Py_ssize_t m = sr.shape[0], K = bern.shape[0]
    out_re_arr = np.zeros(m, dtype=np.float64)
    out_im_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out_re = out_re_arr
    cdef double[::1] out_im = out_im_arr

    support = [a for a in range(1, q + 1) if chi_re[a % q] != 0.0 or chi_im[a % q] != 0.0]
    cdef Py_ssize_t na = len(support)
    logs_arr = np.empty((na, N + 1), dtype=np.float64)
    wv_arr = np.empty(na, dtype=np.float64)
    cre_arr = np.empty(na, dtype=np.float64)
    cim_arr = np.empty(na, dtype=np.float64)
    for idx, a in enumerate(support):
        logs_arr[idx, :] = np.log(np.arange(N + 1, dtype=np.float64) * q + a)
        wv_arr[idx] = float(N * q + a)
        cre_arr[idx] = chi_re[a % q]
        cim_arr[idx] = chi_im[a % q]
    cdef double[:, ::1] logs = logs_arr
    cdef double[::1] wv = wv_arr
    cdef double[::1] cre = cre_arr
    cdef double[::1] cim = cim_arr

    cdef Py_ssize_t j, ia, n, k
    cdef double sig, t, lw, mag, ang, accr, acci, wr, wi, w, zr, zi, er, ei
    cdef double phr, phi_, den, tr, ti, pr, pi_, fac, fac2, fk, ar, ai, br, bi
    cdef double dq = <double> q
    with nogil:
        for j in range(m):
            sig = sr[j]
            t = si[j]
            out_re[j] = 0.0
            out_im[j] = 0.0
            for ia in range(na):
                accr = 0.0
                acci = 0.0
                for n in range(N):
                    lw = logs[ia, n]
                    mag = exp(-sig * lw)
                    ang = t * lw
                    accr += mag * cos(ang)
                    acci -= mag * sin(ang)
                # W = w^{-s}
                lw = logs[ia, N]
                w = wv[ia]
                mag = exp(-sig * lw)
                ang = t * lw
                wr = mag * cos(ang)
                wi = -mag * sin(ang)
                # pole term / (q (s-1))
                if nontrivial:
                    # -(lw/q) * (e^z - 1)/z,  z = (1-s) lw
                    zr = (1.0 - sig) * lw
                    zi = -t * lw
                    if zr * zr + zi * zi < 1e-8:
                        # 1 + z/2 + z^2/6 + z^3/24
                        er = zr * zr - zi * zi
                        ei = 2.0 * zr * zi
                        phr = 1.0 + zr / 2.0 + er / 6.0 + (er * zr - ei * zi) / 24.0
                        phi_ = zi / 2.0 + ei / 6.0 + (er * zi + ei * zr) / 24.0
                    else:
                        er = w * wr - 1.0
                        ei = w * wi
                        den = zr * zr + zi * zi
                        phr = (er * zr + ei * zi) / den
                        phi_ = (ei * zr - er * zi) / den
                    accr += -(lw / dq) * phr
                    acci += -(lw / dq) * phi_
                else:
                    # w W / (q (s - 1))
                    zr = sig - 1.0
                    zi = t
                    den = dq * (zr * zr + zi * zi)
                    er = w * wr
                    ei = w * wi
                    accr += (er * zr + ei * zi) / den
                    acci += (ei * zr - er * zi) / den
                accr += 0.5 * wr
                acci += 0.5 * wi
                # Bernoulli corrections: bern[k] * P_k(s) * W * (q/w)^{2k-1}
                pr = sig
                pi_ = t
                fac = dq / w
                fac2 = fac * fac
                fk = fac
                for k in range(K):
                    tr = (pr * wr - pi_ * wi) * bern[k] * fk
                    ti = (pr * wi + pi_ * wr) * bern[k] * fk
                    accr += tr
                    acci += ti
                    # P <- P * (s + 2k + 1) * (s + 2k + 2)
                    ar = sig + 2.0 * k + 1.0
                    br = sig + 2.0 * k + 2.0
                    er = ar * br - t * t
                    ei = t * (ar + br)
                    tr = pr * er - pi_ * ei
                    pi_ = pr * ei + pi_ * er
                    pr = tr
                    fk *= fac2
                out_re[j] += cre[ia] * accr - cim[ia] * acci
                out_im[j] += cre[ia] * acci + cim[ia] * accr
    return out_re_arr + 1j * out_im_arr
