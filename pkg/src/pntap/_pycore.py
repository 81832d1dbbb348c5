"""Pure numpy implementations of the kernels in ``_core.pyx``.

Selected automatically when the compiled extension is unavailable, or
forced with ``PNTAP_BACKEND=python``.
"""
import math

import numpy as np

BACKEND = "python"
SEG = 1 << 20


def _segment_primes(seg_lo, seg_hi, base):
    # primes in [seg_lo, seg_hi]; base holds the odd primes <= sqrt(seg_hi)
    mark = np.ones(seg_hi - seg_lo + 1, dtype=bool)
    for p in (2, *base.tolist()):
        if p * p > seg_hi:
            break
        start = max(p * p, -(-seg_lo // p) * p)
        mark[start - seg_lo::p] = False
    if seg_lo < 2:
        mark[: 2 - seg_lo] = False
    return np.flatnonzero(mark).astype(np.int64) + seg_lo


def _iter_segments(lo, hi, base):
    lo = max(lo, 2)
    seg_lo = lo
    while seg_lo <= hi:
        seg_hi = min(hi, seg_lo + SEG - 1)
        yield _segment_primes(seg_lo, seg_hi, base)
        seg_lo = seg_hi + 1


def primes_between(lo, hi, base):
    chunks = list(_iter_segments(int(lo), int(hi), base))
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


def progression_sum(lo, hi, q, a, base):
    a %= q
    count = 0
    logs = []
    for ps in _iter_segments(int(lo), int(hi), base):
        sel = ps[ps % q == a]
        count += sel.size
        logs.append(np.log(sel.astype(np.float64)))
    if not logs:
        return 0, 0.0
    return count, math.fsum(np.concatenate(logs))


def class_sums(lo, hi, q, base):
    counts = np.zeros(q, dtype=np.int64)
    parts = [[] for _ in range(q)] if q <= 4096 else None
    sums = np.zeros(q, dtype=np.float64)
    for ps in _iter_segments(int(lo), int(hi), base):
        r = ps % q
        counts += np.bincount(r, minlength=q)
        lp = np.log(ps.astype(np.float64))
        if parts is not None:
            order = np.argsort(r, kind="stable")
            rs, lps = r[order], lp[order]
            cuts = np.searchsorted(rs, np.arange(q + 1))
            for c in range(q):
                if cuts[c + 1] > cuts[c]:
                    parts[c].append(lps[cuts[c]:cuts[c + 1]])
        else:
            sums += np.bincount(r, weights=lp, minlength=q)
    if parts is not None:
        for c in range(q):
            if parts[c]:
                sums[c] = math.fsum(np.concatenate(parts[c]))
    return counts, sums


def dirichlet_block(sr, si, chi_re, chi_im, q, N, bern, nontrivial):
    s = np.asarray(sr, dtype=np.float64) + 1j * np.asarray(si, dtype=np.float64)
    chi = np.asarray(chi_re, dtype=np.float64) + 1j * np.asarray(chi_im, dtype=np.float64)
    bern = np.asarray(bern, dtype=np.float64)
    support = np.array([a for a in range(1, q + 1) if chi[a % q] != 0], dtype=np.int64)
    cvals = chi[support % q]
    n = np.arange(N, dtype=np.float64)
    logs = np.log(n[None, :] * q + support[:, None])          # (na, N)
    w = (N * q + support).astype(np.float64)                   # (na,)
    lw = np.log(w)
    out = np.zeros(s.shape, dtype=np.complex128)
    step = max(1, 2_000_000 // max(1, logs.size))
    for j0 in range(0, s.size, step):
        sb = s[j0:j0 + step][:, None]                            # (m, 1)
        head = np.exp(-sb[:, :, None] * logs[None, :, :]).sum(axis=2)  # (m, na)
        W = np.exp(-sb * lw[None, :])
        if nontrivial:
            z = (1.0 - sb) * lw[None, :]
            small = np.abs(z) < 1e-4
            zs = np.where(small, 1.0, z)
            phi = np.where(small, 1 + z / 2 + z * z / 6 + z ** 3 / 24, (w * W - 1.0) / zs)
            pole = -(lw[None, :] / q) * phi
        else:
            pole = w * W / (q * (sb - 1.0))
        tail = pole + 0.5 * W
        P = sb.astype(np.complex128)
        fac = q / w[None, :]
        fk = fac.copy()
        for k in range(bern.size):
            tail = tail + bern[k] * P * W * fk
            P = P * (sb + 2 * k + 1) * (sb + 2 * k + 2)
            fk = fk * fac * fac
        out[j0:j0 + step] = ((head + tail) * cvals[None, :]).sum(axis=1)
    return out
