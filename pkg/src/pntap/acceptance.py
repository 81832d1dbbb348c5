"""The thirteen acceptance checks, shared by ``pntap verify`` and the test suite.

Each check returns a :class:`CheckResult` whose ``details`` are plain JSON
values.  Wall-clock time is kept on the result but never serialised, so the
JSON report is reproducible for a fixed seed.
"""
from __future__ import annotations

import hashlib
import json
import math
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import aconst, pnt, primes, zeros
from .chars import character_group, primitive_characters_up_to
from .lfunc import DEFAULT

SCHEMA_VERSION = 1

# seconds, as stated for each criterion (the quick variant of 6 has its own)
RUNTIME_LIMITS = {1: 10, 2: 1, 3: 1, 4: 30, 5: 300, 6: 600, 7: 600, 8: 10, 9: 300, 10: 120, 11: 30, 12: 60, 13: 120}
QUICK_RUNTIME_LIMITS = {**RUNTIME_LIMITS, 6: 20}

NAMES = {
    1: "constant optimization",
    2: "constant-chain audit",
    3: "alpha0 root",
    4: "power-sum property suite",
    5: "zero-finder cross-validation",
    6: "no exceptional zero",
    7: "density tables",
    8: "lambda suite",
    9: "explicit-formula audit",
    10: "PNT agreement",
    11: "Brun-Titchmarsh audit",
    12: "digit-prescribed primes",
    13: "determinism",
}


@dataclass
class CheckResult:
    number: int
    passed: bool
    details: dict
    elapsed: float = field(default=0.0, compare=False)
    scope: str = "full"

    @property
    def name(self) -> str:
        return NAMES[self.number]

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "scope": self.scope,
                "passed": bool(self.passed), "details": self.details}

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name} ({self.scope}, {self.elapsed:.1f}s)"


def _clean(v):
    """Recursively convert numpy scalars and non-finite floats into JSON values."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


# -- criteria -----------------------------------------------------------------------

def check_1(**_) -> dict:
    r = aconst.optimize_constants()
    rel = abs(r.objective - aconst.PUBLISHED_INFIMUM) / aconst.PUBLISHED_INFIMUM
    da = abs(r.alpha - float(aconst.PUBLISHED_ALPHA))
    ok = rel <= 1e-6 and da <= 1e-6 and r.boundary_active and r.B == 0.0
    return ok, {"alpha": r.alpha, "A": r.A, "B": r.B, "objective": r.objective,
                "objective_rel_error": rel, "alpha_error": da, "boundary_active": r.boundary_active,
                "below_published_point": r.objective <= aconst.PUBLISHED_OBJECTIVE}


def check_2(**_) -> dict:
    rep = aconst.verify_constant_chain()
    slack = rep["final_exponent"]["slack"]
    ok = (rep["objective"]["pass"] and rep["contraction"]["pass"] and rep["final_exponent"]["pass"]
          and abs(slack - 0.049) < 5e-4)
    return ok, {
        "objective": rep["objective"]["value"],
        "objective_residual": rep["objective"]["residual"],
        "one_minus_contraction": rep["contraction"]["one_minus_value"],
        "exponent": rep["final_exponent"]["exponent"],
        "slack": slack,
        "slack_exact": rep["final_exponent"]["slack_exact"],
        "theta_mappings": [rep["theta_mapping"]["from_75_4"], rep["theta_mapping"]["from_12_5"]],
    }


def check_3(**_) -> dict:
    a0 = aconst.alpha0_root()
    res = abs(aconst.alpha0_equation(a0))
    opt = aconst.optimize_constants()
    ok = res < 1e-10 and abs(a0 - opt.alpha) <= 1e-6 and abs(a0 - float(aconst.PUBLISHED_ALPHA)) <= 1e-10
    return ok, {"alpha0": a0, "residual": res, "optimizer_alpha": opt.alpha, "difference": abs(a0 - opt.alpha)}


def check_4(seed: int = 0, **_) -> dict:
    rep = aconst.power_sum_suite(10_000, max_N=4, max_M=5, seed=seed)
    # exhaustive oracle on the first instances of an independent stream
    rng = np.random.default_rng(seed + 1)
    mismatches = 0
    for _ in range(500):
        N, M = int(rng.integers(1, 5)), int(rng.integers(0, 6))
        pts = tuple(np.sqrt(rng.random(N)) * np.exp(2j * np.pi * rng.random(N)))
        res = aconst.power_sum_min_k(aconst.PowerSumInstance(pts, M), check=False)
        k, best = aconst.exhaustive_best_k(pts, M)
        if abs(res.ratio * aconst.power_sum_bound(N, M) - best) > 1e-12:
            mismatches += 1
    ok = rep["violations"] == 0 and rep["min_ratio"] >= 1 and mismatches == 0
    return ok, dict(rep, oracle_instances=500, oracle_mismatches=mismatches)


def _known_ordinates(settings):
    out = {}
    for q, target in ((1, 14.134725), (4, 6.020949)):
        chi = [c for c in character_group(q).primitive_characters() if (q == 1 or not c.is_trivial)][0]
        coarse = zeros.critical_line_zeros(chi, 20, settings).ordinates
        fine = zeros.critical_line_zeros(chi, 20, settings, step=0.01).ordinates
        g = float(coarse[coarse > 0][0])
        out[q] = {"found": g, "expected": target, "error": abs(g - target),
                  "fine_scan_agrees": bool(len(coarse) == len(fine) and np.allclose(coarse, fine, atol=1e-6))}
    return out


def check_5(quick: bool = False, threads: int = 1, **_) -> dict:
    qmax = 8 if quick else 30
    T = 50.0
    settings = DEFAULT
    chars = primitive_characters_up_to(qmax)

    def run(chi):
        scan = zeros.critical_line_zeros(chi, T, settings).count()
        rect = zeros.rectangle_zero_count(chi, 0.5, T, settings)
        return chi.label, scan, rect

    rows = zeros.map_ordered(run, chars, threads)
    bad = [r for r in rows if r[1] != r[2]]
    known = _known_ordinates(settings)
    ok = not bad and all(v["error"] < 1e-4 and v["fine_scan_agrees"] for v in known.values())
    return ok, {"q_max": qmax, "T": T, "characters": len(rows), "mismatches": [list(b) for b in bad],
                "total_zeros": sum(r[1] for r in rows), "known_ordinates": known}


def check_6(quick: bool = False, seed: int = 0, **_) -> dict:
    settings = DEFAULT.with_(q_cap=1000)
    if quick:
        rng = np.random.default_rng(seed)
        moduli = sorted(int(q) for q in rng.choice(np.arange(3, 1001), size=20, replace=False))
    else:
        moduli = list(range(3, 1001))
    found = []
    for q in moduli:
        e = zeros.exceptional_zero_search(q, settings)
        if e.exists:
            found.append({"q": q, "beta1": e.beta1, "chi1": e.chi1.label})
    return not found, {"moduli": len(moduli), "range": [moduli[0], moduli[-1]],
                       "sample": moduli if quick else None, "found": found}


def check_7(threads: int = 1, **_) -> dict:
    mods = (3, 4, 5, 7, 8)
    grid = (0.5, 0.6, 0.75, 0.9, 1.0)
    T = 50.0
    ok = True
    tables = {}
    for q in mods:
        tab = zeros.density_stats(q, T, grid, eps=0.1, exc=zeros.exceptional_zero_search(q), threads=threads)
        rows = {r.sigma: r for r in tab.rows}
        cond = {
            "monotone": tab.is_monotone(),
            "zero_at_one": rows[1.0].Nq == 0,
            "no_exceptional_shift": all(r.Nq == r.Nq_star for r in tab.rows),
            "ratio_below_10": all(r.ratio is not None and r.ratio <= 10 for r in tab.rows),
        }
        ok = ok and all(cond.values())
        tables[q] = dict(cond, Nq=[r.Nq for r in tab.rows], max_ratio=max(r.ratio or 0.0 for r in tab.rows))
    return ok, {"T": T, "sigma": list(grid), "tables": tables}


def check_8(seed: int = 0, **_) -> dict:
    fails = 0
    n = 0
    for x in np.geomspace(4, 1e12, 25):
        for f in np.linspace(0, 1, 20):
            h = math.sqrt(x) ** (1 - f) * x**f
            h = min(max(h, math.sqrt(x)), x)
            for b in np.linspace(0.9705, 0.9995, 10):
                for s in (1, -1):
                    n += 1
                    if not pnt.lambda_bounds_check(float(x), float(h), float(b), s):
                        fails += 1
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        x = float(10 ** rng.uniform(1, 9))
        h = float(x * rng.uniform(0.01, 1.0))
        b = float(rng.uniform(0.97, 1.0))
        s = int(rng.choice([-1, 1]))
        worst = max(worst, abs(pnt.lambda_value(x, h, b, s) - pnt.lambda_quadrature(x, h, b, s)))
    return fails == 0 and worst <= 1e-10, {"grid_points": n, "grid_failures": fails,
                                           "quadrature_points": 100, "max_quadrature_error": worst}


EF_CASES = [(3, 1), (3, 2), (4, 1), (4, 3)]
EF_X = (10**4, 10**5)
EF_HEIGHTS = (10, 20, 40, 80)


def check_9(**_) -> dict:
    rows = []
    for q in sorted({q for q, _ in EF_CASES}):
        zs = pnt.zero_sets_for_modulus(q, max(EF_HEIGHTS))
        for qq, a in EF_CASES:
            if qq != q:
                continue
            for x in EF_X:
                rows.extend(pnt.explicit_formula_audit(float(x), q, a, EF_HEIGHTS, zs, lower_order="exact"))
    at50 = []
    for q, a in EF_CASES:
        zs = pnt.zero_sets_for_modulus(q, 50)
        for x in EF_X:
            r = pnt.explicit_formula_audit(float(x), q, a, (50,), zs, lower_order="exact")[0]
            at50.append({"q": q, "a": a, "x": x, "deviation": r["deviation"], "bound": 5 * r["slack"]})
    medians = [statistics.median(r["deviation"] for r in rows if r["T"] == T) for T in EF_HEIGHTS]
    mono = all(a >= b for a, b in zip(medians, medians[1:]))
    within = all(r["deviation"] < r["bound"] for r in at50)
    return mono and within, {"lower_order": "exact", "heights": list(EF_HEIGHTS), "median_deviation": medians,
                             "non_increasing": mono, "at_T50": at50}


def check_10(**_) -> dict:
    x = 10**7
    worst = {"full": 0.0, "short": 0.0}
    rows = 0
    for q in range(1, 11):
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            for key, h in (("full", float(x)), ("short", x / 10)):
                r = pnt.predict_and_compare(float(x), h, q, a)
                worst[key] = max(worst[key], r.relative_error)
                rows += 1
    return worst["full"] < 0.02 and worst["short"] < 0.1, {"x": x, "reports": rows,
                                                          "max_relative_error_full": worst["full"],
                                                          "max_relative_error_short": worst["short"]}


def check_11(**_) -> dict:
    r = pnt.brun_titchmarsh_audit(1e6, 1e5, 101, 1.0)
    return r.passed and r.bound == 2.0, r.to_dict()


def check_12(**_) -> dict:
    c = primes.DigitConstraint(10, 3, (3,), (1,))
    res = primes.count_prescribed_digits(c, list_primes=True)
    small_ok = res.count == 5 and res.primes == (103, 113, 163, 173, 193)
    ratios = {}
    for d0 in (1, 3, 7, 9):
        for d6 in range(1, 10):
            ratios[f"{d0},{d6}"] = primes.count_prescribed_digits(primes.DigitConstraint(10, 7, (d0,), (d6,))).ratio
    rmin, rmax = min(ratios.values()), max(ratios.values())
    return small_ok and 0.5 <= rmin and rmax <= 1.5, {"N3_primes": list(res.primes), "N3_count": res.count,
                                                     "N7_pairs": len(ratios), "N7_min_ratio": rmin,
                                                     "N7_max_ratio": rmax}


CHECKS = {1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5, 6: check_6, 7: check_7,
          8: check_8, 9: check_9, 10: check_10, 11: check_11, 12: check_12}
QUICK_SCOPED = {5, 6}


def run_check(n: int, quick: bool = False, seed: int = 0, threads: int = 1) -> CheckResult:
    t0 = time.perf_counter()
    ok, details = CHECKS[n](quick=quick, seed=seed, threads=threads)
    scope = "quick" if quick and n in QUICK_SCOPED else "full"
    return CheckResult(n, bool(ok), _clean(details), time.perf_counter() - t0, scope)


def report_json(results, seed: int, quick: bool) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "suite": "quick" if quick else "full", "seed": seed,
           "results": [r.to_dict() for r in results]}
    doc["all_passed"] = all(r.passed for r in results)
    return json.dumps(doc, sort_keys=True, indent=2)


def run_suite(quick: bool = False, seed: int = 0, threads: int = 1, only=None, progress=None) -> list:
    """Run criteria 1-12 and then the determinism check (13).

    Criterion 13 re-runs the seeded, randomised criteria (4, 6 and 8) and
    compares the serialised reports byte for byte.
    """
    numbers = sorted(only) if only else list(range(1, 14))
    results = []
    for n in numbers:
        if n == 13:
            continue
        r = run_check(n, quick, seed, threads)
        results.append(r)
        if progress:
            progress(r)
    if 13 in numbers:
        t0 = time.perf_counter()
        first = {r.number: r for r in results}
        digests = []
        for rep in range(2):
            parts = []
            for n in (4, 6, 8):
                r = first.get(n) if rep == 0 and n in first else run_check(n, quick, seed, threads)
                parts.append(json.dumps(r.to_dict(), sort_keys=True))
            digests.append(hashlib.sha256("\n".join(parts).encode()).hexdigest())
        r = CheckResult(13, digests[0] == digests[1], {"rerun": [4, 6, 8], "sha256": digests[0],
                                                       "identical": digests[0] == digests[1]},
                        time.perf_counter() - t0, "quick" if quick else "full")
        results.append(r)
        if progress:
            progress(r)
    return results

