"""Predictions for sum of log p over x - h < p <= x, p = a (mod q), and audits.

The effective constants of the underlying theorems are never known
numerically, so every constant here is a parameter and comparisons report
observed ratios rather than asserting bounds.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .chars import character_group, euler_phi, squarefree_kernel
from .errors import DomainError, InvalidResidueError, PreconditionError, StaleInputError
from .primes import ThetaQuery, class_sums, theta_ap, theta_short_interval
from .zeros import ExceptionalZero, exceptional_zero_search


def log_plus(u: float) -> float:
    """max{0, log u}, with log^+ of a non-positive number taken as 0."""
    return math.log(u) if u > 1 else 0.0


# -- lambda -----------------------------------------------------------------

def _power_difference_parts(x, h, beta):
    """(h, D) with x^beta - (x-h)^beta = h + D, computed without cancellation."""
    u = beta - 1
    y = x - h
    D = x * math.expm1(u * math.log(x))
    if y > 0:
        D -= y * math.expm1(u * math.log(y))
    else:
        # y^beta = 0 at y = 0, so remove the y = h - x contribution exactly
        D -= y
    return h, D


def secondary_integral(x: float, h: float, beta: float) -> float:
    """(x^beta - (x-h)^beta) / (beta h)."""
    hh, D = _power_difference_parts(x, h, beta)
    return (hh + D) / (beta * h)


def lambda_value(x: float, h: float, beta1: float, chi1_a: int) -> float:
    """1 - chi1(a) (x^beta1 - (x-h)^beta1) / (beta1 h) in a cancellation-free form."""
    if chi1_a == 0:
        return 1.0
    hh, D = _power_difference_parts(x, h, beta1)
    if chi1_a > 0:
        return (-(1 - beta1) * h - D) / (beta1 * h)
    return 1 + (hh + D) / (beta1 * h)


def lambda_(x: float, q: int, a: int, h: float, exc: ExceptionalZero | None) -> float:
    """The factor lambda multiplying h / phi(q) in the main term."""
    if h < 4 or h > x:
        raise DomainError(f"need 4 <= h <= x, got h={h}, x={x}")
    if math.gcd(a, q) != 1:
        raise InvalidResidueError(f"gcd({a}, {q}) != 1")
    if exc is None or not exc.exists:
        return 1.0
    return lambda_value(x, h, exc.beta1, exc.chi1_at(a))


def lambda_quadrature(x: float, h: float, beta1: float, chi1_a: int) -> float:
    """The defining integral (1/h) int_{x-h}^{x} (1 - chi1(a) t^{beta1-1}) dt by quadrature."""
    f = lambda t: 1.0 - chi1_a * t ** (beta1 - 1)
    lo = x - h
    # the integrand has an integrable singularity at t = 0 when h = x
    pts = [lo + (x - lo) * k for k in (1e-6, 1e-3)] if lo == 0 else None
    with warnings.catch_warnings():
        # the tolerance sits at roundoff level on purpose
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, lo, x, epsabs=1e-14 * h, epsrel=1e-14, limit=200, points=pts)
    return val / h


def xi(x: float, h: float, beta1: float) -> float:
    """The point with lambda = 1 - chi1(a) xi^{beta1 - 1}, lying in (x - h, x)."""
    r = h / x
    denom = -math.expm1(beta1 * math.log1p(-r)) if r < 1 else 1.0
    return math.exp(math.log(x) + (math.log(beta1 * r) - math.log(denom)) / (1 - beta1))


def lambda_bounds_check(x: float, h: float, beta1: float, chi1_a: int) -> bool:
    """Whether (1/8) min{1, (1 - beta1) log x} < lambda < 2 holds strictly."""
    if x < 4:
        raise DomainError(f"need x >= 4, got {x}")
    if not math.sqrt(x) <= h <= x:
        raise DomainError(f"need sqrt(x) <= h <= x, got h={h}")
    if not 0.97 < beta1 < 1:
        raise DomainError(f"need 0.97 < beta1 < 1, got {beta1}")
    if chi1_a not in (1, -1):
        raise DomainError("chi1(a) must be +1 or -1")
    lam = lambda_value(x, h, beta1, chi1_a)
    # 2 - lambda is the opposite-sign lambda; testing it avoids rounding lam to 2
    gap = lambda_value(x, h, beta1, -chi1_a)
    return min(1.0, (1 - beta1) * math.log(x)) / 8 < lam and gap > 0


def theta_constant(exc_exists: bool, lambda_one: bool = False) -> Fraction:
    """71/75 when an exceptional zero exists, else 7/12 (also under the override)."""
    if exc_exists and not lambda_one:
        return Fraction(71, 75)
    return Fraction(7, 12)


def theta_policy(exc_exists: bool, lambda_one: bool = False) -> tuple[Fraction, bool]:
    """(theta, force_lambda_one)."""
    return theta_constant(exc_exists, lambda_one), bool(exc_exists and lambda_one)


def siegel_floor_check(q: int, beta1: float, b: float, eps: float = 0.5) -> None:
    """Reject beta1 violating 1 - beta1 >= b q^{-eps}."""
    if b <= 0:
        raise DomainError("b must be positive")
    if 1 - beta1 < b * q ** (-eps):
        raise DomainError(f"1 - beta1 = {1 - beta1:.3e} is below b q^-{eps} = {b * q ** (-eps):.3e}")


# -- zero-free regions and envelopes ------------------------------------------------

ZFR_KINDS = ("VK", "IWANIEC", "DH")


@dataclass(frozen=True)
class ZeroFreeRegionProfile:
    kind: str = "VK"
    c_vk: float = 0.05
    c_iw: float = 1 / (4 * 10**4)
    c_dh: float = 0.1
    squarefree_part: int | None = None
    beta1: float | None = None

    def __post_init__(self):
        if self.kind not in ZFR_KINDS:
            raise ValueError(f"kind must be one of {ZFR_KINDS}, got {self.kind!r}")
        if min(self.c_vk, self.c_iw, self.c_dh) <= 0:
            raise ValueError("zero-free region constants must be positive")
        if self.kind == "DH" and self.beta1 is None:
            raise ValueError("DH profile needs beta1")
        if self.squarefree_part is not None and self.squarefree_part < 1:
            raise ValueError("squarefree part must be >= 1")


def zfr_delta(t: float, q: float, profile: ZeroFreeRegionProfile) -> float:
    """Width delta(t) of the zero-free region at height t."""
    if t < math.e:
        raise DomainError(f"need t >= e, got {t}")
    if profile.kind == "VK":
        lt = math.log(t)
        return profile.c_vk / (math.log(q) + lt ** (2 / 3) * log_plus(lt) ** (1 / 3))
    if profile.kind == "IWANIEC":
        d = profile.squarefree_part
        if d is None:
            if not float(q).is_integer():
                raise PreconditionError("non-integer q needs an explicit squarefree part")
            d = squarefree_kernel(int(q))
        lqt = math.log(q * t)
        return profile.c_iw / (math.log(d) + lqt ** 0.75 * log_plus(lqt) ** 0.75)
    L = math.log(q * (t + 3))
    return profile.c_dh * log_plus(1 / ((1 - profile.beta1) * L)) / L


ENVELOPE_FLAVORS = ("VK", "POWERFUL", "GALLAGHER")


def error_envelope(x: float, h: float, q: int, C: float, flavor: str = "VK",
                   beta1: float | None = None, d: int | None = None) -> float:
    """exp(-C log x / D(x, h, q)) for the chosen denominator D.

    GALLAGHER multiplies the VK form by (1 - beta1) log q.
    """
    if C <= 0:
        raise DomainError("C must be positive")
    if not 4 <= h <= x:
        raise DomainError(f"need 4 <= h <= x, got h={h}, x={x}")
    lx = math.log(x)
    llx = math.log(lx)
    if flavor in ("VK", "GALLAGHER"):
        lxh = math.log(x / h)
        den = math.log(q) + lxh ** (2 / 3) * log_plus(lxh) ** (1 / 3) + lx ** 0.4 * llx ** 0.2
        env = math.exp(-C * lx / den)
        if flavor == "GALLAGHER":
            if beta1 is None:
                raise PreconditionError("GALLAGHER envelope needs beta1")
            env *= (1 - beta1) * math.log(q)
        return env
    if flavor == "POWERFUL":
        d = squarefree_kernel(q) if d is None else d
        lqxh = math.log(q * x / h)
        den = math.log(d) + lqxh ** 0.75 * log_plus(lqxh) ** 0.75 + (lx * llx) ** (3 / 7)
        return math.exp(-C * lx / den)
    raise ValueError(f"flavor must be one of {ENVELOPE_FLAVORS}, got {flavor!r}")


# -- explicit formula -----------------------------------------------------------------

_B_CACHE: dict[str, float] = {}


def _b_constant(chi) -> float:
    """Constant term of L'/L(s, chi) at s = 0 after removing 1/s for even chi."""
    if chi.label in _B_CACHE:
        return _B_CACHE[chi.label]
    import mpmath as mp

    vals = [mp.mpc(complex(v)) for v in chi.values()]
    with mp.workdps(30):
        if chi.parity == 1:
            b = mp.dirichlet(0, vals, 1) / mp.dirichlet(0, vals)
        else:
            b = mp.dirichlet(0, vals, 2) / (2 * mp.dirichlet(0, vals, 1))
        b = complex(b)
    _B_CACHE[chi.label] = b
    return b


def psi_lower_order(x: float, chi) -> complex:
    """Terms of psi(x, chi) other than the main term and the nontrivial zeros, chi primitive."""
    if chi.modulus == 1:
        return -math.log(2 * math.pi) - 0.5 * math.log1p(-x**-2)
    b = _b_constant(chi)
    if chi.parity == 1:
        return -b + math.atanh(1 / x)
    return -math.log(x) - b - 0.5 * math.log1p(-x**-2)


def imprimitive_correction(x: float, q: int, a: int) -> float:
    """Contribution of powers of p | q to the primitive-character psi sums."""
    from .chars import factorize

    total = 0j
    for chi in character_group(q):
        prim = chi.primitive
        ca = np.conj(chi.evaluate(a))
        for p, _ in factorize(q):
            pk = p
            while pk <= x:
                total += ca * prim.evaluate(pk) * math.log(p)
                pk *= p
    return float((total / euler_phi(q)).real)


def prime_power_sum(x: float, q: int, a: int) -> float:
    """Sum of log p over p^k <= x with k >= 2 and p^k = a (mod q)."""
    from .primes import sieve_interval

    terms = []
    for p in sieve_interval(2, max(2, math.isqrt(int(x)))).tolist():
        pk = p * p
        while pk <= x:
            if pk % q == a % q:
                terms.append(math.log(p))
            pk *= p
    return math.fsum(terms)


LOWER_ORDER_MODES = ("truncated", "exact")


def explicit_formula_theta(x: float, T: float, q: int, a: int, zeros: dict,
                           exc: ExceptionalZero | None = None, lower_order: str = "truncated") -> float:
    """Truncated explicit formula for sum_{p <= x, p = a (q)} log p.

    ``zeros`` maps each character label mod q (or its primitive inducer's
    label) to a ZeroSet reaching height T.  With ``lower_order="truncated"`` each
    character contributes sum'_{|gamma| <= T} x^rho / rho - sum_{|gamma| < 1} 1 / rho
    and everything else is left to the error term.  ``"exact"`` instead
    includes the remaining terms of psi(x, chi*) exactly, removes the powers
    of primes dividing q, and subtracts the prime powers p^k, k >= 2.
    """
    if x < 2 or T < 2:
        raise DomainError("need x, T >= 2")
    if math.gcd(a, q) != 1:
        raise InvalidResidueError(f"gcd({a}, {q}) != 1")
    if lower_order not in LOWER_ORDER_MODES:
        raise ValueError(f"lower_order must be one of {LOWER_ORDER_MODES}")
    exact = lower_order == "exact"
    phi = euler_phi(q)
    total = x / phi
    if exc is not None and exc.exists:
        total -= exc.chi1_at(a) / phi * x**exc.beta1 / exc.beta1
    lx = math.log(x)
    acc = 0j
    for chi in character_group(q):
        zs = zeros.get(chi.label)
        if zs is None:
            zs = zeros.get(chi.primitive.label)
        if zs is None:
            if not zeros:
                continue
            raise StaleInputError(f"no zero set for character {chi.label}")
        if zs.height < T:
            raise StaleInputError(f"zero set for {zs.character} reaches height {zs.height} < T = {T}")
        rho = zs.rhos
        if exc is not None and exc.exists:
            rho = rho[~np.isclose(rho, exc.beta1, atol=1e-12)]
        sel = rho[np.abs(rho.imag) <= T]
        s = np.sum(np.exp(sel * lx) / sel)
        if exact:
            s -= psi_lower_order(x, chi.primitive)
        else:
            s -= np.sum(1 / rho[np.abs(rho.imag) < 1])
        acc += np.conj(chi.evaluate(a)) * s
    if not zeros and exact:
        acc -= sum(np.conj(c.evaluate(a)) * psi_lower_order(x, c.primitive) for c in character_group(q))
    total = (total - acc / phi).real
    if exact:
        total -= imprimitive_correction(x, q, a) + prime_power_sum(x, q, a)
    return float(total)


def explicit_formula_slack(x: float, T: float) -> float:
    """The x (log x)^2 / T scale of the truncation error."""
    return x * math.log(x) ** 2 / T


# -- prediction reports ----------------------------------------------------------------

@dataclass
class PredictionReport:
    x: float
    h: float
    q: int
    a: int
    epsilon: float
    lam: float
    theta_exponent: str
    actual: float
    predicted: float
    primary_term: float
    secondary_term: float
    relative_error: float | None
    envelope: float
    implied_constant_ratio: float | None
    range_condition_met: bool
    exceptional: dict = field(default_factory=dict)
    flavor: str = "VK"
    C: float = 0.05

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


REPORT_COLUMNS = (
    "x", "h", "q", "a", "lambda", "theta_exponent", "actual", "predicted", "primary_term",
    "secondary_term", "relative_error", "envelope", "implied_constant_ratio", "range_condition_met",
)


def _exceptional_for(q, settings):
    if q < 3:
        return ExceptionalZero(q, False, float("nan"))
    return exceptional_zero_search(q, settings) if settings is not None else exceptional_zero_search(q)


def predict_and_compare(x: float, h: float, q: int, a: int, eps: float = 0.01,
                        profile: ZeroFreeRegionProfile | None = None, C: float = 0.05,
                        exc: ExceptionalZero | None = None, flavor: str = "VK",
                        lambda_one: bool = False, settings=None, cap: int | None = None) -> PredictionReport:
    """Sieved truth against lambda h / phi(q), with the chosen envelope."""
    if math.gcd(a, q) != 1:
        raise InvalidResidueError(f"gcd({a}, {q}) != 1")
    if exc is None:
        exc = _exceptional_for(q, settings)
    theta, force_one = theta_policy(exc.exists, lambda_one)
    phi = euler_phi(q)
    if exc.exists and not force_one:
        chi_a = exc.chi1_at(a)
        lam = lambda_value(x, h, exc.beta1, chi_a)
        secondary = -chi_a / phi * secondary_integral(x, h, exc.beta1) * h
    else:
        lam, secondary = 1.0, 0.0
    primary = h / phi
    predicted = primary + secondary
    actual = theta_short_interval(ThetaQuery(x, h, q, a), cap)
    rel = abs(1 - actual / predicted) if predicted > 0 else None
    beta1 = exc.beta1 if exc.exists else None
    if flavor == "GALLAGHER" and beta1 is None:
        env_flavor = "VK"
    else:
        env_flavor = flavor
    d = profile.squarefree_part if profile is not None else None
    env = error_envelope(x, h, q, C, env_flavor, beta1=beta1, d=d)
    return PredictionReport(
        x=x, h=h, q=q, a=a, epsilon=eps, lam=lam, theta_exponent=str(theta), actual=actual,
        predicted=predicted, primary_term=primary, secondary_term=secondary, relative_error=rel,
        envelope=env, implied_constant_ratio=(rel / env if rel is not None else None),
        range_condition_met=bool(lam * h / phi >= x ** (float(theta) + eps)),
        exceptional=exc.to_dict(), flavor=env_flavor, C=C,
    )


def read_queries_csv(text: str) -> list[tuple]:
    """Rows of (x, h, q, a) from CSV text; a header row is skipped."""
    out = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].strip().startswith("#"):
            continue
        try:
            x, h, q, a = (float(row[0]), float(row[1]), int(row[2]), int(row[3]))
        except ValueError:
            if not out:
                continue
            raise
        out.append((x, h, q, a))
    return out


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        d = r.to_dict()
        w.writerow(["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


# -- Brun--Titchmarsh ------------------------------------------------------------------

@dataclass
class BrunTitchmarshAudit:
    x: float
    h: float
    q: int
    delta: float
    bound: float
    max_ratio: float
    min_ratio: float
    argmax: int
    passed: bool
    ratios: dict

    def to_dict(self, with_ratios: bool = False) -> dict:
        d = asdict(self)
        if not with_ratios:
            d.pop("ratios")
        return d


def brun_titchmarsh_audit(x: float, h: float, q: int, delta: float, exc: ExceptionalZero | None = None,
                          cap: int | None = None) -> BrunTitchmarshAudit:
    """max_a phi(q) theta(x, h; q, a) / h against 1 + delta (2 + delta with an exceptional zero)."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    lo, hi = ThetaQuery(x, h, q, 1).integer_range
    _, sums = class_sums(lo, hi, q, cap=cap)
    phi = euler_phi(q)
    ratios = {a: phi * float(sums[a % q]) / h for a in range(1, q + 1) if math.gcd(a, q) == 1}
    ratios = {a % q if q > 1 else 0: r for a, r in ratios.items()}
    bound = (2 if exc is not None and exc.exists else 1) + delta
    amax = max(ratios, key=ratios.get)
    mx = ratios[amax]
    return BrunTitchmarshAudit(x, h, q, delta, bound, mx, min(ratios.values()), amax, mx <= bound, ratios)


# -- explicit-formula audit ---------------------------------------------------------------

def explicit_formula_audit(x: float, q: int, a: int, heights, zeros: dict, exc=None,
                           lower_order: str = "exact") -> list[dict]:
    """Deviation of the truncated formula from the sieved sum for each T."""
    actual = theta_ap(x, q, a)
    rows = []
    for T in heights:
        approx = explicit_formula_theta(x, T, q, a, zeros, exc, lower_order)
        dev = abs(approx - actual)
        slack = explicit_formula_slack(x, T)
        rows.append({"x": x, "q": q, "a": a, "T": T, "actual": actual, "approx": approx,
                     "deviation": dev, "slack": slack, "ratio": dev / slack})
    return rows


def zero_sets_for_modulus(q: int, T: float, settings=None) -> dict:
    """ZeroSets of the primitive inducers of every character mod q, keyed by label."""
    from .zeros import critical_line_zeros

    out = {}
    for chi in character_group(q):
        p = chi.primitive
        if p.label not in out:
            out[p.label] = critical_line_zeros(p, T, settings) if settings is not None else critical_line_zeros(p, T)
        out[chi.label] = out[p.label]
    return out
