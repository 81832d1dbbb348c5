"""Locating and counting zeros of Dirichlet L-functions.

Three independent detectors:

* sign changes of the Hardy Z-function on the critical line, refined by
  bisection;
* the argument principle for L(s, chi) around a rectangle, with adaptive
  subdivision of the contour until every phase step is below pi/4;
* sign changes of L(sigma, chi) on a real segment below 1 (exceptional zeros).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .chars import DirichletCharacter, character_group
from .errors import DomainError, InconclusiveContourError, NumericalCheckError, PreconditionError, ResourceLimitError
from .lfunc import DEFAULT, EvalSettings, hardy_z, l_values

SCAN_STEP = 0.05
RESCAN_STEP = 0.0125
BISECT_WIDTH = 1e-8
RIGHT_EDGE = 1.05
LEFT_OFFSET = 1e-6
MIN_LEFT = 1e-6
MAX_PHASE_STEP = math.pi / 4
FAIL_PHASE_STEP = math.pi / 2
MIN_CONTOUR_STEP = 1e-10
EDGE_CLEARANCE = 1e-3
MAX_PERTURB = 0.01


@dataclass(frozen=True)
class ZeroRecord:
    gamma: float
    beta: float = 0.5
    character: str = ""
    refinement_width: float = 0.0
    method: str = "hardy-z sign change"

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")

    @property
    def rho(self) -> complex:
        return complex(self.beta, self.gamma)


@dataclass
class ZeroSet:
    character: str
    modulus: int
    height: float
    zeros: list
    method: str = "hardy-z sign change"
    window: tuple | None = None

    @property
    def ordinates(self) -> np.ndarray:
        return np.array([z.gamma for z in self.zeros])

    @property
    def rhos(self) -> np.ndarray:
        return np.array([z.rho for z in self.zeros], dtype=np.complex128)

    def count(self, T: float | None = None) -> int:
        if T is None:
            return len(self.zeros)
        return int(sum(abs(z.gamma) <= T for z in self.zeros))

    def __len__(self):
        return len(self.zeros)

    def to_dict(self) -> dict:
        return {
            "character": self.character,
            "modulus": self.modulus,
            "height": self.height,
            "method": self.method,
            "zeros": [{"gamma": z.gamma, "beta": z.beta, "width": z.refinement_width} for z in self.zeros],
        }


# -- critical line --------------------------------------------------------------

def _check_caps(chi, T, settings):
    if chi.modulus > settings.q_cap:
        raise ResourceLimitError(f"modulus {chi.modulus} exceeds q_cap {settings.q_cap}")
    if T > settings.t_cap:
        raise ResourceLimitError(f"height {T} exceeds t_cap {settings.t_cap}")


def _bisect(f, a, b, fa, width):
    a, b, fa = (np.asarray(v, dtype=float).copy() for v in (a, b, fa))
    while a.size and np.max(b - a) > width:
        m = 0.5 * (a + b)
        fm = f(m)
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
    return a, b


def _sign_change_brackets(t, z):
    s = np.sign(z)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    exact = np.flatnonzero(s == 0)
    return idx, exact


def scan_window(chi: DirichletCharacter, t0: float, t1: float, settings: EvalSettings = DEFAULT,
                step: float = SCAN_STEP, rescan_step: float = RESCAN_STEP) -> list[float]:
    """Ordinates of sign changes of Z(t, chi) in [t0, t1], refined to BISECT_WIDTH."""
    n = max(2, int(math.ceil((t1 - t0) / step)) + 1)
    t = np.linspace(t0, t1, n)
    z = hardy_z(t, chi, settings)
    lo, hi, flo = [], [], []
    idx, exact = _sign_change_brackets(t, z)
    lo.extend(t[idx]); hi.extend(t[idx + 1]); flo.extend(z[idx])
    found = [float(t[i]) for i in exact]
    # same-sign dips may hide a close pair of zeros
    az = np.abs(z)
    dips = np.flatnonzero((az[1:-1] < az[:-2]) & (az[1:-1] < az[2:]) & (z[:-2] * z[2:] > 0)) + 1
    for i in dips:
        m = max(3, int(round((t[i + 1] - t[i - 1]) / rescan_step)) + 1)
        tt = np.linspace(t[i - 1], t[i + 1], m)
        zz = hardy_z(tt, chi, settings)
        j, ex = _sign_change_brackets(tt, zz)
        lo.extend(tt[j]); hi.extend(tt[j + 1]); flo.extend(zz[j])
        found.extend(float(tt[k]) for k in ex if tt[k] not in t)
    if lo:
        a, b = _bisect(lambda x: hardy_z(x, chi, settings), lo, hi, flo, BISECT_WIDTH)
        found.extend(0.5 * (a + b))
    return sorted(set(round(g, 12) for g in found))


def critical_line_zeros(chi: DirichletCharacter, T: float, settings: EvalSettings = DEFAULT,
                        step: float = SCAN_STEP) -> ZeroSet:
    """Zeros 1/2 + i gamma with |gamma| <= T located by sign changes of Z."""
    if not chi.is_primitive:
        raise PreconditionError(f"character {chi.label} is not primitive")
    _check_caps(chi, T, settings)
    if chi.is_real:
        pos = [g for g in scan_window(chi, 0.0, T, settings, step) if g > 0]
        gammas = sorted([-g for g in pos] + pos)
    else:
        gammas = scan_window(chi, -T, T, settings, step)
    recs = [ZeroRecord(float(g), 0.5, chi.label, BISECT_WIDTH) for g in gammas if abs(g) <= T]
    return ZeroSet(chi.label, chi.modulus, float(T), recs)


# -- argument principle -----------------------------------------------------------

def _contour_phase(f, vertices, base_step):
    """Total change of arg f along the closed polygon, with adaptive refinement."""
    pts = []
    for k in range(len(vertices)):
        a, b = vertices[k], vertices[(k + 1) % len(vertices)]
        n = max(2, int(math.ceil(abs(b - a) / base_step)))
        pts.append(a + (b - a) * np.arange(n) / n)
    z = np.concatenate(pts + [np.array([vertices[0]])])
    v = f(z)
    if np.any(v == 0):
        raise InconclusiveContourError("contour passes through a zero")
    total = 0.0
    # active segments as (z0, z1, v0, v1)
    z0, z1, v0, v1 = z[:-1], z[1:], v[:-1], v[1:]
    max_step = 0.0
    while z0.size:
        d = np.angle(v1 / v0)
        bad = np.abs(d) > MAX_PHASE_STEP
        short = np.abs(z1 - z0) < MIN_CONTOUR_STEP
        accept = ~bad | short
        if np.any(short & bad & (np.abs(d) > FAIL_PHASE_STEP)):
            raise InconclusiveContourError("phase step exceeds pi/2 at the refinement limit")
        total += math.fsum(d[accept])
        if np.any(accept):
            max_step = max(max_step, float(np.max(np.abs(d[accept]))))
        z0, z1, v0, v1 = z0[~accept], z1[~accept], v0[~accept], v1[~accept]
        if not z0.size:
            break
        zm = 0.5 * (z0 + z1)
        vm = f(zm)
        if np.any(vm == 0):
            raise InconclusiveContourError("contour passes through a zero")
        z0, z1, v0, v1 = np.concatenate([z0, zm]), np.concatenate([zm, z1]), np.concatenate([v0, vm]), np.concatenate([vm, v1])
    return total, max_step


def box_zero_count(chi: DirichletCharacter, s_left: float, s_right: float, t_lo: float, t_hi: float,
                   settings: EvalSettings = DEFAULT, base_step: float = SCAN_STEP) -> int:
    """Zeros of L(s, chi) inside the open box, counting the pole at s = 1 for trivial chi."""
    verts = [complex(s_left, t_lo), complex(s_right, t_lo), complex(s_right, t_hi), complex(s_left, t_hi)]
    total, _ = _contour_phase(lambda z: l_values(z, chi, settings), verts, base_step)
    w = total / (2 * math.pi)
    n = round(w)
    if abs(w - n) > 0.1:
        raise InconclusiveContourError(f"winding number {w:.4f} is not close to an integer")
    if chi.is_trivial and s_left < 1 < s_right and t_lo < 0 < t_hi:
        n += 1
    return int(n)


def _edge_height(T, gammas):
    """T' within MAX_PERTURB of T separating {g <= T} from {g > T} with clearance."""
    for k in range(0, 11):
        for sgn in ((1,) if k == 0 else (1, -1)):
            Tp = T + sgn * k * MAX_PERTURB / 10
            ok = all((g + EDGE_CLEARANCE <= Tp) if g <= T else (g - EDGE_CLEARANCE >= Tp) for g in gammas)
            if ok:
                return Tp
    raise InconclusiveContourError(f"no admissible contour height within {MAX_PERTURB} of {T}")


def _zeros_near(chi, T, settings):
    lo, hi = T - MAX_PERTURB - EDGE_CLEARANCE, T + MAX_PERTURB + EDGE_CLEARANCE
    if chi.is_real:
        lo = max(lo, 0.0)
    if hi <= lo:
        return []
    return scan_window(chi, lo, hi, settings, step=5e-4, rescan_step=1.25e-4)


@dataclass(frozen=True)
class RectangleCount:
    count: int
    sigma: float
    T: float
    top: float
    bottom: float

    @property
    def perturbation(self) -> tuple[float, float]:
        return self.top - self.T, -self.bottom - self.T


def rectangle_zero_count(chi: DirichletCharacter, sigma: float, T: float, settings: EvalSettings = DEFAULT,
                         detail: bool = False):
    """N_chi(sigma, T): zeros with beta >= sigma and |gamma| <= T, by the argument principle."""
    if not chi.is_primitive:
        raise PreconditionError(f"character {chi.label} is not primitive")
    if not 0 <= sigma <= 1:
        raise DomainError(f"sigma must lie in [0, 1], got {sigma}")
    _check_caps(chi, T + MAX_PERTURB, settings)
    if sigma >= 1:
        res = RectangleCount(0, sigma, T, T, -T)
        return res if detail else 0
    top = _edge_height(T, _zeros_near(chi, T, settings))
    if chi.is_real:
        bottom = -top
    else:
        bottom = -_edge_height(T, [-g for g in _zeros_near(chi.conj(), T, settings)])
    left = max(sigma - LEFT_OFFSET, MIN_LEFT)
    n = box_zero_count(chi, left, RIGHT_EDGE, bottom, top, settings)
    res = RectangleCount(n, sigma, T, top, bottom)
    return res if detail else n


# -- exceptional zeros --------------------------------------------------------------

def search_floor(q: int) -> float:
    return 1 - 1 / (50 * math.log(q))


@dataclass
class ExceptionalZero:
    modulus: int
    exists: bool
    search_floor: float
    beta1: float | None = None
    chi1: DirichletCharacter | None = None
    synthetic: bool = False
    bracket_width: float | None = None
    characters_scanned: int = 0

    def chi1_at(self, a: int) -> int:
        if not self.exists:
            return 0
        return int(round(self.chi1.evaluate(a).real))

    def to_dict(self) -> dict:
        return {
            "modulus": self.modulus,
            "exists": self.exists,
            "search_floor": self.search_floor,
            "beta1": self.beta1,
            "chi1": self.chi1.label if self.chi1 is not None else None,
            "synthetic": self.synthetic,
            "characters_scanned": self.characters_scanned,
        }


def synthetic_exceptional(q: int, beta1: float, chi1: DirichletCharacter, b_siegel: float | None = None) -> ExceptionalZero:
    """An injected (beta1, chi1) pair for exercising exceptional-zero code paths."""
    floor = search_floor(q)
    if chi1.modulus != q:
        raise PreconditionError(f"chi1 has modulus {chi1.modulus}, expected {q}")
    if not chi1.is_real or chi1.is_trivial:
        raise PreconditionError("chi1 must be real and nontrivial")
    if not floor <= beta1 < 1:
        raise DomainError(f"beta1 = {beta1} lies outside [{floor}, 1)")
    if b_siegel is not None:
        from .pnt import siegel_floor_check

        siegel_floor_check(q, beta1, b_siegel)
    return ExceptionalZero(q, True, floor, float(beta1), chi1, synthetic=True)


_REAL_ZERO_CACHE: dict[str, list] = {}


def _real_zeros_primitive(chi: DirichletCharacter, settings: EvalSettings, step: float = 1e-4) -> list:
    """Sign changes of L(sigma, chi) on [floor(f), 1] for a primitive real chi mod f."""
    key = chi.label
    if key in _REAL_ZERO_CACHE:
        return _REAL_ZERO_CACHE[key]
    lo = search_floor(chi.modulus) if chi.modulus > 2 else 0.5
    n = int(math.ceil((1 - lo) / step))
    sig = np.append(1 - step * np.arange(n, -1, -1)[:-1], 1.0)
    sig = sig[sig >= lo - step]
    f = lambda x: l_values(np.asarray(x, dtype=np.complex128), chi, settings).real
    v = f(sig)
    idx, exact = _sign_change_brackets(sig, v)
    roots = [float(sig[i]) for i in exact]
    if idx.size:
        a, b = _bisect(f, sig[idx], sig[idx + 1], v[idx], 1e-12)
        roots.extend((0.5 * (a + b)).tolist())
    _REAL_ZERO_CACHE[key] = sorted(roots)
    return _REAL_ZERO_CACHE[key]


def exceptional_zero_search(q: int, settings: EvalSettings = DEFAULT, synthetic=None) -> ExceptionalZero:
    """Scan every real nontrivial chi mod q on [1 - 1/(50 log q), 1] for a real zero.

    Each character is scanned through its primitive inducer, whose real zeros
    in (0, 1) are the same.  ``synthetic`` = (beta1, chi1) injects a pair.
    """
    if q < 3:
        raise DomainError(f"modulus must be >= 3, got {q}")
    if synthetic is not None:
        return synthetic_exceptional(q, *synthetic)
    if q > settings.q_cap:
        raise ResourceLimitError(f"modulus {q} exceeds q_cap {settings.q_cap}")
    floor = search_floor(q)
    hits = []
    chars = [c for c in character_group(q).real_characters() if not c.is_trivial]
    for chi in chars:
        for beta in _real_zeros_primitive(chi.primitive, settings):
            if beta >= floor:
                hits.append((beta, chi))
    if not hits:
        return ExceptionalZero(q, False, floor, characters_scanned=len(chars))
    if len(hits) > 1:
        raise NumericalCheckError(f"found {len(hits)} real zeros above the floor for q={q}")
    beta, chi = hits[0]
    return ExceptionalZero(q, True, floor, beta, chi, bracket_width=1e-12, characters_scanned=len(chars))


# -- density statistics -------------------------------------------------------------

def nu(u: float, beta1: float | None) -> float:
    """min{1, (1 - beta1) log u}; 1 when there is no exceptional zero."""
    if u < 1:
        raise DomainError(f"u must be >= 1, got {u}")
    if beta1 is None:
        return 1.0
    return min(1.0, (1 - beta1) * math.log(u))


CSV_COLUMNS = ("sigma", "Nq", "Nq_star", "bound_huxley", "bound_repulsive", "nu", "ratio")


@dataclass
class DensityRow:
    sigma: float
    Nq: int | None
    Nq_star: int | None
    bound_huxley: float
    bound_repulsive: float
    nu: float
    ratio: float | None
    error: str | None = None


@dataclass
class DensityTable:
    modulus: int
    height: float
    epsilon: float
    rows: list
    exceptional: dict = field(default_factory=dict)

    def is_monotone(self) -> bool:
        rows = sorted((r for r in self.rows if r.Nq is not None), key=lambda r: r.sigma)
        return all(a.Nq >= b.Nq and a.Nq_star >= b.Nq_star for a, b in zip(rows, rows[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "modulus": self.modulus,
            "height": self.height,
            "epsilon": self.epsilon,
            "exceptional": self.exceptional,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def map_ordered(fn, items, threads: int = 1):
    """``list(map(fn, items))``, optionally on a thread pool; order preserved."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def density_stats(q: int, T: float, sigma_grid, eps: float = 0.1, settings: EvalSettings = DEFAULT,
                  exc: ExceptionalZero | None = None, threads: int = 1) -> DensityTable:
    """N_q(sigma, T) and N_q*(sigma, T) with the two reference bounds per sigma."""
    if q > settings.q_cap:
        raise ResourceLimitError(f"modulus {q} exceeds q_cap {settings.q_cap}")
    prims: dict[str, tuple] = {}
    for chi in character_group(q):
        p = chi.primitive
        prims.setdefault(p.label, [p, 0])[1] += 1
    jobs = [(p, s) for p, _ in prims.values() for s in sigma_grid]

    def run(job):
        p, s = job
        try:
            return rectangle_zero_count(p, s, T, settings), None
        except (InconclusiveContourError, NumericalCheckError) as e:
            return None, f"{p.label}: {e}"

    results = dict(zip(((p.label, s) for p, s in jobs), map_ordered(run, jobs, threads)))
    qT = q * T
    beta1 = exc.beta1 if exc is not None and exc.exists else None
    nu_val = nu(qT, beta1)
    rows = []
    for s in sigma_grid:
        total, err = 0, None
        for label, (p, mult) in prims.items():
            n, e = results[(label, s)]
            if e is not None:
                err = e if err is None else f"{err}; {e}"
                continue
            total += mult * n
        huxley = qT ** ((12 / 5 + eps) * (1 - s))
        repulsive = nu_val * qT ** ((75 / 4) * (1 - s))
        if err is not None:
            rows.append(DensityRow(s, None, None, huxley, repulsive, nu_val, None, err))
            continue
        n_q = total
        n_star = total
        if beta1 is not None and s <= beta1:
            n_q += 1
        rows.append(DensityRow(s, n_q, n_star, huxley, repulsive, nu_val, n_q / huxley))
    return DensityTable(q, T, eps, rows, exc.to_dict() if exc is not None else {})


# -- zeros near 1 + it --------------------------------------------------------------

@dataclass
class DiscCount:
    count: int
    t: float
    r: float
    off_line: int
    zeros: list


def zeros_in_disc(chi: DirichletCharacter, t: float, r: float, settings: EvalSettings = DEFAULT,
                  detail: bool = False):
    """n_chi(r; 1 + it): zeros within distance r of 1 + it.

    Critical-line zeros come from the Z-scan; an argument-principle count on
    the enclosing box detects zeros off the line, which must not exist.
    """
    if not 0 < r <= 0.75:
        raise DomainError(f"r must lie in (0, 0.75], got {r}")
    prim = chi.primitive
    _check_caps(prim, abs(t) + r + 0.1, settings)
    t0, t1 = t - r - 0.05, t + r + 0.05
    gammas = scan_window(prim, t0, t1, settings)
    inside = [g for g in gammas if abs(complex(-0.5, g - t)) <= r]
    box = box_zero_count(prim, 1 - r, RIGHT_EDGE, t0, t1, settings)
    on_line = sum(t0 < g < t1 for g in gammas) if 1 - r < 0.5 else 0
    off = box - on_line
    if off != 0:
        raise NumericalCheckError(f"{off} zero(s) off the critical line near 1+{t}i for {prim.label}")
    res = DiscCount(len(inside), t, r, off, inside)
    return res if detail else res.count


def disc_audit(chi: DirichletCharacter, t: float, radii, settings: EvalSettings = DEFAULT) -> dict:
    """Counts n_chi(r; 1+it) over radii with the observed constant C in n <= C r log(q(|t|+1))."""
    radii = sorted(radii)
    counts = [zeros_in_disc(chi, t, r, settings) for r in radii]
    L = math.log(max(chi.modulus * (abs(t) + 1), math.e))
    consts = [c / (r * L) for c, r in zip(counts, radii)]
    return {
        "character": chi.label,
        "t": t,
        "radii": radii,
        "counts": counts,
        "observed_C": max(consts) if consts else 0.0,
        "monotone": all(a <= b for a, b in zip(counts, counts[1:])),
    }
