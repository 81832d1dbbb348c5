"""Command-line interface: ``pntap <group> <command> [options]``.

Settings resolve in the order flags > ``--config`` JSON file > defaults.
Every JSON document carries ``schema_version`` and the seed; no timings or
host details are emitted, so equal inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from . import __version__, aconst, acceptance, pnt, primes, zeros
from .chars import character_from_label, character_group
from .errors import PNTAPError
from .lfunc import DEFAULT

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    c_vk: float = 0.05
    c_dh: float = 0.1
    C_main: float = 0.05
    b_siegel: float | None = None
    q_cap: int = DEFAULT.q_cap
    t_cap: float = DEFAULT.t_cap
    sieve_cap: int = primes.SIEVE_CAP
    format: str = "json"
    output: str | None = None
    seed: int = 0
    threads: int = os.cpu_count() or 1

    def __post_init__(self):
        for name in ("q_cap", "t_cap", "sieve_cap", "threads"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")

    @property
    def settings(self):
        return DEFAULT.with_(q_cap=int(self.q_cap), t_cap=float(self.t_cap))

    def public(self) -> dict:
        d = asdict(self)
        for k in ("output", "threads", "format"):
            d.pop(k)
        return d


CONFIG_KEYS = tuple(f.name for f in fields(RunConfig))


def load_config(args) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config) as f:
            data = json.load(f)
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            values[k] = v
    return RunConfig(**values)


# -- output -----------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                yield from _flatten(item, f"{key}.{i}.")
        else:
            yield key, v


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def emit(cfg: RunConfig, command: str, result, table=None):
    """Write the result; ``table`` = (header, rows) is the CSV form when given."""
    if cfg.format == "csv":
        if table is None:
            table = (("key", "value"), list(_flatten(_jsonable(result))))
        text = table if isinstance(table, str) else _csv(*table)
    else:
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "seed": cfg.seed,
               "config": _jsonable(cfg.public()), "result": _jsonable(result)}
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _ints(s: str) -> tuple:
    return tuple(int(x) for x in s.split(",") if x.strip()) if s else ()


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip())


# -- primes ---------------------------------------------------------------------------

def cmd_primes_theta(args, cfg):
    if args.h is None:
        val = primes.theta_ap(args.x, args.q, args.a, cfg.sieve_cap)
        count = primes.prime_count_ap(args.x, args.q, args.a, cfg.sieve_cap)
        res = {"x": args.x, "h": None, "q": args.q, "a": args.a, "theta": val, "count": count}
    else:
        query = primes.ThetaQuery(args.x, args.h, args.q, args.a)
        res = {"x": args.x, "h": args.h, "q": args.q, "a": args.a,
               "theta": primes.theta_short_interval(query, cfg.sieve_cap)}
    emit(cfg, "primes theta", res)
    return 0


def cmd_primes_digits(args, cfg):
    c = primes.DigitConstraint(args.base, args.N, _ints(args.low), _ints(args.high))
    r = primes.count_prescribed_digits(c, list_primes=args.list, cap=cfg.sieve_cap)
    res = {"base": c.base, "N": c.N, "low": list(c.low), "high": list(c.high), "count": r.count,
           "predicted": r.predicted, "ratio": r.ratio, "log_weighted": r.log_weighted,
           "primes": list(r.primes) if r.primes is not None else None}
    table = None
    if args.list:
        table = (("prime",), [(p,) for p in r.primes])
    emit(cfg, "primes digits", res, table)
    return 0


# -- zeros ----------------------------------------------------------------------------

def _characters(args):
    if args.label:
        return [character_from_label(args.label)]
    return character_group(args.q).primitive_characters()


def cmd_zeros_scan(args, cfg):
    chars = _characters(args)
    sets = zeros.map_ordered(lambda c: zeros.critical_line_zeros(c, args.T, cfg.settings), chars, cfg.threads)
    res = {"T": args.T, "zero_sets": [s.to_dict() for s in sets]}
    rows = [(s.character, z.gamma, z.beta) for s in sets for z in s.zeros]
    emit(cfg, "zeros scan", res, (("character", "gamma", "beta"), rows))
    return 0


def _synthetic(args, cfg):
    if args.synthetic_beta1 is None:
        return None
    chi1 = character_from_label(args.synthetic_chi) if args.synthetic_chi else None
    if chi1 is None:
        real = [c for c in character_group(args.q).real_characters() if not c.is_trivial]
        if not real:
            raise ValueError(f"no real nontrivial character mod {args.q}")
        chi1 = real[0]
    return zeros.synthetic_exceptional(args.q, args.synthetic_beta1, chi1, cfg.b_siegel)


def cmd_zeros_density(args, cfg):
    exc = _synthetic(args, cfg)
    if exc is None and args.q >= 3:
        exc = zeros.exceptional_zero_search(args.q, cfg.settings)
    tab = zeros.density_stats(args.q, args.T, _floats(args.sigma), args.eps, cfg.settings, exc, cfg.threads)
    emit(cfg, "zeros density", tab.to_dict(), tab.to_csv())
    return 0


def cmd_zeros_exceptional(args, cfg):
    exc = _synthetic(args, cfg)
    if exc is not None:
        if args.qmax not in (None, args.q):
            raise ValueError("a synthetic zero applies to a single modulus; drop --qmax")
        out = [exc.to_dict()]
    else:
        qmax = args.qmax or args.q
        out = [zeros.exceptional_zero_search(q, cfg.settings).to_dict() for q in range(args.q, qmax + 1)]
    cols = ("modulus", "exists", "search_floor", "beta1", "chi1", "synthetic", "characters_scanned")
    emit(cfg, "zeros exceptional", {"results": out}, (cols, [[d[c] for c in cols] for d in out]))
    return 0


# -- pnt ------------------------------------------------------------------------------

def cmd_pnt_predict(args, cfg):
    if args.queries:
        with open(args.queries) as f:
            queries = pnt.read_queries_csv(f.read())
    else:
        if None in (args.x, args.h, args.q, args.a):
            raise ValueError("pnt predict needs --x --h --q --a or --queries")
        queries = [(args.x, args.h, args.q, args.a)]
    profile = pnt.ZeroFreeRegionProfile("VK", c_vk=cfg.c_vk, c_dh=cfg.c_dh)
    reports = []
    for x, h, q, a in queries:
        exc = None
        if args.synthetic_beta1 is not None:
            args.q = q
            exc = _synthetic(args, cfg)
        reports.append(pnt.predict_and_compare(x, h, q, a, args.eps, profile, cfg.C_main, exc, args.flavor,
                                               args.lambda_one, cfg.settings, cfg.sieve_cap))
    emit(cfg, "pnt predict", {"reports": [r.to_dict() for r in reports]}, pnt.reports_to_csv(reports))
    return 0


def cmd_pnt_envelope(args, cfg):
    xs = _floats(args.x)
    rows = []
    for x in xs:
        h = x * args.h_ratio
        rows.append({"x": x, "h": h, "q": args.q, "flavor": args.flavor, "C": cfg.C_main,
                     "envelope": pnt.error_envelope(x, h, args.q, cfg.C_main, args.flavor, args.beta1, args.d)})
    cols = ("x", "h", "q", "flavor", "C", "envelope")
    emit(cfg, "pnt envelope", {"rows": rows}, (cols, [[r[c] for c in cols] for r in rows]))
    return 0


def cmd_pnt_explicit(args, cfg):
    heights = _floats(args.T)
    zs = pnt.zero_sets_for_modulus(args.q, max(heights), cfg.settings)
    rows = pnt.explicit_formula_audit(args.x, args.q, args.a, heights, zs, lower_order=args.lower_order)
    cols = ("x", "q", "a", "T", "actual", "approx", "deviation", "slack", "ratio")
    emit(cfg, "pnt explicit", {"lower_order": args.lower_order, "rows": rows},
         (cols, [[r[c] for c in cols] for r in rows]))
    return 0


def cmd_pnt_bt(args, cfg):
    exc = None
    if args.q >= 3 and args.q <= cfg.q_cap:
        exc = zeros.exceptional_zero_search(args.q, cfg.settings)
    r = pnt.brun_titchmarsh_audit(args.x, args.h, args.q, args.delta, exc, cfg.sieve_cap)
    emit(cfg, "pnt bt", r.to_dict(with_ratios=args.ratios))
    return 0 if r.passed else 1


# -- aconst ---------------------------------------------------------------------------

def cmd_aconst_optimize(args, cfg):
    r = aconst.optimize_constants()
    res = r.to_dict()
    res["alpha0_root"] = aconst.alpha0_root()
    emit(cfg, "aconst optimize", res)
    return 0


def cmd_aconst_audit(args, cfg):
    chain = aconst.ConstantChain(phi=Fraction(args.phi) if args.phi else aconst.PHI_PY, K=args.K)
    rep = aconst.verify_constant_chain(chain)
    A0, A1 = aconst.root_A0_A1()
    jk = [aconst.jk_decay_check(k, float(aconst.PUBLISHED_B), A0, A1, args.M, args.eta).__dict__
          for k in range(args.M, 2 * args.M + 1)]
    rep["A0_A1"] = {"A0": A0, "A1": A1}
    rep["jk_decay"] = jk
    ok = rep["all_pass"] and all(j["small_n_ok"] and j["large_n_ok"] for j in jk)
    emit(cfg, "aconst audit", rep)
    return 0 if ok else 1


def cmd_aconst_powersum(args, cfg):
    if args.points:
        pts = tuple(complex(p.replace(" ", "")) for p in args.points.split(";") if p.strip())
        r = aconst.power_sum_min_k(aconst.PowerSumInstance(pts, args.M), check=False)
        res = {"N": len(pts), "M": args.M, "k": r.k, "value": r.value, "bound": r.bound, "ratio": r.ratio}
        emit(cfg, "aconst powersum", res)
        return 0 if r.ratio >= 1 else 1
    res = aconst.power_sum_suite(args.instances, args.max_N, args.max_M, cfg.seed)
    emit(cfg, "aconst powersum", res)
    return 0 if res["violations"] == 0 else 1


# -- verify ---------------------------------------------------------------------------

def cmd_verify(args, cfg):
    only = set(_ints(args.only)) if args.only else None
    log = (lambda r: print(r.line(), file=sys.stderr, flush=True))
    results = acceptance.run_suite(quick=args.quick, seed=cfg.seed, threads=cfg.threads, only=only, progress=log)
    ok = all(r.passed for r in results)
    if cfg.format == "json":
        text = acceptance.report_json(results, cfg.seed, args.quick) + "\n"
    else:
        text = _csv(("criterion", "name", "scope", "passed"),
                    [(r.number, r.name, r.scope, r.passed) for r in results])
    if cfg.output:
        with open(cfg.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed", file=sys.stderr)
    return 0 if ok else 1


# -- parser ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--format", choices=("json", "csv"), default=None)
    g.add_argument("--config", help="JSON file with RunConfig fields")
    g.add_argument("--output", "-o", help="write to this file instead of stdout")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--threads", type=int, default=None)
    g.add_argument("--c-vk", dest="c_vk", type=float, default=None)
    g.add_argument("--c-dh", dest="c_dh", type=float, default=None)
    g.add_argument("--C-main", dest="C_main", type=float, default=None)
    g.add_argument("--b-siegel", dest="b_siegel", type=float, default=None)
    g.add_argument("--q-cap", dest="q_cap", type=int, default=None)
    g.add_argument("--t-cap", dest="t_cap", type=float, default=None)
    g.add_argument("--sieve-cap", dest="sieve_cap", type=int, default=None)
    return p


def _synthetic_args(p):
    p.add_argument("--synthetic-beta1", type=float, default=None, help="inject an exceptional zero")
    p.add_argument("--synthetic-chi", default=None, help="label q.index of the real character chi1")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="pntap", description="Primes in progressions and short intervals: "
                                     "sieves, L-function zeros, predictions and constant audits.")
    parser.add_argument("--version", action="version", version=f"pntap {__version__}")
    groups = parser.add_subparsers(dest="group", metavar="{primes,zeros,pnt,aconst,verify}")
    groups.required = True

    g = groups.add_parser("primes", help="sieved prime sums").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("theta", parents=[common], help="sum of log p over p <= x (or x - h < p <= x), p = a mod q")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--h", type=float)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--a", type=int, default=0)
    p.set_defaults(func=cmd_primes_theta)
    p = g.add_parser("digits", parents=[common], help="primes with prescribed lowest and highest digits")
    p.add_argument("--base", type=int, default=10)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--low", default="", help="comma-separated d_0,...,d_{A-1}")
    p.add_argument("--high", default="", help="comma-separated d_{N-B},...,d_{N-1}")
    p.add_argument("--list", action="store_true", help="also list the primes")
    p.set_defaults(func=cmd_primes_digits)

    g = groups.add_parser("zeros", help="zeros of Dirichlet L-functions").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("scan", parents=[common], help="critical-line zeros up to height T")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--label", help="a single primitive character, as q.index")
    p.add_argument("--T", type=float, default=50.0)
    p.set_defaults(func=cmd_zeros_scan)
    p = g.add_parser("density", parents=[common], help="N_q(sigma, T) table")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--sigma", default="0.5,0.6,0.75,0.9,1.0")
    p.add_argument("--eps", type=float, default=0.1)
    _synthetic_args(p)
    p.set_defaults(func=cmd_zeros_density)
    p = g.add_parser("exceptional", parents=[common], help="search for a real zero near 1")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--qmax", type=int, help="scan every modulus in [q, qmax]")
    _synthetic_args(p)
    p.set_defaults(func=cmd_zeros_exceptional)

    g = groups.add_parser("pnt", help="predictions and audits").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("predict", parents=[common], help="sieved truth against lambda h / phi(q)")
    p.add_argument("--x", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--queries", help="CSV file of x,h,q,a rows")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--flavor", choices=pnt.ENVELOPE_FLAVORS, default="VK")
    p.add_argument("--lambda-one", action="store_true", help="use theta = 7/12 and lambda = 1 throughout")
    _synthetic_args(p)
    p.set_defaults(func=cmd_pnt_predict)
    p = g.add_parser("envelope", parents=[common], help="error envelope values")
    p.add_argument("--x", required=True, help="comma-separated x values")
    p.add_argument("--h-ratio", type=float, default=1.0)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--flavor", choices=pnt.ENVELOPE_FLAVORS, default="VK")
    p.add_argument("--beta1", type=float)
    p.add_argument("--d", type=int, help="squarefree part for the POWERFUL flavor")
    p.set_defaults(func=cmd_pnt_envelope)
    p = g.add_parser("explicit", parents=[common], help="truncated explicit formula against the sieve")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--T", default="10,20,40,80", help="comma-separated heights")
    p.add_argument("--lower-order", choices=pnt.LOWER_ORDER_MODES, default="exact")
    p.set_defaults(func=cmd_pnt_explicit)
    p = g.add_parser("bt", parents=[common], help="Brun-Titchmarsh audit over all classes")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--ratios", action="store_true", help="include every class ratio")
    p.set_defaults(func=cmd_pnt_bt)

    g = groups.add_parser("aconst", help="constants and power sums").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("optimize", parents=[common], help="minimise the density-exponent objective")
    p.set_defaults(func=cmd_aconst_optimize)
    p = g.add_parser("audit", parents=[common], help="recompute the constant chain")
    p.add_argument("--phi", help="subconvexity exponent as a fraction or decimal (default 1/6 + 1e-7)")
    p.add_argument("--K", type=float, help="recorded in the report; never fixed")
    p.add_argument("--M", type=int, default=3)
    p.add_argument("--eta", type=float, default=0.1)
    p.set_defaults(func=cmd_aconst_audit)
    p = g.add_parser("powersum", parents=[common], help="power-sum lower bound")
    p.add_argument("--points", help="semicolon-separated complex numbers, e.g. '1;-0.5+0.2j'")
    p.add_argument("--M", type=int, default=0)
    p.add_argument("--instances", type=int, default=10_000)
    p.add_argument("--max-N", dest="max_N", type=int, default=4)
    p.add_argument("--max-M", dest="max_M", type=int, default=5)
    p.set_defaults(func=cmd_aconst_powersum)

    p = groups.add_parser("verify", parents=[common], help="run the acceptance suite")
    m = p.add_mutually_exclusive_group()
    m.add_argument("--quick", action="store_true", help="sub-minute subset")
    m.add_argument("--full", action="store_true", help="every criterion at full size (default)")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        print("pntap: error: a subcommand is required", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = load_config(args)
    except (ValueError, OSError, TypeError) as e:
        print(f"pntap: error: {e}", file=sys.stderr)
        return 2
    try:
        return args.func(args, cfg)
    except (PNTAPError, ValueError) as e:
        print(f"pntap: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
