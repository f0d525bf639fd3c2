"""Command-line entry point: ``meroscope <command> [options]``.

Every command prints one JSON document (or JSON lines for trajectories)
to stdout or ``--output``.  Errors go to stderr as a one-line JSON record
naming the offending field.  Exit codes: 0 success, 1 parse/config error,
2 not meromorphic (``analyze``), 3 failed assertion (``verify``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import (
    BoundaryGrid,
    ComplexPoly,
    LaurentSeries,
    RationalFn,
    TaylorSeries,
    analyze_grid,
    complex_pairs,
    parse_function_spec,
    series_divide,
    to_grid,
    to_laurent,
)
from .errors import ConfigError, MeroscopeError, SpecError
from .families import random_minus, random_rational, witness_family
from .poles import GAP_THRESHOLD, RESIDUAL_TOL, check_necessity, minimal_pole_count
from .rigidity import DEFAULT_BUDGET, NoneFound, equivalence_suite, find_witness
from .valence import (
    ValentFn,
    denominator_from_coeffs,
    ell_polynomials,
    is_Bm,
    iterate_transform,
    random_admissible,
    random_bm,
    sup_distance,
    transform,
    us2_crosscheck,
)
from .winding import winding, winding_on_circle, winding_via_zeros
from .zeros import count_zeros_disk, count_zeros_exterior

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NOT_MEROMORPHIC, EXIT_ASSERTION = 0, 1, 2, 3
SUITES = ("rigidity", "necessity", "valence", "all")
VALENCE_K = 160


@dataclass(frozen=True)
class RunConfig:
    grid_size: int = 4096
    max_m: int = 8
    gap_threshold: float = GAP_THRESHOLD
    residual_tol: float = RESIDUAL_TOL
    seed: int = 0
    fmt: str = "json"
    output: str | None = None

    def __post_init__(self):
        n = self.grid_size
        if n < 64 or n & (n - 1):
            raise ConfigError(f"grid size {n} is not a power of two >= 64", field="grid_size")
        if self.max_m < 0:
            raise ConfigError("max_m must be nonnegative", field="max_m")
        for name in ("gap_threshold", "residual_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive", field=name)
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits", field="seed")
        if self.fmt not in ("json", "text"):
            raise ConfigError(f"unknown format {self.fmt!r}", field="format")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def jsonable(obj):
    """Convert numpy scalars, complex numbers and polynomials for ``json``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, ComplexPoly):
        return complex_pairs(obj.coeffs)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _text_lines(doc: dict) -> list[str]:
    return [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in doc.items()]


class Emitter:
    """Writes documents or records in the configured format."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lines: list[str] = []

    def document(self, doc: dict) -> None:
        doc = jsonable(doc)
        if self.cfg.fmt == "json":
            self.lines.append(json.dumps(doc, sort_keys=True, indent=2))
        else:
            self.lines.extend(_text_lines(doc))

    def record(self, rec: dict) -> None:
        rec = jsonable(rec)
        if self.cfg.fmt == "json":
            self.lines.append(json.dumps(rec, sort_keys=True))
        else:
            self.lines.append(" ".join(f"{k}={json.dumps(v, sort_keys=True)}" for k, v in rec.items()))

    def flush(self) -> None:
        text = "\n".join(self.lines) + "\n"
        if self.cfg.output:
            with open(self.cfg.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def error_record(exc: Exception) -> str:
    return json.dumps(
        {"error": type(exc).__name__, "message": str(exc), "field": getattr(exc, "field", None)},
        sort_keys=True,
    )


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def load_spec(path: str):
    try:
        if path == "-":
            doc = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}", field="path") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg} at line {exc.lineno}", field="document") from exc
    return parse_function_spec(doc)


def disk_series(obj, K: int, n: int) -> TaylorSeries:
    """Taylor data of a function holomorphic in the disk."""
    if isinstance(obj, RationalFn):
        if obj.den.coeffs[0] == 0:
            raise SpecError("denominator vanishes at the origin", field="den")
        return TaylorSeries(series_divide(obj.num.coeffs, obj.den.coeffs, K + 1))
    f = obj if isinstance(obj, LaurentSeries) else analyze_grid(to_grid(obj, n))
    neg = np.asarray(f.neg)
    if neg.size and np.max(np.abs(neg)) > 1e-10 * max(f.max_abs_coefficient(), 1e-300):
        raise SpecError("function has negative Fourier coefficients; not holomorphic in the disk", field="neg")
    c = np.zeros(K + 1, dtype=complex)
    nonneg = np.asarray(f.nonneg)[: K + 1]
    c[: nonneg.size] = nonneg
    return TaylorSeries(c)


def minus_of(obj, n: int) -> np.ndarray:
    """Coefficients ``c_{-1}, c_{-2}, ...`` of the input function."""
    if isinstance(obj, RationalFn):
        _, rem = divmod(obj.num, obj.den)
        return RationalFn(rem, obj.den).normalized().laurent_at_infinity(n // 2 - 1)
    return np.asarray(to_laurent(obj, n).neg)


def parse_complex_list(text: str, field: str) -> np.ndarray:
    try:
        values = json.loads(text)
        return np.array([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in values])
    except (ValueError, TypeError, IndexError, json.JSONDecodeError) as exc:
        raise ConfigError(f"expected a JSON list of numbers or [re, im] pairs: {exc}", field=field) from exc


def child_seeds(seed: int, count: int) -> list[int]:
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def witness_json(w) -> dict:
    if isinstance(w, NoneFound):
        return {"found": False, "attempts": w.attempts}
    return {
        "found": True,
        "n": w.n,
        "p": w.p,
        "zero_count": w.zero_count,
        "bound": w.bound,
        "layer": w.layer,
        "attempts": w.attempts,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args, cfg: RunConfig, out: Emitter) -> int:
    obj = load_spec(args.spec)
    f = to_laurent(obj, cfg.grid_size)
    rep = minimal_pole_count(f, cfg.max_m, gap_threshold=cfg.gap_threshold, residual_tol=cfg.residual_tol)
    doc = {"pole_report": rep.to_json()}
    if not rep.meromorphic:
        doc["summary"] = {"status": "not_meromorphic", "max_m": cfg.max_m, "diagnostics": rep.diagnostics}
        out.document(doc)
        return EXIT_NOT_MEROMORPHIC
    r = rep.reconstruction
    plus = np.asarray(f.nonneg)
    keep = np.flatnonzero(np.abs(plus) > 1e-14 * max(np.max(np.abs(plus), initial=0.0), 1e-300))
    plus_poly = ComplexPoly(plus[: keep[-1] + 1]) if keep.size else ComplexPoly()
    full = RationalFn(r.num + r.den * plus_poly, r.den)
    nec = check_necessity(full, trials=args.trials, seed=cfg.seed)
    witness = None
    if rep.m >= 1:
        witness = witness_json(find_witness(f, rep.m - 1, args.budget))
    doc["necessity"] = nec.to_json()
    doc["witness_below"] = witness
    doc["summary"] = {
        "status": "meromorphic",
        "m": rep.m,
        "necessity_passed": nec.passed,
        "witness_found_below": None if witness is None else witness["found"],
    }
    out.document(doc)
    return EXIT_OK


def cmd_winding(args, cfg: RunConfig, out: Emitter) -> int:
    obj = load_spec(args.spec)
    if isinstance(obj, BoundaryGrid):
        rep = winding(obj)
    elif isinstance(obj, RationalFn):
        rep = winding_on_circle(obj, n0=cfg.grid_size)
    else:
        rep = winding_on_circle(lambda t: obj(t), n0=cfg.grid_size)
    out.document({"winding": rep.winding, "min_modulus": rep.min_modulus, "max_step_angle": rep.max_step_angle, "N": rep.N})
    return EXIT_OK


def cmd_zeros(args, cfg: RunConfig, out: Emitter) -> int:
    obj = load_spec(args.spec)
    if args.q is not None:
        q = ComplexPoly(parse_complex_list(args.q, "q"))
        minus = minus_of(obj, cfg.grid_size)
        ext = count_zeros_exterior(minus, q)
        doc = {"exterior_zeros": ext, "deg_q": q.degree}
        try:
            doc["winding"] = winding_via_zeros(minus, q, ext)
        except MeroscopeError as exc:
            doc["winding"] = None
            doc["winding_note"] = str(exc)
        out.document(doc)
        return EXIT_OK
    if not 0 < args.rho <= 1:
        raise ConfigError("rho must lie in (0, 1]", field="rho")
    target = obj if isinstance(obj, RationalFn) else disk_series(obj, cfg.grid_size // 2 - 1, cfg.grid_size)
    out.document({"zeros": count_zeros_disk(target, args.rho), "rho": args.rho})
    return EXIT_OK


def cmd_rigidity(args, cfg: RunConfig, out: Emitter) -> int:
    obj = load_spec(args.spec)
    if args.m < 0:
        raise ConfigError("m must be nonnegative", field="m")
    source = obj if isinstance(obj, RationalFn) else to_laurent(obj, cfg.grid_size)
    rep = equivalence_suite(source, args.m, trials=args.trials, seed=cfg.seed)
    f = LaurentSeries(neg=minus_of(obj, cfg.grid_size))
    w = find_witness(f, args.m, args.budget)
    out.document({"m": args.m, "equivalence": rep.to_json(), "witness": witness_json(w)})
    return EXIT_OK if rep.passed else EXIT_ASSERTION


def _valent_from_spec(path: str, m: int | None, cfg: RunConfig) -> ValentFn:
    s = disk_series(load_spec(path), VALENCE_K, cfg.grid_size)
    order = s.order_at_origin(1e-12)
    if m is None:
        m = order
    if m < 1 or order != m:
        raise ConfigError(f"series starts at z**{order}, not z**{m}", field="m")
    lead = s.coefficient(m)
    c = np.array(s.coeffs) / lead
    c[:m] = 0
    c[m] = 1
    return ValentFn(TaylorSeries(c), m)


def cmd_valence(args, cfg: RunConfig, out: Emitter) -> int:
    if args.spec is None:
        if args.m is None or args.m < 1:
            raise ConfigError("give a spec file or --m >= 1", field="m")
        out.document(ell_polynomials(args.m, args.k_max).to_json())
        return EXIT_OK
    g = _valent_from_spec(args.spec, args.m, cfg)
    table = ell_polynomials(g.m, args.k_max)
    member, dev = is_Bm(g, args.k_max, args.tol, table)
    doc = {
        "m": g.m,
        "k_max": args.k_max,
        "is_Bm": member,
        "deviation": dev,
        "coefs": g.coefs(args.k_max),
        "d": denominator_from_coeffs(g.coefs(g.m)),
    }
    if args.dump_ell:
        doc["ell"] = table.to_json()["ell"]
    out.document(doc)
    return EXIT_OK


def cmd_transform(args, cfg: RunConfig, out: Emitter) -> int:
    g = _valent_from_spec(args.spec, args.m, cfg)
    schedule = [complex(a) for a in (args.a or [])]
    if args.random_steps:
        schedule += list(random_admissible(np.random.default_rng(cfg.seed), g.m, args.random_steps))
    if not schedule:
        raise ConfigError("give --a values or --random-steps", field="a")
    for a in schedule:
        if not abs(a) < 4.0**-g.m:
            raise ConfigError(f"a = {a} outside the disk of radius 4**-{g.m}", field="a")
    for rec in iterate_transform(g, schedule, args.k_max):
        out.record(rec.to_json())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


def suite_rigidity(cfg: RunConfig, trials: int) -> dict:
    s_case, s_trials, s_witness = child_seeds(cfg.seed, 3)
    rng = np.random.default_rng(s_case)
    m = int(rng.integers(1, 4))
    f = random_minus(rng, m)
    rep = equivalence_suite(f, m, trials=trials, seed=s_trials)
    wf = witness_family(np.random.default_rng(s_witness), m - 1)
    minus = LaurentSeries(neg=wf.laurent_at_infinity(2047))
    w = find_witness(minus, m - 1)
    checks = {
        "oracles_agree": rep.mismatches == 0,
        "winding_identity": rep.winding_failures == 0,
        "bound_holds_at_pole_count": rep.bound_violations == 0,
        "witness_below_pole_count": not isinstance(w, NoneFound),
    }
    return {
        "m": m,
        "poles": complex_pairs(np.sort_complex(np.array([rc.value for rc in f.poles()]))),
        "summary": rep.to_json(with_records=False),
        "records": rep.records,
        "witness": witness_json(w),
        "checks": checks,
        "passed": all(checks.values()),
    }


def suite_necessity(cfg: RunConfig, trials: int) -> dict:
    seeds = child_seeds(cfg.seed, 3)
    cases = []
    for m, s in zip((0, 1, 2), seeds):
        rng = np.random.default_rng(s)
        f = random_rational(rng, m)
        rep = check_necessity(f, trials=trials, seed=int(rng.integers(2**63)))
        cases.append(rep.to_json() | {"windings": rep.windings})
    return {"cases": cases, "passed": all(c["violations"] == 0 for c in cases)}


def suite_valence(cfg: RunConfig, trials: int) -> dict:
    records = []
    ok = True
    for m, s in zip((1, 2, 3), child_seeds(cfg.seed, 3)):
        rng = np.random.default_rng(s)
        table = ell_polynomials(m, 10)
        for i in range(trials):
            g = random_bm(rng, m).series(VALENCE_K)
            member, dev = is_Bm(g, 10, 1e-10, table)
            a = complex(random_admissible(rng, m, 1)[0])
            fixed = sup_distance(transform(g, a), g)
            us2 = us2_crosscheck(g, a)["deviation"]
            c = np.array(g.series.coeffs)
            c[m + 1 : m + 4] += 1e-3 * np.exp(2j * np.pi * rng.uniform(0, 1, 3))
            rejected = not is_Bm(ValentFn(TaylorSeries(c), m), 10, 1e-10, table)[0]
            rec_ok = member and fixed <= 1e-9 and us2 <= 1e-9 and rejected
            ok &= rec_ok
            records.append(
                {
                    "m": m,
                    "trial": i,
                    "ell_deviation": dev,
                    "fixed_point_sup": fixed,
                    "us2_deviation": us2,
                    "perturbed_rejected": rejected,
                    "passed": rec_ok,
                }
            )
    return {"records": records, "passed": bool(ok)}


SUITE_FUNCS = {"rigidity": suite_rigidity, "necessity": suite_necessity, "valence": suite_valence}


def cmd_verify(args, cfg: RunConfig, out: Emitter) -> int:
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", field="suite")
    if args.trials < 1:
        raise ConfigError("trials must be positive", field="trials")
    names = list(SUITE_FUNCS) if args.suite == "all" else [args.suite]
    suites = {name: SUITE_FUNCS[name](cfg, args.trials) for name in names}
    passed = all(s["passed"] for s in suites.values())
    out.document({"seed": cfg.seed, "trials": args.trials, "suites": suites, "passed": passed})
    return EXIT_OK if passed else EXIT_ASSERTION


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, field="arguments")


def _common(defaults: bool) -> argparse.ArgumentParser:
    """Global options, accepted before or after the command name."""
    p = _Parser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--grid-size", type=int, default=d(4096), help="samples on the circle (power of two)")
    p.add_argument("--max-m", type=int, default=d(8), help="largest pole count tried")
    p.add_argument("--gap-threshold", type=float, default=d(GAP_THRESHOLD))
    p.add_argument("--residual-tol", type=float, default=d(RESIDUAL_TOL))
    p.add_argument("--seed", type=int, default=d(None), help="64-bit seed (default: $MEROSCOPE_SEED or 0)")
    p.add_argument("--format", choices=("json", "text"), default=d("json"), dest="fmt")
    p.add_argument("--output", default=d(None), metavar="FILE")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meroscope", description=__doc__.splitlines()[0], parents=[_common(True)])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(False)

    p = sub.add_parser("analyze", parents=[common], help="minimal pole count, necessity sampling, witness below")
    p.add_argument("spec", help="function-spec JSON file ('-' for stdin)")
    p.add_argument("--trials", type=int, default=50, help="necessity trials")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="witness search budget")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("winding", parents=[common], help="winding number of the boundary function")
    p.add_argument("spec")
    p.set_defaults(func=cmd_winding)

    p = sub.add_parser("zeros", parents=[common], help="zeros in |z| < rho, or exterior zeros of f_minus + q")
    p.add_argument("spec")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--q", default=None, help="JSON list of q coefficients; counts zeros of f_minus + q in |z| > 1")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("rigidity", parents=[common], help="two-oracle zero counts and witness search at level m")
    p.add_argument("spec")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("valence", parents=[common], help="B_m membership test or ell table dump")
    p.add_argument("spec", nargs="?", default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--dump-ell", action="store_true", help="include the ell table")
    p.set_defaults(func=cmd_valence)

    p = sub.add_parser("transform", parents=[common], help="trajectory of g -> g^a as JSON lines")
    p.add_argument("spec")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--a", type=complex, action="append", help="value a (Python complex literal); repeatable")
    p.add_argument("--random-steps", type=int, default=0, help="append seeded random admissible values")
    p.add_argument("--k-max", type=int, default=10)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", parents=[common], help="seeded self-checks: rigidity, necessity, valence, all")
    p.add_argument("suite")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_verify)
    return parser


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("MEROSCOPE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"MEROSCOPE_SEED={env!r} is not an integer", field="MEROSCOPE_SEED") from exc


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(
            grid_size=args.grid_size,
            max_m=args.max_m,
            gap_threshold=args.gap_threshold,
            residual_tol=args.residual_tol,
            seed=_resolve_seed(args.seed),
            fmt=args.fmt,
            output=args.output,
        )
        out = Emitter(cfg)
        code = args.func(args, cfg, out)
        out.flush()
        return code
    except (MeroscopeError, ValueError) as exc:
        print(error_record(exc), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
