"""Command-line front end.

Subcommands: field (context inspection), table (sequence values), zeta
(evaluate Z_D^odd/Z_D^even by any method), verify (identity / Pell /
class-number / cross-check suites), poles (lattice exploration).

Exit codes: 0 success or all-pass, 1 usage or domain error (including
near-pole rejections), 2 unsupported field (fundamental unit of norm +1),
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .continuation import (
    cross_check,
    pole_grid,
    residue_closed_form,
    z_binomial,
    z_direct,
    z_spectral,
)
from .errors import (
    DomainError,
    NearPoleError,
    NoConvergence,
    PoleError,
    UnsupportedFieldError,
)
from .identities import DEFAULT_SEED, run_identity_suite
from .qfield import make_context
from .sequences import (
    fibonacci,
    is_even_indexed_fib,
    is_odd_indexed_fib,
    lucas,
)
from .special import CNum, as_cnum

_CROSSCHECK_GRID = (
    complex(2.0, 0.0), complex(0.5, 0.0), complex(1.5, 1.3),
    complex(-0.7, 0.3), complex(-1.3, 1.1), complex(-3.2, 0.9),
)


@dataclass
class RunConfig:
    """Validated run parameters shared by the subcommands."""

    D: int | None = None
    precision: int = 128
    tol: float = 1e-20
    fmt: str = "json"
    seed: int = DEFAULT_SEED

    def validate(self) -> None:
        if self.precision < 64:
            raise DomainError("precision must be >= 64 bits")
        # below this the evaluators cannot separate truncation from rounding
        if mpfr(self.tol) <= mpfr(2) ** (-self.precision + 24):
            raise DomainError(
                f"tol must exceed 2^-{self.precision - 24} at precision "
                f"{self.precision}")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; 2 is reserved for UNSUPPORTED."""

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # let "-5..1" and "-1.3+0.5i" pass as option values, not flags
        self._negative_number_matcher = re.compile(r"^-\d|^-\.\d")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_complex(text: str, precision: int) -> CNum:
    """Parse "a+bi" decimal strings at full precision."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        val = gmpy2.mpc(cleaned, precision=precision)
    except ValueError:
        raise DomainError(f"cannot parse complex number {text!r}")
    return CNum(val, precision=precision)


def _parse_range(text: str) -> tuple[float, float]:
    """Parse "lo..hi" rectangle bounds."""
    if ":" in text:
        raise DomainError("step syntax is not supported for pole rectangles")
    parts = text.split("..")
    if len(parts) != 2:
        raise DomainError(f"expected lo..hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise DomainError(f"expected numeric bounds, got {text!r}")
    if lo > hi:
        raise DomainError(f"empty range {text!r}: lo exceeds hi")
    return lo, hi


def _parse_d_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise DomainError(f"expected comma-separated integers, got {text!r}")


def _emit(obj, fmt: str, csv_rows=None, csv_header=None) -> None:
    """JSON to stdout, or the prepared CSV rows when fmt == csv."""
    if fmt == "csv" and csv_rows is not None:
        w = csv.writer(sys.stdout)
        w.writerow(csv_header)
        w.writerows(csv_rows)
    else:
        print(json.dumps(obj, indent=2))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_field(args) -> int:
    cfg = RunConfig(D=args.D, precision=args.precision, fmt=args.format)
    cfg.validate()
    ctx = make_context(cfg.D, cfg.precision)
    d = ctx.to_json_dict()
    rows = [(k, v) for k, v in d.items()]
    _emit(d, cfg.fmt, csv_rows=rows, csv_header=("key", "value"))
    return 0


def cmd_table(args) -> int:
    cfg = RunConfig(D=args.D, precision=args.precision, fmt=args.format)
    cfg.validate()
    if args.limit < 1:
        raise DomainError("limit must be >= 1")
    ctx = make_context(cfg.D, cfg.precision)
    rows = [(n, lucas(ctx, n), fibonacci(ctx, n))
            for n in range(1, args.limit + 1)]
    obj = [{"n": n, "lucas": str(l), "fibonacci": str(f)} for n, l, f in rows]
    _emit(obj, cfg.fmt, csv_rows=rows, csv_header=("n", "lucas", "fibonacci"))
    return 0


_METHODS = {"direct": z_direct, "binomial": z_binomial, "spectral": z_spectral}


def _method_applies(name: str, sigma, parity: str) -> bool:
    if name == "direct":
        return sigma > 0
    if name == "spectral" and parity == "even":
        return sigma < 0
    return True


def cmd_zeta(args) -> int:
    cfg = RunConfig(D=args.D, precision=args.precision, tol=args.tol,
                    fmt=args.format)
    cfg.validate()
    ctx = make_context(cfg.D, cfg.precision)
    s = _parse_complex(args.s, cfg.precision)
    if args.method == "all":
        names = [n for n in ("direct", "binomial", "spectral")
                 if _method_applies(n, s.real, args.parity)]
    else:
        names = [args.method]
    results = []
    for name in names:
        results.append((name, _METHODS[name](ctx, s, args.parity, tol=cfg.tol)))
    records = [r.to_json_dict(cfg.D, s, args.parity) for _, r in results]
    obj = {"evaluations": records}
    if len(results) > 1:
        wp = cfg.precision + 32
        gctx = gmpy2.context(precision=wp)
        worst = mpfr(0)
        for i in range(len(results)):
            for j in range(i + 1, len(results)):
                d = gctx.abs(gctx.sub(as_cnum(results[i][1].value, wp).val,
                                      as_cnum(results[j][1].value, wp).val))
                worst = max(worst, d)
        obj["max_discrepancy"] = str(worst)
    rows = [(r["D"], r["s_re"], r["s_im"], r["parity"], r["method"],
             r["value_re"], r["value_im"], r["tail_bound"], r["terms_used"])
            for r in records]
    _emit(obj, cfg.fmt, csv_rows=rows,
          csv_header=("D", "s_re", "s_im", "parity", "method", "value_re",
                      "value_im", "tail_bound", "terms_used"))
    return 0


def _verify_pell(ctx, limit: int) -> dict:
    """Predicate membership == table membership for both parities, n <= limit."""
    odd_set = set()
    even_set = set()
    n = 1
    while True:
        f = fibonacci(ctx, n)
        if f > limit:
            break
        (odd_set if n % 2 else even_set).add(f)
        n += 1
    mismatches = []
    for n in range(1, limit + 1):
        if is_odd_indexed_fib(ctx, n) != (n in odd_set):
            mismatches.append(("odd", n))
        if is_even_indexed_fib(ctx, n) != (n in even_set):
            mismatches.append(("even", n))
    return {"D": ctx.D, "limit": limit, "mismatches": mismatches[:10],
            "passed": not mismatches}


def _verify_classnumber(limit: int, precision: int) -> dict:
    """|L(1,chi_q) - 2 h log eps / sqrt(q)| small for every norm -1 field."""
    wp = precision + 32
    gctx = gmpy2.context(precision=wp)
    bound = mpfr(2, wp) ** (-(precision // 2))
    checked = []
    worst = mpfr(0, wp)
    d = 2
    while d <= limit:
        try:
            ctx = make_context(d, precision)
        except (DomainError, UnsupportedFieldError):
            d += 1
            continue
        lhs = ctx.L1_chi_q
        rhs = gctx.div(
            gctx.mul(mpfr(2 * ctx.class_number, wp), ctx.log_eps_at(wp)),
            gctx.sqrt(mpfr(ctx.q, wp)))
        diff = gctx.abs(gctx.sub(mpfr(lhs, wp), rhs))
        worst = max(worst, diff)
        checked.append(d)
        d += 1
    return {"fields": checked, "count": len(checked),
            "max_abs_error": str(worst), "bound": str(bound),
            "passed": bool(worst < bound)}


def _verify_crosscheck(ds: list[int], precision: int, tol: float) -> dict:
    out = {"tol": tol, "fields": {}, "passed": True}
    for d in ds:
        ctx = make_context(d, precision)
        rep = cross_check(ctx, _CROSSCHECK_GRID, tol=tol)
        out["fields"][str(d)] = {"max_delta": rep.max_delta,
                                 "all_pass": rep.all_pass,
                                 "entries": len(rep.entries)}
        out["passed"] = out["passed"] and rep.all_pass
    return out


def cmd_verify(args) -> int:
    cfg = RunConfig(precision=args.precision, tol=args.tol, fmt=args.format,
                    seed=args.seed)
    cfg.validate()
    ds = _parse_d_list(args.D) if args.D else [2, 5, 13, 29]
    suites = (["identities", "pell", "classnumber", "crosscheck"]
              if args.suite == "all" else [args.suite])
    report = {"seed": cfg.seed, "precision": cfg.precision, "suites": {}}
    ok = True
    for suite in suites:
        if suite == "identities":
            res = run_identity_suite(precision=cfg.precision,
                                     n_samples=args.samples, seed=cfg.seed)
            report["suites"]["identities"] = {
                "all_pass": res["all_pass"],
                "reports": {k: v.to_json_dict()
                            for k, v in res["reports"].items()},
            }
            ok = ok and res["all_pass"]
        elif suite == "pell":
            limit = args.limit or 100000
            sub = [_verify_pell(make_context(d, cfg.precision), limit)
                   for d in ds]
            report["suites"]["pell"] = sub
            ok = ok and all(r["passed"] for r in sub)
        elif suite == "classnumber":
            limit = args.limit or 200
            sub = _verify_classnumber(limit, cfg.precision)
            report["suites"]["classnumber"] = sub
            ok = ok and sub["passed"]
        elif suite == "crosscheck":
            sub = _verify_crosscheck(ds, cfg.precision, cfg.tol)
            report["suites"]["crosscheck"] = sub
            ok = ok and sub["passed"]
    report["all_pass"] = ok
    print(json.dumps(report, indent=2))
    return 0 if ok else 3


def cmd_poles(args) -> int:
    cfg = RunConfig(D=args.D, precision=args.precision, fmt=args.format)
    cfg.validate()
    ctx = make_context(cfg.D, cfg.precision)
    re_range = _parse_range(args.re)
    im_range = _parse_range(args.im)
    grid = pole_grid(ctx, re_range, im_range)
    entries = []
    for p in grid:
        entry = {"k": p.k, "m": p.m,
                 "re": str(p.location.real), "im": str(p.location.imag)}
        if p.m == 0:
            res = residue_closed_form(ctx, p)
            entry["residue"] = str(res.real)
        entries.append(entry)
    rows = [(e["k"], e["m"], e["re"], e["im"], e.get("residue", ""))
            for e in entries]
    _emit(entries, cfg.fmt, csv_rows=rows,
          csv_header=("k", "m", "re", "im", "residue"))
    return 0


# ---------------------------------------------------------------------------
# parser assembly and entry point
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="fibzeta",
                description="Fibonacci zeta continuation toolkit")
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=_Parser)

    def common(sp, with_tol=False):
        sp.add_argument("--precision", type=int, default=128,
                        help="working precision in bits (default 128)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        if with_tol:
            sp.add_argument("--tol", type=float, default=1e-20,
                            help="truncation tolerance (default 1e-20)")

    sp = sub.add_parser("field", help="print the field context")
    sp.add_argument("--D", type=int, required=True)
    common(sp)
    sp.set_defaults(fn=cmd_field)

    sp = sub.add_parser("table", help="print n, L_D(n), F_D(n)")
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--limit", type=int, default=20)
    common(sp)
    sp.set_defaults(fn=cmd_table)

    sp = sub.add_parser("zeta", help="evaluate Z_D at a point")
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--s", type=str, required=True,
                    help='complex point, e.g. "2" or "-1.3+0.5i"')
    sp.add_argument("--parity", choices=("odd", "even"), required=True)
    sp.add_argument("--method",
                    choices=("direct", "binomial", "spectral", "all"),
                    default="all")
    common(sp, with_tol=True)
    sp.set_defaults(fn=cmd_zeta)

    sp = sub.add_parser("verify", help="run verification suites")
    sp.add_argument("--suite", required=True,
                    choices=("identities", "pell", "classnumber",
                             "crosscheck", "all"))
    sp.add_argument("--D", type=str, default="",
                    help="comma-separated field list (default 2,5,13,29)")
    sp.add_argument("--limit", type=int, default=0,
                    help="bound for pell/classnumber sweeps")
    sp.add_argument("--samples", type=int, default=100,
                    help="samples per identity (default 100)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(sp, with_tol=True)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("poles", help="list lattice poles in a rectangle")
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--re", type=str, required=True, help='bounds "lo..hi"')
    sp.add_argument("--im", type=str, required=True, help='bounds "lo..hi"')
    common(sp)
    sp.set_defaults(fn=cmd_poles)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except UnsupportedFieldError as e:
        print(f"UNSUPPORTED: {e}", file=sys.stderr)
        return 2
    except (DomainError, NearPoleError, PoleError, NoConvergence) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
