"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 not certified, 3 numerical failure.
A ``--config`` file holds ``key = value`` lines whose keys are long option
names (``max-deriv = 12``); command-line flags override it.  The worker
count for independent tasks comes from ``--threads`` or SUPERPOSITIVITY_THREADS.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

SCHEMA = "superpositivity.report/1"
EXIT_OK, EXIT_USAGE, EXIT_NOT_CERTIFIED, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "SUPERPOSITIVITY_THREADS"

# bounds the computed constants are compared against
PUBLISHED_BOUNDS = {"n0": 0.3613, "n1": 0.19441, "n2": 0.03891, "n3": 0.00989,
                "sum_4_13": 0.00439, "tail": 0.01212, "total": 0.63}
PROPORTION_FLOOR = 0.27


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _threads(args) -> int:
    if args.threads:
        return max(1, int(args.threads))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _emit(args, payload, csv_rows=None, text=None):
    fmt = args.format
    if fmt == "json":
        body = json.dumps(_jsonable({"schema": SCHEMA, "command": args.command, **payload}), indent=2)
    elif fmt == "csv":
        if csv_rows is None:
            raise UsageError(f"--format csv is not available for {args.command}")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(csv_rows)
        body = buf.getvalue().rstrip("\n")
    else:
        body = text if text is not None else json.dumps(_jsonable(payload), indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(body + "\n")
    else:
        print(body)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eigenform(args) -> int:
    from .eigenforms import CSV_COLUMNS, hecke_basis, to_csv

    forms = hecke_basis(args.weight, max(args.num_coeffs + 1, 64))
    if args.index is not None:
        forms = [f for f in forms if f.index == args.index]
        if not forms:
            raise UsageError(f"weight {args.weight} has no form {args.index}")
    if args.format == "csv":
        text = to_csv(forms, args.num_coeffs).rstrip("\n")
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return EXIT_OK
    payload = {"weight": args.weight, "columns": list(CSV_COLUMNS), "forms": [
        {"label": f.label, "epsilon": f.epsilon, "omega": f.omega,
         "lambda": f.lam[1:args.num_coeffs + 1]} for f in forms]}
    _emit(args, payload)
    return EXIT_OK


def cmd_certify(args) -> int:
    from .certify import certify_triangle, superpositivity_report
    from .eigenforms import hecke_basis

    forms = hecke_basis(args.weight, 64)
    if args.index is not None:
        forms = [f for f in forms if f.index == args.index]

    def one(f):
        t0 = time.perf_counter()
        cert = certify_triangle(f, rho=args.rho)
        report = superpositivity_report(f, max_order=args.max_deriv) if cert.verdict == "certified" else None
        return {"certificate": cert.to_dict(), "report": report, "seconds": time.perf_counter() - t0}

    with ThreadPoolExecutor(_threads(args)) as pool:
        results = list(pool.map(one, forms))
    verdicts = [r["certificate"]["verdict"] for r in results]
    if "failed" in verdicts:
        code = EXIT_NUMERIC
    elif "not-certified" in verdicts:
        code = EXIT_NOT_CERTIFIED
    else:
        code = EXIT_OK
    overall = "certified" if code == EXIT_OK else ("failed" if code == EXIT_NUMERIC else "not-certified")
    text = "\n".join(f"{r['certificate']['form']:>6}  {r['certificate']['verdict']:<14} "
                     f"order={r['certificate']['central_order']}  {r['certificate']['reason']}"
                     for r in results)
    _emit(args, {"weight": args.weight, "verdict": overall, "forms": results}, text=text)
    return code


def _table(rows, header):
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    line = lambda r: "  ".join(str(c).rjust(w) for c, w in zip(r, widths))
    return "\n".join([line(header)] + [line(r) for r in rows])


def cmd_identities(args) -> int:
    from . import identities as ids
    from .certify import SelbergBox, polynomial_from_zeros, selberg_identity_check

    check = args.check
    rows = []
    if check == "petersson":
        header = ["k", "m", "n", "lhs", "rhs", "residual"]
        for k in args.weights:
            for m in range(1, args.max_mn + 1):
                for n in range(m, args.max_mn + 1):
                    r = ids.petersson_check(k, m, n)
                    rows.append([k, m, n, f"{r.lhs:.15g}", f"{r.rhs:.15g}", f"{r.residual:.3e}"])
        ok = all(float(r[-1]) < 1e-8 for r in rows)
    elif check == "bessel-avg":
        header = ["K", "x", "lhs", "rhs", "error", "scaled_error"]
        for K in args.K_values:
            r = ids.bessel_average_check(K, args.ratio * K)
            rows.append([K, r.x, f"{r.lhs:.12g}", f"{r.rhs:.12g}", f"{r.error:.3e}", f"{r.scaled_error:.3f}"])
        slope = ids.bessel_average_slope(args.ratio, tuple(args.K_values)) if len(args.K_values) > 1 else None
        if slope is not None:
            rows.append(["slope", "", "", "", "", f"{slope:.3f}"])
        ok = slope is None or abs(slope + 2) <= 0.3
    elif check == "voronoi":
        header = ["t", "a", "c", "lhs", "rhs", "residual", "dual_terms"]
        r = ids.voronoi_check(args.t, args.a, args.c)
        rows.append([args.t, args.a, args.c, f"{r.lhs:.12g}", f"{r.rhs:.12g}", f"{r.residual:.3e}", r.dual_terms])
        ok = r.residual < 1e-7
    elif check == "dirichlet":
        header = ["ell", "s", "value", "closed_form", "residual", "tail_bound"]
        for ell in [None] + list(args.ells):
            r = ids.dirichlet_identity_check(ell, args.s)
            rows.append([ell if ell is not None else "phi", args.s, f"{r.value:.12g}",
                         f"{r.closed_form:.12g}", f"{r.residual:.3e}", f"{r.tail_bound:.3e}"])
        ok = all(float(r[4]) <= float(r[5]) for r in rows)
    elif check == "selberg":
        header = ["trial", "zeros_in_box", "residual"]
        rng = np.random.default_rng(args.seed)
        box = SelbergBox(0.55, 2.0, 0.4)
        for i in range(args.trials):
            zeros = list(rng.uniform(0.3, 1.9, 3) + 1j * rng.uniform(-0.9, 0.9, 3))
            res = selberg_identity_check(polynomial_from_zeros(zeros), zeros, box)
            rows.append([i, sum(box.contains(z) for z in zeros), f"{res:.3e}"])
        ok = all(float(r[-1]) < 1e-8 for r in rows)
    else:
        raise UsageError(f"unknown check {check}")
    payload = {"check": check, "header": header, "rows": rows, "pass": ok}
    _emit(args, payload, csv_rows=[header] + rows, text=_table(rows, header) + f"\npass: {ok}")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_moments(args) -> int:
    from .mollifier import twisted_moment_lhs, twisted_moment_main

    if not args.twisted:
        raise UsageError("only --twisted is implemented")
    main = twisted_moment_main(args.ell, args.delta, args.t, args.K)
    lhs = twisted_moment_lhs(args.ell, args.delta, args.t, args.K)
    payload = {"ell": args.ell, "delta": args.delta, "t": args.t, "K": args.K,
               "lhs": lhs.value, "weights": lhs.weights, "forms": lhs.forms,
               "main_terms": {"term1": main.term1, "term2": main.term2, "term3": main.term3,
                              "total": main.total, "merged": main.merged},
               "ratio": lhs.value / main.total}
    _emit(args, payload, text=f"lhs={lhs.value:.12g} main={main.total:.12g} ratio={payload['ratio']:.6f}")
    return EXIT_OK


def _entry(value, err, bound, upper=True):
    ok = value <= bound if upper else value >= bound
    return {"value": value, "error_estimate": err, "paper_bound": bound, "pass": bool(ok)}


def cmd_constants(args) -> int:
    from . import constants as C

    which = args.which
    out = {}
    if which == "n0":
        r = C.n0_bound(tol=args.tol)
        out["n0"] = _entry(r.value, r.error_budget, PUBLISHED_BOUNDS["n0"])
    elif which == "nj":
        js = args.j or [1, 2, 3]
        with ThreadPoolExecutor(_threads(args)) as pool:
            res = dict(zip(js, pool.map(lambda j: C.nj_bound(j, tol=args.tol), js)))
        for j, r in res.items():
            out[f"n{j}"] = _entry(r.value, r.error_budget, PUBLISHED_BOUNDS.get(f"n{j}", math.inf))
    elif which == "tail":
        out["tail"] = _entry(C.closed_tail(), 0.0, PUBLISHED_BOUNDS["tail"])
    elif which == "total":
        rep = C.tail_and_total(tol=args.tol)
        out["n0"] = _entry(rep.n0, rep.error_budget, PUBLISHED_BOUNDS["n0"])
        for j in (1, 2, 3):
            out[f"n{j}"] = _entry(rep.nj[j], rep.error_budget, PUBLISHED_BOUNDS[f"n{j}"])
        out["sum_4_13"] = _entry(rep.sum_4_13, rep.error_budget, PUBLISHED_BOUNDS["sum_4_13"])
        out["tail"] = _entry(rep.tail, 0.0, PUBLISHED_BOUNDS["tail"])
        out["total"] = _entry(rep.total, rep.error_budget, PUBLISHED_BOUNDS["total"])
        out["proportion"] = _entry(rep.proportion, rep.error_budget, PROPORTION_FLOOR, upper=False)
        out["hough_term"] = {"value": 0.0, "asymptotic": True}
    elif which == "lemma-vl":
        scan = C.lemma_vl_scan(grid=C.wedge_grid(args.grid))
        out["lemma_vl"] = {"value": scan.worst_slack, "error_estimate": 0.0, "paper_bound": 0.0,
                           "pass": scan.worst_slack > 0, "worst_point": scan.worst_point,
                           "slacks": scan.slacks}
    else:
        raise UsageError(f"unknown --which {which}")
    rows = [["name", "value", "error_estimate", "paper_bound", "pass"]]
    rows += [[k, v.get("value"), v.get("error_estimate", ""), v.get("paper_bound", ""), v.get("pass", "")]
             for k, v in out.items()]
    _emit(args, {"which": which, "tol": args.tol, "constants": out}, csv_rows=rows,
          text=_table([[str(c) for c in r] for r in rows[1:]], rows[0]))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_checks

    checks = run_checks(quick=args.quick)
    rows = [[c.name, f"{c.residual:.3e}", f"{c.threshold:.1e}", "ok" if c.passed else "FAIL"] for c in checks]
    ok = all(c.passed for c in checks)
    _emit(args, {"checks": [{"name": c.name, "residual": c.residual, "threshold": c.threshold,
                             "pass": c.passed} for c in checks], "pass": ok},
          csv_rows=[["name", "residual", "threshold", "status"]] + rows,
          text=_table(rows, ["check", "residual", "threshold", "status"]))
    return EXIT_OK if ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def _ints(text):
    return [int(x) for x in str(text).split(",") if x]


def _floats(text):
    return [float(x) for x in str(text).split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file of option defaults")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--tol", type=float, default=1e-10)

    p = _Parser(prog="superpositivity", description="Level-one Hecke L-functions: certificates, identities, constants.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    e = sub.add_parser("eigenform", parents=[common], help="Hecke eigenvalues of a weight")
    e.add_argument("--weight", type=int, required=True)
    e.add_argument("--num-coeffs", type=int, default=20)
    e.add_argument("--index", type=int, default=None)

    c = sub.add_parser("certify", parents=[common], help="zero-free triangle certificate")
    c.add_argument("--weight", type=int, required=True)
    c.add_argument("--max-deriv", type=int, default=12)
    c.add_argument("--rho", type=float, default=0.02)
    c.add_argument("--index", type=int, default=None)

    i = sub.add_parser("identities", parents=[common], help="numerical identity checks")
    i.add_argument("--check", required=True, choices=("petersson", "bessel-avg", "voronoi", "dirichlet", "selberg"))
    i.add_argument("--weights", type=_ints, default=[12, 16, 18])
    i.add_argument("--max-mn", type=int, default=4)
    i.add_argument("--K-values", type=_floats, default=[50, 100, 200, 400])
    i.add_argument("--ratio", type=float, default=1.6)
    i.add_argument("--t", type=float, default=0.5)
    i.add_argument("--a", type=int, default=1)
    i.add_argument("--c", type=int, default=3)
    i.add_argument("--s", type=float, default=1.0)
    i.add_argument("--ells", type=_ints, default=[1, 6, 12])
    i.add_argument("--trials", type=int, default=20)

    m = sub.add_parser("moments", parents=[common], help="twisted second moment against its main terms")
    m.add_argument("--twisted", action="store_true")
    m.add_argument("--ell", type=int, default=1)
    m.add_argument("--delta", type=float, default=0.01)
    m.add_argument("--t", type=float, default=0.0)
    m.add_argument("--K", type=float, default=30.0)

    k = sub.add_parser("constants", parents=[common], help="zero-density constants")
    k.add_argument("--which", required=True, choices=("n0", "nj", "tail", "total", "lemma-vl"))
    k.add_argument("--j", type=_ints, default=None)
    k.add_argument("--grid", type=int, default=40)

    s = sub.add_parser("selftest", parents=[common], help="invariant and identity suite")
    s.add_argument("--quick", action="store_true")
    return p


COMMANDS = {"eigenform": cmd_eigenform, "certify": cmd_certify, "identities": cmd_identities,
            "moments": cmd_moments, "constants": cmd_constants, "selftest": cmd_selftest}


def _apply_config(parser, argv):
    """Re-parse with defaults taken from --config (flags still win)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    path = pre.parse_known_args(argv)[0].config
    choices = parser._subparsers._group_actions[0].choices
    if not path or not argv or argv[0] not in choices:
        return parser.parse_args(argv)
    conf = read_config(path)
    sub = choices[argv[0]]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in conf.items():
        if key not in known:
            raise UsageError(f"unknown config key {key!r}")
        act = known[key]
        if act.type is not None:
            defaults[key] = act.type(value)
        elif act.const is True:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
        # a config value satisfies a required flag
        act.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if args.command == "eigenform" and args.format == "text":
            args.format = "json"
        if args.command == "identities" and "--format" not in (argv or sys.argv[1:]):
            args.format = "text" if args.output is None else args.format
        np.random.seed(args.seed)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
