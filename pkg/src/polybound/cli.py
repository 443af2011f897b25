"""Command line entry point: ``polybound <subcommand> ...``.

Exit codes: 0 all checks passed, 2 a mathematical check failed, 1 usage or
input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .certificate import (
    load_certificate,
    parse_rational,
    render_certificate,
    sandwich_check,
    to_decimal,
    verify,
)
from .errors import BracketError, CertificationFailed, PolyboundError
from .oracle import check_domination, check_lemma, count_fixed, enumerate_polyominoes, load_masks, typed_counts
from .search import SearchConfig, search
from .sequences import evaluate, partial_sum, ratio_report
from .system import BUILTIN_NAMES, load_system

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

log = logging.getLogger("polybound")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Run:
    """Collects output lines and the manifest for one invocation."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.lines: list[str] = []
        self.started = time.perf_counter()

    def digest(self, path):
        if path and os.path.isfile(path):
            with open(path, "rb") as fh:
                self.inputs[path] = hashlib.sha256(fh.read()).hexdigest()

    def out(self, line=""):
        self.lines.append(line)

    def manifest(self):
        config = {k: v for k, v in sorted(vars(self.args).items()) if k != "func"}
        return {
            "subcommand": self.args.command,
            "config": config,
            "inputs": self.inputs,
            "version": __version__,
            "wall_time_s": round(time.perf_counter() - self.started, 6),
        }

    def finish(self, result, code):
        if self.args.json:
            doc = {"ok": code == EXIT_OK, "result": result, "manifest": self.manifest()}
            print(json.dumps(doc, indent=2, default=str))
        else:
            for line in self.lines:
                print(line)
            print(json.dumps({"manifest": self.manifest()}, default=str), file=sys.stderr)
        return code


def _system(run, name):
    if name.upper() not in BUILTIN_NAMES:
        run.digest(name)
    return load_system(name)


def _point(text):
    x = parse_rational(text, "point")
    if x <= 0:
        raise PolyboundError("point must be positive")
    return x


# ---------------------------------------------------------------------------
# subcommands


def cmd_evaluate(run, args):
    system = _system(run, args.system)
    table = evaluate(system, args.horizon)
    names = [args.var] if args.var else list(system.variables)
    for v in names:
        if v not in system.variables:
            raise PolyboundError(f"unknown variable {v!r}")
    result = {"system": system.name, "horizon": args.horizon,
              "values": {v: [str(c) for c in table.column(v)] for v in names}}
    if args.format == "csv":
        run.out(",".join(["n", *names]))
        for n in range(1, args.horizon + 1):
            run.out(",".join([str(n), *(str(table[v, n]) for v in names)]))
    else:
        run.out(f"system {system.name}, horizon {args.horizon}")
        run.out("\t".join(["n", *names]))
        for n in range(1, args.horizon + 1):
            run.out("\t".join([str(n), *(str(table[v, n]) for v in names)]))
    if args.point:
        x = _point(args.point)
        sums = {v: partial_sum(table, v, x, args.horizon) for v in names}
        result["point"] = str(x)
        result["partial_sums"] = {v: str(s) for v, s in sums.items()}
        if args.format != "csv":
            run.out(f"partial sums at x = {x} up to n = {args.horizon}")
            for v, s in sums.items():
                run.out(f"  {v}: {to_decimal(s)}  ({s})")
    if args.ratios and args.format != "csv":
        var = args.var or system.root
        rows = ratio_report(table, var)
        result["ratios"] = [[n, str(r)] for n, r in rows]
        run.out(f"ratios {var}(n+1)/{var}(n)")
        for n, r in rows:
            run.out(f"  {n}\t{to_decimal(r)}")
    return result, EXIT_OK


def cmd_verify(run, args):
    system = _system(run, args.system)
    run.digest(args.certificate)
    cert = load_certificate(args.certificate)
    if cert.system != system.name:
        log.warning("certificate names system %r, checking it against %r", cert.system, system.name)
    report = verify(system, cert)
    run.out(f"system {system.name}: x = {cert.x}, bound = {cert.bound} = {to_decimal(cert.bound)}")
    for c in report.checks:
        mark = "ok  " if c.passed and c.floor_passed else "FAIL"
        floor = "" if c.floor_passed else f"  (below floor {c.floor})"
        run.out(f"  {mark} {c.var}: slack {to_decimal(c.slack)} = {c.slack}{floor}")
    run.out("PASS" if report.passed else f"FAIL ({len(report.failures)} inequalities)")
    return report.as_dict(), EXIT_OK if report.passed else EXIT_FAIL


def cmd_iterate(run, args):
    system = _system(run, args.system)
    cert = None
    if args.certificate:
        run.digest(args.certificate)
        cert = load_certificate(args.certificate)
    x = _point(args.point) if args.point else (cert.x if cert else None)
    if x is None:
        raise PolyboundError("iterate needs --point or --certificate")
    report = sandwich_check(system, x, cert, args.steps)
    run.out(f"system {system.name}: sandwich check at x = {x} over {args.steps} steps")
    if report.unbounded:
        run.out("  iteration unbounded (exceeded divergence threshold)")
    first = {}
    for v in report.violations:
        first.setdefault((v.kind, v.var), v.step)
    for (kind, var), step in first.items():
        run.out(f"  {kind}: {var} from step {step}")
    run.out(f"status: {report.status}")
    return report.as_dict(), EXIT_OK if report.passed else EXIT_FAIL


def cmd_search(run, args):
    system = _system(run, args.system)
    cfg = SearchConfig(lower=args.lower, upper=args.upper, tol=args.tol, denominator_bound=args.denbound)
    try:
        res = search(system, cfg)
    except (BracketError, CertificationFailed) as exc:
        run.out(f"FAIL: {exc}")
        return {"error": str(exc)}, EXIT_FAIL
    text = render_certificate(res.certificate, system.variables)
    if args.emit_certificate:
        with open(args.emit_certificate, "w", encoding="utf-8") as fh:
            fh.write(text)
    run.out(f"system {system.name}: certified bound {res.bound} = {to_decimal(res.bound)}")
    run.out(f"  probes: {len(res.log)}, largest diverged {res.largest_diverged}, attempts {res.attempts}")
    if not args.emit_certificate:
        run.out(text.rstrip())
    return {
        "bound": str(res.bound),
        "bound_decimal": to_decimal(res.bound),
        "certificate": text,
        "probes": [[p.bound, p.converged, p.iterations] for p in res.log],
    }, EXIT_OK


def cmd_enumerate(run, args):
    if args.counts_only:
        counts = count_fixed(args.max)
    else:
        counts = [0] * args.max
        for p in enumerate_polyominoes(args.max):
            counts[len(p) - 1] += 1
            run.out(f"{len(p)}: " + " ".join(f"({x},{y})" for x, y in sorted(p.cells, key=lambda c: (c[1], c[0]))))
    for n, c in enumerate(counts, 1):
        run.out(f"A({n}) = {c}")
    return {"counts": counts}, EXIT_OK


def cmd_crosscheck(run, args):
    system = _system(run, args.system)
    run.digest(args.masks)
    masks = load_masks(args.masks)
    missing = [v for v in system.variables if v not in masks]
    if missing:
        raise PolyboundError(f"mask file has no type for {', '.join(missing)}")
    counts = typed_counts(args.max, [masks[v] for v in system.variables])
    lemma = check_lemma(system, args.max, masks, counts)
    dom = check_domination(system, args.max, masks, counts)
    run.out(f"system {system.name}: inequalities on true counts, 2 <= n <= {args.max}")
    for v in system.variables:
        bad = [e for e in lemma.violations if e.var == v]
        tag = "FAIL" if bad else "ok  "
        extra = " (equality)" if lemma.tight.get(v) and not bad else ""
        run.out(f"  {tag} {v}{extra}" + "".join(f"  n={e.n}: {e.lhs} > {e.rhs}" for e in bad))
    run.out(f"domination A(n) <= {system.root}_true(n) <= {system.root}_hat(n):")
    for n, a, t, h in dom.rows:
        run.out(f"  n={n}: {a} <= {t} <= {h}")
    for msg in dom.violations:
        run.out(f"  FAIL {msg}")
    ok = lemma.passed and dom.passed
    run.out("PASS" if ok else "FAIL")
    result = {
        "lemma": {"passed": lemma.passed, "violations": [vars(e) for e in lemma.violations]},
        "domination": {"passed": dom.passed, "rows": dom.rows, "violations": dom.violations},
        "counts": {k: list(v[1:]) for k, v in counts.counts.items()},
        "totals": list(counts.totals[1:]),
    }
    return result, EXIT_OK if ok else EXIT_FAIL


def build_parser():
    p = _Parser(prog="polybound", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        sp.set_defaults(func=func)
        return sp

    def system_arg(sp):
        sp.add_argument("--system", required=True, help="KR6, BS17, or a system file")

    sp = add("evaluate", cmd_evaluate, "tabulate hat sequences")
    system_arg(sp)
    sp.add_argument("--horizon", type=int, default=500)
    sp.add_argument("--var")
    sp.add_argument("--point", help="exact p/q for partial sums")
    sp.add_argument("--format", choices=["table", "csv"], default="table")
    sp.add_argument("--ratios", action="store_true", help="consecutive ratio report")

    sp = add("verify", cmd_verify, "check a certificate exactly")
    system_arg(sp)
    sp.add_argument("--certificate", required=True)

    sp = add("iterate", cmd_iterate, "monotone iteration and sandwich check")
    system_arg(sp)
    sp.add_argument("--point")
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--certificate")

    sp = add("search", cmd_search, "bisect for the best certifiable bound")
    system_arg(sp)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--denbound", type=int, default=10_000)
    sp.add_argument("--lower", type=float, default=3.0)
    sp.add_argument("--upper", type=float, default=6.0)
    sp.add_argument("--emit-certificate")

    sp = add("enumerate", cmd_enumerate, "enumerate fixed polyominoes")
    sp.add_argument("--max", type=int, required=True)
    sp.add_argument("--counts-only", action="store_true")

    sp = add("crosscheck", cmd_crosscheck, "check inequalities on enumerated counts")
    system_arg(sp)
    sp.add_argument("--max", type=int, default=8)
    sp.add_argument("--masks", help="mask file (default: the shipped one)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version, or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    run = _Run(args)
    try:
        result, code = args.func(run, args)
    except (PolyboundError, KeyError, OSError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"polybound {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    return run.finish(result, code)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
