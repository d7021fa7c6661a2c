"""Command line entry point ``qbisect``.

Exit codes: 0 success, 1 a property or certificate check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import scalar as sc
from .harness import (SAMPLE_KINDS, SUITES, FanConfig, Scenario, ScenarioError, canonical_json,
                      fan_report, running_example, run, sample, thread_count)
from .model import BallPoint, GeometryError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario JSON file (schema qbisect/scenario/v1)")
    p.add_argument("--seed", type=int, help="64-bit seed")
    p.add_argument("--n", type=int, help="quaternionic dimension, 1..8")
    p.add_argument("--backend", choices=sc.BACKENDS)
    p.add_argument("--tolerance", type=float, help="relative tolerance of the float backend")


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: not valid JSON: {exc}") from exc


def _parse_trials(items) -> dict:
    out: dict = {}
    for item in items or ():
        key, _, value = item.partition("=")
        suite, _, kind = key.partition(".")
        if not kind or not value:
            raise UsageError(f"--trials expects suite.kind=N, got {item!r}")
        try:
            out.setdefault(suite, {})[kind] = int(value)
        except ValueError as exc:
            raise UsageError(f"--trials {item!r}: count is not an integer") from exc
    return out


def build_scenario(args) -> Scenario:
    """Config file first, then command-line overrides; validated against the schema."""
    data = _read_json(args.config) if args.config else {}
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    for key in ("seed", "n", "backend", "tolerance"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "suites", None):
        data["suites"] = [x for x in args.suites.split(",") if x]
    trials = _parse_trials(getattr(args, "trials", None))
    if trials:
        merged = {k: dict(v) for k, v in data.get("trials", {}).items()}
        for suite, counts in trials.items():
            merged.setdefault(suite, {}).update(counts)
        data["trials"] = merged
    if getattr(args, "negative_control", False):
        data["negative_control"] = True
    return Scenario.from_json(data)


def _emit(doc, out: str | None, pretty: bool = True) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) if pretty else canonical_json(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# -- subcommands ------------------------------------------------------------------

def cmd_run(args) -> int:
    s = build_scenario(args)
    threads = thread_count() if args.threads is None else max(1, args.threads)
    report = run(s, threads=threads)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    if args.out:
        _emit(report.to_json(timing=args.timing), args.out, pretty=False)
    elif args.json:
        _emit(report.to_json(timing=args.timing), None)
    return report.exit_code


def cmd_sample(args) -> int:
    s = build_scenario(args)
    doc = sample(s, args.what, args.count)
    _emit(doc, args.out)
    return EXIT_OK if all(p["member"] for p in doc["points"]) else EXIT_FAIL


def cmd_certify(args) -> int:
    from .certificate import CertificateError, certify, dumps
    s = build_scenario(args)
    try:
        cert = certify(s)
    except CertificateError as exc:
        raise UsageError(str(exc)) from exc
    text = dumps(cert)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"certificate: {len(cert['body']['entries'])} entries, sha256 {cert['digest']}",
          file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    from .certificate import check
    try:
        with open(args.certificate, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.certificate}: {exc.strerror}") from exc
    result = check(data)
    if result.ok:
        print(f"ACCEPT  {result.checked} entries verified")
        return EXIT_OK
    print("REJECT")
    for e in result.errors[:20]:
        print(f"  {e}")
    return EXIT_FAIL


def cmd_demo(args) -> int:
    from .bisector import hermitian_triple, pythagoras
    from .fan import blade_containing, blade_in_bisector
    from .model import ball, delta
    from .quaternion import J, K
    B = running_example()
    j2 = sc.exact("1/2")
    print("bisector   B(ball(1/2, 0), ball(-1/2, 0)) in dimension 2, exact backend")
    o = B.center()
    print(f"center     {o.to_ball().to_json()}  on real spine: {B.real_spine_contains(o)}")
    p = ball(J * j2, K * j2)
    r = ball(j2, sc.exact(0))
    s = B.project_to_spine(p)
    print(f"p          {p.to_ball().to_json()}  on bisector: {B.contains(p)}")
    print(f"Pi(p)      {s.to_ball().to_json()}")
    print(f"<P,S,R>    {hermitian_triple(p, s, r)}")
    lhs, rhs = pythagoras(p, r, B)
    print(f"delta(p,r) {lhs}  = delta(p,Pi p) delta(Pi p,r): {lhs == rhs}")
    N = blade_containing(B, o, p)
    print(f"blade      through o and p: {N.contains(o) and N.contains(p)}, "
          f"inside B: {blade_in_bisector(N, B)}")
    print(f"delta(p1,p2) {delta(B.p1, B.p2)}")
    return EXIT_OK


def _ball_arg(text: str, n: int | None, backend: str, flag: str):
    try:
        data = json.loads(text)
        b = BallPoint.from_json(data, backend)
    except (ValueError, ArithmeticError, TypeError) as exc:
        raise UsageError(f"{flag}: expected a JSON list of quaternions [[a,b,c,d], ...]: {exc}")
    if n is not None and len(b.w) != n:
        raise UsageError(f"{flag}: expected {n} coordinates, got {len(b.w)}")
    return data


def cmd_bisector(args) -> int:
    backend = args.backend or sc.EXACT
    p1 = _ball_arg(args.p1, None, backend, "--p1")
    p2 = _ball_arg(args.p2, len(p1), backend, "--p2")
    s = Scenario.from_json({"n": len(p1), "backend": backend, "seed": args.seed or 1,
                            "bisector": {"p1": p1, "p2": p2},
                            **({"tolerance": args.tolerance} if args.tolerance else {})})
    doc = sample(s, "bisector" if args.emit == "samples" else args.emit, args.count)
    _emit(doc, args.out)
    return EXIT_OK if all(p["member"] for p in doc["points"]) else EXIT_FAIL


def cmd_fan(args) -> int:
    data = _read_json(args.config) if args.config else {}
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "fan config must be a JSON object")
    for key in ("seed", "n", "backend"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    cfg = FanConfig.from_json(data)
    tol = args.tolerance if args.tolerance else 1e-9
    with sc.tolerance_context(tol):
        doc = fan_report(cfg)
    _emit(doc, args.out)
    return EXIT_OK if doc["status"] == "PASS" else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qbisect", description="Bisector geometry in quaternionic hyperbolic space.")
    p.add_argument("--version", action="version", version=f"qbisect {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    r = sub.add_parser("run", help="run property suites and print a report")
    _scenario_args(r)
    r.add_argument("--suites", help=f"comma-separated subset of {','.join(SUITES)}")
    r.add_argument("--trials", action="append", metavar="SUITE.KIND=N", help="override a trial count")
    r.add_argument("--negative-control", action="store_true",
                   help="use a deliberately broken membership predicate")
    r.add_argument("--threads", type=int, help="worker processes (default: QBISECT_THREADS or CPUs)")
    r.add_argument("--out", help="write the canonical report JSON here")
    r.add_argument("--json", action="store_true", help="print the report JSON to stdout")
    r.add_argument("--timing", action="store_true", help="include wall times in the report JSON")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sample", help="emit a seeded point cloud")
    _scenario_args(s)
    s.add_argument("--what", choices=SAMPLE_KINDS, default="bisector")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("certify", help="write an exact certificate (exact backend only)")
    _scenario_args(c)
    c.add_argument("--trials", action="append", metavar="certify.KIND=N")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    k = sub.add_parser("check", help="re-verify a certificate file")
    k.add_argument("certificate")
    k.set_defaults(func=cmd_check)

    d = sub.add_parser("demo", help="walk through the two-dimensional running example")
    d.set_defaults(func=cmd_demo)

    b = sub.add_parser("bisector", help="spine, slice or sample points of B(p1, p2)")
    b.add_argument("--p1", required=True, help='ball coordinates, e.g. \'[["1/2","0","0","0"]]\'')
    b.add_argument("--p2", required=True)
    b.add_argument("--emit", choices=("spine", "slice", "samples"), default="samples")
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--seed", type=int)
    b.add_argument("--backend", choices=sc.BACKENDS)
    b.add_argument("--tolerance", type=float)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bisector)

    f = sub.add_parser("fan", help="enumerate blades of a fan decomposition")
    _scenario_args(f)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fan)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if getattr(args, "tolerance", None) is not None and not args.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"qbisect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"qbisect: invalid config: {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        # degenerate input such as p1 = p2
        print(f"qbisect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
