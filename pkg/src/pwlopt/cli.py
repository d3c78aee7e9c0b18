"""Batch command-line front end: ``pwlopt <command> [options]``.

Exit status is 0 when every requested check passes, 1 when a check fails
and 2 when the input cannot be interpreted.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import oracle
from .approx import ApproxSpec, build_pwl_monotone, verify_ratio
from .exceptions import PwlOptError
from .fixed_charge import emit_model, to_fixed_charge
from .flp import FlpInstance, end_to_end, gen_flp_instance
from .mcf import McfInstance, gen_instance, rows_to_csv, run_instance
from .polyhedra import Polyhedron, as_float, bound_U, pieces_bound
from .suites import SUITES

log = logging.getLogger("pwlopt")


class BadInput(Exception):
    pass


def _load_json(text_or_path):
    """Inline JSON, ``@path`` or a plain path to a JSON file."""
    if text_or_path is None:
        raise BadInput("missing JSON input")
    src = text_or_path
    if src.startswith("@") or (not src.lstrip().startswith(("{", "[", '"')) and os.path.exists(src)):
        path = src[1:] if src.startswith("@") else src
        try:
            with open(path) as fh:
                src = fh.read()
        except OSError as exc:
            raise BadInput(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise BadInput(f"invalid JSON: {exc}") from exc


def _function(spec):
    if isinstance(spec, str):
        spec = {"kind": spec}
    return oracle.from_json(spec)


def _emit(args, payload, csv_text=None, lp_text=None):
    if args.format == "lp":
        if lp_text is None:
            raise BadInput(f"--format lp is not available for '{args.command}'")
        text = lp_text
    elif args.format == "csv":
        if csv_text is None:
            raise BadInput(f"--format csv is not available for '{args.command}'")
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_approx(args):
    src = args.function
    phi = _function(_load_json(src) if src.startswith(("{", "@")) or os.path.exists(src) else src)
    spec = ApproxSpec(args.epsilon, args.lower, args.upper, args.grid, args.mode)
    psi = build_pwl_monotone(phi, spec)
    rep = verify_ratio(phi, psi, (args.lower, args.upper), args.samples)
    if args.mode == "secant":
        ok = rep.max_ratio <= 1 + 1e-9 and rep.min_ratio >= 1 / spec.guarantee - 1e-9
    else:
        ok = rep.min_ratio >= 1 - 1e-9 and rep.max_ratio <= spec.guarantee + 1e-9
    payload = {"n_pieces": psi.n_pieces, "guarantee": spec.guarantee,
               "measured_max_ratio": rep.max_ratio, "measured_min_ratio": rep.min_ratio,
               "passed": ok, "function": psi.to_json()}
    rows = ["knot,slope,intercept"] + [f"{k!r},{p.slope!r},{p.intercept!r}"
                                       for k, p in zip(psi.knots, psi.pieces)]
    _emit(args, payload, csv_text="\n".join(rows) + "\n")
    log.info("approx: %d pieces, max ratio %.12f", psi.n_pieces, rep.max_ratio)
    return 0 if ok else 1


def cmd_bounds(args):
    P = Polyhedron.from_json(_load_json(args.polyhedron))
    rep = bound_U(P)
    payload = rep.to_json() | {"V_le_U": rep.V <= rep.U,
                               "pieces_bound": pieces_bound(args.epsilon, rep),
                               "epsilon": args.epsilon}
    _emit(args, payload)
    return 0


def _formulate(problem, epsilon):
    P = Polyhedron.from_json(problem["polyhedron"])
    costs = problem.get("costs") or problem.get("functions")
    if costs is None:
        raise BadInput("problem JSON needs 'costs'")
    rep = bound_U(P)
    lo, hi = problem.get("interval") or (as_float(rep.l), as_float(rep.u))
    spec = ApproxSpec(epsilon, float(lo), float(hi))
    psis = [build_pwl_monotone(_function(c), spec) for c in costs]
    return to_fixed_charge(P, psis, problem.get("B"))


def cmd_formulate(args):
    model = _formulate(_load_json(args.problem), args.epsilon)
    payload = {"model": model.to_json(), "binaries": model.n_binaries, "counts": model.counts()}
    _emit(args, payload, lp_text=emit_model(model))
    return 0


def _mcf_job(job):
    n, density, regime, seed, eps, merge = job
    _, row = run_instance(gen_instance(n, density, regime, seed), eps, merge)
    return row


def cmd_mcf(args):
    if args.instance:
        inst = McfInstance.from_json(_load_json(args.instance))
        rows = [run_instance(inst, args.epsilon, not args.no_merge)[1]]
    else:
        jobs = [(args.n, args.density, args.regime, args.seed + k, args.epsilon, not args.no_merge)
                for k in range(args.count)]
        rows = _map(_mcf_job, jobs, args.jobs)
    _emit(args, {"rows": rows}, csv_text=rows_to_csv(rows))
    return 0


def _flp_job(job):
    data, eps = job
    return end_to_end(FlpInstance.from_json(data), eps).to_json()


def cmd_flp(args):
    if args.instance:
        insts = [FlpInstance.from_json(_load_json(args.instance))]
    else:
        insts = [gen_flp_instance(args.customers, args.facilities, args.seed + k)
                 for k in range(args.count)]
    results = _map(_flp_job, [(inst.to_json(), args.epsilon) for inst in insts], args.jobs)
    ok = all(r.get("certified") is not False for r in results)
    payload = results[0] if len(results) == 1 else {"results": results}
    _emit(args, payload)
    return 0 if ok else 1


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    report = {}
    for name in names:
        checks = SUITES[name]()
        report[name] = {"passed": all(c.passed for c in checks),
                        "checks": [c.to_json() for c in checks]}
    ok = all(r["passed"] for r in report.values())
    if args.format == "json":
        _emit(args, report)
    else:
        lines = ["suite,check,passed,detail"]
        for name, r in report.items():
            lines += [f"{name},{c['name']},{c['passed']},\"{c['detail']}\"" for c in r["checks"]]
        _emit(args, None, csv_text="\n".join(lines) + "\n")
    for name, r in report.items():
        n_ok = sum(c["passed"] for c in r["checks"])
        print(f"{name}: {n_ok}/{len(r['checks'])} {'PASS' if r['passed'] else 'FAIL'}",
              file=sys.stderr)
    return 0 if ok else 1


def _map(fn, jobs, workers):
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _positive(kind):
    def parse(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _common(fmt="json"):
    # a fresh parent per subcommand: parents share action objects, so defaults would leak
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=_positive(float), default=0.01)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for batches")
    common.add_argument("--format", choices=("json", "csv", "lp"), default=fmt)
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    return common


def build_parser():
    parser = argparse.ArgumentParser(prog="pwlopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", parents=[_common()], help="approximate one concave function")
    p.add_argument("function", help="kind name (sqrt, log1p), inline JSON spec or @file")
    p.add_argument("--lower", type=_positive(float), default=1.0)
    p.add_argument("--upper", type=_positive(float), default=1000.0)
    p.add_argument("--grid", choices=("sharp", "plain"), default="sharp")
    p.add_argument("--mode", choices=("tangent", "secant"), default="tangent")
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(run=cmd_approx)

    p = sub.add_parser("bounds", parents=[_common()], help="bit sizes and bounds of a polyhedron")
    p.add_argument("polyhedron", help="polyhedron JSON, inline or file")
    p.set_defaults(run=cmd_bounds)

    p = sub.add_parser("formulate", parents=[_common("lp")], help="emit the fixed-charge model")
    p.add_argument("problem", help="JSON with 'polyhedron' and 'costs'")
    p.set_defaults(run=cmd_formulate)

    p = sub.add_parser("mcf", parents=[_common("csv")], help="concave-cost multicommodity flow runs")
    p.add_argument("--instance", help="instance JSON instead of generating")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--density", choices=("sparse", "dense"), default="sparse")
    p.add_argument("--regime", choices=("moderate", "strong"), default="moderate")
    p.add_argument("--count", type=int, default=1, help="consecutive seeds to run")
    p.add_argument("--no-merge", action="store_true", help="keep the geometric grid only")
    p.set_defaults(run=cmd_mcf)

    p = sub.add_parser("flp", parents=[_common()], help="concave-cost facility location")
    p.add_argument("--instance", help="instance JSON instead of generating")
    p.add_argument("--customers", type=int, default=6)
    p.add_argument("--facilities", type=int, default=3)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(run=cmd_flp)

    p = sub.add_parser("verify", parents=[_common()], help="run a named self-check suite")
    p.add_argument("suite", choices=(*SUITES, "all"))
    p.set_defaults(run=cmd_verify)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    level = os.environ.get("PWLOPT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (BadInput, PwlOptError, KeyError, TypeError, ValueError) as exc:
        print(f"pwlopt {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
