"""
Command-line front end.

Exit codes: 0 property holds / all fixtures reproduced, 1 violation or tie
under `--tie=fail`, 2 invalid input.
"""
import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Any, Dict, List, Optional

from . import LogHandler, __version__
from .core import (
    ApportionmentError,
    Instance,
    TieError,
    TiePolicy,
    check_house,
    format_rational,
    parse_rational,
    quotas,
    read_instance,
)
from .divisor import SeatStep, apportion_divisor
from .fixtures import fixture_names, get_fixture, reproduce
from .properties import (
    SearchConfig,
    check_homogeneity,
    check_house_monotone,
    check_pc,
    check_proportional,
    check_quota,
    check_set_preservation,
    check_weak_proportionality,
    parse_method,
    search,
)
from .quotatone import QuotatoneStep

log = logging.getLogger(__name__)
PROPERTIES = [
    "pc",
    "quota",
    "monotone",
    "homogeneous",
    "weakprop",
    "proportional",
    "sets",
]


def setup_logging(level: Optional[str] = None):
    """`LogHandler` on the package logger; level from `--log-level` or `PROPCON_LOG`."""
    level = level or os.getenv("PROPCON_LOG", "WARNING")
    level = int(level) if str(level).isdigit() else level.upper()
    root = logging.getLogger("apportion")
    for hdl in [h for h in root.handlers if isinstance(h, LogHandler)]:
        root.removeHandler(hdl)
    root.addHandler(LogHandler())
    root.setLevel(level)


def _state(instance: Instance, i: int) -> int:
    return instance.order[i]


def trace_to_dict(instance: Instance, step) -> Dict[str, Any]:
    """One seat award; states as 0-based input indices"""
    def states(idx):
        return sorted(_state(instance, i) for i in idx)

    res = {"house": step.house, "winner": _state(instance, step.winner)}
    if isinstance(step, SeatStep):
        res["priority"] = str(step.priority)
    elif isinstance(step, QuotatoneStep):
        res.update(
            upper=states(step.upper),
            alpha_tilde=step.alpha_tilde,
            lower=states(step.lower),
            eligible=states(step.eligible),
        )
    res["tied"] = states(step.tied)
    return res


def _method_id(spec: str, shift: Fraction) -> str:
    """bare "shiftquota" takes the instance file's shift"""
    return f"shiftquota:{shift}" if spec == "shiftquota" else spec


def cmd_compute(args) -> int:
    instance, house, shift = read_instance(args.instance)
    house = check_house(args.house if args.house is not None else house)
    method = parse_method(_method_id(args.method, shift))
    policy = TiePolicy.parse(args.tie)
    cert = None
    if method.kind == "divisor":
        h, cert = apportion_divisor(
            instance, house, method.rule, policy, trace=args.trace
        )
    elif method.kind == "quotatone":
        h = method.resolved(instance, house, policy=policy, trace=args.trace)
    else:
        h = method(instance, house, policy)
    q_shift = 0
    if method.id.startswith("shiftquota:"):
        q_shift = parse_rational(method.id[11:])
    q = instance.to_input_order(quotas(instance, house, q_shift).values)
    res = {
        "method": method.id,
        "instance": instance.to_dict(),
        "quotas": [format_rational(x) for x in q],
        "apportionment": h.to_dict(instance),
    }
    if cert is not None:
        res["certificate"] = cert.to_dict()
    if args.trace and h.trace:
        res["trace"] = [trace_to_dict(instance, step) for step in h.trace]
    if args.json:
        print(json.dumps(res))
        return 0
    seats = res["apportionment"]["seats"]
    print(f"{method.id} H={house}")
    print(f"{'state':<12}{'population':>12}{'quota':>14}{'seats':>8}")
    names = instance.to_input_order([instance.name(i) for i in range(instance.count)])
    for j, v in enumerate(res["instance"]["populations"]):
        print(f"{names[j]:<12}{v:>12}{res['quotas'][j]:>14}{seats[j]:>8}")
    print(f"tie_flag: {str(h.tie_flag).lower()}")
    if cert is not None:
        print(
            f"certificate: lower={cert.lower} upper={cert.upper} witness={cert.witness}"
        )
    for step in res.get("trace", []):
        print(" ".join(f"{k}={v}" for k, v in step.items()))
    return 0


def cmd_check(args) -> int:
    instance, house, shift = read_instance(args.instance)
    house = check_house(args.house if args.house is not None else house)
    method = parse_method(_method_id(args.method, shift))
    policy = TiePolicy.parse(args.tie)
    prop = args.property
    res: Dict[str, Any] = {"method": method.id, "property": prop, "house": house}
    if prop == "pc":
        report = check_pc(method, instance, house, policy)
        ok = report.overall
        res["report"] = report.to_dict()
        if not args.json:
            print(f"{'lambda':>8}  {'expected':<32}{'actual':<32}pass")
            for verdict in report.verdicts:
                expected = instance.to_input_order(verdict.expected.seats)
                actual = instance.to_input_order(verdict.actual.seats)
                print(
                    f"{str(verdict.lam):>8}  {str(expected):<32}{str(actual):<32}"
                    f"{verdict.passed}"
                )
            if report.tie_involved:
                print("tie involved: verdict is advisory")
    else:
        if prop == "quota":
            check = check_quota(method, instance, house, policy)
        elif prop == "monotone":
            check = check_house_monotone(
                method, instance, args.house_max or house, policy
            )
        elif prop == "homogeneous":
            check = check_homogeneity(method, instance, house, args.multipliers, policy)
        elif prop == "weakprop":
            g = reduce(gcd, instance.populations)
            reduced = [v // g for v in instance.to_input_order(instance.populations)]
            check = check_weak_proportionality(method, reduced, policy)
        elif prop == "proportional":
            check = check_proportional(
                method, instance, house, args.multipliers, policy
            )
        else:
            check = check_set_preservation(method, instance, house, policy)
        ok = check.ok
        res["witness"] = None if check.witness is None else str(check.witness)
        if not args.json:
            print(f"{prop} {method.id}: {'holds' if ok else 'VIOLATED'}")
            if not ok:
                print(f"witness: {res['witness']}")
    res["ok"] = ok
    if args.json:
        print(json.dumps(res))
    log.info(f"{prop} {method.id} H={house}: {'holds' if ok else 'violated'}")
    return 0 if ok else 1


def cmd_search(args) -> int:
    max_lambda = None if args.max_lambda is None else parse_rational(args.max_lambda)
    config = SearchConfig(
        args.method,
        n_range=(args.min_states or args.states, args.states),
        population_bound=args.max_pop,
        house_range=(args.min_house, args.max_house),
        mode="exhaustive" if args.exhaustive else "random",
        seed=args.seed,
        trials=args.trials,
        stop_after=args.stop_after,
        max_lambda=max_lambda,
        jobs=args.jobs,
        policy=TiePolicy.parse(args.tie),
        progress=not args.json and sys.stderr.isatty(),
    )
    res = search(config)
    for report in res.violations:
        print(json.dumps({"violation": report.to_dict()}))
    if args.advisories:
        for report in res.advisories:
            print(json.dumps({"advisory": report.to_dict()}))
    summary = {
        "method": config.method,
        "mode": config.mode,
        "seed": config.seed,
        "checked": res.checked,
        "violations": len(res.violations),
        "advisories": len(res.advisories),
    }
    print(json.dumps({"summary": summary}))
    return 1 if res.violations else 0


def cmd_reproduce(args) -> int:
    names = fixture_names() if args.fixture == "all" else [args.fixture]
    policy = TiePolicy.parse(args.tie)
    rows = []
    for name in names:
        rows.extend(reproduce(get_fixture(name), policy))
    failed = [r for r in rows if not r.passed]
    if args.json:
        for r in rows:
            print(
                json.dumps(
                    {
                        "fixture": r.fixture,
                        "method": r.method,
                        "house": r.house,
                        "check": r.check,
                        "expected": list(r.expected),
                        "actual": list(r.actual),
                        "pass": r.passed,
                    }
                )
            )
    else:
        width = max(len(r.method) for r in rows) + 2
        for r in rows:
            status = "PASS" if r.passed else "FAIL"
            line = f"{status}  {r.fixture:<9}{r.method:<{width}}"
            line += f"H={r.house:<5}{r.check}"
            if not r.passed:
                line += f"  expected {list(r.expected)} actual {list(r.actual)}"
            print(line)
    log.info(f"{len(rows) - len(failed)}/{len(rows)} fixture checks reproduced")
    return 1 if failed else 0


def get_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--trace", action="store_true", help="per-seat log")
    common.add_argument(
        "--tie",
        default=os.getenv("PROPCON_TIE", TiePolicy.LARGER.value),
        help="larger | index | fail (default: PROPCON_TIE or larger)",
    )
    common.add_argument("--log-level", help="default: PROPCON_LOG or WARNING")

    parser = argparse.ArgumentParser(
        prog="propcon", description=__doc__.split("\n\n")[0]
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", parents=[common], help="apportion one instance")
    compute.add_argument("instance", help="JSON instance file")
    compute.add_argument("method", help="method id, e.g. webster, nis, quotatone:hill")
    compute.add_argument("--house", type=int, help="overrides the file's house")
    compute.set_defaults(func=cmd_compute)

    check = sub.add_parser("check", parents=[common], help="audit one property")
    check.add_argument("instance")
    check.add_argument("method")
    check.add_argument("property", choices=PROPERTIES)
    check.add_argument("--house", type=int)
    check.add_argument("--house-max", type=int, help="upper house for monotone")
    check.add_argument("--multipliers", type=int, nargs="+", default=[2, 3, 10])
    check.set_defaults(func=cmd_check)

    srch = sub.add_parser("search", parents=[common], help="look for PC violations")
    srch.add_argument("method")
    srch.add_argument("--states", type=int, default=5)
    srch.add_argument("--min-states", type=int, help="default: --states")
    srch.add_argument("--max-pop", type=int, default=10 ** 6)
    srch.add_argument("--min-house", type=int, default=1)
    srch.add_argument("--max-house", type=int, default=120)
    srch.add_argument("--seed", type=int, default=0)
    srch.add_argument("--trials", type=int, default=10000)
    srch.add_argument(
        "--exhaustive", action="store_true", help="sorted population lattice"
    )
    srch.add_argument("--stop-after", type=int)
    srch.add_argument("--max-lambda", help="only check lambda <= p/q")
    srch.add_argument("--jobs", type=int, help="worker processes (0: all CPUs)")
    srch.add_argument(
        "--advisories", action="store_true", help="also print tie-affected"
    )
    srch.set_defaults(func=cmd_search)

    repro = sub.add_parser("reproduce", parents=[common], help="named numeric cases")
    repro.add_argument(
        "fixture",
        nargs="?",
        default="all",
        choices=fixture_names(aliases=True) + ["all"],
    )
    repro.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = get_parser().parse_args(argv)
    try:
        setup_logging(args.log_level)
        return args.func(args)
    except TieError as exc:
        print(json.dumps({"tie": {"house": exc.house, "states": list(exc.states)}}))
        print(f"propcon: {exc}", file=sys.stderr)
        return 1
    except (ApportionmentError, OSError, ValueError) as exc:
        print(f"propcon: {exc}", file=sys.stderr)
        return 2
