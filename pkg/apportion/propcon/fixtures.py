"""Named numeric cases and their reproduction"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .core import ApportionmentError, Instance, ScaleFactor, TiePolicy
from .properties import check_pc, parse_method
from .raw.fixtures import ALIASES, FIXTURES

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixtureCase:
    id: str
    instance: Instance
    methods: Tuple[str, ...]
    expected: Dict[int, Tuple[int, ...]]
    pc_failure: Optional[Tuple[int, ScaleFactor]] = None

    @property
    def houses(self) -> List[int]:
        return sorted(self.expected)


@dataclass(frozen=True)
class FixtureOutcome:
    """
    `check` is "seats" or "pc:<lambda>"; seat vectors are in input order.
    A "pc" row passes when F(v, lambda H) (actual) differs from lambda h
    (expected), i.e. the known failure is reproduced.
    """

    fixture: str
    method: str
    house: int
    check: str
    expected: Tuple[int, ...]
    actual: Tuple[int, ...]
    passed: bool


def get_fixture(name: str) -> FixtureCase:
    """`name` is a fixture id or one of its descriptive aliases"""
    name = ALIASES.get(name, name)
    try:
        raw = FIXTURES[name]
    except KeyError:
        raise ApportionmentError(
            f"unknown fixture {name!r}; one of {list(FIXTURES) + list(ALIASES)}"
        )
    pc_failure = raw.get("pc_failure")
    if pc_failure is not None:
        pc_failure = pc_failure[0], ScaleFactor.parse(pc_failure[1])
    return FixtureCase(
        name,
        Instance.create(raw["populations"]),
        tuple(raw["methods"]),
        {house: tuple(seats) for house, seats in raw["expected"].items()},
        pc_failure,
    )


def fixture_names(aliases: bool = False) -> List[str]:
    return list(FIXTURES) + (list(ALIASES) if aliases else [])


def reproduce(
    case: FixtureCase, policy: Optional[TiePolicy] = None
) -> List[FixtureOutcome]:
    """Every method at every listed house, then the expected PC failure."""
    res = []
    instance = case.instance
    for method_id in case.methods:
        method = parse_method(method_id)
        seq = method.sequence(instance, max(case.houses), policy)
        for house in case.houses:
            actual = tuple(instance.to_input_order(seq[house].seats))
            expected = case.expected[house]
            passed = expected == actual
            res.append(
                FixtureOutcome(
                    case.id, method_id, house, "seats", expected, actual, passed
                )
            )
        if case.pc_failure is None:
            continue
        house, lam = case.pc_failure
        report = check_pc(method, instance, house, policy)
        verdict = next((v for v in report.verdicts if v.lam == lam), None)
        if verdict is None:
            log.error(f"{case.id}: lambda={lam} is not admissible at H={house}")
            res.append(
                FixtureOutcome(case.id, method_id, house, f"pc:{lam}", (), (), False)
            )
            continue
        res.append(
            FixtureOutcome(
                case.id,
                method_id,
                house,
                f"pc:{lam}",
                tuple(instance.to_input_order(verdict.expected.seats)),
                tuple(instance.to_input_order(verdict.actual.seats)),
                not verdict.passed,
            )
        )
    return res
