"""
Axiom checkers over any apportionment method, and a randomized or
exhaustive search for proportional-consistency violations.

Method ids:
  divisor rules ("webster", "hill", "stationary:1/4", "table:...")
  "hamilton" | "shiftquota:p/q" | "lar" | "sml" | "lqe" | "suq" | "nie" | "nis"
  "priority:i1,...,in" | "quotatone:<rule>"
"""
import logging
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial, reduce
from itertools import combinations_with_replacement
from math import gcd
from multiprocessing import cpu_count, get_context
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from tqdm.auto import tqdm

from .core import (
    Apportionment,
    ApportionmentError,
    Instance,
    QuotaError,
    ScaleFactor,
    TieError,
    TiePolicy,
    admissible_lambdas,
    check_house,
    check_shift,
    parse_rational,
    quotas,
    scale_apportionment,
    tie_log_level,
)
from .divisor import SignpostRule, apportion_divisor, divisor_sequence, parse_rule
from .quota_methods import QUOTA_METHODS, priority_quota, shift_quota, upper_lower_sets
from .quotatone import quotatone_apportion, quotatone_sequence

log = logging.getLogger(__name__)


def _divisor(instance, house, policy=None, rule=None):
    return apportion_divisor(instance, house, rule, policy)[0]


@dataclass(frozen=True)
class MethodRef:
    """
    Args:
      id: method string, returned unchanged by `parse_method(id).id`
      resolved: callable (instance, house, policy=...) -> Apportionment
      rule: signpost rule of divisor and quotatone methods
    """

    id: str
    resolved: Callable[..., Apportionment] = field(compare=False, repr=False)
    kind: str = "quota"
    rule: Optional[SignpostRule] = field(default=None, compare=False, repr=False)

    def __call__(
        self, instance: Instance, house: int, policy: Optional[TiePolicy] = None
    ):
        return self.resolved(instance, house, policy=policy)

    def sequence(
        self, instance: Instance, house_max: int, policy: Optional[TiePolicy] = None
    ) -> List[Apportionment]:
        """Allocations for H = 0..house_max"""
        if self.kind == "divisor":
            return divisor_sequence(instance, house_max, self.rule, policy)
        if self.kind == "quotatone":
            return quotatone_sequence(instance, house_max, self.rule, policy)
        check_house(house_max)
        return [self(instance, house, policy) for house in range(house_max + 1)]

    def __str__(self):
        return self.id


def parse_method(spec: str) -> MethodRef:
    spec = spec.strip()
    if spec in QUOTA_METHODS:
        return MethodRef(spec, QUOTA_METHODS[spec])
    if spec.startswith("shiftquota:"):
        shift = check_shift(spec[11:])
        return MethodRef(spec, partial(shift_quota, shift=shift))
    if spec.startswith("priority:"):
        try:
            order = tuple(int(j) for j in spec[9:].split(","))
        except ValueError:
            raise ApportionmentError(f"bad priority order: {spec!r}")
        return MethodRef(spec, partial(priority_quota, order=order))
    if spec.startswith("quotatone:"):
        rule = parse_rule(spec[10:])
        func = partial(quotatone_apportion, rule=rule)
        return MethodRef(spec, func, "quotatone", rule)
    rule = parse_rule(spec)
    return MethodRef(spec, partial(_divisor, rule=rule), "divisor", rule)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: Any = None

    def __bool__(self):
        return self.ok


def check_quota(
    method: MethodRef,
    instance: Instance,
    house: int,
    policy: Optional[TiePolicy] = None,
) -> CheckResult:
    """h_i in {floor(q_i), ceil(q_i)} for every i; witness: the first offending state"""
    h = method(instance, house, policy)
    q = quotas(instance, house)
    for i, (lo, hi, k) in enumerate(zip(q.floors, q.ceilings, h.seats)):
        if not lo <= k <= hi:
            log.debug(f"{method}: state {i} has {k} seats outside [{lo}, {hi}]")
            return CheckResult(False, i)
    return CheckResult(True)


def check_house_monotone(
    method: MethodRef,
    instance: Instance,
    house_max: int,
    policy: Optional[TiePolicy] = None,
) -> CheckResult:
    """witness: (H, i) with state i losing a seat going from H-1 to H"""
    if house_max < 1:
        raise ApportionmentError(f"house_max must be positive: {house_max}")
    seq = method.sequence(instance, house_max, policy)
    for prev, cur in zip(seq, seq[1:]):
        for i, (a, b) in enumerate(zip(prev.seats, cur.seats)):
            if b < a:
                return CheckResult(False, (cur.house, i))
    return CheckResult(True)


def check_homogeneity(
    method: MethodRef,
    instance: Instance,
    house: int,
    multipliers: Sequence[int] = (2, 3, 10),
    policy: Optional[TiePolicy] = None,
) -> CheckResult:
    """witness: the first multiplier c with F(c v, H) != F(v, H)"""
    h = method(instance, house, policy)
    for c in multipliers:
        if method(instance.scaled(c), house, policy) != h:
            return CheckResult(False, c)
    return CheckResult(True)


def check_weak_proportionality(
    method: MethodRef, quota_vector: Sequence[int], policy: Optional[TiePolicy] = None
) -> CheckResult:
    """
    Uses v = quota_vector so the quotas at H = sum(v) are exactly the entries.
    Zero entries are left out of the instance and given zero seats.

    Returns:
      CheckResult with the computed seats (input order) as witness on failure
    """
    quota_vector = list(quota_vector)
    if sum(quota_vector) < 1 or any(k < 0 for k in quota_vector):
        raise ApportionmentError(
            f"need nonnegative quotas summing to >= 1: {quota_vector}"
        )
    positive = [j for j, k in enumerate(quota_vector) if k > 0]
    instance = Instance.create([quota_vector[j] for j in positive])
    h = method(instance, sum(quota_vector), policy)
    seats = [0] * len(quota_vector)
    for j, k in zip(positive, instance.to_input_order(h.seats)):
        seats[j] = k
    return CheckResult(True) if seats == quota_vector else CheckResult(False, seats)


@dataclass(frozen=True)
class PCVerdict:
    lam: ScaleFactor
    expected: Apportionment
    actual: Apportionment

    @property
    def passed(self) -> bool:
        return self.expected == self.actual

    def to_dict(self, instance: Optional[Instance] = None) -> Dict[str, Any]:
        return {
            "lambda": str(self.lam),
            "expected": self.expected.to_dict(instance),
            "actual": self.actual.to_dict(instance),
            "pass": self.passed,
        }

    @classmethod
    def from_dict(cls, dct, instance: Optional[Instance] = None):
        return cls(
            ScaleFactor.parse(dct["lambda"]),
            Apportionment.from_dict(dct["expected"], instance),
            Apportionment.from_dict(dct["actual"], instance),
        )


@dataclass(frozen=True)
class PCReport:
    """
    F(v, lambda H) against lambda h for every admissible lambda of h = F(v, H).
    Reports with `tie_involved` are advisory: F was set-valued somewhere.
    """

    method: str
    instance: Instance
    house: int
    base: Apportionment
    verdicts: Tuple[PCVerdict, ...]

    @property
    def overall(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def tie_involved(self) -> bool:
        return self.base.tie_flag or any(v.actual.tie_flag for v in self.verdicts)

    @property
    def failures(self) -> List[PCVerdict]:
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "instance": self.instance.to_dict(),
            "house": self.house,
            "base": self.base.to_dict(self.instance),
            "verdicts": [v.to_dict(self.instance) for v in self.verdicts],
            "overall": self.overall,
            "tie_involved": self.tie_involved,
        }

    @classmethod
    def from_dict(cls, dct):
        instance = Instance.from_dict(dct["instance"])
        return cls(
            dct["method"],
            instance,
            dct["house"],
            Apportionment.from_dict(dct["base"], instance),
            tuple(PCVerdict.from_dict(v, instance) for v in dct["verdicts"]),
        )


def check_pc(
    method: MethodRef,
    instance: Instance,
    house: int,
    policy: Optional[TiePolicy] = None,
    max_lambda: Optional[Fraction] = None,
) -> PCReport:
    """
    Args:
      max_lambda: only check admissible lambda <= max_lambda
    """
    if check_house(house) < 1:
        raise ApportionmentError("proportional consistency needs house >= 1")
    base = method(instance, house, policy)
    verdicts = []
    for lam in admissible_lambdas(base):
        if max_lambda is not None and lam.value > max_lambda:
            continue
        actual = method(instance, lam.scale(house), policy)
        verdict = PCVerdict(lam, scale_apportionment(base, lam), actual)
        status = "pass" if verdict.passed else "FAIL"
        log.debug(f"{method} H={house} lambda={lam}: {status}")
        verdicts.append(verdict)
    return PCReport(method.id, instance, house, base, tuple(verdicts))


def check_set_preservation(
    method: MethodRef,
    instance: Instance,
    house: int,
    policy: Optional[TiePolicy] = None,
) -> CheckResult:
    """
    For a quota-satisfying method: L and U at lambda H equal those at H for
    every admissible lambda. witness: the first lambda that moves a state,
    or the quota violation.
    """
    try:
        base = method(instance, house, policy)
        sets = upper_lower_sets(instance, house, base)
        for lam in admissible_lambdas(base):
            h = method(instance, lam.scale(house), policy)
            if upper_lower_sets(instance, lam.scale(house), h) != sets:
                return CheckResult(False, lam)
    except QuotaError as exc:
        return CheckResult(False, str(exc))
    return CheckResult(True)


def check_proportional(
    method: MethodRef,
    instance: Instance,
    house: int,
    multipliers: Sequence[int] = (2, 3, 10),
    policy: Optional[TiePolicy] = None,
    max_house: int = 1000,
) -> CheckResult:
    """
    Homogeneity, weak proportionality and proportional consistency together.
    Weak proportionality is checked at the smallest house making every quota
    an integer, when that house is at most `max_house`.

    Returns:
      CheckResult with witness (property name, detail) on failure
    """
    res = check_homogeneity(method, instance, house, multipliers, policy)
    if not res:
        return CheckResult(False, ("homogeneous", res.witness))
    g = reduce(gcd, instance.populations)
    integral = instance.total // g
    if integral <= max_house:
        reduced = instance.to_input_order([v // g for v in instance.populations])
        res = check_weak_proportionality(method, reduced, policy)
        if not res:
            return CheckResult(False, ("weakprop", res.witness))
    if house >= 1:
        report = check_pc(method, instance, house, policy)
        if not report.overall:
            return CheckResult(False, ("pc", str(report.failures[0].lam)))
    return CheckResult(True)


@dataclass(frozen=True)
class SearchConfig:
    """
    Args:
      n_range: (min, max) number of states
      population_bound: largest population
      house_range: (min, max) house size
      mode: "random" or "exhaustive" (sorted primitive population lattice)
      stop_after: stop once this many violations are found
      max_lambda: only check admissible lambda <= max_lambda
      jobs: worker processes; 0 for all CPUs, default `PROPCON_JOBS` or 1
    """

    method: str
    n_range: Tuple[int, int] = (2, 5)
    population_bound: int = 10 ** 6
    house_range: Tuple[int, int] = (1, 120)
    mode: str = "random"
    seed: int = 0
    trials: int = 10000
    stop_after: Optional[int] = None
    max_lambda: Optional[Fraction] = None
    jobs: Optional[int] = None
    policy: TiePolicy = TiePolicy.LARGER
    progress: bool = False

    def __post_init__(self):
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ApportionmentError(f"bad state range: {self.n_range}")
        lo, hi = self.house_range
        if not 1 <= lo <= hi:
            raise ApportionmentError(f"bad house range: {self.house_range}")
        if self.population_bound < 1 or self.trials < 0:
            raise ApportionmentError("population bound and trials must be positive")
        if self.mode not in ("random", "exhaustive"):
            raise ApportionmentError(f"unknown search mode: {self.mode}")
        if self.jobs is None:
            object.__setattr__(self, "jobs", int(os.getenv("PROPCON_JOBS", "1")))
        if self.jobs == 0:
            object.__setattr__(self, "jobs", cpu_count())
        parse_method(self.method)


@dataclass
class SearchOutcome:
    violations: List[PCReport] = field(default_factory=list)
    advisories: List[PCReport] = field(default_factory=list)
    checked: int = 0


def lattice(
    n_range, population_bound, house_range
) -> Iterator[Tuple[Tuple[int, ...], int]]:
    """Sorted population tuples with gcd 1, times every house size."""
    for n in range(n_range[0], n_range[1] + 1):
        for pops in combinations_with_replacement(range(population_bound, 0, -1), n):
            if reduce(gcd, pops) != 1:
                continue
            for house in range(house_range[0], house_range[1] + 1):
                yield pops, house


def _gcd_rich(rng, n, population_bound, house_range):
    """
    A target allocation h with a common divisor, and populations whose
    quotas sit within one seat of it.
    """
    d = rng.randint(2, 6)
    lo, hi = -(-house_range[0] // d), house_range[1] // d
    if lo > hi:
        return None
    house = d * rng.randint(lo, hi)
    grid = min(40, population_bound // house)
    if grid < 2:
        return None
    units = [0] * n
    for _ in range(house // d):
        units[rng.randrange(n)] += 1
    for _ in range(8):
        offsets = [rng.randint(1 - grid, grid - 1) for _ in range(n - 1)]
        offsets.append(-sum(offsets))
        pops = [d * k * grid + e for k, e in zip(units, offsets)]
        if abs(offsets[-1]) < grid and all(1 <= v <= population_bound for v in pops):
            return tuple(pops), house
    return None


def random_candidates(config: SearchConfig) -> Iterator[Tuple[Tuple[int, ...], int]]:
    """Reproducible from `config.seed`; half the draws are gcd-rich."""
    rng = random.Random(config.seed)
    for _ in range(config.trials):
        n = rng.randint(*config.n_range)
        cand = _gcd_rich(rng, n, config.population_bound, config.house_range)
        if rng.random() < 0.5 or cand is None:
            pops = tuple(rng.randint(1, config.population_bound) for _ in range(n))
            cand = pops, rng.randint(*config.house_range)
        yield cand


def _evaluate(args) -> Optional[PCReport]:
    method_id, policy, max_lambda, (pops, house) = args
    try:
        method = parse_method(method_id)
        with tie_log_level(logging.DEBUG):
            return check_pc(method, Instance.create(pops), house, policy, max_lambda)
    except TieError as exc:
        log.debug(f"{method_id} {pops} H={house}: {exc}")
        return None


def iter_pc_reports(config: SearchConfig) -> Iterator[PCReport]:
    """PC reports in candidate order, whatever the number of workers."""
    if config.mode == "exhaustive":
        candidates = lattice(
            config.n_range, config.population_bound, config.house_range
        )
        total = None
    else:
        candidates = random_candidates(config)
        total = config.trials
    tasks = ((config.method, config.policy, config.max_lambda, c) for c in candidates)
    with tqdm(
        total=total, disable=not config.progress, desc=config.method, unit="inst"
    ) as bar:
        if config.jobs > 1:
            with get_context("spawn").Pool(config.jobs) as pool:
                for report in pool.imap(_evaluate, tasks, chunksize=64):
                    bar.update()
                    if report is not None:
                        yield report
        else:
            for report in map(_evaluate, tasks):
                bar.update()
                if report is not None:
                    yield report


def search(config: SearchConfig) -> SearchOutcome:
    """
    Violations exclude tie-affected reports, which go to `advisories`.
    """
    res = SearchOutcome()
    for report in iter_pc_reports(config):
        if not report.verdicts:
            continue
        res.checked += 1
        if report.overall:
            continue
        if report.tie_involved:
            res.advisories.append(report)
            continue
        log.debug(f"violation: {report.to_dict()}")
        res.violations.append(report)
        if config.stop_after and len(res.violations) >= config.stop_after:
            break
    log.info(
        f"{config.method}: {res.checked} checked, {len(res.violations)} violations,"
        f" {len(res.advisories)} advisories"
    )
    return res


def search_pc_violations(config: SearchConfig) -> List[PCReport]:
    return search(config).violations
