"""
Divisor methods driven by signpost (rounding) rules f(k) in [k, k+1].

Seats are awarded greedily to the state with the largest priority
v_i / f(h_i). Priorities are compared through their squares so that
Hill-Huntington's f(k) = sqrt(k(k+1)) stays exact.
"""
import heapq
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from math import isqrt
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .core import (
    Apportionment,
    ApportionmentError,
    Instance,
    ScaleFactor,
    TiePolicy,
    check_house,
    format_rational,
    parse_rational,
)

log = logging.getLogger(__name__)

# named stationary rules: f(k) = k + s
STATIONARY = {"jefferson": Fraction(1), "webster": Fraction(1, 2), "adams": Fraction(0)}
RE_TABLE = re.compile(r"^table:default=([^;]+)(?:;(.*))?$")


class RuleKind(Enum):
    STATIONARY = "stationary"
    HILL = "hill"
    DEAN = "dean"
    TABLE = "table"


class CertificateError(ApportionmentError):
    """min_{h_i>0} v_i/f(h_i-1) < max_j v_j/f(h_j) for the pair (i, j)"""

    def __init__(self, i, j, msg=""):
        self.i, self.j = i, j
        super().__init__(msg or f"divisor bounds violated by states ({i}, {j})")


@dataclass(frozen=True)
class SignpostRule:
    """
    Args:
      kind: stationary, hill, dean or table
      s: f(k) = k + s for stationary rules, and the default of table rules
      overrides: table entries (k, f(k)) with k <= f(k) <= k + 1
      name: display string, round-trips through `parse_rule`
    """

    kind: RuleKind
    s: Fraction = Fraction(0)
    overrides: Tuple[Tuple[int, Fraction], ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        s = parse_rational(self.s)
        if self.kind in (RuleKind.STATIONARY, RuleKind.TABLE) and not 0 <= s <= 1:
            raise ApportionmentError(f"stationary parameter outside [0, 1]: {s}")
        table = {}
        for k, f in self.overrides:
            f = parse_rational(f)
            if isinstance(k, bool) or not isinstance(k, int) or k < 0:
                raise ApportionmentError(
                    f"signpost index must be a nonnegative int: {k!r}"
                )
            if not k <= f <= k + 1:
                raise ApportionmentError(f"f({k}) = {f} lies outside [{k}, {k + 1}]")
            if k in table:
                raise ApportionmentError(f"duplicate signpost override at k={k}")
            table[k] = f
        if table and self.kind is not RuleKind.TABLE:
            raise ApportionmentError(f"{self.kind.value} rules take no overrides")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "overrides", tuple(sorted(table.items())))
        object.__setattr__(self, "_table", table)
        if self.kind is RuleKind.TABLE:
            # f(a) = a + 1 and f(b) = b must not coexist for positive a, b
            up = s == 1 or any(k > 0 and f == k + 1 for k, f in table.items())
            down = s == 0 or any(k > 0 and f == k for k, f in table.items())
            if up and down:
                raise ApportionmentError(
                    "rounding rule mixes f(a) = a+1 and f(b) = b for positive a, b"
                )
        if not self.name:
            object.__setattr__(self, "name", format_rule(self))

    def signpost_squared(self, k: int) -> Tuple[int, int]:
        """f(k)^2 as an (unreduced) integer pair (num, den)."""
        if self.kind is RuleKind.HILL:
            return k * (k + 1), 1
        if self.kind is RuleKind.DEAN:
            # f(k) = k(k+1) / (k + 1/2)
            return (2 * k * (k + 1)) ** 2, (2 * k + 1) ** 2
        f = self._table.get(k) if self.kind is RuleKind.TABLE else None
        if f is None:
            a, b = self.s.numerator, self.s.denominator
            return (k * b + a) ** 2, b * b
        return f.numerator ** 2, f.denominator ** 2

    def signpost(self, k: int) -> Optional[Fraction]:
        """f(k) when rational, else None"""
        return _exact_sqrt(*self.signpost_squared(k))

    def __str__(self):
        return self.name


def _exact_sqrt(num, den) -> Optional[Fraction]:
    x = Fraction(num, den)
    a, b = isqrt(x.numerator), isqrt(x.denominator)
    return Fraction(a, b) if a * a == x.numerator and b * b == x.denominator else None


@total_ordering
@dataclass(frozen=True, eq=False)
class Quotient:
    """
    Exact priority v / f(k), held through its square sq_num / sq_den.
    `sq_den == 0` is +infinity (f(k) = 0); infinite priorities order by
    population, and a `population` of None is the unbounded marker.
    """

    sq_num: int
    sq_den: int
    population: Optional[int] = None

    @classmethod
    def of(cls, rule: SignpostRule, v: int, k: int):
        num, den = rule.signpost_squared(k)
        return cls(v * v * den, num, v)

    @classmethod
    def unbounded(cls):
        return cls(1, 0, None)

    @classmethod
    def from_value(cls, x: Fraction):
        x = Fraction(x)
        return cls(x.numerator ** 2, x.denominator ** 2)

    @property
    def infinite(self) -> bool:
        return self.sq_den == 0

    @property
    def square(self) -> Optional[Fraction]:
        return None if self.infinite else Fraction(self.sq_num, self.sq_den)

    @property
    def value(self) -> Optional[Fraction]:
        """v / f(k) when finite and rational"""
        return None if self.infinite else _exact_sqrt(self.sq_num, self.sq_den)

    def _rank(self):
        return (1, 0) if self.population is None else (0, self.population)

    def __eq__(self, other):
        if not isinstance(other, Quotient):
            return NotImplemented
        if self.infinite or other.infinite:
            return self.infinite and other.infinite and self._rank() == other._rank()
        return self.sq_num * other.sq_den == other.sq_num * self.sq_den

    def __lt__(self, other):
        if self.infinite:
            return other.infinite and self._rank() < other._rank()
        if other.infinite:
            return True
        return self.sq_num * other.sq_den < other.sq_num * self.sq_den

    __hash__ = None

    def __str__(self):
        if self.infinite:
            return "inf"
        value = self.value
        if value is None:
            return f"sqrt({format_rational(self.square)})"
        return format_rational(value)


def priority_compare(rule: SignpostRule, v_a: int, h_a: int, v_b: int, h_b: int) -> int:
    """
    Returns (int):
      1 if state a has the larger priority v/f(h), -1 if smaller,
      0 on an exact tie (left to the TiePolicy).
    """
    a, b = Quotient.of(rule, v_a, h_a), Quotient.of(rule, v_b, h_b)
    return (a > b) - (a < b)


@dataclass(frozen=True)
class DivisorCertificate:
    """
    lower = max_j v_j / f(h_j); upper = min_{h_i>0} v_i / f(h_i - 1)
    (unbounded when no state holds a seat).
    """

    lower: Quotient
    upper: Quotient
    lower_state: int
    upper_state: Optional[int] = None

    @property
    def valid(self) -> bool:
        return self.lower <= self.upper

    @property
    def tied(self) -> bool:
        """lower == upper: a seat can move between two states"""
        return self.lower == self.upper

    @property
    def witness(self) -> Quotient:
        """A divisor x in [lower, upper]"""
        if self.upper.infinite or self.lower.infinite:
            return self.lower
        lo, up = self.lower.value, self.upper.value
        if lo is not None and up is not None:
            return Quotient.from_value((lo + up) / 2)
        mid = (self.lower.square + self.upper.square) / 2
        return Quotient(mid.numerator, mid.denominator)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": str(self.lower),
            "upper": str(self.upper),
            "witness": str(self.witness),
            "valid": self.valid,
        }


class SeatStep(NamedTuple):
    house: int
    winner: int
    priority: Quotient
    tied: Tuple[int, ...]


@dataclass(frozen=True)
class _Entry:
    quotient: Quotient
    key: Any
    state: int

    def __lt__(self, other):
        # heapq pops the smallest entry: largest priority, then preferred key
        if self.quotient == other.quotient:
            return self.key < other.key
        return self.quotient > other.quotient


def _award(
    instance: Instance, rule: SignpostRule, policy: TiePolicy
) -> Iterator[SeatStep]:
    """Endless greedy sequence of seat awards starting from the empty house."""
    pops = instance.populations
    seats = [0] * instance.count
    heap = [
        _Entry(Quotient.of(rule, v, 0), policy.key(instance, i), i)
        for i, v in enumerate(pops)
    ]
    heapq.heapify(heap)
    house = 0
    while True:
        best = heapq.heappop(heap)
        tied = tuple(sorted(e.state for e in heap if e.quotient == best.quotient))
        i = best.state
        seats[i] += 1
        house += 1
        heapq.heappush(heap, _Entry(Quotient.of(rule, pops[i], seats[i]), best.key, i))
        yield SeatStep(house, i, best.quotient, tied)


def certificate(
    instance: Instance, seats: Sequence[int], rule: SignpostRule
) -> DivisorCertificate:
    pops = instance.populations
    lower_state = max(
        range(instance.count), key=lambda j: Quotient.of(rule, pops[j], seats[j])
    )
    upper, upper_state = Quotient.unbounded(), None
    for i, h in enumerate(seats):
        if h > 0:
            q = Quotient.of(rule, pops[i], h - 1)
            if q < upper:
                upper, upper_state = q, i
    lower = Quotient.of(rule, pops[lower_state], seats[lower_state])
    return DivisorCertificate(lower, upper, lower_state, upper_state)


def _settle(policy, instance, house, seats, rule):
    cert = certificate(instance, seats, rule)
    tie = house > 0 and cert.tied
    if tie:
        policy.settle(
            house,
            (cert.lower_state, cert.upper_state),
            f"{rule} priorities coincide at {cert.lower}",
        )
    return cert, tie


def apportion_divisor(
    instance: Instance,
    house: int,
    rule: SignpostRule,
    policy: Optional[TiePolicy] = None,
    trace: bool = False,
) -> Tuple[Apportionment, DivisorCertificate]:
    """
    Greedy divisor apportionment.

    Args:
      trace (bool): keep the per-seat `SeatStep` log
    Returns:
      (Apportionment, DivisorCertificate)
    """
    check_house(house)
    policy = TiePolicy.default() if policy is None else policy
    seats = [0] * instance.count
    steps = []
    award = _award(instance, rule, policy)
    for _ in range(house):
        step = next(award)
        seats[step.winner] += 1
        if trace:
            steps.append(step)
            log.debug(
                f"seat {step.house} -> state {step.winner} at priority {step.priority}"
            )
    cert, tie = _settle(policy, instance, house, seats, rule)
    h = Apportionment(tuple(seats), house, tie, tuple(steps) if trace else None)
    return h, cert


def divisor_sequence(
    instance: Instance,
    house_max: int,
    rule: SignpostRule,
    policy: Optional[TiePolicy] = None,
) -> List[Apportionment]:
    """Allocations for H = 0..house_max from a single greedy pass"""
    check_house(house_max)
    policy = TiePolicy.default() if policy is None else policy
    seats = [0] * instance.count
    res = [Apportionment.zero(instance.count)]
    award = _award(instance, rule, policy)
    for house in range(1, house_max + 1):
        seats[next(award).winner] += 1
        _, tie = _settle(policy, instance, house, seats, rule)
        res.append(Apportionment(tuple(seats), house, tie))
    return res


def verify_certificate(
    instance: Instance, h: Apportionment, rule: SignpostRule
) -> DivisorCertificate:
    """
    Recompute the divisor bounds of `h` from scratch.

    Raises:
      CertificateError: with the violating pair (i, j)
    """
    if len(h.seats) != instance.count:
        raise ApportionmentError(
            f"{len(h.seats)} seats given for {instance.count} states"
        )
    cert = certificate(instance, h.seats, rule)
    if not cert.valid:
        raise CertificateError(
            cert.upper_state,
            cert.lower_state,
            f"v_{cert.upper_state}/f(h-1) = {cert.upper} < {cert.lower}"
            f" = v_{cert.lower_state}/f(h) under {rule}",
        )
    return cert


def signpost_scaling_holds(rule: SignpostRule, h: int, lam: ScaleFactor) -> bool:
    """lambda f(h-1) >= f(lambda h - 1) (h > 0) and lambda f(h) <= f(lambda h)"""
    p, q = lam.numerator, lam.denominator
    k = lam.scale(h)

    def le(a, b, c, d):
        # (p/q)^2 * a/b <= c/d
        return p * p * a * d <= q * q * c * b

    if h > 0:
        num1, den1 = rule.signpost_squared(h - 1)
        num2, den2 = rule.signpost_squared(k - 1)
        # lambda^2 f(h-1)^2 >= f(lambda h - 1)^2
        if p * p * num1 * den2 < q * q * num2 * den1:
            return False
    return le(*rule.signpost_squared(h), *rule.signpost_squared(k))


def format_rule(rule: SignpostRule) -> str:
    if rule.name:
        return rule.name
    if rule.kind is RuleKind.STATIONARY:
        return f"stationary:{rule.s}"
    if rule.kind is RuleKind.TABLE:
        table = ",".join(f"{k}={f}" for k, f in rule.overrides)
        return f"table:default={rule.s}" + (f";{table}" if table else "")
    return rule.kind.value


def parse_rule(spec: str) -> SignpostRule:
    """
    Args:
      spec: "jefferson" | "webster" | "adams" | "stationary:p/q" | "hill"
        | "dean" | "table:default=p/q;k1=f1,k2=f2,..."
    """
    spec = spec.strip()
    if spec in STATIONARY:
        return SignpostRule(RuleKind.STATIONARY, STATIONARY[spec], name=spec)
    if spec in ("hill", "dean"):
        return SignpostRule(RuleKind(spec), name=spec)
    if spec.startswith("stationary:"):
        return SignpostRule(RuleKind.STATIONARY, parse_rational(spec[11:]), name=spec)
    m = RE_TABLE.match(spec)
    if m:
        overrides = []
        for item in filter(None, (m.group(2) or "").split(",")):
            k, _, f = item.partition("=")
            try:
                overrides.append((int(k), parse_rational(f)))
            except ValueError:
                raise ApportionmentError(f"bad table entry {item!r} in {spec!r}")
        default = parse_rational(m.group(1))
        return SignpostRule(RuleKind.TABLE, default, tuple(overrides), spec)
    log.error(f"unknown rounding rule: {spec}")
    raise ApportionmentError(f"unknown rounding rule: {spec!r}")
