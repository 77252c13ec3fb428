"""
Exact-rational data model shared by all apportionment methods:
* instances (populations sorted by size, input order kept as a permutation)
* quotas and shifted quotas
* apportionments, admissible scale factors and the tie policy
"""
import json
import logging
import os
import re
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from itertools import groupby
from math import floor, gcd
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

log = logging.getLogger(__name__)

Rational = Union[int, Fraction]
RE_RATIONAL = re.compile(r"^[+-]?\d+(/\d+|\.\d+)?$")
TIE_LOG_LEVEL = ContextVar("tie_log_level", default=logging.WARNING)


class ApportionmentError(ValueError):
    """Invalid input to an apportionment method"""


class TieError(ApportionmentError):
    """A tie changed the allocation under `TiePolicy.FAIL`"""

    def __init__(self, house, states, reason=""):
        self.house = house
        self.states = tuple(states)
        self.reason = reason
        super().__init__(
            f"tie at house {house} between states {list(self.states)}"
            + (f": {reason}" if reason else "")
        )


class QuotaError(ApportionmentError):
    """An allocation outside {floor(q_i), ceil(q_i)}"""


class DegenerateInstanceError(ApportionmentError):
    """No state left to take a seat from"""


def format_rational(x: Rational) -> str:
    """
    Returns (str):
      "7" for integers, an exact decimal ("9.65") when the denominator
      only has factors 2 and 5, otherwise "p/q".
    """
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    den, twos, fives = x.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    places = max(twos, fives)
    digits = str(abs(x.numerator) * 10 ** places // x.denominator)
    digits = digits.rjust(places + 1, "0")
    return f"{'-' if x < 0 else ''}{digits[:-places]}.{digits[-places:]}"


def parse_rational(s: Union[str, Rational]) -> Fraction:
    """Inverse of `format_rational`; floats are refused."""
    if isinstance(s, bool) or isinstance(s, float):
        raise ApportionmentError(f"not an exact rational: {s!r}")
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    s = str(s).strip()
    if not RE_RATIONAL.match(s):
        raise ApportionmentError(f"could not parse rational: {s!r}")
    try:
        return Fraction(s)
    except ZeroDivisionError:
        raise ApportionmentError(f"zero denominator: {s!r}")


class TiePolicy(Enum):
    LARGER = "larger-population-first"
    INDEX = "lower-index-first"
    FAIL = "fail-on-tie"

    @classmethod
    def default(cls):
        """`PROPCON_TIE` if set, else larger-population-first"""
        return cls.parse(os.getenv("PROPCON_TIE", cls.LARGER.value))

    @classmethod
    def parse(cls, name):
        aliases = {"larger": cls.LARGER, "index": cls.INDEX, "fail": cls.FAIL}
        try:
            return aliases.get(name) or cls(name)
        except ValueError:
            raise ApportionmentError(
                f"unknown tie policy: {name!r}; one of"
                f" {sorted(aliases) + [p.value for p in cls]}"
            )

    def key(self, instance, i):
        """Preference among tied states (smaller wins)."""
        return instance.order[i] if self is TiePolicy.INDEX else i

    def settle(self, house, states, reason=""):
        """Record a tie that changed the allocation; raises under FAIL."""
        level = TIE_LOG_LEVEL.get()
        if self is TiePolicy.FAIL:
            if level >= logging.WARNING:
                level = logging.ERROR
            log.log(level, f"tie at house {house}: {reason}")
            raise TieError(house, states, reason)
        log.log(
            level, f"tie at house {house} between states {sorted(states)}: {reason}"
        )
        return True


@contextmanager
def tie_log_level(level: int):
    """
    Log level of `TiePolicy.settle` inside the block; WARNING (ERROR under
    FAIL) otherwise. Searches run their candidates at DEBUG.
    """
    token = TIE_LOG_LEVEL.set(level)
    try:
        yield
    finally:
        TIE_LOG_LEVEL.reset(token)


@dataclass(frozen=True)
class Instance:
    """
    Populations in non-increasing order.

    Args:
      populations: positive integers v_1 >= ... >= v_n
      order: input index of each sorted state (identity if omitted)
      names: optional display names, in input order
    """

    populations: Tuple[int, ...]
    order: Optional[Tuple[int, ...]] = None
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        pops = tuple(self.populations)
        if not pops:
            raise ApportionmentError("an instance needs at least one state")
        for v in pops:
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise ApportionmentError(
                    f"populations must be positive integers: {v!r}"
                )
        if any(a < b for a, b in zip(pops, pops[1:])):
            raise ApportionmentError("populations must be sorted non-increasing")
        order = tuple(range(len(pops))) if self.order is None else tuple(self.order)
        if sorted(order) != list(range(len(pops))):
            raise ApportionmentError(f"order is not a permutation: {order}")
        names = None if self.names is None else tuple(map(str, self.names))
        if names is not None and len(names) != len(pops):
            raise ApportionmentError("names and populations differ in length")
        object.__setattr__(self, "populations", pops)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "names", names)

    @classmethod
    def create(cls, populations: Sequence[int], names: Optional[Sequence[str]] = None):
        """Sort `populations` (stable, so equal sizes keep input order)."""
        populations = list(populations)
        for v in populations:
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise ApportionmentError(
                    f"populations must be positive integers: {v!r}"
                )
        order = sorted(range(len(populations)), key=lambda i: -populations[i])
        return cls(tuple(populations[i] for i in order), tuple(order), names)

    @property
    def total(self) -> int:
        return sum(self.populations)

    @property
    def count(self) -> int:
        return len(self.populations)

    def name(self, i) -> str:
        """Display name of sorted state `i`"""
        j = self.order[i]
        return self.names[j] if self.names else str(j + 1)

    def scaled(self, c: int):
        if isinstance(c, bool) or not isinstance(c, int) or c <= 0:
            raise ApportionmentError(f"multiplier must be a positive integer: {c!r}")
        return Instance(tuple(c * v for v in self.populations), self.order, self.names)

    def to_input_order(self, values: Sequence) -> List:
        out = [None] * self.count
        for i, x in enumerate(values):
            out[self.order[i]] = x
        return out

    def from_input_order(self, values: Sequence) -> Tuple:
        return tuple(values[j] for j in self.order)

    def to_dict(self) -> Dict[str, Any]:
        res = {"populations": self.to_input_order(self.populations)}
        if self.names:
            res["names"] = list(self.names)
        return res

    @classmethod
    def from_dict(cls, dct):
        if "populations" not in dct:
            raise ApportionmentError("instance needs a 'populations' list")
        return cls.create(dct["populations"], dct.get("names"))


@dataclass(frozen=True)
class Quotas:
    values: Tuple[Fraction, ...]
    house: int
    shift: Fraction = Fraction(0)

    @property
    def floors(self) -> Tuple[int, ...]:
        return tuple(floor(q) for q in self.values)

    @property
    def ceilings(self) -> Tuple[int, ...]:
        return tuple(-floor(-q) for q in self.values)


def check_house(house):
    if isinstance(house, bool) or not isinstance(house, int) or house < 0:
        log.error(f"house must be a nonnegative integer: {house!r}")
        raise ApportionmentError(f"house must be a nonnegative integer: {house!r}")
    return house


def check_shift(shift) -> Fraction:
    shift = parse_rational(shift)
    if not 0 <= shift < 1:
        raise ApportionmentError(f"shift must lie in [0, 1): {format_rational(shift)}")
    return shift


def quotas(instance: Instance, house: int, shift: Rational = 0) -> Quotas:
    """q_i = (H + s) v_i / V exactly"""
    check_house(house)
    shift = check_shift(shift)
    V = instance.total
    return Quotas(
        tuple(Fraction((house + shift) * v, V) for v in instance.populations),
        house,
        shift,
    )


def round_nearest(x: Rational) -> int:
    """[x]: the integer with x - 1/2 < [x] <= x + 1/2 (halves round up)"""
    x = Fraction(x)
    if x < 0:
        raise ApportionmentError(f"cannot round a negative quota: {format_rational(x)}")
    return floor(x + Fraction(1, 2))


@dataclass(frozen=True)
class Apportionment:
    """
    Seats per state in size order, summing to `house`.
    `tie_flag` marks an allocation that a tie could have changed.
    `trace` holds per-seat steps for sequential methods when requested.
    """

    seats: Tuple[int, ...]
    house: int
    tie_flag: bool = field(default=False, compare=False)
    trace: Optional[Tuple[Any, ...]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        seats = tuple(self.seats)
        for h in seats:
            if isinstance(h, bool) or not isinstance(h, int) or h < 0:
                raise ApportionmentError(f"seats must be nonnegative integers: {h!r}")
        if sum(seats) != self.house:
            raise ApportionmentError(f"seats {seats} do not sum to house {self.house}")
        object.__setattr__(self, "seats", seats)

    @classmethod
    def zero(cls, n):
        return cls((0,) * n, 0)

    def to_dict(self, instance: Optional[Instance] = None) -> Dict[str, Any]:
        seats = instance.to_input_order(self.seats) if instance else list(self.seats)
        return {"seats": seats, "house": self.house, "tie_flag": self.tie_flag}

    @classmethod
    def from_dict(cls, dct, instance: Optional[Instance] = None):
        seats = dct["seats"]
        if instance is not None:
            seats = instance.from_input_order(seats)
        return cls(tuple(seats), dct["house"], bool(dct.get("tie_flag", False)))


@dataclass(frozen=True)
class ScaleFactor:
    """lambda = p/q with 0 < p < q and gcd(p, q) = 1"""

    numerator: int
    denominator: int

    def __post_init__(self):
        p, q = self.numerator, self.denominator
        if not 0 < p < q or gcd(p, q) != 1:
            raise ApportionmentError(f"not a reduced fraction in (0, 1): {p}/{q}")

    @classmethod
    def parse(cls, s):
        x = parse_rational(s)
        return cls(x.numerator, x.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"

    def admits(self, k: int) -> bool:
        return k * self.numerator % self.denominator == 0

    def scale(self, k: int) -> int:
        if not self.admits(k):
            raise ApportionmentError(f"{self} * {k} is not an integer")
        return k * self.numerator // self.denominator


def admissible_lambdas(h: Apportionment) -> List[ScaleFactor]:
    """
    All rational lambda < 1 with every lambda * h_i an integer.
    Zero entries impose no constraint.
    """
    if h.house == 0:
        raise ApportionmentError("every lambda is admissible for the empty house")
    g = reduce(gcd, (k for k in h.seats if k))
    lambdas = [
        ScaleFactor(p, q)
        for q in range(2, g + 1)
        if g % q == 0
        for p in range(1, q)
        if gcd(p, q) == 1
    ]
    return sorted(lambdas, key=lambda lam: lam.value)


def scale_apportionment(h: Apportionment, lam: ScaleFactor) -> Apportionment:
    """lambda * h, with house lambda * H"""
    bad = [k for k in h.seats if not lam.admits(k)]
    if bad:
        raise ApportionmentError(f"lambda={lam} is not admissible for {h.seats}")
    return Apportionment(tuple(map(lam.scale, h.seats)), lam.scale(h.house))


def equal_population_split(instance: Instance, seats: Sequence[int]) -> Tuple[int, ...]:
    """States sharing a population but not a seat count (ordering decided them)."""
    tied = []
    for _, grp in groupby(range(instance.count), key=instance.populations.__getitem__):
        grp = list(grp)
        if len({seats[i] for i in grp}) > 1:
            tied.extend(grp)
    return tuple(tied)


def read_instance(path) -> Tuple[Instance, int, Fraction]:
    """
    Args:
      path: JSON file {"populations": [...], "house": H,
        optional "shift": "p/q", optional "names": [...]}
    Returns:
      (instance, house, shift)
    """
    with open(Path(path)) as fd:
        dct = json.load(fd)
    if not isinstance(dct, dict):
        raise ApportionmentError(f"{path}: expected a JSON object")
    instance = Instance.from_dict(dct)
    house = check_house(dct.get("house", 0))
    return instance, house, check_shift(dct.get("shift", "0"))
