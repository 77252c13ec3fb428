"""
Quota-based methods: floors (or nearest integers) of the quotas, then a
rule that places the remaining seats.

All methods share the signature `(instance, house, policy=None)` and are
registered in `QUOTA_METHODS` by their CLI name.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import (
    Callable,
    Dict,
    FrozenSet,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from .core import (
    Apportionment,
    ApportionmentError,
    DegenerateInstanceError,
    Instance,
    QuotaError,
    Rational,
    TiePolicy,
    check_house,
    equal_population_split,
    format_rational,
    quotas,
    round_nearest,
)

log = logging.getLogger(__name__)
QUOTA_METHODS: Dict[str, Callable[..., Apportionment]] = {}


def quota_method(func):
    QUOTA_METHODS[func.__name__] = func
    return func


@dataclass(frozen=True)
class QuotaSplit:
    floors: Tuple[int, ...]
    remainders: Tuple[Fraction, ...]
    deficit: int
    integer_mask: Tuple[bool, ...]


class UpperLowerSets(NamedTuple):
    lower: FrozenSet[int]
    upper: FrozenSet[int]


class NearestSplit(NamedTuple):
    rounded: Tuple[int, ...]
    excess: int


def quota_split(instance: Instance, house: int, shift: Rational = 0) -> QuotaSplit:
    q = quotas(instance, house, shift)
    floors = q.floors
    return QuotaSplit(
        floors,
        tuple(x - k for x, k in zip(q.values, floors)),
        house - sum(floors),
        tuple(x.denominator == 1 for x in q.values),
    )


def nearest_split(instance: Instance, house: int) -> NearestSplit:
    """[q_i] and the excess sum([q_i]) - H (negative when seats are missing)"""
    rounded = tuple(map(round_nearest, quotas(instance, house).values))
    return NearestSplit(rounded, sum(rounded) - house)


def _policy(policy):
    return TiePolicy.default() if policy is None else policy


def size_rank(instance: Instance, policy: TiePolicy) -> List[int]:
    """States largest first; equal populations ordered by the policy."""
    pops = instance.populations
    return sorted(
        range(instance.count), key=lambda i: (-pops[i], policy.key(instance, i))
    )


def _finish(instance, house, seats, policy, method):
    tied = equal_population_split(instance, seats)
    tie = bool(tied) and policy.settle(
        house, tied, f"{method}: equal populations split"
    )
    return Apportionment(tuple(seats), house, tie)


def shift_quota(
    instance: Instance,
    house: int,
    shift: Rational = 0,
    policy: Optional[TiePolicy] = None,
) -> Apportionment:
    """
    Floors of (H + s) v_i / V, then one seat each to the largest fractional
    remainders. `shift=0` is Hamilton's method.
    """
    check_house(house)
    policy = _policy(policy)
    split = quota_split(instance, house, shift)
    seats = list(split.floors)
    ranked = sorted(
        range(instance.count),
        key=lambda i: (-split.remainders[i], policy.key(instance, i)),
    )
    d = split.deficit
    for i in ranked[:d]:
        seats[i] += 1
    tie = False
    if 0 < d < instance.count:
        cut = split.remainders[ranked[d - 1]]
        if split.remainders[ranked[d]] == cut:
            tied = [i for i in ranked if split.remainders[i] == cut]
            tie = policy.settle(
                house, tied, f"remainder {format_rational(cut)} straddles the cutoff"
            )
    log.debug(f"shift-quota s={shift} H={house}: {seats}")
    return Apportionment(tuple(seats), house, tie)


@quota_method
def hamilton(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    return shift_quota(instance, house, 0, policy)


def _by_size(instance, house, policy, reverse, method):
    check_house(house)
    policy = _policy(policy)
    split = quota_split(instance, house)
    seats = list(split.floors)
    ranked = [i for i in size_rank(instance, policy) if not split.integer_mask[i]]
    if reverse:
        # smallest first, equal populations still in policy order
        pops = instance.populations
        ranked = sorted(ranked, key=lambda i: (pops[i], policy.key(instance, i)))
    if split.deficit > len(ranked):
        raise ApportionmentError(
            f"{method}: {split.deficit} seats for {len(ranked)} states"
        )
    for i in ranked[: split.deficit]:
        seats[i] += 1
    return _finish(instance, house, seats, policy, method)


@quota_method
def lar(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    """Remaining seats one each to the largest states with non-integer quotas"""
    return _by_size(instance, house, policy, False, "lar")


@quota_method
def sml(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    """Remaining seats one each to the smallest states with non-integer quotas"""
    return _by_size(instance, house, policy, True, "sml")


@quota_method
def lqe(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    """All remaining seats to the largest state"""
    check_house(house)
    policy = _policy(policy)
    split = quota_split(instance, house)
    seats = list(split.floors)
    seats[size_rank(instance, policy)[0]] += split.deficit
    return _finish(instance, house, seats, policy, "lqe")


@quota_method
def suq(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    """Upper quotas in descending order of size until the house is exhausted"""
    check_house(house)
    policy = _policy(policy)
    ceilings = quotas(instance, house).ceilings
    seats = [0] * instance.count
    left = house
    for i in size_rank(instance, policy):
        seats[i] = min(ceilings[i], left)
        left -= seats[i]
    return _finish(instance, house, seats, policy, "suq")


@quota_method
def nie(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    """
    Nearest integers; missing seats all go to the largest state, extra seats
    are all removed from the smallest (then the next smallest when it runs out).
    """
    check_house(house)
    policy = _policy(policy)
    rounded, excess = nearest_split(instance, house)
    seats = list(rounded)
    rank = size_rank(instance, policy)
    if excess < 0:
        seats[rank[0]] -= excess
    for i in reversed(rank):
        if excess <= 0:
            break
        take = min(seats[i], excess)
        seats[i] -= take
        excess -= take
    return _finish(instance, house, seats, policy, "nie")


@quota_method
def nis(instance: Instance, house: int, policy: Optional[TiePolicy] = None):
    """
    Nearest integers; missing seats go one each to the largest states, extra
    seats are removed one each from the smallest states holding a seat.

    Raises:
      DegenerateInstanceError: fewer states hold a seat than must give one up
    """
    check_house(house)
    policy = _policy(policy)
    rounded, excess = nearest_split(instance, house)
    seats = list(rounded)
    rank = size_rank(instance, policy)
    if excess < 0:
        for i in rank[:-excess]:
            seats[i] += 1
    elif excess > 0:
        holders = [i for i in reversed(rank) if seats[i] > 0]
        if len(holders) < excess:
            log.error(f"nis: {excess} seats to remove from {len(holders)} states")
            raise DegenerateInstanceError(
                f"nis: cannot remove {excess} seats from {len(holders)} nonzero states"
            )
        for i in holders[:excess]:
            seats[i] -= 1
    return _finish(instance, house, seats, policy, "nis")


def priority_quota(
    instance: Instance,
    house: int,
    order: Sequence[int],
    policy: Optional[TiePolicy] = None,
) -> Apportionment:
    """
    Floors, then one seat each to non-integer-quota states in a fixed
    priority order.

    Args:
      order: 1-based input indices, highest priority first, covering every state
    """
    check_house(house)
    n = instance.count
    if sorted(order) != list(range(1, n + 1)):
        raise ApportionmentError(f"priority order must permute 1..{n}: {list(order)}")
    position = {j: r for r, j in enumerate(order)}
    split = quota_split(instance, house)
    ranked = sorted(
        (i for i in range(n) if not split.integer_mask[i]),
        key=lambda i: position[instance.order[i] + 1],
    )
    seats = list(split.floors)
    for i in ranked[: split.deficit]:
        seats[i] += 1
    return Apportionment(tuple(seats), house)


def upper_lower_sets(
    instance: Instance, house: int, h: Apportionment, shift: Rational = 0
) -> UpperLowerSets:
    """
    L = {i : h_i = floor(q_i)} (integer quotas included), U = the rest.

    Raises:
      QuotaError: some h_i is neither floor nor ceiling of its (shifted) quota
    """
    q = quotas(instance, house, shift)
    lower, upper = set(), set()
    for i, (x, k) in enumerate(zip(q.values, h.seats)):
        if k == floor(x):
            lower.add(i)
        elif x.denominator != 1 and k == floor(x) + 1:
            upper.add(i)
        else:
            log.error(f"state {i}: {k} seats for quota {format_rational(x)}")
            raise QuotaError(
                f"state {i} holds {k} seats for quota {format_rational(x)}"
            )
    return UpperLowerSets(frozenset(lower), frozenset(upper))
