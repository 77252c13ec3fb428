"""
Quotatone apportionment: house-monotone methods that satisfy quota.

Seat H+1 goes to the state of largest divisor priority v_i / f(h_i)
among the eligible states L(v, h) & U(v, h):

* U: states that can take the seat without exceeding upper quota at H+1
* L: states whose lower quota would otherwise be broken within the next
  alpha-tilde seats (every state when no such alpha exists)

All eligibility tests are integer comparisons against V.
"""
import logging
from dataclasses import dataclass, field
from typing import (
    Dict,
    FrozenSet,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from .core import Apportionment, Instance, TiePolicy, check_house
from .divisor import Quotient, SignpostRule

log = logging.getLogger(__name__)


class EligibilityError(AssertionError):
    """No state may take the next seat"""


@dataclass(frozen=True)
class EligibilitySets:
    upper_ok: FrozenSet[int]
    alpha_values: Dict[int, int] = field(compare=False)
    alpha_tilde: Optional[int]
    bound: int
    lower_ok: FrozenSet[int]
    eligible: FrozenSet[int]


class QuotatoneStep(NamedTuple):
    house: int
    upper: FrozenSet[int]
    alpha_tilde: Optional[int]
    lower: FrozenSet[int]
    eligible: FrozenSet[int]
    winner: int
    tied: Tuple[int, ...]


def _house(seats: Sequence[int]) -> int:
    return sum(seats)


def _seats(h) -> Tuple[int, ...]:
    return h.seats if isinstance(h, Apportionment) else tuple(h)


def upper_set(instance: Instance, h) -> FrozenSet[int]:
    """U(v, h) = {i : h_i < (H + 1) v_i / V}"""
    seats = _seats(h)
    H, V = _house(seats), instance.total
    pops = instance.populations
    return frozenset(
        i for i, (v, k) in enumerate(zip(pops, seats)) if k * V < (H + 1) * v
    )


def g_value(instance: Instance, h, alpha: int) -> Tuple[FrozenSet[int], int]:
    """
    Returns:
      (L_alpha, g(alpha)): states with floor((H + alpha) v_i / V) - h_i >= 1
      and the sum of those deficits
    """
    if alpha < 1:
        raise ValueError(f"alpha must be positive: {alpha}")
    seats = _seats(h)
    H, V = _house(seats), instance.total
    gaps = [(H + alpha) * v // V - k for v, k in zip(instance.populations, seats)]
    members = frozenset(i for i, d in enumerate(gaps) if d >= 1)
    return members, sum(gaps[i] for i in members)


def alpha_bound(instance: Instance, h) -> int:
    """B = max_i ceil((h_i - H v_i / V) / (v_i / V))"""
    seats = _seats(h)
    H, V = _house(seats), instance.total
    return max(-((H * v - k * V) // v) for v, k in zip(instance.populations, seats))


def _scan(instance, seats):
    bound = alpha_bound(instance, seats)
    values = {}
    for alpha in range(1, bound + 1):
        members, g = g_value(instance, seats, alpha)
        values[alpha] = g
        if g >= alpha:
            return alpha, members, values, bound
    return None, frozenset(range(instance.count)), values, bound


def alpha_tilde(instance: Instance, h) -> Optional[int]:
    """
    min {alpha >= 1 : g(alpha) >= alpha}, scanning alpha = 1..B only.
    None when the scan is empty or exhausted.
    """
    return _scan(instance, _seats(h))[0]


def eligibility(instance: Instance, h) -> EligibilitySets:
    seats = _seats(h)
    upper = upper_set(instance, seats)
    alpha, lower, values, bound = _scan(instance, seats)
    return EligibilitySets(upper, values, alpha, bound, lower, lower & upper)


def _induction(
    instance: Instance, rule: SignpostRule, policy: TiePolicy
) -> Iterator[Tuple[QuotatoneStep, Tuple[int, ...]]]:
    pops = instance.populations
    seats = [0] * instance.count
    while True:
        sets = eligibility(instance, seats)
        if not sets.eligible:
            log.error(f"empty eligible set at house {sum(seats)}: {seats}")
            raise EligibilityError(f"no eligible state at house {sum(seats)}: {seats}")
        prio = {i: Quotient.of(rule, pops[i], seats[i]) for i in sets.eligible}
        top = max(prio.values())
        tied = tuple(sorted(i for i, q in prio.items() if q == top))
        winner = min(tied, key=lambda i: policy.key(instance, i))
        seats[winner] += 1
        step = QuotatoneStep(
            sum(seats),
            sets.upper_ok,
            sets.alpha_tilde,
            sets.lower_ok,
            sets.eligible,
            winner,
            tied if len(tied) > 1 else (),
        )
        yield step, tuple(seats)


def _tie_flag(instance, house, seats, ties, policy, rule, settled=None) -> bool:
    """
    A tied step matters unless the tied states share a population and
    end up with equal seats. Steps in `settled` were already reported.
    """
    settled = set() if settled is None else settled
    pops = instance.populations
    flag = False
    for step_house, tied in ties:
        if len({pops[i] for i in tied}) == 1 and len({seats[i] for i in tied}) == 1:
            continue
        flag = True
        if step_house not in settled:
            settled.add(step_house)
            policy.settle(
                house, tied, f"quotatone:{rule} priorities tie at seat {step_house}"
            )
    return flag


def quotatone_apportion(
    instance: Instance,
    house: int,
    rule: SignpostRule,
    policy: Optional[TiePolicy] = None,
    trace: bool = False,
) -> Apportionment:
    """
    Args:
      rule: the signpost rule ranking eligible states
      trace (bool): keep every `QuotatoneStep`
    Raises:
      TieError: under `TiePolicy.FAIL`
      EligibilityError: the eligible set was empty (never expected)
    """
    check_house(house)
    policy = TiePolicy.default() if policy is None else policy
    seats, steps, ties = (0,) * instance.count, [], []
    induction = _induction(instance, rule, policy)
    for _ in range(house):
        step, seats = next(induction)
        if step.tied:
            ties.append((step.house, step.tied))
        if trace:
            steps.append(step)
            log.debug(
                f"seat {step.house}: U={sorted(step.upper)} alpha~={step.alpha_tilde}"
                f" L={sorted(step.lower)} -> state {step.winner}"
            )
    tie = _tie_flag(instance, house, seats, ties, policy, rule)
    return Apportionment(seats, house, tie, tuple(steps) if trace else None)


def quotatone_sequence(
    instance: Instance,
    house_max: int,
    rule: SignpostRule,
    policy: Optional[TiePolicy] = None,
) -> List[Apportionment]:
    """Allocations for H = 0..house_max from one induction"""
    check_house(house_max)
    policy = TiePolicy.default() if policy is None else policy
    res = [Apportionment.zero(instance.count)]
    ties, settled = [], set()
    induction = _induction(instance, rule, policy)
    for house in range(1, house_max + 1):
        step, seats = next(induction)
        if step.tied:
            ties.append((step.house, step.tied))
        tie = _tie_flag(instance, house, seats, ties, policy, rule, settled)
        res.append(Apportionment(seats, house, tie))
    return res
