from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st
from pytest import mark, raises

from apportion.propcon.core import (
    Apportionment,
    ApportionmentError,
    Instance,
    QuotaError,
    TieError,
    TiePolicy,
    quotas,
)
from apportion.propcon.quota_methods import (
    QUOTA_METHODS,
    hamilton,
    lar,
    lqe,
    nearest_split,
    nie,
    nis,
    priority_quota,
    quota_split,
    shift_quota,
    size_rank,
    sml,
    suq,
    upper_lower_sets,
)

populations = st.lists(st.integers(1, 10 ** 6), min_size=2, max_size=8)


def test_registry():
    assert sorted(QUOTA_METHODS) == [
        "hamilton",
        "lar",
        "lqe",
        "nie",
        "nis",
        "sml",
        "suq",
    ]
    assert QUOTA_METHODS["nis"] is nis


def test_quota_split():
    split = quota_split(Instance.create([5, 3, 1]), 6)
    assert split.floors == (3, 2, 0)
    assert split.remainders == (Fraction(1, 3), 0, Fraction(2, 3))
    assert split.deficit == 1
    assert split.integer_mask == (False, True, False)


def test_small():
    v = Instance.create([5, 3, 1])
    assert hamilton(v, 6).seats == (3, 2, 1)
    assert lar(v, 6).seats == (4, 2, 0)
    assert sml(v, 6).seats == (3, 2, 1)
    assert lqe(v, 6).seats == (4, 2, 0)
    assert suq(v, 6).seats == (4, 2, 0)
    assert upper_lower_sets(v, 6, hamilton(v, 6)) == ({0, 1}, {2})

    v = Instance.create([5, 4, 3, 2, 1])
    assert lqe(v, 7).seats == (5, 1, 1, 0, 0)
    assert suq(v, 7).seats == (3, 2, 2, 0, 0)
    assert hamilton(v, 7).seats == (2, 2, 1, 1, 1)


def test_nearest(nis_eight, nis_five):
    assert nearest_split(nis_eight, 70) == ((10, 10, 10, 10, 10, 10, 6, 6), 2)
    assert nearest_split(nis_five, 40) == ((14, 9, 5, 5, 5), -2)
    assert nearest_split(Instance.create([1, 1]), 1) == ((1, 1), 1)

    assert nie(nis_eight, 70).seats == (10, 10, 10, 10, 10, 10, 6, 4)
    assert nis(nis_eight, 70).seats == (10, 10, 10, 10, 10, 10, 5, 5)
    assert nie(nis_five, 40).seats == (16, 9, 5, 5, 5)
    assert nis(nis_five, 40).seats == (15, 10, 5, 5, 5)
    assert nis(nis_eight, 28).seats == (4, 4, 4, 4, 4, 4, 3, 1)


def test_nis_equal_split():
    h = nis(Instance.create([1, 1]), 1)
    assert h.seats == (1, 0)
    assert h.tie_flag


def test_hamilton_ties(nis_five, nis_eight, caplog):
    h = hamilton(nis_five, 40)
    assert h.seats == (14, 9, 6, 6, 5)
    assert h.tie_flag
    assert "straddles the cutoff" in caplog.text
    with raises(TieError) as exc:
        hamilton(nis_five, 40, TiePolicy.FAIL)
    assert exc.value.house == 40

    h = hamilton(nis_eight, 70)
    assert h.seats == (10, 10, 10, 10, 10, 9, 6, 5)
    assert h.tie_flag

    h = lar(nis_eight, 70)
    assert h.seats == (10, 10, 10, 10, 10, 9, 6, 5)
    assert h.tie_flag
    assert not hamilton(Instance.create([5, 3, 1]), 6).tie_flag


def test_shift_quota(nis_five):
    assert shift_quota(nis_five, 40) == hamilton(nis_five, 40)
    h = shift_quota(nis_five, 40, Fraction(1, 2))
    assert h.seats == (15, 9, 6, 5, 5)
    assert h.tie_flag
    with raises(ApportionmentError):
        shift_quota(nis_five, 40, 1)


def test_priority_quota():
    v = Instance.create([5, 3, 1])
    assert priority_quota(v, 6, [3, 1, 2]).seats == (3, 2, 1)
    assert priority_quota(v, 6, [1, 2, 3]).seats == (4, 2, 0)
    for bad in ([1, 2], [1, 2, 2], [0, 1, 2]):
        with raises(ApportionmentError):
            priority_quota(v, 6, bad)


def test_size_rank():
    v = Instance.create([2, 7, 2, 9])
    assert size_rank(v, TiePolicy.LARGER) == [0, 1, 2, 3]
    assert [v.order[i] for i in size_rank(v, TiePolicy.INDEX)] == [3, 1, 0, 2]


def test_upper_lower_sets(nis_eight):
    v = Instance.create([5, 3, 1])
    with raises(QuotaError):
        upper_lower_sets(v, 6, Apportionment((5, 1, 0), 6))
    # an integer quota never joins U
    with raises(QuotaError):
        upper_lower_sets(v, 6, Apportionment((3, 3, 0), 6))
    sets = upper_lower_sets(nis_eight, 70, hamilton(nis_eight, 70))
    assert sets.upper == {1, 2, 3, 4}
    assert sets.lower == {0, 5, 6, 7}


@mark.parametrize("method", sorted(QUOTA_METHODS))
def test_zero_house(method, nis_five):
    assert QUOTA_METHODS[method](nis_five, 0) == Apportionment.zero(5)


@given(populations, st.integers(0, 300), st.sampled_from(sorted(QUOTA_METHODS)))
def test_house_size(pops, house, method):
    h = QUOTA_METHODS[method](Instance.create(pops), house)
    assert sum(h.seats) == house
    assert min(h.seats) >= 0


@given(populations, st.integers(0, 300), st.sampled_from(["hamilton", "lar", "sml"]))
def test_within_quota(pops, house, method):
    v = Instance.create(pops)
    h = QUOTA_METHODS[method](v, house)
    q = quotas(v, house)
    assert all(lo <= k <= up for lo, k, up in zip(q.floors, h.seats, q.ceilings))
    sets = upper_lower_sets(v, house, h)
    assert len(sets.upper) == house - sum(q.floors)
    assert sets.lower | sets.upper == set(range(v.count))


@given(populations, st.integers(0, 300))
def test_nearest_excess_bound(pops, house):
    v = Instance.create(pops)
    rounded, excess = nearest_split(v, house)
    assert abs(excess) <= v.count / 2
    q = quotas(v, house).values
    assert all(abs(k - x) <= Fraction(1, 2) for k, x in zip(rounded, q))


@given(populations, st.integers(1, 300), st.sampled_from(sorted(QUOTA_METHODS)))
def test_scale_invariant(pops, house, method):
    """multiplying every population by a constant changes nothing"""
    run = QUOTA_METHODS[method]
    scaled = Instance.create([7 * x for x in pops])
    assert run(Instance.create(pops), house) == run(scaled, house)
