import random

import pytest
from brute import random_snapshot
from hypothesis import given, settings
from hypothesis import strategies as st

from nvdecomp.oracle import (
    BudgetExceeded,
    ConstraintKind,
    InstanceSnapshot,
    bc_closure,
    card_down,
    card_down_brute,
    card_up,
    card_up_brute,
    lemma1_check,
    rc_closure,
)

RUNNING = [{1, 2, 3, 5}, {2}, {2, 3, 4}, {4}, {3, 4}]
RUNNING_RANGES = [(1, 5), (2, 2), (2, 4), (4, 4), (3, 4)]


def test_card_down_running_example():
    assert card_down(RUNNING_RANGES) == 2


def test_card_up_running_example():
    assert card_up(RUNNING_RANGES) == 4


def test_card_of_identical_ranges():
    assert card_down([(2, 5)] * 4) == 1
    assert card_up([(3, 3)] * 4) == 1


def test_card_of_disjoint_singletons():
    rs = [(v, v) for v in range(1, 7)]
    assert card_down(rs) == card_up(rs) == 6


def test_card_up_nested_prefixes():
    assert card_up([(1, 1), (1, 2), (1, 3)]) == 3


def test_card_rejects_empty_input():
    with pytest.raises(ValueError):
        card_down([])
    with pytest.raises(ValueError):
        card_up([])


def test_brute_force_budget():
    with pytest.raises(BudgetExceeded):
        card_down_brute([(1, 10)] * 4, budget=1000)
    with pytest.raises(BudgetExceeded):
        bc_closure("nvalue", InstanceSnapshot.of([range(1, 11)] * 4, {1}), budget=1000)


ranges = st.lists(
    st.tuples(st.integers(1, 8), st.integers(0, 4)).map(lambda t: (t[0], t[0] + t[1])),
    min_size=1,
    max_size=6,
)


@settings(max_examples=400, deadline=None)
@given(ranges)
def test_greedy_cards_match_enumeration(rs):
    lo, hi = card_down(rs), card_up(rs)
    assert lo == card_down_brute(rs)
    assert hi == card_up_brute(rs)
    span = max(b for _, b in rs) - min(a for a, _ in rs) + 1
    assert 1 <= lo <= hi <= min(len(rs), span)


def test_nvalue_closure_running_example():
    got = bc_closure(ConstraintKind.NVALUE, InstanceSnapshot.of(RUNNING, {1, 2, 5}))
    assert got == InstanceSnapshot.of([{2}, {2}, {2, 3, 4}, {4}, {4}], {2})


def test_nvalue_closure_disentailed():
    assert bc_closure(ConstraintKind.NVALUE, InstanceSnapshot.of([{1, 2}, {3, 4}], {1})) is None


def test_atmost_with_loose_n_keeps_x():
    snap = InstanceSnapshot.of(RUNNING, range(1, 6))
    got = bc_closure(ConstraintKind.ATMOST, snap)
    assert got.domains == snap.domains
    # only N's lower bound moves, up to the two values that must be used
    assert got.n_domain == {2, 3, 4, 5}


def test_atmost_range_closure_running_example():
    got = rc_closure(ConstraintKind.ATMOST, InstanceSnapshot.of(RUNNING, {2}))
    # 1, 3 and 5 leave X1, 3 leaves X5 (and X3, an interior value)
    assert got == InstanceSnapshot.of([{2}, {2}, {2, 4}, {4}, {4}], {2})


@pytest.mark.parametrize("kind", list(ConstraintKind))
def test_satisfied_singletons_are_unchanged(kind):
    snap = InstanceSnapshot.of([{1}, {3}, {3}], {2})
    assert bc_closure(kind, snap) == snap
    assert rc_closure(kind, snap) == snap


def test_snapshot_rejects_empty_domain():
    with pytest.raises(ValueError):
        InstanceSnapshot.of([{1}, set()], {1})


def test_lemma1_running_example():
    assert lemma1_check(InstanceSnapshot.of(RUNNING, {2, 3, 4}))


def test_lemma1_vacuous_when_n_outside_cards():
    assert lemma1_check(InstanceSnapshot.of([{1}, {2}], {0}))


CLOSURE_SWEEP = settings(max_examples=150, deadline=None)
seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(list(ConstraintKind))


@CLOSURE_SWEEP
@given(seeds, kinds)
def test_closures_are_idempotent_and_nested(seed, kind):
    snap = random_snapshot(random.Random(seed), max_n=4, max_d=4)
    bc = bc_closure(kind, snap)
    rc = rc_closure(kind, snap)
    if bc is None:
        assert rc is None
        return
    assert bc_closure(kind, bc) == bc
    if rc is not None:
        assert rc_closure(kind, rc) == rc
        for a, b in zip(rc.domains + (rc.n_domain,), bc.domains + (bc.n_domain,)):
            assert a <= b


@CLOSURE_SWEEP
@given(seeds)
def test_nvalue_closure_is_mutual_fixpoint_of_halves(seed):
    snap = random_snapshot(random.Random(seed), max_n=4, max_d=4)
    cur = snap
    while cur is not None:
        nxt = bc_closure(ConstraintKind.ATMOST, cur)
        nxt = nxt and bc_closure(ConstraintKind.ATLEAST, nxt)
        if nxt == cur:
            break
        cur = nxt
    assert cur == bc_closure(ConstraintKind.NVALUE, snap)


@settings(max_examples=1000, deadline=None)
@given(seeds)
def test_lemma1_has_no_counterexample(seed):
    assert lemma1_check(random_snapshot(random.Random(seed), max_n=4, max_d=5))
