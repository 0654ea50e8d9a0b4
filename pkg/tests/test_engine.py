import logging
import random

import pytest
from brute import full_state, random_snapshot, run_builder
from hypothesis import given, settings
from hypothesis import strategies as st

from nvdecomp import (
    AtMostVariant,
    Model,
    Outcome,
    Propagator,
    build_atleast_pyramid,
    build_atmost_pyramid,
    build_nvalue,
    build_simple_occurrence,
)
from nvdecomp.domains import BOUNDS, FIXED, MAX_CHANGED, MIN_CHANGED
from nvdecomp.propagators import Clause, LeLink, TernarySum, neg, pos


class Counting(Propagator):
    """Records its runs; prunes nothing."""

    def __init__(self, v):
        self.v = v
        self.runs = 0

    def wakes(self):
        return [(self.v, FIXED)]

    def propagate(self, m):
        self.runs += 1
        return False


def test_empty_model_reaches_fixpoint():
    assert Model().propagate() is Outcome.FIXPOINT


def test_registration_schedules_once():
    m = Model()
    v = m.new_var(0, 3)
    p = Counting(v)
    m.post(p)
    m.propagate()
    m.propagate()
    assert p.runs == 1


def test_empty_wake_list_rejected():
    m = Model()
    m.new_var(0, 1)
    with pytest.raises(ValueError):
        m.register(Counting(0), [])


def test_unknown_variable_rejected():
    with pytest.raises(ValueError):
        Model().register(Counting(3), [(3, FIXED)])


def test_wakes_only_on_subscribed_events():
    m = Model()
    v = m.new_var(0, 3)
    p = Counting(v)
    m.post(p)
    m.propagate()
    m.set_min(v, 1)
    m.propagate()
    assert p.runs == 1
    m.fix(v, 2)
    m.propagate()
    assert p.runs == 2


def test_ternary_sum_registration():
    m = Model()
    a, b, c = m.new_var(0, 10), m.new_var(1, 1), m.new_var(1, 1)
    m.post(TernarySum(a, b, c))
    assert m.propagate() is Outcome.FIXPOINT
    assert m.values(a) == [2]


def test_true_clause_is_subsumed_at_registration():
    m = Model()
    b = m.new_var(1, 1)
    c = m.new_var(0, 1)
    p = Clause([pos(b), neg(c)])
    m.post(p)
    m.propagate()
    assert m.is_subsumed(p)


def test_contradictory_clauses_fail():
    m = Model()
    x = m.new_var(1, 2)
    m.post(Clause([neg(x)]))
    assert m.propagate() is Outcome.FAILED


def test_subsumption_undone_on_pop():
    m = Model()
    a, b = m.new_var(0, 5), m.new_var(0, 5)
    p = LeLink(a, b)
    m.post(p)
    m.propagate()
    m.push_state()
    m.set_max(a, 2)
    m.set_min(b, 3)
    m.set_min(a, 1)
    m.propagate()
    assert m.is_subsumed(p)
    m.pop_state()
    assert not m.is_subsumed(p)
    m.set_min(a, 4)
    m.propagate()
    assert m.min(b) == 4


def test_failure_clears_queue():
    m = Model()
    x = m.new_var(0, 3)
    y = m.new_var(0, 3)
    m.post(LeLink(x, y))
    m.propagate()
    m.push_state()
    m.set_min(x, 3)
    m.set_max(y, 2)
    assert m.propagate() is Outcome.FAILED
    m.pop_state()
    assert m.propagate() is Outcome.FIXPOINT


def test_trace_logs_prunings(caplog):
    m = Model(trace=True)
    a, b = m.new_var(0, 5, "a"), m.new_var(0, 2, "b")
    m.post(LeLink(a, b))
    with caplog.at_level(logging.DEBUG, logger="nvdecomp.engine"):
        m.propagate()
    assert any("a ->" in r.getMessage() for r in caplog.records)


BUILDERS = [
    (build_atmost_pyramid, {"variant": AtMostVariant.NAIVE_BC}),
    (build_atmost_pyramid, {"variant": AtMostVariant.FAST_BC}),
    (build_atmost_pyramid, {"variant": AtMostVariant.FAST_RC}),
    (build_atleast_pyramid, {}),
    (build_nvalue, {"variant": AtMostVariant.FAST_BC}),
    (build_simple_occurrence, {"relation": "eq"}),
]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(range(len(BUILDERS))), st.integers(0, 2**16))
def test_fixpoint_is_independent_of_queue_order(seed, which, shuffle):
    builder, kw = BUILDERS[which]
    snap = random_snapshot(random.Random(seed), max_n=5, max_d=5)
    fifo = full_state(builder, snap, **kw)
    shuffled = full_state(builder, snap, shuffle_seed=shuffle, **kw)
    assert fifo == shuffled


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(range(len(BUILDERS))))
def test_rerunning_after_fixpoint_prunes_nothing(seed, which):
    builder, kw = BUILDERS[which]
    snap = random_snapshot(random.Random(seed), max_n=5, max_d=5)
    m = Model()
    xs = [m.new_var_values(d) for d in snap.domains]
    n = m.new_var_values(snap.n_domain)
    builder(m, xs, n, **kw)
    if m.propagate() is Outcome.FAILED:
        return
    before = m.prunings
    for p in m.propagators:
        if not m.is_subsumed(p):
            m._enqueue(p)
    assert m.propagate() is Outcome.FIXPOINT
    assert m.prunings == before


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(range(len(BUILDERS))), st.data())
def test_fixpoint_is_monotone(seed, which, data):
    builder, kw = BUILDERS[which]
    rng = random.Random(seed)
    snap = random_snapshot(rng, max_n=5, max_d=5)
    # shrink one X domain to a nonempty subset
    i = data.draw(st.integers(0, len(snap.domains) - 1))
    sub = data.draw(st.sets(st.sampled_from(sorted(snap.domains[i])), min_size=1))
    smaller = type(snap).of([sub if k == i else d for k, d in enumerate(snap.domains)], snap.n_domain)
    # introduced variables depend on the value universe; compare X and N only
    big = run_builder(builder, snap, **kw)
    small = run_builder(builder, smaller, **kw)
    if small is None:
        return
    assert big is not None
    for d_small, d_big in zip(small.domains + (small.n_domain,), big.domains + (big.n_domain,)):
        assert d_small <= d_big


def test_event_sets_reach_interested_propagators():
    seen = []

    class Listener(Propagator):
        wants_events = True

        def __init__(self, v):
            self.v = v

        def wakes(self):
            return [(self.v, BOUNDS)]

        def propagate(self, m):
            seen.append(dict(self.events))
            return False

    m = Model()
    v = m.new_var(0, 9)
    m.post(Listener(v))
    m.propagate()
    m.set_min(v, 3)
    m.set_max(v, 3)
    m.propagate()
    # both updates arrive coalesced in one run
    assert list(seen[-1]) == [v]
    assert seen[-1][v] == MIN_CHANGED | MAX_CHANGED | FIXED
