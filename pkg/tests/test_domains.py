import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvdecomp import Event, Failure, Store
from nvdecomp.domains import FIXED, HOLE_REMOVED, MAX_CHANGED, MIN_CHANGED


def test_new_var_interval():
    s = Store()
    v = s.new_var(1, 5)
    assert (s.min(v), s.max(v), s.size(v)) == (1, 5, 5)
    assert s.holes(v) == []


def test_singleton_var_is_fixed():
    s = Store()
    v = s.new_var(3, 3)
    assert s.is_fixed(v) and s.value(v) == 3


def test_boolean_var():
    s = Store()
    v = s.new_var(0, 1)
    assert s.values(v) == [0, 1]


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        Store().new_var(2, 1)


def test_var_ids_are_dense():
    s = Store()
    assert [s.new_var(0, 1) for _ in range(4)] == [0, 1, 2, 3]


def test_set_min():
    s = Store()
    v = s.new_var(1, 5)
    ev = s.set_min(v, 3)
    assert (s.min(v), s.max(v)) == (3, 5)
    assert ev & MIN_CHANGED and not ev & FIXED


def test_set_min_skips_hole():
    s = Store()
    v = s.new_var(1, 5)
    s.remove_value(v, 3)
    s.set_min(v, 3)
    assert s.values(v) == [4, 5]


def test_set_min_past_max_fails():
    s = Store()
    v = s.new_var(1, 5)
    with pytest.raises(Failure):
        s.set_min(v, 6)


def test_set_min_below_is_noop():
    s = Store()
    v = s.new_var(1, 5)
    assert s.set_min(v, 0) == 0


def test_set_max():
    s = Store()
    v = s.new_var(1, 5)
    s.set_max(v, 2)
    assert s.values(v) == [1, 2]


def test_set_max_onto_hole_fixes():
    s = Store()
    v = s.new_var(2, 4)
    s.remove_value(v, 3)
    ev = s.set_max(v, 3)
    assert s.values(v) == [2]
    assert ev & FIXED and ev & MAX_CHANGED


def test_set_max_below_min_fails():
    s = Store()
    v = s.new_var(1, 5)
    with pytest.raises(Failure):
        s.set_max(v, 0)


def test_remove_interior_value_makes_hole():
    s = Store()
    v = s.new_var(1, 3)
    ev = s.remove_value(v, 2)
    assert ev == HOLE_REMOVED
    assert (s.min(v), s.max(v), s.holes(v)) == (1, 3, [2])


def test_remove_bounds_until_fixed():
    s = Store()
    v = s.new_var(1, 3)
    s.remove_value(v, 1)
    ev = s.remove_value(v, 2)
    assert s.values(v) == [3]
    assert ev & FIXED


def test_remove_last_value_fails():
    s = Store()
    v = s.new_var(4, 4)
    with pytest.raises(Failure):
        s.remove_value(v, 4)


def test_remove_interval_value_by_value():
    s = Store()
    x = s.new_var(1, 10)
    for a in range(5, 10):
        s.remove_value(x, a)
    assert s.values(x) == [1, 2, 3, 4, 10]


def test_event_flags_are_int_flags():
    assert Event(MIN_CHANGED | MAX_CHANGED) == Event.MIN_CHANGED | Event.MAX_CHANGED


def test_push_pop_restores_min():
    s = Store()
    v = s.new_var(1, 5)
    s.push_state()
    s.set_min(v, 4)
    s.pop_state()
    assert s.values(v) == [1, 2, 3, 4, 5]


def test_push_pop_restores_hole():
    s = Store()
    v = s.new_var(1, 5)
    s.push_state()
    s.remove_value(v, 3)
    s.pop_state()
    assert s.holes(v) == []


def test_nested_push_pop():
    s = Store()
    v = s.new_var(1, 9)
    s.push_state()
    s.set_min(v, 3)
    s.push_state()
    s.set_max(v, 4)
    s.pop_state()
    assert s.values(v) == list(range(3, 10))
    s.pop_state()
    assert s.values(v) == list(range(1, 10))


def test_pop_without_push_rejected():
    with pytest.raises(RuntimeError):
        Store().pop_state()


def test_cells_are_restored():
    s = Store()
    cells = [0, 0]
    s.set_cell(cells, 0, 5)
    s.push_state()
    s.set_cell(cells, 0, 7)
    s.set_cell(cells, 1, 1)
    s.pop_state()
    assert cells == [5, 0]


ops = st.lists(
    st.tuples(st.sampled_from(["min", "max", "rm", "push", "pop"]), st.integers(0, 3), st.integers(-2, 12)),
    max_size=40,
)


@settings(max_examples=300, deadline=None)
@given(ops)
def test_random_operations_keep_invariants_and_round_trip(seq):
    s = Store()
    vs = [s.new_var(0, 10) for _ in range(4)]
    saved = []
    sizes = []
    for op, i, b in seq:
        v = vs[i]
        if op == "push":
            s.push_state()
            saved.append(s.snapshot())
            sizes.append([s.size(x) for x in vs])
            continue
        if op == "pop":
            if saved:
                s.pop_state()
                assert s.snapshot() == saved.pop()
                sizes.pop()
            continue
        before = s.size(v)
        lo, hi = s.min(v), s.max(v)
        try:
            if op == "min":
                ev = s.set_min(v, b)
            elif op == "max":
                ev = s.set_max(v, b)
            else:
                ev = s.remove_value(v, b)
        except Failure:
            # a failed update must leave the domain usable for pop
            continue
        assert s.size(v) <= before
        assert s.contains(v, s.min(v)) and s.contains(v, s.max(v))
        assert bool(ev & MIN_CHANGED) == (s.min(v) != lo)
        assert bool(ev & MAX_CHANGED) == (s.max(v) != hi)
        assert bool(ev & FIXED) == (s.is_fixed(v) and lo != hi)
        if ev == HOLE_REMOVED:
            assert (s.min(v), s.max(v)) == (lo, hi)
        if sizes:
            assert all(s.size(x) <= m for x, m in zip(vs, sizes[-1]))
    while saved:
        s.pop_state()
        assert s.snapshot() == saved.pop()
