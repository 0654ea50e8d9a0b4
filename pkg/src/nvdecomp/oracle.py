"""Brute-force reference closures for NValue, AtMostNValue and AtLeastNValue.

Supports are searched over ranges, not domains: a tuple is a bound support
when every variable takes a value between its current min and max. Holes in
the domains are only relevant for where a pruned bound lands.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

__all__ = [
    "BudgetExceeded",
    "ConstraintKind",
    "InstanceSnapshot",
    "card_down",
    "card_up",
    "card_down_brute",
    "card_up_brute",
    "bc_closure",
    "rc_closure",
    "lemma1_check",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10 ** 7

Range = Tuple[int, int]


class BudgetExceeded(Exception):
    pass


class ConstraintKind(str, enum.Enum):
    NVALUE = "nvalue"
    ATMOST = "atmost"
    ATLEAST = "atleast"

    def holds(self, card: int, n: int) -> bool:
        if self is ConstraintKind.NVALUE:
            return card == n
        if self is ConstraintKind.ATMOST:
            return card <= n
        return n <= card


@dataclass(frozen=True)
class InstanceSnapshot:
    domains: Tuple[FrozenSet[int], ...]
    n_domain: FrozenSet[int]

    @classmethod
    def of(cls, domains: Iterable[Iterable[int]], n_domain: Iterable[int]) -> "InstanceSnapshot":
        snap = cls(tuple(frozenset(d) for d in domains), frozenset(n_domain))
        if any(not d for d in snap.domains) or not snap.n_domain:
            raise ValueError("empty domain in snapshot")
        return snap

    @property
    def ranges(self) -> List[Range]:
        return [(min(d), max(d)) for d in self.domains]

    def __str__(self) -> str:
        rows = [f"X{i + 1}={sorted(d)}" for i, d in enumerate(self.domains)]
        return " ".join(rows) + f" N={sorted(self.n_domain)}"


# -- cardinality bounds -----------------------------------------------------


def card_down(ranges: Sequence[Range]) -> int:
    """Fewest distinct values over assignments within ``ranges``.

    Equals the largest number of pairwise disjoint ranges, found greedily by
    increasing upper end.
    """
    if not ranges:
        raise ValueError("no ranges")
    count = 0
    last = None
    for lo, hi in sorted(ranges, key=lambda r: (r[1], r[0])):
        if last is None or lo > last:
            count += 1
            last = hi
    return count


def card_up(ranges: Sequence[Range]) -> int:
    """Most distinct values over assignments within ``ranges``.

    Size of a maximum matching in the variable/value graph; for intervals the
    greedy that gives each range (by increasing upper end) its smallest free
    value is optimal.
    """
    if not ranges:
        raise ValueError("no ranges")
    used = set()
    for lo, hi in sorted(ranges, key=lambda r: (r[1], r[0])):
        v = lo
        while v in used:
            v += 1
        if v <= hi:
            used.add(v)
    return len(used)


def _product_size(ranges: Sequence[Range]) -> int:
    size = 1
    for lo, hi in ranges:
        size *= hi - lo + 1
    return size


def card_down_brute(ranges: Sequence[Range], budget: int = DEFAULT_BUDGET) -> int:
    if _product_size(ranges) > budget:
        raise BudgetExceeded
    return min(len(set(t)) for t in itertools.product(*(range(a, b + 1) for a, b in ranges)))


def card_up_brute(ranges: Sequence[Range], budget: int = DEFAULT_BUDGET) -> int:
    if _product_size(ranges) > budget:
        raise BudgetExceeded
    return max(len(set(t)) for t in itertools.product(*(range(a, b + 1) for a, b in ranges)))


# -- closures ---------------------------------------------------------------


def _achievable(ranges: Sequence[Range], budget: int) -> List[dict]:
    """For each variable and value in its range, the bitset of cards reached by
    assignments of the ranges that give the variable that value."""
    total = _product_size(ranges)
    if total > budget:
        raise BudgetExceeded(f"{total} tuples exceed budget {budget}")
    seen: List[dict] = [dict() for _ in ranges]
    for t in itertools.product(*(range(a, b + 1) for a, b in ranges)):
        bit = 1 << len(set(t))
        for i, a in enumerate(t):
            s = seen[i]
            s[a] = s.get(a, 0) | bit
    return seen


def _n_ok(kind: ConstraintKind, cards: int, n_lo: int, n_hi: int) -> bool:
    """Some card in the bitset ``cards`` is compatible with some N in [n_lo, n_hi]."""
    for c in range(cards.bit_length()):
        if not (cards >> c) & 1:
            continue
        if kind is ConstraintKind.NVALUE and n_lo <= c <= n_hi:
            return True
        if kind is ConstraintKind.ATMOST and c <= n_hi:
            return True
        if kind is ConstraintKind.ATLEAST and c >= n_lo:
            return True
    return False


def _closure(kind: ConstraintKind, snap: InstanceSnapshot, budget: int, every_value: bool):
    kind = ConstraintKind(kind)
    doms = [sorted(d) for d in snap.domains]
    ndom = sorted(snap.n_domain)
    while True:
        if any(not d for d in doms) or not ndom:
            return None
        ranges = [(d[0], d[-1]) for d in doms]
        seen = _achievable(ranges, budget)
        all_cards = 0
        for v in seen[0].values() if seen else ():
            all_cards |= v
        n_lo, n_hi = ndom[0], ndom[-1]
        changed = False

        def ok_x(i: int, a: int) -> bool:
            return _n_ok(kind, seen[i].get(a, 0), n_lo, n_hi)

        def ok_n(p: int) -> bool:
            return _n_ok(kind, all_cards, p, p)

        new_doms = []
        for i, d in enumerate(doms):
            nd = _shrink(d, lambda a: ok_x(i, a), every_value)
            changed |= nd != d
            new_doms.append(nd)
        nn = _shrink(ndom, ok_n, every_value)
        changed |= nn != ndom
        doms, ndom = new_doms, nn
        if not changed:
            return InstanceSnapshot(tuple(frozenset(d) for d in doms), frozenset(ndom))


def _shrink(values: List[int], ok, every_value: bool) -> List[int]:
    if every_value:
        return [a for a in values if ok(a)]
    lo, hi = 0, len(values)
    while lo < hi and not ok(values[lo]):
        lo += 1
    while hi > lo and not ok(values[hi - 1]):
        hi -= 1
    return values[lo:hi]


def bc_closure(
    kind: ConstraintKind, snap: InstanceSnapshot, budget: int = DEFAULT_BUDGET
) -> Optional[InstanceSnapshot]:
    """Largest bound-consistent sub-snapshot, or ``None`` when disentailed.

    Bounds without a bound support are removed (moving to the next domain
    member) until every bound of every variable, N included, is supported.
    """
    return _closure(kind, snap, budget, every_value=False)


def rc_closure(
    kind: ConstraintKind, snap: InstanceSnapshot, budget: int = DEFAULT_BUDGET
) -> Optional[InstanceSnapshot]:
    """Like :func:`bc_closure` but every domain value needs a bound support."""
    return _closure(kind, snap, budget, every_value=True)


def lemma1_check(snap: InstanceSnapshot, budget: int = DEFAULT_BUDGET) -> bool:
    """If dom(N) lies within [card_down, card_up] then both bounds of N have a
    bound support for NValue over the current ranges.

    Only N's own bounds are checked. Iterating the closure can still empty an
    X domain with holes, and with it N, which the premise does not rule out.
    """
    ranges = snap.ranges
    lo, hi = card_down(ranges), card_up(ranges)
    if not all(lo <= p <= hi for p in snap.n_domain):
        return True
    seen = _achievable(ranges, budget)
    cards = 0
    for bits in seen[0].values():
        cards |= bits
    return all((cards >> p) & 1 for p in (min(snap.n_domain), max(snap.n_domain)))
