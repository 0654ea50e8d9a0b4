"""Trailed integer domains.

Each variable's domain is stored as a Python int used as a bitset, relative to
the variable's initial lower bound, with the current bounds cached alongside.
All mutations are recorded on a trail so that :meth:`Store.pop_state` restores
the exact state saved by the matching :meth:`Store.push_state`.
"""

from __future__ import annotations

import enum
from typing import Iterable, List, Optional, Tuple

__all__ = [
    "Event",
    "Failure",
    "Store",
    "MIN_CHANGED",
    "MAX_CHANGED",
    "FIXED",
    "HOLE_REMOVED",
    "BOUNDS",
    "ANY",
]

MIN_CHANGED = 1
MAX_CHANGED = 2
FIXED = 4
HOLE_REMOVED = 8
BOUNDS = MIN_CHANGED | MAX_CHANGED
ANY = MIN_CHANGED | MAX_CHANGED | FIXED | HOLE_REMOVED


class Event(enum.IntFlag):
    MIN_CHANGED = MIN_CHANGED
    MAX_CHANGED = MAX_CHANGED
    FIXED = FIXED
    HOLE_REMOVED = HOLE_REMOVED


class Failure(Exception):
    """A domain operation would leave a variable with no value."""

    def __init__(self, var: int = -1):
        super().__init__(var)
        self.var = var


class Store:
    """Variables, their domains and the trail.

    Mutators return the coalesced event bits for the change (0 when nothing
    changed) and raise :class:`Failure` without touching the domain when the
    result would be empty.
    """

    def __init__(self) -> None:
        self._lo: List[int] = []
        self._hi: List[int] = []
        self._mask: List[int] = []
        self._off: List[int] = []
        self._names: List[Optional[str]] = []
        self._trail: List[Tuple[int, int, int, int]] = []
        self._marks: List[int] = []
        # (list, index, old value) for propagator-owned reversible state
        self._cells: List[tuple] = []
        self._cell_marks: List[int] = []

    # -- construction -----------------------------------------------------

    def new_var(self, lo: int, hi: int, name: Optional[str] = None) -> int:
        if lo > hi:
            raise ValueError(f"empty domain [{lo}, {hi}]")
        v = len(self._lo)
        self._lo.append(lo)
        self._hi.append(hi)
        self._off.append(lo)
        self._mask.append((1 << (hi - lo + 1)) - 1)
        self._names.append(name)
        self._on_new_var(v)
        return v

    def new_var_values(self, values: Iterable[int], name: Optional[str] = None) -> int:
        vals = sorted(set(values))
        if not vals:
            raise ValueError("empty domain")
        v = self.new_var(vals[0], vals[-1], name)
        mask = 0
        for a in vals:
            mask |= 1 << (a - vals[0])
        self._mask[v] = mask
        return v

    def _on_new_var(self, v: int) -> None:
        pass

    # -- inspection -------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self._lo)

    def name(self, v: int) -> str:
        return self._names[v] or f"v{v}"

    def min(self, v: int) -> int:
        return self._lo[v]

    def max(self, v: int) -> int:
        return self._hi[v]

    def size(self, v: int) -> int:
        return self._mask[v].bit_count()

    def is_fixed(self, v: int) -> bool:
        return self._lo[v] == self._hi[v]

    def value(self, v: int) -> int:
        if self._lo[v] != self._hi[v]:
            raise ValueError(f"{self.name(v)} is not fixed")
        return self._lo[v]

    def contains(self, v: int, a: int) -> bool:
        k = a - self._off[v]
        return k >= 0 and (self._mask[v] >> k) & 1 == 1

    def values(self, v: int) -> List[int]:
        off = self._off[v]
        mask = self._mask[v]
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1 + off)
            mask ^= low
        return out

    def holes(self, v: int) -> List[int]:
        lo, hi = self._lo[v], self._hi[v]
        return [a for a in range(lo + 1, hi) if not self.contains(v, a)]

    def mask(self, v: int) -> int:
        """Raw bitset; bit ``k`` stands for value ``offset(v) + k``."""
        return self._mask[v]

    def offset(self, v: int) -> int:
        return self._off[v]

    def domain(self, v: int) -> Tuple[int, ...]:
        return tuple(self.values(v))

    def snapshot(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.domain(v) for v in range(len(self._lo)))

    def describe(self, v: int) -> str:
        lo, hi = self._lo[v], self._hi[v]
        if lo == hi:
            return str(lo)
        holes = self.holes(v)
        if not holes:
            return f"[{lo},{hi}]"
        return "{" + ",".join(map(str, self.values(v))) + "}"

    # -- mutation ---------------------------------------------------------

    def _update(self, v: int, mask: int) -> int:
        old = self._mask[v]
        if mask == old:
            return 0
        if not mask:
            raise Failure(v)
        off = self._off[v]
        olo = self._lo[v]
        ohi = self._hi[v]
        lo = (mask & -mask).bit_length() - 1 + off
        hi = mask.bit_length() - 1 + off
        if self._marks:
            self._trail.append((v, old, olo, ohi))
        self._mask[v] = mask
        self._lo[v] = lo
        self._hi[v] = hi
        ev = 0
        if lo != olo:
            ev = MIN_CHANGED
        if hi != ohi:
            ev |= MAX_CHANGED
        if lo == hi:
            ev |= FIXED
        removed = (old & ~mask) >> (lo - off)
        if removed & ((1 << (hi - lo)) - 1):
            ev |= HOLE_REMOVED
        self._notify(v, ev)
        return ev

    def _notify(self, v: int, ev: int) -> None:
        pass

    def set_min(self, v: int, b: int) -> int:
        if b <= self._lo[v]:
            return 0
        if b > self._hi[v]:
            raise Failure(v)
        return self._update(v, self._mask[v] & (-1 << (b - self._off[v])))

    def set_max(self, v: int, b: int) -> int:
        if b >= self._hi[v]:
            return 0
        if b < self._lo[v]:
            raise Failure(v)
        return self._update(v, self._mask[v] & ((1 << (b - self._off[v] + 1)) - 1))

    def fix(self, v: int, a: int) -> int:
        k = a - self._off[v]
        if k < 0 or not (self._mask[v] >> k) & 1:
            raise Failure(v)
        return self._update(v, 1 << k)

    def remove_value(self, v: int, a: int) -> int:
        k = a - self._off[v]
        if k < 0 or not (self._mask[v] >> k) & 1:
            return 0
        return self._update(v, self._mask[v] & ~(1 << k))

    def remove_range(self, v: int, l: int, u: int) -> int:
        """Remove every value of ``[l, u]`` from ``v``."""
        lo, hi = self._lo[v], self._hi[v]
        if u < lo or l > hi:
            return 0
        off = self._off[v]
        l = max(l, lo) - off
        u = min(u, hi) - off
        block = ((1 << (u - l + 1)) - 1) << l
        return self._update(v, self._mask[v] & ~block)

    def intersect_mask(self, v: int, mask: int) -> int:
        """Keep only the values whose bits are set in ``mask`` (same offset)."""
        return self._update(v, self._mask[v] & mask)

    # -- trail ------------------------------------------------------------

    @property
    def level(self) -> int:
        return len(self._marks)

    def set_cell(self, cells: list, i: int, value) -> None:
        """Assign ``cells[i] = value`` so that :meth:`pop_state` undoes it."""
        if self._marks:
            self._cells.append((cells, i, cells[i]))
        cells[i] = value

    def push_state(self) -> None:
        self._marks.append(len(self._trail))
        self._cell_marks.append(len(self._cells))

    def pop_state(self) -> None:
        if not self._marks:
            raise RuntimeError("pop_state without matching push_state")
        mark = self._marks.pop()
        trail = self._trail
        mask, lo, hi = self._mask, self._lo, self._hi
        while len(trail) > mark:
            v, m, a, b = trail.pop()
            mask[v] = m
            lo[v] = a
            hi[v] = b
        mark = self._cell_marks.pop()
        cells = self._cells
        while len(cells) > mark:
            arr, i, old = cells.pop()
            arr[i] = old

