"""Primitive constraints used by the decompositions.

Every propagator enforces bound consistency on its own relation unless noted
(``RC`` mode of :class:`IntervalMembership`, :class:`DomainBitmap` and the
arc-consistent :class:`ForbiddenPairs` table also prune interior values).
"""

from __future__ import annotations

from typing import Dict, Iterable, List, NamedTuple, Sequence, Tuple

from .domains import ANY, BOUNDS, FIXED, HOLE_REMOVED, MAX_CHANGED, MIN_CHANGED, Failure
from .engine import Model, Propagator

__all__ = [
    "BC",
    "RC",
    "Lit",
    "pos",
    "neg",
    "positive_count",
    "IntervalMembership",
    "MonotoneLeChannel",
    "Clause",
    "IntervalSupportClauses",
    "TernarySum",
    "LinearSumEq",
    "LinearCountExcess",
    "LeLink",
    "UpperBoundComplement",
    "DomainBitmap",
    "ValueFlags",
    "UnusedValues",
    "ForbiddenPairs",
    "reified_interval_membership",
    "monotone_le_channel",
    "clause",
    "ternary_sum",
    "linear_sum_eq",
    "linear_count_excess",
    "le_link",
    "upper_bound_complement",
    "domain_bitmap",
]

BC = "BC"
RC = "RC"


class Lit(NamedTuple):
    """``var > 0`` when ``positive`` else ``var == 0``; var must be nonnegative.

    On a 0/1 variable these are the two phases ``var = 1`` / ``var = 0``; on a
    counter they give the ``count > 0`` atom used by the interval clauses.
    """

    var: int
    positive: bool


def pos(v: int) -> Lit:
    return Lit(v, True)


def neg(v: int) -> Lit:
    return Lit(v, False)


positive_count = pos


class IntervalMembership(Propagator):
    """``a = 1  <=>  x in [l, u]`` for a 0/1 variable ``a``."""

    label = "member"

    def __init__(self, a: int, x: int, l: int, u: int, mode: str = BC):
        if l > u:
            raise ValueError("empty interval")
        if mode not in (BC, RC):
            raise ValueError(f"unknown mode {mode!r}")
        self.a, self.x, self.l, self.u, self.mode = a, x, l, u, mode

    def wakes(self):
        return [(self.a, FIXED), (self.x, BOUNDS)]

    def propagate(self, m: Model):
        a, x, l, u = self.a, self.x, self.l, self.u
        lo, hi = m._lo, m._hi
        if hi[a] <= 0:
            if self.mode == RC:
                m.remove_range(x, l, u)
                return True
            while l <= lo[x] <= u:
                m.set_min(x, u + 1)
            while l <= hi[x] <= u:
                m.set_max(x, l - 1)
            return hi[x] < l or lo[x] > u
        if lo[a] >= 1:
            if lo[x] < l:
                m.set_min(x, l)
            if hi[x] > u:
                m.set_max(x, u)
            return True
        if hi[x] < l or lo[x] > u:
            m.set_max(a, 0)
            return True
        if l <= lo[x] and hi[x] <= u:
            m.set_min(a, 1)
            return True
        return False


class MonotoneLeChannel(Propagator):
    """``z[k] = 1  <=>  x <= start + k`` for every threshold ``k``."""

    label = "le-channel"
    band = 0

    def __init__(self, x: int, z: Sequence[int], start: int = 1):
        self.x, self.z, self.start = x, list(z), start

    def wakes(self):
        return [(self.x, BOUNDS)] + [(zj, FIXED) for zj in self.z]

    def propagate(self, m: Model):
        x, z, start = self.x, self.z, self.start
        lo, hi = m._lo, m._hi
        d = len(z)
        while True:
            # thresholds fixed by the z side
            top = -1
            low = d
            for k in range(d):
                zk = z[k]
                if hi[zk] <= 0:
                    top = k
                elif lo[zk] >= 1 and k < low:
                    low = k
            if top >= low:
                raise Failure(x)
            ev = 0
            if top >= 0 and lo[x] < start + top + 1:
                ev |= m.set_min(x, start + top + 1)
            if low < d and hi[x] > start + low:
                ev |= m.set_max(x, start + low)
            xlo, xhi = lo[x] - start, hi[x] - start
            for k in range(min(xlo, d)):
                if hi[z[k]] > 0:
                    m.set_max(z[k], 0)
            for k in range(max(xhi, 0), d):
                if lo[z[k]] < 1:
                    m.set_min(z[k], 1)
            if not ev:
                return lo[x] == hi[x]


class Clause(Propagator):
    """Disjunction of :class:`Lit` atoms with unit propagation."""

    label = "clause"

    def __init__(self, lits: Iterable[Lit]):
        self.lits = [Lit(*l) for l in lits]
        if not self.lits:
            raise ValueError("empty clause")

    def wakes(self):
        # a literal can only become false on these events
        return [(v, MAX_CHANGED if p else MIN_CHANGED) for v, p in self.lits]

    def propagate(self, m: Model):
        lo, hi = m._lo, m._hi
        open_lit = None
        n_open = 0
        for lit in self.lits:
            v, p = lit
            if p:
                if lo[v] > 0:
                    return True
                if hi[v] > 0:
                    n_open += 1
                    open_lit = lit
            else:
                if hi[v] <= 0:
                    return True
                if lo[v] <= 0:
                    n_open += 1
                    open_lit = lit
        if n_open == 0:
            raise Failure(self.lits[0].var)
        if n_open == 1:
            v, p = open_lit
            if p:
                m.set_min(v, 1)
            else:
                m.set_max(v, 0)
            return True
        return False


class IntervalSupportClauses(Propagator):
    """The clause family ``z[i][l-2] = 1  or  z[i][u-1] = 0  or  m[l, u] > 0``
    over every row ``i`` and every ``1 <= l <= u <= d`` (the ``z`` literal is
    dropped at ``l = 1`` and at ``u = d``).

    Prunes exactly as the individual :class:`Clause` propagators would, but
    keeps per row the largest threshold fixed to 0 (``p``) and the smallest
    fixed to 1 (``q``) as reversible state and only revisits the clauses whose
    literals changed.
    """

    label = "interval-clauses"
    wants_events = True

    def __init__(self, z: Sequence[Sequence[int]], m: Dict[Tuple[int, int], int], d: int):
        self.z = [list(row) for row in z]
        if any(len(row) != d for row in self.z):
            raise ValueError("each z row needs d thresholds")
        self.m, self.d = m, d
        self._zpos = {v: (i, j) for i, row in enumerate(self.z) for j, v in enumerate(row, 1)}
        self._mpos = {v: lu for lu, v in m.items()}
        self.p = [-1] * len(self.z)
        self.q = [d + 1] * len(self.z)
        self._fresh = True

    def wakes(self):
        return [(v, FIXED) for v in self._zpos] + [(v, MAX_CHANGED) for v in self._mpos]

    def propagate(self, m: Model):
        lo, hi = m._lo, m._hi
        if self._fresh:
            self._fresh = False
            for i, row in enumerate(self.z):
                top = max((j for j, v in enumerate(row, 1) if hi[v] <= 0), default=0)
                low = min((j for j, v in enumerate(row, 1) if lo[v] >= 1), default=self.d)
                self._advance(m, i, top, low)
        while self.events:
            events, self.events = self.events, {}
            tops: Dict[int, int] = {}
            lows: Dict[int, int] = {}
            zeros = []
            for v in events:
                hit = self._zpos.get(v)
                if hit is None:
                    if hi[v] <= 0:
                        zeros.append(self._mpos[v])
                    continue
                i, j = hit
                if hi[v] <= 0:
                    if j > tops.get(i, -1):
                        tops[i] = j
                elif lo[v] >= 1 and j < lows.get(i, self.d + 1):
                    lows[i] = j
            for i in tops.keys() | lows.keys():
                self._advance(m, i, tops.get(i, 0), lows.get(i, self.d))
            for l, u in zeros:
                self._emptied(m, l, u)
        return False

    def _advance(self, m: Model, i: int, top: int, low: int) -> None:
        p0, q0 = self.p[i], self.q[i]
        p1, q1 = max(p0, top, 0), min(q0, low, self.d)
        if p1 == p0 and q1 == q0:
            return
        if p1 >= q1:
            raise Failure(self.z[i][0])
        m.set_cell(self.p, i, p1)
        m.set_cell(self.q, i, q1)
        lo, hi = m._lo, m._hi
        mm, d = self.m, self.d
        force_p, force_q = p1, q1
        # clauses whose lower literal just became false
        for l in range(p0 + 2, p1 + 2):
            for u in range(l, d + 1):
                v = mm[l, u]
                if u >= q1:
                    if lo[v] < 1:
                        m.set_min(v, 1)
                elif hi[v] <= 0 and u > force_p:
                    force_p = u
        # clauses whose upper literal just became false
        for u in range(q1, min(q0, d + 1)):
            for l in range(1, min(u, p0 + 1) + 1):
                v = mm[l, u]
                if lo[v] < 1:
                    m.set_min(v, 1)
            for l in range(p1 + 2, u + 1):
                if hi[mm[l, u]] <= 0 and l - 1 < force_q:
                    force_q = l - 1
                    break
        row = self.z[i]
        if force_p > p1:
            m.set_max(row[force_p - 1], 0)
        if force_q < q1:
            m.set_min(row[force_q - 1], 1)

    def _emptied(self, m: Model, l: int, u: int) -> None:
        for i, row in enumerate(self.z):
            low_false = l <= self.p[i] + 1
            high_false = u >= self.q[i]
            if low_false and high_false:
                raise Failure(self.m[l, u])
            if low_false:
                m.set_max(row[u - 1], 0)
            elif high_false:
                m.set_min(row[l - 2], 1)


class TernarySum(Propagator):
    """``a = b + c``."""

    label = "sum3"

    def __init__(self, a: int, b: int, c: int):
        self.a, self.b, self.c = a, b, c

    def wakes(self):
        return [(self.a, BOUNDS), (self.b, BOUNDS), (self.c, BOUNDS)]

    def propagate(self, m: Model):
        a, b, c = self.a, self.b, self.c
        lo, hi = m._lo, m._hi
        while True:
            ev = 0
            t = lo[b] + lo[c]
            if t > lo[a]:
                ev |= m.set_min(a, t)
            t = hi[b] + hi[c]
            if t < hi[a]:
                ev |= m.set_max(a, t)
            t = lo[a] - hi[c]
            if t > lo[b]:
                ev |= m.set_min(b, t)
            t = hi[a] - lo[c]
            if t < hi[b]:
                ev |= m.set_max(b, t)
            t = lo[a] - hi[b]
            if t > lo[c]:
                ev |= m.set_min(c, t)
            t = hi[a] - lo[b]
            if t < hi[c]:
                ev |= m.set_max(c, t)
            if not ev:
                return lo[b] == hi[b] and lo[c] == hi[c]


class LinearSumEq(Propagator):
    """``total = sum(terms)``."""

    label = "sum"
    band = 1

    def __init__(self, total: int, terms: Sequence[int]):
        if not terms:
            raise ValueError("empty sum")
        self.total, self.terms = total, list(terms)

    def wakes(self):
        return [(self.total, BOUNDS)] + [(t, BOUNDS) for t in self.terms]

    def propagate(self, m: Model):
        total, terms = self.total, self.terms
        lo, hi = m._lo, m._hi
        while True:
            smin = 0
            smax = 0
            for t in terms:
                smin += lo[t]
                smax += hi[t]
            ev = 0
            if smin > lo[total]:
                ev |= m.set_min(total, smin)
            if smax < hi[total]:
                ev |= m.set_max(total, smax)
            tlo, thi = lo[total], hi[total]
            for t in terms:
                b = tlo - (smax - hi[t])
                if b > lo[t]:
                    ev |= m.set_min(t, b)
                b = thi - (smin - lo[t])
                if b < hi[t]:
                    ev |= m.set_max(t, b)
            if not ev:
                return smin == smax


class LinearCountExcess(Propagator):
    """``e >= sum(bits) - width`` over 0/1 ``bits``."""

    label = "excess"
    band = 1

    def __init__(self, e: int, bits: Sequence[int], width: int):
        if width < 1:
            raise ValueError("width must be positive")
        self.e, self.bits, self.width = e, list(bits), width

    def wakes(self):
        return [(self.e, MAX_CHANGED)] + [(b, MIN_CHANGED) for b in self.bits]

    def propagate(self, m: Model):
        e, bits = self.e, self.bits
        lo, hi = m._lo, m._hi
        s = 0
        for b in bits:
            s += lo[b]
        need = s - self.width
        if need > lo[e]:
            m.set_min(e, need)
        # room left for bits still at 0: max(e) + width - s
        if need >= hi[e]:
            for b in bits:
                if lo[b] < hi[b]:
                    m.set_max(b, hi[e] + self.width - (s - lo[b]))
        return False


class LeLink(Propagator):
    """``a <= b``."""

    label = "le"

    def __init__(self, a: int, b: int):
        self.a, self.b = a, b

    def wakes(self):
        return [(self.a, MIN_CHANGED), (self.b, MAX_CHANGED)]

    def propagate(self, m: Model):
        a, b = self.a, self.b
        lo, hi = m._lo, m._hi
        while True:
            ev = 0
            if hi[a] > hi[b]:
                ev |= m.set_max(a, hi[b])
            if lo[b] < lo[a]:
                ev |= m.set_min(b, lo[a])
            if not ev:
                return hi[a] <= lo[b]


class UpperBoundComplement(Propagator):
    """``n_var <= n_count - e_total``."""

    label = "complement"

    def __init__(self, n_var: int, e_total: int, n_count: int):
        self.n_var, self.e_total, self.n_count = n_var, e_total, n_count

    def wakes(self):
        return [(self.n_var, MIN_CHANGED), (self.e_total, MIN_CHANGED)]

    def propagate(self, m: Model):
        nv, e, n = self.n_var, self.e_total, self.n_count
        lo, hi = m._lo, m._hi
        while True:
            ev = 0
            if hi[nv] > n - lo[e]:
                ev |= m.set_max(nv, n - lo[e])
            if hi[e] > n - lo[nv]:
                ev |= m.set_max(e, n - lo[nv])
            if not ev:
                return hi[nv] + hi[e] <= n


class DomainBitmap(Propagator):
    """``b[k] = 1  <=>  x = start + k``; prunes interior values of ``x``."""

    label = "bitmap"

    def __init__(self, x: int, b: Sequence[int], start: int = 1):
        self.x, self.b, self.start = x, list(b), start

    def wakes(self):
        return [(self.x, ANY)] + [(bk, FIXED) for bk in self.b]

    def propagate(self, m: Model):
        x, bs, start = self.x, self.b, self.start
        lo, hi = m._lo, m._hi
        off = m._off[x]
        shift = start - off
        keep = -1
        for k, bk in enumerate(bs):
            if hi[bk] <= 0:
                if shift + k >= 0:
                    keep &= ~(1 << (shift + k))
            elif lo[bk] >= 1:
                m.fix(x, start + k)
        m.intersect_mask(x, keep)
        mask = m._mask[x]
        for k, bk in enumerate(bs):
            j = shift + k
            present = j >= 0 and (mask >> j) & 1
            if not present:
                if hi[bk] > 0:
                    m.set_max(bk, 0)
        if lo[x] == hi[x]:
            k = lo[x] - start
            if 0 <= k < len(bs):
                m.set_min(bs[k], 1)
            return True
        return False


class ValueFlags(Propagator):
    """``x = start + k  ->  flags[k] = 1`` for every ``k`` (bound reasoning).

    The contrapositive only removes values sitting on a bound of ``x``.
    """

    label = "flags"

    def __init__(self, x: int, flags: Sequence[int], start: int = 1):
        self.x, self.flags, self.start = x, list(flags), start

    def wakes(self):
        return [(self.x, BOUNDS)] + [(f, MAX_CHANGED) for f in self.flags]

    def propagate(self, m: Model):
        x, flags, start = self.x, self.flags, self.start
        lo, hi = m._lo, m._hi
        d = len(flags)
        while 0 <= lo[x] - start < d and hi[flags[lo[x] - start]] <= 0:
            m.remove_value(x, lo[x])
        while 0 <= hi[x] - start < d and hi[flags[hi[x] - start]] <= 0:
            m.remove_value(x, hi[x])
        if lo[x] == hi[x]:
            k = lo[x] - start
            if 0 <= k < d:
                m.set_min(flags[k], 1)
            return True
        return False


class UnusedValues(Propagator):
    """``flags[k] = 1  ->  some x_i = start + k``, enforced as: a value absent
    from every domain gets its flag set to 0."""

    label = "unused"
    band = 1

    def __init__(self, xs: Sequence[int], flags: Sequence[int], start: int = 1):
        self.xs, self.flags, self.start = list(xs), list(flags), start

    def wakes(self):
        return [(x, ANY) for x in self.xs]

    def propagate(self, m: Model):
        start = self.start
        union = 0
        for x in self.xs:
            shift = m._off[x] - start
            union |= m._mask[x] << shift if shift >= 0 else m._mask[x] >> -shift
        for k, f in enumerate(self.flags):
            if not (union >> k) & 1 and m._hi[f] > 0:
                m.set_max(f, 0)
        return False


class ForbiddenPairs(Propagator):
    """Binary table of forbidden ``(a, b)`` pairs on ``(x, y)``, arc consistent."""

    label = "table"
    band = 1

    def __init__(self, x: int, y: int, pairs: Iterable[Tuple[int, int]]):
        self.x, self.y = x, y
        self.pairs = sorted(set(pairs))
        self._sx = self._sy = None

    def wakes(self):
        return [(self.x, ANY), (self.y, ANY)]

    def _supports(self, m: Model, dst: int, flip: bool) -> Dict[int, int]:
        # value of the other side -> mask of allowed dst values, only for
        # values that have at least one forbidden partner
        out: Dict[int, int] = {}
        doff = m._off[dst]
        for a, b in self.pairs:
            if flip:
                a, b = b, a
            k = b - doff
            cur = out.get(a, -1)
            if k >= 0:
                cur &= ~(1 << k)
            out[a] = cur
        return out

    def propagate(self, m: Model):
        if self._sx is None:
            self._sx = self._supports(m, self.y, False)
            self._sy = self._supports(m, self.x, True)
        x, y = self.x, self.y
        mask = m._mask
        while True:
            ev = 0
            for src, dst, sup in ((x, y, self._sx), (y, x, self._sy)):
                dm = mask[dst]
                soff = m._off[src]
                drop = 0
                for a, allowed in sup.items():
                    k = a - soff
                    if k >= 0 and (mask[src] >> k) & 1 and not (allowed & dm):
                        drop |= 1 << k
                if drop:
                    ev |= m.intersect_mask(src, ~drop)
            if not ev:
                return False


# -- factory functions matching the operation names -------------------------


def reified_interval_membership(a: int, x: int, l: int, u: int, mode: str = BC) -> IntervalMembership:
    return IntervalMembership(a, x, l, u, mode)


def monotone_le_channel(x: int, z: Sequence[int], start: int = 1) -> MonotoneLeChannel:
    return MonotoneLeChannel(x, z, start)


def clause(lits: Iterable[Lit]) -> Clause:
    return Clause(lits)


def ternary_sum(a: int, b: int, c: int) -> TernarySum:
    return TernarySum(a, b, c)


def linear_sum_eq(total: int, terms: Sequence[int]) -> LinearSumEq:
    return LinearSumEq(total, terms)


def linear_count_excess(e: int, bits: Sequence[int], width: int) -> LinearCountExcess:
    return LinearCountExcess(e, bits, width)


def le_link(a: int, b: int) -> LeLink:
    return LeLink(a, b)


def upper_bound_complement(n_var: int, e_total: int, n_count: int) -> UpperBoundComplement:
    return UpperBoundComplement(n_var, e_total, n_count)


def domain_bitmap(x: int, b: Sequence[int], start: int = 1) -> DomainBitmap:
    return DomainBitmap(x, b, start)
