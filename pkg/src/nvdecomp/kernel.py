"""Compiled search backend.

A :class:`~nvdecomp.engine.Model` is translated into two flat arrays, an int64
memory ``I`` (bounds, trail, propagator table, watch lists, queues) and a
uint64 memory ``U`` (domain bitset words), and searched by numba-compiled code
that mirrors the pure Python engine one propagator at a time. Fixpoints are
unique, so both backends explore the same tree and report the same node, fail
and backtrack counts; only propagation counts may differ.

Keeping the whole state in two arrays keeps calls between compiled functions
cheap. Region offsets live in a small header at the start of ``I``.

The model itself is left untouched: the kernel works on a copy.
"""

from __future__ import annotations

import time
from typing import Dict, List, Sequence, Tuple

import numpy as np
from numba import njit

from .domains import FIXED, HOLE_REMOVED, MAX_CHANGED, MIN_CHANGED
from .engine import Model
from .propagators import (
    RC,
    Clause,
    DomainBitmap,
    ForbiddenPairs,
    IntervalMembership,
    IntervalSupportClauses,
    LeLink,
    LinearCountExcess,
    LinearSumEq,
    MonotoneLeChannel,
    TernarySum,
    UnusedValues,
    UpperBoundComplement,
    ValueFlags,
)

__all__ = ["Kernel", "NotCompilable", "compile_model", "solve_compiled"]

# widest domain span (in 64-bit words) the kernel accepts
MAX_WORDS = 64

_ONE = np.uint64(1)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)

# propagator type codes
P_MEMBER, P_CHANNEL, P_CLAUSE, P_SUM3, P_SUMEQ, P_EXCESS, P_LE = 0, 1, 2, 3, 4, 5, 6
P_COMPL, P_BITMAP, P_FLAGS, P_UNUSED, P_TABLE, P_INTERVALS = 7, 8, 9, 10, 11, 12

# header of I: counters
LEVEL, TRLEN, CTRLEN, DTRLEN, NEXTID, CURID, CUR = 0, 1, 2, 3, 4, 5, 6
PROPS, PRUNE, H0, T0, H1, T1 = 7, 8, 9, 10, 11, 12
NODES, FAILS, BACKTRACKS, SP, PHASE = 13, 14, 15, 16, 17
# header of I: sizes
NV, NW, NP, NDEC, TCAP, QCAP = 20, 21, 22, 23, 24, 25
# header of I: region offsets (I unless noted)
R_OFF, R_LO, R_HI, R_SIZE, R_STAMP = 30, 31, 32, 33, 34
R_CELL, R_CSTAMP, R_CTRIDX, R_CTROLD = 35, 36, 37, 38
R_DEAD, R_DTR, R_MARKS, R_QUEUE, R_QUEUED = 39, 40, 41, 42, 43
R_WSTART, R_WPID, R_WSLOT = 44, 45, 46
R_PTYPE, R_PBAND, R_PIDEM, R_PWANTS, R_PFRESH, R_PARG, R_IARG = 47, 48, 49, 50, 51, 52, 53
R_EVSTART, R_EVCNT, R_EVBUF, R_EVFLAG = 54, 55, 56, 57
R_DEC, R_STVAR, R_STVAL, R_TR = 58, 59, 60, 61
U_DOM, U_TAB, U_SCR, U_TRW = 62, 63, 64, 65
HEADER = 66

RUNNING, SAT, UNSAT, GROW = 0, 1, 2, 3


class NotCompilable(ValueError):
    """The model uses something the compiled backend does not support."""


# -- bit helpers ------------------------------------------------------------


@njit(cache=True)
def _popc(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True)
def _low_index(x):
    return _popc((x & (~x + _ONE)) - _ONE)


@njit(cache=True)
def _high_index(x):
    n = 0
    if x >> np.uint64(32) != 0:
        n += 32
        x = x >> np.uint64(32)
    if x >> np.uint64(16) != 0:
        n += 16
        x = x >> np.uint64(16)
    if x >> np.uint64(8) != 0:
        n += 8
        x = x >> np.uint64(8)
    if x >> np.uint64(4) != 0:
        n += 4
        x = x >> np.uint64(4)
    if x >> np.uint64(2) != 0:
        n += 2
        x = x >> np.uint64(2)
    if x >> np.uint64(1) != 0:
        n += 1
    return n


@njit(cache=True)
def _range_word(wi, s, e):
    """Bits of word ``wi`` whose positions lie in ``[s, e]``."""
    base = wi * 64
    if e < base or s > base + 63 or s > e:
        return np.uint64(0)
    a = max(s - base, 0)
    b = min(e - base, 63)
    return (_ALL >> np.uint64(63 - (b - a))) << np.uint64(a)


@njit(cache=True)
def _has(I, U, v, a):
    W = I[NW]
    k = a - I[I[R_OFF] + v]
    if k < 0 or k >= W * 64:
        return False
    return (U[I[U_DOM] + v * W + (k >> 6)] >> np.uint64(k & 63)) & _ONE != 0


# -- trail --------------------------------------------------------------------


@njit(cache=True)
def _save(I, U, v):
    if I[LEVEL] == 0 or I[I[R_STAMP] + v] == I[CURID]:
        return
    W = I[NW]
    i = I[TRLEN]
    t = I[R_TR] + 4 * i
    I[t] = v
    I[t + 1] = I[I[R_LO] + v]
    I[t + 2] = I[I[R_HI] + v]
    I[t + 3] = I[I[R_SIZE] + v]
    src = I[U_DOM] + v * W
    dst = I[U_TRW] + i * W
    for w in range(W):
        U[dst + w] = U[src + w]
    I[TRLEN] = i + 1
    I[I[R_STAMP] + v] = I[CURID]


@njit(cache=True)
def _set_cell(I, i, value):
    cell = I[R_CELL] + i
    if I[LEVEL] > 0 and I[I[R_CSTAMP] + i] != I[CURID]:
        k = I[CTRLEN]
        I[I[R_CTRIDX] + k] = i
        I[I[R_CTROLD] + k] = I[cell]
        I[CTRLEN] = k + 1
        I[I[R_CSTAMP] + i] = I[CURID]
    I[cell] = value


@njit(cache=True)
def _push(I):
    lv = I[LEVEL]
    I[NEXTID] += 1
    mk = I[R_MARKS] + 4 * lv
    I[mk] = I[TRLEN]
    I[mk + 1] = I[CTRLEN]
    I[mk + 2] = I[DTRLEN]
    I[mk + 3] = I[NEXTID]
    I[CURID] = I[NEXTID]
    I[LEVEL] = lv + 1


@njit(cache=True)
def _pop(I, U):
    W = I[NW]
    lv = I[LEVEL] - 1
    mk = I[R_MARKS] + 4 * lv
    lo0, hi0, size0, dom0 = I[R_LO], I[R_HI], I[R_SIZE], I[U_DOM]
    i = I[TRLEN]
    while i > I[mk]:
        i -= 1
        t = I[R_TR] + 4 * i
        v = I[t]
        I[lo0 + v] = I[t + 1]
        I[hi0 + v] = I[t + 2]
        I[size0 + v] = I[t + 3]
        src = I[U_TRW] + i * W
        dst = dom0 + v * W
        for w in range(W):
            U[dst + w] = U[src + w]
    I[TRLEN] = i
    i = I[CTRLEN]
    while i > I[mk + 1]:
        i -= 1
        I[I[R_CELL] + I[I[R_CTRIDX] + i]] = I[I[R_CTROLD] + i]
    I[CTRLEN] = i
    i = I[DTRLEN]
    while i > I[mk + 2]:
        i -= 1
        I[I[R_DEAD] + I[I[R_DTR] + i]] = 0
    I[DTRLEN] = i
    I[LEVEL] = lv
    I[CURID] = I[mk - 1] if lv > 0 else 0
    _clear_queues(I)


# -- events and queues ----------------------------------------------------------


@njit(cache=True)
def _clear_events(I, p):
    base = I[I[R_EVSTART] + p]
    buf = I[R_EVBUF] + base
    flag = I[R_EVFLAG] + base
    cnt = I[R_EVCNT] + p
    for k in range(I[cnt]):
        I[flag + I[buf + k]] = 0
    I[cnt] = 0


@njit(cache=True)
def _enqueue(I, p):
    b = I[I[R_PBAND] + p]
    t = T0 if b == 0 else T1
    I[I[R_QUEUE] + b * I[QCAP] + I[t]] = p
    I[t] = (I[t] + 1) % I[QCAP]
    I[I[R_QUEUED] + p] = 1


@njit(cache=True)
def _dequeue(I, b):
    h = H0 if b == 0 else H1
    t = T0 if b == 0 else T1
    if I[h] == I[t]:
        return -1
    p = I[I[R_QUEUE] + b * I[QCAP] + I[h]]
    I[h] = (I[h] + 1) % I[QCAP]
    return p


@njit(cache=True)
def _clear_queues(I):
    for b in range(2):
        while True:
            p = _dequeue(I, b)
            if p < 0:
                break
            I[I[R_QUEUED] + p] = 0
            if I[I[R_PWANTS] + p]:
                _clear_events(I, p)


@njit(cache=True)
def _notify(I, v, ev):
    I[PRUNE] += 1
    cur = I[CUR]
    wstart, wpid, wslot = I[R_WSTART], I[R_WPID], I[R_WSLOT]
    queued, dead, wants = I[R_QUEUED], I[R_DEAD], I[R_PWANTS]
    for k in range(4):
        if (ev >> k) & 1 == 0:
            continue
        row = wstart + v * 4 + k
        for idx in range(I[row], I[row + 1]):
            p = I[wpid + idx]
            if I[wants + p]:
                slot = I[wslot + idx]
                base = I[I[R_EVSTART] + p]
                if I[I[R_EVFLAG] + base + slot] == 0:
                    I[I[R_EVFLAG] + base + slot] = 1
                    cnt = I[R_EVCNT] + p
                    I[I[R_EVBUF] + base + I[cnt]] = slot
                    I[cnt] += 1
            if I[queued + p] or I[dead + p] or p == cur:
                continue
            _enqueue(I, p)


# -- domain mutation ------------------------------------------------------------


@njit(cache=True)
def _commit(I, U, v, src):
    """Replace the domain of ``v`` by the subset held at ``U[src:src+W]``;
    returns the event bits, or -1 on wipe-out."""
    W = I[NW]
    size = 0
    first = -1
    last = -1
    for w in range(W):
        x = U[src + w]
        if x != 0:
            size += _popc(x)
            if first < 0:
                first = w * 64 + _low_index(x)
            last = w * 64 + _high_index(x)
    if size == 0:
        return -1
    if size == I[I[R_SIZE] + v]:
        return 0
    _save(I, U, v)
    off = I[I[R_OFF] + v]
    lo_at = I[R_LO] + v
    hi_at = I[R_HI] + v
    dom = I[U_DOM] + v * W
    ev = 0
    if first + off != I[lo_at]:
        ev |= MIN_CHANGED
    if last + off != I[hi_at]:
        ev |= MAX_CHANGED
    if first == last:
        ev |= FIXED
    if last - first >= 2:
        for w in range(W):
            removed = U[dom + w] & ~U[src + w]
            if removed & _range_word(w, first + 1, last - 1) != 0:
                ev |= HOLE_REMOVED
                break
    for w in range(W):
        U[dom + w] = U[src + w]
    I[lo_at] = first + off
    I[hi_at] = last + off
    I[I[R_SIZE] + v] = size
    _notify(I, v, ev)
    return ev


@njit(cache=True)
def _keep_range(I, U, v, s, e):
    """Intersect ``v`` with the relative positions ``[s, e]``."""
    W = I[NW]
    scr = I[U_SCR]
    dom = I[U_DOM] + v * W
    for w in range(W):
        U[scr + w] = U[dom + w] & _range_word(w, s, e)
    return _commit(I, U, v, scr)


@njit(cache=True)
def _set_min(I, U, v, b):
    if b <= I[I[R_LO] + v]:
        return 0
    hi = I[I[R_HI] + v]
    if b > hi:
        return -1
    off = I[I[R_OFF] + v]
    return _keep_range(I, U, v, b - off, hi - off)


@njit(cache=True)
def _set_max(I, U, v, b):
    hi = I[I[R_HI] + v]
    if b >= hi:
        return 0
    lo = I[I[R_LO] + v]
    if b < lo:
        return -1
    off = I[I[R_OFF] + v]
    return _keep_range(I, U, v, lo - off, b - off)


@njit(cache=True)
def _fix(I, U, v, a):
    if not _has(I, U, v, a):
        return -1
    k = a - I[I[R_OFF] + v]
    return _keep_range(I, U, v, k, k)


@njit(cache=True)
def _remove_range(I, U, v, l, u):
    if u < I[I[R_LO] + v] or l > I[I[R_HI] + v]:
        return 0
    W = I[NW]
    off = I[I[R_OFF] + v]
    scr = I[U_SCR]
    dom = I[U_DOM] + v * W
    for w in range(W):
        U[scr + w] = U[dom + w] & ~_range_word(w, l - off, u - off)
    return _commit(I, U, v, scr)


@njit(cache=True)
def _remove_value(I, U, v, a):
    if not _has(I, U, v, a):
        return 0
    return _remove_range(I, U, v, a, a)


# -- propagators ----------------------------------------------------------------
# Each returns -1 on failure, 1 when entailed, 0 otherwise. ``at`` is the
# offset of the propagator's argument block in I.


@njit(cache=True)
def _p_member(I, U, at):
    a, x, l, u, mode = I[at], I[at + 1], I[at + 2], I[at + 3], I[at + 4]
    lo, hi = I[R_LO], I[R_HI]
    if I[hi + a] <= 0:
        if mode == 1:
            return -1 if _remove_range(I, U, x, l, u) < 0 else 1
        while l <= I[lo + x] <= u:
            if _set_min(I, U, x, u + 1) < 0:
                return -1
        while l <= I[hi + x] <= u:
            if _set_max(I, U, x, l - 1) < 0:
                return -1
        return 1 if I[hi + x] < l or I[lo + x] > u else 0
    if I[lo + a] >= 1:
        if I[lo + x] < l and _set_min(I, U, x, l) < 0:
            return -1
        if I[hi + x] > u and _set_max(I, U, x, u) < 0:
            return -1
        return 1
    if I[hi + x] < l or I[lo + x] > u:
        return -1 if _set_max(I, U, a, 0) < 0 else 1
    if l <= I[lo + x] and I[hi + x] <= u:
        return -1 if _set_min(I, U, a, 1) < 0 else 1
    return 0


@njit(cache=True)
def _p_channel(I, U, at):
    x, start, d = I[at], I[at + 1], I[at + 2]
    z = at + 3
    lo, hi = I[R_LO], I[R_HI]
    while True:
        top = -1
        low = d
        for k in range(d):
            zk = I[z + k]
            if I[hi + zk] <= 0:
                top = k
            elif I[lo + zk] >= 1 and k < low:
                low = k
        if top >= low:
            return -1
        ev = 0
        if top >= 0 and I[lo + x] < start + top + 1:
            r = _set_min(I, U, x, start + top + 1)
            if r < 0:
                return -1
            ev |= r
        if low < d and I[hi + x] > start + low:
            r = _set_max(I, U, x, start + low)
            if r < 0:
                return -1
            ev |= r
        xlo = I[lo + x] - start
        xhi = I[hi + x] - start
        for k in range(min(xlo, d)):
            zk = I[z + k]
            if I[hi + zk] > 0 and _set_max(I, U, zk, 0) < 0:
                return -1
        for k in range(max(xhi, 0), d):
            zk = I[z + k]
            if I[lo + zk] < 1 and _set_min(I, U, zk, 1) < 0:
                return -1
        if ev == 0:
            return 1 if I[lo + x] == I[hi + x] else 0


@njit(cache=True)
def _p_clause(I, U, at):
    n = I[at]
    lo, hi = I[R_LO], I[R_HI]
    open_var = -1
    open_pos = 0
    n_open = 0
    for k in range(n):
        v = I[at + 1 + 2 * k]
        if I[at + 2 + 2 * k]:
            if I[lo + v] > 0:
                return 1
            if I[hi + v] > 0:
                n_open += 1
                open_var, open_pos = v, 1
        else:
            if I[hi + v] <= 0:
                return 1
            if I[lo + v] <= 0:
                n_open += 1
                open_var, open_pos = v, 0
    if n_open == 0:
        return -1
    if n_open == 1:
        r = _set_min(I, U, open_var, 1) if open_pos else _set_max(I, U, open_var, 0)
        return -1 if r < 0 else 1
    return 0


@njit(cache=True)
def _p_sum3(I, U, at):
    a, b, c = I[at], I[at + 1], I[at + 2]
    lo, hi = I[R_LO], I[R_HI]
    while True:
        ev = 0
        t = I[lo + b] + I[lo + c]
        if t > I[lo + a]:
            r = _set_min(I, U, a, t)
            if r < 0:
                return -1
            ev |= r
        t = I[hi + b] + I[hi + c]
        if t < I[hi + a]:
            r = _set_max(I, U, a, t)
            if r < 0:
                return -1
            ev |= r
        t = I[lo + a] - I[hi + c]
        if t > I[lo + b]:
            r = _set_min(I, U, b, t)
            if r < 0:
                return -1
            ev |= r
        t = I[hi + a] - I[lo + c]
        if t < I[hi + b]:
            r = _set_max(I, U, b, t)
            if r < 0:
                return -1
            ev |= r
        t = I[lo + a] - I[hi + b]
        if t > I[lo + c]:
            r = _set_min(I, U, c, t)
            if r < 0:
                return -1
            ev |= r
        t = I[hi + a] - I[lo + b]
        if t < I[hi + c]:
            r = _set_max(I, U, c, t)
            if r < 0:
                return -1
            ev |= r
        if ev == 0:
            return 1 if I[lo + b] == I[hi + b] and I[lo + c] == I[hi + c] else 0


@njit(cache=True)
def _p_sumeq(I, U, at):
    total, n = I[at], I[at + 1]
    t0 = at + 2
    lo, hi = I[R_LO], I[R_HI]
    while True:
        smin = 0
        smax = 0
        for k in range(n):
            t = I[t0 + k]
            smin += I[lo + t]
            smax += I[hi + t]
        ev = 0
        if smin > I[lo + total]:
            r = _set_min(I, U, total, smin)
            if r < 0:
                return -1
            ev |= r
        if smax < I[hi + total]:
            r = _set_max(I, U, total, smax)
            if r < 0:
                return -1
            ev |= r
        tlo = I[lo + total]
        thi = I[hi + total]
        for k in range(n):
            t = I[t0 + k]
            b = tlo - (smax - I[hi + t])
            if b > I[lo + t]:
                r = _set_min(I, U, t, b)
                if r < 0:
                    return -1
                ev |= r
            b = thi - (smin - I[lo + t])
            if b < I[hi + t]:
                r = _set_max(I, U, t, b)
                if r < 0:
                    return -1
                ev |= r
        if ev == 0:
            return 1 if smin == smax else 0


@njit(cache=True)
def _p_excess(I, U, at):
    e, width, n = I[at], I[at + 1], I[at + 2]
    b0 = at + 3
    lo, hi = I[R_LO], I[R_HI]
    s = 0
    for k in range(n):
        s += I[lo + I[b0 + k]]
    need = s - width
    if need > I[lo + e] and _set_min(I, U, e, need) < 0:
        return -1
    if need >= I[hi + e]:
        for k in range(n):
            b = I[b0 + k]
            if I[lo + b] < I[hi + b] and _set_max(I, U, b, I[hi + e] + width - (s - I[lo + b])) < 0:
                return -1
    return 0


@njit(cache=True)
def _p_le(I, U, at):
    a, b = I[at], I[at + 1]
    lo, hi = I[R_LO], I[R_HI]
    while True:
        ev = 0
        if I[hi + a] > I[hi + b]:
            r = _set_max(I, U, a, I[hi + b])
            if r < 0:
                return -1
            ev |= r
        if I[lo + b] < I[lo + a]:
            r = _set_min(I, U, b, I[lo + a])
            if r < 0:
                return -1
            ev |= r
        if ev == 0:
            return 1 if I[hi + a] <= I[lo + b] else 0


@njit(cache=True)
def _p_compl(I, U, at):
    nv, e, n = I[at], I[at + 1], I[at + 2]
    lo, hi = I[R_LO], I[R_HI]
    while True:
        ev = 0
        if I[hi + nv] > n - I[lo + e]:
            r = _set_max(I, U, nv, n - I[lo + e])
            if r < 0:
                return -1
            ev |= r
        if I[hi + e] > n - I[lo + nv]:
            r = _set_max(I, U, e, n - I[lo + nv])
            if r < 0:
                return -1
            ev |= r
        if ev == 0:
            return 1 if I[hi + nv] + I[hi + e] <= n else 0


@njit(cache=True)
def _p_bitmap(I, U, at):
    x, start, d = I[at], I[at + 1], I[at + 2]
    b0 = at + 3
    lo, hi = I[R_LO], I[R_HI]
    W = I[NW]
    shift = start - I[I[R_OFF] + x]
    keep = I[U_SCR] + W
    for w in range(W):
        U[keep + w] = _ALL
    for k in range(d):
        bk = I[b0 + k]
        if I[hi + bk] <= 0:
            j = shift + k
            if 0 <= j < W * 64:
                U[keep + (j >> 6)] &= ~(_ONE << np.uint64(j & 63))
        elif I[lo + bk] >= 1:
            if _fix(I, U, x, start + k) < 0:
                return -1
    scr = I[U_SCR]
    dom = I[U_DOM] + x * W
    for w in range(W):
        U[scr + w] = U[dom + w] & U[keep + w]
    if _commit(I, U, x, scr) < 0:
        return -1
    for k in range(d):
        bk = I[b0 + k]
        if I[hi + bk] > 0 and not _has(I, U, x, start + k):
            if _set_max(I, U, bk, 0) < 0:
                return -1
    if I[lo + x] == I[hi + x]:
        k = I[lo + x] - start
        if 0 <= k < d and _set_min(I, U, I[b0 + k], 1) < 0:
            return -1
        return 1
    return 0


@njit(cache=True)
def _p_flags(I, U, at):
    x, start, d = I[at], I[at + 1], I[at + 2]
    f0 = at + 3
    lo, hi = I[R_LO], I[R_HI]
    while 0 <= I[lo + x] - start < d and I[hi + I[f0 + I[lo + x] - start]] <= 0:
        if _remove_value(I, U, x, I[lo + x]) < 0:
            return -1
    while 0 <= I[hi + x] - start < d and I[hi + I[f0 + I[hi + x] - start]] <= 0:
        if _remove_value(I, U, x, I[hi + x]) < 0:
            return -1
    if I[lo + x] == I[hi + x]:
        k = I[lo + x] - start
        if 0 <= k < d and _set_min(I, U, I[f0 + k], 1) < 0:
            return -1
        return 1
    return 0


@njit(cache=True)
def _p_unused(I, U, at):
    start, nx = I[at], I[at + 1]
    x0 = at + 2
    nf = I[x0 + nx]
    f0 = x0 + nx + 1
    hi = I[R_HI]
    for k in range(nf):
        f = I[f0 + k]
        if I[hi + f] <= 0:
            continue
        used = False
        for i in range(nx):
            if _has(I, U, I[x0 + i], start + k):
                used = True
                break
        if not used and _set_max(I, U, f, 0) < 0:
            return -1
    return 0


@njit(cache=True)
def _table_side(I, U, src, dst, first, count):
    # ``first``: offset of (value, table row) pairs
    W = I[NW]
    soff = I[I[R_OFF] + src]
    drop = I[U_SCR] + W
    ddom = I[U_DOM] + dst * W
    tab = I[U_TAB]
    any_drop = False
    for w in range(W):
        U[drop + w] = 0
    for k in range(count):
        a = I[first + 2 * k]
        if not _has(I, U, src, a):
            continue
        row = tab + I[first + 2 * k + 1] * W
        hit = False
        for w in range(W):
            if U[row + w] & U[ddom + w] != 0:
                hit = True
                break
        if not hit:
            j = a - soff
            U[drop + (j >> 6)] |= _ONE << np.uint64(j & 63)
            any_drop = True
    if not any_drop:
        return 0
    scr = I[U_SCR]
    sdom = I[U_DOM] + src * W
    for w in range(W):
        U[scr + w] = U[sdom + w] & ~U[drop + w]
    return _commit(I, U, src, scr)


@njit(cache=True)
def _p_table(I, U, at):
    x, y, nx = I[at], I[at + 1], I[at + 2]
    ny = I[at + 3 + 2 * nx]
    while True:
        ev = 0
        r = _table_side(I, U, x, y, at + 3, nx)
        if r < 0:
            return -1
        ev |= r
        r = _table_side(I, U, y, x, at + 4 + 2 * nx, ny)
        if r < 0:
            return -1
        ev |= r
        if ev == 0:
            return 0


# interval clause family; argument block:
#   n, d, cell base, z (n * d, row major), m (d * d, -1 below the diagonal),
#   then (l, u) of each watched counter, whose event slots follow the n * d
#   threshold slots


@njit(cache=True)
def _iv_advance(I, U, at, i, top, low):
    n, d, cb = I[at], I[at + 1], I[R_CELL] + I[at + 2]
    z = at + 3 + i * d - 1
    mm = at + 3 + n * d - d - 1
    p0 = I[cb + i]
    q0 = I[cb + n + i]
    p1 = max(p0, top, 0)
    q1 = min(q0, low, d)
    if p1 == p0 and q1 == q0:
        return 0
    if p1 >= q1:
        return -1
    _set_cell(I, I[at + 2] + i, p1)
    _set_cell(I, I[at + 2] + n + i, q1)
    lo, hi = I[R_LO], I[R_HI]
    force_p = p1
    force_q = q1
    # clauses whose lower literal just became false
    for l in range(p0 + 2, p1 + 2):
        row = mm + l * d
        for u in range(l, d + 1):
            v = I[row + u]
            if u >= q1:
                if I[lo + v] < 1 and _set_min(I, U, v, 1) < 0:
                    return -1
            elif I[hi + v] <= 0 and u > force_p:
                force_p = u
    # clauses whose upper literal just became false
    for u in range(q1, min(q0, d + 1)):
        for l in range(1, min(u, p0 + 1) + 1):
            v = I[mm + l * d + u]
            if I[lo + v] < 1 and _set_min(I, U, v, 1) < 0:
                return -1
        for l in range(p1 + 2, u + 1):
            if I[hi + I[mm + l * d + u]] <= 0 and l - 1 < force_q:
                force_q = l - 1
                break
    if force_p > p1 and _set_max(I, U, I[z + force_p], 0) < 0:
        return -1
    if force_q < q1 and _set_min(I, U, I[z + force_q], 1) < 0:
        return -1
    return 0


@njit(cache=True)
def _iv_emptied(I, U, at, l, u):
    n, d, cb = I[at], I[at + 1], I[R_CELL] + I[at + 2]
    for i in range(n):
        z = at + 3 + i * d - 1
        low_false = l <= I[cb + i] + 1
        high_false = u >= I[cb + n + i]
        if low_false and high_false:
            return -1
        if low_false:
            if _set_max(I, U, I[z + u], 0) < 0:
                return -1
        elif high_false:
            if _set_min(I, U, I[z + l - 1], 1) < 0:
                return -1
    return 0


@njit(cache=True)
def _p_intervals(I, U, p, at):
    n, d = I[at], I[at + 1]
    lo, hi = I[R_LO], I[R_HI]
    zs = at + 3
    mm = at + 3 + n * d - d - 1
    slots = at + 3 + n * d + d * d
    if I[I[R_PFRESH] + p]:
        I[I[R_PFRESH] + p] = 0
        for i in range(n):
            top = 0
            low = d
            for j in range(1, d + 1):
                if I[hi + I[zs + i * d + j - 1]] <= 0:
                    top = j
            for j in range(d, 0, -1):
                if I[lo + I[zs + i * d + j - 1]] >= 1:
                    low = j
            if _iv_advance(I, U, at, i, top, low) < 0:
                return -1
    base = I[I[R_EVSTART] + p]
    buf = I[R_EVBUF] + base
    cnt = I[R_EVCNT] + p
    tops = np.empty(n, np.int64)
    lows = np.empty(n, np.int64)
    while I[cnt] > 0:
        k = I[cnt]
        batch = I[buf:buf + k].copy()
        _clear_events(I, p)
        tops[:] = -1
        lows[:] = d + 1
        zeros = np.empty(k, np.int64)
        nz = 0
        for s in batch:
            if s < n * d:
                i = s // d
                j = s % d + 1
                v = I[zs + s]
                if I[hi + v] <= 0:
                    if j > tops[i]:
                        tops[i] = j
                elif I[lo + v] >= 1 and j < lows[i]:
                    lows[i] = j
            else:
                c = s - n * d
                l = I[slots + 2 * c]
                u = I[slots + 2 * c + 1]
                if I[hi + I[mm + l * d + u]] <= 0:
                    zeros[nz] = c
                    nz += 1
        for i in range(n):
            if tops[i] >= 0 or lows[i] <= d:
                if _iv_advance(I, U, at, i, tops[i], lows[i]) < 0:
                    return -1
        for t in range(nz):
            c = zeros[t]
            if _iv_emptied(I, U, at, I[slots + 2 * c], I[slots + 2 * c + 1]) < 0:
                return -1
    return 0


@njit(cache=True)
def _run(I, U, p):
    t = I[I[R_PTYPE] + p]
    at = I[R_IARG] + I[I[R_PARG] + p]
    if t == P_SUM3:
        return _p_sum3(I, U, at)
    if t == P_INTERVALS:
        return _p_intervals(I, U, p, at)
    if t == P_CHANNEL:
        return _p_channel(I, U, at)
    if t == P_CLAUSE:
        return _p_clause(I, U, at)
    if t == P_LE:
        return _p_le(I, U, at)
    if t == P_SUMEQ:
        return _p_sumeq(I, U, at)
    if t == P_MEMBER:
        return _p_member(I, U, at)
    if t == P_EXCESS:
        return _p_excess(I, U, at)
    if t == P_COMPL:
        return _p_compl(I, U, at)
    if t == P_BITMAP:
        return _p_bitmap(I, U, at)
    if t == P_FLAGS:
        return _p_flags(I, U, at)
    if t == P_UNUSED:
        return _p_unused(I, U, at)
    return _p_table(I, U, at)


@njit(cache=True)
def _propagate(I, U):
    queued, dead, idem, wants = I[R_QUEUED], I[R_DEAD], I[R_PIDEM], I[R_PWANTS]
    while True:
        p = _dequeue(I, 0)
        if p < 0:
            p = _dequeue(I, 1)
            if p < 0:
                break
        I[queued + p] = 0
        if I[dead + p]:
            continue
        I[CUR] = p if I[idem + p] else -1
        I[PROPS] += 1
        r = _run(I, U, p)
        if I[wants + p]:
            _clear_events(I, p)
        if r < 0:
            I[CUR] = -1
            _clear_queues(I)
            return -1
        if r == 1:
            I[dead + p] = 1
            if I[LEVEL] > 0:
                I[I[R_DTR] + I[DTRLEN]] = p
                I[DTRLEN] += 1
    I[CUR] = -1
    return 0


# -- search ---------------------------------------------------------------------


@njit(cache=True)
def _select(I, input_order):
    best = -1
    best_size = 0
    lo, hi, size, dec = I[R_LO], I[R_HI], I[R_SIZE], I[R_DEC]
    for k in range(I[NDEC]):
        v = I[dec + k]
        if I[lo + v] != I[hi + v]:
            if input_order:
                return v
            s = I[size + v]
            if best < 0 or s < best_size or (s == best_size and v < best):
                best = v
                best_size = s
    return best


@njit(cache=True)
def _search(I, U, max_steps, input_order):
    """Resumable depth-first search; runs at most ``max_steps`` decisions."""
    if I[PHASE] == 0:
        I[PHASE] = 1
        if _propagate(I, U) < 0:
            return UNSAT
    steps = 0
    while steps < max_steps:
        if I[TRLEN] + I[NV] > I[TCAP]:
            return GROW
        v = _select(I, input_order)
        if v < 0:
            return SAT
        a = I[I[R_LO] + v]
        _push(I)
        sp = I[SP]
        I[I[R_STVAR] + sp] = v
        I[I[R_STVAL] + sp] = a
        I[SP] = sp + 1
        I[NODES] += 1
        r = _fix(I, U, v, a)
        if r >= 0:
            r = _propagate(I, U)
        while r < 0:
            I[FAILS] += 1
            if I[SP] == 0:
                return UNSAT
            I[SP] -= 1
            sp = I[SP]
            v = I[I[R_STVAR] + sp]
            a = I[I[R_STVAL] + sp]
            _pop(I, U)
            I[BACKTRACKS] += 1
            I[NODES] += 1
            r = _remove_value(I, U, v, a)
            if r >= 0:
                r = _propagate(I, U)
        steps += 1
    return RUNNING


# -- translation ------------------------------------------------------------------


def _words(mask: int, W: int) -> List[int]:
    return [(mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(W)]


def _encode(p, m: Model, W: int, tab_rows: List[List[int]], cells: List[int]):
    """(type code, argument list, watched vars in event-slot order or None)."""
    if isinstance(p, TernarySum):
        return P_SUM3, [p.a, p.b, p.c], None
    if isinstance(p, MonotoneLeChannel):
        return P_CHANNEL, [p.x, p.start, len(p.z)] + p.z, None
    if isinstance(p, Clause):
        args = [len(p.lits)]
        for v, positive in p.lits:
            args += [v, int(bool(positive))]
        return P_CLAUSE, args, None
    if isinstance(p, LeLink):
        return P_LE, [p.a, p.b], None
    if isinstance(p, LinearSumEq):
        return P_SUMEQ, [p.total, len(p.terms)] + p.terms, None
    if isinstance(p, IntervalMembership):
        return P_MEMBER, [p.a, p.x, p.l, p.u, int(p.mode == RC)], None
    if isinstance(p, LinearCountExcess):
        return P_EXCESS, [p.e, p.width, len(p.bits)] + p.bits, None
    if isinstance(p, UpperBoundComplement):
        return P_COMPL, [p.n_var, p.e_total, p.n_count], None
    if isinstance(p, DomainBitmap):
        return P_BITMAP, [p.x, p.start, len(p.b)] + p.b, None
    if isinstance(p, ValueFlags):
        return P_FLAGS, [p.x, p.start, len(p.flags)] + p.flags, None
    if isinstance(p, UnusedValues):
        return P_UNUSED, [p.start, len(p.xs)] + p.xs + [len(p.flags)] + p.flags, None
    if isinstance(p, ForbiddenPairs):
        args = [p.x, p.y]
        full = (1 << (64 * W)) - 1
        for dst, flip in ((p.y, False), (p.x, True)):
            sup = p._supports(m, dst, flip)
            args.append(len(sup))
            for a, allowed in sup.items():
                args += [a, len(tab_rows)]
                tab_rows.append(_words(allowed & full, W))
        return P_TABLE, args, None
    if isinstance(p, IntervalSupportClauses):
        n, d = len(p.z), p.d
        args = [n, d, len(cells)]
        cells.extend(p.p)
        cells.extend(p.q)
        for row in p.z:
            args += row
        for l in range(1, d + 1):
            for u in range(1, d + 1):
                args.append(p.m[l, u] if u >= l else -1)
        slots = [v for row in p.z for v in row]
        for (l, u), v in p.m.items():
            args += [l, u]
            slots.append(v)
        return P_INTERVALS, args, slots
    raise NotCompilable(f"no compiled form for {type(p).__name__}")


class Kernel:
    """A compiled copy of a model plus a resumable search over it."""

    def __init__(self, model: Model, decision_vars: Sequence[int] = ()):
        if model.level != 0:
            raise NotCompilable("model must be at its root level")
        nv = model.num_vars
        W = max(1, (max((mk.bit_length() for mk in model._mask), default=1) + 63) // 64)
        if W > MAX_WORDS:
            raise NotCompilable("domain span too wide for the compiled backend")
        props = model.propagators
        nprops = len(props)

        iarg: List[int] = []
        parg: List[int] = []
        ptype: List[int] = []
        tab_rows: List[List[int]] = []
        cells: List[int] = []
        slot_of: Dict[int, Dict[int, int]] = {}
        ev_start = [0] * nprops
        nslots = 0
        for k, p in enumerate(props):
            code, args, slots = _encode(p, model, W, tab_rows, cells)
            ptype.append(code)
            parg.append(len(iarg))
            iarg.extend(args)
            if p.wants_events:
                if slots is None:
                    raise NotCompilable(f"{type(p).__name__} needs events")
                slot_of[k] = {v: s for s, v in enumerate(slots)}
                ev_start[k] = nslots
                nslots += len(slots)

        # watch lists keep the engine's order within each list
        w_start: List[int] = []
        w_pid: List[int] = []
        w_slot: List[int] = []
        for v in range(nv):
            for kind in range(4):
                w_start.append(len(w_pid))
                for p in model._watch[v][kind]:
                    w_pid.append(p.pid)
                    w_slot.append(slot_of[p.pid][v] if p.pid in slot_of else -1)
        w_start.append(len(w_pid))

        qcap = nprops + 1
        queue = [0] * (2 * qcap)
        tails = []
        for b, q in enumerate(model._queues):
            for i, p in enumerate(q):
                queue[b * qcap + i] = p.pid
            tails.append(len(q))

        ev_cnt = [0] * nprops
        ev_buf = [0] * nslots
        ev_flag = [0] * nslots
        for k, p in enumerate(props):
            if p.wants_events:
                for v in p.events:
                    s = slot_of[k][v]
                    ev_buf[ev_start[k] + ev_cnt[k]] = s
                    ev_flag[ev_start[k] + s] = 1
                    ev_cnt[k] += 1

        dec = [int(v) for v in decision_vars]
        depth = len(dec) + 2
        tcap = max(nv * 4, 64)
        regions: List[Tuple[int, Sequence[int]]] = [
            (R_OFF, model._off),
            (R_LO, model._lo),
            (R_HI, model._hi),
            (R_SIZE, [mk.bit_count() for mk in model._mask]),
            (R_STAMP, [0] * nv),
            (R_CELL, cells),
            (R_CSTAMP, [0] * len(cells)),
            (R_CTRIDX, [0] * (len(cells) * depth)),
            (R_CTROLD, [0] * (len(cells) * depth)),
            (R_DEAD, [int(p._dead) for p in props]),
            (R_DTR, [0] * nprops),
            (R_MARKS, [0] * (4 * depth)),
            (R_QUEUE, queue),
            (R_QUEUED, [int(p._queued) for p in props]),
            (R_WSTART, w_start),
            (R_WPID, w_pid),
            (R_WSLOT, w_slot),
            (R_PTYPE, ptype),
            (R_PBAND, [p.band for p in props]),
            (R_PIDEM, [int(p.idempotent) for p in props]),
            (R_PWANTS, [int(p.wants_events) for p in props]),
            (R_PFRESH, [int(getattr(p, "_fresh", False)) for p in props]),
            (R_PARG, parg),
            (R_IARG, iarg),
            (R_EVSTART, ev_start),
            (R_EVCNT, ev_cnt),
            (R_EVBUF, ev_buf),
            (R_EVFLAG, ev_flag),
            (R_DEC, dec),
            (R_STVAR, [0] * depth),
            (R_STVAL, [0] * depth),
        ]
        header = [0] * HEADER
        chunks = []
        at = HEADER
        for slot, data in regions:
            header[slot] = at
            chunks.append(np.asarray(data, dtype=np.int64).reshape(-1))
            at += len(data)
        header[R_TR] = at  # trail last so that it can grow in place
        header[CUR] = -1
        header[T0], header[T1] = tails
        header[NV], header[NW], header[NP], header[NDEC] = nv, W, nprops, len(dec)
        header[TCAP], header[QCAP] = tcap, qcap

        words: List[int] = []
        for mk in model._mask:
            words.extend(_words(mk, W))
        header[U_DOM] = 0
        header[U_TAB] = len(words)
        for row in tab_rows:
            words.extend(row)
        header[U_SCR] = len(words)
        words.extend([0] * (2 * W))
        header[U_TRW] = len(words)

        self.I = np.concatenate([np.asarray(header, np.int64)] + chunks + [np.zeros(4 * tcap, np.int64)])
        self.U = np.concatenate([np.asarray(words, np.uint64), np.zeros(tcap * W, np.uint64)])
        self.W = W

    def _grow(self) -> None:
        I, U = self.I, self.U
        tcap = int(I[TCAP])
        self.I = np.concatenate([I, np.zeros(4 * tcap, np.int64)])
        self.U = np.concatenate([U, np.zeros(tcap * self.W, np.uint64)])
        self.I[TCAP] = 2 * tcap

    # -- state access -----------------------------------------------------

    def lo(self, v: int) -> int:
        return int(self.I[self.I[R_LO] + v])

    def hi(self, v: int) -> int:
        return int(self.I[self.I[R_HI] + v])

    def values(self, v: int) -> List[int]:
        W = self.W
        base = int(self.I[U_DOM]) + v * W
        off = int(self.I[self.I[R_OFF] + v])
        mask = 0
        for w in range(W):
            mask |= int(self.U[base + w]) << (64 * w)
        return [off + k for k in range(mask.bit_length()) if (mask >> k) & 1]

    def counter(self, which: int) -> int:
        return int(self.I[which])

    # -- operations -------------------------------------------------------

    def propagate(self) -> bool:
        """Run to fixpoint; False on failure."""
        return _propagate(self.I, self.U) >= 0

    def search(self, max_steps: int, input_order: bool = False) -> int:
        while True:
            code = _search(self.I, self.U, max_steps, input_order)
            if code != GROW:
                return code
            self._grow()


def compile_model(model: Model, decision_vars: Sequence[int] = ()) -> Kernel:
    return Kernel(model, decision_vars)


_warm = False


def _warm_up(k: Kernel, input_order: bool) -> None:
    """Load (or compile) the machine code outside any timed region."""
    global _warm
    if not _warm:
        _search(k.I.copy(), k.U.copy(), 0, input_order)
        _warm = True


def solve_compiled(model: Model, decision_vars: Sequence[int], cfg):
    from .search import SearchResult, SearchStats, Status, VarOrder

    k = Kernel(model, decision_vars)
    input_order = cfg.var_order is VarOrder.INPUT_ORDER
    _warm_up(k, input_order)
    start = time.perf_counter()
    deadline = start + cfg.timeout
    steps = 64
    while True:
        t0 = time.perf_counter()
        code = k.search(steps, input_order)
        if code != RUNNING:
            break
        now = time.perf_counter()
        if now > deadline:
            break
        # keep chunks around 20 ms so the deadline is honoured
        took = now - t0
        if took < 0.01:
            steps *= 2
        elif took > 0.04 and steps > 1:
            steps //= 2
    stats = SearchStats(
        nodes=k.counter(NODES),
        fails=k.counter(FAILS),
        backtracks=k.counter(BACKTRACKS),
        propagations=k.counter(PROPS),
        wall_time=time.perf_counter() - start,
    )
    if code == SAT:
        return SearchResult(Status.SAT, {int(v): k.lo(v) for v in decision_vars}, stats)
    if code == UNSAT:
        return SearchResult(Status.UNSAT, None, stats)
    return SearchResult(Status.TIMEOUT, None, stats)
