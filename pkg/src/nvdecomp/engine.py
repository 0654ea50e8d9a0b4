"""Event-driven propagation to a fixpoint.

A :class:`Model` is a :class:`~nvdecomp.domains.Store` that also owns a set of
propagators. Each propagator is registered with wake conditions (variable plus
event mask); domain changes schedule the matching propagators, and
:meth:`Model.propagate` runs the queue until it empties or a domain wipes out.
"""

from __future__ import annotations

import enum
import logging
import random
from collections import deque
from typing import Deque, Iterable, List, Optional, Sequence, Tuple

from .domains import ANY, FIXED, HOLE_REMOVED, MAX_CHANGED, MIN_CHANGED, Failure, Store

_KINDS = (MIN_CHANGED, MAX_CHANGED, FIXED, HOLE_REMOVED)

__all__ = ["Model", "Outcome", "Propagator", "WakeCondition"]

log = logging.getLogger(__name__)

WakeCondition = Tuple[int, int]


class Outcome(enum.Enum):
    FIXPOINT = "fixpoint"
    FAILED = "failed"
    SUBSUMED = "subsumed"


class Propagator:
    """Base class for propagators.

    ``propagate`` prunes through the model's mutators, raises
    :class:`~nvdecomp.domains.Failure` on a wipe-out, and returns a true value
    once the constraint is entailed (the propagator is then not rescheduled on
    the current branch). Propagators are expected to reach their own local
    fixpoint in one call; set ``idempotent = False`` otherwise so that the
    engine re-queues them on their own changes.
    """

    band = 0
    idempotent = True
    wants_events = False
    label = "prop"

    def wakes(self) -> List[WakeCondition]:
        raise NotImplementedError

    def propagate(self, m: "Model"):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} #{getattr(self, 'pid', '?')}>"


class Model(Store):
    """A store plus the propagators posted over it.

    ``shuffle_seed`` switches the queue from FIFO to a seeded random pick among
    pending propagators; it exists for confluence testing.
    """

    def __init__(self, shuffle_seed: Optional[int] = None, trace: bool = False) -> None:
        super().__init__()
        # per variable, one watcher list per event kind
        self._watch: List[Tuple[List[Propagator], ...]] = []
        self._props: List[Propagator] = []
        self._queues: Tuple[Deque[Propagator], Deque[Propagator]] = (deque(), deque())
        self._current: Optional[Propagator] = None
        self._dead_trail: List[Propagator] = []
        self._dead_marks: List[int] = []
        self._rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
        self.trace = trace
        self.propagations = 0
        self.prunings = 0

    @property
    def propagators(self) -> Sequence[Propagator]:
        return self._props

    def _on_new_var(self, v: int) -> None:
        self._watch.append(([], [], [], []))

    # -- registration ------------------------------------------------------

    def register(self, p: Propagator, wakes: Iterable[WakeCondition]) -> int:
        wakes = list(wakes)
        if not wakes:
            raise ValueError("a propagator needs at least one wake condition")
        n = self.num_vars
        for v, on in wakes:
            if not 0 <= v < n:
                raise ValueError(f"unknown variable {v}")
            if not on & ANY:
                raise ValueError("empty event set in wake condition")
        p.pid = len(self._props)
        p._queued = False
        p._dead = False
        if p.wants_events:
            p.events = {}
        self._props.append(p)
        seen = {}
        for v, on in wakes:
            seen[v] = seen.get(v, 0) | on
        for v, on in seen.items():
            lists = self._watch[v]
            for k, bit in enumerate(_KINDS):
                if on & bit:
                    lists[k].append(p)
        self._enqueue(p)
        return p.pid

    def post(self, p: Propagator) -> int:
        return self.register(p, p.wakes())

    def _enqueue(self, p: Propagator) -> None:
        p._queued = True
        self._queues[p.band].append(p)

    # -- events ------------------------------------------------------------

    def _notify(self, v: int, ev: int) -> None:
        self.prunings += 1
        if self.trace:
            cur = self._current
            log.debug("%s -> %s by %r", self.name(v), self.describe(v), cur)
        cur = self._current
        lists = self._watch[v]
        queues = self._queues
        for k in range(4):
            if not ev >> k & 1:
                continue
            for p in lists[k]:
                if p.wants_events:
                    p.events[v] = p.events.get(v, 0) | ev
                if p._queued or p._dead or p is cur:
                    continue
                p._queued = True
                queues[p.band].append(p)

    def _clear_queues(self) -> None:
        for q in self._queues:
            for p in q:
                p._queued = False
                if p.wants_events:
                    p.events.clear()
            q.clear()

    # -- fixpoint ----------------------------------------------------------

    def _next(self) -> Optional[Propagator]:
        for q in self._queues:
            if q:
                if self._rng is None:
                    return q.popleft()
                i = self._rng.randrange(len(q))
                q.rotate(-i)
                return q.popleft()
        return None

    def propagate(self) -> Outcome:
        q0, q1 = self._queues
        shuffled = self._rng is not None
        p = None
        try:
            while True:
                if shuffled:
                    p = self._next()
                    if p is None:
                        break
                elif q0:
                    p = q0.popleft()
                elif q1:
                    p = q1.popleft()
                else:
                    break
                p._queued = False
                if p._dead:
                    continue
                self._current = p if p.idempotent else None
                self.propagations += 1
                entailed = p.propagate(self)
                if p.wants_events:
                    p.events.clear()
                if entailed:
                    self._kill(p)
        except Failure:
            if p is not None and p.wants_events:
                p.events.clear()
            self._current = None
            self._clear_queues()
            return Outcome.FAILED
        self._current = None
        return Outcome.FIXPOINT

    def _kill(self, p: Propagator) -> None:
        p._dead = True
        if self._marks:
            self._dead_trail.append(p)

    def is_subsumed(self, p: Propagator) -> bool:
        return p._dead

    # -- trail -------------------------------------------------------------

    def push_state(self) -> None:
        super().push_state()
        self._dead_marks.append(len(self._dead_trail))

    def pop_state(self) -> None:
        super().pop_state()
        self._clear_queues()
        mark = self._dead_marks.pop()
        trail = self._dead_trail
        while len(trail) > mark:
            trail.pop()._dead = False
