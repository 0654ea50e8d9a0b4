"""Depth-first search with binary assign/remove branching."""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .domains import Failure
from .engine import Model, Outcome

__all__ = ["Backend", "Status", "VarOrder", "SearchConfig", "SearchStats", "SearchResult", "solve"]

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


class VarOrder(str, enum.Enum):
    MIN_DOMAIN = "min-domain"
    INPUT_ORDER = "input-order"


class Backend(str, enum.Enum):
    """``compiled`` runs the numba kernel, ``python`` the reference engine,
    ``auto`` the kernel when the model translates and numba imports."""

    AUTO = "auto"
    PYTHON = "python"
    COMPILED = "compiled"


@dataclass
class SearchConfig:
    var_order: VarOrder = VarOrder.MIN_DOMAIN
    timeout: float = 60.0
    backend: Backend = Backend.AUTO
    # values are tried smallest first; branching is x = v / x != v

    def __post_init__(self):
        self.var_order = VarOrder(self.var_order)
        self.backend = Backend(self.backend)
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")


@dataclass
class SearchStats:
    nodes: int = 0
    fails: int = 0
    backtracks: int = 0
    propagations: int = 0
    wall_time: float = 0.0


@dataclass
class SearchResult:
    status: Status
    solution: Optional[Dict[int, int]] = None
    stats: SearchStats = field(default_factory=SearchStats)


def _select(model: Model, decision: Sequence[int], order: VarOrder) -> int:
    lo, hi, mask = model._lo, model._hi, model._mask
    if order is VarOrder.INPUT_ORDER:
        for v in decision:
            if lo[v] != hi[v]:
                return v
        return -1
    best = -1
    best_size = 0
    for v in decision:
        if lo[v] != hi[v]:
            s = mask[v].bit_count()
            if best < 0 or s < best_size or (s == best_size and v < best):
                best, best_size = v, s
    return best


def solve(model: Model, decision_vars: Sequence[int], cfg: Optional[SearchConfig] = None) -> SearchResult:
    """Find the first solution fixing every decision variable.

    Nodes are the branches taken (the root is not one, so a model that fails
    at the root reports zero nodes); every failed branch counts a fail and
    every undone decision level counts a backtrack. Ties in the min-domain
    order go to the lowest variable index.

    The Python backend leaves the root fixpoint applied to ``model``; the
    compiled backend searches a copy and leaves ``model`` untouched.
    """
    cfg = cfg or SearchConfig()
    if cfg.backend is not Backend.PYTHON:
        try:
            from .kernel import NotCompilable, solve_compiled
        except ImportError:
            if cfg.backend is Backend.COMPILED:
                raise
            log.warning("numba unavailable, using the Python backend")
        else:
            try:
                return solve_compiled(model, decision_vars, cfg)
            except NotCompilable as exc:
                if cfg.backend is Backend.COMPILED:
                    raise
                log.info("using the Python backend: %s", exc)
    decision = list(decision_vars)
    stats = SearchStats()
    start = time.perf_counter()
    deadline = start + cfg.timeout
    props0 = model.propagations
    base_level = model.level

    def finish(status: Status, solution=None) -> SearchResult:
        while model.level > base_level:
            model.pop_state()
        stats.propagations = model.propagations - props0
        stats.wall_time = time.perf_counter() - start
        return SearchResult(status, solution, stats)

    if model.propagate() is Outcome.FAILED:
        return finish(Status.UNSAT)

    # (var, value) of each open left branch
    stack: List[tuple] = []
    while True:
        if time.perf_counter() > deadline:
            return finish(Status.TIMEOUT)
        v = _select(model, decision, cfg.var_order)
        if v < 0:
            solution = {x: model.min(x) for x in decision}
            return finish(Status.SAT, solution)
        a = model._lo[v]
        model.push_state()
        stack.append((v, a))
        stats.nodes += 1
        try:
            model.fix(v, a)
            ok = model.propagate() is not Outcome.FAILED
        except Failure:
            ok = False
        while not ok:
            stats.fails += 1
            if not stack:
                return finish(Status.UNSAT)
            v, a = stack.pop()
            model.pop_state()
            stats.backtracks += 1
            stats.nodes += 1
            try:
                model.remove_value(v, a)
                ok = model.propagate() is not Outcome.FAILED
            except Failure:
                ok = False
