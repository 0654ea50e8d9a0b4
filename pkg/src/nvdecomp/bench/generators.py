"""Benchmark generators: Queen's graph dominating set and random binary CSPs.

Random instances are drawn from :class:`random.Random` (MT19937) seeded with
the instance seed, using only ``randrange`` and ``sample`` over ``range``
objects, so a seed maps to the same instance on every platform.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .instances import Instance

__all__ = ["CLASSES", "RandomClass", "attacks", "gen_queens", "gen_random_csp", "random_suite"]


def attacks(n: int, i: int, j: int) -> bool:
    """Squares ``i`` and ``j`` (1-based, row-major on an n x n board) share a
    row, column or diagonal."""
    ri, ci = divmod(i - 1, n)
    rj, cj = divmod(j - 1, n)
    return i != j and (ri == rj or ci == cj or abs(ri - rj) == abs(ci - cj))


def gen_queens(n: int, nvalue: int) -> Instance:
    """Dominating set of the Queen's graph: ``X_i`` names the square whose
    queen covers square ``i``; at most ``nvalue`` distinct squares."""
    if not 2 <= n <= 12:
        raise ValueError("board size must be in 2..12")
    cells = n * n
    domains = [tuple(j for j in range(1, cells + 1) if j == i or attacks(n, i, j)) for i in range(1, cells + 1)]
    return Instance(domains, "atmost", 1, nvalue, name=f"queens-{n}-{nvalue}")


@dataclass(frozen=True)
class RandomClass:
    n: int
    d: int
    m: int
    t: int
    nvalue: int


CLASSES: Dict[str, RandomClass] = {
    "A": RandomClass(100, 10, 250, 52, 8),
    "B": RandomClass(50, 15, 120, 116, 6),
    "C": RandomClass(40, 20, 80, 240, 6),
    "D": RandomClass(200, 15, 600, 85, 8),
    "E": RandomClass(60, 30, 150, 350, 6),
}


def gen_random_csp(n: int, d: int, m: int, t: int, nvalue: int, seed: int) -> Instance:
    """``m`` distinct unordered variable pairs, each with ``t`` distinct
    forbidden value pairs, plus one AtMostNValue with ``N`` fixed to ``nvalue``."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if not 0 <= m <= n * (n - 1) // 2:
        raise ValueError("m exceeds the number of variable pairs")
    if not 0 <= t <= d * d:
        raise ValueError("t exceeds d*d")
    rng = random.Random(seed)
    pairs = _decode_pairs(n, rng.sample(range(n * (n - 1) // 2), m))
    forbidden: List[Tuple[int, int, int, int]] = []
    for i, j in pairs:
        for code in rng.sample(range(d * d), t):
            a, b = divmod(code, d)
            forbidden.append((i, j, a + 1, b + 1))
    domains = [tuple(range(1, d + 1))] * n
    return Instance(domains, "atmost", nvalue, nvalue, forbidden, name=f"rand-{n}-{d}-{m}-{t}-{nvalue}-{seed}")


def _decode_pairs(n: int, codes: List[int]) -> List[Tuple[int, int]]:
    # code enumerates (i, j), i < j, row by row
    starts = []
    acc = 0
    for i in range(n):
        starts.append(acc)
        acc += n - 1 - i
    out = []
    for c in codes:
        lo, hi = 0, n - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if starts[mid] <= c:
                lo = mid
            else:
                hi = mid - 1
        i = lo
        out.append((i, i + 1 + c - starts[i]))
    return sorted(out)


def random_suite(cls: str, count: int, seed: int) -> List[Instance]:
    """``count`` instances of a preset class; instance ``k`` uses seed ``seed + k``."""
    p = CLASSES[cls]
    out = []
    for k in range(count):
        inst = gen_random_csp(p.n, p.d, p.m, p.t, p.nvalue, seed + k)
        inst.name = f"{cls}-{seed + k}"
        out.append(inst)
    return out
