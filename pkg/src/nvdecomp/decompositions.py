"""Builders posting NValue-family decompositions into a :class:`Model`.

Values of the ``X`` variables are mapped onto pyramid indices ``1..d`` where
index ``j`` stands for value ``j + shift`` and ``shift = min_i min(X_i) - 1``.
Every builder returns a :class:`DecompositionHandle` whose ``roles`` map names
the introduced variables, e.g. ``("M", l, u)``, ``("A", i, l, u)``,
``("E", l, u)``, ``("Z", i, j)``, ``("B", i, l, u)`` and ``("B", j)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import Model
from .propagators import (
    BC,
    Clause,
    IntervalSupportClauses,
    DomainBitmap,
    IntervalMembership,
    LeLink,
    LinearCountExcess,
    LinearSumEq,
    MonotoneLeChannel,
    TernarySum,
    UnusedValues,
    UpperBoundComplement,
    ValueFlags,
    neg,
    pos,
)

__all__ = [
    "AtMostVariant",
    "DecompositionHandle",
    "build_simple_occurrence",
    "build_atmost_pyramid",
    "build_atleast_pyramid",
    "build_nvalue",
]

Role = Tuple


class AtMostVariant(str, enum.Enum):
    NAIVE_BC = "naive-bc"
    FAST_BC = "fast-bc"
    FAST_RC = "fast-rc"


@dataclass
class DecompositionHandle:
    x_vars: List[int]
    n_var: int
    shift: int
    d: int
    roles: Dict[Role, int] = field(default_factory=dict)

    def value(self, j: int) -> int:
        """Domain value standing for pyramid index ``j``."""
        return j + self.shift

    def var(self, *role) -> int:
        return self.roles[tuple(role)]


def _universe(model: Model, xs: Sequence[int]) -> Tuple[int, int]:
    if not xs:
        raise ValueError("need at least one variable")
    lo = min(model.min(x) for x in xs)
    hi = max(model.max(x) for x in xs)
    return lo - 1, hi - lo + 1


def _add(h: DecompositionHandle, role: Role, var: int) -> int:
    if role in h.roles:
        raise ValueError(f"role {role} assigned twice")
    h.roles[role] = var
    return var


def _membership(model: Model, h: DecompositionHandle, tag: str = "A") -> Dict[Tuple[int, int, int], int]:
    """0/1 variables ``A_ilu <=> X_i in [l, u]`` for all i, l <= u."""
    out = {}
    for i, x in enumerate(h.x_vars):
        for l in range(1, h.d + 1):
            for u in range(l, h.d + 1):
                a = _add(h, (tag, i, l, u), model.new_var(0, 1, f"{tag}[{i},{l},{u}]"))
                model.post(IntervalMembership(a, x, h.value(l), h.value(u), BC))
                out[i, l, u] = a
    return out


def _pyramid(model: Model, h: DecompositionHandle, tag: str, cap) -> Dict[Tuple[int, int], int]:
    """Counters for every interval, tied by ``P_1u = P_1k + P_(k+1)u``."""
    d = h.d
    p = {}
    for l in range(1, d + 1):
        for u in range(l, d + 1):
            p[l, u] = _add(h, (tag, l, u), model.new_var(0, cap(l, u), f"{tag}[{l},{u}]"))
    for u in range(2, d + 1):
        for k in range(1, u):
            model.post(TernarySum(p[1, u], p[1, k], p[k + 1, u]))
    return p


def build_atmost_pyramid(
    model: Model,
    xs: Sequence[int],
    n: int,
    variant: AtMostVariant = AtMostVariant.FAST_BC,
    implied_sum: bool = True,
    membership: Optional[Dict[Tuple[int, int, int], int]] = None,
    handle: Optional[DecompositionHandle] = None,
    batch_clauses: bool = True,
) -> DecompositionHandle:
    """Post ``|{X_i}| <= N`` via interval counters ``M_lu``.

    ``membership`` (naive variant only) reuses existing ``A_ilu`` variables.
    ``batch_clauses`` posts the fast variants' ``X_i in [l, u] -> M_lu > 0``
    clauses as one :class:`IntervalSupportClauses` propagator instead of one
    :class:`Clause` each; both prune identically.
    """
    variant = AtMostVariant(variant)
    xs = list(xs)
    if handle is None:
        shift, d = _universe(model, xs)
        handle = DecompositionHandle(xs, n, shift, d)
    h = handle
    d, count = h.d, len(xs)
    m = _pyramid(model, h, "M", lambda l, u: min(u - l + 1, count))
    model.post(LeLink(m[1, d], n))
    if implied_sum and d > 1:
        model.post(LinearSumEq(m[1, d], [m[j, j] for j in range(1, d + 1)]))

    if variant is AtMostVariant.NAIVE_BC:
        a = membership if membership is not None else _membership(model, h)
        for (i, l, u), ai in a.items():
            model.post(LeLink(ai, m[l, u]))
        return h

    start = h.value(1)
    rows = []
    for i, x in enumerate(xs):
        z = [_add(h, ("Z", i, j), model.new_var(0, 1, f"Z[{i},{j}]")) for j in range(1, d + 1)]
        rows.append(z)
        model.post(MonotoneLeChannel(x, z, start))
        if batch_clauses:
            continue
        # X_i in [l, u]  ->  M_lu > 0
        for l in range(1, d + 1):
            for u in range(l, d + 1):
                lits = []
                if l > 1:
                    lits.append(pos(z[l - 2]))
                if u < d:
                    lits.append(neg(z[u - 1]))
                lits.append(pos(m[l, u]))
                model.post(Clause(lits))
    if batch_clauses:
        model.post(IntervalSupportClauses(rows, m, d))

    if variant is AtMostVariant.FAST_RC:
        _post_rc_channel(model, h, m)
    return h


def _post_rc_channel(model: Model, h: DecompositionHandle, m) -> None:
    """Power-of-two interval flags removing ``[l, u]`` from X when ``M_lu = 0``."""
    d = h.d
    top = d.bit_length() - 1
    for i, x in enumerate(h.x_vars):
        b = {}
        for k in range(top + 1):
            w = 1 << k
            for l in range(1, d - w + 2):
                b[l, l + w - 1] = _add(
                    h, ("B", i, l, l + w - 1), model.new_var(0, 1, f"B[{i},{l},{l + w - 1}]")
                )
        model.post(DomainBitmap(x, [b[j, j] for j in range(1, d + 1)], h.value(1)))
        # a block is used if either half is
        for k in range(top):
            w = 1 << k
            for j in range(1, d - 2 * w + 2):
                parent = b[j, j + 2 * w - 1]
                model.post(Clause([pos(parent), neg(b[j, j + w - 1])]))
                model.post(Clause([pos(parent), neg(b[j + w, j + 2 * w - 1])]))
        # an empty interval empties the two blocks covering it
        for l in range(1, d + 1):
            for u in range(l, d + 1):
                w = 1 << ((u - l + 1).bit_length() - 1)
                model.post(Clause([pos(m[l, u]), neg(b[l, l + w - 1])]))
                if l + w - 1 != u:
                    model.post(Clause([pos(m[l, u]), neg(b[u - w + 1, u])]))


def build_atleast_pyramid(
    model: Model,
    xs: Sequence[int],
    n: int,
    membership: Optional[Dict[Tuple[int, int, int], int]] = None,
    handle: Optional[DecompositionHandle] = None,
) -> DecompositionHandle:
    """Post ``N <= |{X_i}|`` via excess counters ``E_lu``."""
    xs = list(xs)
    if handle is None:
        shift, d = _universe(model, xs)
        handle = DecompositionHandle(xs, n, shift, d)
    h = handle
    d, count = h.d, len(xs)
    a = membership if membership is not None else _membership(model, h)
    e = _pyramid(model, h, "E", lambda l, u: count)
    for l in range(1, d + 1):
        for u in range(l, d + 1):
            model.post(LinearCountExcess(e[l, u], [a[i, l, u] for i in range(count)], u - l + 1))
    model.post(UpperBoundComplement(n, e[1, d], count))
    return h


def build_nvalue(
    model: Model,
    xs: Sequence[int],
    n: int,
    variant: AtMostVariant = AtMostVariant.FAST_BC,
    implied_sum: bool = True,
    share_membership: bool = True,
) -> DecompositionHandle:
    """``N = |{X_i}|`` as the conjunction of the AtMost and AtLeast pyramids.

    With the naive variant both halves can share the ``A_ilu`` variables.
    """
    variant = AtMostVariant(variant)
    xs = list(xs)
    shift, d = _universe(model, xs)
    h = DecompositionHandle(xs, n, shift, d)
    a = None
    if variant is AtMostVariant.NAIVE_BC and share_membership:
        a = _membership(model, h)
    build_atmost_pyramid(model, xs, n, variant, implied_sum, membership=a, handle=h)
    if a is None and variant is AtMostVariant.NAIVE_BC:
        # the AtMost half already owns the "A" role
        a = _membership(model, h, tag="A'")
    build_atleast_pyramid(model, xs, n, membership=a, handle=h)
    return h


def build_simple_occurrence(
    model: Model,
    xs: Sequence[int],
    n: int,
    relation: str = "eq",
) -> DecompositionHandle:
    """Value flags ``B_j`` with ``X_i = j -> B_j = 1``, ``B_j = 1 -> OR_i X_i = j``
    and ``sum B_j`` related to ``N`` by ``relation`` (``eq``, ``le`` or ``ge``)."""
    if relation not in ("eq", "le", "ge"):
        raise ValueError(f"unknown relation {relation!r}")
    xs = list(xs)
    shift, d = _universe(model, xs)
    h = DecompositionHandle(xs, n, shift, d)
    flags = [_add(h, ("B", j), model.new_var(0, 1, f"B[{j}]")) for j in range(1, d + 1)]
    for x in xs:
        model.post(ValueFlags(x, flags, h.value(1)))
    model.post(UnusedValues(xs, flags, h.value(1)))
    if relation == "eq":
        model.post(LinearSumEq(n, flags))
    else:
        total = _add(h, ("T",), model.new_var(0, d, "T"))
        model.post(LinearSumEq(total, flags))
        model.post(LeLink(total, n) if relation == "le" else LeLink(n, total))
    return h
