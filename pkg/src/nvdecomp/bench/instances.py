"""Declarative instances and the NVP text format.

Format (ASCII, one statement per line, ``#`` starts a comment)::

    nvp 1
    vars <n>
    range <i> <lo> <hi>          # or: dom <i> <v1> <v2> ...
    nvalue <atmost|atleast|exact> <N_lo> <N_hi>
    forbid <i> <j> <a> <b>

Variable indices are 0-based. The canonical writer emits ``range`` for
interval domains and ``dom`` otherwise, then ``nvalue``, then ``forbid``
lines sorted by ``(i, j, a, b)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..decompositions import (
    AtMostVariant,
    DecompositionHandle,
    build_atleast_pyramid,
    build_atmost_pyramid,
    build_nvalue,
    build_simple_occurrence,
)
from ..engine import Model
from ..propagators import ForbiddenPairs

__all__ = [
    "DECOMPOSITIONS",
    "Instance",
    "ParseError",
    "build_model",
    "check_solution",
    "dumps",
    "loads",
    "read_instance",
    "write_instance",
]

KINDS = ("atmost", "atleast", "exact")
DECOMPOSITIONS = ("occs", "pyramid-bc", "pyramid-rc", "pyramid-naive")


class ParseError(ValueError):
    def __init__(self, line: int, token: str, message: str):
        super().__init__(f"line {line}: {message} (at {token!r})")
        self.line = line
        self.token = token


@dataclass
class Instance:
    domains: List[Tuple[int, ...]]
    kind: str = "atmost"
    n_lo: int = 0
    n_hi: int = 0
    forbidden: List[Tuple[int, int, int, int]] = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown nvalue kind {self.kind!r}")
        self.domains = [tuple(sorted(set(d))) for d in self.domains]
        if any(not d for d in self.domains):
            raise ValueError("empty domain")
        if self.n_lo > self.n_hi:
            raise ValueError("empty N interval")

    @property
    def n(self) -> int:
        return len(self.domains)

    def constraints(self) -> Dict[Tuple[int, int], List[Tuple[int, int]]]:
        out: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        for i, j, a, b in self.forbidden:
            out.setdefault((i, j), []).append((a, b))
        return out


def dumps(inst: Instance) -> str:
    lines = ["nvp 1", f"vars {inst.n}"]
    for i, dom in enumerate(inst.domains):
        if dom[-1] - dom[0] + 1 == len(dom):
            lines.append(f"range {i} {dom[0]} {dom[-1]}")
        else:
            lines.append(f"dom {i} " + " ".join(map(str, dom)))
    lines.append(f"nvalue {inst.kind} {inst.n_lo} {inst.n_hi}")
    for t in sorted(inst.forbidden):
        lines.append("forbid " + " ".join(map(str, t)))
    return "\n".join(lines) + "\n"


_INT = re.compile(r"[+-]?\d+\Z")


def loads(text: str, name: str = "") -> Instance:
    n: Optional[int] = None
    domains: Dict[int, Tuple[int, ...]] = {}
    nvalue = None
    forbidden = []
    seen_header = False

    def ints(toks, lineno, count=None):
        for t in toks:
            if not _INT.match(t):
                raise ParseError(lineno, t, "expected an integer")
        if count is not None and len(toks) != count:
            tok = toks[count] if len(toks) > count else (toks[-1] if toks else "")
            raise ParseError(lineno, tok, f"expected {count} integers")
        return [int(t) for t in toks]

    def var_index(i, lineno, tok):
        if n is None:
            raise ParseError(lineno, tok, "'vars' must come first")
        if not 0 <= i < n:
            raise ParseError(lineno, tok, f"variable index out of range 0..{n - 1}")
        return i

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if not seen_header:
            if key != "nvp" or rest != ["1"]:
                raise ParseError(lineno, key, "missing 'nvp 1' header")
            seen_header = True
            continue
        if key == "vars":
            if n is not None:
                raise ParseError(lineno, key, "duplicate 'vars'")
            (n,) = ints(rest, lineno, 1)
            if n < 1:
                raise ParseError(lineno, rest[0], "need at least one variable")
        elif key == "range":
            i, lo, hi = ints(rest, lineno, 3)
            var_index(i, lineno, rest[0])
            if lo > hi:
                raise ParseError(lineno, rest[2], "empty range")
            if i in domains:
                raise ParseError(lineno, rest[0], "domain given twice")
            domains[i] = tuple(range(lo, hi + 1))
        elif key == "dom":
            if len(rest) < 2:
                raise ParseError(lineno, key, "dom needs an index and at least one value")
            i, *vals = ints(rest, lineno)
            var_index(i, lineno, rest[0])
            if i in domains:
                raise ParseError(lineno, rest[0], "domain given twice")
            domains[i] = tuple(sorted(set(vals)))
        elif key == "nvalue":
            if len(rest) != 3 or rest[0] not in KINDS:
                raise ParseError(lineno, rest[0] if rest else key, "expected 'nvalue <atmost|atleast|exact> <lo> <hi>'")
            lo, hi = ints(rest[1:], lineno, 2)
            if lo > hi:
                raise ParseError(lineno, rest[2], "empty N interval")
            nvalue = (rest[0], lo, hi)
        elif key == "forbid":
            i, j, a, b = ints(rest, lineno, 4)
            var_index(i, lineno, rest[0])
            var_index(j, lineno, rest[1])
            forbidden.append((i, j, a, b))
        else:
            raise ParseError(lineno, key, "unknown statement")
    if not seen_header:
        raise ParseError(0, "", "empty file")
    if n is None:
        raise ParseError(0, "", "missing 'vars'")
    missing = [i for i in range(n) if i not in domains]
    if missing:
        raise ParseError(0, str(missing[0]), "variable without a domain")
    if nvalue is None:
        raise ParseError(0, "", "missing 'nvalue'")
    kind, lo, hi = nvalue
    return Instance([domains[i] for i in range(n)], kind, lo, hi, forbidden, name)


def read_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    return loads(path.read_text(encoding="ascii"), name=path.stem)


def write_instance(inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(inst), encoding="ascii")


def build_model(inst: Instance, decomposition: str, **model_kw) -> Tuple[Model, List[int], DecompositionHandle]:
    """Post ``inst`` into a fresh model; returns the model, X vars and handle."""
    if decomposition not in DECOMPOSITIONS:
        raise ValueError(f"unknown decomposition {decomposition!r}")
    m = Model(**model_kw)
    xs = [m.new_var_values(d, f"X{i}") for i, d in enumerate(inst.domains)]
    n = m.new_var(inst.n_lo, inst.n_hi, "N")
    for (i, j), pairs in sorted(inst.constraints().items()):
        m.post(ForbiddenPairs(xs[i], xs[j], pairs))
    if decomposition == "occs":
        rel = {"atmost": "le", "atleast": "ge", "exact": "eq"}[inst.kind]
        h = build_simple_occurrence(m, xs, n, rel)
    else:
        variant = {
            "pyramid-bc": AtMostVariant.FAST_BC,
            "pyramid-rc": AtMostVariant.FAST_RC,
            "pyramid-naive": AtMostVariant.NAIVE_BC,
        }[decomposition]
        if inst.kind == "atmost":
            h = build_atmost_pyramid(m, xs, n, variant)
        elif inst.kind == "atleast":
            h = build_atleast_pyramid(m, xs, n)
        else:
            h = build_nvalue(m, xs, n, variant)
    return m, xs, h


def check_solution(inst: Instance, values: Sequence[int]) -> bool:
    """Evaluate ``values`` directly against the raw instance."""
    if len(values) != inst.n:
        return False
    if any(v not in dom for v, dom in zip(values, inst.domains)):
        return False
    for i, j, a, b in inst.forbidden:
        if values[i] == a and values[j] == b:
            return False
    card = len(set(values))
    if inst.kind == "atmost":
        return card <= inst.n_hi
    if inst.kind == "atleast":
        return card >= inst.n_lo
    return inst.n_lo <= card <= inst.n_hi
