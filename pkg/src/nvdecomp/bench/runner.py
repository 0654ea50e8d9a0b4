"""Solve instance suites and summarise the results."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import List, Optional, Sequence, Union

from ..search import SearchConfig, Status, solve
from .instances import Instance, build_model, check_solution

__all__ = ["BenchReport", "BenchRow", "Summary", "run_bench", "run_one"]


@dataclass
class BenchRow:
    instance: str
    decomposition: str
    status: str
    solved: bool
    backtracks: int
    nodes: int
    fails: int
    time: float
    # None when there is no solution to check
    verified: Optional[bool] = None


@dataclass
class Summary:
    decomposition: str
    instances: int
    solved: int
    avg_backtracks: float
    avg_time: float


@dataclass
class BenchReport:
    rows: List[BenchRow]
    summaries: List[Summary]

    def table(self) -> str:
        return format_table(self.rows) + "\n\n" + format_summaries(self.summaries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = [f.name for f in fields(BenchRow)]
        w = csv.DictWriter(buf, fieldnames=names, lineterminator="\r\n")
        w.writeheader()
        for r in self.rows:
            d = asdict(r)
            d["time"] = f"{r.time:.3f}"
            d["verified"] = "" if r.verified is None else str(r.verified).lower()
            d["solved"] = str(r.solved).lower()
            w.writerow(d)
        return buf.getvalue()

    def write_csv(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="")


def run_one(inst: Instance, decomposition: str, cfg: SearchConfig) -> BenchRow:
    """Build, solve and check a single instance."""
    m, xs, _ = build_model(inst, decomposition)
    res = solve(m, xs, cfg)
    verified = None
    if res.status is Status.SAT:
        verified = check_solution(inst, [res.solution[x] for x in xs])
    return BenchRow(
        instance=inst.name,
        decomposition=decomposition,
        status=res.status.value,
        solved=res.status is not Status.TIMEOUT,
        backtracks=res.stats.backtracks,
        nodes=res.stats.nodes,
        fails=res.stats.fails,
        # search time; the deadline is checked between chunks, so a timed-out
        # run may overshoot it by a few milliseconds
        time=min(res.stats.wall_time, cfg.timeout),
        verified=verified,
    )


def _summarise(rows: Sequence[BenchRow], decomposition: str) -> Summary:
    mine = [r for r in rows if r.decomposition == decomposition]
    done = [r for r in mine if r.solved]
    k = len(done)
    return Summary(
        decomposition,
        len(mine),
        k,
        sum(r.backtracks for r in done) / k if k else 0.0,
        sum(r.time for r in done) / k if k else 0.0,
    )


def run_bench(
    suite: Sequence[Instance],
    decompositions: Union[str, Sequence[str]],
    cfg: Optional[SearchConfig] = None,
    workers: int = 1,
) -> BenchReport:
    """Solve every instance with every named decomposition.

    Timeouts are recorded as unsolved rows. With ``workers > 1`` instances run
    in separate processes; rows come back in suite order either way.
    """
    cfg = cfg or SearchConfig()
    if isinstance(decompositions, str):
        decompositions = [decompositions]
    jobs = [(inst, d) for d in decompositions for inst in suite]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_one, inst, d, cfg) for inst, d in jobs]
            rows = [f.result() for f in futures]
    else:
        rows = [run_one(inst, d, cfg) for inst, d in jobs]
    return BenchReport(rows, [_summarise(rows, d) for d in decompositions])


def format_table(rows: Sequence[BenchRow]) -> str:
    head = ("instance", "decomposition", "status", "backtracks", "nodes", "time", "verified")
    body = [
        (
            r.instance,
            r.decomposition,
            r.status,
            str(r.backtracks),
            str(r.nodes),
            f"{r.time:.2f}",
            "-" if r.verified is None else ("yes" if r.verified else "NO"),
        )
        for r in rows
    ]
    return _align(head, body, right={3, 4, 5})


def format_summaries(sums: Sequence[Summary]) -> str:
    head = ("decomposition", "solved", "avg backtracks", "avg time")
    body = [
        (s.decomposition, f"{s.solved}/{s.instances}", f"{s.avg_backtracks:.1f}", f"{s.avg_time:.2f}")
        for s in sums
    ]
    return _align(head, body, right={1, 2, 3})


def _align(head, body, right=frozenset()) -> str:
    widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]

    def line(row):
        cells = [c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))]
        return "  ".join(cells).rstrip()

    return "\n".join([line(head), line(tuple("-" * w for w in widths))] + [line(r) for r in body])
