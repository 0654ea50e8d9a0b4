"""End-to-end acceptance checks; each test prints a verdict line at the end
of the session (see conftest.py)."""

import functools
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest
from brute import random_snapshot, run_builder

from nvdecomp import (
    AtMostVariant,
    Model,
    Outcome,
    SearchConfig,
    Status,
    build_atleast_pyramid,
    build_atmost_pyramid,
    build_nvalue,
    build_simple_occurrence,
    solve,
)
from nvdecomp.bench import build_model, check_solution, gen_queens, random_suite, run_bench
from nvdecomp.oracle import ConstraintKind, InstanceSnapshot, bc_closure, rc_closure

SWEEP_SIZE = 2000
SWEEP_SEED = 2024
SWEEP_BUDGET = 60.0
QUEENS_BUDGET = 120.0
PER_INSTANCE_TIMEOUT = 60.0
RUNNING = [{1, 2, 3, 5}, {2}, {2, 3, 4}, {4}, {3, 4}]

DESK_QUEENS = [(5, 2), (5, 3), (6, 2), (6, 3), (7, 4)]
EXPECTED_QUEENS = {(5, 2): Status.UNSAT, (5, 3): Status.SAT, (6, 2): Status.UNSAT, (6, 3): Status.SAT, (7, 4): Status.SAT}
ALL_DECOMPOSITIONS = ("occs", "pyramid-bc", "pyramid-rc", "pyramid-naive")


@functools.lru_cache(maxsize=None)
def sweep_instances():
    rng = random.Random(SWEEP_SEED)
    return tuple(random_snapshot(rng) for _ in range(SWEEP_SIZE))


@functools.lru_cache(maxsize=None)
def queens_run(n, nvalue, decomposition):
    inst = gen_queens(n, nvalue)
    start = time.perf_counter()
    model, xs, _ = build_model(inst, decomposition)
    r = solve(model, xs, SearchConfig(timeout=QUEENS_BUDGET))
    elapsed = time.perf_counter() - start
    ok = r.status is not Status.SAT or check_solution(inst, [r.solution[x] for x in xs])
    return r.status, r.stats, elapsed, ok


@functools.lru_cache(maxsize=None)
def class_e(decomposition):
    suite = random_suite("E", 20, 1)
    return run_bench(suite, [decomposition], SearchConfig(timeout=PER_INSTANCE_TIMEOUT))


def _mismatches(pairs, report, label):
    bad = [s for s, got, want in pairs if got != want]
    report(f"{label}: {len(pairs) - len(bad)}/{len(pairs)} agree")
    for s in bad[:3]:
        report(f"  mismatch on {s}")
    return len(bad)


def test_criterion_1_oracle_equivalence(report):
    start = time.perf_counter()
    snaps = sweep_instances()
    bad = 0
    for label, builder, kind, kw in [
        ("AtMost fast-bc", build_atmost_pyramid, ConstraintKind.ATMOST, {"variant": AtMostVariant.FAST_BC}),
        ("AtLeast", build_atleast_pyramid, ConstraintKind.ATLEAST, {}),
        ("NValue fast-bc", build_nvalue, ConstraintKind.NVALUE, {"variant": AtMostVariant.FAST_BC}),
    ]:
        pairs = [(s, run_builder(builder, s, **kw), bc_closure(kind, s)) for s in snaps]
        bad += _mismatches(pairs, report, label)
    disentailed = sum(bc_closure(ConstraintKind.NVALUE, s) is None for s in snaps)
    elapsed = time.perf_counter() - start
    report(f"{disentailed} NValue instances disentailed; {elapsed:.1f} s (budget {SWEEP_BUDGET:.0f} s)")
    assert bad == 0
    assert elapsed < SWEEP_BUDGET


def test_criterion_2_range_consistency(report):
    snaps = sweep_instances()
    pairs = [
        (s, run_builder(build_atmost_pyramid, s, variant=AtMostVariant.FAST_RC), rc_closure(ConstraintKind.ATMOST, s))
        for s in snaps
    ]
    holes = sum(
        1 for _, got, _ in pairs if got is not None and any(max(d) - min(d) + 1 != len(d) for d in got.domains)
    )
    bad = _mismatches(pairs, report, "AtMost fast-rc vs range closure")
    report(f"{holes} fixpoints contain holes")
    assert bad == 0


def test_criterion_3_simple_decomposition_gap(report):
    doms, n_dom = [{1, 2}, {3, 4}], {1}
    m = Model()
    xs = [m.new_var_values(d) for d in doms]
    build_simple_occurrence(m, xs, m.new_var_values(n_dom))
    simple = m.propagate()
    m = Model()
    xs = [m.new_var_values(d) for d in doms]
    build_nvalue(m, xs, m.new_var_values(n_dom))
    pyramid = m.propagate()
    oracle = bc_closure(ConstraintKind.NVALUE, InstanceSnapshot.of(doms, n_dom))
    report(f"simple decomposition: {simple.value}; NValue pyramids: {pyramid.value}; oracle: {oracle or 'disentailed'}")
    assert simple is Outcome.FIXPOINT
    assert pyramid is Outcome.FAILED
    assert oracle is None


def _post(builder, doms, n_dom, **kw):
    m = Model()
    xs = [m.new_var_values(d) for d in doms]
    n = m.new_var_values(n_dom)
    h = builder(m, xs, n, **kw)
    assert m.propagate() is Outcome.FIXPOINT
    return m, xs, n, h


def test_criterion_4_worked_examples(report):
    checks = {}

    # final NValue table on the running example
    for variant in (AtMostVariant.NAIVE_BC, AtMostVariant.FAST_BC):
        m, xs, n, _ = _post(build_nvalue, RUNNING, {1, 2, 5}, variant=variant)
        got = [m.values(x) for x in xs] + [m.values(n)]
        checks[f"NValue table ({variant.value})"] = (got, [[2], [2], [2, 3, 4], [4], [4], [2]])

    # AtMost fixpoint with N in {1, 2}; compared literally against X5=3
    for variant in AtMostVariant:
        m, xs, n, h = _post(build_atmost_pyramid, RUNNING, {1, 2}, variant=variant)
        got = {"X1": m.values(xs[0]), "X5": m.values(xs[4]), "N": m.values(n)}
        got.update({f"M{j}{j}": m.values(h.var("M", j, j)) for j in (1, 3, 5)})
        want = {"X1": [2], "X5": [3], "N": [2], "M11": [0], "M33": [0], "M55": [0]}
        checks[f"AtMost fixpoint ({variant.value})"] = (got, want)

    # AtLeast caps N
    m, xs, n, h = _post(build_atleast_pyramid, RUNNING, {1, 2, 5})
    got = {"min E24": m.min(h.var("E", 2, 4)), "5 in N": 5 in m.values(n), "max N <= 4": m.max(n) <= 4}
    checks["AtLeast N <= 4"] = (got, {"min E24": 1, "5 in N": False, "max N <= 4": True})

    # fast channel and the range-consistent interval punch
    m = Model()
    x1, x2, nv = m.new_var(1, 10), m.new_var(1, 10), m.new_var(1, 2)
    h = build_atmost_pyramid(m, [x1, x2], nv, variant=AtMostVariant.FAST_BC)
    m.set_min(x1, 5)
    m.set_max(x1, 9)
    m.propagate()
    got = {"Z14": m.values(h.var("Z", 0, 4)), "Z19": m.values(h.var("Z", 0, 9)), "min M59": m.min(h.var("M", 5, 9))}
    checks["X1 in [5,9]"] = (got, {"Z14": [0], "Z19": [1], "min M59": 1})
    m = Model()
    x1, x2, nv = m.new_var(1, 10), m.new_var(1, 10), m.new_var(1, 2)
    h = build_atmost_pyramid(m, [x1, x2], nv, variant=AtMostVariant.FAST_RC)
    m.set_max(h.var("M", 5, 9), 0)
    m.propagate()
    checks["M59 = 0 punches X1"] = (m.values(x1), [1, 2, 3, 4, 10])

    failed = []
    for name, (got, want) in checks.items():
        ok = got == want
        report(f"{'ok  ' if ok else 'DIFF'} {name}: got {got}" + ("" if ok else f", expected {want}"))
        if not ok:
            failed.append(name)
    closed = bc_closure(ConstraintKind.ATMOST, InstanceSnapshot.of(RUNNING, {1, 2}))
    report(f"brute-force AtMost closure for the same domains: {closed}")
    assert not failed, failed


@pytest.mark.slow
def test_criterion_5_queens_dominating_set(report):
    total = 0.0
    wrong = []
    for n, nv in DESK_QUEENS:
        status, stats, elapsed, verified = queens_run(n, nv, "pyramid-bc")
        total += elapsed
        report(f"({n},{nv}) {status.value:5s} backtracks {stats.backtracks:>6} nodes {stats.nodes:>6} {elapsed:6.2f} s")
        if status is not EXPECTED_QUEENS[n, nv] or not verified:
            wrong.append((n, nv))
    report(f"total {total:.1f} s (budget {QUEENS_BUDGET:.0f} s)")
    assert not wrong, wrong
    assert total <= QUEENS_BUDGET


@pytest.mark.slow
def test_criterion_6_pruning_dominance(report):
    worse = []
    for n, nv in DESK_QUEENS:
        bc = queens_run(n, nv, "pyramid-bc")[1].nodes
        occs = queens_run(n, nv, "occs")[1].nodes
        report(f"queens ({n},{nv}): pyramid-bc {bc} nodes, occs {occs} nodes")
        if bc > occs:
            worse.append(f"queens-{n}-{nv}")
    bc_rows, occs_rows = class_e("pyramid-bc").rows, class_e("occs").rows
    for a, b in zip(bc_rows, occs_rows):
        if a.nodes > b.nodes:
            worse.append(a.instance)
    report(
        f"class E: pyramid-bc {sum(r.nodes for r in bc_rows)} nodes, occs {sum(r.nodes for r in occs_rows)} nodes "
        f"over {len(bc_rows)} instances"
    )
    assert not worse, worse


def test_criterion_7_variant_agreement(report):
    snaps = sweep_instances()
    bad = 0
    for label, builder in (("AtMost", build_atmost_pyramid), ("NValue", build_nvalue)):
        pairs = [
            (s, run_builder(builder, s, variant=AtMostVariant.NAIVE_BC), run_builder(builder, s, variant=AtMostVariant.FAST_BC))
            for s in snaps
        ]
        bad += _mismatches(pairs, report, f"{label} naive-bc vs fast-bc")
    for variant in AtMostVariant:
        pairs = [
            (
                s,
                run_builder(build_atmost_pyramid, s, variant=variant, implied_sum=True),
                run_builder(build_atmost_pyramid, s, variant=variant, implied_sum=False),
            )
            for s in snaps
        ]
        bad += _mismatches(pairs, report, f"AtMost {variant.value} with vs without the implied sum")
    assert bad == 0


PROPERTY_SELECTION = [
    "tests/test_engine.py",
    "tests/test_propagators.py",
    "tests/test_oracle.py",
    "tests/test_domains.py",
    "tests/test_bench.py",
    "-k",
    "queue_order or closure or greedy or round_trip or random_operations or push_pop",
]


@pytest.mark.slow
def test_criterion_8_property_suites_and_class_e(report):
    root = Path(__file__).resolve().parent.parent
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SELECTION],
        cwd=root,
        capture_output=True,
        text=True,
    )
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()
    report(f"property suites: {tail}")
    unsolved = []
    for decomposition in ALL_DECOMPOSITIONS:
        rep = class_e(decomposition)
        (summary,) = rep.summaries
        slowest = max(r.time for r in rep.rows)
        report(
            f"class E {decomposition:13s} {summary.solved}/{summary.instances} solved, "
            f"avg backtracks {summary.avg_backtracks:.1f}, slowest {slowest:.2f} s"
        )
        unsolved += [(decomposition, r.instance) for r in rep.rows if not (r.solved and r.verified)]
    assert proc.returncode == 0
    assert not unsolved, unsolved
