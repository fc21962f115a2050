"""Acceptance gate: one test (or group of tests) per criterion.

Expected values are written out here independently of the package's own
verification helpers. Run with ``pytest tests/test_acceptance.py -v``; the
terminal summary prints one PASS/FAIL line per criterion.
"""
import math
import random
import time
from collections import Counter
from fractions import Fraction as F

import pytest

from hkcontrol.bench import SuiteConfig, fit_exponent, run_suite
from hkcontrol.controllers import (
    Contraction,
    Cutter,
    DumbbellTwoShot,
    Hybrid,
    MassPlacement,
    Passive,
    RandomControl,
    hybrid_m,
    search,
)
from hkcontrol.dynamics import OpinionState, components, has_converged, hk_step, total_width
from hkcontrol.engine import influence_check, run
from hkcontrol.instances import (
    gen_dumbbell,
    gen_dumbbell_farm,
    gen_equidistant,
    gen_not_too_fast,
    gen_random,
    gen_three_cluster,
)
from hkcontrol.numeric import FAR, Mode, power_floor_int
from hkcontrol.verify import random_instance

crit = pytest.mark.criterion


def _golden(k):
    """Opinions at t=1 and t=2 listed agent by agent (0-based index order)."""
    t1 = [F(-1, k + 1)] * k + [F(0), F(5, 4), F(2), F(11, 4)]
    t1 += [F(i) for i in range(4, k + 1)]
    t1 += [k + F(1, k + 1)] * k
    t2 = [F(-k, (k + 1) ** 2)] * (k + 1) + [F(13, 8), F(2), F(19, 8), F(9, 2)]
    t2 += [F(i) for i in range(5, k - 3)]
    t2 += [k - F(11, 4), F(k - 2), k - F(5, 4), k - F(1, (k + 1) * (k + 2))]
    t2 += [k + F(k, (k + 1) ** 2)] * k
    return t1, t2


# 1 -------------------------------------------------------------------------


@crit(1, "golden dumbbell trajectory (exact, k=10,12)")
@pytest.mark.parametrize("k", [10, 12])
def test_golden_dumbbell(k):
    start = time.perf_counter()
    rec = run(gen_dumbbell(k, m=1), DumbbellTwoShot(), max_steps=2, record_trajectory=True)
    elapsed = time.perf_counter() - start
    want1, want2 = _golden(k)
    assert len(want1) == len(want2) == 3 * k + 1
    assert list(rec.trajectory[1].nonstrategic) == want1
    assert list(rec.trajectory[2].nonstrategic) == want2
    assert rec.trajectory[0].strategic == (F(2),)
    assert rec.trajectory[1].strategic == (F(k - 2),)
    assert elapsed < 1.0


# 2 -------------------------------------------------------------------------


@crit(2, "equidistant passive T/n in [0.78, 0.90]")
@pytest.mark.parametrize("n", [120, 240, 480])
def test_equidistant_baseline(n):
    rec = run(gen_equidistant(n, mode=Mode.FLOAT64), Passive(), monitors=False, track_influence=False)
    ratio = rec.convergence_time / n
    print(f"n={n} T={rec.convergence_time} T/n={ratio:.4f}")
    assert 0.78 <= ratio <= 0.90


# 3 -------------------------------------------------------------------------


@crit(3, "dumbbell passive growth exponent >= 1.7")
def test_dumbbell_passive_growth():
    start = time.perf_counter()
    config = SuiteConfig(
        generator="dumbbell",
        grid=[{"k": k} for k in (10, 15, 20, 25, 30, 35, 40)],
        controller="passive",
        mode="float64",
    )
    result = run_suite(config)
    assert [r["n"] for r in result.rows] == [3 * k + 1 for k in (10, 15, 20, 25, 30, 35, 40)]
    print(f"exponent={result.exponent:.4f} residual={result.residual:.4f}")
    assert result.exponent >= 1.7
    assert time.perf_counter() - start < 60


# 4 -------------------------------------------------------------------------


@crit(4, "cutter exponent <= 0.9 and faster than passive")
def test_cutter_acceleration():
    start = time.perf_counter()
    rows = []
    for n in (81, 256, 625, 1296):
        inst = gen_equidistant(n, mode=Mode.FLOAT64)
        cut = run(inst.with_m(1), Cutter(), monitors=False, track_influence=False)
        pas = run(inst, Passive(), monitors=False, track_influence=False)
        print(f"n={n} cutter={cut.convergence_time} passive={pas.convergence_time}")
        assert cut.converged
        assert cut.convergence_time < pas.convergence_time
        rows.append({"n": n, "convergence_time": cut.convergence_time})
    exponent, _ = fit_exponent(rows)
    print(f"cutter exponent={exponent:.4f}")
    assert exponent <= 0.9
    assert time.perf_counter() - start < 60


# 5 -------------------------------------------------------------------------


def _influence_graph_is_cliques(opinions):
    """Within-distance-1 relation on non-strategic opinions is transitive."""
    close = lambda a, b: abs(a - b) <= 1  # noqa: E731
    n = len(opinions)
    for i in range(n):
        for j in range(n):
            if not close(opinions[i], opinions[j]):
                continue
            for h in range(n):
                if close(opinions[j], opinions[h]) and not close(opinions[i], opinions[h]):
                    return False
    return True


@crit(5, "mass placement converges by t=2 with clique structure at t=1")
def test_mass_placement():
    start = time.perf_counter()
    for seed in range(100):
        rng = random.Random(10_000 + seed)
        n = rng.randint(1, 40)
        span = rng.randint(0, 12)
        inst = gen_random(n, m=9 * n, span=span, seed=seed)
        rec = run(inst, MassPlacement(), max_steps=3, record_trajectory=True)
        assert rec.converged and rec.convergence_time <= 2, (seed, rec.convergence_time)
        if len(rec.trajectory) > 1:
            at1 = rec.trajectory[1].nonstrategic
            assert all(isinstance(x, F) for x in at1)
            assert _influence_graph_is_cliques(at1), seed
    assert time.perf_counter() - start < 30


# 6 -------------------------------------------------------------------------


@crit(6, "not-too-fast: no directive converges by t=1")
@pytest.mark.parametrize("m", [1, 2, 3])
def test_not_too_fast_exhaustive(m):
    state = gen_not_too_fast(5, m=m).state()
    _, (steps, _) = search(state, horizon=1, branch_cap=None)
    assert steps >= 2


@crit(6, "not-too-fast: no directive converges by t=1")
def test_not_too_fast_pigeonhole():
    rng = random.Random(2024)
    for _ in range(1000):
        m = rng.randint(1, 3)
        state = gen_not_too_fast(5, m=m).state()
        directive = tuple(
            FAR if rng.random() < 0.1 else F(rng.randint(-256, 448), 64) for _ in range(m)
        )
        head = hk_step(state, directive).nonstrategic
        assert len(set(head)) == 5
        assert max(head) - min(head) <= F(10, 3)


# 7 -------------------------------------------------------------------------


def _three_cluster_ok(x1, x2, x3, t, k):
    d = F(t, k)
    return (
        abs(x1 + F(2, 3)) <= d
        and abs(x3 - F(2, 3)) <= d
        and abs(x2) <= d + d * d
        and x2 - x1 <= 1 - F(1, k)
        and x3 - x2 <= 1 - F(1, k)
        and x3 - x1 > 1
    )


@crit(7, "three-cluster inequalities hold for t <= floor(k/8)")
@pytest.mark.parametrize("k", [15, 24])
def test_three_cluster_robustness(k):
    start = time.perf_counter()
    base = gen_three_cluster(k).state()
    assert base.n == 2 * k * k + k
    for r in range(200):
        rng = random.Random(7_000 * k + r)
        state = base
        for t in range(k // 8 + 1):
            xs = state.nonstrategic
            groups = [xs[: k * k], xs[k * k : k * k + k], xs[k * k + k :]]
            assert all(len(set(g)) == 1 for g in groups)
            assert _three_cluster_ok(groups[0][0], groups[1][0], groups[2][0], t, k), (r, t)
            anchor = rng.choice([groups[0][0], groups[1][0], groups[2][0]])
            pos = rng.choice([FAR, anchor - 1, anchor + 1, F(rng.randint(-160, 160), 64)])
            state = hk_step(state, (pos,))
    assert time.perf_counter() - start < 120


# 8 -------------------------------------------------------------------------


@crit(8, "contraction per-step contract and run-length bound")
def test_contraction_contract():
    checked = 0
    seed = 0
    while checked < 200:
        rng = random.Random(50_000 + seed)
        n = rng.randint(2, 30)
        inst = gen_random(n, m=1, span=rng.randint(1, 2 * n), seed=seed)
        seed += 1
        if has_converged(inst.state()):
            continue
        checked += 1
        bound = n * n + (n - 1) * (n + 1)
        rec = run(inst, Contraction(), bound + 1, True)
        assert rec.converged and rec.convergence_time <= bound
        for prev, nxt in zip(rec.trajectory, rec.trajectory[1:]):
            w0, w1 = total_width(prev), total_width(nxt)
            c0, c1 = Counter(prev.nonstrategic), Counter(nxt.nonstrategic)
            heavier = any(c1[y] > c0[x] for x, y in zip(prev.nonstrategic, nxt.nonstrategic))
            assert (heavier and w1 <= w0) or w0 - w1 >= F(1, n + 1), (seed - 1, prev.t)


# 9 -------------------------------------------------------------------------


@crit(9, "invariant monitors: zero violations on 500 random instances")
def test_invariant_suite():
    required = {
        "order",
        "bounded_move",
        "weight_monotone",
        "coincidence",
        "equality_persistence",
        "hull_containment",
    }
    separation_runs = 0
    for seed in range(500):
        inst = random_instance(seed)
        assert inst.mode is Mode.RATIONAL
        for ctrl in (Passive(), RandomControl(seed=seed)):
            rec = run(inst, ctrl, 50, False, until_converged=False)
            assert rec.steps_executed == 50
            assert required <= set(rec.monitor_report)
            if inst.m == 0:
                assert "separation_persistence" in rec.monitor_report
                separation_runs += 1
            bad = {k: v for k, v in rec.monitor_report.items() if not v["passed"]}
            assert not bad, (seed, ctrl.name, bad)
    assert separation_runs > 0


# 10 ------------------------------------------------------------------------


@crit(10, "hybrid split correctness and smoke scaling")
def test_hybrid_split_n60():
    inst = gen_equidistant(60, m=hybrid_m(60, 1))
    assert inst.m == 72
    state = inst.state()
    ctrl = Hybrid(1)
    directive = ctrl(state)
    placed = Counter(p for p in directive if p is not FAR)
    assert placed == {F(0): 15, F(3): 15, F(7): 15, F(10): 15}
    nxt = hk_step(state, directive)
    assert ctrl.mem.splits
    for _, a, b in ctrl.mem.splits:
        assert nxt.nonstrategic[b] - nxt.nonstrategic[a] > 1


@crit(10, "hybrid split correctness and smoke scaling")
@pytest.mark.parametrize("alpha", [F(1, 2), F(1)])
@pytest.mark.parametrize("n", [100, 400])
def test_hybrid_smoke(alpha, n):
    m = hybrid_m(n, alpha)
    for inst in (
        gen_equidistant(n, mode=Mode.FLOAT64),
        gen_dumbbell_farm(n, alpha, size=31, mode=Mode.FLOAT64),
    ):
        hyb = run(inst.with_m(m), Hybrid(alpha), monitors=False, track_influence=False)
        pas = run(inst, Passive(), monitors=False, track_influence=False)
        print(f"{inst.name} n={n} alpha={alpha}: hybrid={hyb.convergence_time} passive={pas.convergence_time}")
        assert hyb.converged
        assert hyb.convergence_time <= pas.convergence_time


# 11 ------------------------------------------------------------------------


@crit(11, "farm influence witness: zero violations over 20 runs")
def test_farm_witness():
    violations = 0
    untouched_total = 0
    for r in range(20):
        rng = random.Random(90_000 + r)
        n = rng.randint(29_791, 36_000)
        m = power_floor_int(n, F(1, 4))
        assert m == math.floor(n ** 0.25 + 1e-12)
        inst = gen_dumbbell_farm(n, 0, m=m, mode=Mode.FLOAT64)
        ctrl = RandomControl(seed=r, active_steps=rng.randint(1, 10))
        rec = run(inst, ctrl, 100_000, False, monitors=False)
        assert rec.converged
        wit = influence_check(rec, inst)
        untouched_total += len(wit.untouched)
        for c in wit.untouched:
            if wit.passive_times[c] is None or rec.convergence_time < wit.passive_times[c]:
                violations += 1
        assert rec.convergence_time >= wit.witness
    assert untouched_total > 0
    assert violations == 0
