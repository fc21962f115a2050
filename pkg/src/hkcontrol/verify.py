"""Property suites behind ``hkcontrol verify``.

Each suite returns a :class:`SuiteReport` mapping property names to pass/fail
results with a counterexample for the first failure.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .controllers import (
    Contraction,
    DumbbellTwoShot,
    Hybrid,
    MassPlacement,
    Passive,
    RandomControl,
    hybrid_m,
    search,
)
from .dynamics import (
    OpinionState,
    components,
    has_converged,
    hk_step,
    neighborhoods,
    total_width,
)
from .engine import influence_check, run
from .instances import (
    gen_dumbbell,
    gen_dumbbell_farm,
    gen_equidistant,
    gen_not_too_fast,
    gen_random,
    gen_three_cluster,
)
from .numeric import FAR, Mode, power_floor_int


@dataclass
class PropertyResult:
    passed: bool = True
    checked: int = 0
    counterexample: str | None = None

    def record(self, ok: bool, detail) -> None:
        self.checked += 1
        if not ok and self.passed:
            self.passed = False
            self.counterexample = detail() if callable(detail) else str(detail)


@dataclass
class SuiteReport:
    name: str
    properties: dict = field(default_factory=dict)

    def prop(self, name: str) -> PropertyResult:
        return self.properties.setdefault(name, PropertyResult())

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties.values())

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "properties": {
                k: {"passed": v.passed, "checked": v.checked, "counterexample": v.counterexample}
                for k, v in self.properties.items()
            },
        }


# dumbbell ------------------------------------------------------------------


def dumbbell_expected(k: int) -> dict:
    """Opinions at t=1 and t=2 after placing one agent at 2 then k-2.

    Keys are (t, 0-based agent index).
    """
    F = Fraction
    exp = {}
    for i in range(k):
        exp[(1, i)] = F(-1, k + 1)
    exp[(1, k)] = F(0)
    exp[(1, k + 1)] = F(5, 4)
    exp[(1, k + 2)] = F(2)
    exp[(1, k + 3)] = F(11, 4)
    for i in range(4, k + 1):
        exp[(1, k + i)] = F(i)
    for j in range(2 * k + 1, 3 * k + 1):
        exp[(1, j)] = k + F(1, k + 1)

    for i in range(k + 1):
        exp[(2, i)] = F(-k, (k + 1) ** 2)
    exp[(2, k + 1)] = F(13, 8)
    exp[(2, k + 2)] = F(2)
    exp[(2, k + 3)] = F(19, 8)
    exp[(2, k + 4)] = F(9, 2)
    for i in range(5, k - 3):
        exp[(2, k + i)] = F(i)
    exp[(2, 2 * k - 3)] = k - F(11, 4)
    exp[(2, 2 * k - 2)] = F(k - 2)
    exp[(2, 2 * k - 1)] = k - F(5, 4)
    exp[(2, 2 * k)] = k - F(1, (k + 1) * (k + 2))
    for i in range(1, k + 1):
        exp[(2, 2 * k + i)] = k + F(k, (k + 1) ** 2)
    return exp


def verify_golden(ks=(10, 12)) -> SuiteReport:
    rep = SuiteReport("golden")
    for k in ks:
        rec = run(gen_dumbbell(k, m=1), DumbbellTwoShot(), max_steps=3, record_trajectory=True)
        traj = {s.t: s for s in rec.trajectory}
        for (t, i), want in sorted(dumbbell_expected(k).items()):
            got = traj[t].nonstrategic[i]
            rep.prop(f"k={k}").record(got == want, lambda: f"x_{i}({t}) = {got}, expected {want}")
        rep.prop("directive").record(
            traj[0].strategic == (Fraction(2),) and traj[1].strategic == (Fraction(k - 2),),
            f"k={k}: directives {traj[0].strategic}, {traj[1].strategic}",
        )
    return rep


# invariants ----------------------------------------------------------------


def random_instance(seed: int, max_n: int = 10, max_m: int = 3, max_span: int = 6):
    rng = random.Random(seed)
    n = rng.randint(1, max_n)
    m = rng.randint(0, max_m)
    span = Fraction(rng.randint(0, 4 * max_span), 4)
    return gen_random(n, m=m, span=span, seed=seed)


def verify_invariants(seeds: int = 500, steps: int = 50, mode=Mode.RATIONAL) -> SuiteReport:
    rep = SuiteReport("invariants")
    for seed in range(seeds):
        inst = random_instance(seed).with_mode(mode)
        for label, ctrl in (("passive", Passive()), ("random", RandomControl(seed=seed))):
            rec = run(inst, ctrl, steps, False, until_converged=False)
            for name, res in rec.monitor_report.items():
                rep.prop(name).record(
                    res["passed"],
                    lambda: f"seed={seed} controller={label} t={res['first_violation']}: {res['example']}",
                )
    return rep


# mass placement ------------------------------------------------------------


def union_of_cliques(state: OpinionState) -> bool:
    """Every non-strategic neighborhood (non-strategic part) is a clique."""
    nbs = neighborhoods(state.__class__(state.t, state.nonstrategic, (), state.mode))
    for nb in nbs:
        for j in nb.nonstrategic:
            if nbs[j].nonstrategic != nb.nonstrategic:
                return False
    return True


def verify_mass(seeds: int = 100, max_n: int = 40, max_span: int = 12) -> SuiteReport:
    rep = SuiteReport("mass")
    for seed in range(seeds):
        rng = random.Random(10_000 + seed)
        n = rng.randint(1, max_n)
        span = rng.randint(0, max_span)
        inst = gen_random(n, m=9 * n, span=span, seed=seed)
        ctrl = MassPlacement()
        rec = run(inst, ctrl, 5, True)
        where = f"seed={seed} n={n} span={span}"
        rep.prop("converged_by_2").record(
            rec.converged and rec.convergence_time <= 2, f"{where}: T={rec.convergence_time}"
        )
        rep.prop("monitors").record(all(r["passed"] for r in rec.monitor_report.values()), where)
        if len(rec.trajectory) > 1:
            s1 = rec.trajectory[1]
            rep.prop("cliques_at_1").record(union_of_cliques(s1), where)
            off = [
                i for i, p in ctrl.mem.assignment.items() if abs(s1.nonstrategic[i] - p) > Fraction(1, 2)
            ]
            rep.prop("within_half_of_anchor").record(not off, f"{where}: agents {off}")
        rep.prop("budget").record(ctrl.mem.used <= 9 * n, f"{where}: used {ctrl.mem.used}")
    return rep


# three clusters -------------------------------------------------------------


def three_cluster_inequalities(x1, x2, x3, t: int, k: int) -> dict:
    F = Fraction
    d = F(t, k)
    return {
        "(1)": -F(2, 3) - d <= x1 <= -F(2, 3) + d,
        "(2)": F(2, 3) - d <= x3 <= F(2, 3) + d,
        "(3)": -(d + d * d) <= x2 <= d + d * d,
        "(4)": x2 - x1 <= 1 - F(1, k),
        "(5)": x3 - x2 <= 1 - F(1, k),
        "(6)": x3 - x1 > 1,
    }


def _adversarial_position(rng: random.Random, state: OpinionState, k: int):
    xs = state.nonstrategic
    pick = rng.random()
    if pick < 0.15:
        return FAR
    if pick < 0.5:
        x = xs[rng.choice((0, k * k, k * k + k))]
        return x + rng.choice((-1, 1))
    return Fraction(rng.randint(-128, 128), 64)


def verify_three_cluster(ks=(15, 24), runs: int = 200) -> SuiteReport:
    rep = SuiteReport("three-cluster")
    for k in ks:
        inst = gen_three_cluster(k)
        horizon = k // 8
        for r in range(runs):
            rng = random.Random(1000 * k + r)
            state = inst.state()
            for t in range(horizon + 1):
                xs = state.nonstrategic
                clusters = (xs[0], xs[k * k], xs[k * k + k])
                intact = (
                    xs[k * k - 1] == xs[0]
                    and xs[k * k + k - 1] == xs[k * k]
                    and xs[-1] == xs[k * k + k]
                )
                rep.prop("clusters_intact").record(intact, f"k={k} run={r} t={t}")
                for name, ok in three_cluster_inequalities(*clusters, t, k).items():
                    rep.prop(name).record(ok, lambda: f"k={k} run={r} t={t} x={clusters}")
                if t < horizon:
                    state = hk_step(state, (_adversarial_position(rng, state, k),))
    return rep


# not too fast ---------------------------------------------------------------


def verify_not_too_fast(ms=(1, 2, 3), random_directives: int = 1000) -> SuiteReport:
    rep = SuiteReport("not-too-fast")
    for m in ms:
        state = gen_not_too_fast(5, m=m).state()
        _, score = search(state, 1, branch_cap=None)
        rep.prop("exhaustive_horizon_1").record(score[0] >= 2, f"m={m}: converged in {score[0]} step(s)")
    rng = random.Random(5)
    lo, hi = Fraction(-1), Fraction(7, 3)
    for r in range(random_directives):
        m = rng.choice(ms)
        state = gen_not_too_fast(5 + rng.randint(0, 3), m=m).state()
        directive = tuple(
            FAR if rng.random() < 0.1 else Fraction(rng.randint(-3 * 64, 5 * 64), 64) for _ in range(m)
        )
        nxt = hk_step(state, directive)
        head = nxt.nonstrategic[:5]
        ok = len(set(head)) == 5 and lo <= min(head) and max(head) <= hi
        rep.prop("pigeonhole").record(ok, lambda: f"directive={directive} x(1)={head}")
        rep.prop("not_converged_at_1").record(not has_converged(nxt), f"directive={directive}")
    return rep


# hybrid ----------------------------------------------------------------------


def check_hybrid_run(inst, alpha, rep: SuiteReport, tag: str, max_steps: int = 100_000):
    ctrl = Hybrid(alpha)
    rec = run(inst, ctrl, max_steps, True, monitors=False, track_influence=False)
    traj = rec.trajectory
    for t, a, b in ctrl.mem.splits:
        after = traj[t + 1].nonstrategic
        rep.prop("split_separates").record(after[b] - after[a] > 1, f"{tag}: t={t} a={a} b={b}")
    for snap in traj[:-1]:
        if ctrl.mem.phase_start.get(2, 10**18) <= snap.t:
            break
        placed = sorted({p for p in snap.strategic if p is not FAR})
        for c in components(snap):
            inside = [p for p in placed if c.x_left <= p <= c.x_right]
            ok = all(q - p >= 2 for p, q in zip(inside, inside[1:]))
            rep.prop("placements_spaced").record(ok, f"{tag}: t={snap.t} positions {inside}")
    rep.prop("converges").record(rec.converged, f"{tag}: no convergence within {max_steps}")
    return rec


def verify_hybrid_splits() -> SuiteReport:
    rep = SuiteReport("hybrid-splits")
    inst = gen_equidistant(60, m=hybrid_m(60, 1))
    ctrl = Hybrid(1)
    state = inst.state()
    directive = ctrl(state)
    counts = Counter(p for p in directive if p is not FAR)
    want = {Fraction(0): 15, Fraction(3): 15, Fraction(7): 15, Fraction(10): 15}
    rep.prop("n60_directive").record(dict(counts) == want, f"got {dict(counts)}")
    nxt = hk_step(state, directive)
    for t, a, b in ctrl.mem.splits:
        rep.prop("n60_split_separates").record(
            nxt.nonstrategic[b] - nxt.nonstrategic[a] > 1, f"a={a} b={b}"
        )
    for n in (20, 45, 90):
        for alpha in (Fraction(1, 2), Fraction(1)):
            for name, base in (("equidistant", gen_equidistant(n)), ("random", gen_random(n, span=n // 2, seed=n))):
                check_hybrid_run(base.with_m(hybrid_m(n, alpha)), alpha, rep, f"{name} n={n} alpha={alpha}")
    return rep


# contraction -----------------------------------------------------------------


def weight_increased(prev: OpinionState, nxt: OpinionState) -> bool:
    w0, w1 = Counter(prev.nonstrategic), Counter(nxt.nonstrategic)
    return any(w1[y] > w0[x] for x, y in zip(prev.nonstrategic, nxt.nonstrategic))


def verify_contraction(seeds: int = 200, max_n: int = 30) -> SuiteReport:
    rep = SuiteReport("contraction")
    done = 0
    seed = 0
    while done < seeds:
        rng = random.Random(20_000 + seed)
        n = rng.randint(2, max_n)
        inst = gen_random(n, m=1, span=rng.randint(1, 2 * n), seed=seed)
        seed += 1
        if has_converged(inst.state()):
            continue
        done += 1
        bound = n * n + (n - 1) * (n + 1)
        rec = run(inst, Contraction(), bound + 1, True, track_influence=False)
        rep.prop("bounded_run_length").record(
            rec.converged and rec.convergence_time <= bound, f"seed={seed - 1} n={n}: T={rec.convergence_time}"
        )
        traj = rec.trajectory
        for prev, nxt in zip(traj, traj[1:]):
            w0, w1 = total_width(prev), total_width(nxt)
            case1 = weight_increased(prev, nxt) and w1 <= w0
            case2 = w1 <= w0 - Fraction(1, n + 1)
            rep.prop("step_contract").record(case1 or case2, f"seed={seed - 1} n={n} t={prev.t}: width {w0} -> {w1}")
        rep.prop("monitors").record(all(r["passed"] for r in rec.monitor_report.values()), f"seed={seed - 1}")
    return rep


# farms -------------------------------------------------------------------------


def verify_farm(runs: int = 20) -> SuiteReport:
    rep = SuiteReport("farm")
    for r in range(runs):
        rng = random.Random(30_000 + r)
        n = rng.randint(29_791, 40_000)
        m = power_floor_int(n, Fraction(1, 4))
        inst = gen_dumbbell_farm(n, 0, m=m, mode=Mode.FLOAT64)
        ctrl = RandomControl(seed=r, far_prob=0.25, active_steps=rng.randint(1, 12))
        rec = run(inst, ctrl, 100_000, False, monitors=False)
        wit = influence_check(rec, inst)
        rep.prop("witness_holds").record(
            wit.ok, f"run={r} n={n}: T={rec.convergence_time}, violating components {wit.violations}"
        )
        rep.prop("converged").record(rec.converged, f"run={r} n={n}")
    return rep


SUITES = {
    "golden": verify_golden,
    "invariants": verify_invariants,
    "mass": verify_mass,
    "three-cluster": verify_three_cluster,
    "not-too-fast": verify_not_too_fast,
    "hybrid-splits": verify_hybrid_splits,
    "contraction": verify_contraction,
    "farm": verify_farm,
}
