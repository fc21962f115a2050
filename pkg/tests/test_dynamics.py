from collections import Counter
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hkcontrol.dynamics import (
    OpinionState,
    component_labels,
    components,
    has_converged,
    hk_step,
    is_frozen,
    neighborhoods,
    total_width,
    weight_table,
)
from hkcontrol.errors import InvalidParamError, RationalOverflowError, WrongMError
from hkcontrol.instances import gen_dumbbell, gen_three_cluster
from hkcontrol.numeric import FAR, Mode


def S(opinions, m=0, mode=Mode.RATIONAL):
    return OpinionState.initial([F(x) if mode is Mode.RATIONAL else x for x in opinions], m, mode)


def naive_step(xs, ps):
    """Direct evaluation of the averaging rule over all pairs."""
    everyone = list(xs) + [p for p in ps if p is not FAR]
    out = []
    for x in xs:
        near = [y for y in everyone if abs(y - x) <= 1]
        out.append(sum(near, F(0)) / len(near))
    return out


# strategies ------------------------------------------------------------------

grid = st.integers(-6 * 12, 6 * 12).map(lambda v: F(v, 12))


@st.composite
def states_with_directive(draw, max_n=9, max_m=3):
    xs = sorted(draw(st.lists(grid, min_size=1, max_size=max_n)))
    m = draw(st.integers(0, max_m))
    ps = tuple(draw(st.one_of(st.just(FAR), grid)) for _ in range(m))
    return OpinionState.initial(xs, m), ps


# neighborhoods ---------------------------------------------------------------


def test_neighborhood_singleton():
    (nb,) = neighborhoods(S([0]))
    assert nb.members == {("N", 0)}


def test_neighborhoods_unit_spacing():
    nbs = neighborhoods(S([0, 1, 2]))
    assert [set(nb.nonstrategic) for nb in nbs] == [{0, 1}, {0, 1, 2}, {1, 2}]


def test_neighborhood_dumbbell_with_strategic_at_two():
    k = 12
    state = gen_dumbbell(k, m=1).state()
    nbs = neighborhoods(state, (F(2),))
    i = state.nonstrategic.index(F(1))
    assert set(nbs[i].nonstrategic) == {i - 1, i, i + 1}
    assert nbs[i].strategic == (0,)
    assert len(nbs[i]) == 4


def test_far_never_in_neighborhood():
    nbs = neighborhoods(S([0, 1, 50], m=2), (FAR, FAR))
    assert all(nb.strategic == () for nb in nbs)


@given(states_with_directive())
def test_neighborhoods_match_definition(sd):
    state, ps = sd
    xs = state.nonstrategic
    for nb in neighborhoods(state, ps):
        x = xs[nb.agent]
        assert set(nb.nonstrategic) == {j for j, y in enumerate(xs) if abs(y - x) <= 1}
        assert set(nb.strategic) == {s for s, p in enumerate(ps) if p is not FAR and abs(p - x) <= 1}


# hk_step ---------------------------------------------------------------------


def test_step_fixed_point():
    assert hk_step(S([5])).nonstrategic == (F(5),)


def test_step_equidistant_three():
    nxt = hk_step(S([0, 1, 2]))
    assert nxt.nonstrategic == (F(1, 2), F(1), F(3, 2))
    assert nxt.t == 1
    assert hk_step(nxt).nonstrategic == (F(1),) * 3


@pytest.mark.parametrize("k", [10, 11, 12, 20])
def test_step_dumbbell_first_placement(k):
    nxt = hk_step(gen_dumbbell(k, m=1).state(), (F(2),))
    xs = nxt.nonstrategic
    assert xs[:k] == (F(-1, k + 1),) * k
    assert xs[k : k + 4] == (F(0), F(5, 4), F(2), F(11, 4))
    assert xs[2 * k + 1 :] == (k + F(1, k + 1),) * k
    assert nxt.strategic == (F(2),)


def test_step_directive_length_checked():
    with pytest.raises(WrongMError):
        hk_step(S([0, 1], m=1), (F(0), F(1)))


def test_step_overflow_budget():
    state = S(range(8))
    with pytest.raises(RationalOverflowError):
        for _ in range(10):
            state = hk_step(state, overflow_bits=8)
    assert hk_step(S(range(8)), overflow_bits=None).t == 1


def test_state_validation():
    with pytest.raises(InvalidParamError):
        OpinionState.initial([F(1), F(0)])
    with pytest.raises(InvalidParamError):
        OpinionState.initial([])
    with pytest.raises(InvalidParamError):
        OpinionState(0, (0.5,), (), Mode.RATIONAL).validate()


@given(states_with_directive())
def test_step_matches_naive_evaluation(sd):
    state, ps = sd
    assert list(hk_step(state, ps).nonstrategic) == naive_step(state.nonstrategic, ps)


@given(states_with_directive())
def test_step_structural_invariants(sd):
    state, ps = sd
    xs = state.nonstrategic
    ys = hk_step(state, ps).nonstrategic
    # order preserved
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    # bounded move
    assert all(abs(y - x) <= 1 for x, y in zip(xs, ys))
    # weight monotone (restated)
    w0, w1 = Counter(xs), Counter(ys)
    assert all(w1[y] >= w0[x] for x, y in zip(xs, ys))
    # equality persists
    assert all(ys[i] == ys[i + 1] for i in range(len(xs) - 1) if xs[i] == xs[i + 1])


@given(states_with_directive())
def test_coincidence_both_directions(sd):
    state, ps = sd
    ys = hk_step(state, ps).nonstrategic
    nbs = neighborhoods(state, ps)
    for i in range(len(ys)):
        for j in range(len(ys)):
            assert (ys[i] == ys[j]) == (nbs[i].members == nbs[j].members)


@given(states_with_directive(max_m=0))
@settings(max_examples=60)
def test_passive_components_never_merge(sd):
    state, _ = sd
    labels = component_labels(state)
    for _ in range(10):
        state = hk_step(state)
        xs = state.nonstrategic
        for i in range(len(xs) - 1):
            if labels[i] != labels[i + 1]:
                assert xs[i + 1] - xs[i] > 1


@given(states_with_directive())
def test_hull_containment_when_influencers_inside(sd):
    state, ps = sd
    ys = hk_step(state, ps).nonstrategic
    for c in components(state):
        near = [p for p in ps if p is not FAR and any(abs(p - state.nonstrategic[i]) <= 1 for i in c.members)]
        if all(c.x_left <= p <= c.x_right for p in near):
            assert all(c.x_left <= ys[i] <= c.x_right for i in c.members)


def test_float_mode_agrees_with_rational_on_dyadics():
    xs = [0, 0.5, 1.25, 2, 2.75, 4]
    rat = hk_step(S([F(x) for x in xs]))
    flt = hk_step(S(xs, mode=Mode.FLOAT64))
    assert [float(x) for x in rat.nonstrategic] == pytest.approx(list(flt.nonstrategic), abs=1e-12)


def test_float_identical_neighborhoods_give_identical_values():
    state = S([0.1, 0.1, 0.1, 0.7, 0.7, 1.3], mode=Mode.FLOAT64)
    ys = hk_step(state).nonstrategic
    assert ys[0] == ys[1] == ys[2]
    assert ys[3] == ys[4]


# components / width / convergence ---------------------------------------------


def test_components_split_on_large_gap():
    comps = components(S([0, F(1, 2), 3]))
    assert [(c.left, c.right, c.width) for c in comps] == [(0, 1, F(1, 2)), (2, 2, 0)]


def test_components_equidistant_single():
    (c,) = components(S(range(5)))
    assert c.width == 4 and c.size == 5


def test_components_three_cluster():
    k = 15
    (c,) = components(gen_three_cluster(k).state())
    assert c.size == 2 * k * k + k
    assert c.width == F(4, 3)


@pytest.mark.parametrize(
    "opinions,width",
    [([2, 2, 2], 0), (list(range(7)), 6), ([0, F(1, 2), 3, F(16, 5)], F(7, 10))],
)
def test_total_width(opinions, width):
    assert total_width(S(opinions)) == width


def test_converged_all_equal():
    state = S([0, 0, 0])
    assert has_converged(state)
    assert weight_table(state)[F(0)] == 3
    assert all(is_frozen(state, i) for i in range(3))


def test_not_converged_at_distance_exactly_one():
    state = S([0, 1])
    assert not has_converged(state)
    assert not is_frozen(state, 0)


def test_converged_with_far_gap():
    state = S([0, 0, F(5, 2)])
    assert has_converged(state)
    w = weight_table(state)
    assert [w[x] for x in state.nonstrategic] == [2, 2, 1]


@given(states_with_directive(max_m=0))
def test_converged_iff_every_agent_frozen(sd):
    state, _ = sd
    assert has_converged(state) == all(is_frozen(state, i) for i in range(state.n))


@given(states_with_directive(max_m=0))
def test_converged_iff_pairwise_rule(sd):
    state, _ = sd
    xs = state.nonstrategic
    rule = all(a == b or abs(a - b) > 1 for a in xs for b in xs)
    assert has_converged(state) == rule


def test_materialized_far_sits_outside():
    state = S([0, 3], m=2)
    far = state.materialized_strategic()
    assert far == (F(5), F(5))
