import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import evaluate as oracle_eval
from oracles import levy_oracle
from pmseq.distfn import (
    EPS0,
    StepDistFn,
    distance_to_eps0,
    evaluate,
    levy_distance,
    levy_feasible,
    near_eps0,
    pointwise_leq,
    pointwise_max,
    pointwise_min,
    random_dplus,
    unit_step,
)


@st.composite
def dplus(draw, max_jumps=4):
    k = draw(st.integers(1, max_jumps))
    locs = sorted(draw(st.sets(st.integers(0, 60), min_size=k, max_size=k)))
    vals = sorted(draw(st.sets(st.integers(1, 20), min_size=k, max_size=k)))
    return StepDistFn(tuple((Fraction(l, 20), Fraction(v, 20)) for l, v in zip(locs, vals)), distance=True)


# --------------------------------------------------------------------------
# representation


def test_unit_step_at_zero():
    assert EPS0(0) == 0 and EPS0(Fraction(1, 2)) == 1


def test_unit_step_at_one_is_left_continuous():
    e1 = unit_step(1)
    assert e1(1) == 0 and e1(1.0001) == 1


def test_unit_step_at_minus_infinity():
    f = unit_step(-math.inf)
    assert f(-math.inf) == 0 and f(-10**9) == 1


def test_unit_step_at_infinity_is_zero_everywhere_finite():
    f = unit_step(math.inf)
    assert f(10**9) == 0 and f(math.inf) == 1 and f.in_dplus


def test_evaluate_piecewise():
    f = StepDistFn(((0, Fraction(2, 5)), (2, 1)))
    assert evaluate(f, 1) == Fraction(2, 5)
    assert evaluate(f, 0) == 0 and evaluate(f, 2) == Fraction(2, 5) and evaluate(f, 3) == 1


def test_float_and_string_inputs_are_exact():
    f = StepDistFn((("0.3", "1/2"), (0.7, 1)))
    assert f.jumps == ((Fraction(3, 10), Fraction(1, 2)), (Fraction(7, 10), Fraction(1)))


@pytest.mark.parametrize("jumps", [((1, 0.5), (1, 0.7)), ((2, 0.5), (1, 0.7)), ((0, 0.7), (1, 0.5)),
                                   ((0, 1.5),)])
def test_invalid_jumps_rejected(jumps):
    with pytest.raises(ValueError):
        StepDistFn(jumps)


def test_distance_flag_requires_nonnegative_support():
    with pytest.raises(ValueError):
        StepDistFn(((-1, 1),), distance=True)


def test_canonical_form_drops_empty_jumps():
    assert StepDistFn(((0, 0), (1, 1), (2, 1))) == unit_step(1)


def test_json_round_trip():
    f = StepDistFn(((0, Fraction(1, 3)), (math.inf, 1)), distance=True)
    assert StepDistFn.from_json(f.to_json()) == f


@settings(max_examples=60, deadline=None)
@given(dplus())
def test_evaluation_matches_grid_oracle(f):
    xs = [i / 40 for i in range(-10, 140)]
    assert [float(f(x)) for x in xs] == list(oracle_eval(f, xs))


# --------------------------------------------------------------------------
# order


def test_pointwise_leq_examples():
    assert pointwise_leq(unit_step(1), unit_step(2))  # eps_2 <= eps_1
    assert not pointwise_leq(unit_step(2), unit_step(1))


@settings(max_examples=60, deadline=None)
@given(dplus(), dplus())
def test_max_and_min_bound_both(f, g):
    hi, lo = pointwise_max(f, g), pointwise_min(f, g)
    for h in (f, g):
        assert pointwise_leq(hi, h) and pointwise_leq(h, lo)


# --------------------------------------------------------------------------
# Levy distance


def test_distance_between_unit_steps_matches_brute_force():
    d = levy_distance(unit_step(Fraction(3, 10)), EPS0)
    assert abs(d.value - 0.3) <= 1e-6
    assert abs(d.value - levy_oracle(unit_step(Fraction(3, 10)), EPS0)) <= 1e-6


def test_distance_saturates_at_one():
    assert abs(levy_distance(unit_step(2), EPS0).value - 1) <= 1e-8


def test_identical_functions_have_distance_zero():
    f = StepDistFn(((Fraction(1, 4), Fraction(1, 2)), (1, 1)))
    assert levy_distance(f, f).value == 0


def test_tolerance_bounds():
    with pytest.raises(ValueError):
        levy_distance(EPS0, unit_step(1), tol=1e-3)
    with pytest.raises(ValueError):
        levy_distance(EPS0, unit_step(1), tol=0)
    d = levy_distance(EPS0, unit_step(Fraction(1, 2)), tol=1e-7)
    assert d.tolerance <= 1e-7


def test_w_one_always_feasible():
    rng = random.Random(3)
    for _ in range(20):
        assert levy_feasible(random_dplus(rng), random_dplus(rng), 1)


@pytest.mark.parametrize("seed", range(12))
def test_distance_matches_brute_force_oracle(seed):
    rng = random.Random(seed)
    f, g = random_dplus(rng), random_dplus(rng)
    assert abs(levy_distance(f, g).value - levy_oracle(f, g)) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(dplus(), dplus(), dplus())
def test_metric_axioms(f, g, h):
    tol = 3e-9
    dfg, dgf = levy_distance(f, g).value, levy_distance(g, f).value
    assert abs(dfg - dgf) <= tol
    assert levy_distance(f, h).value <= dfg + levy_distance(g, h).value + tol
    assert (dfg == 0) == (f == g)


@settings(max_examples=80, deadline=None)
@given(dplus())
def test_exact_distance_to_eps0_agrees_with_bisection(h):
    assert abs(levy_distance(h, EPS0).value - float(distance_to_eps0(h))) <= 2e-9


def test_near_eps0_example():
    h = StepDistFn(((Fraction(1, 5), Fraction(9, 10)), (3, 1)), distance=True)
    assert distance_to_eps0(h) == Fraction(1, 5)
    assert near_eps0(h, Fraction(2, 5)) and not near_eps0(h, Fraction(1, 5))


@settings(max_examples=60, deadline=None)
@given(dplus(), st.integers(1, 19))
def test_threshold_equivalence(h, k):
    t = Fraction(k, 20)
    d = levy_distance(h, EPS0).value
    if abs(d - float(t)) > 2e-9:
        assert near_eps0(h, t) == (d < t)


def test_near_eps0_rejects_bad_input():
    with pytest.raises(ValueError):
        near_eps0(EPS0, 0)
    with pytest.raises(ValueError):
        near_eps0(StepDistFn(((-1, 1),)), Fraction(1, 2))


def test_random_dplus_is_in_dplus():
    rng = random.Random(0)
    assert all(random_dplus(rng).in_dplus for _ in range(100))
