import itertools
import random
from fractions import Fraction

import pytest

from pmseq.distfn import EPS0, StepDistFn, random_dplus, unit_step
from pmseq.pmspace import (
    AxiomError,
    PMSpace,
    build_equilateral,
    build_simple,
    find_eta,
    strong_closure,
    strong_neighborhood,
    t_grid,
    verify_axioms,
    vicinity,
)
from pmseq.triangle import TAU_LUK, TAU_MIN, TAU_PROD

HALF_STEP = StepDistFn(((Fraction(1, 10), Fraction(1, 2)), (Fraction(1, 2), 1)), distance=True)


def line_space():
    return build_simple("abc", {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 2}, HALF_STEP, TAU_MIN)


def test_equilateral_spaces_are_menger_spaces_for_every_tau():
    rng = random.Random(2)
    for tau in (TAU_MIN, TAU_PROD, TAU_LUK):
        for n in (1, 2, 5, 12):
            F0 = random_dplus(rng)
            if F0 == EPS0:
                continue
            assert verify_axioms(build_equilateral(range(n), F0, tau)).ok


def test_simple_space_distances_scale():
    sp = line_space()
    assert sp.F("a", "c") == HALF_STEP.scaled(2)
    assert sp.F("c", "a") == sp.F("a", "c")


def test_simple_space_rejects_non_metric():
    with pytest.raises(ValueError):
        build_simple("abc", {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 3}, HALF_STEP, TAU_MIN)
    with pytest.raises(ValueError):
        build_simple("ab", {("a", "b"): 0}, HALF_STEP, TAU_MIN)
    with pytest.raises(ValueError):
        build_simple("ab", {("a", "b"): 1}, EPS0, TAU_MIN)


def test_simple_space_accepts_matrix_and_callable():
    m = [[0, 1], [1, 0]]
    assert build_simple("ab", m, HALF_STEP, TAU_MIN).F("a", "b") == HALF_STEP
    assert build_simple("ab", lambda p, q: 2, HALF_STEP, TAU_MIN).F("a", "b") == HALF_STEP.scaled(2)


def _space(dist):
    return PMSpace(("a", "b", "c"), dist, TAU_MIN)


def test_axiom_failures_carry_witnesses():
    f = unit_step(1)
    rep = verify_axioms(PMSpace(("a", "b"), {("a", "b"): StepDistFn(((-1, 1),))}, TAU_MIN))
    assert (rep.ok, rep.axiom) == (False, 0)
    rep = verify_axioms(PMSpace(("a", "b"), {("a", "b"): f, ("a", "a"): f}, TAU_MIN))
    assert (rep.axiom, rep.witness) == (1, ("a", "a"))
    rep = verify_axioms(PMSpace(("a", "b"), {("a", "b"): EPS0}, TAU_MIN))
    assert rep.axiom == 2
    rep = verify_axioms(PMSpace(("a", "b"), {("a", "b"): f, ("b", "a"): unit_step(2)}, TAU_MIN))
    assert (rep.axiom, rep.witness) == (3, ("a", "b"))
    # a "triangle" that is too long: F_ac = eps_5 but F_ab = F_bc = eps_1
    rep = verify_axioms(_space({("a", "b"): f, ("b", "c"): f, ("a", "c"): unit_step(5)}))
    assert rep.axiom == 4 and len(rep.witness) == 3


def test_builders_raise_on_invalid_space():
    with pytest.raises(AxiomError):
        build_equilateral("ab", EPS0, TAU_MIN)


def test_t_star_and_grid():
    sp = line_space()
    assert sp.t_star == Fraction(1, 2)
    assert t_grid(sp) == (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2))
    assert build_equilateral(["x"], HALF_STEP, TAU_MIN).t_star == 1


def test_neighborhoods_are_singletons_up_to_t_star():
    sp = line_space()
    for x in sp.points:
        assert strong_neighborhood(sp, x, sp.t_star) == {x}
        assert strong_neighborhood(sp, x, sp.t_star / 2) == {x}
    assert strong_neighborhood(sp, "b", 1) == {"a", "b", "c"}
    with pytest.raises(ValueError):
        strong_neighborhood(sp, "a", 0)
    with pytest.raises(KeyError):
        strong_neighborhood(sp, "z", 1)


def test_closure_of_finite_sets_is_the_set():
    sp = line_space()
    for r in range(1, 4):
        for A in itertools.combinations(sp.points, r):
            assert strong_closure(sp, A) == set(A)
    with pytest.raises(ValueError):
        strong_closure(sp, [])


def test_vicinity_and_eta():
    # F_ab = eps_{1/5}, F_ac = eps_{2/5}: distances to eps_0 are 1/5 and 2/5
    sp = build_simple("abc", {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 2}, unit_step(Fraction(1, 5)), TAU_MIN)
    r = Fraction(3, 10)
    V = vicinity(sp, r)
    assert ("a", "b") in V and ("a", "c") not in V
    eta = find_eta(sp, r)
    W = vicinity(sp, eta)
    assert W.compose(W) <= V.pairs
    assert eta <= sp.t_star
    assert find_eta(sp, Fraction(1)) == Fraction(1)


def test_eta_below_t_star_gives_diagonal():
    sp = line_space()
    assert vicinity(sp, sp.t_star / 2).pairs == {(p, p) for p in sp.points}


def test_json_round_trip():
    sp = line_space()
    again = PMSpace.from_json(sp.to_json())
    assert again.points == sp.points and again.dist == sp.dist and again.tau == sp.tau


def test_missing_pair_is_an_error():
    with pytest.raises(ValueError):
        PMSpace(("a", "b", "c"), {("a", "b"): unit_step(1)}, TAU_MIN)
