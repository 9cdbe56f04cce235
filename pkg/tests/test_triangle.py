import random
from fractions import Fraction

import numpy as np
import pytest

from oracles import TNORM_ARRAYS, sup_convolution_oracle
from pmseq.distfn import EPS0, StepDistFn, random_dplus, unit_step
from pmseq.triangle import TAU_LUK, TAU_MIN, TAU_PROD, TNorm, TriangleFn, unit_steps_add, verify_triangle_laws

TAUS = [TAU_MIN, TAU_PROD, TAU_LUK]


def test_unit_steps_add_under_min():
    assert TAU_MIN(unit_step(Fraction(1, 5)), unit_step(Fraction(1, 2))) == unit_step(Fraction(7, 10))


@pytest.mark.parametrize("tau", TAUS, ids=lambda t: t.name)
def test_unit_steps_add_exactly(tau):
    rng = random.Random(1)
    for _ in range(30):
        a, b = Fraction(rng.randint(0, 40), rng.randint(1, 9)), Fraction(rng.randint(0, 40), rng.randint(1, 9))
        assert unit_steps_add(tau, a, b)


@pytest.mark.parametrize("tau", TAUS, ids=lambda t: t.name)
def test_laws_hold(tau):
    rep = verify_triangle_laws(tau, 60, seed=7)
    assert rep.ok, rep.counterexample
    assert rep.passed == {"commutative": 60, "associative": 60, "monotone": 60, "identity": 60}


@pytest.mark.parametrize("tau", TAUS, ids=lambda t: t.name)
def test_sup_convolution_matches_dense_grid(tau):
    rng = random.Random(11)
    T = TNORM_ARRAYS[tau.name]
    for _ in range(4):
        F, G = random_dplus(rng), random_dplus(rng)
        out = tau(F, G)
        # probe just either side of every multiple of 1/20 (all jump sums lie on that grid)
        xs = [k / 20 + s for k in range(0, 121) for s in (-1e-3, 1e-3)]
        expected = sup_convolution_oracle(F, G, T, xs)
        got = np.array([float(out(x)) for x in xs])
        assert np.allclose(got, expected, atol=1e-12)


def test_identity_element():
    f = StepDistFn(((0, Fraction(1, 4)), (1, 1)), distance=True)
    for tau in TAUS:
        assert tau(EPS0, f) == f


def test_rejects_functions_outside_dplus():
    with pytest.raises(ValueError):
        TAU_MIN(StepDistFn(((-1, 1),)), EPS0)


def test_unknown_tnorm():
    with pytest.raises(ValueError):
        TNorm("drastic")


def test_aliases():
    assert TriangleFn.named("lukasiewicz") == TAU_LUK


def test_samples_must_be_positive():
    with pytest.raises(ValueError):
        verify_triangle_laws(TAU_MIN, 0)
