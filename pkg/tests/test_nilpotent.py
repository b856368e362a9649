import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_gm.errors import TailNotCertified
from padic_gm.mahler import finite_difference_coeffs, growth_sup, mahler_of_polynomial
from padic_gm.nilpotent import (
    BaseRing,
    NilpotentElem,
    epsilon_action_apply,
    falling_factorial_apply,
    lemma_formula_rhs,
    lm_generators,
    monomials,
    nabla_theta,
    operator_norm_table,
    overconvergence_bound_check,
    overconvergence_exponent,
    perturbation_check,
    random_nilpotent,
    z_swap_operator,
)
from padic_gm.padic import PadicCtx

RING = BaseRing(5, 8, 16)


def xyz(s, a, b, c, ring=RING, m=1, D=4):
    return NilpotentElem.from_xyz(s if s is not None else ring.one(), a, b, c, m, D)


def test_nabla_on_qX():
    qX = xyz(RING.q(1), 1, 0, 0)
    assert nabla_theta(qX) == qX + xyz(RING.q(1), 0, 1, 0)


def test_nabla_kills_Y_and_Z():
    assert nabla_theta(xyz(None, 0, 1, 0)).is_zero()
    assert nabla_theta(xyz(None, 0, 0, 1)).is_zero()


def test_evaluation_intertwines_theta():
    rng = random.Random(1)
    for _ in range(100):
        v = random_nilpotent(RING, 1, 3, rng)
        assert nabla_theta(v).evaluate() == v.evaluate().theta()


def test_falling_factorial_small_k():
    X = xyz(None, 1, 0, 0)
    assert falling_factorial_apply(nabla_theta, 0, X) == X
    assert falling_factorial_apply(nabla_theta, 1, X) == nabla_theta(X)
    assert falling_factorial_apply(nabla_theta, 2, X) == xyz(None, 0, 1, 0).divide_exact(2).scale(-1)
    q = xyz(RING.q(1), 0, 0, 0)
    assert falling_factorial_apply(nabla_theta, 2, q).is_zero()


def test_lemma_rhs_k1():
    s = RING.random(random.Random(3))
    a, b, c = 2, 1, 1
    expected = xyz(s.theta(), a, b, c) + xyz(s, a - 1, b + 1, c).scale(a)
    assert lemma_formula_rhs(s, a, b, c, 1, 1, 4) == expected


def test_lemma_rhs_matches_two_step():
    assert lemma_formula_rhs(RING.one(), 1, 0, 0, 2, 1, 4) == falling_factorial_apply(nabla_theta, 2, xyz(None, 1, 0, 0))


def test_lemma_rhs_linear_in_Z():
    s = RING.random(random.Random(4))
    for k in range(5):
        with_z = lemma_formula_rhs(s, 1, 1, 2, k, 1, 4)
        no_z = lemma_formula_rhs(s, 1, 1, 0, k, 1, 4)
        assert with_z == no_z * xyz(None, 0, 0, 2)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(0, 2**32), st.integers(0, 6), st.sampled_from([1, 2]))
def test_lemma_oracle_random(p, seed, k, m):
    ring = BaseRing(p, 8, 10)
    s = ring.random(random.Random(seed))
    for a, b, c in monomials(3):
        v = NilpotentElem.from_xyz(s, a, b, c, m, 3)
        assert falling_factorial_apply(nabla_theta, k, v) == lemma_formula_rhs(s, a, b, c, k, m, 3)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 2**32), st.integers(1, 3))
def test_nabla_integral(p, seed, m):
    ring = BaseRing(p, 6, 6)
    v = random_nilpotent(ring, m, 3, random.Random(seed))
    e = nabla_theta(v).norm_exponent()
    assert e is None or e <= 0


def test_norm_table_independent_of_m():
    ring = BaseRing(5, 8, 5)
    tables = [operator_norm_table(nabla_theta, lm_generators(ring, m, 2), 7).norms for m in (1, 2, 3)]
    assert tables[0] == tables[1] == tables[2]


def test_epsilon_action_polynomials():
    ctx = PadicCtx(5, 8)
    q = xyz(RING.q(1), 0, 0, 0)
    ident = mahler_of_polynomial([0, 1], ctx)
    X = xyz(None, 1, 0, 0)
    assert epsilon_action_apply(ident, None, nabla_theta, X, 4).value == nabla_theta(X)
    square = mahler_of_polynomial([0, 0, 1], ctx)
    assert epsilon_action_apply(square, None, nabla_theta, q, 4).value == q


def test_epsilon_action_indicator_depletes():
    p = 5
    ctx = PadicCtx(p, 12)
    f = finite_difference_coeffs([0 if x % p == 0 else 1 for x in range(50)], ctx)
    gauge = growth_sup(f, Fraction(1, p - 1))
    ring = BaseRing(p, 6, 8)
    v = ring.elem([0, 0, 1, 0, 0, 1])
    res = epsilon_action_apply(f, gauge, lambda x: x.theta(), v, 3)
    assert res.value == ring.elem([0, 0, 1])


def test_epsilon_action_needs_gauge():
    p = 5
    ctx = PadicCtx(p, 8)
    f = finite_difference_coeffs([x % 3 for x in range(10)], ctx)
    with pytest.raises(TailNotCertified):
        epsilon_action_apply(f, None, lambda x: x.theta(), BaseRing(p, 6, 8).one(), 3)


@pytest.fixture(scope="module")
def perturbation_setup():
    ring = BaseRing(5, 20, 8)
    gens = lm_generators(ring, 1, 1)
    return ring, gens, operator_norm_table(nabla_theta, gens, 41)


def test_perturbation_zero(perturbation_setup):
    ring, gens, gauge = perturbation_setup
    rep = perturbation_check(nabla_theta, lambda v: v.scale(0), gens, Fraction(1, 10), None, 41, 5, gauge)
    assert rep.passed


def test_perturbation_threshold_and_fixture(perturbation_setup):
    ring, gens, gauge = perturbation_setup
    r = ring.random(random.Random(9))
    swap = z_swap_operator(2)
    good = perturbation_check(nabla_theta, lambda v: v * r + swap(v), gens, Fraction(1, 10), None, 41, 5, gauge)
    assert good.passed and good.N == good.threshold_N == 1
    bad = perturbation_check(nabla_theta, swap, gens, Fraction(1, 10), 0, 41, 5, gauge)
    assert not bad.passed


def test_multiplication_survives_n_zero(perturbation_setup):
    # multiplication operators alone never break the bound here
    ring, gens, gauge = perturbation_setup
    r = ring.random(random.Random(10))
    assert perturbation_check(nabla_theta, lambda v: v * r, gens, Fraction(1, 10), 0, 41, 5, gauge).passed


def test_swap_is_integral():
    ring = BaseRing(5, 10, 4)
    swap = z_swap_operator(2)
    for g in lm_generators(ring, 2, 1):
        e = swap(g).norm_exponent()
        assert e is None or e <= 0


def test_overconvergence_exponent_examples():
    assert overconvergence_exponent(1, Fraction(1, 4), Fraction(1, 2), Fraction(9, 10)) == Fraction(3, 40)
    for delta in (Fraction(1, 2), Fraction(9, 10)):
        assert overconvergence_exponent(1, Fraction(1, 4), Fraction(1, 4), delta) <= 0


def test_overconvergence_trivial_chain():
    norms = [0] * 10
    for delta in (Fraction(1, 3), Fraction(9, 10)):
        rep = overconvergence_bound_check(norms, norms, norms, 5, 1, 0, Fraction(1, 4), Fraction(1, 2), delta)
        assert rep.bound_holds
    rep = overconvergence_bound_check(norms, norms, norms, 5, 1, 0, Fraction(1, 4), Fraction(1, 2), Fraction(9, 10))
    assert rep.passed
    rep = overconvergence_bound_check(norms, norms, norms, 5, 1, 0, Fraction(1, 4), Fraction(1, 4), Fraction(9, 10))
    assert not rep.passed
