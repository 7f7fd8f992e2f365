import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperdelta.symfunc import (
    Partition,
    SymfuncError,
    SymPoly,
    binomial_wronskian_det,
    character,
    compare_least_degree_to_hankel,
    newton_expansion,
    partitions,
    s_g,
    schur,
    schur_at_ones,
    sigma_g,
    sigma_leading_scalar,
    sigma_tables,
    sigma_weights,
    z_factor,
    multiplicities,
)

# small tables written out by hand, z1..zg with weight 2(g-k)+1
TABLE = {
    1: {(1,): 1},
    2: {(1, 0): -1, (0, 3): Fraction(1, 3)},
    3: {(1, 0, 1): 1, (0, 2, 0): -1, (0, 1, 3): Fraction(-1, 3), (0, 0, 6): Fraction(1, 45)},
}


@pytest.mark.parametrize("g", [1, 2, 3])
def test_sigma_small_tables(g):
    assert sigma_g(g) == SymPoly(g, TABLE[g])


@pytest.mark.parametrize("g", range(1, 7))
def test_staircase_at_ones(g):
    assert schur_at_ones(Partition.staircase(g)) == 2 ** (g * (g - 1) // 2)


@pytest.mark.parametrize("g", range(1, 5))
def test_schur_polynomial_at_ones_matches_hook_formula(g):
    pi = Partition.staircase(g)
    assert schur(pi, g)([1] * g) == schur_at_ones(pi)


@pytest.mark.parametrize("g", range(2, 7))
def test_binomial_wronskian(g):
    assert abs(binomial_wronskian_det(g)) == 2 ** (g * (g - 1) // 2)


@pytest.mark.parametrize("g", range(1, 7))
def test_least_degree_part_is_hankel(g):
    assert compare_least_degree_to_hankel(g) in (1, -1)
    assert sigma_g(g).least_degree_part().total_degree == (g + 1) // 2


@pytest.mark.parametrize("g", range(1, 7))
def test_sigma_weighted_homogeneous(g):
    assert sigma_g(g).weighted_degrees(sigma_weights(g)) == {g * (g + 1) // 2}


@pytest.mark.parametrize("g", range(1, 7))
def test_s_g_uses_odd_power_sums_only(g):
    # s_g raises if an even power sum appears
    assert s_g(g).arity == g


@pytest.mark.parametrize("g", range(1, 6))
def test_leading_scalar(g):
    assert sigma_leading_scalar(g) == s_g(g)([Fraction(g)] * g)


def test_character_orthogonality():
    for d in range(1, 7):
        for pi in partitions(d):
            tot = sum(Fraction(character(pi, rho) ** 2, z_factor(multiplicities(rho, d)))
                      for rho in partitions(d))
            assert tot == 1


def test_partition_validation():
    with pytest.raises(SymfuncError):
        Partition([1, 2])
    with pytest.raises(SymfuncError):
        Partition([2, 0])
    assert Partition([3, 1]).conjugate.parts == (2, 1, 1)
    with pytest.raises(SymfuncError):
        s_g(0)


def test_sigma_tables_payload():
    out = sigma_tables(2)
    assert out["sigma_g"] == {"0,3": "1/3", "1,0": "-1/1"}
    assert out["leading_scalar"] == "2"


fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@given(st.lists(fractions, min_size=3, max_size=3))
def test_newton_expansion_matches_jacobi_trudi(xs):
    # two independent routes to S_pi: determinant of e_r and character sums
    for pi in (Partition([2, 1]), Partition([3, 1]), Partition([3, 2, 1])):
        direct = schur(pi, 3)(xs)
        p = [sum(x ** r for x in xs) for r in range(1, pi.size + 1)]
        assert newton_expansion(pi).evaluate(p) == direct


def _rand_poly(rng, arity=2):
    terms = {}
    for _ in range(rng.randint(0, 4)):
        exp = tuple(rng.randint(0, 3) for _ in range(arity))
        terms[exp] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
    return SymPoly(arity, terms)


@given(st.integers(0, 10 ** 6))
def test_polynomial_ring_axioms(seed):
    rng = random.Random(seed)
    a, b, c = (_rand_poly(rng) for _ in range(3))
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert (a - a) == SymPoly(2)
    assert SymPoly.from_json(2, a.to_json()) == a


@given(st.integers(0, 10 ** 6))
def test_schur_is_symmetric(seed):
    rng = random.Random(seed)
    pi = rng.choice([Partition([2]), Partition([2, 1]), Partition([3, 1, 1])])
    S = schur(pi, 3)
    xs = [Fraction(rng.randint(-4, 4)) for _ in range(3)]
    vals = {S(list(p)) for p in itertools.permutations(xs)}
    assert len(vals) == 1
