from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from supereuler.errors import DimensionError, DomainError, ParityError
from supereuler.superalg import (
    Grassmann,
    Layout,
    MultiIndex,
    Parity,
    add,
    berezin,
    epsilon_sign,
    exp_even,
    inversions,
    kill_generators,
    multiply,
    reorder_sign,
    scale,
    super_bracket,
)

from conftest import grassmann, nilpotent_even

e = Grassmann.generators


def test_products_of_generators():
    e1, e2 = e(2)
    assert multiply(e1, e2) == Grassmann(2, {0b11: 1})
    assert multiply(e2, e1) == Grassmann(2, {0b11: -1})
    assert (e1 * e1).is_zero()
    assert (1 + e1) * (1 + e2) == Grassmann(2, {0: 1, 1: 1, 2: 1, 3: 1})


def test_addition_and_scaling():
    e1, e2 = e(2)
    z = add(e1, -e1)
    assert z.is_zero() and z.terms == {}
    assert scale(0, e1 * e2).is_zero()
    assert add(e1 * e2, e1 * e2) == 2 * (e1 * e2)


def test_bracket_examples():
    e1, e2, e3 = e(3)
    assert super_bracket(e1, e2).is_zero()
    assert super_bracket(e1 * e2, e3).is_zero()
    a = Grassmann(3, {0: 2, 1: 1, 3: -1, 7: 5})
    assert super_bracket(Grassmann.scalar(3, 1), a).is_zero()


def test_bracket_is_not_trivially_zero():
    # the plain commutator of two odd generators is 2 e1 e2, only the graded one vanishes
    e1, e2 = e(2)
    assert (e1 * e2 - e2 * e1) == 2 * (e1 * e2)


def test_exp_examples():
    a = Fraction(7, 3)
    x = a * Grassmann(2, {0b11: 1})
    assert exp_even(x) == 1 + x
    assert exp_even(Grassmann.zero(4)) == Grassmann.scalar(4, 1)


def test_exp_rejects():
    e1, e2 = e(2)
    with pytest.raises(ParityError):
        exp_even(e1)
    with pytest.raises(ParityError):
        exp_even(e1 + e1 * e2)
    with pytest.raises(DomainError):
        exp_even(1 + e1 * e2)


def test_berezin_examples():
    e1, e2, e3 = e(3)
    assert berezin(3 * Grassmann(2, {3: 1}) + Grassmann.generator(2, 0)) == 3
    for n in range(1, 6):
        assert berezin(Grassmann.scalar(n, 1)) == 0
    assert berezin(e1 * e2 * e3, [1, 2]) == e1
    # moving e1 past e2 e3 costs nothing, moving e2 to the right past e3 costs a sign
    assert berezin(e1 * e2 * e3, [0, 2]) == -e2


def test_epsilon_examples():
    assert epsilon_sign([0, 1], 4) == 1
    assert epsilon_sign([0, 2], 4) == -1
    assert epsilon_sign([], 4) == 1


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        multiply(Grassmann.generator(2, 0), Grassmann.generator(3, 0))
    with pytest.raises(DimensionError):
        Grassmann(33)
    with pytest.raises(DomainError):
        Grassmann.generator(3, 3)


def test_multiindex():
    I = MultiIndex.from_indices([3, 0], 4)
    assert I.indices == (0, 3) and len(I) == 2 and I.parity == 0
    assert I.complement() == MultiIndex.from_indices([1, 2], 4)
    assert MultiIndex.full(4).bits == 0b1111
    assert I.issubset(MultiIndex.full(4))


def test_parity_classification():
    e1, e2 = e(2)
    assert (e1 * e2 + 1).parity() is Parity.EVEN
    assert e1.parity() is Parity.ODD
    assert (1 + e1).parity() is Parity.MIXED
    assert Grassmann.zero(2).parity() is Parity.EVEN


def test_inversion_count_against_sorting():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = (int(x) for x in rng.integers(0, 256, 2))
        b &= ~a
        brute = sum(1 for i in range(8) if a >> i & 1 for j in range(8) if b >> j & 1 and j < i)
        assert inversions(a, b) == brute
        assert reorder_sign(a, b) == (-1) ** brute


def test_monomial_order_is_respected():
    assert Grassmann.monomial(3, [2, 0, 1]) == Grassmann(3, {7: 1})
    assert Grassmann.monomial(3, [1, 0]) == Grassmann(3, {3: -1})


def test_layout_blocks():
    L = Layout(xi=2, eta=3)
    assert L.n == 5 and L.offset("eta") == 2
    assert L.gen("eta", 0) == Grassmann.generator(5, 2)
    assert L.mask("eta") == 0b11100
    with pytest.raises(DomainError):
        L.gen("xi", 2)


def test_array_coefficients():
    c = np.array([1.0, 2.0, 3.0])
    x = Grassmann(2, {1: c}) * Grassmann(2, {2: c})
    assert np.array_equal(x.coefficient(3), c * c)
    assert berezin(x) is not None and np.array_equal(berezin(x), c * c)


def test_kill_generators_is_homomorphism():
    e1, e2, e3 = e(3)
    a, b = 1 + e1 * e2 + e3, e2 - 3 * e1 * e3
    for k in ([0], [1, 2]):
        assert kill_generators(a * b, k) == kill_generators(a, k) * kill_generators(b, k)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(grassmann(n), grassmann(n), grassmann(n))))
def test_associative_and_distributive(abc):
    a, b, c = abc
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.integers(0, 1).flatmap(lambda p: grassmann(n, parity=p)),
    st.integers(0, 1).flatmap(lambda p: grassmann(n, parity=p)))))
def test_super_commutative(ab):
    a, b = ab
    assert super_bracket(a, b).is_zero()


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(grassmann(n), grassmann(n))))
def test_bracket_vanishes_on_mixed_elements(ab):
    # extended by linearity over homogeneous parts
    assert super_bracket(*ab).is_zero()


def test_sign_consistency_exhaustive():
    for n in range(0, 11):
        top = Grassmann(n, {(1 << n) - 1: 1})
        for k in range(n + 1):
            for idx in combinations(range(n), k):
                I = MultiIndex.from_indices(idx, n)
                lhs = Grassmann(n, {I.bits: 1}) * Grassmann(n, {I.complement().bits: 1})
                assert lhs == epsilon_sign(I, n) * top


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(grassmann(n), grassmann(n), st.fractions(-3, 3))))
def test_full_berezin_linear_and_kills_lower_degree(args):
    a, b, c = args
    assert berezin(a + c * b) == berezin(a) + c * berezin(b)
    for k in range(a.n):
        assert berezin(a.degree_part(k)) == 0


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(nilpotent_even(n), nilpotent_even(n))))
def test_exp_additive(ab):
    a, b = ab
    assert exp_even(a + b) == exp_even(a) * exp_even(b)
    assert exp_even(a) * exp_even(-a) == Grassmann.scalar(a.n, 1)


@given(st.integers(1, 7).flatmap(lambda n: nilpotent_even(n)))
def test_exp_matches_truncated_series(a):
    series, term = Grassmann.scalar(a.n, 1), Grassmann.scalar(a.n, 1)
    for k in range(1, a.n // 2 + 1):
        term = term * a / k
        series = series + term
    assert (a ** (a.n // 2 + 1)).is_zero()
    assert exp_even(a) == series


@given(st.integers(2, 8).flatmap(lambda n: st.tuples(
    grassmann(n, max_terms=12), st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1))))
def test_iterated_subset_integration(args):
    x, s1, s2 = args
    s2 &= ~s1
    # eta^S2 eta^S1 = rho eta^(S1 u S2) fixes the sign of the iterated integral
    rho = reorder_sign(s2, s1)
    assert berezin(berezin(x, s1), s2) == rho * berezin(x, s1 | s2)


def test_isclose_with_floats():
    a = Grassmann(2, {3: 1.0})
    assert a.isclose(Grassmann(2, {3: 1.0 + 1e-14}))
    assert not a.isclose(Grassmann(2, {3: 1.0 + 1e-9}))
