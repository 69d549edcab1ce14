import json
from fractions import Fraction
from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from supereuler.errors import DomainError, LoadError, ParityError
from supereuler.pfaffian import (
    OddVector,
    SkewMatrix,
    berezin_gaussian_source,
    berezin_gaussian_source_direct,
    gaussian_coefficient,
    gaussian_expand,
    load_skew_matrix,
    pfaffian_berezin,
    pfaffian_expansion,
    quadratic_form,
    skew_matrix_from_json,
)
from supereuler.superalg import Grassmann, Layout, MultiIndex, exp_even

from conftest import rational_skew


def pf4(w):
    return w[0, 1] * w[2, 3] - w[0, 2] * w[1, 3] + w[0, 3] * w[1, 2]


def test_two_by_two():
    a = Fraction(5, 7)
    w = SkewMatrix.from_upper(2, {(0, 1): a})
    assert pfaffian_berezin(w) == a
    assert pfaffian_expansion(w) == a


@given(rational_skew(4))
def test_four_by_four_formula(w):
    assert pfaffian_berezin(w) == pf4(w)
    assert pfaffian_expansion(w) == pf4(w)


def test_zero_matrix():
    for n in (2, 4, 6):
        assert pfaffian_berezin(SkewMatrix.from_upper(n, {})) == 0


def test_random_six_methods_agree():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6))
    w = SkewMatrix((a - a.T).tolist())
    assert pfaffian_berezin(w) == pytest.approx(pfaffian_expansion(w), rel=1e-12)


def test_expand_small_cases():
    a = Fraction(2, 3)
    out = gaussian_expand(SkewMatrix.from_upper(2, {(0, 1): a}))
    assert out == {MultiIndex(0, 2): 1, MultiIndex(0b11, 2): a}
    w = SkewMatrix.from_upper(4, {(i, j): Fraction(i + 2 * j + 1) for i in range(4) for j in range(i + 1, 4)})
    ex = gaussian_expand(w)
    assert ex[MultiIndex.from_indices([0, 2], 4)] == w[0, 2]
    assert ex[MultiIndex.full(4)] == pf4(w)
    assert len(ex) == 8


@given(st.sampled_from([2, 4, 6]).flatmap(rational_skew))
def test_expand_matches_exponential(w):
    g = exp_even(quadratic_form(w, Layout(coeff=0, eta=w.n)))
    ex = gaussian_expand(w)
    assert set(g.terms) <= {I.bits for I in ex}
    for I, pf in ex.items():
        assert g.coefficient(I.bits) == pf


@given(st.sampled_from([2, 4]).flatmap(rational_skew))
def test_expand_methods(w):
    ref = gaussian_expand(w, "expansion")
    assert gaussian_expand(w, "berezin") == ref
    assert gaussian_expand(w, "homomorphism") == ref


def test_homomorphism_coefficient():
    w = SkewMatrix.from_upper(4, {(0, 1): 2, (0, 2): 3, (1, 3): 5, (2, 3): 7})
    for I in combinations(range(4), 2):
        assert gaussian_coefficient(w, I) == w[I]


def test_pf_squared_is_det():
    rng = np.random.default_rng(11)
    for n in (2, 4, 6, 8):
        for _ in range(5):
            a = rng.uniform(-1, 1, (n, n))
            w = SkewMatrix((a - a.T).tolist())
            pf = pfaffian_berezin(w)
            assert pf * pf == pytest.approx(np.linalg.det(w.to_array()), rel=1e-10)


@given(rational_skew(4), st.lists(st.fractions(-3, 3, max_denominator=4), min_size=16, max_size=16))
def test_congruence_exact(w, b):
    B = np.array(b, dtype=object).reshape(4, 4)
    W = B.dot(np.array(w.entries, dtype=object)).dot(B.T)
    # exact determinant by the Leibniz formula
    detB = Fraction(0)
    for p in permutations(range(4)):
        sign = (-1) ** sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
        term = Fraction(sign)
        for i in range(4):
            term *= B[i, p[i]]
        detB += term
    assert pfaffian_berezin(SkewMatrix(W.tolist())) == detB * pfaffian_berezin(w)


@given(rational_skew(2), rational_skew(4))
def test_block_diagonal(a, b):
    n = 6
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(2):
        for j in range(2):
            rows[i][j] = a[i, j]
    for i in range(4):
        for j in range(4):
            rows[2 + i][2 + j] = b[i, j]
    assert pfaffian_berezin(SkewMatrix(rows)) == pfaffian_berezin(a) * pfaffian_berezin(b)


def test_form_valued_pfaffian():
    # entries are two-forms in a separate algebra; Pf picks up the full 4-form
    L = Layout(f=4)
    d = [L.gen("f", i) for i in range(4)]
    w = SkewMatrix.from_upper(4, {(0, 1): d[0] * d[1], (2, 3): d[2] * d[3], (0, 2): 2 * d[0] * d[2], (1, 3): d[1] * d[3]})
    pf = pfaffian_berezin(w)
    assert isinstance(pf, Grassmann)
    assert pf == pfaffian_expansion(w)
    assert pf == pf4(w)


def test_source_two_by_two():
    xi = Layout(xi=2)
    J = OddVector([xi.gen("xi", 0), xi.gen("xi", 1)])
    a = Fraction(3, 2)
    w = SkewMatrix.from_upper(2, {(0, 1): a})
    expected = Grassmann.scalar(2, a) - J[0] * J[1]
    assert berezin_gaussian_source(w, J) == expected
    assert berezin_gaussian_source_direct(w, J) == expected
    zero = SkewMatrix.from_upper(2, {})
    assert berezin_gaussian_source(zero, J) == -(J[0] * J[1])


def test_source_zero_reduces_to_pfaffian():
    w = SkewMatrix.from_upper(4, {(0, 1): 2, (2, 3): 3, (0, 3): 1})
    J = OddVector([Grassmann.zero(3)] * 4)
    for f in (berezin_gaussian_source, berezin_gaussian_source_direct):
        assert f(w, J) == Grassmann.scalar(3, pfaffian_berezin(w))


@st.composite
def sourced(draw, n):
    w = draw(rational_skew(n))
    k = n
    comps = []
    for i in range(n):
        x = Grassmann.generator(k, i)
        for j in range(k):
            if j != i and draw(st.booleans()):
                x = x + draw(st.fractions(-2, 2, max_denominator=3)) * Grassmann.generator(k, j)
        comps.append(x)
    return w, OddVector(comps)


@given(st.sampled_from([2, 4, 6]).flatmap(sourced))
def test_sourced_gaussian_closed_form(arg):
    w, J = arg
    assert berezin_gaussian_source(w, J) == berezin_gaussian_source_direct(w, J)


def test_validation():
    with pytest.raises(DomainError):
        SkewMatrix([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
    with pytest.raises(DomainError) as exc:
        SkewMatrix([[0, 1], [2, 0]])
    assert exc.value.args[1] == (0, 1)
    with pytest.raises(ParityError):
        SkewMatrix.from_upper(2, {(0, 1): Grassmann.generator(2, 0)})
    with pytest.raises(ParityError):
        OddVector([Grassmann.scalar(2, 1), Grassmann.generator(2, 1)])
    with pytest.raises(DomainError):
        pfaffian_expansion(SkewMatrix.from_upper(14, {}))


def test_json_loading(tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps({"n": 4, "entries": [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, "1/3"], [0, 0, "-1/3", 0]]}))
    w = load_skew_matrix(p)
    assert pfaffian_berezin(w) == Fraction(1, 3)
    with pytest.raises(LoadError) as exc:
        skew_matrix_from_json({"n": 2, "entries": [[1, 0], [0, 0]]})
    assert (0, 0) in exc.value.args
    with pytest.raises(LoadError):
        skew_matrix_from_json({"n": 3, "entries": [[0] * 3] * 3})
    with pytest.raises(LoadError):
        skew_matrix_from_json({"n": 2, "entries": [[0, True], [-1, 0]]})
    with pytest.raises(LoadError):
        load_skew_matrix(tmp_path / "missing.json")
    w = skew_matrix_from_json({"n": 2, "entries": [[0, 0.5], [-0.5, 0]]})
    assert pfaffian_berezin(w) == 0.5
