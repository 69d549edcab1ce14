from fractions import Fraction

from hypothesis import settings, strategies as st

from supereuler.superalg import Grassmann
from supereuler.pfaffian import SkewMatrix

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def grassmann(draw, n, parity=None, max_terms=8, coeffs=rationals):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        bits = draw(st.integers(0, (1 << n) - 1))
        if parity is not None and bin(bits).count("1") % 2 != parity:
            bits ^= 1
            if bin(bits).count("1") % 2 != parity:
                continue
        terms[bits] = draw(coeffs)
    return Grassmann(n, terms)


@st.composite
def nilpotent_even(draw, n, max_terms=6):
    x = draw(grassmann(n, parity=0, max_terms=max_terms))
    return x - x.constant


@st.composite
def rational_skew(draw, n):
    upper = {(i, j): draw(rationals) for i in range(n) for j in range(i + 1, n)}
    return SkewMatrix.from_upper(n, upper)


def F(p, q=1):
    return Fraction(p, q)
