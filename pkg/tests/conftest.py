from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from jetvar.symexpr import Base, Expr, Jet, Param

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

VARS = [Base(1), Base(2), Jet(1, ()), Jet(1, (1,)), Jet(1, (2,)), Jet(1, (1, 2)), Param("a")]

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polynomials(draw, variables=VARS, max_terms=4, max_degree=3):
    out = Expr(0)
    for _ in range(draw(st.integers(0, max_terms))):
        term = Expr(draw(rationals))
        for v in draw(st.lists(st.sampled_from(variables), max_size=max_degree)):
            term = term * Expr(v)
        out = out + term
    return out


@st.composite
def points(draw, variables=VARS):
    return {v: draw(rationals) for v in variables}


def frac(a, b=1):
    return Fraction(a, b)
