import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from solenoid_walk.asymptotics import GrowthLaw, Rate, decide_series, product_law, tail_law
from solenoid_walk.group import Arithmetic, GroupSequence


def test_rate_compare_exact():
    # 2^(1/2) * (1/2)^(1/2) is exactly 1; floats would see 1.0000000000000002
    assert (Rate.of(2, "1/2") * Rate.of("1/2", "1/2")).compare_one() == 0
    assert Rate.of(24, "-1/3").compare_one() < 0
    assert Rate.of(3, "1/2").compare_one() > 0
    # 2^(1/3) vs 3^(1/5): 2^5 = 32 > 27 = 3^3
    assert (Rate.of(2, "1/3") * Rate.of(3, "-1/5")).compare_one() > 0


@given(st.integers(2, 50), st.fractions(min_value=-3, max_value=3, max_denominator=7))
def test_rate_power_and_float(b, e):
    r = Rate.of(b, e)
    assert float(r) == pytest.approx(b ** float(e), rel=1e-12)
    assert (r * r ** -1).compare_one() == 0


def test_decide_series_cases():
    assert decide_series(GrowthLaw.make(0, Rate.of(2, "-1/2"))).convergent
    d = decide_series(GrowthLaw.make(0, Rate.of(2, "-1/2")))
    assert d.kind == "ratio" and d.rate == pytest.approx(2**-0.5)
    assert not decide_series(GrowthLaw()).convergent
    assert decide_series(GrowthLaw()).kind == "bounded_below"
    assert not decide_series(GrowthLaw.make(0, None, -1)).convergent
    assert decide_series(GrowthLaw.make(0, None, "-3/2")).convergent
    assert decide_series(GrowthLaw.make(-1, Rate.of(10), 5)).convergent
    assert not decide_series(GrowthLaw.make("1/2", Rate.of("1/100"), -9)).convergent


def test_tail_law():
    assert tail_law(GrowthLaw.make(0, Rate.of("1/2"))) == GrowthLaw.make(0, Rate.of("1/2"))
    assert tail_law(GrowthLaw.make(0, None, -2)) == GrowthLaw.make(0, None, -1)
    with pytest.raises(ValueError):
        tail_law(GrowthLaw.make(0, None, -1))
    with pytest.raises(ValueError):
        tail_law(GrowthLaw.make(0, Rate.of(2)))


def test_product_law_periodic():
    law = product_law(GroupSequence((2, 3, 4)))
    assert law.factorial == 0 and float(law.rate) == pytest.approx(24 ** (1 / 3))


def test_product_law_arithmetic_matches_numbers():
    seq = GroupSequence((2,), Arithmetic(1))  # a_j = j + 1, product = (n+1)!
    law = product_law(seq)
    assert law.factorial == 1 and law.poly == 1
    # (n+1)! / (n! * n) -> 1
    ratios = [seq.product(n) / (math.factorial(n) * n) for n in (20, 40)]
    assert ratios[1] == pytest.approx(1, rel=0.05)


def test_law_round_trip():
    law = GrowthLaw.make("1/2", Rate.of(3, "-2/3") * Rate.of(5, 1), "-7/4")
    assert GrowthLaw.from_dict(law.to_dict()) == law
    assert GrowthLaw.from_dict({"rate": "1/4"}).rate.compare_one() < 0
    assert law.factorial == Fraction(1, 2)
