from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoid_walk.group import (
    ZERO,
    Arithmetic,
    Constant,
    DepthExceededError,
    GroupSequence,
    RationalElement,
    add,
    canonicalize,
    from_fraction,
    generator,
    neg,
)

A23 = GroupSequence((2, 3))  # 2, 3, 2, 3, ...
SEQS = [GroupSequence.constant(2), A23, GroupSequence((2,), Arithmetic(1)), GroupSequence((5, 2), Constant(7))]


def is_canonical(x: RationalElement, seq: GroupSequence) -> bool:
    return x.level == 0 or x.numerator % seq.a(x.level) != 0


def elements(seq, max_level=12):
    return st.builds(lambda m, n: canonicalize(m, n, seq),
                     st.integers(-10**6, 10**6), st.integers(0, max_level))


class TestSequence:
    def test_rejects_small_terms(self):
        with pytest.raises(ValueError):
            GroupSequence((2, 1))
        with pytest.raises(ValueError):
            GroupSequence(())

    def test_depth_cap_must_cover_base(self):
        with pytest.raises(ValueError):
            GroupSequence((2, 3, 4), depth_cap=2)

    def test_extension_rules(self):
        assert A23.prefix(5) == [2, 3, 2, 3, 2]
        assert GroupSequence((5, 2), Constant(7)).prefix(4) == [5, 2, 7, 7]
        assert GroupSequence((2,), Arithmetic(1)).prefix(4) == [2, 3, 4, 5]

    def test_products_exact_at_cap(self):
        seq = GroupSequence.constant(3, depth_cap=64)
        assert seq.product(64) == 3**64
        with pytest.raises(DepthExceededError):
            seq.product(65)

    def test_round_trip(self):
        for seq in SEQS:
            assert GroupSequence.from_dict(seq.to_dict()) == seq


class TestGenerator:
    def test_examples(self):
        assert generator(A23, 0, 1) == RationalElement(1, 0)
        e2 = generator(A23, 2, 1)
        assert (e2.numerator, e2.level) == (1, 2)
        assert e2.value(A23) == Fraction(1, 6)
        e3 = generator(GroupSequence.constant(2), 3, -1)
        assert (e3.numerator, e3.level) == (-1, 3)
        assert e3.value(GroupSequence.constant(2)) == Fraction(-1, 8)

    def test_beyond_cap(self):
        with pytest.raises(DepthExceededError):
            generator(GroupSequence.constant(2, depth_cap=8), 9, 1)


class TestAdd:
    def test_examples(self):
        two = GroupSequence.constant(2)
        assert add(generator(two, 1), generator(two, 1), two) == RationalElement(1, 0)
        assert add(generator(A23, 2), generator(A23, 2, -1), A23) == ZERO
        x = add(generator(A23, 1), generator(A23, 2), A23)
        assert (x.numerator, x.level) == (4, 2)
        assert x.value(A23) == Fraction(2, 3)

    @pytest.mark.parametrize("seq", SEQS, ids=str)
    @settings(max_examples=300, deadline=None)
    @given(data=st.data())
    def test_matches_rational_oracle(self, seq, data):
        x = data.draw(elements(seq))
        y = data.draw(elements(seq))
        s = add(x, y, seq)
        assert s.value(seq) == x.value(seq) + y.value(seq)
        assert is_canonical(s, seq)

    @settings(max_examples=300, deadline=None)
    @given(data=st.data())
    def test_commutative_associative(self, data):
        seq = A23
        x, y, z = (data.draw(elements(seq)) for _ in range(3))
        assert add(x, y, seq) == add(y, x, seq)
        assert add(add(x, y, seq), z, seq) == add(x, add(y, z, seq), seq)

    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_inverse(self, data):
        x = data.draw(elements(A23))
        assert add(x, neg(x), A23) == ZERO


class TestCanonicalize:
    def test_examples(self):
        assert canonicalize(6, 2, A23) == RationalElement(1, 0)
        assert canonicalize(3, 2, A23) == RationalElement(1, 1)
        assert canonicalize(5, 2, A23) == RationalElement(5, 2)
        assert canonicalize(0, 7, A23) == ZERO

    @given(st.integers(-10**9, 10**9), st.integers(0, 20))
    def test_idempotent(self, m, n):
        x = canonicalize(m, n, A23)
        assert canonicalize(x.numerator, x.level, A23) == x
        assert is_canonical(x, A23)
        assert x.value(A23) == Fraction(m, A23.product(n))

    def test_from_fraction(self):
        assert from_fraction(Fraction(5, 12), A23).value(A23) == Fraction(5, 12)
        with pytest.raises(DepthExceededError):
            from_fraction(Fraction(1, 5), A23)
