from fractions import Fraction

import pytest

from qgps.errors import BasisMismatch, IndependenceUndecided, InvalidBasis, SearchBoundExceeded
from qgps.exponents import (
    ExponentVector,
    QBasis,
    SemiGroup,
    compare,
    enumerate_semigroup,
    format_exponent,
    identify_exponent,
    membership,
    numeric_value,
    reduce_generators,
)
from qgps.numeric import get_mp

B_SQRT2 = QBasis.build(["1", "sqrt2"])
B_I = QBasis.build(["1", "i"])
B_R = QBasis.build(["1"])


def ev(*c):
    return ExponentVector(c)


class TestBasis:
    def test_one_inserted_first(self):
        b = QBasis.build(["sqrt3"])
        assert b.names == ("1", "sqrt3")

    def test_duplicate_rejected(self):
        with pytest.raises(InvalidBasis):
            QBasis.build(["1", "i", "i"])

    def test_parameter_needs_value(self):
        with pytest.raises(InvalidBasis):
            QBasis.build(["1", "w"])

    def test_equal_values_rejected(self):
        with pytest.raises(InvalidBasis):
            QBasis.build(["1", ("w", 1)])

    def test_square_sqrt_rejected(self):
        with pytest.raises(InvalidBasis):
            QBasis.build(["1", "sqrt4"])

    def test_wrong_builtin_value_rejected(self):
        with pytest.raises(InvalidBasis):
            QBasis.build(["1", ("sqrt2", 1.5)])

    def test_independence_tags(self):
        assert B_SQRT2.tags_guarantee_independence
        assert QBasis.build(["1", "sqrt2", "sqrt3", "i"]).tags_guarantee_independence
        assert not QBasis.build(["1", "sqrt2", "sqrt8"]).tags_guarantee_independence
        assert not QBasis.build(["1", ("w", 0.3)]).tags_guarantee_independence
        assert QBasis.build(["1", ("w", 0.3)], declared_q_independent=True).tags_guarantee_independence


class TestNumericValue:
    def test_sqrt2_minus_one(self):
        v = numeric_value(ev(-1, 1), B_SQRT2)
        assert abs(v - 0.4142135624) < 1e-10
        assert v.imag == 0

    def test_zero(self):
        assert numeric_value(ev(0, 0), B_SQRT2) == 0

    def test_one_plus_i(self):
        v = numeric_value(ev(1, 1), B_I)
        assert v.real == 1 and v.imag == 1

    def test_length_mismatch(self):
        with pytest.raises(BasisMismatch):
            numeric_value(ev(1, 2, 3), B_I)

    def test_precision_argument(self):
        v = numeric_value(ev(0, 1), B_SQRT2, 512)
        mp = get_mp(512)
        assert abs(v - mp.sqrt(2)) < mp.mpf(2) ** -500


class TestCompare:
    def test_real(self):
        assert compare(ev(-1, 1), ev(1, 0), B_SQRT2) == -1

    def test_imaginary_tiebreak(self):
        assert compare(ev(1, 1), ev(1, -1), B_I) == 1

    def test_qp3_generators(self):
        assert compare(ev(2, Fraction(-3, 5)), ev(2, Fraction(3, 5)), B_I) == -1

    def test_equal(self):
        assert compare(ev(1, 1), ev(1, 1), B_I) == 0

    def test_format(self):
        assert format_exponent(ev(1, Fraction(-1, 2)), B_SQRT2) == "1 + (-1/2)*sqrt2"
        assert format_exponent(ev(0, 0), B_SQRT2) == "0"


class TestReduceGenerators:
    def test_scalar_multiple(self):
        a = ev(1, 1)
        sg, mapping = reduce_generators([a, a.scale(2)], B_I)
        assert sg.generators == (a,)
        assert mapping[a] == (1,) and mapping[a.scale(2)] == (2,)

    def test_example1_unchanged(self):
        gens = [ev(1, 0), ev(-1, 1)]
        sg, mapping = reduce_generators(gens, B_SQRT2)
        assert sg.generators == tuple(gens)
        assert sg.independent

    def test_dependent_triple(self):
        a, b, two = ev(1, 1), ev(1, -1), ev(2, 0)
        sg, mapping = reduce_generators([a, b, two], B_I)
        assert set(sg.generators) == {a, b}
        idx = sg.generators.index(a)
        assert mapping[two] == (1, 1)
        assert mapping[a][idx] == 1

    def test_integer_multiples_collapse(self):
        sg, _ = reduce_generators([ev(1), ev(2), ev(3)], B_R)
        assert sg.generators == (ev(1),)

    def test_undecided_on_parameter_basis(self):
        b = QBasis.build(["1", ("a", 0.5)])
        with pytest.raises(IndependenceUndecided):
            reduce_generators([b.unit("1"), b.unit("a")], b)

    def test_declared_independence_skips_search(self):
        b = QBasis.build(["1", ("a", 0.5)], declared_q_independent=True)
        sg, _ = reduce_generators([b.unit("1"), b.unit("a")], b)
        assert sg.s == 2

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            reduce_generators([ev(-1, 0)], B_I)

    def test_contains_input(self):
        gens = [ev(1, 0), ev(Fraction(3, 2), 0), ev(Fraction(5, 3), 0)]
        sg, mapping = reduce_generators(gens, B_SQRT2)
        for g in gens:
            assert sg.exponent_of(mapping[g]) == g


class TestMembership:
    SG_I = SemiGroup(B_I, (ev(1, 1), ev(1, -1)), True)

    def test_two(self):
        assert membership(ev(2, 0), self.SG_I) == [(1, 1)]

    def test_generator(self):
        assert membership(ev(1, 1), self.SG_I) == [(1, 0)]

    def test_sqrt2(self):
        sg = SemiGroup(B_SQRT2, (ev(1, 0), ev(-1, 1)), True)
        assert membership(ev(0, 1), sg) == [(1, 1)]

    def test_not_member(self):
        assert membership(ev(1, 0), self.SG_I) == []
        assert membership(ev(0, 0), self.SG_I) == []

    def test_enumeration_multiple_representations(self):
        sg = SemiGroup(B_R, (ev(2), ev(3)), False)
        assert sorted(membership(ev(6), sg)) == [(0, 2), (3, 0)]

    def test_search_bound(self):
        sg = SemiGroup(B_R, (ev(2), ev(3)), False)
        with pytest.raises(SearchBoundExceeded):
            membership(ev(300), sg, d_max=10)

    def test_enumerate_in_order(self):
        pts = enumerate_semigroup(self.SG_I, 4)
        res = [numeric_value(e, B_I).real for _, e in pts]
        assert res == sorted(res)
        assert len(pts) == 2 + 3 + 4 + 5  # all points of total degree <= 4


def test_identify_exponent():
    mp = get_mp(256)
    v = mp.mpf(3) / 7 - 2 * mp.sqrt(2)
    assert identify_exponent(v, B_SQRT2) == ev(Fraction(3, 7), -2)
    assert identify_exponent(mp.pi, B_SQRT2) is None
