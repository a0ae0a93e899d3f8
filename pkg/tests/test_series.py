import json

import pytest

from qgps.errors import AmbiguousRepresentation, IncompatibleBasis, NotInSemigroup, QPowerOverflow
from qgps.errors import ViolatesConditionI, ViolatesConditionII
from qgps.exponents import ExponentVector, QBasis, SemiGroup
from qgps.numeric import complex_from_json, complex_to_json, get_mp
from qgps.series import (
    GeneralizedSeries,
    QContext,
    TaylorSeries,
    dilate,
    dilate_embedded,
    embed,
    generators_from_json,
    mul,
    power,
    q_power,
    taylor_from_json,
    taylor_mul,
    taylor_to_json,
    unembed,
    validate,
)

mp = get_mp(256)
B2 = QBasis.build(["1", "sqrt2"])
BI = QBasis.build(["1", "i"])
HALF = QContext.from_q(mp.mpf(1) / 2)
Q2I = QContext.from_q(mp.mpc(0, "1.0001"))


def ev(*c):
    return ExponentVector(c)


def series(basis, *terms, bound=None):
    return GeneralizedSeries.from_terms(basis, [(ev(*e), c) for e, c in terms], bound)


class TestQContext:
    def test_branch(self):
        ctx = QContext.from_q(-2)
        assert 0 <= ctx.ln_q.imag < 2 * mp.pi
        assert abs(ctx.ln_q.imag - mp.pi) < 1e-70

    def test_negative_imaginary_part_wraps(self):
        ctx = QContext.from_q(mp.mpc(0, -1))
        assert abs(ctx.arg_q - 3 * mp.pi / 2) < 1e-70

    @pytest.mark.parametrize("q", [0, 1])
    def test_invalid(self, q):
        with pytest.raises(ValueError):
            QContext.from_q(q)

    def test_inconsistent_log(self):
        with pytest.raises(ValueError):
            QContext(2, mp.log(3))


class TestQPower:
    def test_integer(self):
        assert q_power(HALF, ev(1, 0), B2) == mp.mpf(1) / 2

    def test_zero_exponent(self):
        assert q_power(HALF, ev(0, 0), B2) == 1

    def test_example2_magnitude(self):
        # oracle (plain mpmath): exp(ln 1.0001 - pi/2)
        v = q_power(Q2I, ev(1, 1), BI)
        assert abs(abs(v) - mp.mpf("0.2079003643083969847378103153969622679109")) < 1e-35

    def test_magnitude_identity(self):
        lam = ev(3, -2)
        v = q_power(Q2I, lam, BI)
        expected = mp.exp(3 * Q2I.ln_q.real + 2 * Q2I.ln_q.imag)
        assert abs(abs(v) / expected - 1) < 1e-70

    def test_overflow_reports_log(self):
        ctx = QContext.from_q(2)
        with pytest.raises(QPowerOverflow) as info:
            q_power(ctx, ev(10**13, 0), B2)
        assert info.value.log_abs > 10**12


class TestDilate:
    def test_monomial(self):
        s = dilate(series(B2, ((1, 0), 1)), HALF)
        assert s.coefficient(ev(1, 0)) == mp.mpf(1) / 2

    def test_sigma_squared_sqrt2(self):
        # oracle (plain mpmath): 2**(-2*sqrt(2))
        s = dilate(series(B2, ((0, 1), 1)), HALF, 2)
        assert abs(s.coefficient(ev(0, 1)) - mp.mpf("0.1407857163281744654174044368855240491867")) < 1e-38

    def test_linear_two_terms(self):
        s = series(B2, ((1, 0), 3), ((0, 1), -2))
        d = dilate(s, HALF)
        assert d.coefficient(ev(1, 0)) == 3 * q_power(HALF, ev(1, 0), B2)
        assert d.coefficient(ev(0, 1)) == -2 * q_power(HALF, ev(0, 1), B2)

    def test_identity(self):
        s = series(B2, ((1, 0), 3))
        assert dilate(s, HALF, 0) is s

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            dilate(series(B2, ((1, 0), 3)), HALF, -1)


class TestMul:
    def test_exponent_addition(self):
        p = mul(series(B2, ((1, 0), 1)), series(B2, ((-1, 1), 1)))
        assert p.exponents() == [ev(0, 1)]

    def test_truncation(self):
        z = series(B2, ((1, 0), 1))
        p = mul(z, z, 1.5)
        assert len(p) == 0
        assert p.order_bound == 1.5

    def test_square_of_example1_seed(self):
        c00, c01 = mp.mpf(3), mp.mpf(5)
        s = series(B2, ((1, 0), c00), ((0, 1), c01))
        p = power(s, 2)
        assert p.as_dict() == {ev(2, 0): c00**2, ev(1, 1): 2 * c00 * c01, ev(0, 2): c01**2}

    def test_incompatible(self):
        with pytest.raises(IncompatibleBasis):
            mul(series(B2, ((1, 0), 1)), series(BI, ((1, 0), 1)))

    def test_order_bound_propagation(self):
        a = series(B2, ((1, 0), 1), bound=3)
        b = series(B2, ((0, 1), 1))
        assert mul(a, b).order_bound == 3 + mp.sqrt(2)


class TestEmbedding:
    SG = SemiGroup(BI, (ev(1, 1), ev(1, -1)), True)

    def test_generator_term(self):
        t = embed(series(BI, ((1, 1), 5)), self.SG)
        assert t.coeffs == {(1, 0): 5}

    def test_example1_lattice(self):
        sg = SemiGroup(B2, (ev(1, 0), ev(-1, 1)), True)
        psi = series(B2, ((1, 0), 2), ((0, 1), 3), ((1, 1), 7))
        t = embed(psi, sg)
        assert t.coeffs == {(1, 0): 2, (1, 1): 3, (2, 1): 7}

    def test_round_trip(self):
        psi = series(BI, ((1, 1), 1), ((2, 0), 2), ((3, -1), mp.mpc(1, 2)), ((4, 2), -1))
        assert unembed(embed(psi, self.SG)).as_dict() == psi.as_dict()

    def test_not_in_semigroup(self):
        with pytest.raises(NotInSemigroup) as info:
            embed(series(BI, ((1, 0), 1)), self.SG)
        assert info.value.exponent == ev(1, 0)

    def test_ambiguous(self):
        sg = SemiGroup(BI, (ev(1, 1), ev(1, -1)), False)
        with pytest.raises(AmbiguousRepresentation):
            embed(series(BI, ((1, 1), 1)), sg)

    def test_constant_term_forbidden(self):
        with pytest.raises(ValueError):
            TaylorSeries(self.SG, {(0, 0): 1})

    def test_dilate_embedded_examples(self):
        sg1 = SemiGroup(B2, (ev(1, 0),), True)
        t = dilate_embedded(TaylorSeries(sg1, {(1,): 1}), HALF)
        assert t.coeffs == {(1,): mp.mpf(1) / 2}
        ctx = QContext.from_q(3)
        t = dilate_embedded(TaylorSeries(self.SG, {(1, 1): 1}), ctx)
        assert abs(t[(1, 1)] - 9) < 1e-70
        t0 = TaylorSeries(self.SG, {(1, 1): 1})
        assert dilate_embedded(t0, ctx, 0) is t0

    def test_taylor_mul_degree(self):
        a = TaylorSeries(self.SG, {(1, 0): 1, (0, 1): 1})
        p = taylor_mul(a, a, 2)
        assert p.coeffs == {(2, 0): 1, (1, 1): 2, (0, 2): 1}
        assert taylor_mul(a, a, 1).coeffs == {}

    def test_json(self):
        t = TaylorSeries(self.SG, {(1, 0): mp.mpc("1e-300", 2), (2, 3): mp.mpf(10) ** 400}, 5)
        data = json.loads(json.dumps(taylor_to_json(t)))
        assert all("log10_abs" in c for c in data["coeffs"])
        back = taylor_from_json(data, self.SG)
        assert back.coeffs == t.coeffs
        assert generators_from_json(data, BI) == self.SG.generators


class TestValidate:
    def test_example2_truncation(self):
        from qgps.exponents import enumerate_semigroup

        sg = SemiGroup(BI, (ev(1, 1), ev(1, -1)), True)
        base = ev(1, 1)
        terms = [(base, 1)] + [(base + e, 1) for _, e in enumerate_semigroup(sg, 3)]
        rep = validate(GeneralizedSeries.from_terms(BI, terms), sg)
        assert rep.condition_i and rep.condition_ii and rep.condition_iii == "certified"

    def test_negative_exponent(self):
        with pytest.raises(ViolatesConditionI):
            validate(series(B2, ((-1, 0), 1)))

    def test_out_of_order(self):
        s = GeneralizedSeries(B2, ((ev(2, 0), 1), (ev(1, 0), 1)))
        with pytest.raises(ViolatesConditionII):
            validate(s)

    def test_iii_unchecked_without_semigroup(self):
        assert validate(series(B2, ((1, 0), 1))).condition_iii == "unchecked"


def test_complex_json_round_trip():
    c = mp.mpc("1.234567890123456789012345678901234567890123456789e-500", "-3")
    d = complex_to_json(c, mp)
    assert complex_from_json(d, mp) == c
    assert abs(d["log10_abs"] - float(mp.log10(abs(c)))) < 1e-12


def test_series_shift_and_head():
    s = series(B2, ((1, 0), 1), ((0, 1), 2), ((2, 0), 3))
    assert s.head(2).exponents() == [ev(1, 0), ev(0, 1)]
    sh = s.shift(ev(1, 0), 2)
    assert sh.coefficient(ev(2, 0)) == 2
