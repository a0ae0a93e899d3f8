import pytest

from conftest import analysis, solved
from qgps.errors import InsufficientData, NonpositiveNu, PreconditionFailed, ZeroDivisorHit
from qgps.exponents import QBasis, SemiGroup, lattice_points
from qgps.majorant import (
    ABOVE,
    UNDER,
    MajorantProblem,
    build_majorant,
    compute_nu,
    dominance_check,
    majorant_coefficients,
    nu_ratio,
    radius_estimate,
)
from qgps.newton import CharPoly, classify_line, theorem1_certificate
from qgps.numeric import get_mp
from qgps.series import QContext, q_power
from qgps.solver import CoefficientTable

mp = get_mp(256)
CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786]


def one_generator(q):
    ctx = QContext.from_q(q)
    b = QBasis.build(["1"])
    sg = SemiGroup(b, (b.rational(1),), True)
    return ctx, b, sg


def nu_for(A, q, lam):
    ctx, b, sg = one_generator(q)
    L = CharPoly(b.zero(), tuple(mp.mpf(a) for a in A), 256)
    cert = theorem1_certificate(L, classify_line(ctx, sg))
    return compute_nu(L, b.rational(lam), sg, ctx, cert)


class TestNu:
    @pytest.mark.parametrize("C", [1, 3, mp.mpf("0.25")])
    def test_double_root_under(self, C):
        # Ls = C (2 xi - 1)**2; worked by hand: tail(2) <= 2C < tail(1), |Ls(2)|/4 = 9C/4
        nu = nu_for((C, -2 * C, C), 2, 1)
        assert nu.case == UNDER and nu.m_star == 1
        assert abs(nu.finite_min - mp.mpf(9) / 4 * C) < 1e-70
        assert abs(nu.nu - 2 * C) < 1e-70 and nu.argmin == (1,)

    def test_above_no_scan(self):
        nu = nu_for((-2, 1), mp.mpf(1) / 2, 0)
        assert nu.case == ABOVE and nu.m_star == 0 and nu.nu == 1 and nu.finite_min is None

    def test_not_convergent(self):
        an = analysis("example1")
        with pytest.raises(PreconditionFailed):
            compute_nu(an.L, an.red.lambda_m, an.sg, an.ctx, an.certificate)

    def test_zero_divisor(self):
        with pytest.raises(ZeroDivisorHit):
            nu_for((-4, 1), 2, 0)

    def test_qp3(self):
        an = analysis("qp3")
        nu = compute_nu(an.L, an.red.lambda_m, an.sg, an.ctx, an.certificate)
        assert nu.case == UNDER and nu.m_star == 1
        assert abs(nu.nu - mp.mpf("0.5")) < 1e-60
        assert nu.finite_min > nu.nu

    def test_qp3_bound_holds_beyond_scan(self):
        an = analysis("qp3")
        nu = compute_nu(an.L, an.red.lambda_m, an.sg, an.ctx, an.certificate)
        Ls = an.red.L_shifted
        for d in range(1, 25):
            for P in lattice_points(2, d):
                xi = q_power(an.ctx, an.sg.exponent_of(P), an.sg.basis)
                assert nu_ratio(Ls, xi, True) >= nu.nu

    def test_json(self):
        data = nu_for((1, -2, 1), 2, 1).to_json(mp)
        assert data["M_star"] == 1 and data["case"] == UNDER


class TestBuild:
    def test_euler_merge(self):
        an = analysis("euler")
        prob = build_majorant(an.red, an.sg, 3)
        assert prob.abs_monomials == ((mp.mpf(1) / 2, (1,), 0), (1, (1,), 1))
        assert prob.nu == 3

    def test_qp3_nonnegative(self):
        an = analysis("qp3")
        prob = build_majorant(an.red, an.sg, mp.mpf("0.5"))
        assert all(a > 0 for a, _, _ in prob.abs_monomials)
        assert all(any(k) or p >= 2 for _, k, p in prob.abs_monomials)

    def test_nonpositive_nu(self):
        an = analysis("euler")
        with pytest.raises(NonpositiveNu):
            build_majorant(an.red, an.sg, 0)
        with pytest.raises(NonpositiveNu):
            MajorantProblem(mp.mpf(-1), 1, (), 256)

    def test_linear_constant_monomial_rejected(self):
        with pytest.raises(ValueError):
            MajorantProblem(mp.mpf(1), 1, ((mp.mpf(1), (0,), 1),), 256)


class TestCoefficients:
    def test_catalan(self):
        prob = MajorantProblem(mp.mpf(1), 1, ((mp.mpf(1), (1,), 0), (mp.mpf(1), (0,), 2)), 256)
        C = majorant_coefficients(prob, 12)
        assert [C[(n,)] for n in range(1, 13)] == CATALAN

    def test_linear(self):
        prob = MajorantProblem(mp.mpf(2), 1, ((mp.mpf(1), (1,), 0), (mp.mpf(1), (1,), 1)), 256)
        C = majorant_coefficients(prob, 10)
        for n in range(1, 11):
            assert C[(n,)] == mp.mpf(2) ** -n

    def test_base_case(self):
        prob = MajorantProblem(mp.mpf(4), 2, ((mp.mpf(1), (1, 0), 0), (mp.mpf(3), (0, 1), 0)), 256)
        assert majorant_coefficients(prob, 1) == {(1, 0): mp.mpf(1) / 4, (0, 1): mp.mpf(3) / 4}

    def test_order_zero_rejected(self):
        prob = MajorantProblem(mp.mpf(1), 1, ((mp.mpf(1), (1,), 0),), 256)
        with pytest.raises(ValueError):
            majorant_coefficients(prob, 0)


class TestDominance:
    @pytest.mark.parametrize("N", [16, 20])
    def test_qp3(self, N):
        an, t = solved("qp3", N)
        nu = compute_nu(an.L, an.red.lambda_m, an.sg, an.ctx, an.certificate)
        C = majorant_coefficients(build_majorant(an.red, an.sg, nu.nu), N)
        res = dominance_check(t, C)
        assert res.overall and res.first_failure is None
        assert len(res.pointwise) == sum(d + 1 for d in range(1, N + 1))

    def test_zero_coefficients_dominated(self):
        ctx, b, sg = one_generator(2)
        t = CoefficientTable(sg, b.zero(), {}, 3)
        assert dominance_check(t, {}).overall

    def test_failure_reported(self):
        ctx, b, sg = one_generator(2)
        t = CoefficientTable(sg, b.zero(), {(1,): mp.mpc(1), (2,): mp.mpc(2)}, 3)
        res = dominance_check(t, {(1,): mp.mpf(1), (2,): mp.mpf(1)})
        assert not res.overall and res.first_failure == (2,)
        assert res.pointwise == {(1,): True, (2,): False, (3,): True}


class TestRadius:
    def test_catalan_quarter(self):
        prob = MajorantProblem(mp.mpf(1), 1, ((mp.mpf(1), (1,), 0), (mp.mpf(1), (0,), 2)), 256)
        C = majorant_coefficients(prob, 16)
        r = radius_estimate(C, 1, 16, 256)
        assert abs(r - mp.mpf(1) / 4) < mp.mpf(1) / 40

    def test_geometric(self):
        prob = MajorantProblem(mp.mpf(2), 1, ((mp.mpf(1), (1,), 0), (mp.mpf(1), (1,), 1)), 256)
        C = majorant_coefficients(prob, 12)
        assert abs(radius_estimate(C, 1, 12, 256) - 2) < 1e-6

    def test_polynomial_infinite(self):
        prob = MajorantProblem(mp.mpf(2), 1, ((mp.mpf(1), (1,), 0),), 256)
        C = majorant_coefficients(prob, 10)
        assert radius_estimate(C, 1, 10, 256) == mp.inf

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            radius_estimate({}, 1, 7, 256)

    def test_qp3_stable(self):
        an = analysis("qp3")
        nu = compute_nu(an.L, an.red.lambda_m, an.sg, an.ctx, an.certificate)
        prob = build_majorant(an.red, an.sg, nu.nu)
        C = majorant_coefficients(prob, 32)
        r16 = radius_estimate(C, 2, 16, 256)
        r32 = radius_estimate(C, 2, 32, 256)
        assert 0 < r32 and abs(r16 - r32) / r32 < 0.2
