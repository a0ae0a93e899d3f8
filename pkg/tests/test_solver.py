import csv

import pytest

from conftest import analysis, analysis_from_text, solved
from qgps.errors import InsufficientData, MissingParameter, PrecisionExhausted, SeedError, UnresolvedResonance
from qgps.exponents import ExponentVector
from qgps.numeric import get_mp
from qgps.pipeline import solve_analysis
from qgps.solver import (
    CoefficientTable,
    assemble,
    classify_growth,
    evaluate,
    export_csv,
    fit_growth,
    growth_analysis,
    identity_residuals,
    lower_bound_check,
    solve,
    table_to_json,
)

mp = get_mp(256)


def oracle_ray(Q, count):
    """Plain recursion for y = sum a_k z1**k restricted to the first generator:
    a_k (Q**(2k) - Q**(k+1)) = sum_{j} a_j a_{k-j}, a_1 = 1."""
    a = {1: mp.mpc(1)}
    for k in range(2, count + 1):
        s = sum(a[j] * a[k - j] for j in range(1, k))
        a[k] = s / (Q ** (2 * k) - Q ** (k + 1))
    return a


class TestEuler:
    def test_closed_form(self):
        _, t = solved("euler", 50)
        for m in range(1, 51):
            n = m + 1
            ref = mp.mpf(2) ** (-(n * (n + 1) // 2))
            assert abs(t[(m,)] - ref) <= 1e-70 * ref

    def test_prefix_and_assembly(self):
        an, t = solved("euler", 4)
        phi = assemble(t, an.prefix)
        assert [c for _, c in phi.terms] == [mp.mpf(2) ** -k for k in (1, 3, 6, 10, 15)]

    def test_empty_table_returns_prefix(self):
        an = analysis("euler")
        t = CoefficientTable(an.sg, an.red.lambda_m, {}, 0)
        assert assemble(t, an.prefix).terms == an.prefix.terms


class TestResonantFixture:
    def test_values(self):
        _, t = solved("example1", 10)
        # oracle (plain mpmath at 60 digits)
        assert abs(t[(1, 0)] - mp.mpf("205152.1950534486722814313793871373491952")) < 1e-30
        assert t.resonances[0].point == (0, 1) and t.resonances[0].name == "c01"

    def test_real_nonnegative(self):
        _, t = solved("example1", 10)
        for P, c in t.coeffs.items():
            assert c.imag == 0 and c.real > 0

    def test_second_axis_vanishes(self):
        _, t = solved("example1", 10)
        for m in range(2, 11):
            assert (0, m) not in t.coeffs

    def test_param_changes_free_coefficient(self):
        text = open(__import__("conftest").problem_path("example1")).read()
        an = analysis_from_text(text, params={"c01": 2})
        t = solve_analysis(an, 3)
        assert t[(0, 1)] == 2


class TestStraddlingFixture:
    def test_c10(self):
        _, t = solved("example2", 15)
        ref = mp.mpc("22.14461210374310891447847675996931837357", "-106.6782941914128951618219174695976950777")
        assert abs(t[(1, 0)] - ref) < 1e-30

    @pytest.mark.parametrize("m, re, im", [
        (8, "3.36715427808108126166567901261e+37", "8.10404914449909663413194081291e+36"),
        (12, "-6.90461325319590311466012307402e+72", "-1.62527262472761502655099433237e+72"),
        (15, "3.05958643507130142135404255667e+106", "7.04712517783637481657833504828e+105"),
    ])
    def test_frozen_ray_values(self, m, re, im):
        _, t = solved("example2", 15)
        ref = mp.mpc(re, im)
        assert abs(t[(m, 0)] - ref) / abs(ref) < 1e-25

    def test_ray_recursion(self):
        an, t = solved("example2", 15)
        Q = mp.power(an.ctx.q, mp.mpc(1, 1))
        a = oracle_ray(Q, 16)
        for m in range(1, 16):
            assert abs(t[(m, 0)] - a[m + 1]) / abs(a[m + 1]) < 1e-50

    def test_precision_exhausted(self):
        an = analysis("example2", 32)
        with pytest.raises(PrecisionExhausted) as info:
            solve_analysis(an, 15)
        assert info.value.exit_code != 0


class TestErrors:
    def test_unresolved_resonance(self):
        an = analysis_from_text("q = 2\neq: S1(y) - 4*y - z*y - z = 0\nseed: c*z\n")
        with pytest.raises(UnresolvedResonance):
            solve_analysis(an, 3)

    def test_missing_parameter(self):
        text = (
            "basis = [1, sqrt2]\nq = 0.5\neq: S2(y) - 2^(-sqrt2)*S1(y) + y^2 - 5*z = 0\n"
            "seed: c00*z^(1)\ngenerators = [1, sqrt2 - 1]\n"
        )
        an = analysis_from_text(text)
        with pytest.raises(MissingParameter) as info:
            solve_analysis(an, 2)
        assert info.value.name == "c01"

    def test_missing_parameter_supplied(self):
        text = (
            "basis = [1, sqrt2]\nq = 0.5\neq: S2(y) - 2^(-sqrt2)*S1(y) + y^2 - 5*z = 0\n"
            "seed: c00*z^(1)\ngenerators = [1, sqrt2 - 1]\n"
        )
        an = analysis_from_text(text, params={"c01": 1})
        t = solve_analysis(an, 4)
        _, ref = solved("example1", 4)
        for P in ref.points():
            assert abs(t[P] - ref[P]) <= 1e-60 * max(1, abs(ref[P]))

    def test_seed_mismatch(self):
        an = analysis_from_text("q = 2\neq: S1(y) - z*y - z = 0\nseed: c*z + 0.3*z^(2)\n")
        with pytest.raises(SeedError):
            solve_analysis(an, 3)

    def test_consistent_seed_accepted(self):
        an = analysis_from_text("q = 2\neq: S1(y) - z*y - z = 0\nseed: c*z + 0.125*z^(2)\n")
        t = solve_analysis(an, 3)
        assert t[(1,)] == mp.mpf(1) / 8 and t[(2,)] == mp.mpf(1) / 64


class TestIdentity:
    @pytest.mark.parametrize("name, N", [("euler", 20), ("example1", 10), ("example2", 8), ("qp3", 10)])
    def test_residuals(self, name, N):
        an, t = solved(name, N)
        res = identity_residuals(an.red, an.sg, an.ctx, t)
        assert max(res.values()) < mp.mpf(2) ** -200

    def test_triangularity(self):
        # fixing coefficients of degree < d to the computed values reproduces degree d
        an, t = solved("example2", 8)
        low = {P: c for P, c in t.coeffs.items() if sum(P) < 8}
        again = solve(an.red, an.sg, an.ctx, 8, params=an.problem.parameters, seed=an.seed_map, fixed=low)
        for P in t.points(8):
            assert abs(again[P] - t[P]) <= 1e-60 * max(1, abs(t[P]))

    def test_perturbation_propagates_only_upward(self):
        an, t = solved("example1", 6)
        fixed = {(1, 0): t[(1, 0)] * 2}
        again = solve(an.red, an.sg, an.ctx, 6, params=an.problem.parameters, seed=an.seed_map, fixed=fixed)
        for P in t.points(1):
            if P != (1, 0):
                assert again[P] == t[P]
        assert again[(2, 0)] != t[(2, 0)]

    def test_deterministic(self):
        an = analysis("example2")
        a = solve_analysis(an, 6)
        b = solve_analysis(an, 6)
        assert table_to_json(a, mp) == table_to_json(b, mp)

    def test_support_in_semigroup(self):
        an, t = solved("qp3", 10)
        for P in t.coeffs:
            assert all(x >= 0 for x in P) and 1 <= sum(P) <= 10
            assert an.sg.exponent_of(P) == sum(
                (g.scale(x) for g, x in zip(an.sg.generators, P)), ExponentVector((0,) * len(P and an.sg.generators[0].coords))
            )


class TestGrowth:
    def test_euler_q2_bounded(self):
        an, t = solved("euler", 40)
        rep = growth_analysis(t, (1,), an.ctx)
        # oracle: -ln(2)/2
        assert abs(rep.quadratic_fit[0] + float(mp.mpf("0.346573590279972654708616060729"))) < 1e-9
        assert rep.verdict == "BoundedRadius"

    def test_euler_half_zero_radius(self):
        an = analysis_from_text("q = 0.5\neq: S1(y) - z*y - z = 0\nseed: c*z\n")
        t = solve_analysis(an, 30)
        rep = growth_analysis(t, (1,), an.ctx)
        assert abs(rep.quadratic_fit[0] - 0.346573590279972654708616060729) < 1e-9
        assert rep.verdict == "ZeroRadiusEvidence"
        assert abs(rep.q_gevrey_order - 1) < 1e-6

    def test_geometric_bounded(self):
        samples = [(t, t * 0.7 + 1.0) for t in range(1, 30)]
        a, b, c, sa = fit_growth(samples)
        assert abs(a) < 1e-10 and abs(b - 0.7) < 1e-9
        assert classify_growth(a, sa, 29) == "BoundedRadius"

    def test_insufficient(self):
        an, t = solved("qp3", 10)
        with pytest.raises(InsufficientData):
            growth_analysis(t, (1, 0), an.ctx)

    def test_bad_ray(self):
        an, t = solved("euler", 10)
        with pytest.raises(ValueError):
            growth_analysis(t, (0,), an.ctx)

    def test_lower_bound_rows(self):
        out = lower_bound_check([(1, 5.0), (2, 1.0)], log_base=1.0, t_min=1)
        assert [r["passed"] for r in out["rows"]] == [True, False] and not out["passed"]


class TestEvaluate:
    def test_euler_cauchy(self):
        an, t = solved("euler", 30)
        phi = assemble(t, an.prefix)
        v, res = evaluate(phi, an.ctx, mp.mpf("0.1"), F=an.problem.equation)
        exact = mp.nsum(lambda n: mp.mpf(2) ** (-n * (n + 1) / 2) * mp.mpf("0.1") ** n, [1, mp.inf])
        assert abs(v - exact) < 1e-70
        assert res < 1e-70

    def test_at_zero(self):
        an, t = solved("euler", 5)
        v, _ = evaluate(assemble(t, an.prefix), an.ctx, 0)
        assert v == 0

    def test_qp3_residual_decreases(self):
        an = analysis("qp3")
        r = []
        for N in (8, 16):
            t = solve_analysis(an, N)
            _, res = evaluate(assemble(t, an.prefix), an.ctx, mp.mpf("0.01"), F=an.problem.equation)
            r.append(res)
        assert r[1] * 10 <= r[0]


def test_csv_export(tmp_path):
    an, t = solved("euler", 5)
    path = tmp_path / "c.csv"
    export_csv(t, path, mp)
    rows = list(csv.reader(open(path)))
    assert rows[0][0] == "m" and len(rows) == 6
    assert rows[1][:2] == ["1", "2.0"]
