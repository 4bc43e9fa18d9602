import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from psilcf.funclass import (
    PositiveFunction,
    PsiSpec,
    PsiSpecError,
    RepresentationError,
    RepresentationSpec,
    Verdict,
    build_lcf,
    build_psi_lcf,
    build_svf,
    check_class_K,
    check_class_K1,
    check_conjugate,
    check_psi_lcf,
    check_upper_power,
    conjugate_gamma,
    conjugate_theta,
    estimate_condition_A,
    extract_epsilon,
    gamma,
    gamma_inverse,
    growth_ratio_trend,
    shift_bound,
    solve_shift,
    theta,
    theta_inverse,
    uniform_deviation,
)
from psilcf.funclass.corpus import corpus, widths
from psilcf.funclass.numerics import CumulativeIntegral, adaptive_simpson
from psilcf.funclass.reports import CSV_COLUMNS, write_rows

ONE = PsiSpec.constant()
SQRT = PsiSpec("sqrt(x)")
LIN = PsiSpec("x")


@pytest.fixture(scope="module")
def named():
    return corpus()


# -- numerics ----------------------------------------------------------------


def test_adaptive_simpson_against_quad():
    f = lambda t: math.exp(-t) * math.cos(3 * t)
    assert adaptive_simpson(f, 0, 7) == pytest.approx(quad(f, 0, 7, epsabs=1e-14)[0], abs=1e-11)
    assert adaptive_simpson(f, 7, 0) == pytest.approx(-quad(f, 0, 7, epsabs=1e-14)[0], abs=1e-11)


def test_cumulative_integral_reuses_nodes():
    ci = CumulativeIntegral(math.cos, 0.0, step=1.0, growth="doubling")
    for b in (0.3, 5.0, 17.5, 100.0, 2.0):
        assert ci(b) == pytest.approx(math.sin(b), abs=1e-10)


# -- gamma / theta -----------------------------------------------------------


@pytest.mark.parametrize("psi, x, expected", [(ONE, 5.0, 4.0), (LIN, math.e**2, 2.0), (SQRT, 100.0, 18.0)])
def test_gamma_closed_forms(psi, x, expected):
    assert gamma(psi, x) == pytest.approx(expected, abs=1e-10)


def test_gamma_strictly_increasing_and_matches_closed_form_on_grid():
    xs = np.geomspace(1.0, 1e8, 50)
    vals = np.array([gamma(SQRT, x) for x in xs])
    assert np.all(np.diff(vals) > 0)
    np.testing.assert_allclose(vals, 2 * (np.sqrt(xs) - 1), rtol=1e-12, atol=1e-10)


def test_gamma_additivity_against_quadrature_oracle():
    psi = PsiSpec("x^0.7")
    xs = [1.0, 3.0, 40.0, 700.0, 1.2e4]
    for x1, x2 in zip(xs[:-1], xs[1:]):
        want = quad(lambda t: t**-0.7, x1, x2, epsabs=1e-13, epsrel=1e-13)[0]
        assert gamma(psi, x2) - gamma(psi, x1) == pytest.approx(want, abs=1e-10)


def test_gamma_inverse_examples():
    assert gamma_inverse(ONE, 4.0) == pytest.approx(5.0, abs=1e-9)
    assert gamma_inverse(SQRT, 18.0) == pytest.approx(100.0, rel=1e-12)
    psi = PsiSpec("x^0.7")
    assert gamma(psi, gamma_inverse(psi, 7.0)) == pytest.approx(7.0, abs=1e-9)


def test_theta_examples():
    assert theta(SQRT, 100.0) == pytest.approx(10.0)
    assert theta_inverse(SQRT, 10.0) == pytest.approx(100.0, rel=1e-12)
    assert theta(PsiSpec("x^0.9"), 1e6) == pytest.approx(10**0.6, rel=1e-12)


def test_theta_inverse_rejects_non_monotone_theta():
    psi = PsiSpec(lambda t: t, label="x")
    with pytest.raises(PsiSpecError):
        theta_inverse(psi, 3.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.0, max_value=1e5))
def test_gamma_round_trip(t):
    for psi in (SQRT, PsiSpec("x^0.7")):
        assert gamma(psi, gamma_inverse(psi, t)) == pytest.approx(t, rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1.5, max_value=1e6))
def test_theta_round_trip(t):
    assert theta(SQRT, theta_inverse(SQRT, t)) == pytest.approx(t, rel=1e-9)


def test_psi_below_one_is_rejected():
    with pytest.raises(PsiSpecError):
        PsiSpec("x/ln(x+2)")
    with pytest.raises(PsiSpecError):
        PsiSpec("1/x")


# -- condition (A) and the classes ---------------------------------------------


def test_condition_a_examples():
    rep = estimate_condition_A(SQRT, vmax=10, xgrid=[1e4], vsteps=10)
    assert rep.a_hat[-1] == pytest.approx(math.sqrt(0.9), abs=1e-6)
    rep = estimate_condition_A(ONE, vmax=5)
    assert np.all(rep.a_hat == 1.0)
    rep = estimate_condition_A(LIN, vmax=1.0, vsteps=2)
    assert rep.a_hat[1] == pytest.approx(0.5)


@pytest.mark.parametrize("psi", [ONE, SQRT, LIN, PsiSpec("x^0.9"), PsiSpec("x/ln(x)", x0=10)])
def test_condition_a_duality(psi):
    rep = estimate_condition_A(psi, vmax=10)
    produced = ~np.isnan(rep.a_hat)
    assert np.all(rep.upper_sup[produced] <= 1 / rep.a_hat[produced] + 1e-6)
    reg = rep.a_regularized[produced]
    assert np.all(np.diff(reg) <= 0)
    assert np.all((rep.a_hat[rep.passed] > 0) & (rep.a_hat[rep.passed] <= 1))


def test_class_K_verdicts():
    v = check_class_K(SQRT)
    assert v.verdict is Verdict.PASS and v.heuristic and v.caveat
    assert check_class_K(ONE).passed
    lin = check_class_K(LIN)
    assert lin.verdict is Verdict.FAIL
    rep = lin.details["report"]
    below = rep.v < 1
    assert np.all(rep.passed[below])
    np.testing.assert_allclose(rep.a_hat[below], 1 - rep.v[below], atol=1e-12)


def test_class_K1_verdicts():
    v = check_class_K1(SQRT)
    assert v.passed and v.details["alpha_hat"] == pytest.approx(0.5, abs=1e-6)
    assert check_class_K1(LIN).verdict is Verdict.FAIL
    assert check_class_K1(PsiSpec("x^0.5*(1+0.1*ln(x))^0")).passed


def test_solve_shift_examples():
    assert solve_shift(ONE, 10.0, 0.7) == pytest.approx(0.7, abs=1e-12)
    assert solve_shift(LIN, 50.0, math.log(2)) == pytest.approx(1.0, abs=1e-10)
    x = 1e4
    for v in (1.0, -1.0, 3.0):
        r = solve_shift(SQRT, x, v)
        assert abs(gamma(SQRT, x + r * SQRT(x)) - gamma(SQRT, x) - v) <= 1e-9


def test_shift_bounded_by_condition_a_solution():
    rep = estimate_condition_A(SQRT, vmax=10, xgrid=[1e4, 1e6])
    for x in (1e4, 1e6):
        for v in (0.5, 1.0, 4.0):
            assert solve_shift(SQRT, x, v) <= shift_bound(rep, v) + 1e-9


# -- constructors ------------------------------------------------------------


def test_build_svf_identity_and_power():
    assert build_svf(RepresentationSpec(1, 0))(123.0) == 1.0
    g = build_svf(RepresentationSpec(1, -1.5, alpha=-1.5))
    for x in (2.0, 1e4, 1e12):
        assert g(x) == pytest.approx(x**-1.5, rel=1e-11)


def test_build_lcf_linear_exponent():
    g = build_lcf(RepresentationSpec(2.0, 0.25, alpha=0.25))
    assert g.log(40.0) == pytest.approx(math.log(2) + 10.0, rel=1e-12)


def test_representation_validation():
    assert RepresentationSpec(1, "1/ln(e+x)").validate()["eps_deviation_last"] < 1e-4
    with pytest.raises(RepresentationError):
        RepresentationSpec(1, "0.5").validate()
    with pytest.raises(RepresentationError):
        RepresentationSpec("0-1", 0).validate()
    with pytest.raises(RepresentationError):
        RepresentationSpec(1, 0.3, alpha=0.3, c_limit=2.0).validate()


def test_build_psi_lcf_requires_class_K():
    with pytest.raises(RepresentationError):
        build_psi_lcf(RepresentationSpec(1, 0), LIN)


def test_build_psi_lcf_uses_log_substitution_far_out():
    g = build_psi_lcf(RepresentationSpec(1, "1/ln(e+x)"), SQRT)
    # gamma(1e12) ~ 2e6, far beyond exp overflow
    lx = g.log(1e12)
    assert math.isfinite(lx)
    import mpmath

    top = 2 * (1e6 - 1)
    cuts = [0, 1, 10, 100, 1e3, 1e4, 1e5, 1e6, top]
    want = mpmath.quad(lambda u: 1 / mpmath.log(mpmath.e + mpmath.exp(u)), cuts)
    assert lx == pytest.approx(float(want), rel=1e-10)


@settings(max_examples=6, deadline=None)
@given(
    a=st.floats(min_value=-2, max_value=2),
    b=st.floats(min_value=0.5, max_value=2),
    k=st.floats(min_value=0, max_value=3),
    width=st.sampled_from(["1", "sqrt(x)", "x^0.7"]),
)
def test_constructed_functions_pass_checker(a, b, k, width):
    rep = RepresentationSpec(f"1+{k!r}/(1+x)", f"{a!r}/ln(e+x)^{b!r}", c_limit=1.0)
    psi = PsiSpec(width)
    g = build_psi_lcf(rep, psi)
    assert check_psi_lcf(g, psi, vlist=np.linspace(-2, 2, 9)).passed


# -- checker -----------------------------------------------------------------


EXPECTED = {
    "power": "PPF",
    "power_log": "PPF",
    "stretched_quarter": "PPF",
    "stretched_half": "PFF",
    "exponential": "FFF",
    "constant": "PPP",
    "stretched_060": "PFF",
    "built": "PPF",
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_membership_matrix_and_conjugate_equivalence(named, name):
    g = named[name]
    for (wname, psi), want in zip(widths().items(), EXPECTED[name]):
        d = check_psi_lcf(g, psi)
        assert d.verdict.value[0] == want, (name, wname, d.H)
        assert check_conjugate(g, psi, "gamma").verdict is d.verdict
        if check_class_K1(psi).passed and wname != "1":
            assert check_conjugate(g, psi, "theta").verdict is d.verdict


def test_check_psi_lcf_examples():
    d = check_psi_lcf("exp(-x)", ONE, vlist=[1.0], xgrid=[10.0, 100.0, 500.0])
    assert np.allclose(d.ratios, math.exp(-1), rtol=1e-12)
    assert d.verdict is Verdict.FAIL
    # far out the log-domain difference loses digits in proportion to x
    d = check_psi_lcf("exp(-x)", ONE, vlist=[1.0])
    assert np.allclose(d.ratios, math.exp(-1), rtol=1e-4)
    assert d.verdict is Verdict.FAIL
    d = check_psi_lcf("exp(sqrt(x))", SQRT, vlist=[1.0], xgrid=[1e8, 1e10, 1e12])
    assert d.ratios[0, -1] == pytest.approx(math.exp(0.5), rel=1e-5)


def test_check_psi_lcf_skips_inadmissible_pairs():
    d = check_psi_lcf("x^-3", LIN, vlist=[-2.0, -1.0, -0.5])
    assert np.all(np.isnan(d.ratios[:2]))
    assert np.allclose(d.ratios[2], 8.0)


def test_check_psi_lcf_rejects_non_positive():
    from psilcf.funclass import NonPositiveValueError

    with pytest.raises(NonPositiveValueError):
        check_psi_lcf("0-x", ONE)


def test_uniform_deviation_examples():
    g = "x^-3"
    h6 = uniform_deviation(g, SQRT, -1, 1, 1e6)
    assert h6 == pytest.approx((1 - 1e-3) ** -3 - 1, rel=1e-9)
    assert 2.9e-3 <= h6 <= 3.1e-3
    assert uniform_deviation(g, SQRT, -1, 1, 1e8) == pytest.approx(3.0e-4, rel=0.01)
    assert uniform_deviation("5", LIN, -0.4, 3, 1e5) == 0.0
    hs = [uniform_deviation(g, SQRT, -1, 1, 10.0 ** (2 * k)) for k in (2, 3, 4)]
    assert hs[0] > hs[1] > hs[2]


def test_monotone_shortcut(named):
    for name in ("power_log", "stretched_quarter", "stretched_half", "stretched_060", "constant", "built"):
        g = named[name]
        for psi in widths().values():
            full = check_psi_lcf(g, psi)
            ends = check_psi_lcf(g, psi, vlist=[-2.0, 2.0])
            assert full.verdict is ends.verdict, (name, psi.label)


def test_growth_ratio_trend_for_members(named):
    for name, g in named.items():
        for wname, psi in widths().items():
            if not check_psi_lcf(g, psi).passed:
                continue
            assert growth_ratio_trend(g, psi)["decreasing"], (name, wname)
            if wname == "sqrt":
                assert growth_ratio_trend(g, psi, clock="theta")["decreasing"], name


def test_conjugate_examples():
    g = conjugate_gamma("x^-3", LIN)
    for t in (1.0, 5.0, 30.0):
        assert g.log(t) == pytest.approx(-3 * t, rel=1e-9)
    h = conjugate_theta("exp(sqrt(x))", SQRT)
    assert h.log(40.0) == pytest.approx(40.0, rel=1e-12)


def test_extract_epsilon_examples():
    assert extract_epsilon("x^-3", LIN, 1e5) == pytest.approx(-3.0, rel=1e-8)
    assert extract_epsilon("5", SQRT, 1e5) == 0.0
    g = build_psi_lcf(RepresentationSpec(1, "1/ln(e+x)"), SQRT)
    eps = extract_epsilon(g, SQRT, 1e6)
    gm = gamma(SQRT, 1e6)
    assert abs(eps) <= 0.08
    assert eps == pytest.approx(1 / (gm + math.log1p(math.exp(1 - gm))), rel=1e-4)


def test_upper_power_examples():
    r = check_upper_power("x^-3", pgrid=[0.5])
    assert r.details["c_min"] == pytest.approx(0.125, rel=1e-12) and r.passed
    assert check_upper_power("exp(-x)").verdict is Verdict.FAIL
    assert check_upper_power("x^-3*ln(x)").passed


def test_report_csv(tmp_path):
    d = check_psi_lcf("x^-3", SQRT, vlist=[1.0])
    path = tmp_path / "r.csv"
    assert write_rows(path, d.rows()) == len(d.x)
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
