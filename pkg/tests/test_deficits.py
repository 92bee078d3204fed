"""Inequality verifiers: frozen constants, closed-form oracles, status bands."""

import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfstab import (CapabilityError, DeficitReport, DomainError, GFun,
                    GaussianMixture1D, GaussianMixtureND, PLTriple,
                    ProductFunction, lambda_limit_diagnostics, lsi_deficit,
                    pl_deficit_check, sup_convolution, verify_corollary,
                    verify_talagrand, verify_thm_main)
from bfstab.corpus import _sin_bump

LSI_SIGMA2 = 0.3181471805599453   # fisher/2 - entropy at sigma = 2
TAL_SIGMA2 = 0.6137056388801092
MAIN_MARGIN_SIGMA2 = 0.1931471805599453
TAL_MARGIN_SIGMA2 = 0.4887056388801092


def scaled(s, a=0.0):
    return GaussianMixture1D([1.0], [a], [s])


def mix2d():
    return GaussianMixtureND(
        [0.4, 0.6], [[-0.5, 0.3], [1.0, -0.2]],
        [[[1.2, 0.3], [0.3, 0.8]], [[0.7, -0.1], [-0.1, 1.5]]])


# ---------------------------------------------------------------------------
# report status bands


def build_report(margin, err, force=False):
    return DeficitReport.build(case_id="t", theorem="main",
                               deficit=margin, lower_bound=0.0, error=err,
                               tol=1e-6, method="m", force_inconclusive=force)


def test_status_pass_band():
    assert build_report(0.5, 1e-6).status == "pass"
    assert build_report(-1.9e-6, 1e-6).status == "pass"  # >= -(tol + err)


def test_status_inconclusive_band():
    assert build_report(-2.5e-6, 1e-6).status == "inconclusive"
    assert build_report(-3.9e-6, 1e-6).status == "inconclusive"


def test_status_fail_band():
    assert build_report(-4.1e-6, 1e-6).status == "fail"


def test_force_inconclusive_never_upgrades_fail():
    assert build_report(0.5, 1e-6, force=True).status == "inconclusive"
    assert build_report(-4.1e-6, 1e-6, force=True).status == "fail"


def test_report_json_field_order():
    rep = build_report(0.1, 1e-9)
    assert list(rep.to_json_dict()) == [
        "case_id", "theorem", "deficit", "lower_bound", "margin",
        "error_estimate", "status", "method"]


# ---------------------------------------------------------------------------
# log-Sobolev deficit


def test_lsi_deficit_sigma2_frozen():
    val, err = lsi_deficit(scaled(2.0))
    assert abs(val - LSI_SIGMA2) < 1e-11 + err


def test_lsi_deficit_tilts_vanish():
    for a in (-2.0, 0.5, 1.5):
        val, err = lsi_deficit(scaled(1.0, a))
        assert abs(val) < 1e-10 + err


def test_lsi_deficit_additive_over_products():
    h = scaled(2.0)
    val2, err2 = lsi_deficit(ProductFunction([h, h]))
    assert abs(val2 - 2 * LSI_SIGMA2) < 1e-9 + err2
    val3, err3 = lsi_deficit(ProductFunction([h, h, h]))
    assert abs(val3 - 3 * LSI_SIGMA2) < 1e-9 + err3


def test_lsi_deficit_nd_gaussian():
    nu = GaussianMixtureND([1.0], [[0.0, 0.0]], [4.0 * np.eye(2)])
    val, err = lsi_deficit(nu)
    assert abs(val - 2 * LSI_SIGMA2) < 1e-9 + err


def test_lsi_deficit_rejects_unnormalized():
    from bfstab import RelFunction1D
    with pytest.raises(DomainError):
        lsi_deficit(RelFunction1D.from_measure(scaled(1.5)).scaled(2.0))


# ---------------------------------------------------------------------------
# main theorem


def test_main_theorem_sigma2_margin():
    rep = verify_thm_main(scaled(2.0), case_id="sigma2")
    assert rep.status == "pass"
    assert abs(rep.deficit - LSI_SIGMA2) < 1e-6
    assert abs(rep.lower_bound - 0.125) < 1e-7
    assert abs(rep.margin - MAIN_MARGIN_SIGMA2) < 1e-6


def test_main_theorem_equality_case():
    rep = verify_thm_main(scaled(1.0, 1.3))
    assert rep.status == "pass"
    assert abs(rep.deficit) < 1e-7
    assert rep.lower_bound < 1e-12


def test_main_theorem_mixture_2d():
    rep = verify_thm_main(mix2d())
    assert rep.status == "pass"
    assert rep.margin >= -(1e-6 + rep.error_estimate)
    assert "dn=" in rep.method


# ---------------------------------------------------------------------------
# corollary


def test_corollary_product_exact():
    h = scaled(2.0)
    rep = verify_corollary(ProductFunction([h, h]).as_mixture())
    assert rep.status == "pass"
    # per-axis slices of a product do not depend on the pinned point
    assert abs(rep.lower_bound - 0.25) / 0.25 < 1e-6
    assert abs(rep.deficit - 2 * LSI_SIGMA2) < 1e-6


def test_corollary_mixture_2d():
    rep = verify_corollary(mix2d(), case_id="m2")
    assert rep.status == "pass"
    assert "mass-weighted" in rep.method and "literal" in rep.method


def test_corollary_needs_two_dims():
    with pytest.raises(DomainError):
        verify_corollary(GaussianMixtureND([1.0], [[0.0]], [[[4.0]]]))


# ---------------------------------------------------------------------------
# Talagrand


def test_talagrand_1d_sigma2_frozen():
    rep = verify_talagrand(scaled(2.0), "1d")
    assert rep.status == "pass"
    assert abs(rep.deficit - TAL_SIGMA2) < 1e-9
    assert abs(rep.lower_bound - 0.125) < 1e-8
    assert abs(rep.margin - TAL_MARGIN_SIGMA2) < 1e-8
    assert "bregman-chain middle=0.306852819" in rep.method


def test_talagrand_product_tensorizes():
    h = scaled(2.0)
    rep = verify_talagrand(ProductFunction([h, h]), "product")
    assert rep.status == "pass"
    assert abs(rep.deficit - 2 * TAL_SIGMA2) < 1e-8
    assert abs(rep.lower_bound - 0.125) < 1e-7


def test_talagrand_sampled_nd_runs_and_is_honest():
    rep = verify_talagrand(mix2d(), "sampled-nd", m_samples=256, repeats=4,
                           seed=3)
    assert rep.status in ("pass", "inconclusive")
    assert "estimate, not proof" in rep.method


def test_talagrand_sampled_nd_large_se_is_inconclusive():
    # tiny clouds leave a calibration shift above the diagnostic cap
    rep = verify_talagrand(mix2d(), "sampled-nd", m_samples=64, repeats=2,
                           seed=0)
    assert rep.status == "inconclusive"


def test_talagrand_mode_validation():
    with pytest.raises(DomainError):
        verify_talagrand(mix2d(), "product")
    with pytest.raises(DomainError):
        verify_talagrand(mix2d(), "1d")
    with pytest.raises(DomainError):
        verify_talagrand(mix2d(), "there-is-no-such-mode")
    with pytest.raises(DomainError):
        nu4 = GaussianMixtureND([1.0], [np.zeros(4)], [np.eye(4)])
        verify_talagrand(nu4, "sampled-nd")


# ---------------------------------------------------------------------------
# sup-convolution


def quad_oracle(kappa, b, c0, lam):
    """Everything about the quadratic PL triple, from scratch."""
    s = 1.0 / (1.0 - lam)
    c = (1.0 - lam) / (2.0 * lam)
    tau_u = 1.0 + kappa * s
    a_val = math.exp(c0 * s + (b * s) ** 2 / (2.0 * tau_u)) / math.sqrt(tau_u)
    # h(z) = alpha + beta z - q/2 z^2
    denom = kappa + 2.0 * c
    alpha = c0 + b * b / (2.0 * denom)
    beta = 2.0 * b * c / denom
    q = 2.0 * c * kappa / denom
    b_val = math.exp(alpha + beta ** 2 / (2.0 * (1.0 + q))) / math.sqrt(1.0 + q)
    deficit = b_val * a_val ** (lam - 1.0) - 1.0
    dist = 1.0 - 1.0 / math.sqrt(tau_u)
    coeff = 0.5 * lam ** (1.0 + lam) * (1.0 - lam) ** (2.0 - lam)
    return a_val, b_val, deficit, coeff * dist * dist


def test_sup_convolution_closed_form_quadratic():
    kappa, b, c0, lam = 0.8, 0.4, -0.1, 0.35
    c = (1.0 - lam) / (2.0 * lam)
    g = GFun.quadratic(kappa, b, c0)
    zs = np.linspace(-4, 4, 9)
    denom = kappa + 2.0 * c
    ref = c0 - c * zs ** 2 + (b + 2.0 * c * zs) ** 2 / (2.0 * denom)
    assert np.allclose(sup_convolution(g, lam, zs), ref, atol=1e-14)


def test_sup_convolution_grid_matches_closed_form():
    kappa, b, c0, lam = 0.8, 0.4, -0.1, 0.35
    quad = GFun.quadratic(kappa, b, c0)
    generic = GFun.from_callable(lambda x: -0.5 * kappa * x * x + b * x + c0)
    zs = np.linspace(-3, 3, 25)
    assert np.allclose(sup_convolution(generic, lam, zs),
                       sup_convolution(quad, lam, zs), atol=1e-8)


@given(st.floats(-3.0, 3.0), st.floats(0.05, 0.95), st.floats(0.0, 2.0),
       st.floats(-1.0, 1.0))
@settings(max_examples=60)
def test_sup_convolution_dominates_input(z, lam, kappa, b):
    g = GFun.quadratic(kappa, b)
    assert sup_convolution(g, lam, z) >= float(g(z)) - 1e-12


@given(st.floats(-2.0, 2.0), st.floats(0.1, 0.4))
@settings(max_examples=30)
def test_sup_convolution_monotone_in_lambda(z, lam):
    # larger lambda weakens the penalty, so h can only grow
    g = GFun.from_callable(_sin_bump)
    assert (sup_convolution(g, 2.0 * lam, z)
            >= sup_convolution(g, lam, z) - 1e-12)


def test_gfun_validation():
    with pytest.raises(DomainError):
        GFun.quadratic(-1.0)
    with pytest.raises(DomainError):
        GFun(kind="generic")
    with pytest.raises(CapabilityError):
        GFun.from_callable(_sin_bump).deriv(0.5)
    with pytest.raises(DomainError):
        PLTriple(GFun.const(0.0), 1.0)


def test_gfun_generic_pickles():
    g = GFun.from_callable(_sin_bump)
    back = pickle.loads(pickle.dumps(g))
    xs = np.linspace(-3, 3, 11)
    assert np.allclose(back(xs), g(xs))


# ---------------------------------------------------------------------------
# PL deficit


def test_pl_quadratic_against_closed_form_oracle():
    kappa, b, c0, lam = 0.8, 0.4, -0.1, 0.35
    _, _, deficit_ref, lower_ref = quad_oracle(kappa, b, c0, lam)
    rep = pl_deficit_check(PLTriple(GFun.quadratic(kappa, b, c0), lam))
    assert abs(rep.deficit - deficit_ref) < 1e-9
    assert abs(rep.lower_bound - lower_ref) < 1e-9
    assert rep.status == "pass"


@pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
def test_pl_equality_for_flat_and_linear(lam):
    for g in (GFun.const(0.0), GFun.linear(1.0), GFun.linear(-0.7, 0.2)):
        rep = pl_deficit_check(PLTriple(g, lam))
        assert rep.status == "pass"
        assert abs(rep.deficit) < 1e-10
        assert rep.lower_bound < 1e-12


def test_pl_generic_bump_passes():
    rep = pl_deficit_check(PLTriple(GFun.from_callable(_sin_bump), 0.3))
    assert rep.status == "pass"
    assert rep.margin >= -(1e-6 + rep.error_estimate)


# ---------------------------------------------------------------------------
# lambda limit diagnostics


def test_lambda_diagnostics_residuals_shrink():
    rows = lambda_limit_diagnostics(GFun.quadratic(0.5), (0.2, 0.1, 0.05))
    for prev, cur in zip(rows, rows[1:]):
        assert prev.entropy_residual / cur.entropy_residual > 1.5
        assert prev.fisher_residual / cur.fisher_residual > 1.5


def test_lambda_diagnostics_limits_match_quadrature():
    from scipy import integrate, stats
    g = GFun.quadratic(0.5, 0.3)
    rows = lambda_limit_diagnostics(g, (0.1,))
    m, _ = integrate.quad(lambda x: math.exp(g(x)) * stats.norm.pdf(x),
                          -12, 12)
    ent, _ = integrate.quad(
        lambda x: g(x) * math.exp(g(x)) * stats.norm.pdf(x), -12, 12)
    assert abs(rows[0].entropy_limit - (ent - m * math.log(m))) < 1e-9
    fisher, _ = integrate.quad(
        lambda x: g.deriv(x) ** 2 * math.exp(g(x)) * stats.norm.pdf(x),
        -12, 12)
    assert abs(rows[0].fisher_limit - fisher / (2 * 0.9)) < 1e-9


def test_lambda_diagnostics_validation():
    with pytest.raises(DomainError):
        lambda_limit_diagnostics(GFun.const(0.0), (0.1, 0.2))  # not decreasing
    with pytest.raises(DomainError):
        lambda_limit_diagnostics(GFun.const(0.0), (0.7, 0.3))  # above 1/2
