"""One-dimensional density layer: closed forms, scipy oracles, invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from bfstab import (ConditioningError, DomainError, GaussianMixture1D,
                    GridDensity1D, ParseError, RelFunction1D,
                    StandardGaussian, ent_gamma, entropy_rel_gauss,
                    fisher_integral, load_grid_csv)
from bfstab.density1d import normalize

GAUSS = StandardGaussian()

# frozen closed forms for nu = N(0, 4) against gamma = N(0, 1)
ENTROPY_SIGMA2 = 0.8068528194400546  # (a^2 + s^2 - 1 - log s^2) / 2
FISHER_SIGMA2 = 2.25                 # s^2 (1 - 1/s^2)^2


def mixtures():
    """Small but genuinely multimodal test set."""
    return [
        GaussianMixture1D([1.0], [0.0], [1.0]),
        GaussianMixture1D([1.0], [0.7], [2.0]),
        GaussianMixture1D([0.3, 0.7], [-1.0, 1.5], [0.6, 1.2]),
        GaussianMixture1D([0.2, 0.5, 0.3], [-2.0, 0.0, 2.0], [0.5, 1.0, 0.8]),
    ]


def mixture_strategy():
    comp = st.integers(min_value=1, max_value=3)

    @st.composite
    def build(draw):
        k = draw(comp)
        w = [draw(st.floats(0.1, 1.0)) for _ in range(k)]
        m = [draw(st.floats(-2.0, 2.0)) for _ in range(k)]
        s = [draw(st.floats(0.5, 2.0)) for _ in range(k)]
        w = np.asarray(w)
        return GaussianMixture1D(w / w.sum(), m, s)

    return build()


# ---------------------------------------------------------------------------
# pdf / cdf / quantile


def test_standard_gaussian_matches_scipy():
    xs = np.linspace(-6, 6, 41)
    assert np.allclose(GAUSS.pdf(xs), stats.norm.pdf(xs), atol=1e-14)
    assert np.allclose(GAUSS.cdf(xs), stats.norm.cdf(xs), atol=1e-14)
    ps = np.linspace(0.01, 0.99, 23)
    assert np.allclose(GAUSS.quantile(ps), stats.norm.ppf(ps), atol=1e-12)


@pytest.mark.parametrize("mix", mixtures())
def test_mixture_pdf_integrates_to_one(mix):
    val, err = integrate.quad(mix.pdf, -40, 40, limit=200)
    assert abs(val - 1.0) < 1e-10 + err


@pytest.mark.parametrize("mix", mixtures())
def test_mixture_cdf_matches_quadrature(mix):
    for x in (-2.5, -0.3, 0.0, 1.1, 3.0):
        ref, err = integrate.quad(mix.pdf, -40, x, limit=200)
        assert abs(mix.cdf(x) - ref) < 1e-10 + err


def test_mixture_logpdf_consistent():
    mix = mixtures()[2]
    xs = np.linspace(-8, 8, 33)
    assert np.allclose(np.exp(mix.logpdf(xs)), mix.pdf(xs), rtol=1e-13)


def test_mixture_dpdf_matches_numeric_derivative():
    mix = mixtures()[3]
    xs = np.linspace(-4, 4, 17)
    h = 1e-6
    num = (mix.pdf(xs + h) - mix.pdf(xs - h)) / (2 * h)
    assert np.allclose(mix.dpdf(xs), num, atol=1e-7)


@given(mixture_strategy(), st.floats(1e-7, 1.0 - 1e-7))
def test_quantile_roundtrip(mix, p):
    x = mix.quantile(p)
    assert abs(mix.cdf(x) - p) < 1e-9


@given(mixture_strategy(), st.floats(1e-7, 0.5))
def test_quantile_sf_roundtrip(mix, s):
    x = mix.quantile_sf(s)
    assert abs(mix.survival(x) - s) < 1e-9


def test_deep_tail_quantiles_are_finite_and_monotone():
    mix = mixtures()[2]
    ps = np.array([1e-14, 1e-10, 1e-7, 1e-4])
    qs = mix.quantile(ps)
    assert np.all(np.isfinite(qs))
    assert np.all(np.diff(qs) > 0)
    assert np.all(np.diff(mix.quantile_sf(ps)) < 0)


def test_mixture_moments():
    mix = GaussianMixture1D([0.4, 0.6], [-1.0, 2.0], [0.5, 1.5])
    mean = 0.4 * -1.0 + 0.6 * 2.0
    var = 0.4 * (0.25 + 1.0) + 0.6 * (2.25 + 4.0) - mean ** 2
    assert abs(mix.mean() - mean) < 1e-14
    assert abs(mix.variance() - var) < 1e-13


def test_sampling_moments(rng):
    mix = mixtures()[2]
    xs = mix.sample(rng, 200_000)
    assert abs(xs.mean() - mix.mean()) < 0.02
    assert abs(xs.var() - mix.variance()) < 0.05


# ---------------------------------------------------------------------------
# validation


def test_mixture_validation_errors():
    with pytest.raises(DomainError):
        GaussianMixture1D([0.5, 0.6], [0.0, 1.0], [1.0, 1.0])  # sum != 1
    with pytest.raises(DomainError):
        GaussianMixture1D([1.0], [0.0], [-1.0])
    with pytest.raises(DomainError):
        GaussianMixture1D([1.0], [np.nan], [1.0])
    with pytest.raises((DomainError, ConditioningError)):
        GaussianMixture1D([1.0], [0.0], [0.0])


# ---------------------------------------------------------------------------
# entropy and fisher functionals


def test_entropy_closed_form_scaled_gaussian():
    nu = GaussianMixture1D([1.0], [0.0], [2.0])
    assert abs(entropy_rel_gauss(nu) - ENTROPY_SIGMA2) < 1e-12


def test_entropy_closed_form_shifted():
    # H(N(a, s^2) | gamma) = (a^2 + s^2 - 1 - log s^2) / 2
    for a, s in ((0.3, 1.0), (-1.0, 0.5), (2.0, 1.7)):
        nu = GaussianMixture1D([1.0], [a], [s])
        ref = 0.5 * (a * a + s * s - 1.0 - math.log(s * s))
        assert abs(entropy_rel_gauss(nu) - ref) < 1e-11


def test_entropy_mixture_against_scipy_quad():
    mix = mixtures()[2]

    def integrand(x):
        return mix.pdf(x) * (mix.logpdf(x) - GAUSS.logpdf(x))

    ref, err = integrate.quad(integrand, -40, 40, limit=300)
    assert abs(entropy_rel_gauss(mix) - ref) < 1e-9 + err


def test_fisher_closed_form_scaled_gaussian():
    f = RelFunction1D.from_measure(GaussianMixture1D([1.0], [0.0], [2.0]))
    assert abs(fisher_integral(f) - FISHER_SIGMA2) < 1e-11


def test_fisher_mixture_against_scipy_quad():
    mix = mixtures()[3]
    f = RelFunction1D.from_measure(mix)

    def integrand(x):
        # |f'|^2 / f against the gaussian weight
        fx = f(np.array([x]))[0]
        dfx = f.deriv(np.array([x]))[0]
        return dfx * dfx / fx * GAUSS.pdf(x)

    ref, err = integrate.quad(integrand, -30, 30, limit=300)
    assert abs(fisher_integral(f) - ref) < 1e-8 + err


@given(st.floats(0.1, 10.0))
@settings(max_examples=20)
def test_ent_gamma_one_homogeneous(c):
    base = RelFunction1D.from_measure(mixtures()[2])
    assert abs(ent_gamma(base.scaled(c)) - c * ent_gamma(base)) < 1e-9 * (1 + c)


def test_exp_tilt_has_zero_entropy_and_fisher_gap():
    # f = exp(a x - a^2/2) saturates both functionals at the same value
    f = RelFunction1D.exp_tilt(0.8)
    assert abs(f.mass - 1.0) < 1e-12
    assert abs(0.5 * fisher_integral(f) - ent_gamma(f)) < 1e-11


def test_scaled_keeps_measure_attribute():
    mix = mixtures()[1]
    f = RelFunction1D.from_measure(mix)
    assert f.scaled(2.0).measure is mix


def test_normalize():
    f = RelFunction1D.from_measure(mixtures()[2]).scaled(3.0)
    m, g = normalize(f)
    assert abs(m - 3.0) < 1e-9
    assert abs(g.mass - 1.0) < 1e-10


# ---------------------------------------------------------------------------
# gridded densities


def _gaussian_grid(n=1501, lo=-9.0, hi=9.0, mean=0.3, std=1.1):
    xs = np.linspace(lo, hi, n)
    return xs, stats.norm.pdf(xs, loc=mean, scale=std)


def test_grid_density_matches_reference():
    xs, vals = _gaussian_grid()
    d = GridDensity1D(xs, vals)
    probe = np.linspace(-4, 4, 41)
    assert np.allclose(d.pdf(probe), stats.norm.pdf(probe, 0.3, 1.1),
                       rtol=1e-5, atol=1e-8)
    assert np.allclose(d.cdf(probe), stats.norm.cdf(probe, 0.3, 1.1),
                       atol=1e-6)


def test_grid_density_quantile_roundtrip():
    xs, vals = _gaussian_grid()
    d = GridDensity1D(xs, vals)
    for p in (1e-6, 0.01, 0.3, 0.5, 0.9, 1 - 1e-6):
        assert abs(d.cdf(d.quantile(p)) - p) < 1e-8


def test_grid_density_validation():
    with pytest.raises(DomainError):
        GridDensity1D([0.0, 1.0, 0.5], [0.1, 0.2, 0.1])  # x not increasing
    with pytest.raises(DomainError):
        GridDensity1D([0.0, 1.0], [0.1, -0.2])


def test_load_grid_csv_roundtrip(tmp_path):
    xs, vals = _gaussian_grid(n=801)
    path = tmp_path / "grid.csv"
    with open(path, "w") as fh:
        fh.write("x,density\n")
        for x, v in zip(xs, vals):
            fh.write(f"{x},{v}\n")
    d = load_grid_csv(path)
    assert abs(d.cdf(0.3) - 0.5) < 1e-5


def test_load_grid_csv_error_diagnostics(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,density\n0.0,0.1\n1.0,oops\n")
    with pytest.raises(ParseError, match="line 3"):
        load_grid_csv(path)
    path.write_text("wrong,header\n")
    with pytest.raises(ParseError, match="header"):
        load_grid_csv(path)
