from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from ngcumulant.cumulants import CumulantSet, accumulate, convolve, falling, k_stat, var_k4
from ngcumulant.errors import InputError
from ngcumulant.models import (
    VARIANTS,
    DisplacedMixture,
    FockMixture,
    Gaussian,
    draw,
    exact_cumulants,
    mixture_closed_form_gap,
    model_from_dict,
    model_from_json,
    pdf,
    var_k4_mixture_closed_form,
    wigner_negative,
)

t = sp.Symbol("t")


def series_cumulants(cgf, order=8):
    ser = sp.series(cgf, t, 0, order + 1).removeO()
    return [sp.factorial(n) * ser.coeff(t, n) for n in range(1, order + 1)]


def fock_cdf(x, p, sigma0=1.0):
    u = np.asarray(x) / sigma0
    return stats.norm.cdf(u) - p * u * stats.norm.pdf(u)


# -- exact cumulants -------------------------------------------------------


def test_mixture_cumulants_literal():
    c = exact_cumulants(DisplacedMixture(alpha_m=1.0, sigma_m=0.0))
    assert c.provenance == "model-exact"
    assert c.kappa.tolist() == [0, 1, 0, -2, 0, 16, 0, -272]


def test_fock_cumulants_literal():
    c = exact_cumulants(FockMixture(p=1.0, sigma0=1.0))
    assert c.kappa.tolist() == [0, 3, 0, -12, 0, 240, 0, -10080]


def test_fock_p0_with_noise_is_gaussian():
    c = exact_cumulants(FockMixture(p=0.0, sigma0=1.0, readout_var=2.0))
    assert c[2] == 3.0
    assert not c.kappa[2:].any()


@given(
    st.floats(min_value=0, max_value=5),
    st.floats(min_value=0, max_value=5),
    st.floats(min_value=0, max_value=10),
)
def test_mixture_odd_zero_and_readout_only_kappa2(a, s, r):
    plain = DisplacedMixture(alpha_m=a, sigma_m=s).cumulants()
    noisy = DisplacedMixture(alpha_m=a, sigma_m=s, readout_var=r).cumulants()
    assert not plain.kappa[0::2].any()
    diff = noisy.kappa - plain.kappa
    assert diff[1] == pytest.approx(r)
    assert not np.delete(diff, 1).any()


@given(
    st.floats(min_value=0, max_value=1),
    st.floats(min_value=0.01, max_value=5),
    st.floats(min_value=0, max_value=10),
)
def test_fock_odd_zero_and_readout_only_kappa2(p, s, r):
    plain = FockMixture(p=p, sigma0=s).cumulants()
    noisy = FockMixture(p=p, sigma0=s, readout_var=r).cumulants()
    assert not plain.kappa[0::2].any()
    diff = noisy.kappa - plain.kappa
    assert diff[1] == pytest.approx(r)
    assert not np.delete(diff, 1).any()


@pytest.mark.parametrize("a, s", [(1, 0), (0.7, 1.3), (2, 0.5), (3, 1)])
def test_mixture_against_cgf_series(a, s):
    A, S = sp.Rational(a).limit_denominator(100), sp.Rational(s).limit_denominator(100)
    ref = series_cumulants(S**2 * t**2 / 2 + sp.log(sp.cosh(A * t)))
    got = DisplacedMixture(alpha_m=float(a), sigma_m=float(s)).cumulants().kappa
    np.testing.assert_allclose(got, [float(v) for v in ref], rtol=1e-13, atol=0)


@pytest.mark.parametrize("p, s", [(1, 1), (0.5, 1), (0.25, 2), (1 / 3, 0.5)])
def test_fock_against_cgf_series(p, s):
    # MGF of P_p: e^{s^2 t^2/2} (1 + p s^2 t^2)
    P, S = sp.Rational(p).limit_denominator(100), sp.Rational(s)
    ref = series_cumulants(S**2 * t**2 / 2 + sp.log(1 + P * S**2 * t**2))
    got = FockMixture(p=float(p), sigma0=float(s)).cumulants().kappa
    np.testing.assert_allclose(got, [float(v) for v in ref], rtol=1e-13, atol=0)


def test_gaussian_cumulants():
    c = Gaussian(mean=2.0, var=3.0, readout_var=1.0).cumulants()
    assert c.kappa.tolist() == [2, 4, 0, 0, 0, 0, 0, 0]


def test_unit_variance_and_scaled():
    for m in (DisplacedMixture(alpha_m=2, sigma_m=1), FockMixture(p=0.5, sigma0=3), Gaussian(var=7)):
        assert m.unit_variance().cumulants()[2] == pytest.approx(1.0)
        c = 1.7
        np.testing.assert_allclose(
            m.scaled(c).cumulants().kappa,
            m.cumulants().kappa * c ** np.arange(1, 9),
            rtol=1e-13,
        )


# -- convolve --------------------------------------------------------------


def test_convolve_identity_and_noise():
    c = DisplacedMixture(alpha_m=1.0).cumulants()
    assert convolve(c, CumulantSet.zeros()).kappa.tolist() == c.kappa.tolist()
    z = convolve(c, Gaussian(var=0.25).cumulants())
    assert z[2] == 1.25
    assert z[4] == -2
    g = convolve(Gaussian(var=1).cumulants(), Gaussian(mean=1, var=2).cumulants())
    assert g.kappa.tolist() == [1, 3, 0, 0, 0, 0, 0, 0]


@given(*[st.lists(st.floats(-100, 100), min_size=8, max_size=8)] * 3)
def test_convolve_commutative_associative(a, b, c):
    A, B, C = CumulantSet(a), CumulantSet(b), CumulantSet(c)
    assert convolve(A, B).kappa.tolist() == convolve(B, A).kappa.tolist()
    np.testing.assert_allclose(
        convolve(convolve(A, B), C).kappa, convolve(A, convolve(B, C)).kappa, atol=1e-12
    )


# -- pdf ---------------------------------------------------------------------


def test_pdf_point_values():
    assert pdf(FockMixture(p=1.0), 0.0) == 0.0
    assert pdf(FockMixture(p=0.0), 0.0) == pytest.approx(0.3989422804014327, rel=1e-15)
    m = DisplacedMixture(alpha_m=2.0, sigma_m=1.0)
    assert m.pdf(2.0) == m.pdf(-2.0)


@pytest.mark.parametrize(
    "model",
    [
        FockMixture(p=0.0),
        FockMixture(p=0.5, sigma0=1.5),
        FockMixture(p=1.0, sigma0=0.5),
        DisplacedMixture(alpha_m=2.0, sigma_m=1.0),
        DisplacedMixture(alpha_m=0.3, sigma_m=0.2),
        Gaussian(mean=1.0, var=2.0, readout_var=0.5),
    ],
    ids=repr,
)
def test_pdf_normalized_and_second_moment(model):
    norm = quad(model.pdf, -np.inf, np.inf, epsabs=1e-12)[0]
    assert norm == pytest.approx(1.0, abs=1e-6)
    c = model.cumulants()
    m2 = quad(lambda x: x * x * model.pdf(x), -np.inf, np.inf, epsabs=1e-12)[0]
    assert m2 == pytest.approx(c[2] + c[1] ** 2, rel=1e-6)


def test_pdf_with_noise_unsupported():
    with pytest.raises(InputError, match="readout"):
        FockMixture(p=0.5, readout_var=1.0).pdf(0.0)
    with pytest.raises(InputError):
        DisplacedMixture(alpha_m=1.0, sigma_m=0.0).pdf(0.0)


def test_pdf_nonnegative():
    x = np.linspace(-10, 10, 2001)
    for p in (0, 0.3, 1):
        assert (FockMixture(p=p).pdf(x) >= 0).all()


# -- draw --------------------------------------------------------------------


def test_draw_lln_gaussian():
    x = draw(Gaussian(), 1_000_000, seed=1)
    assert k_stat(accumulate(x), 2) == pytest.approx(1.0, rel=0.01)


def test_draw_fock_k4():
    x = draw(FockMixture(p=0.5), 1_000_000, seed=2)
    assert k_stat(accumulate(x), 4) == pytest.approx(-3.0, rel=0.05)


def test_draw_empty_and_deterministic():
    for cls in VARIANTS.values():
        assert cls().draw(0, seed=0).size == 0
        np.testing.assert_array_equal(cls().draw(50, seed=9), cls().draw(50, seed=9))
    assert FockMixture().draw((3, 4), seed=0).shape == (3, 4)


@pytest.mark.parametrize("p", [0.0, 0.5, 1.0])
def test_fock_sampler_goodness_of_fit(p):
    x = FockMixture(p=p, sigma0=1.3).draw(200_000, seed=40)
    assert stats.kstest(x, lambda v: fock_cdf(v, p, 1.3)).pvalue > 1e-3


def test_mixture_sampler_goodness_of_fit():
    m = DisplacedMixture(alpha_m=1.5, sigma_m=0.7)
    x = m.draw(200_000, seed=41)
    cdf = lambda v: 0.5 * (stats.norm.cdf(v, 1.5, 0.7) + stats.norm.cdf(v, -1.5, 0.7))  # noqa: E731
    assert stats.kstest(x, cdf).pvalue > 1e-3


@pytest.mark.parametrize("model", [FockMixture(p=0.7), DisplacedMixture(alpha_m=1.0, sigma_m=0.5)], ids=repr)
def test_noisy_draw_matches_noiseless_plus_gaussian(model):
    noisy = model.with_readout(0.8).draw(100_000, seed=50)
    clean = model.draw(100_000, seed=51) + np.sqrt(0.8) * np.random.default_rng(52).standard_normal(100_000)
    assert stats.ks_2samp(noisy, clean).pvalue > 1e-3


# -- serialization -----------------------------------------------------------


def test_json_round_trip():
    for m in (Gaussian(mean=1, var=2), DisplacedMixture(alpha_m=3, sigma_m=1, readout_var=0.5), FockMixture(p=0.25)):
        assert model_from_json(m.to_json()) == m
        assert model_from_dict(m.to_dict()) == m


def test_json_errors():
    with pytest.raises(InputError, match="variant"):
        model_from_dict({"variant": "cauchy"})
    with pytest.raises(InputError, match="unknown parameters"):
        model_from_dict({"variant": "gaussian", "params": {"sd": 1}})
    with pytest.raises(InputError):
        model_from_json("{not json")
    with pytest.raises(InputError):
        model_from_dict({"variant": "fock_mixture", "params": {"p": 2}})


def test_parameter_validation():
    with pytest.raises(InputError):
        Gaussian(var=-1)
    with pytest.raises(InputError):
        DisplacedMixture(alpha_m=-1)
    with pytest.raises(InputError):
        FockMixture(sigma0=0)
    with pytest.raises(InputError):
        Gaussian(readout_var=-0.1)


# -- closed-form var(k4) audit -------------------------------------------------


def test_closed_form_gaussian_limit():
    for n in (4, 20, 1000):
        expected = 24 * n**2 * (n + 1) * 1.5**8 / falling(n, 3)
        assert var_k4_mixture_closed_form(0.0, 1.5, n) == pytest.approx(expected, rel=1e-14)
        assert var_k4_mixture_closed_form(0.0, 1.5, n) == pytest.approx(
            var_k4(Gaussian(var=1.5**2).cumulants(), n), rel=1e-14
        )


def test_closed_form_literal_arithmetic():
    n = 1000
    exact = (
        Fraction(136 * n, n * (n - 1))
        - Fraction(144 * n * n, n * (n - 1) * (n - 2))
        + Fraction(24 * n * n * (n + 1), n * (n - 1) * (n - 2) * (n - 3))
    )
    assert var_k4_mixture_closed_form(1.0, 0.0, n) == pytest.approx(float(exact), rel=1e-14)


def test_closed_form_gap_symbolic():
    a, s, n = sp.symbols("a s n", positive=True)
    k2, k4, k6, k8 = a**2 + s**2, -2 * a**4, 16 * a**6, -272 * a**8
    f1, f2, f3 = n * (n - 1), n * (n - 1) * (n - 2), n * (n - 1) * (n - 2) * (n - 3)
    general = (
        k8 / n
        + 2 * n * (8 * k6 * k2 + 17 * k4**2) / f1
        + 72 * n**2 * k4 * k2**2 / f2
        + 24 * n**2 * (n + 1) * k2**4 / f3
    )
    closed = 136 * n * a**8 / f1 - 144 * n**2 * a**4 * k2**2 / f2 + 24 * n**2 * (n + 1) * k2**4 / f3
    omitted = k8 / n + 16 * k6 * k2 * n / f1
    assert sp.simplify(general - closed - omitted) == 0


def test_closed_form_gap_numeric():
    for a, s, n in [(1, 1, 1000), (1, 0, 20), (2, 0.5, 100)]:
        full = var_k4(DisplacedMixture(alpha_m=a, sigma_m=s).cumulants(), n)
        diff = full - var_k4_mixture_closed_form(a, s, n)
        assert diff == pytest.approx(mixture_closed_form_gap(a, s, n), rel=1e-9)


def test_closed_form_rejects_small_n():
    with pytest.raises(InputError):
        var_k4_mixture_closed_form(1.0, 1.0, 3)


# -- Wigner flag ---------------------------------------------------------------


def test_wigner_flag():
    assert wigner_negative(0.5) is False
    assert wigner_negative(0.51) is True
    assert wigner_negative(0) is False
    for bad in (-0.1, 1.1):
        with pytest.raises(InputError):
            wigner_negative(bad)
