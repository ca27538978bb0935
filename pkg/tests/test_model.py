import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsurv import model
from fracsurv.errors import DomainError, InvalidParamsError
from fracsurv.model import (
    SHAPE_LABELS,
    ModelParams,
    cdf,
    cdf_kummer,
    classify_hazard_shape,
    cumulative_hazard,
    curve_table,
    hazard,
    is_valid_density,
    label_pattern,
    numeric_moment,
    pdf,
    pdf_kummer,
    quantile,
    slope_pattern,
    survival,
)
from oracles import (
    SHAPE_EXAMPLES,
    REFERENCE_SETS,
    fractional_integral,
    integrate_density,
    lower_gamma,
    mp_cdf,
    mp_cdf_difference,
    mp_pdf,
    trunc_exp,
)

EXP = ModelParams(1.0, 1.0, 1.0, 2.0)

# truncated exponential (mu=1, T=2) at t=1, frozen from oracles.trunc_exp
EXP_CDF = 0.7310585786300049
EXP_PDF = 0.4254590641196608
EXP_SURV = 0.2689414213699951
EXP_HAZ = 1.5819767068693264
EXP_CUMHAZ = 1.3132616875182228
# 1 - 2 e^-2 / (1 - e^-2)
EXP_MEAN = 0.6869647145006687


def interior(p, n=200):
    return np.linspace(0.0, p.t_max, n + 2)[1:-1]


def test_frozen_values_match_oracle():
    F, f = trunc_exp(1.0, 2.0, 1.0)
    assert F == pytest.approx(EXP_CDF, rel=1e-15)
    assert f == pytest.approx(EXP_PDF, rel=1e-15)
    assert 1 - F == pytest.approx(EXP_SURV, rel=1e-14)
    assert f / (1 - F) == pytest.approx(EXP_HAZ, rel=1e-14)
    assert -math.log(1 - F) == pytest.approx(EXP_CUMHAZ, rel=1e-14)
    assert 1 - 2 * math.exp(-2) / (1 - math.exp(-2)) == pytest.approx(EXP_MEAN, rel=1e-15)


class TestPointValues:
    def test_cdf(self, backend):
        assert cdf(EXP, 1.0) == pytest.approx(EXP_CDF, rel=1e-13)
        assert cdf_kummer(EXP, 1.0) == pytest.approx(EXP_CDF, rel=1e-13)

    def test_pdf(self, backend):
        assert pdf(EXP, 1.0) == pytest.approx(EXP_PDF, rel=1e-13)
        assert pdf_kummer(EXP, 1.0) == pytest.approx(EXP_PDF, rel=1e-13)

    def test_survival_hazard_cumhazard(self, backend):
        assert survival(EXP, 1.0) == pytest.approx(EXP_SURV, rel=1e-13)
        assert hazard(EXP, 1.0) == pytest.approx(EXP_HAZ, rel=1e-13)
        assert cumulative_hazard(EXP, 1.0) == pytest.approx(EXP_CUMHAZ, rel=1e-13)

    def test_quantile(self, backend):
        assert quantile(EXP, EXP_CDF) == pytest.approx(1.0, abs=1e-9)

    def test_power_density_limit(self):
        p = ModelParams(1.0, 2.0, 1e-12, 1.0)
        assert pdf(p, 0.5) == pytest.approx(1.0, rel=1e-10)

    def test_exponential_hazard_limit(self):
        assert hazard(ModelParams(1.0, 1.0, 1.0, 1e6), 1.0) == pytest.approx(1.0, abs=1e-4)

    def test_moment(self):
        assert numeric_moment(EXP, 1) == pytest.approx(EXP_MEAN, rel=1e-9)
        assert numeric_moment(ModelParams(1.0, 1.0, 1e-12, 2.0), 1) == pytest.approx(1.0, rel=1e-9)

    def test_second_moment(self):
        # E t^2 for the truncated exponential: 2 - e^-2 (T^2 + 2T + 2) / (1 - e^-2), mu = 1
        ref = (2 - math.exp(-2) * (4 + 4 + 2)) / (1 - math.exp(-2))
        assert numeric_moment(EXP, 2) == pytest.approx(ref, rel=1e-9)


class TestEndpoints:
    @pytest.mark.parametrize("name", list(REFERENCE_SETS))
    def test_cdf_endpoints(self, name):
        p = ModelParams(*REFERENCE_SETS[name])
        assert cdf(p, 0.0) == 0.0
        assert cdf(p, p.t_max) == pytest.approx(1.0, rel=1e-13)
        assert cdf_kummer(p, 0.0) == 0.0
        assert cdf_kummer(p, p.t_max) == pytest.approx(1.0, rel=1e-13)
        assert survival(p, 0.0) == 1.0
        assert survival(p, p.t_max) == pytest.approx(0.0, abs=1e-13)
        assert cumulative_hazard(p, 0.0) == 0.0

    def test_quantile_endpoints(self):
        p = ModelParams(*REFERENCE_SETS["negative_mu"])
        assert quantile(p, 0.0) == 0.0
        assert quantile(p, 1.0) == p.t_max

    def test_pdf_at_zero(self):
        assert pdf(ModelParams(3.0, 3.0, 1.5, 20.0), 0.0) == 0.0
        f0 = pdf(EXP, 0.0)
        assert f0 == pytest.approx(1 / (1 - math.exp(-2)), rel=1e-13)
        with pytest.raises(DomainError):
            pdf(ModelParams(*REFERENCE_SETS["negative_mu"]), 0.0)


class TestErrors:
    @pytest.mark.parametrize("t", [-0.1, 2.1, math.nan])
    def test_outside_support(self, t):
        with pytest.raises(DomainError):
            cdf(EXP, t)
        with pytest.raises(DomainError):
            pdf(EXP, t)

    def test_hazard_at_T(self):
        with pytest.raises(DomainError):
            hazard(EXP, 2.0)
        with pytest.raises(DomainError):
            cumulative_hazard(EXP, 2.0)

    def test_hazard_at_zero_small_lam(self):
        with pytest.raises(DomainError):
            hazard(ModelParams(*REFERENCE_SETS["gamma_bathtub"]), 0.0)

    @pytest.mark.parametrize("args", [(1, 1, 1, -1), (1, 1, 1, 0), (1, 0, 1, 2), (1, -3, 1, 2),
                                      (math.inf, 1, 1, 2)])
    def test_invalid_params(self, args):
        with pytest.raises(InvalidParamsError):
            ModelParams(*args)

    def test_vanishing_normalizer(self):
        # M(-1; 2; z) = 1 - z/2 is zero at z = -mu T = 2
        with pytest.raises(InvalidParamsError):
            cdf(ModelParams(-1.0, 1.0, -1.0, 2.0), 1.0)

    def test_quantile_domain(self):
        with pytest.raises(DomainError):
            quantile(EXP, 1.5)
        with pytest.raises(DomainError):
            quantile(EXP, -0.1)

    def test_non_integer_negative_lam_allowed(self):
        ModelParams(1.0, -0.5, 1.0, 2.0)


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_forms_agree(backend, name):
    p = ModelParams(*REFERENCE_SETS[name])
    t = interior(p)
    np.testing.assert_allclose(cdf_kummer(p, t), cdf(p, t), rtol=1e-8)
    np.testing.assert_allclose(pdf_kummer(p, t), pdf(p, t), rtol=1e-8)


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_against_mpmath(name):
    v = REFERENCE_SETS[name]
    p = ModelParams(*v)
    for t in interior(p, 15):
        assert cdf(p, t) == pytest.approx(mp_cdf(v, t), rel=1e-9)
        assert pdf(p, t) == pytest.approx(mp_pdf(v, t), rel=1e-9)


@pytest.mark.parametrize("mu,T", [(1.0, 2.0), (0.162, 1859.301), (1.483, 94.512), (1e-3, 5.0)])
def test_truncated_exponential(backend, mu, T):
    p = ModelParams(1.0, 1.0, mu, T)
    t = interior(p, 100)
    F, f = np.vectorize(lambda s: trunc_exp(mu, T, s))(t)
    np.testing.assert_allclose(cdf(p, t), F, rtol=1e-10)
    np.testing.assert_allclose(pdf(p, t), f, rtol=1e-10)


@pytest.mark.parametrize("lam,mu,T", [(0.302, -0.021, 225.265), (1.626, 0.162, 1859.301),
                                      (2.5, 1.0, 3.0), (0.7, 0.4, 10.0)])
def test_fractional_integral(lam, mu, T):
    p = ModelParams(1.0, lam, mu, T)
    NT = fractional_integral(lam, mu, T)
    for t in interior(p, 12):
        assert cdf(p, t) == pytest.approx(fractional_integral(lam, mu, t) / NT, rel=1e-6)


@pytest.mark.parametrize("lam,mu,T", [(3.0, 1.5, 20.0), (0.5, 0.7, 20.0), (34.0, 1.483, 94.512),
                                      (1.7, 0.3, 5.0)])
def test_truncated_gamma(lam, mu, T):
    p = ModelParams(lam, lam, mu, T)
    gT = lower_gamma(lam, mu * T)
    for t in interior(p, 12):
        assert cdf(p, t) == pytest.approx(lower_gamma(lam, mu * t) / gT, rel=1e-8)


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_normalization(name):
    p = ModelParams(*REFERENCE_SETS[name])
    total = integrate_density(lambda t: float(pdf(p, t)), p.lam, p.t_max)
    assert total == pytest.approx(1.0, abs=1e-6)


def fd_check(p, t):
    """Relative error of pdf against a centred difference of the cdf, h = T 1e-6.

    Where the double-precision quotient's rounding floor (~eps / h) is above
    1e-7 |f| the difference is taken on the multiprecision cdf instead.
    """
    h = p.t_max * 1e-6
    f = pdf(p, t)
    fd = (cdf(p, t + h) - cdf(p, t - h)) / (2 * h)
    floor = 4 * np.finfo(float).eps / (2 * h)
    v = tuple(p.as_array())
    for i in np.flatnonzero(floor > 1e-7 * np.abs(f)):
        fd[i] = mp_cdf_difference(v, t[i], h, f[i])
    return np.abs(fd - f) / np.abs(f)


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_pdf_is_cdf_derivative(name):
    p = ModelParams(*REFERENCE_SETS[name])
    assert fd_check(p, interior(p)).max() <= 1e-5


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_quantile_round_trip(backend, name):
    p = ModelParams(*REFERENCE_SETS[name])
    q = np.array([0.01, 0.1, 0.5, 0.9, 0.99])
    np.testing.assert_allclose(cdf(p, quantile(p, q)), q, atol=1e-9, rtol=0)


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_hazard_identity(name):
    p = ModelParams(*REFERENCE_SETS[name])
    t = interior(p)
    np.testing.assert_allclose(hazard(p, t) * survival(p, t), pdf(p, t), rtol=1e-12)


@pytest.mark.parametrize("name", list(REFERENCE_SETS))
def test_cumulative_hazard_monotone(name):
    p = ModelParams(*REFERENCE_SETS[name])
    assert np.all(np.diff(cumulative_hazard(p, interior(p))) >= 0)


@settings(max_examples=50, deadline=None)
@given(q=st.lists(st.floats(1e-6, 1 - 1e-6), min_size=2, max_size=20),
       name=st.sampled_from(sorted(REFERENCE_SETS)))
def test_quantile_is_monotone_inverse(q, name):
    p = ModelParams(*REFERENCE_SETS[name])
    q = np.sort(np.array(q))
    x = quantile(p, q)
    assert np.all(np.diff(x) >= 0)
    assert np.all((x >= 0) & (x <= p.t_max))
    # below F at the smallest positive bracket point no float t exists; 0 is returned
    floor = cdf(p, 1e-300 * p.t_max)
    assert np.all(x[q <= floor] == 0)
    np.testing.assert_allclose(cdf(p, x[q > floor]), q[q > floor], atol=1e-10, rtol=0)


@settings(max_examples=40, deadline=None)
@given(mu=st.floats(0.01, 5), T=st.floats(0.1, 50), u=st.floats(0.001, 0.999))
def test_exponential_family_property(mu, T, u):
    p = ModelParams(1.0, 1.0, mu, T)
    F, f = trunc_exp(mu, T, u * T)
    assert cdf(p, u * T) == pytest.approx(F, rel=1e-10)
    assert pdf(p, u * T) == pytest.approx(f, rel=1e-10)


class TestShapes:
    @pytest.mark.parametrize("name", list(SHAPE_EXAMPLES))
    def test_shape_examples(self, name):
        assert classify_hazard_shape(ModelParams(*REFERENCE_SETS[name])) == SHAPE_EXAMPLES[name]

    @pytest.mark.parametrize("name", list(SHAPE_EXAMPLES))
    @pytest.mark.parametrize("grid,rel_tol", [(16, 0.05), (100, 0.02), (1000, 0.2), (400, 0.1)])
    def test_robust_to_knobs(self, name, grid, rel_tol):
        p = ModelParams(*REFERENCE_SETS[name])
        assert classify_hazard_shape(p, grid_size=grid, rel_tol=rel_tol) == SHAPE_EXAMPLES[name]

    def test_case_studies(self):
        assert classify_hazard_shape(ModelParams(*REFERENCE_SETS["sharp_onset"])) == (
            "increasing-decreasing-increasing")
        assert classify_hazard_shape(ModelParams(*REFERENCE_SETS["negative_mu"])) == "bathtub"

    def test_bathtub_points(self):
        p = ModelParams(*REFERENCE_SETS["gamma_bathtub"])
        assert hazard(p, 10.0) < hazard(p, 0.01)
        assert hazard(p, 10.0) < hazard(p, 19.9)

    def test_grid_too_small(self):
        with pytest.raises(DomainError):
            classify_hazard_shape(EXP, grid_size=8)

    @pytest.mark.parametrize("values,label", [
        ([0, 1, 2, 3], "increasing"),
        ([3, 2, 1, 0], "decreasing"),
        ([3, 1, 0, 1, 3], "bathtub"),
        ([9, 3, 1, 1, 1, 1, 3, 9], "bathtub"),
        ([0, 2, 3, 2, 3, 5], "increasing-decreasing-increasing"),
        ([0, 5, 6, 6, 6, 6, 7, 12], "increasing-constant-increasing"),
        ([0, 1, 0], "other(+,-)"),
    ])
    def test_label_table(self, values, label):
        runs = slope_pattern(np.arange(len(values), dtype=float), np.array(values, dtype=float))
        assert label_pattern(runs) == label

    def test_labels_known(self):
        for name in SHAPE_EXAMPLES:
            assert SHAPE_EXAMPLES[name] in SHAPE_LABELS


class TestValidity:
    @pytest.mark.parametrize("name", list(REFERENCE_SETS))
    def test_reference_sets_valid(self, name):
        assert is_valid_density(ModelParams(*REFERENCE_SETS[name]))

    def test_exponential_valid(self):
        v = is_valid_density(EXP)
        assert v.valid and v.first_violation is None

    def test_invalid_reports_location(self):
        # alpha=1 with a tiny lam and mu>0 makes the density go negative
        v = is_valid_density(ModelParams(1.0, 0.01, 0.7, 20.0))
        assert not v
        assert 0 < v.first_violation < 20.0
        assert v.reason

    def test_grid_size(self):
        with pytest.raises(DomainError):
            is_valid_density(EXP, grid_size=1)


class TestMoments:
    @pytest.mark.parametrize("name", list(REFERENCE_SETS))
    def test_mean_inside_support(self, name):
        p = ModelParams(*REFERENCE_SETS[name])
        m = numeric_moment(p, 1)
        assert 0 < m < p.t_max

    def test_bad_order(self):
        with pytest.raises(DomainError):
            numeric_moment(EXP, 0)


class TestCurveTable:
    def test_single_zero_row(self):
        tb = curve_table(EXP, [0.0])
        assert len(tb) == 1
        row = next(iter(tb.rows()))
        assert row[:3] == (0.0, 0.0, 1.0)
        assert row[3] == pytest.approx(1 / (1 - math.exp(-2)))
        assert row[5] == 0.0

    def test_zero_row_small_lam_is_flagged(self):
        tb = curve_table(ModelParams(*REFERENCE_SETS["negative_mu"]), [0.0, 1.0])
        assert math.isnan(tb.pdf[0]) and math.isnan(tb.hazard[0])
        assert tb.cdf[0] == 0.0

    @pytest.mark.parametrize("name", list(REFERENCE_SETS))
    def test_invariants(self, name):
        p = ModelParams(*REFERENCE_SETS[name])
        T = p.t_max
        tb = curve_table(p, [0.0, T / 2, T * (1 - 1e-9), T])
        assert np.all(np.diff(tb.cdf) >= 0)
        np.testing.assert_array_equal(tb.survival, 1 - tb.cdf)
        assert np.all(np.diff(tb.cum_hazard) >= 0)
        assert tb.hazard[-1] == math.inf

    def test_negative_mu_hazard_bathtub(self):
        tb = curve_table(ModelParams(*REFERENCE_SETS["negative_mu"]), np.arange(0.0, 221.0))
        assert label_pattern(slope_pattern(tb.times[1:], tb.hazard[1:])) == "bathtub"

    def test_not_increasing(self):
        with pytest.raises(DomainError):
            curve_table(EXP, [0.5, 0.5])

    def test_error_names_time(self, monkeypatch):
        def boom(p, t):
            if np.any(np.asarray(t) > 1.5):
                raise model.NoConvergenceError("boom")
            return np.zeros(np.shape(t))

        monkeypatch.setattr(model, "cdf", boom)
        with pytest.raises(model.NoConvergenceError, match="t=1.75"):
            curve_table(EXP, [0.5, 1.75])
