"""Fractional survival model: a 1F1-based distribution on [0, T] with a bathtub-capable hazard."""

__version__ = "0.1.0"

from fracsurv.chf import BACKEND, SeriesConfig, chf_1f1, chf_1f1_stable, ln_chf_1f1, ln_gamma
from fracsurv.estimation import (
    CensoredObservation,
    FitConfig,
    FitResult,
    fit,
    log_likelihood,
    standard_errors,
)
from fracsurv.model import (
    CurveTable,
    ModelParams,
    cdf,
    cdf_kummer,
    classify_hazard_shape,
    cumulative_hazard,
    curve_table,
    hazard,
    is_valid_density,
    numeric_moment,
    pdf,
    pdf_kummer,
    quantile,
    survival,
)
from fracsurv.nonparam import StepFunction, evaluate_step, na_survival, nelson_aalen
from fracsurv.simulate import (
    Administrative,
    CohortSpec,
    UniformCensoring,
    make_cohort,
    recovery_trial,
    sample,
)
