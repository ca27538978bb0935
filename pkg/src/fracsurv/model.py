"""The fractional survival distribution on ``[0, T]``.

The mortality function (CDF) is

    F(t) = (t/T)^lam * M(alpha, lam+1, -mu t) / M(alpha, lam+1, -mu T)

with ``M`` the confluent hypergeometric function 1F1. Its density is

    f(t) = (lam/T) (t/T)^(lam-1) * M(alpha, lam, -mu t) / M(alpha, lam+1, -mu T).

Everything is evaluated as signed logarithms of ``M`` (see
:func:`fracsurv.chf.log_chf_signed`), so parameter sets with ``mu * T`` in
the hundreds are handled without overflow. All functions accept a scalar or
an array of times and return the same kind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from fracsurv.chf import DEFAULT_CONFIG, SeriesConfig, log_chf_signed
from fracsurv.errors import DomainError, FracSurvError, InvalidParamsError, NoConvergenceError

SHAPE_LABELS = (
    "increasing",
    "decreasing",
    "bathtub",
    "increasing-decreasing-increasing",
    "increasing-constant-increasing",
)


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(alpha, lam, mu, t_max)`` of the distribution.

    ``alpha`` is the first 1F1 argument, ``lam`` the fractional order, ``mu``
    a rate that may take either sign, and ``t_max`` the largest possible
    survival time.
    """

    alpha: float
    lam: float
    mu: float
    t_max: float

    def __post_init__(self):
        for name in ("alpha", "lam", "mu", "t_max"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParamsError(f"{name} must be finite")
        if not self.t_max > 0:
            raise InvalidParamsError(f"t_max must be positive, got {self.t_max}")
        if self.lam <= 0 and self.lam == math.floor(self.lam):
            raise InvalidParamsError(f"lam must not be zero or a negative integer, got {self.lam}")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.lam, self.mu, self.t_max])

    @classmethod
    def from_sequence(cls, values) -> "ModelParams":
        alpha, lam, mu, t_max = (float(v) for v in values)
        return cls(alpha, lam, mu, t_max)


def _chf(a, b, z):
    # the series needs about |z| terms before it turns over; T in the millions is legitimate
    z = np.asarray(z, dtype=float)
    need = int(2.0 * (float(np.max(np.abs(z), initial=0.0)) + abs(a) + abs(b))) + 1000
    cfg = DEFAULT_CONFIG if need <= DEFAULT_CONFIG.max_terms else SeriesConfig(max_terms=need)
    return log_chf_signed(a, b, z, cfg)


@lru_cache(maxsize=512)
def _log_norm_cached(alpha, lam, mu, t_max):
    la, sg = _chf(alpha, lam + 1.0, -mu * t_max)
    if sg == 0:
        raise InvalidParamsError("normalizing constant 1F1(alpha; lam+1; -mu T) vanishes")
    return float(la), float(sg)


def _log_norm(p: ModelParams):
    return _log_norm_cached(p.alpha, p.lam, p.mu, p.t_max)


def _times(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _ret(x, scalar):
    return float(x) if scalar else x


def _check_closed(p: ModelParams, t: np.ndarray):
    if np.any(~np.isfinite(t)) or np.any(t < 0) or np.any(t > p.t_max):
        raise DomainError(f"t must lie in [0, {p.t_max}]")


def log_cdf_signed(p: ModelParams, t):
    """``(log|F(t)|, sign F(t))`` for ``0 < t <= T`` (array-valued)."""
    t = np.asarray(t, dtype=float)
    log_norm, sg_norm = _log_norm(p)
    la, sg = _chf(p.alpha, p.lam + 1.0, -p.mu * t)
    return p.lam * np.log(t / p.t_max) + la - log_norm, sg * sg_norm


def log_pdf_signed(p: ModelParams, t):
    """``(log|f(t)|, sign f(t))`` for ``0 < t <= T`` (array-valued)."""
    t = np.asarray(t, dtype=float)
    log_norm, sg_norm = _log_norm(p)
    la, sg = _chf(p.alpha, p.lam, -p.mu * t)
    log_pre = math.log(abs(p.lam) / p.t_max) + (p.lam - 1.0) * np.log(t / p.t_max)
    return log_pre + la - log_norm, sg * sg_norm * math.copysign(1.0, p.lam)


def cdf(p: ModelParams, t):
    """Mortality function F(t) on ``[0, T]``."""
    t, scalar = _times(t)
    _check_closed(p, t)
    out = np.zeros(t.shape)
    pos = t > 0
    if not np.all(pos) and p.lam < 0:
        raise DomainError("F(0) diverges when lam < 0")
    if pos.any():
        la, sg = log_cdf_signed(p, t[pos])
        with np.errstate(over="ignore"):
            out[pos] = sg * np.exp(la)
    return _ret(out, scalar)


def cdf_kummer(p: ModelParams, t):
    """F(t) from the Kummer-transformed form with positive third argument ``mu t``.

    Mathematically identical to :func:`cdf`; kept as an independent
    evaluation for cross-checking.
    """
    t, scalar = _times(t)
    _check_closed(p, t)
    out = np.zeros(t.shape)
    pos = t > 0
    if not np.all(pos) and p.lam < 0:
        raise DomainError("F(0) diverges when lam < 0")
    if pos.any():
        tp = t[pos]
        a = p.lam + 1.0 - p.alpha
        la_t, sg_t = _chf(a, p.lam + 1.0, p.mu * tp)
        la_T, sg_T = _chf(a, p.lam + 1.0, p.mu * p.t_max)
        if sg_T == 0:
            raise InvalidParamsError("normalizing constant vanishes")
        log_f = p.mu * (p.t_max - tp) + p.lam * np.log(tp / p.t_max) + la_t - la_T
        with np.errstate(over="ignore"):
            out[pos] = sg_t * sg_T * np.exp(log_f)
    return _ret(out, scalar)


def _pdf_at_zero(p: ModelParams) -> float:
    if p.lam > 1:
        return 0.0
    if p.lam == 1:
        log_norm, sg = _log_norm(p)
        return sg / p.t_max * math.exp(-log_norm)
    raise DomainError("the density diverges at t = 0 when lam < 1")


def pdf(p: ModelParams, t):
    """Density f(t) on ``[0, T]``; ``t = 0`` is only allowed when ``lam >= 1``."""
    t, scalar = _times(t)
    _check_closed(p, t)
    out = np.empty(t.shape)
    pos = t > 0
    if not np.all(pos):
        out[~pos] = _pdf_at_zero(p)
    if pos.any():
        la, sg = log_pdf_signed(p, t[pos])
        with np.errstate(over="ignore"):
            out[pos] = sg * np.exp(la)
    return _ret(out, scalar)


def pdf_kummer(p: ModelParams, t):
    """Density from the Kummer-transformed form; cross-check for :func:`pdf`."""
    t, scalar = _times(t)
    _check_closed(p, t)
    out = np.empty(t.shape)
    pos = t > 0
    if not np.all(pos):
        out[~pos] = _pdf_at_zero(p)
    if pos.any():
        tp = t[pos]
        la_t, sg_t = _chf(p.lam - p.alpha, p.lam, p.mu * tp)
        la_T, sg_T = _chf(p.lam + 1.0 - p.alpha, p.lam + 1.0, p.mu * p.t_max)
        log_f = (
            p.mu * (p.t_max - tp)
            + math.log(abs(p.lam) / p.t_max)
            + (p.lam - 1.0) * np.log(tp / p.t_max)
            + la_t
            - la_T
        )
        with np.errstate(over="ignore"):
            out[pos] = sg_t * sg_T * math.copysign(1.0, p.lam) * np.exp(log_f)
    return _ret(out, scalar)


def survival(p: ModelParams, t):
    """S(t) = 1 - F(t)."""
    t, scalar = _times(t)
    return _ret(1.0 - cdf(p, t), scalar)


def hazard(p: ModelParams, t):
    """Hazard f(t) / S(t) for ``0 <= t < T`` (``t = 0`` needs ``lam >= 1``)."""
    t, scalar = _times(t)
    if np.any(t >= p.t_max):
        raise DomainError("the hazard diverges at t = T")
    return _ret(pdf(p, t) / survival(p, t), scalar)


def cumulative_hazard(p: ModelParams, t):
    """H(t) = -ln S(t) for ``0 <= t < T``."""
    t, scalar = _times(t)
    if np.any(t >= p.t_max):
        raise DomainError("the cumulative hazard diverges at t = T")
    return _ret(-np.log1p(-cdf(p, t)), scalar)


def quantile(p: ModelParams, prob, tol: float = 1e-10, max_iter: int = 400):
    """Inverse of :func:`cdf` by bisection.

    Bisection runs on ``log(t/T)`` so the steep rise of F near zero for small
    ``lam`` is resolved. Probabilities below F at the smallest bracket
    (``t = 1e-300 T``) map to 0, which is the closest representable answer.
    """
    q, scalar = _times(prob)
    if np.any(~np.isfinite(q)) or np.any(q < 0) or np.any(q > 1):
        raise DomainError("prob must lie in [0, 1]")
    q = q.ravel()
    out = np.empty(q.size)
    out[q == 0] = 0.0
    out[q == 1] = p.t_max
    work = np.flatnonzero((q > 0) & (q < 1))
    if work.size:
        lo_v = math.log(1e-300)
        f_lo = cdf(p, p.t_max * math.exp(lo_v))
        below = q[work] <= f_lo
        out[work[below]] = 0.0
        work = work[~below]
    if work.size:
        lo = np.full(work.size, lo_v)
        hi = np.zeros(work.size)
        target = q[work]
        result = np.full(work.size, np.nan)
        pending = np.arange(work.size)
        for _ in range(max_iter):
            mid = 0.5 * (lo[pending] + hi[pending])
            # no float strictly inside the bracket: the cdf jumps across the target
            stuck = (mid <= lo[pending]) | (mid >= hi[pending])
            tm = p.t_max * np.exp(mid)
            fm = cdf(p, tm)
            err = fm - target[pending]
            hit = np.abs(err) <= tol
            result[pending[hit]] = tm[hit]
            up = err < 0
            lo[pending[up]] = mid[up]
            hi[pending[~up]] = mid[~up]
            if np.any(stuck & ~hit):
                raise NoConvergenceError(
                    "quantile bracket collapsed without matching the target; "
                    "the cdf is not monotone for these parameters"
                )
            pending = pending[~hit]
            if pending.size == 0:
                break
        else:
            raise NoConvergenceError(f"quantile bisection exceeded {max_iter} iterations")
        out[work] = result
    return _ret(out.reshape(np.shape(prob)), scalar)


@dataclass(frozen=True)
class Validity:
    """Outcome of :func:`is_valid_density`; truthy when the density is valid."""

    valid: bool
    first_violation: float | None = None
    reason: str = ""

    def __bool__(self):
        return self.valid


def is_valid_density(p: ModelParams, grid_size: int = 512) -> Validity:
    """Check ``f >= 0`` and a non-decreasing F on ``t_i = i T / grid_size``."""
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    t = p.t_max * np.arange(1, grid_size) / grid_size
    f = pdf(p, t)
    neg = np.flatnonzero(~(f >= -1e-12))
    if neg.size:
        return Validity(False, float(t[neg[0]]), "negative density")
    F = cdf(p, t)
    drops = np.flatnonzero(np.diff(F) < 0)
    if drops.size:
        return Validity(False, float(t[drops[0] + 1]), "decreasing cdf")
    if np.any(F < 0) or np.any(F > 1):
        bad = np.flatnonzero((F < 0) | (F > 1))[0]
        return Validity(False, float(t[bad]), "cdf outside [0, 1]")
    return Validity(True)


def slope_pattern(times, values, rel_tol: float = 0.05) -> list[str]:
    """Run-length encoded slope signs (``+``, ``-``, ``0``) of a sampled curve.

    A slope is flat when its magnitude is at most ``rel_tol`` times the
    steepest slope on *both* sides of it, so a plateau must sit between two
    steeper stretches; a curve whose slope keeps growing has no flat part.
    Flat runs between runs of opposite sign are the rounded top or bottom
    of an extremum and are merged away.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    slope = np.diff(v) / np.diff(t)
    mag = np.abs(slope)
    before = np.concatenate(([0.0], np.maximum.accumulate(mag)[:-1]))
    after = np.concatenate((np.maximum.accumulate(mag[::-1])[::-1][1:], [0.0]))
    flat = mag <= rel_tol * np.minimum(before, after)
    signs = np.where(flat, "0", np.where(slope > 0, "+", "-"))

    runs = [str(signs[0])]
    for sg in signs[1:]:
        if sg != runs[-1]:
            runs.append(str(sg))
    kept = [
        r for i, r in enumerate(runs)
        if not (r == "0" and 0 < i < len(runs) - 1 and runs[i - 1] != runs[i + 1])
    ]
    merged = [kept[0]]
    for r in kept[1:]:
        if r != merged[-1]:
            merged.append(r)
    return merged


_PATTERNS = {
    ("+",): "increasing",
    ("-",): "decreasing",
    ("-", "+"): "bathtub",
    ("-", "0", "+"): "bathtub",
    ("+", "-", "+"): "increasing-decreasing-increasing",
    ("+", "0", "+"): "increasing-constant-increasing",
}


def label_pattern(runs) -> str:
    runs = tuple(runs)
    return _PATTERNS.get(runs, f"other({','.join(runs)})")


def hazard_slope_pattern(p: ModelParams, grid_size: int = 400, rel_tol: float = 0.05,
                         margin: float = 1e-3) -> list[str]:
    """Slope pattern of the hazard on ``grid_size`` points over ``[margin T, (1 - margin) T]``."""
    if grid_size < 16:
        raise DomainError("grid_size must be at least 16")
    t = np.linspace(p.t_max * margin, p.t_max * (1.0 - margin), grid_size)
    return slope_pattern(t, hazard(p, t), rel_tol)


def classify_hazard_shape(p: ModelParams, grid_size: int = 400, rel_tol: float = 0.05,
                          margin: float = 1e-3) -> str:
    """Label the hazard's shape: one of :data:`SHAPE_LABELS` or ``other(<signs>)``."""
    return label_pattern(hazard_slope_pattern(p, grid_size, rel_tol, margin))


def _density_ratio(p: ModelParams, t):
    # f(t) divided by its power-law prefactor (lam/T)(t/T)^(lam-1)
    log_norm, sg_norm = _log_norm(p)
    la, sg = _chf(p.alpha, p.lam, -p.mu * np.asarray(t, dtype=float))
    return sg * sg_norm * np.exp(la - log_norm)


def numeric_moment(p: ModelParams, k: int) -> float:
    """k-th raw moment by adaptive quadrature over the support ``[0, T]``.

    Substituting ``u = (t/T)^lam`` removes the power-law endpoint behaviour:
    the moment becomes ``int_0^1 t(u)^k R(t(u)) du`` with ``R`` bounded.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    if p.lam <= 0:
        raise DomainError("numeric_moment needs lam > 0")
    inv = 1.0 / p.lam

    def integrand(u):
        t = p.t_max * u**inv
        return t**k * float(_density_ratio(p, t))

    val, err = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-8 * p.t_max**k, epsrel=1e-10,
                              limit=200)
    if not err <= 1e-6 * p.t_max**k:
        raise NoConvergenceError(f"moment quadrature error estimate {err} too large")
    return float(val)


@dataclass
class CurveTable:
    """Gridded values of F, S, f, h and H; parallel arrays."""

    times: np.ndarray
    cdf: np.ndarray
    survival: np.ndarray
    pdf: np.ndarray
    hazard: np.ndarray
    cum_hazard: np.ndarray
    columns: tuple = field(default=("t", "cdf", "survival", "pdf", "hazard", "cum_hazard"),
                           repr=False)

    def rows(self):
        return zip(self.times, self.cdf, self.survival, self.pdf, self.hazard, self.cum_hazard)

    def __len__(self):
        return len(self.times)


def _curve_arrays(p, t):
    F = cdf(p, t)
    S = 1.0 - F
    f = np.empty(t.shape)
    zero = t == 0
    if zero.any():
        try:
            f[zero] = _pdf_at_zero(p)
        except DomainError:
            f[zero] = np.nan
    if (~zero).any():
        f[~zero] = pdf(p, t[~zero])
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(t < p.t_max, f / S, np.inf)
        H = np.where(t < p.t_max, -np.log1p(-F), np.inf)
    return F, S, f, h, H


def curve_table(p: ModelParams, times) -> CurveTable:
    """Evaluate every model function on ``times`` (strictly increasing, within ``[0, T]``).

    At ``t = T`` hazard and cumulative hazard are ``inf``; at ``t = 0`` with
    ``lam < 1`` the density and hazard are ``nan``.
    """
    t = np.asarray(times, dtype=float).ravel()
    if t.size and np.any(np.diff(t) <= 0):
        raise DomainError("times must be strictly increasing")
    _check_closed(p, t)
    try:
        F, S, f, h, H = _curve_arrays(p, t)
    except FracSurvError as exc:
        for ti in t:
            try:
                _curve_arrays(p, np.array([ti]))
            except FracSurvError:
                raise type(exc)(f"evaluation failed at t={ti}: {exc}") from exc
        raise
    return CurveTable(t, F, S, f, h, H)
