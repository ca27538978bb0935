"""Maximum-likelihood fitting to right-censored data.

The log-likelihood is ``sum(event * ln f(t) + (1 - event) * ln S(t))``.
:func:`fit` maximizes it with Nelder-Mead over an unconstrained
reparameterization that keeps ``lam > 0`` and ``T`` above the largest
observed time. :func:`standard_errors` inverts the observed information,
a central-difference Hessian taken in the original ``(alpha, lam, mu, T)``
coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from fracsurv.errors import DomainError, FracSurvError, InvalidParamsError, NoEventsError
from fracsurv.model import (
    ModelParams,
    _pdf_at_zero,
    is_valid_density,
    log_cdf_signed,
    log_pdf_signed,
)

PARAM_NAMES = ("alpha", "lam", "mu", "t_max")
# box on the log-transformed lam and T - t_obs coordinates; keeps T strictly above the data
_THETA_BOUND = 30.0


@dataclass(frozen=True)
class CensoredObservation:
    time: float
    event: bool

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time >= 0):
            raise DomainError(f"observation time must be finite and >= 0, got {self.time}")


def as_arrays(data) -> tuple[np.ndarray, np.ndarray]:
    """``(times, events)`` from a list of observations or an existing pair of arrays."""
    if isinstance(data, tuple) and len(data) == 2 and not isinstance(data[0], CensoredObservation):
        times = np.asarray(data[0], dtype=float)
        events = np.asarray(data[1], dtype=bool)
    else:
        times = np.array([o.time for o in data], dtype=float)
        events = np.array([bool(o.event) for o in data], dtype=bool)
    if times.shape != events.shape:
        raise DomainError("times and events differ in length")
    if np.any(~np.isfinite(times)) or np.any(times < 0):
        raise DomainError("observation times must be finite and >= 0")
    return times, events


def _log1mexp(x):
    # log(1 - e^x) for x < 0, accurate at both ends
    x = np.asarray(x, dtype=float)
    near = x > -math.log(2.0)
    out = np.empty_like(x)
    out[near] = np.log(-np.expm1(x[near]))
    out[~near] = np.log1p(-np.exp(x[~near]))
    return out


def log_likelihood(p: ModelParams, data) -> float:
    """Right-censored log-likelihood; ``-inf`` wherever an observation is infeasible."""
    times, events = as_arrays(data)
    if np.any(times > p.t_max):
        return -math.inf
    try:
        total = 0.0
        ev = times[events]
        if ev.size:
            at_zero = ev == 0
            if at_zero.any():
                f0 = _pdf_at_zero(p)
                if not f0 > 0:
                    return -math.inf
                total += at_zero.sum() * math.log(f0)
            lf, sf = log_pdf_signed(p, ev[~at_zero])
            if np.any(sf <= 0):
                return -math.inf
            total += float(lf.sum())
        ce = times[~events]
        ce = ce[ce > 0]
        if ce.size:
            lF, sF = log_cdf_signed(p, ce)
            if np.any(sF < 0) or np.any(lF >= 0):
                return -math.inf
            total += float(_log1mexp(lF).sum())
    except FracSurvError:
        return -math.inf
    return total if math.isfinite(total) else -math.inf


@dataclass
class FitConfig:
    """Optimizer settings.

    All starts, including the first, are the default (or ``initial``) point
    jittered multiplicatively by ``exp(N(0, jitter_sd))`` from ``seed``.
    """

    initial: ModelParams | None = None
    n_restarts: int = 2
    max_iter: int = 4000
    xtol: float = 1e-6
    ftol: float = 1e-6
    t_margin: float = 1.5
    seed: int = 0
    jitter_sd: float = 0.25
    validity_grid: int = 64

    def __post_init__(self):
        if self.xtol <= 0 or self.ftol <= 0 or self.max_iter < 1 or self.n_restarts < 0:
            raise DomainError("invalid FitConfig")
        if self.t_margin <= 1:
            raise DomainError("t_margin must exceed 1")


@dataclass
class StandardErrors:
    std_errors: np.ndarray
    hessian: np.ndarray
    available: bool


@dataclass
class FitResult:
    params: ModelParams
    std_errors: np.ndarray
    se_available: bool
    log_likelihood: float
    converged: bool
    n_iter: int
    n_events: int
    n_censored: int
    hessian: np.ndarray
    valid_density: bool = True
    trace: list = field(default_factory=list, repr=False)


def _to_params(theta, t_obs):
    with np.errstate(over="ignore"):
        return ModelParams(
            float(theta[0]),
            float(np.exp(theta[1])),
            float(theta[2]),
            float(t_obs * (1.0 + np.exp(theta[3]))),
        )


def _to_theta(p: ModelParams, t_obs):
    return np.array([p.alpha, math.log(p.lam), p.mu, math.log(p.t_max / t_obs - 1.0)])


def _grid_ok(p: ModelParams, grid: int) -> bool:
    t = p.t_max * np.arange(1, grid) / grid
    _, sg = log_pdf_signed(p, t)
    return bool(np.all(sg > 0))


def _objective(times, events, t_obs, grid):
    data = (times, events)

    def neg_ll(theta):
        if abs(theta[1]) > _THETA_BOUND or abs(theta[3]) > _THETA_BOUND:
            return math.inf
        with np.errstate(all="ignore"):
            try:
                p = _to_params(theta, t_obs)
                if not _grid_ok(p, grid):
                    return math.inf
            except FracSurvError:
                return math.inf
            return -log_likelihood(p, data)

    return neg_ll


def _simplex(x0):
    steps = np.array([0.5 * max(abs(x0[0]), 0.5), 0.5, 0.5 * max(abs(x0[2]), 0.1), 0.5])
    return np.vstack([x0] + [x0 + np.eye(4)[j] * steps[j] for j in range(4)])


def _run(fun, x0, cfg, trace, shrink=1.0):
    sim = _simplex(x0)
    sim = x0 + shrink * (sim - x0)

    def record(intermediate_result):
        trace.append(-float(intermediate_result.fun))

    # infeasible vertices are inf; scipy's spread test then computes inf - inf
    with np.errstate(invalid="ignore"):
        res = optimize.minimize(
            fun, x0, method="Nelder-Mead", callback=record,
            options=dict(initial_simplex=sim, xatol=cfg.xtol, fatol=cfg.ftol,
                         maxiter=cfg.max_iter, maxfev=4 * cfg.max_iter),
        )
    return res


def _default_initial(times, events, t_obs, cfg):
    if cfg.initial is not None and cfg.initial.t_max > t_obs and cfg.initial.lam > 0:
        return cfg.initial
    mean_event = float(times[events].mean())
    mu0 = 1.0 / mean_event if mean_event > 0 else 1.0 / t_obs
    return ModelParams(1.0, 1.0, mu0, cfg.t_margin * t_obs)


def fit(data, cfg: FitConfig | None = None) -> FitResult:
    """Maximum-likelihood estimate with observed-information standard errors."""
    cfg = cfg or FitConfig()
    times, events = as_arrays(data)
    if times.size == 0:
        raise NoEventsError("empty dataset")
    if not events.any():
        raise NoEventsError("dataset has no observed events")
    t_obs = float(times.max())
    if t_obs <= 0:
        raise DomainError("all observation times are zero")

    center = _default_initial(times, events, t_obs, cfg)
    rng = np.random.default_rng(cfg.seed)
    fun = _objective(times, events, t_obs, cfg.validity_grid)

    best = None
    for i in range(1 + cfg.n_restarts):
        jit = np.exp(rng.normal(0.0, cfg.jitter_sd, size=4))
        start = ModelParams(
            center.alpha * jit[0],
            center.lam * jit[1],
            center.mu * jit[2],
            t_obs + (center.t_max - t_obs) * jit[3],
        )
        trace: list[float] = []
        res = _run(fun, _to_theta(start, t_obs), cfg, trace)
        n_iter = res.nit
        # restarting from the optimum guards against a collapsed simplex
        res2 = _run(fun, res.x, cfg, trace, shrink=0.1)
        n_iter += res2.nit
        if res2.fun <= res.fun:
            res = res2
        ll = -float(res.fun)
        if best is None or ll > best[0]:
            best = (ll, res, n_iter, bool(res2.success), trace)

    ll, res, n_iter, converged, trace = best
    if not math.isfinite(ll):
        raise DomainError("no feasible parameter set found from any start")
    params = _to_params(res.x, t_obs)
    se = standard_errors(params, (times, events))
    valid = bool(is_valid_density(params))
    return FitResult(
        params=params,
        std_errors=se.std_errors,
        se_available=se.available,
        log_likelihood=ll,
        converged=converged and valid,
        n_iter=n_iter,
        n_events=int(events.sum()),
        n_censored=int((~events).sum()),
        hessian=se.hessian,
        valid_density=valid,
        trace=trace,
    )


def _hessian(f: Callable[[np.ndarray], float], x: np.ndarray, h: np.ndarray) -> np.ndarray:
    n = x.size
    f0 = f(x)
    H = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h[j]
        H[j, j] = (f(x + e) - 2.0 * f0 + f(x - e)) / h[j] ** 2
        for k in range(j):
            d = np.zeros(n)
            d[k] = h[k]
            H[j, k] = H[k, j] = (
                f(x + e + d) - f(x + e - d) - f(x - e + d) + f(x - e - d)
            ) / (4.0 * h[j] * h[k])
    return H


def standard_errors(p: ModelParams, data=None,
                    loglik: Callable[[np.ndarray], float] | None = None) -> StandardErrors:
    """Standard errors from the inverse observed information at ``p``.

    ``loglik`` overrides the log-likelihood; it receives the raw vector
    ``(alpha, lam, mu, t_max)``. When the information matrix is not
    positive definite the errors are ``nan`` and ``available`` is False.
    """
    if loglik is None:
        if data is None:
            raise DomainError("either data or loglik is required")
        arrays = as_arrays(data)

        def loglik(v):
            try:
                return log_likelihood(ModelParams.from_sequence(v), arrays)
            except InvalidParamsError:
                return -math.inf

    x = p.as_array()
    h = np.maximum(1e-4 * np.abs(x), 1e-6)
    with np.errstate(all="ignore"):
        info = -_hessian(loglik, x, h)
    se = np.full(4, np.nan)
    if not np.all(np.isfinite(info)):
        return StandardErrors(se, info, False)
    try:
        np.linalg.cholesky(info)
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        return StandardErrors(se, info, False)
    diag = np.diag(cov)
    if np.any(diag <= 0):
        return StandardErrors(se, info, False)
    return StandardErrors(np.sqrt(diag), info, True)


def observations(times: Sequence[float], events: Sequence[bool]) -> list[CensoredObservation]:
    return [CensoredObservation(float(t), bool(e)) for t, e in zip(times, events)]
