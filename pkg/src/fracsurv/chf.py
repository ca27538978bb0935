"""Confluent hypergeometric function M(a, b, z) = 1F1(a; b; z) for real arguments.

Every public entry point routes negative arguments through Kummer's
transformation ``M(a, b, z) = e^z M(b - a, b, -z)`` so the series that is
actually summed has a non-negative argument. The summation itself lives in a
compiled extension (``fracsurv._series``) when it is importable and in a
numpy fallback otherwise; set ``FRACSURV_PURE_PYTHON=1`` to force the
fallback. :data:`BACKEND` names the active one.

Scalar arguments return Python floats, array arguments return arrays.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from fracsurv import _series_py
from fracsurv.errors import DomainError, NoConvergenceError, PrecisionLossError

if os.environ.get("FRACSURV_PURE_PYTHON"):
    _backend = _series_py
    BACKEND = "python"
else:
    try:
        from fracsurv import _series as _backend
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _backend = _series_py
        BACKEND = "python"

_LOG_MAX = math.log(np.finfo(float).max)
# nats of cancellation: try the other Kummer route past _RETRY, give up past _GIVE_UP
_RETRY = math.log(1e3)
_GIVE_UP = math.log(1e10)


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy for the series summation.

    The sum stops once ``consecutive_small`` successive terms are each no
    larger than ``epsilon`` times the running partial sum.
    """

    epsilon: float = 1e-15
    max_terms: int = 10000
    consecutive_small: int = 3

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_terms < 1 or self.consecutive_small < 1:
            raise DomainError("max_terms and consecutive_small must be >= 1")


DEFAULT_CONFIG = SeriesConfig()


def use_backend(name: str) -> None:
    """Switch the summation backend (``"compiled"`` or ``"python"``) at runtime."""
    global _backend, BACKEND
    if name == "python":
        _backend, BACKEND = _series_py, "python"
    elif name == "compiled":
        from fracsurv import _series
        _backend, BACKEND = _series, "compiled"
    else:
        raise ValueError(f"unknown backend {name!r}")


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _check_b(b):
    if b <= 0 and b == math.floor(b):
        raise DomainError(f"second argument must not be zero or a negative integer, got {b}")


def _series(a, b, z, cfg):
    """Raw series on an array of arguments; no Kummer routing."""
    log_abs, sign, log_cond, failed = _backend.log_series(
        float(a), float(b), z, cfg.epsilon, cfg.max_terms, cfg.consecutive_small
    )
    if failed >= 0:
        raise NoConvergenceError(
            f"1F1({a}; {b}; {np.ravel(z)[failed]}) did not converge in {cfg.max_terms} terms"
        )
    return log_abs, sign, log_cond


def _is_polynomial(a) -> bool:
    return a <= 0 and a == math.floor(a)


def log_chf_signed(a, b, z, cfg: SeriesConfig = DEFAULT_CONFIG):
    """Return ``(log|M(a,b,z)|, sign M(a,b,z))`` as arrays shaped like ``z``.

    Elements with ``z < 0`` are summed as ``z + log M(b - a, b, -z)``. When
    the chosen series cancels badly (negative first argument) the other
    route is tried and the better-conditioned one kept; if both lose more
    than ten digits :class:`PrecisionLossError` is raised.
    """
    _check_b(b)
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    log_abs = np.empty(flat.size)
    sign = np.empty(flat.size)
    cond = np.empty(flat.size)
    neg = flat < 0
    if neg.any():
        la, sg, cd = _series(b - a, b, -flat[neg], cfg)
        log_abs[neg], sign[neg], cond[neg] = la + flat[neg], sg, cd
    pos = ~neg
    if pos.any():
        log_abs[pos], sign[pos], cond[pos] = _series(a, b, flat[pos], cfg)
    # a terminating series that sums to exactly zero is an exact root, not cancellation
    if _is_polynomial(b - a):
        cond[neg & (sign == 0)] = 0.0
    if _is_polynomial(a):
        cond[pos & (sign == 0)] = 0.0

    bad = cond > _RETRY
    if bad.any():
        zb = flat[bad]
        alt_log, alt_sign, alt_cond = np.empty(zb.size), np.empty(zb.size), np.empty(zb.size)
        nb = zb < 0
        if nb.any():
            alt_log[nb], alt_sign[nb], alt_cond[nb] = _series(a, b, zb[nb], cfg)
        if (~nb).any():
            la, sg, cd = _series(b - a, b, -zb[~nb], cfg)
            alt_log[~nb], alt_sign[~nb], alt_cond[~nb] = la + zb[~nb], sg, cd
        better = alt_cond < cond[bad]
        idx = np.flatnonzero(bad)[better]
        log_abs[idx], sign[idx], cond[idx] = alt_log[better], alt_sign[better], alt_cond[better]
        if np.any(cond > _GIVE_UP):
            worst = flat[np.argmax(cond)]
            raise PrecisionLossError(
                f"1F1({a}; {b}; {worst}) loses more than 10 digits to cancellation"
            )
    return log_abs.reshape(z.shape), sign.reshape(z.shape)


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def chf_1f1(a, b, z, cfg: SeriesConfig = DEFAULT_CONFIG):
    """Evaluate 1F1(a; b; z).

    Negative ``z`` is handled with Kummer's transformation internally, so
    this never sums an alternating series in ``z``. Overflowing results
    come back as ``inf``; use :func:`chf_1f1_stable` to get an error instead.
    """
    log_abs, sign = log_chf_signed(a, b, z, cfg)
    with np.errstate(over="ignore"):
        return _out(sign * np.exp(log_abs), z)


def chf_1f1_stable(a, b, z, cfg: SeriesConfig = DEFAULT_CONFIG):
    """Kummer-routed 1F1 that raises ``OverflowError`` past the float range."""
    log_abs, sign = log_chf_signed(a, b, z, cfg)
    if np.any(log_abs > _LOG_MAX):
        raise OverflowError(f"1F1({a}; {b}; z) exceeds the float range; use ln_chf_1f1")
    return _out(sign * np.exp(log_abs), z)


def ln_chf_1f1(a, b, z, cfg: SeriesConfig = DEFAULT_CONFIG):
    """Natural log of 1F1(a; b; z) for ``a > 0``, ``b > 0`` and ``z >= 0``.

    All series terms are positive here, so the result is well defined for
    arguments where the function itself overflows.
    """
    z_arr = np.asarray(z, dtype=float)
    if a <= 0 or b <= 0:
        raise DomainError(f"ln_chf_1f1 requires a > 0 and b > 0, got a={a}, b={b}")
    if np.any(z_arr < 0):
        raise DomainError("ln_chf_1f1 requires z >= 0")
    log_abs, _, _ = _series(a, b, z_arr, cfg)
    return _out(log_abs.reshape(z_arr.shape), z)
