"""Pure-numpy summation of the Kummer series M(a, b, z) over an array of z.

Terms follow the ratio recurrence ``t_{k+1} = t_k * (a+k) z / ((b+k)(k+1))``.
Partial sums are rescaled by an exact power of two whenever they exceed
``1e250`` so arguments in the hundreds do not overflow; the accumulated
scale is returned folded into the logarithm.

Convergence needs ``consecutive_small`` successive terms with
``|t_k| <= eps * |partial sum|``, counted only once ``k`` is past
``|z| + 2|a| + sqrt(b)`` and the term ratio has dropped below one. Before
that point early terms can be tiny while later ones are huge (small ``a``,
large ``z``).

Both backends return ``(log_abs, sign, log_cond, failed)``. ``log_cond`` is
``log(sum |t_k| / |sum t_k|)``, the number of nats lost to cancellation
(zero for an all-positive series). ``failed`` is the index of the first
element that hit ``max_terms``, or ``-1``.
"""
import math

import numpy as np

_BIG = 1e250
_SHIFT = 830
_LN2 = 0.6931471805599453


def _guard(a, b, z):
    extra = np.sqrt(b) if b > 0 else abs(b)
    return np.abs(z) + 2.0 * abs(a) + extra


def _scalar(a, b, z, eps, max_terms, consecutive_small):
    # same recurrence on plain floats; numpy overhead dominates for one element
    if z == 0.0:
        return 0.0, 1.0, 0.0, False
    term = s = sabs = 1.0
    scale = 0.0
    small = 0
    kguard = float(_guard(a, b, z))
    for k in range(max_terms):
        r = (a + k) / (b + k) * z / (k + 1)
        term *= r
        s += term
        sabs += abs(term)
        if sabs > _BIG or abs(term) > _BIG:
            s = math.ldexp(s, -_SHIFT)
            sabs = math.ldexp(sabs, -_SHIFT)
            term = math.ldexp(term, -_SHIFT)
            scale += _SHIFT * _LN2
        if k + 1 >= kguard and abs(r) < 1.0 and abs(term) <= eps * abs(s):
            small += 1
        else:
            small = 0
        if term == 0.0 or small >= consecutive_small:
            if s == 0.0:
                return -math.inf, 0.0, math.inf, False
            return math.log(abs(s)) + scale, math.copysign(1.0, s), math.log(sabs / abs(s)), False
    return 0.0, 1.0, 0.0, True


def log_series(a, b, z, eps, max_terms, consecutive_small):
    z = np.ascontiguousarray(z, dtype=np.float64).ravel()
    n = z.size
    if n == 1:
        la, sg, cd, bad = _scalar(float(a), float(b), float(z[0]), eps, max_terms, consecutive_small)
        return np.array([la]), np.array([sg]), np.array([cd]), 0 if bad else -1
    out_log = np.zeros(n)
    out_sign = np.ones(n)
    out_cond = np.zeros(n)

    active = np.flatnonzero(z != 0.0)
    zs = z[active]
    term = np.ones(active.size)
    s = np.ones(active.size)
    sabs = np.ones(active.size)
    scale = np.zeros(active.size)
    small = np.zeros(active.size, dtype=np.int64)
    kguard = _guard(a, b, zs)

    for k in range(max_terms):
        if active.size == 0:
            break
        r = (a + k) / (b + k) * zs / (k + 1)
        term = term * r
        s = s + term
        sabs = sabs + np.abs(term)

        big = (sabs > _BIG) | (np.abs(term) > _BIG)
        if big.any():
            s[big] = np.ldexp(s[big], -_SHIFT)
            sabs[big] = np.ldexp(sabs[big], -_SHIFT)
            term[big] = np.ldexp(term[big], -_SHIFT)
            scale[big] += _SHIFT * _LN2

        ok = (k + 1 >= kguard) & (np.abs(r) < 1.0) & (np.abs(term) <= eps * np.abs(s))
        small = np.where(ok, small + 1, 0)
        done = (term == 0.0) | (small >= consecutive_small)
        if done.any():
            idx = active[done]
            sd = s[done]
            with np.errstate(divide="ignore"):
                out_log[idx] = np.log(np.abs(sd)) + scale[done]
                out_cond[idx] = np.log(sabs[done] / np.abs(sd))
            out_sign[idx] = np.sign(sd)
            keep = ~done
            active, zs, term, s = active[keep], zs[keep], term[keep], s[keep]
            sabs = sabs[keep]
            scale, small, kguard = scale[keep], small[keep], kguard[keep]

    failed = int(active[0]) if active.size else -1
    return out_log, out_sign, out_cond, failed
