"""Nelson-Aalen cumulative hazard and the survival curve derived from it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fracsurv.errors import DomainError
from fracsurv.estimation import as_arrays


@dataclass
class StepFunction:
    """Right-continuous step function; ``initial`` applies before the first jump."""

    times: np.ndarray
    values: np.ndarray
    variances: np.ndarray | None = None
    initial: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise DomainError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("step times must be strictly increasing")

    def __call__(self, t):
        return evaluate_step(self, t)

    def __len__(self):
        return self.times.size


def nelson_aalen(data) -> StepFunction:
    """Nelson-Aalen estimate ``H(t) = sum_{t_j <= t} d_j / n_j`` over distinct event times.

    A subject censored at an event time is still at risk at that time.
    """
    times, events = as_arrays(data)
    if times.size == 0:
        raise DomainError("empty dataset")
    order = np.argsort(times, kind="stable")
    times, events = times[order], events[order]

    event_times = np.unique(times[events])
    if event_times.size == 0:
        return StepFunction(np.empty(0), np.empty(0), np.empty(0))
    at_risk = times.size - np.searchsorted(times, event_times, side="left")
    hi = np.searchsorted(times, event_times, side="right")
    lo = np.searchsorted(times, event_times, side="left")
    ev_cum = np.concatenate(([0], np.cumsum(events)))
    deaths = ev_cum[hi] - ev_cum[lo]

    increments = deaths / at_risk
    values = np.cumsum(increments)
    variances = np.cumsum(deaths / at_risk.astype(float) ** 2)
    return StepFunction(event_times, values, variances)


def na_survival(h: StepFunction) -> StepFunction:
    """Survival ``exp(-H)`` from a cumulative hazard step function."""
    v = h.values
    if v.size and (v[0] < h.initial or np.any(np.diff(v) < 0)):
        raise DomainError("cumulative hazard must be non-decreasing")
    s = np.exp(-v)
    var = None if h.variances is None else s**2 * h.variances
    return StepFunction(h.times.copy(), s, var, initial=float(np.exp(-h.initial)))


def evaluate_step(f: StepFunction, t):
    """Value at the largest step time ``<= t``; ``f.initial`` before the first."""
    arr = np.asarray(t, dtype=float)
    idx = np.searchsorted(f.times, arr, side="right") - 1
    out = np.where(idx >= 0, f.values[np.clip(idx, 0, None)] if f.values.size else f.initial,
                   f.initial)
    return float(out) if arr.ndim == 0 else out
