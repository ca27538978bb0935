"""Readers and writers for the CLI's file formats.

* dataset CSV: header ``time,event``; ``event`` is 0 (censored) or 1.
* curve CSV: ``t,cdf,survival,pdf,hazard,cum_hazard``.
* step CSV: ``t,cum_hazard,survival`` (Nelson-Aalen jump points).
* fit report: one JSON document, see :class:`FitReport`.

Machine files print floats with 17 significant digits and LF line endings.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from fracsurv import __version__
from fracsurv.errors import FracSurvError
from fracsurv.estimation import PARAM_NAMES, CensoredObservation, FitConfig, FitResult
from fracsurv.model import CurveTable, ModelParams
from fracsurv.nonparam import StepFunction

DATASET_HEADER = ["time", "event"]
CURVE_HEADER = ["t", "cdf", "survival", "pdf", "hazard", "cum_hazard"]
STEP_HEADER = ["t", "cum_hazard", "survival"]


class DatasetError(FracSurvError, ValueError):
    """A dataset file could not be parsed; the message names the line."""


def fmt(x: float) -> str:
    return f"{x:.17g}"


def read_dataset(path) -> list[CensoredObservation]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None:
            raise DatasetError(f"{path}: line 1: empty file, expected header 'time,event'")
        if [h.strip() for h in header] != DATASET_HEADER:
            raise DatasetError(f"{path}: line 1: header must be exactly 'time,event', got {header}")
        out = []
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != 2 or any(not cell.strip() for cell in row):
                raise DatasetError(f"{path}: line {lineno}: expected two fields 'time,event'")
            try:
                t = float(row[0])
            except ValueError:
                raise DatasetError(f"{path}: line {lineno}: time {row[0]!r} is not a number") from None
            if not (math.isfinite(t) and t >= 0):
                raise DatasetError(f"{path}: line {lineno}: time must be finite and >= 0")
            ev = row[1].strip()
            if ev not in ("0", "1"):
                raise DatasetError(f"{path}: line {lineno}: event must be 0 or 1, got {ev!r}")
            out.append(CensoredObservation(t, ev == "1"))
    if not out:
        raise DatasetError(f"{path}: no data rows")
    return out


def write_dataset(path, data) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_HEADER)
        for o in data:
            w.writerow([fmt(o.time), int(o.event)])


def _write_columns(path, header, columns) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(float(v)) for v in row])


def _read_columns(path, header) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        raise DatasetError(f"{path}: line 1: header must be {','.join(header)}")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


def write_curves(path, table: CurveTable) -> None:
    _write_columns(path, CURVE_HEADER, [table.times, table.cdf, table.survival, table.pdf,
                                        table.hazard, table.cum_hazard])


def read_curves(path) -> CurveTable:
    c = _read_columns(path, CURVE_HEADER)
    return CurveTable(c["t"], c["cdf"], c["survival"], c["pdf"], c["hazard"], c["cum_hazard"])


def write_steps(path, hazard: StepFunction, surv: StepFunction) -> None:
    _write_columns(path, STEP_HEADER, [hazard.times, hazard.values, surv.values])


def read_steps(path) -> tuple[StepFunction, StepFunction]:
    c = _read_columns(path, STEP_HEADER)
    return StepFunction(c["t"], c["cum_hazard"]), StepFunction(c["t"], c["survival"], initial=1.0)


def _num(x):
    return None if x is None or not math.isfinite(x) else float(x)


@dataclass
class FitReport:
    """Serializable fit summary.

    JSON schema (all numbers are floats unless noted; ``null`` marks an
    unavailable standard error)::

        {"tool": "fracsurv", "version": str,
         "dataset": {"path": str, "n": int, "n_events": int, "n_censored": int,
                     "mean_event_time": float},
         "config": {"n_restarts": int, "max_iter": int, "xtol", "ftol", "t_margin",
                    "seed": int, "jitter_sd"},
         "params": {"alpha", "lam", "mu", "t_max"},
         "std_errors": {"alpha", "lam", "mu", "t_max"},
         "se_available": bool, "log_likelihood", "converged": bool,
         "valid_density": bool, "n_iter": int, "hessian": [[4 x 4]]}
    """

    dataset: dict
    config: dict
    params: dict
    std_errors: dict
    se_available: bool
    log_likelihood: float
    converged: bool
    valid_density: bool
    n_iter: int
    hessian: list
    tool: str = "fracsurv"
    version: str = field(default=__version__)

    @classmethod
    def from_fit(cls, result: FitResult, data, cfg: FitConfig, path: str = "") -> "FitReport":
        times = np.array([o.time for o in data])
        events = np.array([o.event for o in data], dtype=bool)
        cfg_dict = {k: v for k, v in asdict(cfg).items() if k not in ("initial", "validity_grid")}
        return cls(
            dataset={
                "path": str(path),
                "n": int(times.size),
                "n_events": int(events.sum()),
                "n_censored": int((~events).sum()),
                "mean_event_time": float(times[events].mean()),
            },
            config=cfg_dict,
            params=dict(zip(PARAM_NAMES, map(float, result.params.as_array()))),
            std_errors=dict(zip(PARAM_NAMES, map(_num, result.std_errors))),
            se_available=bool(result.se_available),
            log_likelihood=float(result.log_likelihood),
            converged=bool(result.converged),
            valid_density=bool(result.valid_density),
            n_iter=int(result.n_iter),
            hessian=[[_num(v) for v in row] for row in np.asarray(result.hessian)],
        )

    def model_params(self) -> ModelParams:
        return ModelParams(**self.params)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FitReport":
        return cls(**json.loads(text))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> "FitReport":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def table(self) -> str:
        symbols = {"alpha": "alpha", "lam": "lambda", "mu": "mu", "t_max": "T"}
        lines = [f"{'Parameter':<10}{'Estimate':>14}{'Standard Error':>18}"]
        for name in PARAM_NAMES:
            se = self.std_errors[name]
            se_txt = "n/a" if se is None else f"{se:.4f}"
            lines.append(f"{symbols[name]:<10}{self.params[name]:>14.4f}{se_txt:>18}")
        return "\n".join(lines)
