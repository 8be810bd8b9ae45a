"""Goodness-of-fit statistics: MRE (%), MSE, RMSE and R^2."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateError, InvalidInputError, ShapeError


def _pair(actual, predicted, min_n=1):
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.shape != p.shape:
        raise ShapeError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size < min_n:
        raise InvalidInputError(f"need at least {min_n} points, got {a.size}")
    return a, p


def _check_nonzero(a):
    zeros = np.flatnonzero(a == 0.0)
    if zeros.size:
        raise ZeroDivisionError(f"actual value is zero at index {int(zeros[0])}; relative error undefined")


def mre(actual, predicted) -> float:
    """Mean absolute relative error in percent, 100/N * sum |a - p| / |a|.

    The printed formula in the source has no absolute value; without it the
    errors would cancel, so :func:`mre_signed` keeps that reading separately.
    """
    a, p = _pair(actual, predicted)
    _check_nonzero(a)
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


def relative_deviations(actual, predicted) -> np.ndarray:
    """Per-point signed deviation 100 * (a - p) / a, for deviation plots."""
    a, p = _pair(actual, predicted)
    _check_nonzero(a)
    return 100.0 * (a - p) / a


def mre_signed(actual, predicted) -> float:
    return float(np.mean(relative_deviations(actual, predicted)))


def mse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    d = a - p
    return float(np.dot(d, d) / d.size)


def rmse(actual, predicted) -> float:
    return math.sqrt(mse(actual, predicted))


def r_squared(actual, predicted) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot.

    SS_tot is taken around the mean of the *actual* values (the standard
    reading; the alternative of centring on the predictions is not used).
    """
    a, p = _pair(actual, predicted, min_n=2)
    d = a - a.mean()
    ss_tot = float(np.dot(d, d))
    if ss_tot == 0.0:
        raise DegenerateError("actual values are constant; R^2 is undefined")
    r = a - p
    return 1.0 - float(np.dot(r, r)) / ss_tot


@dataclass(frozen=True)
class EvalReport:
    r2: float
    mre_percent: float
    mse: float
    rmse: float
    n: int

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["r2"]), float(d["mre_percent"]), float(d["mse"]), float(d["rmse"]), int(d["n"]))


def evaluate(actual, predicted) -> EvalReport:
    a, p = _pair(actual, predicted, min_n=2)
    m = mse(a, p)
    return EvalReport(r2=r_squared(a, p), mre_percent=mre(a, p), mse=m, rmse=math.sqrt(m), n=int(a.size))


def format_table(reports) -> str:
    """Fixed-width table with columns Dataset, R2, MRE(%), MSE, RMSE.

    ``reports`` maps a row label (e.g. "Training") to an :class:`EvalReport`.
    """
    lines = [f"{'Dataset':<10} {'R2':>8} {'MRE(%)':>10} {'MSE':>13} {'RMSE':>12}"]
    for label, r in reports.items():
        lines.append(f"{label:<10} {r.r2:>8.3f} {r.mre_percent:>10.3f} {r.mse:>13.5E} {r.rmse:>12.4E}")
    return "\n".join(lines)
