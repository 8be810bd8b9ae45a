"""Applicability domain (leverage / Williams plot) and relevancy-factor sensitivity."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from . import _kernels
from .dataset import FEATURE_NAMES, Dataset
from .errors import DegenerateError, InvalidInputError, RankError, ShapeError

VALID = "valid"
OUTLIER = "outlier"
HIGH_LEVERAGE = "high_leverage"
RESIDUAL_BOUND = 3.0


def _design(U):
    U = np.asarray(U, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    if U.ndim != 2:
        raise ShapeError(f"design matrix must be 2-D, got shape {U.shape}")
    n, p = U.shape
    if p == 0 or n < p:
        raise RankError(f"design matrix {n} x {p} needs N >= p >= 1", rank=min(n, p))
    if not np.isfinite(U).all():
        raise InvalidInputError("design matrix contains non-finite values")
    return U


def _orthonormal_basis(U):
    """Q with orthonormal columns spanning range(U); raises RankError if rank < p."""
    Q, R, _ = scipy.linalg.qr(U, mode="economic", pivoting=True, check_finite=False)
    d = np.abs(np.diag(R))
    tol = np.finfo(np.float64).eps * max(U.shape) * (d[0] if d.size else 0.0)
    rank = int(np.count_nonzero(d > tol))
    if rank < U.shape[1]:
        raise RankError(f"design matrix is rank deficient: numerical rank {rank} < {U.shape[1]} columns",
                        rank=rank)
    return Q


def hat_matrix(U) -> np.ndarray:
    """Projection U (U^T U)^{-1} U^T, formed as Q Q^T from a pivoted QR."""
    Q = _orthonormal_basis(_design(U))
    H = Q @ Q.T
    return 0.5 * (H + H.T)


def hat_diagonal(U) -> np.ndarray:
    """Leverages diag(H) as squared row norms of Q; the N x N matrix is never built."""
    Q = _orthonormal_basis(_design(U))
    return np.clip(_kernels.row_sq_norms(Q), 0.0, 1.0)


def critical_leverage(p: int, n: int) -> float:
    """Warning leverage H* = 3 (p + 1) / n."""
    if p < 1 or n <= 0:
        raise InvalidInputError(f"critical leverage needs p >= 1 and n > 0, got p={p}, n={n}")
    return 3.0 * (p + 1) / n


def standardized_residuals(actual, predicted) -> np.ndarray:
    """(e - mean(e)) / s with e = actual - predicted and s the N-1 sample std."""
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.shape != p.shape:
        raise ShapeError(f"length mismatch: {a.size} vs {p.size}")
    if a.size < 2:
        raise InvalidInputError("standardized residuals need at least 2 points")
    e = a - p
    e = e - e.mean()
    s = math.sqrt(float(np.dot(e, e)) / (e.size - 1))
    # residual spread at rounding level counts as a perfect fit
    if s == 0.0 or s <= 1e-10 * float(np.max(np.abs(a))):
        raise DegenerateError("residuals have zero variance (perfect fit?); standardized residuals undefined")
    return e / s


@dataclass(frozen=True, eq=False)
class LeverageReport:
    hat_diagonal: np.ndarray
    std_residuals: np.ndarray
    critical_leverage: float
    residual_bounds: tuple
    flags: tuple

    @property
    def n(self):
        return len(self.flags)

    def fraction_valid(self):
        return sum(f == VALID for f in self.flags) / len(self.flags)

    def header(self):
        return {
            "critical_leverage": self.critical_leverage,
            "residual_bounds": list(self.residual_bounds),
            "n": self.n,
            "counts": {k: sum(f == k for f in self.flags) for k in (VALID, OUTLIER, HIGH_LEVERAGE)},
        }

    def to_csv(self, path):
        write_leverage_csv(self, path)


def classify(h, r, h_star, bound=RESIDUAL_BOUND):
    """Outlier takes precedence over high leverage when both apply."""
    if abs(r) > bound:
        return OUTLIER
    if h > h_star:
        return HIGH_LEVERAGE
    return VALID


def williams_report(X_scaled, actual, predicted, *, intercept=False, n_params=None,
                    residual_bound=RESIDUAL_BOUND) -> LeverageReport:
    """Leverage, standardized residual and flag for every point.

    The design matrix is ``X_scaled`` (optionally with a leading column of
    ones). H* uses ``n_params`` inputs, defaulting to the number of feature
    columns, and the number of rows.
    """
    X = np.asarray(X_scaled, dtype=np.float64)
    U = np.column_stack([np.ones(X.shape[0]), X]) if intercept else X
    r = standardized_residuals(actual, predicted)
    h = hat_diagonal(U)
    if r.size != h.size:
        raise ShapeError(f"{h.size} design rows but {r.size} residuals")
    p = X.shape[1] if n_params is None else n_params
    h_star = critical_leverage(p, X.shape[0])
    flags = tuple(classify(hi, ri, h_star, residual_bound) for hi, ri in zip(h, r))
    return LeverageReport(h, r, h_star, (-residual_bound, residual_bound), flags)


def _sidecar(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_leverage_csv(report: LeverageReport, path) -> Path:
    """Write ``index,hat,std_residual,flag`` and a ``<path>.json`` header with H* and bounds."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("index", "hat", "std_residual", "flag"))
        for i, (h, r, f) in enumerate(zip(report.hat_diagonal, report.std_residuals, report.flags)):
            w.writerow([i, repr(float(h)), repr(float(r)), f])
    side = _sidecar(path)
    side.write_text(json.dumps(report.header(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return side


def read_leverage_csv(path) -> LeverageReport:
    path = Path(path)
    header = json.loads(_sidecar(path).read_text(encoding="utf-8"))
    h, r, flags = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            h.append(float(row["hat"]))
            r.append(float(row["std_residual"]))
            flags.append(row["flag"])
    return LeverageReport(np.array(h), np.array(r), float(header["critical_leverage"]),
                          tuple(header["residual_bounds"]), tuple(flags))


# -- sensitivity ------------------------------------------------------------------

def relevancy_factor(x, y) -> float:
    """Pearson correlation between one input column and the target."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InvalidInputError("relevancy factor needs at least 2 points")
    sxy, sxx, syy = _kernels.centered_sums(x, y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateError("zero variance; relevancy factor undefined")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class SensitivityReport:
    factors: dict  # feature name -> r, or None when the column is constant

    @property
    def undefined(self):
        return tuple(k for k, v in self.factors.items() if v is None)

    def ranked(self):
        """Defined factors sorted by decreasing |r|."""
        return sorted(((k, v) for k, v in self.factors.items() if v is not None),
                      key=lambda kv: -abs(kv[1]))

    def to_csv(self, path):
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("feature", "r"))
            for k, v in self.factors.items():
                w.writerow([k, "nan" if v is None else repr(float(v))])

    @classmethod
    def from_csv(cls, path):
        factors = {}
        with Path(path).open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                v = float(row["r"])
                factors[row["feature"]] = None if math.isnan(v) else v
        return cls(factors)


def sensitivity_report(data: Dataset | np.ndarray, target=None, names=FEATURE_NAMES) -> SensitivityReport:
    """Relevancy factor of every raw feature column against solubility.

    Accepts a :class:`Dataset`, or a feature matrix plus ``target``.
    Constant feature columns are reported as ``None``.
    """
    if isinstance(data, Dataset):
        X, y = data.features(), data.targets()
    else:
        X, y = np.asarray(data, dtype=np.float64), np.asarray(target, dtype=np.float64)
    if X.shape[0] < 2:
        raise InvalidInputError("sensitivity analysis needs at least 2 rows")
    if np.ptp(y) == 0.0:
        raise DegenerateError("target is constant; relevancy factors undefined")
    factors = {}
    for k, name in enumerate(names):
        col = X[:, k]
        factors[name] = None if np.ptp(col) == 0.0 else relevancy_factor(col, y)
    return SensitivityReport(factors)
