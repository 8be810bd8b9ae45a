"""Hidden-node count selection by train/test RMSE sweep."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset, fit_scaler
from .elm import ElmConfig, predict, train, with_seed
from .errors import ElmSolError, InvalidInputError, SweepError
from .metrics import rmse

MASK64 = (1 << 64) - 1
SELECTION_RULE = "min-mean-test-rmse/ties-smallest"
SWEEP_CSV_COLUMNS = ("hidden_nodes", "repeat", "train_rmse", "test_rmse")


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea, Flood 2014) on a 64-bit integer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(base_seed: int, hidden_nodes: int, repeat: int) -> int:
    """Seed for one sweep cell: splitmix64(splitmix64(splitmix64(base) ^ nodes) ^ repeat)."""
    h = splitmix64(base_seed & MASK64)
    h = splitmix64(h ^ (hidden_nodes & MASK64))
    return splitmix64(h ^ (repeat & MASK64))


@dataclass(frozen=True)
class SweepPoint:
    hidden_nodes: int
    repeat_index: int
    train_rmse: float
    test_rmse: float
    seed: int = 0
    error: str | None = None

    @property
    def failed(self):
        return self.error is not None


@dataclass(frozen=True)
class SweepReport:
    points: tuple
    selected_nodes: int
    selection_rule: str = SELECTION_RULE
    base_seed: int = 0
    failures: tuple = field(default=())

    def mean_curve(self):
        """{hidden_nodes: (mean train RMSE, mean test RMSE)} over successful repeats."""
        return mean_curve(self.points)

    def to_csv(self, path):
        write_sweep_csv(self, path)


def mean_curve(points):
    grouped = {}
    for pt in points:
        if pt.failed:
            continue
        grouped.setdefault(pt.hidden_nodes, []).append((pt.train_rmse, pt.test_rmse))
    return {k: tuple(float(v) for v in np.mean(vals, axis=0)) for k, vals in sorted(grouped.items())}


def select_nodes(points) -> int:
    curve = mean_curve(points)
    if not curve:
        raise SweepError("every sweep cell failed; nothing to select")
    # sorted keys + strict '<' keep the smallest count on ties
    best, best_rmse = None, math.inf
    for nodes, (_, test) in curve.items():
        if test < best_rmse:
            best, best_rmse = nodes, test
    return best


def sweep(train_data: Dataset, test_data: Dataset, node_range=range(1, 61), repeats: int = 5,
          base_config: ElmConfig | None = None, workers: int = 1) -> SweepReport:
    """Train one model per (hidden-node count, repeat) and pick the best count.

    Each cell uses ``base_config`` with ``hidden_nodes`` replaced and
    ``seed = mix_seed(base_config.seed, nodes, repeat)``. The scaler is fitted
    once on ``train_data``. A cell whose training raises a package error is
    kept as a failed point and ignored by the selection. ``workers > 1`` runs
    cells on a thread pool; the report order is always node-major, repeat-minor.
    """
    nodes = list(node_range)
    if not nodes:
        raise InvalidInputError("node_range is empty")
    if repeats < 1:
        raise InvalidInputError("repeats must be >= 1")
    base_config = base_config or ElmConfig()

    X_tr, t_tr = train_data.features(), train_data.targets()
    X_te, t_te = test_data.features(), test_data.targets()
    scaler = fit_scaler(X_tr)

    def run(cell):
        count, rep = cell
        seed = mix_seed(int(base_config.seed), count, rep)
        try:
            model = train(with_seed(base_config, seed, count), X_tr, t_tr, scaler)
            tr = rmse(t_tr, predict(model, X_tr))
            te = rmse(t_te, predict(model, X_te))
            if not (math.isfinite(tr) and math.isfinite(te)):
                raise SweepError("non-finite RMSE")
        except ElmSolError as exc:
            return SweepPoint(count, rep, math.nan, math.nan, seed, f"{type(exc).__name__}: {exc}")
        return SweepPoint(count, rep, tr, te, seed)

    cells = [(c, r) for c in nodes for r in range(repeats)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(run, cells))
    else:
        points = tuple(run(c) for c in cells)

    failures = tuple(p for p in points if p.failed)
    return SweepReport(points, select_nodes(points), SELECTION_RULE, int(base_config.seed), failures)


def write_sweep_csv(report: SweepReport, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_CSV_COLUMNS)
        for p in report.points:
            w.writerow([p.hidden_nodes, p.repeat_index, repr(float(p.train_rmse)), repr(float(p.test_rmse))])


def read_sweep_csv(path) -> list[SweepPoint]:
    """Parse a sweep CSV back into points (failed cells come back as NaN RMSE)."""
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            tr, te = float(row["train_rmse"]), float(row["test_rmse"])
            err = None if math.isfinite(tr) and math.isfinite(te) else "failed"
            out.append(SweepPoint(int(row["hidden_nodes"]), int(row["repeat"]), tr, te, error=err))
    return out
