"""Deterministic synthetic solubility data (generator version 1).

Noise-free target, with c_idx the gas-phase fraction selected by idx::

    eta = K * s(idx) * P/(P + 40) * (0.5 + T/300) * exp(-I/10) * (0.2 + c_idx)

with K = 4e-3 and s = (1, 0.3, 0.1, 0.03) for idx = 1..4. The largest value
(idx 1, P = 100, T = 245.15, I = 0, c1 = 1) is about 4.5e-3. Observed values
are ``eta * (1 + noise * z)`` with z standard normal.

Draw order from one PCG64 stream seeded with ``seed``: gas compositions
(n x 4 Dirichlet(1,1,1,1), rows on the unit simplex), idx (integers 1..4),
I ~ U(0, 37.35), T ~ U(1.4, 245.15), P ~ U(0.3, 100), then the n noise
draws. A noise factor that comes out <= 0 is redrawn from the same stream,
lowest index first, until positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import (
    IONIC_STRENGTH_RANGE,
    PRESSURE_RANGE,
    TEMPERATURE_RANGE,
    Dataset,
    SolubilityRecord,
)
from .errors import InvalidInputError

SYNTH_VERSION = 1
MAGNITUDE = 4e-3
GAS_SCALE = (1.0, 0.3, 0.1, 0.03)


@dataclass(frozen=True)
class SynthSpec:
    n_points: int = 1000
    seed: int = 0
    noise: float = 0.05
    temperature_range: tuple = TEMPERATURE_RANGE
    pressure_range: tuple = PRESSURE_RANGE
    ionic_strength_range: tuple = IONIC_STRENGTH_RANGE

    def __post_init__(self):
        if self.n_points < 2:
            raise InvalidInputError("synthetic data needs at least 2 points")
        if not self.noise >= 0:
            raise InvalidInputError("noise level must be >= 0")


def solubility_formula(c, ionic_strength, pressure, temperature, idx):
    """Noise-free synthetic solubility; ``c`` is n x 4, the others length n."""
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    idx = np.asarray(idx, dtype=np.int64)
    P = np.asarray(pressure, dtype=np.float64)
    T = np.asarray(temperature, dtype=np.float64)
    I = np.asarray(ionic_strength, dtype=np.float64)
    s = np.asarray(GAS_SCALE)[idx - 1]
    c_sel = c[np.arange(c.shape[0]), idx - 1]
    return MAGNITUDE * s * P / (P + 40.0) * (0.5 + T / 300.0) * np.exp(-I / 10.0) * (0.2 + c_sel)


def noise_free_targets(X) -> np.ndarray:
    """Recompute the noise-free target from an N x 8 raw feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    return solubility_formula(X[:, :4], X[:, 4], X[:, 5], X[:, 6], X[:, 7].astype(np.int64))


def generate(spec: SynthSpec) -> Dataset:
    n = int(spec.n_points)
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    c = rng.dirichlet(np.ones(4), size=n)
    idx = rng.integers(1, 5, size=n)
    I = rng.uniform(*spec.ionic_strength_range, size=n)
    T = rng.uniform(*spec.temperature_range, size=n)
    P = rng.uniform(*spec.pressure_range, size=n)
    factor = 1.0 + spec.noise * rng.standard_normal(n)
    for i in np.flatnonzero(factor <= 0.0):
        while factor[i] <= 0.0:
            factor[i] = 1.0 + spec.noise * rng.standard_normal()
    eta = solubility_formula(c, I, P, T, idx) * factor

    records = []
    for k in range(n):
        rec = SolubilityRecord(float(c[k, 0]), float(c[k, 1]), float(c[k, 2]), float(c[k, 3]),
                               ionic_strength=float(I[k]), temperature=float(T[k]), pressure=float(P[k]),
                               idx=int(idx[k]), solubility=float(eta[k]))
        rec.validate()
        records.append(rec)
    return Dataset(tuple(records), provenance=f"synth-v{SYNTH_VERSION}(n={n},seed={spec.seed},noise={spec.noise})")
