"""Solubility records, CSV ingestion, featurization, splitting and scaling.

Feature order is part of the public contract::

    [c1, c2, c3, c4, ionic_strength, pressure_mpa, temperature_c, idx]

Ionic strength is carried in mol per kg solvent. The unit is treated as
opaque; nothing is converted.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CsvParseError,
    EmptyDatasetError,
    InvalidInputError,
    RecordValidationError,
    SchemaError,
    SplitError,
)

FEATURE_NAMES = (
    "c1", "c2", "c3", "c4",
    "ionic_strength", "pressure_mpa", "temperature_c", "idx",
)
N_FEATURES = len(FEATURE_NAMES)
CSV_COLUMNS = FEATURE_NAMES + ("solubility",)
ION_COLUMNS = ("cation_molality", "cation_charge", "anion_molality", "anion_charge")

# Documented ranges of the literature databank; outside them we warn only.
TEMPERATURE_RANGE = (1.4, 245.15)
PRESSURE_RANGE = (0.3, 100.0)
IONIC_STRENGTH_RANGE = (0.0, 37.35)

COMPOSITION_TOL = 1e-9


class OutOfRangeWarning(UserWarning):
    """A record lies outside the documented experimental ranges."""


@dataclass(frozen=True)
class IonSpec:
    molality: float
    charge: int

    def __post_init__(self):
        if not math.isfinite(self.molality) or self.molality < 0:
            raise InvalidInputError(f"ion molality must be finite and >= 0, got {self.molality}")
        if int(self.charge) != self.charge or self.charge == 0:
            raise InvalidInputError(f"ion charge must be a nonzero integer, got {self.charge}")


def ionic_strength(ions: Iterable[IonSpec | tuple]) -> float:
    """Ionic strength I = 1/2 * sum(m_i * z_i**2).

    ``ions`` may hold :class:`IonSpec` objects or ``(molality, charge)``
    pairs. An empty list (pure water) gives 0.
    """
    total = 0.0
    for ion in ions:
        if not isinstance(ion, IonSpec):
            ion = IonSpec(*ion)
        total += ion.molality * ion.charge * ion.charge
    return 0.5 * total


@dataclass(frozen=True)
class SolubilityRecord:
    """One measured point.

    Construction does not validate, so degenerate records can still be
    featurized; the CSV loaders call :meth:`validate` on every row.
    """

    c1: float
    c2: float
    c3: float
    c4: float
    ionic_strength: float
    temperature: float
    pressure: float
    idx: int
    solubility: float

    def validate(self, *, require_solubility=True):
        """Raise ``InvalidInputError`` on a hard invariant violation.

        Returns a list of soft range warnings (strings), which callers may
        emit as :class:`OutOfRangeWarning`.
        """
        values = (self.c1, self.c2, self.c3, self.c4, self.ionic_strength,
                  self.temperature, self.pressure)
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError("non-finite field")
        comps = (self.c1, self.c2, self.c3, self.c4)
        for k, c in enumerate(comps, start=1):
            if not 0.0 <= c <= 1.0:
                raise InvalidInputError(f"c{k}={c} outside [0, 1]")
        if sum(comps) > 1.0 + COMPOSITION_TOL:
            raise InvalidInputError(f"gas mole fractions sum to {sum(comps)} > 1")
        if self.idx not in (1, 2, 3, 4):
            raise InvalidInputError(f"idx must be one of 1, 2, 3, 4, got {self.idx}")
        if comps[self.idx - 1] <= 0.0:
            raise InvalidInputError(f"c{self.idx} is zero but idx selects it")
        if self.ionic_strength < 0:
            raise InvalidInputError(f"ionic strength {self.ionic_strength} < 0")
        if self.pressure <= 0:
            raise InvalidInputError(f"pressure {self.pressure} must be > 0")
        if require_solubility and not (math.isfinite(self.solubility) and 0.0 < self.solubility < 1.0):
            raise InvalidInputError(f"solubility {self.solubility} outside (0, 1)")

        soft = []
        for name, v, (lo, hi) in (
            ("temperature", self.temperature, TEMPERATURE_RANGE),
            ("pressure", self.pressure, PRESSURE_RANGE),
            ("ionic strength", self.ionic_strength, IONIC_STRENGTH_RANGE),
        ):
            if not lo <= v <= hi:
                soft.append(f"{name} {v} outside documented range [{lo}, {hi}]")
        return soft


def feature_vector(record: SolubilityRecord) -> np.ndarray:
    """[c1, c2, c3, c4, I, P, T, idx] as a float array."""
    r = record
    return np.array([r.c1, r.c2, r.c3, r.c4, r.ionic_strength,
                     r.pressure, r.temperature, float(r.idx)], dtype=np.float64)


@dataclass(frozen=True)
class Dataset:
    records: tuple
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise EmptyDatasetError("dataset has no records")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def features(self) -> np.ndarray:
        """N x 8 raw feature matrix."""
        return np.array([feature_vector(r) for r in self.records], dtype=np.float64).reshape(-1, N_FEATURES)

    def targets(self) -> np.ndarray:
        return np.array([r.solubility for r in self.records], dtype=np.float64)

    def subset(self, indices: Sequence[int], provenance=None) -> "Dataset":
        return Dataset(tuple(self.records[i] for i in indices), provenance or self.provenance)


# -- CSV ----------------------------------------------------------------------

def _parse_float(cell, row, column):
    try:
        value = float(cell)
    except (TypeError, ValueError):
        raise CsvParseError(row, f"column {column!r}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise CsvParseError(row, f"column {column!r}: non-finite value {cell!r}")
    return value


def _parse_int(cell, row, column):
    value = _parse_float(cell, row, column)
    if value != int(value):
        raise CsvParseError(row, f"column {column!r}: expected an integer, got {cell!r}")
    return int(value)


def _required_columns(ions, with_target):
    cols = list(FEATURE_NAMES)
    if ions:
        i = cols.index("ionic_strength")
        cols[i:i + 1] = ION_COLUMNS
    if with_target:
        cols.append("solubility")
    return cols


def _read_rows(path, *, percent, ions, with_target):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise EmptyDatasetError(f"{path}: file is empty (no header)")
        header = [h.strip() for h in header]
        reader.fieldnames = header
        for col in _required_columns(ions, with_target):
            if col not in header:
                raise SchemaError(col, f"{path}: missing required column {col!r}")

        scale = 0.01 if percent else 1.0
        out = []
        for row_no, row in enumerate(reader, start=1):
            if None in row:
                raise CsvParseError(row_no, "more cells than header columns")
            comps = [_parse_float(row.get(c), row_no, c) * scale for c in ("c1", "c2", "c3", "c4")]
            if ions:
                try:
                    strength = ionic_strength([
                        (_parse_float(row.get("cation_molality"), row_no, "cation_molality"),
                         _parse_int(row.get("cation_charge"), row_no, "cation_charge")),
                        (_parse_float(row.get("anion_molality"), row_no, "anion_molality"),
                         _parse_int(row.get("anion_charge"), row_no, "anion_charge")),
                    ])
                except InvalidInputError as exc:
                    raise RecordValidationError(row_no, str(exc)) from None
            else:
                strength = _parse_float(row.get("ionic_strength"), row_no, "ionic_strength")
            record = SolubilityRecord(
                *comps,
                ionic_strength=strength,
                temperature=_parse_float(row.get("temperature_c"), row_no, "temperature_c"),
                pressure=_parse_float(row.get("pressure_mpa"), row_no, "pressure_mpa"),
                idx=_parse_int(row.get("idx"), row_no, "idx"),
                solubility=(_parse_float(row.get("solubility"), row_no, "solubility")
                            if with_target else float("nan")),
            )
            try:
                soft = record.validate(require_solubility=with_target)
            except InvalidInputError as exc:
                raise RecordValidationError(row_no, str(exc)) from None
            for msg in soft:
                warnings.warn(f"{path} row {row_no}: {msg}", OutOfRangeWarning, stacklevel=3)
            out.append(record)
    return out


def load_csv(path, *, percent=False, ions=False) -> Dataset:
    """Read a solubility CSV into a :class:`Dataset`, keeping file order.

    ``percent=True`` reads c1..c4 as 0-100 percentages. ``ions=True``
    expects the cation/anion columns instead of ``ionic_strength`` and
    derives I from them.
    """
    records = _read_rows(path, percent=percent, ions=ions, with_target=True)
    if not records:
        raise EmptyDatasetError(f"{path}: header present but no data rows")
    return Dataset(tuple(records), provenance=str(path))


def load_features_csv(path, *, percent=False, ions=False) -> np.ndarray:
    """Read inputs only (a ``solubility`` column, if present, is ignored).

    Returns an N x 8 matrix; N may be 0.
    """
    records = _read_rows(path, percent=percent, ions=ions, with_target=False)
    return np.array([feature_vector(r) for r in records], dtype=np.float64).reshape(-1, N_FEATURES)


def _fmt(x):
    return repr(float(x))


def write_csv(data: Dataset, path) -> None:
    """Write ``data`` in the canonical schema; floats use shortest round-trip repr."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in data.records:
            w.writerow([_fmt(r.c1), _fmt(r.c2), _fmt(r.c3), _fmt(r.c4),
                        _fmt(r.ionic_strength), _fmt(r.pressure), _fmt(r.temperature),
                        int(r.idx), _fmt(r.solubility)])


# -- splitting ------------------------------------------------------------------

def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates (Durstenfeld) permutation of range(n).

    Randomness comes from numpy's PCG64 bit generator seeded with ``seed``;
    for i = n-1 down to 1, j is drawn with ``Generator.integers(0, i + 1)``
    and positions i and j are swapped.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def split(data: Dataset, train_fraction: float = 0.75, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded random train/test partition.

    The train part takes the first ``floor(train_fraction * N + 0.5)`` shuffled
    positions. Both parts keep the records' original relative order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(data)
    n_train = int(math.floor(train_fraction * n + 0.5))
    if n_train == 0 or n_train == n:
        raise SplitError(f"split of {n} records at fraction {train_fraction} leaves an empty part")
    order = shuffled_indices(n, seed)
    train_idx = sorted(order[:n_train])
    test_idx = sorted(order[n_train:])
    tag = f"{data.provenance}|split(seed={seed},fraction={train_fraction})"
    return data.subset(train_idx, tag + ":train"), data.subset(test_idx, tag + ":test")


# -- scaling --------------------------------------------------------------------

@dataclass(frozen=True)
class Scaler:
    """Per-feature min-max map onto [lo, hi]; constant features go to the midpoint."""

    mins: tuple
    maxs: tuple
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mins", tuple(float(v) for v in self.mins))
        object.__setattr__(self, "maxs", tuple(float(v) for v in self.maxs))
        if len(self.mins) != len(self.maxs):
            raise InvalidInputError("scaler mins/maxs length mismatch")
        if any(mx < mn for mn, mx in zip(self.mins, self.maxs)):
            raise InvalidInputError("scaler has max < min")
        if not self.lo < self.hi:
            raise InvalidInputError("scaler target range needs lo < hi")

    @property
    def n_features(self):
        return len(self.mins)

    def _coeffs(self):
        mn = np.asarray(self.mins)
        span = np.asarray(self.maxs) - mn
        const = span == 0
        return mn, np.where(const, 1.0, span), const

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        mn, span, const = self._coeffs()
        # divide before stretching: x == max lands exactly on hi
        z = self.lo + (X - mn) / span * (self.hi - self.lo)
        return np.where(const, 0.5 * (self.lo + self.hi), z)

    def inverse_transform(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        mn, span, const = self._coeffs()
        return np.where(const, mn, mn + (Z - self.lo) / (self.hi - self.lo) * span)

    def to_dict(self):
        return {"mins": [_fmt(v) for v in self.mins], "maxs": [_fmt(v) for v in self.maxs],
                "lo": _fmt(self.lo), "hi": _fmt(self.hi)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(float(v) for v in d["mins"]), tuple(float(v) for v in d["maxs"]),
                   float(d["lo"]), float(d["hi"]))


def fit_scaler(train, lo=-1.0, hi=1.0) -> Scaler:
    """Fit on a :class:`Dataset` or an N x n array (training rows only)."""
    X = train.features() if isinstance(train, Dataset) else np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDatasetError("cannot fit a scaler on zero rows")
    return Scaler(tuple(X.min(axis=0)), tuple(X.max(axis=0)), lo, hi)


def apply_scaler(scaler: Scaler, x) -> np.ndarray:
    return scaler.transform(x)

