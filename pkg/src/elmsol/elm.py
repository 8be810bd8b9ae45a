"""Extreme learning machine: random sigmoid hidden layer, closed-form output layer.

Hidden unit i maps a scaled input x to g(a_i . x + b_i) with the logistic
g(z) = 1 / (1 + exp(-z)). Only the output weights beta are fitted:

* ``regularization=C`` solves (H^T H + I/C) beta = H^T t by Cholesky, the
  minimizer of 1/2 ||beta||^2 + C/2 ||t - H beta||^2;
* ``regularization=None`` takes beta = pinv(H) t from a thin SVD, dropping
  singular values at or below eps * max(N, L) * sigma_max.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from . import _kernels
from .dataset import N_FEATURES, Scaler, fit_scaler
from .errors import (
    ChecksumError,
    ConfigError,
    InvalidInputError,
    ModelFormatError,
    ModelVersionError,
    ShapeError,
    SolverError,
)

SCHEMA_VERSION = 1
MODEL_FORMAT = "elmsol-model"
SUPPORTED_ACTIVATIONS = ("sigmoid",)
UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ElmConfig:
    hidden_nodes: int = 30
    regularization: float | None = None
    weight_range: tuple = (-1.0, 1.0)
    seed: int = 0
    activation: str = "sigmoid"
    bias_range: tuple | None = None  # None: same as weight_range

    def __post_init__(self):
        object.__setattr__(self, "weight_range", tuple(float(v) for v in self.weight_range))
        if self.bias_range is not None:
            object.__setattr__(self, "bias_range", tuple(float(v) for v in self.bias_range))
        if int(self.hidden_nodes) != self.hidden_nodes or self.hidden_nodes < 1:
            raise ConfigError(f"hidden_nodes must be a positive integer, got {self.hidden_nodes}")
        for name, rng in (("weight_range", self.weight_range), ("bias_range", self.bias_range)):
            if rng is not None and (len(rng) != 2 or not rng[0] < rng[1]):
                raise ConfigError(f"{name} must be (lo, hi) with lo < hi, got {rng}")
        if self.regularization is not None and not (self.regularization > 0 and np.isfinite(self.regularization)):
            raise ConfigError(f"regularization C must be a positive finite number, got {self.regularization}")
        if not 0 <= int(self.seed) <= UINT64_MAX:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")
        if self.activation not in SUPPORTED_ACTIVATIONS:
            raise ConfigError(f"unsupported activation {self.activation!r}; only 'sigmoid' is implemented")

    @property
    def effective_bias_range(self):
        return self.bias_range if self.bias_range is not None else self.weight_range

    def to_dict(self):
        return {
            "hidden_nodes": int(self.hidden_nodes),
            "regularization": None if self.regularization is None else repr(float(self.regularization)),
            "weight_range": [repr(v) for v in self.weight_range],
            "bias_range": None if self.bias_range is None else [repr(v) for v in self.bias_range],
            "seed": int(self.seed),
            "activation": self.activation,
        }

    @classmethod
    def from_dict(cls, d):
        reg = d.get("regularization")
        bias = d.get("bias_range")
        return cls(
            hidden_nodes=int(d["hidden_nodes"]),
            regularization=None if reg is None else float(reg),
            weight_range=tuple(float(v) for v in d["weight_range"]),
            seed=int(d["seed"]),
            activation=d.get("activation", "sigmoid"),
            bias_range=None if bias is None else tuple(float(v) for v in bias),
        )


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ElmModel:
    input_weights: np.ndarray   # L x n
    biases: np.ndarray          # L
    output_weights: np.ndarray  # L x m
    scaler: Scaler
    config: ElmConfig

    def __post_init__(self):
        for name in ("input_weights", "biases", "output_weights"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        W, b, beta = self.input_weights, self.biases, self.output_weights
        if W.ndim != 2 or b.shape != (W.shape[0],) or beta.ndim != 2 or beta.shape[0] != W.shape[0]:
            raise ShapeError(f"inconsistent model shapes W{W.shape} b{b.shape} beta{beta.shape}")
        if W.shape[1] != self.scaler.n_features:
            raise ShapeError(f"model expects {W.shape[1]} inputs but scaler has {self.scaler.n_features}")
        if not (np.isfinite(W).all() and np.isfinite(b).all() and np.isfinite(beta).all()):
            raise InvalidInputError("model contains non-finite parameters")

    @property
    def hidden_nodes(self):
        return self.input_weights.shape[0]

    @property
    def n_inputs(self):
        return self.input_weights.shape[1]

    @property
    def n_outputs(self):
        return self.output_weights.shape[1]

    def predict(self, X_raw):
        return predict(self, X_raw)


def init_random(config: ElmConfig, n_inputs: int = N_FEATURES):
    """Draw (input_weights, biases) uniformly from the configured ranges.

    One PCG64 stream seeded with ``config.seed``: the L x n weights first in
    row-major order, then the L biases.
    """
    rng = np.random.Generator(np.random.PCG64(int(config.seed)))
    L = int(config.hidden_nodes)
    lo, hi = config.weight_range
    W = rng.uniform(lo, hi, size=(L, n_inputs))
    blo, bhi = config.effective_bias_range
    b = rng.uniform(blo, bhi, size=L)
    return W, b


def hidden_output(weights, X, biases=None):
    """Hidden-layer matrix H (N x L) for already-scaled inputs.

    ``weights`` is either an :class:`ElmModel` or the L x n input-weight
    matrix, in which case ``biases`` is required.
    """
    if isinstance(weights, ElmModel):
        W, b = weights.input_weights, weights.biases
    else:
        if biases is None:
            raise InvalidInputError("biases are required when passing a raw weight matrix")
        W, b = np.asarray(weights, dtype=np.float64), np.asarray(biases, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != W.shape[1]:
        raise ShapeError(f"expected an N x {W.shape[1]} input matrix, got shape {X.shape}")
    if W.shape[0] != b.shape[0]:
        raise ShapeError(f"{W.shape[0]} weight rows but {b.shape[0]} biases")
    return _kernels.sigmoid_hidden(X, W, b)


def solve_regularized(H, T, C):
    """beta = (H^T H + I/C)^{-1} H^T T via Cholesky."""
    A = H.T @ H
    A[np.diag_indices_from(A)] += 1.0 / C
    try:
        factor = scipy.linalg.cho_factor(A, lower=False, check_finite=False)
    except np.linalg.LinAlgError:
        cond = float(np.linalg.cond(A))
        raise SolverError(f"regularized normal matrix is not numerically positive definite "
                          f"(condition estimate {cond:.3e}); lower C", condition=cond) from None
    return scipy.linalg.cho_solve(factor, H.T @ T, check_finite=False)


def pinv_cutoff(shape, sigma_max):
    return np.finfo(np.float64).eps * max(shape) * sigma_max


def solve_pinv(H, T):
    """Minimum-norm least squares pinv(H) @ T through a thin SVD."""
    U, s, Vt = np.linalg.svd(H, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((H.shape[1], T.shape[1]))
    keep = s > pinv_cutoff(H.shape, s[0])
    coef = (U[:, keep].T @ T) / s[keep, None]
    return Vt[keep].T @ coef


def train(config: ElmConfig, X, t, scaler: Scaler | None = None) -> ElmModel:
    """Fit output weights on raw inputs ``X`` (N x n) and targets ``t``.

    ``scaler`` defaults to a min-max scaler fitted on ``X``. ``t`` may be a
    vector or an N x m matrix.
    """
    X = np.asarray(X, dtype=np.float64)
    T = np.asarray(t, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-D, got shape {X.shape}")
    if T.ndim == 1:
        T = T[:, None]
    if T.ndim != 2 or T.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} input rows but targets of shape {np.shape(t)}")
    if X.shape[0] < 1:
        raise InvalidInputError("training needs at least one row")
    if not (np.isfinite(X).all() and np.isfinite(T).all()):
        raise InvalidInputError("training data contains non-finite values")
    if scaler is None:
        scaler = fit_scaler(X)
    elif scaler.n_features != X.shape[1]:
        raise ShapeError(f"scaler has {scaler.n_features} features, X has {X.shape[1]}")

    W, b = init_random(config, X.shape[1])
    H = hidden_output(W, scaler.transform(X), b)
    if config.regularization is None:
        beta = solve_pinv(H, T)
    else:
        beta = solve_regularized(H, T, float(config.regularization))
    return ElmModel(W, b, beta, scaler, config)


def predict(model: ElmModel, X_raw) -> np.ndarray:
    """Scale, map through the hidden layer, apply beta.

    Returns a K-vector for single-output models and K x m otherwise.
    """
    X = np.asarray(X_raw, dtype=np.float64)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, model.n_inputs)
    if X.ndim != 2 or X.shape[1] != model.n_inputs:
        raise ShapeError(f"expected a K x {model.n_inputs} matrix, got shape {X.shape}")
    if X.shape[0] == 0:
        out = np.zeros((0, model.n_outputs))
    else:
        out = hidden_output(model, model.scaler.transform(X)) @ model.output_weights
    return out[:, 0] if model.n_outputs == 1 else out


# -- persistence ----------------------------------------------------------------

def _encode(a):
    a = np.asarray(a, dtype=np.float64)
    return {"shape": list(a.shape), "data": [repr(float(v)) for v in a.ravel(order="C")]}


def _decode(d, name):
    try:
        shape = tuple(int(s) for s in d["shape"])
        data = np.array([float(v) for v in d["data"]], dtype=np.float64)
        return data.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {name!r} is malformed: {exc}") from None


def _checksum(payload):
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def model_to_dict(model: ElmModel) -> dict:
    payload = {
        "scaler": model.scaler.to_dict(),
        "input_weights": _encode(model.input_weights),
        "biases": _encode(model.biases),
        "output_weights": _encode(model.output_weights),
    }
    return {
        "format": MODEL_FORMAT,
        "schema_version": SCHEMA_VERSION,
        "config": model.config.to_dict(),
        **payload,
        "checksum": _checksum(payload),
    }


def model_from_dict(doc: dict) -> ElmModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelVersionError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    missing = [k for k in ("config", "scaler", "input_weights", "biases", "output_weights", "checksum")
               if k not in doc]
    if missing:
        raise ModelFormatError(f"model file lacks fields {missing}")
    payload = {k: doc[k] for k in ("scaler", "input_weights", "biases", "output_weights")}
    if _checksum(payload) != doc["checksum"]:
        raise ChecksumError("numeric payload does not match its checksum")
    try:
        config = ElmConfig.from_dict(doc["config"])
        scaler = Scaler.from_dict(doc["scaler"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad config or scaler: {exc}") from None
    return ElmModel(
        _decode(doc["input_weights"], "input_weights"),
        _decode(doc["biases"], "biases"),
        _decode(doc["output_weights"], "output_weights"),
        scaler,
        config,
    )


def save_model(model: ElmModel, path) -> None:
    text = json.dumps(model_to_dict(model), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path) -> ElmModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    if isinstance(doc, dict) and doc.get("format", MODEL_FORMAT) != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: unexpected format tag {doc.get('format')!r}")
    return model_from_dict(doc)


def with_seed(config: ElmConfig, seed: int, hidden_nodes: int | None = None) -> ElmConfig:
    changes = {"seed": seed}
    if hidden_nodes is not None:
        changes["hidden_nodes"] = hidden_nodes
    return dataclasses.replace(config, **changes)
