import json
import math

import numpy as np
import pytest

from elmsol import _kernels
from elmsol.dataset import fit_scaler
from elmsol.elm import (
    SCHEMA_VERSION,
    ElmConfig,
    ElmModel,
    hidden_output,
    init_random,
    load_model,
    model_to_dict,
    predict,
    save_model,
    solve_pinv,
    train,
)
from elmsol.errors import (
    ChecksumError,
    ConfigError,
    InvalidInputError,
    ModelFormatError,
    ModelVersionError,
    ShapeError,
    SolverError,
)


def scalar_hidden(W, b, X):
    """Entry-by-entry reference for the hidden layer."""
    H = np.empty((X.shape[0], W.shape[0]))
    for j in range(X.shape[0]):
        for i in range(W.shape[0]):
            z = b[i] + sum(W[i, k] * X[j, k] for k in range(X.shape[1]))
            H[j, i] = 1.0 / (1.0 + math.exp(-z))
    return H


def normal_equation_beta(W, b, X_scaled, t, C):
    H = scalar_hidden(W, b, X_scaled)
    A = H.T @ H + np.eye(H.shape[1]) / C
    return np.linalg.solve(A, H.T @ t)


def random_instance(seed, N, L, C=None, n=8):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-5, 5, size=(N, n))
    t = rng.normal(size=N)
    return ElmConfig(hidden_nodes=L, regularization=C, seed=seed), X, t


# -- config ---------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(hidden_nodes=0),
    dict(weight_range=(1.0, -1.0)),
    dict(regularization=0.0),
    dict(regularization=-2.0),
    dict(activation="tanh"),
    dict(seed=-1),
    dict(seed=2**64),
])
def test_config_rejections(kwargs):
    with pytest.raises(ConfigError):
        ElmConfig(**kwargs)


# -- random init ------------------------------------------------------------------

def test_init_random_deterministic():
    cfg = ElmConfig(hidden_nodes=7, seed=11)
    a, b = init_random(cfg), init_random(cfg)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_init_random_shapes():
    W, b = init_random(ElmConfig(hidden_nodes=1, seed=0))
    assert W.shape == (1, 8) and b.shape == (1,)


def test_init_random_uniform_statistics():
    W, b = init_random(ElmConfig(hidden_nodes=1250, seed=5))  # 10^4 weights
    assert W.size == 10_000
    assert abs(W.mean()) < 0.05
    assert W.min() >= -1.0 and W.max() <= 1.0
    assert b.min() >= -1.0 and b.max() <= 1.0


def test_init_random_draw_order():
    cfg = ElmConfig(hidden_nodes=3, seed=8, weight_range=(-2, 2), bias_range=(0, 1))
    g = np.random.Generator(np.random.PCG64(8))
    W_ref = g.uniform(-2, 2, size=(3, 8))
    b_ref = g.uniform(0, 1, size=3)
    W, b = init_random(cfg)
    np.testing.assert_array_equal(W, W_ref)
    np.testing.assert_array_equal(b, b_ref)


# -- hidden layer -------------------------------------------------------------------

def test_hidden_zero_weights_is_half():
    H = hidden_output(np.zeros((4, 8)), np.random.default_rng(0).normal(size=(5, 8)), np.zeros(4))
    np.testing.assert_array_equal(H, 0.5)


def test_hidden_unit_vector_at_origin():
    W = np.zeros((1, 8))
    W[0, 0] = 1.0
    assert hidden_output(W, np.zeros((1, 8)), np.zeros(1))[0, 0] == 0.5


def test_hidden_matches_scalar_loop(rng):
    X = rng.uniform(-1, 1, size=(3, 8))
    W, b = rng.uniform(-1, 1, size=(4, 8)), rng.uniform(-1, 1, size=4)
    np.testing.assert_allclose(hidden_output(W, X, b), scalar_hidden(W, b, X), rtol=0, atol=1e-14)


def test_hidden_backends_agree(rng):
    X = rng.uniform(-1, 1, size=(50, 8))
    W, b = rng.uniform(-1, 1, size=(9, 8)), rng.uniform(-1, 1, size=9)
    ref = _kernels.sigmoid_hidden_numpy(X, W, b)
    if _kernels.HAVE_NUMBA:
        np.testing.assert_allclose(_kernels.sigmoid_hidden_numba(X, W, b), ref, rtol=0, atol=1e-14)


def test_hidden_shape_error():
    with pytest.raises(ShapeError):
        hidden_output(np.zeros((2, 8)), np.zeros((3, 7)), np.zeros(2))


def test_hidden_entries_strictly_inside_unit_interval(rng):
    X = rng.uniform(-1, 1, size=(200, 8))
    W, b = init_random(ElmConfig(hidden_nodes=40, seed=3))
    H = hidden_output(W, X, b)
    assert (H > 0).all() and (H < 1).all()


# -- training -----------------------------------------------------------------------

def test_constant_target_reproduced_when_interpolating():
    rng = np.random.default_rng(1)
    for L in (10, 15, 30):
        X = rng.uniform(-3, 3, size=(10, 8))
        model = train(ElmConfig(hidden_nodes=L, seed=L), X, np.full(10, 0.37))
        np.testing.assert_allclose(predict(model, X), 0.37, atol=1e-8)


@pytest.mark.parametrize("L", [1, 3, 30])
def test_constant_target_reproduced_on_identical_rows(L):
    X = np.tile(np.arange(8.0), (12, 1))
    model = train(ElmConfig(hidden_nodes=L, seed=4), X, np.full(12, -2.5))
    np.testing.assert_allclose(predict(model, X), -2.5, atol=1e-8)


def test_exact_interpolation_square():
    for seed in range(10):
        cfg, X, t = random_instance(seed, 20, 20)
        model = train(cfg, X, t)
        assert np.max(np.abs(predict(model, X) - t)) <= 1e-6


def test_regularized_matches_normal_equation_oracle():
    cfg, X, t = random_instance(77, 50, 10, C=10.0)
    model = train(cfg, X, t)
    W, b = init_random(cfg)
    ref = normal_equation_beta(W, b, model.scaler.transform(X), t, 10.0)
    np.testing.assert_allclose(model.output_weights[:, 0], ref, rtol=1e-8, atol=0)


def test_regularized_first_order_condition():
    cfg, X, t = random_instance(5, 50, 10, C=10.0)
    model = train(cfg, X, t)
    H = hidden_output(model, model.scaler.transform(X))
    beta = model.output_weights[:, 0]
    grad = H.T @ (H @ beta - t) + beta / 10.0
    assert np.linalg.norm(grad) <= 1e-8 * np.linalg.norm(H.T @ t)


def test_in_sample_mse_nonincreasing_in_C():
    rng = np.random.default_rng(21)
    X, t = rng.uniform(-2, 2, size=(80, 8)), rng.normal(size=80)
    errs = []
    for C in (0.1, 1.0, 10.0, 100.0):
        model = train(ElmConfig(hidden_nodes=25, regularization=C, seed=9), X, t)
        errs.append(np.mean((predict(model, X) - t) ** 2))
    assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))


def test_large_C_approaches_pseudoinverse():
    rng = np.random.default_rng(2)
    X, t = rng.uniform(-1, 1, size=(200, 8)), rng.normal(size=200)
    # three wide-range units keep H well conditioned
    kw = dict(hidden_nodes=3, seed=17, weight_range=(-4, 4))
    exact = train(ElmConfig(**kw), X, t).output_weights
    ridge = train(ElmConfig(regularization=1e12, **kw), X, t).output_weights
    assert np.linalg.norm(ridge - exact) <= 1e-6 * np.linalg.norm(exact)


def test_training_is_bitwise_deterministic():
    cfg, X, t = random_instance(3, 60, 12)
    a, b = train(cfg, X, t), train(cfg, X, t)
    assert a.output_weights.tobytes() == b.output_weights.tobytes()


def test_multi_output_structure():
    cfg, X, t = random_instance(4, 40, 6)
    T = np.column_stack([t, 2 * t])
    model = train(cfg, X, T)
    assert model.output_weights.shape == (6, 2)
    np.testing.assert_allclose(predict(model, X)[:, 1], 2 * predict(model, X)[:, 0], rtol=1e-10)


def test_non_finite_rejected():
    cfg, X, t = random_instance(0, 10, 3)
    X[2, 3] = np.nan
    with pytest.raises(InvalidInputError):
        train(cfg, X, t)


def test_singular_regularized_system_reports_condition(monkeypatch):
    import scipy.linalg

    def boom(*a, **k):
        raise np.linalg.LinAlgError("not positive definite")

    monkeypatch.setattr(scipy.linalg, "cho_factor", boom)
    cfg, X, t = random_instance(0, 10, 3, C=1.0)
    with pytest.raises(SolverError) as exc:
        train(cfg, X, t)
    assert exc.value.condition is not None


def test_pinv_cutoff_drops_dependent_columns():
    h = np.linspace(0.1, 0.9, 10)
    H = np.column_stack([h, h])  # rank 1
    beta = solve_pinv(H, h[:, None])
    np.testing.assert_allclose(beta[:, 0], [0.5, 0.5], rtol=1e-12)


# -- prediction ---------------------------------------------------------------------

def test_predict_empty_and_repeated_rows():
    cfg, X, t = random_instance(1, 30, 5)
    model = train(cfg, X, t)
    assert predict(model, np.zeros((0, 8))).shape == (0,)
    out = predict(model, np.vstack([X[:1]] * 4))
    assert np.all(out == out[0])


def test_predict_shape_error():
    cfg, X, t = random_instance(1, 30, 5)
    with pytest.raises(ShapeError):
        predict(train(cfg, X, t), np.zeros((2, 7)))


def test_model_is_immutable():
    cfg, X, t = random_instance(1, 30, 5)
    model = train(cfg, X, t)
    with pytest.raises(ValueError):
        model.output_weights[0, 0] = 1.0


# -- persistence ----------------------------------------------------------------------

@pytest.fixture
def trained(tmp_path):
    cfg, X, t = random_instance(8, 60, 9, C=50.0)
    model = train(cfg, X, t)
    path = tmp_path / "m.json"
    save_model(model, path)
    return model, path


def test_round_trip_bitwise(trained):
    model, path = trained
    back = load_model(path)
    Xq = np.random.default_rng(0).uniform(-6, 6, size=(100, 8))
    assert predict(model, Xq).tobytes() == predict(back, Xq).tobytes()
    assert back.config == model.config and back.scaler == model.scaler


def test_truncated_file(trained):
    _, path = trained
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_version_zero_rejected(trained):
    _, path = trained
    doc = json.loads(path.read_text())
    doc["schema_version"] = 0
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelVersionError):
        load_model(path)


def test_checksum_failure(trained):
    _, path = trained
    doc = json.loads(path.read_text())
    doc["biases"]["data"][0] = repr(float(doc["biases"]["data"][0]) + 1e-9)
    path.write_text(json.dumps(doc))
    with pytest.raises(ChecksumError):
        load_model(path)


def test_model_document_fields(trained):
    model, _ = trained
    doc = model_to_dict(model)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert {"config", "scaler", "input_weights", "biases", "output_weights", "checksum"} <= set(doc)
    assert all(isinstance(v, str) for v in doc["input_weights"]["data"])


def test_model_shape_consistency():
    scaler = fit_scaler(np.zeros((2, 8)))
    with pytest.raises(ShapeError):
        ElmModel(np.zeros((3, 8)), np.zeros(2), np.zeros((3, 1)), scaler, ElmConfig(hidden_nodes=3))
