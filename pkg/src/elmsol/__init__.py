"""Extreme learning machine toolkit for hydrocarbon solubility in brines."""

from ._kernels import BACKEND
from .dataset import (
    FEATURE_NAMES,
    Dataset,
    IonSpec,
    Scaler,
    SolubilityRecord,
    apply_scaler,
    feature_vector,
    fit_scaler,
    ionic_strength,
    load_csv,
    load_features_csv,
    split,
    write_csv,
)
from .diagnostics import (
    LeverageReport,
    SensitivityReport,
    critical_leverage,
    hat_diagonal,
    hat_matrix,
    relevancy_factor,
    sensitivity_report,
    standardized_residuals,
    williams_report,
)
from .elm import ElmConfig, ElmModel, hidden_output, init_random, load_model, predict, save_model, train
from .metrics import EvalReport, evaluate, mre, mse, r_squared, rmse
from .selection import SweepPoint, SweepReport, mix_seed, sweep
from .synth import SynthSpec, generate

__version__ = "0.1.0"
