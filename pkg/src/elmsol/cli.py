"""Command-line interface: ``elmsol <subcommand>``.

Exit codes: 0 success, 1 computation error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import fit_scaler, load_csv, load_features_csv, split, write_csv
from .diagnostics import sensitivity_report, williams_report, write_leverage_csv
from .elm import ElmConfig, load_model, predict, save_model, train
from .errors import (
    CsvParseError,
    DegenerateError,
    ElmSolError,
    EmptyDatasetError,
    ModelFormatError,
    RecordValidationError,
    SchemaError,
)
from .metrics import evaluate, format_table
from .selection import sweep
from .synth import SynthSpec, generate

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2
_IO_ERRORS = (OSError, SchemaError, CsvParseError, RecordValidationError, EmptyDatasetError, ModelFormatError)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    train_fraction: float = 0.75
    hidden_nodes: int = 30
    regularization: float | None = None
    node_range: tuple = (1, 60, 1)  # inclusive start, stop, step
    repeats: int = 5
    percent: bool = False
    ions: bool = False
    n_points: int = 1000
    noise: float = 0.05
    workers: int = 1

    def elm_config(self, **overrides):
        kw = dict(hidden_nodes=self.hidden_nodes, regularization=self.regularization, seed=self.seed)
        kw.update(overrides)
        return ElmConfig(**kw)

    def nodes(self):
        start, stop, step = self.node_range
        return range(start, stop + 1, step)


class UsageError(Exception):
    pass


def _parse_node_range(text):
    parts = [int(p) for p in str(text).split(":")]
    if len(parts) == 2:
        parts.append(1)
    if len(parts) != 3 or parts[2] < 1 or parts[0] < 1 or parts[1] < parts[0]:
        raise argparse.ArgumentTypeError(f"expected START:STOP[:STEP] with 1 <= START <= STOP, got {text!r}")
    return tuple(parts)


def _load_run_config(path):
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: invalid JSON ({exc})") from None
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"config file {path}: unknown keys {sorted(unknown)}")
    if "node_range" in doc:
        nr = doc["node_range"]
        doc["node_range"] = _parse_node_range(nr if isinstance(nr, str) else ":".join(map(str, nr)))
    return doc


def resolve_config(args) -> RunConfig:
    """RunConfig defaults, overridden by --config, overridden by explicit flags."""
    values = _load_run_config(args.config)
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def _load(args, cfg, path=None):
    return load_csv(path or args.data, percent=cfg.percent, ions=cfg.ions)


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- subcommands ------------------------------------------------------------------

def cmd_gen_synth(args, cfg):
    data = generate(SynthSpec(n_points=cfg.n_points, seed=cfg.seed, noise=cfg.noise))
    write_csv(data, args.output)
    print(f"wrote {len(data)} synthetic records to {args.output}")


def cmd_train(args, cfg):
    data = _load(args, cfg)
    tr, te = split(data, cfg.train_fraction, cfg.seed)
    model = train(cfg.elm_config(), tr.features(), tr.targets(), fit_scaler(tr))
    save_model(model, args.model_out)
    reports = {
        "Training": evaluate(tr.targets(), predict(model, tr.features())),
        "Testing": evaluate(te.targets(), predict(model, te.features())),
    }
    report_dir = Path(args.report_dir) if args.report_dir else Path(args.model_out).parent
    report_dir.mkdir(parents=True, exist_ok=True)
    _write_json(report_dir / "train_report.json", reports["Training"].to_dict())
    _write_json(report_dir / "test_report.json", reports["Testing"].to_dict())
    print(format_table(reports))


def cmd_predict(args, cfg):
    model = load_model(args.model)
    X = load_features_csv(args.input, percent=cfg.percent, ions=cfg.ions)
    y = predict(model, X)
    with Path(args.output).open("w", encoding="utf-8") as fh:
        fh.write("index,predicted_solubility\n")
        for i, v in enumerate(np.ravel(y)):
            fh.write(f"{i},{float(v)!r}\n")


def cmd_evaluate(args, cfg):
    model = load_model(args.model)
    data = _load(args, cfg)
    report = evaluate(data.targets(), predict(model, data.features()))
    if args.output:
        _write_json(args.output, report.to_dict())
    print(format_table({"Dataset": report}))


def cmd_sweep(args, cfg):
    data = _load(args, cfg)
    tr, te = split(data, cfg.train_fraction, cfg.seed)
    report = sweep(tr, te, cfg.nodes(), cfg.repeats, cfg.elm_config(), workers=cfg.workers)
    report.to_csv(args.output)
    curve = report.mean_curve()
    print(f"selected hidden nodes: {report.selected_nodes} "
          f"(mean test RMSE {curve[report.selected_nodes][1]:.6g}; rule {report.selection_rule})")
    if report.failures:
        print(f"{len(report.failures)} sweep cells failed and were excluded", file=sys.stderr)


def cmd_diagnose(args, cfg):
    data = _load(args, cfg)
    tr, _ = split(data, cfg.train_fraction, cfg.seed)
    if args.model:
        model = load_model(args.model)
    else:
        model = train(cfg.elm_config(), tr.features(), tr.targets(), fit_scaler(tr))
    target = tr if args.train_only else data
    X = target.features()
    design = X if args.raw_inputs else model.scaler.transform(X)
    try:
        report = williams_report(design, target.targets(), predict(model, X), intercept=args.intercept)
    except DegenerateError as exc:
        raise DegenerateError(
            f"{exc}. The model reproduces these targets exactly, so residuals carry no spread; "
            "run diagnose on noisy measurements or held-out data.") from None
    side = write_leverage_csv(report, args.output)
    counts = report.header()["counts"]
    print(f"H* = {report.critical_leverage:.6g}; valid {counts['valid']}, outlier {counts['outlier']}, "
          f"high leverage {counts['high_leverage']} of {report.n} (header: {side})")


def cmd_sensitivity(args, cfg):
    report = sensitivity_report(_load(args, cfg))
    report.to_csv(args.output)
    for name, r in report.factors.items():
        print(f"{name:<16} {'undefined' if r is None else f'{r:+.4f}'}")


# -- parser -----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="elmsol", description="ELM hydrocarbon solubility toolkit")
    p.add_argument("--seed", type=int, default=None, help="seed for split, ELM init and generator (default 0)")
    p.add_argument("--config", default=None, help="JSON file with RunConfig fields")
    sub = p.add_subparsers(dest="command", required=True)

    def data_flags(sp, data=True):
        if data:
            sp.add_argument("--data", required=True, help="solubility CSV")
        sp.add_argument("--percent", action="store_const", const=True, default=None,
                        help="gas mole fractions given in percent (0-100)")
        sp.add_argument("--ions", action="store_const", const=True, default=None,
                        help="CSV carries cation/anion columns instead of ionic_strength")

    def model_flags(sp):
        sp.add_argument("--train-fraction", dest="train_fraction", type=float, default=None)
        sp.add_argument("--hidden-nodes", dest="hidden_nodes", type=int, default=None)
        sp.add_argument("--C", dest="regularization", type=float, default=None,
                        help="ridge parameter; omit for the plain pseudoinverse")

    sp = sub.add_parser("gen-synth", help="write a synthetic solubility CSV")
    sp.add_argument("--n", dest="n_points", type=int, default=None)
    sp.add_argument("--noise", type=float, default=None, help="relative noise std (default 0.05)")
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_gen_synth)

    sp = sub.add_parser("train", help="split, train, write model and train/test reports")
    data_flags(sp)
    model_flags(sp)
    sp.add_argument("--model-out", required=True)
    sp.add_argument("--report-dir", default=None, help="directory for train_report.json/test_report.json")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="predict solubility for an input CSV")
    sp.add_argument("--model", required=True)
    sp.add_argument("--input", required=True, help="CSV with the feature columns")
    sp.add_argument("--output", required=True)
    data_flags(sp, data=False)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("evaluate", help="score a model on a labelled CSV")
    sp.add_argument("--model", required=True)
    data_flags(sp)
    sp.add_argument("--output", default=None, help="EvalReport JSON path")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("sweep", help="hidden-node sweep (train/test RMSE per count and repeat)")
    data_flags(sp)
    model_flags(sp)
    sp.add_argument("--nodes", dest="node_range", type=_parse_node_range, default=None,
                    help="START:STOP[:STEP], inclusive (default 1:60)")
    sp.add_argument("--repeats", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("diagnose", help="leverage / Williams-plot data")
    data_flags(sp)
    model_flags(sp)
    sp.add_argument("--model", default=None, help="trained model; otherwise one is trained on the split")
    sp.add_argument("--train-only", action="store_true", help="use the training split instead of all points")
    sp.add_argument("--raw-inputs", action="store_true", help="leverage on unscaled features")
    sp.add_argument("--intercept", action="store_true", help="add a column of ones to the design matrix")
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("sensitivity", help="relevancy factor per input")
    data_flags(sp)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_sensitivity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args, cfg)
    except FileNotFoundError as exc:
        print(f"elmsol: error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"elmsol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IO_ERRORS as exc:
        print(f"elmsol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ElmSolError as exc:
        print(f"elmsol: error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
