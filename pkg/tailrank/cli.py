"""Command-line entry point.

    python -m tailrank <command> [options]

Commands: train, predict, eval, compare, demo-completion, bound, synth, stats.
Exit status: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Sequence

from pydantic import BaseModel, ValidationError

from . import __version__
from .bounds import bound_report
from .completion import CompletionProblem, demo_problem, find_minimizer, norm_surface
from .config import DEFAULT_C, DEFAULT_GAMMA, DEFAULT_MAX_ITERS, DEFAULT_REL_TOL, GENERATOR_NAME, configure_logging
from .data import MultiLabelDataset, concat_datasets, load_arff, load_label_xml, load_model, save_model, stats, synth_low_rank, write_arff
from .errors import TailRankError, UsageError
from .matrix import numerical_rank
from .metrics import evaluate
from .solver import SolverConfig, fit, predict, resolve_theta_fraction
from .utils import parse_float_list, parse_int_list, write_csv, write_key_values

logger = logging.getLogger(__name__)

Command = Literal["train", "predict", "eval", "compare", "demo-completion", "bound", "synth", "stats"]

# options naming files that must exist before any computation starts
INPUT_PATH_OPTIONS = ("data", "model", "label_xml")


class RunConfig(BaseModel):
    command: Command
    options: Dict[str, Any]

    def settings(self) -> Dict[str, Any]:
        """Resolved options for report headers; paths as given."""
        resolved = {"command": self.command, "version": __version__}
        for key, value in self.options.items():
            resolved[key] = [str(v) for v in value] if isinstance(value, list) else value
        return resolved


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _gamma(text: str) -> float:
    value = float(text)
    if not value > 1.0:
        raise argparse.ArgumentTypeError(f"gamma must be > 1, got {text}")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def _add_data_options(p: argparse.ArgumentParser, multiple: bool = False) -> None:
    if multiple:
        p.add_argument("--data", type=Path, nargs="+", required=True, help="ARFF file(s); several are merged")
    else:
        p.add_argument("--data", type=Path, required=True, help="ARFF file")
    p.add_argument("--labels", type=int, required=True, help="number of label attributes")
    p.add_argument("--labels-first", action="store_true", help="labels are the first attributes")
    p.add_argument("--label-xml", type=Path, help="Mulan XML file naming the label attributes")


def _add_theta_options(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--theta", type=_count, help="number of protected singular values")
    group.add_argument("--theta-frac", type=_fraction, help="theta as a fraction of L")


def _add_solver_options(p: argparse.ArgumentParser, with_reg: bool = True) -> None:
    if with_reg:
        p.add_argument("--reg", choices=["tail", "trace", "frobenius", "none"], default="tail")
        _add_theta_options(p)
    p.add_argument("--c", type=float, default=DEFAULT_C, help="regularization weight C")
    p.add_argument("--t0", type=_positive_float, help="initial step parameter (default 2*sigma_max(X)^2)")
    p.add_argument("--gamma", type=_gamma, default=DEFAULT_GAMMA)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--rel-tol", type=_positive_float, default=DEFAULT_REL_TOL)
    p.add_argument("--prox-rule", choices=["conditional", "partial"], default="conditional")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tailrank", description="Tail-singular-value regularized multi-label learning")
    parser.add_argument("--version", action="version", version=f"tailrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a predictor and write the model")
    _add_data_options(p, multiple=True)
    _add_solver_options(p)
    p.add_argument("--out", type=Path, required=True, help="model file")
    p.add_argument("--trace", type=Path, help="convergence trace CSV")
    p.add_argument("--report", type=Path, help="training report (stdout when omitted)")

    p = sub.add_parser("predict", help="write the score matrix for a dataset")
    p.add_argument("--model", type=Path, required=True)
    _add_data_options(p)
    p.add_argument("--out", type=Path, required=True, help="score CSV")

    p = sub.add_parser("eval", help="evaluate a model on a dataset")
    p.add_argument("--model", type=Path, required=True)
    _add_data_options(p)
    p.add_argument("--k", type=parse_int_list, default=[1, 3, 5], help="top-k cut-offs, e.g. 1,3,5")
    p.add_argument("--out", type=Path, help="metric report (stdout when omitted)")
    p.add_argument("--csv", type=Path, help="metric CSV")

    p = sub.add_parser("compare", help="tail regularizer over theta fractions vs. trace and Frobenius")
    p.add_argument("--train", type=Path, nargs="+", required=True, help="training ARFF file(s)")
    p.add_argument("--test", type=Path, required=True, help="test ARFF file")
    p.add_argument("--labels", type=int, required=True)
    p.add_argument("--labels-first", action="store_true")
    p.add_argument("--label-xml", type=Path)
    p.add_argument("--theta-fracs", type=parse_float_list, default=[0.2, 0.4, 0.6, 0.8])
    p.add_argument("--k", type=parse_int_list, default=[1, 3, 5], help="top-k cut-offs; values above L are dropped")
    _add_solver_options(p, with_reg=False)
    p.add_argument("--out", type=Path, required=True, help="comparison CSV")

    p = sub.add_parser("demo-completion", help="spectral-norm completion of the 3x4 example")
    p.add_argument("--norm", choices=["trace", "tail"], default="trace")
    p.add_argument("--theta", type=_count, default=2)
    p.add_argument("--lo", type=float, default=1.0)
    p.add_argument("--hi", type=float, default=3.0)
    p.add_argument("--step", type=_positive_float, default=0.05)
    p.add_argument("--refine", type=_count, default=3)
    p.add_argument("--out", type=Path, required=True, help="contour CSV")
    p.add_argument("--report", type=Path, help="minimizer report (stdout when omitted)")

    p = sub.add_parser("bound", help="generalization-bound diagnostics for a model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--n", type=int, required=True, help="training-set size")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--r", type=float, default=1.0)
    _add_theta_options(p)
    p.add_argument("--out", type=Path, help="bound report (stdout when omitted)")

    p = sub.add_parser("synth", help="write a planted low-rank dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-frac", type=_fraction, default=0.25)
    p.add_argument("--sparse", action="store_true", help="write sparse ARFF rows")
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("stats", help="dataset characteristics")
    _add_data_options(p, multiple=True)
    p.add_argument("--out", type=Path, help="stats report (stdout when omitted)")

    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    """
    Map argv onto a RunConfig.

    Raises:
        UsageError: unknown or conflicting flags, invalid values, missing inputs
    """
    namespace = build_parser().parse_args(list(argv))
    options = {key: value for key, value in vars(namespace).items() if key != "command"}
    config = RunConfig(command=namespace.command, options=options)

    for key in INPUT_PATH_OPTIONS + ("train", "test"):
        value = options.get(key)
        if value is None:
            continue
        for path in value if isinstance(value, list) else [value]:
            if not Path(path).is_file():
                raise UsageError(f"--{key.replace('_', '-')}: no such file {path}")
    return config


def _load(paths, options: Dict[str, Any]):
    label_names = load_label_xml(options["label_xml"]) if options.get("label_xml") else None
    parts = [
        load_arff(path, options["labels"], not options.get("labels_first", False), label_names)
        for path in (paths if isinstance(paths, list) else [paths])
    ]
    return parts[0] if len(parts) == 1 else concat_datasets(parts)


def _solver_config(options: Dict[str, Any], regularizer: str, theta: Optional[int] = None,
                   theta_frac: Optional[float] = None) -> SolverConfig:
    if regularizer == "tail" and theta is None and theta_frac is None:
        raise UsageError("--reg tail needs --theta or --theta-frac")
    return SolverConfig(
        regularizer=regularizer,
        theta=theta if regularizer == "tail" else None,
        theta_frac=theta_frac if regularizer == "tail" else None,
        c=options["c"],
        t0=options.get("t0"),
        gamma=options["gamma"],
        max_iters=options["max_iters"],
        rel_tol=options["rel_tol"],
        prox_rule=options["prox_rule"],
    )


def _run_train(config: RunConfig) -> None:
    opts = config.options
    solver_config = _solver_config(opts, opts["reg"], opts.get("theta"), opts.get("theta_frac"))
    ds = _load(opts["data"], opts)
    w, trace = fit(ds.features, ds.labels, solver_config)

    header = dict(config.settings())
    header.update({f"solver.{k}": v for k, v in solver_config.settings().items()})
    header["solver.theta_resolved"] = solver_config.resolved_theta(ds.d, ds.l)
    header["solver.t0_resolved"] = trace.steps[0]
    save_model(w, opts["out"], header)
    if opts.get("trace"):
        write_csv(opts["trace"], ["iteration", "objective", "loss", "penalty", "t"], trace.to_rows())
    write_key_values(opts.get("report"), [
        ("n", ds.n),
        ("d", ds.d),
        ("l", ds.l),
        ("iterations", trace.iterations_run),
        ("converged", trace.converged),
        ("objective", trace.objectives[-1]),
        ("loss", trace.loss_terms[-1]),
        ("penalty", trace.reg_terms[-1]),
        ("rank", numerical_rank(w)),
    ], header)


def _run_predict(config: RunConfig) -> None:
    opts = config.options
    w = load_model(opts["model"])
    ds = _load(opts["data"], opts)
    scores = predict(w, ds.features)
    write_csv(opts["out"], list(ds.label_names), scores.tolist())


def _run_eval(config: RunConfig) -> None:
    opts = config.options
    w = load_model(opts["model"])
    ds = _load(opts["data"], opts)
    report = evaluate(predict(w, ds.features), ds.labels, opts["k"])
    write_key_values(opts.get("out"), report.pairs(), config.settings())
    if opts.get("csv"):
        write_csv(opts["csv"], ["metric", "value"], report.metric_pairs())


def _run_compare(config: RunConfig) -> None:
    opts = config.options
    train = _load(opts["train"], opts)
    test = _load(opts["test"], opts)
    ks = [k for k in opts["k"] if k <= test.l]
    if len(ks) < len(opts["k"]):
        logger.warning(f"compare: dropping top-k cut-offs above L={test.l}: {[k for k in opts['k'] if k > test.l]}")
    if not ks:
        raise UsageError(f"no top-k cut-off within L={test.l}")
    runs = [("tail", frac) for frac in opts["theta_fracs"]] + [("trace", None), ("frobenius", None)]

    rows = []
    for regularizer, frac in runs:
        solver_config = _solver_config(opts, regularizer, theta_frac=frac)
        w, _ = fit(train.features, train.labels, solver_config)
        report = evaluate(predict(w, test.features), test.labels, ks)
        theta = resolve_theta_fraction(frac, train.d, train.l) if frac is not None else "none"
        rows.append(
            [regularizer, theta, numerical_rank(w)]
            + [report.top_k[k] for k in ks]
            + [report.hamming_loss, report.average_auc, report.average_precision]
        )
        logger.info(f"compare: {regularizer} theta={theta} AUC={report.average_auc:.4f}")
    write_csv(
        opts["out"],
        ["method", "theta", "rank"] + [f"top{k}" for k in ks] + ["hamming_loss", "average_auc", "average_precision"],
        rows,
    )


def _run_demo(config: RunConfig) -> None:
    opts = config.options
    problem: CompletionProblem = demo_problem(opts["norm"], opts["theta"], opts["lo"], opts["hi"])
    surface = norm_surface(problem, opts["step"])
    write_csv(opts["out"], ["v1", "v2", "norm"], surface.rows())
    result = find_minimizer(problem, opts["step"], opts["refine"])
    write_key_values(opts.get("report"), result.pairs(), config.settings())


def _run_bound(config: RunConfig) -> None:
    opts = config.options
    w = load_model(opts["model"])
    if opts.get("theta_frac") is not None:
        theta = resolve_theta_fraction(opts["theta_frac"], *w.shape)
    else:
        theta = opts.get("theta") or 0
    report = bound_report(w, opts["n"], opts["delta"], opts["r"], theta)
    write_key_values(opts.get("out"), report.pairs(), config.settings())


def _rows(ds: MultiLabelDataset, rows: slice) -> MultiLabelDataset:
    return MultiLabelDataset(
        features=ds.features[rows],
        labels=ds.labels[rows],
        feature_names=ds.feature_names,
        label_names=ds.label_names,
    )


def _run_synth(config: RunConfig) -> None:
    opts = config.options
    ds, w_star = synth_low_rank(opts["n"], opts["d"], opts["l"], opts["rank"], opts["noise"], opts["seed"])
    out_dir: Path = opts["out_dir"]
    header = dict(config.settings())
    header["generator"] = GENERATOR_NAME

    n_test = int(round(opts["test_frac"] * ds.n))
    n_train = ds.n - n_test
    if n_train < 1:
        raise UsageError(f"--test-frac {opts['test_frac']} leaves no training rows")
    write_arff(_rows(ds, slice(0, n_train)), out_dir / "train.arff", "synth-train", opts["sparse"])
    if n_test:
        write_arff(_rows(ds, slice(n_train, ds.n)), out_dir / "test.arff", "synth-test", opts["sparse"])
    save_model(w_star, out_dir / "truth.model", header)


def _run_stats(config: RunConfig) -> None:
    opts = config.options
    ds = _load(opts["data"], opts)
    write_key_values(opts.get("out"), stats(ds).pairs(), config.settings())


HANDLERS = {
    "train": _run_train,
    "predict": _run_predict,
    "eval": _run_eval,
    "compare": _run_compare,
    "demo-completion": _run_demo,
    "bound": _run_bound,
    "synth": _run_synth,
    "stats": _run_stats,
}


def run(argv: Sequence[str]) -> int:
    """
    Parse argv, run one command and return the exit status.

    Returns:
        0 on success, 1 on data/numeric failure, 2 on usage errors
    """
    configure_logging()
    try:
        config = parse_args(argv)
    except UsageError as e:
        logger.error(str(e))
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except ValidationError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)

    logger.info(f"Running {config.command}")
    try:
        HANDLERS[config.command](config)
    except (UsageError, ValidationError) as e:
        logger.error(f"{config.command} failed: {e}")
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (TailRankError, OSError) as e:
        logger.error(f"{config.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
