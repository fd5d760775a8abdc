"""Command line entry point: config-driven experiment runner.

`rwpinn run` trains one experiment and writes its artifacts; `rwpinn
reproduce-all` runs the full experiment suite at paper-scale point counts
and consolidates one summary table. Exit codes: 0 success, 2 usage error,
3 training divergence (partial artifacts are kept).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import os
import sys
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib
from importlib import resources
from pathlib import Path

from . import metrics, report as report_mod
from .network import NetworkConfig
from .optimize import OptimizerConfig
from .problems import REGISTRY, get_problem
from .sampling import SamplerConfig
from .training import ensemble_train
from .weighting import METHODS, WeightScheme

USAGE_ERROR = 2
DIVERGENCE_ERROR = 3


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    method: str = "pinn"
    rw_scale: float = 1.0
    lam: object = 1.0  # float or "sweep"
    lam_reg: float = 0.0
    strategy: str = "sobol"
    n_int: int = 2048
    n_sb: int = 512
    n_tb: int = 512
    n_d: int = 0
    hidden_layers: int = 4
    width: int = 20
    n_restarts: int = 1
    base_seed: int = 0
    adam_steps: int = 500
    adam_lr: float = 1e-3
    max_iterations: int = 5000

    def __post_init__(self):
        if self.problem not in REGISTRY:
            raise ValueError(
                f"unknown problem {self.problem!r}; available: {sorted(REGISTRY)}"
            )
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected {METHODS}")
        if self.lam != "sweep":
            float(self.lam)

    @property
    def input_dim(self) -> int:
        return 1 + REGISTRY[self.problem].domain.spatial_dim


_CONFIG_KEYS = {
    "problem": str,
    "method": str,
    "rw_scale": float,
    "lam": None,
    "lam_reg": float,
    "strategy": str,
    "n_int": int,
    "n_sb": int,
    "n_tb": int,
    "n_d": int,
    "hidden_layers": int,
    "width": int,
    "n_restarts": int,
    "base_seed": int,
    "adam_steps": int,
    "adam_lr": float,
    "max_iterations": int,
}


def _parse_lambda(raw):
    if raw == "sweep":
        return "sweep"
    return float(raw)


def load_config(path) -> dict:
    """Read a TOML experiment config, resolving shipped preset names."""
    p = Path(path)
    if not p.exists():
        preset = resources.files("rwpinn.configs").joinpath(str(path))
        if preset.is_file():
            return tomllib.loads(preset.read_text())
        raise FileNotFoundError(f"config file not found: {path}")
    return tomllib.loads(p.read_text())


def build_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        doc = load_config(args.config)
        for key, raw in doc.items():
            key = key.replace("-", "_")
            if key == "lambda":
                key = "lam"
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            cast = _CONFIG_KEYS[key]
            values[key] = _parse_lambda(raw) if key == "lam" else cast(raw)
    overrides = {
        "problem": args.problem,
        "method": args.method,
        "rw_scale": args.rw_scale,
        "lam": _parse_lambda(args.lam) if args.lam is not None else None,
    }
    for key in (
        "lam_reg", "strategy", "n_int", "n_sb", "n_tb", "n_d", "hidden_layers",
        "width", "n_restarts", "adam_steps", "adam_lr", "max_iterations",
    ):
        overrides[key] = getattr(args, key)
    overrides["base_seed"] = args.seed
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if "problem" not in values:
        raise ValueError("a problem must be named via --problem or --config")
    return ExperimentConfig(**values)


def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Train one experiment and write its artifacts. Returns the table row."""
    problem = get_problem(config.problem)
    scheme = WeightScheme(config.method, config.rw_scale)
    sampler = SamplerConfig(
        strategy=config.strategy,
        n_int=config.n_int,
        n_sb=config.n_sb,
        n_tb=config.n_tb,
        n_d=config.n_d,
        seed=config.base_seed,
    )
    net = NetworkConfig(config.input_dim, config.hidden_layers, config.width)
    opt = OptimizerConfig(
        adam_steps=config.adam_steps,
        adam_lr=config.adam_lr,
        max_iterations=config.max_iterations,
    )
    training = ensemble_train(
        problem,
        sampler,
        net,
        scheme,
        opt,
        n_restarts=config.n_restarts,
        lam=config.lam,
        lam_reg=config.lam_reg,
        base_seed=config.base_seed,
    )
    error_report = None
    diagnostics = None
    if problem.exact is not None:
        error_report = metrics.generalization_error(problem, training.params)
        if problem.mode == "forward":
            diagnostics = metrics.bound_diagnostics(
                problem,
                training.params,
                training.training_errors,
                {"interior": config.n_int, "sb": config.n_sb, "tb": config.n_tb},
                scheme=scheme,
                strategy=config.strategy,
            )
    return report_mod.write_artifacts(
        out_dir, problem, training, error_report, diagnostics
    )


# paper-scale experiment suite: (name, point counts, width, restarts)
SUITE = (
    {"problem": "burgess1d", "n_int": 2048, "n_sb": 512, "n_tb": 512,
     "width": 20, "n_restarts": 10},
    {"problem": "efk1d", "n_int": 4096, "n_sb": 1024, "n_tb": 1024,
     "width": 20, "n_restarts": 10},
    {"problem": "efk1d-ic-a", "n_int": 2048, "n_sb": 512, "n_tb": 512,
     "width": 20, "n_restarts": 12},
    {"problem": "efk2d", "n_int": 8192, "n_sb": 2048, "n_tb": 2048,
     "width": 28, "n_restarts": 10},
    {"problem": "burgess1d-inv", "n_int": 3072, "n_d": 3072,
     "n_sb": 0, "n_tb": 0, "width": 20, "n_restarts": 10},
    {"problem": "efk1d-inv", "n_int": 6144, "n_d": 6144,
     "n_sb": 0, "n_tb": 0, "width": 20, "n_restarts": 10},
    {"problem": "efk2d-inv", "n_int": 12288, "n_d": 12288,
     "n_sb": 0, "n_tb": 0, "width": 20, "n_restarts": 10},
)


def _suite_configs(args):
    configs = []
    for entry in SUITE:
        for method in METHODS:
            values = dict(entry)
            values["method"] = method
            values["base_seed"] = args.seed if args.seed is not None else 0
            if args.n_restarts is not None:
                values["n_restarts"] = args.n_restarts
            if args.max_iterations is not None:
                values["max_iterations"] = args.max_iterations
            if args.lam is not None:
                values["lam"] = _parse_lambda(args.lam)
            configs.append(ExperimentConfig(**values))
    return configs


def _run_isolated(config, out_dir):
    try:
        return run_experiment(config, out_dir), None
    except (RuntimeError, FloatingPointError) as exc:
        return None, str(exc)


def cmd_reproduce_all(args, out_root: Path) -> int:
    configs = _suite_configs(args)
    jobs = max(1, args.jobs or 1)
    results = []
    pending = [
        (cfg, out_root / f"{cfg.problem}_{cfg.method}") for cfg in configs
    ]
    if jobs == 1:
        for cfg, out_dir in pending:
            results.append((cfg, *_run_isolated(cfg, out_dir)))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_isolated, cfg, out_dir) for cfg, out_dir in pending
            ]
            for (cfg, _), fut in zip(pending, futures):
                results.append((cfg, *fut.result()))

    rows, failures = [], []
    for cfg, row, error in results:
        if row is not None:
            rows.append(row)
        else:
            failures.append((cfg, error))
    report_mod.write_rows(out_root / "summary.csv", rows)
    if failures:
        with open(out_root / "failures.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["problem", "method", "error"])
            for cfg, error in failures:
                writer.writerow([cfg.problem, cfg.method, error])
        for cfg, error in failures:
            print(f"FAILED {cfg.problem}/{cfg.method}: {error}", file=sys.stderr)
        return DIVERGENCE_ERROR
    print(f"wrote {len(rows)} rows to {out_root / 'summary.csv'}")
    return 0


def _add_run_flags(parser):
    parser.add_argument("--config", help="TOML config file or shipped preset name")
    parser.add_argument("--problem", choices=sorted(REGISTRY))
    parser.add_argument("--method", choices=METHODS)
    parser.add_argument("--rw-scale", dest="rw_scale", type=float)
    parser.add_argument("--lambda", dest="lam", metavar="F|sweep")
    parser.add_argument("--lambda-reg", dest="lam_reg", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--strategy", choices=("sobol", "random"))
    parser.add_argument("--n-int", dest="n_int", type=int)
    parser.add_argument("--n-sb", dest="n_sb", type=int)
    parser.add_argument("--n-tb", dest="n_tb", type=int)
    parser.add_argument("--n-d", dest="n_d", type=int)
    parser.add_argument("--hidden-layers", dest="hidden_layers", type=int)
    parser.add_argument("--width", type=int)
    parser.add_argument("--restarts", dest="n_restarts", type=int)
    parser.add_argument("--adam-steps", dest="adam_steps", type=int)
    parser.add_argument("--adam-lr", dest="adam_lr", type=float)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--out", default="out", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rwpinn",
        description="Residual-weighted PINN solver for reaction-diffusion PDEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="train one experiment and write artifacts")
    _add_run_flags(run_p)
    rep_p = sub.add_parser(
        "reproduce-all", help="run the full experiment suite and consolidate a table"
    )
    rep_p.add_argument("--out", default="out")
    rep_p.add_argument("--jobs", type=int, default=1)
    rep_p.add_argument("--seed", type=int)
    rep_p.add_argument("--restarts", dest="n_restarts", type=int)
    rep_p.add_argument("--max-iterations", dest="max_iterations", type=int)
    rep_p.add_argument("--lambda", dest="lam", metavar="F|sweep")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_root = Path(os.environ.get("RWPINN_OUT", args.out))

    if args.command == "reproduce-all":
        out_root.mkdir(parents=True, exist_ok=True)
        return cmd_reproduce_all(args, out_root)

    try:
        config = build_config(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    out_dir = out_root / f"{config.problem}_{config.method}"
    try:
        row = run_experiment(config, out_dir)
    except (RuntimeError, FloatingPointError) as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return DIVERGENCE_ERROR
    summary = ", ".join(
        f"{k}={row[k]}" for k in ("problem", "method", "e_t", "e_g") if row[k] != ""
    )
    print(summary)
    print(f"artifacts in {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
