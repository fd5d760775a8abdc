"""Ensemble training: seeded restarts, Adam warm-up, then L-BFGS.

Each restart owns its parameters and tape; the member with the lowest
final training loss is selected and its training errors are computed a
posteriori from the loss terms.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .losses import Objective
from .network import NetworkConfig, NetworkParams, init_params
from .optimize import OptimizerConfig, adam, lbfgs_minimize
from .problems import ProblemSpec
from .sampling import SamplerConfig, build_training_set
from .weighting import WeightScheme

LAMBDA_GRID = (0.1, 1.0, 10.0)


@dataclass
class RestartRecord:
    seed: int
    lam: float
    final_loss: float
    training_errors: dict
    iterations: int
    status: str


@dataclass
class TrainingReport:
    problem: str
    method: str
    restarts: list
    selected: int
    params: NetworkParams
    training_errors: dict
    loss_history: list
    wall_time: float
    base_seed: int
    config: dict = field(default_factory=dict)

    @property
    def selected_restart(self) -> RestartRecord:
        return self.restarts[self.selected]

    def to_json(self) -> str:
        doc = {
            "problem": self.problem,
            "method": self.method,
            "base_seed": self.base_seed,
            "selected": self.selected,
            "training_errors": self.training_errors,
            "wall_time": self.wall_time,
            "config": self.config,
            "restarts": [
                {
                    "seed": r.seed,
                    "lambda": r.lam,
                    "final_loss": r.final_loss,
                    "training_errors": r.training_errors,
                    "iterations": r.iterations,
                    "status": r.status,
                }
                for r in self.restarts
            ],
            "loss_history": list(map(float, self.loss_history)),
            "params": json.loads(self.params.to_json()),
        }
        return json.dumps(doc, indent=1)


def train_single(problem, tset, net_config, scheme, opt_config, lam, lam_reg=0.0):
    """One restart: Adam warm-up then L-BFGS. Returns (params, result, objective)."""
    params = init_params(net_config)
    objective = Objective(problem, tset, params, scheme, lam=lam, lam_reg=lam_reg)
    theta = params.pack()
    if opt_config.adam_steps > 0:
        theta, _ = adam(objective, theta, opt_config.adam_steps, opt_config.adam_lr)
    result = lbfgs_minimize(objective, theta, opt_config)
    return objective.params(result.x), result, objective


def ensemble_train(
    problem: ProblemSpec,
    sampler_config: SamplerConfig,
    net_config: NetworkConfig,
    scheme: WeightScheme,
    opt_config: OptimizerConfig,
    n_restarts: int = 1,
    lam=1.0,
    lam_reg: float = 0.0,
    base_seed: int = 0,
) -> TrainingReport:
    """Train `n_restarts` independently seeded members and keep the best.

    `lam` is either a fixed residual multiplier or "sweep", in which case
    restarts cycle through the standard grid and selection uses the
    lambda-free combined training error.
    """
    start = time.perf_counter()
    tset = build_training_set(sampler_config, problem)
    lams = LAMBDA_GRID if lam == "sweep" else (float(lam),)
    sweep = len(lams) > 1

    restarts, members = [], []
    for i in range(n_restarts):
        for lam_i in lams:
            cfg_i = NetworkConfig(
                net_config.input_dim,
                net_config.hidden_layers,
                net_config.width,
                seed=base_seed + i,
            )
            try:
                params, result, objective = train_single(
                    problem, tset, cfg_i, scheme, opt_config, lam_i, lam_reg
                )
                breakdown = objective.breakdown(result.x)
                errors = breakdown.training_errors()
                record = RestartRecord(
                    seed=base_seed + i,
                    lam=lam_i,
                    final_loss=result.value,
                    training_errors=errors,
                    iterations=result.iterations,
                    status=result.status,
                )
                members.append((params, result))
            except FloatingPointError as exc:
                record = RestartRecord(
                    seed=base_seed + i,
                    lam=lam_i,
                    final_loss=float("inf"),
                    training_errors={"combined": float("inf")},
                    iterations=0,
                    status=f"diverged: {exc}",
                )
                members.append((None, None))
            restarts.append(record)

    if all(not np.isfinite(r.final_loss) for r in restarts):
        raise RuntimeError(
            "all ensemble restarts diverged: "
            + "; ".join(f"seed {r.seed} lam {r.lam}: {r.status}" for r in restarts)
        )

    if sweep:
        key = lambda i: restarts[i].training_errors["combined"]
    else:
        key = lambda i: restarts[i].final_loss
    selected = min(range(len(restarts)), key=key)
    params, result = members[selected]
    return TrainingReport(
        problem=problem.name,
        method=scheme.kind,
        restarts=restarts,
        selected=selected,
        params=params,
        training_errors=restarts[selected].training_errors,
        loss_history=result.history,
        wall_time=time.perf_counter() - start,
        base_seed=base_seed,
        config={
            "n_int": sampler_config.n_int,
            "n_sb": sampler_config.n_sb,
            "n_tb": sampler_config.n_tb,
            "n_d": sampler_config.n_d,
            "hidden_layers": net_config.hidden_layers,
            "width": net_config.width,
            "method": scheme.kind,
            "rw_scale": scheme.scale,
            "lambda": lam,
            "lambda_reg": lam_reg,
            "n_restarts": n_restarts,
            "strategy": sampler_config.strategy,
        },
    )
