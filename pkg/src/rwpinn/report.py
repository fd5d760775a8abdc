"""Run artifacts: report JSON, table rows, plot-ready CSVs and figures.

Every artifact is a pure function of the trained parameters and the run
configuration, so reruns with the same seed produce identical files.
Figures are rendered with the Agg backend next to the CSVs they mirror;
plotting never needs to re-run training.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import network, problems, sampling  # noqa: E402

SLICE_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)

ROW_FIELDS = (
    "problem",
    "method",
    "strategy",
    "n_int",
    "n_sb",
    "n_tb",
    "n_d",
    "hidden_layers",
    "width",
    "lambda",
    "rw_scale",
    "n_restarts",
    "base_seed",
    "e_t",
    "e_g",
    "e_g_rel",
    "sup_error",
    "bound",
)


def _fmt(x):
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return format(x, ".8g")
    return str(x)


def summary_row(report, error_report=None, diagnostics=None) -> dict:
    """One stable-schema table row for a finished training run."""
    cfg = report.config
    row = {
        "problem": report.problem,
        "method": report.method,
        "strategy": cfg.get("strategy", ""),
        "n_int": cfg.get("n_int", ""),
        "n_sb": cfg.get("n_sb", ""),
        "n_tb": cfg.get("n_tb", ""),
        "n_d": cfg.get("n_d", ""),
        "hidden_layers": cfg.get("hidden_layers", ""),
        "width": cfg.get("width", ""),
        "lambda": cfg.get("lambda", ""),
        "rw_scale": cfg.get("rw_scale", ""),
        "n_restarts": cfg.get("n_restarts", ""),
        "base_seed": report.base_seed,
        "e_t": report.training_errors.get("combined", ""),
        "e_g": "",
        "e_g_rel": "",
        "sup_error": "",
        "bound": "",
    }
    if error_report is not None:
        row["e_g"] = error_report.e_g
        row["e_g_rel"] = error_report.e_g_rel
        row["sup_error"] = error_report.sup_error
    if diagnostics is not None:
        row["bound"] = diagnostics.bound
    return row


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROW_FIELDS)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in ROW_FIELDS])


def _diag_doc(diagnostics):
    doc = asdict(diagnostics)
    doc["c_norms"] = {
        who: {"".join(map(str, idx)): v for idx, v in sups.items()}
        for who, sups in diagnostics.c_norms.items()
    }
    return doc


def write_report_json(path, report, error_report=None, diagnostics=None):
    doc = json.loads(report.to_json())
    if error_report is not None:
        doc["generalization"] = {
            "e_g": error_report.e_g,
            "e_g_rel": error_report.e_g_rel,
            "sup_error": error_report.sup_error,
            "resolution": error_report.resolution,
            "times": error_report.times.tolist(),
            "slice_errors": error_report.slice_errors.tolist(),
        }
    if diagnostics is not None:
        doc["bound_diagnostics"] = _diag_doc(diagnostics)
    Path(path).write_text(json.dumps(doc, indent=1))


def _solution_slices_1d(problem, params, out_dir, resolution=201):
    """u(t_k, x) at fixed times, as CSV columns and one overlay figure."""
    x = np.linspace(0.0, 1.0, resolution)
    header = ["x"]
    columns = [x]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for k, t in enumerate(SLICE_TIMES):
        pts = np.column_stack([np.full_like(x, t), x])
        u = network.forward_values(params, pts)
        header.append(f"u_pred_t{t:g}")
        columns.append(u)
        line, = ax.plot(x, u, label=f"t = {t:g}", color=f"C{k}")
        if problem.exact is not None:
            ue = problem.exact(pts)
            header.append(f"u_exact_t{t:g}")
            columns.append(ue)
            ax.plot(x, ue, linestyle="--", color=line.get_color())
    _write_columns(out_dir / "slices.csv", header, columns)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.set_title(f"{problem.name}: predicted (solid) vs exact (dashed)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "slices.png", dpi=130)
    plt.close(fig)


def _field_1d(problem, params, out_dir, resolution=101):
    """Dense (t, x) field grid with the pointwise error."""
    grid = sampling.test_grid(problem.domain, resolution)
    u = network.forward_values(params, grid.points)
    header = ["t", "x", "u_pred"]
    columns = [grid.points[:, 0], grid.points[:, 1], u]
    err = None
    if problem.exact is not None:
        ue = problem.exact(grid.points)
        err = u - ue
        header += ["u_exact", "error"]
        columns += [ue, err]
    _write_columns(out_dir / "field.csv", header, columns)

    n_panels = 2 if err is not None else 1
    fig, axes = plt.subplots(1, n_panels, figsize=(5.5 * n_panels, 4.2), squeeze=False)
    extent = (0.0, 1.0, 0.0, problem.domain.time_horizon)
    im = axes[0, 0].imshow(
        grid.reshape(u), origin="lower", aspect="auto", extent=extent
    )
    axes[0, 0].set_title("predicted u(t, x)")
    fig.colorbar(im, ax=axes[0, 0])
    if err is not None:
        im = axes[0, 1].imshow(
            grid.reshape(np.abs(err)), origin="lower", aspect="auto", extent=extent
        )
        axes[0, 1].set_title("|error|")
        fig.colorbar(im, ax=axes[0, 1])
    for ax in axes.flat:
        ax.set_xlabel("x")
        ax.set_ylabel("t")
    fig.tight_layout()
    fig.savefig(out_dir / "field.png", dpi=130)
    plt.close(fig)


def _contour_2d(problem, params, out_dir, resolution=81, t_final=None):
    """x-y grids at the final time with the pointwise error."""
    if t_final is None:
        t_final = problem.domain.time_horizon
    x = np.linspace(0.0, 1.0, resolution)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    pts = np.column_stack([np.full(xx.size, t_final), xx.ravel(), yy.ravel()])
    u = network.forward_values(params, pts)
    header = ["x", "y", "u_pred"]
    columns = [xx.ravel(), yy.ravel(), u]
    err = None
    if problem.exact is not None:
        ue = problem.exact(pts)
        err = u - ue
        header += ["u_exact", "error"]
        columns += [ue, err]
    _write_columns(out_dir / "contour.csv", header, columns)

    n_panels = 3 if err is not None else 1
    fig, axes = plt.subplots(1, n_panels, figsize=(4.6 * n_panels, 4.0), squeeze=False)
    cs = axes[0, 0].contourf(xx, yy, u.reshape(xx.shape), levels=30)
    axes[0, 0].set_title(f"predicted, t = {t_final:g}")
    fig.colorbar(cs, ax=axes[0, 0])
    if err is not None:
        cs = axes[0, 1].contourf(xx, yy, ue.reshape(xx.shape), levels=30)
        axes[0, 1].set_title("exact")
        fig.colorbar(cs, ax=axes[0, 1])
        cs = axes[0, 2].contourf(xx, yy, np.abs(err).reshape(xx.shape), levels=30)
        axes[0, 2].set_title("|error|")
        fig.colorbar(cs, ax=axes[0, 2])
    for ax in axes.flat:
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(out_dir / "contour.png", dpi=130)
    plt.close(fig)


def _loss_history(report, out_dir):
    header = ["step", "loss"]
    hist = np.asarray(report.loss_history, dtype=np.float64)
    _write_columns(out_dir / "loss_history.csv", header, [np.arange(len(hist)), hist])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(hist)
    ax.set_xlabel("accepted step")
    ax.set_ylabel("training loss")
    ax.set_title(f"{report.problem} / {report.method}")
    fig.tight_layout()
    fig.savefig(out_dir / "loss_history.png", dpi=130)
    plt.close(fig)


def _energy_trace(problem, params, out_dir):
    """EFK energy on a time sweep; only meaningful for source-free runs."""
    times = np.round(np.linspace(0.0, problem.domain.time_horizon, 11), 10)
    energy = np.array(
        [
            problems.efk_energy(
                params, t, 257, problem.gamma, problem.domain.spatial_dim
            )
            for t in times
        ]
    )
    _write_columns(out_dir / "energy.csv", ["t", "energy"], [times, energy])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(times, energy, marker="o")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title(f"{problem.name}: energy along the trained solution")
    fig.tight_layout()
    fig.savefig(out_dir / "energy.png", dpi=130)
    plt.close(fig)


def _write_columns(path, header, columns):
    data = np.column_stack([np.asarray(c, dtype=np.float64) for c in columns])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in data:
            writer.writerow([format(v, ".10g") for v in row])


def write_artifacts(out_dir, problem, report, error_report=None, diagnostics=None):
    """All artifacts for one run: JSON report, table row, CSV grids, figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_json(out_dir / "report.json", report, error_report, diagnostics)
    row = summary_row(report, error_report, diagnostics)
    write_rows(out_dir / "row.csv", [row])
    params = report.params
    if problem.domain.spatial_dim == 1:
        _solution_slices_1d(problem, params, out_dir)
        _field_1d(problem, params, out_dir)
    else:
        _contour_2d(problem, params, out_dir)
    if problem.operator_id.startswith("EFK") and problem.source is None:
        _energy_trace(problem, params, out_dir)
    _loss_history(report, out_dir)
    return row
