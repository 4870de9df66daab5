"""Plot-ready CSV artifacts and structured run reports.

Every CSV has a header row, deterministic row ordering, and floats
rendered with repr-faithful precision ('%.17g'), so identical runs
produce bit-identical files.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Sequence

import numpy as np

from .spectral import AlignmentReport, DifferenceTable
from .tanmodel import TanFit, eval_tan
from .training import FitReport

__all__ = [
    "format_value",
    "write_csv",
    "write_mae_csv",
    "write_overlap_csv",
    "write_difference_csv",
    "write_tanfit_csv",
    "write_tanfit_json",
    "fit_report_text",
    "write_json",
]


def format_value(value) -> str:
    """Render a cell: floats at full precision, everything else via str."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(cell) for cell in row) + "\n")


def write_mae_csv(path, per_geometry) -> None:
    """Per-geometry mean absolute error over the nonsymmetric unit."""
    write_csv(
        path,
        ("R", "mae", "split"),
        ((g.geometry, g.unit_mae, g.split) for g in per_geometry),
    )


def write_overlap_csv(path, report: AlignmentReport) -> None:
    """Aligned eigenvector overlap matrix in tidy (i, j, value) form."""
    n = report.dim
    rows = (
        (i + 1, j + 1, report.overlap[i, j]) for i in range(n) for j in range(n)
    )
    write_csv(path, ("i", "j", "overlap"), rows)


def write_difference_csv(path, table: DifferenceTable) -> None:
    write_csv(
        path,
        ("index", "bare", "eff", "diff", "rel_diff", "flagged"),
        (
            (int(i), b, e, d, r, bool(f))
            for i, b, e, d, r, f in zip(
                table.index, table.bare, table.eff, table.diff,
                table.rel_diff, table.flagged,
            )
        ),
    )


def write_tanfit_csv(path, table: DifferenceTable, fit: TanFit) -> None:
    """Relative eigenvalue differences next to the fitted tangent curve."""
    rows = []
    for i, rel, flagged in zip(table.index, table.rel_diff, table.flagged):
        fitted = np.nan if fit.degenerate else eval_tan(fit, float(i))
        rows.append((int(i), rel, fitted, bool(flagged)))
    write_csv(path, ("index", "rel_diff", "fit", "flagged"), rows)


def write_tanfit_json(path, fit: TanFit) -> None:
    write_json(
        path,
        {
            "rate": fit.rate,
            "amplitude": fit.amplitude,
            "center": fit.center,
            "residual": fit.residual,
            "n_points": fit.n_points,
            "degenerate": fit.degenerate,
            "converged": fit.converged,
        },
    )


def write_json(path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, trailing newline, atomic replace."""
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def fit_report_text(report: FitReport) -> str:
    """Human-readable fit summary (config, losses, aggregate MAE).

    Wall time is deliberately omitted so the text is identical across
    reruns with the same seed and config; timing lives in the run manifest.
    """
    cfg = report.config
    lines = [
        f"stage: {cfg.stage.value}",
        f"epochs: {cfg.epochs}",
        f"batch_size: {cfg.batch_size}",
        f"base_lr: {format_value(cfg.base_lr)}",
        f"seed: {cfg.seed}",
        f"ell: {cfg.ell}",
        f"hidden: {','.join(str(h) for h in cfg.hidden)}",
        f"freeze_orbitals: {str(cfg.freeze_orbitals).lower()}",
        f"initial_loss: {format_value(report.initial_loss)}",
        f"final_loss: {format_value(report.final_loss)}",
        f"train_mae: {format_value(report.train_mae)}",
        f"test_mae: {format_value(report.test_mae)}",
        f"n_geometries: {len(report.per_geometry)}",
    ]
    return "\n".join(lines) + "\n"
