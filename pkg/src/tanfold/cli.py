"""Command-line pipeline: synthesize, train, fine-tune, analyze, report.

Subcommands
-----------
synth             write a planted dataset (canonical tensors + provenance)
train-bare        stage 1: fit network + kernel to bare tensors
finetune          stage 2: fine-tune on effective tensors at reference geometries
eval              per-geometry MAE of a saved model against a dataset
analyze-spectrum  eigendecompose two kernels, align them, tabulate differences
fit-tan           fit the tangent law to an eigen-difference table
suzuki-verify     random trials of the exact block-decoupling identity
report            collect the plot-ready CSVs of a finished pipeline run

Conventions: exit 0 on success, 1 on validation/usage errors, 2 on
numerical failures.  All randomness flows from ``--seed``.  Hyperparameters
come from presets, overridden by ``--config`` (flat ``key = value`` lines),
overridden by command-line flags.  Every run directory gains a
``manifest.json`` recording the resolved configuration; the manifest is a
run log (it contains wall time) and is not part of the deterministic
output-file contract.  CSV schemas are documented in FORMATS.md.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__, presets, reports
from .heads import HeadKind
from .nn import load_kernel
from .spectral import align_eigensystems, eig_sym, eigen_differences
from .suzuki import random_coupled_problem, verify_w_identity
from .synth import PlantSpec, plant_series, save_plant
from .tanmodel import fit_tan
from .tensors import Kind, load_series
from .training import (
    evaluate_mae,
    finetune_effective,
    load_model,
    save_model,
    train_bare,
)

__all__ = ["main"]

_EXIT_OK = 0
_EXIT_USAGE = 1
_EXIT_NUMERICAL = 2


class _UsageError(Exception):
    """Invalid flags, config values, or inputs: exit code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# config files: flat "key = value" text, '#' comments
# ---------------------------------------------------------------------------

def _read_config(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{ln}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _coerce(key: str, text: str, py_type):
    try:
        if py_type is bool:
            lowered = text.lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if py_type is int:
            return int(text)
        if py_type is float:
            return float(text)
        if py_type is tuple:
            return tuple(int(part) for part in text.split(",") if part.strip())
        if py_type == "floats":
            return tuple(float(part) for part in text.split(",") if part.strip())
        return text
    except ValueError as exc:
        raise _UsageError(f"config key {key}: {exc}") from None


_TRAIN_KEYS = {
    "epochs": int,
    "batch_size": int,
    "base_lr": float,
    "seed": int,
    "ell": int,
    "hidden": tuple,
    "freeze_orbitals": bool,
    "kernel_polish": bool,
}


def _train_overrides(config_path) -> dict:
    if not config_path:
        return {}
    raw = _read_config(config_path)
    unknown = sorted(set(raw) - set(_TRAIN_KEYS))
    if unknown:
        raise _UsageError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v, _TRAIN_KEYS[k]) for k, v in raw.items()}


_PLANT_KEYS = {
    "n_orb": int,
    "ell": int,
    "geometries": "floats",
    "rate": float,
    "amplitude": float,
    "center": float,
    "spectrum_lo": float,
    "eta": float,
    "noise": float,
    "target_rms": float,
    "fourier_scale": float,
    "seed": int,
    "system": str,
}


def _plant_overrides(config_path) -> dict:
    if not config_path:
        return {}
    raw = _read_config(config_path)
    unknown = sorted(set(raw) - set(_PLANT_KEYS))
    if unknown:
        raise _UsageError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v, _PLANT_KEYS[k]) for k, v in raw.items()}


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

def _write_manifest(out_dir, subcommand: str, resolved: dict, *, seed, started: float) -> None:
    payload = {
        "subcommand": subcommand,
        "config": resolved,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    reports.write_json(os.path.join(out_dir, "manifest.json"), payload)


def _ensure_out(path) -> str:
    if not path:
        raise _UsageError("--out is required")
    os.makedirs(path, exist_ok=True)
    return os.fspath(path)


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, HeadKind):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


# ---------------------------------------------------------------------------
# stage resolution
# ---------------------------------------------------------------------------

def _resolve_stage_settings(system: str, stage: HeadKind) -> tuple[presets.StageSettings, str]:
    """(settings, profile) for a named molecular system or a plant preset."""
    if system in presets.SYSTEMS:
        preset = presets.system_preset(system)
        field = {
            HeadKind.BARE_ONE: preset.bare_one,
            HeadKind.EFF_ONE: preset.eff_one,
            HeadKind.BARE_TWO: preset.bare_two,
            HeadKind.EFF_TWO: preset.eff_two,
        }[stage]
        return field, "paper"
    if system in presets.PLANT_PRESETS:
        if stage in (HeadKind.BARE_ONE, HeadKind.BARE_TWO):
            return presets.DESK_STAGE1, "desk"
        return presets.DESK_STAGE2, "desk"
    known = sorted(set(presets.SYSTEMS) | set(presets.PLANT_PRESETS))
    raise _UsageError(f"unknown system {system!r}; known: {', '.join(known)}")


def _build_train_config(args, stage: HeadKind) -> "presets.TrainConfig":
    settings, default_profile = _resolve_stage_settings(args.system, stage)
    profile_name = args.profile or default_profile
    if profile_name not in presets.PROFILES:
        raise _UsageError(
            f"unknown profile {profile_name!r}; known: {', '.join(sorted(presets.PROFILES))}"
        )
    profile = presets.PROFILES[profile_name]
    fields = dict(
        stage=stage,
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        base_lr=settings.base_lr,
        seed=args.seed,
        ell=profile.ell,
        hidden=profile.hidden,
        freeze_orbitals=settings.freeze_orbitals,
        kernel_polish=settings.kernel_polish,
    )
    fields.update(_train_overrides(args.config))
    if args.seed is not None:
        fields["seed"] = args.seed
    if fields["seed"] is None:
        fields["seed"] = 0
    from .training import TrainConfig

    return TrainConfig(**fields)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_synth(args) -> int:
    started = time.perf_counter()
    spec = presets.plant_preset(args.plant)
    overrides = _plant_overrides(args.config)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    out = _ensure_out(args.out)
    result = plant_series(spec)
    save_plant(result, out)
    _write_manifest(out, "synth", {"plant": args.plant, **_jsonable(dataclasses.asdict(spec))},
                    seed=spec.seed, started=started)
    print(f"planted {len(result.series.tensor_sets)} tensor sets -> {out}")
    return _EXIT_OK


def _head_for(body: int, kind: Kind) -> HeadKind:
    table = {
        (1, Kind.BARE): HeadKind.BARE_ONE,
        (2, Kind.BARE): HeadKind.BARE_TWO,
        (1, Kind.EFFECTIVE): HeadKind.EFF_ONE,
        (2, Kind.EFFECTIVE): HeadKind.EFF_TWO,
    }
    return table[(body, kind)]


def _cmd_train_bare(args) -> int:
    started = time.perf_counter()
    stage = _head_for(args.body, Kind.BARE)
    cfg = _build_train_config(args, stage)
    series = load_series(args.data)
    out = _ensure_out(args.out)
    model, report = train_bare(series, cfg)
    save_model(model, os.path.join(out, "model"))
    reports.write_mae_csv(os.path.join(out, "mae.csv"), report.per_geometry)
    with open(os.path.join(out, "fit_report.txt"), "w") as fh:
        fh.write(reports.fit_report_text(report))
    _write_manifest(out, "train-bare",
                    {"system": args.system, "data": os.fspath(args.data), **_jsonable(dataclasses.asdict(cfg))},
                    seed=cfg.seed, started=started)
    print(reports.fit_report_text(report), end="")
    print(f"wall_time_s: {report.wall_time:.3f}")
    return _EXIT_OK


def _cmd_finetune(args) -> int:
    started = time.perf_counter()
    bare_model = load_model(args.model)
    stage = _head_for(bare_model.head.body, Kind.EFFECTIVE)
    cfg = _build_train_config(args, stage)
    series = load_series(args.data)
    refs = None
    if args.refs:
        try:
            refs = [float(r) for r in args.refs.split(",") if r.strip()]
        except ValueError:
            raise _UsageError(f"--refs must be comma-separated numbers, got {args.refs!r}")
    out = _ensure_out(args.out)
    model, report = finetune_effective(series, bare_model, cfg, refs=refs)
    save_model(model, os.path.join(out, "model"))
    reports.write_mae_csv(os.path.join(out, "mae.csv"), report.per_geometry)
    with open(os.path.join(out, "fit_report.txt"), "w") as fh:
        fh.write(reports.fit_report_text(report))
    _write_manifest(out, "finetune",
                    {"system": args.system, "data": os.fspath(args.data),
                     "model": os.fspath(args.model), "refs": refs,
                     **_jsonable(dataclasses.asdict(cfg))},
                    seed=cfg.seed, started=started)
    print(reports.fit_report_text(report), end="")
    print(f"wall_time_s: {report.wall_time:.3f}")
    return _EXIT_OK


def _cmd_eval(args) -> int:
    started = time.perf_counter()
    model = load_model(args.model)
    series = load_series(args.data)
    refs = [float(r) for r in args.refs.split(",")] if args.refs else []
    out = _ensure_out(args.out)
    per_geometry = evaluate_mae(model, series, train_geometries=refs)
    reports.write_mae_csv(os.path.join(out, "mae.csv"), per_geometry)
    _write_manifest(out, "eval",
                    {"model": os.fspath(args.model), "data": os.fspath(args.data), "refs": refs},
                    seed=None, started=started)
    overall = float(np.mean([g.unit_mae for g in per_geometry]))
    print(f"evaluated {len(per_geometry)} geometries, mean unit MAE {overall:.6g}")
    return _EXIT_OK


def _load_kernel_matrix(path) -> np.ndarray:
    """A kernel from either a model directory or a kernel checkpoint file."""
    path = os.fspath(path)
    if os.path.isdir(path):
        return load_model(path).kernel.matrix
    matrix, _ = load_kernel(path)
    return matrix


def _cmd_analyze_spectrum(args) -> int:
    started = time.perf_counter()
    bare = eig_sym(_load_kernel_matrix(args.bare))
    eff = eig_sym(_load_kernel_matrix(args.eff))
    out = _ensure_out(args.out)
    alignment = align_eigensystems(bare, eff)
    table = eigen_differences(alignment)
    reports.write_overlap_csv(os.path.join(out, "overlap.csv"), alignment)
    reports.write_difference_csv(os.path.join(out, "eigen_differences.csv"), table)
    _write_manifest(out, "analyze-spectrum",
                    {"bare": os.fspath(args.bare), "eff": os.fspath(args.eff)},
                    seed=None, started=started)
    print(
        f"aligned {alignment.dim} eigenpairs: min diagonal overlap "
        f"{alignment.score:.6f}, max off-diagonal {alignment.max_off_diagonal:.6f}"
    )
    return _EXIT_OK


def _read_difference_csv(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        try:
            i_idx = header.index("index")
            b_idx = header.index("bare")
            e_idx = header.index("eff")
            f_idx = header.index("flagged")
        except ValueError:
            raise _UsageError(f"{path}: expected columns index,bare,eff,...,flagged")
        for line in fh:
            parts = line.strip().split(",")
            if parts[f_idx] == "true":
                continue
            rows.append((int(parts[i_idx]), float(parts[b_idx]), float(parts[e_idx])))
    return rows


def _cmd_fit_tan(args) -> int:
    started = time.perf_counter()
    pairs = _read_difference_csv(args.table)
    out = _ensure_out(args.out)
    fit = fit_tan(pairs)
    reports.write_tanfit_json(os.path.join(out, "tanfit.json"), fit)
    # re-emit the fitted curve against the observed relative differences
    index = np.array([i for i, _, _ in pairs], dtype=np.float64)
    bare = np.array([b for _, b, _ in pairs])
    eff = np.array([e for _, _, e in pairs])
    from .spectral import DifferenceTable

    with np.errstate(divide="ignore", invalid="ignore"):
        rel = (eff - bare) / bare
    table = DifferenceTable(
        index=index.astype(int),
        bare=bare,
        eff=eff,
        diff=eff - bare,
        rel_diff=rel,
        flagged=np.zeros(index.size, dtype=bool),
    )
    reports.write_tanfit_csv(os.path.join(out, "tanfit.csv"), table, fit)
    _write_manifest(out, "fit-tan", {"table": os.fspath(args.table)},
                    seed=None, started=started)
    print(
        f"tan fit: rate {fit.rate:.6g}, amplitude {fit.amplitude:.6g}, "
        f"center {fit.center:.6g}, residual {fit.residual:.3g}"
    )
    return _EXIT_OK


def _cmd_suzuki_verify(args) -> int:
    started = time.perf_counter()
    if args.rdim >= args.dim:
        raise _UsageError("--rdim must be smaller than --dim")
    out = _ensure_out(args.out)
    seeds = np.random.SeedSequence(args.seed).generate_state(args.trials)
    rows = []
    curves = []
    for trial, s in enumerate(seeds):
        problem = random_coupled_problem(args.dim, args.rdim, args.coupling, int(s))
        report = verify_w_identity(problem, n_max=args.n_max)
        rows.append(
            (trial, int(s), report.rel_frobenius, report.max_abs, report.half_spread)
        )
        for order, err in enumerate(report.series_errors, start=1):
            curves.append((trial, order, err))
    reports.write_csv(
        os.path.join(out, "residuals.csv"),
        ("trial", "seed", "rel_frobenius", "max_abs", "half_spread"),
        rows,
    )
    reports.write_csv(
        os.path.join(out, "series_convergence.csv"),
        ("trial", "order", "rel_error"),
        curves,
    )
    _write_manifest(out, "suzuki-verify",
                    {"dim": args.dim, "rdim": args.rdim, "coupling": args.coupling,
                     "trials": args.trials, "n_max": args.n_max},
                    seed=args.seed, started=started)
    worst = max(r[2] for r in rows)
    print(f"{args.trials} trials: worst relative residual {worst:.3e}")
    return _EXIT_OK


def _require(path, what):
    if not os.path.exists(path):
        raise _UsageError(f"missing {what}: {path} (run the earlier pipeline stages first)")
    return path


def _cmd_report(args) -> int:
    """Collect the four plot-ready tables from a finished pipeline layout.

    Expects ``--run`` to contain ``stage1/`` and ``stage2/`` directories as
    written by train-bare and finetune.  Emits mae.csv, overlap.csv,
    eigen_differences.csv, tanfit.csv (+ tanfit.json) into ``--out``.
    """
    started = time.perf_counter()
    run_dir = os.fspath(args.run)
    stage1 = _require(os.path.join(run_dir, "stage1", "model"), "stage-1 model")
    stage2 = _require(os.path.join(run_dir, "stage2", "model"), "stage-2 model")
    stage2_mae = _require(os.path.join(run_dir, "stage2", "mae.csv"), "stage-2 MAE table")
    out = _ensure_out(args.out)

    bare = eig_sym(load_model(stage1).kernel.matrix)
    eff = eig_sym(load_model(stage2).kernel.matrix)
    alignment = align_eigensystems(bare, eff)
    table = eigen_differences(alignment)
    fit = fit_tan(table.pairs())

    with open(stage2_mae) as src, open(os.path.join(out, "mae.csv"), "w") as dst:
        dst.write(src.read())
    reports.write_overlap_csv(os.path.join(out, "overlap.csv"), alignment)
    reports.write_difference_csv(os.path.join(out, "eigen_differences.csv"), table)
    reports.write_tanfit_csv(os.path.join(out, "tanfit.csv"), table, fit)
    reports.write_tanfit_json(os.path.join(out, "tanfit.json"), fit)
    _write_manifest(out, "report", {"system": args.system, "run": run_dir},
                    seed=None, started=started)
    print(
        f"report for {args.system}: max off-diagonal overlap "
        f"{alignment.max_off_diagonal:.4f}; tan rate {fit.rate:.4g}, "
        f"center {fit.center:.4g}"
    )
    return _EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="tanfold", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand")

    def common(p, *, seeded=True):
        if seeded:
            p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None)
        p.add_argument("--out", required=False)
        p.add_argument("--profile", choices=sorted(presets.PROFILES), default=None)

    p = sub.add_parser("synth", help="write a planted dataset")
    p.add_argument("--plant", required=True)
    common(p)

    p = sub.add_parser("train-bare", help="stage 1: fit bare tensors")
    p.add_argument("--system", required=True)
    p.add_argument("--body", type=int, choices=(1, 2), required=True)
    p.add_argument("--data", required=True)
    common(p)

    p = sub.add_parser("finetune", help="stage 2: fine-tune on effective tensors")
    p.add_argument("--system", required=True)
    p.add_argument("--model", required=True, help="stage-1 model directory")
    p.add_argument("--data", required=True)
    p.add_argument("--refs", default=None, help="comma-separated reference geometries")
    common(p)

    p = sub.add_parser("eval", help="per-geometry MAE of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--refs", default=None)
    common(p, seeded=False)

    p = sub.add_parser("analyze-spectrum", help="align two kernel spectra")
    p.add_argument("--bare", required=True, help="model directory or kernel .npz")
    p.add_argument("--eff", required=True)
    common(p, seeded=False)

    p = sub.add_parser("fit-tan", help="fit the tangent law to eigen differences")
    p.add_argument("--table", required=True, help="eigen_differences.csv")
    common(p, seeded=False)

    p = sub.add_parser("suzuki-verify", help="random block-decoupling trials")
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--rdim", type=int, default=3)
    p.add_argument("--coupling", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n-max", type=int, default=12)
    common(p)

    p = sub.add_parser("report", help="collect plot-ready CSVs from a run")
    p.add_argument("--system", required=True)
    p.add_argument("--run", required=True, help="pipeline run directory")
    common(p, seeded=False)

    return parser


_HANDLERS = {
    "synth": _cmd_synth,
    "train-bare": _cmd_train_bare,
    "finetune": _cmd_finetune,
    "eval": _cmd_eval,
    "analyze-spectrum": _cmd_analyze_spectrum,
    "fit-tan": _cmd_fit_tan,
    "suzuki-verify": _cmd_suzuki_verify,
    "report": _cmd_report,
}


def _usage_text(parser) -> str:
    return parser.format_help() + "\n" + "\n".join(presets.usage_lines()) + "\n"


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        sys.stderr.write(_usage_text(parser))
        return _EXIT_USAGE
    try:
        args = parser.parse_args(argv)
        if not args.subcommand:
            sys.stderr.write(_usage_text(parser))
            return _EXIT_USAGE
        return _HANDLERS[args.subcommand](args)
    except _UsageError as exc:
        sys.stderr.write(f"tanfold: error: {exc}\n")
        return _EXIT_USAGE
    except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        sys.stderr.write(f"tanfold: error: {exc}\n")
        return _EXIT_USAGE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"tanfold: error: {exc}\n")
        return _EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"tanfold: numerical failure: {exc}\n")
        return _EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
