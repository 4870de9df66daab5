"""Named system presets and run profiles.

Each named molecular system carries its active-space size, geometry grid,
fine-tune reference geometries, and the published per-stage training
hyperparameters (epochs, batch size, learning rate) for the one- and
two-body heads.  Tensors for those systems come from upstream electronic-
structure runs and are not generated here; the presets make the training
CLI reproduce the published configurations when such files are supplied.

Two run profiles exist:

* ``paper``: full-size latent dimension and network (ell=300, three
  hidden layers of 200) matching the published setup.
* ``desk``: a reduced, minutes-scale setup (ell=32, hidden [64, 64])
  paired with a planted synthetic dataset, sized so the whole two-stage
  pipeline plus spectral analysis runs on a laptop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heads import HeadKind
from .synth import PlantSpec
from .training import TrainConfig

__all__ = [
    "NetProfile",
    "StageSettings",
    "SystemPreset",
    "PLANT_PRESETS",
    "PROFILES",
    "SYSTEMS",
    "plant_preset",
    "system_preset",
    "training_config",
    "usage_lines",
]


@dataclass(frozen=True)
class NetProfile:
    """Latent dimension and hidden-layer widths of the orbital network."""

    name: str
    ell: int
    hidden: tuple[int, ...]


PROFILES: dict[str, NetProfile] = {
    "paper": NetProfile(name="paper", ell=300, hidden=(200, 200, 200)),
    "desk": NetProfile(name="desk", ell=32, hidden=(64, 64)),
}


@dataclass(frozen=True)
class StageSettings:
    """Published (epochs, batch size, learning rate) for one training stage.

    ``freeze_orbitals`` and ``kernel_polish`` carry the extra switches a
    stage may enable: freezing the orbital networks during fine-tuning and
    solving the kernel least-squares problem exactly once the networks are
    trained (feasible at desk scale, where the design matrix is small).
    """

    epochs: int
    batch_size: int
    base_lr: float
    freeze_orbitals: bool = False
    kernel_polish: bool = False


@dataclass(frozen=True)
class SystemPreset:
    """A named molecular system with its grids and training settings.

    ``geometries`` is the bare-tensor training grid; for the relative-bond
    systems (HF, H2O) the values are R/R_eq with ``r_eq`` in bohr.  ``refs``
    are the fine-tune reference geometries.  ``tan_one`` / ``tan_two`` hold
    the published tangent-law coefficients (rate, amplitude, center) of the
    one- and two-body kernel spectra at ell=300.
    """

    name: str
    n_orb: int
    geometries: tuple[float, ...]
    refs: tuple[float, ...]
    bare_one: StageSettings
    eff_one: StageSettings
    bare_two: StageSettings
    eff_two: StageSettings
    tan_one: tuple[float, float, float]
    tan_two: tuple[float, float, float]
    r_eq: float | None = None
    angle_deg: float | None = None
    units: str = "bohr"


def _grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(lo, hi, n))


SYSTEMS: dict[str, SystemPreset] = {
    "H4": SystemPreset(
        name="H4",
        n_orb=4,
        geometries=_grid(1.8, 3.0, 121),
        refs=(1.85, 2.25, 2.65, 2.95),
        bare_one=StageSettings(8000, 128, 0.001),
        eff_one=StageSettings(500, 2048, 0.001),
        bare_two=StageSettings(2000, 256, 0.001),
        eff_two=StageSettings(500, 128, 0.0002),
        tan_one=(1.0e-2, 1.0e-4, 150.2),
        tan_two=(1.0e-2, 0.6e-4, 149.8),
    ),
    "H6": SystemPreset(
        name="H6",
        n_orb=6,
        geometries=_grid(1.8, 3.0, 121),
        refs=(1.85, 2.25, 2.65, 2.95),
        bare_one=StageSettings(8000, 128, 0.001),
        eff_one=StageSettings(500, 2048, 0.0001),
        bare_two=StageSettings(2000, 1024, 0.001),
        eff_two=StageSettings(500, 128, 0.0002),
        tan_one=(1.0e-2, 3.1e-4, 147.8),
        tan_two=(1.0e-2, 0.6e-4, 149.1),
    ),
    "HF": SystemPreset(
        name="HF",
        n_orb=8,
        geometries=_grid(0.85, 2.0, 215),
        refs=(0.95, 1.35, 1.65, 1.95),
        bare_one=StageSettings(8000, 1024, 0.002),
        eff_one=StageSettings(500, 512, 0.02),
        bare_two=StageSettings(2000, 1024, 0.001),
        eff_two=StageSettings(500, 512, 0.0002),
        tan_one=(1.0e-2, 8.9e-4, 150.4),
        tan_two=(1.1e-2, 2.0e-4, 149.4),
        r_eq=1.7325,
        units="R/R_eq",
    ),
    "H2O": SystemPreset(
        name="H2O",
        n_orb=8,
        geometries=_grid(1.1, 2.5, 66),
        refs=(1.15, 1.45, 1.95, 2.45),
        bare_one=StageSettings(2000, 256, 0.0002),
        eff_one=StageSettings(500, 1024, 0.001),
        bare_two=StageSettings(5000, 1024, 0.001),
        eff_two=StageSettings(500, 4096, 0.0002),
        tan_one=(1.0e-2, 1.6e-4, 148.4),
        tan_two=(1.1e-2, 0.6e-4, 150.3),
        r_eq=1.84345,
        angle_deg=110.6,
        units="R/R_eq",
    ),
}


def system_preset(name: str) -> SystemPreset:
    try:
        return SYSTEMS[name]
    except KeyError:
        known = ", ".join(sorted(SYSTEMS))
        raise ValueError(f"unknown system {name!r}; known systems: {known}") from None


_STAGE_FIELD = {
    HeadKind.BARE_ONE: "bare_one",
    HeadKind.EFF_ONE: "eff_one",
    HeadKind.BARE_TWO: "bare_two",
    HeadKind.EFF_TWO: "eff_two",
}


def training_config(
    system: str, stage: HeadKind, *, profile: str = "paper", seed: int = 0, **overrides
) -> TrainConfig:
    """Published TrainConfig for one system and stage under a profile.

    ``overrides`` replace individual TrainConfig fields (epochs, batch_size,
    base_lr, ...), which is how CLI flags and config files take precedence.
    """
    preset = system_preset(system)
    settings: StageSettings = getattr(preset, _STAGE_FIELD[stage])
    net = PROFILES[profile] if profile in PROFILES else None
    if net is None:
        known = ", ".join(sorted(PROFILES))
        raise ValueError(f"unknown profile {profile!r}; known profiles: {known}")
    fields = dict(
        stage=stage,
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        base_lr=settings.base_lr,
        seed=seed,
        ell=net.ell,
        hidden=net.hidden,
        freeze_orbitals=settings.freeze_orbitals,
        kernel_polish=settings.kernel_polish,
    )
    fields.update(overrides)
    return TrainConfig(**fields)


# ---------------------------------------------------------------------------
# planted-data presets
# ---------------------------------------------------------------------------

#: Desk-profile training settings tuned for the planted dataset (see the
#: module docstring: ell=32, hidden [64, 64]).  Stage 1 runs a long
#: full-batch cosine schedule, which converges far deeper than small
#: minibatches here, then solves the kernel exactly for the trained
#: features.  Stage 2 freezes the orbital networks so the spectral
#: deformation in the data lands in the kernel, where the analysis reads
#: it; with frozen networks the fine-tune is linear in the kernel and the
#: exact solve makes the Adam epochs a short refinement.
DESK_STAGE1 = StageSettings(
    epochs=60000, batch_size=4096, base_lr=0.005, kernel_polish=True
)
DESK_STAGE2 = StageSettings(
    epochs=500, batch_size=4096, base_lr=0.002,
    freeze_orbitals=True, kernel_polish=True,
)

#: fine-tune reference geometries of the desk plant (on its 61-point grid)
DESK_REFS = (1.86, 2.26, 2.66, 2.96)

PLANT_PRESETS: dict[str, PlantSpec] = {
    # full-size plant mirroring the published H4 two-body tangent magnitudes
    "default-h4": PlantSpec(
        n_orb=4,
        ell=300,
        geometries=_grid(1.8, 3.0, 13),
        rate=1.0e-2,
        amplitude=0.6e-4,
        center=149.8,
        seed=0,
        system="planted-h4",
    ),
    # Reduced plant for the desk profile: same construction, 61 geometries,
    # tangent center in the middle of the 32-point spectrum, rate scaled to
    # keep the argument range of the published law.  The amplitude is large
    # enough that the spectral deformation dominates the stage-1 fit error,
    # the spectrum floor keeps eigenvalue ratios well conditioned, and
    # eta=0 puts the entire bare->effective change in the kernel, which is
    # what the recovery pipeline measures.
    "desk": PlantSpec(
        n_orb=4,
        ell=32,
        geometries=_grid(1.8, 3.0, 61),
        rate=0.094,
        amplitude=0.02,
        center=16.0,
        spectrum_lo=0.2,
        eta=0.0,
        target_rms=1.5e-3,
        fourier_scale=0.2,
        seed=11,
        system="planted-desk",
    ),
}


def plant_preset(name: str) -> PlantSpec:
    try:
        return PLANT_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PLANT_PRESETS))
        raise ValueError(f"unknown plant {name!r}; known plants: {known}") from None


def usage_lines() -> list[str]:
    """Human-readable preset summary for the CLI usage text."""
    lines = ["named systems (geometry grid; per-stage epochs/batch/lr):"]
    for preset in SYSTEMS.values():
        geo = f"{preset.geometries[0]:g}..{preset.geometries[-1]:g} ({len(preset.geometries)} pts, {preset.units})"
        lines.append(f"  {preset.name:4s} n_orb={preset.n_orb}  grid {geo}  refs {', '.join(f'{r:g}' for r in preset.refs)}")
        for label, st in (
            ("bare one-body", preset.bare_one),
            ("eff one-body ", preset.eff_one),
            ("bare two-body", preset.bare_two),
            ("eff two-body ", preset.eff_two),
        ):
            lines.append(f"       {label}: {st.epochs} epochs, batch {st.batch_size}, lr {st.base_lr:g}")
    lines.append("plants: " + ", ".join(sorted(PLANT_PRESETS)))
    lines.append("profiles: " + ", ".join(f"{p.name} (ell={p.ell}, hidden {list(p.hidden)})" for p in PROFILES.values()))
    return lines
