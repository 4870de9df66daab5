"""Two-stage training: bare tensors first, effective tensors by fine-tuning.

Stage 1 fits an orbital network plus a symmetric kernel to the bare
tensors across many geometries.  Stage 2 copies those parameters (two
copies of the network for the two-body head, one for one-body), starts
the effective kernel from the bare one, and fine-tunes on the effective
tensors at a small set of reference geometries.  Because the effective
head collapses to the bare head when its two networks coincide, the
fine-tune starts from (numerically) zero excess loss when the effective
data equals the bare data.

The loss is mean squared error over the entries of the nonsymmetric
unit; each canonical representative counts once, without orbit
multiplicity weighting.  Reported metrics are mean absolute error, both
over the unit and over the full expanded tensor.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .heads import (
    HeadKind,
    KernelMatrix,
    eval_bare_two,
    eval_eff_two,
    eval_one,
)
from .nn import AdamState, OrbitalNet, adam_step, load_kernel, load_net, save_kernel, save_net
from .tensors import (
    GeometrySeries,
    Kind,
    nonsymmetric_unit,
    one_body_representatives,
    one_body_unit,
    orbit,
    orbit_size,
    symmetry_for,
    two_body_representatives,
)

__all__ = [
    "BareInteractionModel",
    "EffectiveInteractionModel",
    "FitReport",
    "GeometryMAE",
    "TrainConfig",
    "evaluate_mae",
    "finetune_effective",
    "load_model",
    "save_model",
    "train_bare",
]

MODEL_FORMAT = "tanfold-model v1"

#: stage-1 kernel init: random symmetric, rescaled so the initial
#: predictions have this fraction of the target RMS (removes the
#: scale-adaption transient at the start of training)
KERNEL_INIT_FRACTION = 0.5


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run."""

    stage: HeadKind
    epochs: int
    batch_size: int
    base_lr: float
    seed: int = 0
    ell: int = 32
    hidden: tuple[int, ...] = (64, 64)
    freeze_orbitals: bool = False
    kernel_polish: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.base_lr <= 0.0:
            raise ValueError("base_lr must be positive")
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))


@dataclass(frozen=True)
class GeometryMAE:
    geometry: float
    unit_mae: float
    full_mae: float
    split: str  # "train" or "test"


@dataclass(frozen=True)
class FitReport:
    """Losses and per-geometry errors of a run; wall time is informational
    only and excluded from equality."""

    config: TrainConfig
    initial_loss: float
    final_loss: float
    per_geometry: tuple[GeometryMAE, ...]
    wall_time: float = field(compare=False, default=0.0)

    def _mean(self, split: str) -> float:
        vals = [g.unit_mae for g in self.per_geometry if g.split == split]
        return float(np.mean(vals)) if vals else math.nan

    @property
    def train_mae(self) -> float:
        return self._mean("train")

    @property
    def test_mae(self) -> float:
        return self._mean("test")


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

def _scale(geometry_range, r: float) -> float:
    lo, hi = geometry_range
    return (r - lo) / (hi - lo) if hi > lo else 0.0


class _ModelBase:
    def _features(self, net: OrbitalNet, geometry: float) -> np.ndarray:
        x = net.embed(range(net.n_orb), _scale(self.geometry_range, geometry))
        return net.forward(x)

    @property
    def n_orb(self) -> int:
        return self.net.n_orb

    def predict_unit(self, geometry: float):
        """(index, value) pairs over the nonsymmetric unit at one geometry."""
        full = self.predict_full(geometry)
        if self.head.body == 1:
            return [(idx, full[idx]) for idx in one_body_representatives(self.n_orb)]
        sym = symmetry_for(self.head.kind)
        return [(idx, full[idx]) for idx in two_body_representatives(self.n_orb, sym)]


@dataclass(eq=False)
class BareInteractionModel(_ModelBase):
    """Stage-1 model: one orbital network and one symmetric kernel."""

    head: HeadKind
    net: OrbitalNet
    kernel: KernelMatrix
    geometry_range: tuple[float, float]
    system: str = ""

    def __post_init__(self):
        if self.head not in (HeadKind.BARE_ONE, HeadKind.BARE_TWO):
            raise ValueError(f"bare model cannot hold head {self.head.name}")

    def predict_full(self, geometry: float) -> np.ndarray:
        f = self._features(self.net, geometry)
        n = self.n_orb
        if self.head is HeadKind.BARE_ONE:
            out = np.zeros((n, n))
            for p, q in one_body_representatives(n):
                out[p, q] = out[q, p] = eval_one(f[p], f[q], self.kernel)
            return out
        out = np.zeros((n,) * 4)
        sym = symmetry_for(Kind.BARE)
        for rep in two_body_representatives(n, sym):
            p, q, r, s = rep
            v = eval_bare_two(f[p], f[q], f[r], f[s], self.kernel)
            for member in orbit(rep, sym):
                out[member] = v
        return out


@dataclass(eq=False)
class EffectiveInteractionModel(_ModelBase):
    """Stage-2 model; the two-body head carries two orbital networks."""

    head: HeadKind
    net: OrbitalNet
    net_tilde: OrbitalNet | None
    kernel: KernelMatrix
    geometry_range: tuple[float, float]
    system: str = ""

    def __post_init__(self):
        if self.head not in (HeadKind.EFF_ONE, HeadKind.EFF_TWO):
            raise ValueError(f"effective model cannot hold head {self.head.name}")
        if (self.net_tilde is None) != (self.head is HeadKind.EFF_ONE):
            raise ValueError("EFF_TWO needs a second network; EFF_ONE must not have one")

    def predict_full(self, geometry: float) -> np.ndarray:
        f = self._features(self.net, geometry)
        n = self.n_orb
        if self.head is HeadKind.EFF_ONE:
            out = np.zeros((n, n))
            for p, q in one_body_representatives(n):
                out[p, q] = out[q, p] = eval_one(f[p], f[q], self.kernel)
            return out
        ft = self._features(self.net_tilde, geometry)
        out = np.zeros((n,) * 4)
        sym = symmetry_for(Kind.EFFECTIVE)
        for rep in two_body_representatives(n, sym):
            p, q, r, s = rep
            v = eval_eff_two(
                f[p], f[q], f[r], f[s], ft[p], ft[q], ft[r], ft[s], self.kernel
            )
            for member in orbit(rep, sym):
                out[member] = v
        return out


# ---------------------------------------------------------------------------
# training engine
# ---------------------------------------------------------------------------

@dataclass
class _Samples:
    x_all: np.ndarray    # (n_geo * n_orb, n_orb + 1) network inputs
    base: np.ndarray     # (N,) row offset of each sample's geometry block
    idx: np.ndarray      # (N, 2) or (N, 4) orbital indices
    y: np.ndarray        # (N,) target entries
    n_orb: int


def _collect_samples(series, kind, geometries, body, net, geometry_range):
    rows_per_geo = net.n_orb
    x_blocks, base, idx, y = [], [], [], []
    for gi, g in enumerate(geometries):
        tset = series.get(g, kind)
        x_blocks.append(net.embed(range(net.n_orb), _scale(geometry_range, g)))
        unit = one_body_unit(tset) if body == 1 else nonsymmetric_unit(tset)
        for index, value in unit:
            base.append(gi * rows_per_geo)
            idx.append(index)
            y.append(value)
    return _Samples(
        x_all=np.vstack(x_blocks),
        base=np.asarray(base, dtype=np.intp),
        idx=np.asarray(idx, dtype=np.intp),
        y=np.asarray(y, dtype=np.float64),
        n_orb=net.n_orb,
    )


def _batch_loss(head, phi, phit, w, samples, sel, with_grads):
    """Loss over ``sel`` plus (dW, dPhi, dPhit) when ``with_grads``."""
    base = samples.base[sel]
    idx = samples.idx[sel]
    y = samples.y[sel]
    inv = 1.0 / y.size

    if head.body == 1:
        fp, fq = phi[base + idx[:, 0]], phi[base + idx[:, 1]]
        fqw = fq @ w
        v = np.einsum("ij,ij->i", fp, fqw)
        resid = v - y
        loss = float(resid @ resid) * inv
        if not with_grads:
            return loss, None, None, None
        dv = (2.0 * inv) * resid
        dw = (dv[:, None] * fp).T @ fq
        dphi = np.zeros_like(phi)
        np.add.at(dphi, base + idx[:, 0], dv[:, None] * fqw)
        np.add.at(dphi, base + idx[:, 1], dv[:, None] * (fp @ w))
        return loss, 0.5 * (dw + dw.T), dphi, None

    p, q, r, s = (base + idx[:, k] for k in range(4))
    if head is HeadKind.BARE_TWO:
        a = phi[p] * phi[q]
        b = phi[r] * phi[s]
        bw = b @ w
        v = np.einsum("ij,ij->i", a, bw)
        resid = v - y
        loss = float(resid @ resid) * inv
        if not with_grads:
            return loss, None, None, None
        dv = (2.0 * inv) * resid
        dw = (dv[:, None] * a).T @ b
        da = dv[:, None] * bw
        db = dv[:, None] * (a @ w)
        dphi = np.zeros_like(phi)
        np.add.at(dphi, p, da * phi[q])
        np.add.at(dphi, q, da * phi[p])
        np.add.at(dphi, r, db * phi[s])
        np.add.at(dphi, s, db * phi[r])
        return loss, 0.5 * (dw + dw.T), dphi, None

    # EFF_TWO: v = (a1 W b1 + a2 W b2) / 2 with the tilde family interleaved
    a1 = phi[p] * phit[q]
    b1 = phi[r] * phit[s]
    a2 = phi[q] * phit[p]
    b2 = phi[s] * phit[r]
    b1w = b1 @ w
    b2w = b2 @ w
    v = 0.5 * (np.einsum("ij,ij->i", a1, b1w) + np.einsum("ij,ij->i", a2, b2w))
    resid = v - y
    loss = float(resid @ resid) * inv
    if not with_grads:
        return loss, None, None, None
    h = (1.0 * inv) * resid  # = 0.5 * dv
    dw = (h[:, None] * a1).T @ b1 + (h[:, None] * a2).T @ b2
    da1 = h[:, None] * b1w
    db1 = h[:, None] * (a1 @ w)
    da2 = h[:, None] * b2w
    db2 = h[:, None] * (a2 @ w)
    dphi = np.zeros_like(phi)
    dphit = np.zeros_like(phit)
    np.add.at(dphi, p, da1 * phit[q])
    np.add.at(dphit, q, da1 * phi[p])
    np.add.at(dphi, r, db1 * phit[s])
    np.add.at(dphit, s, db1 * phi[r])
    np.add.at(dphi, q, da2 * phit[p])
    np.add.at(dphit, p, da2 * phi[q])
    np.add.at(dphi, s, db2 * phit[r])
    np.add.at(dphit, r, db2 * phi[s])
    return loss, 0.5 * (dw + dw.T), dphi, dphit


def _target_scale(y: np.ndarray) -> float:
    """RMS of the training targets, or 1.0 when they are all zero.

    Training runs on targets divided by this scale and the kernel is
    multiplied back afterwards (predictions are linear in the kernel), so
    optimizer behavior does not depend on the units of the data.  Without
    this, small-magnitude targets push gradients below Adam's epsilon and
    the effective step size collapses.
    """
    rms = float(np.sqrt(np.mean(np.square(y)))) if y.size else 0.0
    return rms if rms > 0.0 else 1.0


def _calibrated_kernel(head, net, samples, ell, seed) -> np.ndarray:
    """Random symmetric kernel rescaled to match the data scale.

    The bilinear head is linear in the kernel, so scaling the kernel by
    ``c`` scales the initial predictions by ``c``.  Choose ``c`` so the
    initial prediction RMS is ``KERNEL_INIT_FRACTION`` of the target RMS,
    which keeps the start of training independent of the units of the
    planted data.  ``mean(pred**2)`` comes out of three loss evaluations:
    ``L(w) = mean((pred - y)**2)`` gives
    ``mean(pred**2) = (L(+w) + L(-w)) / 2 - L(0)``.
    """
    w1 = KernelMatrix.random(ell, scale=1.0, seed=seed).matrix.copy()
    phi = net.forward(samples.x_all)
    sel = np.arange(samples.y.size)

    def loss_at(mat):
        loss, *_ = _batch_loss(head, phi, None, mat, samples, sel, False)
        return loss

    loss_zero = loss_at(np.zeros_like(w1))
    mean_pred_sq = 0.5 * (loss_at(w1) + loss_at(-w1)) - loss_zero
    if loss_zero <= 0.0 or mean_pred_sq <= 0.0:
        return 0.2 * w1
    scale = KERNEL_INIT_FRACTION * math.sqrt(loss_zero / mean_pred_sq)
    return scale * w1


#: size guard for the exact kernel solve (entries of the design matrix)
_POLISH_LIMIT = 2 * 10**8

#: relative singular-value cutoff for the kernel solve.  Directions of the
#: design matrix below this fraction of the leading singular value are
#: barely constrained by the data; solving along them amplifies roundoff
#: into enormous kernel components, so they are left at ``w_base``.
_POLISH_RCOND = 1e-6


def _solve_kernel(head, nets, samples, w_base) -> np.ndarray:
    """Truncated least-squares kernel for the current (frozen) features.

    Predictions are linear in the kernel, so once the networks are fixed
    the optimal symmetric kernel solves an ordinary least-squares problem.
    This returns ``w_base`` plus the minimum-norm correction that attains
    the least-squares optimum over the well-conditioned directions of the
    feature design (cutoff ``_POLISH_RCOND``).  Solving exactly (a) removes
    kernel components invisible to the data, which a stochastic optimizer
    accumulates while the features are still drifting, and (b) when
    fine-tuning keeps the kernel as close as possible to its transferred
    initialization.  Only components the data constrains are changed.
    """
    ell = w_base.shape[0]
    n = samples.y.size
    if n * ell * ell > _POLISH_LIMIT:
        raise ValueError(
            f"kernel_polish needs n_samples * ell**2 <= {_POLISH_LIMIT:g}; "
            f"got {n} * {ell}**2"
        )
    phi = nets[0].forward(samples.x_all)
    phit = nets[1].forward(samples.x_all) if len(nets) > 1 else None
    base, idx = samples.base, samples.idx
    if head.body == 1:
        design = np.einsum(
            "ki,kj->kij", phi[base + idx[:, 0]], phi[base + idx[:, 1]]
        )
    else:
        p, q, r, s = (base + idx[:, k] for k in range(4))
        if head is HeadKind.BARE_TWO:
            design = np.einsum("ki,kj->kij", phi[p] * phi[q], phi[r] * phi[s])
        else:
            design = 0.5 * (
                np.einsum("ki,kj->kij", phi[p] * phit[q], phi[r] * phit[s])
                + np.einsum("ki,kj->kij", phi[q] * phit[p], phi[s] * phit[r])
            )
    design = 0.5 * (design + design.transpose(0, 2, 1))
    design = design.reshape(n, ell * ell)
    resid = samples.y - design @ w_base.ravel()
    delta, *_ = np.linalg.lstsq(design, resid, rcond=_POLISH_RCOND)
    w = w_base + delta.reshape(ell, ell)
    return 0.5 * (w + w.T)


def _full_loss(head, nets, w, samples) -> float:
    phi = nets[0].forward(samples.x_all)
    phit = nets[1].forward(samples.x_all) if len(nets) > 1 else None
    sel = np.arange(samples.y.size)
    loss, *_ = _batch_loss(head, phi, phit, w, samples, sel, with_grads=False)
    return loss


def _train_loop(head, nets, w, samples, cfg) -> tuple[float, float]:
    """Adam/cosine minimization; mutates ``nets`` and ``w`` in place."""
    n = samples.y.size
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    total_steps = cfg.epochs * steps_per_epoch

    params = [] if cfg.freeze_orbitals else [p for net in nets for p in net.params]
    params = params + [w]
    state = AdamState.for_params(params, cfg.base_lr, total_steps)
    rng = np.random.default_rng(cfg.seed)

    initial = _full_loss(head, nets, w, samples)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            sel = order[start : start + cfg.batch_size]
            caches = [net.forward(samples.x_all, with_cache=True) for net in nets]
            phi = caches[0][0]
            phit = caches[1][0] if len(caches) > 1 else None
            loss, dw, dphi, dphit = _batch_loss(
                head, phi, phit, w, samples, sel, with_grads=True
            )
            if not math.isfinite(loss):
                raise FloatingPointError(
                    f"non-finite loss at epoch {epoch}, step {state.t}"
                )
            if cfg.freeze_orbitals:
                grads = [dw]
            else:
                grads = []
                for net, cache, dout in zip(nets, caches, (dphi, dphit)):
                    net_grads, _ = net.backward(cache[1], dout)
                    grads.extend(net_grads)
                grads.append(dw)
            adam_step(params, grads, state)
    return initial, _full_loss(head, nets, w, samples)


# ---------------------------------------------------------------------------
# public pipeline
# ---------------------------------------------------------------------------

def _match_geometries(requested, available, *, rel_tol: float = 1e-9):
    """Snap requested geometries onto the exact stored values.

    Stored geometries and user-typed ones (CLI flags, presets) can differ
    in the last bits, so each request maps to the nearest stored value
    within ``rel_tol``.  Returns ``(matched, missing)``.
    """
    avail = np.asarray(sorted(set(float(g) for g in available)), dtype=np.float64)
    matched, missing = [], []
    for r in requested:
        r = float(r)
        if avail.size:
            nearest = float(avail[np.argmin(np.abs(avail - r))])
            if abs(nearest - r) <= rel_tol * max(1.0, abs(r)):
                matched.append(nearest)
                continue
        missing.append(r)
    return matched, missing


def evaluate_mae(model, series: GeometrySeries, train_geometries=()) -> tuple[GeometryMAE, ...]:
    """Per-geometry MAE of ``model`` against the matching tensors.

    ``unit_mae`` averages over the nonsymmetric unit (each representative
    once); ``full_mae`` weights by orbit size, i.e. averages over the full
    expanded tensor.  Geometries in ``train_geometries`` are labeled
    "train", all others "test".
    """
    kind = model.head.kind
    matched, _ = _match_geometries(train_geometries, series.geometries(kind))
    train_set = set(matched)
    out = []
    for g in series.geometries(kind):
        tset = series.get(g, kind)
        if tset.n_orb != model.n_orb:
            raise ValueError("model and series disagree on n_orb")
        target = tset.one_body if model.head.body == 1 else tset.two_body
        pred = model.predict_full(g)
        err = np.abs(pred - target)
        if model.head.body == 1:
            reps = one_body_representatives(tset.n_orb)
            unit = float(np.mean([err[i] for i in reps]))
        else:
            sym = symmetry_for(kind)
            reps = two_body_representatives(tset.n_orb, sym)
            unit = float(np.mean([err[i] for i in reps]))
        out.append(
            GeometryMAE(
                geometry=float(g),
                unit_mae=unit,
                full_mae=float(err.mean()),
                split="train" if g in train_set else "test",
            )
        )
    return tuple(out)


def train_bare(
    series: GeometrySeries, cfg: TrainConfig, holdout=()
) -> tuple[BareInteractionModel, FitReport]:
    """Stage 1: fit network and kernel to the bare tensors.

    All bare geometries in ``series`` are used for training except those
    listed in ``holdout``, which are only evaluated.
    """
    if cfg.stage not in (HeadKind.BARE_ONE, HeadKind.BARE_TWO):
        raise ValueError(f"train_bare needs a bare stage, got {cfg.stage.name}")
    start = time.perf_counter()
    all_geos = [float(g) for g in series.geometries(Kind.BARE)]
    held, _ = _match_geometries(holdout, all_geos)
    train_geos = [g for g in all_geos if g not in set(held)]
    if not train_geos:
        raise ValueError("series contains no bare training geometries")
    geometry_range = (min(all_geos), max(all_geos))

    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    net = OrbitalNet(
        series.n_orb, cfg.ell, hidden=cfg.hidden,
        seed=int(seeds[0].generate_state(1)[0]),
    )
    samples = _collect_samples(
        series, Kind.BARE, train_geos, cfg.stage.body, net, geometry_range
    )
    scale = _target_scale(samples.y)
    samples.y = samples.y / scale
    w = _calibrated_kernel(
        cfg.stage, net, samples, cfg.ell, int(seeds[1].generate_state(1)[0])
    )
    initial, final = _train_loop(cfg.stage, [net], w, samples, cfg)
    if cfg.kernel_polish:
        w = _solve_kernel(cfg.stage, [net], samples, np.zeros_like(w))
        final = _full_loss(cfg.stage, [net], w, samples)
    sq = scale * scale

    model = BareInteractionModel(
        head=cfg.stage,
        net=net,
        kernel=KernelMatrix(scale * w, symmetrize=True),
        geometry_range=geometry_range,
        system=series.system,
    )
    report = FitReport(
        config=cfg,
        initial_loss=sq * initial,
        final_loss=sq * final,
        per_geometry=evaluate_mae(model, series, train_geometries=train_geos),
        wall_time=time.perf_counter() - start,
    )
    return model, report


def finetune_effective(
    series: GeometrySeries,
    bare_model: BareInteractionModel,
    cfg: TrainConfig,
    refs=None,
) -> tuple[EffectiveInteractionModel, FitReport]:
    """Stage 2: fine-tune on effective tensors at reference geometries.

    The network parameters are copied from the stage-1 model (twice for
    the two-body head) and the kernel starts from the bare kernel, so the
    initial predictions coincide with the stage-1 ones.  ``refs`` defaults
    to every geometry with effective tensors; other effective geometries
    are evaluated as the test split.
    """
    if cfg.stage not in (HeadKind.EFF_ONE, HeadKind.EFF_TWO):
        raise ValueError(f"finetune_effective needs an effective stage, got {cfg.stage.name}")
    if cfg.stage.body != bare_model.head.body:
        raise ValueError("stage-1 and stage-2 body ranks disagree")
    start = time.perf_counter()
    available = [float(g) for g in series.geometries(Kind.EFFECTIVE)]
    if refs is None:
        refs = available
    refs, missing = _match_geometries(refs, available)
    if missing:
        raise ValueError(f"no effective tensors at reference geometries {missing}")
    if not refs:
        raise ValueError("need at least one reference geometry")

    net = bare_model.net.copy()
    nets = [net]
    net_tilde = None
    if cfg.stage is HeadKind.EFF_TWO:
        net_tilde = bare_model.net.copy()
        nets.append(net_tilde)
    samples = _collect_samples(
        series, Kind.EFFECTIVE, sorted(refs), cfg.stage.body,
        net, bare_model.geometry_range,
    )
    scale = _target_scale(samples.y)
    samples.y = samples.y / scale
    w = bare_model.kernel.matrix / scale
    w_start = w.copy()
    initial, final = _train_loop(cfg.stage, nets, w, samples, cfg)
    if cfg.kernel_polish:
        w = _solve_kernel(cfg.stage, nets, samples, w_start)
        final = _full_loss(cfg.stage, nets, w, samples)
    sq = scale * scale

    model = EffectiveInteractionModel(
        head=cfg.stage,
        net=net,
        net_tilde=net_tilde,
        kernel=KernelMatrix(scale * w, symmetrize=True),
        geometry_range=bare_model.geometry_range,
        system=series.system,
    )
    report = FitReport(
        config=cfg,
        initial_loss=sq * initial,
        final_loss=sq * final,
        per_geometry=evaluate_mae(model, series, train_geometries=refs),
        wall_time=time.perf_counter() - start,
    )
    return model, report


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_model(model, directory: str | os.PathLike) -> None:
    """Write a model directory: metadata JSON, network(s), kernel."""
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    nets = [model.net] if getattr(model, "net_tilde", None) is None else [model.net, model.net_tilde]
    net_files = [f"net{i}.npz" for i in range(len(nets))]
    for fname, net in zip(net_files, nets):
        save_net(os.path.join(directory, fname), net)
    save_kernel(os.path.join(directory, "kernel.npz"), model.kernel.matrix)
    meta = {
        "format": MODEL_FORMAT,
        "head": model.head.name,
        "geometry_range": list(model.geometry_range),
        "system": model.system,
        "nets": net_files,
        "kernel": "kernel.npz",
    }
    with open(os.path.join(directory, "model.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(directory: str | os.PathLike):
    """Read a directory written by :func:`save_model`."""
    directory = os.fspath(directory)
    with open(os.path.join(directory, "model.json")) as fh:
        meta = json.load(fh)
    if meta.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {meta.get('format')!r}")
    head = HeadKind[meta["head"]]
    nets = [load_net(os.path.join(directory, f))[0] for f in meta["nets"]]
    kernel = KernelMatrix(load_kernel(os.path.join(directory, meta["kernel"]))[0])
    geometry_range = tuple(meta["geometry_range"])
    if head in (HeadKind.BARE_ONE, HeadKind.BARE_TWO):
        return BareInteractionModel(
            head=head, net=nets[0], kernel=kernel,
            geometry_range=geometry_range, system=meta.get("system", ""),
        )
    return EffectiveInteractionModel(
        head=head,
        net=nets[0],
        net_tilde=nets[1] if len(nets) > 1 else None,
        kernel=kernel,
        geometry_range=geometry_range,
        system=meta.get("system", ""),
    )
