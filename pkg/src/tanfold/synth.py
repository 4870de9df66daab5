"""Synthetic datasets with fully known ground truth.

Two generators live here:

* :func:`plant_series` builds a geometry series of bare and effective
  tensors from planted pseudo-orbital features and planted symmetric
  kernels whose spectra are linked by the tangent law.  Every hidden
  object (features, kernels, spectra, basis) is returned, so recovery
  pipelines can be scored against exact truth.
* :func:`toy_integrals_1d` produces a bare tensor set from honest 1-D
  quadrature: a harmonic one-body operator and a softened Coulomb
  two-body kernel over Gaussian basis functions.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import fftconvolve

from .heads import KernelMatrix, eval_bare_two, eval_eff_two, eval_one
from .tensors import (
    GeometrySeries,
    Kind,
    TensorSet,
    one_body_representatives,
    orbit,
    orbit_size,
    save_series,
    symmetry_for,
    two_body_representatives,
)

__all__ = [
    "GridSpec",
    "PlantResult",
    "PlantSpec",
    "plant_series",
    "refine",
    "save_plant",
    "toy_integrals_1d",
]

#: default RMS of the noise-free bare two-body entries (see PlantSpec.target_rms)
TARGET_RMS = 0.5

#: the tangent argument must stay this far away from +-pi/2
TAN_MARGIN = 1e-3

#: softening length of the 1-D interaction kernel 1/(|x - x'| + a)
SOFTENING = 0.1

_N_BASIS = 5
_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# planted factorized series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantSpec:
    """Parameters of a planted dataset.

    The defaults mirror the two-body tangent-law magnitudes of a four-orbital
    chain: rate 1.0e-2, amplitude 0.6e-4, center 149.8 over 300 latent
    dimensions.  ``eta`` scales the smooth multiplicative deformation that
    turns phi into the second two-body family; ``noise`` is the standard
    deviation of i.i.d. Gaussian noise added per canonical entry.
    """

    n_orb: int = 4
    ell: int = 300
    geometries: tuple[float, ...] = tuple(np.linspace(1.8, 3.0, 13).tolist())
    rate: float = 1.0e-2
    amplitude: float = 0.6e-4
    center: float = 149.8
    spectrum_lo: float = 0.05
    eta: float = 0.01
    noise: float = 0.0
    target_rms: float = TARGET_RMS
    fourier_scale: float = 1.0
    seed: int = 0
    system: str = "planted"

    def __post_init__(self):
        if self.n_orb < 1:
            raise ValueError("n_orb must be >= 1")
        if self.ell < 3:
            raise ValueError("ell must be >= 3")
        if not self.geometries:
            raise ValueError("need at least one geometry")
        if len(set(self.geometries)) != len(self.geometries):
            raise ValueError("geometries must be distinct")
        if not 0.0 < self.spectrum_lo <= 1.0:
            raise ValueError("spectrum_lo must lie in (0, 1]")
        if self.noise < 0.0 or self.eta < 0.0:
            raise ValueError("noise and eta must be non-negative")
        if self.target_rms <= 0.0:
            raise ValueError("target_rms must be positive")
        if self.fourier_scale < 0.0:
            raise ValueError("fourier_scale must be non-negative")
        if self.rate <= 0.0:
            raise ValueError("rate must be positive")
        cap = math.pi / 2 - TAN_MARGIN
        for i in (1.0, float(self.ell)):
            if abs(self.rate * (i - self.center)) >= cap:
                raise ValueError(
                    "tangent argument leaves (-pi/2, pi/2) over the index range"
                )


@dataclass(frozen=True)
class PlantResult:
    """A planted series together with every hidden object that built it."""

    spec: PlantSpec
    series: GeometrySeries
    w_bare: KernelMatrix
    w_eff: KernelMatrix
    m_bare: KernelMatrix
    m_eff: KernelMatrix
    two_body_spectrum: np.ndarray   # descending eigenvalues of w_bare
    one_body_spectrum: np.ndarray
    tan_factors: np.ndarray         # 1 + amplitude * tan(rate * (i - center))
    basis_two: np.ndarray           # shared eigenvectors of w_bare / w_eff
    basis_one: np.ndarray
    coef_phi: np.ndarray            # (n_orb, ell, 5) feature coefficients
    coef_psi: np.ndarray
    coef_deform: np.ndarray


def _basis_row(x: float) -> np.ndarray:
    return np.array(
        [1.0, x, x * x, math.sin(_TWO_PI * x), math.cos(_TWO_PI * x)]
    )


def _scaled(geometries, r: float) -> float:
    lo, hi = min(geometries), max(geometries)
    return (r - lo) / (hi - lo) if hi > lo else 0.0


def _orthogonal(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _planted_kernel(z: np.ndarray, eigenvalues: np.ndarray) -> KernelMatrix:
    return KernelMatrix((z * eigenvalues) @ z.T, symmetrize=True)


def _two_body_tensor(n_orb, kind, entry, noise, rng):
    sym = symmetry_for(kind)
    out = np.zeros((n_orb,) * 4)
    for rep in two_body_representatives(n_orb, sym):
        value = entry(*rep)
        if noise > 0.0:
            value += noise * rng.standard_normal()
        for member in orbit(rep, sym):
            out[member] = value
    return out


def _one_body_tensor(n_orb, entry, noise, rng):
    out = np.zeros((n_orb, n_orb))
    for p, q in one_body_representatives(n_orb):
        value = entry(p, q)
        if noise > 0.0:
            value += noise * rng.standard_normal()
        out[p, q] = out[q, p] = value
    return out


def _bare_rms(spec, coef_phi, kernel):
    """RMS of the noise-free bare two-body entries over probe geometries.

    Representatives are weighted by orbit size so this matches the RMS of
    the expanded tensors.
    """
    gs = sorted(spec.geometries)
    probe = {gs[0], gs[len(gs) // 2], gs[-1]}
    sym = symmetry_for(Kind.BARE)
    total, count = 0.0, 0
    reps = two_body_representatives(spec.n_orb, sym)
    for r in probe:
        phi = coef_phi @ _basis_row(_scaled(spec.geometries, r))
        for p, q, rr, s in reps:
            v = eval_bare_two(phi[p], phi[q], phi[rr], phi[s], kernel)
            k = orbit_size((p, q, rr, s), sym)
            total += k * v * v
            count += k
    return math.sqrt(total / count)


def plant_series(spec: PlantSpec) -> PlantResult:
    """Generate bare and effective tensors with planted ground truth.

    Bare entries come from smooth per-orbital feature vectors contracted
    with planted symmetric kernels.  The effective kernels share the bare
    eigenvectors, with each eigenvalue scaled by the tangent factor
    ``1 + amplitude * tan(rate * (i - center))`` (``i`` indexes the
    descending bare spectrum, 1-based).  Effective two-body entries use a
    second feature family ``phi*(1 + eta*d)`` with a smooth deformation
    ``d``, so their symmetry drops from 8-fold to 4-fold.  Optional noise
    is applied per canonical entry and expanded, preserving exact symmetry.
    """
    rng = np.random.default_rng(spec.seed)
    coef_phi = rng.standard_normal((spec.n_orb, spec.ell, _N_BASIS))
    coef_psi = rng.standard_normal((spec.n_orb, spec.ell, _N_BASIS))
    coef_def = rng.standard_normal((spec.n_orb, spec.ell, _N_BASIS))
    for coef in (coef_phi, coef_psi, coef_def):
        coef[:, :, 3:] *= spec.fourier_scale  # damp the oscillatory basis pair
    z_two = _orthogonal(rng, spec.ell)
    z_one = _orthogonal(rng, spec.ell)

    index = np.arange(1, spec.ell + 1, dtype=np.float64)
    tan_factors = 1.0 + spec.amplitude * np.tan(spec.rate * (index - spec.center))
    raw = np.geomspace(1.0, spec.spectrum_lo, spec.ell)

    # calibrate the overall kernel scale to the requested entry RMS
    rms = _bare_rms(spec, coef_phi, _planted_kernel(z_two, raw))
    if rms == 0.0:
        raise ValueError("degenerate plant: probe entries are all zero")
    eps_two = (spec.target_rms / rms) * raw
    eps_one = (spec.target_rms / rms) * raw

    w_bare = _planted_kernel(z_two, eps_two)
    w_eff = _planted_kernel(z_two, eps_two * tan_factors)
    m_bare = _planted_kernel(z_one, eps_one)
    m_eff = _planted_kernel(z_one, eps_one * tan_factors)

    sets = []
    for r in sorted(spec.geometries):
        x = _scaled(spec.geometries, r)
        row = _basis_row(x)
        phi = coef_phi @ row
        psi = coef_psi @ row
        phit = phi * (1.0 + spec.eta * (coef_def @ row))

        def bare_two(p, q, rr, s):
            return eval_bare_two(phi[p], phi[q], phi[rr], phi[s], w_bare)

        def eff_two(p, q, rr, s):
            return eval_eff_two(
                phi[p], phi[q], phi[rr], phi[s],
                phit[p], phit[q], phit[rr], phit[s], w_eff,
            )

        sets.append(
            TensorSet(
                geometry=r,
                kind=Kind.BARE,
                n_orb=spec.n_orb,
                scalar_term=0.0,
                one_body=_one_body_tensor(
                    spec.n_orb,
                    lambda p, q: eval_one(psi[p], psi[q], m_bare),
                    spec.noise, rng,
                ),
                two_body=_two_body_tensor(
                    spec.n_orb, Kind.BARE, bare_two, spec.noise, rng
                ),
                system=spec.system,
            )
        )
        sets.append(
            TensorSet(
                geometry=r,
                kind=Kind.EFFECTIVE,
                n_orb=spec.n_orb,
                scalar_term=0.0,
                one_body=_one_body_tensor(
                    spec.n_orb,
                    lambda p, q: eval_one(psi[p], psi[q], m_eff),
                    spec.noise, rng,
                ),
                two_body=_two_body_tensor(
                    spec.n_orb, Kind.EFFECTIVE, eff_two, spec.noise, rng
                ),
                system=spec.system,
            )
        )

    return PlantResult(
        spec=spec,
        series=GeometrySeries(system=spec.system, tensor_sets=tuple(sets)),
        w_bare=w_bare,
        w_eff=w_eff,
        m_bare=m_bare,
        m_eff=m_eff,
        two_body_spectrum=eps_two,
        one_body_spectrum=eps_one,
        tan_factors=tan_factors,
        basis_two=z_two,
        basis_one=z_one,
        coef_phi=coef_phi,
        coef_psi=coef_psi,
        coef_deform=coef_def,
    )


def save_plant(result: PlantResult, directory: str | os.PathLike) -> None:
    """Write the series as canonical tensor files plus full provenance.

    ``plant.json`` holds the generating parameters; ``provenance.npz``
    holds every planted array (kernels, spectra, bases, coefficients).
    """
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    save_series(result.series, directory)
    with open(os.path.join(directory, "plant.json"), "w") as fh:
        json.dump(asdict(result.spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
    np.savez(
        os.path.join(directory, "provenance.npz"),
        w_bare=result.w_bare.matrix,
        w_eff=result.w_eff.matrix,
        m_bare=result.m_bare.matrix,
        m_eff=result.m_eff.matrix,
        two_body_spectrum=result.two_body_spectrum,
        one_body_spectrum=result.one_body_spectrum,
        tan_factors=result.tan_factors,
        basis_two=result.basis_two,
        basis_one=result.basis_one,
        coef_phi=result.coef_phi,
        coef_psi=result.coef_psi,
        coef_deform=result.coef_deform,
    )


# ---------------------------------------------------------------------------
# toy 1-D quadrature integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform quadrature grid on [x_min, x_max] with n_points nodes."""

    x_min: float = -8.0
    x_max: float = 8.0
    n_points: int = 65537

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_points < 3:
            raise ValueError("need at least 3 grid points")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


def refine(grid: GridSpec) -> GridSpec:
    """Halve the spacing while keeping every existing node."""
    return GridSpec(grid.x_min, grid.x_max, 2 * grid.n_points - 1)


def toy_integrals_1d(
    basis: list[tuple[float, float]],
    grid: GridSpec = GridSpec(),
    *,
    geometry: float = 0.0,
) -> TensorSet:
    """Bare tensors from 1-D quadrature over Gaussian basis functions.

    ``basis`` lists (center, width) pairs for normalized Gaussians.  The
    one-body operator is -(1/2) d^2/dx^2 + (1/2) x^2 with a three-point
    Laplacian stencil; the two-body kernel is 1/(|x - x'| + 0.1).  Both are
    integrated with trapezoid weights; the double integral is evaluated by
    FFT convolution over the difference kernel, which is the same quadrature
    sum to rounding.  Entries are computed once per canonical index and
    expanded, so the output is exactly symmetric.
    """
    if not basis:
        raise ValueError("need at least one basis function")
    widths = np.array([w for _, w in basis], dtype=np.float64)
    if (widths <= 0).any():
        raise ValueError("widths must be positive")
    h = grid.spacing
    if (widths / h).min() < 8.0:
        warnings.warn(
            "quadrature grid under-resolves a basis width "
            f"({widths.min():.3g} vs spacing {h:.3g}); refine the grid",
            stacklevel=2,
        )

    x = grid.nodes()
    n = grid.n_points
    n_orb = len(basis)
    funcs = np.empty((n_orb, n))
    for i, (c, w) in enumerate(basis):
        funcs[i] = (w * math.sqrt(math.pi)) ** -0.5 * np.exp(
            -((x - c) ** 2) / (2.0 * w * w)
        )

    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2.0

    # one-body: phi_p^T diag(weights) (T + V) phi_q, zero-padded stencil
    lap = np.empty_like(funcs)
    lap[:, 1:-1] = funcs[:, :-2] - 2.0 * funcs[:, 1:-1] + funcs[:, 2:]
    lap[:, 0] = -2.0 * funcs[:, 0] + funcs[:, 1]
    lap[:, -1] = funcs[:, -2] - 2.0 * funcs[:, -1]
    h_funcs = -0.5 * lap / (h * h) + 0.5 * x * x * funcs

    one_body = np.zeros((n_orb, n_orb))
    for p, q in one_body_representatives(n_orb):
        v = 0.5 * (
            float(weights @ (funcs[p] * h_funcs[q]))
            + float(weights @ (funcs[q] * h_funcs[p]))
        )
        one_body[p, q] = one_body[q, p] = v

    # two-body: pair densities against the convolved softened kernel
    pair_index = {}
    pairs = []
    for p in range(n_orb):
        for q in range(p, n_orb):
            pair_index[(p, q)] = pair_index[(q, p)] = len(pairs)
            pairs.append(weights * funcs[p] * funcs[q])
    pairs = np.array(pairs)

    lags = np.arange(-(n - 1), n, dtype=np.float64) * h
    kernel = 1.0 / (np.abs(lags) + SOFTENING)
    convolved = np.array(
        [fftconvolve(row, kernel)[n - 1 : 2 * n - 1] for row in pairs]
    )

    two_body = np.zeros((n_orb,) * 4)
    sym = symmetry_for(Kind.BARE)
    for rep in two_body_representatives(n_orb, sym):
        p, q, r, s = rep
        a, b = pair_index[(p, q)], pair_index[(r, s)]
        v = 0.5 * (pairs[a] @ convolved[b] + pairs[b] @ convolved[a])
        for member in orbit(rep, sym):
            two_body[member] = v

    return TensorSet(
        geometry=geometry,
        kind=Kind.BARE,
        n_orb=n_orb,
        scalar_term=0.0,
        one_body=one_body,
        two_body=two_body,
        system="toy-1d",
    )
