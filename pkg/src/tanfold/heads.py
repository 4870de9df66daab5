"""Factorized bilinear heads that turn latent orbital vectors into tensor
entries.

A symmetric kernel acts on elementwise products of latent vectors:

* one-body:      ``(p|q)    = psi_p^T M psi_q``
* bare two-body: ``(pq|rs)  = (phi_p . phi_q)^T W (phi_r . phi_s)``
* effective two-body (four-fold symmetric by construction)::

      (pq|rs) = 1/2 [ (phi_p . phit_q)^T W (phi_r . phit_s)
                    + (phi_q . phit_p)^T W (phi_s . phit_r) ]

where ``.`` is the elementwise product and ``phit`` a second latent family.
Every bilinear form is evaluated as ``(x^T(Ky) + y^T(Kx))/2``; because IEEE
addition and multiplication are commutative, this makes the bare head
invariant under the full eight-fold index group and the effective head under
the four-fold group *to the bit*, and reduces the effective head to the bare
one bit-exactly when ``phit == phi``.
"""

from __future__ import annotations

import enum

import numpy as np

from .tensors import Kind

__all__ = [
    "HeadKind",
    "KernelMatrix",
    "sym_bilinear",
    "eval_one",
    "eval_bare_two",
    "eval_eff_two",
    "grad_one",
    "grad_bare_two",
    "grad_eff_two",
]


class HeadKind(enum.Enum):
    """Which head (and therefore which training stage) a model uses."""

    BARE_ONE = "bare-one"
    EFF_ONE = "eff-one"
    BARE_TWO = "bare-two"
    EFF_TWO = "eff-two"

    @property
    def body(self) -> int:
        return 1 if self in (HeadKind.BARE_ONE, HeadKind.EFF_ONE) else 2

    @property
    def kind(self) -> Kind:
        return Kind.BARE if self in (HeadKind.BARE_ONE, HeadKind.BARE_TWO) else Kind.EFFECTIVE

    @property
    def n_nets(self) -> int:
        """Distinct latent families the head consumes (phi and optionally phit)."""
        return 2 if self is HeadKind.EFF_TWO else 1


class KernelMatrix:
    """A square, exactly symmetric, finite float64 matrix.

    The constructor validates; ``symmetrize=True`` instead projects with
    ``(K + K^T)/2`` (which is exact for already-symmetric input).  The stored
    array is read-only; use :meth:`replace` to build an updated copy.
    """

    def __init__(self, matrix: np.ndarray, *, symmetrize: bool = False):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"kernel must be square, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("kernel contains non-finite entries")
        if symmetrize:
            m = (m + m.T) / 2.0
        elif not np.array_equal(m, m.T):
            raise ValueError("kernel is not exactly symmetric (pass symmetrize=True to project)")
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def random(cls, dim: int, scale: float = 1.0, seed: int = 0) -> "KernelMatrix":
        rng = np.random.default_rng(seed)
        return cls(rng.normal(scale=scale, size=(dim, dim)), symmetrize=True)

    def replace(self, matrix: np.ndarray) -> "KernelMatrix":
        return KernelMatrix(matrix, symmetrize=True)


def _as_matrix(kernel) -> np.ndarray:
    return kernel.matrix if isinstance(kernel, KernelMatrix) else np.asarray(kernel, dtype=np.float64)


def sym_bilinear(x: np.ndarray, y: np.ndarray, kernel) -> float:
    """``(x^T(Ky) + y^T(Kx))/2``: bitwise symmetric in ``(x, y)``.

    Equals ``x^T K y`` exactly in real arithmetic for symmetric ``K``.
    """
    k = _as_matrix(kernel)
    return 0.5 * (x @ (k @ y) + y @ (k @ x))


def eval_one(psi_p: np.ndarray, psi_q: np.ndarray, kernel) -> float:
    """One-body entry ``psi_p^T M psi_q`` (bitwise symmetric in p, q)."""
    return sym_bilinear(psi_p, psi_q, kernel)


def eval_bare_two(phi_p, phi_q, phi_r, phi_s, kernel) -> float:
    """Bare two-body entry; bitwise invariant under the eight-fold group."""
    return sym_bilinear(phi_p * phi_q, phi_r * phi_s, kernel)


def eval_eff_two(phi_p, phi_q, phi_r, phi_s, phit_p, phit_q, phit_r, phit_s, kernel) -> float:
    """Effective two-body entry; bitwise invariant under the four-fold group.

    With ``phit == phi`` (bitwise) this returns exactly
    :func:`eval_bare_two` of the same vectors.
    """
    a = sym_bilinear(phi_p * phit_q, phi_r * phit_s, kernel)
    b = sym_bilinear(phi_q * phit_p, phi_s * phit_r, kernel)
    return 0.5 * (a + b)


# ----------------------------------------------------------------------------
# Gradients (upstream is the scalar dLoss/dEntry)
# ----------------------------------------------------------------------------


def _sym_outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 0.5 * (np.outer(x, y) + np.outer(y, x))


def grad_one(psi_p, psi_q, kernel, upstream: float = 1.0):
    """Gradients of :func:`eval_one`: ``(dM, dpsi_p, dpsi_q)``.

    ``dM`` is the symmetric projection, so kernel updates stay symmetric.
    """
    k = _as_matrix(kernel)
    d_m = upstream * _sym_outer(psi_p, psi_q)
    return d_m, upstream * (k @ psi_q), upstream * (k @ psi_p)


def grad_bare_two(phi_p, phi_q, phi_r, phi_s, kernel, upstream: float = 1.0):
    """Gradients of :func:`eval_bare_two`: ``(dW, dphi_p, dphi_q, dphi_r, dphi_s)``."""
    k = _as_matrix(kernel)
    u = phi_p * phi_q
    v = phi_r * phi_s
    ku = k @ u
    kv = k @ v
    d_w = upstream * _sym_outer(u, v)
    return (
        d_w,
        upstream * kv * phi_q,
        upstream * kv * phi_p,
        upstream * ku * phi_s,
        upstream * ku * phi_r,
    )


def grad_eff_two(phi_p, phi_q, phi_r, phi_s, phit_p, phit_q, phit_r, phit_s, kernel, upstream: float = 1.0):
    """Gradients of :func:`eval_eff_two`.

    Returns ``(dW, (dphi_p, dphi_q, dphi_r, dphi_s),
    (dphit_p, dphit_q, dphit_r, dphit_s))``.
    """
    k = _as_matrix(kernel)
    a = phi_p * phit_q
    b = phi_r * phit_s
    c = phi_q * phit_p
    d = phi_s * phit_r
    ka, kb, kc, kd = k @ a, k @ b, k @ c, k @ d
    half = 0.5 * upstream
    d_w = half * (_sym_outer(a, b) + _sym_outer(c, d))
    d_phi = (half * kb * phit_q, half * kd * phit_p, half * ka * phit_s, half * kc * phit_r)
    d_phit = (half * kd * phi_q, half * kb * phi_p, half * kc * phi_s, half * ka * phi_r)
    return d_w, d_phi, d_phit
