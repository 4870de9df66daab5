"""Interaction tensor containers, permutational symmetry, and text file I/O.

A :class:`TensorSet` holds the scalar, one-body and two-body interaction
coefficients of a single Hamiltonian at a single geometry, in Mulliken
``(pq|rs)`` index convention.  Bare tensors are closed under the eight-fold
permutation group

    (pq|rs) = (qp|rs) = (pq|sr) = (qp|sr) = (rs|pq) = (sr|pq) = (rs|qp) = (sr|qp)

while downfolded ("effective") tensors only retain the four-fold subgroup

    (pq|rs) = (qp|sr) = (rs|pq) = (sr|qp).

Orbital indices are 0-based everywhere in memory; the text formats are
1-based, and the conversion happens in the readers/writers.
"""

from __future__ import annotations

import enum
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Kind",
    "Symmetry",
    "TensorSet",
    "GeometrySeries",
    "TensorFormatError",
    "SymmetryViolationError",
    "canonical_index",
    "orbit",
    "two_body_representatives",
    "one_body_representatives",
    "orbit_size",
    "nonsymmetric_unit",
    "one_body_unit",
    "load_fcidump",
    "save_canonical",
    "load_canonical",
    "save_series",
    "load_series",
]

FORMAT_TAG = "tanfold-tensor v1"

#: Conflicting duplicate entries in a file are rejected beyond this spread.
DUPLICATE_TOL = 1e-12

#: Symmetry violations of in-memory tensors are rejected beyond this spread;
#: anything below is removed exactly by orbit averaging.
SYMMETRY_TOL = 1e-10


class TensorFormatError(ValueError):
    """Raised for malformed, inconsistent, or mislabelled tensor files."""


class SymmetryViolationError(ValueError):
    """Raised when a tensor violates its declared permutational symmetry."""


class Kind(enum.Enum):
    """Which Hamiltonian a tensor set belongs to."""

    BARE = "bare"
    EFFECTIVE = "effective"


class Symmetry(enum.Enum):
    """Two-body index permutation group."""

    EIGHT_FOLD = "eight-fold"
    FOUR_FOLD = "four-fold"

    @property
    def permutations(self) -> tuple[tuple[int, int, int, int], ...]:
        return _PERMS[self]


# Index permutations written as positions into the tuple (p, q, r, s).
_PERMS = {
    Symmetry.EIGHT_FOLD: (
        (0, 1, 2, 3),
        (1, 0, 2, 3),
        (0, 1, 3, 2),
        (1, 0, 3, 2),
        (2, 3, 0, 1),
        (3, 2, 0, 1),
        (2, 3, 1, 0),
        (3, 2, 1, 0),
    ),
    Symmetry.FOUR_FOLD: (
        (0, 1, 2, 3),
        (1, 0, 3, 2),
        (2, 3, 0, 1),
        (3, 2, 1, 0),
    ),
}


def symmetry_for(kind: Kind) -> Symmetry:
    """Two-body symmetry group implied by a tensor kind."""
    return Symmetry.EIGHT_FOLD if kind is Kind.BARE else Symmetry.FOUR_FOLD


def orbit(index: tuple[int, int, int, int], symmetry: Symmetry) -> tuple[tuple[int, int, int, int], ...]:
    """All distinct images of ``index`` under the symmetry group, sorted."""
    p, q, r, s = index
    t = (p, q, r, s)
    members = {tuple(t[k] for k in perm) for perm in symmetry.permutations}
    return tuple(sorted(members))


def canonical_index(
    p: int,
    q: int,
    r: int,
    s: int,
    symmetry: Symmetry,
    n_orb: int | None = None,
) -> tuple[int, int, int, int]:
    """Lexicographically smallest member of the orbit of ``(p, q, r, s)``.

    Two indices map to the same canonical tuple exactly when they are related
    by the symmetry group.  If ``n_orb`` is given, indices are validated
    against ``0 <= i < n_orb``.
    """
    idx = (p, q, r, s)
    if n_orb is not None:
        for i in idx:
            if not 0 <= i < n_orb:
                raise IndexError(f"orbital index {i} out of range for n_orb={n_orb}")
    return orbit(idx, symmetry)[0]


def orbit_size(index: tuple[int, int, int, int], symmetry: Symmetry) -> int:
    """Number of distinct tuples in the orbit of ``index``."""
    return len(orbit(index, symmetry))


def two_body_representatives(n_orb: int, symmetry: Symmetry) -> list[tuple[int, int, int, int]]:
    """Sorted canonical representatives, one per two-body orbit."""
    reps = []
    for idx in np.ndindex(n_orb, n_orb, n_orb, n_orb):
        if canonical_index(*idx, symmetry) == idx:
            reps.append(idx)
    return reps


def one_body_representatives(n_orb: int) -> list[tuple[int, int]]:
    """Sorted canonical one-body representatives ``p <= q``."""
    return [(p, q) for p in range(n_orb) for q in range(p, n_orb)]


def _exact_symmetrize_two_body(a: np.ndarray, symmetry: Symmetry, tol: float) -> np.ndarray:
    """Orbit-average ``a`` so closure under ``symmetry`` holds to the bit.

    Every orbit member receives the identical double (the fsum mean of the
    orbit values).  Orbit sizes divide the group order, so they are powers of
    two and re-averaging an already symmetric tensor is exact, which makes
    the operation idempotent.
    """
    n = a.shape[0]
    out = np.empty_like(a)
    done = np.zeros(a.shape, dtype=bool)
    for idx in np.ndindex(n, n, n, n):
        if done[idx]:
            continue
        members = orbit(idx, symmetry)
        values = [a[m] for m in members]
        spread = max(values) - min(values)
        if spread > tol:
            raise SymmetryViolationError(
                f"two-body tensor violates {symmetry.value} symmetry at orbit of "
                f"{idx}: spread {spread:.3e} exceeds {tol:.1e}"
            )
        mean = math.fsum(values) / len(values)
        for m in members:
            out[m] = mean
            done[m] = True
    return out


def _exact_symmetrize_one_body(a: np.ndarray, tol: float) -> np.ndarray:
    spread = np.abs(a - a.T).max()
    if spread > tol:
        raise SymmetryViolationError(
            f"one-body tensor is not symmetric: max |h_pq - h_qp| = {spread:.3e}"
        )
    # (x + y)/2 and (y + x)/2 round identically, so the result is exactly
    # symmetric and already-symmetric input passes through bit for bit.
    return (a + a.T) / 2.0


@dataclass(frozen=True, eq=False)
class TensorSet:
    """Scalar, one-body, and two-body coefficients at one geometry.

    Construction validates shapes, finiteness, and the permutational
    symmetry implied by ``kind`` (to ``SYMMETRY_TOL``), then stores exactly
    orbit-averaged, read-only arrays.  Instances are immutable.
    """

    geometry: float
    kind: Kind
    n_orb: int
    scalar_term: float
    one_body: np.ndarray
    two_body: np.ndarray
    system: str = ""

    def __post_init__(self) -> None:
        if self.n_orb < 1:
            raise ValueError(f"n_orb must be positive, got {self.n_orb}")
        if not isinstance(self.kind, Kind):
            raise TypeError(f"kind must be a Kind, got {self.kind!r}")
        one = np.asarray(self.one_body, dtype=np.float64)
        two = np.asarray(self.two_body, dtype=np.float64)
        n = self.n_orb
        if one.shape != (n, n):
            raise ValueError(f"one_body shape {one.shape} != {(n, n)}")
        if two.shape != (n, n, n, n):
            raise ValueError(f"two_body shape {two.shape} != {(n,) * 4}")
        for name, arr in (("one_body", one), ("two_body", two)):
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite entries")
        if not np.isfinite(self.scalar_term):
            raise ValueError("scalar_term is not finite")
        one = _exact_symmetrize_one_body(one, SYMMETRY_TOL)
        two = _exact_symmetrize_two_body(two, self.symmetry, SYMMETRY_TOL)
        one.flags.writeable = False
        two.flags.writeable = False
        object.__setattr__(self, "geometry", float(self.geometry))
        object.__setattr__(self, "scalar_term", float(self.scalar_term))
        object.__setattr__(self, "one_body", one)
        object.__setattr__(self, "two_body", two)

    @property
    def symmetry(self) -> Symmetry:
        return symmetry_for(self.kind)

    @classmethod
    def zeros(cls, geometry: float, kind: Kind, n_orb: int, system: str = "") -> "TensorSet":
        return cls(
            geometry=geometry,
            kind=kind,
            n_orb=n_orb,
            scalar_term=0.0,
            one_body=np.zeros((n_orb, n_orb)),
            two_body=np.zeros((n_orb,) * 4),
            system=system,
        )


def nonsymmetric_unit(tset: TensorSet) -> list[tuple[tuple[int, int, int, int], float]]:
    """Two-body entries, exactly one per symmetry orbit, sorted by index."""
    return [(idx, float(tset.two_body[idx])) for idx in two_body_representatives(tset.n_orb, tset.symmetry)]


def one_body_unit(tset: TensorSet) -> list[tuple[tuple[int, int], float]]:
    """One-body entries ``p <= q``, sorted by index."""
    return [(pq, float(tset.one_body[pq])) for pq in one_body_representatives(tset.n_orb)]


@dataclass(frozen=True, eq=False)
class GeometrySeries:
    """All tensor sets of one system, indexed by geometry and kind."""

    system: str
    tensor_sets: tuple[TensorSet, ...]

    def __post_init__(self) -> None:
        sets = tuple(sorted(self.tensor_sets, key=lambda t: (t.geometry, t.kind.value)))
        if not sets:
            raise ValueError("a GeometrySeries needs at least one tensor set")
        n_orbs = {t.n_orb for t in sets}
        if len(n_orbs) != 1:
            raise ValueError(f"inconsistent n_orb across series: {sorted(n_orbs)}")
        seen = set()
        for t in sets:
            key = (t.geometry, t.kind)
            if key in seen:
                raise ValueError(f"duplicate tensor set for geometry {t.geometry}, kind {t.kind.value}")
            seen.add(key)
        object.__setattr__(self, "tensor_sets", sets)

    @property
    def n_orb(self) -> int:
        return self.tensor_sets[0].n_orb

    def geometries(self, kind: Kind | None = None) -> np.ndarray:
        """Strictly increasing geometries, optionally restricted to a kind."""
        vals = sorted({t.geometry for t in self.tensor_sets if kind is None or t.kind is kind})
        return np.asarray(vals, dtype=np.float64)

    def get(self, geometry: float, kind: Kind) -> TensorSet:
        for t in self.tensor_sets:
            if t.kind is kind and t.geometry == geometry:
                return t
        raise KeyError(f"no {kind.value} tensor set at geometry {geometry!r}")

    def has(self, geometry: float, kind: Kind) -> bool:
        return any(t.kind is kind and t.geometry == geometry for t in self.tensor_sets)

    def of_kind(self, kind: Kind) -> list[TensorSet]:
        return [t for t in self.tensor_sets if t.kind is kind]


# ----------------------------------------------------------------------------
# FCIDUMP-like reader
# ----------------------------------------------------------------------------

_NORB_RE = re.compile(r"NORB\s*=\s*(\d+)", re.IGNORECASE)


def _classify_line(p: int, q: int, r: int, s: int) -> str:
    if p == q == r == s == 0:
        return "scalar"
    if p >= 1 and q >= 1 and r == 0 and s == 0:
        return "one"
    if p >= 1 and q >= 1 and r >= 1 and s >= 1:
        return "two"
    return "bad"


def load_fcidump(
    path: str | os.PathLike,
    kind: Kind,
    *,
    geometry: float = 0.0,
    system: str = "",
    expected_n_orb: int | None = None,
) -> TensorSet:
    """Read an FCIDUMP-like text file into a fully expanded :class:`TensorSet`.

    The file is a ``&FCI NORB=...`` header terminated by ``&END`` (or a bare
    ``/``), followed by ``value p q r s`` lines with 1-based indices.
    ``(p q 0 0)`` encodes one-body entries and the all-zero index the scalar
    term.  Entries are expanded under the symmetry group of ``kind``;
    duplicate entries of one orbit must agree to ``DUPLICATE_TOL``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    n_orb = None
    data_start = None
    header_seen = False
    for ln, line in enumerate(lines):
        stripped = line.strip()
        if not stripped:
            continue
        m = _NORB_RE.search(stripped)
        if m:
            n_orb = int(m.group(1))
        header_seen = True
        if "&END" in stripped.upper() or stripped == "/":
            data_start = ln + 1
            break
    if n_orb is None or data_start is None:
        raise TensorFormatError(f"{path}: missing FCIDUMP header with NORB and &END terminator")
    if not header_seen or n_orb < 1:
        raise TensorFormatError(f"{path}: invalid NORB={n_orb}")
    if expected_n_orb is not None and n_orb != expected_n_orb:
        raise TensorFormatError(f"{path}: NORB={n_orb} does not match expected {expected_n_orb}")

    symmetry = symmetry_for(kind)
    scalar = None
    one_entries: dict[tuple[int, int], float] = {}
    two_entries: dict[tuple[int, int, int, int], float] = {}

    def record(table: dict, key, value, ln: int) -> None:
        if key in table and abs(table[key] - value) > DUPLICATE_TOL:
            raise TensorFormatError(
                f"{path}:{ln + 1}: conflicting duplicate for orbit of {key}: "
                f"{table[key]!r} vs {value!r}"
            )
        table.setdefault(key, value)

    for ln in range(data_start, len(lines)):
        stripped = lines[ln].strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 5:
            raise TensorFormatError(f"{path}:{ln + 1}: expected 'value p q r s', got {stripped!r}")
        try:
            value = float(tokens[0])
            p, q, r, s = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise TensorFormatError(f"{path}:{ln + 1}: {exc}") from exc
        if not math.isfinite(value):
            raise TensorFormatError(f"{path}:{ln + 1}: non-finite value {tokens[0]!r}")
        shape = _classify_line(p, q, r, s)
        if shape == "bad":
            raise TensorFormatError(f"{path}:{ln + 1}: invalid index pattern ({p} {q} {r} {s})")
        for i in (t for t in (p, q, r, s) if t != 0):
            if i > n_orb:
                raise TensorFormatError(f"{path}:{ln + 1}: index {i} out of range for NORB={n_orb}")
        if shape == "scalar":
            if scalar is not None and abs(scalar - value) > DUPLICATE_TOL:
                raise TensorFormatError(f"{path}:{ln + 1}: conflicting duplicate scalar term")
            scalar = value if scalar is None else scalar
        elif shape == "one":
            record(one_entries, (min(p, q) - 1, max(p, q) - 1), value, ln)
        else:
            key = canonical_index(p - 1, q - 1, r - 1, s - 1, symmetry)
            record(two_entries, key, value, ln)

    one = np.zeros((n_orb, n_orb))
    for (p, q), v in one_entries.items():
        one[p, q] = v
        one[q, p] = v
    two = np.zeros((n_orb,) * 4)
    for idx, v in two_entries.items():
        for member in orbit(idx, symmetry):
            two[member] = v
    return TensorSet(
        geometry=geometry,
        kind=kind,
        n_orb=n_orb,
        scalar_term=0.0 if scalar is None else scalar,
        one_body=one,
        two_body=two,
        system=system,
    )


# ----------------------------------------------------------------------------
# Canonical text format
# ----------------------------------------------------------------------------


def _fmt(value: float) -> str:
    """Decimal text with enough digits to round-trip a double exactly."""
    return format(value, ".17g")


def save_canonical(path: str | os.PathLike, tset: TensorSet) -> None:
    """Write a tensor set as self-describing text, one orbit entry per line.

    ``load_canonical(save_canonical(...))`` reproduces the tensor set bit for
    bit.  Entries are 1-based ``value p q r s`` lines (one-body as
    ``value p q 0 0``), sorted by canonical index.
    """
    lines = [
        f"# {FORMAT_TAG}",
        f"# system: {tset.system}",
        f"# geometry: {_fmt(tset.geometry)}",
        f"# kind: {tset.kind.value}",
        f"# n_orb: {tset.n_orb}",
        f"# scalar_term: {_fmt(tset.scalar_term)}",
    ]
    for (p, q), v in one_body_unit(tset):
        lines.append(f"{_fmt(v)} {p + 1} {q + 1} 0 0")
    for (p, q, r, s), v in nonsymmetric_unit(tset):
        lines.append(f"{_fmt(v)} {p + 1} {q + 1} {r + 1} {s + 1}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_canonical(path: str | os.PathLike) -> TensorSet:
    """Read a file written by :func:`save_canonical`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != f"# {FORMAT_TAG}":
        raise TensorFormatError(f"{path}: missing or mismatched format tag (expected '{FORMAT_TAG}')")

    header: dict[str, str] = {}
    body_start = 1
    for ln in range(1, len(lines)):
        stripped = lines[ln].strip()
        if stripped.startswith("#"):
            key, _, value = stripped[1:].partition(":")
            header[key.strip()] = value.strip()
            body_start = ln + 1
        else:
            break

    try:
        system = header["system"]
        geometry = float(header["geometry"])
        kind = Kind(header["kind"])
        n_orb = int(header["n_orb"])
        scalar = float(header["scalar_term"])
    except (KeyError, ValueError) as exc:
        raise TensorFormatError(f"{path}: bad or missing header field ({exc})") from exc

    symmetry = symmetry_for(kind)
    one = np.zeros((n_orb, n_orb))
    two = np.zeros((n_orb,) * 4)
    one_seen: dict[tuple[int, int], float] = {}
    two_seen: dict[tuple[int, int, int, int], float] = {}
    for ln in range(body_start, len(lines)):
        stripped = lines[ln].strip()
        if not stripped:
            continue
        tokens = stripped.split()
        if len(tokens) != 5:
            raise TensorFormatError(f"{path}:{ln + 1}: expected 'value p q r s'")
        try:
            value = float(tokens[0])
            p, q, r, s = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise TensorFormatError(f"{path}:{ln + 1}: {exc}") from exc
        shape = _classify_line(p, q, r, s)
        if shape == "scalar" or shape == "bad":
            raise TensorFormatError(f"{path}:{ln + 1}: invalid index pattern ({p} {q} {r} {s})")
        for i in (t for t in (p, q, r, s) if t != 0):
            if i > n_orb:
                raise TensorFormatError(f"{path}:{ln + 1}: index {i} out of range for n_orb={n_orb}")
        if shape == "one":
            key2 = (min(p, q) - 1, max(p, q) - 1)
            if key2 in one_seen and abs(one_seen[key2] - value) > DUPLICATE_TOL:
                raise TensorFormatError(f"{path}:{ln + 1}: conflicting duplicate one-body entry {key2}")
            one_seen.setdefault(key2, value)
        else:
            key4 = canonical_index(p - 1, q - 1, r - 1, s - 1, symmetry)
            if key4 in two_seen and abs(two_seen[key4] - value) > DUPLICATE_TOL:
                raise TensorFormatError(f"{path}:{ln + 1}: conflicting duplicate two-body orbit {key4}")
            two_seen.setdefault(key4, value)

    for (p, q), v in one_seen.items():
        one[p, q] = v
        one[q, p] = v
    for idx, v in two_seen.items():
        for member in orbit(idx, symmetry):
            two[member] = v
    return TensorSet(
        geometry=geometry,
        kind=kind,
        n_orb=n_orb,
        scalar_term=scalar,
        one_body=one,
        two_body=two,
        system=system,
    )


def save_series(series: GeometrySeries, directory: str | os.PathLike) -> list[str]:
    """Write every tensor set of a series into ``directory``.

    File names are ``{kind}_{index:04d}.tensor`` in geometry order; the
    geometry itself lives in each file header.  Returns the paths written.
    """
    os.makedirs(directory, exist_ok=True)
    paths = []
    for kind in Kind:
        for i, tset in enumerate(series.of_kind(kind)):
            path = os.path.join(directory, f"{kind.value}_{i:04d}.tensor")
            save_canonical(path, tset)
            paths.append(path)
    return paths


def load_series(directory: str | os.PathLike) -> GeometrySeries:
    """Rebuild a series from a directory written by :func:`save_series`."""
    names = sorted(n for n in os.listdir(directory) if n.endswith(".tensor"))
    if not names:
        raise TensorFormatError(f"{directory}: no .tensor files found")
    sets = [load_canonical(os.path.join(directory, n)) for n in names]
    systems = {t.system for t in sets}
    if len(systems) != 1:
        raise TensorFormatError(f"{directory}: inconsistent system labels {sorted(systems)}")
    return GeometrySeries(system=systems.pop(), tensor_sets=tuple(sets))
