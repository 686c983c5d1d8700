"""Compatibility matrix, Guest-Hutchinson modes, self-stresses, Maxwell counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAStandardKagome
from .lattice import PeriodicLattice, SQRT3

DEFAULT_TOL = 1e-9

# The three lattice directions of the standard Kagome lattice, as unit vectors.
LATTICE_DIRECTIONS = {
    "0": np.array([1.0, 0.0]),
    "60": np.array([0.5, SQRT3 / 2]),
    "120": np.array([-0.5, SQRT3 / 2]),
}
_DIRECTION_TOL = 1e-9


@dataclass(frozen=True)
class CompatibilityMatrix:
    """Dense map from stacked periodic displacements to first-order extensions.

    Row r carries +b on the columns of vertex i and -b on those of vertex j,
    where b is the unit bond vector of edge r (contributions accumulate when
    i == j through an offset).
    """

    matrix: np.ndarray
    lattice: PeriodicLattice

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]


def assemble_compatibility(lat: PeriodicLattice) -> CompatibilityMatrix:
    """Assemble the d x 2n compatibility matrix of a lattice."""
    d, n = lat.n_edges, lat.n_vertices
    c = np.zeros((d, 2 * n))
    bonds = lat.bond_directions()
    for r, e in enumerate(lat.edges):
        b = bonds[r]
        c[r, 2 * e.i : 2 * e.i + 2] += b
        c[r, 2 * e.j : 2 * e.j + 2] -= b
    return CompatibilityMatrix(c, lat)


def nullspace(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the null space, one row per basis vector.

    Vectors with singular value below tol * sigma_max (below tol absolutely
    when sigma_max < 1) are kept, ordered by ascending singular value, each
    signed so its first significant entry is positive.
    """
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return np.eye(m.shape[1] if m.ndim == 2 else 0)
    _, sigma, vt = np.linalg.svd(m)
    smax = sigma[0] if len(sigma) else 0.0
    cut = tol * smax if smax >= 1.0 else tol
    ncols = m.shape[1]
    null_rows = []
    for k in range(ncols - 1, -1, -1):
        s = sigma[k] if k < len(sigma) else 0.0
        if s < cut:
            null_rows.append(vt[k])
        else:
            break
    out = []
    for v in null_rows:
        big = np.max(np.abs(v))
        idx = int(np.argmax(np.abs(v) > 1e-8 * big))
        out.append(-v if v[idx] < 0 else v)
    return np.array(out).reshape(len(out), ncols)


def _sign_fix_field(f: np.ndarray) -> np.ndarray:
    flat = f.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    return -f if flat[k] < 0 else f


@dataclass(frozen=True)
class ModeBasis:
    """Orthonormal basis of displacement fields (gh) or tension vectors (selfstress).

    For kind 'gh' each field is an (n, 2) per-vertex array orthogonal to both
    uniform translations; for kind 'selfstress' each field is a length-d
    per-edge tension array.
    """

    fields: tuple[np.ndarray, ...]
    tol: float
    kind: str

    @property
    def dimension(self) -> int:
        return len(self.fields)

    def stacked(self) -> np.ndarray:
        if not self.fields:
            return np.zeros((0, 0))
        return np.array([f.reshape(-1) for f in self.fields])

    def to_dict(self) -> dict:
        if self.kind == "gh":
            fields = [[list(v) for v in f] for f in self.fields]
        else:
            fields = [list(f) for f in self.fields]
        return {"tol": self.tol, "kind": self.kind, "fields": fields}


def translation_fields(n: int) -> np.ndarray:
    """Two orthonormal uniform translations as stacked 2n-vectors."""
    t1 = np.tile([1.0, 0.0], n) / math.sqrt(n)
    t2 = np.tile([0.0, 1.0], n) / math.sqrt(n)
    return np.array([t1, t2])


def gh_modes(lat: PeriodicLattice, tol: float = DEFAULT_TOL) -> ModeBasis:
    """Orthonormal basis of ker(C) with the two uniform translations projected out."""
    c = assemble_compatibility(lat)
    null = nullspace(c.matrix, tol)
    trans = translation_fields(lat.n_vertices)
    if null.shape[0] == 0:
        return ModeBasis((), tol, "gh")
    proj = null - (null @ trans.T) @ trans
    u, sigma, vt = np.linalg.svd(proj, full_matrices=False)
    fields = []
    for k, s in enumerate(sigma):
        if s > 0.5:
            fields.append(_sign_fix_field(vt[k].reshape(-1, 2)))
    return ModeBasis(tuple(fields), tol, "gh")


def self_stresses(lat: PeriodicLattice, tol: float = DEFAULT_TOL) -> ModeBasis:
    """Orthonormal basis of ker(C^T): tensions with zero net force everywhere."""
    c = assemble_compatibility(lat)
    null = nullspace(c.matrix.T, tol)
    fields = tuple(_sign_fix_field(v) for v in null)
    return ModeBasis(fields, tol, "selfstress")


def is_maxwell(lat: PeriodicLattice) -> tuple[bool, dict]:
    """Square compatibility matrix test, with vertex/edge counts and coordination."""
    counts = {
        "n_vertices": lat.n_vertices,
        "n_edges": lat.n_edges,
        "mean_coordination": 2.0 * lat.n_edges / lat.n_vertices,
    }
    return lat.n_edges == 2 * lat.n_vertices, counts


# -- straight lattice lines of standard-Kagome supercells ---------------------


@dataclass(frozen=True)
class LatticeLines:
    """Edges of a standard-Kagome supercell grouped into straight lines.

    lines maps direction key ('0', '60', '120') to a list of lines, each a
    list of edge indices; lines are ordered by ascending perpendicular offset.
    """

    lines: dict

    def n_lines(self) -> int:
        return sum(len(v) for v in self.lines.values())


def _real_gcd(a: float, b: float, tol: float = 1e-9) -> float:
    """Positive generator of the lattice a Z + b Z; 0 if both vanish."""
    a, b = abs(a), abs(b)
    for _ in range(64):
        if b < tol:
            return a
        a, b = b, a % b
    raise NotAStandardKagome("incommensurate line spacings")


def kagome_lines(lat: PeriodicLattice) -> LatticeLines:
    """Group edges by lattice direction and by line.

    Works for any N x M supercell of the standard Kagome lattice; raises
    NotAStandardKagome when an edge does not lie along one of the three
    lattice directions (to within 1e-9) or rest lengths are not all 1.
    Lines are identified modulo cell translations: two edges belong to the
    same line when their perpendicular offsets differ by a translation of
    the cell lattice projected onto the line normal.
    """
    rests = lat.rest_lengths()
    if np.max(np.abs(rests - 1.0)) > 1e-9:
        raise NotAStandardKagome("rest lengths are not all 1")
    bonds = lat.bond_directions()
    mids = np.array(
        [lat.vertices[e.i] - 0.5 * lat.edge_vector(e) for e in lat.edges]
    )
    buckets: dict[str, list] = {k: [] for k in LATTICE_DIRECTIONS}
    for r, b in enumerate(bonds):
        matched = None
        for key, d in LATTICE_DIRECTIONS.items():
            cross = abs(b[0] * d[1] - b[1] * d[0])
            if cross < _DIRECTION_TOL:
                matched = key
                break
        if matched is None:
            raise NotAStandardKagome(f"edge {r} not along a lattice direction")
        d = LATTICE_DIRECTIONS[matched]
        normal = np.array([-d[1], d[0]])
        period = _real_gcd(
            float(lat.primitive[0] @ normal), float(lat.primitive[1] @ normal)
        )
        p = float(mids[r] @ normal)
        if period > 1e-9:
            p -= period * math.floor(p / period + 1e-9)
            if p > period - 1e-6:
                p = 0.0
        buckets[matched].append((p, r))
    lines: dict[str, list] = {}
    for key, items in buckets.items():
        items.sort()
        groups: list[list[int]] = []
        last_p = None
        for p, r in items:
            if last_p is None or p - last_p > 1e-6:
                groups.append([])
            groups[-1].append(r)
            last_p = p
        lines[key] = groups
    return LatticeLines(lines)


def line_self_stress(
    lat: PeriodicLattice, direction: str | int, line_index: int
) -> np.ndarray:
    """Unit tension on every edge of one straight lattice line, zero elsewhere."""
    key = str(direction)
    lines = kagome_lines(lat).lines
    if key not in lines:
        raise NotAStandardKagome(f"unknown direction {direction!r}")
    group = lines[key]
    if not 0 <= line_index < len(group):
        raise NotAStandardKagome(
            f"line index {line_index} out of range for direction {key} "
            f"({len(group)} lines)"
        )
    t = np.zeros(lat.n_edges)
    t[group[line_index]] = 1.0
    return t
