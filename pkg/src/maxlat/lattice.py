"""Periodic spring lattices and the builders for the Kagome family.

A lattice is a unit cell of vertices plus edges tagged with integer cell
offsets, together with two primitive vectors.  All builders fix the triangle
side length to 1 and store rest lengths exactly (they are not recomputed from
positions, so chained constructions do not drift).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometry,
    ParseError,
    Theta4Undefined,
    ValidationError,
)

SQRT3 = math.sqrt(3.0)

# Validation tolerances (absolute, unit side length).
_REST_LENGTH_TOL = 1e-8
_DET_TOL = 1e-12


def canonical_edge_key(i: int, j: int, offset: tuple[int, int]):
    """Canonical (i, j, offset) with i <= j; self edges get a sign-fixed offset."""
    if i > j:
        return j, i, (-offset[0], -offset[1])
    if i == j and (offset[0], offset[1]) < (-offset[0], -offset[1]):
        return i, j, (-offset[0], -offset[1])
    return i, j, (offset[0], offset[1])


@dataclass(frozen=True)
class Edge:
    """Spring from vertex i to the copy of vertex j shifted by offset . primitive."""

    i: int
    j: int
    offset: tuple[int, int]
    rest_length: float
    stiffness: float = 1.0


@dataclass(frozen=True, eq=False)
class PeriodicLattice:
    """Immutable unit cell: vertices, offset-tagged edges, primitive vectors."""

    vertices: np.ndarray
    edges: tuple[Edge, ...]
    primitive: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        verts = np.array(self.vertices, dtype=float).reshape(-1, 2)
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        prim = np.array(self.primitive, dtype=float).reshape(2, 2)
        prim.setflags(write=False)
        object.__setattr__(self, "primitive", prim)
        if not np.all(np.isfinite(verts)) or not np.all(np.isfinite(prim)):
            raise ValidationError("non-finite vertex or primitive data")
        if abs(np.linalg.det(prim)) <= _DET_TOL:
            raise ValidationError("primitive vectors are linearly dependent")
        if self.labels is not None and len(self.labels) != len(verts):
            raise ValidationError("label count does not match vertex count")

        canon = []
        seen = set()
        n = len(verts)
        for e in self.edges:
            if not (0 <= e.i < n and 0 <= e.j < n):
                raise ValidationError(f"edge endpoint out of range: {e}")
            i, j, off = canonical_edge_key(e.i, e.j, e.offset)
            if i == j and off == (0, 0):
                raise ValidationError(f"zero-length self edge at vertex {i}")
            key = (i, j, off)
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            if e.rest_length <= 0:
                raise ValidationError(f"non-positive rest length on edge {key}")
            if e.stiffness <= 0:
                raise ValidationError(f"non-positive stiffness on edge {key}")
            shift = off[0] * prim[0] + off[1] * prim[1]
            geom = np.linalg.norm(verts[i] - verts[j] - shift)
            if abs(geom - e.rest_length) > _REST_LENGTH_TOL * max(1.0, e.rest_length):
                raise ValidationError(
                    f"edge {key}: stored rest length {e.rest_length} differs from "
                    f"geometric length {geom}"
                )
            canon.append(Edge(i, j, off, e.rest_length, e.stiffness))
        object.__setattr__(self, "edges", tuple(canon))

    # -- basic queries ------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def cell_area(self) -> float:
        return abs(float(np.linalg.det(self.primitive)))

    def offset_shift(self, offset: tuple[int, int]) -> np.ndarray:
        return offset[0] * self.primitive[0] + offset[1] * self.primitive[1]

    def edge_vector(self, e: Edge) -> np.ndarray:
        """x_i - (x_j + offset . primitive)."""
        return self.vertices[e.i] - self.vertices[e.j] - self.offset_shift(e.offset)

    def edge_vectors(self) -> np.ndarray:
        return np.array([self.edge_vector(e) for e in self.edges])

    def bond_directions(self) -> np.ndarray:
        """Unit vectors along each edge, normalized by the stored rest length."""
        rests = self.rest_lengths()
        return self.edge_vectors() / rests[:, None]

    def rest_lengths(self) -> np.ndarray:
        return np.array([e.rest_length for e in self.edges])

    def stiffnesses(self) -> np.ndarray:
        return np.array([e.stiffness for e in self.edges])

    def displaced(self, vertices, primitive) -> "PeriodicLattice":
        """Same combinatorics and rest lengths at new positions and primitives."""
        return PeriodicLattice(vertices, self.edges, primitive, self.labels)

    def same_as(self, other: "PeriodicLattice") -> bool:
        """Bit-exact equality of all stored data."""
        return (
            self.n_vertices == other.n_vertices
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.primitive, other.primitive)
            and self.edges == other.edges
            and self.labels == other.labels
        )

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "primitive": [list(self.primitive[0]), list(self.primitive[1])],
            "vertices": [list(v) for v in self.vertices],
            "edges": [
                {
                    "i": e.i,
                    "j": e.j,
                    "offset": list(e.offset),
                    "rest_length": e.rest_length,
                    "stiffness": e.stiffness,
                }
                for e in self.edges
            ],
        }
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    @staticmethod
    def from_dict(data: dict) -> "PeriodicLattice":
        if not isinstance(data, dict):
            raise ParseError("lattice document must be a JSON object")
        for key in ("primitive", "vertices", "edges"):
            if key not in data:
                raise ParseError(f"missing field '{key}'")
        try:
            prim = np.array(data["primitive"], dtype=float)
            if prim.shape != (2, 2):
                raise ParseError(
                    f"field 'primitive' must be a 2x2 array, got shape {prim.shape}"
                )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"field 'primitive' is malformed: {exc}") from None
        try:
            verts = np.array(data["vertices"], dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 2:
                raise ParseError("field 'vertices' must be a list of [x, y] pairs")
        except (TypeError, ValueError) as exc:
            raise ParseError(f"field 'vertices' is malformed: {exc}") from None
        edges = []
        for k, rec in enumerate(data["edges"]):
            try:
                off = rec["offset"]
                edges.append(
                    Edge(
                        int(rec["i"]),
                        int(rec["j"]),
                        (int(off[0]), int(off[1])),
                        float(rec["rest_length"]),
                        float(rec.get("stiffness", 1.0)),
                    )
                )
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise ParseError(f"edges[{k}] is malformed: {exc}") from None
        labels = data.get("labels")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
        return PeriodicLattice(verts, tuple(edges), prim, labels)


def save_lattice(lat: PeriodicLattice, path) -> None:
    with open(path, "w") as fh:
        json.dump(lat.to_dict(), fh, indent=1)
        fh.write("\n")


def load_lattice(path) -> PeriodicLattice:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return PeriodicLattice.from_dict(data)


# -- builders ----------------------------------------------------------------

# Unit cell of the standard Kagome lattice: a down triangle (A at the origin,
# B up-right, C up-left) plus the three edges closing the up triangle through
# neighboring cells.  Edge order is fixed; it is also the row order of the
# compatibility matrix.
_BASE_VERTICES = np.array([[0.0, 0.0], [0.5, SQRT3 / 2], [-0.5, SQRT3 / 2]])
_BASE_EDGE_KEYS = (
    (0, 1, (0, 0)),
    (1, 2, (0, 0)),
    (0, 2, (0, 0)),
    (1, 2, (1, 0)),
    (0, 2, (1, -1)),
    (0, 1, (0, -1)),
)
_BASE_PRIMITIVE = np.array([[2.0, 0.0], [1.0, SQRT3]])
_BASE_LABELS = ("A", "B", "C")


def _base_cell() -> PeriodicLattice:
    edges = tuple(Edge(i, j, off, 1.0) for i, j, off in _BASE_EDGE_KEYS)
    return PeriodicLattice(_BASE_VERTICES, edges, _BASE_PRIMITIVE, _BASE_LABELS)


def supercell(lat: PeriodicLattice, n: int, m: int) -> PeriodicLattice:
    """n x m copies of the cell; edges re-indexed, offsets reduced mod the new cell."""
    if n < 1 or m < 1:
        raise ValidationError("supercell factors must be positive")
    nv = lat.n_vertices
    verts = []
    labels = [] if lat.labels is not None else None
    for j in range(m):
        for i in range(n):
            shift = i * lat.primitive[0] + j * lat.primitive[1]
            for a in range(nv):
                verts.append(lat.vertices[a] + shift)
                if labels is not None:
                    base = lat.labels[a]
                    if n == 1 and m == 1:
                        labels.append(base)
                    else:
                        labels.append(f"{base}_{{{i},{j}}}")
    edges = []
    for j in range(m):
        for i in range(n):
            cell = (j * n + i) * nv
            for e in lat.edges:
                ti, tj = i + e.offset[0], j + e.offset[1]
                cell2 = ((tj % m) * n + (ti % n)) * nv
                edges.append(
                    Edge(
                        cell + e.i,
                        cell2 + e.j,
                        (ti // n, tj // m),
                        e.rest_length,
                        e.stiffness,
                    )
                )
    prim = np.array([n * lat.primitive[0], m * lat.primitive[1]])
    return PeriodicLattice(
        np.array(verts), tuple(edges), prim, tuple(labels) if labels else None
    )


def build_standard_kagome(n: int = 1, m: int = 1) -> PeriodicLattice:
    """n x m supercell of the standard Kagome cell (3nm vertices, 6nm unit springs)."""
    if n < 1 or m < 1:
        raise ValidationError("supercell factors must be positive")
    return supercell(_base_cell(), n, m)


def twisted_positions(theta: float) -> np.ndarray:
    """Unit-cell vertex positions of the twisted lattice with inter-triangle angle 2*theta."""
    return np.array(
        [
            [0.0, 0.0],
            [math.cos(theta), math.sin(theta)],
            [math.cos(theta + math.pi / 3), math.sin(theta + math.pi / 3)],
        ]
    )


def twisted_primitive(theta: float) -> np.ndarray:
    c = math.cos(math.pi / 3 - theta)
    return np.array([[2.0 * c, 0.0], [c, SQRT3 * c]])


def build_twisted_kagome(theta: float) -> PeriodicLattice:
    """One-periodic twisted lattice; theta = pi/3 reproduces the standard cell."""
    if not 0.0 < theta < 2 * math.pi / 3:
        raise DegenerateGeometry(
            f"twist angle {theta} outside the open interval (0, 2*pi/3)"
        )
    edges = tuple(Edge(i, j, off, 1.0) for i, j, off in _BASE_EDGE_KEYS)
    return PeriodicLattice(
        twisted_positions(theta), edges, twisted_primitive(theta), _BASE_LABELS
    )


def theta4_angle(theta1: float, theta2: float, theta3: float) -> float:
    """Closing rotation angle of the two-periodic cell."""
    third = math.pi / 3
    s = math.sin(theta1 - third) + math.sin(theta2 - third) + math.sin(theta3 - third)
    if abs(s) > 1.0:
        raise Theta4Undefined(
            f"arcsin argument {s} out of range for angles "
            f"({theta1}, {theta2}, {theta3})"
        )
    return third - math.asin(s)


def compression_ratio(theta1: float, theta2: float, theta3: float) -> float:
    """Isotropic compression ratio of the two-periodic cell (1 at the standard lattice)."""
    third = math.pi / 3
    t4 = theta4_angle(theta1, theta2, theta3)
    return 0.25 * (
        math.cos(theta1 - third)
        + math.cos(theta2 - third)
        + math.cos(theta3 - third)
        + math.cos(t4 - third)
    )


def deformed_two_periodic_positions(
    theta1: float, theta2: float, theta3: float, theta4: float
) -> np.ndarray:
    """Positions of the 12 cell vertices, ordered A,B,C per sub-cell, sub-cells
    (0,0),(1,0),(0,1),(1,1)."""
    t1, t2, t3, t4 = theta1, theta2, theta3, theta4
    third = math.pi / 3
    c, s = math.cos, math.sin

    def pt(x, y):
        return [x, y]

    a00 = pt(0.0, 0.0)
    b00 = pt(c(t1), s(t1))
    c00 = pt(c(t1 + third), s(t1 + third))
    a10 = pt(
        c(t1) - c(t2 + third) + c(t4 - third),
        s(t1) - s(t2 + third) + s(t4 - third),
    )
    b10 = pt(
        c(t1) + c(t2 - third) + c(t4 - third),
        s(t1) + s(t2 - third) + s(t4 - third),
    )
    c10 = pt(c(t1) + c(t4 - third), s(t1) + s(t4 - third))
    a01 = pt(c(t1) + c(t4), s(t1) + s(t4))
    b01 = pt(c(t1) + c(t3) + c(t4), s(t1) + s(t3) + s(t4))
    c01 = pt(c(t1) + c(t3 + third) + c(t4), s(t1) + s(t3 + third) + s(t4))
    a11 = pt(
        c(t1) + c(t2 - third) + c(t3) + c(t4 - third),
        s(t1) + s(t2 - third) + s(t3) + s(t4 - third),
    )
    b11 = pt(
        c(t1) + c(t2 - third) + c(t3) + SQRT3 * c(t4 - math.pi / 6),
        s(t1) + s(t2 - third) + s(t3) + SQRT3 * s(t4 - math.pi / 6),
    )
    c11 = pt(
        c(t1) + c(t2 - third) + c(t3) + c(t4),
        s(t1) + s(t2 - third) + s(t3) + s(t4),
    )
    return np.array([a00, b00, c00, a10, b10, c10, a01, b01, c01, a11, b11, c11])


def deformed_two_periodic_primitive(
    theta1: float, theta2: float, theta3: float, theta4: float
) -> np.ndarray:
    third = math.pi / 3
    angles = (theta1, theta2, theta3, theta4)
    v1 = np.array(
        [
            sum(math.cos(t - third) for t in angles),
            sum(math.sin(t - third) for t in angles),
        ]
    )
    v2 = np.array(
        [sum(math.cos(t) for t in angles), sum(math.sin(t) for t in angles)]
    )
    return np.array([v1, v2])


def build_deformed_two_periodic(
    theta1: float, theta2: float, theta3: float
) -> PeriodicLattice:
    """Two-periodic deformed Kagome lattice with three free rotation angles.

    The fourth rotation angle closes the cell and pins the first primitive
    vector to the horizontal axis; the second primitive vector is the first
    rotated by 60 degrees.
    """
    t4 = theta4_angle(theta1, theta2, theta3)
    verts = deformed_two_periodic_positions(theta1, theta2, theta3, t4)
    prim = deformed_two_periodic_primitive(theta1, theta2, theta3, t4)
    if abs(np.linalg.det(prim)) <= _DET_TOL:
        raise DegenerateGeometry("two-periodic cell has zero area")
    ref = build_standard_kagome(2, 2)
    return PeriodicLattice(verts, ref.edges, prim, ref.labels)


def build_special_two_by_one(gamma: float) -> PeriodicLattice:
    """Two-by-one periodic lattice: rows alternate between rotation angles
    gamma and 2*pi/3 - gamma."""
    if not 0.0 < gamma < 2 * math.pi / 3:
        raise DegenerateGeometry(
            f"angle {gamma} outside the open interval (0, 2*pi/3)"
        )
    t = (gamma, gamma, 2 * math.pi / 3 - gamma, 2 * math.pi / 3 - gamma)
    verts12 = deformed_two_periodic_positions(*t)
    verts = verts12[[0, 1, 2, 6, 7, 8]]
    c = math.cos(math.pi / 3 - gamma)
    prim = np.array([[2.0 * c, 0.0], [2.0 * c, 2 * SQRT3 * c]])
    ref = supercell(_base_cell(), 1, 2)
    return PeriodicLattice(verts, ref.edges, prim, ref.labels)


def build_special_two_by_two(beta: float) -> PeriodicLattice:
    """Two-periodic lattice with equal-magnitude primitive vectors 60 degrees apart."""
    if not 0.0 < beta < 2 * math.pi / 3:
        raise DegenerateGeometry(f"angle {beta} outside the open interval (0, 2*pi/3)")
    return build_deformed_two_periodic(
        beta, 2 * math.pi / 3 - beta, 2 * math.pi / 3 - beta
    )


def hexagon_closure_residuals(thetas, etas) -> np.ndarray:
    """The eight closure sums of the four deformed hexagons; all zero iff the
    eight rotated triangles tile without gaps."""
    t1, t2, t3, t4 = thetas
    e1, e2, e3, e4 = etas
    third = math.pi / 3
    two_thirds = 2 * math.pi / 3
    c, s = math.cos, math.sin
    rows = []
    for f in (c, s):
        rows.append(
            -f(e1 + third) - f(t2 + two_thirds) + f(e2) + f(t4 + third)
            - f(e3 - third) - f(t3)
        )
    for f in (c, s):
        rows.append(
            -f(e2 + third) - f(t1 + two_thirds) + f(e1) + f(t3 + third)
            - f(e4 - third) - f(t4)
        )
    for f in (c, s):
        rows.append(
            -f(e3 + third) - f(t4 + two_thirds) + f(e4) + f(t2 + third)
            - f(e1 - third) - f(t1)
        )
    for f in (c, s):
        rows.append(
            -f(e4 + third) - f(t3 + two_thirds) + f(e3) + f(t1 + third)
            - f(e2 - third) - f(t2)
        )
    return np.array(rows)
