"""Deterministic SVG rendering of lattices, modes, and deformed states."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .lattice import PeriodicLattice

_FMT = "{:.6f}"

TRIANGLE_FILLS = ("#9ecae1", "#fdd0a2")
EDGE_STYLE = 'stroke="#333333" stroke-width="0.04"'
ARROW_STYLE = 'stroke="#b30000" stroke-width="0.05" fill="#b30000"'


def _fmt(x: float) -> str:
    s = _FMT.format(x)
    return "0.000000" if s == "-0.000000" else s


def _tiled_segments(lat: PeriodicLattice, tile: int):
    """Edge segments of a tile x tile patch, with endpoint vertex keys."""
    segs = []
    for a in range(tile):
        for b in range(tile):
            shift = a * lat.primitive[0] + b * lat.primitive[1]
            for e in lat.edges:
                p = lat.vertices[e.i] + shift
                q = lat.vertices[e.j] + lat.offset_shift(e.offset) + shift
                segs.append((p, q, (e.i, a, b), (e.j, a + e.offset[0], b + e.offset[1])))
    return segs


def _triangles(segs):
    """Vertex triples connected pairwise, classified into the two triangle rows."""
    adj: dict[tuple, set] = {}
    pos: dict[tuple, np.ndarray] = {}
    for p, q, ki, kj in segs:
        pos[ki], pos[kj] = p, q
        adj.setdefault(ki, set()).add(kj)
        adj.setdefault(kj, set()).add(ki)
    tris = set()
    for v, nbrs in adj.items():
        for a, b in combinations(sorted(nbrs), 2):
            if b in adj.get(a, ()):  # noqa: SIM118 - set membership
                tris.add(tuple(sorted((v, a, b))))
    out = []
    for tri in sorted(tris):
        pts = np.array([pos[k] for k in tri])
        centroid = pts.mean(axis=0)
        below = int(np.sum(pts[:, 1] < centroid[1] - 1e-9))
        out.append((pts, 0 if below == 1 else 1))
    return out


def render_svg(
    lat: PeriodicLattice,
    mode: np.ndarray | None = None,
    tile: int = 1,
    shade: bool = True,
    arrow_scale: float = 0.35,
) -> str:
    """Render a lattice patch, optionally with per-vertex displacement arrows.

    Output is deterministic: identical inputs give byte-identical documents.
    """
    segs = _tiled_segments(lat, tile)
    pts = np.array([s[0] for s in segs] + [s[1] for s in segs])
    lo = pts.min(axis=0) - 0.6
    hi = pts.max(axis=0) + 0.6
    width, height = hi - lo

    def sx(x):
        return _fmt(x - lo[0])

    def sy(y):
        return _fmt(hi[1] - y)  # flip so +y points up

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}" '
        f'width="{_fmt(80 * width)}" height="{_fmt(80 * height)}">'
    ]
    if shade:
        for pts3, cls in _triangles(segs):
            coords = " ".join(f"{sx(p[0])},{sy(p[1])}" for p in pts3)
            parts.append(
                f'<polygon points="{coords}" fill="{TRIANGLE_FILLS[cls]}" '
                'stroke="none"/>'
            )
    for p, q, _, _ in segs:
        parts.append(
            f'<line x1="{sx(p[0])}" y1="{sy(p[1])}" x2="{sx(q[0])}" '
            f'y2="{sy(q[1])}" {EDGE_STYLE}/>'
        )
    if mode is not None:
        mode = np.asarray(mode, dtype=float).reshape(-1, 2)
        for a in range(tile):
            for b in range(tile):
                shift = a * lat.primitive[0] + b * lat.primitive[1]
                for v in range(lat.n_vertices):
                    d = mode[v]
                    norm = float(np.hypot(d[0], d[1]))
                    if norm < 1e-12:
                        continue
                    start = lat.vertices[v] + shift
                    end = start + arrow_scale * d
                    parts.append(
                        f'<line x1="{sx(start[0])}" y1="{sy(start[1])}" '
                        f'x2="{sx(end[0])}" y2="{sy(end[1])}" {ARROW_STYLE}/>'
                    )
                    head = _arrow_head(start, end)
                    coords = " ".join(f"{sx(p[0])},{sy(p[1])}" for p in head)
                    parts.append(f'<polygon points="{coords}" {ARROW_STYLE}/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _arrow_head(start, end, size=0.09):
    d = end - start
    n = np.hypot(d[0], d[1])
    u = d / n
    left = np.array([-u[1], u[0]])
    return [end, end - size * (u * 2 - left), end - size * (u * 2 + left)]
