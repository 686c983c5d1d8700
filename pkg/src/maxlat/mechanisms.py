"""Explicit zero-energy deformation families of the Kagome lattice.

Every family is exposed as a MechanismPath: a parameterized map t -> (F(t),
deformed vertex positions) whose value at t = 0 is the reference lattice.
F(t) is the symmetric macroscopic deformation gradient acting on the
primitive vectors; the paths below all compress isotropically, F = c(t) I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidSequence, RangeExceeded
from .lattice import (
    SQRT3,
    PeriodicLattice,
    build_standard_kagome,
    build_twisted_kagome,
    compression_ratio,
    deformed_two_periodic_positions,
    theta4_angle,
    twisted_positions,
)

THIRD_PI = math.pi / 3


def _rot(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def nonlinear_energy(
    lat: PeriodicLattice,
    positions: np.ndarray,
    deformation: np.ndarray,
    edge_mask=None,
) -> tuple[float, float]:
    """Exact spring energy of a deformed state and the largest length strain.

    Offset copies of a vertex are placed at position[j] + F (o1 v1 + o2 v2),
    i.e. the deformed primitive vectors are F v1, F v2.
    """
    positions = np.asarray(positions, dtype=float)
    f = np.asarray(deformation, dtype=float)
    total = 0.0
    max_strain = 0.0
    for r, e in enumerate(lat.edges):
        if edge_mask is not None and not edge_mask[r]:
            continue
        shift = f @ lat.offset_shift(e.offset)
        q = positions[e.i] - positions[e.j] - shift
        length = math.hypot(q[0], q[1])
        total += 0.5 * e.stiffness * (length - e.rest_length) ** 2
        max_strain = max(max_strain, abs(length / e.rest_length - 1.0))
    return total, max_strain


@dataclass(frozen=True)
class MechanismPath:
    """One-parameter zero-energy deformation family of a reference lattice."""

    family: str
    params: dict
    reference: PeriodicLattice
    t_range: tuple[float, float]
    t_end: float
    frame: Callable[[float], tuple[np.ndarray, np.ndarray]] = field(repr=False)
    energy_edge_mask: np.ndarray | None = field(default=None, repr=False)

    def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.t_range
        if not (lo < t < hi or math.isclose(t, lo) or math.isclose(t, hi)):
            raise RangeExceeded(
                f"t={t} outside admissible range [{lo}, {hi}] for family "
                f"{self.family!r}"
            )
        return self.frame(t)

    def energy(self, t: float) -> tuple[float, float]:
        f, pos = self.evaluate(t)
        return nonlinear_energy(self.reference, pos, f, self.energy_edge_mask)

    def deformed_lattice(self, t: float) -> PeriodicLattice:
        f, pos = self.evaluate(t)
        prim = self.reference.primitive @ f.T
        return self.reference.displaced(pos, prim)

    def sample_ts(self, k: int) -> np.ndarray:
        return np.linspace(min(0.0, self.t_end), max(0.0, self.t_end), k)


def one_periodic_mechanism(theta_end: float = math.pi / 6) -> MechanismPath:
    """Counter-rotate the two unit-cell triangles; F(t) = cos(t) I."""
    if not 0.0 < theta_end < 2 * THIRD_PI:
        raise RangeExceeded(f"target angle {theta_end} outside (0, 2*pi/3)")
    ref = build_standard_kagome(1, 1)

    def frame(t):
        theta = THIRD_PI + t
        return math.cos(t) * np.eye(2), twisted_positions(theta)

    return MechanismPath(
        "one",
        {"theta_end": theta_end},
        ref,
        (-THIRD_PI, THIRD_PI),
        theta_end - THIRD_PI,
        frame,
    )


def twisted_to_twisted(theta: float, eta: float) -> MechanismPath:
    """Path between twisted lattices, starting at twist theta, parameterized
    by the angle increment t (the end lattice has twist theta + t)."""
    for a in (theta, eta):
        if not 0.0 < a < 2 * THIRD_PI:
            raise RangeExceeded(f"twist angle {a} outside (0, 2*pi/3)")
    ref = build_twisted_kagome(theta)
    c0 = math.cos(THIRD_PI - theta)

    def frame(t):
        eta_t = theta + t
        f = math.cos(THIRD_PI - eta_t) / c0 * np.eye(2)
        return f, twisted_positions(eta_t)

    return MechanismPath(
        "twisted",
        {"theta": theta, "eta": eta},
        ref,
        (-theta, 2 * THIRD_PI - theta),
        eta - theta,
        frame,
    )


def two_periodic_mechanism(
    theta1: float, theta2: float, theta3: float
) -> MechanismPath:
    """Three-parameter two-periodic family; t = 1 reaches the given angles.

    The three angles rotate three of the cell's shaded triangles; the fourth
    follows so the cell closes without macroscopic rotation.  F(t) = c(t) I.
    """
    theta4_angle(theta1, theta2, theta3)  # validate the endpoint
    ref = build_standard_kagome(2, 2)
    dirs = np.array([theta1, theta2, theta3]) - THIRD_PI

    def frame(t):
        a1, a2, a3 = THIRD_PI + t * dirs
        a4 = theta4_angle(a1, a2, a3)
        c = compression_ratio(a1, a2, a3)
        return c * np.eye(2), deformed_two_periodic_positions(a1, a2, a3, a4)

    return MechanismPath(
        "two",
        {"theta1": theta1, "theta2": theta2, "theta3": theta3},
        ref,
        (-1.0, 1.0),
        1.0,
        frame,
    )


def two_by_one_mechanism(gamma_end: float) -> MechanismPath:
    """Two-by-one family: rows alternate rotations gamma and 2*pi/3 - gamma,
    with gamma(t) = pi/3 + t."""
    if not 0.0 < gamma_end < 2 * THIRD_PI:
        raise RangeExceeded(f"angle {gamma_end} outside (0, 2*pi/3)")
    ref = build_standard_kagome(1, 2)

    def frame(t):
        g = THIRD_PI + t
        verts12 = deformed_two_periodic_positions(
            g, g, 2 * THIRD_PI - g, 2 * THIRD_PI - g
        )
        return math.cos(t) * np.eye(2), verts12[[0, 1, 2, 6, 7, 8]]

    return MechanismPath(
        "2x1",
        {"gamma_end": gamma_end},
        ref,
        (-THIRD_PI, THIRD_PI),
        gamma_end - THIRD_PI,
        frame,
    )


def two_by_two_mechanism(beta_end: float) -> MechanismPath:
    """Two-periodic family with beta(t) = pi/3 + t and the remaining angles
    mirrored to 2*pi/3 - beta."""
    if not 0.0 < beta_end < 2 * THIRD_PI:
        raise RangeExceeded(f"angle {beta_end} outside (0, 2*pi/3)")
    ref = build_standard_kagome(2, 2)

    def frame(t):
        b = THIRD_PI + t
        mb = 2 * THIRD_PI - b
        return math.cos(t) * np.eye(2), deformed_two_periodic_positions(b, mb, mb, b)

    return MechanismPath(
        "2x2",
        {"beta_end": beta_end},
        ref,
        (-THIRD_PI, THIRD_PI),
        beta_end - THIRD_PI,
        frame,
    )


# -- layered N-by-one families -------------------------------------------------

LAYER_TYPES = ("G1", "G2", "W1", "W2")

# Interface state below/above each layer type.  G layers keep the wedge state
# of the horizontal zigzag lines, W layers flip it.
_LAYER_BOTTOM = {"G1": "D", "W1": "D", "G2": "U", "W2": "U"}
_LAYER_TOP = {"G1": "D", "W1": "U", "G2": "U", "W2": "D"}


@dataclass(frozen=True)
class LayerSequence:
    """Word over {G1, G2, W1, W2}; periodic sequences check the wrap pair too."""

    layers: tuple[str, ...]
    periodic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def __len__(self) -> int:
        return len(self.layers)


def validate_layer_sequence(seq: LayerSequence) -> tuple[bool, int | None]:
    """Check the layering adjacency rule; returns (ok, first violating pair index)."""
    layers = seq.layers
    if not layers:
        raise InvalidSequence("empty layer sequence")
    for a in layers:
        if a not in LAYER_TYPES:
            raise InvalidSequence(f"unknown layer type {a!r}")
    n = len(layers)
    pairs = n if seq.periodic else n - 1
    for k in range(pairs):
        a, b = layers[k], layers[(k + 1) % n]
        if _LAYER_TOP[a] != _LAYER_BOTTOM[b]:
            return False, k
    return True, None


def layered_mechanism(seq: LayerSequence, theta: float) -> MechanismPath:
    """Stack G/W layers into an N-by-one mechanism with theta(t) = pi/3 - t.

    Each horizontal zigzag line folds into symmetric wedges; the interface
    state sequence follows the layer word.  Period is one cell horizontally
    and N cells in the 60 degree direction; F(t) = cos(t) I.  Non-periodic
    sequences build the same strip but report energy over interior edges only.
    """
    ok, where = validate_layer_sequence(seq)
    if not ok:
        raise InvalidSequence(f"layer pair {where} violates the adjacency rule")
    if not 0.0 <= theta <= 2 * THIRD_PI:
        raise RangeExceeded(
            f"angle {theta} gives compression outside [1/2, 1]"
        )
    n = len(seq)
    ref = build_standard_kagome(1, n)
    states = [_LAYER_TOP[a] for a in seq.layers]
    down = np.array([-0.5, SQRT3 / 2])
    up = np.array([0.5, SQRT3 / 2])

    def frame(t):
        c = math.cos(t)
        pos = np.empty((3 * n, 2))
        anchor = np.zeros(2)
        step = np.array([c, SQRT3 * c])
        for k, s in enumerate(states):
            rd = _rot(t if s == "U" else -t)
            pos[3 * k] = anchor
            pos[3 * k + 1] = anchor + rd @ up
            pos[3 * k + 2] = anchor + rd @ down
            anchor = anchor + step
        return c * np.eye(2), pos

    mask = None
    if not seq.periodic:
        mask = np.array([e.offset[1] == 0 for e in ref.edges])
    return MechanismPath(
        "layered",
        {"sequence": list(seq.layers), "periodic": seq.periodic, "theta": theta},
        ref,
        (-THIRD_PI, THIRD_PI),
        THIRD_PI - theta,
        frame,
        mask,
    )


def four_by_one_mechanism(theta: float) -> MechanismPath:
    """The G1,W1,G2,W2 stack: the smallest mechanism mixing both layer kinds."""
    if not 0.0 <= theta <= 2 * THIRD_PI:
        raise RangeExceeded(f"angle {theta} gives compression outside [1/2, 1]")
    path = layered_mechanism(LayerSequence(("G1", "W1", "G2", "W2")), theta)
    return MechanismPath(
        "4x1",
        {"theta": theta},
        path.reference,
        path.t_range,
        path.t_end,
        path.frame,
    )


# -- infinitesimal modes -------------------------------------------------------


def infinitesimal_mode(path: MechanismPath) -> tuple[np.ndarray, np.ndarray]:
    """(dF/dt, d phi/dt) at t = 0 by Richardson-extrapolated central differences.

    phi(t) = positions(t) - x F(t)^T is the periodic oscillation of the path.
    """
    x = path.reference.vertices

    def value(t):
        f, pos = path.evaluate(t)
        return f, pos - x @ f.T

    def central(h):
        fp, pp = value(h)
        fm, pm = value(-h)
        return (fp - fm) / (2 * h), (pp - pm) / (2 * h)

    h = 1e-3
    f1, p1 = central(h)
    f2, p2 = central(h / 2)
    return (4 * f2 - f1) / 3, (4 * p2 - p1) / 3


def one_periodic_infinitesimal_mode(n: int = 1, m: int = 1) -> np.ndarray:
    """The rotation mode of the smallest cell, replicated on an n x m supercell."""
    base = np.array([[0.0, 0.0], [-SQRT3 / 2, 0.5], [-SQRT3 / 2, -0.5]])
    return np.tile(base, (n * m, 1))


def two_periodic_infinitesimal_modes() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic axis modes of the two-periodic family on the 2x2 cell.

    Vertex order matches build_standard_kagome(2, 2): A,B,C per sub-cell,
    sub-cells (0,0),(1,0),(0,1),(1,1).
    """
    h = SQRT3 / 2
    mode1 = np.array(
        [
            [0.0, 0.0], [-h, 0.5], [-h, -0.5],
            [-h, -0.5], [-h, -0.5], [-h, -0.5],
            [0.0, 0.0], [0.0, 0.0], [0.0, 0.0],
            [-h, -0.5], [0.0, -1.0], [0.0, 0.0],
        ]
    )
    mode2 = np.array(
        [
            [0.0, 0.0], [0.0, 0.0], [0.0, 0.0],
            [h, -0.5], [0.0, 0.0], [0.0, -1.0],
            [h, -0.5], [h, -0.5], [h, -0.5],
            [0.0, 0.0], [h, -0.5], [h, 0.5],
        ]
    )
    mode3 = np.array(
        [
            [0.0, 0.0], [0.0, 0.0], [0.0, 0.0],
            [0.0, -1.0], [0.0, -1.0], [0.0, -1.0],
            [h, -0.5], [0.0, 0.0], [0.0, -1.0],
            [-h, -0.5], [0.0, -1.0], [0.0, 0.0],
        ]
    )
    return mode1, mode2, mode3


def four_by_one_infinitesimal_mode() -> np.ndarray:
    """Analytic mode of the G1,W1,G2,W2 stack on the 4-by-one cell."""
    h = SQRT3 / 2
    rows = []
    for k in range(4):
        sign = 1.0 if k in (0, 3) else -1.0
        rows.append([0.0, 0.0])
        rows.append([sign * h, -sign * 0.5])
        rows.append([sign * h, sign * 0.5])
    return np.array(rows)


def two_by_one_infinitesimal_mode() -> np.ndarray:
    """Analytic mode of the two-by-one family on the 1x2 cell."""
    h = SQRT3 / 2
    return np.array(
        [
            [0.0, 0.0], [h, -0.5], [h, 0.5],
            [0.0, 0.0], [-h, 0.5], [-h, -0.5],
        ]
    )
